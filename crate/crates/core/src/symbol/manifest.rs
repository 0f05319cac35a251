use super::{ClassTag, Repr, Symbol};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub arity: usize,
    pub representation: String,
    pub class: Option<ClassTag>,
    pub rank: Option<usize>,
    pub error: Option<f64>,
}

impl From<&Symbol> for ManifestEntry {
    fn from(s: &Symbol) -> Self {
        let (rank, error) = match &s.repr {
            Repr::Separable(sep) => (Some(sep.terms.len()), Some(sep.error)),
            _ => (None, None),
        };
        Self {
            name: s.name.clone(),
            arity: s.arity,
            representation: s.representation().into(),
            class: s.class,
            rank,
            error,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolManifest {
    pub symbol: Vec<ManifestEntry>,
}

impl SymbolManifest {
    pub fn push(&mut self, s: &Symbol) {
        self.symbol.push(s.into());
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| crate::Error::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| crate::Error::Format(e.to_string()))
    }
}
