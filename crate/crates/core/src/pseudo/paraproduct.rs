//! Paraproduct decomposition and the model operators built from
//! Littlewood-Paley pieces.

use super::{apply_bilinear, ApplicationMethod};
use crate::lp::{project_band, project_low, BandRange};
use crate::symbol::Symbol;
use crate::{Error, Field, Result};

#[derive(Debug, Clone)]
pub struct ParaproductPieces {
    /// Pairs with the first index at least two above the second.
    pub high_low: Field,
    /// Pairs with the second index at least two above the first.
    pub low_high: Field,
    /// Pairs with indices at most one apart.
    pub high_high: Field,
}

impl ParaproductPieces {
    pub fn sum(&self) -> Field {
        self.high_low.add(&self.low_high).add(&self.high_high)
    }
}

/// Dyadic pieces of f: index lo-1 carries P_{<lo}, then P_lo..P_hi.
fn buckets(f: &Field) -> (i32, Vec<Field>) {
    let range = BandRange::of(f.grid());
    let mut out = vec![project_low(f, range.lo)];
    out.extend(range.iter().map(|j| project_band(f, j)));
    (range.lo - 1, out)
}

/// Splits B_m(f, g) by the relative size of the frequency bands of f and g.
/// With `m` absent the bilinear form is the pointwise product and the three
/// pieces add up to f g exactly.
pub fn paraproduct_pieces(f: &Field, g: &Field, m: Option<&Symbol>) -> Result<ParaproductPieces> {
    if f.grid() != g.grid() {
        return Err(Error::Config("paraproduct inputs live on different grids".into()));
    }
    let (_, fb) = buckets(f);
    let (_, gb) = buckets(g);
    let apply = |a: &Field, b: &Field| -> Result<Field> {
        match m {
            None => Ok(a.mul(b)),
            Some(m) => apply_bilinear(m, a, b, ApplicationMethod::Direct),
        }
    };
    let zero = Field::zeros(*f.grid(), crate::Repr::Physical);
    let mut pieces = ParaproductPieces { high_low: zero.clone(), low_high: zero.clone(), high_high: zero };
    // Cumulative low parts, lows[i] = sum of buckets 0..=i.
    let cumulative = |b: &[Field]| -> Vec<Field> {
        let mut acc: Vec<Field> = Vec::with_capacity(b.len());
        for x in b {
            let next = match acc.last() {
                None => x.clone(),
                Some(prev) => prev.add(x),
            };
            acc.push(next);
        }
        acc
    };
    let (flow, glow) = (cumulative(&fb), cumulative(&gb));
    for i in 0..fb.len() {
        if i >= 2 {
            pieces.high_low = pieces.high_low.add(&apply(&fb[i], &glow[i - 2])?);
            pieces.low_high = pieces.low_high.add(&apply(&flow[i - 2], &gb[i])?);
        }
        for k in i.saturating_sub(1)..(i + 2).min(gb.len()) {
            pieces.high_high = pieces.high_high.add(&apply(&fb[i], &gb[k])?);
        }
    }
    Ok(pieces)
}

/// Variant of the gap-J model operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    /// sum_j P_j(V_j) P_{<j-1} f3
    HighLow,
    /// sum_j P_{<j-1}(V_j) P_j f3
    LowHigh,
    /// sum_j P_j(V_j) P_j f3
    Diagonal,
}

impl ModelVariant {
    pub fn from_index(v: u8) -> Result<Self> {
        match v {
            1 => Ok(ModelVariant::HighLow),
            2 => Ok(ModelVariant::LowHigh),
            3 => Ok(ModelVariant::Diagonal),
            _ => Err(Error::Config(format!("model operator variant {v} is not in 1..=3"))),
        }
    }
}

/// sum over resolvable j of the variant applied to V_j = P_{j+J} f1 P_{j+J} f2 and f3.
pub fn model_operator(variant: ModelVariant, gap: i32, f1: &Field, f2: &Field, f3: &Field) -> Result<Field> {
    if gap < 0 {
        return Err(Error::Config(format!("gap {gap} is negative")));
    }
    let range = BandRange::of(f1.grid());
    let mut acc = Field::zeros(*f1.grid(), crate::Repr::Physical);
    for j in range.lo..=range.hi - gap {
        let v = project_band(f1, j + gap).mul(&project_band(f2, j + gap));
        let term = match variant {
            ModelVariant::HighLow => project_band(&v, j).mul(&project_low(f3, j - 1)),
            ModelVariant::LowHigh => project_low(&v, j - 1).mul(&project_band(f3, j)),
            ModelVariant::Diagonal => project_band(&v, j).mul(&project_band(f3, j)),
        };
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// sum over J >= G of 2^{-weight J} times the gap-J model operator.
pub fn summed_model_operator(variant: ModelVariant, min_gap: i32, weight: f64, f1: &Field, f2: &Field, f3: &Field) -> Result<Field> {
    let range = BandRange::of(f1.grid());
    let mut acc = Field::zeros(*f1.grid(), crate::Repr::Physical);
    for gap in min_gap.max(0)..=(range.hi - range.lo) {
        let c = 2f64.powf(-weight * gap as f64);
        acc = acc.add(&model_operator(variant, gap, f1, f2, f3)?.scale(c.into()));
    }
    Ok(acc)
}

/// sum_k P_{<k-G}(P_k f1 P_k f2) P_{<k-G} f3.
pub fn gapped_flag_operator(f1: &Field, f2: &Field, f3: &Field, gap: i32) -> Result<Field> {
    if gap < 2 {
        return Err(Error::Config(format!("gap {gap} is below 2")));
    }
    let range = BandRange::of(f1.grid());
    let mut acc = Field::zeros(*f1.grid(), crate::Repr::Physical);
    for k in range.iter() {
        let v = project_band(f1, k).mul(&project_band(f2, k));
        acc = acc.add(&project_low(&v, k - gap).mul(&project_low(f3, k - gap)));
    }
    Ok(acc)
}
