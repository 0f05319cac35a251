//! Versioned baseline file: measured constants stored at first run and the
//! comparisons later runs are judged by.

use crate::evolution::{half_octave_times, integrate, long_time_indicators, ExperimentConfig, LongTimeIndicators};
use crate::lp::{check_gagnir, frame_bounds};
use crate::normal_form::{envelope_maxima, run_normal_form};
use crate::suites::{group_of, run_all, Criterion, SuiteConfig, SuiteOutcome, UNIFORM_FACTOR};
use crate::symbol::{q_separable, Linear, Repr as SymbolRepr};
use crate::testkit::gaussian;
use crate::{Error, Grid, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const BASELINE_VERSION: u32 = 1;

/// Relative slack for "bounded by baseline" comparisons; covers
/// last-bit differences between builds, nothing more.
pub const BOUND_SLACK: f64 = 1e-9;

/// Calibration constants of the long-time comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy {
    pub paper: LongTimeIndicators,
    pub contrast: LongTimeIndicators,
    /// Largest admissible ratio of consecutive increments for "nonincreasing".
    pub increment_threshold: f64,
    /// Largest admissible sup t ||u||_inf relative to its value at the first time.
    pub decay_threshold: f64,
    /// Required excess of the contrast run over a threshold.
    pub violation_factor: f64,
}

impl Default for Dichotomy {
    fn default() -> Self {
        let zero = LongTimeIndicators { increment_growth: 0.0, decay_growth: 0.0 };
        Self { paper: zero, contrast: zero, increment_threshold: 1.0, decay_threshold: 2.0, violation_factor: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub version: u32,
    /// Scalar measured constants (separable rank, frame bounds, ...).
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub suites: Vec<SuiteOutcome>,
    #[serde(default)]
    pub dichotomy: Dichotomy,
    /// Max over the tracked window of each normalized norm quotient.
    #[serde(default)]
    pub envelopes: BTreeMap<String, f64>,
}

impl Default for Baseline {
    fn default() -> Self {
        Self {
            version: BASELINE_VERSION,
            constants: BTreeMap::new(),
            suites: Vec::new(),
            dichotomy: Dichotomy::default(),
            envelopes: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Baseline {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let b: Baseline = toml::from_str(&text).map_err(|e| Error::Format(format!("baseline: {e}")))?;
        if b.version != BASELINE_VERSION {
            return Err(Error::Format(format!("baseline version {} (expected {BASELINE_VERSION})", b.version)));
        }
        Ok(b)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(|e| Error::Format(format!("baseline: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteOutcome> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn compare_suite(&self, measured: &SuiteOutcome) -> Verdict {
        let Some(stored) = self.suite(&measured.name) else {
            return Verdict { pass: false, detail: format!("{}: no baseline", measured.name) };
        };
        compare(stored, measured)
    }

    /// Each measured envelope maximum against twice its stored value.
    pub fn compare_envelopes(&self, measured: &BTreeMap<String, f64>) -> Verdict {
        let mut bad = Vec::new();
        let mut worst = 0.0f64;
        for (k, v) in measured {
            match self.envelopes.get(k) {
                Some(b) if *b > 0.0 => {
                    worst = worst.max(v / b);
                    if *v > 2.0 * b {
                        bad.push(format!("{k} {v:.3e} > 2 x {b:.3e}"));
                    }
                }
                _ => bad.push(format!("{k}: no baseline")),
            }
        }
        let detail = if bad.is_empty() { format!("max measured/baseline {worst:.3}") } else { bad.join("; ") };
        Verdict { pass: bad.is_empty() && !measured.is_empty(), detail }
    }
}

fn compare(stored: &SuiteOutcome, measured: &SuiteOutcome) -> Verdict {
    let mut bad = Vec::new();
    match stored.criterion {
        Criterion::Bounded => {
            let cap = stored.max() * (1.0 + BOUND_SLACK);
            for p in &measured.points {
                if !(p.value <= cap) {
                    bad.push(format!("{} {:.4e} > {:.4e}", p.label, p.value, cap));
                }
            }
        }
        Criterion::Uniform => {
            for p in &measured.points {
                let Some(s) = stored.points.iter().find(|s| s.label == p.label) else {
                    bad.push(format!("{}: no baseline", p.label));
                    continue;
                };
                let r = p.value / s.value;
                if !(r <= UNIFORM_FACTOR && r >= 1.0 / UNIFORM_FACTOR) {
                    bad.push(format!("{} {:.4e} vs {:.4e}", p.label, p.value, s.value));
                }
            }
            if !(measured.spread() <= UNIFORM_FACTOR) {
                bad.push(format!("spread {:.3} over the sweep", measured.spread()));
            }
        }
        Criterion::Capped => {
            for p in &measured.points {
                let cap = UNIFORM_FACTOR * stored.group_max(group_of(&p.label));
                if !(p.value <= cap) {
                    bad.push(format!("{} {:.4e} > {:.4e}", p.label, p.value, cap));
                }
            }
        }
    }
    if measured.points.is_empty() {
        bad.push("no points".into());
    }
    let detail = if bad.is_empty() {
        format!("max {:.4e}, spread {:.3}", measured.max(), measured.spread())
    } else {
        bad.join("; ")
    };
    Verdict { pass: bad.is_empty(), detail }
}

impl Dichotomy {
    /// (paper within both thresholds, contrast exceeding one by the factor).
    pub fn judge(&self, paper: &LongTimeIndicators, contrast: &LongTimeIndicators) -> (bool, bool) {
        let paper_ok = paper.increment_growth <= self.increment_threshold && paper.decay_growth <= self.decay_threshold;
        let contrast_violates = contrast.increment_growth >= self.violation_factor * self.increment_threshold
            || contrast.decay_growth >= self.violation_factor * self.decay_threshold;
        (paper_ok, contrast_violates)
    }
}

/// Window of the envelope check.
pub const ENVELOPE_WINDOW: (f64, f64) = (2.0, 50.0);

/// The standard run carried on to the end of the envelope window.
pub fn envelope_config() -> ExperimentConfig {
    ExperimentConfig { t_final: ENVELOPE_WINDOW.1, ..Default::default() }
}

pub fn measure_envelopes(cfg: &ExperimentConfig) -> Result<BTreeMap<String, f64>> {
    let run = run_normal_form(cfg)?;
    Ok(envelope_maxima(&run.states, cfg.epsilon, ENVELOPE_WINDOW.0, ENVELOPE_WINDOW.1))
}

/// Long-time indicators of one of the two matched runs.
pub fn measure_dichotomy(contrast: bool) -> Result<LongTimeIndicators> {
    let cfg = ExperimentConfig::long_time(contrast);
    let traj = integrate(&cfg)?;
    long_time_indicators(&traj, &half_octave_times(8.0, cfg.t_final))
}

/// Scalar constants: frame bounds of the dyadic partition, the Gaussian
/// interpolation ratio at t = 1, the separable rank of q.
pub fn measure_constants() -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let g = Grid::new(32.0, 64)?;
    let (lo, hi) = frame_bounds(&g);
    out.insert("lp_frame_lower".into(), lo);
    out.insert("lp_frame_upper".into(), hi);
    let s = check_gagnir(&gaussian(&Grid::new(64.0, 128)?, 2.0, [0.0; 2], [0.0; 2]), 1.0);
    out.insert("gagnir_gaussian_t1".into(), s.lhs / s.rhs);
    if let SymbolRepr::Separable(sep) = &q_separable(Linear::default())?.repr {
        out.insert("q_separable_rank".into(), sep.terms.len() as f64);
    }
    Ok(out)
}

/// Measures everything a baseline file holds.
pub fn record(suites: &SuiteConfig) -> Result<Baseline> {
    let paper = measure_dichotomy(false)?;
    let contrast = measure_dichotomy(true)?;
    Ok(Baseline {
        version: BASELINE_VERSION,
        constants: measure_constants()?,
        suites: run_all(suites)?,
        dichotomy: Dichotomy { paper, contrast, ..Dichotomy::default() },
        envelopes: measure_envelopes(&envelope_config())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suites::SuitePoint;

    fn outcome(criterion: Criterion, values: &[f64]) -> SuiteOutcome {
        SuiteOutcome {
            name: "s".into(),
            criterion,
            points: values.iter().enumerate().map(|(i, &v)| SuitePoint { label: format!("p{i}"), value: v }).collect(),
        }
    }

    #[test]
    fn round_trip_through_toml() {
        let mut b = Baseline::default();
        b.constants.insert("rank".into(), 3.0);
        b.suites.push(outcome(Criterion::Uniform, &[1.0, 1.5]));
        b.envelopes.insert("g:l2".into(), 0.25);
        let dir = std::env::temp_dir().join(format!("stres-baseline-{}", std::process::id()));
        b.save(&dir).unwrap();
        assert_eq!(Baseline::load(&dir).unwrap(), b);
        std::fs::remove_file(dir).unwrap();
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let b = Baseline { version: 99, ..Default::default() };
        let path = std::env::temp_dir().join(format!("stres-baseline-v-{}", std::process::id()));
        b.save(&path).unwrap();
        assert!(matches!(Baseline::load(&path), Err(Error::Format(_))));
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn bounded_and_uniform_comparisons() {
        let mut b = Baseline::default();
        b.suites.push(outcome(Criterion::Bounded, &[1.0, 2.0]));
        assert!(b.compare_suite(&outcome(Criterion::Bounded, &[2.0, 0.1])).pass);
        assert!(!b.compare_suite(&outcome(Criterion::Bounded, &[2.1])).pass);
        b.suites[0] = outcome(Criterion::Uniform, &[1.0, 1.5]);
        assert!(b.compare_suite(&outcome(Criterion::Uniform, &[1.2, 1.9])).pass);
        assert!(!b.compare_suite(&outcome(Criterion::Uniform, &[0.4, 1.5])).pass);
        assert!(!b.compare_suite(&outcome(Criterion::Uniform, &[1.0, 2.9])).pass);
        b.suites[0] = outcome(Criterion::Capped, &[1.0, 0.1]);
        assert!(b.compare_suite(&outcome(Criterion::Capped, &[0.01, 1.9])).pass);
        assert!(!b.compare_suite(&outcome(Criterion::Capped, &[2.1, 0.1])).pass);
    }

    #[test]
    fn envelope_comparison_uses_factor_two() {
        let mut b = Baseline::default();
        b.envelopes.insert("g:l2".into(), 1.0);
        let mut m = BTreeMap::new();
        m.insert("g:l2".to_string(), 1.9);
        assert!(b.compare_envelopes(&m).pass);
        m.insert("g:l2".to_string(), 2.1);
        assert!(!b.compare_envelopes(&m).pass);
        m.insert("h:l2".to_string(), 0.1);
        assert!(!b.compare_envelopes(&m).pass);
    }

    #[test]
    fn dichotomy_judgement() {
        let d = Dichotomy::default();
        let calm = LongTimeIndicators { increment_growth: 0.8, decay_growth: 1.1 };
        let wild = LongTimeIndicators { increment_growth: 1.6, decay_growth: 1.1 };
        assert_eq!(d.judge(&calm, &wild), (true, true));
        assert_eq!(d.judge(&wild, &calm), (false, false));
    }
}
