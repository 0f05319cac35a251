//! Desk-size invariant battery, one line per (module, invariant).

use crate::config::RunConfig;
use rand::Rng;
use stres_core::evolution::{integrate, ExperimentConfig};
use stres_core::lp::{partition_error, project_band, project_low, BandRange};
use stres_core::normal_form::run_normal_form;
use stres_core::pseudo::{apply_bilinear_with, paraproduct_pieces, ApplicationMethod, CostGuard};
use stres_core::resonance::{build_cutoffs, default_widths, null_identity_residual, lattice_sample, partition_defect, PhaseSpec};
use stres_core::symbol::{build_q, q_separable, Linear};
use stres_core::testkit::{random_field, rng as seeded};
use stres_core::{Field, Grid};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub invariant: String,
    pub value: f64,
    pub tolerance: f64,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.value <= self.tolerance
    }
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.sub(b).l2() / b.l2().max(f64::MIN_POSITIVE)
}

struct Battery {
    override_tol: Option<f64>,
    checks: Vec<Check>,
}

impl Battery {
    fn push(&mut self, module: &'static str, invariant: impl Into<String>, value: stres_core::Result<f64>, tol: f64) {
        let tolerance = self.override_tol.unwrap_or(tol);
        let (value, error) = match value {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.checks.push(Check { module, invariant: invariant.into(), value, tolerance, error });
    }
}

pub fn run(cfg: &RunConfig) -> Vec<Check> {
    let mut b = Battery { override_tol: cfg.selftest.tolerance, checks: Vec::new() };
    let seed = cfg.seed;
    let g16 = Grid::new(10.0, 16).unwrap();
    let g32 = Grid::new(32.0, 32).unwrap();

    let f = random_field(&g32, seed, None);
    b.push("spectral_core", "plancherel", Ok((f.l2() - f.to_physical().l2()).abs() / f.l2()), 1e-12);
    b.push("spectral_core", "transform_round_trip", Ok(rel(&f.to_physical().to_frequency(), &f)), 1e-12);

    b.push("lp_toolkit", "partition_of_unity", Ok(partition_error(&g32)), 1e-10);
    let range = BandRange::of(&g32);
    let mut sum = project_low(&f, range.lo);
    for j in range.iter() {
        sum = sum.add(&project_band(&f, j));
    }
    b.push("lp_toolkit", "band_reconstruction", Ok(rel(&sum, &f)), 1e-10);

    let q = build_q(Linear::default()).unwrap();
    let sep = q_separable(Linear::default()).unwrap();
    let mut rng = seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p: Vec<[f64; 2]> = (0..2).map(|_| [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]).collect();
        worst = worst.max((sep.eval(&p).unwrap() - q.eval(&p).unwrap()).norm());
    }
    b.push("symbol_algebra", "q_separable_form", Ok(worst), 1e-12);

    b.push("resonance", "null_identity", Ok(null_identity_residual(1000, seed)), 1e-12);
    for spec in PhaseSpec::all() {
        let (dt, ds) = default_widths(&spec);
        let (dt, ds) = (cfg.cutoffs.delta_t.unwrap_or(dt), cfg.cutoffs.delta_s.unwrap_or(ds));
        let samples = lattice_sample(spec.arity());
        let defect = match build_cutoffs(&spec, 1.0, dt, ds) {
            // no R/S/T partition exists for this phase
            Err(stres_core::Error::UnsupportedPhase(_)) => continue,
            r => r.map(|fam| {
                [1.0, 4.0, 16.0].iter().map(|&t| partition_defect(&fam.at_time(t), &samples).0).fold(0.0, f64::max)
            }),
        };
        b.push("resonance", format!("build_cutoffs/{}", spec.label()), defect, 1e-12);
    }

    let guard = CostGuard::default();
    let mut worst = 0.0f64;
    let mut para = 0.0f64;
    for i in 0..4 {
        let mask = g16.dealias_mask();
        let f = random_field(&g16, seed + 10 + i, None).mask(&mask);
        let h = random_field(&g16, seed + 20 + i, None).mask(&mask);
        let direct = apply_bilinear_with(&q, &f, &h, ApplicationMethod::Direct, &guard);
        let fast = apply_bilinear_with(&sep, &f, &h, ApplicationMethod::Separable, &guard);
        match (direct, fast) {
            (Ok(d), Ok(s)) => worst = worst.max(rel(&s, &d)),
            _ => worst = f64::INFINITY,
        }
        let pieces = paraproduct_pieces(&f, &h, None).unwrap();
        para = para.max(rel(&pieces.sum(), &f.mul(&h)));
    }
    b.push("pseudo_product", "separable_equals_direct", Ok(worst), 1e-10);
    b.push("pseudo_product", "paraproduct_reconstruction", Ok(para), 1e-12);

    let free = ExperimentConfig {
        length: 10.0,
        n: 16,
        alpha: [0.0; 2],
        beta: [0.0; 2],
        t_final: 3.0,
        output_every: 0.5,
        ..cfg.run.clone()
    };
    b.push(
        "evolution",
        "free_profile_constant",
        integrate(&free).map(|tr| tr.fields.iter().map(|f| rel(f, &tr.fields[0])).fold(0.0, f64::max)),
        1e-11,
    );
    let small = ExperimentConfig { length: 10.0, n: 16, epsilon: 0.2, t_final: 3.0, output_every: 1.0, ..cfg.run.clone() };
    b.push(
        "normal_form",
        "decomposition_residual",
        run_normal_form(&small).map(|r| r.residuals.iter().copied().fold(0.0, f64::max)),
        1e-6,
    );
    b.checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_battery_passes() {
        let checks = run(&RunConfig::default());
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass()).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn narrow_cubic_widths_fail_coverage() {
        let mut cfg = RunConfig::default();
        cfg.cutoffs.delta_t = Some(0.1);
        cfg.cutoffs.delta_s = Some(0.1);
        let checks = run(&cfg);
        assert!(checks.iter().any(|c| !c.pass() && c.invariant == "build_cutoffs/+--"));
    }

    #[test]
    fn zero_tolerance_fails_on_round_off() {
        let mut cfg = RunConfig::default();
        cfg.selftest.tolerance = Some(0.0);
        assert!(run(&cfg).iter().any(|c| !c.pass()));
    }
}
