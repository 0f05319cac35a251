use super::*;
use crate::lp::{low_profile, band_profile, BandRange};
use crate::symbol::{build_q, q_separable, Linear};
use crate::testkit::{random_field, random_localized};

fn rel(a: &Field, b: &Field) -> f64 {
    let (a, b) = (a.to_frequency(), b.to_frequency());
    let scale = b.values().iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

fn grid(n: usize) -> Grid {
    Grid::new(8.0, n).unwrap()
}

fn smooth2(name: &str, a: f64) -> Symbol {
    Symbol::closed(name, 2, move |p| {
        let (x, y) = (p[0], p[1]);
        let r = x[0] * x[0] + x[1] * x[1] + 2.0 * (y[0] * y[0] + y[1] * y[1]);
        C64::new(1.0 / (1.0 + a * r), a * (x[0] - y[1]) / (1.0 + r))
    })
}

#[test]
fn unit_symbol_gives_pointwise_product() {
    let g = grid(16);
    let (f, h) = (random_field(&g, 1, None), random_field(&g, 2, None));
    let out = apply_bilinear(&Symbol::one(2), &f, &h, ApplicationMethod::Direct).unwrap();
    assert!(rel(&out, &f.mul(&h)) < 1e-12);
}

#[test]
fn single_modes_give_one_output_mode() {
    let g = grid(16);
    let m = smooth2("m", 0.3);
    let (a, b) = ([2i64, -1], [3i64, 4]);
    let out = apply_bilinear(&m, &Field::mode(g, a), &Field::mode(g, b), ApplicationMethod::Direct).unwrap();
    let dk = g.dk();
    let eta = [a[0] as f64 * dk, a[1] as f64 * dk];
    let xi = [(a[0] + b[0]) as f64 * dk, (a[1] + b[1]) as f64 * dk];
    let want = Field::mode(g, [a[0] + b[0], a[1] + b[1]]).scale(m.eval(&[xi, eta]).unwrap());
    assert!(rel(&out, &want) < 1e-12);
}

#[test]
fn separable_q_matches_direct() {
    let g = grid(16);
    let l = Linear::default();
    let (q, qs) = (build_q(l).unwrap(), q_separable(l).unwrap());
    for seed in 0..3 {
        let (f, h) = (random_field(&g, seed, None), random_field(&g, seed + 50, None));
        let d = apply_bilinear(&q, &f, &h, ApplicationMethod::Direct).unwrap();
        let s = apply_bilinear(&qs, &f, &h, ApplicationMethod::Separable).unwrap();
        assert!(rel(&s, &d) < 1e-10, "seed {seed}: {}", rel(&s, &d));
    }
}

#[test]
fn separable_needs_separable_symbol() {
    let g = grid(8);
    let f = random_field(&g, 1, None);
    let err = apply_bilinear(&smooth2("m", 1.0), &f, &f, ApplicationMethod::Separable).unwrap_err();
    assert!(matches!(err, Error::MethodMismatch(_)));
}

#[test]
fn periodic_separable_matches_on_dealiased_modes() {
    let g = grid(24);
    let qs = q_separable(Linear::default()).unwrap();
    let (f, h) = (random_field(&g, 3, Some(8)), random_field(&g, 4, Some(8)));
    let keep = g.dealias_mask();
    let a = apply_separable_periodic(&qs, &f, &h).unwrap().mask(&keep);
    let b = apply_bilinear(&qs, &f, &h, ApplicationMethod::Separable).unwrap().mask(&keep);
    assert!(rel(&a, &b) < 1e-12);
}

#[test]
fn cost_guard_blocks_large_direct_quadrature() {
    let g = grid(80);
    let f = random_field(&g, 1, Some(2));
    let err = apply_bilinear(&Symbol::one(2), &f, &f, ApplicationMethod::Direct).unwrap_err();
    assert!(matches!(err, Error::CostGuard(_)));
    assert!(apply_bilinear_with(&Symbol::one(2), &f, &f, ApplicationMethod::Direct, &CostGuard::unlimited()).is_ok());
}

#[test]
fn factored_phase_matches_direct_for_all_quadratic_phases() {
    let g = grid(16);
    let qs = q_separable(Linear::default()).unwrap();
    let q = build_q(Linear::default()).unwrap();
    let (f, h) = (random_field(&g, 7, None), random_field(&g, 8, None));
    for spec in PhaseSpec::all().into_iter().filter(|s| s.arity() == 2) {
        let guard = CostGuard::default();
        let direct = apply_bilinear_phased(&Phased { m: q.clone(), phase: spec, s: 0.37 }, &f, &h, ApplicationMethod::Direct, &guard).unwrap();
        let fac = apply_bilinear_phased(&Phased { m: q.clone(), phase: spec, s: 0.37 }, &f, &h, ApplicationMethod::FactoredPhase, &guard).unwrap();
        let sep = apply_bilinear_phased(&Phased { m: qs.clone(), phase: spec, s: 0.37 }, &f, &h, ApplicationMethod::Separable, &guard).unwrap();
        assert!(rel(&fac, &direct) < 1e-10, "{spec}: {}", rel(&fac, &direct));
        assert!(rel(&sep, &direct) < 1e-10, "{spec}: {}", rel(&sep, &direct));
    }
}

#[test]
fn unit_trilinear_gives_triple_product() {
    let g = grid(8);
    let fs: Vec<Field> = (0..3).map(|s| random_field(&g, s, None)).collect();
    let out = apply_trilinear(&Trilinear::Plain(Symbol::one(3)), &fs[0], &fs[1], &fs[2], ApplicationMethod::Direct).unwrap();
    assert!(rel(&out, &fs[0].mul(&fs[1]).mul(&fs[2])) < 1e-12);
}

#[test]
fn trilinear_single_modes() {
    let g = grid(8);
    let m = Symbol::closed("m3", 3, |p| C64::new(1.0 + p[0][0] - 0.5 * p[1][1], p[2][0] * p[2][1]));
    let (s0, k1, k2) = ([1i64, 2], [-3i64, 1], [2i64, 2]);
    let out = apply_trilinear(&Trilinear::Plain(m.clone()), &Field::mode(g, s0), &Field::mode(g, k1), &Field::mode(g, k2), ApplicationMethod::Direct).unwrap();
    let f = |k: [i64; 2]| [k[0] as f64 * g.dk(), k[1] as f64 * g.dk()];
    let sigma = f(s0);
    let eta = f([s0[0] + k1[0], s0[1] + k1[1]]);
    let xi_k = [s0[0] + k1[0] + k2[0], s0[1] + k1[1] + k2[1]];
    let want = Field::mode(g, xi_k).scale(m.eval(&[f(xi_k), eta, sigma]).unwrap());
    assert!(rel(&out, &want) < 1e-12);
}

fn test_flag() -> FlagSymbol {
    FlagSymbol::new(Symbol::one(3), smooth2("first", 0.4), smooth2("second", 0.9)).unwrap()
}

#[test]
fn nested_flag_matches_direct() {
    let g = grid(12);
    let m = Trilinear::Flag(test_flag());
    for seed in 0..2 {
        let fs: Vec<Field> = (0..3).map(|i| random_field(&g, 10 * seed + i, None)).collect();
        let d = apply_trilinear(&m, &fs[0], &fs[1], &fs[2], ApplicationMethod::Direct).unwrap();
        let n = apply_trilinear(&m, &fs[0], &fs[1], &fs[2], ApplicationMethod::Separable).unwrap();
        assert!(rel(&n, &d) < 1e-9, "{}", rel(&n, &d));
    }
}

#[test]
fn nested_flag_needs_unit_outer_factor() {
    let g = grid(8);
    let f = random_field(&g, 1, None);
    let flag = FlagSymbol::new(Symbol::constant(3, C64::new(2.0, 0.0)), smooth2("a", 1.0), smooth2("b", 1.0)).unwrap();
    let err = apply_trilinear(&Trilinear::Flag(flag), &f, &f, &f, ApplicationMethod::Separable).unwrap_err();
    assert!(matches!(err, Error::MethodMismatch(_)));
}

#[test]
fn trilinear_factored_phase_matches_direct() {
    let g = grid(8);
    let fs: Vec<Field> = (0..3).map(|i| random_field(&g, 20 + i, None)).collect();
    let guard = CostGuard::default();
    for spec in PhaseSpec::all().into_iter().filter(|s| s.arity() == 3) {
        let p = Phased { m: Trilinear::Flag(test_flag()), phase: spec, s: 0.21 };
        let d = apply_trilinear_phased(&p, &fs[0], &fs[1], &fs[2], ApplicationMethod::Direct, &guard).unwrap();
        let fac = apply_trilinear_phased(&p, &fs[0], &fs[1], &fs[2], ApplicationMethod::FactoredPhase, &guard).unwrap();
        assert!(rel(&fac, &d) < 1e-9, "{spec}: {}", rel(&fac, &d));
    }
}

#[test]
fn kernel_matches_direct() {
    let g = grid(8);
    let flag = test_flag();
    let kernel = TrilinearKernel::new(g, &|p| flag.eval(p).unwrap(), &CostGuard::default()).unwrap();
    let fs: Vec<Field> = (0..3).map(|i| random_field(&g, 30 + i, None)).collect();
    let d = apply_trilinear(&Trilinear::Flag(flag.clone()), &fs[0], &fs[1], &fs[2], ApplicationMethod::Direct).unwrap();
    assert!(rel(&kernel.apply(&fs[0], &fs[1], &fs[2]), &d) < 1e-12);
}

#[test]
fn paraproduct_reconstructs_product() {
    let g = grid(32);
    for seed in 0..5 {
        let (f, h) = (random_localized(&g, seed, 1.5), random_field(&g, seed + 9, None));
        let p = paraproduct_pieces(&f, &h, None).unwrap();
        assert!(rel(&p.sum(), &f.mul(&h)) < 1e-12);
    }
    let z = Field::zeros(g, crate::Repr::Physical);
    let p = paraproduct_pieces(&z, &z, None).unwrap();
    assert!(p.high_low.is_zero() && p.low_high.is_zero() && p.high_high.is_zero());
}

#[test]
fn separated_bands_land_in_one_piece() {
    let g = Grid::new(64.0, 128).unwrap();
    let range = BandRange::of(&g);
    let j0 = range.lo + 1;
    let f = project_band(&random_field(&g, 1, None), j0);
    let h = project_band(&random_field(&g, 2, None), j0 + 5);
    assert!(range.contains(j0 + 5));
    let p = paraproduct_pieces(&f, &h, None).unwrap();
    let total = f.mul(&h).l2();
    assert!(p.low_high.sub(&f.mul(&h)).l2() < 1e-12 * total);
    assert!(p.high_low.l2() < 1e-12 * total && p.high_high.l2() < 1e-12 * total);
}

use crate::lp::project_band;

#[test]
fn model_operator_vanishes_without_third_input() {
    let g = grid(32);
    let (f, h) = (random_field(&g, 1, None), random_field(&g, 2, None));
    let z = Field::zeros(g, crate::Repr::Physical);
    for v in 1..=3 {
        let out = model_operator(ModelVariant::from_index(v).unwrap(), 1, &f, &h, &z).unwrap();
        assert!(out.is_zero());
    }
}

#[test]
fn model_operator_vanishes_when_bands_miss() {
    let g = Grid::new(64.0, 128).unwrap();
    let range = BandRange::of(&g);
    // f1, f2 only in the lowest resolvable band; with gap 3 no P_{j+3} sees them.
    let f = project_band(&random_field(&g, 1, None), range.lo);
    let h = random_field(&g, 3, None);
    let out = model_operator(ModelVariant::HighLow, 3, &f, &f, &h).unwrap();
    assert!(out.l2() < 1e-14 * f.l2() * f.l2() * h.l2());
}

#[test]
fn gapped_flag_with_huge_gap_is_zero() {
    let g = grid(16);
    let fs: Vec<Field> = (0..3).map(|i| random_field(&g, i, None)).collect();
    // Only the zero mode survives P_{<k-40}; a mean-free third input kills it.
    let f3 = crate::testkit::zero_mean(&fs[2]);
    let out = gapped_flag_operator(&fs[0], &fs[1], &f3, 40).unwrap();
    assert!(out.l2() < 1e-12);
}

#[test]
fn gapped_flag_single_band_is_one_term() {
    let g = Grid::new(64.0, 64).unwrap();
    let range = BandRange::of(&g);
    let k0 = range.hi - 1;
    let f = project_band(&random_localized(&g, 4, 6.0), k0);
    let low = project_low(&random_localized(&g, 5, 6.0), k0 - 3);
    let out = gapped_flag_operator(&f, &f, &low, 3).unwrap();
    let mut want = Field::zeros(g, crate::Repr::Physical);
    for k in k0 - 1..=(k0 + 1).min(range.hi) {
        let v = project_band(&f, k).mul(&project_band(&f, k));
        want = want.add(&crate::lp::project_low(&v, k - 3).mul(&crate::lp::project_low(&low, k - 3)));
    }
    assert!(rel(&out, &want) < 1e-12);
}

use crate::lp::project_low;

#[test]
fn gapped_flag_matches_direct_trilinear() {
    let g = grid(16);
    let range = BandRange::of(&g);
    let gap = 3;
    let (dk, n) = (g.dk(), g.n() as i64);
    let wrap = move |x: f64| {
        let k = (x / dk).round() as i64;
        (k + n / 2).rem_euclid(n) as f64 * dk - (n / 2) as f64 * dk
    };
    let r = |x: Freq| (x[0] * x[0] + x[1] * x[1]).sqrt();
    let symbol = move |p: &[Freq]| {
        let (xi, eta, sigma) = (p[0], p[1], p[2]);
        let eta_w = [wrap(eta[0]), wrap(eta[1])];
        let rest = [eta[0] - sigma[0], eta[1] - sigma[1]];
        let third = [xi[0] - eta[0], xi[1] - eta[1]];
        let mut acc = 0.0;
        for k in range.iter() {
            let s = 2f64.powi(-k);
            let sl = 2f64.powi(gap - k);
            acc += band_profile(r(sigma) * s) * band_profile(r(rest) * s) * low_profile(r(eta_w) * sl) * low_profile(r(third) * sl);
        }
        C64::new(acc, 0.0)
    };
    for seed in 0..2 {
        let fs: Vec<Field> = (0..3).map(|i| random_field(&g, 40 + 3 * seed + i, None)).collect();
        let fast = gapped_flag_operator(&fs[0], &fs[1], &fs[2], gap).unwrap();
        let direct = direct_triples(&fs[0], &fs[1], &fs[2], &symbol).fold();
        assert!(rel(&fast, &direct) < 1e-9, "{}", rel(&fast, &direct));
    }
}

#[test]
fn measurement_is_deterministic_and_holder_checked() {
    let g = grid(16);
    let e = Exponents::new(&[4.0, 4.0], 2.0);
    assert!(e.is_holder());
    let op = |f: &Field, h: &Field| apply_bilinear(&Symbol::one(2), f, h, ApplicationMethod::Direct);
    let a = measure_bilinear(&g, &e, 4, 3, op).unwrap();
    let b = measure_bilinear(&g, &e, 4, 3, op).unwrap();
    assert_eq!(a.max_ratio, b.max_ratio);
    // Hoelder: ||fg||_2 <= ||f||_4 ||g||_4 holds exactly for the discrete norms.
    assert!(a.max_ratio <= 1.0 + 1e-12);
}
