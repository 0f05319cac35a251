//! Closed-form resonant sets written out by hand as set equations,
//! independent of the phase code, and a Hausdorff comparison against the
//! extracted point clouds.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stres_core::resonance::{ResonantSets, SearchBox, SetKind};

#[derive(Debug, Clone)]
pub enum ClosedSet {
    /// Vector equations sum_k a_k p_k = 0, one row per equation.
    Linear(Vec<Vec<f64>>),
    /// sum_ij b_ij p_i . p_j = 0.
    Quadric(Vec<Vec<f64>>),
}

fn origin(n: usize) -> ClosedSet {
    ClosedSet::Linear((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
}

/// (S, T, R) for each phase label.
pub fn closed_forms(label: &str) -> [ClosedSet; 3] {
    use ClosedSet::*;
    match label {
        // xi = 2 eta ; eta.(xi - eta) = 0 ; {0}
        "++" => [Linear(vec![vec![1.0, -2.0]]), Quadric(vec![vec![0.0, 0.5], vec![0.5, -1.0]]), origin(2)],
        // xi = 2 eta ; {0} ; {0}
        "--" => [Linear(vec![vec![1.0, -2.0]]), origin(2), origin(2)],
        // xi = 0 ; xi.eta = 0 ; xi = 0
        "-+" => [Linear(vec![vec![1.0, 0.0]]), Quadric(vec![vec![0.0, 0.5], vec![0.5, 0.0]]), Linear(vec![vec![1.0, 0.0]])],
        // mirror of -+ under eta <-> xi - eta: xi = 0 ; xi.(xi - eta) = 0 ; xi = 0
        "+-" => [Linear(vec![vec![1.0, 0.0]]), Quadric(vec![vec![1.0, -0.5], vec![-0.5, 0.0]]), Linear(vec![vec![1.0, 0.0]])],
        // xi = 3 sigma = 3 eta / 2 ; xi^2 = (xi-eta)^2 + (eta-sigma)^2 + sigma^2 ; {0}
        "+++" => [
            Linear(vec![vec![1.0, 0.0, -3.0], vec![0.0, 1.0, -2.0]]),
            Quadric(vec![vec![0.0, 1.0, 0.0], vec![1.0, -2.0, 1.0], vec![0.0, 1.0, -2.0]]),
            origin(3),
        ],
        // xi = sigma = eta / 2 ; |xi-eta|^2 = xi^2 + (eta-sigma)^2 + sigma^2 ; {0}
        "+--" => [
            Linear(vec![vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -2.0]]),
            Quadric(vec![vec![0.0, -1.0, 0.0], vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, -2.0]]),
            origin(3),
        ],
        // xi = sigma = eta / 2 ; xi^2 + (xi-eta)^2 = (eta-sigma)^2 + sigma^2 ; xi = sigma = eta / 2
        "-++" => [
            Linear(vec![vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -2.0]]),
            Quadric(vec![vec![2.0, -1.0, 0.0], vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, -2.0]]),
            Linear(vec![vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -2.0]]),
        ],
        // xi = 3 sigma = 3 eta / 2 ; {0} ; {0}
        "---" => [Linear(vec![vec![1.0, 0.0, -3.0], vec![0.0, 1.0, -2.0]]), origin(3), origin(3)],
        _ => panic!("no closed form for {label}"),
    }
}

/// The literal +-- display: eta^2 = xi^2 + (eta-sigma)^2 + sigma^2.
pub fn literal_t_plus_minus_minus() -> ClosedSet {
    ClosedSet::Quadric(vec![vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, -2.0]])
}

fn expand(m: &[Vec<f64>], per_var: usize) -> DMatrix<f64> {
    let (r, c) = (m.len(), m[0].len());
    DMatrix::from_fn(r * per_var, c * per_var, |a, b| if a % per_var == b % per_var { m[a / per_var][b / per_var] } else { 0.0 })
}

/// Oracle view of a closed set on a search slice.
pub struct Oracle {
    set: ClosedSet,
    a: DMatrix<f64>,
    search: SearchBox,
    dim: usize,
}

impl Oracle {
    pub fn new(set: ClosedSet, search: SearchBox, arity: usize) -> Self {
        let m = match &set {
            ClosedSet::Linear(rows) => rows.clone(),
            ClosedSet::Quadric(b) => b.clone(),
        };
        Oracle { a: expand(&m, search.per_var), set, search, dim: arity * search.per_var }
    }

    fn f(&self, y: &DVector<f64>) -> f64 {
        y.dot(&(&self.a * y))
    }

    /// Exact for linear sets, an upper bound (Newton projection) for quadrics.
    pub fn distance(&self, y0: &DVector<f64>) -> f64 {
        match self.set {
            ClosedSet::Linear(_) => {
                let svd = self.a.clone().svd(true, true);
                let vt = svd.v_t.unwrap();
                let tol = 1e-10 * svd.singular_values.max();
                let mut d2 = 0.0;
                for (k, s) in svd.singular_values.iter().enumerate() {
                    if *s > tol {
                        d2 += vt.row(k).dot(&y0.transpose()).powi(2);
                    }
                }
                d2.sqrt()
            }
            ClosedSet::Quadric(_) => {
                let mut y = y0.clone();
                for _ in 0..200 {
                    let f = self.f(&y);
                    if f.abs() <= 1e-14 * (1.0 + y.norm_squared()) {
                        break;
                    }
                    let g = 2.0 * (&self.a * &y);
                    let g2 = g.norm_squared();
                    if g2 < 1e-300 {
                        break;
                    }
                    y -= g * (f / g2);
                }
                let on_set = self.f(&y).abs() <= 1e-10 * (1.0 + y.norm_squared());
                let via_newton = if on_set { (&y - y0).norm() } else { f64::INFINITY };
                via_newton.min(y0.norm())
            }
        }
    }

    fn in_hull(&self, y: &DVector<f64>) -> bool {
        let hi = self.search.coord(self.search.per_axis - 1);
        y.iter().all(|&v| v >= -self.search.extent && v <= hi)
    }

    /// Points of the set inside the search box.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = self.search.extent;
        let mut out = vec![DVector::zeros(self.dim)];
        let mut attempts = 0;
        while out.len() < count && attempts < 200 * count {
            attempts += 1;
            match self.set {
                ClosedSet::Linear(_) => {
                    let svd = self.a.clone().svd(true, true);
                    let vt = svd.v_t.unwrap();
                    let tol = 1e-10 * svd.singular_values.max();
                    let mut y = DVector::from_fn(self.dim, |_, _| rng.gen_range(-e..e));
                    for (k, s) in svd.singular_values.iter().enumerate() {
                        if *s > tol {
                            let row = vt.row(k).transpose();
                            let c = row.dot(&y);
                            y -= row * c;
                        }
                    }
                    if self.in_hull(&y) {
                        out.push(y);
                    }
                }
                ClosedSet::Quadric(_) => {
                    let y0 = DVector::from_fn(self.dim, |_, _| rng.gen_range(-e..e));
                    let d = DVector::from_fn(self.dim, |_, _| rng.gen_range(-1.0..1.0));
                    let qa = self.f(&d);
                    let qb = 2.0 * d.dot(&(&self.a * &y0));
                    let qc = self.f(&y0);
                    let disc = qb * qb - 4.0 * qa * qc;
                    if qa.abs() < 1e-12 || disc < 0.0 {
                        continue;
                    }
                    for t in [(-qb + disc.sqrt()) / (2.0 * qa), (-qb - disc.sqrt()) / (2.0 * qa)] {
                        let y = &y0 + &d * t;
                        if self.in_hull(&y) {
                            out.push(y);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Hausdorff {
    pub cloud_to_set: f64,
    pub set_to_cloud: f64,
}

impl Hausdorff {
    pub fn value(&self) -> f64 {
        self.cloud_to_set.max(self.set_to_cloud)
    }
}

pub fn hausdorff(sets: &ResonantSets, kind: SetKind, oracle: &Oracle, samples: usize) -> Hausdorff {
    let mut cloud_to_set = 0.0f64;
    let mut any = false;
    for idx in sets.indices(kind) {
        any = true;
        let y = DVector::from_vec(sets.point(idx));
        cloud_to_set = cloud_to_set.max(oracle.distance(&y));
    }
    if !any {
        cloud_to_set = f64::INFINITY;
    }
    let mut set_to_cloud = 0.0f64;
    for y in oracle.sample(samples, 17) {
        let d = sets.distance_to_cloud(kind, y.as_slice(), 2).unwrap_or(f64::INFINITY);
        set_to_cloud = set_to_cloud.max(d);
    }
    Hausdorff { cloud_to_set, set_to_cloud }
}
