//! Point-cloud extraction of the space, time and space-time resonant sets.

use super::phase::PhaseSpec;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::io::Write;

/// Search lattice: `per_axis` points -extent + i h, h = 2 extent / per_axis,
/// so the origin is a lattice point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub per_axis: usize,
    pub extent: f64,
    /// Coordinates kept per frequency variable: 2 for the full plane, 1 for
    /// the slice where every variable lies on the first axis.
    pub per_var: usize,
}

impl SearchBox {
    /// Full planar box for quadratic phases, axial slice for cubic ones
    /// (a 64^6 planar search is out of reach).
    pub fn default_for(spec: &PhaseSpec) -> Self {
        SearchBox { per_axis: 64, extent: 4.0, per_var: if spec.arity() == 2 { 2 } else { 1 } }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.per_axis as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    /// Nearest lattice index along one axis, clamped to the box.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x + self.extent) / self.spacing()).round();
        i.clamp(0.0, (self.per_axis - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classifier {
    /// Flags lattice points within half a cell diagonal of each set, using
    /// exact distances to the subspace and the quadric cone.
    CellDistance,
    /// |grad| < tol (|p|+1) for S, |phi| < tol (|p|+1)^2 for T, both for R.
    Scaled { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    S,
    T,
    R,
}

impl SetKind {
    fn bit(self) -> u8 {
        match self {
            SetKind::S => 1,
            SetKind::T => 2,
            SetKind::R => 4,
        }
    }
}

/// The phase restricted to the search slice: phase(y) = y^T Q y and the
/// inner gradient equals G y.
#[derive(Debug, Clone)]
pub struct SliceForm {
    pub q: DMatrix<f64>,
    pub grad: DMatrix<f64>,
}

impl SliceForm {
    pub fn new(spec: &PhaseSpec, per_var: usize) -> Self {
        let q0 = spec.form();
        let n = spec.arity();
        let d = n * per_var;
        let q = DMatrix::from_fn(d, d, |a, b| if a % per_var == b % per_var { q0[a / per_var][b / per_var] } else { 0.0 });
        let inner: Vec<usize> = (1..n).collect();
        let grad = DMatrix::from_fn(inner.len() * per_var, d, |r, c| {
            let v = inner[r / per_var];
            if r % per_var == c % per_var {
                2.0 * q0[v][c / per_var]
            } else {
                0.0
            }
        });
        SliceForm { q, grad }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn phase(&self, y: &DVector<f64>) -> f64 {
        y.dot(&(&self.q * y))
    }
}

/// Distance to the cone {y^T Q y = 0}, computed in the eigenbasis of Q.
#[derive(Debug, Clone)]
pub struct ConeDistance {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl ConeDistance {
    pub fn new(q: &DMatrix<f64>) -> Self {
        Self::with_scale(q, q.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Eigenvalues below 1e-12 `scale` are treated as exact zeros.
    pub fn with_scale(q: &DMatrix<f64>, scale: f64) -> Self {
        let eig = SymmetricEigen::new(q.clone());
        let values = eig.eigenvalues.iter().map(|&v| if v.abs() <= 1e-12 * scale { 0.0 } else { v }).collect();
        ConeDistance { values, vectors: eig.eigenvectors }
    }

    pub fn distance(&self, y: &DVector<f64>) -> f64 {
        let c: Vec<f64> = (self.vectors.transpose() * y).iter().copied().collect();
        cone_distance(&self.values, &c)
    }
}

/// Distance from the point with eigen-coordinates `c` to sum lam_i y_i^2 = 0.
pub fn cone_distance(lam: &[f64], c: &[f64]) -> f64 {
    let lmax = lam.iter().cloned().fold(0.0f64, f64::max);
    let lmin = lam.iter().cloned().fold(0.0f64, f64::min);
    if lmax == 0.0 || lmin == 0.0 {
        // semidefinite: the zero set is the kernel
        return lam.iter().zip(c).filter(|(l, _)| **l != 0.0).map(|(_, x)| x * x).sum::<f64>().sqrt();
    }
    let size = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top = |l: f64| l >= lmax * (1.0 - 1e-9);
    let bottom = |l: f64| l <= lmin * (1.0 - 1e-9);
    // components of the extreme eigenspaces below this are treated as zero
    let floor = 1e-9 * size;
    let c: Vec<f64> = lam
        .iter()
        .zip(c)
        .map(|(&l, &x)| if (top(l) || bottom(l)) && x.abs() <= floor { 0.0 } else { x })
        .collect();
    let g = |mu: f64| -> f64 { lam.iter().zip(&c).map(|(l, x)| l * x * x / (1.0 + mu * l).powi(2)).sum() };
    if g(0.0) == 0.0 {
        return 0.0;
    }
    let (lo, hi) = (-1.0 / lmax, -1.0 / lmin);
    // degenerate case: the multiplier sits on an end of the bracket and the
    // free component along the extreme eigenspace closes the gap
    let edge = |mu: f64, extreme: &dyn Fn(f64) -> bool, l_ext: f64| -> Option<f64> {
        if lam.iter().zip(&c).any(|(&l, &x)| extreme(l) && x != 0.0) {
            return None;
        }
        let mut rest = 0.0;
        let mut d2 = 0.0;
        for (&l, &x) in lam.iter().zip(&c) {
            if extreme(l) {
                continue;
            }
            let y = x / (1.0 + mu * l);
            rest += l * y * y;
            d2 += (y - x).powi(2);
        }
        let z2 = -rest / l_ext;
        (z2 >= 0.0).then(|| (d2 + z2).sqrt())
    };
    if let Some(d) = edge(lo, &top, lmax) {
        return d;
    }
    if let Some(d) = edge(hi, &bottom, lmin) {
        return d;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mu = 0.5 * (a + b);
    lam.iter()
        .zip(&c)
        .map(|(l, x)| {
            let r = x * mu * l / (1.0 + mu * l);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Orthonormal basis of the null space of `a` (columns) and the projector
/// onto its row space.
pub(crate) fn null_space(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = a.ncols();
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut kernel = Vec::new();
    let mut range = Vec::new();
    for i in 0..d {
        let col = eig.eigenvectors.column(i).into_owned();
        if eig.eigenvalues[i].abs() <= 1e-12 * scale.max(1e-300) {
            kernel.push(col);
        } else {
            range.push(col);
        }
    }
    let basis = if kernel.is_empty() { DMatrix::zeros(d, 0) } else { DMatrix::from_columns(&kernel) };
    let mut proj = DMatrix::zeros(d, d);
    for v in &range {
        proj += v * v.transpose();
    }
    (basis, proj)
}

/// Exact distances to S (a subspace), T (a cone) and R = S cap T.
#[derive(Debug, Clone)]
pub struct SetDistances {
    form: SliceForm,
    row_proj: DMatrix<f64>,
    s_basis: DMatrix<f64>,
    t_cone: ConeDistance,
    r_cone: ConeDistance,
    q_norm: f64,
}

impl SetDistances {
    pub fn new(form: SliceForm) -> Self {
        let (s_basis, row_proj) = null_space(&form.grad);
        let restricted = s_basis.transpose() * &form.q * &s_basis;
        let t_cone = ConeDistance::new(&form.q);
        let r_cone = ConeDistance::with_scale(&restricted, form.q.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let q_norm = t_cone.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        SetDistances { form, row_proj, s_basis, t_cone, r_cone, q_norm }
    }

    pub fn form(&self) -> &SliceForm {
        &self.form
    }

    pub fn to_s(&self, y: &DVector<f64>) -> f64 {
        (&self.row_proj * y).norm()
    }

    pub fn to_t(&self, y: &DVector<f64>) -> f64 {
        self.t_cone.distance(y)
    }

    pub fn to_r(&self, y: &DVector<f64>) -> f64 {
        let ds = self.to_s(y);
        if self.s_basis.ncols() == 0 {
            return y.norm();
        }
        let inside = self.s_basis.transpose() * y;
        let dr = self.r_cone.distance(&inside);
        (ds * ds + dr * dr).sqrt()
    }

    /// False only when no point within `tau` of y can lie on T.
    pub fn may_reach_t(&self, y: &DVector<f64>, tau: f64) -> bool {
        let qy = &self.form.q * y;
        y.dot(&qy).abs() <= 2.0 * tau * qy.norm() + self.q_norm * tau * tau
    }
}

/// Flags per lattice point of the search box.
#[derive(Debug, Clone)]
pub struct ResonantSets {
    pub spec: PhaseSpec,
    pub search: SearchBox,
    pub classifier: Classifier,
    /// Distance threshold used by the cell-distance classifier.
    pub tau: f64,
    form: SliceForm,
    flags: Vec<u8>,
}

fn decode(mut idx: usize, per_axis: usize, dim: usize, out: &mut [usize]) {
    for k in (0..dim).rev() {
        out[k] = idx % per_axis;
        idx /= per_axis;
    }
}

pub fn resonant_sets(spec: &PhaseSpec, search: SearchBox, classifier: Classifier) -> Result<ResonantSets> {
    if search.per_axis < 2 || search.extent <= 0.0 || !(1..=2).contains(&search.per_var) {
        return Err(Error::Config(format!("bad search box {search:?}")));
    }
    if let Classifier::Scaled { tol } = classifier {
        if tol <= 0.0 {
            return Err(Error::Config(format!("resonance tolerance must be positive, got {tol}")));
        }
    }
    let form = SliceForm::new(spec, search.per_var);
    let dim = form.dim();
    let total = search.per_axis.checked_pow(dim as u32).filter(|&t| t <= 1 << 28).ok_or_else(|| {
        Error::CostGuard(format!("search box of {}^{dim} points is too large", search.per_axis))
    })?;
    let h = search.spacing();
    // Strictly inside the half diagonal: lattice points whose cell only
    // touches a set at a corner or face are not flagged.
    let tau = 0.5 * h * (dim as f64).sqrt() * (1.0 - 1e-9);
    let dist = SetDistances::new(form.clone());
    let mut flags = vec![0u8; total];
    let mut ix = vec![0usize; dim];
    let mut y = DVector::zeros(dim);
    for (idx, flag) in flags.iter_mut().enumerate() {
        decode(idx, search.per_axis, dim, &mut ix);
        for k in 0..dim {
            y[k] = search.coord(ix[k]);
        }
        let mut f = 0u8;
        match classifier {
            Classifier::CellDistance => {
                if dist.to_s(&y) <= tau {
                    f |= SetKind::S.bit();
                }
                if dist.may_reach_t(&y, tau) && dist.to_t(&y) <= tau {
                    f |= SetKind::T.bit();
                }
                if f == 3 && dist.to_r(&y) <= tau {
                    f |= SetKind::R.bit();
                }
            }
            Classifier::Scaled { tol } => {
                let scale = y.norm() + 1.0;
                let g = (&form.grad * &y).norm();
                let p = form.phase(&y).abs();
                if g < tol * scale {
                    f |= SetKind::S.bit();
                }
                if p < tol * scale * scale {
                    f |= SetKind::T.bit();
                }
                if f == 3 {
                    f |= SetKind::R.bit();
                }
            }
        }
        *flag = f;
    }
    Ok(ResonantSets { spec: *spec, search, classifier, tau, form, flags })
}

impl ResonantSets {
    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut ix = vec![0; self.dim()];
        decode(idx, self.search.per_axis, self.dim(), &mut ix);
        ix.iter().map(|&i| self.search.coord(i)).collect()
    }

    pub fn contains(&self, kind: SetKind, idx: usize) -> bool {
        self.flags[idx] & kind.bit() != 0
    }

    pub fn indices(&self, kind: SetKind) -> impl Iterator<Item = usize> + '_ {
        (0..self.flags.len()).filter(move |&i| self.contains(kind, i))
    }

    pub fn points(&self, kind: SetKind) -> Vec<Vec<f64>> {
        self.indices(kind).map(|i| self.point(i)).collect()
    }

    pub fn count(&self, kind: SetKind) -> usize {
        self.indices(kind).count()
    }

    /// Distance from `y` to the nearest flagged point of `kind`, searching
    /// lattice neighbours up to `radius` cells away along each axis.
    pub fn distance_to_cloud(&self, kind: SetKind, y: &[f64], radius: usize) -> Option<f64> {
        let dim = self.dim();
        let n = self.search.per_axis;
        let center: Vec<usize> = y.iter().map(|&x| self.search.nearest_index(x)).collect();
        let width = 2 * radius + 1;
        let mut best: Option<f64> = None;
        let mut off = vec![0usize; dim];
        for code in 0..width.pow(dim as u32) {
            decode(code, width, dim, &mut off);
            let mut idx = 0usize;
            let mut d2 = 0.0;
            let mut inside = true;
            for k in 0..dim {
                let i = center[k] as i64 + off[k] as i64 - radius as i64;
                if i < 0 || i >= n as i64 {
                    inside = false;
                    break;
                }
                idx = idx * n + i as usize;
                let dx = self.search.coord(i as usize) - y[k];
                d2 += dx * dx;
            }
            if inside && self.contains(kind, idx) {
                let d = d2.sqrt();
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }

    /// Column names of the point coordinates.
    pub fn coordinate_names(&self) -> Vec<String> {
        let vars = ["xi", "eta", "sigma"];
        let mut names = Vec::new();
        for v in &vars[..self.spec.arity()] {
            if self.search.per_var == 1 {
                names.push(v.to_string());
            } else {
                names.push(format!("{v}1"));
                names.push(format!("{v}2"));
            }
        }
        names
    }

    /// One row per flagged point: coordinates, |phi|, |grad phi|, class.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.coordinate_names();
        header.extend(["abs_phase", "abs_grad", "class"].map(String::from));
        w.write_record(&header).map_err(csv_err)?;
        for idx in 0..self.flags.len() {
            let f = self.flags[idx];
            if f == 0 {
                continue;
            }
            let p = self.point(idx);
            let y = DVector::from_vec(p.clone());
            let class = match f {
                1 => "S",
                2 => "T",
                3 => "S+T",
                _ => "R",
            };
            let mut row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            row.push(format!("{:e}", self.form.phase(&y).abs()));
            row.push(format!("{:e}", (&self.form.grad * &y).norm()));
            row.push(class.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(spec: &PhaseSpec) -> SearchBox {
        SearchBox { per_axis: 16, ..SearchBox::default_for(spec) }
    }

    #[test]
    fn cone_distance_on_a_saddle() {
        // x^2 - y^2 = 0: distance from (1, 0) is 1/sqrt(2)
        let d = cone_distance(&[1.0, -1.0], &[1.0, 0.0]);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-9, "{d}");
        assert_eq!(cone_distance(&[1.0, -1.0], &[2.0, 2.0]), 0.0);
        // definite: only the origin
        assert!((cone_distance(&[-1.0, -2.0], &[3.0, 4.0]) - 5.0).abs() < 1e-12);
        // semidefinite: the kernel
        assert!((cone_distance(&[0.0, 2.0], &[3.0, 4.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cone_distance_beats_sampling() {
        // x^2 + y^2 - 2 z^2 = 0 sampled densely
        let lam = [1.0, 1.0, -2.0];
        let c = [0.3, -1.1, 0.2];
        let d = cone_distance(&lam, &c);
        let mut best = f64::INFINITY;
        for i in 0..2000 {
            let a = i as f64 * std::f64::consts::TAU / 2000.0;
            for j in 0..400 {
                let z = -2.0 + j as f64 * 0.01;
                let r = z.abs() * 2f64.sqrt();
                let p = [r * a.cos(), r * a.sin(), z];
                best = best.min(((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt());
            }
        }
        assert!(d <= best + 1e-9 && best - d < 1e-2, "{d} {best}");
    }

    #[test]
    fn plus_plus_space_time_set_is_the_origin_cell() {
        let spec = PhaseSpec::parse("++").unwrap();
        let sets = resonant_sets(&spec, small(&spec), Classifier::CellDistance).unwrap();
        let r = sets.points(SetKind::R);
        assert!(!r.is_empty());
        for p in &r {
            assert!(p.iter().map(|v| v * v).sum::<f64>().sqrt() <= sets.tau);
        }
    }

    #[test]
    fn minus_plus_space_time_set_is_the_plane() {
        let spec = PhaseSpec::parse("-+").unwrap();
        let sets = resonant_sets(&spec, small(&spec), Classifier::CellDistance).unwrap();
        for p in sets.points(SetKind::R) {
            assert!((p[0] * p[0] + p[1] * p[1]).sqrt() <= sets.tau);
        }
        // every lattice point with xi = 0 is flagged
        let h = sets.search.spacing();
        assert!(sets.count(SetKind::R) >= 16 * 16);
        assert_eq!(sets.distance_to_cloud(SetKind::R, &[0.0, 0.0, 1.0, -2.0], 1), Some(0.0));
        assert!(sets.distance_to_cloud(SetKind::R, &[4.0 * h, 0.0, 1.0, -2.0], 1).is_none());
    }

    #[test]
    fn scaled_classifier_flags_origin() {
        let spec = PhaseSpec::parse("++").unwrap();
        let sets = resonant_sets(&spec, small(&spec), Classifier::Scaled { tol: 0.05 }).unwrap();
        let origin = vec![0.0; 4];
        assert!(sets.points(SetKind::R).contains(&origin));
        assert!(resonant_sets(&spec, small(&spec), Classifier::Scaled { tol: 0.0 }).is_err());
    }

    #[test]
    fn minus_plus_plus_space_time_line() {
        let spec = PhaseSpec::parse("-++").unwrap();
        let sets = resonant_sets(&spec, small(&spec), Classifier::CellDistance).unwrap();
        // (v, 2v, v) lies in R
        let h = sets.search.spacing();
        let d = sets.distance_to_cloud(SetKind::R, &[h, 2.0 * h, h], 1).unwrap();
        assert!(d < 1e-12);
        for p in sets.points(SetKind::R) {
            let v = (p[0] + 2.0 * p[1] + p[2]) / 6.0;
            let off = ((p[0] - v).powi(2) + (p[1] - 2.0 * v).powi(2) + (p[2] - v).powi(2)).sqrt();
            assert!(off <= sets.tau * (1.0 + 1e-9));
        }
    }

    #[test]
    fn csv_has_header_and_classes() {
        let spec = PhaseSpec::parse("+++").unwrap();
        let sets = resonant_sets(&spec, SearchBox { per_axis: 8, ..SearchBox::default_for(&spec) }, Classifier::CellDistance).unwrap();
        let mut buf = Vec::new();
        sets.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "xi,eta,sigma,abs_phase,abs_grad,class");
        assert!(text.contains(",R\n"));
    }
}
