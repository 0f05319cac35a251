use crate::fft::fft2;
use crate::{Freq, Grid, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Physical,
    Frequency,
}

/// Complex samples on a [`Grid`], tagged with their representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<C64>,
    repr: Repr,
}

impl Field {
    pub fn zeros(grid: Grid, repr: Repr) -> Self {
        Self { grid, values: vec![C64::default(); grid.len()], repr }
    }

    pub fn from_values(grid: Grid, values: Vec<C64>, repr: Repr) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match grid");
        Self { grid, values, repr }
    }

    pub fn from_physical_fn(grid: Grid, f: impl Fn([f64; 2]) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values, repr: Repr::Physical }
    }

    pub fn from_frequency_fn(grid: Grid, f: impl Fn(Freq) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.freq(i))).collect();
        Self { grid, values, repr: Repr::Frequency }
    }

    /// Unit-amplitude plane wave with integer wavenumbers `k`.
    pub fn mode(grid: Grid, k: [i64; 2]) -> Self {
        let mut out = Self::zeros(grid, Repr::Frequency);
        out.values[grid.index_of_pair(k)] = C64::new(grid.n() as f64, 0.0);
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn into_repr(mut self, repr: Repr) -> Self {
        if self.repr != repr {
            fft2(&mut self.values, self.grid.n(), repr == Repr::Frequency);
            self.repr = repr;
        }
        self
    }

    pub fn to_repr(&self, repr: Repr) -> Self {
        self.clone().into_repr(repr)
    }

    pub fn to_frequency(&self) -> Self {
        self.to_repr(Repr::Frequency)
    }

    pub fn to_physical(&self) -> Self {
        self.to_repr(Repr::Physical)
    }

    /// Applies the multiplier `m(xi)` to the frequency coefficients.
    pub fn multiply(&self, m: impl Fn(Freq) -> C64) -> Self {
        let mut out = self.to_frequency();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v *= m(self.grid.freq(i));
        }
        out
    }

    /// Real multiplier variant of [`Field::multiply`].
    pub fn multiply_real(&self, m: impl Fn(Freq) -> f64) -> Self {
        self.multiply(|xi| C64::new(m(xi), 0.0))
    }

    pub fn mask(&self, keep: &[bool]) -> Self {
        let mut out = self.to_frequency();
        for (v, &k) in out.values.iter_mut().zip(keep) {
            if !k {
                *v = C64::default();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        match self.repr {
            Repr::Physical => Self {
                grid: self.grid,
                values: self.values.iter().map(|v| v.conj()).collect(),
                repr: Repr::Physical,
            },
            Repr::Frequency => Self {
                grid: self.grid,
                values: (0..self.grid.len()).map(|i| self.values[self.grid.neg(i)].conj()).collect(),
                repr: Repr::Frequency,
            },
        }
    }

    fn zip_with(&self, other: &Field, op: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let b = other.to_repr(self.repr);
        let values = self.values.iter().zip(&b.values).map(|(&x, &y)| op(x, y)).collect();
        Self { grid: self.grid, values, repr: self.repr }
    }

    pub fn add(&self, other: &Field) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product in physical space.
    pub fn mul(&self, other: &Field) -> Self {
        self.to_physical().zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect(), repr: self.repr }
    }

    pub fn map_physical(&self, f: impl Fn([f64; 2], C64) -> C64) -> Self {
        let p = self.to_physical();
        let values = p.values.iter().enumerate().map(|(i, &v)| f(self.grid.point(i), v)).collect();
        Self { grid: self.grid, values, repr: Repr::Physical }
    }

    /// Continuum L2 norm by cell quadrature; representation independent.
    pub fn l2(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_area()).sqrt()
    }

    /// Continuum L^p norm of the physical samples (p = infinity allowed).
    pub fn lp(&self, p: f64) -> f64 {
        let phys = self.to_physical();
        lp_of(phys.values.iter().map(|v| v.norm()), p, self.grid.cell_area())
    }

    pub fn linf(&self) -> f64 {
        self.lp(f64::INFINITY)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == C64::default())
    }
}

/// Quadrature L^p norm of nonnegative samples.
pub fn lp_of(mags: impl Iterator<Item = f64>, p: f64, area: f64) -> f64 {
    if p.is_infinite() {
        mags.fold(0.0, f64::max)
    } else if p == 2.0 {
        (mags.map(|m| m * m).sum::<f64>() * area).sqrt()
    } else {
        (mags.map(|m| m.powf(p)).sum::<f64>() * area).powf(1.0 / p)
    }
}

/// Free flow: multiplies frequency coefficients by exp(-i t |xi|^2).
pub fn propagate(f: &Field, t: f64) -> Field {
    if t == 0.0 {
        return f.clone();
    }
    f.multiply(|xi| C64::from_polar(1.0, -t * (xi[0] * xi[0] + xi[1] * xi[1])))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// No weight.
    One,
    /// Japanese bracket (1 + |x|^2)^(1/2).
    Bracket,
    /// |x|^2.
    Square,
}

impl Weight {
    pub fn from_power(w: u32) -> Option<Self> {
        match w {
            0 => Some(Weight::One),
            1 => Some(Weight::Bracket),
            2 => Some(Weight::Square),
            _ => None,
        }
    }

    pub fn eval(self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        match self {
            Weight::One => 1.0,
            Weight::Bracket => (1.0 + r2).sqrt(),
            Weight::Square => r2,
        }
    }
}

pub const DEFAULT_BOUNDARY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorm {
    pub value: f64,
    /// Fraction of the L2 mass within L/8 of the box boundary.
    pub boundary_fraction: f64,
    pub contaminated: bool,
}

/// Fraction of squared mass lying within L/8 of the boundary.
pub fn boundary_fraction(f: &Field) -> f64 {
    let p = f.to_physical();
    let g = f.grid();
    let edge = 0.375 * g.length();
    let (mut near, mut total) = (0.0, 0.0);
    for (i, v) in p.values().iter().enumerate() {
        let x = g.point(i);
        let m = v.norm_sqr();
        total += m;
        if x[0].abs() > edge || x[1].abs() > edge {
            near += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        near / total
    }
}

pub fn weighted_norm(f: &Field, w: Weight, p: f64) -> WeightedNorm {
    weighted_norm_with(f, w, p, DEFAULT_BOUNDARY_THRESHOLD)
}

pub fn weighted_norm_with(f: &Field, w: Weight, p: f64, threshold: f64) -> WeightedNorm {
    let g = *f.grid();
    let phys = f.to_physical();
    let value = lp_of(
        phys.values().iter().enumerate().map(|(i, v)| w.eval(g.point(i)) * v.norm()),
        p,
        g.cell_area(),
    );
    let boundary_fraction = boundary_fraction(&phys);
    let contaminated = w != Weight::One && boundary_fraction > threshold;
    if contaminated {
        log::warn!("weighted norm: boundary mass fraction {boundary_fraction:.3e} exceeds {threshold:.1e}");
    }
    WeightedNorm { value, boundary_fraction, contaminated }
}
