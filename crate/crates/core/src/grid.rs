use crate::{Error, Freq, Result};
use std::f64::consts::PI;

/// Centered periodic square of side `l` sampled with `n` points per axis.
///
/// Storage is row-major with the first index along x1. Frequency arrays use
/// FFT order: index `i` carries the integer wavenumber `i` for `i < n/2` and
/// `i - n` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    l: f64,
    n: usize,
}

impl Grid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Config(format!("box length must be positive, got {l}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Config(format!("points per axis must be even and >= 8, got {n}")));
        }
        Ok(Self { l, n })
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    /// Dual lattice spacing 2 pi / L.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Largest resolved frequency along an axis, pi N / L.
    pub fn kmax(&self) -> f64 {
        PI * self.n as f64 / self.l
    }

    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.l + i as f64 * self.dx()
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.coord(idx / self.n), self.coord(idx % self.n)]
    }

    /// Integer wavenumber of FFT-ordered index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT-ordered index of an integer wavenumber (wrapped).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn freq_1d(&self, i: usize) -> f64 {
        self.dk() * self.wavenumber(i) as f64
    }

    pub fn freq(&self, idx: usize) -> Freq {
        [self.freq_1d(idx / self.n), self.freq_1d(idx % self.n)]
    }

    pub fn wavenumbers(&self, idx: usize) -> [i64; 2] {
        [self.wavenumber(idx / self.n), self.wavenumber(idx % self.n)]
    }

    pub fn index_of_pair(&self, k: [i64; 2]) -> usize {
        self.index_of(k[0]) * self.n + self.index_of(k[1])
    }

    /// Index of the negated frequency.
    pub fn neg(&self, idx: usize) -> usize {
        let n = self.n;
        let (a, b) = (idx / n, idx % n);
        ((n - a) % n) * n + (n - b) % n
    }

    /// Two-thirds rule: wavenumbers with |k_i| < N/3 on both axes.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let lim = self.n as f64 / 3.0;
        (0..self.len())
            .map(|idx| {
                let k = self.wavenumbers(idx);
                (k[0].abs() as f64) < lim && (k[1].abs() as f64) < lim
            })
            .collect()
    }
}
