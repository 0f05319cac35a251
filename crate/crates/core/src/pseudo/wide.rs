//! Spectra indexed by unwrapped wavenumbers, wider than the base lattice,
//! and their folding back onto it.

use crate::{Field, Freq, Grid, Repr, C64};

/// Coefficients at wavenumbers k with -w/2 <= k_i < w/2, keeping the base
/// grid's normalization.
#[derive(Debug, Clone)]
pub struct Wide {
    pub base: Grid,
    pub w: usize,
    pub values: Vec<C64>,
}

impl Wide {
    pub fn zeros(base: Grid, w: usize) -> Self {
        assert!(w >= base.n() && w % 2 == 0);
        Wide { base, w, values: vec![C64::default(); w * w] }
    }

    /// Embeds a field (frequency form) without changing any coefficient.
    pub fn embed(f: &Field, w: usize) -> Self {
        let f = f.to_frequency();
        let g = *f.grid();
        let mut out = Wide::zeros(g, w);
        for (idx, v) in f.values().iter().enumerate() {
            let i = out.index(g.wavenumbers(idx));
            out.values[i] = *v;
        }
        out
    }

    pub fn index(&self, k: [i64; 2]) -> usize {
        let h = (self.w / 2) as i64;
        debug_assert!(k.iter().all(|&x| -h <= x && x < h), "wavenumber {k:?} outside wide range");
        let w = self.w as i64;
        (k[0].rem_euclid(w) * w + k[1].rem_euclid(w)) as usize
    }

    pub fn add_at(&mut self, k: [i64; 2], v: C64) {
        let i = self.index(k);
        self.values[i] += v;
    }

    pub fn wavenumbers(&self, idx: usize) -> [i64; 2] {
        let w = self.w as i64;
        let h = w / 2;
        let f = |i: i64| if i < h { i } else { i - w };
        [f((idx / self.w) as i64), f((idx % self.w) as i64)]
    }

    pub fn freq(&self, idx: usize) -> Freq {
        let k = self.wavenumbers(idx);
        let dk = self.base.dk();
        [dk * k[0] as f64, dk * k[1] as f64]
    }

    /// Base-lattice index the wavenumber aliases to.
    pub fn base_index(&self, idx: usize) -> usize {
        self.base.index_of_pair(self.wavenumbers(idx))
    }

    pub fn multiply(&mut self, m: impl Fn(Freq) -> C64) {
        for idx in 0..self.values.len() {
            let f = self.freq(idx);
            self.values[idx] *= m(f);
        }
    }

    /// Nonzero entries as (wavenumber, frequency, value).
    pub fn support(&self) -> Vec<([i64; 2], Freq, C64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != C64::default())
            .map(|(i, v)| (self.wavenumbers(i), self.freq(i), *v))
            .collect()
    }

    /// Sums aliased coefficients onto the base lattice.
    pub fn fold(&self) -> Field {
        let mut out = vec![C64::default(); self.base.len()];
        for (idx, v) in self.values.iter().enumerate() {
            if *v != C64::default() {
                out[self.base_index(idx)] += v;
            }
        }
        Field::from_values(self.base, out, Repr::Frequency)
    }

    /// The same coefficients as a field on the wider lattice (spacing kept),
    /// renormalized for that lattice.
    pub fn to_field(&self) -> Field {
        let g = Grid::new(self.base.length(), self.w).expect("wide grid");
        let s = self.w as f64 / self.base.n() as f64;
        Field::from_values(g, self.values.iter().map(|v| v * s).collect(), Repr::Frequency)
    }

    pub fn from_field(base: Grid, f: &Field) -> Self {
        let f = f.to_frequency();
        let w = f.grid().n();
        let s = base.n() as f64 / w as f64;
        Wide { base, w, values: f.values().iter().map(|v| v * s).collect() }
    }
}

/// Support of a field as (index, frequency, value), skipping zeros.
pub fn support(f: &Field) -> Vec<(usize, Freq, C64)> {
    let g = *f.grid();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != C64::default())
        .map(|(i, v)| (i, g.freq(i), *v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::random_field;

    #[test]
    fn embed_fold_round_trip() {
        let g = Grid::new(5.0, 8).unwrap();
        let f = random_field(&g, 1, None);
        let w = Wide::embed(&f, 24);
        assert_eq!(w.fold(), f);
        let back = Wide::from_field(g, &w.to_field());
        for (a, b) in back.values.iter().zip(&w.values) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn wide_product_folds_to_lattice_product() {
        let g = Grid::new(5.0, 8).unwrap();
        let (f, h) = (random_field(&g, 2, None), random_field(&g, 3, None));
        let (a, b) = (Wide::embed(&f, 16).to_field(), Wide::embed(&h, 16).to_field());
        let folded = Wide::from_field(g, &a.mul(&b).to_frequency()).fold();
        let direct = f.mul(&h).to_frequency();
        for (x, y) in folded.values().iter().zip(direct.values()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
