//! Multiplier symbols m(xi, eta[, sigma]) and their representations.

mod cm;
mod exemplar;
mod manifest;
mod q;
mod separable;

pub use cm::{check_class, cm_norm, cm_refinement, sample_shells, ClassReport, CmNorm};
pub use exemplar::{class_exemplar, class_exemplar_gradient, class_exemplar_time_derivative};
pub use manifest::{ManifestEntry, SymbolManifest};
pub use q::{build_q, q_separable, Linear};
pub use separable::{separable_approx, SeparableReport};

use crate::{Error, Freq, Grid, Result, C64};
use std::fmt;
use std::sync::Arc;

pub type PointFn = Arc<dyn Fn(&[Freq]) -> C64 + Send + Sync>;
pub type FactorFn = Arc<dyn Fn(Freq) -> C64 + Send + Sync>;

/// Class membership claim: M^{k,k'} when `t` is `None`, m_t^{k,k'} otherwise.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClassTag {
    pub k: i32,
    pub k_prime: i32,
    pub t: Option<f64>,
}

/// Single-variable multiplier used in separable terms.
#[derive(Clone)]
pub enum Factor {
    One,
    Closed(FactorFn),
    /// Values on the FFT-ordered lattice of `grid`.
    Lattice(Grid, Arc<Vec<C64>>),
}

impl Factor {
    pub fn closed(f: impl Fn(Freq) -> C64 + Send + Sync + 'static) -> Self {
        Factor::Closed(Arc::new(f))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Factor::One)
    }

    fn eval(&self, xi: Freq) -> Option<C64> {
        match self {
            Factor::One => Some(C64::new(1.0, 0.0)),
            Factor::Closed(f) => Some(f(xi)),
            Factor::Lattice(..) => None,
        }
    }

    /// Value at lattice index `idx`, whose continuum frequency is `xi`.
    pub fn at(&self, idx: usize, xi: Freq) -> C64 {
        match self {
            Factor::One => C64::new(1.0, 0.0),
            Factor::Closed(f) => f(xi),
            Factor::Lattice(_, v) => v[idx],
        }
    }
}

/// One term a(xi) b(eta) c(xi - eta).
#[derive(Clone)]
pub struct SeparableTerm {
    pub out: Factor,
    pub first: Factor,
    pub second: Factor,
}

#[derive(Clone)]
pub struct Separable {
    pub terms: Vec<SeparableTerm>,
    /// Max error relative to the max modulus on the validation lattice.
    pub error: f64,
}

/// Arity-2 symbol sampled at all lattice pairs (eta, zeta), with xi = eta + zeta
/// taken unwrapped. Row index is eta, column index is zeta.
#[derive(Clone)]
pub struct Sampled {
    pub grid: Grid,
    pub values: Arc<Vec<C64>>,
}

#[derive(Clone)]
pub enum Repr {
    Closed(PointFn),
    Sampled(Sampled),
    Separable(Separable),
}

#[derive(Clone)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    pub repr: Repr,
    pub class: Option<ClassTag>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Closed(_) => "closed".to_string(),
            Repr::Sampled(_) => "sampled".to_string(),
            Repr::Separable(s) => format!("separable(rank {})", s.terms.len()),
        };
        write!(f, "Symbol({}, arity {}, {kind})", self.name, self.arity)
    }
}

pub fn add(a: Freq, b: Freq) -> Freq {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: Freq, b: Freq) -> Freq {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn dot(a: Freq, b: Freq) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: Freq) -> f64 {
    dot(a, a)
}

/// Euclidean length of a point of R^{2n}.
pub fn radius(p: &[Freq]) -> f64 {
    p.iter().map(|x| norm2(*x)).sum::<f64>().sqrt()
}

impl Symbol {
    pub fn closed(name: &str, arity: usize, f: impl Fn(&[Freq]) -> C64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), arity, repr: Repr::Closed(Arc::new(f)), class: None }
    }

    pub fn real(name: &str, arity: usize, f: impl Fn(&[Freq]) -> f64 + Send + Sync + 'static) -> Self {
        Self::closed(name, arity, move |p| C64::new(f(p), 0.0))
    }

    pub fn constant(arity: usize, c: C64) -> Self {
        Self::closed("const", arity, move |_| c)
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, C64::new(1.0, 0.0)).named("one")
    }

    /// True for the symbol built by `Symbol::one`.
    pub fn is_one(&self) -> bool {
        self.name == "one" && matches!(self.repr, Repr::Closed(_))
    }

    pub fn separable(name: &str, terms: Vec<SeparableTerm>, error: f64) -> Self {
        Self { name: name.into(), arity: 2, repr: Repr::Separable(Separable { terms, error }), class: None }
    }

    pub fn with_class(mut self, k: i32, k_prime: i32, t: Option<f64>) -> Self {
        self.class = Some(ClassTag { k, k_prime, t });
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn representation(&self) -> &'static str {
        match self.repr {
            Repr::Closed(_) => "closed",
            Repr::Sampled(_) => "sampled",
            Repr::Separable(_) => "separable",
        }
    }

    /// Evaluation at continuum frequencies; fails for lattice-bound representations.
    pub fn eval(&self, p: &[Freq]) -> Result<C64> {
        if p.len() != self.arity {
            return Err(Error::Config(format!("{} expects {} frequencies, got {}", self.name, self.arity, p.len())));
        }
        match &self.repr {
            Repr::Closed(f) => Ok(f(p)),
            Repr::Sampled(_) => Err(Error::MethodMismatch(format!("{} is lattice sampled", self.name))),
            Repr::Separable(s) => {
                let (xi, eta) = (p[0], p[1]);
                let zeta = sub(xi, eta);
                let mut acc = C64::default();
                for t in &s.terms {
                    let (a, b, c) = (t.out.eval(xi), t.first.eval(eta), t.second.eval(zeta));
                    match (a, b, c) {
                        (Some(a), Some(b), Some(c)) => acc += a * b * c,
                        _ => return Err(Error::MethodMismatch(format!("{} has lattice factors", self.name))),
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Closure view, for closed-form symbols only.
    pub fn closure(&self) -> Result<PointFn> {
        match &self.repr {
            Repr::Closed(f) => Ok(f.clone()),
            _ => {
                let s = self.clone();
                s.eval(&vec![[0.1, 0.2]; s.arity])?;
                Ok(Arc::new(move |p| s.eval(p).unwrap()))
            }
        }
    }

    /// Arity-2 value at lattice pair (eta index, zeta index), xi = eta + zeta unwrapped.
    pub fn lattice_value(&self, grid: &Grid, eta: usize, zeta: usize) -> C64 {
        let (fe, fz) = (grid.freq(eta), grid.freq(zeta));
        let xi = add(fe, fz);
        match &self.repr {
            Repr::Closed(f) => f(&[xi, fe]),
            Repr::Sampled(s) => {
                assert_eq!(&s.grid, grid, "sampled symbol used on a different grid");
                s.values[eta * grid.len() + zeta]
            }
            Repr::Separable(s) => {
                let out = grid.index_of_pair({
                    let a = grid.wavenumbers(eta);
                    let b = grid.wavenumbers(zeta);
                    [a[0] + b[0], a[1] + b[1]]
                });
                s.terms
                    .iter()
                    .map(|t| t.out.at(out, xi) * t.first.at(eta, fe) * t.second.at(zeta, fz))
                    .sum()
            }
        }
    }

    /// Samples an arity-2 symbol on all lattice pairs of `grid`.
    pub fn to_sampled(&self, grid: &Grid) -> Result<Symbol> {
        if self.arity != 2 {
            return Err(Error::MethodMismatch("sampling is implemented for arity 2".into()));
        }
        let n = grid.len();
        let mut values = Vec::with_capacity(n * n);
        for eta in 0..n {
            for zeta in 0..n {
                values.push(self.lattice_value(grid, eta, zeta));
            }
        }
        values[0] = self.origin_value()?;
        Ok(Symbol {
            name: format!("{}@{}x{}", self.name, grid.n(), grid.n()),
            arity: 2,
            repr: Repr::Sampled(Sampled { grid: *grid, values: Arc::new(values) }),
            class: self.class,
        })
    }

    /// Origin-cell convention: 0 for classes vanishing at the origin, else the limit along the xi_1 axis.
    fn origin_value(&self) -> Result<C64> {
        if matches!(self.class, Some(c) if c.k >= 1) {
            return Ok(C64::default());
        }
        let d = 1e-9;
        self.eval(&[[d, 0.0], [0.0, 0.0]])
    }

    /// Pointwise product of closed-form symbols.
    pub fn product(&self, other: &Symbol) -> Result<Symbol> {
        if self.arity != other.arity {
            return Err(Error::Config("arity mismatch in symbol product".into()));
        }
        let (a, b) = (self.closure()?, other.closure()?);
        let mut out = Symbol::closed(&format!("{}*{}", self.name, other.name), self.arity, move |p| a(p) * b(p));
        if let (Some(x), Some(y)) = (self.class, other.class) {
            out.class = Some(ClassTag { k: x.k + y.k, k_prime: x.k_prime + y.k_prime, t: x.t.or(y.t) });
        }
        Ok(out)
    }

    /// p -> m(s p).
    pub fn dilate(&self, s: f64) -> Result<Symbol> {
        let a = self.closure()?;
        let arity = self.arity;
        Ok(Symbol::closed(&format!("{}(x{s})", self.name), arity, move |p| {
            let scaled: Vec<Freq> = p.iter().map(|x| [s * x[0], s * x[1]]).collect();
            a(&scaled)
        }))
    }
}

/// Flag symbol m(xi,eta,sigma) = outer(xi,eta,sigma) * first(eta,xi) * second(eta,sigma).
#[derive(Clone, Debug)]
pub struct FlagSymbol {
    pub outer: Symbol,
    pub first: Symbol,
    pub second: Symbol,
}

impl FlagSymbol {
    pub fn new(outer: Symbol, first: Symbol, second: Symbol) -> Result<Self> {
        if outer.arity != 3 || first.arity != 2 || second.arity != 2 {
            return Err(Error::Config("flag symbol needs arities (3, 2, 2)".into()));
        }
        Ok(Self { outer, first, second })
    }

    pub fn eval(&self, p: &[Freq]) -> Result<C64> {
        let (xi, eta, sigma) = (p[0], p[1], p[2]);
        Ok(self.outer.eval(p)? * self.first.eval(&[eta, xi])? * self.second.eval(&[eta, sigma])?)
    }

    pub fn to_symbol(&self) -> Result<Symbol> {
        let me = self.clone();
        me.eval(&[[0.1, 0.0], [0.2, 0.1], [0.0, 0.3]])?;
        Ok(Symbol::closed("flag", 3, move |p| me.eval(p).unwrap()))
    }

    /// Product of the three Coifman-Meyer norms.
    pub fn fs_norm(&self, max_order: usize, samples2: &[Vec<Freq>], samples3: &[Vec<Freq>]) -> Result<f64> {
        Ok(cm_norm(&self.outer, max_order, samples3)?.value
            * cm_norm(&self.first, max_order, samples2)?.value
            * cm_norm(&self.second, max_order, samples2)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_and_sampled_agree_on_lattice() {
        let g = Grid::new(7.0, 8).unwrap();
        let m = Symbol::real("m", 2, |p| p[0][0] - 2.0 * p[1][1] + 1.0);
        let s = m.to_sampled(&g).unwrap();
        for eta in [1usize, 9, 30] {
            for zeta in [0usize, 5, 63] {
                assert_eq!(m.lattice_value(&g, eta, zeta), s.lattice_value(&g, eta, zeta));
            }
        }
        assert!(s.eval(&[[0.0, 0.0], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn origin_cell_conventions() {
        let g = Grid::new(7.0, 8).unwrap();
        let vanishing = Symbol::real("v", 2, |p| p[0][0] + 1.0).with_class(1, 0, None);
        assert_eq!(vanishing.to_sampled(&g).unwrap().lattice_value(&g, 0, 0), C64::default());
        let ratio = Symbol::real("r", 2, |p| p[0][0] / (radius(p)));
        let v = ratio.to_sampled(&g).unwrap().lattice_value(&g, 0, 0);
        assert!((v.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separable_eval_matches_terms() {
        let t = SeparableTerm {
            out: Factor::closed(|x| C64::new(x[0], 0.0)),
            first: Factor::closed(|x| C64::new(0.0, x[1])),
            second: Factor::One,
        };
        let s = Symbol::separable("s", vec![t], 0.0);
        let v = s.eval(&[[2.0, 0.0], [0.0, 3.0]]).unwrap();
        assert_eq!(v, C64::new(0.0, 6.0));
    }

    #[test]
    fn product_adds_classes() {
        let a = Symbol::one(2).with_class(1, 0, Some(4.0));
        let b = Symbol::one(2).with_class(-2, -1, Some(4.0));
        let c = a.product(&b).unwrap().class.unwrap();
        assert_eq!((c.k, c.k_prime), (-1, -1));
    }

    #[test]
    fn flag_eval_uses_argument_order() {
        let outer = Symbol::one(3);
        let first = Symbol::real("f", 2, |p| p[0][0] + 10.0 * p[1][0]);
        let second = Symbol::real("s", 2, |p| p[0][1] * p[1][1]);
        let flag = FlagSymbol::new(outer, first, second).unwrap();
        let v = flag.eval(&[[1.0, 0.0], [2.0, 3.0], [0.0, 5.0]]).unwrap();
        assert_eq!(v.re, (2.0 + 10.0) * 15.0);
    }
}
