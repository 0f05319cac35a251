//! Bilinear and trilinear pseudo-products.
//!
//! Every path computes the operator at unwrapped frequencies and folds the
//! result onto the lattice, so that m = 1 reproduces the pointwise product and
//! the direct, separable, factored-phase and nested paths agree on all inputs.

mod measure;
mod paraproduct;
mod wide;

pub use measure::{measure, measure_bilinear, measure_trilinear, BoundMeasurement, Exponents};
pub use paraproduct::{gapped_flag_operator, summed_model_operator, model_operator, paraproduct_pieces, ModelVariant, ParaproductPieces};
pub use wide::{support, Wide};

use crate::field::propagate;
use crate::resonance::{phase_eval, PhaseSpec};
use crate::symbol::{Factor, FlagSymbol, Repr as SymRepr, Symbol};
use crate::{Error, Field, Freq, Grid, Repr, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApplicationMethod {
    /// Quadrature over all lattice pairs (triples).
    Direct,
    /// Per-term multipliers and products via transforms (bilinear), or nested
    /// bilinear passes (flag trilinear).
    Separable,
    /// Phase factor moved onto inputs and output as free propagators.
    FactoredPhase,
}

/// Largest lattice sizes for direct quadrature.
#[derive(Debug, Clone, Copy)]
pub struct CostGuard {
    pub bilinear: usize,
    pub trilinear: usize,
}

impl Default for CostGuard {
    fn default() -> Self {
        CostGuard { bilinear: 64, trilinear: 16 }
    }
}

impl CostGuard {
    pub fn unlimited() -> Self {
        CostGuard { bilinear: usize::MAX, trilinear: usize::MAX }
    }

    fn check(&self, n: usize, arity: usize) -> Result<()> {
        let limit = if arity == 2 { self.bilinear } else { self.trilinear };
        if n > limit {
            return Err(Error::CostGuard(format!(
                "direct {}-linear quadrature on {n}^2 exceeds the limit {limit}^2",
                arity
            )));
        }
        Ok(())
    }
}

/// m(xi, eta[, sigma]) e^{i s phi(xi, eta[, sigma])}.
#[derive(Clone)]
pub struct Phased<M> {
    pub m: M,
    pub phase: PhaseSpec,
    pub s: f64,
}

fn same_grid(a: &Field, b: &Field) -> Result<Grid> {
    if a.grid() != b.grid() {
        return Err(Error::Config("pseudo-product inputs live on different grids".into()));
    }
    Ok(*a.grid())
}

fn check_arity(m: &Symbol, arity: usize) -> Result<()> {
    if m.arity != arity {
        return Err(Error::Config(format!("symbol {} has arity {}, expected {arity}", m.name, m.arity)));
    }
    Ok(())
}

/// Direct quadrature into a wide spectrum: sum over lattice pairs of
/// value(eta, zeta) f(eta) g(zeta) / N at xi = eta + zeta.
fn direct_pairs(f: &Field, g: &Field, value: impl Fn(usize, usize, Freq, Freq) -> C64) -> Wide {
    let grid = *f.grid();
    let n = grid.n() as f64;
    let mut out = Wide::zeros(grid, 2 * grid.n());
    let (sf, sg) = (support(&f.to_frequency()), support(&g.to_frequency()));
    for &(ie, fe, ve) in &sf {
        let ke = grid.wavenumbers(ie);
        for &(iz, fz, vz) in &sg {
            let kz = grid.wavenumbers(iz);
            let m = value(ie, iz, fe, fz);
            out.add_at([ke[0] + kz[0], ke[1] + kz[1]], m * ve * vz / n);
        }
    }
    out
}

fn direct_bilinear(m: &Symbol, f: &Field, g: &Field, phase: Option<(PhaseSpec, f64)>) -> Wide {
    let grid = *f.grid();
    direct_pairs(f, g, |ie, iz, fe, fz| {
        let v = m.lattice_value(&grid, ie, iz);
        match phase {
            None => v,
            Some((spec, s)) => {
                let xi = [fe[0] + fz[0], fe[1] + fz[1]];
                v * C64::from_polar(1.0, s * phase_eval(&spec, &[xi, fe]))
            }
        }
    })
}

fn factor_on_base(fac: &Factor, f: &Field) -> Field {
    let grid = *f.grid();
    if fac.is_one() {
        return f.to_frequency();
    }
    let mut v = f.to_frequency().into_values();
    for (i, x) in v.iter_mut().enumerate() {
        *x *= fac.at(i, grid.freq(i));
    }
    Field::from_values(grid, v, Repr::Frequency)
}

/// Separable terms on the doubled lattice; the out factor is evaluated at the
/// unwrapped output frequency (lattice factors by periodic extension).
fn separable_wide(m: &Symbol, f: &Field, g: &Field, out_phase: Option<f64>) -> Result<Wide> {
    let SymRepr::Separable(sep) = &m.repr else {
        return Err(Error::MethodMismatch(format!("{} is not separable", m.name)));
    };
    let grid = *f.grid();
    let w = 2 * grid.n();
    let mut acc: Option<Field> = None;
    for t in &sep.terms {
        let a = Wide::embed(&factor_on_base(&t.first, f), w).to_field();
        let b = Wide::embed(&factor_on_base(&t.second, g), w).to_field();
        let mut prod = Wide::from_field(grid, &a.mul(&b));
        if !t.out.is_one() {
            for idx in 0..prod.values.len() {
                if prod.values[idx] != C64::default() {
                    let c = t.out.at(prod.base_index(idx), prod.freq(idx));
                    prod.values[idx] *= c;
                }
            }
        }
        let fld = prod.to_field();
        acc = Some(match acc {
            None => fld,
            Some(x) => x.add(&fld),
        });
    }
    let acc = acc.unwrap_or_else(|| Field::zeros(Grid::new(grid.length(), w).unwrap(), Repr::Frequency));
    let mut wide = Wide::from_field(grid, &acc);
    if let Some(s) = out_phase {
        wide.multiply(|xi| C64::from_polar(1.0, -s * (xi[0] * xi[0] + xi[1] * xi[1])));
    }
    Ok(wide)
}

/// Separable path on the base lattice: products wrap and the out factor is
/// taken at the wrapped frequency. Agrees with the other paths whenever the
/// inputs are dealiased (|k_i| < N/3) and the output is read on |k_i| < N/3.
pub fn apply_separable_periodic(m: &Symbol, f: &Field, g: &Field) -> Result<Field> {
    let SymRepr::Separable(sep) = &m.repr else {
        return Err(Error::MethodMismatch(format!("{} is not separable", m.name)));
    };
    let grid = same_grid(f, g)?;
    let mut acc = Field::zeros(grid, Repr::Frequency);
    for t in &sep.terms {
        let a = factor_on_base(&t.first, f);
        let b = factor_on_base(&t.second, g);
        let p = a.mul(&b).to_frequency();
        acc = acc.add(&factor_on_base(&t.out, &p));
    }
    Ok(acc)
}

pub fn apply_bilinear(m: &Symbol, f: &Field, g: &Field, method: ApplicationMethod) -> Result<Field> {
    apply_bilinear_with(m, f, g, method, &CostGuard::default())
}

pub fn apply_bilinear_with(m: &Symbol, f: &Field, g: &Field, method: ApplicationMethod, guard: &CostGuard) -> Result<Field> {
    check_arity(m, 2)?;
    let grid = same_grid(f, g)?;
    match method {
        ApplicationMethod::Direct => {
            guard.check(grid.n(), 2)?;
            Ok(direct_bilinear(m, f, g, None).fold())
        }
        ApplicationMethod::Separable => Ok(separable_wide(m, f, g, None)?.fold()),
        ApplicationMethod::FactoredPhase => {
            Err(Error::MethodMismatch(format!("{} carries no phase; use apply_bilinear_phased", m.name)))
        }
    }
}

/// Bilinear operator with symbol m e^{i s phi}.
pub fn apply_bilinear_phased(p: &Phased<Symbol>, f: &Field, g: &Field, method: ApplicationMethod, guard: &CostGuard) -> Result<Field> {
    check_arity(&p.m, 2)?;
    if p.phase.arity() != 2 {
        return Err(Error::Config(format!("phase {} is not quadratic", p.phase)));
    }
    let grid = same_grid(f, g)?;
    let signs = p.phase.signs();
    match method {
        ApplicationMethod::Direct => {
            guard.check(grid.n(), 2)?;
            Ok(direct_bilinear(&p.m, f, g, Some((p.phase, p.s))).fold())
        }
        ApplicationMethod::Separable | ApplicationMethod::FactoredPhase => {
            // e^{i s phi} = e^{-i s |xi|^2} e^{i s s1 |eta|^2} e^{i s s2 |xi-eta|^2}
            let fa = propagate(f, -p.s * signs[0] as f64);
            let gb = propagate(g, -p.s * signs[1] as f64);
            let separable = matches!(p.m.repr, SymRepr::Separable(_));
            if method == ApplicationMethod::Separable && !separable {
                return Err(Error::MethodMismatch(format!("{} is not separable", p.m.name)));
            }
            let mut wide = if separable {
                separable_wide(&p.m, &fa, &gb, None)?
            } else {
                guard.check(grid.n(), 2)?;
                direct_bilinear(&p.m, &fa, &gb, None)
            };
            wide.multiply(|xi| C64::from_polar(1.0, -p.s * (xi[0] * xi[0] + xi[1] * xi[1])));
            Ok(wide.fold())
        }
    }
}

/// Trilinear symbols: plain arity-3 symbols or flag products.
#[derive(Clone)]
pub enum Trilinear {
    Plain(Symbol),
    Flag(FlagSymbol),
}

impl Trilinear {
    pub fn eval(&self, p: &[Freq]) -> Result<C64> {
        match self {
            Trilinear::Plain(m) => m.eval(p),
            Trilinear::Flag(m) => m.eval(p),
        }
    }

    fn closure(&self) -> Result<Box<dyn Fn(&[Freq]) -> C64 + '_>> {
        self.eval(&[[0.1, 0.2], [0.3, -0.1], [0.05, 0.15]])?;
        Ok(Box::new(move |p| self.eval(p).unwrap()))
    }
}

/// Direct trilinear quadrature into a wide spectrum:
/// sum m(xi, eta, sigma) f1(sigma) f2(eta - sigma) f3(xi - eta) / N^2.
fn direct_triples(f1: &Field, f2: &Field, f3: &Field, m: &dyn Fn(&[Freq]) -> C64) -> Wide {
    let grid = *f1.grid();
    let n2 = (grid.n() * grid.n()) as f64;
    let mut out = Wide::zeros(grid, 3 * grid.n());
    let (s1, s2, s3) = (support(&f1.to_frequency()), support(&f2.to_frequency()), support(&f3.to_frequency()));
    for &(i1, fs, v1) in &s1 {
        let k1 = grid.wavenumbers(i1);
        for &(i2, fa, v2) in &s2 {
            let k2 = grid.wavenumbers(i2);
            let eta = [fs[0] + fa[0], fs[1] + fa[1]];
            let v12 = v1 * v2 / n2;
            for &(i3, fb, v3) in &s3 {
                let k3 = grid.wavenumbers(i3);
                let xi = [eta[0] + fb[0], eta[1] + fb[1]];
                let val = m(&[xi, eta, fs]);
                out.add_at([k1[0] + k2[0] + k3[0], k1[1] + k2[1] + k3[1]], val * v12 * v3);
            }
        }
    }
    out
}

/// Flag path: inner bilinear in (eta, sigma) kept at unwrapped eta, then the
/// outer bilinear in (xi, eta). Needs a unit outer factor.
fn nested_flag(m: &FlagSymbol, f1: &Field, f2: &Field, f3: &Field) -> Result<Wide> {
    if !m.outer.is_one() {
        return Err(Error::MethodMismatch("nested flag application needs a unit three-variable factor".into()));
    }
    let grid = *f1.grid();
    let n = grid.n() as f64;
    let inner = m.second.closure()?;
    let outer = m.first.closure()?;
    let mid = direct_pairs(f1, f2, |_, _, fs, fa| inner(&[[fs[0] + fa[0], fs[1] + fa[1]], fs]));
    let mut out = Wide::zeros(grid, 3 * grid.n());
    let s3 = support(&f3.to_frequency());
    for (ke, fe, ve) in mid.support() {
        for &(i3, fb, v3) in &s3 {
            let k3 = grid.wavenumbers(i3);
            let xi = [fe[0] + fb[0], fe[1] + fb[1]];
            out.add_at([ke[0] + k3[0], ke[1] + k3[1]], outer(&[fe, xi]) * ve * v3 / n);
        }
    }
    Ok(out)
}

pub fn apply_trilinear(m: &Trilinear, f1: &Field, f2: &Field, f3: &Field, method: ApplicationMethod) -> Result<Field> {
    apply_trilinear_with(m, f1, f2, f3, method, &CostGuard::default())
}

pub fn apply_trilinear_with(
    m: &Trilinear,
    f1: &Field,
    f2: &Field,
    f3: &Field,
    method: ApplicationMethod,
    guard: &CostGuard,
) -> Result<Field> {
    let grid = same_grid(f1, f2)?;
    same_grid(f1, f3)?;
    match (method, m) {
        (ApplicationMethod::Direct, _) => {
            guard.check(grid.n(), 3)?;
            let c = m.closure()?;
            Ok(direct_triples(f1, f2, f3, &*c).fold())
        }
        (ApplicationMethod::Separable, Trilinear::Flag(flag)) => Ok(nested_flag(flag, f1, f2, f3)?.fold()),
        (ApplicationMethod::Separable, Trilinear::Plain(s)) => {
            Err(Error::MethodMismatch(format!("{} has no flag structure to nest", s.name)))
        }
        (ApplicationMethod::FactoredPhase, _) => {
            Err(Error::MethodMismatch("trilinear symbol carries no phase; use apply_trilinear_phased".into()))
        }
    }
}

/// Trilinear operator with symbol m e^{i s phi}, phi a cubic phase.
pub fn apply_trilinear_phased(
    p: &Phased<Trilinear>,
    f1: &Field,
    f2: &Field,
    f3: &Field,
    method: ApplicationMethod,
    guard: &CostGuard,
) -> Result<Field> {
    if p.phase.arity() != 3 {
        return Err(Error::Config(format!("phase {} is not cubic", p.phase)));
    }
    let grid = same_grid(f1, f2)?;
    same_grid(f1, f3)?;
    match method {
        ApplicationMethod::Direct => {
            guard.check(grid.n(), 3)?;
            let c = p.m.closure()?;
            let (spec, s) = (p.phase, p.s);
            let full = move |q: &[Freq]| c(q) * C64::from_polar(1.0, s * phase_eval(&spec, q));
            Ok(direct_triples(f1, f2, f3, &full).fold())
        }
        ApplicationMethod::Separable | ApplicationMethod::FactoredPhase => {
            // e^{i s phi} = e^{-i s |xi|^2} e^{i s s1 |xi-eta|^2} e^{i s s2 |eta-sigma|^2} e^{i s s3 |sigma|^2}
            let signs = p.phase.signs();
            let a1 = propagate(f1, -p.s * signs[2] as f64);
            let a2 = propagate(f2, -p.s * signs[1] as f64);
            let a3 = propagate(f3, -p.s * signs[0] as f64);
            let mut wide = match (&p.m, method) {
                (Trilinear::Flag(flag), _) if flag.outer.is_one() => nested_flag(flag, &a1, &a2, &a3)?,
                (_, ApplicationMethod::Separable) => {
                    return Err(Error::MethodMismatch("separable trilinear path needs a flag symbol with unit outer factor".into()))
                }
                _ => {
                    guard.check(grid.n(), 3)?;
                    let c = p.m.closure()?;
                    direct_triples(&a1, &a2, &a3, &*c)
                }
            };
            wide.multiply(|xi| C64::from_polar(1.0, -p.s * (xi[0] * xi[0] + xi[1] * xi[1])));
            Ok(wide.fold())
        }
    }
}

/// Precomputed direct trilinear kernel for repeated application on one grid.
pub struct TrilinearKernel {
    grid: Grid,
    values: Vec<C64>,
}

impl TrilinearKernel {
    pub fn new(grid: Grid, m: &dyn Fn(&[Freq]) -> C64, guard: &CostGuard) -> Result<Self> {
        guard.check(grid.n(), 3)?;
        let len = grid.len();
        let mut values = Vec::with_capacity(len * len * len);
        for i1 in 0..len {
            let fs = grid.freq(i1);
            for i2 in 0..len {
                let fa = grid.freq(i2);
                let eta = [fs[0] + fa[0], fs[1] + fa[1]];
                for i3 in 0..len {
                    let fb = grid.freq(i3);
                    values.push(m(&[[eta[0] + fb[0], eta[1] + fb[1]], eta, fs]));
                }
            }
        }
        Ok(TrilinearKernel { grid, values })
    }

    pub fn apply(&self, f1: &Field, f2: &Field, f3: &Field) -> Field {
        let grid = self.grid;
        let len = grid.len();
        let n2 = (grid.n() * grid.n()) as f64;
        let mut out = Wide::zeros(grid, 3 * grid.n());
        let (s1, s2, s3) = (support(&f1.to_frequency()), support(&f2.to_frequency()), support(&f3.to_frequency()));
        for &(i1, _, v1) in &s1 {
            let k1 = grid.wavenumbers(i1);
            for &(i2, _, v2) in &s2 {
                let k2 = grid.wavenumbers(i2);
                let v12 = v1 * v2 / n2;
                let row = &self.values[(i1 * len + i2) * len..(i1 * len + i2 + 1) * len];
                for &(i3, _, v3) in &s3 {
                    let k3 = grid.wavenumbers(i3);
                    out.add_at([k1[0] + k2[0] + k3[0], k1[1] + k2[1] + k3[1]], row[i3] * v12 * v3);
                }
            }
        }
        out.fold()
    }
}

#[cfg(test)]
mod tests;
