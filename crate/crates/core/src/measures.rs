//! The measure data model and elementary measure calculus.
//!
//! A [`Measure`] is one of: a finite atomic measure, a closed-form family
//! density, a tabulated [`GridDensity`] with power-law tail extensions, a
//! transform-defined measure (known only through its Cauchy or η transform),
//! or a dilation / power pushforward / finite mixture of other measures.
//! The last three constructors let scale mixtures and products be formed
//! without ever discretising when a closed form exists.
//!
//! All measures are immutable once built and all operations are pure.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lln;
use crate::quad::{self, richardson_zero_limit, QuadSpec, QuadValue};
use crate::stable::{self, AdmissiblePair};

/// Evaluator handle for a transform-defined measure.
pub type TransformFn = Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>;

/// Which transform a [`Measure::Transform`] hands over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    CauchyG,
    Eta,
}

/// Closed-form density families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// Boolean stable law `b_{α,ρ}`.
    BooleanStable { alpha: f64, rho: f64 },
    /// Cauchy family `c_ρ`, `ρ ∈ (0,1)`.
    Cauchy { rho: f64 },
    /// Free Poisson (Marchenko–Pastur) with rate 1.
    MarchenkoPastur,
    /// Pareto law with density `r (1+x)^{−r−1}` on `(0,∞)`.
    Pareto { r: f64 },
    /// Free stable law `f_{α,ρ}`, `ρ ∈ {0, 1/2, 1}`.
    FreeStable { alpha: f64, rho: f64 },
    /// Monotone stable law `m_{α,ρ}`.
    MonotoneStable { alpha: f64, rho: f64 },
    /// The second-kind beta law with density `β x^{β−1}/(x^β+1)²` on `(0,∞)`
    /// (the multiplicative law-of-large-numbers limit of positive Boolean
    /// stable laws).
    Gb2Limit { beta: f64 },
}

/// Power-law behaviour of a density near 0 and near ∞ (exponents of `|x|`),
/// used to pick quadrature maps.  `None` means no tail on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tails {
    pub at_zero: Option<f64>,
    pub at_inf: Option<f64>,
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::BooleanStable { alpha, rho } => {
                let p = AdmissiblePair::new(alpha, rho)?;
                if p.is_atomic_boundary() {
                    return Err(Error::unsupported(
                        "boundary-asymmetry Boolean stable law with atoms is not representable as a density family",
                    ));
                }
                if alpha == 1.0 && (rho == 0.0 || rho == 1.0) {
                    return Err(Error::unsupported("b_(1,0) and b_(1,1) are point masses; use an atomic measure"));
                }
                Ok(())
            }
            Family::Cauchy { rho } => {
                if 0.0 < rho && rho < 1.0 {
                    Ok(())
                } else {
                    Err(Error::domain("Cauchy family needs rho in (0,1); c_0, c_1 are atoms"))
                }
            }
            Family::MarchenkoPastur => Ok(()),
            Family::Pareto { r } => {
                if r > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("Pareto needs r > 0"))
                }
            }
            Family::FreeStable { alpha, rho } => {
                let _ = AdmissiblePair::new(alpha, rho)?;
                if rho == 1.0 || rho == 0.0 {
                    if alpha > 1.0 {
                        return Err(Error::domain("one-sided free stable requires alpha <= 1"));
                    }
                    Ok(())
                } else if rho == 0.5 {
                    Ok(())
                } else {
                    Err(Error::unsupported("free stable family supported for rho in {0, 1/2, 1}"))
                }
            }
            Family::MonotoneStable { alpha, rho } => {
                let _ = AdmissiblePair::new(alpha, rho)?;
                if alpha == 1.0 && (rho == 0.0 || rho == 1.0) {
                    return Err(Error::unsupported("m_(1,0), m_(1,1) are point masses"));
                }
                Ok(())
            }
            Family::Gb2Limit { beta } => {
                if beta > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("Gb2Limit needs beta > 0"))
                }
            }
        }
    }

    /// Density of the absolutely continuous part at `x`.
    pub fn density(&self, x: f64) -> Result<f64> {
        match *self {
            Family::BooleanStable { alpha, rho } => {
                if x == 0.0 {
                    return Ok(0.0);
                }
                stable::boolean_density(AdmissiblePair::new(alpha, rho)?, x)
            }
            Family::Cauchy { rho } => stable::cauchy_rho_density(rho, x),
            Family::MarchenkoPastur => Ok(stable::mp_density(x)),
            Family::Pareto { r } => stable::pareto_density(r, x),
            Family::FreeStable { alpha, rho } => {
                stable::free_stable_density(AdmissiblePair::new(alpha, rho)?, x)
            }
            Family::MonotoneStable { alpha, rho } => {
                stable::monotone_density(AdmissiblePair::new(alpha, rho)?, x)
            }
            Family::Gb2Limit { beta } => Ok(lln::gb2_limit_density(beta, x)),
        }
    }

    /// Support hull `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Family::BooleanStable { alpha, rho }
            | Family::FreeStable { alpha, rho }
            | Family::MonotoneStable { alpha, rho } => {
                let _ = alpha;
                if rho == 1.0 {
                    (0.0, f64::INFINITY)
                } else if rho == 0.0 {
                    (f64::NEG_INFINITY, 0.0)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            Family::Cauchy { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::MarchenkoPastur => (0.0, 4.0),
            Family::Pareto { .. } | Family::Gb2Limit { .. } => (0.0, f64::INFINITY),
        }
    }

    pub fn tails(&self) -> Tails {
        match *self {
            Family::BooleanStable { alpha, .. } => {
                Tails { at_zero: Some(alpha - 1.0), at_inf: Some(-alpha - 1.0) }
            }
            Family::Cauchy { .. } => Tails { at_zero: None, at_inf: Some(-2.0) },
            Family::MarchenkoPastur => Tails { at_zero: Some(-0.5), at_inf: None },
            Family::Pareto { r } => Tails { at_zero: None, at_inf: Some(-r - 1.0) },
            Family::FreeStable { alpha, rho } => Tails {
                at_zero: if rho == 0.5 { None } else { Some(alpha - 1.0) },
                at_inf: Some(-alpha - 1.0),
            },
            Family::MonotoneStable { alpha, rho } => Tails {
                at_zero: if rho == 1.0 || rho == 0.0 { Some(alpha) } else { None },
                at_inf: Some(-alpha - 1.0),
            },
            Family::Gb2Limit { beta } => {
                Tails { at_zero: Some(beta - 1.0), at_inf: Some(-beta - 1.0) }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Grid densities
// ---------------------------------------------------------------------------

/// Interpolation rule between grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Interp {
    Linear,
    /// Linear in (log x, log y); falls back to linear where a node value
    /// is not strictly positive.
    #[default]
    LogLog,
}

/// Density samples over one sign of the support, abscissae strictly positive
/// and increasing, with power-law extensions beyond the first and last node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// density ~ `ys[0]·(x/xs[0])^{tail_zero}` below `xs[0]`
    pub tail_zero: f64,
    /// density ~ `ys[n−1]·(x/xs[n−1])^{tail_inf}` above `xs[n−1]`
    pub tail_inf: f64,
    #[serde(default)]
    pub interp: Interp,
}

impl HalfGrid {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, tail_zero: f64, tail_inf: f64) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::domain("half-grid needs at least two matching nodes"));
        }
        if xs[0] <= 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("half-grid abscissae must be positive and increasing"));
        }
        if ys.iter().any(|&y| y < 0.0 || !y.is_finite()) {
            return Err(Error::domain("half-grid density values must be finite and nonnegative"));
        }
        if tail_inf >= -1.0 {
            return Err(Error::domain("tail exponent at infinity must be < -1"));
        }
        if tail_zero <= -1.0 {
            return Err(Error::domain("tail exponent at zero must be > -1"));
        }
        Ok(HalfGrid { xs, ys, tail_zero, tail_inf, interp: Interp::LogLog })
    }

    /// Density at `x > 0`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.xs.len();
        if x < self.xs[0] {
            return self.ys[0] * (x / self.xs[0]).powf(self.tail_zero);
        }
        if x > self.xs[n - 1] {
            return self.ys[n - 1] * (x / self.xs[n - 1]).powf(self.tail_inf);
        }
        let i = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        match self.interp {
            Interp::LogLog if y0 > 0.0 && y1 > 0.0 => {
                let m = (y1 / y0).ln() / (x1 / x0).ln();
                y0 * (x / x0).powf(m)
            }
            _ => y0 + (y1 - y0) * (x - x0) / (x1 - x0),
        }
    }

    /// Total mass, segment-exact for the interpolation rule in use.
    pub fn mass(&self) -> f64 {
        let n = self.xs.len();
        let mut m = 0.0;
        // lower tail: ∫₀^{x₀} y₀ (x/x₀)^{e} dx = y₀ x₀/(e+1)
        m += self.ys[0] * self.xs[0] / (self.tail_zero + 1.0);
        // upper tail: ∫_{x_{n−1}}^∞ = −y x/(e+1)
        m += -self.ys[n - 1] * self.xs[n - 1] / (self.tail_inf + 1.0);
        for i in 0..n - 1 {
            m += self.segment_mass(i);
        }
        m
    }

    fn segment_mass(&self, i: usize) -> f64 {
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        match self.interp {
            Interp::LogLog if y0 > 0.0 && y1 > 0.0 => {
                let m = (y1 / y0).ln() / (x1 / x0).ln();
                if (m + 1.0).abs() < 1e-9 {
                    y0 * x0 * (x1 / x0).ln()
                } else {
                    y0 * x0 * ((x1 / x0).powf(m + 1.0) - 1.0) / (m + 1.0)
                }
            }
            _ => 0.5 * (y0 + y1) * (x1 - x0),
        }
    }

    /// ∫ f(x) dμ over this half (x taken positive).
    pub fn integrate<T: QuadValue>(
        &self,
        f: &mut dyn FnMut(f64) -> T,
        spec: &QuadSpec,
    ) -> Result<T> {
        let n = self.xs.len();
        let mut total = T::zero();
        if self.ys[0] > 0.0 {
            let (x0, y0, e) = (self.xs[0], self.ys[0], self.tail_zero);
            total = total.add(quad::integrate_power_zero(
                |x| f(x).scale(y0 * (x / x0).powf(e)),
                x0,
                e,
                spec,
            )?);
        }
        if self.ys[n - 1] > 0.0 {
            let (x1, y1, e) = (self.xs[n - 1], self.ys[n - 1], self.tail_inf);
            total = total.add(quad::integrate_power_tail(
                |x| f(x).scale(y1 * (x / x1).powf(e)),
                x1,
                e,
                spec,
            )?);
        }
        total = total.add(quad::integrate_finite(
            |x| f(x).scale(self.eval(x)),
            self.xs[0],
            self.xs[n - 1],
            spec,
        )?);
        Ok(total)
    }
}

/// A tabulated density over both signs of the axis, plus point masses.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct GridDensity {
    pub pos: Option<HalfGrid>,
    /// density of the reflection: `neg.eval(y)` is the density at `x = −y`
    pub neg: Option<HalfGrid>,
    /// point masses `(location, weight)`
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
}

impl GridDensity {
    pub fn density(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.pos.as_ref().map_or(0.0, |g| g.eval(x))
        } else if x < 0.0 {
            self.neg.as_ref().map_or(0.0, |g| g.eval(-x))
        } else {
            0.0
        }
    }

    pub fn mass(&self) -> f64 {
        self.pos.as_ref().map_or(0.0, |g| g.mass())
            + self.neg.as_ref().map_or(0.0, |g| g.mass())
            + self.atoms.iter().map(|&(_, w)| w).sum::<f64>()
    }
}

// ---------------------------------------------------------------------------
// The measure type
// ---------------------------------------------------------------------------

/// A probability measure on the real line.
#[derive(Clone)]
pub enum Measure {
    /// Finite atomic measure; weights strictly positive, summing to 1.
    Atomic(Vec<(f64, f64)>),
    /// Closed-form density family.
    Family(Family),
    /// Tabulated density with tail extensions.
    Grid(GridDensity),
    /// Law of `a·X`.
    Scaled { a: f64, inner: Box<Measure> },
    /// Law of `X^p`.
    Powered { p: f64, inner: Box<Measure> },
    /// Finite mixture; weights positive, summing to 1.
    Mix(Vec<(f64, Measure)>),
    /// Measure known only through a transform evaluator.
    Transform { kind: TransformKind, eval: TransformFn },
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Atomic(a) => f.debug_tuple("Atomic").field(a).finish(),
            Measure::Family(fam) => f.debug_tuple("Family").field(fam).finish(),
            Measure::Grid(g) => f
                .debug_struct("Grid")
                .field("pos_nodes", &g.pos.as_ref().map(|h| h.xs.len()))
                .field("neg_nodes", &g.neg.as_ref().map(|h| h.xs.len()))
                .field("atoms", &g.atoms)
                .finish(),
            Measure::Scaled { a, inner } => {
                f.debug_struct("Scaled").field("a", a).field("inner", inner).finish()
            }
            Measure::Powered { p, inner } => {
                f.debug_struct("Powered").field("p", p).field("inner", inner).finish()
            }
            Measure::Mix(parts) => f.debug_tuple("Mix").field(parts).finish(),
            Measure::Transform { kind, .. } => {
                f.debug_struct("Transform").field("kind", kind).finish()
            }
        }
    }
}

const ATOM_WEIGHT_TOL: f64 = 1e-12;

impl Measure {
    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("atomic measure needs at least one atom"));
        }
        let mut total = 0.0;
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::domain("atom data must be finite"));
            }
            if w <= 0.0 {
                return Err(Error::domain("atom weights must be strictly positive"));
            }
            total += w;
        }
        if (total - 1.0).abs() > ATOM_WEIGHT_TOL {
            return Err(Error::domain(format!("atom weights sum to {total}, expected 1")));
        }
        Ok(Measure::Atomic(merge_atoms(atoms)))
    }

    pub fn dirac(a: f64) -> Self {
        Measure::Atomic(vec![(a, 1.0)])
    }

    pub fn family(f: Family) -> Result<Self> {
        f.validate()?;
        Ok(Measure::Family(f))
    }

    pub fn boolean_stable(alpha: f64, rho: f64) -> Result<Self> {
        if alpha == 1.0 && rho == 1.0 {
            return Ok(Measure::dirac(1.0));
        }
        if alpha == 1.0 && rho == 0.0 {
            return Ok(Measure::dirac(-1.0));
        }
        Measure::family(Family::BooleanStable { alpha, rho })
    }

    pub fn from_transform(kind: TransformKind, eval: TransformFn) -> Self {
        Measure::Transform { kind, eval }
    }

    /// Law of `a·X`.
    pub fn dilate(&self, a: f64) -> Result<Measure> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::domain("dilation factor must be finite and nonzero"));
        }
        if a == 1.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            Measure::Atomic(atoms) => {
                Measure::Atomic(atoms.iter().map(|&(x, w)| (a * x, w)).collect())
            }
            Measure::Scaled { a: b, inner } => Measure::Scaled { a: a * b, inner: inner.clone() },
            Measure::Mix(parts) => Measure::Mix(
                parts
                    .iter()
                    .map(|(w, m)| Ok((*w, m.dilate(a)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            other => Measure::Scaled { a, inner: Box::new(other.clone()) },
        })
    }

    /// Push-forward by `x ↦ x^p`.
    ///
    /// Non-integer `p` requires support in `[0, ∞)`; `p ≤ 0` additionally
    /// requires no atom at 0.
    pub fn pushforward_power(&self, p: f64) -> Result<Measure> {
        if !p.is_finite() || p == 0.0 {
            return Err(Error::domain("power must be finite and nonzero"));
        }
        if p == 1.0 {
            return Ok(self.clone());
        }
        let integer_p = p.fract() == 0.0;
        if !integer_p && !self.is_nonnegative() {
            return Err(Error::domain(
                "non-integer power pushforward needs a measure supported on [0, ∞)",
            ));
        }
        if p <= 0.0 && self.zero_atom_mass() > 0.0 {
            return Err(Error::domain("nonpositive power pushforward needs no atom at 0"));
        }
        Ok(match self {
            Measure::Atomic(atoms) => {
                let mapped = atoms
                    .iter()
                    .map(|&(x, w)| {
                        let y = if integer_p { x.powi(p as i32) } else { x.powf(p) };
                        Ok((y, w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Measure::Atomic(merge_atoms(mapped))
            }
            Measure::Powered { p: q, inner } if inner.is_nonnegative() => {
                Measure::Powered { p: p * q, inner: inner.clone() }
            }
            other => Measure::Powered { p, inner: Box::new(other.clone()) },
        })
    }

    /// Law of `X⁻¹`.
    pub fn invert(&self) -> Result<Measure> {
        self.pushforward_power(-1.0)
    }

    /// Symmetrisation `½(μ(dx) + μ(−dx))` of a measure on `[0, ∞)`.
    pub fn symmetrize(&self) -> Result<Measure> {
        if !self.is_nonnegative() {
            return Err(Error::domain("symmetrize requires a measure supported on [0, ∞)"));
        }
        if let Measure::Atomic(atoms) = self {
            let mut out = Vec::with_capacity(atoms.len() * 2);
            for &(x, w) in atoms {
                if x == 0.0 {
                    out.push((0.0, w));
                } else {
                    out.push((x, w / 2.0));
                    out.push((-x, w / 2.0));
                }
            }
            return Ok(Measure::Atomic(merge_atoms(out)));
        }
        Ok(Measure::Mix(vec![(0.5, self.clone()), (0.5, self.dilate(-1.0)?)]))
    }

    /// Support hull, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Measure::Atomic(atoms) => {
                let lo = atoms.iter().map(|&(x, _)| x).fold(f64::INFINITY, f64::min);
                let hi = atoms.iter().map(|&(x, _)| x).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            Measure::Family(f) => f.support(),
            Measure::Grid(g) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                if g.pos.is_some() {
                    lo = lo.min(0.0);
                    hi = hi.max(f64::INFINITY);
                }
                if g.neg.is_some() {
                    lo = lo.min(f64::NEG_INFINITY);
                    hi = hi.max(0.0);
                }
                for &(x, _) in &g.atoms {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
                (lo, hi)
            }
            Measure::Scaled { a, inner } => {
                let (lo, hi) = inner.support();
                if *a > 0.0 {
                    (a * lo, a * hi)
                } else {
                    (a * hi, a * lo)
                }
            }
            Measure::Powered { p, inner } => {
                let (lo, hi) = inner.support();
                if *p > 0.0 {
                    if lo >= 0.0 {
                        (lo.powf(*p), hi.powf(*p))
                    } else {
                        (f64::NEG_INFINITY, f64::INFINITY)
                    }
                } else if lo >= 0.0 {
                    (if hi.is_infinite() { 0.0 } else { hi.powf(*p) }, {
                        if lo == 0.0 {
                            f64::INFINITY
                        } else {
                            lo.powf(*p)
                        }
                    })
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            Measure::Mix(parts) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (_, m) in parts {
                    let (l, h) = m.support();
                    lo = lo.min(l);
                    hi = hi.max(h);
                }
                (lo, hi)
            }
            Measure::Transform { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.support().0 >= 0.0
    }

    /// Mass of the atom at 0, if any.
    pub fn zero_atom_mass(&self) -> f64 {
        match self {
            Measure::Atomic(atoms) => {
                atoms.iter().filter(|&&(x, _)| x == 0.0).map(|&(_, w)| w).sum()
            }
            Measure::Grid(g) => g.atoms.iter().filter(|&&(x, _)| x == 0.0).map(|&(_, w)| w).sum(),
            Measure::Scaled { inner, .. } => inner.zero_atom_mass(),
            Measure::Powered { p, inner } => {
                if *p > 0.0 {
                    inner.zero_atom_mass()
                } else {
                    0.0
                }
            }
            Measure::Mix(parts) => parts.iter().map(|(w, m)| w * m.zero_atom_mass()).sum(),
            _ => 0.0,
        }
    }

    /// Density of the absolutely continuous part at `x`.
    pub fn density(&self, x: f64) -> Result<f64> {
        match self {
            Measure::Atomic(_) => Ok(0.0),
            Measure::Family(f) => {
                if x == 0.0 {
                    // families with an x^{α−1} blow-up are left undefined at 0
                    return f.density(x).or(Ok(0.0));
                }
                f.density(x)
            }
            Measure::Grid(g) => Ok(g.density(x)),
            Measure::Scaled { a, inner } => Ok(inner.density(x / a)? / a.abs()),
            Measure::Powered { p, inner } => powered_density(*p, inner, x),
            Measure::Mix(parts) => {
                let mut d = 0.0;
                for (w, m) in parts {
                    d += w * m.density(x)?;
                }
                Ok(d)
            }
            Measure::Transform { .. } => Err(Error::unsupported(
                "transform-defined measure has no direct density; recover it first",
            )),
        }
    }

    /// Tail exponents of the absolutely continuous part (quadrature hints).
    pub fn tails(&self) -> Tails {
        match self {
            Measure::Atomic(_) => Tails { at_zero: None, at_inf: None },
            Measure::Family(f) => f.tails(),
            Measure::Grid(g) => {
                let pick = |h: &Option<HalfGrid>, zero: bool| {
                    h.as_ref().map(|g| if zero { g.tail_zero } else { g.tail_inf })
                };
                let combine = |a: Option<f64>, b: Option<f64>, zero: bool| match (a, b) {
                    (Some(x), Some(y)) => Some(if zero { x.min(y) } else { x.max(y) }),
                    (x, None) => x,
                    (None, y) => y,
                };
                Tails {
                    at_zero: combine(pick(&g.pos, true), pick(&g.neg, true), true),
                    at_inf: combine(pick(&g.pos, false), pick(&g.neg, false), false),
                }
            }
            Measure::Scaled { inner, .. } => inner.tails(),
            Measure::Powered { p, inner } => {
                let t = inner.tails();
                let map = |e: Option<f64>| e.map(|e| (e + 1.0) / p - 1.0);
                if *p > 0.0 {
                    Tails { at_zero: map(t.at_zero), at_inf: map(t.at_inf) }
                } else {
                    Tails { at_zero: map(t.at_inf), at_inf: map(t.at_zero) }
                }
            }
            Measure::Mix(parts) => {
                let mut at_zero: Option<f64> = None;
                let mut at_inf: Option<f64> = None;
                for (_, m) in parts {
                    let t = m.tails();
                    at_zero = match (at_zero, t.at_zero) {
                        (Some(a), Some(b)) => Some(a.min(b)),
                        (a, b) => a.or(b),
                    };
                    at_inf = match (at_inf, t.at_inf) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        (a, b) => a.or(b),
                    };
                }
                Tails { at_zero, at_inf }
            }
            Measure::Transform { .. } => Tails { at_zero: None, at_inf: None },
        }
    }

    /// ∫ f dμ by exact summation over atoms and singularity-aware adaptive
    /// quadrature over densities.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, spec: &QuadSpec) -> Result<f64> {
        self.integrate_val(&|x| f(x), spec)
    }

    /// ∫ f dμ for a complex-valued integrand (Cauchy kernels and the like).
    pub fn integrate_complex(
        &self,
        f: &dyn Fn(f64) -> Complex64,
        spec: &QuadSpec,
    ) -> Result<Complex64> {
        self.integrate_val(f, spec)
    }

    fn integrate_val<T: QuadValue>(&self, f: &dyn Fn(f64) -> T, spec: &QuadSpec) -> Result<T> {
        match self {
            Measure::Atomic(atoms) => {
                let mut total = T::zero();
                for &(x, w) in atoms {
                    total = total.add(f(x).scale(w));
                }
                Ok(total)
            }
            Measure::Family(fam) => {
                let (lo, hi) = fam.support();
                let t = fam.tails();
                integrate_density_profile(
                    &mut |x| f(x).scale(fam.density(x).unwrap_or(0.0)),
                    lo,
                    hi,
                    t,
                    spec,
                )
            }
            Measure::Grid(g) => {
                let mut total = T::zero();
                if let Some(h) = &g.pos {
                    total = total.add(h.integrate(&mut |x| f(x), spec)?);
                }
                if let Some(h) = &g.neg {
                    total = total.add(h.integrate(&mut |x| f(-x), spec)?);
                }
                for &(x, w) in &g.atoms {
                    total = total.add(f(x).scale(w));
                }
                Ok(total)
            }
            Measure::Scaled { a, inner } => inner.integrate_val(&|x| f(a * x), spec),
            Measure::Powered { p, inner } => {
                let p = *p;
                let integer_p = p.fract() == 0.0;
                inner.integrate_val(
                    &|x| {
                        let y = if integer_p {
                            x.powi(p as i32)
                        } else if x > 0.0 {
                            x.powf(p)
                        } else {
                            0.0
                        };
                        f(y)
                    },
                    spec,
                )
            }
            Measure::Mix(parts) => {
                let mut total = T::zero();
                for (w, m) in parts {
                    total = total.add(m.integrate_val(f, spec)?.scale(*w));
                }
                Ok(total)
            }
            Measure::Transform { .. } => Err(Error::unsupported(
                "cannot integrate against a transform-defined measure; recover it first",
            )),
        }
    }

    /// Total mass (should be 1 up to quadrature error).
    pub fn total_mass(&self, spec: &QuadSpec) -> Result<f64> {
        self.integrate(&|_| 1.0, spec)
    }

    /// Multiplicative classical convolution: the law of `X·Y` for independent
    /// `X ~ self`, `Y ~ other`.
    pub fn classical_mult(&self, other: &Measure, spec: &QuadSpec) -> Result<Measure> {
        match (self, other) {
            (Measure::Atomic(atoms), Measure::Atomic(batoms)) => {
                let mut out = Vec::with_capacity(atoms.len() * batoms.len());
                for &(x, w) in atoms {
                    for &(y, v) in batoms {
                        out.push((x * y, w * v));
                    }
                }
                Ok(Measure::Atomic(merge_atoms(out)))
            }
            (Measure::Atomic(atoms), m) | (m, Measure::Atomic(atoms)) => {
                // exact scale-mixture path: weighted dilations
                let mut parts = Vec::with_capacity(atoms.len());
                for &(a, w) in atoms {
                    if a == 0.0 {
                        parts.push((w, Measure::dirac(0.0)));
                    } else {
                        parts.push((w, m.dilate(a)?));
                    }
                }
                Ok(if parts.len() == 1 { parts.pop().unwrap().1 } else { Measure::Mix(parts) })
            }
            (Measure::Mix(parts), m) => {
                let mut out = Vec::with_capacity(parts.len());
                for (w, inner) in parts {
                    out.push((*w, inner.classical_mult(m, spec)?));
                }
                Ok(Measure::Mix(out))
            }
            (m, Measure::Mix(parts)) => {
                let mut out = Vec::with_capacity(parts.len());
                for (w, inner) in parts {
                    out.push((*w, m.classical_mult(inner, spec)?));
                }
                Ok(Measure::Mix(out))
            }
            (Measure::Scaled { a, inner }, m) => {
                Ok(Measure::Scaled { a: *a, inner: Box::new(inner.classical_mult(m, spec)?) })
            }
            (m, Measure::Scaled { a, inner }) => {
                Ok(Measure::Scaled { a: *a, inner: Box::new(m.classical_mult(inner, spec)?) })
            }
            (Measure::Transform { .. }, _) | (_, Measure::Transform { .. }) => Err(
                Error::unsupported("classical_mult of a transform-defined measure; recover it first"),
            ),
            (a, b) => Ok(Measure::Grid(log_scale_product(a, b, spec)?)),
        }
    }

    /// Quantile-style positive/negative decomposition used by the density
    /// product and the samplers: `(w₊, w₋, w₀)` with the conditional halves.
    pub(crate) fn sign_masses(&self, spec: &QuadSpec) -> Result<(f64, f64, f64)> {
        let w0 = self.zero_atom_mass();
        let (lo, hi) = self.support();
        if lo >= 0.0 {
            return Ok((1.0 - w0, 0.0, w0));
        }
        if hi <= 0.0 {
            return Ok((0.0, 1.0 - w0, w0));
        }
        let wp = self.integrate(&|x| if x > 0.0 { 1.0 } else { 0.0 }, spec)?;
        let wn = self.integrate(&|x| if x < 0.0 { 1.0 } else { 0.0 }, spec)?;
        Ok((wp, wn, w0))
    }
}

fn powered_density(p: f64, inner: &Measure, x: f64) -> Result<f64> {
    let integer_p = p.fract() == 0.0;
    if !integer_p || inner.is_nonnegative() {
        // strictly monotone map on (0, ∞)
        if x <= 0.0 {
            return Ok(0.0);
        }
        let t = x.powf(1.0 / p);
        return Ok(inner.density(t)? * (1.0 / p).abs() * x.powf(1.0 / p - 1.0));
    }
    let k = p as i32;
    if k % 2 == 0 {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let t = x.powf(1.0 / p);
        let j = (1.0 / p) * x.powf(1.0 / p - 1.0);
        Ok((inner.density(t)? + inner.density(-t)?) * j.abs())
    } else {
        if x == 0.0 {
            return Ok(0.0);
        }
        let t = x.signum() * x.abs().powf(1.0 / p);
        let j = (1.0 / p) * x.abs().powf(1.0 / p - 1.0);
        Ok(inner.density(t)? * j.abs())
    }
}

/// Merge exactly coincident atoms and sort by location.
fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

/// Adaptive quadrature of an integrand over a density's support, splitting at
/// 0 and applying power-flattening maps suggested by the tail exponents.
pub fn integrate_density_profile<T: QuadValue>(
    f: &mut dyn FnMut(f64) -> T,
    lo: f64,
    hi: f64,
    tails: Tails,
    spec: &QuadSpec,
) -> Result<T> {
    let mut total = T::zero();
    if lo < 0.0 {
        let mut g = |y: f64| f(-y);
        let upper = -lo;
        total = total.add(integrate_positive_side(&mut g, upper, tails, spec)?);
    }
    if hi > 0.0 {
        total = total.add(integrate_positive_side(f, hi, tails, spec)?);
    }
    Ok(total)
}

fn integrate_positive_side<T: QuadValue>(
    f: &mut dyn FnMut(f64) -> T,
    hi: f64,
    tails: Tails,
    spec: &QuadSpec,
) -> Result<T> {
    let mut total = T::zero();
    let split = if hi.is_finite() { hi.min(1.0) } else { 1.0 };
    match tails.at_zero {
        Some(e) if e < -1e-3 => {
            total = total.add(quad::integrate_power_zero(|x| f(x), split, e, spec)?);
        }
        _ => {
            total = total.add(quad::integrate_finite(|x| f(x), 0.0, split, spec)?);
        }
    }
    if hi > split {
        if hi.is_finite() {
            total = total.add(quad::integrate_finite(|x| f(x), split, hi, spec)?);
        } else {
            match tails.at_inf {
                Some(e) if e < -1.0 => {
                    total = total.add(quad::integrate_power_tail(|x| f(x), split, e, spec)?);
                }
                _ => {
                    total = total.add(quad::integrate(|x| f(x), split, f64::INFINITY, spec)?);
                }
            }
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Stieltjes inversion
// ---------------------------------------------------------------------------

/// Boundary density `−(1/π)·lim_{ε→0} Im G(x+iε)` by Richardson
/// extrapolation over the given ε sequence (which must decrease by factors
/// of 2, e.g. `default_eps_sequence`).
pub fn stieltjes_density(
    g: &dyn Fn(Complex64) -> Result<Complex64>,
    x: f64,
    eps_sequence: &[f64],
) -> Result<f64> {
    if eps_sequence.len() < 2 {
        return Err(Error::domain("need at least two ε levels"));
    }
    let mut vals = Vec::with_capacity(eps_sequence.len());
    for &eps in eps_sequence {
        let gz = g(Complex64::new(x, eps))?;
        vals.push(-gz.im / std::f64::consts::PI);
    }
    // Monotonicity of the extrapolation corrections is the convergence
    // diagnostic: diverging corrections mean the expansion in ε is invalid
    // here (atom or support endpoint).
    let n = vals.len();
    let mut prev_corr = f64::INFINITY;
    let mut row = vals.clone();
    for j in 1..n {
        let factor = 2f64.powi(j as i32);
        let mut next = Vec::with_capacity(n - j);
        for k in 0..n - j {
            next.push((factor * row[k + 1] - row[k]) / (factor - 1.0));
        }
        let corr = (next[next.len() - 1] - row[row.len() - 1]).abs();
        if corr > prev_corr * 4.0 && corr > 1e-11 {
            return Err(Error::numerical(format!(
                "stieltjes extrapolation not converging at x = {x} (correction {corr:.3e} after {prev_corr:.3e})"
            )));
        }
        prev_corr = prev_corr.min(corr);
        row = next;
    }
    Ok(row[0])
}

/// Default ε sequence: `ε_k = 2^{−k}·10⁻²`, four levels.
pub fn default_eps_sequence() -> Vec<f64> {
    (0..4).map(|k| 1e-2 * 0.5f64.powi(k)).collect()
}

/// The same extrapolation but returning the estimate even when the
/// diagnostics are inconclusive (used by grid recovery, which postprocesses).
pub fn stieltjes_density_lenient(
    g: &dyn Fn(Complex64) -> Result<Complex64>,
    x: f64,
    eps_sequence: &[f64],
) -> Result<f64> {
    let mut vals = Vec::with_capacity(eps_sequence.len());
    for &eps in eps_sequence {
        let gz = g(Complex64::new(x, eps))?;
        vals.push(-gz.im / std::f64::consts::PI);
    }
    let (v, _) = richardson_zero_limit(&vals);
    Ok(v)
}

// ---------------------------------------------------------------------------
// Density product on the log scale
// ---------------------------------------------------------------------------

struct SignedPart {
    weight: f64,
    // density of |X| conditioned on the sign, normalized to mass `weight`
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    tails: Tails,
}

fn signed_parts(m: &Measure, _spec: &QuadSpec) -> Result<(Option<SignedPart>, Option<SignedPart>)> {
    // Unnormalized halves: density functions carry their own mass.
    let t = m.tails();
    let (lo, hi) = m.support();
    let m_pos = m.clone();
    let pos = if hi > 0.0 {
        Some(SignedPart {
            weight: 1.0,
            density: Arc::new(move |y: f64| m_pos.density(y).unwrap_or(0.0)),
            tails: t,
        })
    } else {
        None
    };
    let m_neg = m.clone();
    let neg = if lo < 0.0 {
        Some(SignedPart {
            weight: 1.0,
            density: Arc::new(move |y: f64| m_neg.density(-y).unwrap_or(0.0)),
            tails: t,
        })
    } else {
        None
    };
    Ok((pos, neg))
}

/// Density of a product of two (half-)densities on `(0, ∞)`, evaluated on a
/// log grid by per-node adaptive quadrature of the multiplicative
/// convolution `f_Z(z) = ∫ f_X(t) f_Y(z/t) dt/t`.
fn half_product_density(
    a: &SignedPart,
    b: &SignedPart,
    out_xs: &[f64],
    spec: &QuadSpec,
) -> Result<Vec<f64>> {
    let inner_spec = QuadSpec { abs_tol: 1e-12, rel_tol: 1e-8, ..*spec };
    let da = a.density.clone();
    let db = b.density.clone();
    let ta = a.tails;
    let mut out = Vec::with_capacity(out_xs.len());
    for &z in out_xs {
        let val = integrate_positive_side(
            &mut |t: f64| da(t) * db(z / t) / t,
            f64::INFINITY,
            ta,
            &inner_spec,
        )?;
        out.push(val.max(0.0));
    }
    Ok(out)
}

pub(crate) fn fit_tail(xs: &[f64], ys: &[f64], upper: bool) -> f64 {
    // slope of log y vs log x over the outer stretch, clamped to integrability
    let n = xs.len();
    let take = (n / 16).max(4).min(n - 1);
    let (i0, i1) = if upper { (n - 1 - take, n - 1) } else { (0, take) };
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0;
    for i in i0..i1 {
        if ys[i] > 0.0 && ys[i + 1] > 0.0 {
            num += (ys[i + 1] / ys[i]).ln();
            den += (xs[i + 1] / xs[i]).ln();
            count += 1;
        }
    }
    if count == 0 || den == 0.0 {
        return if upper { -3.0 } else { 0.0 };
    }
    let slope = num / den;
    if upper {
        slope.min(-1.001)
    } else {
        slope.max(-0.999)
    }
}

fn build_half_grid(xs: Vec<f64>, ys: Vec<f64>) -> Result<Option<HalfGrid>> {
    let mass_hint: f64 = ys.iter().sum();
    if mass_hint <= 0.0 {
        return Ok(None);
    }
    // trim leading/trailing zero nodes so the log-log extension is sound
    let first = ys.iter().position(|&y| y > 0.0).unwrap();
    let last = ys.iter().rposition(|&y| y > 0.0).unwrap();
    if last - first + 1 < 2 {
        return Ok(None);
    }
    let xs = xs[first..=last].to_vec();
    let ys = ys[first..=last].to_vec();
    let t0 = fit_tail(&xs, &ys, false);
    let t1 = fit_tail(&xs, &ys, true);
    Ok(Some(HalfGrid::new(xs, ys, t0, t1)?))
}

/// Log-scale product of two density-type measures.
fn log_scale_product(a: &Measure, b: &Measure, spec: &QuadSpec) -> Result<GridDensity> {
    let (apos, aneg) = signed_parts(a, spec)?;
    let (bpos, bneg) = signed_parts(b, spec)?;
    let zero_mass = {
        let za = a.zero_atom_mass();
        let zb = b.zero_atom_mass();
        za + zb - za * zb
    };

    let n_nodes = 480usize;
    let (lo, hi) = (1e-7f64, 1e7f64);
    let mut xs = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let u = lo.ln() + (hi.ln() - lo.ln()) * (i as f64) / ((n_nodes - 1) as f64);
        xs.push(u.exp());
    }

    let mut ys_pos = vec![0.0; n_nodes];
    let mut ys_neg = vec![0.0; n_nodes];
    let mut accumulate = |pa: &Option<SignedPart>,
                          pb: &Option<SignedPart>,
                          target: &mut Vec<f64>|
     -> Result<()> {
        if let (Some(x), Some(y)) = (pa, pb) {
            let vals = half_product_density(x, y, &xs, spec)?;
            for (t, v) in target.iter_mut().zip(vals) {
                *t += v;
            }
        }
        Ok(())
    };
    accumulate(&apos, &bpos, &mut ys_pos)?;
    accumulate(&aneg, &bneg, &mut ys_pos)?;
    accumulate(&apos, &bneg, &mut ys_neg)?;
    accumulate(&aneg, &bpos, &mut ys_neg)?;

    let mut atoms = Vec::new();
    if zero_mass > 0.0 {
        atoms.push((0.0, zero_mass));
    }
    Ok(GridDensity {
        pos: build_half_grid(xs.clone(), ys_pos)?,
        neg: build_half_grid(xs, ys_neg)?,
        atoms,
    })
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Serializable form of [`Measure`] (transform-defined measures excluded).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureJson {
    Atomic { atoms: Vec<AtomJson> },
    Family(Family),
    Grid(GridDensity),
    Scaled { a: f64, inner: Box<MeasureJson> },
    Powered { p: f64, inner: Box<MeasureJson> },
    Mix { parts: Vec<(f64, MeasureJson)> },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AtomJson {
    pub x: f64,
    pub w: f64,
}

impl Measure {
    pub fn to_json(&self) -> Result<MeasureJson> {
        Ok(match self {
            Measure::Atomic(atoms) => MeasureJson::Atomic {
                atoms: atoms.iter().map(|&(x, w)| AtomJson { x, w }).collect(),
            },
            Measure::Family(f) => MeasureJson::Family(*f),
            Measure::Grid(g) => MeasureJson::Grid(g.clone()),
            Measure::Scaled { a, inner } => {
                MeasureJson::Scaled { a: *a, inner: Box::new(inner.to_json()?) }
            }
            Measure::Powered { p, inner } => {
                MeasureJson::Powered { p: *p, inner: Box::new(inner.to_json()?) }
            }
            Measure::Mix(parts) => MeasureJson::Mix {
                parts: parts
                    .iter()
                    .map(|(w, m)| Ok((*w, m.to_json()?)))
                    .collect::<Result<Vec<_>>>()?,
            },
            Measure::Transform { .. } => {
                return Err(Error::unsupported(
                    "transform-defined measures have no JSON form; recover them to a grid first",
                ))
            }
        })
    }

    pub fn from_json(json: &MeasureJson) -> Result<Measure> {
        Ok(match json {
            MeasureJson::Atomic { atoms } => {
                Measure::atomic(atoms.iter().map(|a| (a.x, a.w)).collect())?
            }
            MeasureJson::Family(f) => Measure::family(*f)?,
            MeasureJson::Grid(g) => Measure::Grid(g.clone()),
            MeasureJson::Scaled { a, inner } => Measure::from_json(inner)?.dilate(*a)?,
            MeasureJson::Powered { p, inner } => Measure::from_json(inner)?.pushforward_power(*p)?,
            MeasureJson::Mix { parts } => {
                let total: f64 = parts.iter().map(|(w, _)| *w).sum();
                if (total - 1.0).abs() > 1e-9 || parts.iter().any(|(w, _)| *w <= 0.0) {
                    return Err(Error::domain("mixture weights must be positive and sum to 1"));
                }
                Measure::Mix(
                    parts
                        .iter()
                        .map(|(w, m)| Ok((*w, Measure::from_json(m)?)))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn atomic_validation() {
        assert!(Measure::atomic(vec![(1.0, 0.5), (3.0, 0.5)]).is_ok());
        assert!(Measure::atomic(vec![(1.0, 0.5), (3.0, 0.6)]).is_err());
        assert!(Measure::atomic(vec![(1.0, -0.5), (3.0, 1.5)]).is_err());
    }

    #[test]
    fn integrate_normalisation_and_mean() {
        let s = spec();
        let m = Measure::atomic(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_relative_eq!(m.total_mass(&s).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(m.integrate(&|x| x, &s).unwrap(), 2.0, max_relative = 1e-15);

        // Pareto(2) has mean 1
        let p = Measure::family(Family::Pareto { r: 2.0 }).unwrap();
        assert_relative_eq!(p.total_mass(&s).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(p.integrate(&|x| x, &s).unwrap(), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn family_masses() {
        let s = spec();
        for fam in [
            Family::BooleanStable { alpha: 0.4, rho: 0.7 },
            Family::Cauchy { rho: 0.3 },
            Family::MarchenkoPastur,
            Family::Gb2Limit { beta: 0.6 },
        ] {
            let m = Measure::family(fam).unwrap();
            assert_relative_eq!(m.total_mass(&s).unwrap(), 1.0, max_relative = 1e-7);
        }
    }

    #[test]
    fn pushforward_of_atoms() {
        let m = Measure::dirac(4.0).pushforward_power(0.5).unwrap();
        match m {
            Measure::Atomic(a) => assert_eq!(a, vec![(2.0, 1.0)]),
            _ => panic!("expected atomic"),
        }
        let m = Measure::dirac(1.0);
        assert!(matches!(m.pushforward_power(1.0).unwrap(), Measure::Atomic(_)));
        assert!(Measure::dirac(0.0).pushforward_power(-1.0).is_err());
        assert!(Measure::dirac(-2.0).pushforward_power(0.5).is_err());
    }

    #[test]
    fn pareto_one_is_inversion_invariant() {
        // Pa(1) has density (1+x)^{-2}; pushing forward by x ↦ 1/x returns it.
        let s = spec();
        let m = Measure::family(Family::Pareto { r: 1.0 }).unwrap();
        let inv = m.invert().unwrap();
        for &x in &[0.1, 0.5, 1.0, 2.0, 10.0] {
            assert_relative_eq!(
                inv.density(x).unwrap(),
                m.density(x).unwrap(),
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(inv.total_mass(&s).unwrap(), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn dilate_and_symmetrize_atoms() {
        let d = Measure::dirac(1.0).dilate(-3.0).unwrap();
        match &d {
            Measure::Atomic(a) => assert_eq!(a, &vec![(-3.0, 1.0)]),
            _ => panic!(),
        }
        let s = Measure::dirac(2.0).symmetrize().unwrap();
        match &s {
            Measure::Atomic(a) => assert_eq!(a, &vec![(-2.0, 0.5), (2.0, 0.5)]),
            _ => panic!(),
        }
        assert!(Measure::dirac(-1.0).symmetrize().is_err());
    }

    #[test]
    fn mass_preserved_under_ops() {
        let s = spec();
        let m = Measure::family(Family::BooleanStable { alpha: 0.5, rho: 1.0 }).unwrap();
        for op in [
            m.dilate(2.5).unwrap(),
            m.pushforward_power(2.0).unwrap(),
            m.symmetrize().unwrap(),
            m.invert().unwrap(),
        ] {
            assert_relative_eq!(op.total_mass(&s).unwrap(), 1.0, max_relative = 1e-7);
        }
    }

    #[test]
    fn classical_mult_atomic_exact() {
        let s = spec();
        let a = Measure::atomic(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let b = Measure::atomic(vec![(3.0, 0.25), (4.0, 0.75)]).unwrap();
        let ab = a.classical_mult(&b, &s).unwrap();
        let ba = b.classical_mult(&a, &s).unwrap();
        match (&ab, &ba) {
            (Measure::Atomic(u), Measure::Atomic(v)) => assert_eq!(u, v),
            _ => panic!(),
        }
        // associativity exact
        let c = Measure::atomic(vec![(0.5, 1.0)]).unwrap();
        let l = a.classical_mult(&b, &s).unwrap().classical_mult(&c, &s).unwrap();
        let r = a.classical_mult(&b.classical_mult(&c, &s).unwrap(), &s).unwrap();
        match (&l, &r) {
            (Measure::Atomic(u), Measure::Atomic(v)) => {
                for (p, q) in u.iter().zip(v) {
                    assert_relative_eq!(p.0, q.0, max_relative = 1e-15);
                    assert_relative_eq!(p.1, q.1, max_relative = 1e-15);
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn classical_mult_dirac_is_dilation() {
        let s = spec();
        let c = Measure::family(Family::Cauchy { rho: 0.5 }).unwrap();
        let m = Measure::dirac(2.0).classical_mult(&c, &s).unwrap();
        let d = c.dilate(2.0).unwrap();
        for &x in &[-1.0, 0.0, 1.5] {
            assert_relative_eq!(
                m.density(x).unwrap(),
                d.density(x).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn classical_mult_mixed_association_l1() {
        let s = spec();
        let a = Measure::atomic(vec![(1.0, 0.5), (4.0, 0.5)]).unwrap();
        let b = Measure::family(Family::Cauchy { rho: 0.5 }).unwrap();
        let c = Measure::atomic(vec![(0.5, 0.3), (2.0, 0.7)]).unwrap();
        let l = a.classical_mult(&b, &s).unwrap().classical_mult(&c, &s).unwrap();
        let r = a.classical_mult(&b.classical_mult(&c, &s).unwrap(), &s).unwrap();
        let l1 = quad::integrate(
            |x: f64| (l.density(x).unwrap() - r.density(x).unwrap()).abs(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &QuadSpec::with_tols(1e-9, 1e-7),
        )
        .unwrap();
        assert!(l1 <= 1e-6, "L1 discrepancy {l1}");
    }

    #[test]
    fn log_scale_product_of_densities() {
        // product of two Pareto(2) laws against a direct quadrature oracle
        let s = spec();
        let p = Measure::family(Family::Pareto { r: 2.0 }).unwrap();
        let prod = p.classical_mult(&p, &s).unwrap();
        assert_relative_eq!(prod.total_mass(&s).unwrap(), 1.0, max_relative = 1e-4);
        for &z in &[0.3, 1.0, 3.0] {
            let oracle = quad::integrate(
                |t: f64| {
                    let d1 = 2.0 * (1.0 + t).powi(-3);
                    let d2 = 2.0 * (1.0 + z / t).powi(-3);
                    d1 * d2 / t
                },
                0.0,
                f64::INFINITY,
                &s,
            )
            .unwrap();
            assert_relative_eq!(prod.density(z).unwrap(), oracle, max_relative = 1e-3);
        }
    }

    #[test]
    fn stieltjes_density_of_shifted_cauchy() {
        // G(z) = 1/(z+i) is the Cauchy transform of c_{1/2}; density 1/π at 0
        let g = |z: Complex64| Ok(1.0 / (z + Complex64::new(0.0, 1.0)));
        let eps = default_eps_sequence();
        let d = stieltjes_density(&g, 0.0, &eps).unwrap();
        assert_relative_eq!(d, 1.0 / PI, max_relative = 1e-9);
    }

    #[test]
    fn stieltjes_density_off_support_is_zero() {
        let g = |z: Complex64| Ok(1.0 / (z - 1.0));
        let eps = default_eps_sequence();
        let d = stieltjes_density(&g, 0.5, &eps).unwrap();
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn stieltjes_density_of_mp() {
        // y = 1: MP density is √3/(2π)
        let g = |z: Complex64| {
            let w = (1.0 - 4.0 / z).sqrt();
            Ok((1.0 - w) / 2.0)
        };
        let eps = default_eps_sequence();
        let d = stieltjes_density(&g, 1.0, &eps).unwrap();
        assert_relative_eq!(d, 3.0f64.sqrt() / (2.0 * PI), max_relative = 1e-7);
    }

    #[test]
    fn json_roundtrip() {
        let m = Measure::atomic(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let j = serde_json::to_string(&m.to_json().unwrap()).unwrap();
        assert!(j.contains("\"type\":\"atomic\""));
        let back: MeasureJson = serde_json::from_str(&j).unwrap();
        let m2 = Measure::from_json(&back).unwrap();
        assert_relative_eq!(m2.integrate(&|x| x, &spec()).unwrap(), 1.5);

        let fam_json = r#"{"type":"family","name":"boolean_stable","params":{"alpha":0.5,"rho":1.0}}"#;
        let mj: MeasureJson = serde_json::from_str(fam_json).unwrap();
        let m3 = Measure::from_json(&mj).unwrap();
        assert_relative_eq!(
            m3.density(1.0).unwrap(),
            1.0 / (2.0 * PI),
            max_relative = 1e-13
        );
    }
}
