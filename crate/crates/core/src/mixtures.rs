//! Scale mixtures of Boolean stable laws and the convolution machinery
//! around them.
//!
//! For a mixing law `μ` on `(0, ∞)` (plus an explicit mass at 0) and an
//! admissible pair `(α, ρ)`, the scale mixture `μ ⊛ b_{α,ρ}` — the law of
//! `X·B` with classically independent factors — has density
//!
//! ```text
//!   p⁺(x) = sin(πρα)/π ∫ x^{α−1} t^α / (x^{2α} + 2(xt)^α cos(πρα) + t^{2α}) μ(dt)
//! ```
//!
//! (mirrored on the negative axis with `ρ ↦ 1−ρ`), and its η-transform obeys
//! the substitution rule `η_{μ^{1/α}⊛b_{α,ρ}}(z) = η_μ(−(e^{iρπ}z)^α)`.
//! Note the exponent convention: the closed transform formulas are stated
//! for the mixture of the *1/α-th power* of the mixing law; the functions
//! here take `μ` itself and apply the power exactly where the rule wants it.
//!
//! Boolean additive convolution is η-addition; multiplicative monotone
//! convolution is η-composition; both recover the resulting measure through
//! the Stieltjes machinery (with an exact secular-equation path for atomic
//! operands).  Multiplicative free convolution is provided at the catalog
//! level, where the S-transforms form the closed family
//! `S(z) = c·(−z)^a·(1+z)^b`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::{Family, Measure};
use crate::quad::QuadSpec;
use crate::sectors::principal_pow;
use crate::stable::AdmissiblePair;
use crate::transforms::{self, eta, RecoveryOptions};

// ---------------------------------------------------------------------------
// Scale mixtures
// ---------------------------------------------------------------------------

/// A scale mixture `μ ⊛ b_{α,ρ}`: mixing law on `(0, ∞)`, explicit mass at
/// zero, and the stable pair.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    mixing: Measure,
    zero_mass: f64,
    pair: AdmissiblePair,
}

impl MixtureSpec {
    pub fn new(mixing: Measure, zero_mass: f64, pair: AdmissiblePair) -> Result<Self> {
        if !mixing.is_nonnegative() {
            return Err(Error::domain("mixing measure must be supported on [0, ∞)"));
        }
        if mixing.zero_atom_mass() > 0.0 {
            return Err(Error::domain(
                "mixing atoms must be strictly positive; carry the mass at 0 in zero_mass",
            ));
        }
        if !(0.0..1.0).contains(&zero_mass) {
            return Err(Error::domain("zero_mass must lie in [0, 1)"));
        }
        Ok(MixtureSpec { mixing, zero_mass, pair })
    }

    pub fn mixing(&self) -> &Measure {
        &self.mixing
    }

    pub fn zero_mass(&self) -> f64 {
        self.zero_mass
    }

    pub fn pair(&self) -> AdmissiblePair {
        self.pair
    }

    /// The same mixture with the mixing law replaced by its `1/α`-th power
    /// (the parameterisation under which the transform formulas are stated).
    pub fn with_powered_mixing(&self) -> Result<MixtureSpec> {
        let p = 1.0 / self.pair.alpha();
        Ok(MixtureSpec {
            mixing: self.mixing.pushforward_power(p)?,
            zero_mass: self.zero_mass,
            pair: self.pair,
        })
    }

    /// The full mixing law `κδ₀ + (1−κ)μ` as a measure.
    pub fn full_mixing(&self) -> Measure {
        if self.zero_mass == 0.0 {
            self.mixing.clone()
        } else {
            Measure::Mix(vec![
                (self.zero_mass, Measure::dirac(0.0)),
                (1.0 - self.zero_mass, self.mixing.clone()),
            ])
        }
    }
}

/// Density of the absolutely continuous part of `μ ⊛ b_{α,ρ}` at `x ≠ 0`.
pub fn mixture_density(spec: &MixtureSpec, x: f64, q: &QuadSpec) -> Result<f64> {
    let (alpha, rho) = (spec.pair.alpha(), spec.pair.rho());
    if alpha > 1.0 {
        return Err(Error::unsupported("the mixture density formula needs α ≤ 1"));
    }
    if x == 0.0 {
        return Err(Error::domain("mixture density excludes x = 0"));
    }
    if alpha == 1.0 && (rho == 0.0 || rho == 1.0) {
        // b_{1,1} = δ₁ and b_{1,0} = δ₋₁: the mixture is μ itself (reflected)
        let d = spec.mixing.density(if rho == 1.0 { x } else { -x })?;
        return Ok((1.0 - spec.zero_mass) * d);
    }
    let theta = if x > 0.0 { PI * rho * alpha } else { PI * (1.0 - rho) * alpha };
    let (s, c) = theta.sin_cos();
    if s <= 0.0 {
        return Ok(0.0);
    }
    let ax = x.abs();
    let xa = ax.powf(alpha);
    let kernel = move |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let ta = t.powf(alpha);
        ta / (xa * xa + 2.0 * xa * ta * c + ta * ta)
    };
    // pure relative tolerance: the kernel integral decays like |x|^{-2α} in
    // the tails, far below any fixed absolute floor
    let inner = QuadSpec { abs_tol: 1e-280, ..*q };
    let integral = spec.mixing.integrate(&kernel, &inner)?;
    Ok((1.0 - spec.zero_mass) * s / PI * ax.powf(alpha - 1.0) * integral)
}

/// η-transform of `μ^{1/α} ⊛ b_{α,ρ}` via the substitution rule
/// `η_μ(−(e^{iρπ}z)^α)`.  The mixing law enters un-powered; the rule's
/// power convention is part of the formula.
pub fn mixture_eta(spec: &MixtureSpec, z: Complex64, q: &QuadSpec) -> Result<Complex64> {
    let w = mixture_eta_argument(spec.pair, z)?;
    eta(&spec.full_mixing(), w, q)
}

/// The substituted argument `−(e^{iρπ}z)^α`.
pub fn mixture_eta_argument(pair: AdmissiblePair, z: Complex64) -> Result<Complex64> {
    let (alpha, rho) = (pair.alpha(), pair.rho());
    let v = if rho == 1.0 {
        if z.im == 0.0 && z.re >= 0.0 {
            return Err(Error::domain("z must avoid the positive real axis"));
        }
        principal_pow(-z, alpha)?
    } else {
        if z.im >= 0.0 {
            return Err(Error::domain("z must lie in the lower half-plane"));
        }
        principal_pow(Complex64::from_polar(1.0, rho * PI) * z, alpha)?
    };
    Ok(-v)
}

/// Cauchy transform of `μ^{1/α} ⊛ b_{α,ρ}` on the upper half-plane:
/// `G(z) = −(1/z)(e^{−iρπ}z)^α · G_μ(−(e^{−iρπ}z)^α)`.
pub fn mixture_cauchy(spec: &MixtureSpec, z: Complex64, q: &QuadSpec) -> Result<Complex64> {
    if z.im <= 0.0 {
        if z.im < 0.0 {
            return Ok(mixture_cauchy(spec, z.conj(), q)?.conj());
        }
        return Err(Error::domain("the mixture Cauchy formula needs Im z ≠ 0"));
    }
    let (alpha, rho) = (spec.pair.alpha(), spec.pair.rho());
    let phase = Complex64::from_polar(1.0, -rho * PI);
    let v = principal_pow(phase * z, alpha)?;
    let g = transforms::cauchy(&spec.full_mixing(), -v, q)?;
    Ok(-(v / z) * g)
}

// ---------------------------------------------------------------------------
// Boolean additive convolution
// ---------------------------------------------------------------------------

/// Boolean convolution `m₁ ⊎ m₂` (η-addition).  Atomic operands are handled
/// exactly through the secular equation of `F₁ + F₂ − z`; everything else
/// goes through η-addition and Stieltjes recovery on the given grid.
pub fn boolean_convolve(
    m1: &Measure,
    m2: &Measure,
    q: &QuadSpec,
    opts: &RecoveryOptions,
) -> Result<Measure> {
    if let (Measure::Atomic(a1), Measure::Atomic(a2)) = (m1, m2) {
        return boolean_convolve_atomic(a1, a2);
    }
    let (m1c, m2c, qc) = (m1.clone(), m2.clone(), *q);
    let eta_sum =
        move |z: Complex64| -> Result<Complex64> { Ok(eta(&m1c, z, &qc)? + eta(&m2c, z, &qc)?) };
    transforms::recover_from_eta(&eta_sum, opts)
}

/// Boolean convolution power `m^{⊎t}`, `t ≥ 0` (η scaled by `t`).
pub fn boolean_power(m: &Measure, t: f64, q: &QuadSpec, opts: &RecoveryOptions) -> Result<Measure> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("Boolean power requires t ≥ 0"));
    }
    if t == 0.0 {
        return Ok(Measure::dirac(0.0));
    }
    if t == 1.0 {
        return Ok(m.clone());
    }
    if let Measure::Family(Family::BooleanStable { alpha, .. }) = m {
        // stability under ⊎: t·η_b is the η of the dilation by t^{1/α}
        return m.dilate(t.powf(1.0 / alpha));
    }
    if let Measure::Atomic(atoms) = m {
        return boolean_power_atomic(atoms, t);
    }
    let (mc, qc) = (m.clone(), *q);
    let eta_t = move |z: Complex64| -> Result<Complex64> { Ok(t * eta(&mc, z, &qc)?) };
    transforms::recover_from_eta(&eta_t, opts)
}

fn atomic_g(atoms: &[(f64, f64)], x: f64) -> f64 {
    atoms.iter().map(|&(a, w)| w / (x - a)).sum()
}

fn atomic_g_prime(atoms: &[(f64, f64)], x: f64) -> f64 {
    atoms.iter().map(|&(a, w)| -w / ((x - a) * (x - a))).sum()
}

/// Real zeros of the Cauchy transform of an atomic measure: one in each gap
/// between consecutive atoms (G decreases from +∞ to −∞ there).
fn atomic_g_zeros(atoms: &[(f64, f64)]) -> Vec<f64> {
    let mut zeros = Vec::new();
    for w in atoms.windows(2) {
        let (lo, hi) = (w[0].0, w[1].0);
        let mut a = lo + 1e-9 * (hi - lo);
        let mut b = hi - 1e-9 * (hi - lo);
        let mut k = 0;
        while atomic_g(atoms, a) <= 0.0 && k < 60 {
            a = lo + (a - lo) * 0.5;
            k += 1;
        }
        let mut k = 0;
        while atomic_g(atoms, b) >= 0.0 && k < 60 {
            b = hi - (hi - b) * 0.5;
            k += 1;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if atomic_g(atoms, m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        zeros.push(0.5 * (a + b));
    }
    zeros
}

/// Location/weight pairs at the roots of a strictly increasing secular
/// function `f` between its poles — the common core of the atomic Boolean
/// convolution and the atomic Boolean power (weights are `1/f'`).
fn secular_atoms(
    f: &dyn Fn(f64) -> f64,
    f_prime: &dyn Fn(f64) -> f64,
    poles: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut roots = Vec::with_capacity(poles.len() + 1);
    let span = if poles.is_empty() {
        1.0
    } else {
        (poles[poles.len() - 1] - poles[0]).abs().max(1.0)
    };
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    if poles.is_empty() {
        intervals.push((f64::NEG_INFINITY, f64::INFINITY));
    } else {
        intervals.push((f64::NEG_INFINITY, poles[0]));
        for w in poles.windows(2) {
            intervals.push((w[0], w[1]));
        }
        intervals.push((poles[poles.len() - 1], f64::INFINITY));
    }
    for (lo, hi) in intervals {
        // bracket: f → −∞ at the left end of the gap, +∞ at the right end
        let mut a;
        let mut b;
        if lo.is_finite() {
            a = lo + 1e-13 * (1.0 + lo.abs());
            let mut k = 0;
            while f(a) >= 0.0 && k < 200 {
                a = lo + (a - lo) * 0.5;
                k += 1;
            }
        } else {
            a = if hi.is_finite() { hi - span } else { -span };
            let mut k = 0;
            while f(a) >= 0.0 && k < 54 {
                a -= span * 2f64.powi(k);
                k += 1;
            }
        }
        if hi.is_finite() {
            b = hi - 1e-13 * (1.0 + hi.abs());
            let mut k = 0;
            while f(b) <= 0.0 && k < 200 {
                b = hi - (hi - b) * 0.5;
                k += 1;
            }
        } else {
            b = if lo.is_finite() { lo + span } else { span };
            let mut k = 0;
            while f(b) <= 0.0 && k < 54 {
                b += span * 2f64.powi(k);
                k += 1;
            }
        }
        if !(f(a) < 0.0 && f(b) > 0.0) {
            return Err(Error::numerical("secular bracket not found"));
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if f(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let x = 0.5 * (a + b);
        roots.push((x, 1.0 / f_prime(x)));
    }
    let total: f64 = roots.iter().map(|&(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::numerical(format!("secular weights sum to {total}, expected 1")));
    }
    Ok(roots.into_iter().map(|(x, w)| (x, w / total)).collect())
}

fn boolean_convolve_atomic(a1: &[(f64, f64)], a2: &[(f64, f64)]) -> Result<Measure> {
    // F_{μ⊎ν} = F_μ + F_ν − z; the result is atomic with atoms at the zeros
    // and weights 1/F'.
    let f = |x: f64| -> f64 {
        let g1 = atomic_g(a1, x);
        let g2 = atomic_g(a2, x);
        1.0 / g1 + 1.0 / g2 - x
    };
    let fp = |x: f64| -> f64 {
        let g1 = atomic_g(a1, x);
        let g2 = atomic_g(a2, x);
        -atomic_g_prime(a1, x) / (g1 * g1) - atomic_g_prime(a2, x) / (g2 * g2) - 1.0
    };
    let mut poles = atomic_g_zeros(a1);
    poles.extend(atomic_g_zeros(a2));
    poles.sort_by(|x, y| x.total_cmp(y));
    poles.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * (1.0 + x.abs()));
    Measure::atomic(secular_atoms(&f, &fp, &poles)?)
}

fn boolean_power_atomic(atoms: &[(f64, f64)], t: f64) -> Result<Measure> {
    // F_t(z) = (1−t)z + tF(z); the power's atoms are the zeros of F_t
    let f = |x: f64| -> f64 {
        let g = atomic_g(atoms, x);
        (1.0 - t) * x + t / g
    };
    let fp = |x: f64| -> f64 {
        let g = atomic_g(atoms, x);
        (1.0 - t) - t * atomic_g_prime(atoms, x) / (g * g)
    };
    let poles = atomic_g_zeros(atoms);
    Measure::atomic(secular_atoms(&f, &fp, &poles)?)
}

// ---------------------------------------------------------------------------
// Multiplicative monotone convolution
// ---------------------------------------------------------------------------

/// Probe the η-characterisation of a law on `[0, ∞)`: η maps ℂ⁻ into ℂ⁻
/// with `arg η(z) ∈ (−π, arg z]`.
pub fn probe_positive_eta(m: &Measure, q: &QuadSpec) -> Result<()> {
    for &r in &[0.01, 0.3, 1.0, 30.0] {
        for k in 1..=5 {
            let theta = -PI * (k as f64) / 6.0;
            let z = Complex64::from_polar(r, theta);
            let v = eta(m, z, q)?;
            if v.im > 1e-10 * (1.0 + v.norm()) {
                return Err(Error::domain(format!(
                    "η({z}) = {v} left the lower half-plane; not a law on [0, ∞)"
                )));
            }
            let arg = v.im.atan2(v.re);
            if v.im < 0.0 && arg > theta + 1e-9 {
                return Err(Error::domain(format!(
                    "arg η({z}) = {arg} exceeds arg z; not a law on [0, ∞)"
                )));
            }
        }
    }
    Ok(())
}

/// Multiplicative monotone convolution `m₁ ↻ m₂` via η-composition
/// `η_{m₁}∘η_{m₂}`, with `m₁` on `[0, ∞)` and `m₁ ≠ δ₀`.
pub fn monotone_mult_convolve(
    m1: &Measure,
    m2: &Measure,
    q: &QuadSpec,
    opts: &RecoveryOptions,
) -> Result<Measure> {
    if !m1.is_nonnegative() {
        return Err(Error::domain("the left operand of ↻ must be supported on [0, ∞)"));
    }
    if m1.zero_atom_mass() >= 1.0 - 1e-14 {
        return Err(Error::domain("the left operand of ↻ must differ from δ₀"));
    }
    probe_positive_eta(m1, q)?;
    let (m1c, m2c, qc) = (m1.clone(), m2.clone(), *q);
    let composed = move |z: Complex64| -> Result<Complex64> {
        let inner = eta(&m2c, z, &qc)?;
        eta(&m1c, inner, &qc)
    };
    transforms::recover_from_eta(&composed, opts)
}

// ---------------------------------------------------------------------------
// Catalog-level multiplicative free convolution
// ---------------------------------------------------------------------------

/// S-transform expression of the form `S(z) = c·(−z)^a·(1+z)^b` on `(−1,0)`.
/// The catalog families (Boolean/free stable with asymmetry 0, ½ or 1, free
/// Poisson powers, point masses, symmetrised square roots) all have
/// S-transforms of this shape, and the shape is closed under products,
/// powers, inversion and dilation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SExpr {
    pub c: Complex64,
    pub a: f64,
    pub b: f64,
}

impl SExpr {
    pub fn eval(&self, z: f64) -> Result<Complex64> {
        if !(-1.0 < z && z < 0.0) {
            return Err(Error::domain("S-expression evaluated on (−1, 0) only"));
        }
        Ok(self.c * (-z).powf(self.a) * (1.0 + z).powf(self.b))
    }

    pub fn product(&self, other: &SExpr) -> SExpr {
        SExpr { c: self.c * other.c, a: self.a + other.a, b: self.b + other.b }
    }

    pub fn power(&self, t: f64) -> Result<SExpr> {
        let c = if self.c.im.abs() < 1e-14 && self.c.re > 0.0 {
            Complex64::new(self.c.re.powf(t), 0.0)
        } else if t.fract() == 0.0 {
            self.c.powi(t as i32)
        } else {
            return Err(Error::unsupported(
                "non-integer ⊠-power of a family with a complex S-constant",
            ));
        };
        Ok(SExpr { c, a: t * self.a, b: t * self.b })
    }

    /// `S_{μ⁻¹}(z) = 1/S_μ(−z−1)` for zero-free laws on `(0, ∞)`.
    pub fn inverse(&self) -> SExpr {
        SExpr { c: self.c.inv(), a: -self.b, b: -self.a }
    }

    /// `S_{D_k μ} = S_μ / k`, `k > 0`.
    pub fn dilate(&self, k: f64) -> SExpr {
        SExpr { c: self.c / k, a: self.a, b: self.b }
    }
}

/// A measure described at the catalog level, closed under the operations the
/// S-transform algebra supports.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogMeasure {
    /// Point mass at `a > 0`.
    Dirac(f64),
    /// `b_{α,ρ}` with `ρ ∈ {0, 1/2, 1}`.
    BooleanStable(f64, f64),
    /// `f_{α,ρ}` with `ρ ∈ {0, 1/2, 1}`.
    FreeStable(f64, f64),
    /// Free Poisson power `MP^{⊠s}`.
    MpPower(f64),
    /// `sym(√f_{α,1})`.
    SymSqrtFreeStable(f64),
    /// Dilation by `k > 0`.
    Scaled(f64, Box<CatalogMeasure>),
    /// `⊠`-power.
    BoxPower(f64, Box<CatalogMeasure>),
    /// Pushforward under `x ↦ 1/x`.
    Inverse(Box<CatalogMeasure>),
}

impl CatalogMeasure {
    pub fn mp() -> Self {
        CatalogMeasure::MpPower(1.0)
    }

    /// The S-transform expression of this catalog measure.
    pub fn s_expr(&self) -> Result<SExpr> {
        match self {
            CatalogMeasure::Dirac(a) => {
                if *a <= 0.0 {
                    return Err(Error::domain("catalog point mass must sit at a > 0"));
                }
                Ok(SExpr { c: Complex64::new(1.0 / a, 0.0), a: 0.0, b: 0.0 })
            }
            CatalogMeasure::BooleanStable(alpha, rho) => {
                let pair = AdmissiblePair::new(*alpha, *rho)?;
                require_catalog_rho(*rho)?;
                let q = exponent_ratio(pair);
                Ok(SExpr { c: neg_e_minus_irho(*rho), a: q, b: -q })
            }
            CatalogMeasure::FreeStable(alpha, rho) => {
                let pair = AdmissiblePair::new(*alpha, *rho)?;
                require_catalog_rho(*rho)?;
                let q = exponent_ratio(pair);
                Ok(SExpr { c: neg_e_minus_irho(*rho), a: q, b: 0.0 })
            }
            CatalogMeasure::MpPower(s) => Ok(SExpr { c: Complex64::new(1.0, 0.0), a: 0.0, b: -s }),
            CatalogMeasure::SymSqrtFreeStable(alpha) => {
                if !(0.0 < *alpha && *alpha <= 1.0) {
                    return Err(Error::domain("sym(√f) needs α in (0, 1]"));
                }
                let q = (1.0 - alpha) / alpha;
                Ok(SExpr { c: Complex64::new(0.0, 1.0), a: (q - 1.0) / 2.0, b: 0.5 })
            }
            CatalogMeasure::Scaled(k, inner) => {
                if *k <= 0.0 {
                    return Err(Error::domain("catalog dilation factor must be positive"));
                }
                Ok(inner.s_expr()?.dilate(*k))
            }
            CatalogMeasure::BoxPower(t, inner) => inner.s_expr()?.power(*t),
            CatalogMeasure::Inverse(inner) => Ok(inner.s_expr()?.inverse()),
        }
    }
}

fn require_catalog_rho(rho: f64) -> Result<()> {
    if rho == 0.0 || rho == 0.5 || rho == 1.0 {
        Ok(())
    } else {
        Err(Error::unsupported("catalog S-transforms exist for asymmetry 0, 1/2, 1"))
    }
}

fn exponent_ratio(pair: AdmissiblePair) -> f64 {
    (1.0 - pair.alpha()) / pair.alpha()
}

fn neg_e_minus_irho(rho: f64) -> Complex64 {
    -Complex64::from_polar(1.0, -rho * PI)
}

/// Outcome of a catalog ⊠.
#[derive(Debug, Clone)]
pub enum FreeMultResult {
    /// The product is itself a catalog family.
    Catalog(CatalogMeasure),
    /// No catalog pattern matched; the S-expression is returned for
    /// verification-level use.
    Verifier(SExpr),
}

/// Multiplicative free convolution at the catalog level: multiply the
/// S-transforms and pattern-match the product back into the catalog.
pub fn free_mult_families(f1: &CatalogMeasure, f2: &CatalogMeasure) -> Result<FreeMultResult> {
    let s = f1.s_expr()?.product(&f2.s_expr()?);
    Ok(match recognize(&s) {
        Some(c) => FreeMultResult::Catalog(c),
        None => FreeMultResult::Verifier(s),
    })
}

/// Recognise an S-expression as a (possibly dilated) catalog family.
pub fn recognize(s: &SExpr) -> Option<CatalogMeasure> {
    const TOL: f64 = 1e-12;
    let k = 1.0 / s.c.norm();
    let unit = s.c * k;
    let psi = unit.im.atan2(unit.re);
    let wrap = |m: CatalogMeasure| -> Option<CatalogMeasure> {
        Some(if (k - 1.0).abs() < TOL { m } else { CatalogMeasure::Scaled(k, Box::new(m)) })
    };
    let rho_from_psi = |psi: f64| -> Option<f64> {
        // c = −e^{−iρπ} has argument π(1−ρ)
        let rho = 1.0 - psi / PI;
        [0.0, 0.5, 1.0].into_iter().find(|t| (rho - t).abs() < 1e-9)
    };
    if s.a.abs() < TOL && s.b.abs() < TOL && psi.abs() < 1e-9 {
        return wrap(CatalogMeasure::Dirac(1.0));
    }
    if (s.a + s.b).abs() < TOL && s.a.abs() > TOL {
        if let Some(rho) = rho_from_psi(psi) {
            let alpha = 1.0 / (1.0 + s.a);
            if AdmissiblePair::new(alpha, rho).is_ok() {
                return wrap(CatalogMeasure::BooleanStable(alpha, rho));
            }
        }
    }
    if s.b.abs() < TOL && s.a.abs() > TOL {
        if let Some(rho) = rho_from_psi(psi) {
            let alpha = 1.0 / (1.0 + s.a);
            if AdmissiblePair::new(alpha, rho).is_ok() {
                return wrap(CatalogMeasure::FreeStable(alpha, rho));
            }
        }
    }
    if s.a.abs() < TOL && psi.abs() < 1e-9 {
        return wrap(CatalogMeasure::MpPower(-s.b));
    }
    None
}

// ---------------------------------------------------------------------------
// Continuous Boolean convolution
// ---------------------------------------------------------------------------

/// A nonnegative finite measure `σ = Σ w_k δ_{α_k}` on `(0, 1]`, defining
/// the continuous Boolean convolution `b(σ)` through
/// `η(z) = −∫ (−z)^α σ(dα)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanSigma {
    atoms: Vec<(f64, f64)>,
}

impl BooleanSigma {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("σ must carry at least one atom"));
        }
        for &(a, w) in &atoms {
            if !(0.0 < a && a <= 1.0) {
                return Err(Error::domain("σ atoms must sit in (0, 1]"));
            }
            if w < 0.0 || !w.is_finite() {
                return Err(Error::domain("σ weights must be nonnegative"));
            }
        }
        Ok(BooleanSigma { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn max_alpha(&self) -> f64 {
        self.atoms.iter().map(|&(a, _)| a).fold(0.0, f64::max)
    }

    pub fn min_alpha(&self) -> f64 {
        self.atoms.iter().map(|&(a, _)| a).fold(1.0, f64::min)
    }

    /// The pushforward of σ under `α ↦ 2α` (used by the halving identity).
    pub fn doubled(&self) -> Result<BooleanSigma> {
        BooleanSigma::new(self.atoms.iter().map(|&(a, w)| (2.0 * a, w)).collect())
    }
}

/// η-transform of `b(σ)`: `−Σ w_k (−z)^{α_k}` on ℂ∖ℝ₊.
pub fn continuous_boolean_eta(sigma: &BooleanSigma, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::domain("η of b(σ) needs z off the positive real axis"));
    }
    let mut v = Complex64::new(0.0, 0.0);
    for &(a, w) in &sigma.atoms {
        v -= w * principal_pow(-z, a)?;
    }
    Ok(v)
}

/// Density of `b(σ)` on `(0, ∞)`: with `A(x) = Σ w sin(απ) x^{1−α}` and
/// `B(x) = Σ w cos(απ) x^{1−α}`, the density is `A/π / ((x+B)² + A²)`.
pub fn continuous_boolean_density(sigma: &BooleanSigma, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::domain("the density display of b(σ) covers x > 0"));
    }
    let mut a_sum = 0.0;
    let mut b_sum = 0.0;
    for &(a, w) in &sigma.atoms {
        let (s, c) = (a * PI).sin_cos();
        let xp = x.powf(1.0 - a);
        a_sum += w * s * xp;
        b_sum += w * c * xp;
    }
    Ok(a_sum / PI / ((x + b_sum) * (x + b_sum) + a_sum * a_sum))
}

/// `b(σ)` realised as a measure (grid recovery from the closed η).
pub fn continuous_boolean_measure(sigma: &BooleanSigma, opts: &RecoveryOptions) -> Result<Measure> {
    let sc = sigma.clone();
    let eta_fn = move |z: Complex64| continuous_boolean_eta(&sc, z);
    transforms::recover_from_eta(&eta_fn, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::boolean_eta;
    use approx::assert_relative_eq;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    fn pair(a: f64, r: f64) -> AdmissiblePair {
        AdmissiblePair::new(a, r).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!(
            (a - b).norm() <= tol * b.norm().max(1.0),
            "left {a}, right {b}, diff {}",
            (a - b).norm()
        );
    }

    #[test]
    fn mixture_density_of_point_mass_is_family_density() {
        let q = spec();
        let spec_m = MixtureSpec::new(Measure::dirac(1.0), 0.0, pair(0.6, 0.8)).unwrap();
        for &x in &[-2.0, -0.5, 0.3, 1.0, 4.0] {
            let got = mixture_density(&spec_m, x, &q).unwrap();
            let expect = crate::stable::boolean_density(pair(0.6, 0.8), x).unwrap();
            assert_relative_eq!(got, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn mixture_density_two_atoms_closed_value() {
        // mixing ½δ₁ + ½δ₄ with (α,ρ) = (1/2, 1) at x = 1: 0.45/π
        let q = spec();
        let mixing = Measure::atomic(vec![(1.0, 0.5), (4.0, 0.5)]).unwrap();
        let spec_m = MixtureSpec::new(mixing, 0.0, pair(0.5, 1.0)).unwrap();
        let got = mixture_density(&spec_m, 1.0, &q).unwrap();
        assert_relative_eq!(got, 0.45 / PI, max_relative = 1e-13);
    }

    #[test]
    fn mixture_mass_is_one_minus_zero_mass() {
        let q = QuadSpec::with_tols(1e-11, 1e-9);
        let mixing = Measure::family(Family::Pareto { r: 2.0 }).unwrap();
        let spec_m = MixtureSpec::new(mixing, 0.25, pair(0.6, 0.8)).unwrap();
        let mut mass = 0.0;
        for sign in [1.0f64, -1.0] {
            let d = |y: f64| mixture_density(&spec_m, sign * y, &q).unwrap_or(0.0);
            mass += crate::quad::integrate_power_zero(d, 1.0, -0.4, &q).unwrap();
            mass += crate::quad::integrate_power_tail(d, 1.0, -1.6, &q).unwrap();
        }
        assert_relative_eq!(mass, 0.75, max_relative = 1e-7);
    }

    #[test]
    fn mixture_eta_of_point_mass_is_boolean_eta() {
        let q = spec();
        let spec_m = MixtureSpec::new(Measure::dirac(1.0), 0.0, pair(0.5, 0.7)).unwrap();
        let z = c(-0.2, -0.9);
        let got = mixture_eta(&spec_m, z, &q).unwrap();
        let expect = boolean_eta(pair(0.5, 0.7), z).unwrap();
        assert_close(got, expect, 1e-13);
    }

    #[test]
    fn mixture_eta_of_boolean_mixing_contracts_index() {
        // mixing b_{β,1}: η_μ(−(e^{iρπ}z)^α) = η of b_{αβ,ρ}
        let q = spec();
        let mixing = Measure::boolean_stable(0.8, 1.0).unwrap();
        let spec_m = MixtureSpec::new(mixing, 0.0, pair(0.5, 0.6)).unwrap();
        let z = c(0.3, -1.1);
        let got = mixture_eta(&spec_m, z, &q).unwrap();
        let expect = boolean_eta(pair(0.4, 0.6), z).unwrap();
        assert_close(got, expect, 1e-12);
    }

    #[test]
    fn mixture_eta_matches_quadrature_route() {
        // closed substitution vs η from the mixture density by quadrature
        let q = QuadSpec::with_tols(1e-12, 1e-10);
        let mixing = Measure::atomic(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let spec_m = MixtureSpec::new(mixing, 0.0, pair(0.5, 0.5)).unwrap();
        let z = c(-1.0, -1.0);
        let closed = mixture_eta(&spec_m, z, &q).unwrap();

        let powered = spec_m.with_powered_mixing().unwrap();
        let dens = move |x: f64| mixture_density(&powered, x, &q).unwrap_or(0.0);
        let w = z.inv();
        let g = crate::measures::integrate_density_profile(
            &mut |x| dens(x) * (w - x).inv(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            crate::measures::Tails { at_zero: Some(-0.5), at_inf: Some(-1.5) },
            &q,
        )
        .unwrap();
        let numeric = 1.0 - z * g.inv();
        assert_close(numeric, closed, 1e-6);
    }

    #[test]
    fn mixture_cauchy_formula_consistent_with_eta() {
        let q = spec();
        let mixing = Measure::atomic(vec![(0.7, 0.4), (2.0, 0.6)]).unwrap();
        let spec_m = MixtureSpec::new(mixing, 0.0, pair(0.5, 1.0)).unwrap();
        let z = c(0.4, 1.3);
        let g = mixture_cauchy(&spec_m, z, &q).unwrap();
        let w = z.inv();
        let e = mixture_eta(&spec_m, w, &q).unwrap();
        let f = z * (1.0 - e);
        assert_close(g, f.inv(), 1e-12);
    }

    #[test]
    fn boolean_convolve_atoms_exactly() {
        let q = spec();
        let opts = RecoveryOptions::default();
        let d = boolean_convolve(&Measure::dirac(1.0), &Measure::dirac(2.0), &q, &opts).unwrap();
        match d {
            Measure::Atomic(a) => {
                assert_eq!(a.len(), 1);
                assert_relative_eq!(a[0].0, 3.0, max_relative = 1e-12);
            }
            _ => panic!("expected atoms"),
        }
        let m1 = Measure::atomic(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let m2 = Measure::atomic(vec![(0.5, 0.5), (2.0, 0.5)]).unwrap();
        let conv = boolean_convolve(&m1, &m2, &q, &opts).unwrap();
        match &conv {
            Measure::Atomic(a) => {
                assert_eq!(a.len(), 3);
                let mass: f64 = a.iter().map(|&(_, w)| w).sum();
                assert_relative_eq!(mass, 1.0, max_relative = 1e-12);
            }
            _ => panic!("expected atoms"),
        }
        let z = c(-0.3, -0.7);
        let lhs = eta(&conv, z, &q).unwrap();
        let rhs = eta(&m1, z, &q).unwrap() + eta(&m2, z, &q).unwrap();
        assert_close(lhs, rhs, 1e-11);
    }

    #[test]
    fn boolean_power_roundtrip_and_stability() {
        let q = spec();
        let opts = RecoveryOptions::default();
        let m = Measure::atomic(vec![(0.5, 0.3), (2.0, 0.7)]).unwrap();
        let p1 = boolean_power(&m, 1.0, &q, &opts).unwrap();
        let z = c(-0.2, -0.4);
        assert_close(eta(&p1, z, &q).unwrap(), eta(&m, z, &q).unwrap(), 1e-12);

        // Boolean stable stability: b^{⊎t} = D_{t^{1/α}} b
        let b = Measure::boolean_stable(0.6, 0.8).unwrap();
        let bt = boolean_power(&b, 2.5, &q, &opts).unwrap();
        let expect = b.dilate(2.5f64.powf(1.0 / 0.6)).unwrap();
        for &x in &[-1.0, 0.5, 3.0] {
            assert_relative_eq!(
                bt.density(x).unwrap(),
                expect.density(x).unwrap(),
                max_relative = 1e-12
            );
        }
        let zb = c(-0.4, -0.6);
        assert_close(eta(&bt, zb, &q).unwrap(), 2.5 * eta(&b, zb, &q).unwrap(), 1e-12);
    }

    #[test]
    fn boolean_power_atomic_two_point() {
        let q = spec();
        let opts = RecoveryOptions::default();
        let m = Measure::atomic(vec![(0.5, 0.5), (1.0, 0.5)]).unwrap();
        let p = boolean_power(&m, 0.5, &q, &opts).unwrap();
        let z = c(-0.8, -0.1);
        assert_close(eta(&p, z, &q).unwrap(), 0.5 * eta(&m, z, &q).unwrap(), 1e-11);
    }

    #[test]
    fn monotone_convolve_identity_element() {
        let q = spec();
        let opts = RecoveryOptions::default();
        // δ₁ ↻ m = m (η_{δ₁} = id)
        let m = Measure::atomic(vec![(1.0, 0.4), (3.0, 0.6)]).unwrap();
        let r = monotone_mult_convolve(&Measure::dirac(1.0), &m, &q, &opts).unwrap();
        let z = c(-0.5, -0.5);
        assert_close(eta(&r, z, &q).unwrap(), eta(&m, z, &q).unwrap(), 1e-6);
    }

    #[test]
    fn monotone_convolve_boolean_contraction() {
        // b_{β,1} ↻ b_{α,ρ} = b_{αβ,ρ}: the η-composition is exact branch
        // algebra, and the recovered measure matches the target density.
        let q = spec();
        let b1 = Measure::boolean_stable(0.8, 1.0).unwrap();
        let b2 = Measure::boolean_stable(0.5, 0.5).unwrap();
        let target = Measure::boolean_stable(0.4, 0.5).unwrap();
        for &z in &[c(-0.3, -0.4), c(0.5, -1.0), c(-2.0, -0.1)] {
            let inner = eta(&b2, z, &q).unwrap();
            let lhs = eta(&b1, inner, &q).unwrap();
            let rhs = eta(&target, z, &q).unwrap();
            assert_close(lhs, rhs, 1e-12);
        }
        let opts = RecoveryOptions { nodes_per_sign: 800, ..Default::default() };
        let r = monotone_mult_convolve(&b1, &b2, &q, &opts).unwrap();
        for &x in &[-1.5, -0.3, 0.4, 2.0] {
            let got = r.density(x).unwrap();
            let expect = target.density(x).unwrap();
            assert_relative_eq!(got, expect, max_relative = 4e-3);
        }
    }

    #[test]
    fn s_expr_catalog_identities() {
        // MP^{⊠(1−α)/α} ⊠ f_{α,1} = b_{α,1}
        for &alpha in &[0.3, 0.5, 0.75] {
            let s = (1.0 - alpha) / alpha;
            let left = free_mult_families(
                &CatalogMeasure::MpPower(s),
                &CatalogMeasure::FreeStable(alpha, 1.0),
            )
            .unwrap();
            match left {
                FreeMultResult::Catalog(CatalogMeasure::BooleanStable(a, r)) => {
                    assert_relative_eq!(a, alpha, max_relative = 1e-12);
                    assert_eq!(r, 1.0);
                }
                other => panic!("expected b_({alpha},1), got {other:?}"),
            }
        }
        // (b_{1/2,1})^{⊠t} = b_{1/(1+t),1}
        let b = CatalogMeasure::BooleanStable(0.5, 1.0);
        let pw = CatalogMeasure::BoxPower(3.0, Box::new(b));
        match recognize(&pw.s_expr().unwrap()) {
            Some(CatalogMeasure::BooleanStable(a, r)) => {
                assert_relative_eq!(a, 0.25, max_relative = 1e-12);
                assert_eq!(r, 1.0);
            }
            other => panic!("got {other:?}"),
        }
        // MP ⊠ MP⁻¹ = b_{1/2,1} with S-product −z/(1+z)
        let inv = CatalogMeasure::Inverse(Box::new(CatalogMeasure::mp()));
        let prod = free_mult_families(&CatalogMeasure::mp(), &inv).unwrap();
        match prod {
            FreeMultResult::Catalog(CatalogMeasure::BooleanStable(a, r)) => {
                assert_relative_eq!(a, 0.5, max_relative = 1e-12);
                assert_eq!(r, 1.0);
            }
            other => panic!("got {other:?}"),
        }
        // MP⁻¹ is the positive free stable law of index 1/2
        match recognize(&inv.s_expr().unwrap()) {
            Some(CatalogMeasure::FreeStable(a, r)) => {
                assert_relative_eq!(a, 0.5, max_relative = 1e-12);
                assert_eq!(r, 1.0);
            }
            other => panic!("got {other:?}"),
        }
    }

    #[test]
    fn s_expr_values_match_measure_level_s() {
        let q = spec();
        let mp = Measure::family(Family::MarchenkoPastur).unwrap();
        let cat = CatalogMeasure::mp().s_expr().unwrap();
        for &z in &[-0.8, -0.5, -0.2] {
            let numeric = transforms::s_transform(&mp, z, &q).unwrap();
            let closed = cat.eval(z).unwrap();
            assert_relative_eq!(numeric, closed.re, max_relative = 1e-9);
            assert!(closed.im.abs() < 1e-12);
        }
    }

    #[test]
    fn continuous_boolean_point_sigma_is_boolean_law() {
        let sigma = BooleanSigma::new(vec![(0.6, 1.0)]).unwrap();
        for &x in &[0.2, 1.0, 5.0] {
            let got = continuous_boolean_density(&sigma, x).unwrap();
            let expect = crate::stable::boolean_density(pair(0.6, 1.0), x).unwrap();
            assert_relative_eq!(got, expect, max_relative = 1e-13);
        }
        let z = c(-0.5, -0.5);
        let got = continuous_boolean_eta(&sigma, z).unwrap();
        let expect = boolean_eta(pair(0.6, 1.0), z).unwrap();
        assert_close(got, expect, 1e-14);
    }

    #[test]
    fn continuous_boolean_halving_identity_eta() {
        // b(σ) = b(D₂σ)² ⊛ b_{1/2,1} at the η level, branches evaluated
        // stepwise exactly as the composition reads
        let sigma = BooleanSigma::new(vec![(0.2, 0.4), (0.35, 0.3), (0.5, 0.3)]).unwrap();
        let doubled = sigma.doubled().unwrap();
        for &z in &[c(-0.4, -0.3), c(1.2, -2.0), c(-3.0, 0.0)] {
            let lhs = continuous_boolean_eta(&sigma, z).unwrap();
            let inner = mixture_eta_argument(pair(0.5, 1.0), z).unwrap();
            let rhs = continuous_boolean_eta(&doubled, inner).unwrap();
            assert_close(rhs, lhs, 1e-13);
        }
    }

    #[test]
    fn continuous_boolean_mass_one() {
        let sigma = BooleanSigma::new(vec![(0.3, 0.5), (0.9, 1.1)]).unwrap();
        let q = QuadSpec::with_tols(1e-11, 1e-9);
        let d = |x: f64| continuous_boolean_density(&sigma, x).unwrap();
        let mass = crate::quad::integrate_power_zero(d, 1.0, 0.3 - 1.0, &q).unwrap()
            + crate::quad::integrate_power_tail(d, 1.0, -0.3 - 1.0, &q).unwrap();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-7);
    }

    #[test]
    fn continuous_boolean_binomial_sigma_is_monotone_mixture() {
        // σ = Σ C(n,k) δ_{kα/n} gives the mixture (m_{1/n,1})^{1/α} ⊛ b_{α,1}
        let n = 3usize;
        let alpha = 0.6;
        let binom = [3.0, 3.0, 1.0]; // C(3,1), C(3,2), C(3,3)
        let mut atoms = Vec::new();
        for k in 1..=n {
            atoms.push((alpha * (k as f64) / (n as f64), binom[k - 1]));
        }
        let sigma = BooleanSigma::new(atoms).unwrap();
        let pair_m = pair(1.0 / n as f64, 1.0);
        for &z in &[c(-0.5, -0.4), c(0.3, -1.5)] {
            let lhs = continuous_boolean_eta(&sigma, z).unwrap();
            let w = mixture_eta_argument(pair(alpha, 1.0), z).unwrap();
            let rhs = transforms::monotone_eta(pair_m, w).unwrap();
            assert_close(lhs, rhs, 1e-12);
        }
    }
}
