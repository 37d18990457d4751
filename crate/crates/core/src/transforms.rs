//! The transform stack: Cauchy `G`, reciprocal `F`, Boolean cumulant `η`
//! and its real inverse, `Σ` and `S`, the Voiculescu transform `φ`, the
//! classical stable cumulant, and measure recovery from `η`.
//!
//! Conventions (measures `μ`, `z` complex):
//!
//! ```text
//!   G(z)   = ∫ dμ(x)/(z−x)                    ℂ∖ℝ, plus real points off the support
//!   F(z)   = 1/G(z)
//!   η(z)   = 1 − z·F(1/z)                     ℂ⁻, extended to ℂ∖ℝ₊ for μ on [0,∞)
//!   Σ(w)   = η⁻¹(w)/w                         w ∈ (1 − 1/μ({0}), 0)
//!   S(w)   = Σ(w/(1+w))                       w ∈ (−1 + μ({0}), 0)
//!   φ(z)   = F⁻¹(z) − z                       computed by damped Newton on F
//!   C*(z)  = −(e^{iρπ} z)^α                   the strictly stable classical cumulant
//! ```
//!
//! Every kernel satisfies the conjugate symmetry `T(z̄) = conj T(z)`; closed
//! forms are evaluated on the half-plane where their branch bookkeeping is
//! straightforward and reflected elsewhere.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::{
    stieltjes_density_lenient, Family, GridDensity, HalfGrid, Measure, TransformKind,
};
use crate::quad::QuadSpec;
use crate::sectors::{arg_in, principal_pow, principal_pow_closed, sector_pow, sector_pow_closed, Sector};
use crate::stable::AdmissiblePair;

/// Which transform of a closed-form family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformReq {
    CauchyG,
    FTrans,
    Eta,
    Sigma,
    STrans,
    VoiculescuPhi,
    ClassicalCumulant,
    FreeCumulant,
}

// ---------------------------------------------------------------------------
// Closed family transforms
// ---------------------------------------------------------------------------

fn exponent_ratio(alpha: f64) -> f64 {
    (1.0 - alpha) / alpha
}

fn check_sigma_domain(z: Complex64) -> Result<f64> {
    if z.im != 0.0 || z.re >= 0.0 {
        return Err(Error::domain("Σ is evaluated on the real interval (-∞, 0)"));
    }
    Ok(z.re)
}

fn check_s_domain(z: Complex64) -> Result<f64> {
    if z.im != 0.0 || z.re >= 0.0 || z.re <= -1.0 {
        return Err(Error::domain("S is evaluated on the real interval (-1, 0)"));
    }
    Ok(z.re)
}

fn rho_phase(rho: f64) -> Complex64 {
    Complex64::from_polar(1.0, rho * PI)
}

fn neg_conj_phase(rho: f64) -> Complex64 {
    // −e^{−iρπ}
    -Complex64::from_polar(1.0, -rho * PI)
}

fn require_symmetric_rho(rho: f64, what: &str) -> Result<()> {
    if rho == 0.0 || rho == 0.5 || rho == 1.0 {
        Ok(())
    } else {
        Err(Error::unsupported(format!(
            "{what} is available only for asymmetry 0, 1/2 or 1 (got {rho})"
        )))
    }
}

/// Boolean stable η, valid on ℂ⁻ and, for ρ = 1, on all of ℂ∖ℝ₊.
pub fn boolean_eta(pair: AdmissiblePair, z: Complex64) -> Result<Complex64> {
    let (alpha, rho) = (pair.alpha(), pair.rho());
    if rho == 1.0 {
        // −(−z)^α with the cut on ℝ₊
        return Ok(-principal_pow_closed(-z, alpha)?);
    }
    if z.im >= 0.0 {
        return Err(Error::domain("η of a non-positive law needs z in the lower half-plane"));
    }
    Ok(-principal_pow_closed(rho_phase(rho) * z, alpha)?)
}

/// Monotone stable η: `1 − ((e^{iρπ}z)^α + 1)^{1/α}`.
pub fn monotone_eta(pair: AdmissiblePair, z: Complex64) -> Result<Complex64> {
    let (alpha, rho) = (pair.alpha(), pair.rho());
    let w = if rho == 1.0 {
        if z.im == 0.0 && z.re >= 0.0 {
            return Err(Error::domain("η needs z off the positive real axis"));
        }
        // (e^{iπ}z)^α = (−z)^α with the cut along ℝ₊
        principal_pow_closed(-z, alpha)?
    } else {
        if z.im >= 0.0 {
            return Err(Error::domain("η of a non-positive law needs z in ℂ⁻"));
        }
        principal_pow_closed(rho_phase(rho) * z, alpha)?
    };
    let t = w + 1.0;
    Ok(1.0 - pow_tracking_branch(t, 1.0 / alpha)?)
}

/// Power of `t` with the argument continued from the principal range; for
/// `t` off the negative reals this is the principal power, otherwise the
/// upper-boundary value.
fn pow_tracking_branch(t: Complex64, p: f64) -> Result<Complex64> {
    if t.im == 0.0 && t.re <= 0.0 {
        if t.re == 0.0 {
            return Err(Error::numerical("branch point hit"));
        }
        return Ok(Complex64::from_polar((-t.re).powf(p), p * PI));
    }
    principal_pow(t, p)
}

/// Free stable Voiculescu transform: `φ(z) = −e^{iαρπ} z^{1−α}`, which for
/// the positive law (ρ = 1) reads `(−z)^{1−α}` with the cut along ℝ₊.
pub fn free_phi(pair: AdmissiblePair, z: Complex64) -> Result<Complex64> {
    let (alpha, rho) = (pair.alpha(), pair.rho());
    if rho == 1.0 {
        return principal_pow_closed(-z, 1.0 - alpha);
    }
    if z.im > 0.0 {
        Ok(-Complex64::from_polar(1.0, alpha * rho * PI) * principal_pow_closed(z, 1.0 - alpha)?)
    } else if z.im < 0.0 {
        Ok(free_phi(pair, z.conj())?.conj())
    } else {
        Err(Error::domain("φ of a two-sided law needs Im z ≠ 0"))
    }
}

/// `F⁻¹(w) = w + φ(w)` of the free stable law.
fn free_f_inverse(pair: AdmissiblePair, w: Complex64) -> Result<Complex64> {
    Ok(w + free_phi(pair, w)?)
}

/// Cauchy transform of the free stable law by damped Newton on the closed
/// `F⁻¹`, continued inward along the ray through `z`.
pub fn free_cauchy(pair: AdmissiblePair, z: Complex64) -> Result<Complex64> {
    if z.im < 0.0 {
        return Ok(free_cauchy(pair, z.conj())?.conj());
    }
    if z.im == 0.0 && (pair.rho() != 1.0 || z.re >= 0.0) {
        return Err(Error::domain("free stable Cauchy transform needs Im z ≠ 0 here"));
    }
    let psi = |w: Complex64| free_f_inverse(pair, w);
    let mut scale = 16.0f64.max(2.0 / z.norm());
    let mut w = z * scale;
    loop {
        let target = z * scale;
        w = newton_solve(&psi, target, if scale >= 16.0 { target } else { w }, 60)?;
        if scale <= 1.0 {
            break;
        }
        scale = (scale * 0.8).max(1.0);
    }
    Ok(w.inv())
}

fn mp_cauchy(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && (0.0..=4.0).contains(&z.re) {
        return Err(Error::domain("z on the support of the free Poisson law"));
    }
    Ok((1.0 - (1.0 - 4.0 / z).sqrt()) / 2.0)
}

fn monotone_f(pair: AdmissiblePair, z: Complex64) -> Result<Complex64> {
    let (alpha, rho) = (pair.alpha(), pair.rho());
    if z.im < 0.0 {
        return Ok(monotone_f(pair, z.conj())?.conj());
    }
    let za = if z.im == 0.0 {
        if z.re >= 0.0 {
            return Err(Error::domain("F of the monotone stable law needs Im z > 0 or z < 0"));
        }
        if rho != 1.0 {
            return Err(Error::domain("real negative arguments only for the positive law"));
        }
        principal_pow(-z, alpha)? * Complex64::from_polar(1.0, alpha * PI)
    } else {
        principal_pow(z, alpha)?
    };
    let t = za + Complex64::from_polar(1.0, rho * alpha * PI);
    if t.im.abs() <= 1e-15 * t.norm() && t.re > 0.0 {
        // on the sector boundary; F is real positive there
        return Ok(Complex64::new(t.re.powf(1.0 / alpha), 0.0));
    }
    sector_pow(t, 1.0 / alpha, Sector::cut_positive_axis())
}

/// Closed-form transform of a density family, when the combination exists.
pub fn family_transform(fam: &Family, kind: TransformReq, z: Complex64) -> Result<Complex64> {
    match (*fam, kind) {
        (Family::BooleanStable { alpha, rho }, TransformReq::Eta) => {
            boolean_eta(AdmissiblePair::new(alpha, rho)?, z)
        }
        (Family::BooleanStable { alpha, rho }, TransformReq::FTrans) => {
            let pair = AdmissiblePair::new(alpha, rho)?;
            if z.im < 0.0 {
                return Ok(family_transform(fam, kind, z.conj())?.conj());
            }
            let eta = boolean_eta(pair, z.inv())?;
            Ok(z * (1.0 - eta))
        }
        (Family::BooleanStable { .. }, TransformReq::CauchyG) => {
            Ok(family_transform(fam, TransformReq::FTrans, z)?.inv())
        }
        (Family::BooleanStable { alpha, rho }, TransformReq::Sigma) => {
            require_symmetric_rho(rho, "Σ of the Boolean stable law")?;
            let x = check_sigma_domain(z)?;
            Ok(neg_conj_phase(rho) * (-x).powf(exponent_ratio(alpha)))
        }
        (Family::BooleanStable { alpha, rho }, TransformReq::STrans) => {
            require_symmetric_rho(rho, "S of the Boolean stable law")?;
            let x = check_s_domain(z)?;
            Ok(neg_conj_phase(rho) * (-x / (1.0 + x)).powf(exponent_ratio(alpha)))
        }
        (Family::Cauchy { rho }, TransformReq::CauchyG) => {
            let pole = -rho_phase(rho);
            if (z - pole).norm() < 1e-14 {
                return Err(Error::domain("z at the pole of the Cauchy transform"));
            }
            Ok((z + rho_phase(rho)).inv())
        }
        (Family::Cauchy { rho }, TransformReq::FTrans) => Ok(z + rho_phase(rho)),
        (Family::Cauchy { rho }, TransformReq::Eta) => {
            if z.im >= 0.0 {
                return Err(Error::domain("η of the Cauchy family needs z in ℂ⁻"));
            }
            Ok(-rho_phase(rho) * z)
        }
        (Family::MarchenkoPastur, TransformReq::CauchyG) => mp_cauchy(z),
        (Family::MarchenkoPastur, TransformReq::FTrans) => Ok(mp_cauchy(z)?.inv()),
        (Family::MarchenkoPastur, TransformReq::Eta) => {
            // inverse of w(1−w), the branch vanishing at 0
            Ok((1.0 - (1.0 - 4.0 * z).sqrt()) / 2.0)
        }
        (Family::MarchenkoPastur, TransformReq::Sigma) => {
            let x = check_sigma_domain(z)?;
            Ok(Complex64::new(1.0 - x, 0.0))
        }
        (Family::MarchenkoPastur, TransformReq::STrans) => {
            let x = check_s_domain(z)?;
            Ok(Complex64::new(1.0 / (1.0 + x), 0.0))
        }
        (Family::MarchenkoPastur, TransformReq::FreeCumulant) => Ok(z / (1.0 - z)),
        (Family::FreeStable { alpha, rho }, TransformReq::FreeCumulant) => {
            if z.im >= 0.0 {
                return Err(Error::domain("free cumulant transform needs z in ℂ⁻"));
            }
            Ok(-principal_pow(rho_phase(rho) * z, alpha)?)
        }
        (Family::FreeStable { alpha, rho }, TransformReq::VoiculescuPhi) => {
            free_phi(AdmissiblePair::new(alpha, rho)?, z)
        }
        (Family::FreeStable { alpha, rho }, TransformReq::CauchyG) => {
            free_cauchy(AdmissiblePair::new(alpha, rho)?, z)
        }
        (Family::FreeStable { alpha, rho }, TransformReq::FTrans) => {
            Ok(free_cauchy(AdmissiblePair::new(alpha, rho)?, z)?.inv())
        }
        (Family::FreeStable { alpha, rho }, TransformReq::Eta) => {
            let g = free_cauchy(AdmissiblePair::new(alpha, rho)?, z.inv())?;
            Ok(1.0 - z * g.inv())
        }
        (Family::FreeStable { alpha, rho }, TransformReq::Sigma) => {
            require_symmetric_rho(rho, "Σ of the free stable law")?;
            let x = check_sigma_domain(z)?;
            Ok(neg_conj_phase(rho) * (-x / (1.0 - x)).powf(exponent_ratio(alpha)))
        }
        (Family::FreeStable { alpha, rho }, TransformReq::STrans) => {
            require_symmetric_rho(rho, "S of the free stable law")?;
            let x = check_s_domain(z)?;
            Ok(neg_conj_phase(rho) * (-x).powf(exponent_ratio(alpha)))
        }
        (Family::MonotoneStable { alpha, rho }, TransformReq::FTrans) => {
            monotone_f(AdmissiblePair::new(alpha, rho)?, z)
        }
        (Family::MonotoneStable { alpha, rho }, TransformReq::CauchyG) => {
            Ok(monotone_f(AdmissiblePair::new(alpha, rho)?, z)?.inv())
        }
        (Family::MonotoneStable { alpha, rho }, TransformReq::Eta) => {
            monotone_eta(AdmissiblePair::new(alpha, rho)?, z)
        }
        (Family::MonotoneStable { alpha, rho }, TransformReq::Sigma) => {
            require_symmetric_rho(rho, "Σ of the monotone stable law")?;
            let x = check_sigma_domain(z)?;
            let num = ((1.0 - x).powf(alpha) - 1.0).powf(1.0 / alpha);
            Ok(neg_conj_phase(rho) * (num / (-x)))
        }
        _ => Err(Error::unsupported(format!("no closed {kind:?} transform for {fam:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Measure-level transforms
// ---------------------------------------------------------------------------

fn atomic_cauchy(atoms: &[(f64, f64)], z: Complex64) -> Result<Complex64> {
    let mut g = Complex64::new(0.0, 0.0);
    for &(x, w) in atoms {
        let d = z - x;
        if d.norm() < 1e-300 {
            return Err(Error::domain("Cauchy transform evaluated at an atom"));
        }
        g += w * d.inv();
    }
    Ok(g)
}

/// Cauchy transform `G_μ(z)`, closed form where available, quadrature
/// otherwise.  `z` must avoid the support.
pub fn cauchy(m: &Measure, z: Complex64, spec: &QuadSpec) -> Result<Complex64> {
    match m {
        Measure::Atomic(atoms) => atomic_cauchy(atoms, z),
        Measure::Family(fam) => match family_transform(fam, TransformReq::CauchyG, z) {
            Ok(v) => Ok(v),
            Err(Error::Unsupported(_)) => cauchy_quad(m, z, spec),
            Err(e) => Err(e),
        },
        Measure::Scaled { a, inner } => Ok(cauchy(inner, z / *a, spec)? / *a),
        Measure::Mix(parts) => {
            let mut g = Complex64::new(0.0, 0.0);
            for (w, part) in parts {
                g += *w * cauchy(part, z, spec)?;
            }
            Ok(g)
        }
        Measure::Transform { kind, eval } => match kind {
            TransformKind::CauchyG => eval(z),
            TransformKind::Eta => {
                // F(z) = z(1 − η(1/z))
                let e = eval(z.inv())?;
                Ok((z * (1.0 - e)).inv())
            }
        },
        _ => cauchy_quad(m, z, spec),
    }
}

/// Cauchy transform forced through density/atom quadrature; this is the
/// independent numeric route used to cross-check the closed forms.
pub fn cauchy_quad(m: &Measure, z: Complex64, spec: &QuadSpec) -> Result<Complex64> {
    if let Measure::Atomic(atoms) = m {
        return atomic_cauchy(atoms, z);
    }
    if z.im == 0.0 {
        let (lo, hi) = m.support();
        if z.re >= lo && z.re <= hi {
            return Err(Error::domain("real z inside the support hull"));
        }
    }
    m.integrate_complex(&|x| (z - x).inv(), spec)
}

/// Reciprocal Cauchy transform `F = 1/G`.
pub fn f_transform(m: &Measure, z: Complex64, spec: &QuadSpec) -> Result<Complex64> {
    let g = cauchy(m, z, spec)?;
    if g.norm() < 1e-300 {
        return Err(Error::numerical("G vanished; F undefined here"));
    }
    Ok(g.inv())
}

fn eta_domain_check(m: &Measure, z: Complex64) -> Result<()> {
    if z.im < 0.0 {
        return Ok(());
    }
    if m.is_nonnegative() && !(z.im == 0.0 && z.re >= 0.0) {
        return Ok(());
    }
    Err(Error::domain(
        "η is defined on the lower half-plane (on ℂ∖ℝ₊ for measures on [0,∞))",
    ))
}

/// Boolean cumulant transform `η(z) = 1 − z F(1/z)`.
pub fn eta(m: &Measure, z: Complex64, spec: &QuadSpec) -> Result<Complex64> {
    eta_domain_check(m, z)?;
    if let Measure::Family(fam) = m {
        if let Ok(v) = family_transform(fam, TransformReq::Eta, z) {
            return Ok(v);
        }
    }
    eta_from_cauchy(m, z, spec, false)
}

/// η computed from the density/atom quadrature route only.
pub fn eta_quad(m: &Measure, z: Complex64, spec: &QuadSpec) -> Result<Complex64> {
    eta_domain_check(m, z)?;
    eta_from_cauchy(m, z, spec, true)
}

fn eta_from_cauchy(
    m: &Measure,
    z: Complex64,
    spec: &QuadSpec,
    force_quad: bool,
) -> Result<Complex64> {
    let w = z.inv();
    let g = if force_quad { cauchy_quad(m, w, spec)? } else { cauchy(m, w, spec)? };
    if g.norm() < 1e-300 {
        return Err(Error::numerical("G vanished inside η evaluation"));
    }
    Ok(1.0 - z * g.inv())
}

/// Compositional inverse of η on the negative reals, for measures on
/// `[0, ∞)`.  η is strictly increasing from `1 − 1/μ({0})` to 0 there.
pub fn eta_inverse(m: &Measure, w: f64, spec: &QuadSpec) -> Result<f64> {
    if !m.is_nonnegative() {
        return Err(Error::domain("η-inversion is defined for measures on [0, ∞)"));
    }
    let kappa = m.zero_atom_mass();
    if (kappa - 1.0).abs() < 1e-14 {
        return Err(Error::domain("η-inversion undefined for the point mass at 0"));
    }
    let lower = if kappa == 0.0 { f64::NEG_INFINITY } else { 1.0 - 1.0 / kappa };
    if !(w < 0.0 && w > lower) {
        return Err(Error::domain(format!("η-inversion needs w in ({lower}, 0), got {w}")));
    }
    let eval = |z: f64| -> Result<f64> {
        let v = eta(m, Complex64::new(z, 0.0), spec)?;
        if v.im.abs() > 1e-8 * (1.0 + v.re.abs()) {
            return Err(Error::numerical("η not real on the negative axis"));
        }
        Ok(v.re)
    };
    // bracket: η(z) → 0− as z → 0−, decreases towards `lower` as z → −∞
    let mut z_hi = -1e-300;
    let mut z_lo = -1.0;
    let mut prev = eval(z_lo)?;
    let mut guard = 0;
    while prev > w {
        z_hi = z_lo;
        z_lo *= 8.0;
        let v = eval(z_lo)?;
        if v >= prev {
            return Err(Error::numerical(
                "η is not monotone along the negative axis; inversion aborted",
            ));
        }
        prev = v;
        guard += 1;
        if guard > 200 {
            return Err(Error::domain(format!("no bracket found for η⁻¹({w})")));
        }
    }
    for _ in 0..220 {
        let mid = 0.5 * (z_lo + z_hi);
        if mid == z_lo || mid == z_hi {
            break;
        }
        if eval(mid)? > w {
            z_hi = mid;
        } else {
            z_lo = mid;
        }
        if (z_hi - z_lo).abs() <= 1e-15 * z_lo.abs() {
            break;
        }
    }
    Ok(0.5 * (z_lo + z_hi))
}

/// `Σ(w) = η⁻¹(w)/w` computed numerically for measures on `[0, ∞)`.
pub fn sigma(m: &Measure, w: f64, spec: &QuadSpec) -> Result<f64> {
    Ok(eta_inverse(m, w, spec)? / w)
}

/// `S(w) = Σ(w/(1+w))` on `(−1 + μ({0}), 0)`.
pub fn s_transform(m: &Measure, w: f64, spec: &QuadSpec) -> Result<f64> {
    if !(w > -1.0 + m.zero_atom_mass() && w < 0.0) {
        return Err(Error::domain("S is evaluated on (−1 + μ({0}), 0)"));
    }
    sigma(m, w / (1.0 + w), spec)
}

// ---------------------------------------------------------------------------
// Voiculescu transform by Newton continuation
// ---------------------------------------------------------------------------

fn newton_solve(
    f: &dyn Fn(Complex64) -> Result<Complex64>,
    target: Complex64,
    start: Complex64,
    max_iter: usize,
) -> Result<Complex64> {
    let scale = target.norm().max(1.0);
    let mut w = start;
    let mut fw = f(w)?;
    let mut resid = (fw - target).norm();
    for _ in 0..max_iter {
        if resid <= 1e-13 * scale {
            return Ok(w);
        }
        // complex central difference for f'
        let h = 1e-7 * w.norm().max(1e-3);
        let d = (f(w + Complex64::new(h, 0.0))? - f(w - Complex64::new(h, 0.0))?)
            / Complex64::new(2.0 * h, 0.0);
        if d.norm() < 1e-300 {
            break;
        }
        let mut step = -(fw - target) / d;
        let mut tries = 0;
        loop {
            let cand = w + step;
            match f(cand) {
                Ok(fc) => {
                    let r = (fc - target).norm();
                    if r < resid || tries >= 40 {
                        w = cand;
                        fw = fc;
                        resid = r;
                        break;
                    }
                }
                Err(_) if tries < 40 => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
            tries += 1;
        }
    }
    if resid <= 1e-9 * scale {
        Ok(w)
    } else {
        Err(Error::numerical(format!(
            "Newton inversion stalled at residual {resid:.3e} (target {target})"
        )))
    }
}

/// Result of a Voiculescu-transform evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PhiValue {
    pub phi: Complex64,
    /// number of ray-continuation steps that were needed (0 when the Newton
    /// iteration converged directly from w = z)
    pub continuation_steps: usize,
}

/// `φ(z) = F⁻¹(z) − z`, defined by analytic continuation of the inverse
/// from far out: Newton starts at a large multiple of `z` (where `w ≈ z`
/// is in the univalence cone) and walks inward along the ray through `z`
/// with step factor 0.9, warm-starting each solve.  The ray continuation
/// makes the value canonical — two nearby probe points disagree only when
/// a branch cut of `F⁻¹` separates their rays.
pub fn voiculescu_phi(m: &Measure, z: Complex64, spec: &QuadSpec) -> Result<PhiValue> {
    if z.im <= 0.0 {
        return Err(Error::domain("φ is evaluated in the upper half-plane"));
    }
    if let Measure::Family(fam) = m {
        if let Ok(v) = family_transform(fam, TransformReq::VoiculescuPhi, z) {
            return Ok(PhiValue { phi: v, continuation_steps: 0 });
        }
    }
    let f = |w: Complex64| f_transform(m, w, spec);
    ray_continued_inverse(&f, z)
}

/// Shared ray-continuation driver for `F⁻¹`.
fn ray_continued_inverse(
    f: &dyn Fn(Complex64) -> Result<Complex64>,
    z: Complex64,
) -> Result<PhiValue> {
    let dir = z / z.norm();
    let r_far = 64.0f64.max(8.0 * z.norm());
    let mut r = r_far;
    let mut w = r * dir;
    let mut steps = 0usize;
    loop {
        let target = r * dir;
        w = newton_solve(f, target, w, 60)?;
        steps += 1;
        if r <= z.norm() {
            break;
        }
        r = (r * 0.9).max(z.norm());
        if steps > 600 {
            return Err(Error::numerical("ray continuation did not reach the target"));
        }
    }
    Ok(PhiValue { phi: w - z, continuation_steps: steps })
}

/// Reciprocal Cauchy transform of the Boolean stable law continued through
/// one side of the real axis: `F(w) = w + e^{iαρπ} w^{1−α}` with the power
/// cut along ℝ₋ (continuation across the positive axis) or along ℝ₊
/// (continuation across the negative axis).
pub fn boolean_f_continued(
    pair: AdmissiblePair,
    w: Complex64,
    across_negative_axis: bool,
) -> Result<Complex64> {
    let (alpha, rho) = (pair.alpha(), pair.rho());
    let phase = Complex64::from_polar(1.0, alpha * rho * PI);
    let pw = if across_negative_axis {
        sector_pow_closed(w, 1.0 - alpha, Sector::cut_positive_axis())?
    } else {
        principal_pow_closed(w, 1.0 - alpha)?
    };
    Ok(w + phase * pw)
}

/// Voiculescu transform of the Boolean stable law by Newton on the
/// analytically continued `F`, with ray continuation from far out.  The
/// continuation side is the part of the support the ray's preimage can
/// cross: everything goes through ℝ₊ for the positive law (ρ = 1) and
/// through ℝ₋ for the negative one (ρ = 0); for two-sided laws the rays in
/// the right half of ℂ⁺ cross the positive axis and those in the left half
/// the negative axis.
pub fn boolean_phi_continued(pair: AdmissiblePair, z: Complex64) -> Result<PhiValue> {
    if z.im <= 0.0 {
        return Err(Error::domain("φ is evaluated in the upper half-plane"));
    }
    let across_negative = match pair.rho() {
        r if r == 1.0 => false,
        r if r == 0.0 => true,
        _ => z.re < 0.0,
    };
    let f = move |w: Complex64| boolean_f_continued(pair, w, across_negative);
    ray_continued_inverse(&f, z)
}

/// Classical cumulant of the strictly stable law: `−(e^{iρπ}z)^α` on the
/// negative imaginary axis.
pub fn classical_stable_cumulant(pair: AdmissiblePair, z: Complex64) -> Result<Complex64> {
    if !(z.im < 0.0 && z.re.abs() <= 1e-12 * z.norm().max(1.0)) {
        return Err(Error::domain("the stable cumulant is evaluated on i(−∞, 0)"));
    }
    Ok(-principal_pow(rho_phase(pair.rho()) * z, pair.alpha())?)
}

// ---------------------------------------------------------------------------
// Recovery of a measure from its η-transform
// ---------------------------------------------------------------------------

/// Options for [`recover_from_eta`].
#[derive(Debug, Clone)]
pub struct RecoveryOptions {
    pub nodes_per_sign: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// skip the η-characterisation probe (for trusted internal calls)
    pub skip_probe: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions { nodes_per_sign: 400, x_min: 1e-6, x_max: 1e6, skip_probe: false }
    }
}

/// Check the analytic characterisation of η-transforms of probability
/// measures on a probe grid: η maps ℂ⁻ off ℝ₊, the argument of η(z) taken
/// in (−2π, 0) sits in [arg z − π, arg z], and η(iy) → 0 as y ↑ 0.
pub fn eta_characterization_probe(eta_fn: &dyn Fn(Complex64) -> Result<Complex64>) -> Result<()> {
    let sector = Sector::cut_positive_axis_below();
    for &r in &[1e-3, 0.03, 0.3, 1.0, 3.0, 30.0, 1e3] {
        for k in 1..=5 {
            let theta = -PI * (k as f64) / 6.0;
            let z = Complex64::from_polar(r, theta);
            let v = eta_fn(z)?;
            if v.norm() == 0.0 {
                continue;
            }
            if v.im.abs() <= 1e-12 * (1.0 + v.norm()) && v.re > 1e-12 {
                return Err(Error::domain(format!(
                    "not an η-transform: η({z}) = {v} lands on the positive reals"
                )));
            }
            let arg_eta = arg_in(v, sector).unwrap_or(if v.re < 0.0 { -PI } else { -2.0 * PI });
            if arg_eta > theta + 1e-8 || arg_eta < theta - PI - 1e-8 {
                return Err(Error::domain(format!(
                    "not an η-transform: arg η({z}) = {arg_eta:.6} outside [arg z − π, arg z]"
                )));
            }
        }
    }
    let near = eta_fn(Complex64::new(0.0, -1e-9))?;
    let far = eta_fn(Complex64::new(0.0, -1e-3))?;
    if near.norm() > far.norm().max(0.05) * 1.5 {
        return Err(Error::domain("not an η-transform: η(iy) does not vanish as y ↑ 0"));
    }
    Ok(())
}

/// Recover the measure with the given η-transform: form
/// `F(w) = w(1 − η(1/w))` on ℂ⁺, Stieltjes-invert onto a log grid per sign,
/// and detect point masses from the residue behaviour of `G`.
pub fn recover_from_eta(
    eta_fn: &dyn Fn(Complex64) -> Result<Complex64>,
    opts: &RecoveryOptions,
) -> Result<Measure> {
    if !opts.skip_probe {
        eta_characterization_probe(eta_fn)?;
    }
    let g = make_g_from_eta(eta_fn);

    let nodes = log_nodes(opts.x_min, opts.x_max, opts.nodes_per_sign);
    let mut pos = grid_side(&g, &nodes, 1.0)?;
    let mut neg = grid_side(&g, &nodes, -1.0)?;

    // point masses: residues of G at real poles
    let atoms = detect_atoms(&g, &nodes)?;

    // remove spurious density bumps that really belong to detected atoms
    if !atoms.is_empty() {
        let scrub = |half: Option<HalfGrid>, sign: f64| -> Result<Option<HalfGrid>> {
            match half {
                None => Ok(None),
                Some(mut h) => {
                    for i in 0..h.xs.len() {
                        for &(a, _) in &atoms {
                            if a * sign > 0.0
                                && (h.xs[i] - a.abs()).abs() < 0.05 * (1.0 + a.abs())
                            {
                                h.ys[i] = 0.0;
                            }
                        }
                    }
                    rebuild_half(h.xs, h.ys)
                }
            }
        };
        pos = scrub(pos, 1.0)?;
        neg = scrub(neg, -1.0)?;
    }

    let ac_mass = pos.as_ref().map_or(0.0, |h| h.mass()) + neg.as_ref().map_or(0.0, |h| h.mass());
    let atom_mass: f64 = atoms.iter().map(|&(_, w)| w).sum();
    if ac_mass < 1e-4 && (atom_mass - 1.0).abs() < 5e-3 {
        // purely atomic: renormalise the recovered residues
        return Measure::atomic(atoms.into_iter().map(|(x, w)| (x, w / atom_mass)).collect());
    }
    Ok(Measure::Grid(GridDensity { pos, neg, atoms }))
}

fn make_g_from_eta<'a>(
    eta_fn: &'a dyn Fn(Complex64) -> Result<Complex64>,
) -> impl Fn(Complex64) -> Result<Complex64> + 'a {
    move |w: Complex64| {
        let e = eta_fn(w.inv())?;
        let f = w * (1.0 - e);
        if f.norm() < 1e-300 {
            return Err(Error::numerical("F vanished during recovery"));
        }
        Ok(f.inv())
    }
}

fn log_nodes(x_min: f64, x_max: f64, n: usize) -> Vec<f64> {
    let (lf, hf) = (x_min.ln(), x_max.ln());
    (0..n).map(|i| (lf + (hf - lf) * (i as f64) / ((n - 1) as f64)).exp()).collect()
}

fn grid_side(
    g: &impl Fn(Complex64) -> Result<Complex64>,
    nodes: &[f64],
    sign: f64,
) -> Result<Option<HalfGrid>> {
    let mut ys = Vec::with_capacity(nodes.len());
    for &x in nodes {
        // ε offsets proportional to the node scale suit log-spaced grids
        let eps: Vec<f64> = (0..4).map(|k| 1e-3 * x * 0.5f64.powi(k)).collect();
        let d = stieltjes_density_lenient(&|z| g(z), sign * x, &eps)?;
        ys.push(if d.is_finite() { d.max(0.0) } else { 0.0 });
    }
    rebuild_half(nodes.to_vec(), ys)
}

fn rebuild_half(xs: Vec<f64>, ys: Vec<f64>) -> Result<Option<HalfGrid>> {
    let mass_hint: f64 = ys.iter().sum();
    if mass_hint <= 1e-13 {
        return Ok(None);
    }
    let first = ys.iter().position(|&y| y > 0.0).unwrap();
    let last = ys.iter().rposition(|&y| y > 0.0).unwrap();
    if last <= first {
        return Ok(None);
    }
    let xs = xs[first..=last].to_vec();
    let ys = ys[first..=last].to_vec();
    let t0 = crate::measures::fit_tail(&xs, &ys, false);
    let t1 = crate::measures::fit_tail(&xs, &ys, true);
    Ok(Some(HalfGrid::new(xs, ys, t0, t1)?))
}

fn detect_atoms(
    g: &impl Fn(Complex64) -> Result<Complex64>,
    nodes: &[f64],
) -> Result<Vec<(f64, f64)>> {
    // h·(−Im G(x+ih)) estimates the mass within ~h of x.  An atom within
    // h/2 of the node keeps most of that estimate when h shrinks fourfold,
    // while the O(h²) far-field contribution drops by 16; the ratio test
    // separates the two.  Remaining false positives are discarded later by
    // the residue-weight threshold.
    let mut probe = |x: f64, h: f64| -> f64 {
        g(Complex64::new(x, h)).map(|v| -v.im * h).unwrap_or(0.0)
    };
    let mut candidates: Vec<f64> = Vec::new();
    let mut consider = |x: f64, h: f64, cands: &mut Vec<f64>| {
        let c1 = probe(x, h);
        if c1 > 0.004 {
            let c2 = probe(x, h / 4.0);
            if c2 > 0.004 || c2 >= c1 / 6.0 {
                cands.push(x);
            }
        }
    };
    for (i, &x) in nodes.iter().enumerate() {
        let h = if i + 1 < nodes.len() { nodes[i + 1] - x } else { x - nodes[i - 1] };
        consider(x, h, &mut candidates);
        consider(-x, h, &mut candidates);
    }
    consider(0.0, nodes[0], &mut candidates);
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    candidates.sort_by(|a, b| a.total_cmp(b));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut cluster_start = 0;
    for i in 1..=candidates.len() {
        let split = i == candidates.len()
            || (candidates[i] - candidates[i - 1]).abs() > 0.2 * (1.0 + candidates[i].abs());
        if split {
            let lo = candidates[cluster_start] - 0.2 * (1.0 + candidates[cluster_start].abs());
            let hi = candidates[i - 1] + 0.2 * (1.0 + candidates[i - 1].abs());
            refine_cluster(g, lo, hi, &mut atoms);
            cluster_start = i;
        }
    }
    atoms.retain(|&(_, w)| w > 1e-4);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms.dedup_by(|a, b| {
        if (a.0 - b.0).abs() < 1e-6 * (1.0 + a.0.abs()) {
            b.1 += a.1;
            true
        } else {
            false
        }
    });
    Ok(atoms)
}

/// A flagged cluster may span several poles; scan it at the cluster scale
/// for local mass concentrations, zoom in on each, and keep the ones with a
/// genuine residue.
fn refine_cluster(
    g: &impl Fn(Complex64) -> Result<Complex64>,
    lo: f64,
    hi: f64,
    atoms: &mut Vec<(f64, f64)>,
) {
    let n = 400usize;
    let spacing = (hi - lo) / (n as f64 - 1.0);
    let conc = |x: f64, h: f64| -> f64 {
        g(Complex64::new(x, h)).map(|v| -v.im * h).unwrap_or(0.0)
    };
    let xs: Vec<f64> = (0..n).map(|i| lo + spacing * (i as f64)).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| conc(x, spacing)).collect();
    for i in 1..n - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > 5e-4 {
            // zoom: repeatedly re-centre on the best of a 9-point scan with
            // a probe offset shrinking along with the window
            let mut center = xs[i];
            let mut width = spacing;
            for _ in 0..60 {
                let off = width / 4.0;
                let mut best = (center, conc(center, off));
                for k in -4i32..=4 {
                    let x = center + width * (k as f64) / 4.0;
                    let v = conc(x, off);
                    if v > best.1 {
                        best = (x, v);
                    }
                }
                center = best.0;
                width /= 3.0;
                if width < 1e-13 * (1.0 + center.abs()) {
                    break;
                }
            }
            let e1 = 1e-6 * (1.0 + center.abs());
            let r1 = conc(center, e1);
            let r2 = conc(center, e1 / 2.0);
            let w = 2.0 * r2 - r1;
            if w > 1e-4 {
                atoms.push((snap(center), w));
            }
        }
    }
}

fn snap(x: f64) -> f64 {
    // atom locations found within ~1e-7 of a round value are snapped to it
    let r = (x * 1e6).round() / 1e6;
    if (r - x).abs() < 1e-7 * (1.0 + x.abs()) {
        r
    } else {
        x
    }
}

fn golden_max(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-12 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> QuadSpec {
        QuadSpec::default()
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
    fn cauchy_of_dirac() {
        let m = Measure::dirac(1.0);
        let z = c(0.3, 0.7);
        assert_close(cauchy(&m, z, &spec()).unwrap(), (z - 1.0).inv(), 1e-15);
    }

    #[test]
    fn cauchy_of_cauchy_family() {
        let m = Measure::family(Family::Cauchy { rho: 0.5 }).unwrap();
        let g = cauchy(&m, c(0.0, 1.0), &spec()).unwrap();
        assert_close(g, c(0.0, -0.5), 1e-15);
        let gq = cauchy_quad(&m, c(0.0, 1.0), &spec()).unwrap();
        assert_close(gq, c(0.0, -0.5), 1e-9);
    }

    #[test]
    fn cauchy_of_boolean_on_negative_axis() {
        // G_{b_{1/2,1}}(−1) = −1/2
        let m = Measure::boolean_stable(0.5, 1.0).unwrap();
        let g = cauchy(&m, c(-1.0, 0.0), &spec()).unwrap();
        assert_close(g, c(-0.5, 0.0), 1e-13);
        let gq = cauchy_quad(&m, c(-1.0, 0.0), &spec()).unwrap();
        assert_close(gq, c(-0.5, 0.0), 1e-8);
    }

    #[test]
    fn conjugate_symmetry() {
        let s = spec();
        for m in [
            Measure::boolean_stable(0.6, 0.7).unwrap(),
            Measure::family(Family::MarchenkoPastur).unwrap(),
            Measure::family(Family::MonotoneStable { alpha: 0.5, rho: 1.0 }).unwrap(),
            Measure::family(Family::FreeStable { alpha: 0.5, rho: 1.0 }).unwrap(),
        ] {
            let z = c(0.4, 0.8);
            let g = cauchy(&m, z, &s).unwrap();
            let gc = cauchy(&m, z.conj(), &s).unwrap();
            assert_close(gc, g.conj(), 1e-12);
        }
    }

    #[test]
    fn eta_of_dirac_is_linear() {
        let m = Measure::dirac(2.5);
        let z = c(0.3, -0.4);
        assert_close(eta(&m, z, &spec()).unwrap(), 2.5 * z, 1e-14);
    }

    #[test]
    fn eta_of_boolean_closed_vs_quadrature() {
        let m = Measure::boolean_stable(0.5, 0.7).unwrap();
        let z = c(0.0, -1.0);
        let closed = eta(&m, z, &spec()).unwrap();
        let phase = Complex64::from_polar(1.0, 0.7 * PI);
        let expect = -(phase * z).powf(0.5);
        assert_close(closed, expect, 1e-13);
        let quad = eta_quad(&m, z, &QuadSpec::with_tols(1e-12, 1e-10)).unwrap();
        assert_close(quad, expect, 1e-7);
    }

    #[test]
    fn eta_of_positive_boolean_at_minus_i() {
        let m = Measure::boolean_stable(0.5, 1.0).unwrap();
        let v = eta(&m, c(0.0, -1.0), &spec()).unwrap();
        let expect = -Complex64::from_polar(1.0, PI / 4.0);
        assert_close(v, expect, 1e-14);
    }

    #[test]
    fn eta_inverse_of_dirac_mp_boolean() {
        let s = spec();
        let m = Measure::dirac(2.0);
        assert_relative_eq!(eta_inverse(&m, -0.5, &s).unwrap(), -0.25, max_relative = 1e-12);
        let mp = Measure::family(Family::MarchenkoPastur).unwrap();
        for &w in &[-0.1, -0.5, -2.0] {
            assert_relative_eq!(
                eta_inverse(&mp, w, &s).unwrap(),
                w * (1.0 - w),
                max_relative = 1e-10
            );
        }
        let b = Measure::boolean_stable(0.5, 1.0).unwrap();
        assert_relative_eq!(
            eta_inverse(&b, -0.25, &s).unwrap(),
            -1.0 / 16.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn sigma_and_s_values() {
        let s = spec();
        assert_relative_eq!(
            sigma(&Measure::dirac(1.0), -0.7, &s).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        let mp = Measure::family(Family::MarchenkoPastur).unwrap();
        assert_relative_eq!(s_transform(&mp, -0.5, &s).unwrap(), 2.0, max_relative = 1e-10);
        let fam = Family::BooleanStable { alpha: 0.5, rho: 1.0 };
        let v = family_transform(&fam, TransformReq::STrans, c(-0.5, 0.0)).unwrap();
        assert_close(v, c(1.0, 0.0), 1e-14);
    }

    #[test]
    fn voiculescu_phi_of_dirac() {
        let m = Measure::dirac(1.5);
        let v = voiculescu_phi(&m, c(0.3, 2.0), &spec()).unwrap();
        assert_close(v.phi, c(1.5, 0.0), 1e-10);
    }

    #[test]
    fn voiculescu_phi_free_stable_closed_and_numeric() {
        // φ of f_{1/2,1} at 2i equals 1 − i
        let fam = Family::FreeStable { alpha: 0.5, rho: 1.0 };
        let v = family_transform(&fam, TransformReq::VoiculescuPhi, c(0.0, 2.0)).unwrap();
        assert_close(v, c(1.0, -1.0), 1e-14);
        // numeric route through F of the Newton-based G
        let m = Measure::Family(fam);
        let f = |w: Complex64| f_transform(&m, w, &spec());
        let w = newton_solve(&f, c(0.0, 2.0), c(0.0, 2.0), 60).unwrap();
        assert_close(w - c(0.0, 2.0), c(1.0, -1.0), 1e-9);
    }

    #[test]
    fn phi_of_positive_boolean_is_pick_at_a_point() {
        let m = Measure::boolean_stable(0.5, 1.0).unwrap();
        let v = voiculescu_phi(&m, c(0.0, 2.0), &QuadSpec::with_tols(1e-12, 1e-10)).unwrap();
        assert!(v.phi.im <= 1e-8, "Im φ = {}", v.phi.im);
    }

    #[test]
    fn classical_cumulant_values() {
        let p = AdmissiblePair::new(1.0, 1.0).unwrap();
        let v = classical_stable_cumulant(p, c(0.0, -1.0)).unwrap();
        assert_close(v, c(0.0, -1.0), 1e-15);
        let p = AdmissiblePair::new(0.5, 1.0).unwrap();
        let v = classical_stable_cumulant(p, c(0.0, -1.0)).unwrap();
        assert_close(v, -Complex64::from_polar(1.0, PI / 4.0), 1e-15);
        assert!(classical_stable_cumulant(p, c(0.5, -1.0)).is_err());
    }

    #[test]
    fn mean_scaling_limit_of_eta() {
        // η_{δ_a}(z)/z → a as z → 0 along the negative imaginary axis
        let m = Measure::dirac(3.0);
        let z = c(0.0, -1e-5);
        let v = eta(&m, z, &spec()).unwrap() / z;
        assert_close(v, c(3.0, 0.0), 1e-10);
    }

    #[test]
    fn recover_linear_eta_gives_atom() {
        let eta_fn = |z: Complex64| Ok(1.7 * z);
        let m = recover_from_eta(&eta_fn, &RecoveryOptions::default()).unwrap();
        match m {
            Measure::Atomic(atoms) => {
                assert_eq!(atoms.len(), 1);
                assert_relative_eq!(atoms[0].0, 1.7, max_relative = 1e-6);
                assert_relative_eq!(atoms[0].1, 1.0, max_relative = 1e-6);
            }
            other => panic!("expected an atom, got {other:?}"),
        }
    }

    #[test]
    fn recover_boolean_stable_density() {
        let target = Measure::boolean_stable(0.5, 1.0).unwrap();
        let eta_fn = |z: Complex64| -> Result<Complex64> { Ok(-principal_pow(-z, 0.5)?) };
        let opts = RecoveryOptions { nodes_per_sign: 1600, ..Default::default() };
        let m = recover_from_eta(&eta_fn, &opts).unwrap();
        let s = QuadSpec::with_tols(1e-9, 1e-7);
        let l1 = crate::quad::integrate_power_zero(
            |x: f64| (m.density(x).unwrap() - target.density(x).unwrap()).abs(),
            1.0,
            -0.5,
            &s,
        )
        .unwrap()
            + crate::quad::integrate_power_tail(
                |x: f64| (m.density(x).unwrap() - target.density(x).unwrap()).abs(),
                1.0,
                -1.5,
                &s,
            )
            .unwrap();
        assert!(l1 <= 1e-5, "L1 = {l1}");
        assert_relative_eq!(m.total_mass(&s).unwrap(), 1.0, max_relative = 1e-3);
    }

    #[test]
    fn recover_rejects_non_eta() {
        // z ↦ z² + 1/2 exits the admissible argument range on ℂ⁻
        let bad = |z: Complex64| Ok(z * z + 0.5);
        assert!(recover_from_eta(&bad, &RecoveryOptions::default()).is_err());
    }

    #[test]
    fn family_transform_table_spot_checks() {
        for &a in &[0.3, 0.5, 0.8] {
            let fam = Family::BooleanStable { alpha: a, rho: 1.0 };
            let v = family_transform(&fam, TransformReq::Sigma, c(-1.0, 0.0)).unwrap();
            assert_close(v, c(1.0, 0.0), 1e-14);
        }
        let fam = Family::FreeStable { alpha: 0.5, rho: 0.5 };
        let v = family_transform(&fam, TransformReq::STrans, c(-0.25, 0.0)).unwrap();
        let expect = -Complex64::from_polar(1.0, -PI / 2.0) * 0.25;
        assert_close(v, expect, 1e-14);
        let fam = Family::MonotoneStable { alpha: 0.5, rho: 1.0 };
        let v = family_transform(&fam, TransformReq::Eta, c(0.0, -1.0)).unwrap();
        let inner = Complex64::from_polar(1.0, PI / 4.0) + 1.0;
        assert_close(v, 1.0 - inner * inner, 1e-14);
    }

    #[test]
    fn monotone_eta_closed_vs_quadrature() {
        let m = Measure::family(Family::MonotoneStable { alpha: 0.5, rho: 1.0 }).unwrap();
        let z = c(-0.3, -0.8);
        let closed = eta(&m, z, &spec()).unwrap();
        let quad = eta_quad(&m, z, &QuadSpec::with_tols(1e-12, 1e-10)).unwrap();
        assert_close(quad, closed, 1e-7);
    }

    #[test]
    fn free_eta_closed_vs_quadrature() {
        let m = Measure::family(Family::FreeStable { alpha: 0.5, rho: 1.0 }).unwrap();
        let z = c(-0.4, -0.6);
        let closed = eta(&m, z, &spec()).unwrap();
        let quad = eta_quad(&m, z, &QuadSpec::with_tols(1e-11, 1e-9)).unwrap();
        assert_close(quad, closed, 1e-5);
    }
}
