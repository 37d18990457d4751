//! Complex powers with explicit branch sectors.
//!
//! Every transform formula in this crate raises complex numbers to real
//! powers, and the branch of the argument matters.  A [`Sector`] is an open
//! angular region `{ r e^{iθ} : r > 0, θ ∈ (θ₁, θ₂) }` with `θ₂ − θ₁ ≤ 2π`;
//! [`arg_in`] returns the unique argument of a point inside it and
//! [`sector_pow`] evaluates `z^p = |z|^p exp(i p arg(z))` with that argument.
//!
//! Powers are computed from the log-polar decomposition `(ln|z|, arg z)`
//! rather than through a library `powc`, so the branch choice is explicit
//! and reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Angular slack used when testing sector membership.  Points closer than
/// this to a sector boundary are rejected: the formulas downstream apply
/// only strictly inside their sectors.
pub const BOUNDARY_SLACK: f64 = 1e-12;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// An open angular sector `(θ₁, θ₂)` of width at most `2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    theta1: f64,
    theta2: f64,
}

impl Sector {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !theta1.is_finite() || !theta2.is_finite() {
            return Err(Error::domain("sector angles must be finite"));
        }
        if theta1 >= theta2 {
            return Err(Error::domain(format!(
                "sector requires theta1 < theta2, got ({theta1}, {theta2})"
            )));
        }
        if theta2 - theta1 > TAU + BOUNDARY_SLACK {
            return Err(Error::domain(format!(
                "sector width {} exceeds 2π",
                theta2 - theta1
            )));
        }
        Ok(Sector { theta1, theta2 })
    }

    /// The upper half-plane `(0, π)`.
    pub fn upper() -> Self {
        Sector { theta1: 0.0, theta2: std::f64::consts::PI }
    }

    /// The lower half-plane `(−π, 0)`.
    pub fn lower() -> Self {
        Sector { theta1: -std::f64::consts::PI, theta2: 0.0 }
    }

    /// The plane cut along the negative reals, `(−π, π)`.
    pub fn principal() -> Self {
        Sector { theta1: -std::f64::consts::PI, theta2: std::f64::consts::PI }
    }

    /// The plane cut along the positive reals, arguments in `(0, 2π)`.
    pub fn cut_positive_axis() -> Self {
        Sector { theta1: 0.0, theta2: TAU }
    }

    /// The plane cut along the positive reals, arguments in `(−2π, 0)`.
    pub fn cut_positive_axis_below() -> Self {
        Sector { theta1: -TAU, theta2: 0.0 }
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    /// Whether `z` lies strictly inside the sector (with [`BOUNDARY_SLACK`]).
    pub fn contains(&self, z: Complex64) -> bool {
        arg_in(z, *self).is_ok()
    }
}

/// The argument of `z` in the open interval `(θ₁, θ₂)`.
///
/// Fails when `z = 0`, when no representative of `arg z` modulo `2π` lies in
/// the sector, or when the only representative is within [`BOUNDARY_SLACK`]
/// of a boundary.
pub fn arg_in(z: Complex64, s: Sector) -> Result<f64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::domain("arg_in: z = 0 has no argument"));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain("arg_in: non-finite point"));
    }
    let principal = z.im.atan2(z.re); // in (−π, π]
    // Shift by the multiple of 2π that lands in [θ₁, θ₁ + 2π).
    let k = ((s.theta1 - principal) / TAU).ceil();
    let mut theta = principal + TAU * k;
    // Guard against rounding at the lower edge.
    if theta < s.theta1 {
        theta += TAU;
    }
    if theta - s.theta1 > BOUNDARY_SLACK && s.theta2 - theta > BOUNDARY_SLACK {
        return Ok(theta);
    }
    // The sector may be wider than the single shift we tried (width 2π puts
    // a point near θ₁ also near θ₂); try the next representative.
    let theta_next = theta + TAU;
    if theta_next - s.theta1 > BOUNDARY_SLACK && s.theta2 - theta_next > BOUNDARY_SLACK {
        return Ok(theta_next);
    }
    Err(Error::domain(format!(
        "arg_in: point with principal argument {principal:.6} outside sector ({}, {})",
        s.theta1, s.theta2
    )))
}

/// `z^p` evaluated with the argument of `z` taken in the sector `s`.
pub fn sector_pow(z: Complex64, p: f64, s: Sector) -> Result<Complex64> {
    let theta = arg_in(z, s)?;
    Ok(pow_log_polar(z.norm(), theta, p))
}

/// Principal-branch power: `z^p` with `arg z ∈ (−π, π)`, cut along `(−∞, 0]`.
pub fn principal_pow(z: Complex64, p: f64) -> Result<Complex64> {
    sector_pow(z, p, Sector::principal())
}

/// Principal power with closed boundary: points on (or within rounding of)
/// the negative real axis take the side their floating sign of `Im z`
/// indicates, instead of being rejected.  Transform kernels evaluate their
/// closed formulas on closed half-planes through this.
pub fn principal_pow_closed(z: Complex64, p: f64) -> Result<Complex64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::domain("0^p has no branch"));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain("principal_pow_closed: non-finite point"));
    }
    let theta = z.im.atan2(z.re);
    let log_r = z.norm().ln();
    let modulus = (p * log_r).exp();
    let angle = p * theta;
    Ok(Complex64::new(modulus * angle.cos(), modulus * angle.sin()))
}

/// Sector power with closed boundary: the argument representative is taken
/// in `[θ₁, θ₁ + 2π)` without the interior slack, so evaluation continues
/// onto the sector edges.  Used by transform kernels that evaluate boundary
/// values of analytic continuations.
pub fn sector_pow_closed(z: Complex64, p: f64, s: Sector) -> Result<Complex64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::domain("0^p has no branch"));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain("sector_pow_closed: non-finite point"));
    }
    let principal = z.im.atan2(z.re);
    let k = ((s.theta1 - principal) / TAU).ceil();
    let mut theta = principal + TAU * k;
    if theta < s.theta1 {
        theta += TAU;
    }
    Ok(pow_log_polar(z.norm(), theta, p))
}

/// `|z|^p e^{i p θ}` via the log-polar decomposition.
fn pow_log_polar(r: f64, theta: f64, p: f64) -> Complex64 {
    let log_r = r.ln();
    let modulus = (p * log_r).exp();
    let angle = p * theta;
    Complex64::new(modulus * angle.cos(), modulus * angle.sin())
}
