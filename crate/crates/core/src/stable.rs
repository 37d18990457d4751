//! The four strictly stable families and the other closed-form laws.
//!
//! With stability index `α` and asymmetry `ρ`, the classical, Boolean, free
//! and monotone strictly stable distributions are pinned down by
//!
//! ```text
//!   classical:  C*(z)  = −(e^{iρπ} z)^α          z ∈ i(−∞,0)
//!   Boolean:    η(z)   = −(e^{iρπ} z)^α          z ∈ ℂ⁻
//!   free:       C^⊞(z) = −(e^{iρπ} z)^α          z ∈ ℂ⁻
//!   monotone:   F(z)   = (z^α + e^{iρapi})^{1/α}  z ∈ ℂ⁺, branch (0, 2π)
//! ```
//!
//! At `α = 1` all four collapse to the Cauchy family `c_ρ` with density
//! `sin(ρπ)/π / ((x + cos ρπ)² + sin² ρπ)` (`c₀ = δ₋₁`, `c₁ = δ₁`).
//!
//! The Boolean family has the closed density
//!
//! ```text
//!   p⁺(x) = sin(πρα)/π · x^{α−1} / (x^{2α} + 2 x^α cos(πρα) + 1),     x > 0,
//!   p⁻(x) = sin(π(1−ρ)α)/π · |x|^{α−1} / (|x|^{2α} + 2|x|^α cos(π(1−ρ)α) + 1)
//! ```
//!
//! and, integrating in the variable `x^α`, a closed distribution function as
//! well.  Free stable densities are produced numerically: the inverse
//! reciprocal Cauchy transform is closed (`F⁻¹(w) = w − e^{iαρπ} w^{1−α}`),
//! so `F` is evaluated by a damped Newton iteration continued along the real
//! axis and the density follows by Stieltjes inversion.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::HalfGrid;
use crate::quad::richardson_zero_limit;
use crate::sectors::{sector_pow, Sector};

/// A stability index / asymmetry pair from the admissible set:
/// `α ∈ (0,1], ρ ∈ [0,1]` or `α ∈ (1,2], ρ ∈ [1−1/α, 1/α]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    alpha: f64,
    rho: f64,
}

impl AdmissiblePair {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        if !alpha.is_finite() || !rho.is_finite() {
            return Err(Error::domain("alpha and rho must be finite"));
        }
        let ok = if alpha > 0.0 && alpha <= 1.0 {
            (0.0..=1.0).contains(&rho)
        } else if alpha > 1.0 && alpha <= 2.0 {
            (1.0 - 1.0 / alpha..=1.0 / alpha).contains(&rho)
        } else {
            false
        };
        if !ok {
            return Err(Error::domain(format!(
                "(alpha, rho) = ({alpha}, {rho}) is not an admissible stability pair"
            )));
        }
        Ok(AdmissiblePair { alpha, rho })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// True when `α > 1` and `ρ` sits on the edge of the admissible strip,
    /// where the Boolean stable law degenerates to one or two atoms whose
    /// data the density formulas do not cover.
    pub fn is_atomic_boundary(&self) -> bool {
        self.alpha > 1.0
            && ((self.rho - (1.0 - 1.0 / self.alpha)).abs() < 1e-12
                || (self.rho - 1.0 / self.alpha).abs() < 1e-12)
    }
}

/// Which of the four stable families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StableKind {
    Classical,
    Free,
    Boolean,
    Monotone,
}

/// Density of the Cauchy family `c_ρ`, `ρ ∈ (0, 1)`.
pub fn cauchy_rho_density(rho: f64, x: f64) -> Result<f64> {
    if !(0.0 < rho && rho < 1.0) {
        return Err(Error::domain(format!(
            "cauchy_rho_density requires rho in (0,1); c_0 and c_1 are the atoms at -1 and 1 (got rho={rho})"
        )));
    }
    let (s, c) = (rho * PI).sin_cos();
    Ok(s / PI / ((x + c) * (x + c) + s * s))
}

/// Distribution function of `c_ρ`.
pub fn cauchy_rho_cdf(rho: f64, x: f64) -> Result<f64> {
    if !(0.0 < rho && rho < 1.0) {
        return Err(Error::domain("cauchy_rho_cdf requires rho in (0,1)"));
    }
    let (s, c) = (rho * PI).sin_cos();
    Ok(0.5 + ((x + c) / s).atan() / PI)
}

/// Free Poisson (Marchenko–Pastur) density `√((4−x)/x)/(2π)` on `(0, 4)`.
pub fn mp_density(x: f64) -> f64 {
    if x <= 0.0 || x >= 4.0 {
        0.0
    } else {
        ((4.0 - x) / x).sqrt() / (2.0 * PI)
    }
}

/// Pareto density `r (1+x)^{−r−1}` on `(0, ∞)`.
pub fn pareto_density(r: f64, x: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::domain("pareto_density requires r > 0"));
    }
    Ok(if x <= 0.0 { 0.0 } else { r * (1.0 + x).powf(-r - 1.0) })
}

pub fn pareto_cdf(r: f64, x: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::domain("pareto_cdf requires r > 0"));
    }
    Ok(if x <= 0.0 { 0.0 } else { 1.0 - (1.0 + x).powf(-r) })
}

/// Density of the Boolean stable law `b_{α,ρ}` at `x ≠ 0`.
///
/// For `α > 1` the asymmetry must be strictly inside `(1−1/α, 1/α)`; at the
/// edges the law carries atoms and has no usable density formula.
pub fn boolean_density(pair: AdmissiblePair, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Ok(0.0);
    }
    if pair.is_atomic_boundary() {
        return Err(Error::unsupported(format!(
            "b_({}, {}) has atoms at the boundary asymmetry; no density available",
            pair.alpha, pair.rho
        )));
    }
    let (alpha, rho) = (pair.alpha, pair.rho);
    if alpha == 1.0 {
        // Cauchy family; the rho in {0,1} cases are atoms.
        if rho == 0.0 || rho == 1.0 {
            return Err(Error::unsupported("b_(1,0) and b_(1,1) are point masses"));
        }
        return cauchy_rho_density(rho, x);
    }
    if x == 0.0 {
        return Err(Error::domain("boolean_density: x = 0 is excluded"));
    }
    let theta = if x > 0.0 { PI * rho * alpha } else { PI * (1.0 - rho) * alpha };
    let (s, c) = theta.sin_cos();
    if s <= 0.0 {
        // sin(θ) = 0 means the corresponding side carries no density.
        return Ok(0.0);
    }
    let ax = x.abs();
    let xa = ax.powf(alpha);
    Ok(s / PI * ax.powf(alpha - 1.0) / (xa * xa + 2.0 * xa * c + 1.0))
}

/// Distribution function of `b_{α,ρ}` in closed form.
///
/// On each side the substitution `u = |x|^α` turns the density into a Cauchy
/// kernel in `u`, so the partial mass is an arctangent and the positive side
/// carries total mass exactly `ρ`.
pub fn boolean_cdf(pair: AdmissiblePair, x: f64) -> Result<f64> {
    if pair.is_atomic_boundary() {
        return Err(Error::unsupported("boundary asymmetry law has atoms"));
    }
    let (alpha, rho) = (pair.alpha, pair.rho);
    if alpha == 1.0 {
        if rho == 0.0 {
            return Ok(if x >= -1.0 { 1.0 } else { 0.0 });
        }
        if rho == 1.0 {
            return Ok(if x >= 1.0 { 1.0 } else { 0.0 });
        }
        return cauchy_rho_cdf(rho, x);
    }
    let side_mass = |theta: f64, y: f64| -> f64 {
        // mass of the side-density between 0 and y (y = |x|)
        if theta <= 0.0 {
            return 0.0;
        }
        let (s, c) = theta.sin_cos();
        (((y.powf(alpha) + c) / s).atan() - (PI / 2.0 - theta)) / (PI * alpha)
    };
    let theta_pos = PI * rho * alpha;
    let theta_neg = PI * (1.0 - rho) * alpha;
    let neg_mass = 1.0 - rho;
    if x >= 0.0 {
        Ok((neg_mass + if x > 0.0 { side_mass(theta_pos, x) } else { 0.0 }).clamp(0.0, 1.0))
    } else {
        Ok((neg_mass - side_mass(theta_neg, -x)).clamp(0.0, 1.0))
    }
}

/// Density of the monotone stable law `m_{α,ρ}` by boundary evaluation of
/// `−Im(1/F)/π` with `F(z) = (z^α + e^{iραπ})^{1/α}` on the `(0,2π)` branch.
pub fn monotone_density(pair: AdmissiblePair, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Ok(0.0);
    }
    let (alpha, rho) = (pair.alpha, pair.rho);
    if alpha == 1.0 {
        if rho == 0.0 || rho == 1.0 {
            return Err(Error::unsupported("m_(1,0) and m_(1,1) are point masses"));
        }
        return cauchy_rho_density(rho, x);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // boundary value of z^α as z → x from the upper half-plane
    let xa = x.abs().powf(alpha);
    let za = if x > 0.0 {
        Complex64::new(xa, 0.0)
    } else {
        Complex64::from_polar(xa, alpha * PI)
    };
    let t = za + Complex64::from_polar(1.0, rho * alpha * PI);
    if t.im.abs() < 1e-14 && t.re > 0.0 {
        // F is real and positive here: no absolutely continuous mass.
        return Ok(0.0);
    }
    let f = match sector_pow(t, 1.0 / alpha, Sector::cut_positive_axis()) {
        Ok(v) => v,
        Err(_) => {
            return Err(Error::numerical(format!(
                "monotone_density: branch failure at x = {x}"
            )))
        }
    };
    let g = f.inv();
    Ok((-g.im / PI).max(0.0))
}

// ---------------------------------------------------------------------------
// Free stable densities via Newton inversion of the closed F⁻¹.
// ---------------------------------------------------------------------------

/// Solve `w − e^{iαρπ} w^{1−α} = z` for `w` in the closed upper half-plane by
/// damped Newton iteration from `start`.
fn free_f_solve(alpha: f64, rho: f64, z: Complex64, start: Complex64) -> Result<Complex64> {
    let phase = Complex64::from_polar(1.0, alpha * rho * PI);
    let target_scale = z.norm().max(1.0);
    let psi = |w: Complex64| -> Complex64 { w - phase * w.powf(1.0 - alpha) };
    let dpsi = |w: Complex64| -> Complex64 { 1.0 - phase * (1.0 - alpha) * w.powf(-alpha) };
    let mut w = start;
    let mut resid = (psi(w) - z).norm();
    for _ in 0..50 {
        if resid <= 1e-13 * target_scale {
            return Ok(w);
        }
        let d = dpsi(w);
        if d.norm() < 1e-300 {
            break;
        }
        let mut step = -(psi(w) - z) / d;
        let mut tries = 0;
        loop {
            let cand = w + step;
            let r = (psi(cand) - z).norm();
            if r < resid || tries >= 40 {
                w = cand;
                resid = r;
                break;
            }
            step *= 0.5;
            tries += 1;
        }
    }
    if resid <= 1e-10 * target_scale {
        Ok(w)
    } else {
        Err(Error::numerical(format!(
            "free stable F inversion stalled at residual {resid:.3e} for z = {z}"
        )))
    }
}

/// Density of the positive side of `f_{α,ρ}` at one point by Newton
/// continuation: start far from the real axis where `w ≈ z`, walk the
/// imaginary offset down to the Richardson ladder, extrapolate `ε → 0`.
fn free_density_direct(alpha: f64, rho: f64, x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Ok(0.0);
    }
    let scale = 1.0 + x.abs();
    let eps0 = 1e-3 * scale;
    let levels = 5usize;
    let mut eps = 10.0 * scale;
    let mut w = free_f_solve(alpha, rho, Complex64::new(x, eps), Complex64::new(x, eps))?;
    while eps > eps0 * 1.0001 {
        eps = (eps * 0.5).max(eps0);
        w = free_f_solve(alpha, rho, Complex64::new(x, eps), w)?;
    }
    let mut vals = Vec::with_capacity(levels);
    for k in 0..levels {
        let e = eps0 * 0.5f64.powi(k as i32);
        w = free_f_solve(alpha, rho, Complex64::new(x, e), w)?;
        vals.push((-(w.inv().im) / PI).max(0.0));
    }
    let (d, _err) = richardson_zero_limit(&vals);
    Ok(d.max(0.0))
}

fn free_stable_grid_build(alpha: f64, rho: f64) -> Result<HalfGrid> {
    // Positive side of f_{α,1} (rho = 1) or of the symmetric f_{α,1/2}.
    let n = 1200;
    let (lo, hi) = (1e-6f64, 1e9f64);
    let lf = lo.ln();
    let hf = hi.ln();
    let mut xs = Vec::with_capacity(n);
    for i in 0..n {
        let u = lf + (hf - lf) * (i as f64) / ((n - 1) as f64);
        xs.push(u.exp());
    }
    let mut ys = Vec::with_capacity(n);
    for &x in &xs {
        ys.push(free_density_direct(alpha, rho, x)?);
    }
    let tail_inf = -(alpha + 1.0);
    let tail_zero = alpha - 1.0;
    HalfGrid::new(xs, ys, tail_zero, tail_inf)
}

type GridKey = (u64, u64);

fn free_grid_cache() -> &'static Mutex<HashMap<GridKey, Arc<HalfGrid>>> {
    static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<HalfGrid>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached positive-half grid of `f_{α,ρ}` for `ρ ∈ {1/2, 1}`.
pub(crate) fn free_stable_half_grid(alpha: f64, rho: f64) -> Result<Arc<HalfGrid>> {
    let key = (alpha.to_bits(), rho.to_bits());
    if let Some(g) = free_grid_cache().lock().unwrap().get(&key) {
        return Ok(g.clone());
    }
    let grid = Arc::new(free_stable_grid_build(alpha, rho)?);
    free_grid_cache().lock().unwrap().insert(key, grid.clone());
    Ok(grid)
}

/// Density of the free stable law `f_{α,ρ}` for `ρ ∈ {0, 1/2, 1}`.
///
/// `ρ = 1` needs `α ∈ (0,1]`; `ρ = 0` is the reflection; `ρ = 1/2` is the
/// symmetric case with `α ∈ (0,2]`.
pub fn free_stable_density(pair: AdmissiblePair, x: f64) -> Result<f64> {
    let (alpha, rho) = (pair.alpha, pair.rho);
    if alpha == 1.0 {
        return cauchy_rho_density(rho, x);
    }
    if rho == 1.0 {
        if alpha > 1.0 {
            return Err(Error::domain("f_(α,1) requires α ≤ 1"));
        }
        return free_density_direct(alpha, 1.0, x);
    }
    if rho == 0.0 {
        return free_stable_density(AdmissiblePair::new(alpha, 1.0)?, -x);
    }
    if rho == 0.5 {
        if x == 0.0 {
            // symmetric density is continuous at 0; evaluate just off it
            return free_density_direct(alpha, 0.5, 1e-9);
        }
        return free_density_direct(alpha, 0.5, x.abs());
    }
    Err(Error::unsupported(format!(
        "free stable density only available for rho in {{0, 1/2, 1}}, got {rho}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_power_tail, integrate_power_zero, QuadSpec};
    use approx::assert_relative_eq;

    fn pair(a: f64, r: f64) -> AdmissiblePair {
        AdmissiblePair::new(a, r).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(AdmissiblePair::new(0.5, 0.3).is_ok());
        assert!(AdmissiblePair::new(1.5, 0.5).is_ok());
        assert!(AdmissiblePair::new(1.5, 0.9).is_err());
        assert!(AdmissiblePair::new(2.5, 0.5).is_err());
        assert!(AdmissiblePair::new(0.5, 1.2).is_err());
        assert!(pair(1.5, 1.0 / 1.5).is_atomic_boundary());
    }

    #[test]
    fn boolean_density_values() {
        // p⁺ at the spec points
        assert_relative_eq!(
            boolean_density(pair(0.5, 1.0), 1.0).unwrap(),
            1.0 / (2.0 * PI),
            max_relative = 1e-14
        );
        let expect = (2.0f64.sqrt() - 1.0) / (2.0 * PI);
        assert_relative_eq!(
            boolean_density(pair(0.5, 0.5), 1.0).unwrap(),
            expect,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            boolean_density(pair(1.0, 0.5), 0.0).unwrap(),
            1.0 / PI,
            max_relative = 1e-15
        );
        // positive law has no mass on the negative axis
        assert_eq!(boolean_density(pair(0.5, 1.0), -2.0).unwrap(), 0.0);
    }

    #[test]
    fn boolean_density_normalises() {
        let spec = QuadSpec::default();
        for &(a, r) in &[(0.3, 1.0), (0.5, 0.5), (0.7, 0.8), (1.3, 0.5)] {
            let p = pair(a, r);
            let pos = integrate_split(p, spec);
            assert_relative_eq!(pos, 1.0, max_relative = 1e-8);
        }
    }

    fn integrate_split(p: AdmissiblePair, spec: QuadSpec) -> f64 {
        let a = p.alpha();
        let mut total = 0.0;
        for sign in [1.0, -1.0] {
            let d = |y: f64| boolean_density(p, sign * y).unwrap();
            total += integrate_power_zero(d, 1.0, a - 1.0, &spec).unwrap();
            total += integrate_power_tail(d, 1.0, -a - 1.0, &spec).unwrap();
        }
        total
    }

    #[test]
    fn boolean_cdf_matches_density_quadrature() {
        let spec = QuadSpec::default();
        let p = pair(0.6, 0.7);
        for &x in &[-3.0, -0.5, 0.4, 1.0, 5.0] {
            let quad_mass = if x < 0.0 {
                integrate_power_tail(|y: f64| boolean_density(p, -y).unwrap(), -x, -1.6, &spec)
                    .unwrap()
            } else {
                let neg = 1.0 - 0.7;
                let body =
                    integrate_power_zero(|y: f64| boolean_density(p, y).unwrap(), x, -0.4, &spec)
                        .unwrap();
                neg + body
            };
            assert_relative_eq!(boolean_cdf(p, x).unwrap(), quad_mass, max_relative = 1e-7);
        }
        // positive-side mass is exactly rho
        assert_relative_eq!(boolean_cdf(pair(0.42, 0.63), 0.0).unwrap(), 1.0 - 0.63, max_relative = 1e-13);
    }

    #[test]
    fn family_point_values() {
        assert_relative_eq!(mp_density(1.0), 3.0f64.sqrt() / (2.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(pareto_density(1.0, 1.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(cauchy_rho_density(0.5, 0.0).unwrap(), 1.0 / PI, max_relative = 1e-15);
    }

    #[test]
    fn monotone_density_values() {
        // m_{1/2,1} has density 2√x/(π(1+x)²)
        let p = pair(0.5, 1.0);
        assert_relative_eq!(
            monotone_density(p, 1.0).unwrap(),
            1.0 / (2.0 * PI),
            max_relative = 1e-12
        );
        for &x in &[0.1f64, 0.7, 3.0] {
            let closed = 2.0 * x.sqrt() / (PI * (1.0 + x) * (1.0 + x));
            assert_relative_eq!(monotone_density(p, x).unwrap(), closed, max_relative = 1e-12);
        }
        // α = 1 collapse to the Cauchy family
        for &x in &[-1.0, 0.3, 2.0] {
            assert_relative_eq!(
                monotone_density(pair(1.0, 0.3), x).unwrap(),
                cauchy_rho_density(0.3, x).unwrap(),
                max_relative = 1e-14
            );
        }
        let spec = QuadSpec::default();
        let mass = integrate(|x: f64| monotone_density(p, x).unwrap(), 0.0, 1.0, &spec).unwrap()
            + integrate_power_tail(|x: f64| monotone_density(p, x).unwrap(), 1.0, -1.5, &spec)
                .unwrap();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn free_stable_density_matches_pushforward_oracle() {
        // f_{1/2,1} is the image of the free Poisson under x ↦ 1/x, with
        // density √(4x−1)/(2πx²) on (1/4, ∞).
        let p = pair(0.5, 1.0);
        for &x in &[0.3f64, 0.5, 1.0, 2.0, 10.0] {
            let oracle = (4.0 * x - 1.0).sqrt() / (2.0 * PI * x * x);
            let got = free_stable_density(p, x).unwrap();
            assert_relative_eq!(got, oracle, max_relative = 2e-4);
        }
        assert_relative_eq!(
            free_stable_density(p, 1.0).unwrap(),
            3.0f64.sqrt() / (2.0 * PI),
            max_relative = 1e-5
        );
        // essentially no mass below the support edge
        assert!(free_stable_density(p, 0.2).unwrap() < 1e-8);
    }

    #[test]
    fn free_stable_density_normalises() {
        let spec = QuadSpec::with_tols(1e-10, 1e-8);
        for &(a, r) in &[(0.75, 1.0), (0.6, 0.5)] {
            let p = pair(a, r);
            let mut mass =
                integrate(|x: f64| free_stable_density(p, x).unwrap(), 0.0, 1.0, &spec).unwrap();
            mass += integrate_power_tail(
                |x: f64| free_stable_density(p, x).unwrap(),
                1.0,
                -a - 1.0,
                &spec,
            )
            .unwrap();
            let total = if r == 0.5 { 2.0 * mass } else { mass };
            assert_relative_eq!(total, 1.0, max_relative = 2e-4);
        }
    }

    #[test]
    fn alpha_one_collapse() {
        // All families reduce to c_ρ at α = 1.
        for &x in &[-2.0, -0.4, 0.1, 1.5] {
            let c = cauchy_rho_density(0.25, x).unwrap();
            assert_relative_eq!(boolean_density(pair(1.0, 0.25), x).unwrap(), c, max_relative = 1e-12);
            assert_relative_eq!(free_stable_density(pair(1.0, 0.25), x).unwrap(), c, max_relative = 1e-12);
            assert_relative_eq!(monotone_density(pair(1.0, 0.25), x).unwrap(), c, max_relative = 1e-12);
        }
    }

    #[test]
    fn boolean_blowup_at_zero_has_positive_limit() {
        // x^{1-α}·p⁺(x) has a positive finite limit as x ↓ 0 when ρ ≠ 0.
        let p = pair(0.6, 0.8);
        let mut prev = None;
        for k in 1..=6 {
            let x = 10f64.powi(-k);
            let ratio = boolean_density(p, x).unwrap() / x.powf(p.alpha() - 1.0);
            if let Some(q) = prev {
                let rel: f64 = (ratio - q) / q;
                assert!(rel.abs() < 0.2);
            }
            assert!(ratio > 0.0 && ratio.is_finite());
            prev = Some(ratio);
        }
        let expect = (PI * 0.8 * 0.6).sin() / PI;
        assert_relative_eq!(prev.unwrap(), expect, max_relative = 1e-3);
    }
}
