//! Limits of free multiplicative laws of large numbers and the explicit
//! density examples built from scale mixtures of index 1/2.
//!
//! For a law `μ` on `[0, ∞)` the normalised free multiplicative powers
//! `(μ^{⊠n})^{1/n}` converge weakly; the limit `Φ(μ)` is pinned down by its
//! distribution function through the S-transform:
//!
//! ```text
//!   Φ(μ)([0, 1/S_μ(x−1)]) = x,      x ∈ (μ({0}), 1).
//! ```
//!
//! For the positive Boolean stable law the limit comes out in closed form:
//! with `β = α/(1−α)`, the distribution function of `Φ(b_{α,1})` is
//! `x^β/(1+x^β)` with density `β x^{β−1}/(x^β+1)²`, and the identity
//! `Φ(μ ⊠ b_{1/2,1}) = μ ⊛ Pa(1)` ties the limit to the Pareto law.
//!
//! The second half of the module carries the explicit densities of
//! mixtures over the index-1/2 law: a scale mixture `μ ⊛ b_{1/2,1}` has
//! density `(x^{−1/2}/π)∫ √y/(x+y) μ(dy)`, which evaluates in closed form
//! for the generalized beta, shifted beta and logarithmic mixing laws.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::mixtures::{CatalogMeasure, SExpr};
use crate::quad::{self, QuadSpec};
use crate::sampler::{self, SampleBatch};

/// Density `β x^{β−1}/(x^β+1)²` on `(0, ∞)` of the law with distribution
/// function `x^β/(1+x^β)` — the free multiplicative limit of the positive
/// Boolean stable law with `β = α/(1−α)`.
pub fn gb2_limit_density(beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let xb = x.powf(beta);
    beta * x.powf(beta - 1.0) / ((xb + 1.0) * (xb + 1.0))
}

/// The same density parameterised by the stable index.
pub fn lln_density_boolean(alpha: f64, x: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain("the limit density needs α in (0, 1)"));
    }
    Ok(gb2_limit_density(alpha / (1.0 - alpha), x))
}

/// Distribution function of `Φ(μ)` at `y > 0` through the S-transform
/// characterisation, by monotone bisection of `1/S(x−1) = y` on `(0, 1)`.
pub fn lln_cdf_from_s(s: &SExpr, y: f64) -> Result<f64> {
    if y <= 0.0 {
        return Ok(0.0);
    }
    let level = |x: f64| -> Result<f64> {
        let v = s.eval(x - 1.0)?;
        if v.im.abs() > 1e-10 * (1.0 + v.norm()) || v.re <= 0.0 {
            return Err(Error::numerical(
                "S-transform not positive real on (−1, 0); the limit law needs a law on [0, ∞)",
            ));
        }
        Ok(1.0 / v.re)
    };
    // 1/S(x−1) is increasing in x for laws on [0, ∞)
    let mut lo = 1e-14;
    let mut hi = 1.0 - 1e-14;
    let f_lo = level(lo)?;
    let f_hi = level(hi)?;
    if y <= f_lo {
        return Ok(0.0);
    }
    if y >= f_hi {
        return Ok(1.0);
    }
    if f_lo >= f_hi {
        return Err(Error::numerical("quantile map is not increasing"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if level(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Distribution function of `Φ(μ)` for a catalog measure.
pub fn lln_cdf(mu: &CatalogMeasure, y: f64) -> Result<f64> {
    lln_cdf_from_s(&mu.s_expr()?, y)
}

/// Result of a Monte Carlo check of the Pareto identity
/// `Φ(μ ⊠ b_{1/2,1}) = μ ⊛ Pa(1)`.
#[derive(Debug, Clone)]
pub struct LlnMcReport {
    pub ks_statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    pub seed: u64,
}

/// Sample `μ ⊛ Pa(1)` and compare against the closed distribution function
/// of `Φ(μ ⊠ b_{1/2,1})` obtained through the S-transform route.
pub fn lln_identity_mc(
    mu: &CatalogMeasure,
    n: usize,
    seed: u64,
    q: &QuadSpec,
) -> Result<LlnMcReport> {
    let m = catalog_to_measure(mu)?;
    let pareto = Measure::family(crate::measures::Family::Pareto { r: 1.0 })?;
    let product = m.classical_mult(&pareto, q)?;
    let batch = sampler::sample_measure(&product, n, seed, q)?;
    let s = mu
        .s_expr()?
        .product(&CatalogMeasure::BooleanStable(0.5, 1.0).s_expr()?);
    ks_against_lln_cdf(&batch, &s, n, seed)
}

/// The variant with a general index: `Φ(b_{α,1})` against samples of
/// `b_{α/(1−α),1}·Pa(1)`, for `α ≤ 1/2`.
pub fn lln_identity_mc_boolean(
    alpha: f64,
    n: usize,
    seed: u64,
    q: &QuadSpec,
) -> Result<LlnMcReport> {
    if !(0.0 < alpha && alpha <= 0.5) {
        return Err(Error::domain("the Pareto identity in this form needs α ≤ 1/2"));
    }
    let beta_law = Measure::boolean_stable(alpha / (1.0 - alpha), 1.0)?;
    let pareto = Measure::family(crate::measures::Family::Pareto { r: 1.0 })?;
    let product = beta_law.classical_mult(&pareto, q)?;
    let batch = sampler::sample_measure(&product, n, seed, q)?;
    let s = CatalogMeasure::BooleanStable(alpha, 1.0).s_expr()?;
    ks_against_lln_cdf(&batch, &s, n, seed)
}

fn ks_against_lln_cdf(
    batch: &SampleBatch,
    s: &SExpr,
    n: usize,
    seed: u64,
) -> Result<LlnMcReport> {
    // tabulate the CDF once on the sample range, then interpolate
    let lo = batch.values.iter().cloned().find(|&v| v > 0.0).unwrap_or(1e-12).max(1e-12);
    let hi = batch.values[batch.values.len() - 1].max(lo * 2.0);
    let nodes = 4000usize;
    let xs: Vec<f64> = (0..nodes)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (nodes - 1) as f64).exp())
        .collect();
    let cums: Result<Vec<f64>> = xs.iter().map(|&x| lln_cdf_from_s(s, x)).collect();
    let cums = cums?;
    let cdf = move |x: f64| -> f64 {
        if x <= xs[0] {
            return cums[0];
        }
        if x >= xs[nodes - 1] {
            return cums[nodes - 1];
        }
        let i = xs.partition_point(|&v| v < x);
        let (x0, x1, c0, c1) = (xs[i - 1], xs[i], cums[i - 1], cums[i]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    };
    let ks = sampler::ks_stat(batch, &cdf);
    let threshold = 0.01f64.max(sampler::ks_critical(n, 1e-3));
    Ok(LlnMcReport { ks_statistic: ks.statistic, threshold, pass: ks.statistic <= threshold, samples: n, seed })
}

/// A catalog measure realised as a samplable [`Measure`].
pub fn catalog_to_measure(mu: &CatalogMeasure) -> Result<Measure> {
    Ok(match mu {
        CatalogMeasure::Dirac(a) => Measure::dirac(*a),
        CatalogMeasure::BooleanStable(alpha, rho) => Measure::boolean_stable(*alpha, *rho)?,
        CatalogMeasure::FreeStable(alpha, rho) => {
            Measure::family(crate::measures::Family::FreeStable { alpha: *alpha, rho: *rho })?
        }
        CatalogMeasure::MpPower(s) if (*s - 1.0).abs() < 1e-14 => {
            Measure::family(crate::measures::Family::MarchenkoPastur)?
        }
        CatalogMeasure::Scaled(k, inner) => catalog_to_measure(inner)?.dilate(*k)?,
        CatalogMeasure::Inverse(inner) => catalog_to_measure(inner)?.invert()?,
        other => {
            return Err(Error::unsupported(format!(
                "no sampling representation for the catalog measure {other:?}"
            )))
        }
    })
}

// ---------------------------------------------------------------------------
// Explicit densities of index-1/2 mixtures
// ---------------------------------------------------------------------------

/// Density of the mixing companion `τ` of the generalized beta law: the
/// boundary value `(1/π)·x^{α−1}·R(x)^{−1/β}·sin(απ + φ(x)/β)` where
/// `R e^{iφ} = 1 + x^{αβ} e^{−iαβπ}`.
pub fn gb2_tau_density(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    validate_gb2(alpha, beta)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let ab = alpha * beta;
    let w = 1.0 + Complex64::from_polar(x.powf(ab), -ab * PI);
    let r = w.norm();
    let phi = w.im.atan2(w.re);
    Ok((x.powf(alpha - 1.0) * r.powf(-1.0 / beta) * (alpha * PI + phi / beta).sin() / PI).max(0.0))
}

fn validate_gb2(alpha: f64, beta: f64) -> Result<()> {
    if !(0.5 < alpha && alpha <= 1.0) {
        return Err(Error::domain("generalized beta mixture needs α in (1/2, 1]"));
    }
    if !(beta > 0.0 && alpha * beta <= 1.0 + 1e-12) {
        return Err(Error::domain("generalized beta mixture needs αβ in (0, 1]"));
    }
    Ok(())
}

/// Unnormalised target density `x^{α−3/2}/(x^{αβ}+1)^{1/β}`.
pub fn gb2_target_unnormalised(alpha: f64, beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    x.powf(alpha - 1.5) / (x.powf(alpha * beta) + 1.0).powf(1.0 / beta)
}

/// Report of the generalized-beta reconstruction check.
#[derive(Debug, Clone)]
pub struct Gb2Report {
    /// normalising constant of the target density
    pub c_target: f64,
    /// normalising constant of the mixing law `c·y^{−1/2}τ(dy)`
    pub c_mixing: f64,
    /// worst relative error over the probe grid
    pub max_rel_err: f64,
}

/// Verify that the index-1/2 mixture of `c·y^{−1/2}τ(dy)` reproduces the
/// generalized beta density on the probe grid (nodes near `x = 1` excluded
/// when `αβ = 1`, where the boundary value is discontinuous).
pub fn gb2_mixture_check(
    alpha: f64,
    beta: f64,
    grid: &[f64],
    q: &QuadSpec,
) -> Result<Gb2Report> {
    validate_gb2(alpha, beta)?;
    let tail_zero = alpha - 1.5; // of y^{−1/2}τ(y)
    let tail_inf = -1.5 - alpha * beta;
    let mixing_mass = integrate_positive(
        &|y| y.powf(-0.5) * gb2_tau_density(alpha, beta, y).unwrap_or(0.0),
        tail_zero,
        tail_inf,
        q,
    )?;
    let c_mixing = 1.0 / mixing_mass;
    let target_mass = integrate_positive(
        &|x| gb2_target_unnormalised(alpha, beta, x),
        alpha - 1.5,
        alpha - 1.5 - alpha, // x^{α−3/2}·x^{−α} for large x
        q,
    )?;
    let c_target = 1.0 / target_mass;

    let singular = (alpha * beta - 1.0).abs() < 1e-12;
    let mut max_rel = 0.0f64;
    for &x in grid {
        if x <= 0.0 || (singular && (x - 1.0).abs() < 1e-3) {
            continue;
        }
        // mixture density: (x^{−1/2}/π) ∫ √y/(x+y) · c·y^{−1/2} τ(y) dy
        let integral = integrate_positive(
            &|y| gb2_tau_density(alpha, beta, y).unwrap_or(0.0) / (x + y),
            alpha - 1.0,
            -2.0 - alpha * beta,
            q,
        )?;
        let got = c_mixing * x.powf(-0.5) / PI * integral;
        let expect = c_target * gb2_target_unnormalised(alpha, beta, x);
        let rel = (got - expect).abs() / expect;
        max_rel = max_rel.max(rel);
    }
    Ok(Gb2Report { c_target, c_mixing, max_rel_err: max_rel })
}

fn integrate_positive(
    f: &dyn Fn(f64) -> f64,
    tail_zero: f64,
    tail_inf: f64,
    q: &QuadSpec,
) -> Result<f64> {
    let head = if tail_zero < -1e-3 {
        quad::integrate_power_zero(|x| f(x), 1.0, tail_zero, q)?
    } else {
        quad::integrate_finite(|x| f(x), 0.0, 1.0, q)?
    };
    let tail = quad::integrate_power_tail(|x| f(x), 1.0, tail_inf.min(-1.0001), q)?;
    Ok(head + tail)
}

/// Residual of the closed shifted-beta integral
/// `∫₁^∞ (t−1)^a / (t(x+t)) dt = πa/sin(πa)·((1+x)^a−1)/(ax)`.
pub fn shifted_beta_integral_residual(a: f64, x: f64, q: &QuadSpec) -> Result<f64> {
    if !(-1.0 < a && a < 1.0) {
        return Err(Error::domain("the integral identity holds for a in (−1, 1)"));
    }
    if x <= 0.0 {
        return Err(Error::domain("x must be positive"));
    }
    // substitute u = (t−1)^{1+a} to flatten the endpoint singularity
    let k = 1.0 / (1.0 + a);
    let lhs_head = quad::integrate_finite(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let t = 1.0 + u.powf(k);
            k * 1.0 / (t * (x + t))
        },
        0.0,
        1.0,
        q,
    )?;
    let lhs_tail = quad::integrate_power_tail(
        |t: f64| (t - 1.0).powf(a) / (t * (x + t)),
        2.0,
        a - 2.0,
        q,
    )?;
    let mid = quad::integrate_finite(|t: f64| (t - 1.0).powf(a) / (t * (x + t)), 2.0, 2.0, q)?;
    let _ = mid;
    let lhs = lhs_head + lhs_tail;
    let rhs = if a.abs() < 1e-12 {
        // the a → 0 limit: ∫ dt/(t²(x+t)/...)·: ((1+x)^a−1)/a → ln(1+x)
        (1.0 + x).ln() / x
    } else {
        PI * a / (PI * a).sin() * (((1.0 + x).powf(a)) - 1.0) / (a * x)
    };
    Ok((lhs - rhs).abs())
}

/// Normalised density `c_a·((1+x)^a − 1)/(a·x^{3/2})` on `(0, ∞)`,
/// `a ∈ (−1, 1/2)`, with the `a = 0` case read as `c₀·ln(1+x)/x^{3/2}`.
pub fn shifted_beta_mixture_density(a: f64, x: f64, q: &QuadSpec) -> Result<f64> {
    let c = shifted_beta_constant(a, q)?;
    Ok(c * shifted_beta_unnormalised(a, x))
}

/// The unnormalised form, evaluated stably through `expm1` so the `a → 0`
/// limit is seamless.
pub fn shifted_beta_unnormalised(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let core = if a.abs() < 1e-12 {
        (1.0 + x).ln()
    } else {
        (a * (1.0 + x).ln()).exp_m1() / a
    };
    core / x.powf(1.5)
}

/// Normalising constant `c_a` by quadrature.
pub fn shifted_beta_constant(a: f64, q: &QuadSpec) -> Result<f64> {
    if !(-1.0 < a && a < 0.5) {
        return Err(Error::domain("the shifted-beta mixture needs a in (−1, 1/2)"));
    }
    // near 0 the density behaves like x^{−1/2}; at ∞ like x^{a−3/2} (or
    // ln(x)·x^{−3/2} at a = 0, which the generic tail map still handles)
    let tail_inf = if a > 0.0 { a - 1.5 } else { -1.49 };
    let mass = integrate_positive(&|x| shifted_beta_unnormalised(a, x), -0.5, tail_inf, q)?;
    Ok(1.0 / mass)
}

/// Density `ln(1 + 1/x)/(2π√x)` of the mixture of the uniform-root beta law
/// `1/(2√t)` on `(0,1)` over the index-1/2 Boolean stable law.
pub fn beta_log_mixture_density(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (1.0 + 1.0 / x).ln() / (2.0 * PI * x.sqrt())
}

/// Worst relative error of the quadrature reconstruction of
/// [`beta_log_mixture_density`] over the grid.
pub fn beta_log_mixture_check(grid: &[f64], q: &QuadSpec) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in grid {
        if x <= 0.0 {
            continue;
        }
        // (x^{−1/2}/π) ∫₀¹ (√t/(x+t)) · 1/(2√t) dt
        let integral = quad::integrate_finite(|t: f64| 0.5 / (x + t), 0.0, 1.0, q)?;
        let got = x.powf(-0.5) / PI * integral;
        let expect = beta_log_mixture_density(x);
        worst = worst.max((got - expect).abs() / expect);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn limit_density_values() {
        // β = 1 at x = 1: 1/4
        assert_relative_eq!(lln_density_boolean(0.5, 1.0).unwrap(), 0.25, max_relative = 1e-15);
        // integrates to 1
        let mass = quad::integrate_power_zero(|x| gb2_limit_density(0.6, x), 1.0, -0.4, &q())
            .unwrap()
            + quad::integrate_power_tail(|x| gb2_limit_density(0.6, x), 1.0, -1.6, &q()).unwrap();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn lln_cdf_closed_form_route() {
        // Φ(b_{α,1}) has CDF x^β/(1+x^β); the S-inversion must agree
        for &alpha in &[1.0 / 3.0, 0.5, 0.6] {
            let beta = alpha / (1.0 - alpha);
            let cat = CatalogMeasure::BooleanStable(alpha, 1.0);
            for k in 0..20 {
                let x = 0.05 * (100.0f64 / 0.05).powf(k as f64 / 19.0);
                let got = lln_cdf(&cat, x).unwrap();
                let expect = x.powf(beta) / (1.0 + x.powf(beta));
                assert!(
                    (got - expect).abs() <= 1e-8,
                    "α = {alpha}, x = {x}: {got} vs {expect}"
                );
            }
        }
        // point masses map to point masses: Φ(δ_a) = δ_a
        let cat = CatalogMeasure::Dirac(2.0);
        assert_eq!(lln_cdf(&cat, 1.9).unwrap(), 0.0);
        assert_eq!(lln_cdf(&cat, 2.1).unwrap(), 1.0);
    }

    #[test]
    fn lln_cdf_is_monotone() {
        let cat = CatalogMeasure::MpPower(1.0);
        let mut prev = -1.0;
        for k in 0..30 {
            let x = 0.01 * (1000.0f64).powf(k as f64 / 29.0);
            let v = lln_cdf(&cat, x).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn derivative_of_cdf_matches_density() {
        let cat = CatalogMeasure::BooleanStable(0.4, 1.0);
        for &x in &[0.3, 1.0, 2.5] {
            let h = 1e-5 * x;
            let d = (lln_cdf(&cat, x + h).unwrap() - lln_cdf(&cat, x - h).unwrap()) / (2.0 * h);
            let expect = lln_density_boolean(0.4, x).unwrap();
            assert_relative_eq!(d, expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn pareto_identity_point_mass() {
        // μ = δ₁: Φ(b_{1/2,1}) = Pa(1), checked by KS at n = 1e5
        let rep = lln_identity_mc(&CatalogMeasure::Dirac(1.0), 100_000, 71, &q()).unwrap();
        assert!(rep.pass, "KS = {}", rep.ks_statistic);
        // seed determinism
        let rep2 = lln_identity_mc(&CatalogMeasure::Dirac(1.0), 100_000, 71, &q()).unwrap();
        assert_eq!(rep.ks_statistic, rep2.ks_statistic);
    }

    #[test]
    fn pareto_identity_boolean_index_third() {
        let rep = lln_identity_mc_boolean(1.0 / 3.0, 100_000, 73, &q()).unwrap();
        assert!(rep.pass, "KS = {}", rep.ks_statistic);
    }

    #[test]
    fn consistency_chain_at_half() {
        // three routys to the same law: the closed limit density at β = 1,
        // the Pareto density, and the S-inversion CDF derivative
        let qq = q();
        let _ = qq;
        for &x in &[0.2, 1.0, 3.0, 8.0] {
            let d1 = gb2_limit_density(1.0, x);
            let d2 = crate::stable::pareto_density(1.0, x).unwrap();
            assert_relative_eq!(d1, d2, max_relative = 1e-14);
            let cat = CatalogMeasure::BooleanStable(0.5, 1.0);
            let h = 1e-5 * x;
            let d3 = (lln_cdf(&cat, x + h).unwrap() - lln_cdf(&cat, x - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(d3, d1, max_relative = 1e-7);
        }
    }

    #[test]
    fn gb2_tau_behaviour_near_zero() {
        // τ density behaves as sin(απ)/π · x^{α−1} as x ↓ 0
        // corrections enter at order x^{αβ}, so probe deep into the tail
        let (alpha, beta) = (0.8, 1.0);
        for k in 4..=6 {
            let x = 10f64.powi(-k);
            let got = gb2_tau_density(alpha, beta, x).unwrap();
            let expect = (alpha * PI).sin() / PI * x.powf(alpha - 1.0);
            assert_relative_eq!(got, expect, max_relative = 1e-2);
        }
    }

    #[test]
    fn gb2_reconstruction() {
        let grid: Vec<f64> = (0..25)
            .map(|i| 0.02 * (200.0f64 / 0.02).powf(i as f64 / 24.0))
            .collect();
        let rep = gb2_mixture_check(0.8, 1.0, &grid, &q()).unwrap();
        assert!(rep.max_rel_err <= 1e-4, "rel err {}", rep.max_rel_err);
    }

    #[test]
    fn shifted_beta_residual_and_continuity() {
        let qq = q();
        for &(a, x) in &[(0.3, 2.0), (-0.3, 2.0), (0.45, 0.7), (-0.8, 5.0)] {
            let res = shifted_beta_integral_residual(a, x, &qq).unwrap();
            assert!(res <= 1e-8, "residual {res} at (a,x) = ({a},{x})");
        }
        // a → 0 continuity of the density toward the logarithmic form
        for &x in &[0.5, 2.0, 10.0] {
            let near = shifted_beta_unnormalised(1e-9, x);
            let log_form = (1.0 + x).ln() / x.powf(1.5);
            assert_relative_eq!(near, log_form, max_relative = 1e-6);
        }
    }

    #[test]
    fn shifted_beta_normalises() {
        let qq = q();
        for &a in &[-0.5, 0.0, 0.3] {
            let c = shifted_beta_constant(a, &qq).unwrap();
            assert!(c.is_finite() && c > 0.0);
            let mass = integrate_positive(
                &|x| shifted_beta_mixture_density(a, x, &qq).unwrap(),
                -0.5,
                if a > 0.0 { a - 1.5 } else { -1.49 },
                &qq,
            )
            .unwrap();
            assert_relative_eq!(mass, 1.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn beta_log_reconstruction() {
        let grid: Vec<f64> = (0..20)
            .map(|i| 0.05 * (100.0f64 / 0.05).powf(i as f64 / 19.0))
            .collect();
        let worst = beta_log_mixture_check(&grid, &q()).unwrap();
        assert!(worst <= 1e-4, "rel err {worst}");
    }
}
