//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 15-point Kronrod rule with embedded 7-point Gauss rule drives an
//! adaptive bisection of the worst interval until the global error estimate
//! meets the requested tolerance.  Infinite endpoints are mapped to (0, 1]
//! with the substitution `x = u/(1−u)` before subdivision starts.
//!
//! Integrands may be real- or complex-valued; the kernel is generic over a
//! small vector-space trait so the Cauchy-transform quadratures reuse the
//! same driver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target (scaled by the current estimate of |I|).
    pub rel_tol: f64,
    /// Maximum number of interval subdivisions.
    pub max_subdiv: usize,
    /// Clustering parameter of the map used for unbounded tails; the
    /// substitution is `x = a + t·u/(1−u)` with this `t`.
    pub tail_scale: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { abs_tol: 1e-12, rel_tol: 1e-10, max_subdiv: 4000, tail_scale: 1.0 }
    }
}

impl QuadSpec {
    pub fn with_tols(abs_tol: f64, rel_tol: f64) -> Self {
        QuadSpec { abs_tol, rel_tol, ..Default::default() }
    }

    /// Spec with both tolerances scaled by `f` (used by refinement studies).
    pub fn scaled(&self, f: f64) -> Self {
        QuadSpec { abs_tol: self.abs_tol * f, rel_tol: self.rel_tol * f, ..*self }
    }
}

/// Values the quadrature kernel can accumulate.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

// Kronrod-15 nodes on [-1, 1] (positive half; the rule is symmetric) and the
// matching weights, with the embedded Gauss-7 weights on the odd nodes.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kron = T::zero();
    let mut gauss = T::zero();
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let contrib = if x == 0.0 {
            f(mid)
        } else {
            f(mid - half * x).add(f(mid + half * x))
        };
        kron = kron.add(contrib.scale(wk));
        if i % 2 == 1 {
            gauss = gauss.add(contrib.scale(WG[i / 2]));
        }
    }
    let kron = kron.scale(half);
    let gauss = gauss.scale(half);
    // |K15 − G7| as the (conservative, scale-covariant) panel error.
    let err = kron.add(gauss.scale(-1.0)).magnitude();
    (kron, err)
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate_finite<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate_finite: endpoints must be finite"));
    }
    let (value, error) = adapt(&mut f, a, b, spec)?;
    let _ = error;
    Ok(value)
}

fn adapt<T: QuadValue>(
    f: &mut impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<(T, f64)> {
    let (v0, e0) = gk15(f, a, b);
    let mut panels = vec![Panel { a, b, value: v0, error: e0 }];
    for _ in 0..spec.max_subdiv {
        let total: f64 = panels.iter().map(|p| p.value.magnitude()).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= spec.abs_tol.max(spec.rel_tol * total) {
            let mut acc = T::zero();
            for p in &panels {
                acc = acc.add(p.value);
            }
            return Ok((acc, err));
        }
        // Split the worst panel.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // Interval no longer splittable in f64; accept its estimate.
            let (v, _) = gk15(f, a, b);
            panels.push(Panel { a, b, value: v, error: 0.0 });
            continue;
        }
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        panels.push(Panel { a, b: m, value: v1, error: e1 });
        panels.push(Panel { a: m, b, value: v2, error: e2 });
    }
    let mut acc = T::zero();
    let mut err = 0.0;
    for p in &panels {
        acc = acc.add(p.value);
        err += p.error;
    }
    Err(Error::numerical(format!(
        "quadrature did not converge after {} subdivisions; best estimate magnitude {:.6e}, error bound {:.3e}",
        spec.max_subdiv,
        acc.magnitude(),
        err
    )))
}

/// Adaptive integration over `[a, b]` where either endpoint may be infinite.
pub fn integrate<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<T> {
    let t = spec.tail_scale;
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, spec),
        (true, false) => {
            // x = a + t u/(1−u), dx = t du/(1−u)²
            integrate_finite(
                |u| {
                    let om = 1.0 - u;
                    if om <= 0.0 {
                        return T::zero();
                    }
                    f(a + t * u / om).scale(t / (om * om))
                },
                0.0,
                1.0,
                spec,
            )
        }
        (false, true) => integrate_finite(
            |u| {
                let om = 1.0 - u;
                if om <= 0.0 {
                    return T::zero();
                }
                f(b - t * u / om).scale(t / (om * om))
            },
            0.0,
            1.0,
            spec,
        ),
        (false, false) => {
            // x = ±t u/(1−u) over the two half-lines
            let upper = integrate_finite(
                |u| {
                    let om = 1.0 - u;
                    if om <= 0.0 {
                        return T::zero();
                    }
                    f(t * u / om).scale(t / (om * om))
                },
                0.0,
                1.0,
                spec,
            )?;
            let lower = integrate_finite(
                |u| {
                    let om = 1.0 - u;
                    if om <= 0.0 {
                        return T::zero();
                    }
                    f(-t * u / om).scale(t / (om * om))
                },
                0.0,
                1.0,
                spec,
            )?;
            Ok(upper.add(lower))
        }
    }
}

/// Integration of `g(x) ~ C·x^e` near `x = 0` over `(0, c]`, flattened by the
/// substitution `x = u^{1/(1+e)}`.  Requires `e > −1`.
pub fn integrate_power_zero<T: QuadValue>(
    mut g: impl FnMut(f64) -> T,
    c: f64,
    e: f64,
    spec: &QuadSpec,
) -> Result<T> {
    if e <= -1.0 {
        return Err(Error::domain(format!("non-integrable singularity exponent {e} at 0")));
    }
    let k = 1.0 / (1.0 + e);
    let umax = c.powf(1.0 + e);
    integrate_finite(
        |u| {
            if u <= 0.0 {
                return T::zero();
            }
            let x = u.powf(k);
            g(x).scale(k * u.powf(k - 1.0))
        },
        0.0,
        umax,
        spec,
    )
}

/// Integration of `g(x) ~ C·x^e` as `x → ∞` over `[c, ∞)` with `e < −1`,
/// flattened by `x = c·t^{−1/(−e−1)}`.
pub fn integrate_power_tail<T: QuadValue>(
    mut g: impl FnMut(f64) -> T,
    c: f64,
    e: f64,
    spec: &QuadSpec,
) -> Result<T> {
    if e >= -1.0 {
        return Err(Error::domain(format!("non-integrable tail exponent {e} at infinity")));
    }
    if c <= 0.0 {
        return Err(Error::domain("power tail map requires c > 0"));
    }
    let m = -1.0 / (e + 1.0); // m > 0
    integrate_finite(
        |tv| {
            if tv <= 0.0 {
                return T::zero();
            }
            let x = c * tv.powf(-m);
            g(x).scale(c * m * tv.powf(-m - 1.0))
        },
        0.0,
        1.0,
        spec,
    )
}

/// Richardson extrapolation to `h → 0` of values sampled at a step sequence
/// `h, h/2, h/4, …` of a quantity with a polynomial expansion in `h`.
///
/// Returns the extrapolated value together with the magnitude of the last
/// diagonal correction, which serves as an error estimate.
pub fn richardson_zero_limit(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 1);
    let mut table = vec![values.to_vec()];
    for j in 1..n {
        let prev = &table[j - 1];
        let mut row = Vec::with_capacity(n - j);
        let factor = 2f64.powi(j as i32);
        for k in 0..n - j {
            row.push((factor * prev[k + 1] - prev[k]) / (factor - 1.0));
        }
        table.push(row);
    }
    let best = table[n - 1][0];
    let err = if n >= 2 { (best - table[n - 2][1]).abs() } else { f64::INFINITY };
    (best, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let spec = QuadSpec::default();
        let v = integrate_finite(|x| x * x, 0.0, 1.0, &spec).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_over_line() {
        let spec = QuadSpec::default();
        let v = integrate(|x: f64| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &spec).unwrap();
        assert_relative_eq!(v, PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn pareto_mean() {
        // ∫ 2x(1+x)^{-3} dx over (0, ∞) = 1
        let spec = QuadSpec::default();
        let v = integrate(|x: f64| 2.0 * x * (1.0 + x).powi(-3), 0.0, f64::INFINITY, &spec).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn complex_integrand() {
        let spec = QuadSpec::default();
        let z = Complex64::new(0.0, 1.0);
        // ∫₀¹ dx/(i − x) = −ln(i−1) + ln(i) = ln(i/(i−1))
        let v = integrate_finite(|x| (z - x).inv(), 0.0, 1.0, &spec).unwrap();
        let expect = (z / (z - 1.0)).ln();
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn flattened_endpoint_singularity() {
        // ∫₀¹ x^{-0.7} dx = 1/0.3
        let spec = QuadSpec::default();
        let v = integrate_power_zero(|x| x.powf(-0.7), 1.0, -0.7, &spec).unwrap();
        assert_relative_eq!(v, 1.0 / 0.3, max_relative = 1e-11);
    }

    #[test]
    fn flattened_power_tail() {
        // ∫₁^∞ x^{-1.3} dx = 1/0.3
        let spec = QuadSpec::default();
        let v = integrate_power_tail(|x| x.powf(-1.3), 1.0, -1.3, &spec).unwrap();
        assert_relative_eq!(v, 1.0 / 0.3, max_relative = 1e-11);
    }

    #[test]
    fn nonconvergence_reports_budget() {
        let spec = QuadSpec { max_subdiv: 3, ..Default::default() };
        let r = integrate_finite(|x: f64| (1e6 * x).sin() / (x.abs() + 1e-12).sqrt(), 0.0, 1.0, &spec);
        assert!(r.is_err());
    }
}
