//! Free and classical infinite-divisibility analysis.
//!
//! A probability measure is freely infinitely divisible (FID) exactly when
//! `−φ` extends to a Pick function — `Im φ(z) ≤ 0` throughout the upper
//! half-plane.  For scale mixtures of Boolean stable laws the FID region is
//! known exactly: every mixture is FID for `α ≤ 1/2`, and for
//! `α ∈ (1/2, 2/3]` precisely when `ρ ∈ [2−1/α, 1/α−1]`; outside these
//! ranges some mixture fails, and at `α = 1` the Cauchy law itself is FID
//! while its nontrivial mixtures are not.
//!
//! The two-parameter family `λ_{t,ρ} = t·δ₀ + (1−t)·c_ρ` makes the last
//! point quantitative: its Voiculescu transform is the closed expression
//!
//! ```text
//!   φ(z) = ½(−z − e^{iρπ} + √(z² + 2(2t−1)e^{iρπ}z + e^{2iρπ}))
//! ```
//!
//! with the square root on the `(0, 2π)` branch, it is FID iff `t = 0` or
//! `t ≥ 1/2` with `|cos ρπ| ≤ 2t−1`, and its divisibility indicator is
//! `t/(1−t)·tan²(ρπ/2)` for `ρ ≤ 1/2` (mirrored for `ρ ≥ 1/2`).
//!
//! This module also houses the Fourier-zero counterexample showing that
//! mixtures of the asymmetric Cauchy family are not even classically
//! infinitely divisible, the mode-0 unimodality test used for the free
//! Jurek class together with its threshold constants `α₀` (the root of
//! `sin πx = x`) and `α₁ = α₀/(1+α₀)`, and a finite-difference complete
//! monotonicity heuristic.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::quad::QuadSpec;
use crate::sectors::{sector_pow, Sector};
use crate::stable::AdmissiblePair;
use crate::transforms;

/// Classification of `(α, ρ)` by whether every scale mixture of `b_{α,ρ}`
/// is freely infinitely divisible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FidRegion {
    /// every mixture FID
    Fid,
    /// some mixture is not FID
    NotFid,
    /// within numerical slack of the region boundary
    Boundary,
    /// α = 1: the Cauchy law itself is FID but its nontrivial mixtures
    /// are not
    CauchyLawOnly,
}

/// The FID region of scale mixtures of `b_{α,ρ}`.
pub fn fid_region_boolean(pair: AdmissiblePair) -> FidRegion {
    const EDGE: f64 = 1e-9;
    let (alpha, rho) = (pair.alpha(), pair.rho());
    if (alpha - 1.0).abs() < EDGE {
        return FidRegion::CauchyLawOnly;
    }
    if alpha <= 0.5 {
        return FidRegion::Fid;
    }
    if alpha <= 2.0 / 3.0 + EDGE {
        let lo = 2.0 - 1.0 / alpha;
        let hi = 1.0 / alpha - 1.0;
        if (rho - lo).abs() < EDGE || (rho - hi).abs() < EDGE || (alpha - 2.0 / 3.0).abs() < EDGE {
            return FidRegion::Boundary;
        }
        if rho > lo && rho < hi {
            return FidRegion::Fid;
        }
    }
    FidRegion::NotFid
}

/// Probe grid for Pick-property scans: a tensor of arguments × log-spaced
/// moduli on the upper half-plane, with arguments clustered toward the real
/// axis where violations of borderline laws concentrate.
#[derive(Debug, Clone)]
pub struct PickGrid {
    pub n_args: usize,
    pub n_moduli: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for PickGrid {
    fn default() -> Self {
        PickGrid { n_args: 20, n_moduli: 10, r_min: 0.1, r_max: 100.0 }
    }
}

impl PickGrid {
    pub fn points(&self) -> Vec<Vec<Complex64>> {
        let mut rings = Vec::with_capacity(self.n_moduli);
        for k in 0..self.n_moduli {
            let f = (k as f64 + 0.5) / self.n_moduli as f64;
            let r = (self.r_min.ln() + (self.r_max / self.r_min).ln() * f).exp();
            let mut ring = Vec::with_capacity(self.n_args);
            for j in 0..self.n_args {
                // cosine clustering: dense near the real axis on both sides
                let u = (j as f64 + 0.5) / self.n_args as f64;
                let theta = PI / 2.0 * (1.0 - (PI * u).cos());
                ring.push(Complex64::from_polar(r, theta));
            }
            rings.push(ring);
        }
        rings
    }
}

/// Outcome of a Pick-property scan of `φ` over the grid.
///
/// A measure fails to be FID in one of two observable ways: the continued
/// transform shows `Im φ > 0` somewhere, or the continuation is not
/// single-valued on ℂ⁺ — adjacent probe rays land on different sheets and
/// the scanned values jump across the branch cut.  Both are confirmed
/// violations; the pointwise criterion alone cannot see branch points whose
/// two sheets both keep `Im φ ≤ 0`.
#[derive(Debug, Clone)]
pub struct PickScanReport {
    /// largest observed `Im φ`
    pub max_im_phi: f64,
    /// confirmed pointwise violations (adjacent pairs above tolerance)
    pub violations: Vec<Complex64>,
    /// confirmed sheet jumps between adjacent probe points (midpoints of
    /// the offending pairs)
    pub jumps: Vec<Complex64>,
    /// per-point evaluation failures
    pub failures: Vec<(Complex64, String)>,
    /// total Newton continuation steps spent by the numeric φ, when any
    pub continuation_steps: usize,
    /// true when no confirmed violation of either kind was found
    pub pick_ok: bool,
}

const PICK_TOL: f64 = 1e-8;

/// Scan `Im φ` over the grid.  A violation is confirmed when two adjacent
/// grid points exceed the tolerance, or when an isolated exceedance is
/// reproduced at a midpoint next to it (which filters single-point
/// numerical noise but keeps thin genuine violation regions).
pub fn pick_scan(
    phi: &dyn Fn(Complex64) -> Result<(Complex64, usize)>,
    grid: &PickGrid,
) -> PickScanReport {
    let rings = grid.points();
    let mut im = vec![vec![f64::NEG_INFINITY; grid.n_args]; grid.n_moduli];
    let mut values = vec![vec![None::<Complex64>; grid.n_args]; grid.n_moduli];
    let mut report = PickScanReport {
        max_im_phi: f64::NEG_INFINITY,
        violations: Vec::new(),
        jumps: Vec::new(),
        failures: Vec::new(),
        continuation_steps: 0,
        pick_ok: true,
    };
    for (k, ring) in rings.iter().enumerate() {
        for (j, &z) in ring.iter().enumerate() {
            match phi(z) {
                Ok((v, steps)) => {
                    im[k][j] = v.im;
                    values[k][j] = Some(v);
                    report.continuation_steps += steps;
                    if v.im > report.max_im_phi {
                        report.max_im_phi = v.im;
                    }
                }
                Err(e) => report.failures.push((z, e.to_string())),
            }
        }
    }
    // Sheet-jump detection per ring: a pair of neighbouring arguments whose
    // φ values differ by far more than the ring's typical increment marks a
    // branch cut crossing between them.  Confirm each suspect by checking
    // that the midpoint sides with one endpoint and still jumps to the
    // other.
    for (k, ring) in rings.iter().enumerate() {
        let mut diffs: Vec<f64> = Vec::new();
        for j in 0..grid.n_args - 1 {
            if let (Some(a), Some(b)) = (values[k][j], values[k][j + 1]) {
                diffs.push((a - b).norm());
            }
        }
        if diffs.len() < 4 {
            continue;
        }
        let mut sorted = diffs.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = sorted[sorted.len() / 2];
        let scale = rings[k][0].norm();
        let threshold = (10.0 * median).max(1e-4 * (1.0 + scale));
        for j in 0..grid.n_args - 1 {
            if let (Some(a), Some(b)) = (values[k][j], values[k][j + 1]) {
                let d = (a - b).norm();
                if d > threshold && d > 8.0 * median {
                    let mid = (ring[j] + ring[j + 1]) / 2.0;
                    if let Ok((vm, _)) = phi(mid) {
                        // genuine cut: the midpoint agrees with one side and
                        // still jumps to the other
                        let da = (vm - a).norm();
                        let db = (vm - b).norm();
                        if da.min(db) < 0.25 * d && da.max(db) > 0.5 * d {
                            report.jumps.push(mid);
                        }
                    }
                }
            }
        }
    }
    let mut confirmed: Vec<Complex64> = Vec::new();
    for k in 0..grid.n_moduli {
        for j in 0..grid.n_args {
            if im[k][j] <= PICK_TOL {
                continue;
            }
            let neighbor_violates = (j > 0 && im[k][j - 1] > PICK_TOL)
                || (j + 1 < grid.n_args && im[k][j + 1] > PICK_TOL)
                || (k > 0 && im[k - 1][j] > PICK_TOL)
                || (k + 1 < grid.n_moduli && im[k + 1][j] > PICK_TOL);
            if neighbor_violates {
                confirmed.push(rings[k][j]);
                continue;
            }
            // isolated exceedance: reproduce at midpoints before confirming
            let z = rings[k][j];
            let mut mids = Vec::new();
            if j > 0 {
                mids.push((z + rings[k][j - 1]) / 2.0);
            }
            if j + 1 < grid.n_args {
                mids.push((z + rings[k][j + 1]) / 2.0);
            }
            if k > 0 {
                mids.push((z + rings[k - 1][j]) / 2.0);
            }
            if k + 1 < grid.n_moduli {
                mids.push((z + rings[k + 1][j]) / 2.0);
            }
            if mids
                .into_iter()
                .any(|m| m.im > 0.0 && matches!(phi(m), Ok((v, _)) if v.im > PICK_TOL))
            {
                confirmed.push(z);
            }
        }
    }
    report.violations = confirmed;
    report.pick_ok = report.violations.is_empty() && report.jumps.is_empty();
    report
}

/// Pick scan of the numeric Voiculescu transform of a measure.  The
/// Boolean stable family is routed through its analytically continued `F`,
/// which follows `F⁻¹` across the real axis onto the second sheet; other
/// measures use the direct Newton inversion, whose unreachable points are
/// recorded as per-point failures.
pub fn pick_scan_measure(m: &Measure, grid: &PickGrid, q: &QuadSpec) -> PickScanReport {
    if let Measure::Family(crate::measures::Family::BooleanStable { alpha, rho }) = m {
        if let Ok(pair) = AdmissiblePair::new(*alpha, *rho) {
            let phi = move |z: Complex64| -> Result<(Complex64, usize)> {
                let v = transforms::boolean_phi_continued(pair, z)?;
                Ok((v.phi, v.continuation_steps))
            };
            return pick_scan(&phi, grid);
        }
    }
    let phi = |z: Complex64| -> Result<(Complex64, usize)> {
        let v = transforms::voiculescu_phi(m, z, q)?;
        Ok((v.phi, v.continuation_steps))
    };
    pick_scan(&phi, grid)
}

// ---------------------------------------------------------------------------
// The λ family
// ---------------------------------------------------------------------------

/// Parameters of `λ_{t,ρ} = t·δ₀ + (1−t)·c_ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    pub t: f64,
    pub rho: f64,
}

impl LambdaParams {
    pub fn new(t: f64, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain("λ parameters live in [0,1]²"));
        }
        Ok(LambdaParams { t, rho })
    }
}

/// The measure `λ_{t,ρ}` itself.
pub fn lambda_measure(p: LambdaParams) -> Result<Measure> {
    let LambdaParams { t, rho } = p;
    let base = if rho == 0.0 {
        Measure::dirac(-1.0)
    } else if rho == 1.0 {
        Measure::dirac(1.0)
    } else {
        Measure::family(crate::measures::Family::Cauchy { rho })?
    };
    if t == 0.0 {
        return Ok(base);
    }
    if t == 1.0 {
        return Ok(Measure::dirac(0.0));
    }
    if let Measure::Atomic(atoms) = &base {
        let mut out = vec![(0.0, t)];
        out.extend(atoms.iter().map(|&(x, w)| (x, w * (1.0 - t))));
        return Measure::atomic(out);
    }
    Ok(Measure::Mix(vec![(t, Measure::dirac(0.0)), (1.0 - t, base)]))
}

/// Closed η-transform of `λ_{t,ρ}`:
/// `η(z) = (t−1)·e^{iρπ}z / (1 + t·e^{iρπ}z)`.
pub fn lambda_eta(p: LambdaParams, z: Complex64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, p.rho * PI);
    (p.t - 1.0) * phase * z / (1.0 + p.t * phase * z)
}

/// Closed Voiculescu transform of `λ_{t,ρ}` on the upper half-plane, with
/// the square root taken on the `(0, 2π)` branch.
pub fn lambda_phi(p: LambdaParams, z: Complex64) -> Result<Complex64> {
    let LambdaParams { t, rho } = p;
    if !(0.0 < t && t < 1.0 && 0.0 < rho && rho < 1.0) {
        return Err(Error::domain("the closed φ needs t, ρ strictly inside (0,1)"));
    }
    let phase = Complex64::from_polar(1.0, rho * PI);
    let poly = z * z + 2.0 * (2.0 * t - 1.0) * phase * z + phase * phase;
    let root = sector_pow(poly, 0.5, Sector::cut_positive_axis()).map_err(|_| {
        Error::numerical(format!("branch failure near the zeros of the φ discriminant at z = {z}"))
    })?;
    Ok((-z - phase + root) / 2.0)
}

/// FID verdict for `λ_{t,ρ}`: `t = 0`, or `t ≥ 1/2` with
/// `|cos ρπ| ≤ 2t − 1`.
pub fn lambda_fid(p: LambdaParams) -> bool {
    if p.t == 0.0 || p.t == 1.0 {
        return true;
    }
    p.t >= 0.5 && cos_pi_abs(p.rho) <= 2.0 * p.t - 1.0
}

fn cos_pi_abs(rho: f64) -> f64 {
    if rho == 0.5 {
        0.0
    } else {
        (rho * PI).cos().abs()
    }
}

/// Free divisibility indicator of `λ_{t,ρ}`:
/// `t/(1−t)·tan²(ρπ/2)` for `ρ ≤ 1/2`, mirrored for `ρ ≥ 1/2`, and `∞`
/// for `t ∈ {0, 1}`.
pub fn lambda_indicator(p: LambdaParams) -> f64 {
    if p.t == 0.0 || p.t == 1.0 {
        return f64::INFINITY;
    }
    let r = if p.rho <= 0.5 { p.rho } else { 1.0 - p.rho };
    let tan2 = if r == 0.5 { 1.0 } else { (r * PI / 2.0).tan().powi(2) };
    p.t / (1.0 - p.t) * tan2
}

/// The indicator with the parameters given as exact fractions, so that
/// rational values like `t = 2/3, ρ = 1/2 ↦ 2` come out exactly.
pub fn lambda_indicator_exact(
    t_num: u64,
    t_den: u64,
    rho_num: u64,
    rho_den: u64,
) -> Result<f64> {
    if t_den == 0 || rho_den == 0 || t_num > t_den || rho_num > rho_den {
        return Err(Error::domain("fractions must satisfy 0 ≤ p/q ≤ 1"));
    }
    if t_num == 0 || t_num == t_den {
        return Ok(f64::INFINITY);
    }
    let ratio = t_num as f64 / (t_den - t_num) as f64;
    let rho = rho_num as f64 / rho_den as f64;
    let r = if rho <= 0.5 { rho } else { 1.0 - rho };
    let tan2 = if 2 * rho_num == rho_den || 2 * (rho_den - rho_num) == rho_den {
        1.0
    } else {
        (r * PI / 2.0).tan().powi(2)
    };
    Ok(ratio * tan2)
}

/// The Boolean power identity `λ^{⊎u} = D_a λ_{t/a, ρ}` with
/// `a = (1−t)u + t`: largest η discrepancy over a probe grid.
pub fn lambda_power_identity_residual(p: LambdaParams, u: f64) -> Result<f64> {
    let a = (1.0 - p.t) * u + p.t;
    let scaled = LambdaParams::new(p.t / a, p.rho)?;
    let mut worst: f64 = 0.0;
    for &r in &[0.05, 0.3, 1.0, 4.0, 20.0] {
        for k in 1..=4 {
            let z = Complex64::from_polar(r, -PI * k as f64 / 5.0);
            let lhs = u * lambda_eta(p, z);
            let rhs = lambda_eta(scaled, a * z);
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// The `λ^{⊎u}` law as a measure: `D_a λ_{t/a,ρ}`.
pub fn lambda_uplus_power(p: LambdaParams, u: f64) -> Result<Measure> {
    let a = (1.0 - p.t) * u + p.t;
    lambda_measure(LambdaParams::new(p.t / a, p.rho)?)?.dilate(a)
}

/// Closed φ of `λ^{⊎u}` (through the dilation rule `φ_{D_a ν}(z) = a·φ_ν(z/a)`).
pub fn lambda_uplus_phi(p: LambdaParams, u: f64, z: Complex64) -> Result<Complex64> {
    let a = (1.0 - p.t) * u + p.t;
    let scaled = LambdaParams::new(p.t / a, p.rho)?;
    Ok(a * lambda_phi(scaled, z / a)?)
}

// ---------------------------------------------------------------------------
// The Fourier-zero counterexample
// ---------------------------------------------------------------------------

/// Data of the classical-divisibility counterexample at asymmetry `ρ ≠ 1/2`:
/// the law `(p·δ₀ + (1−p)·δ₁) ⊛ c_ρ` whose characteristic function has a
/// real zero at `z₀ = π/cos ρπ` when `p = 1/(1 + e^{π·|tan ρπ|})`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CharZeroReport {
    pub p: f64,
    pub z0: f64,
    pub modulus_at_z0: f64,
}

/// Characteristic function of `p·δ₀ + (1−p)·c_ρ` at real `z`.
pub fn lambda_char_fn(p: f64, rho: f64, z: f64) -> Complex64 {
    let (s, c) = (rho * PI).sin_cos();
    p + (1.0 - p) * Complex64::new(-s * z.abs(), -c * z).exp()
}

pub fn char_zero_counterexample(rho: f64) -> Result<CharZeroReport> {
    if !(0.0 < rho && rho < 1.0) || rho == 0.5 {
        return Err(Error::domain(
            "the Fourier-zero counterexample needs ρ in (0,1) off 1/2 (tan pole)",
        ));
    }
    let tan_abs = (rho * PI).tan().abs();
    let p = 1.0 / (1.0 + (PI * tan_abs).exp());
    let z0 = PI / (rho * PI).cos();
    let modulus = lambda_char_fn(p, rho, z0).norm();
    Ok(CharZeroReport { p, z0, modulus_at_z0: modulus })
}

// ---------------------------------------------------------------------------
// Unimodality, complete monotonicity, threshold constants
// ---------------------------------------------------------------------------

/// The unique root of `sin πx = x` in `(0, 1)`, to 1e-12.
pub fn alpha0() -> f64 {
    let f = |x: f64| (PI * x).sin() - x;
    let mut lo = 0.5;
    let mut hi = 1.0 - 1e-9;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `α₁ = α₀/(1 + α₀)`.
pub fn alpha1() -> f64 {
    let a0 = alpha0();
    a0 / (1.0 + a0)
}

/// Geometric probe grid on `(lo, hi)`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * (i as f64) / ((n - 1) as f64)).exp())
        .collect()
}

/// Whether a density is unimodal with mode 0: non-increasing along the
/// positive grid and non-decreasing (towards 0) along the negative grid,
/// within the given slack.
pub fn unimodal_mode0_check(
    density: &dyn Fn(f64) -> f64,
    grid_pos: &[f64],
    grid_neg: &[f64],
    slack: f64,
) -> bool {
    for w in grid_pos.windows(2) {
        let (a, b) = (density(w[0]), density(w[1]));
        if b > a + slack * (1.0 + a.abs()) {
            return false;
        }
    }
    // grid_neg holds magnitudes; density must not increase away from 0
    for w in grid_neg.windows(2) {
        let (a, b) = (density(-w[0]), density(-w[1]));
        if b > a + slack * (1.0 + a.abs()) {
            return false;
        }
    }
    true
}

/// Mode-0 unimodality of an empirical sample, judged from geometric bin
/// histograms with Poisson-noise slack (each side separately).
pub fn unimodal_mode0_check_samples(samples: &[f64], bins_per_side: usize) -> bool {
    let side = |sign: f64| -> bool {
        let vals: Vec<f64> =
            samples.iter().map(|&v| v * sign).filter(|&v| v > 0.0).collect();
        if vals.len() < 100 {
            return true;
        }
        let lo = 1e-4f64;
        let hi = vals.iter().cloned().fold(0.0, f64::max) * 1.0001;
        let edges = geometric_grid(lo, hi.max(lo * 10.0), bins_per_side + 1);
        let mut heights = Vec::new();
        for w in edges.windows(2) {
            let count = vals.iter().filter(|&&v| v >= w[0] && v < w[1]).count() as f64;
            let width = w[1] - w[0];
            heights.push((count / width, count));
        }
        for w in heights.windows(2) {
            let ((h0, c0), (h1, c1)) = (w[0], w[1]);
            if c0 < 25.0 || c1 < 25.0 {
                continue;
            }
            let rel_noise = 3.5 * (1.0 / c0.sqrt() + 1.0 / c1.sqrt());
            if h1 > h0 * (1.0 + rel_noise) {
                return false;
            }
        }
        true
    };
    side(1.0) && side(-1.0)
}

/// Verdict of the finite-difference complete-monotonicity check.  This is a
/// necessary-condition heuristic: it can refute complete monotonicity but
/// never certify it.
#[derive(Debug, Clone, PartialEq)]
pub enum CmVerdict {
    Consistent,
    ViolatedAt { x: f64, order: usize },
}

/// Check that the forward differences of the density alternate in sign up
/// to the given order at every grid point (for a completely monotone `f`,
/// `(−1)^k Δ_h^k f ≥ 0` for every step `h > 0`).
pub fn complete_monotone_heuristic(
    density: &dyn Fn(f64) -> f64,
    order: usize,
    grid: &[f64],
) -> Result<CmVerdict> {
    if order == 0 || order > 6 {
        return Err(Error::domain("the heuristic supports orders 1 ..= 6"));
    }
    let binom = |k: usize, j: usize| -> f64 {
        let mut v = 1.0;
        for i in 0..j {
            v = v * (k - i) as f64 / (i + 1) as f64;
        }
        v
    };
    for &x in grid {
        for &frac in &[0.05, 0.2, 0.5] {
            let h = frac * x;
            for k in 1..=order {
                let mut delta = 0.0;
                let mut scale = 0.0;
                for j in 0..=k {
                    let c = binom(k, j);
                    let v = density(x + j as f64 * h);
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    delta += sign * c * v;
                    scale += c * v.abs();
                }
                let signed = if k % 2 == 0 { delta } else { -delta };
                if signed < -1e-11 * scale - 1e-300 {
                    return Ok(CmVerdict::ViolatedAt { x, order: k });
                }
            }
        }
    }
    Ok(CmVerdict::Consistent)
}
