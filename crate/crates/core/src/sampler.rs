//! Random variate generation for the catalog laws and empirical
//! distribution testing.
//!
//! Determinism contract: every sampler derives an independent ChaCha8
//! stream per sample index by mixing `(seed, index)` through SplitMix64, so
//! results depend only on `(seed, n)` and are independent of any chunking
//! of the generation loop.  Scale equivariance is exact: samples of the
//! dilated law are the dilated samples for the same seed.
//!
//! The positive stable sampler uses the product representation of a stable
//! variate as `(A(θ)/E)^{(1−α)/α}` with `θ` uniform on `(0, π)`, `E` unit
//! exponential and
//!
//! ```text
//!   A(θ) = sin(αθ)^{α/(1−α)} · sin((1−α)θ) / sin(θ)^{1/(1−α)},
//! ```
//!
//! which realises the Laplace transform `e^{−λ^α}` exactly.  Boolean stable
//! variates are built as the ratio of two independent positive stables
//! times an independent Cauchy-family factor — the construction is itself
//! one of the identities under test, so no inverse-CDF shortcut is used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::{Family, HalfGrid, Measure};
use crate::quad::QuadSpec;
use crate::stable::{self, AdmissiblePair};

/// A sorted batch of iid samples, tagged with its provenance.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub label: String,
    pub seed: u64,
}

impl SampleBatch {
    fn from_values(mut values: Vec<f64>, label: impl Into<String>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample batch must contain at least one value"));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        Ok(SampleBatch { values, label: label.into(), seed })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Per-sample RNG: stream `i` of the batch with the given seed.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// One positive strictly stable variate with Laplace transform `e^{−λ^α}`.
pub fn positive_stable_draw(alpha: f64, rng: &mut ChaCha8Rng) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let theta = PI * uniform_open(rng);
    let e = -uniform_open(rng).ln();
    let a = (alpha * theta).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * theta).sin()
        / theta.sin().powf(1.0 / (1.0 - alpha));
    (a / e).powf((1.0 - alpha) / alpha)
}

/// One Cauchy-family variate `c_ρ` (location `−cos ρπ`, scale `sin ρπ`).
pub fn cauchy_rho_draw(rho: f64, rng: &mut ChaCha8Rng) -> f64 {
    if rho == 0.0 {
        return -1.0;
    }
    if rho == 1.0 {
        return 1.0;
    }
    let (s, c) = (rho * PI).sin_cos();
    let u = uniform_open(rng);
    -c + s * (PI * (u - 0.5)).tan()
}

/// `n` iid positive α-stable variates, deterministic per seed.
pub fn sample_positive_stable(alpha: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain("positive stable sampling needs α in (0, 1)"));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            positive_stable_draw(alpha, &mut rng)
        })
        .collect();
    SampleBatch::from_values(values, format!("positive_stable(alpha={alpha})"), seed)
}

/// One Boolean stable variate `b_{α,ρ}` by the ratio construction: the
/// quotient of two independent positive α-stables, times an independent
/// `c_ρ` factor when `ρ ≠ 1`.
pub fn boolean_stable_draw(pair: AdmissiblePair, rng: &mut ChaCha8Rng) -> f64 {
    let (alpha, rho) = (pair.alpha(), pair.rho());
    if alpha == 1.0 {
        return cauchy_rho_draw(rho, rng);
    }
    let s1 = positive_stable_draw(alpha, rng);
    let s2 = positive_stable_draw(alpha, rng);
    let ratio = s1 / s2;
    if rho == 1.0 {
        ratio
    } else {
        ratio * cauchy_rho_draw(rho, rng)
    }
}

/// `n` iid Boolean stable variates, `α ∈ (0, 1]`, `ρ ∈ [0, 1]`.
pub fn sample_boolean_stable(pair: AdmissiblePair, n: usize, seed: u64) -> Result<SampleBatch> {
    if pair.alpha() > 1.0 {
        return Err(Error::domain("the ratio construction needs α ≤ 1"));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            boolean_stable_draw(pair, &mut rng)
        })
        .collect();
    SampleBatch::from_values(
        values,
        format!("boolean_stable(alpha={}, rho={})", pair.alpha(), pair.rho()),
        seed,
    )
}

fn half_grid_inverse_cdf(h: &HalfGrid) -> (Vec<f64>, Vec<f64>) {
    // cumulative mass at grid nodes, including the analytic lower tail
    let mut cum = Vec::with_capacity(h.xs.len());
    let mut acc = h.ys[0] * h.xs[0] / (h.tail_zero + 1.0);
    cum.push(acc);
    for i in 0..h.xs.len() - 1 {
        let (x0, x1, y0, y1) = (h.xs[i], h.xs[i + 1], h.ys[i], h.ys[i + 1]);
        let m = if y0 > 0.0 && y1 > 0.0 {
            let k = (y1 / y0).ln() / (x1 / x0).ln();
            if (k + 1.0).abs() < 1e-9 {
                y0 * x0 * (x1 / x0).ln()
            } else {
                y0 * x0 * ((x1 / x0).powf(k + 1.0) - 1.0) / (k + 1.0)
            }
        } else {
            0.5 * (y0 + y1) * (x1 - x0)
        };
        acc += m;
        cum.push(acc);
    }
    (h.xs.clone(), cum)
}

fn draw_from_half_grid(h: &HalfGrid, total: f64, u: f64, xs: &[f64], cum: &[f64]) -> f64 {
    let target = u * total;
    let tail0 = cum[0];
    if target <= tail0 {
        // invert the analytic power tail below the first node
        let frac = (target / tail0).max(1e-300);
        return xs[0] * frac.powf(1.0 / (h.tail_zero + 1.0));
    }
    let last = cum[cum.len() - 1];
    if target >= last {
        // upper power tail: mass above x falls off as (x/x_n)^{e+1}
        let rem = (total - target).max(1e-300);
        let tail_mass = (total - last).max(1e-300);
        let frac = (rem / tail_mass).min(1.0);
        let n = xs.len() - 1;
        return xs[n] * frac.powf(1.0 / (h.tail_inf + 1.0));
    }
    let idx = match cum.binary_search_by(|v| v.total_cmp(&target)) {
        Ok(i) => return xs[i],
        Err(i) => i,
    };
    let (c0, c1) = (cum[idx - 1], cum[idx]);
    let f = (target - c0) / (c1 - c0).max(1e-300);
    xs[idx - 1] + f * (xs[idx] - xs[idx - 1])
}

/// Draw one sample from a measure; compositional over the measure algebra.
fn measure_draw(m: &Measure, rng: &mut ChaCha8Rng, q: &QuadSpec) -> Result<f64> {
    match m {
        Measure::Atomic(atoms) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for &(x, w) in atoms {
                acc += w;
                if u <= acc {
                    return Ok(x);
                }
            }
            Ok(atoms[atoms.len() - 1].0)
        }
        Measure::Family(fam) => family_draw(fam, rng),
        Measure::Grid(g) => {
            let wp = g.pos.as_ref().map_or(0.0, |h| h.mass());
            let wn = g.neg.as_ref().map_or(0.0, |h| h.mass());
            let wa: f64 = g.atoms.iter().map(|&(_, w)| w).sum();
            let total = wp + wn + wa;
            let mut u: f64 = rng.gen::<f64>() * total;
            for &(x, w) in &g.atoms {
                if u <= w {
                    return Ok(x);
                }
                u -= w;
            }
            if u <= wp {
                let h = g.pos.as_ref().unwrap();
                let (xs, cum) = half_grid_inverse_cdf(h);
                return Ok(draw_from_half_grid(h, wp, u / wp, &xs, &cum));
            }
            let u = (u - wp) / wn;
            let h = g.neg.as_ref().unwrap();
            let (xs, cum) = half_grid_inverse_cdf(h);
            Ok(-draw_from_half_grid(h, wn, u, &xs, &cum))
        }
        Measure::Scaled { a, inner } => Ok(a * measure_draw(inner, rng, q)?),
        Measure::Powered { p, inner } => {
            let x = measure_draw(inner, rng, q)?;
            if p.fract() == 0.0 {
                Ok(x.powi(*p as i32))
            } else {
                Ok(x.powf(*p))
            }
        }
        Measure::Mix(parts) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (w, part) in parts {
                acc += w;
                if u <= acc {
                    return measure_draw(part, rng, q);
                }
            }
            measure_draw(&parts[parts.len() - 1].1, rng, q)
        }
        Measure::Transform { .. } => Err(Error::unsupported(
            "transform-defined measures are not samplable; recover them to a grid first",
        )),
    }
}

fn family_draw(fam: &Family, rng: &mut ChaCha8Rng) -> Result<f64> {
    match *fam {
        Family::BooleanStable { alpha, rho } => {
            Ok(boolean_stable_draw(AdmissiblePair::new(alpha, rho)?, rng))
        }
        Family::Cauchy { rho } => Ok(cauchy_rho_draw(rho, rng)),
        Family::Pareto { r } => {
            // inverse CDF: (1−u)^{−1/r} − 1; for r = 1 this is u/(1−u)
            let u = uniform_open(rng);
            Ok((1.0 - u).powf(-1.0 / r) - 1.0)
        }
        Family::MarchenkoPastur => {
            // the square of a semicircular variate on [−2, 2], by rejection
            loop {
                let y: f64 = rng.gen::<f64>() * 4.0 - 2.0;
                let accept: f64 = rng.gen();
                if accept * 2.0 <= (4.0 - y * y).sqrt() {
                    return Ok(y * y);
                }
            }
        }
        Family::Gb2Limit { beta } => {
            // CDF x^β/(1+x^β): inverse (u/(1−u))^{1/β}
            let u = uniform_open(rng);
            Ok((u / (1.0 - u)).powf(1.0 / beta))
        }
        Family::FreeStable { alpha, rho } => {
            if rho == 1.0 || rho == 0.0 || rho == 0.5 {
                let h = stable::free_stable_half_grid(alpha, if rho == 0.0 { 1.0 } else { rho })?;
                let (xs, cum) = half_grid_inverse_cdf(&h);
                let total = h.mass();
                let u = uniform_open(rng);
                let (u, sign) = if rho == 0.5 {
                    if u < 0.5 {
                        (2.0 * u, 1.0)
                    } else {
                        (2.0 * u - 1.0, -1.0)
                    }
                } else if rho == 0.0 {
                    (u, -1.0)
                } else {
                    (u, 1.0)
                };
                Ok(sign * draw_from_half_grid(&h, total, u, &xs, &cum))
            } else {
                Err(Error::unsupported("free stable sampling needs ρ in {0, 1/2, 1}"))
            }
        }
        Family::MonotoneStable { alpha, rho } => {
            let pair = AdmissiblePair::new(alpha, rho)?;
            let u = uniform_open(rng);
            let draw_side = |side: f64, u: f64| -> Result<f64> {
                let h = monotone_half_grid(pair, side)?;
                let (xs, cum) = half_grid_inverse_cdf(&h);
                Ok(side * draw_from_half_grid(&h, h.mass(), u, &xs, &cum))
            };
            if rho == 1.0 {
                draw_side(1.0, u)
            } else if rho == 0.0 {
                draw_side(-1.0, u)
            } else if u < rho {
                draw_side(1.0, u / rho)
            } else {
                draw_side(-1.0, (u - rho) / (1.0 - rho))
            }
        }
    }
}

fn monotone_half_grid(pair: AdmissiblePair, side: f64) -> Result<HalfGrid> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, bool), Arc<HalfGrid>>>> = OnceLock::new();
    let key = (pair.alpha().to_bits(), pair.rho().to_bits(), side > 0.0);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(h) = cache.lock().unwrap().get(&key) {
        return Ok((**h).clone());
    }
    let nodes: Vec<f64> = (0..900)
        .map(|i| (-16.0 + 34.0 * (i as f64) / 899.0).exp())
        .collect();
    let ys: Vec<f64> = nodes
        .iter()
        .map(|&x| stable::monotone_density(pair, side * x).unwrap_or(0.0))
        .collect();
    let tail_zero = if side > 0.0 && pair.rho() == 1.0 { pair.alpha() } else { 0.0 };
    let h = HalfGrid::new(nodes, ys, tail_zero.min(0.9), -pair.alpha() - 1.0)?;
    cache.lock().unwrap().insert(key, Arc::new(h.clone()));
    Ok(h)
}

/// `n` iid draws from a samplable measure.
pub fn sample_measure(m: &Measure, n: usize, seed: u64, q: &QuadSpec) -> Result<SampleBatch> {
    let values: Result<Vec<f64>> = (0..n)
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            measure_draw(m, &mut rng, q)
        })
        .collect();
    SampleBatch::from_values(values?, format!("{m:?}"), seed)
}

/// Kolmogorov–Smirnov statistic of a sorted batch against a CDF, with the
/// asymptotic p-value.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_stat(batch: &SampleBatch, cdf: &dyn Fn(f64) -> f64) -> KsResult {
    let n = batch.values.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in batch.values.iter().enumerate() {
        let f = cdf(x);
        let lo = (f - i as f64 / n).abs();
        let hi = ((i as f64 + 1.0) / n - f).abs();
        d = d.max(lo).max(hi);
    }
    KsResult { statistic: d, p_value: kolmogorov_q(n.sqrt() * d) }
}

/// Tail probability `Q(x) = P(K > x)` of the Kolmogorov distribution.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// The critical KS statistic at significance level `sig` for sample size
/// `n` (asymptotic): the `c` with `Q(c) = sig`, scaled by `1/√n`.
pub fn ks_critical(n: usize, sig: f64) -> f64 {
    let mut lo = 0.2;
    let mut hi = 4.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_q(mid) > sig {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn seed_determinism_and_scale_equivariance() {
        let a = sample_positive_stable(0.6, 200, 7).unwrap();
        let b = sample_positive_stable(0.6, 200, 7).unwrap();
        assert_eq!(a.values, b.values);
        let c = sample_positive_stable(0.6, 200, 8).unwrap();
        assert_ne!(a.values, c.values);

        let q = QuadSpec::default();
        let m = Measure::boolean_stable(0.5, 1.0).unwrap();
        let scaled = m.dilate(3.0).unwrap();
        let s1 = sample_measure(&m, 100, 42, &q).unwrap();
        let s2 = sample_measure(&scaled, 100, 42, &q).unwrap();
        for (x, y) in s1.values.iter().zip(&s2.values) {
            assert_relative_eq!(3.0 * x, *y, max_relative = 1e-15);
        }
    }

    #[test]
    fn positive_stable_laplace_transform() {
        // empirical E[e^{−λX}] against e^{−λ^α} within Monte Carlo error
        let alpha = 0.6;
        let n = 100_000;
        let batch = sample_positive_stable(alpha, n, 11).unwrap();
        let lambda = 1.0f64;
        let vals: Vec<f64> = batch.values.iter().map(|&x| (-lambda * x).exp()).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let expect = (-lambda.powf(alpha)).exp();
        let sigma = (var / n as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 3.0 * sigma + 1e-12,
            "LT mismatch: {mean} vs {expect} (3σ = {})",
            3.0 * sigma
        );
    }

    #[test]
    fn positive_stable_half_matches_levy_law() {
        // α = 1/2: this is the reciprocal-of-chi-squared law with
        // distribution function erfc(1/(2√x))
        let n = 100_000;
        let batch = sample_positive_stable(0.5, n, 13).unwrap();
        let cdf = |x: f64| if x <= 0.0 { 0.0 } else { erfc(0.5 / x.sqrt()) };
        let ks = ks_stat(&batch, &cdf);
        assert!(ks.statistic <= 0.01, "KS = {}", ks.statistic);
    }

    // Abramowitz–Stegun 7.1.26 rational approximation, |err| < 1.5e-7,
    // far below the KS resolution at n = 1e5.
    fn erfc(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.3275911 * x);
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        poly * (-x * x).exp()
    }

    #[test]
    fn boolean_ratio_sampler_vs_closed_cdf() {
        let pair = AdmissiblePair::new(0.5, 1.0).unwrap();
        let n = 100_000;
        let batch = sample_boolean_stable(pair, n, 29).unwrap();
        let cdf = |x: f64| stable::boolean_cdf(pair, x).unwrap();
        let ks = ks_stat(&batch, &cdf);
        assert!(ks.statistic <= 0.01, "KS = {}", ks.statistic);
    }

    #[test]
    fn boolean_two_sided_sampler_vs_closed_cdf() {
        let pair = AdmissiblePair::new(0.7, 0.4).unwrap();
        let n = 60_000;
        let batch = sample_boolean_stable(pair, n, 31).unwrap();
        let cdf = |x: f64| stable::boolean_cdf(pair, x).unwrap();
        let ks = ks_stat(&batch, &cdf);
        assert!(ks.statistic <= ks_critical(n, 1e-3), "KS = {}", ks.statistic);
    }

    #[test]
    fn degenerate_boolean_is_point_mass() {
        let pair = AdmissiblePair::new(1.0, 1.0).unwrap();
        let batch = sample_boolean_stable(pair, 50, 3).unwrap();
        assert!(batch.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn atomic_frequencies_match_weights() {
        let q = QuadSpec::default();
        let m = Measure::atomic(vec![(1.0, 0.25), (2.0, 0.75)]).unwrap();
        let n = 40_000;
        let batch = sample_measure(&m, n, 5, &q).unwrap();
        let ones = batch.values.iter().filter(|&&v| v == 1.0).count() as f64;
        let p = ones / n as f64;
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        assert!((p - 0.25).abs() <= 3.0 * sigma, "freq = {p}");
    }

    #[test]
    fn pareto_inverse_cdf() {
        let q = QuadSpec::default();
        let m = Measure::family(Family::Pareto { r: 1.0 }).unwrap();
        let n = 50_000;
        let batch = sample_measure(&m, n, 17, &q).unwrap();
        let ks = ks_stat(&batch, &|x: f64| if x <= 0.0 { 0.0 } else { x / (1.0 + x) });
        assert!(ks.statistic <= ks_critical(n, 1e-3), "KS = {}", ks.statistic);
    }

    #[test]
    fn mp_rejection_sampler_chi_square() {
        let q = QuadSpec::default();
        let m = Measure::family(Family::MarchenkoPastur).unwrap();
        let n = 60_000usize;
        let batch = sample_measure(&m, n, 23, &q).unwrap();
        let edges: Vec<f64> = (0..=20).map(|i| 4.0 * (i as f64) / 20.0).collect();
        let mut chi2 = 0.0;
        for w in edges.windows(2) {
            let expect =
                crate::quad::integrate_finite(|x| stable::mp_density(x), w[0], w[1], &q).unwrap()
                    * n as f64;
            let got = batch.values.iter().filter(|&&v| v >= w[0] && v < w[1]).count() as f64;
            chi2 += (got - expect) * (got - expect) / expect.max(1e-9);
        }
        // 19 degrees of freedom: p > 1e-3 needs χ² below ~43.8
        assert!(chi2 < 43.8, "chi2 = {chi2}");
    }

    #[test]
    fn ks_self_and_power_checks() {
        // uniform samples vs the identity CDF: D ~ O(n^{-1/2})
        let n = 10_000usize;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = rng_for(99, i as u64);
                rng.gen::<f64>()
            })
            .collect();
        let batch = SampleBatch::from_values(values, "uniform", 99).unwrap();
        let ks = ks_stat(&batch, &|x: f64| x.clamp(0.0, 1.0));
        assert!(ks.statistic < 3.0 / (n as f64).sqrt(), "D = {}", ks.statistic);
        assert!(ks.p_value > 1e-3);

        // wrong-CDF control: Pareto(1) samples against the Pareto(2) CDF
        let q = QuadSpec::default();
        let m = Measure::family(Family::Pareto { r: 1.0 }).unwrap();
        let batch = sample_measure(&m, n, 101, &q).unwrap();
        let wrong = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (1.0 + x).powi(-2) };
        let ks = ks_stat(&batch, &wrong);
        assert!(
            ks.statistic > ks_critical(n, 1e-3),
            "control failed to reject: D = {}",
            ks.statistic
        );

        // two-seed stability: both statistics in the expected band
        let b1 = sample_measure(&m, n, 7, &q).unwrap();
        let b2 = sample_measure(&m, n, 8, &q).unwrap();
        let right = |x: f64| if x <= 0.0 { 0.0 } else { x / (1.0 + x) };
        let d1 = ks_stat(&b1, &right).statistic;
        let d2 = ks_stat(&b2, &right).statistic;
        assert!(d1 < ks_critical(n, 1e-3) && d2 < ks_critical(n, 1e-3));
    }

    #[test]
    fn free_stable_grid_sampler() {
        // f_{1/2,1} is the reciprocal of a free Poisson variate
        let q = QuadSpec::default();
        let m = Measure::family(Family::FreeStable { alpha: 0.5, rho: 1.0 }).unwrap();
        let n = 50_000;
        let batch = sample_measure(&m, n, 37, &q).unwrap();
        let cdf = |x: f64| {
            if x <= 0.25 {
                return 0.0;
            }
            let y = 1.0 / x;
            crate::quad::integrate_finite(|t| stable::mp_density(t), y, 4.0, &q).unwrap()
        };
        let ks = ks_stat(&batch, &cdf);
        assert!(ks.statistic <= 0.01, "KS = {}", ks.statistic);
    }

    #[test]
    fn mixture_sampling_matches_mixture_density() {
        // X·B with atomic X: empirical law against the quadrature CDF of
        // the mixture density
        use crate::mixtures::{mixture_density, MixtureSpec};
        let q = QuadSpec::default();
        let mixing = Measure::atomic(vec![(1.0, 0.5), (2.5, 0.5)]).unwrap();
        let pair = AdmissiblePair::new(0.5, 1.0).unwrap();
        let spec_m = MixtureSpec::new(mixing.clone(), 0.0, pair).unwrap();
        let b = Measure::boolean_stable(0.5, 1.0).unwrap();
        let product = mixing.classical_mult(&b, &q).unwrap();
        let n = 50_000;
        let batch = sample_measure(&product, n, 53, &q).unwrap();
        let cdf = |x: f64| -> f64 {
            if x <= 0.0 {
                return 0.0;
            }
            let head = crate::quad::integrate_power_zero(
                |y| mixture_density(&spec_m, y, &q).unwrap_or(0.0),
                x.min(1.0),
                -0.5,
                &q,
            )
            .unwrap();
            head + if x > 1.0 {
                crate::quad::integrate_finite(
                    |y| mixture_density(&spec_m, y, &q).unwrap_or(0.0),
                    1.0,
                    x,
                    &q,
                )
                .unwrap()
            } else {
                0.0
            }
        };
        for &x in &[0.3, 1.0, 2.0, 6.0] {
            let empirical = batch.values.iter().filter(|&&v| v <= x).count() as f64 / n as f64;
            let expect = cdf(x);
            assert!(
                (empirical - expect).abs() <= 0.012,
                "at x = {x}: {empirical} vs {expect}"
            );
        }
    }
}
