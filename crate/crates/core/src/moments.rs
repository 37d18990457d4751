//! Exact-rational Fuss–Narayana moment sequences and Hankel-determinant
//! positivity scans.
//!
//! Two closely related polynomial moment sequences appear here, indexed by
//! rational parameters `(s, t)`:
//!
//! ```text
//!   m_n(s,t)  = Σ_{k=1}^n (t^k/k) C(n−1, k−1) C(ns, k−1)        n ≥ 1
//!   m̃_n(s,t) = Σ_{k=1}^n (t^k/n) C(n, k−1)  C(ns, n−k)         n ≥ 1
//! ```
//!
//! with `m_0 = m̃_0 = 1` and the generalized binomial
//! `C(x, k) = x(x−1)…(x−k+1)/k!`.  They satisfy the transfer relation
//! `m̃_n(s,t) = t^{n+1}·m_n(s, 1/t)`, and `m̃` is a Hamburger moment
//! sequence — all Hankel determinants `det[m̃_{i+j}]_{0≤i,j≤k}`
//! nonnegative — exactly when `max(s,t) ≥ 1`.  The scan here settles the
//! question for concrete parameters by exact arithmetic: entries are
//! `BigRational`, denominators are cleared, and the integer determinants
//! are computed by fraction-free Bareiss elimination.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::quad::QuadSpec;

/// Parse a rational from `"P/Q"`, integer, or decimal notation (decimals
/// are read exactly, e.g. `0.05 = 1/20`).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt =
            p.trim().parse().map_err(|_| Error::domain(format!("bad numerator in '{s}'")))?;
        let den: BigInt =
            q.trim().parse().map_err(|_| Error::domain(format!("bad denominator in '{s}'")))?;
        if den.is_zero() {
            return Err(Error::domain("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits = frac_part.len() as u32;
        let joined = format!("{int_part}{frac_part}");
        let num: BigInt =
            joined.parse().map_err(|_| Error::domain(format!("bad decimal '{s}'")))?;
        let den = BigInt::from(10u32).pow(digits);
        return Ok(BigRational::new(num, den));
    }
    let num: BigInt = s.parse().map_err(|_| Error::domain(format!("bad rational '{s}'")))?;
    Ok(BigRational::from_integer(num))
}

/// Generalized binomial coefficient `C(x, k) = x(x−1)…(x−k+1)/k!`.
pub fn gen_binomial(x: &BigRational, k: usize) -> BigRational {
    let mut num = BigRational::one();
    for i in 0..k {
        num *= x - BigRational::from_integer(BigInt::from(i));
    }
    let mut fact = BigInt::one();
    for i in 2..=k {
        fact *= BigInt::from(i);
    }
    num / BigRational::from_integer(fact)
}

/// Fuss–Narayana moment `m_n(s, t)`.
pub fn fuss_narayana(n: usize, s: &BigRational, t: &BigRational) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    let ns = s * BigRational::from_integer(BigInt::from(n));
    let n_minus_1 = BigRational::from_integer(BigInt::from(n - 1));
    let mut total = BigRational::zero();
    let mut t_pow = BigRational::one();
    for k in 1..=n {
        t_pow *= t;
        let term = &t_pow / BigRational::from_integer(BigInt::from(k))
            * gen_binomial(&n_minus_1, k - 1)
            * gen_binomial(&ns, k - 1);
        total += term;
    }
    total
}

/// The companion moment `m̃_n(s, t)`.
pub fn tilde_moment(n: usize, s: &BigRational, t: &BigRational) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    let ns = s * BigRational::from_integer(BigInt::from(n));
    let n_rat = BigRational::from_integer(BigInt::from(n));
    let mut total = BigRational::zero();
    let mut t_pow = BigRational::one();
    for k in 1..=n {
        t_pow *= t;
        let term = &t_pow / &n_rat * gen_binomial(&n_rat, k - 1) * gen_binomial(&ns, n - k);
        total += term;
    }
    total
}

/// Which of the two sequences a [`MomentSeq`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Bessel,
    Tilde,
}

/// An exact moment sequence `m_0, …, m_N`.
#[derive(Debug, Clone)]
pub struct MomentSeq {
    pub kind: MomentKind,
    pub s: BigRational,
    pub t: BigRational,
    pub values: Vec<BigRational>,
}

impl MomentSeq {
    /// Build the sequence up to `max_n` inclusive.
    pub fn new(kind: MomentKind, s: BigRational, t: BigRational, max_n: usize) -> Self {
        let values = (0..=max_n)
            .map(|n| match kind {
                MomentKind::Bessel => fuss_narayana(n, &s, &t),
                MomentKind::Tilde => tilde_moment(n, &s, &t),
            })
            .collect();
        MomentSeq { kind, s, t, values }
    }
}

/// Sign-exact determinant of an integer matrix by fraction-free Bareiss
/// elimination (the one-step division stays exact at every stage).
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Exact Hankel determinant `det[m_{i+j}]_{0≤i,j≤k}` of a rational sequence.
pub fn hankel_det(moments: &[BigRational], order: usize) -> Result<BigRational> {
    let dim = order + 1;
    if moments.len() < 2 * order + 1 {
        return Err(Error::domain(format!(
            "need {} moments for the order-{order} Hankel determinant, got {}",
            2 * order + 1,
            moments.len()
        )));
    }
    // Clear denominators: the determinant scales by lcm^dim > 0, so both the
    // sign and the exact value are recoverable.
    let mut lcm = BigInt::one();
    for i in 0..dim {
        for j in 0..dim {
            let d = moments[i + j].denom();
            lcm = num_integer::lcm(lcm, d.clone());
        }
    }
    let matrix: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let v = &moments[i + j] * BigRational::from_integer(lcm.clone());
                    v.to_integer()
                })
                .collect()
        })
        .collect();
    let int_det = bareiss_det(matrix);
    let mut scale = BigInt::one();
    for _ in 0..dim {
        scale *= &lcm;
    }
    Ok(BigRational::new(int_det, scale))
}

/// Naive cofactor-expansion determinant over rationals, for cross-checks at
/// small orders.
pub fn naive_det(moments: &[BigRational], order: usize) -> Result<BigRational> {
    let dim = order + 1;
    if moments.len() < 2 * order + 1 {
        return Err(Error::domain("not enough moments"));
    }
    let m: Vec<Vec<BigRational>> =
        (0..dim).map(|i| (0..dim).map(|j| moments[i + j].clone()).collect()).collect();
    fn det_rec(m: &[Vec<BigRational>], cols: &mut Vec<usize>) -> BigRational {
        let row = m.len() - cols.len();
        if cols.len() == 1 {
            return m[row][cols[0]].clone();
        }
        let mut acc = BigRational::zero();
        for idx in 0..cols.len() {
            let c = cols.remove(idx);
            let minor = det_rec(m, cols);
            cols.insert(idx, c);
            let term = &m[row][c] * minor;
            if idx % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
    let mut cols: Vec<usize> = (0..dim).collect();
    Ok(det_rec(&m, &mut cols))
}

/// Verdict of a Hankel positivity scan.
#[derive(Debug, Clone, Serialize)]
pub struct HankelScan {
    /// first order `k` with `det[m_{i+j}]_{0..k} < 0`, when one exists
    pub first_failing_order: Option<usize>,
    /// highest order actually checked
    pub scanned_to: usize,
    /// exact determinant values (as rational strings) up to and including
    /// the failing order
    pub dets: Vec<String>,
}

impl HankelScan {
    /// True when every scanned determinant was nonnegative.  With a finite
    /// cap this is inconclusive for the moment problem, never a proof.
    pub fn passed_to_cap(&self) -> bool {
        self.first_failing_order.is_none()
    }
}

/// Scan the Hankel determinants of `seq` for `k = 0, 1, …, max_order` and
/// report the first strictly negative one.
pub fn hamburger_scan(seq: &MomentSeq, max_order: usize) -> Result<HankelScan> {
    if seq.values.len() < 2 * max_order + 1 {
        return Err(Error::domain(format!(
            "sequence holds {} moments; scanning to order {max_order} needs {}",
            seq.values.len(),
            2 * max_order + 1
        )));
    }
    let mut dets = Vec::new();
    for k in 0..=max_order {
        let d = hankel_det(&seq.values, k)?;
        let negative = d.is_negative();
        dets.push(d.to_string());
        if negative {
            return Ok(HankelScan { first_failing_order: Some(k), scanned_to: k, dets });
        }
    }
    Ok(HankelScan { first_failing_order: None, scanned_to: max_order, dets })
}

/// Floating-point Hankel scan for irrational parameters.  Reports an
/// explicit `inconclusive` flag whenever a determinant is too close to zero
/// for its conditioning, rather than a possibly false sign.
#[derive(Debug, Clone, Serialize)]
pub struct FloatHankelScan {
    pub first_failing_order: Option<usize>,
    pub inconclusive_at: Option<usize>,
    pub scanned_to: usize,
    pub dets: Vec<f64>,
}

pub fn hamburger_scan_float(moments: &[f64], max_order: usize) -> Result<FloatHankelScan> {
    if moments.len() < 2 * max_order + 1 {
        return Err(Error::domain("not enough moments for the requested order"));
    }
    let mut dets = Vec::new();
    for k in 0..=max_order {
        let dim = k + 1;
        let mut m: Vec<Vec<f64>> =
            (0..dim).map(|i| (0..dim).map(|j| moments[i + j]).collect()).collect();
        // determinant scale for conditioning: Hadamard bound
        let mut hadamard = 1.0f64;
        for row in &m {
            hadamard *= row.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        }
        let mut det = 1.0f64;
        for c in 0..dim {
            let piv = (c..dim).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            if m[piv][c] == 0.0 {
                det = 0.0;
                break;
            }
            if piv != c {
                m.swap(piv, c);
                det = -det;
            }
            det *= m[c][c];
            for r in c + 1..dim {
                let f = m[r][c] / m[c][c];
                for j in c..dim {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
        dets.push(det);
        if det.abs() < 1e-10 * hadamard {
            return Ok(FloatHankelScan {
                first_failing_order: None,
                inconclusive_at: Some(k),
                scanned_to: k,
                dets,
            });
        }
        if det < 0.0 {
            return Ok(FloatHankelScan {
                first_failing_order: Some(k),
                inconclusive_at: None,
                scanned_to: k,
                dets,
            });
        }
    }
    Ok(FloatHankelScan {
        first_failing_order: None,
        inconclusive_at: None,
        scanned_to: max_order,
        dets,
    })
}

/// Quadrature moments `∫ x^k dμ` for `k = 0, …, n`, with divergence
/// detection from the density's tail exponent.
pub fn moments_from_density(m: &Measure, n: usize, q: &QuadSpec) -> Result<Vec<f64>> {
    if let Some(e) = m.tails().at_inf {
        // the k-th moment is finite only when k + e < −1
        if (n as f64) + e >= -1.0 {
            return Err(Error::domain(format!(
                "moment {n} diverges: density tail exponent {e} only allows orders below {}",
                -e - 1.0
            )));
        }
    }
    (0..=n).map(|k| m.integrate(&|x| x.powi(k as i32), q)).collect()
}
