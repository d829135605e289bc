//! Gauss and generalised hypergeometric series.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use statrs::function::gamma::{digamma, gamma};

use super::gamma::{gamma_half_exact, recip_gamma};
use crate::error::{Error, Result};

/// Above this argument the `z -> 1 - z` connection formulas are used.
pub const Z_SWITCH: f64 = 0.75;

const MAX_TERMS: usize = 100_000;
const SERIES_EPS: f64 = 1e-17;

/// Parameters of `2F1(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper2F1Params {
    pub a: Rational64,
    pub b: Rational64,
    pub c: Rational64,
    pub z: f64,
}

impl Hyper2F1Params {
    pub fn new(a: Rational64, b: Rational64, c: Rational64, z: f64) -> Self {
        Self { a, b, c, z }
    }
}

fn f(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `Some(n)` if `q = -n` for a non-negative integer `n`.
fn nonpositive_int(q: Rational64) -> Option<u64> {
    (q.is_integer() && *q.numer() <= 0).then(|| (-*q.numer()) as u64)
}

/// Length of the polynomial when one of the numerator parameters truncates it.
fn terminating_degree(nums: &[Rational64]) -> Option<u64> {
    nums.iter().filter_map(|&q| nonpositive_int(q)).min()
}

/// Fails when a denominator parameter produces a zero before the series ends.
fn check_denominators(dens: &[Rational64], degree: Option<u64>) -> Result<()> {
    for &c in dens {
        if let Some(m) = nonpositive_int(c) {
            // (c)_k vanishes once k > m
            if degree.map_or(true, |d| d > m) {
                return Err(Error::ParameterDegenerate { c: f(c) });
            }
        }
    }
    Ok(())
}

/// Plain power series `pFq` with a geometric tail bound.
fn series(nums: &[f64], dens: &[f64], z: f64, degree: Option<u64>) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let cap = degree.map_or(MAX_TERMS, |d| d as usize);
    for k in 0..cap {
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for &a in nums {
            ratio *= a + kf;
        }
        for &c in dens {
            ratio /= c + kf;
        }
        term *= ratio;
        sum += term;
        if degree.is_none() {
            // once the ratio has settled below one the tail is bounded geometrically
            let rho = ratio.abs();
            if rho < 1.0 && term.abs() * rho / (1.0 - rho) <= SERIES_EPS * sum.abs().max(f64::MIN_POSITIVE) {
                return Ok(sum);
            }
            if term == 0.0 {
                return Ok(sum);
            }
        }
    }
    if degree.is_some() {
        return Ok(sum);
    }
    Err(Error::NoConvergence {
        iterations: MAX_TERMS,
        last_term: term,
    })
}

/// `2F1(a, b; c; z)` for real `z < 1`.
pub fn hyp2f1(p: &Hyper2F1Params) -> Result<f64> {
    hyp2f1_complement(p, 1.0 - p.z)
}

/// [`hyp2f1`] with `1 - z` supplied by the caller, who can often compute it
/// without the cancellation that `1.0 - z` suffers near `z = 1`.
pub fn hyp2f1_complement(p: &Hyper2F1Params, one_minus_z: f64) -> Result<f64> {
    let Hyper2F1Params { a, b, c, z } = *p;
    if !(z < 1.0) || z.is_nan() {
        return Err(Error::InvalidInput(format!("2F1 argument {z} outside z < 1")));
    }
    let degree = terminating_degree(&[a, b]);
    check_denominators(&[c], degree)?;
    if z == 0.0 || degree == Some(0) {
        return Ok(1.0);
    }
    if degree.is_some() {
        return series(&[f(a), f(b)], &[f(c)], z, degree);
    }
    if z < 0.0 {
        // Pfaff: maps (-inf, 0) onto (0, 1)
        let w = z / (z - 1.0);
        let inner = hyp2f1(&Hyper2F1Params::new(a, c - b, c, w))?;
        return Ok((1.0 - z).powf(-f(a)) * inner);
    }
    if z <= Z_SWITCH {
        return series(&[f(a), f(b)], &[f(c)], z, None);
    }
    connection(a, b, c, one_minus_z)
}

fn connection(a: Rational64, b: Rational64, c: Rational64, w: f64) -> Result<f64> {
    let m = c - a - b;
    if !m.is_integer() {
        let (af, bf, cf, mf) = (f(a), f(b), f(c), f(m));
        let g1 = gamma(cf) * gamma(mf) * recip_gamma(cf - af) * recip_gamma(cf - bf);
        let g2 = gamma(cf) * gamma(-mf) * recip_gamma(af) * recip_gamma(bf);
        let mut out = 0.0;
        if g1 != 0.0 {
            out += g1 * series(&[af, bf], &[1.0 - mf], w, None)?;
        }
        if g2 != 0.0 {
            out += g2 * w.powf(mf) * series(&[cf - af, cf - bf], &[1.0 + mf], w, None)?;
        }
        return Ok(out);
    }
    let mi = *m.numer();
    if mi < 0 {
        // Euler: F(a,b;c;z) = (1-z)^(c-a-b) F(c-a,c-b;c;z), which flips the sign of the excess
        let inner = log_case(c - a, c - b, (-mi) as u64, w)?;
        return Ok(w.powi(mi as i32) * inner);
    }
    log_case(a, b, mi as u64, w)
}

/// `F(a, b; a + b + m; 1 - w)` for integer `m >= 0` (logarithmic case).
fn log_case(a: Rational64, b: Rational64, m: u64, w: f64) -> Result<f64> {
    let (af, bf) = (f(a), f(b));
    let mf = m as f64;
    let cf = af + bf + mf;
    let gc = gamma(cf);

    let mut finite = 0.0;
    if m > 0 {
        let pre = gamma(mf) * gc * recip_gamma(af + mf) * recip_gamma(bf + mf);
        let mut t = 1.0;
        let mut s = 1.0;
        for n in 0..m - 1 {
            let nf = n as f64;
            t *= (af + nf) * (bf + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
            s += t;
        }
        finite = pre * s;
    }

    let pre = gc * recip_gamma(af) * recip_gamma(bf);
    if pre == 0.0 {
        return Ok(finite);
    }
    let lnw = w.ln();
    let mfact: f64 = (1..=m).map(|k| k as f64).product();
    let mut coef = 1.0 / mfact; // (a+m)_n (b+m)_n / (n! (n+m)!) w^n
    let mut sum = 0.0;
    let mut converged = false;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let bracket = lnw - digamma(nf + 1.0) - digamma(nf + mf + 1.0) + digamma(af + nf + mf) + digamma(bf + nf + mf);
        let term = coef * bracket;
        sum += term;
        if n > 2 && term.abs() <= SERIES_EPS * sum.abs() && coef.abs() * (1.0 + lnw.abs()) <= SERIES_EPS * sum.abs() {
            converged = true;
            break;
        }
        if coef == 0.0 {
            converged = true;
            break;
        }
        coef *= (af + mf + nf) * (bf + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: MAX_TERMS,
            last_term: coef,
        });
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Ok(finite - sign * w.powi(m as i32) * pre * sum)
}

fn to_big(q: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

/// Twice the argument when `q` is an integer or half-integer.
fn twice(q: Rational64) -> Option<i64> {
    let t = q * 2;
    t.is_integer().then(|| *t.numer())
}

fn pochhammer_exact(x: Rational64, n: u64) -> BigRational {
    let x = to_big(x);
    (0..n).fold(BigRational::one(), |acc, k| {
        acc * (&x + BigRational::from_integer(BigInt::from(k)))
    })
}

/// Exact `2F1(a, b; c; 1)` as `q * pi^p`.
///
/// Terminating series use Chu–Vandermonde; otherwise Gauss's theorem, which
/// needs `c - a - b > 0` and half-integer parameters. `None` when the value is
/// divergent or not expressible in that form.
pub fn hyp2f1_at_one_exact(a: Rational64, b: Rational64, c: Rational64) -> Option<(BigRational, i32)> {
    if let Some(n) = terminating_degree(&[a, b]) {
        let other = if nonpositive_int(a) == Some(n) { b } else { a };
        let den = pochhammer_exact(c, n);
        if den.is_zero() {
            return None;
        }
        return Some((pochhammer_exact(c - other, n) / den, 0));
    }
    let m = c - a - b;
    if *m.numer() <= 0 || nonpositive_int(c).is_some() {
        return None;
    }
    let tc = twice(c)?;
    let tm = twice(m)?;
    let tca = twice(c - a)?;
    let tcb = twice(c - b)?;
    let num_c = gamma_half_exact(tc)?;
    let num_m = gamma_half_exact(tm)?;
    // a pole in a denominator gamma makes the whole value vanish
    let (den_a, den_b) = match (gamma_half_exact(tca), gamma_half_exact(tcb)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Some((BigRational::zero(), 0)),
    };
    let q = num_c.q * num_m.q / (den_a.q * den_b.q);
    let s = i32::from(num_c.sqrt_pi_power) + i32::from(num_m.sqrt_pi_power)
        - i32::from(den_a.sqrt_pi_power)
        - i32::from(den_b.sqrt_pi_power);
    debug_assert!(s.is_even());
    Some((q, s / 2))
}

/// `3F2(a, b, d; c, e; z)` by direct summation for `z` in `[0, 1)`.
pub fn hyp3f2(a: Rational64, b: Rational64, d: Rational64, c: Rational64, e: Rational64, z: f64) -> Result<f64> {
    if !(z < 1.0) || z.is_nan() {
        return Err(Error::InvalidInput(format!("3F2 argument {z} outside z < 1")));
    }
    let degree = terminating_degree(&[a, b, d]);
    check_denominators(&[c, e], degree)?;
    if z == 0.0 || degree == Some(0) {
        return Ok(1.0);
    }
    series(&[f(a), f(b), f(d)], &[f(c), f(e)], z, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_traits::ToPrimitive;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn brute(a: f64, b: f64, c: f64, z: f64, terms: usize) -> f64 {
        let mut t = 1.0;
        let mut s = 1.0;
        for k in 0..terms {
            let k = k as f64;
            t *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
            s += t;
        }
        s
    }

    #[test]
    fn trivial_cases() {
        let p = Hyper2F1Params::new(r(3, 2), r(5, 2), r(7, 2), 0.0);
        assert_eq!(hyp2f1(&p).unwrap(), 1.0);
        let p = Hyper2F1Params::new(r(3, 2), r(0, 1), r(1, 2), 0.9);
        assert_eq!(hyp2f1(&p).unwrap(), 1.0);
    }

    #[test]
    fn arctanh_identity() {
        let p = Hyper2F1Params::new(r(1, 2), r(1, 1), r(3, 2), 0.25);
        let want = 0.5f64.atanh() / 0.5;
        assert_relative_eq!(hyp2f1(&p).unwrap(), want, max_relative = 1e-14);
        assert_relative_eq!(brute(0.5, 1.0, 1.5, 0.25, 200), want, max_relative = 1e-12);
    }

    #[test]
    fn connection_matches_series_near_switch() {
        let cases = [
            (r(1, 2), r(1, 1), r(3, 2)),  // excess 0, log case
            (r(3, 2), r(-1, 2), r(5, 2)), // excess 3/2
            (r(1, 2), r(3, 2), r(5, 2)),  // excess 1/2
            (r(5, 2), r(3, 2), r(3, 2)),  // excess -5/2
            (r(2, 1), r(1, 2), r(7, 2)),  // excess 1
            (r(3, 1), r(5, 2), r(5, 2)),  // excess -3
        ];
        for (a, b, c) in cases {
            for z in [0.751, 0.8] {
                let via_conn = connection(a, b, c, 1.0 - z).unwrap();
                let direct = brute(f(a), f(b), f(c), z, 4000);
                assert_relative_eq!(via_conn, direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn closed_forms_near_one() {
        // 2F1(1/2, 1; 3/2; z) = atanh(sqrt z)/sqrt z
        let z = 1.0 - 1e-7;
        let p = Hyper2F1Params::new(r(1, 2), r(1, 1), r(3, 2), z);
        assert_relative_eq!(hyp2f1(&p).unwrap(), z.sqrt().atanh() / z.sqrt(), max_relative = 1e-9);
        // 2F1(1, 1; 2; z) = -ln(1-z)/z
        let z = 0.97;
        let p = Hyper2F1Params::new(r(1, 1), r(1, 1), r(2, 1), z);
        assert_relative_eq!(hyp2f1(&p).unwrap(), -(1.0 - z).ln() / z, max_relative = 1e-13);
        // 2F1(a, b; b; z) = (1-z)^-a
        let p = Hyper2F1Params::new(r(3, 2), r(1, 2), r(1, 2), 0.9);
        assert_relative_eq!(hyp2f1(&p).unwrap(), 0.1f64.powf(-1.5), max_relative = 1e-13);
    }

    #[test]
    fn negative_argument() {
        let p = Hyper2F1Params::new(r(1, 1), r(1, 1), r(2, 1), -3.0);
        assert_relative_eq!(hyp2f1(&p).unwrap(), 4f64.ln() / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn degenerate_c() {
        let p = Hyper2F1Params::new(r(1, 2), r(1, 1), r(-2, 1), 0.3);
        assert!(matches!(hyp2f1(&p), Err(Error::ParameterDegenerate { .. })));
        // terminates before reaching the zero denominator
        let p = Hyper2F1Params::new(r(-1, 1), r(1, 1), r(-2, 1), 0.3);
        assert_relative_eq!(hyp2f1(&p).unwrap(), 1.0 + 0.3 / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn derivative_identity() {
        let (a, b, c) = (r(3, 2), r(-1, 2), r(5, 2));
        for z in [0.1, 0.5, 0.74, 0.76, 0.9] {
            let h = 1e-5;
            let fp = hyp2f1(&Hyper2F1Params::new(a, b, c, z + h)).unwrap();
            let fm = hyp2f1(&Hyper2F1Params::new(a, b, c, z - h)).unwrap();
            let up = hyp2f1(&Hyper2F1Params::new(a + 1, b + 1, c + 1, z)).unwrap();
            assert_relative_eq!((fp - fm) / (2.0 * h), f(a * b / c) * up, max_relative = 1e-6);
        }
    }

    #[test]
    fn exact_at_one() {
        // Gauss: 2F1(1/2, 1/2; 2; 1) = Gamma(2) Gamma(1) / Gamma(3/2)^2 = 4/pi
        let (q, p) = hyp2f1_at_one_exact(r(1, 2), r(1, 2), r(2, 1)).unwrap();
        assert_eq!(q, BigRational::new(4.into(), 1.into()));
        assert_eq!(p, -1);
        // Chu–Vandermonde with a divergent-looking excess
        let (q, p) = hyp2f1_at_one_exact(r(-2, 1), r(5, 2), r(1, 2)).unwrap();
        let want = brute(-2.0, 2.5, 0.5, 1.0, 3);
        assert_relative_eq!(q.to_f64().unwrap(), want, max_relative = 1e-15);
        assert_eq!(p, 0);
        assert!(hyp2f1_at_one_exact(r(1, 1), r(1, 1), r(3, 2)).is_none());
        // 1/Gamma(c - a) pole gives an exact zero
        let (q, _) = hyp2f1_at_one_exact(r(5, 2), r(-5, 2), r(1, 2)).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn three_f_two() {
        assert_eq!(hyp3f2(r(1, 2), r(1, 1), r(1, 1), r(3, 2), r(2, 1), 0.0).unwrap(), 1.0);
        let v = hyp3f2(r(1, 2), r(1, 1), r(7, 3), r(3, 2), r(7, 3), 0.6).unwrap();
        let w = hyp2f1(&Hyper2F1Params::new(r(1, 2), r(1, 1), r(3, 2), 0.6)).unwrap();
        assert_relative_eq!(v, w, max_relative = 1e-14);

        let mut t = 1.0;
        let mut s = 1.0;
        for k in 0..200 {
            let k = k as f64;
            t *= (0.5 + k) * (1.0 + k) * (1.0 + k) / ((1.5 + k) * (2.0 + k) * (k + 1.0)) * 0.25;
            s += t;
        }
        let v = hyp3f2(r(1, 2), r(1, 1), r(1, 1), r(3, 2), r(2, 1), 0.25).unwrap();
        assert_relative_eq!(v, s, max_relative = 1e-14);
    }
}
