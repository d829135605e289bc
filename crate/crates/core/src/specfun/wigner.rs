//! Wigner 3j and 6j symbols in exact arithmetic.
//!
//! Racah sums alternate in sign, so they are accumulated over big integers and
//! only the final `sign * sqrt(rational)` is converted to a float.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Three non-negative integer angular momenta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WignerTriple {
    pub j1: u32,
    pub j2: u32,
    pub j3: u32,
}

impl WignerTriple {
    pub fn new(j1: u32, j2: u32, j3: u32) -> Self {
        Self { j1, j2, j3 }
    }

    pub fn is_triangular(&self) -> bool {
        triangular(self.j1, self.j2, self.j3)
    }
}

fn triangular(a: u32, b: u32, c: u32) -> bool {
    a.abs_diff(b) <= c && c <= a + b
}

/// A number of the form `sign * sqrt(square)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSqrt {
    pub sign: i8,
    pub square: BigRational,
}

impl SignedSqrt {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            square: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            sign: 1,
            square: BigRational::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.square.to_f64().unwrap_or(f64::NAN).sqrt()
    }

    fn from_sum_and_root(sum: BigRational, root_sq: BigRational) -> Self {
        if sum.is_zero() || root_sq.is_zero() {
            return Self::zero();
        }
        let sign = if sum.is_negative() { -1 } else { 1 };
        Self {
            sign,
            square: &sum * &sum * root_sq,
        }
    }
}

fn fact(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn triangle_coeff(a: i64, b: i64, c: i64) -> BigRational {
    BigRational::new(
        fact(a + b - c) * fact(a - b + c) * fact(-a + b + c),
        fact(a + b + c + 1),
    )
}

/// General 3j symbol with integer arguments.
pub fn wigner3j(j1: u32, j2: u32, j3: u32, m1: i32, m2: i32, m3: i32) -> SignedSqrt {
    if m1 + m2 + m3 != 0 || !triangular(j1, j2, j3) {
        return SignedSqrt::zero();
    }
    let (j1, j2, j3) = (i64::from(j1), i64::from(j2), i64::from(j3));
    let (m1, m2, m3) = (i64::from(m1), i64::from(m2), i64::from(m3));
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return SignedSqrt::zero();
    }
    let root_sq = triangle_coeff(j1, j2, j3)
        * BigRational::from_integer(
            fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2) * fact(j3 + m3) * fact(j3 - m3),
        );
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = fact(k)
            * fact(j1 + j2 - j3 - k)
            * fact(j1 - m1 - k)
            * fact(j2 + m2 - k)
            * fact(j3 - j2 + m1 + k)
            * fact(j3 - j1 - m2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if (j1 - j2 - m3).rem_euclid(2) == 1 {
        sum = -sum;
    }
    SignedSqrt::from_sum_and_root(sum, root_sq)
}

/// 3j symbol with all magnetic numbers zero.
pub fn wigner3j_zero(t: WignerTriple) -> SignedSqrt {
    if (t.j1 + t.j2 + t.j3) % 2 == 1 {
        return SignedSqrt::zero();
    }
    wigner3j(t.j1, t.j2, t.j3, 0, 0, 0)
}

/// 6j symbol `{j1 j2 j3; j4 j5 j6}` by the Racah formula.
pub fn wigner6j(js: [u32; 6]) -> SignedSqrt {
    let [a, b, c, d, e, f] = js;
    let triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)];
    if triads.iter().any(|&(x, y, z)| !triangular(x, y, z)) {
        return SignedSqrt::zero();
    }
    let [a, b, c, d, e, f] = js.map(i64::from);
    let root_sq = triangle_coeff(a, b, c)
        * triangle_coeff(a, e, f)
        * triangle_coeff(d, b, f)
        * triangle_coeff(d, e, c);
    let tmin = (a + b + c).max(a + e + f).max(d + b + f).max(d + e + c);
    let tmax = (a + b + d + e).min(b + c + e + f).min(c + a + f + d);
    let mut sum = BigRational::zero();
    for t in tmin..=tmax {
        let den = fact(t - a - b - c)
            * fact(t - a - e - f)
            * fact(t - d - b - f)
            * fact(t - d - e - c)
            * fact(a + b + d + e - t)
            * fact(b + c + e + f - t)
            * fact(c + a + f + d - t);
        let term = BigRational::new(fact(t + 1), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    SignedSqrt::from_sum_and_root(sum, root_sq)
}
