//! Gamma function at integer and half-integer arguments.
//!
//! Every gamma factor in the base integrals has an argument that is a multiple
//! of one half, so the arguments are passed as `twice_arg` integers. The exact
//! form `q * sqrt(pi)^s` lets coefficient algebra stay in rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact value `q * sqrt(pi)^sqrt_pi_power` of `Gamma(twice_arg / 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfGamma {
    pub q: BigRational,
    /// Either 0 (integer argument) or 1 (half-integer argument).
    pub sqrt_pi_power: u8,
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `Gamma(twice_arg / 2)` in exact form, or `None` at the poles.
pub fn gamma_half_exact(twice_arg: i64) -> Option<HalfGamma> {
    if twice_arg % 2 == 0 {
        let x = twice_arg / 2;
        if x <= 0 {
            return None;
        }
        return Some(HalfGamma {
            q: BigRational::from_integer(factorial((x - 1) as u64)),
            sqrt_pi_power: 0,
        });
    }
    // x = k + 1/2
    let k = (twice_arg - 1) / 2;
    let q = if k >= 0 {
        let k = k as u64;
        let num = factorial(2 * k);
        let den = BigInt::from(4u32).pow(k as u32) * factorial(k);
        BigRational::new(num, den)
    } else {
        let k = (-k) as u64;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let num = BigInt::from(sign) * BigInt::from(4u32).pow(k as u32) * factorial(k);
        BigRational::new(num, factorial(2 * k))
    };
    Some(HalfGamma {
        q,
        sqrt_pi_power: 1,
    })
}

impl HalfGamma {
    pub fn to_f64(&self) -> f64 {
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        if self.sqrt_pi_power == 1 {
            q * std::f64::consts::PI.sqrt()
        } else {
            q
        }
    }
}

const EXACT_LIMIT: i64 = 120;

/// `ln |Gamma(twice_arg / 2)|`.
pub fn log_gamma_half(twice_arg: i64) -> Result<f64> {
    let x = twice_arg as f64 / 2.0;
    if twice_arg % 2 == 0 && twice_arg <= 0 {
        return Err(Error::PoleAtNonpositiveInteger(x));
    }
    if twice_arg.abs() <= EXACT_LIMIT {
        let g = gamma_half_exact(twice_arg).expect("pole handled above");
        let q = g.q.abs();
        let lnq = ln_big_rational(&q);
        return Ok(lnq + 0.5 * f64::from(g.sqrt_pi_power) * std::f64::consts::PI.ln());
    }
    if x > 0.0 {
        Ok(statrs::function::gamma::ln_gamma(x))
    } else {
        // reflection: |Gamma(x)| = pi / (|sin(pi x)| Gamma(1 - x))
        let s = (std::f64::consts::PI * x).sin().abs();
        Ok(std::f64::consts::PI.ln() - s.ln() - statrs::function::gamma::ln_gamma(1.0 - x))
    }
}

fn ln_big_rational(q: &BigRational) -> f64 {
    let ln_int = |b: &BigInt| -> f64 {
        let bits = b.bits();
        if bits < 1000 {
            b.to_f64().unwrap().ln()
        } else {
            let shift = bits - 60;
            let top: BigInt = b >> shift;
            top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_int(q.numer()) - ln_int(q.denom())
}

/// `1 / Gamma(twice_arg / 2)`, exactly zero at the poles.
pub fn recip_gamma_half(twice_arg: i64) -> f64 {
    if twice_arg % 2 == 0 && twice_arg <= 0 {
        return 0.0;
    }
    if twice_arg.abs() <= EXACT_LIMIT {
        let g = gamma_half_exact(twice_arg).expect("pole handled above");
        if g.q.is_zero() {
            return f64::INFINITY;
        }
        let inv = (BigRational::one() / g.q).to_f64().unwrap_or(0.0);
        return if g.sqrt_pi_power == 1 {
            inv / std::f64::consts::PI.sqrt()
        } else {
            inv
        };
    }
    recip_gamma(twice_arg as f64 / 2.0)
}

/// `1 / Gamma(x)` for real `x`, exactly zero at non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return 0.0;
    }
    1.0 / statrs::function::gamma::gamma(x)
}
