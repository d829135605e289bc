//! Spherical Bessel functions of the first kind.

use serde::{Deserialize, Serialize};

/// Order of a spherical Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Order(pub u32);

impl Order {
    pub fn get(self) -> u32 {
        self.0
    }
}

impl From<u32> for Order {
    fn from(v: u32) -> Self {
        Order(v)
    }
}

/// `j_ell(x)` for `x >= 0`.
///
/// Upward recurrence when `x > ell`, Miller's downward recurrence normalised
/// against `j_0` or `j_1` otherwise, and the power series for tiny arguments.
pub fn sbf(ell: Order, x: f64) -> f64 {
    let l = ell.0;
    debug_assert!(x >= 0.0, "sbf requires x >= 0");
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let lf = f64::from(l);
    if x * x < 1e-3 * (2.0 * lf + 3.0) {
        return small_series(l, x);
    }
    if l == 0 {
        return x.sin() / x;
    }
    if x > lf {
        let (s, c) = x.sin_cos();
        let mut jm = s / x;
        let mut j = s / (x * x) - c / x;
        for k in 1..l {
            let next = f64::from(2 * k + 1) / x * j - jm;
            jm = j;
            j = next;
        }
        return j;
    }
    miller(l, x)
}

fn small_series(l: u32, x: f64) -> f64 {
    // x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    let mut lead = 1.0;
    for k in 0..l {
        lead *= x / f64::from(2 * k + 3);
    }
    // lead = x^l / (3*5*...*(2l+1)); (2l+1)!! = 1*3*...*(2l+1)
    let q = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= q / (f64::from(k) * f64::from(2 * l + 2 * k + 1));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn miller(l: u32, x: f64) -> f64 {
    let lf = f64::from(l);
    let start = (lf.max(x) + 20.0 + (40.0 * lf.max(x)).sqrt()) as u32 + 2;
    let mut jp = 0.0_f64;
    let mut j = 1e-300_f64;
    let mut at_l = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        // j_{k-1} = (2k+1)/x j_k - j_{k+1}
        let jm = f64::from(2 * k + 1) / x * j - jp;
        jp = j;
        j = jm;
        if k - 1 == l {
            at_l = j;
        }
        if k - 1 == 1 {
            j1 = j;
        }
        if j.abs() > 1e250 {
            jp *= 1e-250;
            j *= 1e-250;
            at_l *= 1e-250;
            j1 *= 1e-250;
        }
    }
    let j0_true = x.sin() / x;
    let j1_true = if x < 0.5 {
        small_series(1, x)
    } else {
        x.sin() / (x * x) - x.cos() / x
    };
    // normalise with whichever of j0, j1 is larger to avoid dividing near a zero
    if j0_true.abs() >= j1_true.abs() {
        at_l * (j0_true / j)
    } else {
        at_l * (j1_true / j1)
    }
}

/// Leading large-argument form `sin(x - ell pi / 2) / x`.
pub fn sbf_asymptotic(ell: Order, x: f64) -> f64 {
    (x - f64::from(ell.0) * std::f64::consts::FRAC_PI_2).sin() / x
}
