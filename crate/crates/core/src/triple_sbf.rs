//! `int k^n j_l1(k r1) j_l2(k r2) j_l3(k r3) dk` by inserting
//! `k^{n-2} j_l3(k r3) = (2/pi) int u^2 du j_L(k u) int k'^n j_l3(k' r3) j_L(k' u) dk'`.
//!
//! The inner `k` integral is Mehrem's closed form for `k^2` weight and even
//! `l1 + l2 + L`; the middle `k'` integral is a double-SBF closed form; the
//! outer `u` integral runs over the finite window `|r1 - r2| <= u <= r1 + r2`.

use std::cell::RefCell;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::dist_algebra::{eval_regular, singular_part};
use crate::double_sbf::{closed_form_cached, DoubleSpec};
use crate::error::{Error, Result};
use crate::quad::{adaptive, principal_value, Tolerance};
use crate::specfun::{hyp3f2, legendre_coefficients, wigner3j_zero, wigner6j, Order, WignerTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TripleSpec {
    pub ell1: Order,
    pub ell2: Order,
    pub ell3: Order,
    pub n: i32,
}

impl TripleSpec {
    pub fn new(ell1: u32, ell2: u32, ell3: u32, n: i32) -> Self {
        Self {
            ell1: Order(ell1),
            ell2: Order(ell2),
            ell3: Order(ell3),
            n,
        }
    }
}

/// Smallest auxiliary order with `l1 + l2 + L` even; `|l1 - l2|` always works.
#[allow(non_snake_case)]
pub fn choose_L(ell1: Order, ell2: Order) -> Order {
    Order(ell1.0.abs_diff(ell2.0))
}

/// Support `[u-, u+]` of the Mehrem factor, where `Delta(u)` runs from 1 to -1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaWindow {
    pub u_minus: f64,
    pub u_plus: f64,
    r1: f64,
    r2: f64,
}

impl BetaWindow {
    pub fn new(r1: f64, r2: f64) -> Self {
        Self {
            u_minus: (r1 - r2).abs(),
            u_plus: r1 + r2,
            r1,
            r2,
        }
    }

    /// `(r1^2 + r2^2 - u^2) / (2 r1 r2)`
    pub fn delta(&self, u: f64) -> f64 {
        // factored about the nearer edge so that the edges give exactly +-1
        let d = 2.0 * self.r1 * self.r2;
        if 2.0 * u <= self.u_minus + self.u_plus {
            1.0 - (u - self.u_minus) * (u + self.u_minus) / d
        } else {
            -1.0 + (self.u_plus - u) * (self.u_plus + u) / d
        }
    }

    pub fn contains(&self, u: f64) -> bool {
        self.u_minus <= u && u <= self.u_plus
    }

    pub fn contains_strictly(&self, u: f64) -> bool {
        self.u_minus < u && u < self.u_plus
    }
}

/// Mehrem's `k^2` triple integral inside its window, as `sum_p c_p u^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MehremPoly {
    pub window: BetaWindow,
    pub terms: Vec<(i32, f64)>,
}

impl MehremPoly {
    /// Zero outside the window; the half-values of the step at the edges are ignored.
    pub fn value(&self, u: f64) -> f64 {
        if !self.window.contains(u) {
            return 0.0;
        }
        self.terms.iter().map(|&(p, c)| c * u.powi(p)).sum()
    }

    /// Coefficients of `u^k * self` (no window applied).
    fn shifted(&self, k: i32) -> Vec<(i32, f64)> {
        self.terms.iter().map(|&(p, c)| (p + k, c)).collect()
    }
}

fn laurent_derivative(terms: &[(i32, f64)], j: u32, u: f64) -> f64 {
    terms
        .iter()
        .map(|&(p, c)| {
            let falling: f64 = (0..j as i32).map(|i| f64::from(p - i)).product();
            c * falling * u.powi(p - j as i32)
        })
        .sum()
}

fn binom_f64(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Laurent form of `int k^2 j_l1(k r1) j_l2(k r2) j_L(k u) dk` inside the window.
#[allow(non_snake_case)]
pub fn mehrem_poly(ell1: Order, ell2: Order, L: Order, r1: f64, r2: f64) -> Result<MehremPoly> {
    let (l1, l2, big_l) = (ell1.0, ell2.0, L.0);
    if (l1 + l2 + big_l) % 2 == 1 {
        return Err(Error::OddSumUnsupported(l1, l2, big_l));
    }
    let lead = wigner3j_zero(WignerTriple::new(l1, l2, big_l));
    if lead.is_zero() {
        return Err(Error::NonTriangularOrders(l1, l2, big_l));
    }
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let e = i64::from(l1) + i64::from(l2) - i64::from(big_l);
    let phase = if e.rem_euclid(4) == 0 { 1.0 } else { -1.0 };
    let pref = std::f64::consts::PI / (4.0 * r1 * r2)
        * phase
        * f64::from(2 * big_l + 1).sqrt()
        * r1.powi(big_l as i32)
        / lead.to_f64();

    // weights of P_l(Delta)
    let lmax = (l1 + l2 + big_l) as usize;
    let mut w = vec![0.0; lmax + 1];
    for cal in 0..=big_l {
        let outer = binom_f64(2 * big_l, 2 * cal).sqrt() * (r2 / r1).powi(cal as i32);
        for (l, wl) in w.iter_mut().enumerate() {
            let l = l as u32;
            let a = wigner3j_zero(WignerTriple::new(l1, big_l - cal, l));
            let b = wigner3j_zero(WignerTriple::new(l2, cal, l));
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let six = wigner6j([l1, l2, big_l, cal, big_l - cal, l]);
            *wl += outer * f64::from(2 * l + 1) * a.to_f64() * b.to_f64() * six.to_f64();
        }
    }
    // sum_l w_l P_l(alpha - gamma u^2) as a polynomial in u^2
    let alpha = (r1 * r1 + r2 * r2) / (2.0 * r1 * r2);
    let gamma = 1.0 / (2.0 * r1 * r2);
    let mut in_u2 = vec![0.0; lmax + 1];
    for (l, &wl) in w.iter().enumerate() {
        if wl == 0.0 {
            continue;
        }
        for (k, &ck) in legendre_coefficients(Order(l as u32)).iter().enumerate() {
            if ck == 0.0 {
                continue;
            }
            for j in 0..=k {
                in_u2[j] += wl * ck * binom_f64(k as u32, j as u32) * alpha.powi((k - j) as i32) * (-gamma).powi(j as i32);
            }
        }
    }
    let terms = in_u2
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (2 * j as i32 - 1 - big_l as i32, pref * c))
        .collect();
    Ok(MehremPoly {
        window: BetaWindow::new(r1, r2),
        terms,
    })
}

/// `int k^2 j_l1(k r1) j_l2(k r2) j_L(k u) dk` for even `l1 + l2 + L`.
#[allow(non_snake_case)]
pub fn mehrem_even_k2(ell1: Order, ell2: Order, L: Order, r1: f64, r2: f64, u: f64) -> Result<f64> {
    Ok(mehrem_poly(ell1, ell2, L, r1, r2)?.value(u))
}

/// `z -> (z^alpha / alpha) 3F2(a, b, alpha; c, alpha + 1; z)`, an antiderivative
/// of `z^(alpha - 1) 2F1(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerlawAntiderivative {
    pub alpha: Rational64,
    pub a: Rational64,
    pub b: Rational64,
    pub c: Rational64,
}

impl PowerlawAntiderivative {
    pub fn eval(&self, z: f64) -> Result<f64> {
        let al = *self.alpha.numer() as f64 / *self.alpha.denom() as f64;
        let f = hyp3f2(self.a, self.b, self.alpha, self.c, self.alpha + 1, z)?;
        Ok(z.powf(al) / al * f)
    }
}

pub fn hyper_powerlaw_antiderivative(alpha: Rational64, a: Rational64, b: Rational64, c: Rational64) -> Result<PowerlawAntiderivative> {
    if alpha == Rational64::from_integer(0) {
        return Err(Error::InvalidInput("alpha must be non-zero".into()));
    }
    Ok(PowerlawAntiderivative { alpha, a, b, c })
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleResult {
    pub value: f64,
    pub triangle_ok: bool,
    /// The middle integral has delta content and no regular part.
    pub delta_supported: bool,
    pub window: [f64; 2],
    pub L: u32,
    pub terms_regular: usize,
    pub terms_singular: Vec<String>,
}

/// Evaluates the reduction at one radius triple.
pub fn reduce_triple(spec: TripleSpec, r1: f64, r2: f64, r3: f64) -> Result<TripleResult> {
    if spec.n < 2 {
        return Err(Error::InvalidInput(format!("triple integrals need n >= 2, got {}", spec.n)));
    }
    if ![r1, r2, r3].iter().all(|r| *r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    #[allow(non_snake_case)]
    let L = choose_L(spec.ell1, spec.ell2);
    let mehrem = mehrem_poly(spec.ell1, spec.ell2, L, r1, r2)?;
    let window = mehrem.window;
    let middle = closed_form_cached(DoubleSpec {
        ell: spec.ell3,
        ellp: L,
        n: spec.n,
    })?;
    let singular = singular_part(&middle);
    let terms_regular = middle.regular_terms().count();
    let triangle_ok = window.contains_strictly(r3);

    // G(u) = (2/pi) u^2 Mehrem(u)
    let g_terms: Vec<(i32, f64)> = mehrem
        .shifted(2)
        .into_iter()
        .map(|(p, c)| (p, c * std::f64::consts::FRAC_2_PI))
        .collect();

    let mut value = 0.0;
    if triangle_ok {
        for s in &singular {
            if s.hyper.is_some() {
                return Err(Error::Unsupported(format!("unreduced delta term {}", s.render())));
            }
            // c(r3) d^m/dr3^m delta(r3 - u) against G(u) gives c(r3) G^(m)(r3)
            value += s.value_at_diagonal(r3) * laurent_derivative(&g_terms, s.m, r3);
        }
    }

    if terms_regular > 0 {
        let failure = RefCell::new(None);
        let integrand = |u: f64| {
            if u == r3 {
                return 0.0;
            }
            let g: f64 = g_terms.iter().map(|&(p, c)| c * u.powi(p)).sum();
            match eval_regular(&middle, r3, u) {
                Ok(m) => g * m,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let tol = Tolerance::rel(1e-11);
        let est = if triangle_ok {
            principal_value(integrand, window.u_minus, window.u_plus, r3, tol)
        } else {
            adaptive(integrand, &[window.u_minus, window.u_plus], tol)
        };
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        value += est?.value;
    }

    Ok(TripleResult {
        value,
        triangle_ok,
        delta_supported: terms_regular == 0 && !singular.is_empty(),
        window: [window.u_minus, window.u_plus],
        L: L.0,
        terms_regular,
        terms_singular: singular.iter().map(|s| s.render()).collect(),
    })
}

/// Independent closed form of `int k^2 j_0(k r1) j_0(k r2) j_1(k r3) dk`.
///
/// The middle integral is `M(u) = 1/(r3 (r3^2 - u^2)) + ln|(r3 + u)/(r3 - u)| / (2 r3^2 u)`
/// on both sides of `u = r3`; `u M(u)` integrates to `F` below, taken as a
/// principal value across `u = r3`.
pub fn reference_001_n2(r1: f64, r2: f64, r3: f64) -> f64 {
    let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln() };
    let f = |u: f64| {
        -(r3 * r3 - u * u).abs().ln() / (2.0 * r3) + (xlogx(u + r3) - xlogx(u - r3)) / (2.0 * r3 * r3)
    };
    let (lo, hi) = ((r1 - r2).abs(), r1 + r2);
    (f(hi) - f(lo)) / (2.0 * r1 * r2)
}
