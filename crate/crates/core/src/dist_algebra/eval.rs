//! Numerical evaluation of distributional expressions.

use num_rational::Rational64;

use super::{render_coeff, DistExpr, ExactCoeff, HyperDescriptor, Orientation, RegionFactor, Term};
use crate::error::{Error, Result};
use crate::oracle::TestFunction;
use crate::quad::{finite_part, principal_value, Tolerance};
use crate::specfun::{hyp2f1_complement, Hyper2F1Params};

fn kernel_value(expr: &DistExpr, h: &HyperDescriptor, r: f64, rp: f64) -> Result<f64> {
    let (a, b, c) = expr.kernel_params(h);
    // 1 - w from the exact difference keeps full precision near the diagonal
    let (w, wc) = match h.orientation {
        Orientation::Primed => ((r / rp) * (r / rp), (rp - r) * (rp + r) / (rp * rp)),
        Orientation::Unprimed => ((rp / r) * (rp / r), (r - rp) * (r + rp) / (r * r)),
    };
    hyp2f1_complement(&Hyper2F1Params::new(a, b, c, w), wc)
}

fn term_value(expr: &DistExpr, t: &Term, r: f64, rp: f64) -> Result<f64> {
    let mut v = t.coeff.to_f64() * r.powi(t.pow_r) * rp.powi(t.pow_rp);
    if let Some(h) = &t.hyper {
        v *= kernel_value(expr, h, r, rp)?;
    }
    Ok(v)
}

/// Heaviside-supported part at an off-diagonal point.
pub fn eval_regular(expr: &DistExpr, r: f64, rp: f64) -> Result<f64> {
    if r == rp {
        return Err(Error::DiagonalPoint(r));
    }
    let active = if rp > r {
        RegionFactor::HeavisidePrimeGreater
    } else {
        RegionFactor::HeavisideGreater
    };
    let mut sum = 0.0;
    for t in expr.terms.iter().filter(|t| t.region == active) {
        sum += term_value(expr, t, r, rp)?;
    }
    Ok(sum)
}

/// One delta-supported contribution `coeff r^pow_r r'^pow_rp d^m/dr^m delta(r - r')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularTerm {
    pub m: u32,
    pub coeff: ExactCoeff,
    pub pow_r: i32,
    pub pow_rp: i32,
    /// Only present for terms whose kernel could not be summed at unit argument.
    pub hyper: Option<HyperDescriptor>,
}

impl SingularTerm {
    pub fn value_at_diagonal(&self, r: f64) -> f64 {
        self.coeff.to_f64() * r.powi(self.pow_r + self.pow_rp)
    }

    /// e.g. `+1/2·π r^-1 r'^-1 δ(r−r')`
    pub fn render(&self) -> String {
        let mut s = render_coeff(&self.coeff);
        if self.pow_r != 0 {
            s.push_str(&format!(" r^{}", self.pow_r));
        }
        if self.pow_rp != 0 {
            s.push_str(&format!(" r'^{}", self.pow_rp));
        }
        if let Some(h) = self.hyper {
            let tick = if h.orientation == Orientation::Primed { "'" } else { "" };
            s.push_str(&format!(" F{tick}_{}{}{}", h.x, h.y, h.z));
        }
        match self.m {
            0 => s.push_str(" δ(r−r')"),
            1 => s.push_str(" ∂δ(r−r')/∂r"),
            m => s.push_str(&format!(" ∂^{m}δ(r−r')/∂r^{m}")),
        }
        s
    }
}

/// Delta-supported content, read off symbolically.
pub fn singular_part(expr: &DistExpr) -> Vec<SingularTerm> {
    expr.delta_terms()
        .map(|t| {
            let RegionFactor::DeltaDerivative(m) = t.region else {
                unreachable!()
            };
            SingularTerm {
                m,
                coeff: t.coeff.clone(),
                pow_r: t.pow_r,
                pow_rp: t.pow_rp,
                hyper: t.hyper,
            }
        })
        .collect()
}

/// `int dr' phi(r') I(r, r')`.
///
/// The regular part is integrated numerically (as a principal value across
/// `r' = r` when the kernels are singular there, as a Hadamard finite part when
/// the pole is of higher order); each reduced delta term
/// `b_j(r) delta^(j)` contributes `b_j(r) phi^(j)(r)`.
pub fn smear(expr: &DistExpr, phi: &TestFunction, r: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in expr.delta_terms() {
        let RegionFactor::DeltaDerivative(m) = t.region else {
            unreachable!()
        };
        if let Some(h) = &t.hyper {
            let (a, b, c) = expr.kernel_params(h);
            let f = |q: Rational64| *q.numer() as f64 / *q.denom() as f64;
            return Err(Error::HypergeometricDivergesAtUnity {
                a: f(a),
                b: f(b),
                c: f(c),
                excess: f(c - a - b),
            });
        }
        if m > 0 && t.pow_rp != 0 {
            return Err(Error::InvalidInput("delta term is not in reduced form".into()));
        }
        total += t.coeff.to_f64() * r.powi(t.pow_r + t.pow_rp) * phi.derivative(m, r);
    }
    if expr.regular_terms().next().is_none() {
        return Ok(total);
    }
    let (lo, hi) = phi.support();
    let lo = lo.max(1e-12 * hi);
    let integrand = |rp: f64| {
        if rp == r {
            return 0.0;
        }
        eval_regular(expr, r, rp).unwrap_or(f64::NAN) * phi.value(rp)
    };
    let est = if lo < r && r < hi {
        match principal_value(integrand, lo, hi, r, Tolerance::rel(1e-10)) {
            // every ladder step can deepen the pole at r' = r by two orders
            Err(Error::Unsupported(_)) => {
                let order = (expr.current_n - 1).max(2) as usize / 2;
                finite_part(integrand, lo, hi, r, order, Tolerance::rel(1e-10))?
            }
            est => est?,
        }
    } else {
        crate::quad::adaptive(integrand, &[lo, hi], Tolerance::rel(1e-10))?
    };
    Ok(total + est.value)
}
