//! `I^[n]_{l l'}(r, r') = int_0^inf k^n j_l(kr) j_l'(kr') dk` in closed form.
//!
//! The two tabulated base integrals (n = 0, 1) are spliced with Heavisides and
//! raised two powers at a time by [`DistExpr::apply_d`].

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dist_algebra::{
    eval_regular, singular_part, DistExpr, ExactCoeff, GammaKind, GammaTag, HyperDescriptor, Orientation, RegionFactor,
    SingularTerm, Term,
};
use crate::error::{Error, Result};
use crate::specfun::{gamma_half_exact, Order};

/// Above this many terms a closed form is treated as a canonicalisation failure.
pub const TERM_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DoubleSpec {
    pub ell: Order,
    pub ellp: Order,
    pub n: i32,
}

impl DoubleSpec {
    pub fn new(ell: u32, ellp: u32, n: i32) -> Self {
        Self {
            ell: Order(ell),
            ellp: Order(ellp),
            n,
        }
    }
}

/// `Gamma(x/2) / (Gamma(y/2) Gamma(z/2))` given doubled arguments; zero when a
/// denominator sits on a pole, `None` when the numerator does.
fn gamma_ratio(x: i64, y: i64, z: i64) -> Option<ExactCoeff> {
    let num = gamma_half_exact(x)?;
    let (Some(dy), Some(dz)) = (gamma_half_exact(y), gamma_half_exact(z)) else {
        return Some(ExactCoeff::new(BigRational::zero(), 0));
    };
    let s = i32::from(num.sqrt_pi_power) - i32::from(dy.sqrt_pi_power) - i32::from(dz.sqrt_pi_power);
    debug_assert!(s % 2 == 0);
    Some(ExactCoeff::new(num.q / (dy.q * dz.q), s / 2))
}

/// Gamma-ratio prefactor of the base integral in the `r' > r` (`CGammaPrimeGreater`)
/// or `r > r'` region.
pub fn c_gamma(ell: Order, ellp: Order, n: i32, kind: GammaKind) -> Option<ExactCoeff> {
    let (own, other) = match kind {
        GammaKind::CGammaPrimeGreater => (i64::from(ell.0), i64::from(ellp.0)),
        GammaKind::CGammaGreater => (i64::from(ellp.0), i64::from(ell.0)),
    };
    let n = i64::from(n);
    gamma_ratio(own + other + 1 + n, other - own + 2 - n, 2 * own + 3)
}

/// The two-region tabulated form continued to arbitrary `n` (no validity check).
fn gr_expr(ell: Order, ellp: Order, n: i32) -> Result<DistExpr> {
    let (l, lp) = (ell.0 as i32, ellp.0 as i32);
    // pi / 2^(2-n)
    let two_pow = if n >= 2 {
        BigRational::from_integer(BigInt::from(2).pow((n - 2) as u32))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(2).pow((2 - n) as u32))
    };
    let pref = ExactCoeff::new(two_pow, 1);
    let oob = || Error::BaseOutOfValidity {
        ell: ell.0,
        ellp: ellp.0,
        n,
    };
    let cp = c_gamma(ell, ellp, n, GammaKind::CGammaPrimeGreater).ok_or_else(oob)?;
    let cg = c_gamma(ell, ellp, n, GammaKind::CGammaGreater).ok_or_else(oob)?;
    let mut expr = DistExpr::empty(ell, ellp, n);
    expr.terms.push(Term {
        region: RegionFactor::HeavisidePrimeGreater,
        coeff: pref.mul(&cp),
        gamma: Some(GammaTag {
            kind: GammaKind::CGammaPrimeGreater,
            base_n: n,
        }),
        pow_r: l,
        pow_rp: -(l + 1 + n),
        hyper: Some(HyperDescriptor::base(Orientation::Primed)),
    });
    expr.terms.push(Term {
        region: RegionFactor::HeavisideGreater,
        coeff: pref.mul(&cg),
        gamma: Some(GammaTag {
            kind: GammaKind::CGammaGreater,
            base_n: n,
        }),
        pow_r: -(lp + 1 + n),
        pow_rp: lp,
        hyper: Some(HyperDescriptor::base(Orientation::Unprimed)),
    });
    // drop kernels that are identically one
    let ctx = expr.clone();
    for t in &mut expr.terms {
        if let Some(h) = t.hyper {
            let (a, b, _) = ctx.kernel_params(&h);
            if a.is_zero() || b.is_zero() {
                t.hyper = None;
            }
        }
    }
    Ok(expr.canonicalize())
}

/// Base integral for `n_base` in `{0, 1}`.
pub fn base_expr(ell: Order, ellp: Order, n_base: i32) -> Result<DistExpr> {
    if !(0..2).contains(&n_base) || i64::from(ell.0) + i64::from(ellp.0) + i64::from(n_base) + 1 <= 0 {
        return Err(Error::BaseOutOfValidity {
            ell: ell.0,
            ellp: ellp.0,
            n: n_base,
        });
    }
    gr_expr(ell, ellp, n_base)
}

/// Direct evaluation of the tabulated formula continued to `n`, where it exists.
pub fn gr_direct(ell: Order, ellp: Order, n: i32, r: f64, rp: f64) -> Result<f64> {
    eval_regular(&gr_expr(ell, ellp, n)?, r, rp)
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Coefficients of `h_l(x) = (-i)^(l+1) e^(ix) sum_k a_k i^k x^(-k-1)`.
fn hankel_coeffs(l: u32) -> Vec<BigRational> {
    (0..=l)
        .map(|k| {
            BigRational::new(
                factorial(l + k),
                factorial(k) * factorial(l - k) * BigInt::from(2).pow(k),
            )
        })
        .collect()
}

/// Delta-supported content of `I^[n]` from the large-`k` expansion of the
/// integrand: `int k^s e^{ikx} dk` carries `pi (-i)^s delta^(s)(x)`.
pub fn uv_delta_content(ell: Order, ellp: Order, n: i32) -> Vec<Term> {
    let (l, lp) = (ell.0, ellp.0);
    let a = hankel_coeffs(l);
    let ap = hankel_coeffs(lp);
    let mut out = Vec::new();
    for (p, ap_) in a.iter().enumerate() {
        for (qq, aq) in ap.iter().enumerate() {
            let s = n - p as i32 - qq as i32 - 2;
            if s < 0 {
                continue;
            }
            let e = (i64::from(lp) + 1 + p as i64) - (i64::from(l) + 1 + qq as i64 + i64::from(s));
            let re = match e.rem_euclid(4) {
                0 => 1,
                2 => -1,
                _ => continue,
            };
            out.push(Term {
                region: RegionFactor::DeltaDerivative(s as u32),
                coeff: ExactCoeff::new(ap_ * aq * frac(re, 2), 1),
                gamma: None,
                pow_r: -(p as i32) - 1,
                pow_rp: -(qq as i32) - 1,
                hyper: None,
            });
        }
    }
    out
}

fn with_uv_deltas(expr: &DistExpr) -> DistExpr {
    let mut terms: Vec<Term> = expr.regular_terms().cloned().collect();
    terms.extend(uv_delta_content(expr.ell, expr.ellp, expr.current_n));
    DistExpr {
        terms,
        ..expr.clone()
    }
    .canonicalize()
}

/// `I^[n]` from base `n mod 2` and `(n - n_base)/2` ladder steps.
pub fn closed_form(spec: DoubleSpec) -> Result<DistExpr> {
    if spec.n < 0 {
        return Err(Error::InvalidInput(format!("n = {} must be non-negative", spec.n)));
    }
    let n_base = spec.n % 2;
    let mut expr = base_expr(spec.ell, spec.ellp, n_base)?;
    for _ in 0..(spec.n - n_base) / 2 {
        expr = expr.apply_d();
        if expr.terms.len() > TERM_LIMIT {
            return Err(Error::TermLimitExceeded { limit: TERM_LIMIT });
        }
    }
    if !expr.is_reduced() {
        expr = with_uv_deltas(&expr);
    }
    Ok(expr)
}

/// Regular value plus symbolic delta content at an off-diagonal point.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleEval {
    pub regular: f64,
    pub singular: Vec<SingularTerm>,
}

pub fn evaluate(spec: DoubleSpec, r: f64, rp: f64) -> Result<DoubleEval> {
    if !(r > 0.0 && rp > 0.0) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    if r == rp {
        return Err(Error::DiagonalPoint(r));
    }
    let expr = closed_form_cached(spec)?;
    Ok(DoubleEval {
        regular: eval_regular(&expr, r, rp)?,
        singular: singular_part(&expr),
    })
}

/// Memo of closed forms keyed by `(l, l', n)`, optionally mirrored on disk.
#[derive(Debug, Default)]
pub struct ClosedFormCache {
    map: RwLock<HashMap<DoubleSpec, Arc<DistExpr>>>,
    dir: Option<PathBuf>,
}

impl ClosedFormCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self {
            map: RwLock::new(HashMap::new()),
            dir,
        }
    }

    /// Disk mirror enabled by `SBF_CACHE_DIR`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os("SBF_CACHE_DIR").map(PathBuf::from))
    }

    fn file(&self, spec: &DoubleSpec) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("closed_form_{}_{}_{}.json", spec.ell.0, spec.ellp.0, spec.n)))
    }

    pub fn get(&self, spec: DoubleSpec) -> Result<Arc<DistExpr>> {
        if let Some(e) = self.map.read().expect("cache poisoned").get(&spec) {
            return Ok(Arc::clone(e));
        }
        let from_disk = self
            .file(&spec)
            .and_then(|p| std::fs::read_to_string(p).ok())
            .and_then(|s| serde_json::from_str::<DistExpr>(&s).ok())
            .filter(|e| e.ell == spec.ell && e.ellp == spec.ellp && e.current_n == spec.n);
        let expr = match from_disk {
            Some(e) => e,
            None => {
                let e = closed_form(spec)?;
                if let Some(p) = self.file(&spec) {
                    // the cache is best effort; a failed write only costs a recomputation
                    if let Ok(s) = serde_json::to_string(&e) {
                        let _ = std::fs::create_dir_all(p.parent().unwrap_or(&p)).and_then(|_| std::fs::write(&p, s));
                    }
                }
                e
            }
        };
        let expr = Arc::new(expr);
        self.map
            .write()
            .expect("cache poisoned")
            .entry(spec)
            .or_insert_with(|| Arc::clone(&expr));
        Ok(expr)
    }
}

/// Process-wide cache, honouring `SBF_CACHE_DIR`.
pub fn closed_form_cached(spec: DoubleSpec) -> Result<Arc<DistExpr>> {
    static CACHE: OnceLock<ClosedFormCache> = OnceLock::new();
    CACHE.get_or_init(ClosedFormCache::from_env).get(spec)
}
