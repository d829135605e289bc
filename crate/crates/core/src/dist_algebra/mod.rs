//! Symbolic distributional expressions for `I^[n]_{l l'}(r, r')` and the
//! raising operator `D = -[d^2/dr^2 + (2/r) d/dr - l(l+1)/r^2]`.
//!
//! A term is `region * q pi^p * r^a r'^b * F(w)`. Radial powers are stored as
//! absolute exponents. Delta-supported terms are reduced to coefficients that
//! depend on `r` alone, which needs `2F1` at unit argument; terms where that
//! value diverges are kept in raw form and flagged by [`DistExpr::is_reduced`].

mod eval;
mod json;

pub use eval::{eval_regular, singular_part, smear, SingularTerm};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::specfun::{hyp2f1_at_one_exact, Order};

/// Support of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionFactor {
    /// `H(r' - r)`
    HeavisidePrimeGreater,
    /// `H(r - r')`
    HeavisideGreater,
    /// `d^m/dr^m delta(r - r')`
    DeltaDerivative(u32),
}

impl RegionFactor {
    pub fn is_delta(self) -> bool {
        matches!(self, RegionFactor::DeltaDerivative(_))
    }
}

/// Exact coefficient `q * pi^pi_power`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactCoeff {
    pub q: BigRational,
    pub pi_power: i32,
}

impl ExactCoeff {
    pub fn new(q: BigRational, pi_power: i32) -> Self {
        Self { q, pi_power }
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::new(BigRational::new(n.into(), d.into()), 0)
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.q.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(self.pi_power)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(&self.q * k, self.pi_power)
    }

    pub fn mul(&self, other: &ExactCoeff) -> Self {
        Self::new(&self.q * &other.q, self.pi_power + other.pi_power)
    }
}

/// Which radius ratio a `2F1` kernel is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    /// argument `(r / r')^2`
    Primed,
    /// argument `(r' / r)^2`
    Unprimed,
}

/// `F_xyz` kernel: offsets added to the base parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperDescriptor {
    pub orientation: Orientation,
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl HyperDescriptor {
    pub fn base(orientation: Orientation) -> Self {
        Self {
            orientation,
            x: 1,
            y: 0,
            z: 3,
        }
    }

    fn raised(self) -> Self {
        Self {
            x: self.x + 2,
            y: self.y + 2,
            z: self.z + 2,
            ..self
        }
    }
}

/// Which gamma-ratio prefactor a term descends from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GammaKind {
    CGammaPrimeGreater,
    CGammaGreater,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaTag {
    pub kind: GammaKind,
    pub base_n: i32,
}

/// One summand. The gamma prefactor is already folded into `coeff`; the tag
/// only records its origin and is dropped when terms of different origin merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub region: RegionFactor,
    pub coeff: ExactCoeff,
    pub gamma: Option<GammaTag>,
    pub pow_r: i32,
    pub pow_rp: i32,
    pub hyper: Option<HyperDescriptor>,
}

type TermKey = (RegionFactor, i32, i32, i32, Option<HyperDescriptor>);

impl Term {
    fn key(&self) -> TermKey {
        (self.region, self.pow_r, self.pow_rp, self.coeff.pi_power, self.hyper)
    }

    fn with(&self, region: RegionFactor, factor: &BigRational, dr: i32, drp: i32, hyper: Option<HyperDescriptor>) -> Term {
        Term {
            region,
            coeff: self.coeff.scale(factor),
            gamma: self.gamma,
            pow_r: self.pow_r + dr,
            pow_rp: self.pow_rp + drp,
            hyper,
        }
    }
}

/// Weight given to the delta produced by differentiating a Heaviside region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpWeight {
    #[default]
    Full,
    Half,
}

/// Finite sum of distributional terms for `I^[current_n]_{ell ellp}(r, r')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistExpr {
    pub ell: Order,
    pub ellp: Order,
    pub base_n: i32,
    pub current_n: i32,
    pub terms: Vec<Term>,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn binom(n: u32, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * q(i64::from(n - i)) / q(i64::from(i + 1));
    }
    acc
}

impl DistExpr {
    pub fn empty(ell: Order, ellp: Order, base_n: i32) -> Self {
        Self {
            ell,
            ellp,
            base_n,
            current_n: base_n,
            terms: Vec::new(),
        }
    }

    /// Parameters `(a, b, c)` of a kernel in this expression's context.
    pub fn kernel_params(&self, h: &HyperDescriptor) -> (Rational64, Rational64, Rational64) {
        let (l, lp, n0) = (i64::from(self.ell.0), i64::from(self.ellp.0), i64::from(self.base_n));
        let a = Rational64::new(l + lp + n0 + i64::from(h.x), 2);
        let (own, other) = match h.orientation {
            Orientation::Primed => (l, lp),
            Orientation::Unprimed => (lp, l),
        };
        let b = Rational64::new(own - other + n0 + i64::from(h.y), 2);
        let c = Rational64::new(2 * own + i64::from(h.z), 2);
        (a, b, c)
    }

    /// Kernels that are identically one are removed.
    fn prune(&self, h: Option<HyperDescriptor>) -> Option<HyperDescriptor> {
        let h = h?;
        let (a, b, _) = self.kernel_params(&h);
        if a.is_zero() || b.is_zero() {
            None
        } else {
            Some(h)
        }
    }

    /// `a b / c` for the kernel, the factor produced by differentiating it.
    fn d_coeff(&self, h: &HyperDescriptor) -> BigRational {
        let (a, b, c) = self.kernel_params(h);
        let big = |r: Rational64| BigRational::new((*r.numer()).into(), (*r.denom()).into());
        big(a) * big(b) / big(c)
    }

    pub fn regular_terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| !t.region.is_delta())
    }

    pub fn delta_terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| t.region.is_delta())
    }

    /// True when every delta term has an `r`-only coefficient.
    pub fn is_reduced(&self) -> bool {
        self.delta_terms().all(|t| t.hyper.is_none())
    }

    /// `d/dr` of one term, including the jump of its region.
    fn d_dr(&self, t: &Term, weight: &BigRational) -> Vec<Term> {
        let mut out = Vec::with_capacity(3);
        let a = t.pow_r;
        match t.region {
            RegionFactor::HeavisidePrimeGreater => {
                out.push(t.with(RegionFactor::DeltaDerivative(0), &-weight.clone(), 0, 0, t.hyper));
            }
            RegionFactor::HeavisideGreater => {
                out.push(t.with(RegionFactor::DeltaDerivative(0), weight, 0, 0, t.hyper));
            }
            RegionFactor::DeltaDerivative(m) => {
                out.push(t.with(RegionFactor::DeltaDerivative(m + 1), &BigRational::one(), 0, 0, t.hyper));
            }
        }
        if a != 0 {
            out.push(t.with(t.region, &q(i64::from(a)), -1, 0, t.hyper));
        }
        if let Some(h) = t.hyper {
            let d = self.d_coeff(&h);
            let raised = self.prune(Some(h.raised()));
            match h.orientation {
                Orientation::Primed => out.push(t.with(t.region, &(d * q(2)), 1, -2, raised)),
                Orientation::Unprimed => out.push(t.with(t.region, &(d * q(-2)), -3, 2, raised)),
            }
        }
        out
    }

    /// `d/dr'` of a coefficient function (regions untouched).
    fn d_drp(&self, t: &Term) -> Vec<Term> {
        let mut out = Vec::with_capacity(2);
        if t.pow_rp != 0 {
            out.push(t.with(t.region, &q(i64::from(t.pow_rp)), 0, -1, t.hyper));
        }
        if let Some(h) = t.hyper {
            let d = self.d_coeff(&h);
            let raised = self.prune(Some(h.raised()));
            match h.orientation {
                Orientation::Primed => out.push(t.with(t.region, &(d * q(-2)), 2, -3, raised)),
                Orientation::Unprimed => out.push(t.with(t.region, &(d * q(2)), -2, 1, raised)),
            }
        }
        out
    }

    /// Coefficient of `t` at `r' = r`, as `q pi^p r^k`; `None` if a kernel diverges there.
    fn at_diagonal(&self, t: &Term) -> Option<(ExactCoeff, i32)> {
        let mut coeff = t.coeff.clone();
        if let Some(h) = t.hyper {
            let (a, b, c) = self.kernel_params(&h);
            let (v, p) = hyp2f1_at_one_exact(a, b, c)?;
            coeff = coeff.mul(&ExactCoeff::new(v, p));
        }
        Some((coeff, t.pow_r + t.pow_rp))
    }

    /// Rewrites `c(r, r') delta^(m)` as `sum_j b_j(r) delta^(j)`.
    fn reduce_delta(&self, t: &Term) -> Option<Vec<Term>> {
        let RegionFactor::DeltaDerivative(m) = t.region else {
            return Some(vec![t.clone()]);
        };
        if t.hyper.is_none() && (m > 0 && t.pow_rp == 0 || m == 0 && is_display_split(t.pow_r, t.pow_rp)) {
            return Some(vec![t.clone()]);
        }
        let mut out = Vec::new();
        // derivs[k] = d^k c / dr'^k
        let mut derivs = vec![vec![t.clone()]];
        for _ in 0..m {
            let next: Vec<Term> = derivs.last().unwrap().iter().flat_map(|x| self.d_drp(x)).collect();
            derivs.push(next);
        }
        for j in 0..=m {
            let sign_binom = binom(m, j);
            for x in &derivs[(m - j) as usize] {
                let (c, k) = self.at_diagonal(x)?;
                if c.is_zero() {
                    continue;
                }
                let (pr, prp) = if j == 0 { display_split(k) } else { (k, 0) };
                out.push(Term {
                    region: RegionFactor::DeltaDerivative(j),
                    coeff: c.scale(&sign_binom),
                    gamma: t.gamma,
                    pow_r: pr,
                    pow_rp: prp,
                    hyper: None,
                });
            }
        }
        Some(out)
    }

    /// Merges like terms, drops zeros, reduces delta coefficients where possible
    /// and sorts deterministically.
    pub fn canonicalize(&self) -> DistExpr {
        let mut expanded = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match self.reduce_delta(t) {
                Some(v) => expanded.extend(v),
                None => expanded.push(t.clone()),
            }
        }
        let mut merged: BTreeMap<TermKey, Term> = BTreeMap::new();
        for t in expanded {
            if t.coeff.is_zero() {
                continue;
            }
            match merged.get_mut(&t.key()) {
                Some(acc) => {
                    acc.coeff.q += &t.coeff.q;
                    if acc.gamma != t.gamma {
                        acc.gamma = None;
                    }
                }
                None => {
                    merged.insert(t.key(), t);
                }
            }
        }
        let terms = merged.into_values().filter(|t| !t.coeff.is_zero()).collect();
        DistExpr { terms, ..self.clone() }
    }

    /// Exact linear combination `self + k * other` (same orders and base).
    pub fn add_scaled(&self, other: &DistExpr, k: &BigRational) -> DistExpr {
        assert_eq!((self.ell, self.ellp, self.base_n), (other.ell, other.ellp, other.base_n));
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term {
            coeff: t.coeff.scale(k),
            ..t.clone()
        }));
        DistExpr {
            terms,
            current_n: self.current_n.max(other.current_n),
            ..self.clone()
        }
        .canonicalize()
    }

    /// Relabels `(l, r) <-> (l', r')`.
    pub fn swapped(&self) -> DistExpr {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let (region, sign) = match t.region {
                    RegionFactor::HeavisidePrimeGreater => (RegionFactor::HeavisideGreater, 1),
                    RegionFactor::HeavisideGreater => (RegionFactor::HeavisidePrimeGreater, 1),
                    // delta^(m)(r' - r) = (-1)^m delta^(m)(r - r') in terms of d/dr
                    RegionFactor::DeltaDerivative(m) => (t.region, if m % 2 == 0 { 1 } else { -1 }),
                };
                let gamma = t.gamma.map(|g| GammaTag {
                    kind: match g.kind {
                        GammaKind::CGammaPrimeGreater => GammaKind::CGammaGreater,
                        GammaKind::CGammaGreater => GammaKind::CGammaPrimeGreater,
                    },
                    ..g
                });
                let hyper = t.hyper.map(|h| HyperDescriptor {
                    orientation: match h.orientation {
                        Orientation::Primed => Orientation::Unprimed,
                        Orientation::Unprimed => Orientation::Primed,
                    },
                    ..h
                });
                Term {
                    region,
                    coeff: t.coeff.scale(&q(sign)),
                    gamma,
                    pow_r: t.pow_rp,
                    pow_rp: t.pow_r,
                    hyper,
                }
            })
            .collect::<Vec<_>>();
        // swapped delta coefficients depend on r'; canonicalising moves them back onto r
        DistExpr {
            ell: self.ellp,
            ellp: self.ell,
            terms,
            ..self.clone()
        }
        .canonicalize()
    }

    pub fn apply_d(&self) -> DistExpr {
        self.apply_d_with(JumpWeight::Full)
    }

    /// `I^[n] -> I^[n+2]`.
    pub fn apply_d_with(&self, weight: JumpWeight) -> DistExpr {
        self.apply_d_raw(weight).canonicalize()
    }

    /// Product-rule expansion of `D` before any merging or delta reduction.
    pub fn apply_d_raw(&self, weight: JumpWeight) -> DistExpr {
        let w = match weight {
            JumpWeight::Full => BigRational::one(),
            JumpWeight::Half => BigRational::new(1.into(), 2.into()),
        };
        let l = i64::from(self.ell.0);
        let first: Vec<Term> = self.terms.iter().flat_map(|t| self.d_dr(t, &w)).collect();
        let second: Vec<Term> = first.iter().flat_map(|t| self.d_dr(t, &w)).collect();
        let mut terms = Vec::with_capacity(first.len() + second.len() + self.terms.len());
        let minus_one = q(-1);
        terms.extend(second.iter().map(|t| t.with(t.region, &minus_one, 0, 0, t.hyper)));
        terms.extend(first.iter().map(|t| t.with(t.region, &q(-2), -1, 0, t.hyper)));
        if l != 0 {
            let ll = q(l * (l + 1));
            terms.extend(self.terms.iter().map(|t| t.with(t.region, &ll, -2, 0, t.hyper)));
        }
        DistExpr {
            terms,
            current_n: self.current_n + 2,
            ..self.clone()
        }
    }
}

/// Split of `r^k` used for `m = 0` delta terms, e.g. `r^-2 -> r^-1 r'^-1`.
pub(crate) fn display_split(k: i32) -> (i32, i32) {
    let prp = k / 2;
    (k - prp, prp)
}

fn is_display_split(pr: i32, prp: i32) -> bool {
    display_split(pr + prp) == (pr, prp)
}

/// Human rendering of a coefficient such as `-3/2 pi^-1`.
pub fn render_coeff(c: &ExactCoeff) -> String {
    let mut s = if c.q.denom().is_one() {
        c.q.numer().to_string()
    } else {
        format!("{}/{}", c.q.numer(), c.q.denom())
    };
    match c.pi_power {
        0 => {}
        1 => s.push_str("·π"),
        p => s.push_str(&format!("·π^{p}")),
    }
    if c.q.is_negative() {
        s
    } else {
        format!("+{s}")
    }
}

#[cfg(test)]
mod tests;
