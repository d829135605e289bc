//! Independent numerical checks: oscillatory quadrature, damping with
//! extrapolation, and smearing against Gaussian test functions.
//!
//! The k-space integrand `k^n prod_i j_{l_i}(k r_i)` is split at a point `K`.
//! Below `K` it is integrated directly with Gauss–Legendre panels. Above `K`
//! each `j_l` is replaced by its finite Hankel expansion, which turns the
//! product into an exact sum of frequency components `e^{i w k} Q_w(k)` with
//! Laurent polynomials `Q_w`; each tail is then summed on its own.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, gl_panels};
use crate::specfun::{sbf, Order};

/// Unnormalised Gaussian `exp(-(x - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub width: f64,
}

impl TestFunction {
    pub fn gaussian(center: f64, width: f64) -> Self {
        debug_assert!(width > 0.0 && width < center / 3.0);
        Self { center, width }
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        (-0.5 * t * t).exp()
    }

    /// `d^j/dx^j` via probabilists' Hermite polynomials.
    pub fn derivative(&self, j: u32, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        // He_{k+1} = t He_k - k He_{k-1}
        let (mut h0, mut h1) = (1.0, t);
        let he = match j {
            0 => 1.0,
            1 => t,
            _ => {
                for k in 1..j {
                    let next = t * h1 - f64::from(k) * h0;
                    h0 = h1;
                    h1 = next;
                }
                h1
            }
        };
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * he * self.width.powi(-(j as i32)) * (-0.5 * t * t).exp()
    }

    /// Interval outside which the function is below `exp(-32)`.
    pub fn support(&self) -> (f64, f64) {
        ((self.center - 8.0 * self.width).max(0.0), self.center + 8.0 * self.width)
    }
}

/// How the oscillatory tail is summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accel {
    /// Partial integrals between successive half periods, Wynn epsilon on the partial sums.
    PartitionEpsilon,
    /// `e^{-eps k}` damping at each `eps = s * w` for the ladder `s`, Richardson to `eps = 0`.
    Damping { ladder: Vec<f64> },
}

impl Accel {
    pub fn damping() -> Self {
        Accel::Damping {
            ladder: vec![0.2, 0.1, 0.05, 0.025],
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Accel::PartitionEpsilon => "partition+epsilon",
            Accel::Damping { .. } => "damping+richardson",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Switch from direct quadrature to component tails; chosen automatically
    /// (and never below the safe value for the Hankel expansion) when absent.
    pub k_max: Option<f64>,
    /// Gauss–Legendre panels per half period of the fastest oscillation.
    pub panels_per_period: u32,
    pub accel: Accel,
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            k_max: None,
            panels_per_period: 2,
            accel: Accel::PartitionEpsilon,
            tolerance: 1e-11,
        }
    }
}

impl QuadratureConfig {
    pub fn damping() -> Self {
        Self {
            accel: Accel::damping(),
            tolerance: 1e-9,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if self.panels_per_period == 0 {
            return Err(Error::InvalidInput("panels_per_period must be positive".into()));
        }
        if let Accel::Damping { ladder } = &self.accel {
            let decreasing = ladder.windows(2).all(|w| w[1] < w[0]);
            if ladder.len() < 2 || !decreasing || ladder.iter().any(|&e| !(e > 0.0)) {
                return Err(Error::InvalidInput(
                    "damping ladder needs at least two positive, strictly decreasing values".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub error_estimate: f64,
    pub method: String,
    pub panels: usize,
    pub diverged: bool,
}

impl OracleReport {
    pub fn divergent(cfg: &QuadratureConfig) -> Self {
        Self {
            value: f64::NAN,
            error_estimate: f64::INFINITY,
            method: cfg.accel.name().into(),
            panels: 0,
            diverged: true,
        }
    }
}

const GL_ORDER: usize = 16;

/// `e^{i w k} sum_p c_p k^p`, with `w >= 0`; components with `w > 0` stand for
/// twice their real part.
#[derive(Debug, Clone)]
struct Component {
    omega: f64,
    coeffs: BTreeMap<i32, Complex64>,
}

impl Component {
    fn eval(&self, k: f64) -> f64 {
        let q: Complex64 = self.coeffs.iter().map(|(&p, &c)| c * k.powi(p)).sum();
        if self.omega == 0.0 {
            q.re
        } else {
            2.0 * (Complex64::from_polar(1.0, self.omega * k) * q).re
        }
    }
}

fn hankel_coeffs(l: u32) -> Vec<f64> {
    // (l + m)! / (m! (l - m)! 2^m)
    let mut out = Vec::with_capacity(l as usize + 1);
    let mut a = 1.0;
    for m in 0..=l {
        out.push(a);
        let m = f64::from(m);
        a *= (f64::from(l) + m + 1.0) * (f64::from(l) - m) / ((m + 1.0) * 2.0);
    }
    out
}

/// `j_l(k r) = (e^{ikr} A(k) + e^{-ikr} conj A(k)) / 2` with Laurent `A`.
fn hankel_laurent(l: u32, r: f64) -> BTreeMap<i32, Complex64> {
    let pre = Complex64::new(0.0, -1.0).powu(l + 1);
    hankel_coeffs(l)
        .into_iter()
        .enumerate()
        .map(|(m, a)| {
            let m = m as i32;
            (-m - 1, pre * Complex64::new(0.0, 1.0).powi(m) * a * r.powi(-m - 1))
        })
        .collect()
}

fn laurent_mul(a: &BTreeMap<i32, Complex64>, b: &BTreeMap<i32, Complex64>, scale: Complex64) -> BTreeMap<i32, Complex64> {
    let mut out = BTreeMap::new();
    for (&pa, &ca) in a {
        for (&pb, &cb) in b {
            *out.entry(pa + pb).or_insert(Complex64::new(0.0, 0.0)) += ca * cb * scale;
        }
    }
    out
}

fn components(orders: &[Order], radii: &[f64], n: i32, k_split: f64) -> Vec<Component> {
    let mut terms: Vec<(f64, BTreeMap<i32, Complex64>)> = vec![(0.0, BTreeMap::from([(n, Complex64::new(1.0, 0.0))]))];
    for (&l, &r) in orders.iter().zip(radii) {
        let a = hankel_laurent(l.0, r);
        let a_conj: BTreeMap<_, _> = a.iter().map(|(&p, c)| (p, c.conj())).collect();
        let half = Complex64::new(0.5, 0.0);
        terms = terms
            .iter()
            .flat_map(|(w, q)| [(w + r, laurent_mul(q, &a, half)), (w - r, laurent_mul(q, &a_conj, half))])
            .collect();
    }
    terms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let merge_tol = 1e-12 * radii.iter().sum::<f64>();
    let mut grouped: Vec<(f64, BTreeMap<i32, Complex64>)> = Vec::new();
    for (w, q) in terms {
        match grouped.last_mut() {
            Some((w0, acc)) if (w - *w0).abs() <= merge_tol => {
                for (p, c) in q {
                    *acc.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
                }
            }
            _ => grouped.push((w, q)),
        }
    }
    // magnitude of each coefficient at the split point decides what is noise
    let scale = grouped
        .iter()
        .flat_map(|(_, q)| q.iter().map(|(&p, c)| c.norm() * k_split.powi(p)))
        .fold(0.0, f64::max);
    grouped
        .into_iter()
        .filter(|(w, _)| *w >= -merge_tol)
        .map(|(w, q)| {
            let omega = if w.abs() <= merge_tol { 0.0 } else { w };
            let coeffs = q
                .into_iter()
                .filter(|(p, c)| c.norm() * k_split.powi(*p) > 1e-13 * scale)
                .collect();
            Component { omega, coeffs }
        })
        .filter(|c| !c.coeffs.is_empty())
        .collect()
}

/// Partial sums -> Wynn epsilon estimate (last even column).
fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    let mut prev = vec![0.0; n + 1];
    let mut cur = s.to_vec();
    let mut best = s[n - 1];
    for k in 1..n {
        let mut next = Vec::with_capacity(n - k);
        for i in 0..n - k {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                return cur[i + 1];
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}

/// Polynomial through `(x_i, y_i)` evaluated at 0 (Neville).
fn richardson_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
        }
    }
    p[0]
}

struct Tail {
    value: f64,
    error: f64,
    panels: usize,
}

fn tail_partition(c: &Component, k0: f64, abs_tol: f64) -> Result<Tail> {
    let rule = gauss_legendre(GL_ORDER);
    let h = std::f64::consts::PI / c.omega;
    let f = |k: f64| c.eval(k);
    let mut sums = Vec::new();
    let mut acc = 0.0;
    let (mut last, mut hits) = (f64::NAN, 0);
    for m in 0..2000 {
        let a = k0 + h * m as f64;
        acc += rule.integrate(a, a + h, f);
        sums.push(acc);
        if sums.len() < 6 {
            continue;
        }
        let start = sums.len().saturating_sub(40);
        let est = wynn_epsilon(&sums[start..]);
        let err = (est - last).abs();
        last = est;
        if err <= abs_tol {
            hits += 1;
            if hits >= 2 {
                return Ok(Tail {
                    value: est,
                    error: err,
                    panels: m + 1,
                });
            }
        } else {
            hits = 0;
        }
    }
    Err(Error::NoConvergence {
        iterations: 2000,
        last_term: last,
    })
}

fn tail_damped(c: &Component, k0: f64, ladder: &[f64]) -> Tail {
    let rule = gauss_legendre(GL_ORDER);
    let h = std::f64::consts::PI / c.omega;
    let mut panels = 0;
    let values: Vec<f64> = ladder
        .iter()
        .map(|s| {
            let eps = s * c.omega;
            // e^{-eps (k - k0)} < 1e-22 beyond this
            let steps = (50.0 / (eps * h)).ceil() as usize;
            panels += steps;
            (0..steps)
                .map(|m| {
                    let a = k0 + h * m as f64;
                    rule.integrate(a, a + h, |k| (-eps * (k - k0)).exp() * c.eval(k))
                })
                .sum()
        })
        .collect();
    let eps: Vec<f64> = ladder.iter().map(|s| s * c.omega).collect();
    let value = richardson_at_zero(&eps, &values);
    let coarse = richardson_at_zero(&eps[..eps.len() - 1], &values[..values.len() - 1]);
    Tail {
        value,
        error: (value - coarse).abs(),
        panels,
    }
}

fn divergence(msg: String) -> Error {
    Error::DivergenceDetected(msg)
}

/// `int_0^inf k^n prod_i j_{l_i}(k r_i) dk`.
pub fn oscillatory_integral(orders: &[Order], radii: &[f64], n: i32, cfg: &QuadratureConfig) -> Result<OracleReport> {
    cfg.validate()?;
    if orders.is_empty() || orders.len() != radii.len() {
        return Err(Error::InvalidInput("need one radius per order".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let lsum: u32 = orders.iter().map(|l| l.0).sum();
    if n < 0 && i64::from(n) + i64::from(lsum) + 1 <= 0 {
        return Err(divergence(format!("k^{n} is not integrable at k = 0")));
    }
    let safe = orders
        .iter()
        .zip(radii)
        .map(|(l, r)| (2.0 * f64::from(l.0) + 10.0) / r)
        .fold(0.0, f64::max);
    let k_split = cfg.k_max.unwrap_or(0.0).max(safe);
    let comps = components(orders, radii, n, k_split);
    // damping sums oscillatory tails in the Abel sense, so only the
    // non-oscillating part can diverge there
    let abel = matches!(cfg.accel, Accel::Damping { .. });
    for c in &comps {
        let worst = *c.coeffs.keys().last().expect("non-empty");
        if (c.omega == 0.0 && worst >= -1) || (!abel && worst >= 0) {
            return Err(divergence(format!(
                "tail term k^{worst} at frequency {} does not decay",
                c.omega
            )));
        }
    }

    let rsum: f64 = radii.iter().sum();
    let half_period = std::f64::consts::PI / rsum;
    let head_panels = ((k_split / half_period).ceil() as usize).max(1) * cfg.panels_per_period as usize;
    let integrand = |k: f64| {
        let mut v = if n == 0 { 1.0 } else { k.powi(n) };
        for (&l, &r) in orders.iter().zip(radii) {
            v *= sbf(l, k * r);
        }
        v
    };
    let head = gl_panels(integrand, 0.0, k_split, GL_ORDER, head_panels);
    let head_check = gl_panels(integrand, 0.0, k_split, GL_ORDER, 2 * head_panels);
    let scale = head.abs().max(1e-300);

    let mut value = head_check;
    let mut error = (head - head_check).abs();
    let mut panels = 3 * head_panels;
    for c in &comps {
        if c.omega == 0.0 {
            // exact: int_K^inf k^p dk = -K^{p+1} / (p + 1)
            value += c
                .coeffs
                .iter()
                .map(|(&p, z)| -z.re * k_split.powi(p + 1) / f64::from(p + 1))
                .sum::<f64>();
            continue;
        }
        let t = match &cfg.accel {
            Accel::PartitionEpsilon => tail_partition(c, k_split, cfg.tolerance * scale)?,
            Accel::Damping { ladder } => tail_damped(c, k_split, ladder),
        };
        value += t.value;
        error += t.error;
        panels += t.panels;
    }
    Ok(OracleReport {
        value,
        error_estimate: error,
        method: cfg.accel.name().into(),
        panels,
        diverged: false,
    })
}

/// `int dk k^n j_l(k r) T(k)` with `T(k) = int dr' phi(r') j_l'(k r')`, i.e.
/// `int dr' phi(r') I(r, r')` computed in the absolutely convergent order.
pub fn smeared_double(ell: Order, ellp: Order, n: i32, r: f64, phi: &TestFunction) -> Result<f64> {
    let (lo, hi) = phi.support();
    // the transform of a Gaussian is below e^-72 past 12 / width
    smear_k(ell, ellp, n, r, |x| phi.value(x), (lo, hi), 12.0 / phi.width)
}

fn smear_k(
    ell: Order,
    ellp: Order,
    n: i32,
    r: f64,
    phi: impl Fn(f64) -> f64,
    (lo, hi): (f64, f64),
    k_cut: f64,
) -> Result<f64> {
    if n < 0 || !(r > 0.0) {
        return Err(Error::InvalidInput("need n >= 0 and r > 0".into()));
    }
    let transform = |k: f64| {
        let panels = ((k * (hi - lo) / 1.5).ceil() as usize).max(4);
        gl_panels(|rp| phi(rp) * sbf(ellp, k * rp), lo, hi, GL_ORDER, panels)
    };
    let rule = gauss_legendre(GL_ORDER);
    let h = std::f64::consts::PI / (r + hi) / 2.0;
    let tol = 1e-12;
    let (mut total, mut peak, mut quiet) = (0.0, 0.0f64, 0);
    let max_panels = (k_cut / h).ceil() as usize + 10;
    for m in 0..max_panels {
        let a = h * m as f64;
        let mut panel_max = 0.0f64;
        let s = rule.integrate(a, a + h, |k| {
            let v = k.powi(n) * sbf(ell, k * r) * transform(k);
            panel_max = panel_max.max(v.abs());
            v
        });
        total += s;
        peak = peak.max(panel_max);
        // ten panels make five periods of the fastest oscillation
        if panel_max <= tol * peak {
            quiet += 1;
            if quiet >= 10 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        if a > k_cut {
            return Ok(total);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_panels,
        last_term: total,
    })
}
