//! Integrals of four or more spherical Bessel functions.
//!
//! A split inserts `delta(k - k') / k^2 = (2/pi) int u^2 du j_L(ku) j_L(k'u)`
//! between a head group `B`, which keeps a `k^2` weight, and a tail group `A`,
//! which keeps `k^n`:
//!
//! `I = (2/pi) int u^2 du [int k^2 B(k) j_L(ku)] [int k'^n A(k') j_L(k'u)]`.
//!
//! Each side is again a Bessel-product integral with one order more than its
//! group, so the recursion ends in Mehrem pairs and triple reductions. The
//! auxiliary integrals are done numerically over their finite supports.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive, Tolerance};
use crate::specfun::Order;
use crate::triple_sbf::{choose_L, mehrem_poly, reduce_triple, TripleSpec};

/// Largest number of Bessel factors accepted.
pub const MAX_FACTORS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSpec {
    pub orders: Vec<Order>,
    pub radii: Vec<f64>,
    pub n: i32,
}

impl MultiSpec {
    pub fn new(orders: &[u32], radii: &[f64], n: i32) -> Self {
        Self {
            orders: orders.iter().map(|&l| Order(l)).collect(),
            radii: radii.to_vec(),
            n,
        }
    }

    /// Reorders the factors: factor `i` of the result is factor `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            orders: perm.iter().map(|&i| self.orders[i]).collect(),
            radii: perm.iter().map(|&i| self.radii[i]).collect(),
            n: self.n,
        }
    }

    fn validate(&self) -> Result<()> {
        let n_f = self.orders.len();
        if n_f != self.radii.len() {
            return Err(Error::InvalidInput(format!(
                "{} orders but {} radii",
                n_f,
                self.radii.len()
            )));
        }
        if !(4..=MAX_FACTORS).contains(&n_f) {
            return Err(Error::InvalidInput(format!(
                "multi-SBF integrals take 4 to {MAX_FACTORS} factors, got {n_f}"
            )));
        }
        if !self.radii.iter().all(|r| *r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput("radii must be positive".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("need n >= 2, got {}", self.n)));
        }
        if self.n > 2 {
            // the k'^n leaf is then a distribution in the auxiliary radius
            return Err(Error::Unsupported(format!(
                "n = {} leaves distributional content in the auxiliary radius; only n = 2 is evaluated",
                self.n
            )));
        }
        Ok(())
    }
}

/// One Bessel factor `j_order(k radius)`; `radius` names an input radius
/// (`r1`, ...) or an auxiliary variable (`u1`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub order: u32,
    pub radius: String,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionTree {
    /// `int k^2 j j j_L` with an even order sum, in closed form.
    Mehrem { factors: Vec<Factor> },
    /// Three factors under `k^n`, through the triple reduction.
    Triple { factors: Vec<Factor>, n: i32 },
    Split {
        aux: String,
        L: u32,
        /// Bounds of the auxiliary radius.
        support: [f64; 2],
        /// `l` sums of the two sides have different parity, so no single `L`
        /// makes both even.
        parity_mismatch: bool,
        /// The `k^2` side.
        head: Box<ReductionTree>,
        /// The `k^n` side.
        tail: Box<ReductionTree>,
    },
}

impl ReductionTree {
    /// Number of auxiliary variables introduced.
    pub fn auxiliaries(&self) -> usize {
        match self {
            ReductionTree::Split { head, tail, .. } => 1 + head.auxiliaries() + tail.auxiliaries(),
            _ => 0,
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&ReductionTree> {
        match self {
            ReductionTree::Split { head, tail, .. } => {
                let mut v = head.leaves();
                v.extend(tail.leaves());
                v
            }
            leaf => vec![leaf],
        }
    }

    /// One line per node, indented by depth.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let list = |f: &[Factor]| {
            f.iter()
                .map(|f| format!("j{}(k {})", f.order, f.radius))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            ReductionTree::Mehrem { factors } => out.push_str(&format!("{pad}∫k² {} dk  [Mehrem]\n", list(factors))),
            ReductionTree::Triple { factors, n } => {
                out.push_str(&format!("{pad}∫k^{n} {} dk  [triple]\n", list(factors)))
            }
            ReductionTree::Split {
                aux,
                L,
                support,
                parity_mismatch,
                head,
                tail,
            } => {
                let note = if *parity_mismatch { ", parities differ" } else { "" };
                out.push_str(&format!(
                    "{pad}(2/π) ∫ {aux}² d{aux} over [{:.6}, {:.6}], L = {L}{note}\n",
                    support[0], support[1]
                ));
                head.render_into(depth + 1, out);
                tail.render_into(depth + 1, out);
            }
        }
    }
}

/// Internal factor with its numeric radius (auxiliaries are filled in later).
#[derive(Debug, Clone, Copy)]
enum Radius {
    Given(usize),
    Aux(usize),
}

#[derive(Debug, Clone)]
struct Group {
    orders: Vec<u32>,
    radii: Vec<Radius>,
}

/// Compiled plan: the tree plus what evaluation needs.
#[allow(non_snake_case)]
#[derive(Debug, Clone)]
enum Node {
    Mehrem(Group),
    Triple(Group, i32),
    Split {
        aux: usize,
        L: u32,
        head: Box<Node>,
        tail: Box<Node>,
        /// radii of the head group, which bound the auxiliary variable
        head_given: Vec<Radius>,
        tail_given: Vec<Radius>,
        parity_mismatch: bool,
    },
}

/// Bounds `[max(0, 2 max - sum), sum]` on a radius closing a polygon with `radii`.
fn polygon_support(radii: &[f64]) -> [f64; 2] {
    let sum: f64 = radii.iter().sum();
    let max = radii.iter().copied().fold(0.0, f64::max);
    [(2.0 * max - sum).max(0.0), sum]
}

fn closes(a: u32, b: u32, c: u32) -> bool {
    (a + b + c) % 2 == 0 && a.abs_diff(b) <= c && c <= a + b
}

fn split_point(m: usize) -> usize {
    (m / 2).max(2).min(m - 2)
}

/// Auxiliary order that makes the head `orders` a chain of even-sum,
/// triangular Mehrem kernels, so the head vanishes off the polygon of its radii.
fn closing_order(orders: &[u32]) -> u32 {
    if orders.len() == 2 {
        return choose_L(Order(orders[0]), Order(orders[1])).0;
    }
    // mirrors `build` on `orders + [L]`
    let cut = split_point(orders.len() + 1);
    let inner = closing_order(&orders[..cut]);
    let rest: Vec<u32> = std::iter::once(inner).chain(orders[cut..].iter().copied()).collect();
    closing_order(&rest)
}

fn build(group: Group, n: i32, next_aux: &mut usize) -> Node {
    let m = group.orders.len();
    if m == 3 {
        let [a, b, c] = [group.orders[0], group.orders[1], group.orders[2]];
        return if n == 2 && closes(a, b, c) {
            Node::Mehrem(group)
        } else {
            Node::Triple(group, n)
        };
    }
    // head takes the first half and the k^2 weight, the tail the rest and k^n
    let cut = split_point(m);
    #[allow(non_snake_case)]
    let L = closing_order(&group.orders[..cut]);
    let aux = *next_aux;
    *next_aux += 1;
    let mut head = Group {
        orders: group.orders[..cut].to_vec(),
        radii: group.radii[..cut].to_vec(),
    };
    // the new auxiliary goes first in the tail so a group's incoming one stays last
    let tail = Group {
        orders: std::iter::once(L).chain(group.orders[cut..].iter().copied()).collect(),
        radii: std::iter::once(Radius::Aux(aux)).chain(group.radii[cut..].iter().copied()).collect(),
    };
    let head_given = head.radii.clone();
    let tail_given = tail.radii[1..].to_vec();
    let parity_mismatch = head.orders.iter().sum::<u32>() % 2 != tail.orders[1..].iter().sum::<u32>() % 2;
    head.orders.push(L);
    head.radii.push(Radius::Aux(aux));
    let head = Box::new(build(head, 2, next_aux));
    let tail = Box::new(build(tail, n, next_aux));
    Node::Split {
        aux,
        L,
        head,
        tail,
        head_given,
        tail_given,
        parity_mismatch,
    }
}

fn compile(spec: &MultiSpec) -> (Node, usize) {
    let group = Group {
        orders: spec.orders.iter().map(|o| o.0).collect(),
        radii: (0..spec.radii.len()).map(Radius::Given).collect(),
    };
    let mut next_aux = 0;
    let node = build(group, spec.n, &mut next_aux);
    (node, next_aux)
}

/// Numeric values of every radius currently bound.
#[derive(Debug, Clone)]
struct Env<'a> {
    given: &'a [f64],
    aux: Vec<f64>,
}

impl Env<'_> {
    fn get(&self, r: Radius) -> f64 {
        match r {
            Radius::Given(i) => self.given[i],
            Radius::Aux(i) => self.aux[i],
        }
    }
}

/// Every `|sum +- r_i|`, where Bessel-product integrals change form.
fn kinks(radii: &[f64]) -> Vec<f64> {
    let k = radii.len();
    let mut out = Vec::new();
    for mask in 0..(1u32 << k) {
        let s: f64 = radii
            .iter()
            .enumerate()
            .map(|(i, r)| if mask & (1 << i) != 0 { -r } else { *r })
            .sum();
        out.push(s.abs());
    }
    out
}

fn label(r: Radius) -> String {
    match r {
        Radius::Given(i) => format!("r{}", i + 1),
        Radius::Aux(i) => format!("u{}", i + 1),
    }
}

fn factors(g: &Group) -> Vec<Factor> {
    g.orders
        .iter()
        .zip(&g.radii)
        .map(|(&order, &r)| Factor { order, radius: label(r) })
        .collect()
}

/// Interval bounds of every radius, auxiliaries included, for the plan.
fn bound_aux(node: &Node, given: &[f64], bounds: &mut Vec<[f64; 2]>) {
    if let Node::Split {
        aux, head, tail, head_given, ..
    } = node
    {
        let get = |r: Radius, b: &Vec<[f64; 2]>| match r {
            Radius::Given(i) => [given[i], given[i]],
            Radius::Aux(i) => b[i],
        };
        let iv: Vec<[f64; 2]> = head_given.iter().map(|&r| get(r, bounds)).collect();
        let hi: f64 = iv.iter().map(|b| b[1]).sum();
        let lo = iv
            .iter()
            .map(|b| b[0] - (hi - b[1]))
            .fold(0.0, f64::max);
        bounds[*aux] = [lo, hi];
        bound_aux(head, given, bounds);
        bound_aux(tail, given, bounds);
    }
}

fn to_tree(node: &Node, bounds: &[[f64; 2]]) -> ReductionTree {
    match node {
        Node::Mehrem(g) => ReductionTree::Mehrem { factors: factors(g) },
        Node::Triple(g, n) => ReductionTree::Triple {
            factors: factors(g),
            n: *n,
        },
        Node::Split {
            aux,
            L,
            head,
            tail,
            parity_mismatch,
            ..
        } => ReductionTree::Split {
            aux: label(Radius::Aux(*aux)),
            L: *L,
            support: bounds[*aux],
            parity_mismatch: *parity_mismatch,
            head: Box::new(to_tree(head, bounds)),
            tail: Box::new(to_tree(tail, bounds)),
        },
    }
}

fn tree_of(node: &Node, given: &[f64], count: usize) -> ReductionTree {
    let mut bounds = vec![[0.0, 0.0]; count];
    bound_aux(node, given, &mut bounds);
    to_tree(node, &bounds)
}

/// Reduction plan for `spec`, with supports of the auxiliary radii bounded
/// by the radii they close polygons with.
pub fn plan(spec: &MultiSpec) -> Result<ReductionTree> {
    spec.validate()?;
    let (node, count) = compile(spec);
    Ok(tree_of(&node, &spec.radii, count))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiResult {
    pub value: f64,
    pub tree: ReductionTree,
    /// Largest number of adaptive subintervals used for each auxiliary
    /// variable, in `u1, u2, ...` order.
    pub refinement_levels: Vec<usize>,
    pub error_estimate: f64,
}

struct Evaluator {
    tol_outer: f64,
    tol_inner: f64,
    levels: RefCell<Vec<usize>>,
}

impl Evaluator {
    fn eval(&self, node: &Node, env: &mut Env, outer: bool) -> Result<(f64, f64)> {
        match node {
            Node::Mehrem(g) => {
                let r = |i| env.get(g.radii[i]);
                let poly = mehrem_poly(Order(g.orders[0]), Order(g.orders[1]), Order(g.orders[2]), r(0), r(1))?;
                Ok((poly.value(r(2)), 0.0))
            }
            Node::Triple(g, n) => {
                let r = |i| env.get(g.radii[i]);
                let spec = TripleSpec::new(g.orders[0], g.orders[1], g.orders[2], *n);
                Ok((reduce_triple(spec, r(0), r(1), r(2))?.value, 0.0))
            }
            Node::Split {
                aux,
                head,
                tail,
                head_given,
                tail_given,
                ..
            } => {
                // the head vanishes unless u closes a polygon with its radii; the
                // tail only when it is itself a closed Mehrem leaf
                let head_r: Vec<f64> = head_given.iter().map(|&r| env.get(r)).collect();
                let tail_r: Vec<f64> = tail_given.iter().map(|&r| env.get(r)).collect();
                let [mut lo, mut hi] = polygon_support(&head_r);
                if let Node::Mehrem(_) = **tail {
                    let [tlo, thi] = polygon_support(&tail_r);
                    (lo, hi) = (lo.max(tlo), hi.min(thi));
                }
                if !(lo < hi) {
                    return Ok((0.0, 0.0));
                }
                let mut points = vec![lo, hi];
                points.extend(
                    kinks(&head_r)
                        .into_iter()
                        .chain(kinks(&tail_r))
                        .filter(|p| *p > lo && *p < hi),
                );
                let failure = RefCell::new(None);
                let env_cell = RefCell::new(env.clone());
                let integrand = |u: f64| {
                    let mut e = env_cell.borrow_mut();
                    e.aux[*aux] = u;
                    let h = self.eval(head, &mut e, false);
                    let t = h.and_then(|h| Ok((h.0, self.eval(tail, &mut e, false)?.0)));
                    match t {
                        Ok((h, t)) => std::f64::consts::FRAC_2_PI * u * u * h * t,
                        Err(err) => {
                            failure.borrow_mut().get_or_insert(err);
                            f64::NAN
                        }
                    }
                };
                let tol = Tolerance {
                    rel: if outer { self.tol_outer } else { self.tol_inner },
                    abs: 1e-14,
                    max_intervals: 2000,
                };
                let est = adaptive(integrand, &points, tol);
                if let Some(e) = failure.into_inner() {
                    return Err(e);
                }
                let est = est?;
                let mut levels = self.levels.borrow_mut();
                levels[*aux] = levels[*aux].max(est.intervals);
                Ok((est.value, est.error))
            }
        }
    }
}

/// Evaluates the reduction with nested adaptive quadrature over the
/// auxiliary radii.
pub fn evaluate_multi(spec: &MultiSpec) -> Result<MultiResult> {
    spec.validate()?;
    let (node, count) = compile(spec);
    let mut env = Env {
        given: &spec.radii,
        aux: vec![f64::NAN; count],
    };
    let tree = tree_of(&node, &spec.radii, count);
    let ev = Evaluator {
        tol_outer: 1e-8,
        tol_inner: 1e-10,
        levels: RefCell::new(vec![0; count]),
    };
    let (value, error) = ev.eval(&node, &mut env, true)?;
    Ok(MultiResult {
        value,
        tree,
        refinement_levels: ev.levels.into_inner(),
        error_estimate: error,
    })
}

#[cfg(test)]
mod tests;
