//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 invalid flags or input,
//! 3 diagonal point requested, 4 grid of a distribution without
//! `--regular-only`. Failures print to stderr only.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::dist_algebra::{eval_regular, render_coeff, singular_part, SingularTerm};
use crate::double_sbf::{closed_form_cached, evaluate, gr_direct, DoubleSpec};
use crate::error::Error;
use crate::multi_sbf::{evaluate_multi, MultiSpec};
use crate::oracle::{oscillatory_integral, QuadratureConfig};
use crate::specfun::Order;
use crate::triple_sbf::{reduce_triple, TripleSpec};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DIAGONAL: i32 = 3;
pub const EXIT_SINGULAR_GRID: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sbf-overlap", version, about = "Overlap integrals of spherical Bessel functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// int k^n j_l(kr) j_l'(kr') dk at one point: regular value and delta content.
    Double(DoubleArgs),
    /// The closed form as JSON.
    ClosedForm(SpecArgs),
    /// CSV of ladder and direct values on an (r, r') grid.
    Grid(GridArgs),
    /// Three Bessel factors.
    Triple(ProductArgs),
    /// Four to eight Bessel factors.
    Multi(ProductArgs),
    /// Direct numerical quadrature in k.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub l: u32,
    #[arg(long)]
    pub lp: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub n: i32,
}

#[derive(Debug, Args)]
pub struct DoubleArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub rp: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub rmax: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Tabulate the regular part even though the integral has delta content.
    #[arg(long)]
    pub regular_only: bool,
}

#[derive(Debug, Args)]
pub struct ProductArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub orders: Vec<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub n: i32,
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Partition,
    Damping,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub product: ProductArgs,
    #[arg(long, value_enum, default_value_t = Method::Partition)]
    pub method: Method,
}

/// What a command produced, before formatting.
enum Outcome {
    Text(String),
    Json(String),
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DiagonalPoint(_) => EXIT_DIAGONAL,
            Error::InvalidInput(_) | Error::BaseOutOfValidity { .. } => EXIT_INVALID,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

fn to_json<T: Serialize>(v: &T) -> Outcome {
    Outcome::Json(serde_json::to_string_pretty(v).expect("serialisable output"))
}

/// Structured view of one delta term.
#[derive(Debug, Serialize)]
struct SingularJson {
    m: u32,
    coeff: String,
    coeff_value: f64,
    pow_r: i32,
    pow_rp: i32,
    text: String,
}

impl From<&SingularTerm> for SingularJson {
    fn from(t: &SingularTerm) -> Self {
        SingularJson {
            m: t.m,
            coeff: render_coeff(&t.coeff),
            coeff_value: t.coeff.to_f64(),
            pow_r: t.pow_r,
            pow_rp: t.pow_rp,
            text: t.render(),
        }
    }
}

fn render_singular(terms: &[SingularTerm]) -> String {
    if terms.is_empty() {
        "none".into()
    } else {
        terms.iter().map(SingularTerm::render).collect::<Vec<_>>().join(" ")
    }
}

fn positive(radii: &[f64]) -> Result<(), Failure> {
    if radii.iter().all(|r| *r > 0.0 && r.is_finite()) {
        Ok(())
    } else {
        Err(invalid("radii must be positive and finite"))
    }
}

fn spec_of(a: &SpecArgs) -> DoubleSpec {
    DoubleSpec::new(a.l, a.lp, a.n)
}

fn cmd_double(a: &DoubleArgs) -> Result<Outcome, Failure> {
    positive(&[a.r, a.rp])?;
    let spec = spec_of(&a.spec);
    let v = evaluate(spec, a.r, a.rp)?;
    if a.json {
        #[derive(Serialize)]
        struct Out {
            l: u32,
            lp: u32,
            n: i32,
            r: f64,
            rp: f64,
            value: f64,
            singular: Vec<SingularJson>,
        }
        return Ok(to_json(&Out {
            l: a.spec.l,
            lp: a.spec.lp,
            n: a.spec.n,
            r: a.r,
            rp: a.rp,
            value: v.regular,
            singular: v.singular.iter().map(SingularJson::from).collect(),
        }));
    }
    Ok(Outcome::Text(format!(
        "I^[{}]_{{{},{}}}(r = {}, r' = {})\nregular:  {:.17e}\nsingular: {}\n",
        a.spec.n,
        a.spec.l,
        a.spec.lp,
        a.r,
        a.rp,
        v.regular,
        render_singular(&v.singular)
    )))
}

fn cmd_closed_form(a: &SpecArgs) -> Result<Outcome, Failure> {
    let e = closed_form_cached(spec_of(a))?;
    Ok(to_json(&*e))
}

/// 17 significant digits.
fn csv_number(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn cmd_grid(a: &GridArgs) -> Result<Outcome, Failure> {
    if !(a.rmax > 0.0 && a.rmax.is_finite()) {
        return Err(invalid("--rmax must be positive"));
    }
    if a.steps == 0 {
        return Err(invalid("--steps must be at least 1"));
    }
    let spec = spec_of(&a.spec);
    let expr = closed_form_cached(spec)?;
    let singular = singular_part(&expr);
    if !singular.is_empty() && !a.regular_only {
        return Err(Failure {
            code: EXIT_SINGULAR_GRID,
            message: format!(
                "the integral has delta content ({}); pass --regular-only to tabulate the regular part",
                render_singular(&singular)
            ),
        });
    }
    let h = a.rmax / a.steps as f64;
    let rows: Vec<String> = (1..=a.steps)
        .into_par_iter()
        .flat_map_iter(|i| {
            let expr = &expr;
            (1..=a.steps).map(move |j| {
                let (r, rp) = (h * i as f64, h * j as f64);
                // the diagonal is left blank in both columns
                let ladder = (r != rp).then(|| eval_regular(expr, r, rp).ok()).flatten();
                let direct = (r != rp)
                    .then(|| gr_direct(spec.ell, spec.ellp, spec.n, r, rp).ok())
                    .flatten();
                format!("{r:.16e},{rp:.16e},{},{}", csv_number(ladder), csv_number(direct))
            })
        })
        .collect();
    let mut csv = String::from("r,rp,value_ladder,value_direct\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    std::fs::write(&a.out, csv).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: format!("cannot write {}: {e}", a.out.display()),
    })?;
    Ok(Outcome::Text(format!(
        "wrote {} cells to {}\n",
        a.steps * a.steps,
        a.out.display()
    )))
}

fn orders_of(a: &ProductArgs, count: Option<usize>) -> Result<Vec<Order>, Failure> {
    if a.orders.len() != a.radii.len() {
        return Err(invalid(format!(
            "{} orders but {} radii",
            a.orders.len(),
            a.radii.len()
        )));
    }
    if let Some(c) = count {
        if a.orders.len() != c {
            return Err(invalid(format!("expected {c} orders, got {}", a.orders.len())));
        }
    }
    positive(&a.radii)?;
    Ok(a.orders.iter().map(|&l| Order(l)).collect())
}

fn cmd_triple(a: &ProductArgs) -> Result<Outcome, Failure> {
    orders_of(a, Some(3))?;
    let spec = TripleSpec::new(a.orders[0], a.orders[1], a.orders[2], a.n);
    let res = reduce_triple(spec, a.radii[0], a.radii[1], a.radii[2])?;
    if a.json {
        return Ok(to_json(&res));
    }
    Ok(Outcome::Text(format!(
        "value: {:.17e}\ntriangle_ok: {}\nwindow: [{}, {}]\nL: {}\n",
        res.value, res.triangle_ok, res.window[0], res.window[1], res.L
    )))
}

fn cmd_multi(a: &ProductArgs) -> Result<Outcome, Failure> {
    orders_of(a, None)?;
    let res = evaluate_multi(&MultiSpec::new(&a.orders, &a.radii, a.n))?;
    if a.json {
        return Ok(to_json(&res));
    }
    Ok(Outcome::Text(format!(
        "value: {:.17e} ± {:.1e}\n{}",
        res.value,
        res.error_estimate,
        res.tree.render()
    )))
}

fn cmd_oracle(a: &OracleArgs) -> Result<Outcome, Failure> {
    let orders = orders_of(&a.product, None)?;
    let cfg = match a.method {
        Method::Partition => QuadratureConfig::default(),
        Method::Damping => QuadratureConfig::damping(),
    };
    let rep = oscillatory_integral(&orders, &a.product.radii, a.product.n, &cfg)?;
    if a.product.json {
        return Ok(to_json(&rep));
    }
    if rep.diverged {
        return Ok(Outcome::Text(format!(
            "diverges ({}); the integral is a distribution, smear it instead\n",
            rep.method
        )));
    }
    Ok(Outcome::Text(format!(
        "{:.10} ± {:.1e}  ({}, {} panels)\n",
        rep.value, rep.error_estimate, rep.method, rep.panels
    )))
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Double(a) => cmd_double(a),
        Command::ClosedForm(a) => cmd_closed_form(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Triple(a) => cmd_triple(a),
        Command::Multi(a) => cmd_multi(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Text(s)) => {
            let _ = write!(out, "{s}");
            0
        }
        Ok(Outcome::Json(s)) => {
            let _ = writeln!(out, "{s}");
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
