//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cuspl_core::chifactor::ChiContext;
use cuspl_core::forms;
use cuspl_core::lseries::{self, EvalRequest, Method};
use cuspl_core::meanvalue::{self, Prediction};
use cuspl_core::smoothing::make_phi;
use cuspl_core::{Complex64, QuadratureSpec};
use serde_json::{json, Map, Value};

use crate::cache::{self, CacheError, LoadedForm};
use crate::format::{csv_line, fmt_f64, num};
use crate::manifest::RunManifest;
use crate::moments::moment_report_parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_N_MAX: usize = 1 << 16;

#[derive(Debug, Parser)]
#[command(name = "cuspl", version, about = "L-functions of level-1 Hecke eigenforms and their derivatives")]
pub struct Cli {
    /// Coefficient cache directory [default: $CUSPL_CACHE_DIR, $XDG_CACHE_HOME/cuspl or ~/.cache/cuspl]
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the coefficient cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a(n) and λ(n) = a(n)/n^((k−1)/2) as CSV.
    Coeffs(CoeffsArgs),
    /// Evaluate L_f^(m)(σ+it); prints JSON.
    Eval(EvalArgs),
    /// Mean squares ∫₀ᵀ |L_f^(m)(σ+it)|² dt on a grid of heights.
    Meanvalue(MeanvalueArgs),
    /// The functional-equation factor χ_f and its derivatives; prints JSON.
    Chi(ChiArgs),
    /// Self-checks of the smoothing function and its Mellin-type transform.
    SmoothingTest(SmoothingTestArgs),
    /// Partial slopes of Σ|λ(n)|² and the resulting estimate of C_f.
    Rankin(RankinArgs),
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, default_value_t = 12)]
    pub weight: u32,
    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,
    /// CSV destination; stdout when absent (the manifest then goes to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, default_value_t = 12)]
    pub weight: u32,
    /// Derivative order.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    /// dirichlet, oracle, afe_sharp, afe_smoothed or auto.
    #[arg(long, default_value = "auto")]
    pub method: Method,
    /// Number of coefficients available to the evaluators.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
    /// Correction depth of the smoothed AFE [default: the depth in ⌈(k+1)/2⌉..=⌈(k+1)/2⌉+5 with the smallest error estimate].
    #[arg(long)]
    pub l: Option<usize>,
    /// Length of the first smoothed sum [default: |t|/2π].
    #[arg(long)]
    pub y1: Option<f64>,
    /// Length of the second smoothed sum [default: |t|/2π].
    #[arg(long)]
    pub y2: Option<f64>,
    /// Smoothed AFE main terms only.
    #[arg(long)]
    pub no_corrections: bool,
    /// Use ψ_α with this α as the smoothing function instead of the standard bump.
    #[arg(long)]
    pub psi_alpha: Option<f64>,
    /// Absolute tail tolerance of the Dirichlet series.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct MeanvalueArgs {
    #[arg(long, default_value_t = 12)]
    pub weight: u32,
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// 1/2 ≤ σ ≤ 1.
    #[arg(long)]
    pub sigma: f64,
    /// Comma-separated increasing heights, at most 2000.
    #[arg(long = "T-grid", value_delimiter = ',', required = true)]
    pub t_grid: Vec<f64>,
    /// CSV destination (T,I,prediction,ratio).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
    /// Worker threads; 0 = machine parallelism.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value_t = QuadratureSpec::default().max_panel_width)]
    pub max_panel_width: f64,
    #[arg(long, default_value_t = QuadratureSpec::default().nodes_per_panel)]
    pub nodes_per_panel: usize,
    #[arg(long, default_value_t = QuadratureSpec::default().check_nodes)]
    pub check_nodes: usize,
    #[arg(long, default_value_t = QuadratureSpec::default().refinement_tol)]
    pub refinement_tol: f64,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    #[arg(long, default_value_t = 12)]
    pub weight: u32,
    /// Derivative order.
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct SmoothingTestArgs {
    /// Print one JSON object instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RankinArgs {
    #[arg(long, default_value_t = 12)]
    pub weight: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub x_max: usize,
    /// Print one JSON object instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<cuspl_core::Error> for CliError {
    fn from(e: cuspl_core::Error) -> Self {
        use cuspl_core::Error::*;
        match e {
            UnsupportedWeight(_) | Domain(_) | OutOfRange { .. } => CliError::Usage(e.to_string()),
            Pole { .. } | NoConvergence { .. } => CliError::Compute(e.to_string()),
        }
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        match e {
            CacheError::Core(e) => e.into(),
            e => CliError::Compute(e.to_string()),
        }
    }
}

fn io_err(what: &str, e: std::io::Error) -> CliError {
    CliError::Compute(format!("{what}: {e}"))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let ctx = Context { cache_dir: if cli.no_cache { None } else { cli.cache_dir.clone().or_else(cache::default_dir) }, start };
    match &cli.command {
        Command::Coeffs(a) => coeffs(&ctx, a, out, err),
        Command::Eval(a) => eval(&ctx, a, out),
        Command::Meanvalue(a) => meanvalue(&ctx, a, out),
        Command::Chi(a) => chi(&ctx, a, out),
        Command::SmoothingTest(a) => smoothing_test(&ctx, a, out, err),
        Command::Rankin(a) => rankin(&ctx, a, out, err),
    }
}

struct Context {
    cache_dir: Option<PathBuf>,
    start: Instant,
}

impl Context {
    fn load(&self, weight: u32, n_max: usize) -> Result<LoadedForm, CliError> {
        check_weight(weight)?;
        if n_max == 0 || n_max > forms::MAX_COEFFICIENTS {
            return Err(usage(format!("--n-max must lie in 1..={}", forms::MAX_COEFFICIENTS)));
        }
        Ok(cache::load_or_build(weight, n_max, self.cache_dir.as_deref())?)
    }

    fn finish(&self, manifest: &mut RunManifest, deterministic: &[u8]) {
        manifest.set_output(deterministic);
        manifest.wall_clock_seconds = self.start.elapsed().as_secs_f64();
    }
}

fn check_weight(weight: u32) -> Result<(), CliError> {
    if forms::SUPPORTED_WEIGHTS.contains(&weight) {
        Ok(())
    } else {
        Err(cuspl_core::Error::UnsupportedWeight(weight).into())
    }
}

fn check_finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be finite")))
    }
}

/// Writes `body` plus the manifest as one JSON object.
fn emit_json(ctx: &Context, mut manifest: RunManifest, body: Map<String, Value>, out: &mut dyn Write) -> Result<(), CliError> {
    let deterministic = Value::Object(body.clone()).to_string();
    ctx.finish(&mut manifest, deterministic.as_bytes());
    let mut all = body;
    all.insert("manifest".into(), manifest.to_json());
    writeln!(out, "{}", Value::Object(all)).map_err(|e| io_err("stdout", e))
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn coeffs(ctx: &Context, a: &CoeffsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let loaded = ctx.load(a.weight, a.n_max)?;
    let form = &loaded.form;
    let mut csv = String::from("n,a(n),lambda(n)\n");
    for (i, (c, l)) in form.coefficients().iter().zip(form.lambdas()).enumerate() {
        csv.push_str(&csv_line(&[(i + 1).to_string(), c.to_string(), fmt_f64(*l)]));
    }
    let mut manifest = RunManifest::new(
        "coeffs",
        params(&[
            ("weight", a.weight.into()),
            ("n_max", a.n_max.into()),
            ("out", a.out.as_ref().map_or(Value::Null, |p| p.display().to_string().into())),
        ]),
    );
    manifest.coefficient_checksum = Some(loaded.checksum.clone());
    ctx.finish(&mut manifest, csv.as_bytes());
    let line = manifest.to_json().to_string();
    match &a.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| io_err(&path.display().to_string(), e))?;
            writeln!(out, "{line}").map_err(|e| io_err("stdout", e))
        }
        None => {
            out.write_all(csv.as_bytes()).map_err(|e| io_err("stdout", e))?;
            writeln!(err, "{line}").map_err(|e| io_err("stderr", e))
        }
    }
}

fn eval(ctx: &Context, a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_weight(a.weight)?;
    check_finite("sigma", a.sigma)?;
    check_finite("t", a.t)?;
    if a.m > lseries::MAX_DERIVATIVE {
        return Err(usage(format!("--m must be at most {}", lseries::MAX_DERIVATIVE)));
    }
    let loaded = ctx.load(a.weight, a.n_max)?;
    let s = Complex64::new(a.sigma, a.t);
    let mut req = EvalRequest::new(&loaded.form, a.m, s).with_method(a.method);
    if let Some(alpha) = a.psi_alpha {
        req.smoothing = Some(make_phi().make_psi_alpha(alpha, a.t.abs())?);
    }
    req.l = a.l;
    req.y1 = a.y1;
    req.y2 = a.y2;
    req.with_corrections = !a.no_corrections;
    req.tol = a.tol;
    let r = lseries::eval(&req)?;
    let body = params(&[
        ("re", num(r.value.re)),
        ("im", num(r.value.im)),
        ("method", r.method.name().into()),
        ("err_estimate", num(r.err_estimate)),
        ("terms_used", r.terms_used.into()),
    ]);
    let mut manifest = RunManifest::new(
        "eval",
        params(&[
            ("weight", a.weight.into()),
            ("m", a.m.into()),
            ("sigma", num(a.sigma)),
            ("t", num(a.t)),
            ("method", a.method.name().into()),
            ("n_max", a.n_max.into()),
            ("l", a.l.map_or(Value::Null, Value::from)),
            ("y1", a.y1.map_or(Value::Null, num)),
            ("y2", a.y2.map_or(Value::Null, num)),
            ("with_corrections", (!a.no_corrections).into()),
            ("psi_alpha", a.psi_alpha.map_or(Value::Null, num)),
            ("tol", num(a.tol)),
        ]),
    );
    manifest.coefficient_checksum = Some(loaded.checksum.clone());
    emit_json(ctx, manifest, body, out)
}

fn meanvalue(ctx: &Context, a: &MeanvalueArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_weight(a.weight)?;
    let quad = QuadratureSpec {
        max_panel_width: a.max_panel_width,
        nodes_per_panel: a.nodes_per_panel,
        check_nodes: a.check_nodes,
        refinement_tol: a.refinement_tol,
    };
    if let Some(&t) = a.t_grid.iter().find(|&&t| t > meanvalue::T_MAX) {
        return Err(usage(format!(
            "T = {t} exceeds the desk-scale cap {}: the quadrature cost grows like T² and the oracle is limited to |t| ≤ {}",
            meanvalue::T_MAX,
            lseries::ORACLE_T_MAX
        )));
    }
    meanvalue::plan(a.m, a.sigma, &a.t_grid, quad)?;
    let loaded = ctx.load(a.weight, a.n_max)?;
    let rep = moment_report_parallel(&loaded.form, a.m, a.sigma, &a.t_grid, quad, a.threads)?;

    let mut csv = String::from("T,I,prediction,ratio\n");
    for i in 0..rep.t_grid.len() {
        csv.push_str(&csv_line(&[
            fmt_f64(rep.t_grid[i]),
            fmt_f64(rep.i_values[i]),
            fmt_f64(rep.predictions[i]),
            fmt_f64(rep.ratios[i]),
        ]));
    }
    std::fs::write(&a.out, &csv).map_err(|e| io_err(&a.out.display().to_string(), e))?;

    let prediction = match rep.prediction {
        Prediction::CriticalLine { a_fm, c_f } => json!({ "kind": rep.prediction.label(), "a_fm": num(a_fm), "c_f": num(c_f) }),
        Prediction::TailSum(ts) => json!({
            "kind": rep.prediction.label(),
            "tail_sum": num(ts.value),
            "partial": num(ts.partial),
            "terms": ts.terms,
            "tail_estimate": num(ts.tail_estimate),
            "tail_bound": num(ts.tail_bound),
        }),
    };
    let [dirichlet, oracle, afe_sharp, afe_smoothed] = rep.method_counts;
    let body = params(&[
        ("weight", rep.weight.into()),
        ("m", rep.m.into()),
        ("sigma", num(rep.sigma)),
        ("t_grid", rep.t_grid.iter().map(|&t| num(t)).collect()),
        ("prediction", prediction),
        ("head_integral", num(rep.head)),
        (
            "quadrature",
            json!({
                "panel_width": num(rep.panel_width),
                "nodes_per_panel": rep.nodes_per_panel,
                "check_nodes": rep.check_nodes,
                "panels": rep.panels,
                "refinement_tol": num(quad.refinement_tol),
                "refinement_gap": num(rep.refinement_gap),
            }),
        ),
        (
            "evaluations",
            json!({ "dirichlet": dirichlet, "oracle": oracle, "afe_sharp": afe_sharp, "afe_smoothed": afe_smoothed }),
        ),
        ("csv", a.out.display().to_string().into()),
    ]);
    let mut manifest = RunManifest::new(
        "meanvalue",
        params(&[
            ("weight", a.weight.into()),
            ("m", a.m.into()),
            ("sigma", num(a.sigma)),
            ("T_grid", a.t_grid.iter().map(|&t| num(t)).collect()),
            ("out", a.out.display().to_string().into()),
            ("n_max", a.n_max.into()),
            ("threads", a.threads.into()),
            ("max_panel_width", num(a.max_panel_width)),
            ("nodes_per_panel", a.nodes_per_panel.into()),
            ("check_nodes", a.check_nodes.into()),
            ("refinement_tol", num(a.refinement_tol)),
        ]),
    );
    manifest.coefficient_checksum = Some(loaded.checksum.clone());
    ctx.finish(&mut manifest, csv.as_bytes());
    let mut all = body;
    all.insert("manifest".into(), manifest.to_json());
    writeln!(out, "{}", Value::Object(all)).map_err(|e| io_err("stdout", e))
}

fn chi(ctx: &Context, a: &ChiArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_finite("sigma", a.sigma)?;
    check_finite("t", a.t)?;
    check_weight(a.weight)?;
    let chi_ctx = ChiContext::for_weight(a.weight)?;
    let s = Complex64::new(a.sigma, a.t);
    let value = chi_ctx.chi(s)?;
    let ratio = chi_ctx.chi_log_deriv_ratio(a.r, s)?;
    let deriv = value * ratio;
    let body = params(&[
        ("re", num(value.re)),
        ("im", num(value.im)),
        ("modulus", num(value.norm())),
        ("r", a.r.into()),
        ("log_deriv_ratio_re", num(ratio.re)),
        ("log_deriv_ratio_im", num(ratio.im)),
        ("derivative_re", num(deriv.re)),
        ("derivative_im", num(deriv.im)),
    ]);
    let manifest = RunManifest::new(
        "chi",
        params(&[("weight", a.weight.into()), ("r", a.r.into()), ("sigma", num(a.sigma)), ("t", num(a.t))]),
    );
    emit_json(ctx, manifest, body, out)
}

struct Check {
    name: String,
    value: f64,
    expected: f64,
    tol: f64,
}

impl Check {
    fn passed(&self) -> bool {
        (self.value - self.expected).abs() <= self.tol
    }
}

fn smoothing_checks() -> Result<Vec<Check>, CliError> {
    let phi = make_phi();
    let phi0 = phi.reflect();
    let zero = Complex64::new(0.0, 0.0);
    let mut checks = vec![Check { name: "K_phi(0) = 1".into(), value: phi.k_phi(zero, 1)?.re, expected: 1.0, tol: 0.0 }];
    for l in 1..=3 {
        let k = phi.k_phi_representation(zero, l)?;
        checks.push(Check {
            name: format!("K_phi(0) = 1 via depth {l}"),
            value: (k - 1.0).norm(),
            expected: 0.0,
            tol: 1e-8,
        });
    }
    checks.push(Check { name: "phi = 1 on [0, 1/2]".into(), value: phi.value(0.5), expected: 1.0, tol: 0.0 });
    checks.push(Check { name: "phi = 0 on [2, inf)".into(), value: phi.value(2.0), expected: 0.0, tol: 0.0 });
    let grid: Vec<f64> = (0..=60).map(|i| 0.5 + 1.5 * i as f64 / 60.0).collect();
    let rises = grid.windows(2).filter(|w| phi.value(w[1]) > phi.value(w[0])).count();
    checks.push(Check { name: "phi monotone on [1/2, 2]".into(), value: rises as f64, expected: 0.0, tol: 0.0 });
    checks.push(Check { name: "integral of |phi'| = 1".into(), value: phi.phi_norm(1)?, expected: 1.0, tol: 1e-10 });
    checks.push(Check { name: "phi0 = 1 on [0, 1/2]".into(), value: phi0.value(0.5), expected: 1.0, tol: 0.0 });
    checks.push(Check { name: "phi0 = 0 on [2, inf)".into(), value: phi0.value(2.0), expected: 0.0, tol: 0.0 });
    for w in [Complex64::new(0.7, 1.3), Complex64::new(-1.5, 0.4), Complex64::new(2.0, -3.0)] {
        let a = phi.k_phi(w, 1)?;
        checks.push(Check {
            name: format!("K_phi(w) = K_phi0(-w) at w = {}{:+}i", w.re, w.im),
            value: (a - phi0.k_phi(-w, 1)?).norm(),
            expected: 0.0,
            tol: 1e-8 * a.norm().max(1.0),
        });
        checks.push(Check {
            name: format!("depths 1 and 3 agree at w = {}{:+}i", w.re, w.im),
            value: (a - phi.k_phi(w, 3)?).norm(),
            expected: 0.0,
            tol: 1e-9 * a.norm().max(1.0),
        });
    }
    Ok(checks)
}

fn smoothing_test(ctx: &Context, a: &SmoothingTestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let checks = smoothing_checks()?;
    let failures = checks.iter().filter(|c| !c.passed()).count();
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "check": c.name,
                "value": num(c.value),
                "expected": num(c.expected),
                "tol": num(c.tol),
                "pass": c.passed(),
            })
        })
        .collect();
    let body = params(&[("checks", rows.into()), ("failures", failures.into())]);
    let manifest = RunManifest::new("smoothing-test", params(&[("json", a.json.into())]));
    if a.json {
        emit_json(ctx, manifest, body, out)?;
    } else {
        let mut text = String::new();
        for c in &checks {
            let status = if c.passed() { "pass" } else { "FAIL" };
            text.push_str(&format!("{status}  {}  (value {}, tol {})\n", c.name, fmt_f64(c.value), fmt_f64(c.tol)));
        }
        text.push_str(&format!("{} checks, {failures} failed\n", checks.len()));
        out.write_all(text.as_bytes()).map_err(|e| io_err("stdout", e))?;
        let mut manifest = manifest;
        ctx.finish(&mut manifest, Value::Object(body).to_string().as_bytes());
        writeln!(err, "{}", manifest.to_json()).map_err(|e| io_err("stderr", e))?;
    }
    if failures > 0 {
        return Err(CliError::Compute(format!("{failures} smoothing checks failed")));
    }
    Ok(())
}

fn rankin(ctx: &Context, a: &RankinArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    check_weight(a.weight)?;
    if a.x_max < meanvalue::RANKIN_X_MIN {
        return Err(usage(format!("--x-max must be at least {}", meanvalue::RANKIN_X_MIN)));
    }
    let loaded = ctx.load(a.weight, a.x_max)?;
    let est = meanvalue::rankin_constant(&loaded.form, a.x_max)?;
    let rows: Vec<Value> = (0..est.x_grid.len())
        .map(|i| {
            json!({
                "x": est.x_grid[i],
                "slope": num(est.partial_slopes[i]),
                "divisor_bound": num(est.divisor_bounds[i]),
            })
        })
        .collect();
    let body = params(&[("c_f", num(est.c_f)), ("fluctuation", num(est.fluctuation)), ("table", rows.into())]);
    let mut manifest =
        RunManifest::new("rankin", params(&[("weight", a.weight.into()), ("x_max", a.x_max.into()), ("json", a.json.into())]));
    manifest.coefficient_checksum = Some(loaded.checksum.clone());
    if a.json {
        return emit_json(ctx, manifest, body, out);
    }
    let mut text = format!("c_f = {}\nfluctuation = {}\n", fmt_f64(est.c_f), fmt_f64(est.fluctuation));
    text.push_str("x,slope,divisor_bound\n");
    for i in 0..est.x_grid.len() {
        text.push_str(&csv_line(&[
            est.x_grid[i].to_string(),
            fmt_f64(est.partial_slopes[i]),
            fmt_f64(est.divisor_bounds[i]),
        ]));
    }
    out.write_all(text.as_bytes()).map_err(|e| io_err("stdout", e))?;
    ctx.finish(&mut manifest, Value::Object(body).to_string().as_bytes());
    writeln!(err, "{}", manifest.to_json()).map_err(|e| io_err("stderr", e))
}
