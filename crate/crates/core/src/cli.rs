//! Command-line runner: argument parsing, experiment dispatch, artifacts
//! and the failure manifest.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::arith::{euler_phi, format_rational, mobius, parse_rational, rat, rat_u, FunctionTable, Rational};
use crate::coefficients::{
    carmichael_formula, coefficient_records, re_expansion_partial, truncate_to_target,
    wintner_restricted, write_coefficients_csv, CoefficientMethod, CoefficientRecord,
};
use crate::correlations::{random_bh_instance, random_bh_pair, BhPair, CorrelationTable};
use crate::error::{domain, Error, Result};
use crate::interval::BoundedValue;
use crate::orthogonality::{orthogonality_grid, write_orthogonality_csv};
use crate::reef::{approximate_reef_residual, shifted_orthogonality_sweep, indicator_counterexample, sqrt_range, SweepConfig};
use crate::smooth::{SmoothContext, TailParams};
use crate::transforms::{
    build_range_q, mobius_switch_rhs, parse_function_file, smooth_restrict, ArithmeticFunctionSpec,
    CatalogFunction, GrowthCertificate, RangeQFunction,
};

/// Environment variable that replaces the default output directory.
pub const OUT_DIR_ENV: &str = "REEF_OUT_DIR";

const DEFAULT_OUT_DIR: &str = "out";

#[derive(Parser, Debug, Clone)]
#[command(name = "ramanujan-smooth", version, about = "Exact checks for smooth-restricted Ramanujan expansions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory (default: $REEF_OUT_DIR, else `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Wintner and Carmichael coefficients of a smooth restriction; writes coeffs.csv.
    Coeffs(CoeffsArgs),
    /// Partial Ramanujan expansions against the smooth restriction; writes expand.json.
    Expand(ExpandArgs),
    /// Weighted orthogonality matrix of Ramanujan sums; writes orthogonality.csv.
    Orthogonality(OrthogonalityArgs),
    /// Correlation table, decomposition and coefficient checks; writes correlation.csv.
    Correlation(CorrelationArgs),
    /// Indicator against a Ramanujan sum at shift 1; writes reef_report.json.
    Counterexample(CounterexampleArgs),
    /// Certified sweep for the shifted orthogonality relation; writes reef_report.json.
    Conjecture1(Conjecture1Args),
    /// Exact defect profile of the finite expansion; writes reef_report.json.
    ReefResidual(ResidualArgs),
    /// Compact run of every exact and certified check.
    VerifyAll(VerifyArgs),
}

fn positive(s: &str) -> std::result::Result<u64, String> {
    match s.parse::<u64>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("expected an exact rational such as 1/1000000, got `{s}`"))
}

fn positive_rational(s: &str) -> std::result::Result<Rational, String> {
    let r = rational_arg(s)?;
    if r.is_positive() {
        Ok(r)
    } else {
        Err(format!("expected a positive rational, got `{s}`"))
    }
}

#[derive(Args, Debug, Clone)]
pub struct CoeffsArgs {
    /// Catalog id (`one`, `indicator:<n>`, `ramanujan:<q>`, `mu`, `mu2`, `phi-over-n`) or table path.
    #[arg(long)]
    pub spec: String,
    #[arg(long = "V", default_value_t = 3, value_parser = positive)]
    pub v: u64,
    /// Largest coefficient index.
    #[arg(long = "L", default_value_t = 50, value_parser = positive)]
    pub l: u64,
    #[arg(long = "X", default_value_t = 10_000, value_parser = positive)]
    pub x: u64,
    /// Radius to reach by doubling `X` for truncated coefficients.
    #[arg(long, value_parser = positive_rational)]
    pub target: Option<Rational>,
    #[arg(long = "x-cap", default_value_t = 1 << 20, value_parser = positive)]
    pub x_cap: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ExpandArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long = "V", default_value_t = 3, value_parser = positive)]
    pub v: u64,
    #[arg(long = "L", default_value_t = 100, value_parser = positive)]
    pub l: u64,
    #[arg(long = "X", default_value_t = 10_000, value_parser = positive)]
    pub x: u64,
    /// Largest shift `a`.
    #[arg(long, default_value_t = 30, value_parser = positive)]
    pub max: u64,
}

#[derive(Args, Debug, Clone)]
pub struct OrthogonalityArgs {
    #[arg(long = "Q", default_value_t = 3, value_parser = positive)]
    pub q: u64,
    /// Largest index `q`, `ell`.
    #[arg(long, default_value_t = 30, value_parser = positive)]
    pub max: u64,
    #[arg(long = "X", default_value_t = 10_000, value_parser = positive)]
    pub x: u64,
}

#[derive(Args, Debug, Clone)]
pub struct CorrelationArgs {
    /// `f`: catalog id or table path.
    #[arg(long, default_value = "mu")]
    pub spec: String,
    /// `g`: catalog id or table path whose transform vanishes beyond `Q`.
    #[arg(long, default_value = "ramanujan:3")]
    pub g: String,
    #[arg(long = "N", default_value_t = 30, value_parser = positive)]
    pub n: u64,
    #[arg(long = "Q", default_value_t = 5, value_parser = positive)]
    pub q: u64,
    /// Transform bound for the Wintner side.
    #[arg(long = "X", default_value_t = 10_000, value_parser = positive)]
    pub x: u64,
}

#[derive(Args, Debug, Clone)]
pub struct CounterexampleArgs {
    #[arg(long = "N", value_parser = positive)]
    pub n: u64,
    #[arg(long = "Q", value_parser = positive)]
    pub q: u64,
    #[arg(long, value_parser = positive)]
    pub n0: u64,
    #[arg(long, value_parser = positive)]
    pub q0: u64,
}

#[derive(Args, Debug, Clone)]
pub struct Conjecture1Args {
    #[arg(long = "Q", default_value_t = 3, value_parser = positive)]
    pub q: u64,
    /// Largest `q`, `ell` (default: lcm(1..Q)).
    #[arg(long, value_parser = positive)]
    pub max: Option<u64>,
    /// Largest `|n|` (default: lcm(1..Q)).
    #[arg(long = "shift-max", value_parser = positive)]
    pub shift_max: Option<u64>,
    /// Starting truncation point.
    #[arg(long = "X", default_value_t = 10_000, value_parser = positive)]
    pub x: u64,
    #[arg(long = "x-cap", default_value_t = 1 << 20, value_parser = positive)]
    pub x_cap: u64,
    /// Radius at which doubling stops.
    #[arg(long, value_parser = positive_rational)]
    pub target: Option<Rational>,
}

#[derive(Args, Debug, Clone)]
pub struct ResidualArgs {
    #[arg(long = "N", default_value_t = 100, value_parser = positive)]
    pub n: u64,
    /// Range of `g` (default: sqrt(N) rounded).
    #[arg(long = "Q", value_parser = positive)]
    pub q: Option<u64>,
    /// `f`; without it `f` and `g'` are drawn from the seeded generator.
    #[arg(long)]
    pub spec: Option<String>,
    /// `g` when `--spec` is given.
    #[arg(long, default_value = "ramanujan:3")]
    pub g: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest shift (default: N).
    #[arg(long, value_parser = positive)]
    pub max: Option<u64>,
    #[arg(long = "window-delta", default_value = "1/2", value_parser = rational_arg)]
    pub window_delta: Rational,
    #[arg(long = "envelope-delta", default_value = "1/2", value_parser = rational_arg)]
    pub envelope_delta: Rational,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// A parsed command with its resolved output directory.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// `--out` wins, then `$REEF_OUT_DIR`, then `out`.
    pub fn from_cli(cli: Cli) -> Self {
        let out_dir = cli
            .out
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Self {
            command: cli.command,
            out_dir,
        }
    }

    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Coeffs(_) => "coeffs",
            Command::Expand(_) => "expand",
            Command::Orthogonality(_) => "orthogonality",
            Command::Correlation(_) => "correlation",
            Command::Counterexample(_) => "counterexample",
            Command::Conjecture1(_) => "conjecture1",
            Command::ReefResidual(_) => "reef-residual",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Failure,
    Undecided,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Failure => 1,
            Status::Undecided => 2,
        }
    }
}

pub const EXIT_USAGE: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub check: String,
    pub detail: String,
}

/// Summary lines plus the failure and undecided lists of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub failures: Vec<Finding>,
    pub undecided: Vec<Finding>,
}

impl Outcome {
    pub fn status(&self) -> Status {
        if !self.failures.is_empty() {
            Status::Failure
        } else if !self.undecided.is_empty() {
            Status::Undecided
        } else {
            Status::Pass
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    fn fail(&mut self, check: &str, detail: impl Into<String>) {
        self.failures.push(Finding {
            check: check.into(),
            detail: detail.into(),
        });
    }

    fn undecided(&mut self, check: &str, detail: impl Into<String>) {
        self.undecided.push(Finding {
            check: check.into(),
            detail: detail.into(),
        });
    }

    fn expect(&mut self, check: &str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.fail(check, detail());
        }
    }
}

/// Exit code for an error that aborted a run.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Domain(_) | Error::MissingCertificate(_) | Error::BasicHypothesis(_) => EXIT_USAGE,
        _ => 1,
    }
}

/// Catalog id or path to a function table.
pub fn load_spec(id: &str) -> Result<ArithmeticFunctionSpec> {
    match CatalogFunction::parse(id) {
        Some(f) => Ok(ArithmeticFunctionSpec::catalog(f)),
        None => {
            let path = Path::new(id);
            if !path.exists() {
                return Err(domain(format!("`{id}` is neither a catalog id nor an existing file")));
            }
            parse_function_file(path)
        }
    }
}

/// A spec whose transform vanishes beyond `q`, as a function of range `q`.
pub fn load_range_q(id: &str, q: u64) -> Result<RangeQFunction> {
    let spec = load_spec(id)?;
    let Some(support) = spec.support_bound() else {
        return Err(domain(format!("`{id}` has no finite transform support")));
    };
    for d in q + 1..=support {
        if !spec.transform_value(d)?.is_zero() {
            return Err(domain(format!("transform of `{id}` is nonzero at {d} > Q = {q}")));
        }
    }
    let gprime = (1..=q).map(|d| spec.transform_value(d)).collect::<Result<Vec<_>>>()?;
    build_range_q(&FunctionTable::new(gprime)?)
}

fn tail_params(ctx: &SmoothContext, spec: &ArithmeticFunctionSpec, x: u64) -> Result<TailParams> {
    let eps = match spec.certificate() {
        Some(GrowthCertificate::Power { epsilon, .. }) => epsilon.clone(),
        _ => Rational::zero(),
    };
    TailParams::auto(ctx, eps, x)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// Runs the command, writes its artifacts and `failures.json`.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&config.out_dir)?;
    let dir = config.out_dir.as_path();
    let outcome = match &config.command {
        Command::Coeffs(a) => run_coeffs(a, dir)?,
        Command::Expand(a) => run_expand(a, dir)?,
        Command::Orthogonality(a) => run_orthogonality(a, dir)?,
        Command::Correlation(a) => run_correlation(a, dir)?,
        Command::Counterexample(a) => run_counterexample(a, dir)?,
        Command::Conjecture1(a) => run_conjecture1(a, dir)?,
        Command::ReefResidual(a) => run_residual(a, dir)?,
        Command::VerifyAll(a) => run_verify_all(a)?,
    };
    write_manifest(config, &outcome)?;
    Ok(outcome)
}

pub fn write_manifest(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    write_json(
        &config.out_dir,
        "failures.json",
        &json!({
            "command": config.command_name(),
            "status": outcome.status(),
            "failures": outcome.failures,
            "undecided": outcome.undecided,
        }),
    )
}

/// Manifest for a run aborted by an error.
pub fn write_error_manifest(config: &RunConfig, e: &Error) -> Result<()> {
    let mut outcome = Outcome::default();
    outcome.fail("run", e.to_string());
    fs::create_dir_all(&config.out_dir)?;
    write_manifest(config, &outcome)
}

fn refine_record(
    spec: &ArithmeticFunctionSpec,
    ctx: &SmoothContext,
    rec: &mut CoefficientRecord,
    x: u64,
    cap: u64,
    target: &Rational,
    out: &mut Outcome,
) -> Result<()> {
    let eps = tail_params(ctx, spec, x)?.epsilon;
    let ell = rec.ell;
    let mut eval_w = |x: u64| wintner_restricted(spec, ctx, ell, &TailParams::auto(ctx, eps.clone(), x)?);
    match truncate_to_target(x, cap, target, &mut eval_w) {
        Ok((_, v)) => rec.wintner = v,
        Err(Error::TruncationCap { cap }) => {
            rec.wintner = eval_w(cap)?;
            out.undecided("wintner-radius", format!("ell = {ell}: radius {} above target at X = {cap}", format_rational(rec.wintner.radius())));
        }
        Err(e) => return Err(e),
    }
    let mut eval_c = |x: u64| carmichael_formula(spec, ctx, ell, &TailParams::auto(ctx, eps.clone(), x)?);
    match truncate_to_target(x, cap, target, &mut eval_c) {
        Ok((_, v)) => rec.carmichael_formula = v,
        Err(Error::TruncationCap { cap }) => {
            rec.carmichael_formula = eval_c(cap)?;
            out.undecided(
                "carmichael-radius",
                format!("ell = {ell}: radius {} above target at X = {cap}", format_rational(rec.carmichael_formula.radius())),
            );
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn run_coeffs(a: &CoeffsArgs, dir: &Path) -> Result<Outcome> {
    let spec = load_spec(&a.spec)?;
    let ctx = SmoothContext::new(a.v)?;
    let tp = tail_params(&ctx, &spec, a.x)?;
    let mut records = coefficient_records(&spec, &ctx, a.l, &tp, &[])?;
    let mut out = Outcome::default();
    if let Some(target) = &a.target {
        for rec in records.iter_mut().filter(|r| r.method == CoefficientMethod::Truncated) {
            refine_record(&spec, &ctx, rec, a.x, a.x_cap.max(a.x), target, &mut out)?;
        }
    }
    let mut buf = Vec::new();
    write_coefficients_csv(&mut buf, &records)?;
    fs::write(dir.join("coeffs.csv"), buf)?;
    for r in &records {
        out.expect("coefficient-agreement", r.consistent(), || {
            format!("ell = {}: wintner {} and carmichael {} are disjoint", r.ell, r.wintner, r.carmichael_formula)
        });
        if r.method == CoefficientMethod::Exact {
            out.expect("coefficient-exact", r.wintner == r.carmichael_formula, || {
                format!("ell = {}: exact values differ", r.ell)
            });
        }
    }
    out.note(format!("{} V = {} ell <= {}: {} coefficients", spec.describe(), a.v, a.l, records.len()));
    Ok(out)
}

#[derive(Serialize)]
struct ExpandRow {
    a: u64,
    partial: BoundedValue,
    index_tail: String,
    target: String,
    residual: String,
}

fn run_expand(a: &ExpandArgs, dir: &Path) -> Result<Outcome> {
    let spec = load_spec(&a.spec)?;
    let ctx = SmoothContext::new(a.v)?;
    let tp = tail_params(&ctx, &spec, a.x)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for shift in 1..=a.max {
        let e = re_expansion_partial(&spec, &ctx, shift, a.l, &tp)?;
        out.expect("expansion", e.consistent(), || {
            format!("a = {shift}: residual {} exceeds bound {}", format_rational(&e.residual()), format_rational(&e.residual_bound()))
        });
        rows.push(ExpandRow {
            a: shift,
            index_tail: format_rational(&e.index_tail),
            target: format_rational(&e.target),
            residual: format_rational(&e.residual()),
            partial: e.partial,
        });
    }
    write_json(
        dir,
        "expand.json",
        &json!({
            "spec": spec.describe(),
            "V": a.v,
            "L": a.l,
            "X": a.x,
            "rows": rows,
        }),
    )?;
    out.note(format!("{} V = {} L = {}: {} shifts", spec.describe(), a.v, a.l, a.max));
    Ok(out)
}

fn run_orthogonality(a: &OrthogonalityArgs, dir: &Path) -> Result<Outcome> {
    let ctx = SmoothContext::new(a.q)?;
    let mut buf = Vec::new();
    write_orthogonality_csv(&mut buf, &ctx, a.max)?;
    fs::write(dir.join("orthogonality.csv"), buf)?;
    let tp = TailParams::auto(&ctx, Rational::zero(), a.x)?;
    let grid = orthogonality_grid(&ctx, a.max, &tp)?;
    let mut out = Outcome::default();
    for r in &grid {
        out.expect("orthogonality-exact", r.exact_ok(), || {
            format!("(q, ell) = ({}, {}): got {}", r.q, r.ell, format_rational(&r.exact_value))
        });
        out.expect("orthogonality-truncated", r.truncated_ok(), || {
            format!("(q, ell) = ({}, {}): {} excludes {}", r.q, r.ell, r.truncated, format_rational(&r.expected))
        });
    }
    out.note(format!("Q = {} indices <= {}: {} pairs", a.q, a.max, grid.len()));
    Ok(out)
}

/// Decomposition, Carmichael mean and certified transform-side checks.
/// Returns the indices whose transform side has no certified tail.
fn check_correlation_table(table: &CorrelationTable, x: u64, label: &str, out: &mut Outcome) -> Result<Vec<u64>> {
    for shift in 1..=table.period() {
        out.expect("decomposition", table.ramanujan_decomposition(shift) == table.correlation(shift), || {
            format!("{label}, a = {shift}")
        });
    }
    let mut uncertified = Vec::new();
    for ell in 1..=table.pair().range() {
        let coef = table.correlation_coefficient(ell);
        let mean = table.carmichael_mean(ell)?;
        out.expect("carmichael-mean", mean == coef, || format!("{label}, ell = {ell}"));
        match table.transform_wintner(ell, x)?.certified {
            Some(v) => out.expect("transform-wintner", v.contains(&coef), || {
                format!("{label}, ell = {ell}: {v} excludes {}", format_rational(&coef))
            }),
            None => uncertified.push(ell),
        }
    }
    Ok(uncertified)
}

fn run_correlation(a: &CorrelationArgs, dir: &Path) -> Result<Outcome> {
    let f = load_spec(&a.spec)?;
    let g = load_range_q(&a.g, a.q)?;
    let pair = BhPair::new(f, g, a.n)?;
    let label = pair.describe();
    let table = CorrelationTable::build(pair, a.x)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    fs::write(dir.join("correlation.csv"), buf)?;
    let mut out = Outcome::default();
    for ell in check_correlation_table(&table, a.x, &label, &mut out)? {
        out.undecided(
            "transform-wintner",
            format!("{label}, ell = {ell}: no certified tail for the transform series at X = {}", a.x),
        );
    }
    out.note(format!("{label}: period {}, even = {}", table.period(), table.is_even()));
    Ok(out)
}

fn run_counterexample(a: &CounterexampleArgs, dir: &Path) -> Result<Outcome> {
    let rep = indicator_counterexample(a.n, a.q, a.n0, a.q0)?;
    let phi = rat_u(euler_phi(a.q0));
    let mu2 = rat(mobius(a.q0).abs());
    let expected = &phi - &mu2 / &phi;
    write_json(dir, "reef_report.json", &rep)?;
    let mut out = Outcome::default();
    out.expect("counterexample-defect", rep.defect == expected && !rep.defect.is_zero(), || {
        format!("defect {} differs from {}", format_rational(&rep.defect), format_rational(&expected))
    });
    out.note(format!(
        "lhs = {}, rhs = {}, defect = {}",
        format_rational(&rep.lhs),
        format_rational(&rep.rhs),
        format_rational(&rep.defect)
    ));
    Ok(out)
}

fn sweep_config(a: &Conjecture1Args) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::new(a.q)?;
    if let Some(m) = a.max {
        cfg.index_max = m;
    }
    if let Some(m) = a.shift_max {
        cfg.shift_max = m;
    }
    cfg.x_start = a.x;
    cfg.x_cap = a.x_cap.max(a.x);
    if let Some(t) = &a.target {
        cfg.resolution = t.clone();
    }
    Ok(cfg)
}

fn run_conjecture1(a: &Conjecture1Args, dir: &Path) -> Result<Outcome> {
    let cfg = sweep_config(a)?;
    let rep = shifted_orthogonality_sweep(&cfg)?;
    write_json(dir, "reef_report.json", &rep)?;
    let mut out = Outcome::default();
    match &rep.witness {
        Some(w) => out.note(format!(
            "witness (q, ell, n) = ({}, {}, {}) at X = {}: {} excludes {}",
            w.q,
            w.ell,
            w.n,
            w.x,
            w.value,
            format_rational(&w.conjectured)
        )),
        None => out.undecided("shifted-orthogonality-sweep", format!("no certified violation among {} points", rep.points_examined)),
    }
    out.note(format!("{} points examined, {} undecided", rep.points_examined, rep.undecided.len()));
    Ok(out)
}

fn run_residual(a: &ResidualArgs, dir: &Path) -> Result<Outcome> {
    let q = a.q.unwrap_or_else(|| sqrt_range(a.n));
    let pair = match &a.spec {
        Some(id) => BhPair::new(load_spec(id)?, load_range_q(&a.g, q)?, a.n)?,
        None => random_bh_pair(&mut ChaCha8Rng::seed_from_u64(a.seed), a.n, q)?,
    };
    let rep = approximate_reef_residual(&pair, a.max.unwrap_or(a.n), &a.window_delta, &a.envelope_delta)?;
    write_json(
        dir,
        "reef_report.json",
        &json!({
            "instance": pair.describe(),
            "seed": a.spec.is_none().then_some(a.seed),
            "residual": rep,
        }),
    )?;
    let mut out = Outcome::default();
    out.note(format!(
        "N = {} Q = {}: max |defect| = {}, window a <= {}",
        rep.length,
        rep.range,
        format_rational(&rep.max_abs_defect),
        rep.window
    ));
    Ok(out)
}

fn run_verify_all(a: &VerifyArgs) -> Result<Outcome> {
    let mut out = Outcome::default();

    for q0 in 3..=12u64 {
        let rep = indicator_counterexample(q0, q0, q0 - 1, q0)?;
        let phi = rat_u(euler_phi(q0));
        let mu2 = rat(mobius(q0).abs());
        out.expect("counterexample", rep.lhs == phi && rep.rhs == &mu2 / &phi, || format!("q0 = {q0}"));
    }
    out.note("counterexample: q0 in 3..=12");

    for bound in [2u64, 3, 5] {
        let ctx = SmoothContext::new(bound)?;
        let tp = TailParams::auto(&ctx, Rational::zero(), 10_000)?;
        for r in orthogonality_grid(&ctx, 30, &tp)? {
            out.expect("orthogonality", r.exact_ok(), || format!("Q = {bound} ({}, {})", r.q, r.ell));
            if r.q * r.ell <= 36 {
                out.expect("orthogonality-truncated", r.truncated_ok(), || format!("Q = {bound} ({}, {})", r.q, r.ell));
            }
        }
    }
    out.note("orthogonality: Q in {2, 3, 5}, indices <= 30");

    let finite = [
        CatalogFunction::One,
        CatalogFunction::RamanujanSum(4),
        CatalogFunction::RamanujanSum(6),
        CatalogFunction::RamanujanSum(12),
    ];
    for v in [2u64, 3, 5] {
        let ctx = SmoothContext::new(v)?;
        for f in finite {
            let spec = ArithmeticFunctionSpec::catalog(f);
            let tp = tail_params(&ctx, &spec, 1000)?;
            for r in coefficient_records(&spec, &ctx, 50, &tp, &[])? {
                out.expect("coefficients-exact", r.wintner.is_exact() && r.wintner == r.carmichael_formula, || {
                    format!("{f} V = {v} ell = {}", r.ell)
                });
            }
            let support = spec.support_bound().unwrap_or(1);
            for shift in 1..=30 {
                let e = re_expansion_partial(&spec, &ctx, shift, support.max(2) * ctx.primorial().unwrap_or(1), &tp)?;
                out.expect("expansion-exact", e.partial.is_exact() && e.partial.center() == &e.target, || {
                    format!("{f} V = {v} a = {shift}")
                });
            }
        }
    }
    out.note("coefficients and expansions: finite-support catalog, V in {2, 3, 5}");

    let catalog = [
        CatalogFunction::One,
        CatalogFunction::Indicator(4),
        CatalogFunction::RamanujanSum(6),
        CatalogFunction::Mobius,
        CatalogFunction::MobiusSquared,
        CatalogFunction::PhiOverN,
    ];
    for bound in [2u64, 3, 5] {
        let ctx = SmoothContext::new(bound)?;
        for f in catalog {
            let spec = ArithmeticFunctionSpec::catalog(f);
            for shift in 1..=300 {
                out.expect("mobius-switch", smooth_restrict(&spec, &ctx, shift)? == mobius_switch_rhs(&spec, &ctx, shift)?, || {
                    format!("{f} Q = {bound} a = {shift}")
                });
            }
        }
    }
    out.note("smooth restriction: catalog, Q in {2, 3, 5}, a <= 300");

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for i in 0..10 {
        let pair = random_bh_instance(&mut rng, 60, 8)?;
        let label = format!("instance {i}: {}", pair.describe());
        let table = CorrelationTable::build(pair, 1)?;
        check_correlation_table(&table, 1, &label, &mut out)?;
    }
    out.note(format!("correlations: 10 random instances, seed {}", a.seed));

    let mut cfg = SweepConfig::new(3)?;
    cfg.x_cap = 1 << 16;
    let rep = shifted_orthogonality_sweep(&cfg)?;
    out.expect("shifted-orthogonality-witness", rep.witness.is_some(), || "no certified violation for Q = 3".into());
    out.note("shifted orthogonality: Q = 3 sweep");
    Ok(out)
}
