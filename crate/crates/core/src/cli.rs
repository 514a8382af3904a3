//! Command-line front end: argument parsing, dispatch and JSON reports.
//!
//! Exit codes: 0 success, 1 unreadable input, 2 usage or validation error,
//! 3 worst-case value diverges to `+inf`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::applications::{chance_feasible, chance_linf, chance_robust_value, dr_value_iteration, globalized_value, ChanceInstance};
use crate::dual::{dual_value, envelope_g};
use crate::fuzz::{fuzz_compare, FuzzConfig};
use crate::io::{self, canonical_digest, IoError, ProblemSpec};
use crate::maxcost::{linf_robust, linf_robust_strict, linf_soft};
use crate::problem::TransportOrder;
use crate::risk::{closed_form_robust_risk, robust_risk_generic, PortfolioInstance, RiskError, RiskFamily, RiskMode, ScalarDistribution};
use crate::transport::{primal_soft, primal_worst_case, PrimalResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wdro", version, about = "Worst-case expected losses over Wasserstein balls")]
pub struct Cli {
    /// Omit the timings field so reports are byte-identical across runs.
    #[arg(long, global = true)]
    pub no_timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BallMode {
    /// Transport-cost budget.
    Standard,
    /// Maximum transport cost (`p = inf`).
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    /// Transport-cost budget.
    Standard,
    /// Maximum transport cost (`p = inf`).
    Linf,
    /// Penalized maximum-cost problem at `--lambda`.
    LinfSoft,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Problem file (JSON).
    #[arg(long)]
    pub file: PathBuf,
    /// Replaces the radius of the file.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Worst-case expected loss, by LP over couplings or by the dual.
    Eval {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, conflicts_with_all = ["dual", "soft"])]
        primal: bool,
        #[arg(long, conflicts_with = "soft")]
        dual: bool,
        /// Penalized problem at `--lambda`, same as the `soft` command.
        #[arg(long, requires = "lambda")]
        soft: bool,
        /// Multiplier for `--soft` and `--mode linf-soft`.
        #[arg(long)]
        lambda: Option<f64>,
        /// Ball type; files with `p = "inf"` default to `linf`.
        #[arg(long, value_enum)]
        mode: Option<EvalMode>,
        /// Strict maximum-cost ball (needs `--mode linf`).
        #[arg(long)]
        strict: bool,
    },
    /// `(rho, L(rho))` pairs.
    Curve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to", "steps"])]
        rhos: Option<Vec<f64>>,
        #[arg(long, requires_all = ["to", "steps"])]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Primal and dual values and their gap, for a file or random instances.
    Compare {
        #[arg(long, required_unless_present = "fuzz", conflicts_with = "fuzz")]
        file: Option<PathBuf>,
        #[arg(long)]
        radius: Option<f64>,
        /// Number of random instances.
        #[arg(long)]
        fuzz: Option<u64>,
        #[arg(long, default_value_t = 0, requires = "fuzz")]
        seed: u64,
    },
    /// Penalized problem at a fixed multiplier.
    Soft {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum)]
        mode: Option<BallMode>,
    },
    /// Worst-case risk of a scalar nominal.
    Risk(RiskArgs),
    /// Distributionally robust chance constraint.
    Chance {
        #[arg(long)]
        file: PathBuf,
        /// Maximum-cost ball: the order of the file is replaced by `inf`.
        #[arg(long)]
        linf: bool,
    },
    /// Two-layer (globalized) worst case.
    Globalized {
        #[arg(long)]
        file: PathBuf,
        /// Outer budget; replaces `theta` of the file.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Robust finite-horizon MDPs.
    Mdp {
        #[command(subcommand)]
        command: MdpCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum MdpCommand {
    /// Robust value iteration.
    Solve {
        #[arg(long)]
        file: PathBuf,
        /// Also solve every backup as a primal LP and report the gaps.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Cvar,
    Var,
    Mad,
    Ent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RiskModeArg {
    Closed,
    Analytic,
    Grid,
    Linf,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[arg(long, value_enum)]
    pub measure: Measure,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Transport order: a number >= 1 or `inf`.
    #[arg(long, default_value = "1")]
    pub p: TransportOrder,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: RiskModeArg,
    /// Grid spacing for `--mode grid`.
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    /// Grid reach beyond the nominal support for `--mode grid`.
    #[arg(long, default_value_t = 3.0)]
    pub span: f64,
    /// Nominal file with `values`, optional `weights` and `dual_norm_b`.
    #[arg(long, conflicts_with_all = ["values", "weights"])]
    pub file: Option<PathBuf>,
    /// Comma-separated nominal values (uniform unless `--weights`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "file")]
    pub values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub dual_norm: f64,
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub values: BTreeMap<String, Value>,
    pub certificates: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl Report {
    fn new(command: &str, inputs_digest: String) -> Self {
        Self {
            command: command.into(),
            inputs_digest,
            values: BTreeMap::new(),
            certificates: BTreeMap::new(),
            timings_ms: Some(BTreeMap::new()),
        }
    }

    fn value(&mut self, name: &str, v: Value) {
        self.values.insert(name.into(), v);
    }

    fn certificate(&mut self, name: &str, v: Value) {
        self.certificates.insert(name.into(), v);
    }

    fn timing(&mut self, phase: &str, since: Instant) {
        if let Some(t) = self.timings_ms.as_mut() {
            t.insert(phase.into(), since.elapsed().as_secs_f64() * 1e3);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

/// A real rounded to 12 significant digits; non-finite values become the
/// strings `"inf"`, `"-inf"` and `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
        json!(rounded)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = if matches!(e, IoError::Read { .. }) { EXIT_IO } else { EXIT_INVALID };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INVALID, message: e.to_string() }
}

/// Report plus exit code; divergent results carry a report and code 3.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

fn ok(report: Report) -> std::result::Result<Outcome, Failure> {
    Ok(Outcome { report, code: EXIT_OK })
}

/// Runs one parsed command.
pub fn run(cli: &Cli) -> std::result::Result<Outcome, Failure> {
    let mut outcome = match &cli.command {
        Command::Eval { problem, primal, dual: _, soft: soft_flag, lambda, mode, strict } => {
            eval(problem, *primal, *soft_flag, *lambda, *mode, *strict)
        }
        Command::Curve { problem, rhos, from, to, steps } => curve(problem, rhos.as_deref(), *from, *to, *steps),
        Command::Compare { file: Some(file), radius, .. } => compare_file(file, *radius),
        Command::Compare { fuzz: Some(count), seed, .. } => compare_fuzz(*count, *seed),
        Command::Compare { .. } => Err(invalid("compare needs --file or --fuzz")),
        Command::Soft { problem, lambda, mode } => soft(problem, *lambda, *mode),
        Command::Risk(args) => risk(args),
        Command::Chance { file, linf } => chance(file, *linf),
        Command::Globalized { file, theta } => globalized(file, *theta),
        Command::Mdp { command: MdpCommand::Solve { file, verify } } => mdp(file, *verify),
    }?;
    if cli.no_timings {
        outcome.report.timings_ms = None;
    }
    Ok(outcome)
}

fn load(args: &ProblemArgs, report_name: &str) -> std::result::Result<(ProblemSpec, Report), Failure> {
    let start = Instant::now();
    let parsed = io::read_problem(&args.file)?;
    let mut spec = parsed.instance;
    if let Some(r) = args.radius {
        spec.problem = spec.problem.with_radius(r).map_err(invalid)?;
    }
    let digest = match args.radius {
        Some(r) => canonical_digest(&json!({ "file": parsed.digest, "radius": r })),
        None => parsed.digest,
    };
    let mut report = Report::new(report_name, digest);
    report.timing("parse", start);
    log::info!("{report_name}: {} atoms, {} points, radius {}", spec.problem.n(), spec.problem.m(), spec.problem.radius());
    Ok((spec, report))
}

fn coupling_summary(r: &PrimalResult) -> Value {
    let entries: Vec<Value> = r.coupling.nonzero().map(|(i, j, w)| json!([i, j, num(w)])).collect();
    json!({
        "entries": entries,
        "transport_cost": num(r.transport_cost),
        "worst_case": { "support": r.worst_case.support(), "weights": nums(r.worst_case.weights()) },
    })
}

fn linf_mode(spec: &ProblemSpec, mode: Option<BallMode>) -> bool {
    mode.map_or(spec.order.is_infinite(), |m| m == BallMode::Linf)
}

fn eval(
    args: &ProblemArgs,
    primal: bool,
    soft_flag: bool,
    lambda: Option<f64>,
    mode: Option<EvalMode>,
    strict: bool,
) -> std::result::Result<Outcome, Failure> {
    let ball = match mode {
        Some(EvalMode::LinfSoft) => {
            if strict || primal || soft_flag {
                return Err(invalid("--mode linf-soft takes only --lambda"));
            }
            let lambda = lambda.ok_or_else(|| invalid("--mode linf-soft needs --lambda"))?;
            return soft_report(args, "eval", lambda, Some(BallMode::Linf));
        }
        Some(EvalMode::Linf) => Some(BallMode::Linf),
        Some(EvalMode::Standard) => Some(BallMode::Standard),
        None => None,
    };
    if soft_flag {
        if strict {
            return Err(invalid("--strict does not apply to --soft"));
        }
        return soft_report(args, "eval", lambda.expect("clap requires --lambda with --soft"), ball);
    }
    if lambda.is_some() {
        return Err(invalid("--lambda needs --soft or --mode linf-soft"));
    }
    let mode = ball;
    let (spec, mut report) = load(args, "eval")?;
    let problem = &spec.problem;
    let start = Instant::now();
    if linf_mode(&spec, mode) {
        let r = if strict { linf_robust_strict(problem).map_err(invalid)? } else { linf_robust(problem) };
        report.value("value", num(r.value));
        report.certificate("per_row_argmax", json!(r.per_row_argmax));
        report.certificate("strict", json!(strict));
    } else if strict {
        return Err(invalid("--strict needs --mode linf"));
    } else if primal {
        let r = primal_worst_case(problem).map_err(invalid)?;
        report.value("value", num(r.value));
        report.certificate("coupling", coupling_summary(&r));
    } else {
        let r = dual_value(problem);
        report.value("value", num(r.value));
        report.certificate("lambda_star", num(r.lambda_star));
        report.certificate("zero_radius_warning", json!(r.zero_radius_warning));
    }
    report.timing("solve", start);
    ok(report)
}

fn curve(
    args: &ProblemArgs,
    rhos: Option<&[f64]>,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
) -> std::result::Result<Outcome, Failure> {
    let (spec, mut report) = load(args, "curve")?;
    let grid: Vec<f64> = match (rhos, from, to, steps) {
        (Some(r), ..) => r.to_vec(),
        (None, Some(a), Some(b), Some(n)) if n >= 2 => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
        _ => return Err(invalid("curve needs --rhos, or --from, --to and --steps >= 2")),
    };
    let start = Instant::now();
    let points = crate::dual::robust_curve(&spec.problem, &grid).map_err(invalid)?;
    report.timing("solve", start);
    report.value("curve", Value::Array(points.iter().map(|&(r, v)| json!([num(r), num(v)])).collect()));
    ok(report)
}

fn compare_file(file: &std::path::Path, radius: Option<f64>) -> std::result::Result<Outcome, Failure> {
    let (spec, mut report) = load(&ProblemArgs { file: file.to_path_buf(), radius }, "compare")?;
    let start = Instant::now();
    let primal = primal_worst_case(&spec.problem).map_err(invalid)?;
    report.timing("primal", start);
    let start = Instant::now();
    let dual = dual_value(&spec.problem);
    report.timing("dual", start);
    report.value("primal", num(primal.value));
    report.value("dual", num(dual.value));
    report.value("gap", num((primal.value - dual.value).abs()));
    report.certificate("lambda_star", num(dual.lambda_star));
    report.certificate("coupling", coupling_summary(&primal));
    report.certificate("zero_radius_warning", json!(dual.zero_radius_warning));
    ok(report)
}

fn compare_fuzz(count: u64, seed: u64) -> std::result::Result<Outcome, Failure> {
    let config = FuzzConfig::default();
    let digest = canonical_digest(&json!({ "fuzz": count, "seed": seed }));
    let mut report = Report::new("compare", digest);
    let start = Instant::now();
    let records = fuzz_compare(count, seed, &config).map_err(invalid)?;
    report.timing("solve", start);
    let max_gap = records.iter().map(|r| r.gap).fold(0.0, f64::max);
    let max_relative = records.iter().map(|r| r.gap / (1.0 + r.primal.abs())).fold(0.0, f64::max);
    report.value("instances", json!(count));
    report.value("seed", json!(seed));
    report.value("max_gap", num(max_gap));
    report.value("max_relative_gap", num(max_relative));
    let rows: Vec<Value> = records
        .iter()
        .map(|r| {
            json!({
                "index": r.index, "atoms": r.atoms, "points": r.points, "radius": num(r.radius),
                "primal": num(r.primal), "dual": num(r.dual), "lambda_star": num(r.lambda_star), "gap": num(r.gap),
            })
        })
        .collect();
    report.certificate("records", Value::Array(rows));
    ok(report)
}

fn soft(args: &ProblemArgs, lambda: f64, mode: Option<BallMode>) -> std::result::Result<Outcome, Failure> {
    soft_report(args, "soft", lambda, mode)
}

fn soft_report(args: &ProblemArgs, command: &str, lambda: f64, mode: Option<BallMode>) -> std::result::Result<Outcome, Failure> {
    let (spec, mut report) = load(args, command)?;
    let start = Instant::now();
    report.value("lambda", num(lambda));
    if linf_mode(&spec, mode) {
        report.value("value", num(linf_soft(&spec.problem, lambda).map_err(invalid)?));
    } else {
        let primal = primal_soft(&spec.problem, lambda).map_err(invalid)?;
        let g = envelope_g(&spec.problem).eval(lambda);
        report.value("primal", num(primal.value));
        report.value("envelope", num(g));
        report.value("gap", num((primal.value - g).abs()));
        report.certificate("coupling", coupling_summary(&primal));
    }
    report.timing("solve", start);
    ok(report)
}

fn family(args: &RiskArgs) -> std::result::Result<RiskFamily, Failure> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| invalid(format!("--measure needs --{flag}")));
    match args.measure {
        Measure::Cvar => RiskFamily::cvar(need(args.beta, "beta")?).map_err(invalid),
        Measure::Ent => RiskFamily::entropic(need(args.theta, "theta")?).map_err(invalid),
        Measure::Var => Ok(RiskFamily::Variance),
        Measure::Mad => Ok(RiskFamily::Mad),
    }
}

fn risk(args: &RiskArgs) -> std::result::Result<Outcome, Failure> {
    let start = Instant::now();
    let (nominal, dual_norm, digest) = match (&args.file, &args.values) {
        (Some(path), _) => {
            let parsed = io::read_scalar(path)?;
            (parsed.instance.nominal, parsed.instance.dual_norm_b, parsed.digest)
        }
        (None, Some(values)) => {
            let nominal = match &args.weights {
                Some(w) => ScalarDistribution::new(values.clone(), w.clone()),
                None => ScalarDistribution::uniform(values.clone()),
            }
            .map_err(invalid)?;
            let digest = canonical_digest(&json!({ "values": values, "weights": args.weights }));
            (nominal, args.dual_norm, digest)
        }
        (None, None) => return Err(invalid("risk needs --file or --values")),
    };
    let family = family(args)?;
    let instance = PortfolioInstance::new(nominal, dual_norm, args.p, args.rho).map_err(invalid)?;
    let query = json!({
        "nominal": digest, "measure": family.to_string(), "p": args.p.to_string(), "rho": args.rho,
        "mode": format!("{:?}", args.mode), "h": args.h, "span": args.span,
    });
    let mut report = Report::new("risk", canonical_digest(&query));
    report.timing("parse", start);
    report.value("measure", json!(family.to_string()));
    report.value("effective_radius", num(instance.effective_radius()));
    let start = Instant::now();
    let mode = match args.mode {
        RiskModeArg::Closed => {
            let v = closed_form_robust_risk(&instance, &family).map_err(invalid)?;
            report.timing("solve", start);
            report.value("value", num(v));
            let code = if v == f64::INFINITY { EXIT_DIVERGENT } else { EXIT_OK };
            return Ok(Outcome { report, code });
        }
        RiskModeArg::Analytic => RiskMode::Analytic,
        RiskModeArg::Grid => RiskMode::Grid { h: args.h, span: args.span },
        RiskModeArg::Linf => RiskMode::Linf,
    };
    let result = robust_risk_generic(&instance, &family, mode);
    report.timing("solve", start);
    match result {
        Ok(r) => {
            report.value("value", num(r.value));
            if let Some(a) = r.alpha_star {
                report.certificate("alpha_star", num(a));
            }
            if let Some(l) = r.lambda_star {
                report.certificate("lambda_star", num(l));
            }
            ok(report)
        }
        Err(RiskError::DivergesToInfinity(cert)) => {
            report.value("value", num(f64::INFINITY));
            let witnesses: Vec<Value> = cert
                .witnesses
                .iter()
                .map(|w| json!({ "epsilon": num(w.epsilon), "shift": num(w.shift), "risk": num(w.risk) }))
                .collect();
            report.certificate(
                "divergence",
                json!({ "method": cert.method, "family": cert.family, "p": cert.p, "witnesses": witnesses }),
            );
            Ok(Outcome { report, code: EXIT_DIVERGENT })
        }
        Err(e) => Err(invalid(e)),
    }
}

fn chance(file: &std::path::Path, linf: bool) -> std::result::Result<Outcome, Failure> {
    let start = Instant::now();
    let parsed = io::read_chance(file)?;
    let mut instance = parsed.instance;
    if linf {
        instance = ChanceInstance::new(
            instance.weights().to_vec(),
            instance.distances().to_vec(),
            TransportOrder::Infinity,
            instance.rho(),
            instance.beta(),
        )
        .map_err(invalid)?;
    }
    let digest = canonical_digest(&json!({ "file": parsed.digest, "linf": linf }));
    let mut report = Report::new("chance", digest);
    report.timing("parse", start);
    let start = Instant::now();
    if instance.p().is_infinite() {
        let r = chance_linf(&instance).map_err(invalid)?;
        report.value("value", num(r.value));
        report.value("feasible", json!(r.feasible));
        report.certificate("infeasibility_threshold", num(r.threshold));
    } else {
        report.value("value", num(chance_robust_value(&instance).map_err(invalid)?));
        report.value("feasible", json!(chance_feasible(&instance).map_err(invalid)?));
        report.certificate("infeasibility_threshold", num(instance.infeasibility_threshold()));
    }
    report.value("beta", num(instance.beta()));
    report.timing("solve", start);
    ok(report)
}

fn globalized(file: &std::path::Path, theta: Option<f64>) -> std::result::Result<Outcome, Failure> {
    let start = Instant::now();
    let parsed = io::read_globalized(file, theta)?;
    let digest = canonical_digest(&json!({ "file": parsed.digest, "theta": theta }));
    let mut report = Report::new("globalized", digest);
    report.timing("parse", start);
    let start = Instant::now();
    let r = globalized_value(&parsed.instance).map_err(invalid)?;
    report.timing("solve", start);
    report.value("value", num(r.value));
    report.certificate("lambda_star", num(r.lambda_star));
    report.certificate("mu_star", num(r.mu_star));
    report.certificate("shared_metric", json!(r.shared_metric));
    ok(report)
}

fn mdp(file: &std::path::Path, verify: bool) -> std::result::Result<Outcome, Failure> {
    let start = Instant::now();
    let parsed = io::read_mdp(file)?;
    let digest = canonical_digest(&json!({ "file": parsed.digest, "verify": verify }));
    let mut report = Report::new("mdp solve", digest);
    report.timing("parse", start);
    let start = Instant::now();
    let sol = dr_value_iteration(&parsed.instance, verify).map_err(invalid)?;
    report.timing("solve", start);
    report.value("values", Value::Array(sol.values.iter().map(|v| nums(v)).collect()));
    report.value("policy", json!(sol.policy));
    report.certificate("backups", json!(sol.backups.len()));
    if let Some(gap) = sol.max_gap() {
        report.certificate("max_gap", num(gap));
    }
    ok(report)
}

/// Log level from `DRO_LOG` (`quiet`, `info`, `debug`; warnings otherwise).
fn init_logging() {
    let level = match std::env::var("DRO_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
}

/// Entry point of the binary; returns the process exit code.
pub fn main_entry() -> i32 {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report.to_json());
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
