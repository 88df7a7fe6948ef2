//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::discrepancy::{
    balance, coloring_from_hex, coloring_profile, disc_exact, disc_for_coloring, disc_monte_carlo,
    expected_disc_exact,
};
use crate::enumerate::{Budget, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::io::{parse_hypergraph, parse_tensor};
use crate::model::{chaos_coeffs, WeightedHypergraph};
use crate::norms::{
    cut_norm, cut_norm_star, decouple, linf_chaos, linf_multiple, lp_rademacher_exact,
    mixed_norm_profile, opnorm_inf_to_1,
};
use crate::verify::{
    meta_check, run_suite, scaling_scan, CheckReport, ConstantId, ConstantsTable, ScanTable, Suite,
    DEFAULT_P_LIST,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Fraction by which `verify --suite meta` tightens each constant.
const META_FRACTION: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "radchaos", version, about = "Exact cut-norms, Rademacher chaos norms and hypergraph discrepancy")]
struct Cli {
    /// Cap on enumerated configurations.
    #[arg(long, global = true, env = "RADCHAOS_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo trials.
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Evaluate a norm of a tensor, vector or hypergraph.
    Norm(NormArgs),
    /// Discrepancy of a weighted hypergraph.
    Disc(DiscArgs),
    /// Run inequality suites over generated instances.
    Verify(VerifyArgs),
    /// Discrepancy of unit complete hypergraphs over a range of sizes.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NormKind {
    /// Cut-norm of a tensor.
    Cut,
    /// Modified cut-norm of the chaos of a hypergraph.
    CutStar,
    /// l_inf -> l_1 operator norm of a matrix.
    Opnorm,
    /// Sup-norm of the multiple Rademacher sum of a tensor.
    Linf,
    /// Sup-norm of the Rademacher chaos of a hypergraph.
    Chaos,
    /// Mixed slice norms M_1..M_d of a tensor.
    Mixed,
    /// Exact L_p norm of a Rademacher sum with the given coefficients.
    Lp,
    /// Symmetrized decoupled tensor of the chaos of a hypergraph.
    Decouple,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input file; "-" reads standard input.
    #[arg(long, conflicts_with = "inline")]
    input: Option<PathBuf>,
    /// Input given directly on the command line.
    #[arg(long)]
    inline: Option<String>,
}

impl InputArgs {
    fn read(&self) -> Result<String> {
        match (&self.input, &self.inline) {
            (_, Some(text)) => Ok(text.clone()),
            (Some(path), None) if path.as_os_str() == "-" => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s)?;
                Ok(s)
            }
            (Some(path), None) => fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
            (None, None) => Err(Error::Domain("one of --input or --inline is required".into())),
        }
    }
}

#[derive(Debug, Args)]
struct NormArgs {
    #[arg(long, value_enum)]
    kind: NormKind,
    #[command(flatten)]
    input: InputArgs,
    /// Exponent for --kind lp.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").args(["exact", "expected", "monte_carlo", "coloring", "balance", "profile"])))]
struct DiscArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Minimum over all colorings (the default).
    #[arg(long)]
    exact: bool,
    /// Exact mean over all colorings.
    #[arg(long)]
    expected: bool,
    /// Seeded estimate of the mean over colorings.
    #[arg(long)]
    monte_carlo: bool,
    /// Discrepancy under one coloring, given as a hex edge mask.
    #[arg(long, value_name = "HEX")]
    coloring: Option<String>,
    /// Balance functional of the weights.
    #[arg(long)]
    balance: bool,
    /// Minimum, mean and maximum over all colorings.
    #[arg(long)]
    profile: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite name, "all", or "meta" for the harness self-check.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Largest extent N, or an extent range A..B.
    #[arg(long, default_value = "1..4")]
    sizes: String,
    /// Instances per random family.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Order of generated tensors, chaos and hypergraphs.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Exponents for the Khintchine suite.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_P_LIST)]
    p_list: Vec<f64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Hypergraph arity.
    #[arg(long, short = 'd', default_value_t = 2)]
    arity: usize,
    /// Vertex counts as A..B or a single N.
    #[arg(long, short = 'n', default_value = "3..7")]
    n: String,
}

/// A result ready for serialization.
pub enum Output {
    Json(Value),
    Table(ScanTable),
}

impl Output {
    fn json<T: Serialize>(value: &T) -> Output {
        Output::Json(serde_json::to_value(value).expect("results serialize"))
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap()
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes a result. CSV is available for tables only.
pub fn emit(output: &Output, format: Format) -> Result<String> {
    match (output, format) {
        (Output::Table(t), Format::Csv) => Ok(t.to_csv(|x| format!("{}", round_sig(x)))),
        (Output::Json(_), Format::Csv) => {
            Err(Error::Domain("csv output is only available for tables".into()))
        }
        (Output::Table(t), Format::Json) => emit(&Output::json(t), Format::Json),
        (Output::Json(v), Format::Json) => {
            let mut v = v.clone();
            round_value(&mut v);
            Ok(serde_json::to_string_pretty(&v).unwrap() + "\n")
        }
    }
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Domain(format!("invalid range {s:?}, expected N or A..B"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().trim_start_matches('=').parse().map_err(|_| bad())?,
        ),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| Error::parse(e.line(), e.to_string()));
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("not a number: {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(i + 1, format!("non-finite coefficient {tok:?}")));
            }
            out.push(v);
        }
    }
    Ok(out)
}

fn hypergraph(input: &InputArgs) -> Result<WeightedHypergraph> {
    parse_hypergraph(input.read()?.as_bytes())
}

fn run_norm(args: &NormArgs, budget: Budget) -> Result<Output> {
    let text = || args.input.read();
    Ok(match args.kind {
        NormKind::Cut => Output::json(&cut_norm(&parse_tensor(&text()?)?, budget)?),
        NormKind::Opnorm => Output::json(&opnorm_inf_to_1(&parse_tensor(&text()?)?, budget)?),
        NormKind::Linf => Output::json(&linf_multiple(&parse_tensor(&text()?)?, budget)?),
        NormKind::Mixed => {
            let profile = mixed_norm_profile(&parse_tensor(&text()?)?);
            Output::json(&serde_json::json!({ "m": profile.m(), "max": profile.max() }))
        }
        NormKind::CutStar => Output::json(&cut_norm_star(&chaos_coeffs(&hypergraph(&args.input)?), budget)?),
        NormKind::Chaos => Output::json(&linf_chaos(&chaos_coeffs(&hypergraph(&args.input)?), budget)?),
        NormKind::Decouple => Output::json(&decouple(&chaos_coeffs(&hypergraph(&args.input)?))),
        NormKind::Lp => {
            let value = lp_rademacher_exact(&parse_vector(&text()?)?, args.p, budget)?;
            Output::json(&serde_json::json!({ "value": value, "p": args.p }))
        }
    })
}

fn run_disc(args: &DiscArgs, cli: &Cli, budget: Budget) -> Result<Output> {
    let h = hypergraph(&args.input)?;
    Ok(if args.expected {
        Output::json(&expected_disc_exact(&h, budget)?)
    } else if args.monte_carlo {
        Output::json(&disc_monte_carlo(&h, cli.trials, cli.seed, budget)?)
    } else if let Some(hex) = &args.coloring {
        let coloring = coloring_from_hex(hex, h.edge_count())?;
        Output::json(&disc_for_coloring(&h, &coloring, budget)?)
    } else if args.balance {
        Output::json(&serde_json::json!({ "value": balance(&h) }))
    } else if args.profile {
        Output::json(&coloring_profile(&h, budget)?)
    } else {
        Output::json(&disc_exact(&h, budget)?)
    })
}

#[derive(Serialize)]
struct SuiteOutput {
    suite: Suite,
    pass: bool,
    reports: Vec<CheckReport>,
}

fn run_verify(args: &VerifyArgs, cli: &Cli, budget: Budget) -> Result<(Output, bool)> {
    if args.order < 2 {
        return Err(Error::Domain(format!("--order must be at least 2, got {}", args.order)));
    }
    if let Some(p) = args.p_list.iter().find(|&&p| !(p >= 1.0 && p.is_finite())) {
        return Err(Error::Domain(format!("--p-list entries must be finite and >= 1, got {p}")));
    }
    let extents = match parse_range(&args.sizes)? {
        (n, m) if n == m && !args.sizes.contains("..") => (1, n),
        r => r,
    };
    let constants = ConstantsTable::default();
    if args.suite == "meta" {
        let mut outcomes = Vec::new();
        for suite in Suite::ALL {
            for &constant in suite.constants() {
                outcomes.push(meta_check(constant, suite, META_FRACTION, budget)?);
            }
        }
        let pass = outcomes.iter().all(|o| o.detected);
        let detected: Vec<ConstantId> = outcomes.iter().filter(|o| o.detected).map(|o| o.constant).collect();
        let undetected: Vec<ConstantId> = ConstantId::ALL
            .into_iter()
            .filter(|c| !detected.contains(c))
            .collect();
        let out = serde_json::json!({
            "fraction": META_FRACTION,
            "pass": pass,
            "undetected": undetected,
            "outcomes": outcomes,
        });
        return Ok((Output::Json(out), pass));
    }
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::from_name(&args.suite).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            Error::Domain(format!(
                "unknown suite {:?}; expected one of {}, all, meta",
                args.suite,
                names.join(", ")
            ))
        })?]
    };
    let mut results = Vec::new();
    for suite in suites {
        let reports = run_suite(
            suite, args.order, extents, args.count, cli.seed, &args.p_list, &constants, budget,
        )?;
        let pass = reports.iter().all(|r| !r.fails_hard());
        results.push(SuiteOutput { suite, pass, reports });
    }
    let pass = results.iter().all(|r| r.pass);
    let out = if results.len() == 1 {
        Output::json(&results[0])
    } else {
        Output::json(&serde_json::json!({ "pass": pass, "suites": results }))
    };
    Ok((out, pass))
}

fn run_scan(args: &ScanArgs, cli: &Cli, budget: Budget) -> Result<(Output, bool)> {
    let (lo, hi) = parse_range(&args.n)?;
    let table = scaling_scan(args.arity, lo, hi, cli.trials, cli.seed, budget)?;
    let pass = table.monotone;
    Ok((Output::Table(table), pass))
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let budget = Budget(cli.budget);
    let (output, pass) = match &cli.verb {
        Verb::Norm(a) => (run_norm(a, budget)?, true),
        Verb::Disc(a) => (run_disc(a, cli, budget)?, true),
        Verb::Verify(a) => run_verify(a, cli, budget)?,
        Verb::Scan(a) => run_scan(a, cli, budget)?,
    };
    let text = emit(&output, cli.format)?;
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATION })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                eprintln!("error: {}", e.render().to_string().trim_start_matches("error: ").trim_end());
            } else {
                print!("{}", e.render());
            }
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::Domain("--threads must be at least 1".into())),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::Domain(format!("cannot start {k} threads: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
