//! Command-line front end. Exit codes: 0 success, 2 invalid input,
//! 3 failed verification, 4 a size, resample or round cap was hit.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_experiment, write_rows_csv, BenchConfig, BenchError};
use crate::dynamics::{
    default_initial, random_initial, run_best_response, run_learning, DynamicsError, DynamicsTrace, RunOptions,
    Schedule, DEFAULT_MAX_ROUNDS,
};
use crate::game::{cardinality, Allocation, CoveringProblem, GameError, UniformShares};
use crate::oracle::{
    all_nash_with, builtin, learning_over_all_initials_with, OracleError, OracleOptions, DEFAULT_ENUMERATION_CAP,
};
use crate::par::Execution;
use crate::rational::{format_fraction, format_significant, parse_decimal, Rational};
use crate::report::{
    poa_table, relative_differences, render_poa_table, render_relative_differences, verify_counterexample_i,
    verify_counterexample_ii,
};
use crate::rules::{chi, poa_of_rule, DistributionRule, RuleError, RuleLabel, DEFAULT_MAX_K};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_FAILED: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "covergame", version, about = "Utility design for distributed covering games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a distribution rule as exact fractions and decimals.
    Rules(RulesArgs),
    /// Optimal price of anarchy by cardinality, optionally with the risky-rule comparison.
    PoaTable(PoaTableArgs),
    /// Run best-response or learning dynamics on an instance.
    Dynamics(DynamicsArgs),
    /// Enumerate every joint allocation: optimum, equilibria, worst ratio.
    Oracle(OracleArgs),
    /// Verify one of the two built-in counterexamples.
    Counterexample(CounterexampleArgs),
    /// Run the data-caching experiment.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct RulesArgs {
    /// optimal:K, risky:P:KBAR or alg:L:N
    #[arg(long)]
    pub rule: String,
    /// Extend the rule constantly to this many entries.
    #[arg(long)]
    pub extend_to: Option<usize>,
    /// Also print chi and the price of anarchy at this cardinality.
    #[arg(long)]
    pub k: Option<usize>,
    /// Print only the serialised text form.
    #[arg(long)]
    pub text: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    pub max_k: usize,
}

#[derive(Debug, Args)]
pub struct PoaTableArgs {
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    /// True cardinality for the risky-rule comparison.
    #[arg(long, requires = "kbar")]
    pub k: Option<usize>,
    /// Upper cardinality guess for the risky-rule comparison.
    #[arg(long, requires = "k")]
    pub kbar: Option<usize>,
    /// Guesses to compare (default 2..KBAR-1).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    pub max_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Numeric {
    Exact,
    Float,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Instance JSON file, or builtin:counterexample-i / builtin:counterexample-ii
    #[arg(long)]
    pub instance: String,
    /// optimal:K, risky:P:KBAR, alg:L:N or learning
    #[arg(long, default_value = "learning")]
    pub rule: String,
    /// round-robin[:OFFSET], random:SEED or perm:I1,I2,... (1-based agents)
    #[arg(long, default_value = "round-robin")]
    pub schedule: String,
    /// first, random:SEED or file:PATH
    #[arg(long, default_value = "first")]
    pub init: String,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
    /// Also write the trace to this file.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Numeric::Exact)]
    pub numeric: Numeric,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    pub max_k: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Instance JSON file, or builtin:counterexample-i / builtin:counterexample-ii
    #[arg(long)]
    pub instance: String,
    /// optimal:K, risky:P:KBAR or alg:L:N (default: optimal at the instance cardinality)
    #[arg(long)]
    pub rule: Option<String>,
    /// Also run learning from every initial allocation under every round-robin offset.
    #[arg(long)]
    pub learning: bool,
    /// Write the report as JSON to this file.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    pub max_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    I,
    Ii,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[arg(long, value_enum)]
    pub case: Case,
    /// Resource values as decimals, e.g. 11,5,7,6 or 9,9.5,20
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "risky:2,optimal:5,optimal:3,learning")]
    pub rules: Vec<String>,
    #[arg(long)]
    pub require_k: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub kbar: usize,
    /// Per-row CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Histogram CSV output.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.002)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 150)]
    pub stations: usize,
    #[arg(long, default_value_t = 1500)]
    pub items: usize,
    #[arg(long, default_value_t = 50.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 10)]
    pub capacity: usize,
    #[arg(long, default_value_t = 0.6)]
    pub alpha: f64,
    #[arg(long, default_value_t = 800.0)]
    pub grid: f64,
    #[arg(long, default_value_t = 1000)]
    pub resample_cap: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }
}

impl From<RuleError> for CliError {
    fn from(e: RuleError) -> Self {
        Self::invalid(e.to_string())
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        Self::invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::invalid(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        let code = if matches!(e, DynamicsError::NotConverged) { EXIT_CAP } else { EXIT_INVALID };
        Self { code, message: e.to_string() }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::SizeCapExceeded { .. } | OracleError::CapacityTooLarge { .. } => {
                Self { code: EXIT_CAP, message: e.to_string() }
            }
            OracleError::Dynamics(d) => d.into(),
            other => Self::invalid(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::ResampleCapExceeded { .. } => Self { code: EXIT_CAP, message: e.to_string() },
            BenchError::Dynamics(d) => d.into(),
            other => Self::invalid(other.to_string()),
        }
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Rules(a) => cmd_rules(a, out),
        Command::PoaTable(a) => cmd_poa_table(a, out),
        Command::Dynamics(a) => cmd_dynamics(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Counterexample(a) => cmd_counterexample(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn show(v: &Rational) -> String {
    format!("{} ({})", format_fraction(v), format_significant(v, 12))
}

fn build_rule(text: &str, max_k: usize) -> Result<DistributionRule, CliError> {
    Ok(text.parse::<RuleLabel>()?.build(max_k)?)
}

fn cmd_rules(a: RulesArgs, out: &mut dyn Write) -> CliResult {
    let mut rule = build_rule(&a.rule, a.max_k)?;
    if let Some(len) = a.extend_to {
        if len < rule.len() {
            return Err(CliError::invalid(format!("--extend-to {len} is shorter than the rule ({})", rule.len())));
        }
        rule = rule.extended(len);
    }
    if a.text {
        emit(out, &rule.to_text())?;
    } else {
        emit(out, &rule.render_table())?;
    }
    if let Some(k) = a.k {
        if k == 0 {
            return Err(CliError::invalid("--k must be positive"));
        }
        let rule = rule.extended(k.max(rule.len()));
        emit(out, &format!("chi  {}\npoa  {}\n", show(&chi(&rule, k)?), show(&poa_of_rule(&rule, k)?)))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_poa_table(a: PoaTableArgs, out: &mut dyn Write) -> CliResult {
    if a.k_max == 0 || a.k_max > a.max_k {
        return Err(CliError::invalid(format!("--k-max must lie in [1, {}]", a.max_k)));
    }
    emit(out, &render_poa_table(&poa_table(a.k_max)?))?;
    if let (Some(k), Some(kbar)) = (a.k, a.kbar) {
        if kbar > a.max_k {
            return Err(CliError::invalid(format!("--kbar must be at most {}", a.max_k)));
        }
        let ps = if a.p.is_empty() { (2..kbar).collect() } else { a.p.clone() };
        emit(out, "\n")?;
        emit(out, &render_relative_differences(k, kbar, &relative_differences(k, kbar, &ps)?))?;
    }
    Ok(EXIT_OK)
}

pub fn load_instance(spec: &str) -> Result<CoveringProblem, CliError> {
    match spec {
        "builtin:counterexample-i" => Ok(builtin::counterexample_i_default()),
        "builtin:counterexample-ii" => Ok(builtin::counterexample_ii_default()),
        s if s.starts_with("builtin:") => Err(CliError::invalid(format!("unknown built-in instance `{s}`"))),
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::invalid(format!("cannot read {path}: {e}")))?;
            Ok(CoveringProblem::from_json(&text)?)
        }
    }
}

fn initial_allocation(problem: &CoveringProblem, spec: &str) -> Result<Allocation, CliError> {
    if spec == "first" {
        return Ok(default_initial(problem));
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed = seed.parse::<u64>().map_err(|_| CliError::invalid(format!("bad seed in `{spec}`")))?;
        return Ok(random_initial(problem, seed));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = fs::read_to_string(Path::new(path))
            .map_err(|e| CliError::invalid(format!("cannot read {path}: {e}")))?;
        return Ok(problem.allocation_from_json(&text)?);
    }
    Err(CliError::invalid(format!("unknown --init `{spec}` (first, random:SEED or file:PATH)")))
}

fn run_dynamics(a: &DynamicsArgs, problem: &CoveringProblem) -> Result<DynamicsTrace, CliError> {
    let schedule: Schedule = a.schedule.parse()?;
    let initial = initial_allocation(problem, &a.init)?;
    if a.max_rounds == 0 {
        return Err(CliError::invalid("--max-rounds must be positive"));
    }
    let opts = RunOptions { max_rounds: a.max_rounds, record_steps: true };
    let trace = if a.rule == "learning" {
        match a.numeric {
            Numeric::Exact => run_learning::<Rational>(problem, initial, &schedule, opts)?,
            Numeric::Float => run_learning::<f64>(problem, initial, &schedule, opts)?,
        }
    } else {
        let rule = build_rule(&a.rule, a.max_k)?;
        match a.numeric {
            Numeric::Exact => run_best_response::<Rational>(problem, &rule, initial, &schedule, opts)?,
            Numeric::Float => run_best_response::<f64>(problem, &rule, initial, &schedule, opts)?,
        }
    };
    Ok(trace)
}

fn cmd_dynamics(a: DynamicsArgs, out: &mut dyn Write) -> CliResult {
    let problem = load_instance(&a.instance)?;
    let trace = run_dynamics(&a, &problem)?;
    let text = trace.render(&problem);
    if let Some(path) = &a.trace_out {
        fs::write(path, &text)?;
    }
    emit(out, &text)?;
    Ok(if trace.converged { EXIT_OK } else { EXIT_CAP })
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> CliResult {
    let problem = load_instance(&a.instance)?;
    let k = cardinality(&problem);
    let rule = match &a.rule {
        Some(text) => build_rule(text, a.max_k)?,
        None => build_rule(&format!("optimal:{k}"), a.max_k)?,
    };
    let opts = OracleOptions {
        cap: a.cap,
        execution: if a.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let shares = UniformShares::<Rational>::new(&rule.extended(problem.n_agents().max(rule.len())));
    let report = all_nash_with(&problem, &shares, opts)?;
    emit(out, &format!("{:<20} {}\n{:<20} {}\n", "rule", rule.label(), "cardinality", k))?;
    emit(out, &report.render(&problem))?;
    if a.learning {
        let runs = learning_over_all_initials_with(&problem, &[], opts)?;
        let worst = runs.iter().map(|r| &r.welfare).min().expect("at least one run");
        let optimal = runs.iter().filter(|r| r.welfare == report.optimal_welfare).count();
        let k_m = runs.iter().map(|r| r.k_m).max().unwrap_or(0);
        emit(
            out,
            &format!(
                "{:<20} {}\n{:<20} {}\n{:<20} {}\n{:<20} {}\n",
                "learning runs",
                runs.len(),
                "learning optimal",
                optimal,
                "learning worst",
                show(worst),
                "learning max k_m",
                k_m
            ),
        )?;
    }
    if let Some(path) = &a.json_out {
        fs::write(path, report.to_json())?;
    }
    Ok(EXIT_OK)
}

fn cmd_counterexample(a: CounterexampleArgs, out: &mut dyn Write) -> CliResult {
    let values: Vec<Rational> =
        a.values.iter().map(|v| parse_decimal(v).map_err(|e| CliError::invalid(e.to_string()))).collect::<Result<_, _>>()?;
    let verdict = match a.case {
        Case::I => {
            let problem = if values.is_empty() {
                builtin::counterexample_i_default()
            } else {
                let v: [Rational; 4] = values
                    .try_into()
                    .map_err(|_| CliError::invalid("case i takes exactly four values"))?;
                builtin::counterexample_i(v).map_err(|e| CliError::invalid(e.to_string()))?
            };
            verify_counterexample_i(&problem)?
        }
        Case::Ii => {
            let problem = if values.is_empty() {
                builtin::counterexample_ii_default()
            } else {
                let v: [Rational; 3] = values
                    .try_into()
                    .map_err(|_| CliError::invalid("case ii takes exactly three values"))?;
                builtin::counterexample_ii(v).map_err(|e| CliError::invalid(e.to_string()))?
            };
            verify_counterexample_ii(&problem)?
        }
    };
    emit(out, &verdict.render())?;
    Ok(if verdict.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> CliResult {
    let config = BenchConfig {
        grid_side: a.grid,
        n_stations: a.stations,
        n_items: a.items,
        radius: a.radius,
        capacity: a.capacity,
        zipf_alpha: a.alpha,
        n_instances: a.instances,
        base_seed: a.seed,
        rules: a.rules,
        kbar: a.kbar,
        require_k: a.require_k,
        resample_cap: a.resample_cap,
        bin_width: a.bin_width,
        max_rounds: a.max_rounds,
        execution: if a.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    if config.n_instances == 0 {
        return Err(CliError::invalid("--instances must be positive"));
    }
    let experiment = run_experiment(&config)?;
    if let Some(path) = &a.out {
        write_rows_csv(&experiment.rows, fs::File::create(path)?)?;
    }
    if let Some(path) = &a.hist_out {
        experiment.summary.write_histogram_csv(fs::File::create(path)?)?;
    }
    emit(out, &experiment.summary.render_table())?;
    let capped = experiment.summary.rules.iter().any(|r| r.not_converged > 0);
    Ok(if capped { EXIT_CAP } else { EXIT_OK })
}
