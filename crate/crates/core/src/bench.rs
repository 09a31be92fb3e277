//! Distributed data-caching experiment: stations cache Zipf-popular items
//! within a radius, and each rule is scored by the welfare of the
//! equilibrium best-response dynamics reach.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

use crate::dynamics::{default_initial, run_best_response, run_learning, DynamicsError, RunOptions, Schedule};
use crate::game::{cardinality, ActionSet, CoveringProblem, Evaluator, GameError, Resource};
use crate::par::Execution;
use crate::rational::{format_f64, Rational};
use crate::rules::{optimal_rule, risky_rule, DistributionRule, RuleError};

/// Item draws allowed per item when a cardinality is required.
pub const ITEM_REDRAW_CAP: usize = 10_000;

pub const CSV_HEADER: [&str; 8] = ["instance", "rule", "welfare", "w_tot", "ratio", "rounds", "k", "k_m"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("instance {index}: cardinality {k} not reached within {attempts} attempts")]
    ResampleCapExceeded { index: usize, k: usize, attempts: usize },
    #[error("invalid bench rule `{0}` (expected risky:P[:KBAR], optimal:K or learning)")]
    BadRule(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no rows to summarize")]
    EmptyInput,
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One contender in the experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum BenchRule {
    Fixed { name: String, rule: DistributionRule },
    Learning,
}

impl BenchRule {
    pub fn name(&self) -> &str {
        match self {
            BenchRule::Fixed { name, .. } => name,
            BenchRule::Learning => "learning",
        }
    }

    /// Parses `risky:P`, `risky:P:KBAR`, `optimal:K` or `learning`; a bare
    /// `risky:P` takes `default_kbar`.
    pub fn parse(text: &str, default_kbar: usize) -> Result<Self, BenchError> {
        let text = text.trim();
        let bad = || BenchError::BadRule(text.to_string());
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["learning"] => Ok(BenchRule::Learning),
            ["optimal", k] => {
                let k = num(k)?;
                if k == 0 {
                    return Err(bad());
                }
                Ok(BenchRule::Fixed { name: text.to_string(), rule: optimal_rule(k, k)? })
            }
            ["risky", p] => Ok(BenchRule::Fixed { name: text.to_string(), rule: risky_rule(num(p)?, default_kbar)? }),
            ["risky", p, kbar] => Ok(BenchRule::Fixed { name: text.to_string(), rule: risky_rule(num(p)?, num(kbar)?)? }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub grid_side: f64,
    pub n_stations: usize,
    pub n_items: usize,
    pub radius: f64,
    pub capacity: usize,
    pub zipf_alpha: f64,
    pub n_instances: usize,
    pub base_seed: u64,
    pub rules: Vec<String>,
    /// Upper cardinality guess used by `risky:P` without an explicit one.
    pub kbar: usize,
    pub require_k: Option<usize>,
    pub resample_cap: usize,
    pub bin_width: f64,
    pub max_rounds: usize,
    pub execution: Execution,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            grid_side: 800.0,
            n_stations: 150,
            n_items: 1500,
            radius: 50.0,
            capacity: 10,
            zipf_alpha: 0.6,
            n_instances: 50_000,
            base_seed: 0,
            rules: ["risky:2", "optimal:5", "optimal:3", "learning"].map(String::from).to_vec(),
            kbar: 5,
            require_k: None,
            resample_cap: 1000,
            bin_width: 0.002,
            max_rounds: crate::dynamics::DEFAULT_MAX_ROUNDS,
            execution: Execution::default(),
        }
    }
}

impl BenchConfig {
    pub fn parsed_rules(&self) -> Result<Vec<BenchRule>, BenchError> {
        if self.rules.is_empty() {
            return Err(BenchError::Config("no rules given".into()));
        }
        self.rules.iter().map(|r| BenchRule::parse(r, self.kbar)).collect()
    }

    fn validate(&self) -> Result<(), BenchError> {
        let positive = [
            ("grid side", self.grid_side > 0.0),
            ("radius", self.radius >= 0.0),
            ("capacity", self.capacity > 0),
            ("bin width", self.bin_width > 0.0 && self.bin_width <= 1.0),
            ("max rounds", self.max_rounds > 0),
            ("require_k", self.require_k != Some(0)),
        ];
        match positive.iter().find(|(_, ok)| !ok) {
            Some((what, _)) => Err(BenchError::Config(format!("{what} out of range"))),
            None => Ok(()),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-instance seed: `splitmix64(splitmix64(base_seed) ^ index)`.
pub fn instance_seed(base_seed: u64, index: usize) -> u64 {
    splitmix64(splitmix64(base_seed) ^ index as u64)
}

/// Zipf query rate of the item with 1-based `rank`.
pub fn zipf_value(rank: usize, alpha: f64) -> f64 {
    (rank as f64).powf(-alpha)
}

/// Sum of all item values, accumulated in rank order.
pub fn total_value(n_items: usize, alpha: f64) -> f64 {
    (1..=n_items).map(|r| zipf_value(r, alpha)).sum()
}

type Point = (f64, f64);

fn draw_point(rng: &mut Xoshiro256StarStar, side: f64) -> Point {
    (rng.random_range(0.0..side), rng.random_range(0.0..side))
}

fn within(a: Point, b: Point, radius: f64) -> bool {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    dx * dx + dy * dy <= radius * radius
}

fn reach(stations: &[Point], item: Point, radius: f64) -> usize {
    stations.iter().filter(|&&s| within(s, item, radius)).count()
}

/// Stations and items placed on the grid, before conversion to a game.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub stations: Vec<Point>,
    pub items: Vec<Point>,
}

/// Draws positions for instance `index`. With `require_k`, an item reachable
/// by more than `k` stations is redrawn, and the whole layout is redrawn when
/// no item is reachable by exactly `k`.
pub fn generate_layout(config: &BenchConfig, index: usize) -> Result<Layout, BenchError> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(instance_seed(config.base_seed, index));
    let side = config.grid_side;
    let Some(k) = config.require_k else {
        let stations = (0..config.n_stations).map(|_| draw_point(&mut rng, side)).collect();
        let items = (0..config.n_items).map(|_| draw_point(&mut rng, side)).collect();
        return Ok(Layout { stations, items });
    };
    let capped = || BenchError::ResampleCapExceeded { index, k, attempts: config.resample_cap };
    for _ in 0..config.resample_cap {
        let stations: Vec<Point> = (0..config.n_stations).map(|_| draw_point(&mut rng, side)).collect();
        let mut items = Vec::with_capacity(config.n_items);
        let mut top = 0;
        for _ in 0..config.n_items {
            let mut placed = None;
            for _ in 0..ITEM_REDRAW_CAP {
                let p = draw_point(&mut rng, side);
                let c = reach(&stations, p, config.radius);
                if c <= k {
                    placed = Some((p, c));
                    break;
                }
            }
            let (p, c) = placed.ok_or_else(capped)?;
            top = top.max(c);
            items.push(p);
        }
        if top == k {
            return Ok(Layout { stations, items });
        }
    }
    Err(capped())
}

impl Layout {
    pub fn to_problem(&self, config: &BenchConfig) -> Result<CoveringProblem, BenchError> {
        let resources = (1..=self.items.len())
            .map(|rank| {
                let q = zipf_value(rank, config.zipf_alpha);
                let exact = Rational::from_float(q).expect("finite");
                Resource::new(format!("o{rank}"), exact)
            })
            .collect();
        let action_sets = self
            .stations
            .iter()
            .map(|&s| ActionSet::Capacity {
                accessible: (0..self.items.len()).filter(|&r| within(s, self.items[r], config.radius)).collect(),
                capacity: config.capacity,
            })
            .collect();
        let ids = (1..=self.stations.len()).map(|i| format!("s{i}")).collect();
        Ok(CoveringProblem::new(ids, resources, action_sets)?)
    }
}

/// The caching game for instance `index`; identical for identical `(base_seed, index)`.
pub fn generate_caching_instance(config: &BenchConfig, index: usize) -> Result<CoveringProblem, BenchError> {
    generate_layout(config, index)?.to_problem(config)
}

/// Outcome of one rule on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub instance: usize,
    pub rule: String,
    pub welfare: f64,
    pub w_tot: f64,
    pub ratio: f64,
    pub rounds: usize,
    pub k: usize,
    /// Largest learned counter; learning rows only.
    pub k_m: Option<usize>,
    pub converged: bool,
}

fn run_instance(
    config: &BenchConfig,
    rules: &[BenchRule],
    w_tot: f64,
    index: usize,
) -> Result<Vec<ExperimentRow>, BenchError> {
    let problem = generate_caching_instance(config, index)?;
    let k = cardinality(&problem);
    let eval = Evaluator::<f64>::new(&problem);
    let schedule = Schedule::RoundRobin { offset: 0 };
    let opts = RunOptions { max_rounds: config.max_rounds, record_steps: false };
    rules
        .iter()
        .map(|rule| {
            let initial = default_initial(&problem);
            let trace = match rule {
                BenchRule::Fixed { rule, .. } => run_best_response::<f64>(&problem, rule, initial, &schedule, opts)?,
                BenchRule::Learning => run_learning::<f64>(&problem, initial, &schedule, opts)?,
            };
            let welfare = eval.welfare(&trace.final_allocation.coverage(problem.n_resources()));
            Ok(ExperimentRow {
                instance: index,
                rule: rule.name().to_string(),
                welfare,
                w_tot,
                ratio: welfare / w_tot,
                rounds: trace.rounds,
                k,
                k_m: matches!(rule, BenchRule::Learning).then_some(trace.k_m),
                converged: trace.converged,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub rows: Vec<ExperimentRow>,
    pub summary: Summary,
}

/// Runs every configured rule on every instance in f64 mode, from the
/// default initial allocation under round-robin. Rows come back in
/// instance order, then rule order, whatever the execution mode.
pub fn run_experiment(config: &BenchConfig) -> Result<Experiment, BenchError> {
    config.validate()?;
    let rules = config.parsed_rules()?;
    let w_tot = total_value(config.n_items, config.zipf_alpha);
    let per_instance = config.execution.map_indexed(config.n_instances, |i| run_instance(config, &rules, w_tot, i));
    let mut rows = Vec::with_capacity(config.n_instances * rules.len());
    for batch in per_instance {
        rows.extend(batch?);
    }
    let summary = summarize(&rows, config.bin_width)?;
    Ok(Experiment { rows, summary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSummary {
    pub rule: String,
    pub instances: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub min_rounds: usize,
    pub max_rounds: usize,
    pub mean_rounds: f64,
    pub not_converged: usize,
    /// Occupied histogram bins as `(bin index, count)`; bin `b` covers `[b·w, (b+1)·w)`.
    pub histogram: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub bin_width: f64,
    /// One entry per rule, in first-appearance order.
    pub rules: Vec<RuleSummary>,
}

pub fn summarize(rows: &[ExperimentRow], bin_width: f64) -> Result<Summary, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(BenchError::Config("bin width out of range".into()));
    }
    let last_bin = (1.0 / bin_width).ceil() as usize - 1;
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&ExperimentRow>> = BTreeMap::new();
    for row in rows {
        let group = groups.entry(&row.rule).or_default();
        if group.is_empty() {
            order.push(&row.rule);
        }
        group.push(row);
    }
    let rules = order
        .into_iter()
        .map(|name| {
            let group = &groups[name];
            let count = group.len();
            let ratios = group.iter().map(|r| r.ratio);
            let rounds = group.iter().map(|r| r.rounds);
            let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
            for r in group {
                let bin = ((r.ratio.max(0.0) / bin_width).floor() as usize).min(last_bin);
                *histogram.entry(bin).or_default() += 1;
            }
            RuleSummary {
                rule: name.to_string(),
                instances: count,
                min_ratio: ratios.clone().fold(f64::INFINITY, f64::min),
                max_ratio: ratios.clone().fold(f64::NEG_INFINITY, f64::max),
                mean_ratio: ratios.sum::<f64>() / count as f64,
                min_rounds: rounds.clone().min().unwrap_or(0),
                max_rounds: rounds.clone().max().unwrap_or(0),
                mean_rounds: rounds.sum::<usize>() as f64 / count as f64,
                not_converged: group.iter().filter(|r| !r.converged).count(),
                histogram: histogram.into_iter().collect(),
            }
        })
        .collect();
    Ok(Summary { bin_width, rules })
}

impl Summary {
    pub fn get(&self, rule: &str) -> Option<&RuleSummary> {
        self.rules.iter().find(|r| r.rule == rule)
    }

    /// Min/max/mean ratio and best-response rounds per rule.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<14} {:>9} {:>14} {:>14} {:>14} {:>6} {:>6} {:>14} {:>8}\n",
            "rule", "instances", "min ratio", "max ratio", "mean ratio", "min br", "max br", "avg br", "capped"
        );
        for r in &self.rules {
            let _ = writeln!(
                out,
                "{:<14} {:>9} {:>14} {:>14} {:>14} {:>6} {:>6} {:>14} {:>8}",
                r.rule,
                r.instances,
                format_f64(r.min_ratio, 12),
                format_f64(r.max_ratio, 12),
                format_f64(r.mean_ratio, 12),
                r.min_rounds,
                r.max_rounds,
                format_f64(r.mean_rounds, 12),
                r.not_converged
            );
        }
        out
    }

    /// Histogram rows `rule,bin_start,bin_end,count`, occupied bins only.
    pub fn write_histogram_csv<W: Write>(&self, sink: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["rule", "bin_start", "bin_end", "count"])?;
        for r in &self.rules {
            for &(bin, count) in &r.histogram {
                w.write_record([
                    r.rule.clone(),
                    format_f64(bin as f64 * self.bin_width, 12),
                    format_f64(((bin + 1) as f64 * self.bin_width).min(1.0), 12),
                    count.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Rows as CSV with the fixed column set; floats at 12 significant digits.
pub fn write_rows_csv<W: Write>(rows: &[ExperimentRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.rule.clone(),
            format_f64(r.welfare, 12),
            format_f64(r.w_tot, 12),
            format_f64(r.ratio, 12),
            r.rounds.to_string(),
            r.k.to_string(),
            r.k_m.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

impl FromStr for BenchRule {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchRule::parse(s, BenchConfig::default().kbar)
    }
}
