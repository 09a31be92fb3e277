//! Best-response dynamics with a fixed rule, and asynchronous cardinality
//! learning where every resource runs `alg_rule(x_r, n)` and `x_r` tracks the
//! largest occupancy seen so far.
//!
//! A run stops once a full window of scheduled turns changes neither the
//! allocation nor any counter: `n` turns for round-robin, the permutation
//! length for a custom order, `20·n` turns for uniformly random turns.

use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

use crate::game::{
    cardinality, welfare, Action, ActionSet, Allocation, CoveringProblem, Evaluator, GameError,
    LearningShares, ResourceCounters, ShareRule, UniformShares,
};
use crate::rational::{format_fraction, format_significant, Rational, Scalar};
use crate::rules::{optimal_poa, DistributionRule, RuleError};

pub const DEFAULT_MAX_ROUNDS: usize = 10_000;

/// Quiet turns required per agent under the random schedule.
const RANDOM_QUIET_FACTOR: usize = 20;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("run did not converge")]
    NotConverged,
}

/// Order in which agents take turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// Agent `offset + t mod n` (0-based) moves at turn `t`.
    RoundRobin { offset: usize },
    /// Uniformly random agent each turn.
    RandomUniform { seed: u64 },
    /// The listed 0-based agents, repeated.
    Permutation(Vec<usize>),
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::RoundRobin { offset: 0 }
    }
}

impl FromStr for Schedule {
    type Err = DynamicsError;

    /// `round-robin[:offset]`, `random:SEED`, or `perm:i1,i2,...` with 1-based agents.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DynamicsError::Schedule(format!("cannot parse `{s}`"));
        let (kind, arg) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        match kind {
            "round-robin" if arg.is_empty() => Ok(Schedule::RoundRobin { offset: 0 }),
            "round-robin" => Ok(Schedule::RoundRobin { offset: arg.parse().map_err(|_| bad())? }),
            "random" => Ok(Schedule::RandomUniform { seed: arg.parse().map_err(|_| bad())? }),
            "perm" => {
                let order = arg
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().ok().and_then(|i| i.checked_sub(1)))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(bad)?;
                Ok(Schedule::Permutation(order))
            }
            _ => Err(bad()),
        }
    }
}

enum Turns {
    RoundRobin { next: usize, n: usize },
    Random { rng: Xoshiro256StarStar, n: usize },
    Order { order: Vec<usize>, pos: usize },
}

impl Turns {
    fn new(schedule: &Schedule, n: usize) -> Result<(Self, usize, usize), DynamicsError> {
        match schedule {
            Schedule::RoundRobin { offset } => {
                Ok((Turns::RoundRobin { next: offset % n.max(1), n }, n, n))
            }
            Schedule::RandomUniform { seed } => Ok((
                Turns::Random { rng: Xoshiro256StarStar::seed_from_u64(*seed), n },
                RANDOM_QUIET_FACTOR * n,
                n,
            )),
            Schedule::Permutation(order) => {
                if let Some(&bad) = order.iter().find(|&&i| i >= n) {
                    return Err(DynamicsError::Schedule(format!("agent {} out of range", bad + 1)));
                }
                if let Some(missing) = (0..n).find(|i| !order.contains(i)) {
                    return Err(DynamicsError::Schedule(format!(
                        "agent {} never gets a turn",
                        missing + 1
                    )));
                }
                let len = order.len();
                Ok((Turns::Order { order: order.clone(), pos: 0 }, len, len))
            }
        }
    }

    fn next(&mut self) -> usize {
        match self {
            Turns::RoundRobin { next, n } => {
                let agent = *next;
                *next = (*next + 1) % *n;
                agent
            }
            Turns::Random { rng, n } => rng.random_range(0..*n),
            Turns::Order { order, pos } => {
                let agent = order[*pos];
                *pos = (*pos + 1) % order.len();
                agent
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Cap on full passes before giving up.
    pub max_rounds: usize,
    /// Keep a per-turn record; off for large batch runs.
    pub record_steps: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_rounds: DEFAULT_MAX_ROUNDS, record_steps: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub t: usize,
    pub agent: usize,
    pub before: Action,
    pub after: Action,
    /// Counters after this turn's update.
    pub counters: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    ConvergenceCapExceeded,
}

#[derive(Debug, Clone)]
pub struct DynamicsTrace {
    pub steps: Vec<Step>,
    pub final_allocation: Allocation,
    pub final_counters: ResourceCounters,
    pub converged: bool,
    pub status: RunStatus,
    /// Passes started, including the final quiet one.
    pub rounds: usize,
    pub turns: usize,
    /// Turns that changed the mover's action.
    pub changes: usize,
    pub k_m: usize,
}

impl DynamicsTrace {
    pub fn render(&self, problem: &CoveringProblem) -> String {
        let mut out = String::from("t agent before after counters\n");
        for s in &self.steps {
            let counters: Vec<String> = s.counters.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                out,
                "{} {} {} {} [{}]",
                s.t,
                problem.agent_ids()[s.agent],
                problem.format_action(&s.before),
                problem.format_action(&s.after),
                counters.join(",")
            );
        }
        let w = welfare(problem, &self.final_allocation).unwrap_or_else(|_| Rational::zero());
        let _ = writeln!(out, "summary");
        let _ = writeln!(out, "allocation {}", problem.format_allocation(&self.final_allocation));
        let _ = writeln!(out, "welfare {} ({})", format_fraction(&w), format_significant(&w, 12));
        let _ = writeln!(out, "rounds {}", self.rounds);
        let _ = writeln!(out, "turns {}", self.turns);
        let _ = writeln!(out, "changes {}", self.changes);
        let _ = writeln!(out, "counters {}", self.final_counters);
        let _ = writeln!(out, "k_m {}", self.k_m);
        let _ = writeln!(out, "converged {}", self.converged);
        out
    }
}

/// Share rule whose parameters may move after each turn.
trait Adaptive<S>: ShareRule<S> {
    /// Called with the coverage after every turn; true if the rule changed.
    fn observe(&mut self, coverage: &[usize]) -> bool;
    fn snapshot(&self, coverage: &[usize]) -> Vec<usize>;
}

impl<S: Scalar> Adaptive<S> for UniformShares<S> {
    fn observe(&mut self, _coverage: &[usize]) -> bool {
        false
    }

    fn snapshot(&self, coverage: &[usize]) -> Vec<usize> {
        coverage.to_vec()
    }
}

impl<S: Scalar> Adaptive<S> for LearningShares<S> {
    fn observe(&mut self, coverage: &[usize]) -> bool {
        self.raise(coverage)
    }

    fn snapshot(&self, _coverage: &[usize]) -> Vec<usize> {
        self.counters().0.clone()
    }
}

fn run<S: Scalar, R: Adaptive<S>>(
    problem: &CoveringProblem,
    shares: &mut R,
    initial: Allocation,
    schedule: &Schedule,
    opts: RunOptions,
) -> Result<DynamicsTrace, DynamicsError> {
    problem.check_allocation(&initial)?;
    let n = problem.n_agents();
    let (mut turns, window, pass_len) = Turns::new(schedule, n)?;
    let eval = Evaluator::<S>::new(problem);
    let mut allocation = initial;
    let mut coverage = allocation.coverage(problem.n_resources());
    let mut steps = Vec::new();
    let (mut t, mut quiet, mut changes) = (0usize, 0usize, 0usize);
    let budget = opts.max_rounds.saturating_mul(pass_len);
    let converged = loop {
        if quiet >= window {
            break true;
        }
        if t >= budget {
            break false;
        }
        let agent = turns.next();
        let after = eval.best_response(shares, agent, &allocation, &coverage);
        let moved = &after != allocation.choice(agent);
        let before = if moved || opts.record_steps { allocation.choice(agent).clone() } else { Vec::new() };
        if moved {
            for &r in &before {
                coverage[r] -= 1;
            }
            for &r in &after {
                coverage[r] += 1;
            }
            allocation.set(agent, after.clone());
            changes += 1;
        }
        let retuned = shares.observe(&coverage);
        if opts.record_steps {
            steps.push(Step { t, agent, before, after, counters: shares.snapshot(&coverage) });
        }
        quiet = if moved || retuned { 0 } else { quiet + 1 };
        t += 1;
    };
    let final_counters = ResourceCounters(shares.snapshot(&coverage));
    let k_m = final_counters.max();
    Ok(DynamicsTrace {
        steps,
        final_allocation: allocation,
        final_counters,
        converged,
        status: if converged { RunStatus::Converged } else { RunStatus::ConvergenceCapExceeded },
        rounds: if pass_len == 0 { 0 } else { t.div_ceil(pass_len) },
        turns: t,
        changes,
        k_m,
    })
}

/// Round of single-agent best responses under one fixed rule (held constant
/// past its domain) until nobody wants to move.
pub fn run_best_response<S: Scalar>(
    problem: &CoveringProblem,
    rule: &DistributionRule,
    initial: Allocation,
    schedule: &Schedule,
    opts: RunOptions,
) -> Result<DynamicsTrace, DynamicsError> {
    let mut shares = UniformShares::<S>::new(&rule.extended(problem.n_agents().max(1)));
    run(problem, &mut shares, initial, schedule, opts)
}

/// Asynchronous cardinality learning, counters starting at the coverage of `initial`.
pub fn run_learning<S: Scalar>(
    problem: &CoveringProblem,
    initial: Allocation,
    schedule: &Schedule,
    opts: RunOptions,
) -> Result<DynamicsTrace, DynamicsError> {
    problem.check_allocation(&initial)?;
    let counters = ResourceCounters::from_coverage(&initial.coverage(problem.n_resources()));
    let mut shares = LearningShares::<S>::new(counters);
    run(problem, &mut shares, initial, schedule, opts)
}

/// Each agent's first declared action, or its best `capacity` resources by raw
/// value (positive values only, smaller index first on ties).
pub fn default_initial(problem: &CoveringProblem) -> Allocation {
    let choices = problem
        .action_sets()
        .iter()
        .map(|set| match set {
            ActionSet::Explicit(actions) => actions[0].clone(),
            ActionSet::Capacity { accessible, capacity } => {
                let values = problem.resources();
                let mut picks: Vec<usize> =
                    accessible.iter().copied().filter(|&r| !values[r].value.is_zero()).collect();
                picks.sort_by(|&a, &b| values[b].value.cmp(&values[a].value).then(a.cmp(&b)));
                picks.truncate(*capacity);
                picks
            }
        })
        .collect();
    Allocation::new(choices)
}

/// Uniform explicit action, or a random subset of random size for capacity agents.
pub fn random_initial(problem: &CoveringProblem, seed: u64) -> Allocation {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let choices = problem
        .action_sets()
        .iter()
        .map(|set| match set {
            ActionSet::Explicit(actions) => actions[rng.random_range(0..actions.len())].clone(),
            ActionSet::Capacity { accessible, capacity } => {
                let size = rng.random_range(0..=(*capacity).min(accessible.len()));
                let mut pool = accessible.clone();
                pool.shuffle(&mut rng);
                pool.truncate(size);
                pool
            }
        })
        .collect();
    Allocation::new(choices)
}

/// Welfare ratio of a converged learning run against the two guarantees it
/// must clear: optimal PoA at the learned `k_m` and at the true cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeCheck {
    pub ratio: Rational,
    pub k_m: usize,
    pub bound_k_m: Rational,
    pub k: usize,
    pub bound_k: Rational,
    pub holds: bool,
}

pub fn check_learning_guarantee(
    problem: &CoveringProblem,
    trace: &DynamicsTrace,
    optimal_welfare: &Rational,
) -> Result<GuaranteeCheck, DynamicsError> {
    if !trace.converged {
        return Err(DynamicsError::NotConverged);
    }
    let achieved = welfare(problem, &trace.final_allocation)?;
    let ratio = if optimal_welfare.is_zero() { Rational::from_integer(1.into()) } else { achieved / optimal_welfare };
    let k_m = trace.k_m.max(1);
    let k = cardinality(problem);
    let bound_k_m = optimal_poa(k_m)?;
    let bound_k = optimal_poa(k)?;
    let holds = ratio >= bound_k_m && bound_k_m >= bound_k;
    Ok(GuaranteeCheck { ratio, k_m, bound_k_m, k, bound_k, holds })
}
