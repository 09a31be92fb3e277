//! Exhaustive ground truth for small instances: every joint allocation, the
//! exact optimum, every pure Nash equilibrium, and learning runs from every
//! starting point.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{run_learning, DynamicsError, RunOptions, Schedule};
use crate::game::{Action, ActionSet, Allocation, CoveringProblem, Evaluator, GameError, ShareRule};
use crate::par::Execution;
use crate::rational::{format_fraction, format_significant, Rational};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Capacity-form action sets are only expanded up to this many accessible resources.
pub const CAPACITY_EXPANSION_LIMIT: usize = 12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{count} joint allocations exceed the enumeration cap of {cap}")]
    SizeCapExceeded { count: String, cap: u64 },
    #[error("agent {agent} has {size} accessible resources; capacity sets are expanded only up to {limit}")]
    CapacityTooLarge { agent: usize, size: usize, limit: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Rule(#[from] crate::rules::RuleError),
}

/// All subsets of `pool` with at most `max` elements, by size then lexicographically.
fn bounded_subsets(pool: &[usize], max: usize) -> Vec<Action> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(Action, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..max.min(pool.len()) {
        let mut next = Vec::new();
        for (set, from) in &frontier {
            for (i, &r) in pool.iter().enumerate().skip(*from) {
                let mut grown = set.clone();
                grown.push(r);
                out.push(grown.clone());
                next.push((grown, i + 1));
            }
        }
        frontier = next;
    }
    out
}

/// Every agent's feasible actions, in declaration order.
pub fn agent_actions(problem: &CoveringProblem) -> Result<Vec<Vec<Action>>, OracleError> {
    problem
        .action_sets()
        .iter()
        .enumerate()
        .map(|(agent, set)| match set {
            ActionSet::Explicit(actions) => Ok(actions.clone()),
            ActionSet::Capacity { accessible, capacity } => {
                if accessible.len() > CAPACITY_EXPANSION_LIMIT {
                    return Err(OracleError::CapacityTooLarge {
                        agent,
                        size: accessible.len(),
                        limit: CAPACITY_EXPANSION_LIMIT,
                    });
                }
                Ok(bounded_subsets(accessible, *capacity))
            }
        })
        .collect()
}

/// The product of per-agent action lists, addressable by mixed-radix index
/// with agent 0 most significant.
#[derive(Debug, Clone)]
pub struct JointAllocations {
    actions: Vec<Vec<Action>>,
    total: u64,
}

impl JointAllocations {
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn actions(&self) -> &[Vec<Action>] {
        &self.actions
    }

    pub fn get(&self, mut index: u64) -> Allocation {
        let mut choices = vec![Vec::new(); self.actions.len()];
        for (agent, acts) in self.actions.iter().enumerate().rev() {
            let radix = acts.len() as u64;
            choices[agent] = acts[(index % radix) as usize].clone();
            index /= radix;
        }
        Allocation::new(choices)
    }

    pub fn iter(&self) -> impl Iterator<Item = Allocation> + '_ {
        (0..self.total).map(move |i| self.get(i))
    }
}

pub fn enumerate_with_cap(problem: &CoveringProblem, cap: u64) -> Result<JointAllocations, OracleError> {
    let actions = agent_actions(problem)?;
    let mut total: u128 = 1;
    for acts in &actions {
        total *= acts.len() as u128;
        if total > cap as u128 {
            let full: u128 = actions.iter().map(|a| a.len() as u128).product();
            return Err(OracleError::SizeCapExceeded { count: full.to_string(), cap });
        }
    }
    Ok(JointAllocations { actions, total: total as u64 })
}

/// Every feasible joint allocation exactly once, lexicographic in declared order.
pub fn enumerate_joint_allocations(problem: &CoveringProblem) -> Result<JointAllocations, OracleError> {
    enumerate_with_cap(problem, DEFAULT_ENUMERATION_CAP)
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub cap: u64,
    pub execution: Execution,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_ENUMERATION_CAP, execution: Execution::default() }
    }
}

/// Max welfare and the earliest allocation attaining it.
pub fn optimal_allocation(problem: &CoveringProblem) -> Result<(Rational, Allocation), OracleError> {
    optimal_allocation_with(problem, OracleOptions::default())
}

pub fn optimal_allocation_with(
    problem: &CoveringProblem,
    opts: OracleOptions,
) -> Result<(Rational, Allocation), OracleError> {
    let report = scan(problem, None::<&NoShares>, opts)?;
    let first = report.optimal_allocations.into_iter().next().expect("at least one allocation");
    Ok((report.optimal_welfare, first))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashEntry {
    #[serde(serialize_with = "ser_allocation")]
    pub allocation: Allocation,
    #[serde(serialize_with = "ser_rational")]
    pub welfare: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    #[serde(serialize_with = "ser_rational")]
    pub optimal_welfare: Rational,
    #[serde(serialize_with = "ser_allocations")]
    pub optimal_allocations: Vec<Allocation>,
    pub nash_allocations: Vec<NashEntry>,
    #[serde(serialize_with = "ser_rational")]
    pub worst_nash_welfare: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub worst_ratio: Rational,
    pub joint_allocations: u64,
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_fraction(v))
}

fn ser_allocation<S: serde::Serializer>(a: &Allocation, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(a.choices(), s)
}

fn ser_allocations<S: serde::Serializer>(a: &[Allocation], s: S) -> Result<S::Ok, S::Error> {
    let raw: Vec<&[Action]> = a.iter().map(|x| x.choices()).collect();
    serde::Serialize::serialize(&raw, s)
}

impl OracleReport {
    pub fn render(&self, problem: &CoveringProblem) -> String {
        let mut out = String::new();
        let line = |label: &str, v: &Rational| {
            format!("{label:<20} {:>16} {}\n", format_fraction(v), format_significant(v, 12))
        };
        out.push_str(&format!("{:<20} {}\n", "joint allocations", self.joint_allocations));
        out.push_str(&line("optimal welfare", &self.optimal_welfare));
        for a in &self.optimal_allocations {
            out.push_str(&format!("  optimum {}\n", problem.format_allocation(a)));
        }
        out.push_str(&format!("{:<20} {}\n", "nash equilibria", self.nash_allocations.len()));
        for e in &self.nash_allocations {
            out.push_str(&format!(
                "  nash {} welfare {} ({})\n",
                problem.format_allocation(&e.allocation),
                format_fraction(&e.welfare),
                format_significant(&e.welfare, 12)
            ));
        }
        out.push_str(&line("worst nash welfare", &self.worst_nash_welfare));
        out.push_str(&line("worst ratio", &self.worst_ratio));
        out
    }

    /// Structured form for downstream tooling; allocations are resource-index lists.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }
}

struct NoShares;

impl ShareRule<Rational> for NoShares {
    fn share(&self, _resource: usize, _count: usize) -> Rational {
        Rational::one()
    }
}

fn scan<R: ShareRule<Rational> + Sync>(
    problem: &CoveringProblem,
    shares: Option<&R>,
    opts: OracleOptions,
) -> Result<OracleReport, OracleError> {
    let joint = enumerate_with_cap(problem, opts.cap)?;
    let eval = Evaluator::<Rational>::new(problem);
    let m = problem.n_resources();
    let rows = opts.execution.filter_map_u64(joint.len(), |i| {
        let a = joint.get(i);
        let coverage = a.coverage(m);
        let w = eval.welfare(&coverage);
        let nash = shares.map(|s| eval.is_nash(s, &a, &coverage)).unwrap_or(false);
        Some((a, w, nash))
    });
    let optimal_welfare =
        rows.iter().map(|(_, w, _)| w).max().cloned().unwrap_or_else(Rational::zero);
    let optimal_allocations: Vec<Allocation> =
        rows.iter().filter(|(_, w, _)| *w == optimal_welfare).map(|(a, _, _)| a.clone()).collect();
    let nash_allocations: Vec<NashEntry> = rows
        .into_iter()
        .filter(|(_, _, nash)| *nash)
        .map(|(allocation, welfare, _)| NashEntry { allocation, welfare })
        .collect();
    let worst_nash_welfare =
        nash_allocations.iter().map(|e| &e.welfare).min().cloned().unwrap_or_else(|| optimal_welfare.clone());
    let worst_ratio = if optimal_welfare.is_zero() {
        Rational::one()
    } else {
        &worst_nash_welfare / &optimal_welfare
    };
    Ok(OracleReport {
        optimal_welfare,
        optimal_allocations,
        nash_allocations,
        worst_nash_welfare,
        worst_ratio,
        joint_allocations: joint.len(),
    })
}

/// Optimum plus every pure Nash equilibrium under the given per-resource rules.
pub fn all_nash<R: ShareRule<Rational> + Sync>(
    problem: &CoveringProblem,
    shares: &R,
) -> Result<OracleReport, OracleError> {
    all_nash_with(problem, shares, OracleOptions::default())
}

pub fn all_nash_with<R: ShareRule<Rational> + Sync>(
    problem: &CoveringProblem,
    shares: &R,
    opts: OracleOptions,
) -> Result<OracleReport, OracleError> {
    scan(problem, Some(shares), opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningOutcome {
    pub initial: Allocation,
    pub schedule: Schedule,
    pub final_allocation: Allocation,
    pub welfare: Rational,
    pub k_m: usize,
    pub converged: bool,
}

/// Round-robin from every starting agent.
pub fn round_robin_family(n_agents: usize) -> Vec<Schedule> {
    (0..n_agents.max(1)).map(|offset| Schedule::RoundRobin { offset }).collect()
}

/// Learning dynamics from every feasible initial allocation under every
/// schedule in `schedules` (all round-robin offsets when empty).
pub fn learning_over_all_initials(
    problem: &CoveringProblem,
    schedules: &[Schedule],
) -> Result<Vec<LearningOutcome>, OracleError> {
    learning_over_all_initials_with(problem, schedules, OracleOptions::default())
}

pub fn learning_over_all_initials_with(
    problem: &CoveringProblem,
    schedules: &[Schedule],
    opts: OracleOptions,
) -> Result<Vec<LearningOutcome>, OracleError> {
    let family = if schedules.is_empty() { round_robin_family(problem.n_agents()) } else { schedules.to_vec() };
    if family.iter().any(|s| matches!(s, Schedule::RandomUniform { .. })) {
        return Err(DynamicsError::Schedule("only deterministic schedules are swept".into()).into());
    }
    let joint = enumerate_with_cap(problem, opts.cap)?;
    let runs = joint.len() as usize * family.len();
    let eval = Evaluator::<Rational>::new(problem);
    let results = opts.execution.map_indexed(runs, |i| {
        let initial = joint.get((i / family.len()) as u64);
        let schedule = family[i % family.len()].clone();
        let opts = RunOptions { record_steps: false, ..RunOptions::default() };
        let trace = run_learning::<Rational>(problem, initial.clone(), &schedule, opts)?;
        let welfare = eval.welfare(&trace.final_allocation.coverage(problem.n_resources()));
        Ok(LearningOutcome {
            initial,
            schedule,
            final_allocation: trace.final_allocation,
            welfare,
            k_m: trace.k_m,
            converged: trace.converged,
        })
    });
    results.into_iter().collect::<Result<Vec<_>, DynamicsError>>().map_err(Into::into)
}

/// Size limits for [`random_small_instance`].
#[derive(Debug, Clone, Copy)]
pub struct InstanceBounds {
    pub max_agents: usize,
    pub max_resources: usize,
    pub max_actions: usize,
    pub max_value: i64,
}

impl Default for InstanceBounds {
    fn default() -> Self {
        Self { max_agents: 5, max_resources: 6, max_actions: 4, max_value: 20 }
    }
}

/// Seeded explicit instance with integer values in `[0, max_value]` and
/// non-empty actions of at most three resources.
pub fn random_small_instance(seed: u64, bounds: &InstanceBounds) -> CoveringProblem {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let n = rng.random_range(1..=bounds.max_agents);
    let m = rng.random_range(1..=bounds.max_resources);
    let values = (0..m)
        .map(|_| Rational::from_integer(rng.random_range(0..=bounds.max_value).into()))
        .collect();
    let actions = (0..n)
        .map(|_| {
            let want = rng.random_range(1..=bounds.max_actions);
            let mut acts: Vec<Action> = Vec::new();
            for _ in 0..want {
                let size = rng.random_range(1..=m.min(3));
                let mut act: Action = rand::seq::index::sample(&mut rng, m, size).into_vec();
                act.sort_unstable();
                if !acts.contains(&act) {
                    acts.push(act);
                }
            }
            acts
        })
        .collect();
    CoveringProblem::explicit(values, actions).expect("generated instance is valid")
}

/// The two small instances separating learning from the optimal fixed rule.
pub mod builtin {
    use super::*;
    use crate::rational::int;
    use crate::rules::optimal_rule;

    #[derive(Debug, Error, PartialEq, Eq)]
    #[error("values violate the instance's defining inequalities: {0}")]
    pub struct ValueConditionError(pub String);

    fn share(k: usize, j: usize) -> Rational {
        optimal_rule(k, k).expect("k >= 1").get(j).expect("j <= k").clone()
    }

    /// Three agents with `{r1,r2,r3}`, `{r2,r3,r4}`, `{r1,r2,r3,r4}` (one
    /// resource each). Requires `v1 > v3 > v4 > v2` and
    /// `v1·f*_3(2) < v2 < v1·f*_2(2) < v4`.
    pub fn counterexample_i(v: [Rational; 4]) -> Result<CoveringProblem, ValueConditionError> {
        let [v1, v2, v3, v4] = &v;
        let mut failed = Vec::new();
        if !(v1 > v3 && v3 > v4 && v4 > v2) {
            failed.push("v1 > v3 > v4 > v2");
        }
        let low = v1 * share(3, 2);
        let high = v1 * share(2, 2);
        if !(low < *v2 && *v2 < high && high < *v4) {
            failed.push("v1 f*_3(2) < v2 < v1 f*_2(2) < v4");
        }
        if !failed.is_empty() {
            return Err(ValueConditionError(failed.join("; ")));
        }
        let singles = |ix: &[usize]| ix.iter().map(|&r| vec![r]).collect::<Vec<_>>();
        Ok(CoveringProblem::explicit(
            v.to_vec(),
            vec![singles(&[0, 1, 2]), singles(&[1, 2, 3]), singles(&[0, 1, 2, 3])],
        )
        .expect("valid"))
    }

    pub fn counterexample_i_default() -> CoveringProblem {
        counterexample_i([int(11), int(5), int(7), int(6)]).expect("default values satisfy the conditions")
    }

    /// Three agents with `{r1,r2}`, `{r2,r3}`, `{r1,r2,r3}` (one resource
    /// each). Requires `v3·f*_3(2) < v1 < v2 < v3/2`.
    pub fn counterexample_ii(v: [Rational; 3]) -> Result<CoveringProblem, ValueConditionError> {
        let [v1, v2, v3] = &v;
        let half = v3 / int(2);
        if !(v3 * share(3, 2) < *v1 && v1 < v2 && *v2 < half && half < *v3) {
            return Err(ValueConditionError("v3 f*_3(2) < v1 < v2 < v3/2 < v3".into()));
        }
        let singles = |ix: &[usize]| ix.iter().map(|&r| vec![r]).collect::<Vec<_>>();
        Ok(CoveringProblem::explicit(v.to_vec(), vec![singles(&[0, 1]), singles(&[1, 2]), singles(&[0, 1, 2])])
            .expect("valid"))
    }

    pub fn counterexample_ii_default() -> CoveringProblem {
        counterexample_ii([int(9), crate::rational::ratio(19, 2), int(20)])
            .expect("default values satisfy the conditions")
    }
}
