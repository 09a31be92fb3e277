//! Covering problems, allocations, welfare, utilities, best responses and the
//! Nash check.
//!
//! Agents and resources are addressed by 0-based index internally; the ids in
//! the instance file are only used for I/O. An action is a sorted, duplicate
//! free list of resource indices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_significant, parse_decimal, to_f64, Rational, Scalar};
use crate::rules::{optimal_rule, DistributionRule, RuleError};

#[derive(Debug, Error)]
pub enum GameError {
    #[error("unknown resource `{0}`")]
    UnknownResource(String),
    #[error("resource index {0} out of range")]
    ResourceIndex(usize),
    #[error("agent index {0} out of range")]
    AgentIndex(usize),
    #[error("duplicate resource id `{0}`")]
    DuplicateResource(String),
    #[error("resource `{id}` has negative value")]
    NegativeValue { id: String },
    #[error("agent {agent} has an empty explicit action list")]
    NoActions { agent: usize },
    #[error("agent {agent} has capacity 0")]
    ZeroCapacity { agent: usize },
    #[error("allocation has {got} choices for {expected} agents")]
    AllocationLength { expected: usize, got: usize },
    #[error("agent {agent}'s choice is not in its action set")]
    Infeasible { agent: usize },
    #[error("missing counter for resource `{0}`")]
    MissingCounter(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A sorted set of resource indices.
pub type Action = Vec<usize>;

fn normalize(mut action: Action) -> Action {
    action.sort_unstable();
    action.dedup();
    action
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resource {
    pub id: String,
    pub value: Rational,
    approx: f64,
}

impl Resource {
    pub fn new(id: impl Into<String>, value: Rational) -> Self {
        let approx = to_f64(&value);
        Self { id: id.into(), value, approx }
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionSet {
    /// Declared list of actions, scanned in order.
    Explicit(Vec<Action>),
    /// Any subset of `accessible` with at most `capacity` elements.
    Capacity { accessible: Vec<usize>, capacity: usize },
}

impl ActionSet {
    pub fn contains(&self, action: &[usize]) -> bool {
        match self {
            ActionSet::Explicit(actions) => actions.iter().any(|a| a == action),
            ActionSet::Capacity { accessible, capacity } => {
                action.len() <= *capacity && action.iter().all(|r| accessible.binary_search(r).is_ok())
            }
        }
    }

    /// Whether some action of this set contains `resource`.
    pub fn can_reach(&self, resource: usize) -> bool {
        match self {
            ActionSet::Explicit(actions) => actions.iter().any(|a| a.binary_search(&resource).is_ok()),
            ActionSet::Capacity { accessible, capacity } => {
                *capacity >= 1 && accessible.binary_search(&resource).is_ok()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringProblem {
    agent_ids: Vec<String>,
    resources: Vec<Resource>,
    action_sets: Vec<ActionSet>,
    index: HashMap<String, usize>,
}

impl CoveringProblem {
    pub fn new(
        agent_ids: Vec<String>,
        resources: Vec<Resource>,
        action_sets: Vec<ActionSet>,
    ) -> Result<Self, GameError> {
        if agent_ids.len() != action_sets.len() {
            return Err(GameError::Invalid(format!(
                "{} agent ids but {} action sets",
                agent_ids.len(),
                action_sets.len()
            )));
        }
        let mut index = HashMap::with_capacity(resources.len());
        for (i, r) in resources.iter().enumerate() {
            if r.value.is_negative() {
                return Err(GameError::NegativeValue { id: r.id.clone() });
            }
            if index.insert(r.id.clone(), i).is_some() {
                return Err(GameError::DuplicateResource(r.id.clone()));
            }
        }
        let m = resources.len();
        let action_sets = action_sets
            .into_iter()
            .enumerate()
            .map(|(agent, set)| match set {
                ActionSet::Explicit(actions) => {
                    if actions.is_empty() {
                        return Err(GameError::NoActions { agent });
                    }
                    let actions: Vec<Action> = actions.into_iter().map(normalize).collect();
                    if let Some(&r) = actions.iter().flatten().find(|&&r| r >= m) {
                        return Err(GameError::ResourceIndex(r));
                    }
                    Ok(ActionSet::Explicit(actions))
                }
                ActionSet::Capacity { accessible, capacity } => {
                    if capacity == 0 {
                        return Err(GameError::ZeroCapacity { agent });
                    }
                    let accessible = normalize(accessible);
                    if let Some(&r) = accessible.iter().find(|&&r| r >= m) {
                        return Err(GameError::ResourceIndex(r));
                    }
                    Ok(ActionSet::Capacity { accessible, capacity })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { agent_ids, resources, action_sets, index })
    }

    /// Explicit instance with ids `p1..pn` / `r1..rm`.
    pub fn explicit(values: Vec<Rational>, actions: Vec<Vec<Action>>) -> Result<Self, GameError> {
        let resources =
            values.into_iter().enumerate().map(|(i, v)| Resource::new(format!("r{}", i + 1), v)).collect();
        let agent_ids = (1..=actions.len()).map(|i| format!("p{i}")).collect();
        Self::new(agent_ids, resources, actions.into_iter().map(ActionSet::Explicit).collect())
    }

    pub fn n_agents(&self) -> usize {
        self.action_sets.len()
    }

    pub fn n_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn agent_ids(&self) -> &[String] {
        &self.agent_ids
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn action_sets(&self) -> &[ActionSet] {
        &self.action_sets
    }

    pub fn action_set(&self, agent: usize) -> &ActionSet {
        &self.action_sets[agent]
    }

    pub fn resource_index(&self, id: &str) -> Result<usize, GameError> {
        self.index.get(id).copied().ok_or_else(|| GameError::UnknownResource(id.to_string()))
    }

    /// `Σ_r v_r`.
    pub fn total_value(&self) -> Rational {
        self.resources.iter().fold(Rational::zero(), |acc, r| acc + &r.value)
    }

    pub fn values<S: Scalar>(&self) -> Vec<S> {
        self.resources.iter().map(|r| S::from_parts(&r.value, r.approx)).collect()
    }

    pub fn check_allocation(&self, allocation: &Allocation) -> Result<(), GameError> {
        if allocation.len() != self.n_agents() {
            return Err(GameError::AllocationLength { expected: self.n_agents(), got: allocation.len() });
        }
        for (agent, (set, choice)) in self.action_sets.iter().zip(allocation.choices()).enumerate() {
            if !set.contains(choice) {
                return Err(GameError::Infeasible { agent });
            }
        }
        Ok(())
    }

    pub fn format_action(&self, action: &[usize]) -> String {
        let ids: Vec<&str> = action.iter().map(|&r| self.resources[r].id.as_str()).collect();
        format!("[{}]", ids.join(","))
    }

    pub fn format_allocation(&self, allocation: &Allocation) -> String {
        let parts: Vec<String> = allocation.choices().iter().map(|a| self.format_action(a)).collect();
        format!("({})", parts.join(", "))
    }
}

/// One chosen action per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation(Vec<Action>);

impl Allocation {
    pub fn new(choices: Vec<Action>) -> Self {
        Self(choices.into_iter().map(normalize).collect())
    }

    pub fn choices(&self) -> &[Action] {
        &self.0
    }

    pub fn choice(&self, agent: usize) -> &Action {
        &self.0[agent]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn set(&mut self, agent: usize, action: Action) {
        self.0[agent] = action;
    }

    /// `|a|_r` for every resource.
    pub fn coverage(&self, n_resources: usize) -> Vec<usize> {
        let mut counts = vec![0; n_resources];
        for &r in self.0.iter().flatten() {
            counts[r] += 1;
        }
        counts
    }

    /// Every agent picks the same single resource.
    pub fn all_on(n_agents: usize, resource: usize) -> Self {
        Self(vec![vec![resource]; n_agents])
    }
}

/// Running maxima `x_r` of resource occupancy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceCounters(pub Vec<usize>);

impl ResourceCounters {
    pub fn from_coverage(coverage: &[usize]) -> Self {
        Self(coverage.to_vec())
    }

    pub fn get(&self, resource: usize) -> usize {
        self.0[resource]
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `x_r ← max(x_r, |a|_r)`; returns whether any counter moved.
    pub fn raise(&mut self, coverage: &[usize]) -> bool {
        let mut changed = false;
        for (x, &c) in self.0.iter_mut().zip(coverage) {
            if c > *x {
                *x = c;
                changed = true;
            }
        }
        changed
    }
}

impl fmt::Display for ResourceCounters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Per-resource distribution rule: the share each of `count` agents on
/// `resource` receives. `count` is at least 1.
pub trait ShareRule<S> {
    fn share(&self, resource: usize, count: usize) -> S;
}

/// The same rule on every resource, held constant past its domain.
#[derive(Debug, Clone)]
pub struct UniformShares<S> {
    values: Vec<S>,
}

impl<S: Scalar> UniformShares<S> {
    pub fn new(rule: &DistributionRule) -> Self {
        Self { values: rule.values().iter().map(S::from_rational).collect() }
    }
}

impl<S: Scalar> ShareRule<S> for UniformShares<S> {
    fn share(&self, _resource: usize, count: usize) -> S {
        self.values[(count - 1).min(self.values.len() - 1)].clone()
    }
}

/// Resource-specific learning rules: resource `r` uses `alg_rule(x_r, n)`.
/// A counter of 0 (never occupied) behaves like 1; only `count = 1` can be
/// queried there and every rule gives it share 1.
#[derive(Debug, Clone)]
pub struct LearningShares<S> {
    /// `optimal[ℓ-1]` holds `f*_ℓ(1..=ℓ)`.
    optimal: Vec<Vec<S>>,
    counters: ResourceCounters,
}

impl<S: Scalar> LearningShares<S> {
    pub fn new(counters: ResourceCounters) -> Self {
        let mut shares = Self { optimal: Vec::new(), counters: ResourceCounters(Vec::new()) };
        shares.ensure(counters.max().max(1));
        shares.counters = counters;
        shares
    }

    fn ensure(&mut self, ell: usize) {
        while self.optimal.len() < ell {
            let k = self.optimal.len() + 1;
            let rule = optimal_rule(k, k).expect("k >= 1");
            self.optimal.push(rule.values().iter().map(S::from_rational).collect());
        }
    }

    pub fn counters(&self) -> &ResourceCounters {
        &self.counters
    }

    /// Raises counters to the given coverage; returns whether any moved.
    pub fn raise(&mut self, coverage: &[usize]) -> bool {
        let changed = self.counters.raise(coverage);
        if changed {
            self.ensure(self.counters.max());
        }
        changed
    }
}

impl<S: Scalar> ShareRule<S> for LearningShares<S> {
    fn share(&self, resource: usize, count: usize) -> S {
        let ell = self.counters.get(resource).max(1);
        let table = &self.optimal[ell - 1];
        table[count.min(ell) - 1].clone()
    }
}

/// Evaluates utilities on one problem in one numeric mode.
pub struct Evaluator<'p, S> {
    problem: &'p CoveringProblem,
    values: Vec<S>,
}

impl<'p, S: Scalar> Evaluator<'p, S> {
    pub fn new(problem: &'p CoveringProblem) -> Self {
        Self { problem, values: problem.values() }
    }

    pub fn problem(&self) -> &'p CoveringProblem {
        self.problem
    }

    /// Payoff from adding `r` when `others` other agents already hold it.
    fn marginal(&self, shares: &impl ShareRule<S>, r: usize, others: usize) -> S {
        self.values[r].clone() * &shares.share(r, others + 1)
    }

    /// Utility of `action` for an agent whose current choice is `current`,
    /// everyone else fixed as in `coverage`.
    pub fn action_utility(
        &self,
        shares: &impl ShareRule<S>,
        action: &[usize],
        current: &[usize],
        coverage: &[usize],
    ) -> S {
        let mut total = S::zero();
        for &r in action {
            let mine = usize::from(current.binary_search(&r).is_ok());
            total += self.marginal(shares, r, coverage[r] - mine);
        }
        total
    }

    pub fn best_response(
        &self,
        shares: &impl ShareRule<S>,
        agent: usize,
        allocation: &Allocation,
        coverage: &[usize],
    ) -> Action {
        let current = allocation.choice(agent);
        let current_value = self.action_utility(shares, current, current, coverage);
        match self.problem.action_set(agent) {
            ActionSet::Explicit(actions) => {
                let utilities: Vec<S> =
                    actions.iter().map(|a| self.action_utility(shares, a, current, coverage)).collect();
                let best = utilities
                    .iter()
                    .fold(current_value.clone(), |acc, u| if u > &acc { u.clone() } else { acc });
                if !best.exceeds(&current_value) {
                    return current.clone();
                }
                actions
                    .iter()
                    .zip(&utilities)
                    .find(|(_, u)| !best.exceeds(u) && u.exceeds(&current_value))
                    .map(|(a, _)| a.clone())
                    .unwrap_or_else(|| current.clone())
            }
            ActionSet::Capacity { accessible, capacity } => {
                let zero = S::zero();
                let mut picks: Vec<(usize, S)> = accessible
                    .iter()
                    .map(|&r| {
                        let mine = usize::from(current.binary_search(&r).is_ok());
                        (r, self.marginal(shares, r, coverage[r] - mine))
                    })
                    .filter(|(_, m)| m.exceeds(&zero))
                    .collect();
                picks.sort_by(|(ra, ma), (rb, mb)| {
                    mb.partial_cmp(ma).unwrap_or(std::cmp::Ordering::Equal).then(ra.cmp(rb))
                });
                picks.truncate(*capacity);
                let best = picks.iter().fold(S::zero(), |acc, (_, m)| acc + m.clone());
                if !best.exceeds(&current_value) {
                    return current.clone();
                }
                normalize(picks.into_iter().map(|(r, _)| r).collect())
            }
        }
    }

    pub fn is_nash(&self, shares: &impl ShareRule<S>, allocation: &Allocation, coverage: &[usize]) -> bool {
        (0..self.problem.n_agents())
            .all(|i| &self.best_response(shares, i, allocation, coverage) == allocation.choice(i))
    }

    pub fn welfare(&self, coverage: &[usize]) -> S {
        let mut total = S::zero();
        for (v, &c) in self.values.iter().zip(coverage) {
            if c > 0 {
                total += v;
            }
        }
        total
    }

    /// `Σ_r v_r Σ_{j=1}^{|a|_r} f_r(j)`.
    pub fn potential(&self, shares: &impl ShareRule<S>, coverage: &[usize]) -> S {
        let mut total = S::zero();
        for (r, &c) in coverage.iter().enumerate() {
            for j in 1..=c {
                total += self.values[r].clone() * &shares.share(r, j);
            }
        }
        total
    }
}

/// Number of agents whose choice contains `resource`.
pub fn coverage_count(
    problem: &CoveringProblem,
    allocation: &Allocation,
    resource: &str,
) -> Result<usize, GameError> {
    let r = problem.resource_index(resource)?;
    Ok(allocation.choices().iter().filter(|a| a.binary_search(&r).is_ok()).count())
}

/// Total value of covered resources.
pub fn welfare(problem: &CoveringProblem, allocation: &Allocation) -> Result<Rational, GameError> {
    problem.check_allocation(allocation)?;
    Ok(Evaluator::<Rational>::new(problem).welfare(&allocation.coverage(problem.n_resources())))
}

/// Maximum number of agents that can simultaneously hold any one resource.
pub fn cardinality(problem: &CoveringProblem) -> usize {
    (0..problem.n_resources())
        .map(|r| problem.action_sets().iter().filter(|s| s.can_reach(r)).count())
        .max()
        .unwrap_or(0)
        .max(1)
}

fn check_agent(problem: &CoveringProblem, agent: usize) -> Result<(), GameError> {
    if agent >= problem.n_agents() {
        return Err(GameError::AgentIndex(agent));
    }
    Ok(())
}

/// `Σ_{r ∈ a_i} v_r f(|a|_r)` under a single rule.
pub fn utility(
    problem: &CoveringProblem,
    rule: &DistributionRule,
    agent: usize,
    allocation: &Allocation,
) -> Result<Rational, GameError> {
    check_agent(problem, agent)?;
    problem.check_allocation(allocation)?;
    let coverage = allocation.coverage(problem.n_resources());
    let choice = allocation.choice(agent);
    let needed = choice.iter().map(|&r| coverage[r]).max().unwrap_or(0);
    if rule.len() < needed {
        return Err(RuleError::DomainTooShort { len: rule.len(), k: needed }.into());
    }
    Ok(choice.iter().fold(Rational::zero(), |acc, &r| {
        acc + &problem.resources()[r].value * rule.get(coverage[r]).expect("checked")
    }))
}

/// `Σ_{r ∈ a_i} v_r · alg_rule(x_r, n)(|a|_r)`.
pub fn utility_learning(
    problem: &CoveringProblem,
    counters: &ResourceCounters,
    agent: usize,
    allocation: &Allocation,
) -> Result<Rational, GameError> {
    check_agent(problem, agent)?;
    problem.check_allocation(allocation)?;
    if counters.0.len() != problem.n_resources() {
        let missing = problem.resources().get(counters.0.len()).map(|r| r.id.clone()).unwrap_or_default();
        return Err(GameError::MissingCounter(missing));
    }
    let coverage = allocation.coverage(problem.n_resources());
    let shares = LearningShares::<Rational>::new(counters.clone());
    Ok(allocation.choice(agent).iter().fold(Rational::zero(), |acc, &r| {
        acc + &problem.resources()[r].value * shares.share(r, coverage[r])
    }))
}

/// Exact best response with the stay-on-tie rule.
pub fn best_response(
    problem: &CoveringProblem,
    shares: &impl ShareRule<Rational>,
    agent: usize,
    allocation: &Allocation,
) -> Result<Action, GameError> {
    check_agent(problem, agent)?;
    problem.check_allocation(allocation)?;
    let coverage = allocation.coverage(problem.n_resources());
    Ok(Evaluator::new(problem).best_response(shares, agent, allocation, &coverage))
}

/// No agent has a strictly improving unilateral deviation (exact).
pub fn is_nash(
    problem: &CoveringProblem,
    shares: &impl ShareRule<Rational>,
    allocation: &Allocation,
) -> Result<bool, GameError> {
    problem.check_allocation(allocation)?;
    let coverage = allocation.coverage(problem.n_resources());
    Ok(Evaluator::new(problem).is_nash(shares, allocation, &coverage))
}

/// Rosenthal potential (exact).
pub fn potential(
    problem: &CoveringProblem,
    shares: &impl ShareRule<Rational>,
    allocation: &Allocation,
) -> Result<Rational, GameError> {
    problem.check_allocation(allocation)?;
    let coverage = allocation.coverage(problem.n_resources());
    Ok(Evaluator::new(problem).potential(shares, &coverage))
}

// ---------------------------------------------------------------------------
// Instance / allocation files

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum AgentsField {
    Count(usize),
    Ids(Vec<String>),
}

#[derive(Debug, Serialize, Deserialize)]
struct ResourceEntry {
    id: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ActionSetEntry {
    Explicit { actions: Vec<Vec<String>> },
    Capacity { accessible: Vec<String>, capacity: usize },
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    agents: AgentsField,
    resources: Vec<ResourceEntry>,
    action_sets: Vec<ActionSetEntry>,
}

impl CoveringProblem {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let agent_ids = match file.agents {
            AgentsField::Count(n) => (1..=n).map(|i| format!("p{i}")).collect(),
            AgentsField::Ids(ids) => ids,
        };
        let resources = file
            .resources
            .into_iter()
            .map(|e| {
                let value = parse_decimal(&e.value).map_err(|err| GameError::Invalid(err.to_string()))?;
                Ok(Resource::new(e.id, value))
            })
            .collect::<Result<Vec<_>, GameError>>()?;
        let lookup: HashMap<&str, usize> =
            resources.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
        let resolve = |ids: &[String]| -> Result<Action, GameError> {
            ids.iter()
                .map(|id| lookup.get(id.as_str()).copied().ok_or_else(|| GameError::UnknownResource(id.clone())))
                .collect()
        };
        let action_sets = file
            .action_sets
            .iter()
            .map(|entry| match entry {
                ActionSetEntry::Explicit { actions } => {
                    Ok(ActionSet::Explicit(actions.iter().map(|a| resolve(a)).collect::<Result<_, _>>()?))
                }
                ActionSetEntry::Capacity { accessible, capacity } => {
                    Ok(ActionSet::Capacity { accessible: resolve(accessible)?, capacity: *capacity })
                }
            })
            .collect::<Result<Vec<_>, GameError>>()?;
        drop(lookup);
        Self::new(agent_ids, resources, action_sets)
    }

    pub fn to_json(&self) -> String {
        let ids = |a: &[usize]| a.iter().map(|&r| self.resources[r].id.clone()).collect::<Vec<_>>();
        let file = InstanceFile {
            agents: AgentsField::Ids(self.agent_ids.clone()),
            resources: self
                .resources
                .iter()
                .map(|r| ResourceEntry { id: r.id.clone(), value: exact_decimal_or_fraction(&r.value) })
                .collect(),
            action_sets: self
                .action_sets
                .iter()
                .map(|s| match s {
                    ActionSet::Explicit(actions) => {
                        ActionSetEntry::Explicit { actions: actions.iter().map(|a| ids(a)).collect() }
                    }
                    ActionSet::Capacity { accessible, capacity } => {
                        ActionSetEntry::Capacity { accessible: ids(accessible), capacity: *capacity }
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serialisable")
    }

    /// Reads a per-agent list of resource-id arrays.
    pub fn allocation_from_json(&self, text: &str) -> Result<Allocation, GameError> {
        let raw: Vec<Vec<String>> = serde_json::from_str(text)?;
        let choices = raw
            .iter()
            .map(|ids| ids.iter().map(|id| self.resource_index(id)).collect::<Result<Action, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let allocation = Allocation::new(choices);
        self.check_allocation(&allocation)?;
        Ok(allocation)
    }

    pub fn allocation_to_json(&self, allocation: &Allocation) -> String {
        let raw: Vec<Vec<&str>> = allocation
            .choices()
            .iter()
            .map(|a| a.iter().map(|&r| self.resources[r].id.as_str()).collect())
            .collect();
        serde_json::to_string(&raw).expect("serialisable")
    }
}

/// Terminating decimals print as decimals, everything else as `num/den`.
fn exact_decimal_or_fraction(value: &Rational) -> String {
    let mut d = value.denom().clone();
    for p in [2u32, 5] {
        while (&d % p).is_zero() {
            d /= p;
        }
    }
    if d == 1u32.into() {
        let digits = value.denom().to_string().len() + 24;
        let text = format_significant(value, digits);
        if parse_decimal(&text).ok().as_ref() == Some(value) {
            return text;
        }
    }
    crate::rational::format_fraction(value)
}

/// Distinct resource indices reachable by any agent.
pub fn reachable_resources(problem: &CoveringProblem) -> BTreeSet<usize> {
    (0..problem.n_resources())
        .filter(|&r| problem.action_sets().iter().any(|s| s.can_reach(r)))
        .collect()
}
