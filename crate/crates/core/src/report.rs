//! Analytical tables and the two counterexample verdicts.

use std::fmt::Write as _;

use num_traits::Zero;

use crate::dynamics::{check_learning_guarantee, run_learning, RunOptions, Schedule};
use crate::game::{welfare, Allocation, CoveringProblem, UniformShares};
use crate::oracle::{all_nash, learning_over_all_initials, OracleError};
use crate::rational::{format_fixed, format_fraction, format_significant, int, Rational};
use crate::rules::{optimal_poa, optimal_rule, poa_of_rule, risky_rule, RuleError};

/// `(k, optimal PoA)` for `k = 1..=k_max`.
pub fn poa_table(k_max: usize) -> Result<Vec<(usize, Rational)>, RuleError> {
    (1..=k_max).map(|k| Ok((k, optimal_poa(k)?))).collect()
}

pub fn render_poa_table(rows: &[(usize, Rational)]) -> String {
    let mut out = format!("{:>4} {:>40} {}\n", "k", "poa", "decimal");
    for (k, v) in rows {
        let _ = writeln!(out, "{k:>4} {:>40} {}", format_fraction(v), format_significant(v, 12));
    }
    out
}

/// Percent change in PoA at cardinality `k` from using the risky rule with
/// guess `p` instead of the optimal rule for `kbar`.
pub fn relative_difference(k: usize, kbar: usize, p: usize) -> Result<Rational, RuleError> {
    let base = poa_of_rule(&optimal_rule(kbar, kbar)?, k)?;
    let risky = poa_of_rule(&risky_rule(p, kbar)?, k)?;
    Ok(int(100) * (risky - &base) / base)
}

pub fn relative_differences(k: usize, kbar: usize, ps: &[usize]) -> Result<Vec<(usize, Rational)>, RuleError> {
    if k == 0 || k > kbar {
        return Err(RuleError::InvalidArgument(format!("need 1 <= k <= kbar, got k = {k}, kbar = {kbar}")));
    }
    ps.iter().map(|&p| Ok((p, relative_difference(k, kbar, p)?))).collect()
}

pub fn render_relative_differences(k: usize, kbar: usize, rows: &[(usize, Rational)]) -> String {
    let mut out = format!("relative PoA difference (%) of risky:p:{kbar} vs optimal:{kbar} at k = {k}\n");
    let _ = writeln!(out, "{:>4} {:>10} exact", "p", "diff");
    for (p, d) in rows {
        let _ = writeln!(out, "{p:>4} {:>10} {}", format_fixed(d, 3), format_fraction(d));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub case: String,
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("counterexample {}\n", self.case);
        for c in &self.checks {
            let _ = writeln!(out, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        match self.first_failure() {
            None => out.push_str("PASS\n"),
            Some(c) => {
                let _ = writeln!(out, "FAIL ({})", c.name);
            }
        }
        out
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }
}

fn show(v: &Rational) -> String {
    format!("{} ({})", format_fraction(v), format_significant(v, 12))
}

/// Under the optimal rule for cardinality 3 a suboptimal equilibrium exists,
/// yet learning reaches the optimum from every start and every round-robin offset.
pub fn verify_counterexample_i(problem: &CoveringProblem) -> Result<Verdict, OracleError> {
    let f3 = UniformShares::<Rational>::new(&optimal_rule(3, 3)?);
    let report = all_nash(problem, &f3)?;
    let runs = learning_over_all_initials(problem, &[])?;
    let opt = &report.optimal_welfare;
    let worst = &report.worst_nash_welfare;
    let learned_min = runs.iter().map(|r| &r.welfare).min().cloned().unwrap_or_else(Rational::zero);
    let mut v = Verdict { case: "i".into(), checks: Vec::new() };
    v.push(
        "fixed rule admits a suboptimal equilibrium",
        worst < opt,
        format!("worst equilibrium {} vs optimum {}, ratio {}", show(worst), show(opt), show(&report.worst_ratio)),
    );
    let optimal_runs = runs.iter().filter(|r| r.converged && &r.welfare == opt).count();
    v.push(
        "learning always reaches the optimum",
        optimal_runs == runs.len(),
        format!("{optimal_runs} of {} runs end at welfare {}", runs.len(), show(opt)),
    );
    v.push(
        "learning worst case beats the fixed rule",
        &learned_min > worst,
        format!("min learned welfare {} vs {}", show(&learned_min), show(worst)),
    );
    Ok(v)
}

/// Every equilibrium of the optimal rule for cardinality 3 is optimal, yet
/// learning from `(r2, r3, r1)` with p3 moving first stops at a worse one.
pub fn verify_counterexample_ii(problem: &CoveringProblem) -> Result<Verdict, OracleError> {
    let f3 = UniformShares::<Rational>::new(&optimal_rule(3, 3)?);
    let report = all_nash(problem, &f3)?;
    let opt = report.optimal_welfare.clone();
    let mut v = Verdict { case: "ii".into(), checks: Vec::new() };
    let all_opt = report.nash_allocations.iter().all(|e| e.welfare == opt);
    v.push(
        "every fixed-rule equilibrium is optimal",
        all_opt && !report.nash_allocations.is_empty(),
        format!("{} equilibria, worst {} vs optimum {}", report.nash_allocations.len(), show(&report.worst_nash_welfare), show(&opt)),
    );
    let initial = Allocation::new(vec![vec![1], vec![2], vec![0]]);
    let schedule = Schedule::Permutation(vec![2, 0, 1]);
    let trace = run_learning::<Rational>(problem, initial, &schedule, RunOptions::default())?;
    let learned = welfare(problem, &trace.final_allocation)?;
    let expected = &problem.resources()[1].value + &problem.resources()[2].value;
    v.push(
        "scheduled learning run stops below the optimum",
        trace.converged && learned == expected && learned < opt,
        format!(
            "final {} after {} change(s), counters {}, welfare {} vs {}",
            problem.format_allocation(&trace.final_allocation),
            trace.changes,
            trace.final_counters,
            show(&learned),
            show(&opt)
        ),
    );
    let guarantee = check_learning_guarantee(problem, &trace, &opt)?;
    v.push(
        "learning guarantee holds",
        guarantee.holds,
        format!(
            "ratio {} >= poa(k_m = {}) {} >= poa(k = {}) {}",
            show(&guarantee.ratio),
            guarantee.k_m,
            show(&guarantee.bound_k_m),
            guarantee.k,
            show(&guarantee.bound_k)
        ),
    );
    Ok(v)
}
