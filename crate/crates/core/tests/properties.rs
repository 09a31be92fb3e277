use covergame::dynamics::{random_initial, run_best_response, run_learning, RunOptions, Schedule};
use covergame::game::{
    best_response, cardinality, is_nash, utility, welfare, Allocation, CoveringProblem, Evaluator, LearningShares,
    ResourceCounters, ShareRule, UniformShares,
};
use covergame::oracle::{all_nash, enumerate_joint_allocations, random_small_instance, InstanceBounds};
use covergame::rational::{int, Rational};
use covergame::rules::{optimal_rule, risky_rule, DistributionRule};
use num_traits::Zero;
use proptest::prelude::*;

fn instance(seed: u64) -> CoveringProblem {
    random_small_instance(seed, &InstanceBounds::default())
}

fn fixed_rule(p: &CoveringProblem) -> DistributionRule {
    let k = cardinality(p);
    optimal_rule(k, k).unwrap().extended(p.n_agents())
}

fn replace(a: &Allocation, agent: usize, action: Vec<usize>) -> Allocation {
    let mut choices = a.choices().to_vec();
    choices[agent] = action;
    Allocation::new(choices)
}

fn assert_exact_potential(p: &CoveringProblem, shares: &impl ShareRule<Rational>) {
    let eval = Evaluator::<Rational>::new(p);
    let m = p.n_resources();
    let joint = enumerate_joint_allocations(p).unwrap();
    for a in joint.iter().take(200) {
        let cov = a.coverage(m);
        let phi = eval.potential(shares, &cov);
        for agent in 0..p.n_agents() {
            let current = a.choice(agent);
            let u_before = eval.action_utility(shares, current, current, &cov);
            for b in &joint.actions()[agent] {
                let u_after = eval.action_utility(shares, b, current, &cov);
                let moved = replace(&a, agent, b.clone());
                let phi_after = eval.potential(shares, &moved.coverage(m));
                assert_eq!(u_after - &u_before, phi_after - &phi);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deviations_move_the_potential_exactly(seed in any::<u64>(), counters in proptest::collection::vec(0usize..4, 6)) {
        let p = instance(seed);
        assert_exact_potential(&p, &UniformShares::<Rational>::new(&fixed_rule(&p)));
        let x = ResourceCounters(counters[..p.n_resources()].iter().map(|&c| c.min(p.n_agents())).collect());
        assert_exact_potential(&p, &LearningShares::<Rational>::new(x));
    }

    #[test]
    fn welfare_is_bounded_by_total_value(seed in any::<u64>()) {
        let p = instance(seed);
        let total = p.total_value();
        for a in enumerate_joint_allocations(&p).unwrap().iter() {
            let w = welfare(&p, &a).unwrap();
            let cov = a.coverage(p.n_resources());
            let all_covered = p.resources().iter().zip(&cov).all(|(r, &c)| r.value.is_zero() || c > 0);
            prop_assert!(w <= total);
            prop_assert_eq!(w == total, all_covered);
        }
    }

    #[test]
    fn utilities_never_exceed_welfare(seed in any::<u64>(), guess in 2usize..5) {
        let p = instance(seed);
        let n = p.n_agents();
        let mut rules = vec![fixed_rule(&p)];
        if guess < n.max(3) {
            rules.push(risky_rule(guess, n.max(3).max(guess + 1)).unwrap().extended(n));
        }
        for rule in &rules {
            for a in enumerate_joint_allocations(&p).unwrap().iter() {
                let paid = (0..n).map(|i| utility(&p, rule, i, &a).unwrap()).fold(Rational::zero(), |s, u| s + u);
                prop_assert!(paid <= welfare(&p, &a).unwrap());
            }
        }
    }

    #[test]
    fn nash_means_every_best_response_stays(seed in any::<u64>()) {
        let p = instance(seed);
        let shares = UniformShares::<Rational>::new(&fixed_rule(&p));
        for a in enumerate_joint_allocations(&p).unwrap().iter() {
            let fixed_point = (0..p.n_agents()).all(|i| &best_response(&p, &shares, i, &a).unwrap() == a.choice(i));
            prop_assert_eq!(is_nash(&p, &shares, &a).unwrap(), fixed_point);
        }
    }

    #[test]
    fn best_response_runs_end_in_an_enumerated_equilibrium(seed in any::<u64>(), init_seed in any::<u64>()) {
        let p = instance(seed);
        let rule = fixed_rule(&p);
        let shares = UniformShares::<Rational>::new(&rule);
        let report = all_nash(&p, &shares).unwrap();
        for offset in 0..p.n_agents() {
            let trace = run_best_response::<Rational>(
                &p, &rule, random_initial(&p, init_seed), &Schedule::RoundRobin { offset }, RunOptions::default(),
            ).unwrap();
            prop_assert!(trace.converged);
            prop_assert!(report.nash_allocations.iter().any(|e| e.allocation == trace.final_allocation));
        }
    }

    #[test]
    fn learning_counters_and_potential(seed in any::<u64>(), init_seed in any::<u64>(), sched in any::<u64>()) {
        let p = instance(seed);
        let k = cardinality(&p);
        let m = p.n_resources();
        let initial = random_initial(&p, init_seed);
        let schedules = [Schedule::RoundRobin { offset: 0 }, Schedule::RandomUniform { seed: sched }];
        for schedule in &schedules {
            let trace = run_learning::<Rational>(&p, initial.clone(), schedule, RunOptions::default()).unwrap();
            prop_assert!(trace.converged);
            prop_assert!(trace.k_m <= k);
            let frozen = LearningShares::<Rational>::new(trace.final_counters.clone());
            prop_assert!(is_nash(&p, &frozen, &trace.final_allocation).unwrap());

            let eval = Evaluator::<Rational>::new(&p);
            let mut alloc = initial.clone();
            let mut counters = ResourceCounters::from_coverage(&initial.coverage(m));
            for step in &trace.steps {
                prop_assert!(step.counters.iter().zip(&counters.0).all(|(new, old)| new >= old));
                prop_assert!(step.counters.iter().all(|&c| c <= k));
                if step.before != step.after {
                    let shares = LearningShares::<Rational>::new(counters.clone());
                    let before = eval.potential(&shares, &alloc.coverage(m));
                    alloc = replace(&alloc, step.agent, step.after.clone());
                    let after = eval.potential(&shares, &alloc.coverage(m));
                    prop_assert!(after > before);
                }
                counters = ResourceCounters(step.counters.clone());
            }
            prop_assert_eq!(&alloc, &trace.final_allocation);
        }
    }

    #[test]
    fn float_mode_matches_exact_mode_on_integer_instances(seed in any::<u64>()) {
        let p = instance(seed);
        let rule = fixed_rule(&p);
        let start = random_initial(&p, seed);
        let exact = run_best_response::<Rational>(&p, &rule, start.clone(), &Schedule::default(), RunOptions::default()).unwrap();
        let float = run_best_response::<f64>(&p, &rule, start, &Schedule::default(), RunOptions::default()).unwrap();
        prop_assert_eq!(welfare(&p, &exact.final_allocation).unwrap(), welfare(&p, &float.final_allocation).unwrap());
    }
}

#[test]
fn single_agent_nash_is_a_maximiser() {
    let p = CoveringProblem::explicit(vec![int(2), int(9)], vec![vec![vec![0], vec![1]]]).unwrap();
    let f = UniformShares::<Rational>::new(&optimal_rule(1, 1).unwrap());
    assert!(!is_nash(&p, &f, &Allocation::new(vec![vec![0]])).unwrap());
    assert!(is_nash(&p, &f, &Allocation::new(vec![vec![1]])).unwrap());
}
