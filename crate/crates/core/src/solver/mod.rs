//! Maximizing expected profit over feasible plans.
//!
//! All three solvers work on a precomputed [`ScoreTable`]: once demand and
//! costs are folded into `score(b, l, m)`, the objective of a plan is
//! `Σ_b score(b, l_b, m_b)` minus the cumulative lot-count cost of the
//! number of distinct lot-types it uses.

mod brute;
mod exact;
mod greedy;
mod window;

use std::cmp::Ordering;
use std::fmt;
use std::time::Duration;

use serde::Serialize;

pub use brute::solve_brute_force;
pub use exact::solve_exact;
pub use greedy::solve_greedy;

use crate::error::Result;
use crate::model::{Choice, Instance, Plan};
use crate::money::Money;
use crate::recourse::ScoreTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
        })
    }
}

/// One line of the optional branch-and-bound trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub node: u64,
    pub depth: usize,
    pub bound: Money,
    pub incumbent: Option<Money>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node={} depth={} bound={} incumbent=", self.node, self.depth, self.bound)?;
        match self.incumbent {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("none"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub plan: Option<Plan>,
    pub objective: Option<Money>,
    /// Upper bound on the optimum; `None` once infeasibility is proven.
    pub bound: Option<Money>,
    pub nodes_explored: u64,
    pub status: Status,
    /// The node or time budget stopped the search early.
    pub budget_exhausted: bool,
    #[serde(skip)]
    pub trace: Vec<TraceEvent>,
}

impl SolveResult {
    fn infeasible(nodes_explored: u64) -> Self {
        SolveResult {
            plan: None,
            objective: None,
            bound: None,
            nodes_explored,
            status: Status::Infeasible,
            budget_exhausted: false,
            trace: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_nodes: u64,
    pub time_limit: Duration,
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_nodes: 1_000_000,
            time_limit: Duration::from_secs(60),
            trace: false,
        }
    }
}

/// Profit of `plan` under `scores`.
pub fn objective(plan: &Plan, instance: &Instance, scores: &ScoreTable) -> Result<Money> {
    plan.check_structure(instance)?;
    scores.check_dims(instance)?;
    let sum: Money = plan
        .assignment()
        .iter()
        .enumerate()
        .map(|(b, c)| scores.get(b, c.lot, c.mult))
        .sum();
    Ok(sum - instance.lot_count_penalty(plan.used_lot_types().len()))
}

/// Ordering used to break objective ties: smaller active lot-type set first,
/// then smaller per-branch `(lot, multiplicity)` indices.
pub(crate) fn tie_key(plan: &Plan) -> (Vec<usize>, &[Choice]) {
    (plan.used_lot_types(), plan.assignment())
}

/// `true` when `(obj_a, a)` should replace `(obj_b, b)` as incumbent.
pub(crate) fn improves(obj_a: Money, a: &Plan, obj_b: Money, b: &Plan) -> bool {
    match obj_a.cmp(&obj_b) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => tie_key(a) < tie_key(b),
    }
}


#[cfg(test)]
mod tests {
    use super::testkit::random_case;
    use super::*;
    use crate::model::check_feasible;
    use crate::model::fixtures::instance;

    #[test]
    fn objective_examples() {
        let inst = instance(2, &[&[1], &[2]], &[1], (0, u64::MAX), 3);
        let zeros = ScoreTable::from_fn(2, 2, 1, |_, _, _| Money::ZERO);
        let plan = Plan::new(vec![Choice::new(0, 0), Choice::new(1, 0)]);
        assert_eq!(objective(&plan, &inst, &zeros).unwrap(), Money::from_int(-2));

        let inst = instance(1, &[&[1]], &[1], (0, u64::MAX), 1);
        let six = ScoreTable::from_fn(1, 1, 1, |_, _, _| Money::from_int(6));
        let plan = Plan::uniform(1, Choice::new(0, 0));
        assert_eq!(objective(&plan, &inst, &six).unwrap(), Money::from_int(5));
    }

    #[test]
    fn exact_matches_brute_force_on_random_instances() {
        for seed in 0..1000 {
            let (inst, scores) = random_case(seed);
            let brute = solve_brute_force(&inst, &scores).unwrap();
            let exact = solve_exact(&inst, &scores, &SolverOptions::default()).unwrap();
            assert_eq!(exact.objective, brute.objective, "seed {seed}");
            assert_eq!(exact.status == Status::Infeasible, brute.status == Status::Infeasible);
            if let Some(plan) = &exact.plan {
                assert_eq!(exact.status, Status::Optimal);
                assert_eq!(exact.bound, exact.objective);
                assert!(check_feasible(plan, &inst).unwrap().is_ok());
                assert_eq!(objective(plan, &inst, &scores).ok(), exact.objective);
            }
        }
    }

    #[test]
    fn greedy_never_beats_exact() {
        for seed in 0..500 {
            let (inst, scores) = random_case(10_000 + seed);
            let exact = solve_exact(&inst, &scores, &SolverOptions::default()).unwrap();
            let greedy = solve_greedy(&inst, &scores).unwrap();
            assert_eq!(greedy, solve_greedy(&inst, &scores).unwrap());
            match (greedy.objective, exact.objective) {
                (Some(g), Some(e)) => {
                    assert!(g <= e, "seed {seed}");
                    assert!(greedy.bound.unwrap() >= g);
                    assert!(check_feasible(greedy.plan.as_ref().unwrap(), &inst).unwrap().is_ok());
                }
                (Some(_), None) => panic!("greedy found a plan the exact solver missed"),
                _ => {}
            }
        }
    }

    #[test]
    fn single_branch_greedy_is_exact() {
        let mut checked = 0;
        for seed in 0..2000 {
            let (inst, scores) = random_case(50_000 + seed);
            if inst.branch_count() != 1 {
                continue;
            }
            checked += 1;
            let exact = solve_exact(&inst, &scores, &SolverOptions::default()).unwrap();
            let greedy = solve_greedy(&inst, &scores).unwrap();
            assert_eq!(greedy.objective, exact.objective, "seed {seed}");
        }
        assert!(checked > 100);
    }

    #[test]
    fn unconstrained_separable_optimum() {
        for seed in 0..200 {
            let (inst, scores) = random_case(90_000 + seed);
            let lots = inst.lot_universe().len();
            let costs: Vec<Money> = inst.lot_count_costs().iter().copied().cycle().take(lots).collect();
            let inst = inst.with_lot_count_costs(costs).unwrap().with_supply_window(0, u64::MAX).unwrap();
            let res = solve_exact(&inst, &scores, &SolverOptions::default()).unwrap();
            let plan = res.plan.clone().unwrap();
            let best: Money = (0..inst.branch_count())
                .map(|b| {
                    (0..lots)
                        .flat_map(|l| (0..scores.mults()).map(move |m| (l, m)))
                        .map(|(l, m)| scores.get(b, l, m))
                        .max()
                        .unwrap()
                })
                .sum();
            // the separable argmax is optimal when lot-count costs are zero;
            // otherwise it bounds the optimum from above
            let used = plan.used_lot_types().len();
            assert!(res.objective.unwrap() <= best - inst.lot_count_penalty(1));
            if inst.lot_count_costs().iter().all(|d| *d == Money::ZERO) {
                assert_eq!(res.objective.unwrap(), best);
            }
            assert!(used <= inst.max_lot_types());
        }
    }

    #[test]
    fn forced_single_lot() {
        let inst = instance(3, &[&[1, 2, 2, 1]], &[1], (0, u64::MAX), 1);
        let scores = ScoreTable::from_fn(3, 1, 1, |b, _, _| Money::from_int(10 * (b as i64 + 1)));
        let res = solve_exact(&inst, &scores, &SolverOptions::default()).unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.plan.unwrap(), Plan::uniform(3, Choice::new(0, 0)));
        assert_eq!(res.objective, Some(Money::from_int(60 - 1)));
    }

    #[test]
    fn brute_force_argmax_and_infeasible() {
        let inst = instance(1, &[&[1], &[2]], &[1], (0, u64::MAX), 1);
        let scores = ScoreTable::from_fn(1, 2, 1, |_, l, _| Money::from_int(if l == 0 { 5 } else { 7 }));
        let res = solve_brute_force(&inst, &scores).unwrap();
        assert_eq!(res.plan.unwrap(), Plan::uniform(1, Choice::new(1, 0)));
        assert_eq!(res.objective, Some(Money::from_int(6)));

        let inst = instance(2, &[&[1], &[2]], &[1], (0, 0), 1);
        let scores = ScoreTable::from_fn(2, 2, 1, |_, _, _| Money::ZERO);
        assert_eq!(solve_brute_force(&inst, &scores).unwrap().status, Status::Infeasible);
        assert_eq!(
            solve_exact(&inst, &scores, &SolverOptions::default()).unwrap().status,
            Status::Infeasible
        );
        assert_eq!(solve_greedy(&inst, &scores).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn brute_force_guard() {
        let inst = instance(9, &[&[1]], &[1], (0, u64::MAX), 1);
        let scores = ScoreTable::from_fn(9, 1, 1, |_, _, _| Money::ZERO);
        assert!(matches!(
            solve_brute_force(&inst, &scores),
            Err(crate::error::Error::Capacity { .. })
        ));
    }

    #[test]
    fn frozen_seed_42_case() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let inst = instance(3, &[&[1, 1], &[1, 2], &[2, 1], &[2, 2]], &[1, 2], (6, 14), 2);
        let scores = ScoreTable::from_fn(3, 4, 2, |_, _, _| Money::from_int(rng.random_range(0..40)));
        let brute = solve_brute_force(&inst, &scores).unwrap();
        let exact = solve_exact(&inst, &scores, &SolverOptions::default()).unwrap();
        assert_eq!(brute.objective, exact.objective);
        assert_eq!(brute.plan, exact.plan);
    }

    #[test]
    fn budget_exhaustion_keeps_valid_bound() {
        for seed in 0..100 {
            let (inst, scores) = random_case(70_000 + seed);
            let opts = SolverOptions {
                max_nodes: 1,
                ..SolverOptions::default()
            };
            let capped = solve_exact(&inst, &scores, &opts).unwrap();
            let full = solve_exact(&inst, &scores, &SolverOptions::default()).unwrap();
            if let (Some(b), Some(opt)) = (capped.bound, full.objective) {
                assert!(b >= opt);
                if let Some(obj) = capped.objective {
                    assert!(b >= obj);
                    assert_eq!(b == obj, capped.status == Status::Optimal);
                }
            }
        }
    }

    #[test]
    fn monotone_in_supply_upper_and_lot_costs() {
        for seed in 0..200 {
            let (inst, scores) = random_case(30_000 + seed);
            let opts = SolverOptions::default();
            let base = solve_exact(&inst, &scores, &opts).unwrap();
            let upper = inst.supply_upper().saturating_add(5);
            let relaxed = solve_exact(&inst.with_supply_window(inst.supply_lower(), upper).unwrap(), &scores, &opts).unwrap();
            match (base.objective, relaxed.objective) {
                (Some(a), Some(b)) => assert!(b >= a),
                (Some(_), None) => panic!("relaxing the window lost feasibility"),
                _ => {}
            }

            let bump = Money::from_int(7);
            for i in 0..inst.max_lot_types() {
                let mut costs = inst.lot_count_costs().to_vec();
                costs[i] += bump;
                let dearer = solve_exact(&inst.with_lot_count_costs(costs).unwrap(), &scores, &opts).unwrap();
                if let (Some(a), Some(b)) = (base.objective, dearer.objective) {
                    assert!(b <= a && a - b <= bump, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn trace_lines() {
        let (inst, scores) = random_case(5);
        let opts = SolverOptions {
            trace: true,
            ..SolverOptions::default()
        };
        let res = solve_exact(&inst, &scores, &opts).unwrap();
        assert_eq!(res.trace.len() as u64, res.nodes_explored);
        assert!(res.trace[0].to_string().starts_with("node=0 depth=0 bound="));
    }
}
