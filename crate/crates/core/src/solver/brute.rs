use std::collections::HashMap;

use super::{improves, SolveResult, Status};
use crate::error::{Error, Result};
use crate::model::{Choice, Instance, Plan};
use crate::money::Money;
use crate::recourse::ScoreTable;

const MAX_OPTIONS: usize = 64;
const MAX_BRANCHES: usize = 8;

/// Exhaustive search over every assignment, used as a test oracle.
///
/// Branches are assigned one at a time. Partial assignments that agree on
/// the set of lot-types used and on the pieces delivered so far have
/// identical futures, so only the best of them (ties: lexicographically
/// smallest prefix) is kept. No bounding is involved.
pub fn solve_brute_force(instance: &Instance, scores: &ScoreTable) -> Result<SolveResult> {
    scores.check_dims(instance)?;
    let lots = instance.lot_universe().len();
    let mults = instance.multiplicities().len();
    if lots * mults > MAX_OPTIONS || instance.branch_count() > MAX_BRANCHES {
        return Err(Error::Capacity {
            what: "brute-force search (|L|·|M| <= 64 and |B| <= 8)",
            count: (lots * mults).max(instance.branch_count()) as u128,
            limit: MAX_OPTIONS as u128,
        });
    }
    let n = instance.max_lot_types() as u32;
    let upper = instance.supply_upper();

    let mut states: HashMap<(u64, u64), (i64, Vec<Choice>)> = HashMap::new();
    states.insert((0, 0), (0, Vec::new()));
    let mut visited = 0u64;
    for b in 0..instance.branch_count() {
        let mut next: HashMap<(u64, u64), (i64, Vec<Choice>)> = HashMap::new();
        for ((mask, pieces), (value, prefix)) in &states {
            for l in 0..lots {
                let m_mask = mask | (1u64 << l);
                if m_mask.count_ones() > n {
                    continue;
                }
                for m in 0..mults {
                    visited += 1;
                    let p = pieces + instance.pieces(l, m);
                    if p > upper {
                        continue;
                    }
                    let v = value + scores.get(b, l, m).units();
                    let mut a = prefix.clone();
                    a.push(Choice::new(l, m));
                    let slot = next.entry((m_mask, p)).or_insert((i64::MIN, Vec::new()));
                    if v > slot.0 || (v == slot.0 && a < slot.1) {
                        *slot = (v, a);
                    }
                }
            }
        }
        states = next;
    }

    let mut best: Option<(Money, Plan)> = None;
    for ((mask, pieces), (value, assignment)) in states {
        if pieces < instance.supply_lower() {
            continue;
        }
        let obj = Money::from_units(value) - instance.lot_count_penalty(mask.count_ones() as usize);
        let plan = Plan::new(assignment);
        let replace = match &best {
            None => true,
            Some((bo, bp)) => improves(obj, &plan, *bo, bp),
        };
        if replace {
            best = Some((obj, plan));
        }
    }
    Ok(match best {
        Some((obj, plan)) => SolveResult {
            plan: Some(plan),
            objective: Some(obj),
            bound: Some(obj),
            nodes_explored: visited,
            status: Status::Optimal,
            budget_exhausted: false,
            trace: Vec::new(),
        },
        None => SolveResult::infeasible(visited),
    })
}
