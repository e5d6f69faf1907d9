use super::{objective, SolveResult, Status};
use crate::error::Result;
use crate::model::{Choice, Instance, Plan};
use crate::money::Money;
use crate::recourse::ScoreTable;

const NONE: i64 = i64::MIN;

/// Greedy heuristic.
///
/// Grows the active lot-type set one lot-type at a time, always taking the
/// one with the largest gain in the window-relaxed objective, and stops when
/// nothing improves or `n` is reached. If the resulting assignment breaks
/// the supply window, single-branch moves are applied until it fits: a move
/// that closes the gap with the least loss wins, otherwise the move with the
/// least loss per piece of gap closed. Moves may switch lot-types as long as
/// at most `n` stay in use.
pub fn solve_greedy(instance: &Instance, scores: &ScoreTable) -> Result<SolveResult> {
    scores.check_dims(instance)?;
    let branches = instance.branch_count();
    let lots = instance.lot_universe().len();
    let mults = instance.multiplicities().len();
    let n = instance.max_lot_types();
    let pen = |k: usize| instance.lot_count_penalty(k).units();

    let best_m: Vec<i64> = (0..branches * lots)
        .map(|i| (0..mults).map(|m| scores.get(i / lots, i % lots, m).units()).max().unwrap())
        .collect();
    let relaxation = (0..branches)
        .map(|b| (0..lots).map(|l| best_m[b * lots + l]).max().unwrap())
        .sum::<i64>()
        - pen(1);
    let bound = Some(Money::from_units(relaxation));

    let mut active: Vec<usize> = Vec::new();
    let mut current = vec![NONE; branches];
    let mut current_value = NONE;
    while active.len() < n {
        let mut pick: Option<(i64, usize)> = None;
        for l in (0..lots).filter(|l| !active.contains(l)) {
            let v: i64 = (0..branches).map(|b| current[b].max(best_m[b * lots + l])).sum::<i64>()
                - pen(active.len() + 1);
            if pick.is_none_or(|(pv, _)| v > pv) {
                pick = Some((v, l));
            }
        }
        let Some((v, l)) = pick else { break };
        if !active.is_empty() && v <= current_value {
            break;
        }
        active.push(l);
        for b in 0..branches {
            current[b] = current[b].max(best_m[b * lots + l]);
        }
        current_value = v;
    }
    active.sort_unstable();

    let mut assignment: Vec<Choice> = (0..branches)
        .map(|b| {
            let mut best: Option<(i64, Choice)> = None;
            for &l in &active {
                for m in 0..mults {
                    let v = scores.get(b, l, m).units();
                    if best.is_none_or(|(bv, _)| v > bv) {
                        best = Some((v, Choice::new(l, m)));
                    }
                }
            }
            best.expect("active set is non-empty").1
        })
        .collect();

    let lower = instance.supply_lower();
    let upper = instance.supply_upper();
    let gap = |t: u64| {
        if t < lower {
            lower - t
        } else {
            t.saturating_sub(upper)
        }
    };
    let mut usage = vec![0usize; lots];
    for c in &assignment {
        usage[c.lot] += 1;
    }
    let mut used = usage.iter().filter(|&&u| u > 0).count();
    let mut total: u64 = assignment.iter().map(|c| instance.pieces(c.lot, c.mult)).sum();

    while gap(total) > 0 {
        let g = gap(total);
        // (closes gap, loss, reduction, branch, choice)
        let mut best: Option<(bool, i64, u64, usize, Choice)> = None;
        for (b, old) in assignment.iter().enumerate() {
            let old_w = instance.pieces(old.lot, old.mult);
            let old_v = scores.get(b, old.lot, old.mult).units();
            for l in 0..lots {
                let mut used_after = used;
                if l != old.lot {
                    if usage[old.lot] == 1 {
                        used_after -= 1;
                    }
                    if usage[l] == 0 {
                        used_after += 1;
                    }
                }
                if used_after > n {
                    continue;
                }
                for m in 0..mults {
                    let choice = Choice::new(l, m);
                    if choice == *old {
                        continue;
                    }
                    let t = total - old_w + instance.pieces(l, m);
                    let g2 = gap(t);
                    if g2 >= g {
                        continue;
                    }
                    let loss = old_v - scores.get(b, l, m).units() + pen(used_after) - pen(used);
                    let closes = g2 == 0;
                    let reduction = g - g2;
                    let better = match &best {
                        None => true,
                        Some((bc, bl, br, _, _)) => {
                            if closes != *bc {
                                closes
                            } else if closes {
                                loss < *bl
                            } else {
                                (loss as i128) * (*br as i128) < (*bl as i128) * (reduction as i128)
                            }
                        }
                    };
                    if better {
                        best = Some((closes, loss, reduction, b, choice));
                    }
                }
            }
        }
        let Some((_, _, _, b, choice)) = best else {
            return Ok(SolveResult {
                bound,
                ..SolveResult::infeasible(0)
            });
        };
        let old = assignment[b];
        total = total - instance.pieces(old.lot, old.mult) + instance.pieces(choice.lot, choice.mult);
        usage[old.lot] -= 1;
        usage[choice.lot] += 1;
        used = usage.iter().filter(|&&u| u > 0).count();
        assignment[b] = choice;
    }

    let plan = Plan::new(assignment);
    let obj = objective(&plan, instance, scores)?;
    Ok(SolveResult {
        plan: Some(plan),
        objective: Some(obj),
        bound,
        nodes_explored: 0,
        status: if bound == Some(obj) { Status::Optimal } else { Status::Feasible },
        budget_exhausted: false,
        trace: Vec::new(),
    })
}
