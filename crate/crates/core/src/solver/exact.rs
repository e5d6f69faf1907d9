//! Branch-and-bound over the set of active lot-types.
//!
//! A node fixes, in a static branching order, which lot-types are in the
//! active set and which are out. Once the active set is fixed, every branch
//! picks its own best `(lot, multiplicity)` independently, except for the
//! coupling through the supply window, which an exact knapsack-style pass
//! handles. Each newly grown active set `A` yields a candidate plan (the best
//! assignment over `A`, charged for `|A|` lot-types); the true optimum is
//! reached at `A` = its own set of used lot-types.
//!
//! Node bound: every branch takes its best option among the active and
//! still-undecided lot-types, minus the lot-count charge for
//! `max(1, |active|)` types. When that relaxed choice breaks the supply
//! window, the window-constrained value over the same lot-types replaces it.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::Instant;

use super::window::{best_within, value_within, Options};
use super::{greedy, improves, SolveResult, SolverOptions, Status, TraceEvent};
use crate::error::Result;
use crate::model::{Instance, Plan};
use crate::money::Money;
use crate::recourse::ScoreTable;

const NONE: i64 = i64::MIN;

struct Ctx<'a> {
    instance: &'a Instance,
    scores: &'a ScoreTable,
    branches: usize,
    lots: usize,
    n: usize,
    /// best score over multiplicities, `[b * lots + l]`
    best_m: Vec<i64>,
    best_w: Vec<u64>,
    order: Vec<usize>,
    /// best over `order[k..]`, `[k * branches + b]`
    suffix_best: Vec<i64>,
    suffix_w: Vec<u64>,
    window_trivial: bool,
}

impl<'a> Ctx<'a> {
    fn new(instance: &'a Instance, scores: &'a ScoreTable) -> Self {
        let branches = instance.branch_count();
        let lots = instance.lot_universe().len();
        let mults = instance.multiplicities().len();
        let mut best_m = vec![NONE; branches * lots];
        let mut best_w = vec![0; branches * lots];
        for b in 0..branches {
            for l in 0..lots {
                for m in 0..mults {
                    let v = scores.get(b, l, m).units();
                    if v > best_m[b * lots + l] {
                        best_m[b * lots + l] = v;
                        best_w[b * lots + l] = instance.pieces(l, m);
                    }
                }
            }
        }
        // branch first on lot-types that would earn most on their own
        let contribution: Vec<i128> = (0..lots)
            .map(|l| (0..branches).map(|b| best_m[b * lots + l] as i128).sum())
            .collect();
        let mut order: Vec<usize> = (0..lots).collect();
        order.sort_by(|&a, &b| contribution[b].cmp(&contribution[a]).then(a.cmp(&b)));

        let mut suffix_best = vec![NONE; (lots + 1) * branches];
        let mut suffix_w = vec![0; (lots + 1) * branches];
        for k in (0..lots).rev() {
            let l = order[k];
            for b in 0..branches {
                let (v, w) = (best_m[b * lots + l], best_w[b * lots + l]);
                let (nv, nw) = (suffix_best[(k + 1) * branches + b], suffix_w[(k + 1) * branches + b]);
                let (sv, sw) = if v >= nv { (v, w) } else { (nv, nw) };
                suffix_best[k * branches + b] = sv;
                suffix_w[k * branches + b] = sw;
            }
        }

        let max_total: u64 = (0..branches)
            .map(|_| {
                (0..lots)
                    .flat_map(|l| (0..mults).map(move |m| (l, m)))
                    .map(|(l, m)| instance.pieces(l, m))
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        let window_trivial = instance.supply_lower() == 0 && instance.supply_upper() >= max_total;

        Ctx {
            instance,
            scores,
            branches,
            lots,
            n: instance.max_lot_types(),
            best_m,
            best_w,
            order,
            suffix_best,
            suffix_w,
            window_trivial,
        }
    }

    fn penalty(&self, used: usize) -> i64 {
        self.instance.lot_count_penalty(used).units()
    }

    /// Upper bound for the subtree of `node`, or `None` if it holds no
    /// feasible plan. Skips the window pass when the cheap bound already
    /// loses to `incumbent`.
    fn bound(&self, node: &Node, incumbent: Option<i64>) -> Option<i64> {
        let open = node.fixed.len() < self.n && node.depth < self.lots;
        let mut relaxed: i64 = 0;
        let mut total: u64 = 0;
        for b in 0..self.branches {
            let (mut v, mut w) = (node.in_best[b], node.in_w[b]);
            if open {
                let s = self.suffix_best[node.depth * self.branches + b];
                if s > v {
                    v = s;
                    w = self.suffix_w[node.depth * self.branches + b];
                }
            }
            if v == NONE {
                return None;
            }
            relaxed += v;
            total += w;
        }
        let pen = self.penalty(node.fixed.len().max(1));
        let cheap = relaxed - pen;
        if incumbent.is_some_and(|inc| cheap <= inc) {
            return Some(cheap);
        }
        let lower = self.instance.supply_lower();
        let upper = self.instance.supply_upper();
        if self.window_trivial || (total >= lower && total <= upper) {
            return Some(cheap);
        }
        let mut allowed = node.fixed.clone();
        if open {
            allowed.extend_from_slice(&self.order[node.depth..]);
        }
        let opts = Options::new(self.instance, self.scores, &allowed);
        value_within(&opts, lower, upper).map(|v| v - pen)
    }

    fn candidate(&self, active: &[usize]) -> Option<(Money, Plan)> {
        let mut sorted = active.to_vec();
        sorted.sort_unstable();
        let opts = Options::new(self.instance, self.scores, &sorted);
        let (value, plan) = best_within(&opts, self.instance.supply_lower(), self.instance.supply_upper())?;
        let obj = value - self.instance.lot_count_penalty(plan.used_lot_types().len());
        Some((obj, plan))
    }
}

struct Node {
    id: u64,
    fixed: Vec<usize>,
    depth: usize,
    in_best: Vec<i64>,
    in_w: Vec<u64>,
}

struct Entry {
    bound: i64,
    node: Node,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .cmp(&other.bound)
            .then_with(|| Reverse(self.node.id).cmp(&Reverse(other.node.id)))
    }
}

/// Proven optimum of the lot-type design problem for `scores`.
///
/// Best-bound-first search seeded with the greedy plan. Stops early with
/// status `Feasible` (or `Infeasible` when nothing was found) once the node
/// or time budget in `opts` runs out; the reported bound stays valid.
pub fn solve_exact(instance: &Instance, scores: &ScoreTable, opts: &SolverOptions) -> Result<SolveResult> {
    scores.check_dims(instance)?;
    let start = Instant::now();
    let ctx = Ctx::new(instance, scores);

    let seed = greedy::solve_greedy(instance, scores)?;
    let mut incumbent: Option<(Money, Plan)> = seed.objective.zip(seed.plan);
    let inc_units = |inc: &Option<(Money, Plan)>| inc.as_ref().map(|(m, _)| m.units());

    let mut next_id = 0u64;
    let mut make = |fixed: Vec<usize>, depth: usize, in_best: Vec<i64>, in_w: Vec<u64>| {
        let id = next_id;
        next_id += 1;
        Node {
            id,
            fixed,
            depth,
            in_best,
            in_w,
        }
    };

    let mut heap = BinaryHeap::new();
    let root = make(Vec::new(), 0, vec![NONE; ctx.branches], vec![0; ctx.branches]);
    if let Some(bound) = ctx.bound(&root, inc_units(&incumbent)) {
        heap.push(Entry { bound, node: root });
    }

    let mut nodes = 0u64;
    let mut trace = Vec::new();
    let mut exhausted = false;

    while let Some(entry) = heap.pop() {
        if inc_units(&incumbent).is_some_and(|inc| entry.bound <= inc) {
            continue;
        }
        if nodes >= opts.max_nodes || (nodes.is_multiple_of(256) && start.elapsed() >= opts.time_limit) {
            heap.push(entry);
            exhausted = true;
            break;
        }
        nodes += 1;
        let Entry { bound, node } = entry;
        if opts.trace {
            trace.push(TraceEvent {
                node: node.id,
                depth: node.depth,
                bound: Money::from_units(bound),
                incumbent: incumbent.as_ref().map(|(m, _)| *m),
            });
        }
        if node.fixed.len() >= ctx.n || node.depth >= ctx.lots {
            continue;
        }

        let lot = ctx.order[node.depth];
        let depth = node.depth + 1;

        // lot-type `lot` joins the active set
        let mut fixed = node.fixed.clone();
        fixed.push(lot);
        let mut in_best = node.in_best.clone();
        let mut in_w = node.in_w.clone();
        for b in 0..ctx.branches {
            let v = ctx.best_m[b * ctx.lots + lot];
            if v > in_best[b] {
                in_best[b] = v;
                in_w[b] = ctx.best_w[b * ctx.lots + lot];
            }
        }
        if let Some((obj, plan)) = ctx.candidate(&fixed) {
            let replace = match &incumbent {
                None => true,
                Some((io, ip)) => improves(obj, &plan, *io, ip),
            };
            if replace {
                incumbent = Some((obj, plan));
            }
        }
        if fixed.len() < ctx.n && depth < ctx.lots {
            let with = make(fixed, depth, in_best, in_w);
            if let Some(b) = ctx.bound(&with, inc_units(&incumbent)) {
                if inc_units(&incumbent).is_none_or(|inc| b > inc) {
                    heap.push(Entry { bound: b, node: with });
                }
            }
        }

        // lot-type `lot` left out
        if depth < ctx.lots {
            let without = make(node.fixed, depth, node.in_best, node.in_w);
            if let Some(b) = ctx.bound(&without, inc_units(&incumbent)) {
                if inc_units(&incumbent).is_none_or(|inc| b > inc) {
                    heap.push(Entry { bound: b, node: without });
                }
            }
        }
    }

    let open_bound = heap.peek().map(|e| e.bound);
    let (plan, objective) = match incumbent {
        Some((o, p)) => (Some(p), Some(o)),
        None => (None, None),
    };
    let bound = match (objective, exhausted) {
        (Some(o), false) => Some(o),
        (Some(o), true) => Some(Money::from_units(open_bound.map_or(o.units(), |b| b.max(o.units())))),
        (None, false) => None,
        (None, true) => open_bound.map(Money::from_units),
    };
    let status = match (objective, bound) {
        (Some(o), Some(b)) if o == b => Status::Optimal,
        (Some(_), _) => Status::Feasible,
        (None, _) => Status::Infeasible,
    };
    Ok(SolveResult {
        plan,
        objective,
        bound,
        nodes_explored: nodes,
        status,
        budget_exhausted: exhausted,
        trace,
    })
}
