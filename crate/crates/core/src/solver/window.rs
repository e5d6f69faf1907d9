//! Best assignment when every branch may only use a given set of lot-types
//! and the total supply must stay inside `[lower, upper]`.

use crate::model::{Choice, Instance, Plan};
use crate::money::Money;
use crate::recourse::ScoreTable;

const NONE: i64 = i64::MIN;

/// Per branch, the best option for each distinct piece count, in ascending
/// `(lot, mult)` order of the representative.
pub(crate) struct Options {
    per_branch: Vec<Vec<(u64, i64, Choice)>>,
}

impl Options {
    pub(crate) fn new(instance: &Instance, scores: &ScoreTable, allowed: &[usize]) -> Options {
        let mut per_branch = Vec::with_capacity(instance.branch_count());
        for b in 0..instance.branch_count() {
            let mut opts: Vec<(u64, i64, Choice)> = Vec::new();
            for &l in allowed {
                for m in 0..instance.multiplicities().len() {
                    let w = instance.pieces(l, m);
                    let v = scores.get(b, l, m).units();
                    let c = Choice::new(l, m);
                    match opts.iter_mut().find(|o| o.0 == w) {
                        Some(o) => {
                            if v > o.1 || (v == o.1 && c < o.2) {
                                *o = (w, v, c);
                            }
                        }
                        None => opts.push((w, v, c)),
                    }
                }
            }
            opts.sort_by_key(|o| o.2);
            per_branch.push(opts);
        }
        Options { per_branch }
    }

    #[cfg(test)]
    pub(crate) fn from_raw(per_branch: Vec<Vec<(u64, i64, Choice)>>) -> Options {
        Options { per_branch }
    }
}

/// Optimal value and lexicographically smallest optimal assignment, or
/// `None` if no assignment fits the window.
pub(crate) fn best_within(opts: &Options, lower: u64, upper: u64) -> Option<(Money, Plan)> {
    let branches = opts.per_branch.len();
    if opts.per_branch.iter().any(Vec::is_empty) {
        return None;
    }
    let max_total: u64 = opts.per_branch.iter().map(|o| o.iter().map(|x| x.0).max().unwrap()).sum();
    let min_total: u64 = opts.per_branch.iter().map(|o| o.iter().map(|x| x.0).min().unwrap()).sum();
    let hi = upper.min(max_total);
    if min_total > hi || lower > hi {
        return None;
    }

    // separable argmax first: optimal whenever it already fits
    let mut total = 0u64;
    let mut value = 0i64;
    let mut assignment = Vec::with_capacity(branches);
    for o in &opts.per_branch {
        let best = o.iter().map(|x| x.1).max().unwrap();
        let pick = o.iter().find(|x| x.1 == best).unwrap();
        total += pick.0;
        value += pick.1;
        assignment.push(pick.2);
    }
    if total >= lower && total <= hi {
        return Some((Money::from_units(value), Plan::new(assignment)));
    }

    let width = hi as usize + 1;
    // to_go[b][c]: best value of branches b.. given c pieces already placed
    let mut to_go = vec![vec![NONE; width]; branches + 1];
    for (c, slot) in to_go[branches].iter_mut().enumerate() {
        if c as u64 >= lower {
            *slot = 0;
        }
    }
    for b in (0..branches).rev() {
        let (head, tail) = to_go.split_at_mut(b + 1);
        let row = &mut head[b];
        let next = &tail[0];
        for (c, slot) in row.iter_mut().enumerate() {
            let mut best = NONE;
            for &(w, v, _) in &opts.per_branch[b] {
                let t = c + w as usize;
                if t >= width || next[t] == NONE {
                    continue;
                }
                best = best.max(v + next[t]);
            }
            *slot = best;
        }
    }
    if to_go[0][0] == NONE {
        return None;
    }
    let mut c = 0usize;
    let mut assignment = Vec::with_capacity(branches);
    for b in 0..branches {
        let target = to_go[b][c];
        let pick = opts.per_branch[b]
            .iter()
            .find(|&&(w, v, _)| {
                let t = c + w as usize;
                t < width && to_go[b + 1][t] != NONE && v + to_go[b + 1][t] == target
            })
            .expect("reconstruction follows an optimal path");
        assignment.push(pick.2);
        c += pick.0 as usize;
    }
    Some((Money::from_units(to_go[0][0]), Plan::new(assignment)))
}

/// Optimal value only, via a forward pass over reachable totals.
pub(crate) fn value_within(opts: &Options, lower: u64, upper: u64) -> Option<i64> {
    if opts.per_branch.iter().any(Vec::is_empty) {
        return None;
    }
    let max_total: u64 = opts.per_branch.iter().map(|o| o.iter().map(|x| x.0).max().unwrap()).sum();
    let hi = upper.min(max_total) as usize;
    if lower as usize > hi {
        return None;
    }
    let mut cur = vec![NONE; hi + 1];
    cur[0] = 0;
    let mut reach = 0usize;
    for o in &opts.per_branch {
        let mut next = vec![NONE; hi + 1];
        let wmax = o.iter().map(|x| x.0 as usize).max().unwrap();
        for (c, &base) in cur.iter().enumerate().take(reach.min(hi) + 1) {
            if base == NONE {
                continue;
            }
            for &(w, v, _) in o {
                let t = c + w as usize;
                if t <= hi && base + v > next[t] {
                    next[t] = base + v;
                }
            }
        }
        reach += wmax;
        cur = next;
    }
    cur[lower as usize..].iter().copied().filter(|&v| v != NONE).max()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enumerate(opts: &Options, lower: u64, upper: u64) -> Option<(i64, Vec<Choice>)> {
        let mut best: Option<(i64, Vec<Choice>)> = None;
        let mut idx = vec![0usize; opts.per_branch.len()];
        loop {
            let w: u64 = idx.iter().zip(&opts.per_branch).map(|(&i, o)| o[i].0).sum();
            let v: i64 = idx.iter().zip(&opts.per_branch).map(|(&i, o)| o[i].1).sum();
            let a: Vec<Choice> = idx.iter().zip(&opts.per_branch).map(|(&i, o)| o[i].2).collect();
            if w >= lower && w <= upper {
                let replace = match &best {
                    None => true,
                    Some((bv, ba)) => v > *bv || (v == *bv && a < *ba),
                };
                if replace {
                    best = Some((v, a));
                }
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < opts.per_branch[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let branches = rng.random_range(1..=4);
            let per_branch: Vec<Vec<(u64, i64, Choice)>> = (0..branches)
                .map(|_| {
                    let k = rng.random_range(1..=4);
                    let mut ws: Vec<u64> = (0..k).map(|_| rng.random_range(1..8)).collect();
                    ws.sort();
                    ws.dedup();
                    ws.iter()
                        .enumerate()
                        .map(|(i, &w)| (w, rng.random_range(-5..6), Choice::new(i, 0)))
                        .collect()
                })
                .collect();
            let opts = Options::from_raw(per_branch);
            let lower = rng.random_range(0..15);
            let upper = lower + rng.random_range(0..10);
            let want = enumerate(&opts, lower, upper);
            let got = best_within(&opts, lower, upper).map(|(v, p)| (v.units(), p.assignment().to_vec()));
            assert_eq!(got, want);
            assert_eq!(value_within(&opts, lower, upper), want.map(|w| w.0));
        }
    }
}
