//! Wilcoxon rank-sum test for a left shift of sample A relative to sample B.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest pooled sample size handled by the exact null distribution.
pub const EXACT_MAX_TOTAL: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ranking {
    /// Rank of each input value, in input order; ties get midranks.
    pub ranks: Vec<f64>,
    /// Sizes of groups of equal values (only groups of two or more).
    pub tie_groups: Vec<usize>,
}

/// Ascending ranks `1..=N` with midranks for ties.
pub fn rank(values: &[f64]) -> Result<Ranking> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::validation(format!("cannot rank non-finite value {v}")));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_groups = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = mid;
        }
        if j - i > 1 {
            tie_groups.push(j - i);
        }
        i = j;
    }
    Ok(Ranking { ranks, tie_groups })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Normal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WilcoxonResult {
    pub rank_sum_a: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// `P(W <= observed)` under the null hypothesis.
    pub p_value: f64,
    pub two_sided_p: f64,
    pub method: Method,
    pub tie_groups: Vec<usize>,
    /// Standardized statistic of the normal method.
    pub z: Option<f64>,
    pub level: f64,
    pub significant: bool,
    pub diagnostic: Option<String>,
}

/// Number of `n_a`-subsets of `{1, …, n_a + n_b}` with each rank sum,
/// indexed by the sum.
pub fn exact_rank_sum_counts(n_a: usize, n_b: usize) -> Vec<u128> {
    let total = n_a + n_b;
    let max_sum = n_a * (2 * total - n_a + 1) / 2;
    // counts[k][s]: k-subsets of the ranks seen so far summing to s
    let mut counts = vec![vec![0u128; max_sum + 1]; n_a + 1];
    counts[0][0] = 1;
    for r in 1..=total {
        for k in (1..=n_a.min(r)).rev() {
            let (lo, hi) = counts.split_at_mut(k);
            let prev = &lo[k - 1];
            let row = &mut hi[0];
            for s in (r..=max_sum).rev() {
                row[s] += prev[s - r];
            }
        }
    }
    counts.swap_remove(n_a)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact `P(W <= rank_sum)` and `P(W = rank_sum)` for tie-free data.
pub fn exact_left_tail(rank_sum: u64, n_a: usize, n_b: usize) -> (f64, f64) {
    let counts = exact_rank_sum_counts(n_a, n_b);
    let all = binomial(n_a + n_b, n_a) as f64;
    let w = rank_sum as usize;
    let below: u128 = counts.iter().take(w.saturating_add(1).min(counts.len())).sum();
    let at = counts.get(w).copied().unwrap_or(0);
    (below as f64 / all, at as f64 / all)
}

/// Mean and (tie-corrected) standard deviation of `W` under the null.
pub fn null_moments(n_a: usize, n_b: usize, tie_groups: &[usize]) -> (f64, f64) {
    let (a, b) = (n_a as f64, n_b as f64);
    let n = a + b;
    let mean = a * (n + 1.0) / 2.0;
    let ties: f64 = tie_groups.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let correction = if n > 1.0 { ties / (n * (n - 1.0)) } else { 0.0 };
    let var = a * b / 12.0 * ((n + 1.0) - correction);
    (mean, var.max(0.0).sqrt())
}

fn phi(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Normal approximation of `P(W <= rank_sum)` with a continuity correction
/// of one half (`W <= w` is read as `W < w + 1/2`). Returns `(z, p)`; `None` when the null
/// variance is zero.
pub fn normal_left_tail(
    rank_sum: f64,
    n_a: usize,
    n_b: usize,
    tie_groups: &[usize],
) -> Option<(f64, f64)> {
    let (mean, sd) = null_moments(n_a, n_b, tie_groups);
    if sd == 0.0 {
        return None;
    }
    let z = (rank_sum + 0.5 - mean) / sd;
    Some((z, phi(z)))
}


/// One-sided rank-sum test: is A shifted to the left of B?
pub fn wilcoxon_left_tail(a: &[f64], b: &[f64], level: f64) -> Result<WilcoxonResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::validation("both samples need at least one value"));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::validation(format!("significance level {level} outside [0, 1]")));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranking = rank(&pooled)?;
    let rank_sum_a: f64 = ranking.ranks[..a.len()].iter().sum();
    let (n_a, n_b) = (a.len(), b.len());

    let mut result = WilcoxonResult {
        rank_sum_a,
        n_a,
        n_b,
        p_value: 1.0,
        two_sided_p: 1.0,
        method: Method::Normal,
        tie_groups: ranking.tie_groups.clone(),
        z: None,
        level,
        significant: false,
        diagnostic: None,
    };

    if ranking.tie_groups.first() == Some(&(n_a + n_b)) {
        result.diagnostic = Some("all values identical; the test is degenerate".into());
        return Ok(result);
    }

    if ranking.tie_groups.is_empty() && n_a + n_b <= EXACT_MAX_TOTAL {
        let (p, at) = exact_left_tail(rank_sum_a.round() as u64, n_a, n_b);
        result.method = Method::Exact;
        result.p_value = p;
        result.two_sided_p = (2.0 * p.min(1.0 - p + at)).min(1.0);
    } else {
        let (mean, sd) = null_moments(n_a, n_b, &ranking.tie_groups);
        let z = (rank_sum_a + 0.5 - mean) / sd;
        let p = phi(z);
        let right = 1.0 - phi((rank_sum_a - 0.5 - mean) / sd);
        result.z = Some(z);
        result.p_value = p;
        result.two_sided_p = (2.0 * p.min(right)).min(1.0);
    }
    result.significant = result.p_value < level;
    Ok(result)
}
