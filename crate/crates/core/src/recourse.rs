//! Random demand, the markdown (price-cut) recourse and its sample average.
//!
//! Given a branch's per-size stock and one demand realization, the recourse
//! picks a markdown schedule: one price level per day, never moving back up
//! the ladder, shared by all sizes of the product in that branch. Demand at
//! level `k` is the full-price demand scaled by `γ_k` and rounded half up;
//! each day sells `min(stock, demand)` per size. Leftovers fetch the salvage
//! price at the horizon.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Plan};
use crate::money::Money;

/// Multipliers are stored as integer counts of 1/10000.
const GAMMA_SCALE: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LadderRepr", into = "LadderRepr")]
pub struct PriceLadder {
    prices: Vec<Money>,
    multipliers: Vec<u64>,
    salvage: Money,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LadderRepr {
    prices: Vec<Money>,
    multipliers: Vec<f64>,
    #[serde(default)]
    salvage: Money,
}

impl TryFrom<LadderRepr> for PriceLadder {
    type Error = Error;
    fn try_from(r: LadderRepr) -> Result<Self> {
        PriceLadder::new(r.prices, &r.multipliers, r.salvage)
    }
}

impl From<PriceLadder> for LadderRepr {
    fn from(l: PriceLadder) -> Self {
        LadderRepr {
            multipliers: l.multipliers_f64(),
            prices: l.prices,
            salvage: l.salvage,
        }
    }
}

impl PriceLadder {
    /// `prices` strictly decreasing, `multipliers` strictly increasing from
    /// exactly 1 (four decimal places are kept), `0 <= salvage <= last price`.
    pub fn new(prices: Vec<Money>, multipliers: &[f64], salvage: Money) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::validation("price ladder needs at least one level"));
        }
        if prices.len() != multipliers.len() {
            return Err(Error::validation(format!(
                "{} prices but {} demand multipliers",
                prices.len(),
                multipliers.len()
            )));
        }
        if prices.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::validation("ladder prices must be strictly decreasing"));
        }
        if *prices.last().unwrap() <= Money::ZERO {
            return Err(Error::validation("ladder prices must be positive"));
        }
        let mut scaled = Vec::with_capacity(multipliers.len());
        for &g in multipliers {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::validation(format!("invalid demand multiplier {g}")));
            }
            scaled.push((g * GAMMA_SCALE as f64).round() as u64);
        }
        if scaled[0] != GAMMA_SCALE {
            return Err(Error::validation("the full-price multiplier must be 1"));
        }
        if scaled.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "demand multipliers must be strictly increasing",
            ));
        }
        if salvage < Money::ZERO || salvage > *prices.last().unwrap() {
            return Err(Error::validation(
                "salvage must lie between zero and the lowest ladder price",
            ));
        }
        Ok(PriceLadder {
            prices,
            multipliers: scaled,
            salvage,
        })
    }

    /// Two levels: full price and a 30% markdown with 1.5× demand, no salvage.
    pub fn two_level(full_price: Money) -> Self {
        let cut = Money::from_units(full_price.units() * 7 / 10);
        PriceLadder::new(vec![full_price, cut], &[1.0, 1.5], Money::ZERO)
            .expect("default ladder is valid for positive prices")
    }

    pub fn prices(&self) -> &[Money] {
        &self.prices
    }

    pub fn multipliers_f64(&self) -> Vec<f64> {
        self.multipliers
            .iter()
            .map(|&g| g as f64 / GAMMA_SCALE as f64)
            .collect()
    }

    pub fn salvage(&self) -> Money {
        self.salvage
    }

    /// Number of levels, `K + 1`.
    pub fn levels(&self) -> usize {
        self.prices.len()
    }

    /// Demand at `level` for `base` pieces of full-price demand.
    pub fn uplifted(&self, level: usize, base: u32) -> u64 {
        (self.multipliers[level] * base as u64 + GAMMA_SCALE / 2) / GAMMA_SCALE
    }
}

/// One realization of demand: `branch × size × day` pieces at full price.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandScenario {
    branches: usize,
    sizes: usize,
    horizon: usize,
    demand: Vec<u32>,
}

impl DemandScenario {
    pub fn new(branches: usize, sizes: usize, horizon: usize, demand: Vec<u32>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::validation("scenario horizon must be at least one day"));
        }
        if demand.len() != branches * sizes * horizon {
            return Err(Error::structural(format!(
                "demand tensor has {} entries, expected {branches}×{sizes}×{horizon}",
                demand.len()
            )));
        }
        Ok(DemandScenario {
            branches,
            sizes,
            horizon,
            demand,
        })
    }

    pub fn zeros(branches: usize, sizes: usize, horizon: usize) -> Result<Self> {
        DemandScenario::new(branches, sizes, horizon, vec![0; branches * sizes * horizon])
    }

    /// Builds from nested `branch → size → day` vectors.
    pub fn from_nested(nested: &[Vec<Vec<u32>>]) -> Result<Self> {
        let branches = nested.len();
        let sizes = nested.first().map_or(0, Vec::len);
        let horizon = nested.first().and_then(|b| b.first()).map_or(0, Vec::len);
        let mut demand = Vec::with_capacity(branches * sizes * horizon);
        for b in nested {
            if b.len() != sizes {
                return Err(Error::structural("ragged size dimension in demand"));
            }
            for s in b {
                if s.len() != horizon {
                    return Err(Error::structural("ragged day dimension in demand"));
                }
                demand.extend_from_slice(s);
            }
        }
        DemandScenario::new(branches, sizes, horizon, demand)
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn sizes(&self) -> usize {
        self.sizes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Day index is zero-based here.
    pub fn get(&self, branch: usize, size: usize, day: usize) -> u32 {
        self.demand[(branch * self.sizes + size) * self.horizon + day]
    }

    pub fn set(&mut self, branch: usize, size: usize, day: usize, value: u32) {
        self.demand[(branch * self.sizes + size) * self.horizon + day] = value;
    }

    pub fn branch(&self, branch: usize) -> BranchDemand<'_> {
        let start = branch * self.sizes * self.horizon;
        BranchDemand {
            sizes: self.sizes,
            horizon: self.horizon,
            data: &self.demand[start..start + self.sizes * self.horizon],
        }
    }

    pub fn check_dims(&self, instance: &Instance) -> Result<()> {
        if self.branches != instance.branch_count() || self.sizes != instance.sizes().len() {
            return Err(Error::structural(format!(
                "scenario is {}×{} (branch×size), instance is {}×{}",
                self.branches,
                self.sizes,
                instance.branch_count(),
                instance.sizes().len()
            )));
        }
        Ok(())
    }
}

/// `size × day` demand of one branch.
#[derive(Clone, Copy, Debug)]
pub struct BranchDemand<'a> {
    sizes: usize,
    horizon: usize,
    data: &'a [u32],
}

impl<'a> BranchDemand<'a> {
    pub fn new(sizes: usize, horizon: usize, data: &'a [u32]) -> Result<Self> {
        if horizon == 0 || data.len() != sizes * horizon {
            return Err(Error::structural(format!(
                "branch demand needs {sizes}×{horizon} entries with a positive horizon, got {}",
                data.len()
            )));
        }
        Ok(BranchDemand {
            sizes,
            horizon,
            data,
        })
    }

    pub fn sizes(&self) -> usize {
        self.sizes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, size: usize, day: usize) -> u32 {
        self.data[size * self.horizon + day]
    }
}

/// Weighted scenarios approximating the demand distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    scenarios: Vec<DemandScenario>,
    weights: Vec<f64>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<DemandScenario>, weights: Vec<f64>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::validation("scenario set is empty"));
        }
        if scenarios.len() != weights.len() {
            return Err(Error::structural("one weight per scenario required"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::validation("scenario weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "scenario weights sum to {total}, not 1"
            )));
        }
        let first = &scenarios[0];
        if scenarios.iter().any(|s| {
            s.branches != first.branches || s.sizes != first.sizes || s.horizon != first.horizon
        }) {
            return Err(Error::structural("scenarios differ in dimensions"));
        }
        Ok(ScenarioSet { scenarios, weights })
    }

    pub fn uniform(scenarios: Vec<DemandScenario>) -> Result<Self> {
        let w = 1.0 / scenarios.len().max(1) as f64;
        let weights = vec![w; scenarios.len()];
        ScenarioSet::new(scenarios, weights)
    }

    pub fn scenarios(&self) -> &[DemandScenario] {
        &self.scenarios
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn check_dims(&self, instance: &Instance) -> Result<()> {
        self.scenarios[0].check_dims(instance)
    }
}

/// Optimal markdown outcome for one branch and one scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchRecourse {
    pub revenue: Money,
    /// Ladder level used on each day (zero-based days).
    pub schedule: Vec<usize>,
    /// Pieces sold, `size × day`.
    pub sales: Vec<Vec<u64>>,
    pub leftover: Vec<u64>,
}

/// Sales and revenue of following `schedule`.
pub fn replay(
    supply: &[u64],
    demand: BranchDemand<'_>,
    ladder: &PriceLadder,
    schedule: &[usize],
) -> Result<BranchRecourse> {
    check_branch_inputs(supply, demand)?;
    if schedule.len() != demand.horizon() {
        return Err(Error::structural("schedule length differs from horizon"));
    }
    if schedule.iter().any(|&k| k >= ladder.levels())
        || schedule.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::validation(
            "schedule must stay on the ladder and never raise the price",
        ));
    }
    let mut stock = supply.to_vec();
    let mut sales = vec![vec![0u64; demand.horizon()]; supply.len()];
    let mut revenue = Money::ZERO;
    for (day, &level) in schedule.iter().enumerate() {
        for (s, left) in stock.iter_mut().enumerate() {
            let sold = (*left).min(ladder.uplifted(level, demand.get(s, day)));
            *left -= sold;
            sales[s][day] = sold;
            revenue += ladder.prices[level] * sold;
        }
    }
    revenue += ladder.salvage * stock.iter().sum::<u64>();
    Ok(BranchRecourse {
        revenue,
        schedule: schedule.to_vec(),
        sales,
        leftover: stock,
    })
}

fn check_branch_inputs(supply: &[u64], demand: BranchDemand<'_>) -> Result<()> {
    if supply.len() != demand.sizes() {
        return Err(Error::structural(format!(
            "supply has {} sizes, demand has {}",
            supply.len(),
            demand.sizes()
        )));
    }
    Ok(())
}

struct DpState {
    revenue: Money,
    schedule: Vec<u8>,
}

/// Revenue-maximizing markdown schedule for one branch.
///
/// Forward dynamic program over days. A state is the current ladder level
/// plus the remaining stock per size; states reached by different schedule
/// prefixes merge when both coincide, keeping the higher revenue (ties go to
/// the lexicographically smaller schedule, i.e. later price cuts). The number
/// of live states per day is bounded by the number of monotone prefixes.
pub fn branch_recourse(
    supply: &[u64],
    demand: BranchDemand<'_>,
    ladder: &PriceLadder,
) -> Result<BranchRecourse> {
    check_branch_inputs(supply, demand)?;
    let horizon = demand.horizon();
    let levels = ladder.levels();

    if supply.iter().all(|&s| s == 0) {
        return replay(supply, demand, ladder, &vec![0; horizon]);
    }

    let mut states: HashMap<(u8, Vec<u64>), DpState> = HashMap::new();
    states.insert(
        (0, supply.to_vec()),
        DpState {
            revenue: Money::ZERO,
            schedule: Vec::with_capacity(horizon),
        },
    );

    for day in 0..horizon {
        let mut next: HashMap<(u8, Vec<u64>), DpState> = HashMap::with_capacity(states.len() * 2);
        for ((level, stock), state) in states {
            for to in level as usize..levels {
                let mut left = stock.clone();
                let mut revenue = state.revenue;
                for (s, l) in left.iter_mut().enumerate() {
                    let sold = (*l).min(ladder.uplifted(to, demand.get(s, day)));
                    *l -= sold;
                    revenue += ladder.prices[to] * sold;
                }
                let mut schedule = Vec::with_capacity(horizon);
                schedule.extend_from_slice(&state.schedule);
                schedule.push(to as u8);
                let cand = DpState { revenue, schedule };
                match next.entry((to as u8, left)) {
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(cand);
                    }
                    std::collections::hash_map::Entry::Occupied(mut o) => {
                        if better(&cand, o.get()) {
                            o.insert(cand);
                        }
                    }
                }
            }
        }
        states = next;
    }

    let best = states
        .into_iter()
        .map(|((_, stock), mut st)| {
            st.revenue += ladder.salvage * stock.iter().sum::<u64>();
            st
        })
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one state survives");

    let schedule: Vec<usize> = best.schedule.iter().map(|&k| k as usize).collect();
    let out = replay(supply, demand, ladder, &schedule)?;
    debug_assert_eq!(out.revenue, best.revenue);
    Ok(out)
}

fn better(a: &DpState, b: &DpState) -> bool {
    a.revenue > b.revenue || (a.revenue == b.revenue && a.schedule < b.schedule)
}

/// Weighted mean of the branch recourse revenue, rounded to the money grid.
pub fn expected_branch_recourse(
    supply: &[u64],
    set: &ScenarioSet,
    branch: usize,
    ladder: &PriceLadder,
) -> Result<Money> {
    let mut acc = 0.0f64;
    for (scenario, &w) in set.scenarios.iter().zip(&set.weights) {
        if branch >= scenario.branches() {
            return Err(Error::structural(format!("scenario has no branch {branch}")));
        }
        let r = branch_recourse(supply, scenario.branch(branch), ladder)?;
        acc += w * r.revenue.units() as f64;
    }
    Ok(Money::from_units(acc.round() as i64))
}

/// Sample-average recourse value of a plan: the per-branch expected revenue
/// (each rounded to the money grid) summed over branches.
pub fn expected_recourse(
    plan: &Plan,
    instance: &Instance,
    set: &ScenarioSet,
    ladder: &PriceLadder,
) -> Result<Money> {
    set.check_dims(instance)?;
    let rows = crate::model::per_size_supply(plan, instance)?;
    rows.iter()
        .enumerate()
        .map(|(b, row)| expected_branch_recourse(row, set, b, ladder))
        .sum()
}

pub const DEFAULT_SCORE_CAP: usize = 50_000_000;

/// `score(b, l, m) = −c_{b,l,m} + E[Q_b(m·l)]`, flattened branch-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScoreTable {
    branches: usize,
    lots: usize,
    mults: usize,
    data: Vec<Money>,
}

impl ScoreTable {
    pub fn from_fn(
        branches: usize,
        lots: usize,
        mults: usize,
        mut f: impl FnMut(usize, usize, usize) -> Money,
    ) -> Self {
        let mut data = Vec::with_capacity(branches * lots * mults);
        for b in 0..branches {
            for l in 0..lots {
                for m in 0..mults {
                    data.push(f(b, l, m));
                }
            }
        }
        ScoreTable {
            branches,
            lots,
            mults,
            data,
        }
    }

    pub fn get(&self, branch: usize, lot: usize, mult: usize) -> Money {
        self.data[(branch * self.lots + lot) * self.mults + mult]
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn lots(&self) -> usize {
        self.lots
    }

    pub fn mults(&self) -> usize {
        self.mults
    }

    pub fn check_dims(&self, instance: &Instance) -> Result<()> {
        if self.branches != instance.branch_count()
            || self.lots != instance.lot_universe().len()
            || self.mults != instance.multiplicities().len()
        {
            return Err(Error::structural("score table does not match the instance"));
        }
        Ok(())
    }
}

pub fn score_table(
    instance: &Instance,
    set: &ScenarioSet,
    ladder: &PriceLadder,
) -> Result<ScoreTable> {
    score_table_capped(instance, set, ladder, DEFAULT_SCORE_CAP)
}

pub fn score_table_capped(
    instance: &Instance,
    set: &ScenarioSet,
    ladder: &PriceLadder,
    cap: usize,
) -> Result<ScoreTable> {
    set.check_dims(instance)?;
    let branches = instance.branch_count();
    let lots = instance.lot_universe().len();
    let mults = instance.multiplicities().len();
    let cells = branches as u128 * lots as u128 * mults as u128;
    if cells > cap as u128 {
        return Err(Error::Capacity {
            what: "score table entries",
            count: cells,
            limit: cap as u128,
        });
    }
    let data = (0..cells as usize)
        .into_par_iter()
        .map(|idx| {
            let m = idx % mults;
            let l = (idx / mults) % lots;
            let b = idx / (mults * lots);
            let k = instance.multiplicities()[m] as u64;
            let row: Vec<u64> = instance.lot_universe()[l]
                .components()
                .iter()
                .map(|&c| k * c as u64)
                .collect();
            let q = expected_branch_recourse(&row, set, b, ladder)?;
            Ok(q - instance.delivery_cost(b, l, m))
        })
        .collect::<Result<Vec<Money>>>()?;
    Ok(ScoreTable {
        branches,
        lots,
        mults,
        data,
    })
}

/// Parametric demand: negative-binomial daily demand per branch and size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandModel {
    pub horizon: usize,
    /// Mean full-price demand per day, `branch × size`.
    pub means: Vec<Vec<f64>>,
    /// Negative-binomial size parameter `r`; variance is `μ + μ²/r`.
    pub dispersion: f64,
    /// Per-day factor on the mean; empty means flat.
    #[serde(default)]
    pub seasonality: Vec<f64>,
}

impl DemandModel {
    /// Mean of branch `b`, size `s` is `branch_totals[b] · size_shares[s]`.
    pub fn from_shares(
        horizon: usize,
        branch_totals: &[f64],
        size_shares: &[f64],
        dispersion: f64,
    ) -> Self {
        DemandModel {
            horizon,
            means: branch_totals
                .iter()
                .map(|&t| size_shares.iter().map(|&s| t * s).collect())
                .collect(),
            dispersion,
            seasonality: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::validation("demand horizon must be positive"));
        }
        if !(self.dispersion.is_finite() && self.dispersion > 0.0) {
            return Err(Error::validation(format!(
                "dispersion must be positive, got {}",
                self.dispersion
            )));
        }
        let sizes = self.means.first().map_or(0, Vec::len);
        if self.means.is_empty() || sizes == 0 {
            return Err(Error::validation("demand means must be a non-empty matrix"));
        }
        for row in &self.means {
            if row.len() != sizes {
                return Err(Error::structural("ragged demand mean matrix"));
            }
            if let Some(bad) = row.iter().find(|m| !m.is_finite() || **m < 0.0) {
                return Err(Error::validation(format!("invalid demand mean {bad}")));
            }
        }
        if !self.seasonality.is_empty() {
            if self.seasonality.len() != self.horizon {
                return Err(Error::structural("seasonality needs one factor per day"));
            }
            if self.seasonality.iter().any(|f| !f.is_finite() || *f < 0.0) {
                return Err(Error::validation("seasonality factors must be non-negative"));
            }
        }
        Ok(())
    }

    fn season(&self, day: usize) -> f64 {
        self.seasonality.get(day).copied().unwrap_or(1.0)
    }

    /// One scenario drawn from `rng`.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DemandScenario> {
        self.validate()?;
        let branches = self.means.len();
        let sizes = self.means[0].len();
        let mut demand = Vec::with_capacity(branches * sizes * self.horizon);
        for row in &self.means {
            for &mu in row {
                for day in 0..self.horizon {
                    demand.push(negative_binomial(mu * self.season(day), self.dispersion, rng)?);
                }
            }
        }
        DemandScenario::new(branches, sizes, self.horizon, demand)
    }
}

/// Gamma–Poisson mixture with mean `mean` and size `r`.
fn negative_binomial(mean: f64, r: f64, rng: &mut ChaCha8Rng) -> Result<u32> {
    if mean == 0.0 {
        return Ok(0);
    }
    let gamma = Gamma::new(r, mean / r).map_err(|e| Error::validation(e.to_string()))?;
    let lambda = gamma.sample(rng);
    if lambda <= 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(lambda).map_err(|e| Error::validation(e.to_string()))?;
    Ok(poisson.sample(rng).min(u32::MAX as f64) as u32)
}

/// `count` independent, equally weighted scenarios.
pub fn generate_scenarios(model: &DemandModel, count: usize, seed: u64) -> Result<ScenarioSet> {
    if count == 0 {
        return Err(Error::validation("scenario count must be at least 1"));
    }
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenarios = (0..count)
        .map(|_| model.draw(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    ScenarioSet::uniform(scenarios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::instance;
    use crate::model::{Choice, Plan};
    use proptest::prelude::*;
    use rand::Rng;

    fn ladder(prices: &[i64], gammas: &[f64], salvage: i64) -> PriceLadder {
        PriceLadder::new(
            prices.iter().map(|&p| Money::from_int(p)).collect(),
            gammas,
            Money::from_int(salvage),
        )
        .unwrap()
    }

    /// Independent oracle: try every monotone schedule with a separate
    /// simulator.
    fn enumerate_best(supply: &[u64], demand: &[Vec<u32>], ladder: &PriceLadder) -> i64 {
        let horizon = demand[0].len();
        let levels = ladder.levels();
        let prices: Vec<i64> = ladder.prices().iter().map(|p| p.units()).collect();
        let gammas = ladder.multipliers_f64();
        let mut best = i64::MIN;
        let total = levels.pow(horizon as u32);
        for code in 0..total {
            let mut sched = Vec::with_capacity(horizon);
            let mut c = code;
            for _ in 0..horizon {
                sched.push(c % levels);
                c /= levels;
            }
            if sched.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let mut stock = supply.to_vec();
            let mut rev = 0i64;
            for (d, &k) in sched.iter().enumerate() {
                for s in 0..stock.len() {
                    let want = (gammas[k] * demand[s][d] as f64 + 0.5 + 1e-9).floor() as u64;
                    let sold = stock[s].min(want);
                    stock[s] -= sold;
                    rev += sold as i64 * prices[k];
                }
            }
            rev += stock.iter().sum::<u64>() as i64 * ladder.salvage().units();
            best = best.max(rev);
        }
        best
    }

    fn flat(demand: &[Vec<u32>]) -> Vec<u32> {
        demand.iter().flatten().copied().collect()
    }

    fn run(supply: &[u64], demand: &[Vec<u32>], ladder: &PriceLadder) -> BranchRecourse {
        let data = flat(demand);
        let view = BranchDemand::new(demand.len(), demand[0].len(), &data).unwrap();
        branch_recourse(supply, view, ladder).unwrap()
    }

    #[test]
    fn zero_supply_earns_nothing() {
        let l = ladder(&[10, 7], &[1.0, 1.5], 0);
        let r = run(&[0, 0, 0, 0], &[vec![3, 4], vec![1, 1], vec![0, 9], vec![2, 2]], &l);
        assert_eq!(r.revenue, Money::ZERO);
        assert!(r.sales.iter().flatten().all(|&s| s == 0));
    }

    #[test]
    fn zero_demand_earns_nothing() {
        let l = ladder(&[10, 5], &[1.0, 2.0], 0);
        assert_eq!(run(&[2], &[vec![0, 0]], &l).revenue, Money::ZERO);
    }

    #[test]
    fn two_day_markdown_example() {
        let l = ladder(&[10, 5], &[1.0, 2.0], 0);
        let demand = [vec![0, 1]];
        let r = run(&[2], &demand, &l);
        assert_eq!(enumerate_best(&[2], &demand, &l), Money::from_int(10).units());
        assert_eq!(r.revenue, Money::from_int(10));
        // full price on day 2 and a markdown on day 2 both earn 10; the
        // later price cut wins the tie
        assert_eq!(r.schedule, vec![0, 0]);
    }

    #[test]
    fn markdown_beats_full_price_when_it_clears_stock() {
        let l = ladder(&[10, 6], &[1.0, 3.0], 0);
        let demand = [vec![1, 1, 1]];
        // full price the whole time earns 30; cutting on day 2 clears all 6 pieces for 40
        let r = run(&[6], &demand, &l);
        assert_eq!(r.revenue.units(), enumerate_best(&[6], &demand, &l));
        assert_eq!(r.revenue, Money::from_int(10 + 5 * 6));
        assert_eq!(r.schedule, vec![0, 1, 1]);
    }

    #[test]
    fn half_up_rounding_of_uplift() {
        let l = ladder(&[10, 7], &[1.0, 1.5], 0);
        assert_eq!(l.uplifted(1, 3), 5);
        assert_eq!(l.uplifted(1, 1), 2);
        assert_eq!(l.uplifted(0, 7), 7);
        let l = ladder(&[10, 7], &[1.0, 1.15], 0);
        assert_eq!(l.uplifted(1, 10), 12);
    }

    #[test]
    fn ladder_validation() {
        let p = |v: &[i64]| v.iter().map(|&x| Money::from_int(x)).collect::<Vec<_>>();
        assert!(PriceLadder::new(p(&[10, 10]), &[1.0, 1.5], Money::ZERO).is_err());
        assert!(PriceLadder::new(p(&[10, 5]), &[1.0, 0.9], Money::ZERO).is_err());
        assert!(PriceLadder::new(p(&[10, 5]), &[1.1, 1.5], Money::ZERO).is_err());
        assert!(PriceLadder::new(p(&[10, 5]), &[1.0], Money::ZERO).is_err());
        assert!(PriceLadder::new(p(&[10, 5]), &[1.0, 2.0], Money::from_int(6)).is_err());
        let d = PriceLadder::two_level(Money::from_int(20));
        assert_eq!(d.prices()[1], Money::from_int(14));
        assert_eq!(d.multipliers_f64(), vec![1.0, 1.5]);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let l = ladder(&[10], &[1.0], 0);
        let data = [1u32, 2];
        let view = BranchDemand::new(1, 2, &data).unwrap();
        assert!(matches!(branch_recourse(&[1, 1], view, &l), Err(Error::Structural(_))));
        assert!(BranchDemand::new(2, 2, &data).is_err());
    }

    #[test]
    fn matches_enumeration_on_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let horizon = rng.random_range(1..=6);
            let levels = rng.random_range(1..=3);
            let sizes = rng.random_range(1..=3);
            let mut prices: Vec<i64> = (0..levels).map(|k| 20 - 5 * k as i64).collect();
            prices[0] += rng.random_range(0..5);
            let gammas: Vec<f64> = (0..levels).map(|k| 1.0 + 0.5 * k as f64).collect();
            let l = ladder(&prices, &gammas, rng.random_range(0..=2));
            let supply: Vec<u64> = (0..sizes).map(|_| rng.random_range(0..8)).collect();
            let demand: Vec<Vec<u32>> = (0..sizes)
                .map(|_| (0..horizon).map(|_| rng.random_range(0..4)).collect())
                .collect();
            assert_eq!(run(&supply, &demand, &l).revenue.units(), enumerate_best(&supply, &demand, &l));
        }
    }

    fn two_scenarios(first: u32, second: u32) -> (crate::model::Instance, ScenarioSet, PriceLadder) {
        let inst = instance(1, &[&[1]], &[1], (0, u64::MAX), 1);
        let a = DemandScenario::new(1, 1, 1, vec![first]).unwrap();
        let b = DemandScenario::new(1, 1, 1, vec![second]).unwrap();
        let set = ScenarioSet::new(vec![a, b], vec![0.25, 0.75]).unwrap();
        (inst, set, ladder(&[10], &[1.0], 0))
    }

    #[test]
    fn expectation_is_weighted_mean() {
        // stock 3 of one size: revenues 10 and 30
        let inst = instance(1, &[&[1]], &[3], (0, u64::MAX), 1);
        let (_, set, l) = two_scenarios(1, 3);
        let plan = Plan::uniform(1, Choice::new(0, 0));
        assert_eq!(expected_recourse(&plan, &inst, &set, &l).unwrap(), Money::from_int(25));

        let (inst, _, l) = two_scenarios(0, 0);
        let s = DemandScenario::new(1, 1, 1, vec![1]).unwrap();
        let single = ScenarioSet::uniform(vec![s.clone()]).unwrap();
        let double = ScenarioSet::new(vec![s.clone(), s], vec![0.5, 0.5]).unwrap();
        let plan = Plan::uniform(1, Choice::new(0, 0));
        assert_eq!(
            expected_recourse(&plan, &inst, &single, &l).unwrap(),
            expected_recourse(&plan, &inst, &double, &l).unwrap()
        );
    }

    #[test]
    fn single_scenario_expectation_sums_branches() {
        let inst = instance(2, &[&[1, 1]], &[2], (0, u64::MAX), 1);
        let sc = DemandScenario::from_nested(&[vec![vec![1], vec![5]], vec![vec![3], vec![0]]]).unwrap();
        let set = ScenarioSet::uniform(vec![sc.clone()]).unwrap();
        let l = ladder(&[10], &[1.0], 0);
        let plan = Plan::uniform(2, Choice::new(0, 0));
        let direct: Money = (0..2)
            .map(|b| branch_recourse(&[2, 2], sc.branch(b), &l).unwrap().revenue)
            .sum();
        assert_eq!(direct, Money::from_int(30 + 20));
        assert_eq!(expected_recourse(&plan, &inst, &set, &l).unwrap(), direct);
    }

    #[test]
    fn score_table_examples() {
        use crate::model::{InstanceParts, LotType, ProcurementCost, SizeSet};
        use std::sync::Arc;

        let zero = DemandScenario::zeros(2, 2, 3).unwrap();
        let set = ScenarioSet::uniform(vec![zero]).unwrap();
        let mut parts = instance(2, &[&[1, 2], &[3, 0]], &[1, 4], (0, u64::MAX), 1).to_parts();
        parts.cost_model = Arc::new(ProcurementCost {
            per_piece: Money::from_units(25_000),
            per_delivery: Money::ZERO,
        });
        let inst = crate::model::Instance::new(parts).unwrap();
        let table = score_table(&inst, &set, &ladder(&[10], &[1.0], 0)).unwrap();
        for b in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    let pieces = inst.pieces(l, m);
                    assert_eq!(table.get(b, l, m), -(Money::from_units(25_000) * pieces));
                }
            }
        }

        let inst = crate::model::Instance::new(InstanceParts {
            sizes: SizeSet::new(["A", "B"]).unwrap(),
            branches: vec!["only".into()],
            lot_universe: vec![LotType::new(vec![1, 1]).unwrap()],
            multiplicities: vec![1],
            supply_lower: 0,
            supply_upper: u64::MAX,
            max_lot_types: 1,
            lot_count_costs: vec![Money::ZERO],
            cost_model: Arc::new(ProcurementCost {
                per_piece: Money::from_int(2),
                per_delivery: Money::ZERO,
            }),
        })
        .unwrap();
        let sc = DemandScenario::from_nested(&[vec![vec![1], vec![0]]]).unwrap();
        let set = ScenarioSet::uniform(vec![sc.clone(), sc]).unwrap();
        let table = score_table(&inst, &set, &ladder(&[10], &[1.0], 0)).unwrap();
        assert_eq!(table.get(0, 0, 0), Money::from_int(6));

        assert!(matches!(
            score_table_capped(&inst, &set, &ladder(&[10], &[1.0], 0), 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn scenario_generation() {
        let zero = DemandModel::from_shares(5, &[0.0, 0.0], &[0.5, 0.5], 2.0);
        let set = generate_scenarios(&zero, 1, 3).unwrap();
        assert!(set.scenarios()[0].demand.iter().all(|&d| d == 0));

        let model = DemandModel::from_shares(7, &[4.0, 2.0], &[0.1, 0.2, 0.3, 0.4], 1.5);
        assert_eq!(generate_scenarios(&model, 4, 99).unwrap(), generate_scenarios(&model, 4, 99).unwrap());
        assert_ne!(generate_scenarios(&model, 4, 99).unwrap(), generate_scenarios(&model, 4, 100).unwrap());

        let bad = DemandModel::from_shares(3, &[-1.0], &[1.0], 2.0);
        assert!(generate_scenarios(&bad, 1, 0).is_err());
        let bad = DemandModel::from_shares(3, &[1.0], &[1.0], 0.0);
        assert!(generate_scenarios(&bad, 1, 0).is_err());
        assert!(generate_scenarios(&model, 0, 0).is_err());
    }

    #[test]
    fn negative_binomial_mean_converges() {
        let model = DemandModel::from_shares(1, &[3.0], &[1.0], 2.0);
        let n = 10_000;
        let set = generate_scenarios(&model, n, 2024).unwrap();
        let mean = set.scenarios().iter().map(|s| s.get(0, 0, 0) as f64).sum::<f64>() / n as f64;
        // variance of NB(mean 3, r 2) is 3 + 9/2
        let se = (7.5f64 / n as f64).sqrt();
        assert!((mean - 3.0).abs() < 3.0 * se, "mean {mean}");
    }

    proptest! {
        #[test]
        fn revenue_monotone_in_supply_and_bounded(
            supply in proptest::collection::vec(0u64..6, 2),
            bump in 0usize..2,
            demand in proptest::collection::vec(0u32..5, 8),
            salvage in 0i64..3,
        ) {
            let l = ladder(&[9, 6, 3], &[1.0, 1.5, 2.5], salvage);
            let view = BranchDemand::new(2, 4, &demand).unwrap();
            let base = branch_recourse(&supply, view, &l).unwrap();
            let mut more = supply.clone();
            more[bump] += 1;
            let grown = branch_recourse(&more, view, &l).unwrap();
            prop_assert!(grown.revenue >= base.revenue);

            let pieces: u64 = supply.iter().sum();
            prop_assert!(base.revenue <= Money::from_int(9) * pieces);
            prop_assert!(base.revenue >= Money::from_int(salvage) * pieces);
            for (s, row) in base.sales.iter().enumerate() {
                prop_assert_eq!(row.iter().sum::<u64>() + base.leftover[s], supply[s]);
            }
        }

        #[test]
        fn expectation_affine_in_weights(w in 0.0f64..1.0, r1 in 0u32..6, r2 in 0u32..6) {
            let inst = instance(1, &[&[1]], &[5], (0, u64::MAX), 1);
            let l = ladder(&[10], &[1.0], 0);
            let a = DemandScenario::new(1, 1, 1, vec![r1]).unwrap();
            let b = DemandScenario::new(1, 1, 1, vec![r2]).unwrap();
            let plan = Plan::uniform(1, Choice::new(0, 0));
            let mixed = ScenarioSet::new(vec![a.clone(), b.clone()], vec![w, 1.0 - w]).unwrap();
            let qa = expected_recourse(&plan, &inst, &ScenarioSet::uniform(vec![a]).unwrap(), &l).unwrap();
            let qb = expected_recourse(&plan, &inst, &ScenarioSet::uniform(vec![b]).unwrap(), &l).unwrap();
            let q = expected_recourse(&plan, &inst, &mixed, &l).unwrap();
            let want = w * qa.units() as f64 + (1.0 - w) * qb.units() as f64;
            prop_assert!((q.units() as f64 - want).abs() <= 0.5 + 1e-6);
        }
    }
}
