//! Sales simulation and the two-strategy comparison.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{nsrd_report, tdd_report, NsrdReport, SalesRecord, TddReport};
use crate::model::{check_feasible, per_size_supply, Instance, Plan};
use crate::money::Money;
use crate::recourse::{branch_recourse, DemandModel, DemandScenario, PriceLadder};
use crate::stats::{rank, wilcoxon_left_tail, WilcoxonResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimulatedSales {
    pub records: Vec<SalesRecord>,
    /// Markdown schedule per branch (zero-based levels per day).
    pub schedules: Vec<Vec<usize>>,
    pub revenues: Vec<Money>,
}

/// Replays the optimal markdown of every branch under one realized demand
/// and records day-by-day sales of product `product`.
pub fn simulate_sales(
    plan: &Plan,
    instance: &Instance,
    scenario: &DemandScenario,
    ladder: &PriceLadder,
    product: &str,
) -> Result<SimulatedSales> {
    scenario.check_dims(instance)?;
    let feas = check_feasible(plan, instance)?;
    if !feas.is_ok() {
        let v: Vec<String> = feas.violations.iter().map(ToString::to_string).collect();
        return Err(Error::validation(format!("plan is infeasible: {}", v.join("; "))));
    }
    let rows = per_size_supply(plan, instance)?;
    let mut out = SimulatedSales {
        records: Vec::with_capacity(rows.len()),
        schedules: Vec::with_capacity(rows.len()),
        revenues: Vec::with_capacity(rows.len()),
    };
    for (b, supply) in rows.into_iter().enumerate() {
        let r = branch_recourse(&supply, scenario.branch(b), ladder)?;
        out.records.push(SalesRecord::new(
            product,
            instance.branches()[b].clone(),
            supply,
            r.sales,
        )?);
        out.schedules.push(r.schedule);
        out.revenues.push(r.revenue);
    }
    Ok(out)
}

/// Revenue implied by a record under a schedule: sales at the day's price
/// plus salvage on what is left.
pub fn record_revenue(record: &SalesRecord, schedule: &[usize], ladder: &PriceLadder) -> Money {
    let mut total = Money::ZERO;
    for (s, row) in record.sales().iter().enumerate() {
        for (d, &sold) in row.iter().enumerate() {
            total += ladder.prices()[schedule[d]] * sold;
        }
        total += ladder.salvage() * (record.supply()[s] - row.iter().sum::<u64>());
    }
    total
}

/// `products` products sharing one plan, each under its own demand draw.
/// Product ids are `p01`, `p02`, ...
pub fn simulate_products(
    plan: &Plan,
    instance: &Instance,
    model: &DemandModel,
    ladder: &PriceLadder,
    products: usize,
    seed: u64,
) -> Result<Vec<SimulatedSales>> {
    let width = products.to_string().len().max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=products)
        .map(|k| {
            let scenario = model.draw(&mut rng)?;
            simulate_sales(plan, instance, &scenario, ladder, &format!("p{k:0width$}"))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsrdComparison {
    pub values_a: Vec<f64>,
    pub values_b: Vec<f64>,
    /// Pooled midranks of `values_a`, then of `values_b`.
    pub ranks_a: Vec<f64>,
    pub ranks_b: Vec<f64>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub wilcoxon: WilcoxonResult,
}

/// NSRD comparison from already computed values.
pub fn compare_precomputed(a: &[f64], b: &[f64], level: f64) -> Result<NsrdComparison> {
    let wilcoxon = wilcoxon_left_tail(a, b, level)?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = rank(&pooled)?.ranks;
    Ok(NsrdComparison {
        values_a: a.to_vec(),
        values_b: b.to_vec(),
        ranks_a: ranks[..a.len()].to_vec(),
        ranks_b: ranks[a.len()..].to_vec(),
        mean_a: mean(a),
        mean_b: mean(b),
        wilcoxon,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TddComparison {
    pub values_a: Vec<u64>,
    pub values_b: Vec<u64>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub wilcoxon: WilcoxonResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub quota: u64,
    pub level: f64,
    pub ladder: Option<PriceLadder>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub settings: Settings,
    pub nsrd_a: NsrdReport,
    pub nsrd_b: NsrdReport,
    pub nsrd: Option<NsrdComparison>,
    pub tdd_a: TddReport,
    pub tdd_b: TddReport,
    pub tdd: Option<TddComparison>,
    pub diagnostics: Vec<String>,
}

/// Runs both indicator families on both strategies and tests whether A is
/// shifted left of B. Missing statistics leave a diagnostic instead of
/// failing the whole report.
pub fn compare_strategies(
    sales_a: &[SalesRecord],
    sales_b: &[SalesRecord],
    quota: u64,
    seed: u64,
    level: f64,
) -> Result<ComparisonReport> {
    if sales_a.is_empty() || sales_b.is_empty() {
        return Err(Error::validation("both strategies need sales data"));
    }
    let mut diagnostics = Vec::new();
    let nsrd_a = nsrd_report(sales_a)?;
    let nsrd_b = nsrd_report(sales_b)?;
    for (tag, rep) in [("A", &nsrd_a), ("B", &nsrd_b)] {
        for (p, why) in &rep.excluded {
            diagnostics.push(format!("strategy {tag}: product {p} has no NSRD ({why})"));
        }
    }
    let nsrd = if nsrd_a.products.is_empty() || nsrd_b.products.is_empty() {
        diagnostics.push("NSRD test skipped: a strategy has no NSRD values".into());
        None
    } else {
        Some(compare_precomputed(&nsrd_a.values(), &nsrd_b.values(), level)?)
    };

    let tdd_a = tdd_report(sales_a, quota, seed)?;
    let tdd_b = tdd_report(sales_b, quota, seed)?;
    let (va, vb) = (tdd_a.values(), tdd_b.values());
    let tdd = if va.is_empty() || vb.is_empty() {
        diagnostics.push(format!("TDD test skipped: a strategy has no complete sample of quota {quota}"));
        None
    } else {
        let fa: Vec<f64> = va.iter().map(|&v| v as f64).collect();
        let fb: Vec<f64> = vb.iter().map(|&v| v as f64).collect();
        Some(TddComparison {
            mean_a: mean(&fa),
            mean_b: mean(&fb),
            wilcoxon: wilcoxon_left_tail(&fa, &fb, level)?,
            values_a: va,
            values_b: vb,
        })
    };
    for c in [&nsrd.as_ref().map(|n| &n.wilcoxon), &tdd.as_ref().map(|t| &t.wilcoxon)]
        .into_iter()
        .flatten()
    {
        if let Some(d) = &c.diagnostic {
            diagnostics.push(d.clone());
        }
    }

    Ok(ComparisonReport {
        settings: Settings {
            seed,
            quota,
            level,
            ladder: None,
        },
        nsrd_a,
        nsrd_b,
        nsrd,
        tdd_a,
        tdd_b,
        tdd,
        diagnostics,
    })
}

/// Human-readable summary of a Wilcoxon result.
pub fn wilcoxon_text(w: &WilcoxonResult) -> String {
    let mut s = format!(
        "rank sum {} (n_A={}, n_B={}), {:?} method",
        w.rank_sum_a, w.n_a, w.n_b, w.method
    );
    if let Some(z) = w.z {
        let _ = write!(s, ", z={z:.4}");
    }
    let _ = write!(
        s,
        ", left-tail p={:.6e}, {} at level {}",
        w.p_value,
        if w.significant { "significant" } else { "not significant" },
        w.level
    );
    s
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "seed {}, quota {}, level {}",
            self.settings.seed, self.settings.quota, self.settings.level
        );
        match &self.nsrd {
            Some(n) => {
                let _ = writeln!(
                    s,
                    "NSRD: mean A {:.6} ({} products), mean B {:.6} ({} products)",
                    n.mean_a,
                    n.values_a.len(),
                    n.mean_b,
                    n.values_b.len()
                );
                let _ = writeln!(s, "NSRD test: {}", wilcoxon_text(&n.wilcoxon));
            }
            None => s.push_str("NSRD: not available\n"),
        }
        match &self.tdd {
            Some(t) => {
                let _ = writeln!(
                    s,
                    "TDD: mean A {:.6} ({} samples), mean B {:.6} ({} samples)",
                    t.mean_a,
                    t.values_a.len(),
                    t.mean_b,
                    t.values_b.len()
                );
                let _ = writeln!(s, "TDD test: {}", wilcoxon_text(&t.wilcoxon));
            }
            None => s.push_str("TDD: not available\n"),
        }
        for d in &self.diagnostics {
            let _ = writeln!(s, "note: {d}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::instance;
    use crate::model::Choice;
    use crate::evaluation::{sellout_day, Sellout};

    fn ladder() -> PriceLadder {
        PriceLadder::new(vec![Money::from_int(10), Money::from_int(6)], &[1.0, 2.0], Money::from_int(1)).unwrap()
    }

    #[test]
    fn zero_demand_sells_nothing() {
        let inst = instance(2, &[&[1, 2, 2, 1]], &[1, 2], (0, u64::MAX), 1);
        let plan = Plan::uniform(2, Choice::new(0, 1));
        let sc = DemandScenario::zeros(2, 4, 5).unwrap();
        let out = simulate_sales(&plan, &inst, &sc, &ladder(), "p").unwrap();
        for r in &out.records {
            assert!(r.sales().iter().flatten().all(|&v| v == 0));
            for s in 0..4 {
                assert_eq!(sellout_day(r, s), Some(Sellout::Never));
            }
        }
    }

    #[test]
    fn ample_demand_sells_out_on_day_one() {
        let inst = instance(1, &[&[1, 2, 2, 1]], &[3], (0, u64::MAX), 1);
        let plan = Plan::uniform(1, Choice::new(0, 0));
        let sc = DemandScenario::new(1, 4, 3, vec![9; 12]).unwrap();
        let out = simulate_sales(&plan, &inst, &sc, &ladder(), "p").unwrap();
        for s in 0..4 {
            assert_eq!(sellout_day(&out.records[0], s), Some(Sellout::Day(1)));
        }
    }

    #[test]
    fn revenue_matches_recourse() {
        let inst = instance(3, &[&[1, 2, 2, 1], &[2, 1, 0, 1]], &[1, 2], (0, u64::MAX), 2);
        let plan = Plan::new(vec![Choice::new(0, 0), Choice::new(1, 1), Choice::new(0, 1)]);
        let model = DemandModel::from_shares(6, &[1.0, 2.0, 3.0], &[0.1, 0.4, 0.3, 0.2], 2.0);
        let sims = simulate_products(&plan, &inst, &model, &ladder(), 5, 11).unwrap();
        assert_eq!(sims.len(), 5);
        for sim in &sims {
            for (b, r) in sim.records.iter().enumerate() {
                assert_eq!(record_revenue(r, &sim.schedules[b], &ladder()), sim.revenues[b]);
            }
        }
        assert_eq!(sims, simulate_products(&plan, &inst, &model, &ladder(), 5, 11).unwrap());
    }

    #[test]
    fn infeasible_plan_is_rejected() {
        let inst = instance(1, &[&[1, 1]], &[1], (5, 10), 1);
        let sc = DemandScenario::zeros(1, 2, 2).unwrap();
        assert!(simulate_sales(&Plan::uniform(1, Choice::new(0, 0)), &inst, &sc, &ladder(), "p").is_err());
    }

    #[test]
    fn identical_strategies_give_the_null_case() {
        let inst = instance(4, &[&[1, 2, 2, 1]], &[2], (0, u64::MAX), 1);
        let plan = Plan::uniform(4, Choice::new(0, 0));
        let model = DemandModel::from_shares(10, &[1.5; 4], &[0.2, 0.3, 0.3, 0.2], 3.0);
        let records: Vec<SalesRecord> = simulate_products(&plan, &inst, &model, &ladder(), 12, 3)
            .unwrap()
            .into_iter()
            .flat_map(|s| s.records)
            .collect();
        let rep = compare_strategies(&records, &records, 3, 1, 0.05).unwrap();
        let n = rep.nsrd.as_ref().unwrap();
        assert_eq!(n.mean_a, n.mean_b);
        assert!(n.values_a.len() >= 10);
        assert!((0.3..=0.7).contains(&n.wilcoxon.p_value));
        assert_eq!(rep.to_json(), compare_strategies(&records, &records, 3, 1, 0.05).unwrap().to_json());
        assert!(rep.to_text().contains("NSRD test"));
    }
}
