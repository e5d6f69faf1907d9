//! Size-consistency indicators computed from observed sales.
//!
//! `NSRD` is, for one product, the sample standard deviation across sizes of
//! the share of each size's supply sold by the 50%-day (the first day on
//! which half of the product's total supply has sold).
//!
//! `TDD` is, for one branch and size, `|W - L|`, where `W` counts products in
//! which no other size sold out earlier and `L` counts products in which no
//! other size sold out later. It is computed on random product samples whose
//! `W + L` equals a fixed quota.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Observed sales of one product in one branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SalesRecord {
    product: String,
    branch: String,
    supply: Vec<u64>,
    /// `size × day`
    sales: Vec<Vec<u64>>,
}

impl SalesRecord {
    pub fn new(
        product: impl Into<String>,
        branch: impl Into<String>,
        supply: Vec<u64>,
        sales: Vec<Vec<u64>>,
    ) -> Result<Self> {
        let product = product.into();
        let branch = branch.into();
        if supply.is_empty() || sales.len() != supply.len() {
            return Err(Error::structural(format!(
                "{product}/{branch}: {} supply entries vs {} sales rows",
                supply.len(),
                sales.len()
            )));
        }
        let horizon = sales[0].len();
        if horizon == 0 || sales.iter().any(|r| r.len() != horizon) {
            return Err(Error::structural(format!(
                "{product}/{branch}: sales rows must share a positive horizon"
            )));
        }
        for (s, row) in sales.iter().enumerate() {
            let sold: u64 = row.iter().sum();
            if sold > supply[s] {
                return Err(Error::validation(format!(
                    "{product}/{branch}: size {s} sold {sold} of {} supplied",
                    supply[s]
                )));
            }
        }
        Ok(SalesRecord {
            product,
            branch,
            supply,
            sales,
        })
    }

    pub fn product(&self) -> &str {
        &self.product
    }

    pub fn branch(&self) -> &str {
        &self.branch
    }

    pub fn supply(&self) -> &[u64] {
        &self.supply
    }

    pub fn sales(&self) -> &[Vec<u64>] {
        &self.sales
    }

    pub fn size_count(&self) -> usize {
        self.supply.len()
    }

    pub fn horizon(&self) -> usize {
        self.sales[0].len()
    }

    /// Units of `size` sold on days `1..=day`.
    pub fn sold_through(&self, size: usize, day: usize) -> u64 {
        self.sales[size].iter().take(day).sum()
    }

    /// Sums supply and daily sales of several branches of one product.
    pub fn aggregate(records: &[&SalesRecord]) -> Result<SalesRecord> {
        let first = records
            .first()
            .ok_or_else(|| Error::validation("nothing to aggregate"))?;
        let sizes = first.size_count();
        let horizon = records.iter().map(|r| r.horizon()).max().unwrap();
        let mut supply = vec![0u64; sizes];
        let mut sales = vec![vec![0u64; horizon]; sizes];
        for r in records {
            if r.product != first.product {
                return Err(Error::structural("cannot aggregate different products"));
            }
            if r.size_count() != sizes {
                return Err(Error::structural("records disagree on the size count"));
            }
            for s in 0..sizes {
                supply[s] += r.supply[s];
                for (d, &v) in r.sales[s].iter().enumerate() {
                    sales[s][d] += v;
                }
            }
        }
        SalesRecord::new(first.product.clone(), "*", supply, sales)
    }
}

/// First day (1-based) on which cumulative sales over all given records
/// reach half the total supply; `None` if that never happens.
pub fn fifty_percent_day(records: &[&SalesRecord]) -> Result<Option<usize>> {
    let total: u64 = records.iter().flat_map(|r| r.supply.iter()).sum();
    if total == 0 {
        return Err(Error::validation("total supply is zero"));
    }
    let horizon = records.iter().map(|r| r.horizon()).max().unwrap_or(0);
    let mut cumulative = 0u64;
    for day in 0..horizon {
        for r in records {
            for row in &r.sales {
                cumulative += row.get(day).copied().unwrap_or(0);
            }
        }
        if 2 * cumulative >= total {
            return Ok(Some(day + 1));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SalesRates {
    /// Sizes with positive supply, ascending.
    pub sizes: Vec<usize>,
    /// `NSR(s)` for each entry of `sizes`.
    pub rates: Vec<f64>,
    /// Sizes left out for lack of supply.
    pub excluded: Vec<usize>,
}

/// Share of each size's supply sold through `day` (1-based).
pub fn normalized_sales_rates(record: &SalesRecord, day: usize) -> Result<SalesRates> {
    let mut out = SalesRates {
        sizes: Vec::new(),
        rates: Vec::new(),
        excluded: Vec::new(),
    };
    for s in 0..record.size_count() {
        if record.supply[s] == 0 {
            out.excluded.push(s);
            continue;
        }
        out.sizes.push(s);
        out.rates.push(record.sold_through(s, day) as f64 / record.supply[s] as f64);
    }
    if out.sizes.is_empty() {
        return Err(Error::Undefined(format!(
            "{}/{}: no size has positive supply",
            record.product, record.branch
        )));
    }
    Ok(out)
}

/// Sample standard deviation (divisor `N − 1`) about the sample mean.
pub fn nsrd(rates: &[f64]) -> Result<f64> {
    if rates.len() < 2 {
        return Err(Error::Undefined(format!(
            "NSRD needs at least two sizes, got {}",
            rates.len()
        )));
    }
    if rates.iter().all(|&r| r == rates[0]) {
        return Ok(0.0);
    }
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let ss: f64 = rates.iter().map(|r| (r - mean).powi(2)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductNsrd {
    pub product: String,
    pub fifty_percent_day: usize,
    pub sizes: Vec<usize>,
    pub rates: Vec<f64>,
    pub mean_rate: f64,
    pub nsrd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsrdReport {
    pub products: Vec<ProductNsrd>,
    /// Products without a value, with the reason.
    pub excluded: Vec<(String, String)>,
}

impl NsrdReport {
    pub fn values(&self) -> Vec<f64> {
        self.products.iter().map(|p| p.nsrd).collect()
    }
}

/// NSRD of every product, aggregating its branches before locating the
/// 50%-day. Products are reported in ascending id order.
pub fn nsrd_report(records: &[SalesRecord]) -> Result<NsrdReport> {
    let mut by_product: BTreeMap<&str, Vec<&SalesRecord>> = BTreeMap::new();
    for r in records {
        by_product.entry(r.product()).or_default().push(r);
    }
    let mut report = NsrdReport {
        products: Vec::new(),
        excluded: Vec::new(),
    };
    for (product, recs) in by_product {
        let agg = SalesRecord::aggregate(&recs)?;
        let day = match fifty_percent_day(&[&agg]) {
            Ok(Some(d)) => d,
            Ok(None) => {
                report.excluded.push((product.to_string(), "no 50%-day".into()));
                continue;
            }
            Err(e) => {
                report.excluded.push((product.to_string(), e.to_string()));
                continue;
            }
        };
        let rates = normalized_sales_rates(&agg, day)?;
        match nsrd(&rates.rates) {
            Ok(v) => report.products.push(ProductNsrd {
                product: product.to_string(),
                fifty_percent_day: day,
                mean_rate: rates.rates.iter().sum::<f64>() / rates.rates.len() as f64,
                sizes: rates.sizes,
                rates: rates.rates,
                nsrd: v,
            }),
            Err(e) => report.excluded.push((product.to_string(), e.to_string())),
        }
    }
    Ok(report)
}

/// Day a size sells out; `Never` compares greater than every day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sellout {
    Day(usize),
    Never,
}

/// First day (1-based) on which cumulative sales of `size` equal its
/// supply; `None` when the size was not supplied.
pub fn sellout_day(record: &SalesRecord, size: usize) -> Option<Sellout> {
    let supply = record.supply[size];
    if supply == 0 {
        return None;
    }
    let mut cumulative = 0;
    for (d, &v) in record.sales[size].iter().enumerate() {
        cumulative += v;
        if cumulative == supply {
            return Some(Sellout::Day(d + 1));
        }
    }
    Some(Sellout::Never)
}

/// Whether `size` is a top dog and/or a flop dog of this product.
pub fn dog_flags(record: &SalesRecord, size: usize) -> Result<(bool, bool)> {
    let own = sellout_day(record, size).ok_or_else(|| {
        Error::structural(format!(
            "product {} in branch {} does not carry size {size}",
            record.product, record.branch
        ))
    })?;
    let others: Vec<Sellout> = (0..record.size_count()).filter_map(|s| sellout_day(record, s)).collect();
    let top = !others.iter().any(|t| t.cmp(&own) == Ordering::Less);
    let flop = !others.iter().any(|t| t.cmp(&own) == Ordering::Greater);
    Ok((top, flop))
}

/// `(W, L)` for `size` over `records` (one branch, several products).
pub fn top_flop_counts(records: &[&SalesRecord], size: usize) -> Result<(u64, u64)> {
    let mut w = 0;
    let mut l = 0;
    for r in records {
        let (top, flop) = dog_flags(r, size)?;
        w += u64::from(top);
        l += u64::from(flop);
    }
    Ok((w, l))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TddSample {
    pub w: u64,
    pub l: u64,
    pub tdd: u64,
    pub products: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TddSampling {
    pub samples: Vec<TddSample>,
    /// Samples dropped because one product pushed `W + L` past the quota.
    pub jumped: usize,
    /// Products left over at the end without completing a sample.
    pub tail: usize,
    pub diagnostic: Option<String>,
}

impl TddSampling {
    pub fn values(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.tdd).collect()
    }
}

/// TDD samples for one branch and size.
///
/// The products carrying the size are shuffled with `seed` and scanned in
/// order, accumulating their top/flop contributions. A sample is emitted
/// each time `W + L` hits `quota` exactly; overshooting discards the
/// sample.
pub fn tdd_samples(
    records: &[SalesRecord],
    branch: &str,
    size: usize,
    quota: u64,
    seed: u64,
) -> Result<TddSampling> {
    if quota == 0 {
        return Err(Error::validation("quota must be at least 1"));
    }
    let mut pool: Vec<&SalesRecord> = records
        .iter()
        .filter(|r| r.branch == branch && size < r.size_count() && r.supply[size] > 0)
        .collect();
    pool.sort_by(|a, b| a.product.cmp(&b.product));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut out = scan_samples(&pool, size, quota)?;
    if out.samples.is_empty() {
        out.diagnostic = Some(format!(
            "no complete sample of quota {quota} for branch {branch}, size {size}"
        ));
    }
    Ok(out)
}

/// Prefix scan of products in the given order.
pub fn scan_samples(pool: &[&SalesRecord], size: usize, quota: u64) -> Result<TddSampling> {
    if quota == 0 {
        return Err(Error::validation("quota must be at least 1"));
    }
    let mut out = TddSampling::default();
    let (mut w, mut l) = (0u64, 0u64);
    let mut members: Vec<String> = Vec::new();
    for r in pool {
        let (top, flop) = dog_flags(r, size)?;
        if !top && !flop {
            continue;
        }
        w += u64::from(top);
        l += u64::from(flop);
        members.push(r.product.clone());
        match (w + l).cmp(&quota) {
            Ordering::Less => {}
            Ordering::Equal => {
                out.samples.push(TddSample {
                    w,
                    l,
                    tdd: w.abs_diff(l),
                    products: std::mem::take(&mut members),
                });
                (w, l) = (0, 0);
            }
            Ordering::Greater => {
                out.jumped += 1;
                members.clear();
                (w, l) = (0, 0);
            }
        }
    }
    out.tail = members.len();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TddCell {
    pub branch: String,
    pub size: usize,
    pub sampling: TddSampling,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TddReport {
    pub quota: u64,
    pub seed: u64,
    pub cells: Vec<TddCell>,
}

impl TddReport {
    pub fn values(&self) -> Vec<u64> {
        self.cells.iter().flat_map(|c| c.sampling.values()).collect()
    }

    pub fn mean(&self) -> Option<f64> {
        let v = self.values();
        (!v.is_empty()).then(|| v.iter().sum::<u64>() as f64 / v.len() as f64)
    }
}

/// Seed of the `(branch, size)` cell, derived from the run seed.
pub fn cell_seed(seed: u64, branch: usize, size: usize) -> u64 {
    let mut x = seed ^ ((branch as u64) << 32 | size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// TDD samples for every `(branch, size)` in the data, branches in ascending
/// id order.
pub fn tdd_report(records: &[SalesRecord], quota: u64, seed: u64) -> Result<TddReport> {
    let mut branches: Vec<&str> = records.iter().map(|r| r.branch()).collect();
    branches.sort_unstable();
    branches.dedup();
    let sizes = records.iter().map(|r| r.size_count()).max().unwrap_or(0);
    let mut cells = Vec::new();
    for (bi, branch) in branches.iter().enumerate() {
        for s in 0..sizes {
            let sampling = tdd_samples(records, branch, s, quota, cell_seed(seed, bi, s))?;
            cells.push(TddCell {
                branch: branch.to_string(),
                size: s,
                sampling,
            });
        }
    }
    Ok(TddReport { quota, seed, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Record whose size `s` sells out on day `theta[s]` (or never), with
    /// supply 2 per size and horizon 10.
    fn with_sellouts(product: &str, theta: &[Option<usize>]) -> SalesRecord {
        let horizon = 10;
        let sales = theta
            .iter()
            .map(|t| {
                let mut row = vec![0; horizon];
                match t {
                    Some(d) => row[d - 1] = 2,
                    None => row[horizon - 1] = 1,
                }
                row
            })
            .collect();
        SalesRecord::new(product, "b1", vec![2; theta.len()], sales).unwrap()
    }

    #[test]
    fn fifty_percent_day_examples() {
        let r = SalesRecord::new("p", "b", vec![30, 30], vec![vec![5, 5, 10, 0], vec![5, 5, 5, 0]]).unwrap();
        // cumulative totals 10, 20, 35 against half of 60
        assert_eq!(fifty_percent_day(&[&r]).unwrap(), Some(3));
        let r = SalesRecord::new("p", "b", vec![10], vec![vec![6, 4]]).unwrap();
        assert_eq!(fifty_percent_day(&[&r]).unwrap(), Some(1));
        let r = SalesRecord::new("p", "b", vec![10], vec![vec![2, 2, 0]]).unwrap();
        assert_eq!(fifty_percent_day(&[&r]).unwrap(), None);
        let r = SalesRecord::new("p", "b", vec![10], vec![vec![5]]).unwrap();
        assert_eq!(fifty_percent_day(&[&r]).unwrap(), Some(1));
        let r = SalesRecord::new("p", "b", vec![0], vec![vec![0]]).unwrap();
        assert!(fifty_percent_day(&[&r]).is_err());
    }

    #[test]
    fn nsr_examples() {
        let r = SalesRecord::new(
            "p",
            "b",
            vec![10, 20, 20, 10],
            vec![vec![2], vec![10], vec![15], vec![3]],
        )
        .unwrap();
        let nsr = normalized_sales_rates(&r, 1).unwrap();
        assert_eq!(nsr.rates, vec![0.2, 0.5, 0.75, 0.3]);

        let r = SalesRecord::new("p", "b", vec![4, 6], vec![vec![2], vec![3]]).unwrap();
        assert_eq!(normalized_sales_rates(&r, 1).unwrap().rates, vec![0.5, 0.5]);
        let r = SalesRecord::new("p", "b", vec![4, 6, 0], vec![vec![4], vec![1], vec![0]]).unwrap();
        let nsr = normalized_sales_rates(&r, 1).unwrap();
        assert_eq!(nsr.rates[0], 1.0);
        assert_eq!(nsr.excluded, vec![2]);
        let r = SalesRecord::new("p", "b", vec![0, 0], vec![vec![0], vec![0]]).unwrap();
        assert!(normalized_sales_rates(&r, 1).is_err());
    }

    #[test]
    fn nsrd_examples() {
        let v = nsrd(&[0.2, 0.5, 0.75, 0.3]).unwrap();
        // mean 0.4375, squared deviations 0.176875, divided by 3
        assert!((v - (0.176875f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((v - 0.242813).abs() < 1e-6);
        assert_eq!(nsrd(&[0.4, 0.4, 0.4]).unwrap(), 0.0);
        assert!((nsrd(&[0.0, 1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(nsrd(&[0.3]).is_err());
    }

    #[test]
    fn record_validation() {
        assert!(matches!(
            SalesRecord::new("p", "b", vec![3], vec![vec![5]]),
            Err(Error::Validation(_))
        ));
        assert!(SalesRecord::new("p", "b", vec![3, 1], vec![vec![1]]).is_err());
    }

    #[test]
    fn sellout_examples() {
        let r = SalesRecord::new("p", "b", vec![3, 1, 2], vec![vec![2, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        assert_eq!(sellout_day(&r, 0), Some(Sellout::Day(2)));
        assert_eq!(sellout_day(&r, 1), Some(Sellout::Day(3)));
        assert_eq!(sellout_day(&r, 2), Some(Sellout::Never));
        let r = SalesRecord::new("p", "b", vec![0], vec![vec![0]]).unwrap();
        assert_eq!(sellout_day(&r, 0), None);
        assert!(Sellout::Day(1_000_000) < Sellout::Never);
    }

    #[test]
    fn top_flop_examples() {
        let r = with_sellouts("p", &[Some(5), Some(3), Some(9), None]);
        assert_eq!(top_flop_counts(&[&r], 1).unwrap(), (1, 0));
        assert_eq!(top_flop_counts(&[&r], 3).unwrap(), (0, 1));
        assert_eq!(top_flop_counts(&[&r], 0).unwrap(), (0, 0));

        let never = with_sellouts("q", &[None, None, None, None]);
        for s in 0..4 {
            assert_eq!(top_flop_counts(&[&never], s).unwrap(), (1, 1));
        }
        assert_eq!(top_flop_counts(&[&r, &never], 1).unwrap(), (2, 1));

        let partial = SalesRecord::new("x", "b1", vec![2, 0], vec![vec![2], vec![0]]).unwrap();
        assert!(matches!(top_flop_counts(&[&partial], 1), Err(Error::Structural(_))));
    }

    #[test]
    fn quota_one_samples() {
        let recs = vec![
            with_sellouts("a", &[Some(1), Some(2)]),
            with_sellouts("b", &[Some(2), Some(1)]),
            with_sellouts("c", &[None, None]),
            with_sellouts("d", &[Some(3), Some(4)]),
        ];
        let out = tdd_samples(&recs, "b1", 0, 1, 9).unwrap();
        assert!(out.values().iter().all(|&v| v == 1));
        assert_eq!(out.samples.len(), 3);
        assert_eq!(out.jumped, 1);
    }

    #[test]
    fn one_sided_and_balanced_samples() {
        let tops: Vec<SalesRecord> = (0..9).map(|i| with_sellouts(&format!("p{i}"), &[Some(1), Some(5)])).collect();
        let out = tdd_samples(&tops, "b1", 0, 3, 1).unwrap();
        assert_eq!(out.values(), vec![3, 3, 3]);

        let mut recs = Vec::new();
        for i in 0..4 {
            recs.push(with_sellouts(&format!("t{i}"), &[Some(1), Some(5)]));
            recs.push(with_sellouts(&format!("f{i}"), &[Some(5), Some(1)]));
        }
        let ordered: Vec<&SalesRecord> = recs.iter().collect();
        assert_eq!(scan_samples(&ordered, 0, 2).unwrap().values(), vec![0, 0, 0, 0]);
        for seed in 0..20 {
            let out = tdd_samples(&recs, "b1", 0, 2, seed).unwrap();
            assert_eq!(out.samples.len(), 4);
            for s in &out.samples {
                assert_eq!(s.w + s.l, 2);
                assert_eq!(s.tdd, if s.w == 1 { 0 } else { 2 });
            }
        }
        assert!(tdd_samples(&recs, "b1", 0, 0, 0).is_err());
        assert!(tdd_samples(&recs, "nowhere", 0, 2, 0).unwrap().diagnostic.is_some());
    }

    #[test]
    fn report_is_deterministic() {
        let recs: Vec<SalesRecord> = (0..12)
            .map(|i| with_sellouts(&format!("p{i:02}"), &[Some(1 + i % 3), Some(2), None]))
            .collect();
        let a = tdd_report(&recs, 2, 5).unwrap();
        assert_eq!(a, tdd_report(&recs, 2, 5).unwrap());
        let mut rev = recs.clone();
        rev.reverse();
        assert_eq!(a, tdd_report(&rev, 2, 5).unwrap());
    }

    fn arb_record() -> impl Strategy<Value = (Vec<u64>, Vec<Vec<u64>>)> {
        proptest::collection::vec((1u64..12, proptest::collection::vec(0u64..4, 6)), 2..5).prop_map(|cols| {
            let mut supply = Vec::new();
            let mut sales = Vec::new();
            for (s, raw) in cols {
                let mut left = s;
                let row: Vec<u64> = raw
                    .into_iter()
                    .map(|x| {
                        let v = x.min(left);
                        left -= v;
                        v
                    })
                    .collect();
                supply.push(s);
                sales.push(row);
            }
            (supply, sales)
        })
    }

    proptest! {
        #[test]
        fn nsrd_is_scale_invariant((supply, sales) in arb_record(), k in 2u64..6) {
            let r = SalesRecord::new("p", "b", supply.clone(), sales.clone()).unwrap();
            let scaled = SalesRecord::new(
                "p",
                "b",
                supply.iter().map(|s| s * k).collect(),
                sales.iter().map(|row| row.iter().map(|v| v * k).collect()).collect(),
            )
            .unwrap();
            let d1 = fifty_percent_day(&[&r]).unwrap();
            prop_assert_eq!(d1, fifty_percent_day(&[&scaled]).unwrap());
            if let Some(day) = d1 {
                let a = nsrd(&normalized_sales_rates(&r, day).unwrap().rates).unwrap();
                let b = nsrd(&normalized_sales_rates(&scaled, day).unwrap().rates).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!(a >= 0.0);
                let rates = normalized_sales_rates(&r, day).unwrap().rates;
                let all_equal = rates.iter().all(|&x| x == rates[0]);
                prop_assert_eq!(a == 0.0, all_equal);
                prop_assert!(rates.iter().all(|&x| (0.0..=1.0).contains(&x)));
            }
        }

        #[test]
        fn every_product_has_a_top_and_a_flop((supply, sales) in arb_record()) {
            let r = SalesRecord::new("p", "b", supply, sales).unwrap();
            let flags: Vec<(bool, bool)> = (0..r.size_count()).map(|s| dog_flags(&r, s).unwrap()).collect();
            prop_assert!(flags.iter().any(|f| f.0));
            prop_assert!(flags.iter().any(|f| f.1));
        }

        #[test]
        fn tdd_samples_respect_quota(
            thetas in proptest::collection::vec(proptest::collection::vec(proptest::option::of(1usize..10), 3), 1..30),
            quota in 1u64..6,
            seed in 0u64..1000,
        ) {
            let recs: Vec<SalesRecord> = thetas
                .iter()
                .enumerate()
                .map(|(i, t)| with_sellouts(&format!("p{i}"), t))
                .collect();
            let out = tdd_samples(&recs, "b1", 0, quota, seed).unwrap();
            for s in &out.samples {
                prop_assert_eq!(s.w + s.l, quota);
                prop_assert!(s.tdd <= quota);
                prop_assert_eq!(s.tdd % 2, quota % 2);
            }
            let mut shuffled = recs.clone();
            shuffled.reverse();
            let all: Vec<&SalesRecord> = recs.iter().collect();
            let rev: Vec<&SalesRecord> = shuffled.iter().collect();
            prop_assert_eq!(top_flop_counts(&all, 0).unwrap(), top_flop_counts(&rev, 0).unwrap());
        }
    }
}
