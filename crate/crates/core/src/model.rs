//! Domain types shared by the solver, recourse and evaluation code: sizes,
//! lot-types, problem instances and delivery plans.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

/// Ordered, non-empty list of unique size labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SizeSet {
    labels: Vec<String>,
}

impl SizeSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::validation("size set must not be empty"));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.is_empty() {
                return Err(Error::validation("size label must not be empty"));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::validation(format!("duplicate size label {label:?}")));
            }
        }
        Ok(SizeSet { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

impl TryFrom<Vec<String>> for SizeSet {
    type Error = Error;
    fn try_from(labels: Vec<String>) -> Result<Self> {
        SizeSet::new(labels)
    }
}

impl From<SizeSet> for Vec<String> {
    fn from(sizes: SizeSet) -> Self {
        sizes.labels
    }
}

/// Pieces per size inside one pre-pack. Never all zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct LotType {
    components: Vec<u32>,
}

impl LotType {
    pub fn new(components: Vec<u32>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::validation("lot-type needs at least one size"));
        }
        if components.iter().all(|&c| c == 0) {
            return Err(Error::validation("the all-zero lot-type is not allowed"));
        }
        Ok(LotType { components })
    }

    pub fn components(&self) -> &[u32] {
        &self.components
    }

    pub fn size_count(&self) -> usize {
        self.components.len()
    }

    /// Number of pieces in one lot.
    pub fn total(&self) -> u64 {
        self.components.iter().map(|&c| c as u64).sum()
    }
}

impl TryFrom<Vec<u32>> for LotType {
    type Error = Error;
    fn try_from(components: Vec<u32>) -> Result<Self> {
        LotType::new(components)
    }
}

impl From<LotType> for Vec<u32> {
    fn from(lot: LotType) -> Self {
        lot.components
    }
}

impl fmt::Display for LotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// First-stage cost of delivering `multiplicity` lots of `lot` to a branch.
pub trait DeliveryCost: fmt::Debug + Send + Sync {
    fn cost(&self, branch: usize, lot: &LotType, multiplicity: u32) -> Money;
}

/// Procurement-style cost: a price per piece plus a fixed charge per delivery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcurementCost {
    pub per_piece: Money,
    pub per_delivery: Money,
}

impl DeliveryCost for ProcurementCost {
    fn cost(&self, _branch: usize, lot: &LotType, multiplicity: u32) -> Money {
        self.per_piece * (multiplicity as u64 * lot.total()) + self.per_delivery
    }
}

/// Everything the lot-type design problem needs apart from demand.
#[derive(Clone, Debug)]
pub struct Instance {
    sizes: SizeSet,
    branches: Vec<String>,
    lot_universe: Vec<LotType>,
    multiplicities: Vec<u32>,
    supply_lower: u64,
    supply_upper: u64,
    max_lot_types: usize,
    lot_count_costs: Vec<Money>,
    cost_model: Arc<dyn DeliveryCost>,
}

/// Unvalidated parts of an [`Instance`].
#[derive(Clone, Debug)]
pub struct InstanceParts {
    pub sizes: SizeSet,
    pub branches: Vec<String>,
    pub lot_universe: Vec<LotType>,
    pub multiplicities: Vec<u32>,
    pub supply_lower: u64,
    /// `u64::MAX` means unbounded.
    pub supply_upper: u64,
    pub max_lot_types: usize,
    pub lot_count_costs: Vec<Money>,
    pub cost_model: Arc<dyn DeliveryCost>,
}

impl Instance {
    pub fn new(parts: InstanceParts) -> Result<Self> {
        let InstanceParts {
            sizes,
            branches,
            lot_universe,
            multiplicities,
            supply_lower,
            supply_upper,
            max_lot_types,
            lot_count_costs,
            cost_model,
        } = parts;

        if branches.is_empty() {
            return Err(Error::validation("instance needs at least one branch"));
        }
        let mut seen = HashSet::new();
        for b in &branches {
            if !seen.insert(b.as_str()) {
                return Err(Error::validation(format!("duplicate branch id {b:?}")));
            }
        }
        if lot_universe.is_empty() {
            return Err(Error::validation("lot universe is empty"));
        }
        for lot in &lot_universe {
            if lot.size_count() != sizes.len() {
                return Err(Error::structural(format!(
                    "lot-type {lot} has {} components, expected {}",
                    lot.size_count(),
                    sizes.len()
                )));
            }
        }
        if multiplicities.is_empty() {
            return Err(Error::validation("multiplicity set is empty"));
        }
        if multiplicities[0] == 0 || multiplicities.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "multiplicities must be positive and strictly ascending",
            ));
        }
        if supply_lower > supply_upper {
            return Err(Error::validation(format!(
                "supply window is empty: lower {supply_lower} > upper {supply_upper}"
            )));
        }
        if max_lot_types == 0 {
            return Err(Error::validation("max_lot_types must be at least 1"));
        }
        if lot_count_costs.len() != max_lot_types {
            return Err(Error::validation(format!(
                "need one lot-count cost per allowed lot-type: got {}, expected {max_lot_types}",
                lot_count_costs.len()
            )));
        }
        if lot_count_costs.iter().any(|&d| d < Money::ZERO) {
            return Err(Error::validation("lot-count costs must be non-negative"));
        }
        Ok(Instance {
            sizes,
            branches,
            lot_universe,
            multiplicities,
            supply_lower,
            supply_upper,
            max_lot_types,
            lot_count_costs,
            cost_model,
        })
    }

    pub fn sizes(&self) -> &SizeSet {
        &self.sizes
    }

    pub fn branches(&self) -> &[String] {
        &self.branches
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn lot_universe(&self) -> &[LotType] {
        &self.lot_universe
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn supply_lower(&self) -> u64 {
        self.supply_lower
    }

    pub fn supply_upper(&self) -> u64 {
        self.supply_upper
    }

    pub fn max_lot_types(&self) -> usize {
        self.max_lot_types
    }

    pub fn lot_count_costs(&self) -> &[Money] {
        &self.lot_count_costs
    }

    pub fn cost_model(&self) -> &dyn DeliveryCost {
        self.cost_model.as_ref()
    }

    /// Total charge for using `used` distinct lot-types: the sum of the
    /// first `used` lot-count costs.
    pub fn lot_count_penalty(&self, used: usize) -> Money {
        self.lot_count_costs.iter().take(used).copied().sum()
    }

    /// `c_{b,l,m}` for a lot index and a multiplicity index.
    pub fn delivery_cost(&self, branch: usize, lot: usize, mult: usize) -> Money {
        self.cost_model.cost(branch, &self.lot_universe[lot], self.multiplicities[mult])
    }

    /// Pieces delivered by choosing lot `lot` with multiplicity index `mult`.
    pub fn pieces(&self, lot: usize, mult: usize) -> u64 {
        self.multiplicities[mult] as u64 * self.lot_universe[lot].total()
    }

    /// Same instance with another supply window.
    pub fn with_supply_window(&self, lower: u64, upper: u64) -> Result<Instance> {
        let mut parts = self.to_parts();
        parts.supply_lower = lower;
        parts.supply_upper = upper;
        Instance::new(parts)
    }

    /// Same instance with other lot-count costs.
    pub fn with_lot_count_costs(&self, costs: Vec<Money>) -> Result<Instance> {
        let mut parts = self.to_parts();
        parts.max_lot_types = costs.len();
        parts.lot_count_costs = costs;
        Instance::new(parts)
    }

    pub fn to_parts(&self) -> InstanceParts {
        InstanceParts {
            sizes: self.sizes.clone(),
            branches: self.branches.clone(),
            lot_universe: self.lot_universe.clone(),
            multiplicities: self.multiplicities.clone(),
            supply_lower: self.supply_lower,
            supply_upper: self.supply_upper,
            max_lot_types: self.max_lot_types,
            lot_count_costs: self.lot_count_costs.clone(),
            cost_model: Arc::clone(&self.cost_model),
        }
    }
}

/// Lot index and multiplicity index delivered to one branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub lot: usize,
    pub mult: usize,
}

impl Choice {
    pub const fn new(lot: usize, mult: usize) -> Self {
        Choice { lot, mult }
    }
}

/// One `(lot, multiplicity)` choice per branch, in instance branch order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plan {
    assignment: Vec<Choice>,
}

impl Plan {
    pub fn new(assignment: Vec<Choice>) -> Self {
        Plan { assignment }
    }

    /// Every branch gets the same choice.
    pub fn uniform(branches: usize, choice: Choice) -> Self {
        Plan {
            assignment: vec![choice; branches],
        }
    }

    pub fn assignment(&self) -> &[Choice] {
        &self.assignment
    }

    pub fn choice(&self, branch: usize) -> Choice {
        self.assignment[branch]
    }

    /// Sorted distinct lot indices in use.
    pub fn used_lot_types(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self.assignment.iter().map(|c| c.lot).collect();
        used.sort_unstable();
        used.dedup();
        used
    }

    /// Checks that the plan covers exactly the instance's branches and only
    /// references existing lot-types and multiplicities.
    pub fn check_structure(&self, instance: &Instance) -> Result<()> {
        if self.assignment.len() != instance.branch_count() {
            return Err(Error::structural(format!(
                "plan assigns {} branches, instance has {}",
                self.assignment.len(),
                instance.branch_count()
            )));
        }
        for (b, c) in self.assignment.iter().enumerate() {
            if c.lot >= instance.lot_universe().len() {
                return Err(Error::structural(format!(
                    "branch {} references unknown lot index {}",
                    instance.branches()[b],
                    c.lot
                )));
            }
            if c.mult >= instance.multiplicities().len() {
                return Err(Error::structural(format!(
                    "branch {} references unknown multiplicity index {}",
                    instance.branches()[b],
                    c.mult
                )));
            }
        }
        Ok(())
    }
}

/// Pieces per size delivered to each branch (`branch × size`).
pub fn per_size_supply(plan: &Plan, instance: &Instance) -> Result<Vec<Vec<u64>>> {
    plan.check_structure(instance)?;
    Ok(plan
        .assignment
        .iter()
        .map(|c| {
            let m = instance.multiplicities()[c.mult] as u64;
            instance.lot_universe()[c.lot]
                .components()
                .iter()
                .map(|&k| m * k as u64)
                .collect()
        })
        .collect())
}

/// Total pieces delivered over all branches.
pub fn total_supply(plan: &Plan, instance: &Instance) -> Result<u64> {
    plan.check_structure(instance)?;
    Ok(plan
        .assignment
        .iter()
        .map(|c| instance.pieces(c.lot, c.mult))
        .sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum Violation {
    SupplyLower { total: u64, lower: u64 },
    SupplyUpper { total: u64, upper: u64 },
    MaxLotTypes { used: usize, max: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SupplyLower { total, lower } => {
                write!(f, "supply_lower: total {total} < {lower}")
            }
            Violation::SupplyUpper { total, upper } => {
                write!(f, "supply_upper: total {total} > {upper}")
            }
            Violation::MaxLotTypes { used, max } => {
                write!(f, "max_lot_types: {used} distinct lot-types > {max}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the supply window and the lot-type cardinality limit.
pub fn check_feasible(plan: &Plan, instance: &Instance) -> Result<Feasibility> {
    let total = total_supply(plan, instance)?;
    let mut violations = Vec::new();
    if total < instance.supply_lower() {
        violations.push(Violation::SupplyLower {
            total,
            lower: instance.supply_lower(),
        });
    }
    if total > instance.supply_upper() {
        violations.push(Violation::SupplyUpper {
            total,
            upper: instance.supply_upper(),
        });
    }
    let used = plan.used_lot_types().len();
    if used > instance.max_lot_types() {
        violations.push(Violation::MaxLotTypes {
            used,
            max: instance.max_lot_types(),
        });
    }
    Ok(Feasibility { violations })
}

/// The plan written out as the binary decision variables `x[b][l][m]`,
/// `y[l]` and `z[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryEncoding {
    pub x: Vec<Vec<Vec<bool>>>,
    pub y: Vec<bool>,
    pub z: Vec<bool>,
}

pub fn encode(plan: &Plan, instance: &Instance) -> Result<BinaryEncoding> {
    plan.check_structure(instance)?;
    let lots = instance.lot_universe().len();
    let mults = instance.multiplicities().len();
    let mut x = vec![vec![vec![false; mults]; lots]; instance.branch_count()];
    let mut y = vec![false; lots];
    for (b, c) in plan.assignment.iter().enumerate() {
        x[b][c.lot][c.mult] = true;
        y[c.lot] = true;
    }
    let used = y.iter().filter(|&&v| v).count();
    let z = (1..=instance.max_lot_types()).map(|i| used >= i).collect();
    Ok(BinaryEncoding { x, y, z })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn lot(c: &[u32]) -> LotType {
        LotType::new(c.to_vec()).unwrap()
    }

    pub fn four_sizes() -> SizeSet {
        SizeSet::new(["S", "M", "L", "XL"]).unwrap()
    }

    pub fn instance(
        branches: usize,
        lots: &[&[u32]],
        mults: &[u32],
        window: (u64, u64),
        n: usize,
    ) -> Instance {
        let size_count = lots[0].len();
        let labels: Vec<String> = (0..size_count).map(|s| format!("s{s}")).collect();
        Instance::new(InstanceParts {
            sizes: SizeSet::new(labels).unwrap(),
            branches: (0..branches).map(|b| format!("b{b}")).collect(),
            lot_universe: lots.iter().map(|c| lot(c)).collect(),
            multiplicities: mults.to_vec(),
            supply_lower: window.0,
            supply_upper: window.1,
            max_lot_types: n,
            lot_count_costs: vec![Money::from_int(1); n],
            cost_model: Arc::new(ProcurementCost::default()),
        })
        .unwrap()
    }
}
