//! One TOML document describes one experiment.
//!
//! ```toml
//! seed = 7
//! sizes = ["S", "M", "L", "XL"]
//! branches = 26                 # or a list of ids
//! multiplicities = [1, 2, 3]
//! max_lot_types = 2
//! lot_count_costs = "25"        # one value per allowed lot-type, or a scalar
//! supply_lower = 0
//! supply_upper = 1000           # omit for unbounded
//!
//! [lots]                        # either `list = [[1,2,2,1], ...]` or bounds
//! comp_min = 0
//! comp_max = 3
//! total_min = 4
//! total_max = 8
//!
//! [cost]
//! per_piece = "4"
//! per_delivery = "1.5"
//!
//! [ladder]
//! prices = ["20", "14"]
//! multipliers = [1.0, 1.5]
//! salvage = "2"
//!
//! [demand]
//! horizon = 14
//! dispersion = 4.0
//! branch_totals = [1.2]         # per branch, or one value for all
//! size_shares = [0.1, 0.2, 0.4, 0.3]
//!
//! [scenarios]
//! count = 20
//! ```

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lotgen::{enumerate_lot_types, LotGenSpec};
use crate::model::{Instance, InstanceParts, LotType, ProcurementCost, SizeSet};
use crate::money::Money;
use crate::recourse::{generate_scenarios, DemandModel, PriceLadder, ScenarioSet};
use crate::solver::SolverOptions;

pub const DEFAULT_QUOTA: u64 = 5;
pub const DEFAULT_LEVEL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    pub sizes: Vec<String>,
    pub branches: Branches,
    #[serde(default = "default_multiplicities")]
    pub multiplicities: Vec<u32>,
    #[serde(default = "default_max_lot_types")]
    pub max_lot_types: usize,
    #[serde(default)]
    pub lot_count_costs: Costs,
    #[serde(default)]
    pub supply_lower: u64,
    #[serde(default)]
    pub supply_upper: Option<u64>,
    pub lots: Lots,
    #[serde(default)]
    pub cost: ProcurementCost,
    pub ladder: PriceLadder,
    #[serde(default)]
    pub demand: Option<DemandSection>,
    #[serde(default)]
    pub scenarios: ScenarioSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Branches {
    Count(usize),
    Ids(Vec<String>),
}

impl Branches {
    pub fn ids(&self) -> Vec<String> {
        match self {
            Branches::Ids(ids) => ids.clone(),
            Branches::Count(n) => {
                let width = n.to_string().len();
                (1..=*n).map(|i| format!("b{i:0width$}")).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Costs {
    Each(Money),
    List(Vec<Money>),
}

impl Default for Costs {
    fn default() -> Self {
        Costs::Each(Money::ZERO)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lots {
    #[serde(default)]
    pub list: Option<Vec<Vec<u32>>>,
    pub comp_min: Option<u32>,
    pub comp_max: Option<u32>,
    pub total_min: Option<u64>,
    pub total_max: Option<u64>,
}

impl Lots {
    pub fn bounds(&self, size_count: usize) -> Result<Option<LotGenSpec>> {
        match (self.comp_min, self.comp_max, self.total_min, self.total_max) {
            (None, None, None, None) => Ok(None),
            (Some(comp_min), Some(comp_max), Some(total_min), Some(total_max)) => Ok(Some(LotGenSpec {
                size_count,
                comp_min,
                comp_max,
                total_min,
                total_max,
            })),
            _ => Err(Error::Config(
                "lot bounds need all of comp_min, comp_max, total_min, total_max".into(),
            )),
        }
    }

    pub fn universe(&self, size_count: usize) -> Result<Vec<LotType>> {
        match (&self.list, self.bounds(size_count)?) {
            (Some(list), None) => list.iter().map(|c| LotType::new(c.clone())).collect(),
            (None, Some(spec)) => enumerate_lot_types(&spec),
            (Some(_), Some(_)) => Err(Error::Config(
                "give either an explicit lot list or lot bounds, not both".into(),
            )),
            (None, None) => Err(Error::Config("the [lots] section is empty".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    pub horizon: usize,
    pub dispersion: f64,
    #[serde(default)]
    pub branch_totals: Vec<f64>,
    #[serde(default)]
    pub size_shares: Vec<f64>,
    /// Explicit `branch × size` means; overrides totals and shares.
    #[serde(default)]
    pub means: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub seasonality: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub count: usize,
    /// Falls back to the global seed.
    pub seed: Option<u64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection { count: 10, seed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub max_nodes: u64,
    pub time_limit_secs: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverSection {
            max_nodes: d.max_nodes,
            time_limit_secs: d.time_limit.as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub quota: u64,
    pub level: f64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            quota: DEFAULT_QUOTA,
            level: DEFAULT_LEVEL,
        }
    }
}

fn default_multiplicities() -> Vec<u32> {
    vec![1]
}

fn default_max_lot_types() -> usize {
    1
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check(&self) -> Result<()> {
        if !(self.evaluation.level > 0.0 && self.evaluation.level < 1.0) {
            return Err(Error::Config("evaluation.level must lie in (0, 1)".into()));
        }
        if self.evaluation.quota == 0 {
            return Err(Error::Config("evaluation.quota must be at least 1".into()));
        }
        if !(self.solver.time_limit_secs.is_finite() && self.solver.time_limit_secs >= 0.0) {
            return Err(Error::Config("solver.time_limit_secs must be non-negative".into()));
        }
        Ok(())
    }

    pub fn size_set(&self) -> Result<SizeSet> {
        SizeSet::new(self.sizes.iter().cloned())
    }

    pub fn instance(&self) -> Result<Instance> {
        let sizes = self.size_set()?;
        let lot_universe = self.lots.universe(sizes.len())?;
        let lot_count_costs = match &self.lot_count_costs {
            Costs::Each(d) => vec![*d; self.max_lot_types],
            Costs::List(v) => v.clone(),
        };
        Instance::new(InstanceParts {
            sizes,
            branches: self.branches.ids(),
            lot_universe,
            multiplicities: self.multiplicities.clone(),
            supply_lower: self.supply_lower,
            supply_upper: self.supply_upper.unwrap_or(u64::MAX),
            max_lot_types: self.max_lot_types,
            lot_count_costs,
            cost_model: Arc::new(self.cost),
        })
    }

    pub fn demand_model(&self) -> Result<DemandModel> {
        let d = self
            .demand
            .as_ref()
            .ok_or_else(|| Error::Config("missing [demand] section".into()))?;
        let branches = self.branches.ids().len();
        let means = match &d.means {
            Some(m) => m.clone(),
            None => {
                if d.size_shares.len() != self.sizes.len() {
                    return Err(Error::Config(format!(
                        "demand.size_shares has {} entries for {} sizes",
                        d.size_shares.len(),
                        self.sizes.len()
                    )));
                }
                let totals = match d.branch_totals.len() {
                    1 => vec![d.branch_totals[0]; branches],
                    n if n == branches => d.branch_totals.clone(),
                    n => {
                        return Err(Error::Config(format!(
                            "demand.branch_totals has {n} entries for {branches} branches"
                        )))
                    }
                };
                DemandModel::from_shares(d.horizon, &totals, &d.size_shares, d.dispersion).means
            }
        };
        if means.len() != branches {
            return Err(Error::Config(format!(
                "demand.means has {} rows for {branches} branches",
                means.len()
            )));
        }
        let model = DemandModel {
            horizon: d.horizon,
            means,
            dispersion: d.dispersion,
            seasonality: d.seasonality.clone(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn scenario_seed(&self) -> u64 {
        self.scenarios.seed.unwrap_or(self.seed)
    }

    pub fn scenario_set(&self) -> Result<ScenarioSet> {
        generate_scenarios(&self.demand_model()?, self.scenarios.count, self.scenario_seed())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            max_nodes: self.solver.max_nodes,
            time_limit: Duration::from_secs_f64(self.solver.time_limit_secs),
            trace: false,
        }
    }
}
