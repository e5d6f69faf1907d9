//! File formats, configuration, the sales simulator and the strategy
//! comparison that the command-line front end is built on.

pub mod config;
pub mod pipeline;
pub mod tables;

pub use config::Config;
pub use pipeline::{
    compare_precomputed, compare_strategies, simulate_products, simulate_sales, ComparisonReport,
    NsrdComparison, SimulatedSales,
};
pub use tables::{load_plan, load_sales, load_scenarios, save_plan, save_sales, save_scenarios};
