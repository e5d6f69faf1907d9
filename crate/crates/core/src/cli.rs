//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a
//! capacity cap or a solver budget is hit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{nsrd_report, tdd_report};
use crate::io::config::Config;
use crate::io::pipeline::{compare_precomputed, compare_strategies, simulate_products, wilcoxon_text};
use crate::io::tables::{load_plan, load_sales, load_scenarios, save_plan, save_sales};
use crate::lotgen::{enumerate_lot_types_capped, DEFAULT_CAP};
use crate::model::{per_size_supply, Instance, Plan};
use crate::recourse::score_table;
use crate::solver::{solve_brute_force, solve_exact, solve_greedy, SolveResult, Status};
use crate::stats::wilcoxon_left_tail;

#[derive(Debug, Parser)]
#[command(name = "lotdesign", version, about = "Lot-type design and size-consistency evaluation")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every lot-type within the configured bounds.
    GenLots {
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Optimize the lot-type design.
    Solve(SolveArgs),
    /// Simulate sales of a plan under drawn demand.
    Simulate {
        plan: PathBuf,
        sales_out: PathBuf,
        supply_out: PathBuf,
        #[arg(long, default_value_t = 10)]
        products: usize,
    },
    /// Size-consistency indicators of observed sales.
    Evaluate {
        #[command(subcommand)]
        what: Evaluate,
    },
    /// Statistical tests.
    Test {
        #[command(subcommand)]
        what: TestKind,
    },
    /// Compare two strategies' sales.
    Compare {
        sales_a: PathBuf,
        supply_a: PathBuf,
        sales_b: PathBuf,
        supply_b: PathBuf,
        #[arg(long)]
        quota: Option<u64>,
        #[arg(long)]
        level: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Scenario CSV; drawn from the demand model when absent.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Exhaustive search instead of branch-and-bound.
    #[arg(long, conflicts_with = "greedy")]
    oracle: bool,
    #[arg(long)]
    greedy: bool,
    /// Print one line per explored node.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Evaluate {
    Nsrd { sales: PathBuf, supply: PathBuf },
    Tdd {
        sales: PathBuf,
        supply: PathBuf,
        #[arg(long)]
        quota: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum TestKind {
    /// Left-tail rank-sum test on two files of numbers.
    Wilcoxon {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        level: Option<f64>,
    },
}

struct Ctx<'a> {
    config: Option<Config>,
    seed: Option<u64>,
    json: bool,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn config(&self) -> Result<&Config> {
        self.config
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs --config".into()))
    }

    fn seed(&self) -> u64 {
        self.seed.or(self.config.as_ref().map(|c| c.seed)).unwrap_or(0)
    }

    fn level(&self, flag: Option<f64>) -> f64 {
        flag.or(self.config.as_ref().map(|c| c.evaluation.level))
            .unwrap_or(crate::io::config::DEFAULT_LEVEL)
    }

    fn quota(&self, flag: Option<u64>) -> u64 {
        flag.or(self.config.as_ref().map(|c| c.evaluation.quota))
            .unwrap_or(crate::io::config::DEFAULT_QUOTA)
    }

    fn print(&mut self, text: &str) -> Result<()> {
        self.out
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))
    }

    fn emit<T: Serialize>(&mut self, value: &T, text: impl FnOnce() -> String) -> Result<()> {
        let body = if self.json {
            serde_json::to_string_pretty(value).expect("serializable") + "\n"
        } else {
            text()
        };
        self.print(&body)
    }
}

/// Runs the program on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    let config = cli.config.as_deref().map(Config::load).transpose()?;
    let mut ctx = Ctx {
        config,
        seed: cli.seed,
        json: cli.json,
        out,
    };
    match cli.command {
        Command::GenLots { cap } => gen_lots(&mut ctx, cap),
        Command::Solve(args) => solve(&mut ctx, args),
        Command::Simulate {
            plan,
            sales_out,
            supply_out,
            products,
        } => simulate(&mut ctx, &plan, &sales_out, &supply_out, products),
        Command::Evaluate { what } => evaluate(&mut ctx, what),
        Command::Test {
            what: TestKind::Wilcoxon { a, b, level },
        } => {
            let (va, vb) = (read_numbers(&a)?, read_numbers(&b)?);
            let level = ctx.level(level);
            let w = wilcoxon_left_tail(&va, &vb, level)?;
            let cmp = compare_precomputed(&va, &vb, level)?;
            ctx.emit(&cmp, || {
                format!(
                    "mean A {:.6}, mean B {:.6}\n{}\n",
                    cmp.mean_a,
                    cmp.mean_b,
                    wilcoxon_text(&w)
                )
            })?;
            Ok(0)
        }
        Command::Compare {
            sales_a,
            supply_a,
            sales_b,
            supply_b,
            quota,
            level,
        } => {
            let cfg = ctx.config()?;
            let sizes = cfg.size_set()?;
            let ladder = cfg.ladder.clone();
            let a = load_sales(&sales_a, &supply_a, &sizes)?;
            let b = load_sales(&sales_b, &supply_b, &sizes)?;
            let (quota, level) = (ctx.quota(quota), ctx.level(level));
            let mut rep = compare_strategies(&a, &b, quota, ctx.seed(), level)?;
            rep.settings.ladder = Some(ladder);
            ctx.emit(&rep, || rep.to_text())?;
            Ok(0)
        }
    }
}

fn gen_lots(ctx: &mut Ctx<'_>, cap: usize) -> Result<u8> {
    let cfg = ctx.config()?;
    let spec = cfg
        .lots
        .bounds(cfg.sizes.len())?
        .ok_or_else(|| Error::Config("gen-lots needs lot bounds in [lots]".into()))?;
    let lots = enumerate_lot_types_capped(&spec, cap)?;
    let rows: Vec<Vec<u32>> = lots.iter().map(|l| l.components().to_vec()).collect();
    ctx.emit(&rows, || lots.iter().map(|l| format!("{l}\n")).collect())?;
    Ok(0)
}

#[derive(Serialize)]
struct SolveReport<'a> {
    solver: &'static str,
    #[serde(flatten)]
    result: &'a SolveResult,
    lots: Option<Vec<Vec<u32>>>,
    assignment: Option<Vec<PlanRow>>,
}

#[derive(Serialize)]
struct PlanRow {
    branch: String,
    lot: Vec<u32>,
    multiplicity: u32,
    supply: u64,
}

fn plan_rows(plan: &Plan, instance: &Instance) -> Result<Vec<PlanRow>> {
    let supply = per_size_supply(plan, instance)?;
    Ok(plan
        .assignment()
        .iter()
        .enumerate()
        .map(|(b, c)| PlanRow {
            branch: instance.branches()[b].clone(),
            lot: instance.lot_universe()[c.lot].components().to_vec(),
            multiplicity: instance.multiplicities()[c.mult],
            supply: supply[b].iter().sum(),
        })
        .collect())
}

fn solve(ctx: &mut Ctx<'_>, args: SolveArgs) -> Result<u8> {
    let cfg = ctx.config()?.clone();
    let instance = cfg.instance()?;
    let set = match &args.scenarios {
        Some(p) => load_scenarios(p, &instance)?,
        None => {
            let model = cfg.demand_model()?;
            let seed = ctx.seed.unwrap_or(cfg.scenario_seed());
            crate::recourse::generate_scenarios(&model, cfg.scenarios.count, seed)?
        }
    };
    let scores = score_table(&instance, &set, &cfg.ladder)?;
    let mut opts = cfg.solver_options();
    opts.trace = args.trace;
    let (name, result) = if args.oracle {
        ("brute-force", solve_brute_force(&instance, &scores)?)
    } else if args.greedy {
        ("greedy", solve_greedy(&instance, &scores)?)
    } else {
        ("exact", solve_exact(&instance, &scores, &opts)?)
    };

    if let (Some(path), Some(plan)) = (&args.plan_out, &result.plan) {
        save_plan(plan, &instance, path)?;
    }
    let lots = result.plan.as_ref().map(|p| {
        p.used_lot_types()
            .into_iter()
            .map(|l| instance.lot_universe()[l].components().to_vec())
            .collect()
    });
    let assignment = result.plan.as_ref().map(|p| plan_rows(p, &instance)).transpose()?;
    let report = SolveReport {
        solver: name,
        result: &result,
        lots,
        assignment,
    };
    ctx.emit(&report, || {
        let mut s = String::new();
        for ev in &result.trace {
            s.push_str(&format!("{ev}\n"));
        }
        s.push_str(&format!("solver: {name}\nstatus: {:?}\n", result.status));
        if let Some(o) = result.objective {
            s.push_str(&format!("objective: {o}\n"));
        }
        if let Some(b) = result.bound {
            s.push_str(&format!("bound: {b}\n"));
        }
        s.push_str(&format!("nodes: {}\n", result.nodes_explored));
        if let Some(rows) = &report.assignment {
            for l in report.lots.iter().flatten() {
                s.push_str(&format!("lot-type: {}\n", crate::model::LotType::new(l.clone()).map(|l| l.to_string()).unwrap_or_default()));
            }
            for r in rows {
                s.push_str(&format!("{} {} x {:?} ({} pieces)\n", r.branch, r.multiplicity, r.lot, r.supply));
            }
        }
        if result.budget_exhausted {
            s.push_str("budget exhausted\n");
        }
        s
    })?;
    Ok(match result.status {
        _ if result.budget_exhausted => 2,
        Status::Infeasible => 1,
        _ => 0,
    })
}

fn simulate(ctx: &mut Ctx<'_>, plan: &Path, sales_out: &Path, supply_out: &Path, products: usize) -> Result<u8> {
    let cfg = ctx.config()?.clone();
    let instance = cfg.instance()?;
    let plan = load_plan(plan, &instance)?;
    let model = cfg.demand_model()?;
    let sims = simulate_products(&plan, &instance, &model, &cfg.ladder, products, ctx.seed())?;
    let records: Vec<_> = sims.iter().flat_map(|s| s.records.iter().cloned()).collect();
    save_sales(&records, instance.sizes(), sales_out, supply_out)?;
    ctx.emit(&sims, || {
        let revenue: crate::Money = sims.iter().flat_map(|s| s.revenues.iter().copied()).sum();
        format!("{} products x {} branches simulated, revenue {revenue}\n", sims.len(), instance.branch_count())
    })?;
    Ok(0)
}

fn evaluate(ctx: &mut Ctx<'_>, what: Evaluate) -> Result<u8> {
    let sizes = ctx.config()?.size_set()?;
    match what {
        Evaluate::Nsrd { sales, supply } => {
            let recs = load_sales(&sales, &supply, &sizes)?;
            let rep = nsrd_report(&recs)?;
            ctx.emit(&rep, || {
                let mut s = String::new();
                for p in &rep.products {
                    s.push_str(&format!("{} day {} nsrd {:.6}\n", p.product, p.fifty_percent_day, p.nsrd));
                }
                for (p, why) in &rep.excluded {
                    s.push_str(&format!("{p} excluded: {why}\n"));
                }
                s
            })?;
        }
        Evaluate::Tdd { sales, supply, quota } => {
            let recs = load_sales(&sales, &supply, &sizes)?;
            let quota = ctx.quota(quota);
            let rep = tdd_report(&recs, quota, ctx.seed())?;
            ctx.emit(&rep, || {
                let mut s = String::new();
                for c in &rep.cells {
                    s.push_str(&format!(
                        "{} {} samples {:?} jumped {}\n",
                        c.branch,
                        sizes.labels()[c.size],
                        c.sampling.values(),
                        c.sampling.jumped
                    ));
                }
                if let Some(m) = rep.mean() {
                    s.push_str(&format!("mean TDD {m:.6}\n"));
                }
                s
            })?;
        }
    }
    Ok(0)
}

/// Numbers separated by commas, whitespace or newlines.
fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::validation(format!("{}: not a number: {t:?}", path.display())))
        })
        .collect()
}
