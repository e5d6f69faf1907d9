//! C interface to `lotdesign`.
//!
//! Every function returns an [`LdStatus`]; on failure a message for the
//! calling thread is available from [`ld_last_error`]. Handles are opaque
//! and must be released with their `_free` function. Money values cross the
//! boundary as `int64_t` counts of 1/10000 currency units.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lotdesign::io::Config;
use lotdesign::lotgen::LotGenSpec;
use lotdesign::model::Instance;
use lotdesign::recourse::{score_table, PriceLadder, ScenarioSet, ScoreTable};
use lotdesign::solver::{solve_brute_force, solve_exact, solve_greedy, SolveResult, SolverOptions, Status};
use lotdesign::stats::{wilcoxon_left_tail, Method};
use lotdesign::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdStatus {
    Ok = 0,
    Structural = 1,
    Validation = 2,
    Capacity = 3,
    Undefined = 4,
    Io = 5,
    Config = 6,
    NullArgument = 7,
    InvalidUtf8 = 8,
    OutOfRange = 9,
    Panic = 10,
}

impl From<&Error> for LdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Structural(_) => LdStatus::Structural,
            Error::Validation(_) => LdStatus::Validation,
            Error::Capacity { .. } => LdStatus::Capacity,
            Error::Undefined(_) => LdStatus::Undefined,
            Error::Io { .. } | Error::Csv { .. } => LdStatus::Io,
            Error::Config(_) => LdStatus::Config,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(LdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(LdStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LdStatus::NullArgument, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LdStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LdStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LdStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ld_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Sample standard deviation of `n` normalized sales rates.
///
/// # Safety
/// `rates` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_nsrd(rates: *const f64, n: usize, out_value: *mut f64) -> LdStatus {
    guard(|| {
        let rates = slice(rates, n, "rates")?;
        *out(out_value, "out_value")? = lotdesign::evaluation::nsrd(rates)?;
        Ok(())
    })
}

/// Share of each size's supply that was sold. Sizes with zero supply get NaN.
///
/// # Safety
/// `supply` and `sold` must point to `n` values; `rates` to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ld_nsr(
    supply: *const u64,
    sold: *const u64,
    n: usize,
    rates: *mut f64,
) -> LdStatus {
    guard(|| {
        let supply = slice(supply, n, "supply")?;
        let sold = slice(sold, n, "sold")?;
        if n > 0 && rates.is_null() {
            return Err(null("rates"));
        }
        let sales: Vec<Vec<u64>> = sold.iter().map(|&s| vec![s]).collect();
        let rec = lotdesign::evaluation::SalesRecord::new("p", "b", supply.to_vec(), sales)?;
        let nsr = lotdesign::evaluation::normalized_sales_rates(&rec, 1)?;
        let dst = std::slice::from_raw_parts_mut(rates, n);
        dst.fill(f64::NAN);
        for (&s, &r) in nsr.sizes.iter().zip(&nsr.rates) {
            dst[s] = r;
        }
        Ok(())
    })
}

/// Number of lot-types within component and total bounds.
///
/// # Safety
/// `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_lot_type_count(
    size_count: usize,
    comp_min: u32,
    comp_max: u32,
    total_min: u64,
    total_max: u64,
    count: *mut u64,
) -> LdStatus {
    guard(|| {
        let spec = LotGenSpec {
            size_count,
            comp_min,
            comp_max,
            total_min,
            total_max,
        };
        let n = spec.count()?;
        *out(count, "count")? = u64::try_from(n).map_err(|_| Fail(LdStatus::OutOfRange, format!("{n} lot-types")))?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdMethod {
    Exact = 0,
    Normal = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LdWilcoxon {
    pub rank_sum_a: f64,
    /// Probability of a rank sum at most the observed one.
    pub p_value: f64,
    pub two_sided_p: f64,
    /// NaN for the exact method.
    pub z: f64,
    pub method: LdMethod,
    pub significant: bool,
    pub tie_group_count: usize,
}

/// Left-tail rank-sum test of A against B.
///
/// # Safety
/// `a` and `b` must point to `n_a` and `n_b` doubles; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_wilcoxon_left_tail(
    a: *const f64,
    n_a: usize,
    b: *const f64,
    n_b: usize,
    level: f64,
    result: *mut LdWilcoxon,
) -> LdStatus {
    guard(|| {
        let w = wilcoxon_left_tail(slice(a, n_a, "a")?, slice(b, n_b, "b")?, level)?;
        *out(result, "result")? = LdWilcoxon {
            rank_sum_a: w.rank_sum_a,
            p_value: w.p_value,
            two_sided_p: w.two_sided_p,
            z: w.z.unwrap_or(f64::NAN),
            method: match w.method {
                Method::Exact => LdMethod::Exact,
                Method::Normal => LdMethod::Normal,
            },
            significant: w.significant,
            tie_group_count: w.tie_groups.len(),
        };
        Ok(())
    })
}

/// An instance with its scenario set and ladder, built from a config document.
pub struct LdModel {
    instance: Instance,
    scenarios: ScenarioSet,
    ladder: PriceLadder,
    options: SolverOptions,
    scores: Option<ScoreTable>,
}

/// Parses a TOML configuration and draws its scenarios.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_model_from_toml(toml: *const c_char, model: *mut *mut LdModel) -> LdStatus {
    guard(|| {
        let slot = out(model, "model")?;
        *slot = ptr::null_mut();
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| Fail(LdStatus::InvalidUtf8, e.to_string()))?;
        let cfg = Config::from_toml(text)?;
        let m = LdModel {
            instance: cfg.instance()?,
            scenarios: cfg.scenario_set()?,
            ladder: cfg.ladder.clone(),
            options: cfg.solver_options(),
            scores: None,
        };
        *slot = Box::into_raw(Box::new(m));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`ld_model_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ld_model_free(model: *mut LdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ld_model_branch_count(model: *const LdModel) -> usize {
    model.as_ref().map_or(0, |m| m.instance.branch_count())
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ld_model_size_count(model: *const LdModel) -> usize {
    model.as_ref().map_or(0, |m| m.instance.sizes().len())
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ld_model_lot_type_count(model: *const LdModel) -> usize {
    model.as_ref().map_or(0, |m| m.instance.lot_universe().len())
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdSolverKind {
    Exact = 0,
    Greedy = 1,
    BruteForce = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdSolveStatus {
    Optimal = 0,
    Feasible = 1,
    Infeasible = 2,
}

pub struct LdSolution {
    result: SolveResult,
    // (components, multiplicity) per branch
    rows: Vec<(Vec<u32>, u32)>,
}

/// Solves the model. The score table is computed on first use and reused.
///
/// # Safety
/// `model` must be a live handle; `solution` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_model_solve(
    model: *mut LdModel,
    kind: LdSolverKind,
    solution: *mut *mut LdSolution,
) -> LdStatus {
    guard(|| {
        let slot = out(solution, "solution")?;
        *slot = ptr::null_mut();
        let m = out(model, "model")?;
        if m.scores.is_none() {
            m.scores = Some(score_table(&m.instance, &m.scenarios, &m.ladder)?);
        }
        let scores = m.scores.as_ref().unwrap();
        let result = match kind {
            LdSolverKind::Exact => solve_exact(&m.instance, scores, &m.options)?,
            LdSolverKind::Greedy => solve_greedy(&m.instance, scores)?,
            LdSolverKind::BruteForce => solve_brute_force(&m.instance, scores)?,
        };
        let rows = result
            .plan
            .iter()
            .flat_map(|p| p.assignment().iter())
            .map(|c| {
                (
                    m.instance.lot_universe()[c.lot].components().to_vec(),
                    m.instance.multiplicities()[c.mult],
                )
            })
            .collect();
        *slot = Box::into_raw(Box::new(LdSolution { result, rows }));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from [`ld_model_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ld_solution_free(solution: *mut LdSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ld_solution_status(solution: *const LdSolution) -> LdSolveStatus {
    match solution.as_ref().map(|s| s.result.status) {
        Some(Status::Optimal) => LdSolveStatus::Optimal,
        Some(Status::Feasible) => LdSolveStatus::Feasible,
        _ => LdSolveStatus::Infeasible,
    }
}

/// Objective in 1/10000 units; fails when no plan was found.
///
/// # Safety
/// `solution` must be a live handle; `units` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_solution_objective(solution: *const LdSolution, units: *mut i64) -> LdStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let v = s
            .result
            .objective
            .ok_or_else(|| Fail(LdStatus::Undefined, "no feasible plan".into()))?;
        *out(units, "units")? = v.units();
        Ok(())
    })
}

/// Best proven upper bound in 1/10000 units.
///
/// # Safety
/// `solution` must be a live handle; `units` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_solution_bound(solution: *const LdSolution, units: *mut i64) -> LdStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let v = s
            .result
            .bound
            .ok_or_else(|| Fail(LdStatus::Undefined, "no bound available".into()))?;
        *out(units, "units")? = v.units();
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ld_solution_nodes(solution: *const LdSolution) -> u64 {
    solution.as_ref().map_or(0, |s| s.result.nodes_explored)
}

/// Lot-type and multiplicity delivered to `branch`. `components` receives
/// up to `len` entries; pass the model's size count.
///
/// # Safety
/// `solution` must be a live handle; `components` must hold `len` values;
/// `multiplicity` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ld_solution_branch(
    solution: *const LdSolution,
    branch: usize,
    components: *mut u32,
    len: usize,
    multiplicity: *mut u32,
) -> LdStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let (comps, k) = s
            .rows
            .get(branch)
            .ok_or_else(|| Fail(LdStatus::OutOfRange, format!("no branch {branch} in the plan")))?;
        if len < comps.len() {
            return Err(Fail(
                LdStatus::OutOfRange,
                format!("buffer holds {len} components, need {}", comps.len()),
            ));
        }
        if components.is_null() {
            return Err(null("components"));
        }
        std::slice::from_raw_parts_mut(components, comps.len()).copy_from_slice(comps);
        *out(multiplicity, "multiplicity")? = *k;
        Ok(())
    })
}
