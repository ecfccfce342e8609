//! C ABI for `rectmatch`.
//!
//! Every fallible function returns an [`RmStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read with
//! [`rm_last_error_message`]. Objects are opaque handles created by the
//! `*_generate` and `*_from_*` functions and released with the matching `*_free`.
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::time::Duration;

use num_traits::ToPrimitive;
use rectmatch::concentration::{borel_cantelli_tail, mcdiarmid_bound, DifferenceProfile};
use rectmatch::counterexample::{alt_chain_probability, conditional_extension_exact};
use rectmatch::geometry::{generate_instance, read_instance_csv, Color, ColoredPoint, Instance, Matching, PointModel};
use rectmatch::process::{alpha, convergence_index, expectation_bounds, stationary, ChainSpec};
use rectmatch::solvers::{solve, SolveLimits, SolverChoice};
use rectmatch::Error;

/// Status codes. `RM_STATUS_OK` is zero; everything else is a failure,
/// except that `RM_STATUS_BUDGET_EXCEEDED` from [`rm_solve`] still returns
/// the best matching found.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GeneralPosition = 3,
    IndexOutOfRange = 4,
    InstanceTooLarge = 5,
    BudgetExceeded = 6,
    ChainInvalid = 7,
    Parse = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmModel {
    UniformSquare = 0,
    GridX = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmSolver {
    Exact = 0,
    Bruteforce = 1,
    Greedy = 2,
}

/// Red is 0, blue is 1.
pub type RmColor = u8;

/// Point set in general position, sorted by x.
pub struct RmInstance(Instance);

/// Result of a solve.
pub struct RmMatching {
    matching: Matching,
    optimal: bool,
    nodes: u64,
}

/// Finite-state chain with rewards and an initial distribution.
pub struct RmChain(ChainSpec);

/// Expectation bounds for a reward sum over `n` steps.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RmExpectationBounds {
    pub alpha: f64,
    pub m: f64,
    /// Zero when every reward is zero.
    pub delta: f64,
    pub n0: usize,
    pub lower: f64,
    pub upper: f64,
    pub exact: f64,
    pub degenerate: bool,
    pub zero_reward: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RmStatus {
    match e {
        Error::InvalidParameter(_) | Error::InsufficientSamples(_) | Error::EmptyProfile => RmStatus::InvalidArgument,
        Error::GeneralPositionViolation(_) => RmStatus::GeneralPosition,
        Error::IndexOutOfRange { .. } => RmStatus::IndexOutOfRange,
        Error::InstanceTooLarge { .. } => RmStatus::InstanceTooLarge,
        Error::BudgetExceeded { .. } => RmStatus::BudgetExceeded,
        Error::Parse { .. } | Error::Json(_) => RmStatus::Parse,
        Error::Io(_) => RmStatus::Io,
        e if e.is_chain_validation() => RmStatus::ChainInvalid,
        _ => RmStatus::InvalidArgument,
    }
}

fn fail(status: RmStatus, msg: impl Into<String>) -> RmStatus {
    set_last_error(msg.into());
    status
}

fn fail_with(e: Error) -> RmStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

/// Runs `f`, turning panics into `RM_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> RmStatus) -> RmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(RmStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(RmStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

macro_rules! try_rm {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail_with(e),
        }
    };
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// Instances

/// Random instance of `n` points.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_generate(
    n: usize,
    seed: u64,
    model: RmModel,
    out: *mut *mut RmInstance,
) -> RmStatus {
    guard(|| {
        nonnull!(out);
        let model = match model {
            RmModel::UniformSquare => PointModel::UniformSquare,
            RmModel::GridX => PointModel::GridX,
        };
        let inst = try_rm!(generate_instance(n, seed, model));
        *out = boxed(RmInstance(inst));
        RmStatus::Ok
    })
}

/// Instance from coordinate and color arrays of length `n`. Points are
/// re-sorted by x, so indices of the result follow x order.
///
/// # Safety
/// `xs`, `ys` and `colors` must point to `n` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_from_points(
    xs: *const f64,
    ys: *const f64,
    colors: *const RmColor,
    n: usize,
    out: *mut *mut RmInstance,
) -> RmStatus {
    guard(|| {
        nonnull!(xs, ys, colors, out);
        let (xs, ys, cs) = (
            std::slice::from_raw_parts(xs, n),
            std::slice::from_raw_parts(ys, n),
            std::slice::from_raw_parts(colors, n),
        );
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let Some(color) = Color::from_code(cs[i]) else {
                return fail(RmStatus::InvalidArgument, format!("color code {} at index {i}", cs[i]));
            };
            pts.push(ColoredPoint::new(xs[i], ys[i], color));
        }
        *out = boxed(RmInstance(try_rm!(Instance::new(pts))));
        RmStatus::Ok
    })
}

/// Reads an instance CSV (`x,y,color` with colors `R`/`B`).
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_from_csv(path: *const c_char, out: *mut *mut RmInstance) -> RmStatus {
    guard(|| {
        nonnull!(path, out);
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(RmStatus::InvalidArgument, "path is not UTF-8");
        };
        let file = try_rm!(std::fs::File::open(Path::new(path)).map_err(Error::from));
        let inst = try_rm!(read_instance_csv(std::io::BufReader::new(file)));
        *out = boxed(RmInstance(inst));
        RmStatus::Ok
    })
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_len(inst: *const RmInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.len())
}

/// Point `i` in x order.
///
/// # Safety
/// `inst` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_point(
    inst: *const RmInstance,
    i: usize,
    x: *mut f64,
    y: *mut f64,
    color: *mut RmColor,
) -> RmStatus {
    guard(|| {
        nonnull!(inst, x, y, color);
        let inst = &(*inst).0;
        if i >= inst.len() {
            return fail_with(Error::IndexOutOfRange { index: i, len: inst.len() });
        }
        let p = inst.point(i);
        (*x, *y, *color) = (p.x, p.y, p.color.code());
        RmStatus::Ok
    })
}

/// # Safety
/// `inst` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_instance_free(inst: *mut RmInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

// Solving

/// Solves `inst`. `max_nodes` and `time_budget_seconds` bound the exact
/// search. On `RM_STATUS_BUDGET_EXCEEDED` the best matching found is still
/// written to `out` and marked not optimal.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_solve(
    inst: *const RmInstance,
    solver: RmSolver,
    max_nodes: u64,
    time_budget_seconds: f64,
    out: *mut *mut RmMatching,
) -> RmStatus {
    guard(|| {
        nonnull!(inst, out);
        if !(time_budget_seconds > 0.0) || !time_budget_seconds.is_finite() {
            return fail(RmStatus::InvalidArgument, "time budget must be positive");
        }
        let limits = try_rm!(SolveLimits::new(max_nodes, Duration::from_secs_f64(time_budget_seconds)));
        let choice = match solver {
            RmSolver::Exact => SolverChoice::Exact,
            RmSolver::Bruteforce => SolverChoice::Bruteforce,
            RmSolver::Greedy => SolverChoice::Greedy,
        };
        match solve(&(*inst).0, choice, &limits) {
            Ok(o) => {
                *out = boxed(RmMatching { matching: o.matching, optimal: o.optimal, nodes: o.nodes_explored });
                RmStatus::Ok
            }
            Err(Error::BudgetExceeded { best, nodes }) => {
                *out = boxed(RmMatching { matching: best, optimal: false, nodes });
                fail(RmStatus::BudgetExceeded, format!("search budget exceeded after {nodes} nodes"))
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Number of pairs, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_matching_pair_count(m: *const RmMatching) -> usize {
    m.as_ref().map_or(0, |m| m.matching.len())
}

/// Points covered (twice the pair count).
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_matching_matched_count(m: *const RmMatching) -> usize {
    m.as_ref().map_or(0, |m| m.matching.matched_count())
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_matching_is_optimal(m: *const RmMatching) -> bool {
    m.as_ref().is_some_and(|m| m.optimal)
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_matching_nodes_explored(m: *const RmMatching) -> u64 {
    m.as_ref().map_or(0, |m| m.nodes)
}

/// Pair `k` in sorted order, as point indices `i < j`.
///
/// # Safety
/// `m` must be a live handle; `i` and `j` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_matching_pair(m: *const RmMatching, k: usize, i: *mut usize, j: *mut usize) -> RmStatus {
    guard(|| {
        nonnull!(m, i, j);
        let pairs = (*m).matching.pairs();
        match pairs.get(k) {
            Some(&(a, b)) => {
                (*i, *j) = (a, b);
                RmStatus::Ok
            }
            None => fail_with(Error::IndexOutOfRange { index: k, len: pairs.len() }),
        }
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_matching_free(m: *mut RmMatching) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

// Chains

/// Parses a chain spec: `{"states": [...], "P": [[...]], "f": [...], "p1": [...]}`
/// with `P` column-stochastic.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_chain_from_json(json: *const c_char, out: *mut *mut RmChain) -> RmStatus {
    guard(|| {
        nonnull!(json, out);
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(RmStatus::InvalidArgument, "chain JSON is not UTF-8");
        };
        *out = boxed(RmChain(try_rm!(ChainSpec::from_json(text))));
        RmStatus::Ok
    })
}

/// Number of states, or 0 for NULL.
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_chain_len(c: *const RmChain) -> usize {
    c.as_ref().map_or(0, |c| c.0.len())
}

/// Writes the stationary distribution into `out[0..len]`; `len` must equal the state count.
///
/// # Safety
/// `c` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rm_chain_stationary(c: *const RmChain, tol: f64, out: *mut f64, len: usize) -> RmStatus {
    guard(|| {
        nonnull!(c, out);
        let c = &(*c).0;
        if len != c.len() {
            return fail(RmStatus::InvalidArgument, format!("buffer length {len}, chain has {} states", c.len()));
        }
        let s = try_rm!(stationary(c, tol));
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(s.as_slice());
        RmStatus::Ok
    })
}

/// Stationary reward rate `f · s`.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_chain_alpha(c: *const RmChain, out: *mut f64) -> RmStatus {
    guard(|| {
        nonnull!(c, out);
        *out = try_rm!(alpha(&(*c).0));
        RmStatus::Ok
    })
}

/// Smallest `t ≤ cap` with every entry of `Qᵗ` within `delta` of its limit.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_chain_convergence_index(
    c: *const RmChain,
    delta: f64,
    cap: usize,
    out: *mut usize,
) -> RmStatus {
    guard(|| {
        nonnull!(c, out);
        if !(delta > 0.0) {
            return fail(RmStatus::InvalidArgument, "delta must be positive");
        }
        *out = try_rm!(convergence_index(&(*c).0, delta, cap));
        RmStatus::Ok
    })
}

/// Lower and upper bounds on the expected reward sum over `n` steps, with the exact value.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_chain_expectation_bounds(
    c: *const RmChain,
    epsilon: f64,
    n: usize,
    cap: usize,
    out: *mut RmExpectationBounds,
) -> RmStatus {
    guard(|| {
        nonnull!(c, out);
        let r = try_rm!(expectation_bounds(&(*c).0, epsilon, n, cap));
        *out = RmExpectationBounds {
            alpha: r.alpha,
            m: r.m,
            delta: r.delta.unwrap_or(0.0),
            n0: r.n0,
            lower: r.lower,
            upper: r.upper,
            exact: r.exact,
            degenerate: r.degenerate,
            zero_reward: r.zero_reward,
        };
        RmStatus::Ok
    })
}

/// # Safety
/// `c` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_chain_free(c: *mut RmChain) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

// Closed forms

/// McDiarmid bound for the constants `d[0..len]`.
///
/// # Safety
/// `d` must point to `len` readable doubles (may be NULL when `len` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_mcdiarmid_bound(
    d: *const f64,
    len: usize,
    epsilon: f64,
    two_sided: bool,
    out: *mut f64,
) -> RmStatus {
    guard(|| {
        nonnull!(out);
        let d: &[f64] = if len == 0 {
            &[]
        } else {
            nonnull!(d);
            std::slice::from_raw_parts(d, len)
        };
        *out = try_rm!(mcdiarmid_bound(d, epsilon, two_sided));
        RmStatus::Ok
    })
}

/// McDiarmid bound for the matched-fraction profile of size `n` (`4/n` and `2/n`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_mcdiarmid_profile_bound(
    n: usize,
    epsilon: f64,
    two_sided: bool,
    out: *mut f64,
) -> RmStatus {
    guard(|| {
        nonnull!(out);
        let p = try_rm!(DifferenceProfile::new(n));
        *out = try_rm!(mcdiarmid_bound(&p.d, epsilon, two_sided));
        RmStatus::Ok
    })
}

/// `(n0 - 1) + 2 r^n0 / (1 - r)` with `r = exp(-ε²/40)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_borel_cantelli_tail(epsilon: f64, n0: u64, out: *mut f64) -> RmStatus {
    guard(|| {
        nonnull!(out);
        *out = try_rm!(borel_cantelli_tail(epsilon, n0));
        RmStatus::Ok
    })
}

/// `1 / (t! 2^(t-2))` rounded to double (`t ≥ 2`); underflows to 0 for large `t`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_alt_chain_probability(t: u32, out: *mut f64) -> RmStatus {
    guard(|| {
        nonnull!(out);
        *out = try_rm!(alt_chain_probability(t)).to_f64().unwrap_or(0.0);
        RmStatus::Ok
    })
}

/// `1 / (2t)` (`t ≥ 3`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_conditional_extension_probability(t: u32, out: *mut f64) -> RmStatus {
    guard(|| {
        nonnull!(out);
        *out = try_rm!(conditional_extension_exact(t)).to_f64().unwrap_or(0.0);
        RmStatus::Ok
    })
}
