//! C ABI over the `topicirt` core.
//!
//! Conventions:
//! - Every fallible function returns a [`TirtStatus`] and writes results
//!   through out-pointers, which are left untouched on failure.
//! - After a failure, [`tirt_last_error`] describes it. The message belongs
//!   to the calling thread and stays valid until that thread's next call.
//! - Handles ([`TirtMatrix`], [`TirtFit`]) are opaque and freed with their
//!   own `_free` function. Strings returned by the library are freed with
//!   [`tirt_string_free`].
//! - Panics never cross the boundary; they surface as [`TirtStatus::Panic`].
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use topicirt::analysis::{pareto_points, ModelProfile};
use topicirt::benchmark::QuestionRecord;
use topicirt::harness::{parse_answer, render_prompt, FailureKind, ParsedAnswer};
use topicirt::irt::{fit_2pl, prob_correct, Cell, FitSettings, ItemStatus, ResponseMatrix, TopicFit};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TirtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    OutOfRange = 4,
    /// The quantity is undefined for this input (for example reliability
    /// when every ability estimate is equal).
    Undefined = 5,
    FitFailed = 6,
    Panic = 7,
}

/// Item state after fitting.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TirtItemStatus {
    Fitted = 0,
    ExcludedZeroAccuracy = 1,
    ExcludedPerfectAccuracy = 2,
    NotConverged = 3,
}

impl From<ItemStatus> for TirtItemStatus {
    fn from(s: ItemStatus) -> Self {
        match s {
            ItemStatus::Fitted => TirtItemStatus::Fitted,
            ItemStatus::ExcludedZeroAccuracy => TirtItemStatus::ExcludedZeroAccuracy,
            ItemStatus::ExcludedPerfectAccuracy => TirtItemStatus::ExcludedPerfectAccuracy,
            ItemStatus::NotConverged => TirtItemStatus::NotConverged,
        }
    }
}

/// Outcome of answer parsing. `Letter` comes with the letter itself.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TirtAnswer {
    Letter = 0,
    Deviation = 1,
    NoResponse = 2,
}

/// Cell codes accepted by [`tirt_matrix_new`].
pub const TIRT_CELL_INCORRECT: i8 = 0;
pub const TIRT_CELL_CORRECT: i8 = 1;
pub const TIRT_CELL_MISSING: i8 = -1;

/// Settings for [`tirt_fit_2pl`]. Start from [`tirt_fit_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TirtFitOptions {
    pub grid_nodes: usize,
    pub grid_half_span: f64,
    pub tol: f64,
    pub max_cycles: usize,
}

/// Opaque response matrix.
pub struct TirtMatrix(ResponseMatrix);

/// Opaque fitted topic.
pub struct TirtFit(TopicFit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(text).expect("nul bytes replaced")));
}

/// Runs `f`, recording failures and catching panics.
fn guard(f: impl FnOnce() -> Result<(), (TirtStatus, String)>) -> TirtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TirtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TirtStatus::Panic
        }
    }
}

type FfiResult<T = ()> = Result<T, (TirtStatus, String)>;

fn invalid(msg: impl ToString) -> (TirtStatus, String) {
    (TirtStatus::InvalidArgument, msg.to_string())
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or((TirtStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or((TirtStatus::NullPointer, format!("{name} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err((TirtStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (TirtStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes replaced").into_raw()
}

/// Message for the last failure on this thread, or null if the last call
/// succeeded.
#[no_mangle]
pub extern "C" fn tirt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tirt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// P(correct) = 1 / (1 + exp(-a (theta - b))).
#[no_mangle]
pub unsafe extern "C" fn tirt_prob_correct(a: f64, b: f64, theta: f64, out_p: *mut f64) -> TirtStatus {
    guard(|| {
        let slot = out(out_p, "out_p")?;
        *slot = prob_correct(a, b, theta).map_err(invalid)?;
        Ok(())
    })
}

/// Builds a matrix from row-major cell codes (`n_models * n_items` of them).
/// Ids are generated as `m0, m1, ...` and `i0, i1, ...`.
#[no_mangle]
pub unsafe extern "C" fn tirt_matrix_new(
    n_models: usize,
    n_items: usize,
    cells: *const i8,
    out_matrix: *mut *mut TirtMatrix,
) -> TirtStatus {
    guard(|| {
        let slot = out(out_matrix, "out_matrix")?;
        let len = n_models.checked_mul(n_items).ok_or_else(|| invalid("matrix size overflows"))?;
        let codes: &[i8] = if len == 0 {
            &[]
        } else {
            deref(cells, "cells")?;
            std::slice::from_raw_parts(cells, len)
        };
        let cells = codes
            .iter()
            .enumerate()
            .map(|(k, &c)| match c {
                TIRT_CELL_CORRECT => Ok(Cell::Correct),
                TIRT_CELL_INCORRECT => Ok(Cell::Incorrect),
                TIRT_CELL_MISSING => Ok(Cell::Missing),
                other => Err(invalid(format!("cell {k} has code {other}"))),
            })
            .collect::<FfiResult<Vec<_>>>()?;
        let models = (0..n_models).map(|m| format!("m{m}")).collect();
        let items = (0..n_items).map(|i| format!("i{i}")).collect();
        let matrix = ResponseMatrix::new(models, items, cells).map_err(invalid)?;
        *slot = Box::into_raw(Box::new(TirtMatrix(matrix)));
        Ok(())
    })
}

/// Parses a matrix document (`model_ids`, `item_ids`, `rows` of `1`/`0`/`.`).
#[no_mangle]
pub unsafe extern "C" fn tirt_matrix_from_json(json: *const c_char, out_matrix: *mut *mut TirtMatrix) -> TirtStatus {
    guard(|| {
        let slot = out(out_matrix, "out_matrix")?;
        let matrix: ResponseMatrix = serde_json::from_str(c_str(json, "json")?).map_err(invalid)?;
        *slot = Box::into_raw(Box::new(TirtMatrix(matrix)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tirt_matrix_free(matrix: *mut TirtMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

#[no_mangle]
pub extern "C" fn tirt_fit_options_default() -> TirtFitOptions {
    let d = FitSettings::default();
    TirtFitOptions { grid_nodes: d.grid_nodes, grid_half_span: d.grid_half_span, tol: d.tol, max_cycles: d.max_cycles }
}

/// Fits a 2PL model. `options` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_2pl(
    matrix: *const TirtMatrix,
    options: *const TirtFitOptions,
    out_fit: *mut *mut TirtFit,
) -> TirtStatus {
    guard(|| {
        let slot = out(out_fit, "out_fit")?;
        let matrix = deref(matrix, "matrix")?;
        let o = options.as_ref().copied().unwrap_or_else(|| tirt_fit_options_default());
        let settings = FitSettings {
            grid_nodes: o.grid_nodes,
            grid_half_span: o.grid_half_span,
            tol: o.tol,
            max_cycles: o.max_cycles,
            ..FitSettings::default()
        };
        let fit = fit_2pl("topic", &matrix.0, &settings).map_err(|e| (TirtStatus::FitFailed, e.to_string()))?;
        *slot = Box::into_raw(Box::new(TirtFit(fit)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tirt_fit_free(fit: *mut TirtFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of items, excluded ones included. Zero for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_n_items(fit: *const TirtFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.items.len())
}

/// Number of models. Zero for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_n_models(fit: *const TirtFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.abilities.len())
}

/// Parameters of item `index`, in matrix column order. Excluded items
/// report a = b = 0.
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_item(
    fit: *const TirtFit,
    index: usize,
    out_a: *mut f64,
    out_b: *mut f64,
    out_status: *mut TirtItemStatus,
) -> TirtStatus {
    guard(|| {
        let fit = deref(fit, "fit")?;
        let (a, b, s) = (out(out_a, "out_a")?, out(out_b, "out_b")?, out(out_status, "out_status")?);
        let item = fit.0.items.get(index).ok_or((TirtStatus::OutOfRange, format!("no item {index}")))?;
        (*a, *b, *s) = (item.a, item.b, item.status.into());
        Ok(())
    })
}

/// EAP ability and posterior sd of model `index`, in matrix row order.
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_ability(
    fit: *const TirtFit,
    index: usize,
    out_theta: *mut f64,
    out_se: *mut f64,
) -> TirtStatus {
    guard(|| {
        let fit = deref(fit, "fit")?;
        let (theta, se) = (out(out_theta, "out_theta")?, out(out_se, "out_se")?);
        let est = fit.0.abilities.get(index).ok_or((TirtStatus::OutOfRange, format!("no model {index}")))?;
        (*theta, *se) = (est.theta, est.se);
        Ok(())
    })
}

/// Marginal reliability; `Undefined` when the abilities have no spread.
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_reliability(fit: *const TirtFit, out_r: *mut f64) -> TirtStatus {
    guard(|| {
        let fit = deref(fit, "fit")?;
        let slot = out(out_r, "out_r")?;
        *slot = fit.0.reliability.ok_or((TirtStatus::Undefined, "ability estimates have zero variance".into()))?;
        Ok(())
    })
}

/// 1 if EM met its tolerance, 0 otherwise or for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_converged(fit: *const TirtFit) -> i32 {
    fit.as_ref().map_or(0, |f| i32::from(f.0.converged))
}

/// The whole fit as a JSON document. Free with [`tirt_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tirt_fit_to_json(fit: *const TirtFit, out_json: *mut *mut c_char) -> TirtStatus {
    guard(|| {
        let fit = deref(fit, "fit")?;
        let slot = out(out_json, "out_json")?;
        *slot = into_c_string(serde_json::to_string(&fit.0).expect("fit serializes"));
        Ok(())
    })
}

/// Strict answer parsing. `allowed` lists the option letters (`"ABCD"`).
/// On `Letter`, `out_letter` receives it; otherwise it is set to 0.
#[no_mangle]
pub unsafe extern "C" fn tirt_parse_answer(
    raw: *const c_char,
    allowed: *const c_char,
    out_kind: *mut TirtAnswer,
    out_letter: *mut c_char,
) -> TirtStatus {
    guard(|| {
        let raw = c_str(raw, "raw")?;
        let allowed: Vec<char> = c_str(allowed, "allowed")?.chars().collect();
        let (kind, letter) = (out(out_kind, "out_kind")?, out(out_letter, "out_letter")?);
        if allowed.iter().any(|c| !c.is_ascii_uppercase()) {
            return Err(invalid("allowed letters must be A-Z"));
        }
        (*kind, *letter) = match parse_answer(raw, &allowed) {
            ParsedAnswer::Letter(c) => (TirtAnswer::Letter, c as u8 as c_char),
            ParsedAnswer::Failure(FailureKind::Deviation) => (TirtAnswer::Deviation, 0),
            ParsedAnswer::Failure(FailureKind::NoResponse) => (TirtAnswer::NoResponse, 0),
        };
        Ok(())
    })
}

/// Renders the evaluation prompt for one question given as a JSON line
/// (`id`, `source`, `question`, `options`, `answer`). Free the result with
/// [`tirt_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tirt_render_prompt(question_json: *const c_char, out_prompt: *mut *mut c_char) -> TirtStatus {
    guard(|| {
        let slot = out(out_prompt, "out_prompt")?;
        let q: QuestionRecord = serde_json::from_str(c_str(question_json, "question_json")?).map_err(invalid)?;
        *slot = into_c_string(render_prompt(&q).map_err(invalid)?);
        Ok(())
    })
}

/// Efficiency ratios and Pareto dominance for `n` models.
///
/// Inputs are composite ability, total cost in USD and mean latency in
/// seconds. Outputs (each `n` long) are ability per dollar, ability per
/// second and 1 for dominated models, 0 for frontier members. Objectives
/// are maximized jointly over (theta, theta/$, theta/s).
#[no_mangle]
pub unsafe extern "C" fn tirt_pareto(
    n: usize,
    theta: *const f64,
    cost_usd: *const f64,
    latency_secs: *const f64,
    out_per_dollar: *mut f64,
    out_per_second: *mut f64,
    out_dominated: *mut u8,
) -> TirtStatus {
    guard(|| {
        if n == 0 {
            return Ok(());
        }
        let slice = |p: *const f64, name| deref(p, name).map(|_| std::slice::from_raw_parts(p, n));
        let (theta, cost, latency) = (slice(theta, "theta")?, slice(cost_usd, "cost_usd")?, slice(latency_secs, "latency_secs")?);
        out(out_per_dollar, "out_per_dollar")?;
        out(out_per_second, "out_per_second")?;
        out(out_dominated, "out_dominated")?;
        let profiles: Vec<ModelProfile> = (0..n)
            .map(|k| ModelProfile {
                model_id: k.to_string(),
                theta_by_topic: BTreeMap::new(),
                z_by_topic: BTreeMap::new(),
                composite: theta[k],
                accuracy_by_topic: BTreeMap::new(),
                overall_accuracy: 0.0,
                mean_latency_secs: latency[k],
                total_cost_usd: cost[k],
            })
            .collect();
        let points = pareto_points(&profiles).map_err(invalid)?;
        let per_dollar = std::slice::from_raw_parts_mut(out_per_dollar, n);
        let per_second = std::slice::from_raw_parts_mut(out_per_second, n);
        let dominated = std::slice::from_raw_parts_mut(out_dominated, n);
        for (k, p) in points.iter().enumerate() {
            per_dollar[k] = p.theta_per_dollar;
            per_second[k] = p.theta_per_second;
            dominated[k] = u8::from(p.dominated);
        }
        Ok(())
    })
}
