//! C ABI over tlswitch.
//!
//! Objects are opaque handles created by `tls_*_new`/`tls_*_from_*` and
//! released by the matching `tls_*_free`. Every fallible call returns a
//! [`TlsStatus`]; on failure [`tls_last_error_message`] describes the cause.
//! Strings returned to the caller must be released with [`tls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};

use tlswitch::harness::{HarnessError, Instance};
use tlswitch::model::{Cell, GridConfig};
use tlswitch::reachability::{closed_form_lb, BoundKind, BoundTable};
use tlswitch::switching::{train, wilson_bounds, EpisodeRecord, SwitchStats, TrainConfig};
use tlswitch::twtl::{parse_twtl, save_fsa_json, translate_to_fsa, Fsa};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Translate = 4,
    Model = 5,
    Bound = 6,
    Train = 7,
    InvalidArgument = 8,
    Json = 9,
    Unavailable = 10,
    Panic = 99,
}

/// Bound kind selector for [`tls_analysis_lb`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlsBoundKind {
    Closed = 0,
    Recursive = 1,
}

/// Task automaton.
pub struct TlsFsa {
    fsa: Fsa,
    time_bound: u64,
}

/// Grid world description.
pub struct TlsModel {
    grid: GridConfig,
}

/// Product of a model and an automaton with its bound tables.
pub struct TlsAnalysis {
    instance: Instance,
    closed: Option<BoundTable>,
    closed_error: Option<String>,
    recursive: BoundTable,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(TlsStatus, String);

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let status = match &e {
            HarnessError::Parse(_) => TlsStatus::Parse,
            HarnessError::Translate(_) | HarnessError::Fsa(_) => TlsStatus::Translate,
            HarnessError::Model(_) | HarnessError::Product(_) => TlsStatus::Model,
            HarnessError::Bound(_) => TlsStatus::Bound,
            HarnessError::Train(_) => TlsStatus::Train,
            HarnessError::Json(_) => TlsStatus::Json,
            _ => TlsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: TlsStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TlsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TlsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(TlsStatus::NullPointer, format!("{name} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(TlsStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .map_or_else(|| fail(TlsStatus::NullPointer, format!("{name} is null")), Ok)
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .map_or_else(|| fail(TlsStatus::NullPointer, format!("{name} is null")), Ok)
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .or_else(|_| fail(TlsStatus::Json, "string contains NUL"))
}

/// Message describing the last failure on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and translates a formula. `time_bound` may be null.
///
/// # Safety
/// `formula` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_fsa_from_formula(
    formula: *const c_char,
    out: *mut *mut TlsFsa,
    time_bound: *mut u64,
) -> TlsStatus {
    guard(|| {
        let text = str_arg(formula, "formula")?;
        let out = out_arg(out, "out")?;
        let ast = parse_twtl(text).or_else(|e| fail(TlsStatus::Parse, e.to_string()))?;
        let fsa = translate_to_fsa(&ast).or_else(|e| fail(TlsStatus::Translate, e.to_string()))?;
        let tb = ast.time_bound();
        if !time_bound.is_null() {
            *time_bound = tb;
        }
        *out = Box::into_raw(Box::new(TlsFsa {
            fsa,
            time_bound: tb,
        }));
        Ok(())
    })
}

/// Number of automaton states, or 0 for null.
///
/// # Safety
/// `fsa` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tls_fsa_num_states(fsa: *const TlsFsa) -> usize {
    fsa.as_ref().map_or(0, |f| f.fsa.num_states())
}

/// Serialises the automaton as JSON into a new string.
///
/// # Safety
/// `fsa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_fsa_to_json(fsa: *const TlsFsa, out: *mut *mut c_char) -> TlsStatus {
    guard(|| {
        let fsa = ref_arg(fsa, "fsa")?;
        let out = out_arg(out, "out")?;
        *out = to_c_string(save_fsa_json(&fsa.fsa))?;
        Ok(())
    })
}

/// # Safety
/// `fsa` must come from [`tls_fsa_from_formula`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tls_fsa_free(fsa: *mut TlsFsa) {
    if !fsa.is_null() {
        drop(Box::from_raw(fsa));
    }
}

/// Loads a grid world from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_model_from_json(json: *const c_char, out: *mut *mut TlsModel) -> TlsStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        let grid = GridConfig::from_json(text).or_else(|e| fail(TlsStatus::Model, e.to_string()))?;
        grid.validate()
            .or_else(|e| fail(TlsStatus::Model, e.to_string()))?;
        *out = Box::into_raw(Box::new(TlsModel { grid }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`tls_model_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tls_model_free(model: *mut TlsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Builds the product and both bound tables up to `horizon` steps (0 means
/// the formula's time bound). A negative `epsilon` keeps the model's own.
///
/// # Safety
/// `model` and `fsa` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_analysis_new(
    model: *const TlsModel,
    fsa: *const TlsFsa,
    epsilon: f64,
    horizon: u64,
    out: *mut *mut TlsAnalysis,
) -> TlsStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let fsa = ref_arg(fsa, "fsa")?;
        let out = out_arg(out, "out")?;
        let horizon = if horizon == 0 { fsa.time_bound } else { horizon };
        let eps = (epsilon >= 0.0).then_some(epsilon);
        let instance = Instance::from_fsa(&model.grid, fsa.fsa.clone(), horizon, eps)?;
        let (closed, closed_error) = match instance.bounds(BoundKind::Closed) {
            Ok(t) => (Some(t), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let recursive = instance.bounds(BoundKind::Recursive)?;
        *out = Box::into_raw(Box::new(TlsAnalysis {
            instance,
            closed,
            closed_error,
            recursive,
        }));
        Ok(())
    })
}

/// Number of product states, or 0 for null.
///
/// # Safety
/// `analysis` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tls_analysis_num_states(analysis: *const TlsAnalysis) -> usize {
    analysis
        .as_ref()
        .map_or(0, |a| a.instance.product.num_states())
}

/// Product state of an episode starting in grid cell `(x, y)`.
///
/// # Safety
/// `analysis` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_analysis_initial_state(
    analysis: *const TlsAnalysis,
    x: i32,
    y: i32,
    out: *mut usize,
) -> TlsStatus {
    guard(|| {
        let a = ref_arg(analysis, "analysis")?;
        let out = out_arg(out, "out")?;
        let Some(s) = a.instance.world.state(Cell(x, y)) else {
            return fail(TlsStatus::InvalidArgument, format!("cell {x}:{y} is not free"));
        };
        *out = a.instance.product.initial_for(s);
        Ok(())
    })
}

/// Lower bound on reaching the accepting set from product state `p` within
/// `k` steps.
///
/// # Safety
/// `analysis` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_analysis_lb(
    analysis: *const TlsAnalysis,
    kind: TlsBoundKind,
    p: usize,
    k: u64,
    out: *mut f64,
) -> TlsStatus {
    guard(|| {
        let a = ref_arg(analysis, "analysis")?;
        let out = out_arg(out, "out")?;
        if p >= a.instance.product.num_states() {
            return fail(TlsStatus::InvalidArgument, format!("state {p} out of range"));
        }
        let table = match kind {
            TlsBoundKind::Recursive => &a.recursive,
            TlsBoundKind::Closed => match &a.closed {
                Some(t) => t,
                None => {
                    return fail(
                        TlsStatus::Unavailable,
                        a.closed_error.clone().unwrap_or_default(),
                    )
                }
            },
        };
        if k > table.horizon() {
            return fail(
                TlsStatus::InvalidArgument,
                format!("k = {k} beyond the horizon {}", table.horizon()),
            );
        }
        *out = table.get(k, p);
        Ok(())
    })
}

/// # Safety
/// `analysis` must come from [`tls_analysis_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tls_analysis_free(analysis: *mut TlsAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Closed-form bound for a walk `d` steps from the goal.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_closed_form_lb(
    d: u64,
    k: u64,
    eps: f64,
    delta_max: u64,
    out: *mut f64,
) -> TlsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = closed_form_lb(d, k, eps, delta_max)
            .or_else(|e| fail(TlsStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Wilson score interval for `n_s` successes and `n_f` failures.
///
/// # Safety
/// `low` and `up` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tls_wilson_bounds(
    n_s: u64,
    n_f: u64,
    z: f64,
    low: *mut f64,
    up: *mut f64,
) -> TlsStatus {
    guard(|| {
        let low = out_arg(low, "low")?;
        let up = out_arg(up, "up")?;
        if !(z > 0.0) {
            return fail(TlsStatus::InvalidArgument, "z must be positive");
        }
        (*low, *up) = wilson_bounds(n_s, n_f, z);
        Ok(())
    })
}

fn default_one() -> u64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainRequest {
    formula: String,
    pr_des: f64,
    #[serde(default)]
    epsilon_agent: Option<f64>,
    episodes: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    n_sample: Option<u64>,
    #[serde(default)]
    z: Option<f64>,
    #[serde(default)]
    force: bool,
    #[serde(default = "default_one")]
    runs: u64,
}

#[derive(Serialize)]
struct TrainResponse {
    satisfaction: f64,
    runs: Vec<RunResponse>,
}

#[derive(Serialize)]
struct RunResponse {
    seed: u64,
    episodes: Vec<EpisodeRecord>,
    stats: SwitchStats,
}

/// Trains on `model` with a JSON request
/// (`{"formula", "pr_des", "episodes", "seed", "runs", ...}`) and returns the
/// episode records and switching statistics as JSON.
///
/// # Safety
/// `model` must be a live handle, `request` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tls_train_json(
    model: *const TlsModel,
    request: *const c_char,
    out: *mut *mut c_char,
) -> TlsStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let text = str_arg(request, "request")?;
        let out = out_arg(out, "out")?;
        let req: TrainRequest =
            serde_json::from_str(text).or_else(|e| fail(TlsStatus::Json, e.to_string()))?;
        if req.runs == 0 {
            return fail(TlsStatus::InvalidArgument, "runs must be at least 1");
        }
        let ast = parse_twtl(&req.formula).or_else(|e| fail(TlsStatus::Parse, e.to_string()))?;
        let fsa = translate_to_fsa(&ast).or_else(|e| fail(TlsStatus::Translate, e.to_string()))?;
        let inst = Instance::from_fsa(&model.grid, fsa, ast.time_bound(), req.epsilon_agent)?;
        let certificate = if req.force {
            None
        } else {
            Some(inst.bounds(BoundKind::Recursive)?)
        };
        let mut runs = Vec::new();
        let mut sat = 0.0;
        let mut total = 0usize;
        for r in 0..req.runs {
            let seed = tlswitch::harness::run_seed(req.seed, r);
            let mut cfg = TrainConfig::new(
                req.pr_des,
                req.episodes,
                inst.horizon,
                inst.world.start_state(),
                seed,
            );
            if let Some(n) = req.n_sample {
                cfg.n_sample = n;
            }
            if let Some(z) = req.z {
                cfg.z = z;
            }
            cfg.force = req.force;
            let result = train(
                &inst.mdp,
                &inst.product,
                &inst.analysis.policy,
                certificate.as_ref(),
                &cfg,
            )
            .or_else(|e| fail(TlsStatus::Train, e.to_string()))?;
            sat += result.episodes.iter().filter(|e| e.satisfied).count() as f64;
            total += result.episodes.len();
            runs.push(RunResponse {
                seed,
                episodes: result.episodes,
                stats: result.stats,
            });
        }
        let resp = TrainResponse {
            satisfaction: if total == 0 { 0.0 } else { sat / total as f64 },
            runs,
        };
        let json = serde_json::to_string(&resp).or_else(|e| fail(TlsStatus::Json, e.to_string()))?;
        *out = to_c_string(json)?;
        Ok(())
    })
}
