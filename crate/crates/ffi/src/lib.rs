//! C ABI over `cr-timeshare`.
//!
//! Every fallible function returns a [`CrtsStatus`] and writes its result
//! through an out pointer. On failure a description is available from
//! [`crts_last_error_message`] on the same thread. Scenarios are opaque
//! handles created with [`crts_scenario_new`] and released with
//! [`crts_scenario_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cr_timeshare::montecarlo::run_scenario_with;
use cr_timeshare::{
    alpha_boundary, alpha_unconstrained, calibrate_lambda, choose_alpha, rate, snr_factor,
    solve_z0, CalibrationMode, CalibrationResult, ChannelDraw, Error, Phase, RunMetrics,
    ScenarioResult, SlotDecision, SlotStreams, SystemParams,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrtsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    EmptyInput = 4,
    /// The scenario has not been run yet.
    NotRun = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrtsPolicy {
    Optimal = 0,
    Fixed = 1,
    Unconstrained = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrtsPhase {
    Training = 0,
    Evaluation = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrtsCalibrationMode {
    OutOfSample = 0,
    InSample = 1,
}

/// Scenario parameters in linear SI units (watts, power gains).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrtsParams {
    pub pt: f64,
    pub noise: f64,
    pub gamma_th: f64,
    pub epsilon: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub mu_g: f64,
    pub mu_z: f64,
    pub m_slots: usize,
    pub m_train: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrtsChannelDraw {
    pub x: f64,
    pub y: f64,
    pub g: f64,
    pub z: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrtsSlotDecision {
    pub alpha: f64,
    pub outage: bool,
    pub rate: f64,
    pub tx_power: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrtsRunMetrics {
    pub avg_rate: f64,
    pub p_he: f64,
    pub outage_fraction: f64,
    pub m_slots: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrtsCalibration {
    pub lambda: f64,
    pub train_outage_fraction: f64,
    pub binding: bool,
}

/// Opaque scenario handle.
pub struct CrtsScenario {
    params: SystemParams,
    result: Option<ScenarioResult>,
}

impl From<CrtsParams> for SystemParams {
    fn from(p: CrtsParams) -> Self {
        SystemParams {
            pt: p.pt,
            noise: p.noise,
            gamma_th: p.gamma_th,
            epsilon: p.epsilon,
            mu_x: p.mu_x,
            mu_y: p.mu_y,
            mu_g: p.mu_g,
            mu_z: p.mu_z,
            m_slots: p.m_slots,
            m_train: p.m_train,
            seed: p.seed,
        }
    }
}

impl From<SystemParams> for CrtsParams {
    fn from(p: SystemParams) -> Self {
        CrtsParams {
            pt: p.pt,
            noise: p.noise,
            gamma_th: p.gamma_th,
            epsilon: p.epsilon,
            mu_x: p.mu_x,
            mu_y: p.mu_y,
            mu_g: p.mu_g,
            mu_z: p.mu_z,
            m_slots: p.m_slots,
            m_train: p.m_train,
            seed: p.seed,
        }
    }
}

impl From<CrtsChannelDraw> for ChannelDraw {
    fn from(d: CrtsChannelDraw) -> Self {
        ChannelDraw {
            x: d.x,
            y: d.y,
            g: d.g,
            z: d.z,
        }
    }
}

impl From<ChannelDraw> for CrtsChannelDraw {
    fn from(d: ChannelDraw) -> Self {
        CrtsChannelDraw {
            x: d.x,
            y: d.y,
            g: d.g,
            z: d.z,
        }
    }
}

impl From<SlotDecision> for CrtsSlotDecision {
    fn from(d: SlotDecision) -> Self {
        CrtsSlotDecision {
            alpha: d.alpha,
            outage: d.outage,
            rate: d.rate,
            tx_power: d.tx_power,
        }
    }
}

impl From<RunMetrics> for CrtsRunMetrics {
    fn from(m: RunMetrics) -> Self {
        CrtsRunMetrics {
            avg_rate: m.avg_rate,
            p_he: m.p_he,
            outage_fraction: m.outage_fraction,
            m_slots: m.m_slots,
        }
    }
}

impl From<CalibrationResult> for CrtsCalibration {
    fn from(c: CalibrationResult) -> Self {
        CrtsCalibration {
            lambda: c.lambda,
            train_outage_fraction: c.train_outage_fraction,
            binding: c.binding,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes were replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(error: &Error) -> CrtsStatus {
    match error {
        Error::Domain { .. } => CrtsStatus::Domain,
        Error::EmptyTrainingSet | Error::EmptyRun => CrtsStatus::EmptyInput,
        _ => CrtsStatus::InvalidParameter,
    }
}

struct Failure(CrtsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CrtsStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status code and the
/// thread's last error message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CrtsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_last_error();
            CrtsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("internal error: {message}"));
            CrtsStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn read<T: Copy>(ptr: *const T, name: &str) -> Result<T, Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(unsafe { ptr.read() })
}

/// Message of the last failed call on this thread, or null if the last call
/// succeeded. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn crts_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crts_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains a nul byte"),
        };
    VERSION.as_ptr()
}

#[no_mangle]
pub extern "C" fn crts_params_default() -> CrtsParams {
    SystemParams::default().into()
}

/// Validates `params` and allocates a scenario. Draws are generated lazily.
///
/// # Safety
/// `params` must point to a valid `CrtsParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_scenario_new(
    params: *const CrtsParams,
    out: *mut *mut CrtsScenario,
) -> CrtsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params: SystemParams = unsafe { read(params, "params") }?.into();
        params.validate()?;
        let handle = Box::into_raw(Box::new(CrtsScenario {
            params,
            result: None,
        }));
        unsafe { write(out, "out", handle) }
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from `crts_scenario_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn crts_scenario_free(scenario: *mut CrtsScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Calibrates the penalty and runs the optimal, fixed (alpha = 0.5) and
/// unconstrained policies. Replaces the results of any earlier run.
///
/// # Safety
/// `scenario` must be a live handle not used concurrently from another thread.
#[no_mangle]
pub unsafe extern "C" fn crts_scenario_run(
    scenario: *mut CrtsScenario,
    mode: CrtsCalibrationMode,
) -> CrtsStatus {
    guard(|| {
        let scenario = unsafe { scenario.as_mut() }.ok_or_else(|| null("scenario"))?;
        let mode = match mode {
            CrtsCalibrationMode::OutOfSample => CalibrationMode::OutOfSample,
            CrtsCalibrationMode::InSample => CalibrationMode::InSample,
        };
        scenario.result = Some(run_scenario_with(&scenario.params, mode, 0)?);
        Ok(())
    })
}

fn results(scenario: &CrtsScenario) -> Result<&ScenarioResult, Failure> {
    scenario
        .result
        .as_ref()
        .ok_or_else(|| Failure(CrtsStatus::NotRun, "scenario has not been run".to_string()))
}

/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_scenario_metrics(
    scenario: *const CrtsScenario,
    policy: CrtsPolicy,
    out: *mut CrtsRunMetrics,
) -> CrtsStatus {
    guard(|| {
        let scenario = unsafe { scenario.as_ref() }.ok_or_else(|| null("scenario"))?;
        let r = results(scenario)?;
        let run = match policy {
            CrtsPolicy::Optimal => &r.optimal,
            CrtsPolicy::Fixed => &r.fixed,
            CrtsPolicy::Unconstrained => &r.unconstrained,
        };
        unsafe { write(out, "out", run.metrics.into()) }
    })
}

/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_scenario_calibration(
    scenario: *const CrtsScenario,
    out: *mut CrtsCalibration,
) -> CrtsStatus {
    guard(|| {
        let scenario = unsafe { scenario.as_ref() }.ok_or_else(|| null("scenario"))?;
        let calibration = results(scenario)?.calibration;
        unsafe { write(out, "out", calibration.into()) }
    })
}

/// Fading draw of slot `index` in the given phase. Any index is valid; the
/// draws used by a run are indices below `m_train` or `m_slots`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_scenario_draw(
    scenario: *const CrtsScenario,
    phase: CrtsPhase,
    index: u64,
    out: *mut CrtsChannelDraw,
) -> CrtsStatus {
    guard(|| {
        let scenario = unsafe { scenario.as_ref() }.ok_or_else(|| null("scenario"))?;
        let phase = match phase {
            CrtsPhase::Training => Phase::Training,
            CrtsPhase::Evaluation => Phase::Evaluation,
        };
        let draw = SlotStreams::new(scenario.params.seed, phase).draw(index, &scenario.params);
        unsafe { write(out, "out", draw.into()) }
    })
}

/// Root `z0 > 1` of `z ln z - z - s + 1 = 0` for `s > 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_solve_z0(s: f64, out: *mut f64) -> CrtsStatus {
    guard(|| unsafe { write(out, "out", solve_z0(s)?) })
}

/// Achievable rate of transmitting for fraction `alpha` of the slot.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_rate(alpha: f64, s: f64, out: *mut f64) -> CrtsStatus {
    guard(|| unsafe { write(out, "out", rate(alpha, s)?) })
}

/// Rate-maximizing transmit fraction; 1 when `s` is not positive.
#[no_mangle]
pub extern "C" fn crts_alpha_unconstrained(s: f64) -> f64 {
    alpha_unconstrained(s)
}

/// Smallest transmit fraction that keeps interference within `gamma_th`.
#[no_mangle]
pub extern "C" fn crts_alpha_boundary(g: f64, z: f64, pt: f64, gamma_th: f64) -> f64 {
    alpha_boundary(g, z, pt, gamma_th)
}

/// # Safety
/// `draw` and `params` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_snr_factor(
    draw: *const CrtsChannelDraw,
    params: *const CrtsParams,
    out: *mut f64,
) -> CrtsStatus {
    guard(|| {
        let draw: ChannelDraw = unsafe { read(draw, "draw") }?.into();
        let params: SystemParams = unsafe { read(params, "params") }?.into();
        unsafe { write(out, "out", snr_factor(&draw, &params)) }
    })
}

/// Per-slot decision of the penalized rule.
///
/// # Safety
/// `draw` and `params` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_choose_alpha(
    draw: *const CrtsChannelDraw,
    params: *const CrtsParams,
    lambda: f64,
    out: *mut CrtsSlotDecision,
) -> CrtsStatus {
    guard(|| {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Failure(
                CrtsStatus::InvalidParameter,
                format!("lambda {lambda} is negative"),
            ));
        }
        let draw: ChannelDraw = unsafe { read(draw, "draw") }?.into();
        let params: SystemParams = unsafe { read(params, "params") }?.into();
        unsafe { write(out, "out", choose_alpha(&draw, &params, lambda).into()) }
    })
}

/// Calibrates the outage penalty on `count` caller-supplied training draws.
///
/// # Safety
/// `draws` must point to `count` valid draws; `params` must be valid; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn crts_calibrate_lambda(
    draws: *const CrtsChannelDraw,
    count: usize,
    params: *const CrtsParams,
    out: *mut CrtsCalibration,
) -> CrtsStatus {
    guard(|| {
        let params: SystemParams = unsafe { read(params, "params") }?.into();
        params.validate()?;
        let draws: Vec<ChannelDraw> = if count == 0 {
            Vec::new()
        } else if draws.is_null() {
            return Err(null("draws"));
        } else {
            unsafe { std::slice::from_raw_parts(draws, count) }
                .iter()
                .map(|&d| d.into())
                .collect()
        };
        unsafe { write(out, "out", calibrate_lambda(&draws, &params)?.into()) }
    })
}
