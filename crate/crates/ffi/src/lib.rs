//! C ABI over `beam_attractor`.
//!
//! Models and records are opaque heap handles created and released through
//! this API. Every fallible call returns a [`BeamStatus`]; on failure the
//! message is available from [`beam_last_error_message`] on the same thread.
//! Array arguments are caller-owned buffers of length `modes`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use beam_attractor::cli::ExperimentConfig;
use beam_attractor::energy;
use beam_attractor::integrator::{auto_dt, integrate, IntegrationSettings, Scheme, TrajectoryRecord};
use beam_attractor::model::{ModelConfig, State};
use beam_attractor::spectral::ModalVector;
use beam_attractor::{attractor, BeamError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    DimensionMismatch = 4,
    Divergence = 5,
    NoConvergence = 6,
    SingularJacobian = 7,
    Io = 8,
    Other = 9,
    Panic = 10,
}

/// Model built from an experiment file.
pub struct BeamModel {
    config: ExperimentConfig,
    model: ModelConfig,
}

/// Sampled trajectory.
pub struct BeamRecord {
    record: TrajectoryRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &BeamError) -> BeamStatus {
    match e {
        BeamError::Config { .. } => BeamStatus::Config,
        BeamError::DimensionMismatch { .. } => BeamStatus::DimensionMismatch,
        BeamError::Divergence { .. } => BeamStatus::Divergence,
        BeamError::NoConvergence { .. } => BeamStatus::NoConvergence,
        BeamError::SingularJacobian { .. } => BeamStatus::SingularJacobian,
        BeamError::Io(_) => BeamStatus::Io,
        BeamError::InvalidInput(_) | BeamError::OutOfDomain { .. } => BeamStatus::InvalidInput,
        _ => BeamStatus::Other,
    }
}

enum Fail {
    Null(&'static str),
    Beam(BeamError),
}

impl From<BeamError> for Fail {
    fn from(e: BeamError) -> Self {
        Fail::Beam(e)
    }
}

fn guarded(f: impl FnOnce() -> Result<(), Fail>) -> BeamStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BeamStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            BeamStatus::NullPointer
        }
        Ok(Err(Fail::Beam(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            BeamStatus::Panic
        }
    }
}

unsafe fn model_ref<'a>(p: *const BeamModel) -> Result<&'a BeamModel, Fail> {
    p.as_ref().ok_or(Fail::Null("model"))
}

unsafe fn record_ref<'a>(p: *const BeamRecord) -> Result<&'a BeamRecord, Fail> {
    p.as_ref().ok_or(Fail::Null("record"))
}

unsafe fn input<'a>(p: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, n))
}

fn check_modes(model: &BeamModel, modes: usize) -> Result<(), Fail> {
    if modes != model.model.modes() {
        return Err(Fail::Beam(BeamError::DimensionMismatch {
            expected: model.model.modes(),
            found: modes,
        }));
    }
    Ok(())
}

unsafe fn state_from(y: *const f64, v: *const f64, modes: usize) -> Result<State, Fail> {
    Ok(State::new(
        ModalVector::from_vec(input(y, modes, "y")?.to_vec()),
        ModalVector::from_vec(input(v, modes, "v")?.to_vec()),
        0.0,
    ))
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn beam_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn beam_version() -> *const c_char {
    static VERSION: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(beam_attractor::cli::version()).unwrap_or_default())
        .as_ptr()
}

/// Parse an experiment file (UTF-8, `key = value` lines) into a model.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn beam_model_from_config(text: *const c_char, out: *mut *mut BeamModel) -> BeamStatus {
    guarded(|| {
        if text.is_null() {
            return Err(Fail::Null("text"));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| BeamError::InvalidInput("config text is not UTF-8".into()))?;
        let config = ExperimentConfig::parse(text)?;
        let model = config.model()?;
        *out = Box::into_raw(Box::new(BeamModel { config, model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`beam_model_from_config`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn beam_model_free(model: *mut BeamModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of Galerkin modes, 0 for a null model.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn beam_model_mode_count(model: *const BeamModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.modes())
}

/// Energy of the state `(y, v)`.
///
/// # Safety
/// `y`, `v` must point to `modes` doubles; `out` to one.
#[no_mangle]
pub unsafe extern "C" fn beam_model_energy(
    model: *const BeamModel,
    y: *const f64,
    v: *const f64,
    modes: usize,
    out: *mut f64,
) -> BeamStatus {
    guarded(|| {
        let m = model_ref(model)?;
        check_modes(m, modes)?;
        let s = state_from(y, v, modes)?;
        output(out, 1, "out")?[0] = energy::energy(&m.model, &s);
        Ok(())
    })
}

/// Modal accelerations `ÿ` at `(y, v)` into `out`.
///
/// # Safety
/// `y`, `v`, `out` must point to `modes` doubles.
#[no_mangle]
pub unsafe extern "C" fn beam_model_acceleration(
    model: *const BeamModel,
    y: *const f64,
    v: *const f64,
    modes: usize,
    out: *mut f64,
) -> BeamStatus {
    guarded(|| {
        let m = model_ref(model)?;
        check_modes(m, modes)?;
        let s = state_from(y, v, modes)?;
        let a = m.model.acceleration(&s);
        output(out, modes, "out")?.copy_from_slice(a.as_slice());
        Ok(())
    })
}

/// Newton solve for a stationary displacement starting from `guess`.
///
/// # Safety
/// `guess`, `out_y` must point to `modes` doubles; `out_iterations` may be null.
#[no_mangle]
pub unsafe extern "C" fn beam_model_stationary_solve(
    model: *const BeamModel,
    guess: *const f64,
    modes: usize,
    tol: f64,
    max_iter: usize,
    out_y: *mut f64,
    out_iterations: *mut usize,
) -> BeamStatus {
    guarded(|| {
        let m = model_ref(model)?;
        check_modes(m, modes)?;
        let g = ModalVector::from_vec(input(guess, modes, "guess")?.to_vec());
        let sol = attractor::stationary_solve(&m.model, &g, tol, max_iter)?;
        output(out_y, modes, "out_y")?.copy_from_slice(sol.y.as_slice());
        if !out_iterations.is_null() {
            *out_iterations = sol.iterations;
        }
        Ok(())
    })
}

/// Integrate from `(y0, v0)` over `[0, t_final]`, keeping every `stride`-th step.
/// `dt <= 0` selects the automatic step; the scheme follows the model's experiment file.
/// On divergence the status is `Divergence` and no record is returned.
///
/// # Safety
/// `y0`, `v0` must point to `modes` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn beam_simulate(
    model: *const BeamModel,
    y0: *const f64,
    v0: *const f64,
    modes: usize,
    t_final: f64,
    dt: f64,
    stride: usize,
    out: *mut *mut BeamRecord,
) -> BeamStatus {
    guarded(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        *out = ptr::null_mut();
        let m = model_ref(model)?;
        check_modes(m, modes)?;
        let z0 = state_from(y0, v0, modes)?;
        let dt = if dt > 0.0 { dt } else { auto_dt(&m.model) };
        let scheme = m.config.scheme.unwrap_or_else(|| Scheme::default_for(modes));
        let settings = IntegrationSettings::new(t_final, dt, stride, scheme);
        let record = integrate(&m.model, &z0, &settings, &[])?.into_result()?;
        *out = Box::into_raw(Box::new(BeamRecord { record }));
        Ok(())
    })
}

/// # Safety
/// `record` must come from [`beam_simulate`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn beam_record_free(record: *mut BeamRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Number of samples, 0 for a null record.
///
/// # Safety
/// `record` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn beam_record_len(record: *const BeamRecord) -> usize {
    record.as_ref().map_or(0, |r| r.record.len())
}

/// Copy sample `index`: time, displacement, velocity and energy. Any output may be null.
///
/// # Safety
/// Non-null `y`, `v` must point to `modes` doubles.
#[no_mangle]
pub unsafe extern "C" fn beam_record_sample(
    record: *const BeamRecord,
    index: usize,
    modes: usize,
    t: *mut f64,
    y: *mut f64,
    v: *mut f64,
    energy: *mut f64,
) -> BeamStatus {
    guarded(|| {
        let r = &record_ref(record)?.record;
        let s = r.samples.get(index).ok_or_else(|| {
            BeamError::InvalidInput(format!("sample index {index} out of range (len {})", r.len()))
        })?;
        if modes != r.config.modes() {
            return Err(Fail::Beam(BeamError::DimensionMismatch {
                expected: r.config.modes(),
                found: modes,
            }));
        }
        if !t.is_null() {
            *t = s.state.t;
        }
        if !y.is_null() {
            output(y, modes, "y")?.copy_from_slice(s.state.y.as_slice());
        }
        if !v.is_null() {
            output(v, modes, "v")?.copy_from_slice(s.state.v.as_slice());
        }
        if !energy.is_null() {
            *energy = s.energy;
        }
        Ok(())
    })
}

/// Relative energy-balance residual of the record.
///
/// # Safety
/// `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn beam_record_energy_residual(record: *const BeamRecord, out: *mut f64) -> BeamStatus {
    guarded(|| {
        let r = record_ref(record)?;
        let res = energy::energy_identity_residual(&r.record)?;
        output(out, 1, "out")?[0] = res;
        Ok(())
    })
}
