//! C ABI over `scm-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_parse` style functions and released with the matching `*_free`.
//! Every fallible function returns an [`ScmStatus`]; on failure a
//! description is available from [`scm_last_error_message`] on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use scm_core::cli::{config_text, csv};
use scm_core::harness::{preset, run_experiment_with_threads, ExperimentConfig, ExperimentResult};
use scm_core::learning::{
    dropout_predict, dropout_step_mut, l2_sgd_step_mut, sgd_step_mut, DropoutMask,
};
use scm_core::{activation, activation_deriv, draw_mask, init_weights, rng};
use scm_core::{CommitteeMachine, InputVector, ScmError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScmStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    InvalidArgument = 3,
    InvalidConfig = 4,
    UnknownPreset = 5,
    Io = 6,
    IndexOutOfRange = 7,
    Panic = 8,
}

/// One measurement on a learning curve.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScmErrorPoint {
    pub t: f64,
    pub mse_learn: f64,
    pub mse_test: f64,
}

/// Opaque committee machine.
pub struct ScmMachine(CommitteeMachine);

/// Opaque experiment configuration.
pub struct ScmConfig(ExperimentConfig);

/// Opaque experiment result: the mean curve and every trial's curve.
pub struct ScmResult(ExperimentResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &ScmError) -> ScmStatus {
    match err {
        ScmError::DimensionMismatch { .. } => ScmStatus::DimensionMismatch,
        ScmError::ConfigSyntax { .. } | ScmError::MissingKey(_) | ScmError::InvalidConfig(_) => {
            ScmStatus::InvalidConfig
        }
        ScmError::UnknownPreset(_) => ScmStatus::UnknownPreset,
        ScmError::Io { .. } => ScmStatus::Io,
        _ => ScmStatus::InvalidArgument,
    }
}

struct Failure(ScmStatus, String);

impl From<ScmError> for Failure {
    fn from(e: ScmError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ScmStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ScmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ScmStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ScmStatus::Panic
        }
    }
}

unsafe fn slice_arg<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn input_arg(x: *const f64, len: usize) -> Result<InputVector, Failure> {
    Ok(InputVector::new(slice_arg(x, len, "x")?.to_vec())?)
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(ScmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle_mut<'a, T>(h: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    h.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, Failure> {
    h.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn scm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by [`scm_config_render`].
#[no_mangle]
pub unsafe extern "C" fn scm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Hidden-unit activation `erf(x / sqrt(2))`.
#[no_mangle]
pub extern "C" fn scm_activation(x: f64) -> f64 {
    activation(x)
}

/// Derivative of the activation.
#[no_mangle]
pub extern "C" fn scm_activation_deriv(x: f64) -> f64 {
    activation_deriv(x)
}

/// Creates a machine with Gaussian weights of variance `1/n_inputs`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn scm_machine_new_random(
    n_inputs: usize,
    n_hidden: usize,
    seed: u64,
    out: *mut *mut ScmMachine,
) -> ScmStatus {
    guard(|| {
        let m = init_weights(n_inputs, n_hidden, &mut rng::seeded(seed))?;
        write_out(out, Box::into_raw(Box::new(ScmMachine(m))))
    })
}

/// Creates a machine from `n_hidden * n_inputs` row-major weights.
///
/// # Safety
/// `weights` must point to `n_hidden * n_inputs` readable doubles and
/// `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn scm_machine_from_weights(
    n_inputs: usize,
    n_hidden: usize,
    weights: *const f64,
    out: *mut *mut ScmMachine,
) -> ScmStatus {
    guard(|| {
        let w = slice_arg(weights, n_inputs.saturating_mul(n_hidden), "weights")?;
        let m = CommitteeMachine::from_flat(n_inputs, n_hidden, w.to_vec())?;
        write_out(out, Box::into_raw(Box::new(ScmMachine(m))))
    })
}

/// # Safety
/// `m` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn scm_machine_free(m: *mut ScmMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Input dimension, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scm_machine_n_inputs(m: *const ScmMachine) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_inputs())
}

/// Hidden units, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scm_machine_n_hidden(m: *const ScmMachine) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_hidden())
}

/// Copies the row-major weights into `buf`, which must hold exactly
/// `n_hidden * n_inputs` values.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn scm_machine_weights(
    m: *const ScmMachine,
    buf: *mut f64,
    len: usize,
) -> ScmStatus {
    guard(|| {
        let w = handle(m, "machine")?.0.weights();
        if len != w.len() {
            return Err(Failure(
                ScmStatus::DimensionMismatch,
                format!("buffer holds {len} values, machine has {}", w.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(w.as_ptr(), buf, len);
        Ok(())
    })
}

/// Network output for input `x` of length `len`.
///
/// # Safety
/// `x` must point to `len` readable doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn scm_machine_forward(
    m: *const ScmMachine,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> ScmStatus {
    guard(|| {
        let y = handle(m, "machine")?.0.forward(&input_arg(x, len)?)?;
        write_out(out, y)
    })
}

/// One plain SGD step towards `teacher_output`, in place.
///
/// # Safety
/// `m` must be a live handle and `x` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn scm_sgd_step(
    m: *mut ScmMachine,
    teacher_output: f64,
    x: *const f64,
    len: usize,
    eta: f64,
) -> ScmStatus {
    guard(|| {
        let x = input_arg(x, len)?;
        sgd_step_mut(&mut handle_mut(m, "machine")?.0, teacher_output, &x, eta)?;
        Ok(())
    })
}

/// One SGD step with weight decay `alpha`, in place.
///
/// # Safety
/// As [`scm_sgd_step`].
#[no_mangle]
pub unsafe extern "C" fn scm_l2_sgd_step(
    m: *mut ScmMachine,
    teacher_output: f64,
    x: *const f64,
    len: usize,
    eta: f64,
    alpha: f64,
) -> ScmStatus {
    guard(|| {
        let x = input_arg(x, len)?;
        l2_sgd_step_mut(
            &mut handle_mut(m, "machine")?.0,
            teacher_output,
            &x,
            eta,
            alpha,
        )?;
        Ok(())
    })
}

/// One dropout step, in place. `dropped` lists the `n_dropped` excluded
/// units; `n_dropped` must equal `round(p * n_hidden)`.
///
/// # Safety
/// As [`scm_sgd_step`]; `dropped` must point to `n_dropped` readable values.
#[no_mangle]
pub unsafe extern "C" fn scm_dropout_step(
    m: *mut ScmMachine,
    dropped: *const usize,
    n_dropped: usize,
    p: f64,
    teacher_output: f64,
    x: *const f64,
    len: usize,
    eta: f64,
) -> ScmStatus {
    guard(|| {
        let machine = &mut handle_mut(m, "machine")?.0;
        let units = slice_arg(dropped, n_dropped, "dropped")?.to_vec();
        let mask = DropoutMask::new(machine.n_hidden(), p, units)?;
        let x = input_arg(x, len)?;
        dropout_step_mut(machine, &mask, teacher_output, &x, eta)?;
        Ok(())
    })
}

/// Draws a dropout mask of `round(p * k_hidden)` units from `seed`. The
/// sorted indices are written to `buf` (capacity `cap`) and their number
/// to `out_len`.
///
/// # Safety
/// `buf` must point to `cap` writable values and `out_len` to one.
#[no_mangle]
pub unsafe extern "C" fn scm_draw_mask(
    k_hidden: usize,
    p: f64,
    seed: u64,
    buf: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> ScmStatus {
    guard(|| {
        let mask = draw_mask(k_hidden, p, &mut rng::seeded(seed))?;
        let d = mask.dropped();
        if d.len() > cap {
            return Err(Failure(
                ScmStatus::IndexOutOfRange,
                format!("mask has {} units, buffer holds {cap}", d.len()),
            ));
        }
        if !d.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(d.as_ptr(), buf, d.len());
        }
        write_out(out_len, d.len())
    })
}

/// Dropout inference: `scale * sum_k g(y_k)`.
///
/// # Safety
/// As [`scm_machine_forward`].
#[no_mangle]
pub unsafe extern "C" fn scm_dropout_predict(
    m: *const ScmMachine,
    scale: f64,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> ScmStatus {
    guard(|| {
        let y = dropout_predict(&handle(m, "machine")?.0, scale, &input_arg(x, len)?)?;
        write_out(out, y)
    })
}

/// Parses a single-experiment config text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scm_config_parse(
    text: *const c_char,
    out: *mut *mut ScmConfig,
) -> ScmStatus {
    guard(|| {
        let config = config_text::parse_config(str_arg(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(ScmConfig(config))))
    })
}

/// Number of arms in a named preset.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scm_preset_len(name: *const c_char, out: *mut usize) -> ScmStatus {
    guard(|| {
        let p = preset(str_arg(name, "name")?)?;
        write_out(out, p.runs.len())
    })
}

/// Config of arm `index` of a named preset.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scm_preset_config(
    name: *const c_char,
    index: usize,
    out: *mut *mut ScmConfig,
) -> ScmStatus {
    guard(|| {
        let p = preset(str_arg(name, "name")?)?;
        let run = p.runs.into_iter().nth(index).ok_or_else(|| {
            Failure(
                ScmStatus::IndexOutOfRange,
                format!("preset has no arm {index}"),
            )
        })?;
        write_out(out, Box::into_raw(Box::new(ScmConfig(run.config))))
    })
}

/// # Safety
/// `c` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn scm_config_free(c: *mut ScmConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Overrides seed, trial count, duration and measurement interval.
/// Negative `duration` or `measure_every` and zero `trials` keep the
/// current value.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn scm_config_override(
    c: *mut ScmConfig,
    seed: u64,
    trials: usize,
    duration: f64,
    measure_every: f64,
) -> ScmStatus {
    guard(|| {
        let mut next = handle_mut(c, "config")?.0.clone();
        next.seed = seed;
        if trials > 0 {
            next.trials = trials;
        }
        if duration >= 0.0 {
            next.duration = duration;
        }
        if measure_every >= 0.0 {
            next.measure_every = measure_every;
        }
        next.validate()?;
        handle_mut(c, "config")?.0 = next;
        Ok(())
    })
}

/// Canonical config text; free with [`scm_string_free`].
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scm_config_render(c: *const ScmConfig) -> *mut c_char {
    match c.as_ref() {
        Some(c) => {
            CString::new(config_text::render(&c.0)).map_or(ptr::null_mut(), CString::into_raw)
        }
        None => ptr::null_mut(),
    }
}

/// Runs every trial of an experiment on `threads` workers.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scm_run_experiment(
    c: *const ScmConfig,
    threads: usize,
    out: *mut *mut ScmResult,
) -> ScmStatus {
    guard(|| {
        let result = run_experiment_with_threads(&handle(c, "config")?.0, threads)?;
        write_out(out, Box::into_raw(Box::new(ScmResult(result))))
    })
}

/// # Safety
/// `r` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn scm_result_free(r: *mut ScmResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of trials, or 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scm_result_trials(r: *const ScmResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.trials.len())
}

/// Number of points per curve, or 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scm_result_points(r: *const ScmResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.mean.points.len())
}

/// Point `j` of trial `trial`, or of the mean curve when `trial < 0`.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scm_result_point(
    r: *const ScmResult,
    trial: i64,
    j: usize,
    out: *mut ScmErrorPoint,
) -> ScmStatus {
    guard(|| {
        let result = &handle(r, "result")?.0;
        let curve = if trial < 0 {
            Some(&result.mean)
        } else {
            usize::try_from(trial)
                .ok()
                .and_then(|i| result.trials.get(i))
        };
        let point = curve.and_then(|c| c.points.get(j)).ok_or_else(|| {
            Failure(
                ScmStatus::IndexOutOfRange,
                format!("no point {j} in trial {trial}"),
            )
        })?;
        write_out(
            out,
            ScmErrorPoint {
                t: point.t_time,
                mse_learn: point.mse_learn,
                mse_test: point.mse_test,
            },
        )
    })
}

/// Writes the result as CSV (`t,mse_learn,mse_test,trial`).
///
/// # Safety
/// `r` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn scm_result_write_csv(
    r: *const ScmResult,
    path: *const c_char,
) -> ScmStatus {
    guard(|| {
        let result = &handle(r, "result")?.0;
        csv::emit_csv(result, Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}
