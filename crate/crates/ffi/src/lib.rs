//! C interface to the clock-engine library.
//!
//! Every entry point returns a [`QtmStatus`]; results come back through out
//! pointers. On failure a message is kept per thread and can be read with
//! [`qtm_last_error_message`]. Machines are opaque heap handles owned by the
//! caller and released with [`qtm_machine_free`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qtm_core::accounting::{cycle_average, CycleLedger, CycleParams, FlipConvention, Mode};
use qtm_core::engine::{transition_matrix, Thermalization};
use qtm_core::mixed_fuel::{breakeven_mixedness, stationary_mixedness};
use qtm_core::therm::BosonicForm;
use qtm_core::zeno::zeno_work_window;
use qtm_core::{Error, MachineSpec, Spin};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    BufferTooSmall = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtmThermModel {
    Instant = 0,
    SubUnit = 1,
    Bosonic = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtmFlip {
    Nominal = 0,
    EnergyBalance = 1,
}

/// Opaque machine handle.
pub struct QtmMachine {
    spec: MachineSpec,
}

/// Cycle settings; obtain defaults with [`qtm_cycle_params_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QtmCycleParams {
    pub beta: f64,
    pub dt: f64,
    pub tau_tilde: f64,
    pub tau_prime: f64,
    pub therm_model: QtmThermModel,
    /// Sub-unit count for `SubUnit` and `Bosonic`.
    pub n_beta: usize,
    /// Dimensionless equilibration time for `Bosonic`.
    pub tau_beta: f64,
    pub flip: QtmFlip,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QtmLedger {
    pub energy_to_apparatus: f64,
    pub reset_cost: f64,
    pub heat_in: f64,
    pub net_work: f64,
    pub w_ideal: f64,
    pub w_ideal_net: f64,
    pub completion_probability: f64,
    pub n_steps: usize,
    pub dt: f64,
}

impl From<CycleLedger> for QtmLedger {
    fn from(l: CycleLedger) -> Self {
        Self {
            energy_to_apparatus: l.energy_to_apparatus,
            reset_cost: l.reset_cost,
            heat_in: l.heat_in,
            net_work: l.net_work,
            w_ideal: l.w_ideal,
            w_ideal_net: l.w_ideal_net,
            completion_probability: l.completion_probability,
            n_steps: l.n_steps,
            dt: l.dt,
        }
    }
}

impl QtmCycleParams {
    fn to_core(self) -> CycleParams {
        let therm = match self.therm_model {
            QtmThermModel::Instant => Thermalization::Instant,
            QtmThermModel::SubUnit => Thermalization::SubUnit { n_beta: self.n_beta },
            QtmThermModel::Bosonic => Thermalization::Bosonic {
                n_beta: self.n_beta,
                tau_beta: self.tau_beta,
                form: BosonicForm::TracePreserving,
            },
        };
        let flip = match self.flip {
            QtmFlip::Nominal => FlipConvention::Nominal,
            QtmFlip::EnergyBalance => FlipConvention::EnergyBalance,
        };
        CycleParams::new(self.beta, self.dt)
            .with_window(self.tau_tilde, self.tau_prime)
            .with_therm(therm)
            .with_flip(flip)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QtmStatus {
    match e {
        Error::Unsupported(_) | Error::NotSpinMachine => QtmStatus::Unsupported,
        _ => QtmStatus::InvalidArgument,
    }
}

/// Runs `f`, records any error message and converts panics.
fn guard<F: FnOnce() -> Result<(), (QtmStatus, String)>>(f: F) -> QtmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QtmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QtmStatus::Internal
        }
    }
}

fn core_err(e: Error) -> (QtmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QtmStatus, String) {
    (QtmStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn machine<'a>(m: *const QtmMachine) -> Result<&'a MachineSpec, (QtmStatus, String)> {
    m.as_ref().map(|m| &m.spec).ok_or_else(|| null("machine"))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qtm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates the spin clock with `l = two_l / 2`.
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qtm_machine_new_spin(two_l: u32, out: *mut *mut QtmMachine) -> QtmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let spin = Spin::from_twice(two_l).map_err(core_err)?;
        *out = Box::into_raw(Box::new(QtmMachine { spec: MachineSpec::spin(spin) }));
        Ok(())
    })
}

/// Releases a machine; null is ignored.
///
/// # Safety
/// `m` must come from [`qtm_machine_new_spin`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qtm_machine_free(m: *mut QtmMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qtm_machine_dim(m: *const QtmMachine, out: *mut usize) -> QtmStatus {
    guard(|| {
        let spec = machine(m)?;
        *out.as_mut().ok_or_else(|| null("out"))? = spec.dim();
        Ok(())
    })
}

/// Defaults: window `(π/2, π)`, instant thermalisation, default flip convention.
#[no_mangle]
pub extern "C" fn qtm_cycle_params_default(beta: f64, dt: f64) -> QtmCycleParams {
    let p = CycleParams::new(beta, dt);
    QtmCycleParams {
        beta,
        dt,
        tau_tilde: p.tau_tilde,
        tau_prime: p.tau_prime,
        therm_model: QtmThermModel::Instant,
        n_beta: 1,
        tau_beta: 0.0,
        flip: QtmFlip::Nominal,
    }
}

unsafe fn run_cycle(m: *const QtmMachine, params: *const QtmCycleParams, out: *mut QtmLedger, mode: Mode) -> QtmStatus {
    guard(|| {
        let spec = machine(m)?;
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = cycle_average(spec, &params.to_core(), mode).map_err(core_err)?.into();
        Ok(())
    })
}

/// Exact selective cycle average.
///
/// # Safety
/// All pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qtm_selective_cycle(m: *const QtmMachine, params: *const QtmCycleParams, out: *mut QtmLedger) -> QtmStatus {
    run_cycle(m, params, out, Mode::Selective)
}

/// Exact unselective cycle average.
///
/// # Safety
/// All pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qtm_unselective_cycle(
    m: *const QtmMachine,
    params: *const QtmCycleParams,
    out: *mut QtmLedger,
) -> QtmStatus {
    run_cycle(m, params, out, Mode::Unselective)
}

/// Work of the continuously stabilised engine over `(tau_tilde, tau_prime)`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qtm_zeno_work(m: *const QtmMachine, beta: f64, tau_tilde: f64, tau_prime: f64, out: *mut f64) -> QtmStatus {
    guard(|| {
        let spec = machine(m)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !(beta > 0.0) {
            return Err((QtmStatus::InvalidArgument, format!("beta must be positive, got {beta}")));
        }
        *out = zeno_work_window(spec, beta, tau_tilde, tau_prime);
        Ok(())
    })
}

/// Writes `Γ(t, dt)` row-major into `buf` (`buf[(to-1)*d + (from-1)]`).
/// `len` is the capacity in doubles and must be at least `d*d`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qtm_transition_matrix(m: *const QtmMachine, t: f64, dt: f64, buf: *mut f64, len: usize) -> QtmStatus {
    guard(|| {
        let spec = machine(m)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let d = spec.dim();
        if len < d * d {
            return Err((QtmStatus::BufferTooSmall, format!("need {} doubles, got {len}", d * d)));
        }
        let g = transition_matrix(spec, t, dt);
        let out = std::slice::from_raw_parts_mut(buf, d * d);
        for to in 0..d {
            for from in 0..d {
                out[to * d + from] = g.entries[(to, from)];
            }
        }
        Ok(())
    })
}

/// Input mixedness at which the classical-limit net work changes sign.
#[no_mangle]
pub extern "C" fn qtm_breakeven_mixedness() -> f64 {
    breakeven_mixedness()
}

/// Fixed point of the output mixedness when outputs are recycled as inputs.
///
/// # Safety
/// All pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qtm_stationary_mixedness(m: *const QtmMachine, params: *const QtmCycleParams, out: *mut f64) -> QtmStatus {
    guard(|| {
        let spec = machine(m)?;
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = stationary_mixedness(spec, &params.to_core()).map_err(core_err)?;
        Ok(())
    })
}
