//! C interface over the simulator core. States travel as opaque heap handles,
//! results come back through out-pointers, and every call reports a status
//! code. The matching header is regenerated into include/rspsim.h on build.
//!
//! Phases are radians. Absent one-sided gaps are reported as NaN next to an
//! `established` flag, since C has no option type.

use std::ffi::c_char;

use rspsim::Error;
use rspsim::noise::{NoiseParams, rho_p};
use rspsim::protocol::{epr_psi_minus, rsp_output_closed_form};
use rspsim::qmat::{DensityOperator, TargetPhase, fidelity_with_target, hadamard, partial_trace_a};
use rspsim::witness::{coherence_enhancement, cqb, geometric_discord, payoff, payoff_avg};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RspsimStatus {
    /// The call succeeded and every out-pointer was written.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A scalar argument was outside its documented range.
    InvalidArgument = 2,
    /// The computation rejected its input on numerical grounds.
    NumericalFailure = 3,
}

/// Opaque handle to a shared two-qubit state.
pub struct RspsimState {
    inner: DensityOperator,
}

fn status_of(err: &Error) -> RspsimStatus {
    match err {
        Error::Dimension { .. }
        | Error::ProbabilityRange(_)
        | Error::NoiseWeights
        | Error::BasisIndex(_)
        | Error::BadMixture
        | Error::EmptyComposition
        | Error::BadGridStep
        | Error::TooFewPoints { .. }
        | Error::ZeroShots => RspsimStatus::InvalidArgument,
        _ => RspsimStatus::NumericalFailure,
    }
}

/// Reads the handle and wraps a finite phase argument, the prologue shared by
/// most calls below.
unsafe fn state_and_phase<'a>(
    state: *const RspsimState,
    phi: f64,
) -> Result<(&'a RspsimState, TargetPhase), RspsimStatus> {
    let Some(state) = (unsafe { state.as_ref() }) else {
        return Err(RspsimStatus::NullPointer);
    };
    if !phi.is_finite() {
        return Err(RspsimStatus::InvalidArgument);
    }
    Ok((state, TargetPhase::from_radians(phi)))
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn rspsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates the shared singlet state.
///
/// # Safety
/// `out` must be a valid pointer. On `Ok` it receives a handle that must be
/// released with `rspsim_state_free`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_state_singlet(out: *mut *mut RspsimState) -> RspsimStatus {
    let Some(out) = (unsafe { out.as_mut() }) else {
        return RspsimStatus::NullPointer;
    };
    *out = Box::into_raw(Box::new(RspsimState {
        inner: epr_psi_minus(),
    }));
    RspsimStatus::Ok
}

/// Creates the singlet mixed with computational-basis noise of weights `p1`
/// and `p2`. Both weights must lie in [0, 1] with `p1 + p2 <= 1`.
///
/// # Safety
/// `out` must be a valid pointer. On `Ok` it receives a handle that must be
/// released with `rspsim_state_free`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_state_noisy_singlet(
    p1: f64,
    p2: f64,
    out: *mut *mut RspsimState,
) -> RspsimStatus {
    let Some(out) = (unsafe { out.as_mut() }) else {
        return RspsimStatus::NullPointer;
    };
    match NoiseParams::new(p1, p2) {
        Ok(params) => {
            *out = Box::into_raw(Box::new(RspsimState {
                inner: rho_p(params),
            }));
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle produced by this library that has not
/// been freed before.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_state_free(state: *mut RspsimState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Protocol payoff of the shared state at target phase `phi`.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_payoff(
    state: *const RspsimState,
    phi: f64,
    out: *mut f64,
) -> RspsimStatus {
    let Some(out) = (unsafe { out.as_mut() }) else {
        return RspsimStatus::NullPointer;
    };
    let (state, phi) = match unsafe { state_and_phase(state, phi) } {
        Ok(v) => v,
        Err(s) => return s,
    };
    match payoff(&state.inner, phi) {
        Ok(v) => {
            *out = v;
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Payoff averaged over the full equator of target phases.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_payoff_average(
    state: *const RspsimState,
    out: *mut f64,
) -> RspsimStatus {
    let Some(out) = (unsafe { out.as_mut() }) else {
        return RspsimStatus::NullPointer;
    };
    let Some(state) = (unsafe { state.as_ref() }) else {
        return RspsimStatus::NullPointer;
    };
    match payoff_avg(&state.inner) {
        Ok(v) => {
            *out = v;
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Witness gain of the prepared state over Bob's marginal at phase `phi`,
/// plus the flag telling whether the marginal witness was positive so the
/// gain reads as a genuine enhancement.
///
/// # Safety
/// `state` must be a live handle; `out_value` and `out_valid` must be valid
/// pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_enhancement(
    state: *const RspsimState,
    phi: f64,
    out_value: *mut f64,
    out_valid: *mut bool,
) -> RspsimStatus {
    let (Some(out_value), Some(out_valid)) =
        (unsafe { out_value.as_mut() }, unsafe { out_valid.as_mut() })
    else {
        return RspsimStatus::NullPointer;
    };
    let (state, phi) = match unsafe { state_and_phase(state, phi) } {
        Ok(v) => v,
        Err(s) => return s,
    };
    match coherence_enhancement(&state.inner, phi) {
        Ok(e) => {
            *out_value = e.value;
            *out_valid = e.valid;
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// One-sided criterion for the prepared state against Bob's marginal, read
/// out by the balanced-split verifier on population `q` (0 or 1). Sides that
/// are not established come back as NaN; `out_established` is true when
/// either side is.
///
/// # Safety
/// `state` must be a live handle; `out_gt`, `out_lt`, and `out_established`
/// must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_cqb_hadamard(
    state: *const RspsimState,
    phi: f64,
    q: u8,
    out_gt: *mut f64,
    out_lt: *mut f64,
    out_established: *mut bool,
) -> RspsimStatus {
    let (Some(out_gt), Some(out_lt), Some(out_established)) = (
        unsafe { out_gt.as_mut() },
        unsafe { out_lt.as_mut() },
        unsafe { out_established.as_mut() },
    ) else {
        return RspsimStatus::NullPointer;
    };
    let (state, phi) = match unsafe { state_and_phase(state, phi) } {
        Ok(v) => v,
        Err(s) => return s,
    };
    let run = || -> Result<_, Error> {
        let prepared = rsp_output_closed_form(&state.inner, phi)?;
        let marginal = partial_trace_a(&state.inner)?;
        cqb(&prepared, &marginal, &hadamard(), q)
    };
    match run() {
        Ok(verdict) => {
            *out_gt = verdict.delta_gt.unwrap_or(f64::NAN);
            *out_lt = verdict.delta_lt.unwrap_or(f64::NAN);
            *out_established = verdict.established;
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Geometric discord of the shared state.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_geometric_discord(
    state: *const RspsimState,
    out: *mut f64,
) -> RspsimStatus {
    let Some(out) = (unsafe { out.as_mut() }) else {
        return RspsimStatus::NullPointer;
    };
    let Some(state) = (unsafe { state.as_ref() }) else {
        return RspsimStatus::NullPointer;
    };
    match geometric_discord(&state.inner) {
        Ok(v) => {
            *out = v;
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Fidelity of the conditionally prepared state with the target at `phi`.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_fidelity_conditional(
    state: *const RspsimState,
    phi: f64,
    out: *mut f64,
) -> RspsimStatus {
    let Some(out) = (unsafe { out.as_mut() }) else {
        return RspsimStatus::NullPointer;
    };
    let (state, phi) = match unsafe { state_and_phase(state, phi) } {
        Ok(v) => v,
        Err(s) => return s,
    };
    let run = || -> Result<f64, Error> {
        fidelity_with_target(&rsp_output_closed_form(&state.inner, phi)?, phi)
    };
    match run() {
        Ok(v) => {
            *out = v;
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Fidelity of Bob's unconditioned marginal with the target at `phi`.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rspsim_fidelity_marginal(
    state: *const RspsimState,
    phi: f64,
    out: *mut f64,
) -> RspsimStatus {
    let Some(out) = (unsafe { out.as_mut() }) else {
        return RspsimStatus::NullPointer;
    };
    let (state, phi) = match unsafe { state_and_phase(state, phi) } {
        Ok(v) => v,
        Err(s) => return s,
    };
    let run =
        || -> Result<f64, Error> { fidelity_with_target(&partial_trace_a(&state.inner)?, phi) };
    match run() {
        Ok(v) => {
            *out = v;
            RspsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
