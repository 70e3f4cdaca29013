//! C ABI over the smoothing-lab kernels.
//!
//! Data and weights are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`SlStatus`]; on failure the
//! message is available from [`sl_last_error_message`] on the same thread.
//! Functionals use the default quadrature plan.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use smoothing_lab::functionals::{boundary_term, flux, morawetz_lhs, radial_profile, smoothing_profile};
use smoothing_lab::spectral::hs_norm_sq;
use smoothing_lab::{
    evolve_analytic, make_psi_eps, make_psi_k, weights::constant_weight, LabError, QuadraturePlan, RadialWeight,
    WavePacket, WavePacketSum,
};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    OriginSingularity = 3,
    BoundaryMass = 4,
    ToleranceNotMet = 5,
    InvalidWeight = 6,
    NonConvergent = 7,
    DimensionMismatch = 8,
    Panic = 9,
}

impl From<&LabError> for SlStatus {
    fn from(e: &LabError) -> Self {
        match e {
            LabError::InvalidParameter { .. } => SlStatus::InvalidParameter,
            LabError::OriginSingularity => SlStatus::OriginSingularity,
            LabError::BoundaryMass { .. } => SlStatus::BoundaryMass,
            LabError::ToleranceNotMet { .. } => SlStatus::ToleranceNotMet,
            LabError::InvalidWeight { .. } => SlStatus::InvalidWeight,
            LabError::NonConvergent(_) => SlStatus::NonConvergent,
            LabError::DimensionMismatch { .. } => SlStatus::DimensionMismatch,
        }
    }
}

/// Opaque wave-packet sum.
pub struct SlDatum(WavePacketSum);

/// Opaque radial weight.
pub struct SlWeight(RadialWeight);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: SlStatus, message: impl Into<String>) -> SlStatus {
    set_error(message.into());
    status
}

/// Runs `body`, mapping errors and panics to status codes.
fn guard(body: impl FnOnce() -> Result<(), SlStatus>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SlStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(SlStatus::Panic, "internal panic"),
    }
}

fn lab(e: LabError) -> SlStatus {
    fail(SlStatus::from(&e), e.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, SlStatus> {
    p.as_ref()
        .ok_or_else(|| fail(SlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), SlStatus> {
    if out.is_null() {
        return Err(fail(SlStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], SlStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(SlStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Zero datum in dimension `n` (1 to 3).
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sl_datum_new(dimension: usize, out: *mut *mut SlDatum) -> SlStatus {
    guard(|| {
        if !(1..=3).contains(&dimension) {
            return Err(fail(
                SlStatus::InvalidParameter,
                format!("dimension must be 1, 2 or 3, got {dimension}"),
            ));
        }
        write(out, Box::into_raw(Box::new(SlDatum(WavePacketSum::zero(dimension)))))
    })
}

/// Appends `A exp(-a|x-c|² + 2πi v·x)` with `A = amplitude_re + i amplitude_im`.
///
/// # Safety
/// `datum` must come from `sl_datum_new`; `center` and `momentum` must point
/// to `dimension` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_datum_add_packet(
    datum: *mut SlDatum,
    amplitude_re: f64,
    amplitude_im: f64,
    width: f64,
    center: *const f64,
    momentum: *const f64,
) -> SlStatus {
    guard(|| {
        let d = datum
            .as_mut()
            .ok_or_else(|| fail(SlStatus::NullPointer, "datum is null"))?;
        let n = d.0.dimension();
        let c = slice(center, n, "center")?.to_vec();
        let v = slice(momentum, n, "momentum")?.to_vec();
        let packet = WavePacket::new(Complex64::new(amplitude_re, amplitude_im), width, c, v).map_err(lab)?;
        let mut packets = d.0.packets().to_vec();
        packets.push(packet);
        d.0 = WavePacketSum::new(n, packets).map_err(lab)?;
        Ok(())
    })
}

/// # Safety
/// `datum` must come from `sl_datum_new` and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sl_datum_free(datum: *mut SlDatum) {
    if !datum.is_null() {
        drop(Box::from_raw(datum));
    }
}

/// # Safety
/// `datum` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_datum_l2_norm_sq(datum: *const SlDatum, out: *mut f64) -> SlStatus {
    guard(|| write(out, deref(datum, "datum")?.0.l2_norm_sq()))
}

/// `‖f‖²_{Ḣ^s}` for `s ∈ [0, n/2)`.
///
/// # Safety
/// `datum` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_datum_hs_norm_sq(datum: *const SlDatum, s: f64, out: *mut f64) -> SlStatus {
    guard(|| write(out, hs_norm_sq(&deref(datum, "datum")?.0, s).map_err(lab)?))
}

/// `u(t, x)` for the free evolution of the datum.
///
/// # Safety
/// `datum` must be a valid handle, `x` must point to `dimension` doubles and
/// the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_evolve_value(
    datum: *const SlDatum,
    t: f64,
    x: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SlStatus {
    guard(|| {
        let f = &deref(datum, "datum")?.0;
        if !t.is_finite() {
            return Err(fail(SlStatus::InvalidParameter, "t must be finite"));
        }
        let x = slice(x, f.dimension(), "x")?;
        let u = evolve_analytic(f, t).value(x);
        write(out_re, u.re)?;
        write(out_im, u.im)
    })
}

unsafe fn new_weight(w: Result<RadialWeight, LabError>, out: *mut *mut SlWeight) -> Result<(), SlStatus> {
    let w = w.map_err(lab)?;
    write(out, Box::into_raw(Box::new(SlWeight(w))))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_weight_psi_eps(eps: f64, out: *mut *mut SlWeight) -> SlStatus {
    guard(|| new_weight(make_psi_eps(eps), out))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_weight_psi_k(k: u32, out: *mut *mut SlWeight) -> SlStatus {
    guard(|| new_weight(make_psi_k(k), out))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_weight_constant(value: f64, out: *mut *mut SlWeight) -> SlStatus {
    guard(|| {
        if !value.is_finite() {
            return Err(fail(SlStatus::InvalidParameter, "constant must be finite"));
        }
        new_weight(Ok(constant_weight(value)), out)
    })
}

/// New handle for `R ψ(r/R)`; the input handle is left untouched.
///
/// # Safety
/// `weight` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_weight_rescale(weight: *const SlWeight, radius: f64, out: *mut *mut SlWeight) -> SlStatus {
    guard(|| new_weight(deref(weight, "weight")?.0.rescale(radius), out))
}

/// `[ψ, ψ′, ψ″, ψ‴, ψ⁗]` at `r ≥ 0`.
///
/// # Safety
/// `weight` must be a valid handle and `out` must point to 5 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_weight_derivatives(weight: *const SlWeight, r: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let w = &deref(weight, "weight")?.0;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(fail(
                SlStatus::InvalidParameter,
                format!("r must be finite and non-negative, got {r}"),
            ));
        }
        if out.is_null() {
            return Err(fail(SlStatus::NullPointer, "output pointer is null"));
        }
        let d = w.derivatives(r);
        ptr::copy_nonoverlapping(d.as_ptr(), out, 5);
        Ok(())
    })
}

/// # Safety
/// `weight` must come from an `sl_weight_*` constructor and not be used
/// afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sl_weight_free(weight: *mut SlWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

unsafe fn weighted(
    datum: *const SlDatum,
    weight: *const SlWeight,
    param: f64,
    out: *mut f64,
    op: fn(&WavePacketSum, &RadialWeight, f64, &QuadraturePlan) -> Result<f64, LabError>,
) -> SlStatus {
    guard(|| {
        let f = &deref(datum, "datum")?.0;
        let w = &deref(weight, "weight")?.0;
        write(out, op(f, w, param, &QuadraturePlan::default()).map_err(lab)?)
    })
}

/// Space-time bulk side of the finite-horizon identity on `[-T, T]`.
///
/// # Safety
/// Handles must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_morawetz_lhs(
    datum: *const SlDatum,
    weight: *const SlWeight,
    horizon: f64,
    out: *mut f64,
) -> SlStatus {
    weighted(datum, weight, horizon, out, morawetz_lhs)
}

/// Boundary side `½[flux(T) - flux(-T)]` of the finite-horizon identity.
///
/// # Safety
/// Handles must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_boundary_term(
    datum: *const SlDatum,
    weight: *const SlWeight,
    horizon: f64,
    out: *mut f64,
) -> SlStatus {
    weighted(datum, weight, horizon, out, boundary_term)
}

/// `Im ∫ ū ψ′(|x|) ∂_r u dx` at time `t`.
///
/// # Safety
/// Handles must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_flux(datum: *const SlDatum, weight: *const SlWeight, t: f64, out: *mut f64) -> SlStatus {
    weighted(datum, weight, t, out, flux)
}

/// `(1/R) ∫_ℝ ∫_{B_R} |∇u|² dx dt`.
///
/// # Safety
/// `datum` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_smoothing_profile(datum: *const SlDatum, radius: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let f = &deref(datum, "datum")?.0;
        write(
            out,
            smoothing_profile(f, radius, &QuadraturePlan::default()).map_err(lab)?,
        )
    })
}

/// `(1/R) ∫_ℝ ∫_{B_R} |∂_r u|² dx dt`.
///
/// # Safety
/// `datum` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_radial_profile(datum: *const SlDatum, radius: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let f = &deref(datum, "datum")?.0;
        write(out, radial_profile(f, radius, &QuadraturePlan::default()).map_err(lab)?)
    })
}
