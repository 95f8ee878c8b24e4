//! C ABI for the collvar library.
//!
//! Opaque handles wrap observables and states; every function returns a
//! status code and writes results through out-pointers. A thread-local
//! message holds the detail of the last failure. The header is generated by
//! cbindgen into `include/collvar.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use collvar::observables::{helmert_frame, SignVector};
use collvar::quantifiers::{
    f_convex_roof, f_pure, f_qfi_ratio, f_support, thickness, OptConfig, QuantBracket,
};
use collvar::spectral::LocalObservable;
use collvar::statefile::{read_state, write_state, StateData};
use collvar::states::{depolarized_ghz, ghz_like, ghz_mix, DensityState, DEFAULT_ZERO_TOL};
use collvar::witnesses;
use collvar::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollvarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvariantViolation = 3,
    Infeasible = 4,
    ParseError = 5,
}

/// A certified interval around a mixed-state quantifier.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CollvarBracket {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub certified_exact: bool,
}

/// Opaque handle to a local observable.
pub struct CollvarObservable(LocalObservable);

/// Opaque handle to a pure, density, or ensemble state.
pub struct CollvarState(StateData);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
}

fn fail(err: Error) -> CollvarStatus {
    let status = match err {
        Error::Parse(_) => CollvarStatus::ParseError,
        Error::InvariantViolation(_) | Error::NotHermitian(_) => CollvarStatus::InvariantViolation,
        Error::InfeasibleLevel(_) => CollvarStatus::Infeasible,
        _ => CollvarStatus::InvalidArgument,
    };
    set_error(err.to_string());
    status
}

/// Message describing the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn collvar_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Builds an observable from `len` eigenvalues.
///
/// # Safety
/// `eigenvalues` must point to `len` readable doubles; `out` must be a valid
/// writable pointer. On success the caller owns the handle and must release
/// it with [`collvar_observable_free`].
#[no_mangle]
pub unsafe extern "C" fn collvar_observable_new(
    eigenvalues: *const f64,
    len: usize,
    out: *mut *mut CollvarObservable,
) -> CollvarStatus {
    if eigenvalues.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    let values = std::slice::from_raw_parts(eigenvalues, len);
    match LocalObservable::new(values) {
        Ok(obs) => {
            *out = Box::into_raw(Box::new(CollvarObservable(obs)));
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Releases an observable handle; NULL is allowed.
///
/// # Safety
/// `obs` must be a pointer from [`collvar_observable_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn collvar_observable_free(obs: *mut CollvarObservable) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

unsafe fn emit_state(data: StateData, out: *mut *mut CollvarState) -> CollvarStatus {
    *out = Box::into_raw(Box::new(CollvarState(data)));
    CollvarStatus::Ok
}

/// Builds the GHZ-like superposition of the extremal grid points.
///
/// # Safety
/// `obs` must be a live observable handle; `out` must be writable. The
/// caller owns the returned state handle.
#[no_mangle]
pub unsafe extern "C" fn collvar_state_ghz(
    obs: *const CollvarObservable,
    n: usize,
    phase: f64,
    out: *mut *mut CollvarState,
) -> CollvarStatus {
    if obs.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match ghz_like(&(*obs).0, n, phase) {
        Ok(state) => emit_state(StateData::Pure(state), out),
        Err(err) => fail(err),
    }
}

/// Builds the depolarized GHZ density state on qubits.
///
/// # Safety
/// `out` must be writable; the caller owns the returned handle.
#[no_mangle]
pub unsafe extern "C" fn collvar_state_depolarized_ghz(
    n: usize,
    eps: f64,
    out: *mut *mut CollvarState,
) -> CollvarStatus {
    if out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match depolarized_ghz(n, eps) {
        Ok(rho) => emit_state(StateData::Density(rho), out),
        Err(err) => fail(err),
    }
}

/// Builds the GHZ state mixed with its half-flipped partner (even `n`).
///
/// # Safety
/// `out` must be writable; the caller owns the returned handle.
#[no_mangle]
pub unsafe extern "C" fn collvar_state_ghz_mix(
    n: usize,
    eps: f64,
    out: *mut *mut CollvarState,
) -> CollvarStatus {
    if out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match ghz_mix(n, eps) {
        Ok(rho) => emit_state(StateData::Density(rho), out),
        Err(err) => fail(err),
    }
}

/// Parses a state from the JSON file format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable. The
/// caller owns the returned handle.
#[no_mangle]
pub unsafe extern "C" fn collvar_state_from_json(
    json: *const c_char,
    norm_tol: f64,
    out: *mut *mut CollvarState,
) -> CollvarStatus {
    if json.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("state JSON is not valid UTF-8".into());
            return CollvarStatus::ParseError;
        }
    };
    match read_state(text, norm_tol) {
        Ok(data) => emit_state(data, out),
        Err(err) => fail(err),
    }
}

/// Serializes a state to the JSON file format. The returned string must be
/// released with [`collvar_string_free`].
///
/// # Safety
/// `state` must be a live state handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_state_to_json(
    state: *const CollvarState,
    out: *mut *mut c_char,
) -> CollvarStatus {
    if state.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    let text = write_state(&(*state).0);
    match CString::new(text) {
        Ok(owned) => {
            *out = owned.into_raw();
            CollvarStatus::Ok
        }
        Err(_) => {
            set_error("serialized state contained an interior NUL".into());
            CollvarStatus::InvariantViolation
        }
    }
}

/// Releases a state handle; NULL is allowed.
///
/// # Safety
/// `state` must be a pointer previously returned by a state constructor.
#[no_mangle]
pub unsafe extern "C" fn collvar_state_free(state: *mut CollvarState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Releases a string returned by this library; NULL is allowed.
///
/// # Safety
/// `s` must be a pointer previously returned by [`collvar_state_to_json`].
#[no_mangle]
pub unsafe extern "C" fn collvar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Party count of a state.
///
/// # Safety
/// `state` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_state_party_count(
    state: *const CollvarState,
    out: *mut usize,
) -> CollvarStatus {
    if state.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    *out = (*state).0.party_count();
    CollvarStatus::Ok
}

/// Pure-state quantifier with uniform signs; fails on mixed states.
///
/// # Safety
/// `state` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_f_pure(
    state: *const CollvarState,
    out: *mut f64,
) -> CollvarStatus {
    if state.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match &(*state).0 {
        StateData::Pure(pure) => {
            *out = f_pure(pure, &SignVector::uniform(pure.party_count()));
            CollvarStatus::Ok
        }
        _ => {
            set_error("f_pure needs a pure state; use the mixed extensions instead".into());
            CollvarStatus::InvalidArgument
        }
    }
}

fn as_density(data: &StateData) -> DensityState {
    match data {
        StateData::Pure(pure) => pure.to_density(),
        StateData::Density(rho) => rho.clone(),
        StateData::Ensemble(ensemble) => ensemble.to_density(),
    }
}

fn bracket_out(bracket: QuantBracket) -> CollvarBracket {
    CollvarBracket {
        lower: bracket.lower,
        upper: bracket.upper,
        estimate: bracket.estimate,
        certified_exact: bracket.certified_exact,
    }
}

/// Fisher-ratio extension with the spectrum ceiling; exact.
///
/// # Safety
/// `state` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_f_qfi_ratio(
    state: *const CollvarState,
    out: *mut CollvarBracket,
) -> CollvarStatus {
    if state.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    let rho = as_density(&(*state).0);
    let signs = SignVector::uniform(rho.party_count());
    match f_qfi_ratio(&rho, &signs, None, DEFAULT_ZERO_TOL) {
        Ok(bracket) => {
            *out = bracket_out(bracket);
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Support-normalized extension; `restarts = 0` uses the default budget.
///
/// # Safety
/// `state` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_f_support(
    state: *const CollvarState,
    seed: u64,
    restarts: usize,
    out: *mut CollvarBracket,
) -> CollvarStatus {
    if state.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    let rho = as_density(&(*state).0);
    let signs = SignVector::uniform(rho.party_count());
    let cfg = OptConfig {
        seed,
        restarts,
        ..OptConfig::default()
    };
    match f_support(&rho, &signs, &cfg, DEFAULT_ZERO_TOL) {
        Ok(bracket) => {
            *out = bracket_out(bracket);
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Convex-roof extension; `restarts = 0` uses the default budget.
///
/// # Safety
/// `state` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_f_convex_roof(
    state: *const CollvarState,
    seed: u64,
    restarts: usize,
    out: *mut CollvarBracket,
) -> CollvarStatus {
    if state.is_null() || out.is_null() {
        return CollvarStatus::NullPointer;
    }
    let rho = as_density(&(*state).0);
    let signs = SignVector::uniform(rho.party_count());
    let cfg = OptConfig {
        seed,
        restarts,
        ..OptConfig::default()
    };
    match f_convex_roof(&rho, &signs, &cfg, DEFAULT_ZERO_TOL) {
        Ok(bracket) => {
            *out = bracket_out(bracket);
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Thickness of the state across the canonical orthogonal frame.
/// `out_defined` is false when the collective spread vanishes.
///
/// # Safety
/// `state` must be live; both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_thickness(
    state: *const CollvarState,
    out_zeta: *mut f64,
    out_defined: *mut bool,
) -> CollvarStatus {
    if state.is_null() || out_zeta.is_null() || out_defined.is_null() {
        return CollvarStatus::NullPointer;
    }
    let data = &(*state).0;
    let frame = helmert_frame(data.party_count());
    let report = match data {
        StateData::Pure(pure) => thickness(pure, &frame),
        StateData::Density(rho) => thickness(rho, &frame),
        StateData::Ensemble(ensemble) => thickness(&ensemble.to_density(), &frame),
    };
    match report.zeta_hat {
        Some(zeta) => {
            *out_zeta = zeta;
            *out_defined = true;
        }
        None => {
            *out_zeta = 0.0;
            *out_defined = false;
        }
    }
    CollvarStatus::Ok
}

/// Both k-separability bounds.
///
/// # Safety
/// Out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_bound_k(
    n: usize,
    k: usize,
    out_floor: *mut f64,
    out_linear: *mut f64,
) -> CollvarStatus {
    if out_floor.is_null() || out_linear.is_null() {
        return CollvarStatus::NullPointer;
    }
    match witnesses::bound_k(n, k) {
        Ok((floor, linear)) => {
            *out_floor = floor;
            *out_linear = linear;
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Thickness ceiling `n²/((1-ζ)+ζn)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_bound_thick(
    n: usize,
    zeta: f64,
    out: *mut f64,
) -> CollvarStatus {
    if out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match witnesses::bound_thick(n, zeta) {
        Ok(value) => {
            *out = value;
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Entanglement-depth lower bound from a certified quantifier lower bound.
/// Pass `has_zeta = false` to use the plain bounds.
///
/// # Safety
/// `out_depth` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_certify(
    f_lower: f64,
    n: usize,
    has_zeta: bool,
    zeta: f64,
    out_depth: *mut usize,
) -> CollvarStatus {
    if out_depth.is_null() {
        return CollvarStatus::NullPointer;
    }
    let zeta = if has_zeta { Some(zeta) } else { None };
    match witnesses::certify(f_lower, n, zeta) {
        Ok(verdict) => {
            *out_depth = verdict.depth_lower_bound;
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Trade-off curve `ζ(k) = (n-k)/(k(n-1))`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_zeta_of_k(n: usize, k: f64, out: *mut f64) -> CollvarStatus {
    if out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match witnesses::zeta_of_k(n, k) {
        Ok(value) => {
            *out = value;
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Trade-off curve `k(ζ) = n/((1-ζ)+nζ)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_k_of_zeta(n: usize, zeta: f64, out: *mut f64) -> CollvarStatus {
    if out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match witnesses::k_of_zeta(n, zeta) {
        Ok(value) => {
            *out = value;
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Level-set solve for ζ at fixed block size and level.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_zeta_for_f(
    n: usize,
    k: f64,
    f: f64,
    out: *mut f64,
) -> CollvarStatus {
    if out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match witnesses::zeta_for_f(n, k, f) {
        Ok(value) => {
            *out = value;
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Level-set solve for k at fixed thickness and level.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn collvar_k_for_f(
    n: usize,
    zeta: f64,
    f: f64,
    out: *mut f64,
) -> CollvarStatus {
    if out.is_null() {
        return CollvarStatus::NullPointer;
    }
    match witnesses::k_for_f(n, zeta, f) {
        Ok(value) => {
            *out = value;
            CollvarStatus::Ok
        }
        Err(err) => fail(err),
    }
}
