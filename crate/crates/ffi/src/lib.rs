//! C interface to `tovds`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_integrate` / `*_solve` and released by the matching `*_free`. Every
//! entry point returns a [`TovdsStatus`]; on failure the message is kept per
//! thread and can be read with [`tovds_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tovds::equilibrium::{self, EquilibriumProfile};
use tovds::linearop::build_xchart;
use tovds::model::{validate_spec, Eos, EosSpec, ModelParams};
use tovds::modes::{solve_modes, ModeSet};
use tovds::{exterior, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TovdsStatus {
    Ok = 0,
    NullPointer = 1,
    BufferTooSmall = 2,
    Panic = 3,
    GammaNotAdmissible = 10,
    CausalityViolated = 11,
    DomainExceeded = 12,
    NoConvergence = 13,
    InvalidInput = 14,
    NotMonotoneShort = 15,
    HorizonApproached = 16,
    NoBoundary = 17,
    InsufficientResolution = 18,
    QuadratureFailed = 19,
    GridMismatch = 20,
    NotConverged = 21,
    SpuriousMode = 22,
    NonpositiveEigenvalue = 23,
    UnstableStep = 24,
    DataNotSmall = 25,
    DegenerateFactor = 26,
    SingularMatching = 27,
    ConfigInvalid = 28,
    Io = 29,
}

impl From<&Error> for TovdsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::GammaNotAdmissible { .. } => TovdsStatus::GammaNotAdmissible,
            Error::CausalityViolated { .. } => TovdsStatus::CausalityViolated,
            Error::DomainExceeded { .. } => TovdsStatus::DomainExceeded,
            Error::NoConvergence(_) => TovdsStatus::NoConvergence,
            Error::InvalidInput(_) => TovdsStatus::InvalidInput,
            Error::NotMonotoneShort { .. } => TovdsStatus::NotMonotoneShort,
            Error::HorizonApproached { .. } => TovdsStatus::HorizonApproached,
            Error::NoBoundary { .. } => TovdsStatus::NoBoundary,
            Error::InsufficientResolution(_) => TovdsStatus::InsufficientResolution,
            Error::QuadratureFailed(_) => TovdsStatus::QuadratureFailed,
            Error::GridMismatch { .. } => TovdsStatus::GridMismatch,
            Error::NotConverged { .. } => TovdsStatus::NotConverged,
            Error::SpuriousMode { .. } => TovdsStatus::SpuriousMode,
            Error::NonpositiveEigenvalue { .. } => TovdsStatus::NonpositiveEigenvalue,
            Error::UnstableStep(_) => TovdsStatus::UnstableStep,
            Error::DataNotSmall(_) => TovdsStatus::DataNotSmall,
            Error::DegenerateFactor { .. } => TovdsStatus::DegenerateFactor,
            Error::SingularMatching { .. } => TovdsStatus::SingularMatching,
            Error::ConfigInvalid(_) => TovdsStatus::ConfigInvalid,
            Error::Io(_) => TovdsStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: TovdsStatus, msg: impl Into<String>) -> TovdsStatus {
    set_last_error(msg.into());
    status
}

/// Runs `f` with the last error cleared, mapping library errors and panics
/// to status codes.
fn guard<F>(f: F) -> TovdsStatus
where
    F: FnOnce() -> Result<(), TovdsStatus>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TovdsStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(TovdsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lib_err(e: Error) -> TovdsStatus {
    let status = TovdsStatus::from(&e);
    fail(status, format!("{}: {e}", e.name()))
}

fn null_check<T>(p: *const T, what: &str) -> Result<(), TovdsStatus> {
    if p.is_null() {
        Err(fail(TovdsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Copies `src` into `out[..cap]`, always writing the required length to
/// `len_out` when it is non-null.
unsafe fn copy_out(src: &[f64], out: *mut f64, cap: usize, len_out: *mut usize) -> Result<(), TovdsStatus> {
    if !len_out.is_null() {
        *len_out = src.len();
    }
    if out.is_null() {
        return Err(fail(TovdsStatus::NullPointer, "output buffer is null"));
    }
    if cap < src.len() {
        return Err(fail(
            TovdsStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message for the most recent failure on this thread, or null when the last
/// call succeeded. The pointer stays valid until the next call on the same
/// thread.
#[no_mangle]
pub extern "C" fn tovds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Stable name of a status code, as a static string.
#[no_mangle]
pub extern "C" fn tovds_status_name(status: TovdsStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        TovdsStatus::Ok => b"Ok\0",
        TovdsStatus::NullPointer => b"NullPointer\0",
        TovdsStatus::BufferTooSmall => b"BufferTooSmall\0",
        TovdsStatus::Panic => b"Panic\0",
        TovdsStatus::GammaNotAdmissible => b"GammaNotAdmissible\0",
        TovdsStatus::CausalityViolated => b"CausalityViolated\0",
        TovdsStatus::DomainExceeded => b"DomainExceeded\0",
        TovdsStatus::NoConvergence => b"NoConvergence\0",
        TovdsStatus::InvalidInput => b"InvalidInput\0",
        TovdsStatus::NotMonotoneShort => b"NotMonotoneShort\0",
        TovdsStatus::HorizonApproached => b"HorizonApproached\0",
        TovdsStatus::NoBoundary => b"NoBoundary\0",
        TovdsStatus::InsufficientResolution => b"InsufficientResolution\0",
        TovdsStatus::QuadratureFailed => b"QuadratureFailed\0",
        TovdsStatus::GridMismatch => b"GridMismatch\0",
        TovdsStatus::NotConverged => b"NotConverged\0",
        TovdsStatus::SpuriousMode => b"SpuriousMode\0",
        TovdsStatus::NonpositiveEigenvalue => b"NonpositiveEigenvalue\0",
        TovdsStatus::UnstableStep => b"UnstableStep\0",
        TovdsStatus::DataNotSmall => b"DataNotSmall\0",
        TovdsStatus::DegenerateFactor => b"DegenerateFactor\0",
        TovdsStatus::SingularMatching => b"SingularMatching\0",
        TovdsStatus::ConfigInvalid => b"ConfigInvalid\0",
        TovdsStatus::Io => b"Io\0",
    };
    s.as_ptr() as *const c_char
}

// Equation of state

/// A validated equation of state together with `G`, `c` and `Lambda`.
pub struct TovdsEos {
    eos: Eos,
    params: ModelParams,
}

/// Builds an equation of state. `omega` may be null when `omega_len` is 0;
/// a non-positive `omega_radius` means no radius limit.
///
/// # Safety
/// `omega` must point to `omega_len` readable doubles, and `out` must be a
/// valid place to store a handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_eos_new(
    a: f64,
    gamma: f64,
    omega: *const f64,
    omega_len: usize,
    omega_radius: f64,
    g: f64,
    c: f64,
    lambda: f64,
    out: *mut *mut TovdsEos,
) -> TovdsStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = ptr::null_mut();
        let coeffs = if omega_len == 0 {
            Vec::new()
        } else {
            null_check(omega, "omega")?;
            std::slice::from_raw_parts(omega, omega_len).to_vec()
        };
        let mut spec = EosSpec::polytrope(a, gamma).with_omega(coeffs);
        if omega_radius > 0.0 {
            spec.omega_radius = Some(omega_radius);
        }
        let params = ModelParams { g, c, lambda };
        let eos = validate_spec(&spec, &params).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TovdsEos { eos, params }));
        Ok(())
    })
}

/// # Safety
/// `eos` must be null or a handle from [`tovds_eos_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tovds_eos_free(eos: *mut TovdsEos) {
    if !eos.is_null() {
        drop(Box::from_raw(eos));
    }
}

unsafe fn eos_scalar(
    eos: *const TovdsEos,
    out: *mut f64,
    f: impl FnOnce(&TovdsEos) -> tovds::Result<f64>,
) -> TovdsStatus {
    guard(|| {
        null_check(eos, "eos")?;
        null_check(out, "out")?;
        *out = f(&*eos).map_err(lib_err)?;
        Ok(())
    })
}

/// Pressure at rest-mass density `rho`.
///
/// # Safety
/// `eos` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_eos_pressure(eos: *const TovdsEos, rho: f64, out: *mut f64) -> TovdsStatus {
    eos_scalar(eos, out, |e| e.eos.pressure(rho))
}

/// Enthalpy potential `u` at density `rho`.
///
/// # Safety
/// `eos` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_eos_enthalpy(eos: *const TovdsEos, rho: f64, out: *mut f64) -> TovdsStatus {
    eos_scalar(eos, out, |e| e.eos.enthalpy_u(rho))
}

/// Inverse of [`tovds_eos_enthalpy`].
///
/// # Safety
/// `eos` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_eos_rho_of_u(eos: *const TovdsEos, u: f64, out: *mut f64) -> TovdsStatus {
    eos_scalar(eos, out, |e| e.eos.rho_of_u(u))
}

/// Adiabatic index as a function of `u`.
///
/// # Safety
/// `eos` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_eos_gamma1(eos: *const TovdsEos, u: f64, out: *mut f64) -> TovdsStatus {
    eos_scalar(eos, out, |e| e.eos.gamma1(u))
}

// Equilibrium

pub struct TovdsProfile {
    profile: EquilibriumProfile,
}

/// Boundary values of an equilibrium.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TovdsBoundary {
    pub r_plus: f64,
    pub m_plus: f64,
    pub kappa_plus: f64,
    pub q_plus: f64,
    pub c_rho: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TovdsColumn {
    R = 0,
    M = 1,
    S = 2,
    Rho = 3,
    P = 4,
    U = 5,
    F = 6,
    H = 7,
}

/// Integrates the equilibrium with central density `rho_c` to relative
/// tolerance `tol`.
///
/// # Safety
/// `eos` must be a live handle and `out` a valid place to store a handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_profile_integrate(
    eos: *const TovdsEos,
    rho_c: f64,
    tol: f64,
    out: *mut *mut TovdsProfile,
) -> TovdsStatus {
    guard(|| {
        null_check(eos, "eos")?;
        null_check(out, "out")?;
        *out = ptr::null_mut();
        let e = &*eos;
        let profile = equilibrium::solve(rho_c, &e.eos, &e.params, tol).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TovdsProfile { profile }));
        Ok(())
    })
}

/// # Safety
/// `profile` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_profile_free(profile: *mut TovdsProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_profile_boundary(profile: *const TovdsProfile, out: *mut TovdsBoundary) -> TovdsStatus {
    guard(|| {
        null_check(profile, "profile")?;
        null_check(out, "out")?;
        let p = &(*profile).profile;
        *out = TovdsBoundary {
            r_plus: p.r_plus,
            m_plus: p.m_plus,
            kappa_plus: p.kappa_plus,
            q_plus: p.q_plus,
            c_rho: p.c_rho,
        };
        Ok(())
    })
}

/// Number of grid points; 0 for a null handle.
///
/// # Safety
/// `profile` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_profile_len(profile: *const TovdsProfile) -> usize {
    if profile.is_null() {
        0
    } else {
        (*profile).profile.len()
    }
}

/// Copies one profile column into `out`. `len_out` receives the column
/// length even when the buffer is too small.
///
/// # Safety
/// `profile` must be a live handle, `out` must hold `cap` doubles and
/// `len_out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_profile_copy_column(
    profile: *const TovdsProfile,
    column: TovdsColumn,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> TovdsStatus {
    guard(|| {
        null_check(profile, "profile")?;
        let p = &(*profile).profile;
        let src = match column {
            TovdsColumn::R => &p.r,
            TovdsColumn::M => &p.m,
            TovdsColumn::S => &p.s,
            TovdsColumn::Rho => &p.rho,
            TovdsColumn::P => &p.p,
            TovdsColumn::U => &p.u,
            TovdsColumn::F => &p.f,
            TovdsColumn::H => &p.h,
        };
        copy_out(src, out, cap, len_out)
    })
}

// Modes

pub struct TovdsModes {
    modes: ModeSet,
}

/// Lowest `k` radial modes on a `grid`-interval mesh. The coefficient chart
/// is sampled at `chart_grid` angles.
///
/// # Safety
/// `profile` must be a live handle and `out` a valid place to store a handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_modes_solve(
    profile: *const TovdsProfile,
    k: usize,
    grid: usize,
    chart_grid: usize,
    out: *mut *mut TovdsModes,
) -> TovdsStatus {
    guard(|| {
        null_check(profile, "profile")?;
        null_check(out, "out")?;
        *out = ptr::null_mut();
        let chart = build_xchart(&(*profile).profile, chart_grid).map_err(lib_err)?;
        let modes = solve_modes(&chart, k, grid).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TovdsModes { modes }));
        Ok(())
    })
}

/// # Safety
/// `modes` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_modes_free(modes: *mut TovdsModes) {
    if !modes.is_null() {
        drop(Box::from_raw(modes));
    }
}

/// # Safety
/// `modes` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_modes_count(modes: *const TovdsModes) -> usize {
    if modes.is_null() {
        0
    } else {
        (*modes).modes.lambdas.len()
    }
}

/// Number of points in each eigenfunction; 0 for a null handle.
///
/// # Safety
/// `modes` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tovds_modes_grid_len(modes: *const TovdsModes) -> usize {
    if modes.is_null() {
        0
    } else {
        (*modes).modes.x().len()
    }
}

/// Eigenvalues in physical units, ascending.
///
/// # Safety
/// `modes` must be a live handle, `out` must hold `cap` doubles and
/// `len_out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_modes_lambdas(
    modes: *const TovdsModes,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> TovdsStatus {
    guard(|| {
        null_check(modes, "modes")?;
        copy_out(&(*modes).modes.lambdas, out, cap, len_out)
    })
}

/// Grid `x` shared by all eigenfunctions.
///
/// # Safety
/// As for [`tovds_modes_lambdas`].
#[no_mangle]
pub unsafe extern "C" fn tovds_modes_grid(
    modes: *const TovdsModes,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> TovdsStatus {
    guard(|| {
        null_check(modes, "modes")?;
        copy_out((*modes).modes.x(), out, cap, len_out)
    })
}

/// Eigenfunction `index` (0-based).
///
/// # Safety
/// As for [`tovds_modes_lambdas`].
#[no_mangle]
pub unsafe extern "C" fn tovds_modes_eigenfunction(
    modes: *const TovdsModes,
    index: usize,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> TovdsStatus {
    guard(|| {
        null_check(modes, "modes")?;
        let m = &(*modes).modes;
        let psi = m.psis.get(index).ok_or_else(|| {
            fail(TovdsStatus::InvalidInput, format!("mode index {index} out of range 0..{}", m.psis.len()))
        })?;
        copy_out(psi, out, cap, len_out)
    })
}

// Exterior

/// Exterior metric factor `1 - 2Gm+/(c^2 r) - Lambda r^2/3`.
///
/// # Safety
/// `eos` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_sds_kappa(eos: *const TovdsEos, r: f64, m_plus: f64, out: *mut f64) -> TovdsStatus {
    eos_scalar(eos, out, |e| Ok(exterior::sds_kappa(r, m_plus, &e.params)))
}

/// Positive horizon radii in ascending order; `len_out` receives how many
/// there are (0, 1 or 2).
///
/// # Safety
/// `eos` must be a live handle, `out` must hold `cap` doubles and `len_out`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_horizons(
    eos: *const TovdsEos,
    m_plus: f64,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> TovdsStatus {
    guard(|| {
        null_check(eos, "eos")?;
        let h = exterior::horizons(m_plus, &(*eos).params);
        copy_out(&h, out, cap, len_out)
    })
}

/// Jump coefficient of the matched exterior for boundary velocity `v` and
/// its time derivative.
///
/// # Safety
/// `eos` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tovds_jump_coefficient(
    eos: *const TovdsEos,
    v: f64,
    dv_dt: f64,
    r: f64,
    m_plus: f64,
    kappa_plus: f64,
    out: *mut f64,
) -> TovdsStatus {
    eos_scalar(eos, out, |e| exterior::jump_coefficient(v, dv_dt, r, m_plus, kappa_plus, &e.params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_names_match_error_names() {
        let errs = [
            Error::GammaNotAdmissible { gamma: 3.0 },
            Error::NoConvergence("x".into()),
            Error::SingularMatching { det: 0.0 },
            Error::Io("x".into()),
        ];
        for e in errs {
            let name = unsafe { CStr::from_ptr(tovds_status_name(TovdsStatus::from(&e))) };
            assert_eq!(name.to_str().unwrap(), e.name());
        }
    }

    #[test]
    fn panic_is_caught() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, TovdsStatus::Panic);
        let msg = unsafe { CStr::from_ptr(tovds_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }
}
