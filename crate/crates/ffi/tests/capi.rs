use std::ffi::CStr;
use std::ptr;

use tovds_ffi::*;

fn last_error() -> String {
    let p = tovds_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn polytrope(lambda: f64) -> *mut TovdsEos {
    let mut eos = ptr::null_mut();
    let st = unsafe { tovds_eos_new(1.0, 1.5, ptr::null(), 0, 0.0, 1.0, 1.0, lambda, &mut eos) };
    assert_eq!(st, TovdsStatus::Ok);
    assert!(tovds_last_error_message().is_null());
    eos
}

#[test]
fn eos_round_trip() {
    let eos = polytrope(0.0);
    let (mut p, mut u, mut rho) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(tovds_eos_pressure(eos, 0.01, &mut p), TovdsStatus::Ok);
        assert!((p - 0.01f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(tovds_eos_enthalpy(eos, 0.01, &mut u), TovdsStatus::Ok);
        assert_eq!(tovds_eos_rho_of_u(eos, u, &mut rho), TovdsStatus::Ok);
        assert!((rho - 0.01).abs() < 1e-12);
        tovds_eos_free(eos);
    }
}

#[test]
fn bad_gamma_reports_status_and_message() {
    let mut eos = ptr::null_mut();
    let st = unsafe { tovds_eos_new(1.0, 1.7, ptr::null(), 0, 0.0, 1.0, 1.0, 0.0, &mut eos) };
    assert_eq!(st, TovdsStatus::GammaNotAdmissible);
    assert!(eos.is_null());
    assert!(last_error().starts_with("GammaNotAdmissible"));
    let name = unsafe { CStr::from_ptr(tovds_status_name(st)) };
    assert_eq!(name.to_str().unwrap(), "GammaNotAdmissible");
}

#[test]
fn null_handles_are_rejected() {
    let mut x = 0.0;
    let st = unsafe { tovds_eos_pressure(ptr::null(), 0.01, &mut x) };
    assert_eq!(st, TovdsStatus::NullPointer);
    assert_eq!(unsafe { tovds_profile_len(ptr::null()) }, 0);
    assert_eq!(unsafe { tovds_modes_count(ptr::null()) }, 0);
    unsafe {
        tovds_eos_free(ptr::null_mut());
        tovds_profile_free(ptr::null_mut());
        tovds_modes_free(ptr::null_mut());
    }
}

#[test]
fn horizons_and_jump() {
    let eos = polytrope(1e-4);
    let mut h = [0.0; 2];
    let mut n = 0usize;
    unsafe {
        assert_eq!(tovds_horizons(eos, 0.5, h.as_mut_ptr(), 2, &mut n), TovdsStatus::Ok);
        assert_eq!(n, 2);
        for r in &h[..n] {
            let mut k = 1.0;
            assert_eq!(tovds_sds_kappa(eos, *r, 0.5, &mut k), TovdsStatus::Ok);
            assert!(k.abs() < 1e-12);
        }
        let mut one = [0.0; 1];
        assert_eq!(tovds_horizons(eos, 0.5, one.as_mut_ptr(), 1, &mut n), TovdsStatus::BufferTooSmall);
        assert_eq!(n, 2);

        let mut a = 1.0;
        assert_eq!(tovds_jump_coefficient(eos, 0.0, 0.0, 7.0, 0.5, 0.85, &mut a), TovdsStatus::Ok);
        assert_eq!(a, 0.0);
        tovds_eos_free(eos);
    }
}

#[test]
fn profile_and_modes() {
    let eos = polytrope(1e-4);
    unsafe {
        let mut prof = ptr::null_mut();
        assert_eq!(tovds_profile_integrate(eos, 0.004, 1e-10, &mut prof), TovdsStatus::Ok);
        let mut b = TovdsBoundary::default();
        assert_eq!(tovds_profile_boundary(prof, &mut b), TovdsStatus::Ok);
        assert!((b.r_plus - 7.591).abs() < 1e-3, "r_plus {}", b.r_plus);
        assert!((b.m_plus - 0.58788).abs() < 1e-4, "m_plus {}", b.m_plus);

        let n = tovds_profile_len(prof);
        let mut r = vec![0.0; n];
        let mut len = 0;
        assert_eq!(tovds_profile_copy_column(prof, TovdsColumn::R, r.as_mut_ptr(), n, &mut len), TovdsStatus::Ok);
        assert_eq!(len, n);
        assert_eq!(*r.last().unwrap(), b.r_plus);
        assert!(r.windows(2).all(|w| w[0] < w[1]));

        let mut modes = ptr::null_mut();
        assert_eq!(tovds_modes_solve(prof, 2, 128, 64, &mut modes), TovdsStatus::Ok);
        assert_eq!(tovds_modes_count(modes), 2);
        let mut lam = [0.0; 2];
        assert_eq!(tovds_modes_lambdas(modes, lam.as_mut_ptr(), 2, ptr::null_mut()), TovdsStatus::Ok);
        assert!(lam[0] > 0.0 && lam[0] < lam[1]);

        let m = tovds_modes_grid_len(modes);
        let mut psi = vec![0.0; m];
        assert_eq!(tovds_modes_eigenfunction(modes, 0, psi.as_mut_ptr(), m, &mut len), TovdsStatus::Ok);
        assert!((psi[m - 1] - 1.0).abs() < 1e-12);
        assert_eq!(tovds_modes_eigenfunction(modes, 5, psi.as_mut_ptr(), m, &mut len), TovdsStatus::InvalidInput);

        tovds_modes_free(modes);
        tovds_profile_free(prof);
        tovds_eos_free(eos);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/tovds.h");
    for f in [
        "tovds_last_error_message",
        "tovds_status_name",
        "tovds_eos_new",
        "tovds_eos_free",
        "tovds_eos_pressure",
        "tovds_eos_enthalpy",
        "tovds_eos_rho_of_u",
        "tovds_eos_gamma1",
        "tovds_profile_integrate",
        "tovds_profile_free",
        "tovds_profile_boundary",
        "tovds_profile_len",
        "tovds_profile_copy_column",
        "tovds_modes_solve",
        "tovds_modes_free",
        "tovds_modes_count",
        "tovds_modes_grid_len",
        "tovds_modes_lambdas",
        "tovds_modes_grid",
        "tovds_modes_eigenfunction",
        "tovds_sds_kappa",
        "tovds_horizons",
        "tovds_jump_coefficient",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct TovdsEos TovdsEos;"));
}
