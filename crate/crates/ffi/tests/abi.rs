use std::ffi::CStr;
use std::ptr;

use smoothing_lab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sl_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn unit_gaussian() -> *mut SlDatum {
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(sl_datum_new(1, &mut d), SlStatus::Ok);
        assert_eq!(
            sl_datum_add_packet(d, 1.0, 0.0, 1.0, [0.0].as_ptr(), [0.0].as_ptr()),
            SlStatus::Ok
        );
    }
    d
}

#[test]
fn norms_of_the_unit_gaussian() {
    let d = unit_gaussian();
    let (mut l2, mut h) = (0.0, 0.0);
    unsafe {
        assert_eq!(sl_datum_l2_norm_sq(d, &mut l2), SlStatus::Ok);
        assert_eq!(sl_datum_hs_norm_sq(d, 0.5, &mut h), SlStatus::Ok);
        sl_datum_free(d);
    }
    // ∫ e^{-2x²} = √(π/2); the Ḣ^{1/2} value 1/(2π) is width independent in 1D.
    assert!((l2 - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-13);
    assert!((h * 2.0 * std::f64::consts::PI - 1.0).abs() < 1e-8);
    assert_eq!(last_error(), "");
}

#[test]
fn evolution_matches_closed_form() {
    let d = unit_gaussian();
    let (mut re, mut im) = (0.0, 0.0);
    let x = 0.7;
    let t = 0.3;
    unsafe {
        assert_eq!(sl_evolve_value(d, t, &x, &mut re, &mut im), SlStatus::Ok);
        sl_datum_free(d);
    }
    // e^{-x²/β}/√β with β = 1 + 4it for a = 1.
    let beta = num_complex::Complex64::new(1.0, 4.0 * t);
    let expected = (-x * x / beta).exp() / beta.sqrt();
    assert!((re - expected.re).abs() < 1e-14 && (im - expected.im).abs() < 1e-14);
}

#[test]
fn identity_sides_agree() {
    let d = unit_gaussian();
    let mut w = ptr::null_mut();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    unsafe {
        assert_eq!(sl_weight_psi_eps(1.0, &mut w), SlStatus::Ok);
        assert_eq!(sl_morawetz_lhs(d, w, 0.5, &mut lhs), SlStatus::Ok);
        assert_eq!(sl_boundary_term(d, w, 0.5, &mut rhs), SlStatus::Ok);
        sl_weight_free(w);
        sl_datum_free(d);
    }
    assert!(lhs > 0.0);
    assert!((lhs - rhs).abs() <= 1e-8 * lhs);
}

#[test]
fn weight_handles() {
    let mut w = ptr::null_mut();
    let mut scaled = ptr::null_mut();
    let mut d0 = [0.0; 5];
    let mut d1 = [0.0; 5];
    unsafe {
        assert_eq!(sl_weight_psi_k(2, &mut w), SlStatus::Ok);
        assert_eq!(sl_weight_rescale(w, 4.0, &mut scaled), SlStatus::Ok);
        assert_eq!(sl_weight_derivatives(w, 0.5, d0.as_mut_ptr()), SlStatus::Ok);
        assert_eq!(sl_weight_derivatives(scaled, 2.0, d1.as_mut_ptr()), SlStatus::Ok);
        sl_weight_free(scaled);
        sl_weight_free(w);
    }
    // R ψ(r/R): ψ scales by R, ψ′ is unchanged, ψ″ scales by 1/R.
    assert!((d1[0] - 4.0 * d0[0]).abs() < 1e-14);
    assert!((d1[1] - d0[1]).abs() < 1e-14);
    assert!((d1[2] - d0[2] / 4.0).abs() < 1e-14);
}

#[test]
fn errors_set_codes_and_messages() {
    let mut w = ptr::null_mut();
    let mut d = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(sl_weight_psi_eps(-1.0, &mut w), SlStatus::InvalidParameter);
        assert!(w.is_null());
        assert!(last_error().contains("eps"));
        assert_eq!(sl_weight_psi_k(0, &mut w), SlStatus::InvalidParameter);
        assert_eq!(sl_datum_new(4, &mut d), SlStatus::InvalidParameter);
        assert_eq!(sl_datum_l2_norm_sq(ptr::null(), &mut v), SlStatus::NullPointer);
        assert!(last_error().contains("null"));

        d = unit_gaussian();
        assert_eq!(
            sl_datum_add_packet(d, 1.0, 0.0, -2.0, [0.0].as_ptr(), [0.0].as_ptr()),
            SlStatus::InvalidParameter
        );
        assert_eq!(sl_datum_hs_norm_sq(d, 0.5, ptr::null_mut()), SlStatus::NullPointer);
        sl_datum_free(d);
        sl_datum_free(ptr::null_mut());
        sl_weight_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/smoothing_lab.h")).unwrap();
    for name in [
        "sl_last_error_message",
        "sl_datum_new",
        "sl_datum_add_packet",
        "sl_datum_free",
        "sl_datum_l2_norm_sq",
        "sl_datum_hs_norm_sq",
        "sl_evolve_value",
        "sl_weight_psi_eps",
        "sl_weight_psi_k",
        "sl_weight_constant",
        "sl_weight_rescale",
        "sl_weight_derivatives",
        "sl_weight_free",
        "sl_morawetz_lhs",
        "sl_boundary_term",
        "sl_flux",
        "sl_smoothing_profile",
        "sl_radial_profile",
        "typedef struct SlDatum SlDatum",
        "SL_STATUS_TOLERANCE_NOT_MET = 5",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
