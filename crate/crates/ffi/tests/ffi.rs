use hardedge_ffi::*;
use std::f64::consts::PI;
use std::ptr;

fn kernel(d: f64) -> *mut HeKernel {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { he_kernel_new(d, &mut k) }, HeStatus::Ok);
    assert!(!k.is_null());
    k
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { he_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn zeros_at_d3_are_multiples_of_pi() {
    let mut z = [0.0; 4];
    assert_eq!(unsafe { he_zeros(3.0, 4, z.as_mut_ptr()) }, HeStatus::Ok);
    for (k, v) in z.iter().enumerate() {
        assert!((v - (k + 1) as f64 * PI).abs() < 1e-12);
    }
    let k = kernel(3.0);
    let mut j2 = 0.0;
    assert_eq!(unsafe { he_kernel_zero(k, 2, &mut j2) }, HeStatus::Ok);
    assert!((j2 - 2.0 * PI).abs() < 1e-12);
    assert_eq!(unsafe { he_kernel_zero(k, 0, &mut j2) }, HeStatus::Domain);
    unsafe { he_kernel_free(k) };
}

#[test]
fn densities_match_closed_forms_at_d3() {
    let k = kernel(3.0);
    let (x, y, t) = (0.3, 0.6, 0.5);
    let mut v = 0.0;
    assert_eq!(unsafe { he_density(k, HeDensityKind::Stationary, x, y, t, 0.0, &mut v) }, HeStatus::Ok);
    assert!((v - 2.0 * (PI * y).sin().powi(2)).abs() < 1e-12);
    let mut drift = 0.0;
    assert_eq!(unsafe { he_limit_drift(k, x, &mut drift) }, HeStatus::Ok);
    assert!((drift - PI / (PI * x).tan()).abs() < 1e-10);
    let mut lim = 0.0;
    let mut cond = 0.0;
    unsafe {
        assert_eq!(he_density(k, HeDensityKind::Limit, x, y, t, 0.0, &mut lim), HeStatus::Ok);
        assert_eq!(he_density(k, HeDensityKind::Conditioned, x, y, t, f64::INFINITY, &mut cond), HeStatus::Ok);
    }
    assert_eq!(lim, cond);
    let mut s = 0.0;
    assert_eq!(unsafe { he_survival(k, x, 0.0, &mut s) }, HeStatus::Ok);
    assert_eq!(s, 1.0);
    unsafe { he_kernel_free(k) };
}

#[test]
fn errors_map_to_codes_with_messages() {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { he_kernel_new(1.5, &mut k) }, HeStatus::Dimension);
    assert!(k.is_null());
    assert!(last_error().contains("1.5"));
    assert_eq!(unsafe { he_kernel_new(2.0, ptr::null_mut()) }, HeStatus::NullPointer);
    let k = kernel(2.0);
    let mut v = 0.0;
    assert_eq!(unsafe { he_density(k, HeDensityKind::Killed, 0.5, 0.5, 1e-5, 0.0, &mut v) }, HeStatus::SeriesRegime);
    assert!(last_error().contains("series regime"));
    assert_eq!(unsafe { he_density(k, HeDensityKind::Killed, 1.5, 0.5, 1.0, 0.0, &mut v) }, HeStatus::Domain);
    assert_eq!(unsafe { he_survival(k, 0.5, 1.0, &mut v) }, HeStatus::Ok);
    assert_eq!(unsafe { he_last_error_message(ptr::null_mut(), 0) }, 0);
    unsafe {
        he_kernel_free(k);
        he_kernel_free(ptr::null_mut());
    }
}

#[test]
fn exact_draws_are_reproducible_and_inside() {
    let k = kernel(2.0);
    let mut a = vec![0.0; 500];
    let mut b = vec![0.0; 500];
    unsafe {
        assert_eq!(he_sample_exact(k, 0.5, 1.0, 4.0, 7, a.len(), a.as_mut_ptr()), HeStatus::Ok);
        assert_eq!(he_sample_exact(k, 0.5, 1.0, 4.0, 7, b.len(), b.as_mut_ptr()), HeStatus::Ok);
    }
    assert_eq!(a, b);
    assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let mut want = 0.0;
    // mean of the conditioned marginal by the midpoint rule
    for i in 0..2000 {
        let y = (i as f64 + 0.5) / 2000.0;
        let mut p = 0.0;
        unsafe { he_density(k, HeDensityKind::Conditioned, 0.5, y, 1.0, 4.0, &mut p) };
        want += y * p / 2000.0;
    }
    assert!((mean - want).abs() < 0.03, "{mean} vs {want}");
    unsafe { he_kernel_free(k) };
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/hardedge.h");
    for name in [
        "he_kernel_new", "he_kernel_new_with", "he_kernel_free", "he_kernel_zero", "he_density", "he_survival",
        "he_limit_drift", "he_zeros", "he_sample_exact", "he_last_error_message", "typedef struct HeKernel HeKernel",
        "HE_STATUS_SERIES_REGIME",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
