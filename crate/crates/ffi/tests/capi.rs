use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use qtazrp_ffi::*;

#[test]
fn symbolic_hitting_probability_round_trip() {
    let x = [0i64, -1, -2];
    let y = [1i64, 3, 2];
    let mut h: *mut QtzRational = ptr::null_mut();
    unsafe {
        assert_eq!(qtz_hitting_symbolic(x.as_ptr(), y.as_ptr(), 3, &mut h), QtzStatus::Ok);
        assert!(!h.is_null());
        let s = qtz_rational_to_string(h);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        qtz_string_free(s);
        assert!(text.starts_with("(7168*q^2 + 16454*q^3"), "{text}");
        let mut v = 0.0;
        assert_eq!(qtz_rational_eval(h, 0.6, &mut v), QtzStatus::Ok);
        assert!((v - 0.02037997075365202).abs() < 1e-14);
        assert!(qtz_rational_equal(h, h));
        qtz_rational_free(h);
    }
}

#[test]
fn exact_contour_and_mc_cdf_agree() {
    let x = [0i64, 0, 0];
    let y = [0i64, 1, 3];
    let m = [4i64, 2, 1];
    let (mut exact, mut contour, mut err, mut mean, mut se) = (0.0, 0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(qtz_cdf_exact(x.as_ptr(), y.as_ptr(), 3, 0.6, 2.0, &mut exact), QtzStatus::Ok);
        assert_eq!(
            qtz_qmoment_contour(m.as_ptr(), 3, 0.6, 2.0, 0, &mut contour, &mut err),
            QtzStatus::Ok
        );
        assert_eq!(
            qtz_cdf_mc(x.as_ptr(), y.as_ptr(), 3, 0.6, 2.0, 100_000, 1, &mut mean, &mut se),
            QtzStatus::Ok
        );
    }
    assert!((exact - 0.0695753127).abs() < 1e-9);
    assert!((contour - exact).abs() < 1e-10 && err < 1e-8);
    assert!((mean - exact).abs() < 4.0 * se);
}

#[test]
fn errors_set_status_and_message() {
    let x = [0i64];
    let mut out = 0.0;
    unsafe {
        let s = qtz_cdf_exact(x.as_ptr(), x.as_ptr(), 1, 1.5, 1.0, &mut out);
        assert_eq!(s, QtzStatus::Domain);
        let msg = CStr::from_ptr(qtz_last_error()).to_str().unwrap();
        assert!(msg.contains("q must lie in (0,1)"), "{msg}");
        assert_eq!(qtz_cdf_exact(ptr::null(), x.as_ptr(), 1, 0.5, 1.0, &mut out), QtzStatus::NullPointer);
        assert_eq!(qtz_cdf_exact(x.as_ptr(), x.as_ptr(), 1, 0.5, 1.0, ptr::null_mut()), QtzStatus::NullPointer);
        let m = [1i64, 2];
        assert_eq!(
            qtz_qmoment_contour(m.as_ptr(), 2, 0.5, 1.0, 0, &mut out, ptr::null_mut()),
            QtzStatus::Domain
        );
        assert!(qtz_rational_to_string(ptr::null()).is_null());
        qtz_rational_free(ptr::null_mut());
        qtz_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(qtz_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qtazrp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "qtz_hitting_symbolic",
        "qtz_rational_to_string",
        "qtz_rational_eval",
        "qtz_rational_free",
        "qtz_cdf_exact",
        "qtz_qmoment_contour",
        "qtz_cdf_mc",
        "qtz_last_error",
        "QTZ_STATUS_DOMAIN",
        "typedef struct QtzRational QtzRational",
    ] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    let status = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status();
    if let Ok(status) = status {
        assert!(status.success(), "header does not compile as C");
    }
}
