use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use eofkit_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(eof_last_error()) }
        .to_str()
        .unwrap()
        .to_owned()
}

fn bell_data() -> Vec<f64> {
    let mut m = vec![0.0; 32];
    for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[2 * (4 * r + c)] = 0.5;
    }
    m
}

#[test]
fn bell_state_through_handles() {
    let data = bell_data();
    let mut rho = ptr::null_mut();
    let s = unsafe { eof_density_new(2, 2, 1, data.as_ptr(), data.len(), &mut rho) };
    assert_eq!(s, EofStatus::Ok);
    assert!(last_error().is_empty());
    let mut v = f64::NAN;
    assert_eq!(unsafe { eof_wootters(rho, &mut v) }, EofStatus::Ok);
    assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    let opts = EofSearchOptions {
        restarts: 4,
        seed: 1,
    };
    assert_eq!(unsafe { eof_roof_value(rho, &opts, &mut v) }, EofStatus::Ok);
    assert!((v - std::f64::consts::LN_2).abs() < 1e-9);
    unsafe { eof_density_free(rho) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut rho = ptr::null_mut();
    let short = [1.0, 0.0];
    let s = unsafe { eof_density_new(2, 2, 1, short.as_ptr(), short.len(), &mut rho) };
    assert_eq!(s, EofStatus::Shape);
    assert!(
        last_error().contains("expected 32 doubles"),
        "{}",
        last_error()
    );
    assert!(rho.is_null());

    let s = unsafe { eof_density_new(2, 2, 1, ptr::null(), 32, &mut rho) };
    assert_eq!(s, EofStatus::NullPointer);

    let mut v = 0.0;
    assert_eq!(
        unsafe { eof_wootters(ptr::null(), &mut v) },
        EofStatus::NullPointer
    );
    assert!(last_error().contains("rho"));

    let bad = CString::new(r#"{"matrix": [[[1, 0]]]}"#).unwrap();
    assert_eq!(
        unsafe { eof_density_from_json(bad.as_ptr(), &mut rho) },
        EofStatus::Schema
    );
    assert!(last_error().contains("dims"), "{}", last_error());

    let mut ch = ptr::null_mut();
    assert_eq!(
        unsafe { eof_channel_werner_holevo(1, &mut ch) },
        EofStatus::Parameter
    );

    let id = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let mut op = ptr::null_mut();
    assert_eq!(
        unsafe { eof_operator_new(2, 1, 1, id.as_ptr(), id.len(), &mut op) },
        EofStatus::Ok
    );
    assert_eq!(
        unsafe { eof_h_p(op, 1.5, ptr::null(), &mut v) },
        EofStatus::Domain
    );
    unsafe { eof_operator_free(op) };
}

#[test]
fn free_accepts_null() {
    unsafe {
        eof_density_free(ptr::null_mut());
        eof_operator_free(ptr::null_mut());
        eof_channel_free(ptr::null_mut());
    }
}

#[test]
fn werner_holevo_purities() {
    let mut ch = ptr::null_mut();
    assert_eq!(
        unsafe { eof_channel_werner_holevo(3, &mut ch) },
        EofStatus::Ok
    );
    let opts = EofSearchOptions {
        restarts: 4,
        seed: 0,
    };
    let mut v = 0.0;
    assert_eq!(unsafe { eof_nu_q(ch, 5.0, &opts, &mut v) }, EofStatus::Ok);
    assert!((v - 2f64.powf(-0.8)).abs() < 1e-9);
    assert_eq!(
        unsafe { eof_multiplicativity_gap(ch, ch, 5.0, &opts, &mut v) },
        EofStatus::Ok
    );
    assert!(v < -1e-3);
    unsafe { eof_channel_free(ch) };
}

#[test]
fn g_and_conjugate_from_json() {
    let json = CString::new(
        r#"{"dims":{"dA":2,"dB":1,"copies":1},"matrix":[[[0.5,0],[0,0]],[[0,0],[0.25,0]]]}"#,
    )
    .unwrap();
    let mut op = ptr::null_mut();
    assert_eq!(
        unsafe { eof_operator_from_json(json.as_ptr(), &mut op) },
        EofStatus::Ok
    );
    let (mut d, mut e, mut x) = (0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { eof_g(op, EofGMethod::Direct, ptr::null(), &mut d) },
        EofStatus::Ok
    );
    assert_eq!(
        unsafe { eof_g(op, EofGMethod::Eigen, ptr::null(), &mut e) },
        EofStatus::Ok
    );
    assert!((d - 0.5f64.ln()).abs() < 1e-9 && (e - d).abs() < 1e-9);
    assert_eq!(
        unsafe { eof_conjugate(op, ptr::null(), &mut x) },
        EofStatus::Ok
    );
    assert!((x - 0.5).abs() < 1e-9);
    unsafe { eof_operator_free(op) };
}

#[test]
fn dual_bounds_on_bell() {
    let data = bell_data();
    let mut rho = ptr::null_mut();
    unsafe { eof_density_new(2, 2, 1, data.as_ptr(), data.len(), &mut rho) };
    let zero = vec![0.0; 32];
    let mut x = ptr::null_mut();
    unsafe { eof_operator_new(2, 2, 1, zero.as_ptr(), zero.len(), &mut x) };
    let opts = EofSearchOptions {
        restarts: 4,
        seed: 0,
    };
    let (mut lower, mut est) = (f64::NAN, f64::NAN);
    assert_eq!(
        unsafe { eof_dual_lower_bound(rho, x, &opts, &mut lower) },
        EofStatus::Ok
    );
    assert!(lower.abs() < 1e-12);
    assert_eq!(
        unsafe { eof_dual_estimate(rho, 20.0, &opts, &mut est) },
        EofStatus::Ok
    );
    assert!(est <= std::f64::consts::LN_2 + 1e-9 && est > std::f64::consts::LN_2 - 5e-3);
    unsafe {
        eof_operator_free(x);
        eof_density_free(rho);
    }
}

#[test]
fn version_is_cargo_version() {
    let v = unsafe { CStr::from_ptr(eof_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/eofkit.h");
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler; skipping header check");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
