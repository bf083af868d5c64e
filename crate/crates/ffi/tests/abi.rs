use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use abknot_ffi::*;

fn last_error() -> String {
    let p = abk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(spec: &str) -> (AbkStatus, *mut AbkKnot) {
    let c = CString::new(spec).unwrap();
    let mut knot = ptr::null_mut();
    let status = unsafe { abk_knot_parse(c.as_ptr(), &mut knot) };
    (status, knot)
}

fn kin(k: f64, a: (f64, f64), b: (f64, f64)) -> AbkKinematics {
    let dir = |(t, p): (f64, f64)| [k * t.sin() * p.cos(), k * t.sin() * p.sin(), k * t.cos()];
    AbkKinematics { k_i: dir(a), k_n: dir(b), lambda0: 3.5 }
}

#[test]
fn torus_amplitude_matches_core() {
    let (status, knot) = parse("torus:2,3");
    assert_eq!(status, AbkStatus::Ok);
    let k = kin(0.8, (0.3, 0.2), (1.4, 2.1));
    let mut amp = AbkAmplitude::default();
    assert_eq!(unsafe { abk_born_amplitude(knot, &k, 1.0, &mut amp) }, AbkStatus::Ok);
    let kin = abknot::ScatteringKinematics::new(k.k_i, k.k_n, k.lambda0).unwrap();
    let direct = abknot::born::born_amplitude(&abknot::KnotSpec::torus(2, 3).unwrap(), &kin, 1.0).unwrap();
    assert!((amp.total[0] - direct.total.re).abs() < 1e-14 * direct.total.norm().max(1.0));
    assert!((amp.total[1] - direct.total.im).abs() < 1e-14 * direct.total.norm().max(1.0));
    let sum: f64 = [amp.v1, amp.v2, amp.v3, amp.v4].iter().map(|v| v[0]).sum();
    assert!((sum - amp.total[0]).abs() < 1e-12);

    let mut k3 = [0.0; 3];
    assert_eq!(unsafe { abk_knot_quadrupole(knot, k3.as_mut_ptr()) }, AbkStatus::Ok);
    assert!((k3[2] + 9.0 * std::f64::consts::PI).abs() < 1e-10);
    let mut d = [1.0; 3];
    assert_eq!(unsafe { abk_knot_dipole(knot, d.as_mut_ptr()) }, AbkStatus::Ok);
    assert!(d.iter().all(|x| x.abs() < 1e-10));
    unsafe { abk_knot_free(knot) };
}

#[test]
fn error_codes_and_messages() {
    let (status, knot) = parse("torus:2,4");
    assert_eq!(status, AbkStatus::InvalidArgument);
    assert!(knot.is_null());
    assert!(last_error().contains("not coprime"));

    let (status, _) = parse("trefoil");
    assert_eq!(status, AbkStatus::InvalidArgument);

    let mut knot = ptr::null_mut();
    assert_eq!(unsafe { abk_knot_parse(ptr::null(), &mut knot) }, AbkStatus::NullPointer);
    assert_eq!(unsafe { abk_knot_torus(2, 3, ptr::null_mut()) }, AbkStatus::NullPointer);

    let pts = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0];
    assert_eq!(unsafe { abk_knot_from_points(pts.as_ptr(), 3, &mut knot) }, AbkStatus::InvalidArgument);
    assert!(last_error().contains("too few samples"));

    assert_eq!(unsafe { abk_knot_torus(3, 4, &mut knot) }, AbkStatus::Ok);
    assert!(abk_last_error_message().is_null());
    let forward = kin(1.0, (0.5, 0.5), (0.5, 0.5));
    let mut amp = AbkAmplitude::default();
    assert_eq!(unsafe { abk_born_amplitude(knot, &forward, 1.0, &mut amp) }, AbkStatus::InvalidArgument);
    assert!(last_error().contains("forward"));
    let ok = kin(1.0, (0.5, 0.5), (2.0, 0.5));
    assert_eq!(unsafe { abk_born_amplitude(knot, &ok, f64::NAN, &mut amp) }, AbkStatus::InvalidArgument);
    assert_eq!(unsafe { abk_born_amplitude(ptr::null(), &ok, 1.0, &mut amp) }, AbkStatus::NullPointer);
    unsafe {
        abk_knot_free(knot);
        abk_knot_free(ptr::null_mut());
    }
}

#[test]
fn sampled_knot_from_points() {
    let n = 256;
    let pts: Vec<f64> = (0..n)
        .flat_map(|j| {
            let t = j as f64 * std::f64::consts::TAU / n as f64;
            [3.0 * t.cos(), 3.0 * t.sin(), 0.0]
        })
        .collect();
    let mut knot = ptr::null_mut();
    assert_eq!(unsafe { abk_knot_from_points(pts.as_ptr(), n, &mut knot) }, AbkStatus::Ok);
    let mut k = [0.0; 3];
    assert_eq!(unsafe { abk_knot_quadrupole(knot, k.as_mut_ptr()) }, AbkStatus::Ok);
    assert!((k[2] + 9.0 * std::f64::consts::PI).abs() < 1e-9);
    unsafe { abk_knot_free(knot) };
}

#[test]
fn factorization_through_abi() {
    let ks = [kin(0.5, (0.2, 0.0), (1.2, 0.7)), kin(1.3, (2.0, 1.0), (0.4, 4.0))];
    let mut r = f64::NAN;
    assert_eq!(unsafe { abk_factorization_residual(2, 3, ks.as_ptr(), ks.len(), 1.0, &mut r) }, AbkStatus::Ok);
    assert!(r < 1e-9, "{r}");
    assert_eq!(unsafe { abk_factorization_residual(3, 2, ks.as_ptr(), ks.len(), 1.0, &mut r) }, AbkStatus::Ok);
    assert!(r > 1e-3, "{r}");
    assert_eq!(unsafe { abk_factorization_residual(2, 4, ks.as_ptr(), ks.len(), 1.0, &mut r) }, AbkStatus::InvalidArgument);
    assert_eq!(unsafe { abk_factorization_residual(2, 3, ks.as_ptr(), 0, 1.0, &mut r) }, AbkStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(abk_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_current_and_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/abknot.h")).unwrap();
    for sym in ["abk_knot_parse", "abk_born_amplitude", "abk_last_error_message", "ABK_STATUS_PANIC", "typedef struct AbkKnot AbkKnot"] {
        assert!(header.contains(sym), "{sym}");
    }
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(dir.join("include/abknot.h"))
        .output()
    else {
        eprintln!("cc not found; skipped syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
