//! The C interface exercised from Rust through raw pointers.

use std::ffi::{CStr, CString};
use std::f64::consts::PI;
use std::ptr;

use symsurf_ffi::*;

const N: usize = 32;
const DIM: usize = 4;
const LEN: usize = N * N * DIM;

fn last_error() -> String {
    let p = symsurf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

struct Fixture {
    model: *mut SymsurfModel,
    f: *mut SymsurfEmbedding,
}

impl Fixture {
    fn sheared(a: f64) -> Self {
        let mut model = ptr::null_mut();
        let mut f = ptr::null_mut();
        unsafe {
            assert_eq!(symsurf_model_standard(2, &mut model), SymsurfStatus::Ok);
            assert_eq!(symsurf_embedding_sheared(model, N, N, a, &mut f), SymsurfStatus::Ok);
        }
        Self { model, f }
    }
}

impl Drop for Fixture {
    fn drop(&mut self) {
        unsafe {
            symsurf_embedding_free(self.f);
            symsurf_model_free(self.model);
        }
    }
}

/// `scalar(x) · e_c` in the row-major `(i, j, c)` layout.
fn along(c: usize, scalar: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut v = vec![0.0; LEN];
    for i in 0..N {
        for j in 0..N {
            v[(i * N + j) * DIM + c] = scalar(i as f64 / N as f64);
        }
    }
    v
}

#[test]
fn pairings_on_the_flat_fixture() {
    let fx = Fixture::sheared(0.0);
    let u = along(3, |x| -(2.0 * PI * x).cos());
    let v = along(2, |x| (2.0 * PI * x).cos());
    let (mut d, mut s) = (0.0, 0.0);
    unsafe {
        assert_eq!(symsurf_omega_d(fx.f, u.as_ptr(), v.as_ptr(), LEN, ptr::null(), &mut d), SymsurfStatus::Ok);
        assert_eq!(symsurf_omega_s(fx.f, u.as_ptr(), v.as_ptr(), LEN, &mut s), SymsurfStatus::Ok);
    }
    assert!((d - 0.5).abs() <= 1e-10, "{d}");
    assert!((s - 1.0).abs() <= 1e-10, "{s}");

    let sigma = vec![2.0; N * N];
    unsafe {
        assert_eq!(symsurf_omega_d(fx.f, u.as_ptr(), v.as_ptr(), LEN, sigma.as_ptr(), &mut d), SymsurfStatus::Ok);
    }
    assert!((d - 1.0).abs() <= 1e-10);
}

#[test]
fn classify_and_split() {
    let fx = Fixture::sheared(0.0);
    let mut verdict = SymsurfVerdict::NotClosed;
    let mut periods = [f64::NAN; 2];
    // −0.7 e₂ is closed with periods (0.7, 0) up to sign.
    let v = along(1, |_| -0.7);
    unsafe {
        let st = symsurf_classify(fx.f, v.as_ptr(), LEN, 1e-8, 1e-8, &mut verdict, periods.as_mut_ptr());
        assert_eq!(st, SymsurfStatus::Ok);
    }
    assert_eq!(verdict, SymsurfVerdict::ClosedNotExact);
    assert!((periods[0].abs() - 0.7).abs() <= 1e-12 && periods[1].abs() <= 1e-12, "{periods:?}");

    let w = along(3, |x| (2.0 * PI * x).sin());
    unsafe {
        let st = symsurf_classify(fx.f, w.as_ptr(), LEN, 1e-8, 1e-8, &mut verdict, ptr::null_mut());
        assert_eq!(st, SymsurfStatus::Ok);
    }
    assert_eq!(verdict, SymsurfVerdict::Exact);

    // e₁ + e₃ splits into e₁ (tangential) and e₃ (orthogonal).
    let mut mixed = along(0, |_| 1.0);
    for (m, e) in mixed.iter_mut().zip(along(2, |_| 1.0)) {
        *m += e;
    }
    let (mut tau, mut xi) = (vec![0.0; LEN], vec![0.0; LEN]);
    unsafe {
        let st = symsurf_split(fx.f, mixed.as_ptr(), LEN, tau.as_mut_ptr(), xi.as_mut_ptr());
        assert_eq!(st, SymsurfStatus::Ok);
    }
    let err = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(err(&tau, &along(0, |_| 1.0)) <= 1e-12);
    assert!(err(&xi, &along(2, |_| 1.0)) <= 1e-12);
}

#[test]
fn moser_normalises_the_sheared_family() {
    let fx = Fixture::sheared(0.3);
    let mut pull = vec![0.0; N * N];
    unsafe {
        assert_eq!(symsurf_embedding_pullback(fx.f, pull.as_mut_ptr(), N * N), SymsurfStatus::Ok);
    }
    assert!(pull.iter().fold(0.0f64, |m, p| m.max((p - 1.0).abs())) > 0.1);

    let mut out = ptr::null_mut();
    let (mut residual, mut converged) = (f64::NAN, 0);
    unsafe {
        let st = symsurf_moser(fx.f, ptr::null(), 50, 1e-4, &mut out, &mut residual, &mut converged);
        assert_eq!(st, SymsurfStatus::Ok);
        assert_eq!(converged, 1);
        assert!(residual <= 1e-4);
        assert_eq!(symsurf_embedding_pullback(out, pull.as_mut_ptr(), N * N), SymsurfStatus::Ok);
        symsurf_embedding_free(out);
    }
    assert!(pull.iter().all(|p| (p - 1.0).abs() <= 1e-4));

    let sigma = vec![2.0; N * N];
    let mut out = ptr::null_mut();
    unsafe {
        let st = symsurf_moser(fx.f, sigma.as_ptr(), 50, 1e-4, &mut out, &mut residual, &mut converged);
        assert_eq!(st, SymsurfStatus::AreaMismatch);
    }
    assert!(out.is_null());
    assert!(last_error().contains("total areas differ"));
}

#[test]
fn errors_are_reported_not_raised() {
    let mut d = 0.0;
    unsafe {
        assert_eq!(
            symsurf_omega_d(ptr::null(), ptr::null(), ptr::null(), 0, ptr::null(), &mut d),
            SymsurfStatus::NullPointer
        );
    }
    assert!(last_error().contains("embedding is null"));

    let fx = Fixture::sheared(0.0);
    let short = [0.0; 10];
    unsafe {
        let st = symsurf_omega_d(fx.f, short.as_ptr(), short.as_ptr(), 10, ptr::null(), &mut d);
        assert_eq!(st, SymsurfStatus::DimensionMismatch);
    }

    let mut model = ptr::null_mut();
    unsafe {
        let bad = CString::new(r#"{"n": 2, "omega": [[0, 1], [1, 0]]}"#).unwrap();
        assert_ne!(symsurf_model_from_json(bad.as_ptr(), &mut model), SymsurfStatus::Ok);
        let junk = CString::new("{").unwrap();
        assert_eq!(symsurf_model_from_json(junk.as_ptr(), &mut model), SymsurfStatus::Parse);
    }
    assert!(model.is_null());

    // A successful call clears the message.
    unsafe {
        assert_eq!(symsurf_embedding_shape(fx.f, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), SymsurfStatus::Ok);
    }
    assert!(symsurf_last_error_message().is_null());

    // A degenerate immersion is rejected with a status.
    let mut f = ptr::null_mut();
    let lift = vec![0.0; LEN];
    let winding = [0i64; 2 * DIM];
    unsafe {
        let st = symsurf_embedding_from_lift(fx.model, N, N, lift.as_ptr(), LEN, winding.as_ptr(), &mut f);
        assert_eq!(st, SymsurfStatus::NotSymplectic);
        symsurf_embedding_free(ptr::null_mut());
        symsurf_model_free(ptr::null_mut());
        symsurf_string_free(ptr::null_mut());
    }
    assert!(f.is_null());
}

#[test]
fn lift_round_trip_and_files() {
    let fx = Fixture::sheared(0.0);
    let mut lift = vec![0.0; LEN];
    for i in 0..N {
        for j in 0..N {
            lift[(i * N + j) * DIM] = i as f64 / N as f64;
            lift[(i * N + j) * DIM + 1] = j as f64 / N as f64;
        }
    }
    let winding = [1i64, 0, 0, 1, 0, 0, 0, 0];
    let mut f = ptr::null_mut();
    let mut pull = vec![0.0; N * N];
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("f.json").to_str().unwrap()).unwrap();
    unsafe {
        let st = symsurf_embedding_from_lift(fx.model, N, N, lift.as_ptr(), LEN, winding.as_ptr(), &mut f);
        assert_eq!(st, SymsurfStatus::Ok);
        assert_eq!(symsurf_embedding_pullback(f, pull.as_mut_ptr(), N * N), SymsurfStatus::Ok);
        assert_eq!(symsurf_embedding_save(f, path.as_ptr()), SymsurfStatus::Ok);
        symsurf_embedding_free(f);

        let mut g = ptr::null_mut();
        assert_eq!(symsurf_embedding_load(fx.model, path.as_ptr(), &mut g), SymsurfStatus::Ok);
        let (mut nx, mut ny, mut dim) = (0, 0, 0);
        assert_eq!(symsurf_embedding_shape(g, &mut nx, &mut ny, &mut dim), SymsurfStatus::Ok);
        assert_eq!((nx, ny, dim), (N, N, DIM));
        symsurf_embedding_free(g);

        let missing = CString::new("/nonexistent/f.json").unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(symsurf_embedding_load(fx.model, missing.as_ptr(), &mut h), SymsurfStatus::Io);
    }
    assert!(pull.iter().all(|p| (p - 1.0).abs() <= 1e-14));
}

#[test]
fn scenario_runs_through_the_boundary() {
    let json = CString::new(
        r#"{"ambient": {"n": 2, "omega": "standard"}, "grid": {"N": 32}, "sigma": 1.0,
            "embedding": "flat", "suites": ["exact_coincidence", "probe_converse"]}"#,
    )
    .unwrap();
    let mut report = ptr::null_mut();
    let mut pass = 0;
    unsafe {
        assert_eq!(symsurf_run_scenario_json(json.as_ptr(), ptr::null(), &mut report, &mut pass), SymsurfStatus::Ok);
    }
    assert_eq!(pass, 1);
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    unsafe { symsurf_string_free(report) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["suites"].as_array().unwrap().len(), 2);
    assert_eq!(v["pass"], true);

    let bad = CString::new(r#"{"suites": []}"#).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(symsurf_run_scenario_json(bad.as_ptr(), ptr::null(), &mut report, &mut pass), SymsurfStatus::Parse);
    }
    assert!(report.is_null());
    assert!(!symsurf_version().is_null());
}
