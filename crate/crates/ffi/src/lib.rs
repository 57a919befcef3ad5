//! C interface to `symsurf`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! style functions and released with the matching `*_free`. Every fallible
//! call returns a [`SymsurfStatus`]; on failure a message describing the
//! error is available from [`symsurf_last_error_message`] on the same thread.
//!
//! Grid-valued arrays are row-major over `(i, j)` with `i` along `x`; tangent
//! fields add the ambient component as the fastest axis, so a field on an
//! `nx × ny` grid in `ℝ^{2n}` has `nx·ny·2n` entries.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use symsurf::ambient::AmbientModel;
use symsurf::embedding::{classify, split_tangent, ClassifyTolerances, Embedding, TangentField, Verdict};
use symsurf::error::Error;
use symsurf::forms::{omega_d, omega_s};
use symsurf::io::{load_embedding, save_embedding};
use symsurf::lab::scenario::AmbientSpec;
use symsurf::lab::{Lab, Scenario};
use symsurf::moser::{moser_reparametrize_with, MoserOptions};
use symsurf::surface::{AreaForm, TorusGrid};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymsurfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Shapes or dimensions of the inputs disagree.
    DimensionMismatch = 3,
    DegenerateForm = 4,
    /// The map is not an immersion or not a positively oriented symplectic surface.
    NotSymplectic = 5,
    AreaMismatch = 6,
    MeshFolding = 7,
    /// Closedness, mean-zero or positivity preconditions failed.
    Numerical = 8,
    Io = 9,
    Parse = 10,
    /// A Rust panic was caught at the boundary.
    Internal = 11,
}

/// Classification of `α_v`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymsurfVerdict {
    Exact = 0,
    ClosedNotExact = 1,
    NotClosed = 2,
}

/// Ambient model `(T^{2n}, ω)`.
pub struct SymsurfModel(Arc<AmbientModel>);

/// Embedded torus on a grid, together with its ambient model.
pub struct SymsurfEmbedding(Embedding);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SymsurfStatus {
    match e {
        Error::DegenerateForm { .. } => SymsurfStatus::DegenerateForm,
        Error::DimensionMismatch { .. } | Error::GridMismatch => SymsurfStatus::DimensionMismatch,
        Error::InvalidArgument(_) | Error::NotUnimodular { .. } | Error::NotSymplecticMap => SymsurfStatus::InvalidArgument,
        Error::NotClosed { .. } | Error::NonZeroMean { .. } | Error::NonPositivePath { .. } => SymsurfStatus::Numerical,
        Error::NotImmersed { .. } | Error::NotSymplecticSurface { .. } => SymsurfStatus::NotSymplectic,
        Error::MeshFolding { .. } => SymsurfStatus::MeshFolding,
        Error::AreaMismatch { .. } => SymsurfStatus::AreaMismatch,
        Error::Scenario(_) | Error::Json(_) => SymsurfStatus::Parse,
        Error::Io(_) => SymsurfStatus::Io,
    }
}

struct Failure(SymsurfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SymsurfStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SymsurfStatus::InvalidArgument, msg.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SymsurfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SymsurfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            SymsurfStatus::Internal
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn field_len(f: &Embedding) -> usize {
    f.grid().len() * f.dim()
}

unsafe fn field(f: &Embedding, p: *const f64, len: usize, what: &str) -> Result<TangentField, Failure> {
    let expected = field_len(f);
    if len != expected {
        return Err(Failure(
            SymsurfStatus::DimensionMismatch,
            format!("{what} has {len} entries, expected {expected}"),
        ));
    }
    let data = Array3::from_shape_vec((f.grid().nx(), f.grid().ny(), f.dim()), slice(p, len, what)?.to_vec())
        .expect("length checked");
    Ok(TangentField::new(f.grid(), data)?)
}

/// `σ` from a density array of `nx·ny` entries, or the unit form when null.
unsafe fn area_form(grid: &TorusGrid, density: *const f64) -> Result<AreaForm, Failure> {
    if density.is_null() {
        return Ok(AreaForm::unit(grid));
    }
    let values = slice(density, grid.len(), "sigma density")?.to_vec();
    let a = Array2::from_shape_vec(grid.shape(), values).expect("length matches grid");
    Ok(AreaForm::new(grid, a)?)
}

fn write_field(v: &TangentField, out: &mut [f64]) {
    out.copy_from_slice(v.data().as_slice().expect("standard layout"));
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn symsurf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn symsurf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Standard model on `T^{2n}` with `η = 0`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn symsurf_model_standard(half_dim: usize, out: *mut *mut SymsurfModel) -> SymsurfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let model = AmbientModel::standard(half_dim)?;
        *out = Box::into_raw(Box::new(SymsurfModel(Arc::new(model))));
        Ok(())
    })
}

/// Model from JSON `{"n": …, "omega": "standard" | [[…]], "eta": [...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn symsurf_model_from_json(json: *const c_char, out: *mut *mut SymsurfModel) -> SymsurfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let spec: AmbientSpec = serde_json::from_str(c_str(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(SymsurfModel(Arc::new(spec.build()?))));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn symsurf_model_free(model: *mut SymsurfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Ambient dimension `2n`, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symsurf_model_dim(model: *const SymsurfModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

fn new_embedding(out: *mut *mut SymsurfEmbedding, f: Embedding) -> Result<(), Failure> {
    let out = unsafe { out_ref(out, "out")? };
    *out = Box::into_raw(Box::new(SymsurfEmbedding(f)));
    Ok(())
}

/// Sheared family `f_a(x, y) = (x + (a/2π) sin 2πx, y, 0, …)`; `a = 0` gives
/// the flat embedding.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn symsurf_embedding_sheared(
    model: *const SymsurfModel,
    nx: usize,
    ny: usize,
    a: f64,
    out: *mut *mut SymsurfEmbedding,
) -> SymsurfStatus {
    guard(|| {
        let model = borrow(model, "model")?;
        let grid = TorusGrid::new(nx, ny)?;
        new_embedding(out, Embedding::sheared(model.0.clone(), &grid, a)?)
    })
}

/// Embedding from lift samples (`nx·ny·2n` entries) and an integer winding
/// matrix (`2n·2` entries, row per ambient component).
///
/// # Safety
/// `lift` and `winding` must point to arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn symsurf_embedding_from_lift(
    model: *const SymsurfModel,
    nx: usize,
    ny: usize,
    lift: *const f64,
    lift_len: usize,
    winding: *const i64,
    out: *mut *mut SymsurfEmbedding,
) -> SymsurfStatus {
    guard(|| {
        let model = borrow(model, "model")?;
        let dim = model.0.dim();
        let grid = TorusGrid::new(nx, ny)?;
        if lift_len != grid.len() * dim {
            return Err(Failure(
                SymsurfStatus::DimensionMismatch,
                format!("lift has {lift_len} entries, expected {}", grid.len() * dim),
            ));
        }
        if winding.is_null() {
            return Err(null("winding"));
        }
        let w = std::slice::from_raw_parts(winding, 2 * dim);
        let winding = w.chunks(2).map(|r| [r[0], r[1]]).collect();
        let data = Array3::from_shape_vec((nx, ny, dim), slice(lift, lift_len, "lift")?.to_vec()).expect("length checked");
        new_embedding(out, Embedding::new(model.0.clone(), &grid, data, winding)?)
    })
}

/// Loads an embedding file (JSON header plus binary payload).
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn symsurf_embedding_load(
    model: *const SymsurfModel,
    path: *const c_char,
    out: *mut *mut SymsurfEmbedding,
) -> SymsurfStatus {
    guard(|| {
        let model = borrow(model, "model")?;
        let f = load_embedding(Path::new(c_str(path, "path")?), model.0.clone())?;
        new_embedding(out, f)
    })
}

/// # Safety
/// `f` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn symsurf_embedding_save(f: *const SymsurfEmbedding, path: *const c_char) -> SymsurfStatus {
    guard(|| {
        let f = borrow(f, "embedding")?;
        save_embedding(&f.0, Path::new(c_str(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn symsurf_embedding_free(f: *mut SymsurfEmbedding) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Grid sizes and ambient dimension. Any output pointer may be null.
///
/// # Safety
/// Non-null pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn symsurf_embedding_shape(
    f: *const SymsurfEmbedding,
    nx: *mut usize,
    ny: *mut usize,
    dim: *mut usize,
) -> SymsurfStatus {
    guard(|| {
        let f = borrow(f, "embedding")?;
        for (p, v) in [(nx, f.0.grid().nx()), (ny, f.0.grid().ny()), (dim, f.0.dim())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Writes the pullback density `f*ω / dx∧dy` (`nx·ny` entries).
///
/// # Safety
/// `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn symsurf_embedding_pullback(f: *const SymsurfEmbedding, out: *mut f64, len: usize) -> SymsurfStatus {
    guard(|| {
        let f = borrow(f, "embedding")?;
        let s = f.0.pullback_density();
        if len != s.len() {
            return Err(Failure(SymsurfStatus::DimensionMismatch, format!("need {} entries, got {len}", s.len())));
        }
        slice_mut(out, len, "out")?.copy_from_slice(s.as_slice().expect("standard layout"));
        Ok(())
    })
}

/// `ω^D(v1, v2) = ∫ ω(v1, v2) σ`. A null `sigma_density` means `σ = dx∧dy`.
///
/// # Safety
/// `v1`, `v2` must hold `len = nx·ny·2n` values; `sigma_density`, when
/// non-null, `nx·ny` values.
#[no_mangle]
pub unsafe extern "C" fn symsurf_omega_d(
    f: *const SymsurfEmbedding,
    v1: *const f64,
    v2: *const f64,
    len: usize,
    sigma_density: *const f64,
    out: *mut f64,
) -> SymsurfStatus {
    guard(|| {
        let f = &borrow(f, "embedding")?.0;
        let (a, b) = (field(f, v1, len, "v1")?, field(f, v2, len, "v2")?);
        let sigma = area_form(f.grid(), sigma_density)?;
        *out_ref(out, "out")? = omega_d(f, &a, &b, &sigma)?.value;
        Ok(())
    })
}

/// `ω_S(v1, v2)`, the pairing induced on the space of symplectic surfaces.
///
/// # Safety
/// As for [`symsurf_omega_d`].
#[no_mangle]
pub unsafe extern "C" fn symsurf_omega_s(
    f: *const SymsurfEmbedding,
    v1: *const f64,
    v2: *const f64,
    len: usize,
    out: *mut f64,
) -> SymsurfStatus {
    guard(|| {
        let f = &borrow(f, "embedding")?.0;
        let (a, b) = (field(f, v1, len, "v1")?, field(f, v2, len, "v2")?);
        *out_ref(out, "out")? = omega_s(f, &a, &b)?.value;
        Ok(())
    })
}

/// Classifies `α_v = ω(v, df·)` as exact, closed or neither. `periods`, when
/// non-null, receives the two periods.
///
/// # Safety
/// `v` must hold `len` values; `periods` must have room for 2 values or be null.
#[no_mangle]
pub unsafe extern "C" fn symsurf_classify(
    f: *const SymsurfEmbedding,
    v: *const f64,
    len: usize,
    closed_tol: f64,
    exact_tol: f64,
    verdict: *mut SymsurfVerdict,
    periods: *mut f64,
) -> SymsurfStatus {
    guard(|| {
        let f = &borrow(f, "embedding")?.0;
        let v = field(f, v, len, "v")?;
        if !(closed_tol >= 0.0 && exact_tol >= 0.0) {
            return Err(invalid("tolerances must be non-negative"));
        }
        let c = classify(
            f,
            &v,
            ClassifyTolerances {
                closed: closed_tol,
                exact: exact_tol,
            },
        )?;
        *out_ref(verdict, "verdict")? = match c.verdict {
            Verdict::Exact => SymsurfVerdict::Exact,
            Verdict::ClosedNotExact => SymsurfVerdict::ClosedNotExact,
            Verdict::NotClosed => SymsurfVerdict::NotClosed,
        };
        if !periods.is_null() {
            slice_mut(periods, 2, "periods")?.copy_from_slice(&c.periods);
        }
        Ok(())
    })
}

/// Splits `v` into its tangential and ω-orthogonal parts.
///
/// # Safety
/// `v`, `tangential` and `orthogonal` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn symsurf_split(
    f: *const SymsurfEmbedding,
    v: *const f64,
    len: usize,
    tangential: *mut f64,
    orthogonal: *mut f64,
) -> SymsurfStatus {
    guard(|| {
        let f = &borrow(f, "embedding")?.0;
        let v = field(f, v, len, "v")?;
        let sp = split_tangent(f, &v)?;
        write_field(&sp.tangential, slice_mut(tangential, len, "tangential")?);
        write_field(&sp.orthogonal, slice_mut(orthogonal, len, "orthogonal")?);
        Ok(())
    })
}

/// Reparametrises `f` so that it pulls `ω` back to `σ` (unit when
/// `sigma_density` is null). On success `out` receives a new embedding and
/// `residual` the achieved `‖(f∘φ)*ω − σ‖∞`. `converged` is set to 1 when the
/// residual is within `tol`.
///
/// # Safety
/// Pointers as documented; `sigma_density` holds `nx·ny` values when non-null.
#[no_mangle]
pub unsafe extern "C" fn symsurf_moser(
    f: *const SymsurfEmbedding,
    sigma_density: *const f64,
    steps: usize,
    tol: f64,
    out: *mut *mut SymsurfEmbedding,
    residual: *mut f64,
    converged: *mut i32,
) -> SymsurfStatus {
    guard(|| {
        let f = &borrow(f, "embedding")?.0;
        let sigma = area_form(f.grid(), sigma_density)?;
        let opts = MoserOptions {
            steps,
            tol,
            ..MoserOptions::default()
        };
        let r = moser_reparametrize_with(f, &sigma, &opts)?;
        if let Some(p) = residual.as_mut() {
            *p = r.residual;
        }
        if let Some(p) = converged.as_mut() {
            *p = i32::from(r.converged);
        }
        new_embedding(out, r.embedding)
    })
}

/// Runs a scenario given as JSON text. Relative file references resolve
/// against `base_dir` (current directory when null). On success `report`
/// receives the JSON report, to be released with [`symsurf_string_free`], and
/// `pass` is set to 1 when every gating suite passed.
///
/// # Safety
/// `json` (and `base_dir` when non-null) must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn symsurf_run_scenario_json(
    json: *const c_char,
    base_dir: *const c_char,
    report: *mut *mut c_char,
    pass: *mut i32,
) -> SymsurfStatus {
    guard(|| {
        let scenario = Scenario::from_json(c_str(json, "json")?)?;
        let base = if base_dir.is_null() { "." } else { c_str(base_dir, "base_dir")? };
        let out = out_ref(report, "report")?;
        let r = Lab::new(scenario, Path::new(base))?.run();
        if let Some(p) = pass.as_mut() {
            *p = i32::from(r.pass);
        }
        *out = CString::new(r.to_json()).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn symsurf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
