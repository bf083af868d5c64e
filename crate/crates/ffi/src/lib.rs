//! C ABI for `abknot`.
//!
//! Every entry point returns an [`AbkStatus`]. On failure a message is stored
//! per thread and can be read with [`abk_last_error_message`]. Panics are
//! caught at the boundary and reported as [`AbkStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use abknot::born::{self, ScatteringKinematics};
use abknot::multipole::{self, MomentSet};
use abknot::radial::radial_coefficients;
use abknot::{Error, KnotSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Panic = 4,
}

/// Opaque knot handle with its curve moments.
pub struct AbkKnot {
    spec: KnotSpec,
    moments: Arc<MomentSet>,
}

/// Incoming and outgoing wave vectors and the excluded radius.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AbkKinematics {
    pub k_i: [f64; 3],
    pub k_n: [f64; 3],
    pub lambda0: f64,
}

/// Complex values as `[re, im]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AbkAmplitude {
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    pub v3: [f64; 2],
    pub v4: [f64; 2],
    pub total: [f64; 2],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let mut msg = msg.into();
    msg.retain(|c| c != '\0');
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(AbkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numerical() { AbkStatus::Numerical } else { AbkStatus::InvalidArgument };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AbkStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(f: F) -> AbkStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AbkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AbkStatus::Panic
        }
    }
}

fn kinematics(k: &AbkKinematics) -> Result<ScatteringKinematics, Failure> {
    Ok(ScatteringKinematics::new(k.k_i, k.k_n, k.lambda0)?)
}

fn boxed_knot(spec: KnotSpec, out: *mut *mut AbkKnot) -> Result<(), Failure> {
    let moments = match &spec {
        KnotSpec::Sampled(_) => Arc::new(MomentSet::compute(&spec, abknot::DEFAULT_CURVE_SAMPLES)?),
        _ => multipole::moment_set(&spec),
    };
    unsafe { *out = Box::into_raw(Box::new(AbkKnot { spec, moments })) };
    Ok(())
}

/// Parse `torus:P,Q`, `unknot-xy`, `unknot-xz`, `unknot-yz` or `file:PATH`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn abk_knot_parse(spec: *const c_char, out: *mut *mut AbkKnot) -> AbkStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Failure(AbkStatus::InvalidArgument, "spec is not UTF-8".into()))?;
        boxed_knot(text.parse()?, out)
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn abk_knot_torus(p: u32, q: u32, out: *mut *mut AbkKnot) -> AbkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        boxed_knot(KnotSpec::torus(p, q)?, out)
    })
}

/// Closed polyline from `n` points stored as `x0 y0 z0 x1 y1 z1 ...`.
///
/// # Safety
/// `xyz` must point to `3 * n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn abk_knot_from_points(xyz: *const f64, n: usize, out: *mut *mut AbkKnot) -> AbkStatus {
    guard(|| {
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = std::slice::from_raw_parts(xyz, 3 * n);
        let points = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        boxed_knot(KnotSpec::sampled(points)?, out)
    })
}

/// # Safety
/// `knot` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn abk_knot_free(knot: *mut AbkKnot) {
    if !knot.is_null() {
        drop(Box::from_raw(knot));
    }
}

/// The quadrupole scalars `K^1, K^2, K^3`.
///
/// # Safety
/// `knot` must be a live handle and `out` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn abk_knot_quadrupole(knot: *const AbkKnot, out: *mut f64) -> AbkStatus {
    guard(|| {
        let knot = knot.as_ref().ok_or_else(|| null("knot"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(knot.moments.quadrupole.k.as_ptr(), out, 3);
        Ok(())
    })
}

/// Dipole moment, zero for closed knots up to quadrature error.
///
/// # Safety
/// `knot` must be a live handle and `out` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn abk_knot_dipole(knot: *const AbkKnot, out: *mut f64) -> AbkStatus {
    guard(|| {
        let knot = knot.as_ref().ok_or_else(|| null("knot"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = multipole::dipole_moment(&knot.spec);
        ptr::copy_nonoverlapping(d.as_ptr(), out, 3);
        Ok(())
    })
}

/// Born matrix element split into its four parts.
///
/// # Safety
/// All pointers must be valid; `knot` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn abk_born_amplitude(
    knot: *const AbkKnot,
    kin: *const AbkKinematics,
    coupling: f64,
    out: *mut AbkAmplitude,
) -> AbkStatus {
    guard(|| {
        let knot = knot.as_ref().ok_or_else(|| null("knot"))?;
        let kin = kinematics(kin.as_ref().ok_or_else(|| null("kin"))?)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !coupling.is_finite() {
            return Err(Failure(AbkStatus::InvalidArgument, "coupling must be finite".into()));
        }
        let radial = radial_coefficients(&kin)?;
        let amp = born::born_amplitude_with_moments(&knot.moments, &kin, &radial, coupling)?;
        let [v1, v2, v3, v4] = amp.parts().map(|z| [z.re, z.im]);
        *out = AbkAmplitude { v1, v2, v3, v4, total: [amp.total.re, amp.total.im] };
        Ok(())
    })
}

/// Largest relative gap between the torus amplitude and its unknot triad.
///
/// # Safety
/// `kins` must point to `n` records and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn abk_factorization_residual(
    p: u32,
    q: u32,
    kins: *const AbkKinematics,
    n: usize,
    coupling: f64,
    out: *mut f64,
) -> AbkStatus {
    guard(|| {
        if kins.is_null() {
            return Err(null("kins"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let samples = std::slice::from_raw_parts(kins, n)
            .iter()
            .map(kinematics)
            .collect::<Result<Vec<_>, _>>()?;
        *out = born::factorization_residual(p, q, &samples, coupling)?;
        Ok(())
    })
}

/// Message for the last failure on this thread, or null.
///
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn abk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn abk_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
