//! C ABI for `torusrep`.
//!
//! Every fallible entry point returns a [`TrpStatus`]; on failure a message
//! is stored per thread and can be read with [`trp_last_error_message`].
//! Objects are opaque handles released by their `_free` function. Strings
//! returned through `char **` out-parameters are owned by the caller and
//! must be released with [`trp_string_free`]. Structured inputs are JSON in
//! the same schemas as the command line jobs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use torusrep::cert::{verify_certificate, Certificate, Verdict};
use torusrep::io::to_json_string;
use torusrep::knot_reps::{find_splice_rep, sample_image_curve, ImageCurve, ImageOptions, KnotSpec, Presentation, SpliceOptions};
use torusrep::torus_dynamics::{build_shearing_program, BuildParams, ErrorCertificate, FieldConfig, ShearingProgram};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    Compute = 4,
    OutOfRange = 5,
    Unavailable = 6,
    Panic = 7,
}

/// A shearing program, optionally with the error certificate it was built
/// with.
pub struct TrpProgram {
    program: ShearingProgram,
    certificate: Option<ErrorCertificate>,
}

/// A sampled pillowcase image curve.
pub struct TrpImageCurve {
    curve: ImageCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TrpStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> TrpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TrpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            TrpStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(TrpStatus::NullArgument, format!("{name} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(TrpStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn read_json<T: for<'de> serde::Deserialize<'de>>(p: *const c_char, name: &str) -> FfiResult<T> {
    let s = read_str(p, name)?;
    serde_json::from_str(s).map_err(|e| Failure(TrpStatus::InvalidJson, format!("{name}: {e}")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn to_c_string<T: serde::Serialize + ?Sized>(v: &T) -> FfiResult<*mut c_char> {
    let s = to_json_string(v).map_err(|e| Failure(TrpStatus::Compute, e.to_string()))?;
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(TrpStatus::Compute, e.to_string()))
}

fn compute<E: std::fmt::Display>(e: E) -> Failure {
    Failure(TrpStatus::Compute, e.to_string())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn trp_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn trp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn trp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a shearing program for a field job (`FieldConfig` JSON) within
/// `eps` using default build parameters.
///
/// # Safety
/// `field_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_program_build(field_json: *const c_char, eps: f64, out: *mut *mut TrpProgram) -> TrpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg: FieldConfig = read_json(field_json, "field_json")?;
        let params = BuildParams::default();
        let field = cfg.build(params.div_tol).map_err(compute)?;
        let (program, cert) = build_shearing_program(&field, eps, &params).map_err(compute)?;
        let handle = Box::new(TrpProgram {
            program,
            certificate: Some(cert),
        });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// Loads a shearing program from its JSON form.
///
/// # Safety
/// `program_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_program_from_json(program_json: *const c_char, out: *mut *mut TrpProgram) -> TrpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let program: ShearingProgram = read_json(program_json, "program_json")?;
        program.validate().map_err(|e| Failure(TrpStatus::InvalidJson, e.to_string()))?;
        let handle = Box::new(TrpProgram {
            program,
            certificate: None,
        });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// Evaluates the program at time `t` on the lifted point (x, y) and writes
/// the lifted image to `out[0..2]`.
///
/// # Safety
/// `program` must be a live handle and `out` must point to two doubles.
#[no_mangle]
pub unsafe extern "C" fn trp_program_eval(program: *const TrpProgram, t: f64, x: f64, y: f64, out: *mut f64) -> TrpStatus {
    guard(|| {
        let prog = program.as_ref().ok_or_else(|| null("program"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Failure(TrpStatus::OutOfRange, format!("t = {t} outside [0, 1]")));
        }
        let q = prog.program.eval_lift(t, [x, y]);
        out.write(q[0]);
        out.add(1).write(q[1]);
        Ok(())
    })
}

/// The program as JSON.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_program_json(program: *const TrpProgram, out: *mut *mut c_char) -> TrpStatus {
    guard(|| {
        let prog = program.as_ref().ok_or_else(|| null("program"))?;
        write_out(out, to_c_string(&prog.program)?, "out")
    })
}

/// The error certificate as JSON; `TRP_STATUS_UNAVAILABLE` for programs
/// loaded from JSON.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_program_certificate_json(program: *const TrpProgram, out: *mut *mut c_char) -> TrpStatus {
    guard(|| {
        let prog = program.as_ref().ok_or_else(|| null("program"))?;
        let cert = prog
            .certificate
            .as_ref()
            .ok_or_else(|| Failure(TrpStatus::Unavailable, "program has no certificate".into()))?;
        write_out(out, to_c_string(cert)?, "out")
    })
}

/// Releases a program. NULL is ignored.
///
/// # Safety
/// `program` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn trp_program_free(program: *mut TrpProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Samples the pillowcase image of a knot given as `KnotSpec` JSON.
/// `samples = 0` keeps the default sample count.
///
/// # Safety
/// `knot_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_image_curve_new(
    knot_json: *const c_char,
    samples: u32,
    seed: u64,
    out: *mut *mut TrpImageCurve,
) -> TrpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let knot: KnotSpec = read_json(knot_json, "knot_json")?;
        let mut opts = ImageOptions {
            seed,
            ..ImageOptions::default()
        };
        if samples > 0 {
            opts.n_samples = samples as usize;
        }
        let curve = sample_image_curve(&knot, &opts).map_err(compute)?;
        write_out(out, Box::into_raw(Box::new(TrpImageCurve { curve })), "out")
    })
}

unsafe fn arc_vertices<'a>(curve: *const TrpImageCurve, arc: usize) -> FfiResult<&'a [[f64; 2]]> {
    let c = curve.as_ref().ok_or_else(|| null("curve"))?;
    c.curve
        .arcs
        .get(arc)
        .map(|a| a.curve.vertices.as_slice())
        .ok_or_else(|| Failure(TrpStatus::OutOfRange, format!("arc {arc} of {}", c.curve.arcs.len())))
}

/// Number of irreducible arcs.
///
/// # Safety
/// `curve` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_image_curve_arc_count(curve: *const TrpImageCurve, out: *mut usize) -> TrpStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        write_out(out, c.curve.arcs.len(), "out")
    })
}

/// Number of vertices of an arc.
///
/// # Safety
/// `curve` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_image_curve_arc_len(curve: *const TrpImageCurve, arc: usize, out: *mut usize) -> TrpStatus {
    guard(|| {
        let v = arc_vertices(curve, arc)?;
        write_out(out, v.len(), "out")
    })
}

/// Vertex `index` of an arc as (α, β) in `out[0..2]`.
///
/// # Safety
/// `curve` must be a live handle and `out` must point to two doubles.
#[no_mangle]
pub unsafe extern "C" fn trp_image_curve_vertex(
    curve: *const TrpImageCurve,
    arc: usize,
    index: usize,
    out: *mut f64,
) -> TrpStatus {
    guard(|| {
        let v = arc_vertices(curve, arc)?;
        let p = v
            .get(index)
            .ok_or_else(|| Failure(TrpStatus::OutOfRange, format!("vertex {index} of {}", v.len())))?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(p[0]);
        out.add(1).write(p[1]);
        Ok(())
    })
}

/// Releases an image curve. NULL is ignored.
///
/// # Safety
/// `curve` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn trp_image_curve_free(curve: *mut TrpImageCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Verifies a certificate against a presentation. Sets `*accepted` to 1 or
/// 0; when `reason` is non-NULL it receives the rejection reason (NULL on
/// acceptance).
///
/// # Safety
/// String arguments must be NUL-terminated; `accepted` must be valid and
/// `reason` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn trp_cert_verify(
    presentation_json: *const c_char,
    certificate_json: *const c_char,
    accepted: *mut i32,
    reason: *mut *mut c_char,
) -> TrpStatus {
    guard(|| {
        if accepted.is_null() {
            return Err(null("accepted"));
        }
        let pres: Presentation = read_json(presentation_json, "presentation_json")?;
        pres.validate().map_err(|e| Failure(TrpStatus::InvalidJson, e.to_string()))?;
        let cert: Certificate = read_json(certificate_json, "certificate_json")?;
        let v = verify_certificate(&pres, &cert);
        accepted.write(i32::from(v.verdict.is_accept()));
        if !reason.is_null() {
            let r = match &v.verdict {
                Verdict::Accept => ptr::null_mut(),
                Verdict::Reject(r) => CString::new(r.to_string()).map_err(compute)?.into_raw(),
            };
            reason.write(r);
        }
        Ok(())
    })
}

/// Finds an irreducible representation of the splice of two knots given as
/// `KnotSpec` JSON and returns it as JSON.
///
/// # Safety
/// String arguments must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trp_splice_rep_json(
    left_json: *const c_char,
    right_json: *const c_char,
    out: *mut *mut c_char,
) -> TrpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let left: KnotSpec = read_json(left_json, "left_json")?;
        let right: KnotSpec = read_json(right_json, "right_json")?;
        let rep = find_splice_rep(&left, &right, &SpliceOptions::default()).map_err(compute)?;
        write_out(out, to_c_string(&rep)?, "out")
    })
}
