//! C ABI for `lizorkin`.
//!
//! Objects are opaque handles created by `lz_*` constructors and released
//! with the matching `lz_*_free`. Every fallible call returns an
//! [`LzStatus`]; on failure [`lz_last_error`] describes the error. Panics
//! are caught at the boundary and reported as [`LzStatus::Internal`].

use lizorkin::calculus::{faa_terms, MultiIndex};
use lizorkin::extension::{extend, extension_covering};
use lizorkin::geometry::{Domain, WhitneyCovering, WhitneyOptions};
use lizorkin::spaces::{tl_norm, NormSpec, SampledFunction};
use lizorkin::Error;
use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDomain = 3,
    Resolution = 4,
    Coverage = 5,
    Capability = 6,
    Spec = 7,
    Io = 8,
    Format = 9,
    NoConvergence = 10,
    Geometry = 11,
    Internal = 99,
}

/// A domain.
pub struct LzDomain(Domain);

/// A Whitney covering of a domain and its complement.
pub struct LzCovering(WhitneyCovering);

/// Samples of a function on a grid, with an absence mask.
pub struct LzFunction(SampledFunction);

/// Called once per grid point inside the domain: `(x, dim, user) -> f(x)`.
/// Null is rejected.
pub type LzScalarFn = Option<extern "C" fn(x: *const f64, dim: usize, user: *mut c_void) -> f64>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LzStatus {
    match e {
        Error::InvalidDomain(_) => LzStatus::InvalidDomain,
        Error::Resolution(_) | Error::IncompleteInput(_) => LzStatus::Resolution,
        Error::Coverage(_) => LzStatus::Coverage,
        Error::Capability(_) => LzStatus::Capability,
        Error::Spec(_) => LzStatus::Spec,
        Error::Io(_) => LzStatus::Io,
        Error::Format(_) | Error::Json(_) | Error::Csv(_) => LzStatus::Format,
        Error::NoConvergence(_) | Error::Conditioning { .. } => LzStatus::NoConvergence,
        Error::InfeasibleConstant(_) | Error::NoChain { .. } => LzStatus::Geometry,
        Error::InvalidArgument(_) | Error::Config(_) => LzStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> LzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LzStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            LzStatus::Internal
        }
    }
}

fn null() -> Error {
    Error::InvalidArgument("null pointer".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("string is not UTF-8".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, Error> {
    p.as_mut().ok_or_else(null)
}

unsafe fn in_arg<'a, T>(p: *const T) -> Result<&'a T, Error> {
    p.as_ref().ok_or_else(null)
}

fn with_null_check(status: LzStatus, any_null: bool) -> LzStatus {
    if any_null {
        set_error("null pointer");
        LzStatus::NullPointer
    } else {
        status
    }
}

/// Message of the last failed call on this thread (empty after a success).
///
/// # Safety
/// The pointer stays valid until the next `lz_*` call on the same thread and
/// must not be freed.
#[no_mangle]
pub unsafe extern "C" fn lz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Built-in domain by name (`interval`, `square`, `lshape`, `disc`,
/// `slit-square`) or signed-distance file path.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer. The
/// handle written to `out` must be released with [`lz_domain_free`].
#[no_mangle]
pub unsafe extern "C" fn lz_domain_builtin(name: *const c_char, out: *mut *mut LzDomain) -> LzStatus {
    let status = guard(|| {
        let d = Domain::resolve(str_arg(name)?)?;
        *out_arg(out)? = Box::into_raw(Box::new(LzDomain(d)));
        Ok(())
    });
    with_null_check(status, name.is_null() || out.is_null())
}

/// Spatial dimension of a domain (0 for a null handle).
///
/// # Safety
/// `dom` must be null or a live handle from [`lz_domain_builtin`].
#[no_mangle]
pub unsafe extern "C" fn lz_domain_dim(dom: *const LzDomain) -> usize {
    dom.as_ref().map_or(0, |d| d.0.dim())
}

/// # Safety
/// `dom` must be null or a handle from [`lz_domain_builtin`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lz_domain_free(dom: *mut LzDomain) {
    if !dom.is_null() {
        drop(Box::from_raw(dom));
    }
}

/// Whitney covering of `dom` and its exterior with constant `cw` (pass 0
/// for the default) down to generation `max_generation`.
///
/// # Safety
/// `dom` must be a live domain handle and `out` writable. Release the
/// result with [`lz_covering_free`].
#[no_mangle]
pub unsafe extern "C" fn lz_covering_build(
    dom: *const LzDomain,
    cw: f64,
    max_generation: u32,
    out: *mut *mut LzCovering,
) -> LzStatus {
    let status = guard(|| {
        let d = in_arg(dom)?;
        let mut opts = WhitneyOptions {
            max_generation,
            ..Default::default()
        };
        if cw != 0.0 {
            opts.cw = cw;
        }
        let cov = WhitneyCovering::build(&d.0, &opts)?;
        *out_arg(out)? = Box::into_raw(Box::new(LzCovering(cov)));
        Ok(())
    });
    with_null_check(status, dom.is_null() || out.is_null())
}

/// Interior and exterior cube counts of a covering.
///
/// # Safety
/// `cov` must be a live covering handle; `interior` and `exterior` writable.
#[no_mangle]
pub unsafe extern "C" fn lz_covering_cube_count(
    cov: *const LzCovering,
    interior: *mut usize,
    exterior: *mut usize,
) -> LzStatus {
    let status = guard(|| {
        let c = in_arg(cov)?;
        *out_arg(interior)? = c.0.interior.len();
        *out_arg(exterior)? = c.0.exterior.len();
        Ok(())
    });
    with_null_check(status, cov.is_null() || interior.is_null() || exterior.is_null())
}

/// # Safety
/// `cov` must be null or a handle from [`lz_covering_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lz_covering_free(cov: *mut LzCovering) {
    if !cov.is_null() {
        drop(Box::from_raw(cov));
    }
}

/// Samples `f` at the cell centers of spacing `h` covering `dom`; points
/// outside the domain are absent.
///
/// # Safety
/// `dom` must be a live domain handle, `f` a valid function pointer that
/// accepts `user`, and `out` writable. Release the result with
/// [`lz_function_free`].
#[no_mangle]
pub unsafe extern "C" fn lz_function_sample(
    dom: *const LzDomain,
    h: f64,
    f: LzScalarFn,
    user: *mut c_void,
    out: *mut *mut LzFunction,
) -> LzStatus {
    let status = guard(|| {
        let d = in_arg(dom)?;
        let f = f.ok_or_else(null)?;
        let s = SampledFunction::from_scalar(&d.0, h, |x| f(x.as_ptr(), x.len(), user))?;
        *out_arg(out)? = Box::into_raw(Box::new(LzFunction(s)));
        Ok(())
    });
    with_null_check(status, dom.is_null() || f.is_none() || out.is_null())
}

/// Reads a sampled-function JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable. Release the
/// result with [`lz_function_free`].
#[no_mangle]
pub unsafe extern "C" fn lz_function_load(path: *const c_char, out: *mut *mut LzFunction) -> LzStatus {
    let status = guard(|| {
        let s = SampledFunction::load(Path::new(str_arg(path)?))?;
        *out_arg(out)? = Box::into_raw(Box::new(LzFunction(s)));
        Ok(())
    });
    with_null_check(status, path.is_null() || out.is_null())
}

/// Writes a sampled-function JSON file.
///
/// # Safety
/// `f` must be a live function handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lz_function_save(f: *const LzFunction, path: *const c_char) -> LzStatus {
    let status = guard(|| in_arg(f)?.0.save(Path::new(str_arg(path)?)));
    with_null_check(status, f.is_null() || path.is_null())
}

/// Grid points and present samples of a function.
///
/// # Safety
/// `f` must be a live function handle; `points` and `present` writable.
#[no_mangle]
pub unsafe extern "C" fn lz_function_size(f: *const LzFunction, points: *mut usize, present: *mut usize) -> LzStatus {
    let status = guard(|| {
        let s = &in_arg(f)?.0;
        *out_arg(points)? = s.len();
        *out_arg(present)? = s.count_present();
        Ok(())
    });
    with_null_check(status, f.is_null() || points.is_null() || present.is_null())
}

/// Scalar sample at flat grid index `i`; `present` receives 0 for an absent
/// point (the value is then 0).
///
/// # Safety
/// `f` must be a live function handle; `value` and `present` writable.
#[no_mangle]
pub unsafe extern "C" fn lz_function_value(
    f: *const LzFunction,
    i: usize,
    value: *mut f64,
    present: *mut i32,
) -> LzStatus {
    let status = guard(|| {
        let s = &in_arg(f)?.0;
        if i >= s.len() {
            return Err(Error::InvalidArgument(format!("index {i} of {}", s.len())));
        }
        *out_arg(value)? = s.value(i)[0];
        *out_arg(present)? = s.is_present(i) as i32;
        Ok(())
    });
    with_null_check(status, f.is_null() || value.is_null() || present.is_null())
}

/// # Safety
/// `f` must be null or a function handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lz_function_free(f: *mut LzFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Triebel-Lizorkin norm with its split; `q` and `u` may be infinite.
///
/// # Safety
/// `f` must be a live function handle; the three outputs writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lz_tl_norm(
    f: *const LzFunction,
    s: f64,
    p: f64,
    q: f64,
    u: f64,
    rho: f64,
    total: *mut f64,
    wkp: *mut f64,
    seminorm: *mut f64,
) -> LzStatus {
    let status = guard(|| {
        let v = tl_norm(&in_arg(f)?.0, &NormSpec::new(s, p, q, u, rho))?;
        *out_arg(total)? = v.total;
        *out_arg(wkp)? = v.wkp;
        *out_arg(seminorm)? = v.seminorm;
        Ok(())
    });
    with_null_check(status, f.is_null() || total.is_null() || wkp.is_null() || seminorm.is_null())
}

/// Extension of order `k` (0 to 3) of samples on `dom` to a padded box.
///
/// # Safety
/// `f` and `dom` must be live handles and `out` writable. Release the
/// result with [`lz_function_free`].
#[no_mangle]
pub unsafe extern "C" fn lz_extend(
    f: *const LzFunction,
    k: u32,
    dom: *const LzDomain,
    out: *mut *mut LzFunction,
) -> LzStatus {
    let status = guard(|| {
        let s = &in_arg(f)?.0;
        let d = in_arg(dom)?;
        let cov = extension_covering(&d.0, s.h(), &WhitneyOptions::default())?;
        let e = extend(s, k, &cov)?;
        *out_arg(out)? = Box::into_raw(Box::new(LzFunction(e.function)));
        Ok(())
    });
    with_null_check(status, f.is_null() || dom.is_null() || out.is_null())
}

/// Number of Faa di Bruno terms of `D^order (g o f)` for `f: R^d -> R^big_d`.
///
/// # Safety
/// `order` must point to `d` readable integers and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn lz_faa_term_count(order: *const u32, d: usize, big_d: usize, out: *mut usize) -> LzStatus {
    let status = guard(|| {
        if order.is_null() {
            return Err(null());
        }
        let alpha = MultiIndex::new(std::slice::from_raw_parts(order, d).to_vec());
        *out_arg(out)? = faa_terms(&alpha, d, big_d)?.len();
        Ok(())
    });
    with_null_check(status, order.is_null() || out.is_null())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(status_of(&Error::Resolution("x".into())), LzStatus::Resolution);
        let s = guard(|| Err(Error::Capability("nope".into())));
        assert_eq!(s, LzStatus::Capability);
        let msg = unsafe { CStr::from_ptr(lz_last_error()) };
        assert!(msg.to_str().unwrap().contains("nope"));
        assert_eq!(guard(|| panic!("boom")), LzStatus::Internal);
    }
}
