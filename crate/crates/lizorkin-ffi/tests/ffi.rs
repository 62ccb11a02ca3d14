use lizorkin_ffi::*;
use std::ffi::{c_void, CStr, CString};
use std::ptr;

extern "C" fn affine(x: *const f64, dim: usize, user: *mut c_void) -> f64 {
    let x = unsafe { std::slice::from_raw_parts(x, dim) };
    let scale = unsafe { *(user as *const f64) };
    scale * (x[0] - 0.5)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lz_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn domain_and_covering_round_trip() {
    unsafe {
        let name = CString::new("square").unwrap();
        let mut dom = ptr::null_mut();
        assert_eq!(lz_domain_builtin(name.as_ptr(), &mut dom), LzStatus::Ok);
        assert_eq!(lz_domain_dim(dom), 2);
        let mut cov = ptr::null_mut();
        assert_eq!(lz_covering_build(dom, 0.0, 6, &mut cov), LzStatus::Ok);
        let (mut ni, mut ne) = (0usize, 0usize);
        assert_eq!(lz_covering_cube_count(cov, &mut ni, &mut ne), LzStatus::Ok);
        assert!(ni > 0 && ne > 0);
        lz_covering_free(cov);
        lz_domain_free(dom);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let bad = CString::new("no-such-domain").unwrap();
        let mut dom = ptr::null_mut();
        let st = lz_domain_builtin(bad.as_ptr(), &mut dom);
        assert_ne!(st, LzStatus::Ok);
        assert!(dom.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(lz_domain_builtin(ptr::null(), &mut dom), LzStatus::NullPointer);
        let mut n = 0usize;
        assert_eq!(lz_faa_term_count(ptr::null(), 1, 1, &mut n), LzStatus::NullPointer);
        // freeing null is a no-op
        lz_domain_free(ptr::null_mut());
        lz_function_free(ptr::null_mut());
    }
}

#[test]
fn sample_norm_extend_save_load() {
    unsafe {
        let name = CString::new("square").unwrap();
        let mut dom = ptr::null_mut();
        assert_eq!(lz_domain_builtin(name.as_ptr(), &mut dom), LzStatus::Ok);
        let mut scale = 2.0f64;
        let mut f = ptr::null_mut();
        let st = lz_function_sample(dom, 1.0 / 32.0, Some(affine), &mut scale as *mut f64 as *mut c_void, &mut f);
        assert_eq!(st, LzStatus::Ok);
        let (mut pts, mut present) = (0usize, 0usize);
        assert_eq!(lz_function_size(f, &mut pts, &mut present), LzStatus::Ok);
        assert_eq!(present, 32 * 32);

        let (mut total, mut wkp, mut semi) = (0.0, 0.0, 0.0);
        assert_eq!(
            lz_tl_norm(f, 0.5, 2.0, 2.0, 1.0, 1.0, &mut total, &mut wkp, &mut semi),
            LzStatus::Ok
        );
        assert!(semi > 0.0 && (total - wkp - semi).abs() < 1e-12);
        // integer s is rejected
        assert_eq!(
            lz_tl_norm(f, 1.0, 2.0, 2.0, 1.0, 1.0, &mut total, &mut wkp, &mut semi),
            LzStatus::Spec
        );

        let mut e = ptr::null_mut();
        assert_eq!(lz_extend(f, 1, dom, &mut e), LzStatus::Ok);
        let (mut epts, mut epresent) = (0usize, 0usize);
        assert_eq!(lz_function_size(e, &mut epts, &mut epresent), LzStatus::Ok);
        assert!(epts > pts);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("e.json").to_str().unwrap()).unwrap();
        assert_eq!(lz_function_save(e, path.as_ptr()), LzStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(lz_function_load(path.as_ptr(), &mut back), LzStatus::Ok);
        for i in [0, epts / 2, epts - 1] {
            let (mut a, mut pa, mut b, mut pb) = (0.0, 0, 0.0, 0);
            assert_eq!(lz_function_value(e, i, &mut a, &mut pa), LzStatus::Ok);
            assert_eq!(lz_function_value(back, i, &mut b, &mut pb), LzStatus::Ok);
            assert_eq!((a.to_bits(), pa), (b.to_bits(), pb));
        }
        let (mut v, mut p) = (0.0, 0);
        assert_eq!(lz_function_value(back, epts, &mut v, &mut p), LzStatus::InvalidArgument);

        lz_function_free(back);
        lz_function_free(e);
        lz_function_free(f);
        lz_domain_free(dom);
    }
}

#[test]
fn faa_term_counts() {
    // d = D = 1: one term per integer partition of the order
    for (m, want) in (1u32..=4).zip([1usize, 2, 3, 5]) {
        let mut n = 0usize;
        assert_eq!(unsafe { lz_faa_term_count(&m, 1, 1, &mut n) }, LzStatus::Ok);
        assert_eq!(n, want, "order {m}");
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lizorkin.h")).unwrap();
    for name in [
        "lz_domain_builtin",
        "lz_covering_build",
        "lz_function_sample",
        "lz_tl_norm",
        "lz_extend",
        "lz_faa_term_count",
        "LzStatus",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}
