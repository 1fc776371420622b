use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qftconv_ffi::*;

fn last_error() -> String {
    let p = qc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { qc_string_free(p) };
    s
}

#[test]
fn tree_roundtrip_and_renormalize() {
    let enc = CString::new("(())").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { qc_tree_parse(enc.as_ptr(), &mut t) }, QcStatus::Ok);
    assert_eq!(unsafe { qc_tree_size(t) }, 2);
    let l = CString::new("1").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { qc_tree_renormalize_json(t, l.as_ptr(), 3, &mut json) }, QcStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["terms"]["0"]["0"], "1/2");
    assert!(v["terms"].as_object().unwrap().keys().all(|k| k.parse::<i32>().unwrap() >= 0));
    unsafe { qc_tree_free(t) };
}

#[test]
fn parse_errors_are_reported() {
    let bad = CString::new("(()").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { qc_tree_parse(bad.as_ptr(), &mut t) }, QcStatus::ParseError);
    assert!(t.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { qc_tree_parse(ptr::null(), &mut t) }, QcStatus::NullPointer);
    assert_eq!(unsafe { qc_tree_size(ptr::null()) }, 0);
    unsafe { qc_tree_free(ptr::null_mut()) };
}

#[test]
fn exact_laws() {
    let (p, a, b) = (CString::new("1/2").unwrap(), CString::new("6/5").unwrap(), CString::new("4/5").unwrap());
    let mut law = ptr::null_mut();
    assert_eq!(unsafe { qc_law_pointwise(3, p.as_ptr(), a.as_ptr(), b.as_ptr(), &mut law) }, QcStatus::Ok);
    assert_eq!(unsafe { qc_law_order(law) }, 3);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { qc_law_mass_exact(law, 3, &mut s) }, QcStatus::Ok);
    assert_eq!(take_string(s), "27/125");
    let mut x = 0.0;
    assert_eq!(unsafe { qc_law_mass(law, 0, &mut x) }, QcStatus::Ok);
    assert_eq!(x, 8.0 / 125.0);
    unsafe { qc_law_free(law) };

    let bad = CString::new("3/2").unwrap();
    assert_eq!(unsafe { qc_law_binomial(2, bad.as_ptr(), &mut law) }, QcStatus::DomainError);
    let junk = CString::new("half").unwrap();
    assert_eq!(unsafe { qc_law_binomial(2, junk.as_ptr(), &mut law) }, QcStatus::ParseError);
}

#[test]
fn poisson_tv() {
    let mut tv = 0.0;
    assert_eq!(unsafe { qc_poisson_limit_tv(1000, 1.0, &mut tv) }, QcStatus::Ok);
    assert!(tv > 0.0 && tv < 1e-3);
    assert_eq!(unsafe { qc_poisson_limit_tv(0, 1.0, &mut tv) }, QcStatus::DomainError);
}

#[test]
fn measures_convolve() {
    let (mut low, mut shell, mut full, mut conv) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(qc_measure_sharp(8, 1.0, 0.0, 1.0, &mut low), QcStatus::Ok);
        assert_eq!(qc_measure_sharp(8, 1.0, 1.0, f64::INFINITY, &mut shell), QcStatus::Ok);
        assert_eq!(qc_measure_sharp(8, 1.0, 0.0, f64::INFINITY, &mut full), QcStatus::Ok);
        assert_eq!(qc_measure_convolve(low, shell, &mut conv), QcStatus::Ok);
        assert_eq!(qc_measure_modes(conv), 8);
        let (mut a, mut b) = ([0.0; 8], [0.0; 8]);
        assert_eq!(qc_measure_covariance(conv, a.as_mut_ptr(), 8), QcStatus::Ok);
        assert_eq!(qc_measure_covariance(full, b.as_mut_ptr(), 8), QcStatus::Ok);
        assert_eq!(a, b);
        assert_eq!(qc_measure_covariance(full, b.as_mut_ptr(), 7), QcStatus::OutOfRange);
        assert_eq!(qc_measure_sharp(7, 1.0, 0.0, 1.0, &mut low), QcStatus::DomainError);
        for m in [low, shell, full, conv] {
            qc_measure_free(m);
        }
    }
}

#[test]
fn cli_runner() {
    let args: Vec<CString> = ["hopf-check", "--max-nodes", "3", "--format", "text"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
    let (mut out, mut code) = (ptr::null_mut(), -1);
    assert_eq!(unsafe { qc_cli_run(ptrs.len() as i32, ptrs.as_ptr(), &mut out, &mut code) }, QcStatus::Ok);
    assert_eq!(code, 0);
    assert!(take_string(out).contains("coassociativity OK, antipode OK"));

    let bad = [CString::new("nope").unwrap()];
    let ptrs: Vec<*const c_char> = bad.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(unsafe { qc_cli_run(1, ptrs.as_ptr(), &mut out, &mut code) }, QcStatus::Ok);
    assert_eq!(code, 2);
    unsafe { qc_string_free(out) };
    assert!(last_error().contains("nope"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/qftconv.h")).unwrap();
    for name in [
        "qc_last_error",
        "qc_version",
        "qc_string_free",
        "qc_tree_parse",
        "qc_tree_renormalize_json",
        "qc_law_pointwise",
        "qc_law_mass_exact",
        "qc_poisson_limit_tv",
        "qc_measure_sharp",
        "qc_measure_convolve",
        "qc_cli_run",
        "typedef struct QcTree QcTree",
        "QC_STATUS_DOMAIN_ERROR = 4",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libqftconv_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out_dir = std::env::temp_dir().join(format!("qftconv-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&out_dir).unwrap();
    let exe = out_dir.join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    std::fs::remove_dir_all(&out_dir).ok();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "size=3 order=3 mass3=27/125 ok");
}
