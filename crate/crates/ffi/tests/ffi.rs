use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ipl_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { ipl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn matrix(n: usize, data: &[f64]) -> *mut IplMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ipl_matrix_new(data.as_ptr(), n, &mut m) }, IplStatus::Ok);
    m
}

fn graph(n: usize, edges: &[usize], orientation: Option<&[i8]>) -> *mut IplGraph {
    let mut g = ptr::null_mut();
    let o = orientation.map_or(ptr::null(), |o| o.as_ptr());
    let st = unsafe { ipl_graph_new(n, edges.as_ptr(), edges.len() / 2, o, &mut g) };
    assert_eq!(st, IplStatus::Ok);
    g
}

#[test]
fn p3_orientation_spectra() {
    let me = matrix(2, &[2.0, 1.0, 1.0, 2.0]);
    for (signs, want) in [([1i8, -1], [0.0, 1.0, 9.0]), ([1, 1], [0.0, 3.0, 3.0])] {
        let g = graph(3, &[0, 1, 1, 2], Some(&signs));
        let mut s = ptr::null_mut();
        assert_eq!(
            unsafe { ipl_graph_laplacian(g, ptr::null(), me, &mut s) },
            IplStatus::Ok
        );
        let mut dim = 0;
        assert_eq!(unsafe { ipl_spectrum_dim(s, &mut dim) }, IplStatus::Ok);
        assert_eq!(dim, 3);
        let mut ev = [0.0; 3];
        assert_eq!(
            unsafe { ipl_spectrum_eigenvalues(s, ev.as_mut_ptr(), 3) },
            IplStatus::Ok
        );
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-9, "{ev:?}");
        }
        let mut small = [0.0; 2];
        assert_eq!(
            unsafe { ipl_spectrum_eigenvalues(s, small.as_mut_ptr(), 2) },
            IplStatus::BufferTooSmall
        );
        let mut z = 0;
        assert_eq!(unsafe { ipl_spectrum_zero_multiplicity(s, &mut z) }, IplStatus::Ok);
        assert_eq!(z, 1);
        unsafe {
            ipl_spectrum_free(s);
            ipl_graph_free(g);
        }
    }
    unsafe { ipl_matrix_free(me) };
}

#[test]
fn reversed_edge_flips_sign() {
    let g = graph(2, &[1, 0], None);
    let (mut u, mut v, mut s) = (9, 9, 0);
    assert_eq!(unsafe { ipl_graph_edge(g, 0, &mut u, &mut v, &mut s) }, IplStatus::Ok);
    assert_eq!((u, v, s), (0, 1, -1));
    assert_eq!(
        unsafe { ipl_graph_edge(g, 1, &mut u, &mut v, &mut s) },
        IplStatus::Domain
    );
    unsafe { ipl_graph_free(g) };
}

#[test]
fn conformality_values() {
    let m = matrix(2, &[2.0, 1.0, 1.0, 2.0]);
    let (mut s, mut w) = (0.0, 0.0);
    assert_eq!(unsafe { ipl_strong_conformality(m, &mut s) }, IplStatus::Ok);
    assert_eq!(unsafe { ipl_weak_conformality(m, 20, 0, 1, &mut w) }, IplStatus::Ok);
    assert!((s - 0.5).abs() < 1e-12);
    assert!((w - 0.5).abs() < 1e-12);
    unsafe { ipl_matrix_free(m) };
}

#[test]
fn cheeger_and_conductance_k2() {
    let g = graph(2, &[0, 1], None);
    let mv = matrix(2, &[1.0, 0.0, 0.0, 1.0]);
    let mut phi = 0.0;
    assert_eq!(unsafe { ipl_conductance(g, mv, ptr::null(), &mut phi) }, IplStatus::Ok);
    assert_eq!(phi, 1.0);
    let (mut l2, mut lo, mut hi, mut pass) = (0.0, 0.0, 0.0, 0);
    let st = unsafe { ipl_verify_cheeger(g, mv, ptr::null(), &mut l2, &mut lo, &mut hi, &mut pass) };
    assert_eq!(st, IplStatus::Ok);
    assert_eq!(pass, 1);
    assert!((l2 - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    unsafe {
        ipl_matrix_free(mv);
        ipl_graph_free(g);
    }
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    let st = unsafe { ipl_matrix_new([1.0, 2.0, 2.0, 1.0].as_ptr(), 2, &mut m) };
    assert_eq!(st, IplStatus::NotPositiveDefinite);
    assert!(m.is_null());
    assert!(last_error().contains("positive definite"));
    let st = unsafe { ipl_matrix_new([1.0, 2.0, 0.0, 1.0].as_ptr(), 2, &mut m) };
    assert_eq!(st, IplStatus::Asymmetric);
    assert_eq!(
        unsafe { ipl_matrix_new(ptr::null(), 2, &mut m) },
        IplStatus::NullPointer
    );
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { ipl_graph_new(2, [0usize, 0].as_ptr(), 1, ptr::null(), &mut g) },
        IplStatus::Domain
    );
    assert!(last_error().contains("loop"));
    let mut d = 0;
    assert_eq!(unsafe { ipl_matrix_dim(ptr::null(), &mut d) }, IplStatus::NullPointer);
    let v = unsafe { CStr::from_ptr(ipl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles a C program against the generated header and static library.
#[test]
fn c_program_links() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // `cargo test` only refreshes the rlib; build the static library itself.
    let built = Command::new(env!("CARGO"))
        .args(["build", "-p", "ipl-ffi", "--lib", "--target-dir"])
        .arg(profile_dir.parent().unwrap())
        .status()
        .unwrap();
    assert!(built.success());
    let lib = profile_dir.join("libipl_ffi.a");
    let out = std::env::temp_dir().join(format!("ipl_ffi_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "0 1 9");
}
