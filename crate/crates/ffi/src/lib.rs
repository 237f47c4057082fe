//! C ABI over the `ipl` library.
//!
//! Objects are opaque heap handles created by `*_new` functions and released
//! by the matching `*_free`. Every function returns an [`IplStatus`]; on
//! failure the message is kept per thread and read with
//! [`ipl_last_error_message`]. Matrices are dense row-major `double` arrays.
//! Edge-indexed data follows the graph's sorted edge order, which
//! [`ipl_graph_edge`] reports.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ipl::complex::Graph;
use ipl::conformality::{strong_conformality, weak_conformality_with, WeakOptions};
use ipl::error::Error;
use ipl::isoperimetry::{conductance, verify_cheeger, Limits};
use ipl::laplacian::{graph_laplacian, SpectrumResult};
use ipl::linalg::SpdMatrix;
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IplStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    Asymmetric = 3,
    NotPositiveDefinite = 4,
    Domain = 5,
    CapExceeded = 6,
    Numerical = 7,
    Precondition = 8,
    Input = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<&Error> for IplStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension(_) => IplStatus::Dimension,
            Error::Asymmetric { .. } => IplStatus::Asymmetric,
            Error::NotPositiveDefinite { .. } => IplStatus::NotPositiveDefinite,
            Error::Domain(_) => IplStatus::Domain,
            Error::CapExceeded { .. } => IplStatus::CapExceeded,
            Error::Numerical(_) => IplStatus::Numerical,
            Error::Precondition(_) => IplStatus::Precondition,
            Error::Input(_) => IplStatus::Input,
        }
    }
}

/// Symmetric positive definite matrix.
pub struct IplMatrix(SpdMatrix);

/// Simple graph with an edge orientation.
pub struct IplGraph(Graph);

/// Laplacian matrix with its ascending eigenvalues.
pub struct IplSpectrum(SpectrumResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(IplStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(IplStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(IplStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> IplStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IplStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            IplStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Fail> {
    if len < src.len() {
        return Err(Fail(
            IplStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full message length in
/// bytes, excluding the terminator. Returns 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ipl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ipl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds an SPD matrix from `n*n` row-major values.
///
/// # Safety
/// `data` must point to `n*n` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ipl_matrix_new(data: *const f64, n: usize, out: *mut *mut IplMatrix) -> IplStatus {
    guard(|| {
        let vals = slice(data, n * n, "data")?;
        let m = SpdMatrix::new(DMatrix::from_row_slice(n, n, vals))?;
        write_out(out, Box::into_raw(Box::new(IplMatrix(m))), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from [`ipl_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ipl_matrix_free(m: *mut IplMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_matrix_dim(m: *const IplMatrix, out: *mut usize) -> IplStatus {
    guard(|| write_out(out, handle(m, "matrix")?.0.dim(), "out"))
}

/// Builds a graph on `n` vertices from `m` edges given as `2*m` vertex
/// indices. `orientation` holds `m` signs (+1/-1) in the same order and may
/// be null for all +1; an edge `(a, b)` with sign +1 points from `a` to `b`.
///
/// # Safety
/// `edges` must point to `2*m` values, `orientation` to `m` values or null.
#[no_mangle]
pub unsafe extern "C" fn ipl_graph_new(
    n: usize,
    edges: *const usize,
    m: usize,
    orientation: *const i8,
    out: *mut *mut IplGraph,
) -> IplStatus {
    guard(|| {
        let flat = slice(edges, 2 * m, "edges")?;
        let pairs: Vec<(usize, usize)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        let signs = if orientation.is_null() {
            vec![1i8; m]
        } else {
            slice(orientation, m, "orientation")?.to_vec()
        };
        let labels = (1..=n).map(|i| format!("v{i}")).collect();
        let (g, perm) = Graph::build(labels, &pairs)?;
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Fail(IplStatus::Domain, "orientation signs must be +1 or -1".into()));
        }
        let sorted: Vec<i8> = perm
            .iter()
            .map(|&k| if pairs[k].0 < pairs[k].1 { signs[k] } else { -signs[k] })
            .collect();
        let g = g.with_orientation(&sorted)?;
        write_out(out, Box::into_raw(Box::new(IplGraph(g))), "out")
    })
}

/// # Safety
/// `g` must be null or a handle from [`ipl_graph_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ipl_graph_free(g: *mut IplGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex and edge counts.
///
/// # Safety
/// `g` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_graph_size(g: *const IplGraph, n: *mut usize, m: *mut usize) -> IplStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        write_out(n, g.n(), "n")?;
        write_out(m, g.m(), "m")
    })
}

/// Endpoints `u < v` and orientation sign of sorted edge `k`.
///
/// # Safety
/// `g` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_graph_edge(
    g: *const IplGraph,
    k: usize,
    u: *mut usize,
    v: *mut usize,
    sign: *mut i8,
) -> IplStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let &(a, b) = g
            .edges()
            .get(k)
            .ok_or_else(|| Fail(IplStatus::Domain, format!("edge {k} out of range")))?;
        write_out(u, a, "u")?;
        write_out(v, b, "v")?;
        write_out(sign, g.orientation()[k], "sign")
    })
}

/// Inner product Laplacian of a graph; a null `mv` or `me` means identity.
///
/// # Safety
/// Handles must be live or null as described; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_graph_laplacian(
    g: *const IplGraph,
    mv: *const IplMatrix,
    me: *const IplMatrix,
    out: *mut *mut IplSpectrum,
) -> IplStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let (mv, me) = inner_products(g, mv, me);
        let s = graph_laplacian(g, &mv, &me)?;
        write_out(out, Box::into_raw(Box::new(IplSpectrum(s))), "out")
    })
}

unsafe fn inner_products(g: &Graph, mv: *const IplMatrix, me: *const IplMatrix) -> (SpdMatrix, SpdMatrix) {
    let mv = mv.as_ref().map_or_else(|| SpdMatrix::identity(g.n()), |m| m.0.clone());
    let me = me.as_ref().map_or_else(|| SpdMatrix::identity(g.m()), |m| m.0.clone());
    (mv, me)
}

/// # Safety
/// `s` must be null or a handle from [`ipl_graph_laplacian`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ipl_spectrum_free(s: *mut IplSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Matrix dimension.
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_spectrum_dim(s: *const IplSpectrum, out: *mut usize) -> IplStatus {
    guard(|| write_out(out, handle(s, "spectrum")?.0.eigenvalues.len(), "out"))
}

/// Copies the ascending eigenvalues into `buf` of capacity `len`.
///
/// # Safety
/// `s` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ipl_spectrum_eigenvalues(s: *const IplSpectrum, buf: *mut f64, len: usize) -> IplStatus {
    guard(|| copy_out(&handle(s, "spectrum")?.0.eigenvalues, buf, len))
}

/// Copies the Laplacian matrix (row-major) into `buf` of capacity `len`.
///
/// # Safety
/// `s` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ipl_spectrum_matrix(s: *const IplSpectrum, buf: *mut f64, len: usize) -> IplStatus {
    guard(|| {
        let m = &handle(s, "spectrum")?.0.matrix;
        copy_out(m.transpose().as_slice(), buf, len)
    })
}

/// Number of zero eigenvalues.
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_spectrum_zero_multiplicity(s: *const IplSpectrum, out: *mut usize) -> IplStatus {
    guard(|| write_out(out, handle(s, "spectrum")?.0.zero_multiplicity, "out"))
}

/// Strong conformality `(λmax − λmin)/(λmax + λmin)`.
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_strong_conformality(m: *const IplMatrix, out: *mut f64) -> IplStatus {
    guard(|| write_out(out, strong_conformality(&handle(m, "matrix")?.0)?, "out"))
}

/// Exact weak conformality by enumeration; `cap` bounds the dimension
/// unless `force` is nonzero; `threads` of 0 is treated as 1.
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_weak_conformality(
    m: *const IplMatrix,
    cap: usize,
    force: i32,
    threads: usize,
    out: *mut f64,
) -> IplStatus {
    guard(|| {
        let opts = WeakOptions {
            cap,
            force: force != 0,
            threads: threads.max(1),
        };
        let r = weak_conformality_with(&handle(m, "matrix")?.0, &opts)?;
        write_out(out, r.rho_weak, "out")
    })
}

/// Exact inner product conductance; null inner products mean identity.
///
/// # Safety
/// Handles must be live or null as described; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_conductance(
    g: *const IplGraph,
    mv: *const IplMatrix,
    me: *const IplMatrix,
    out: *mut f64,
) -> IplStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let (mv, me) = inner_products(g, mv, me);
        let c = conductance(g, &mv, &me, false, &Limits::default())?;
        write_out(out, c.phi, "out")
    })
}

/// Cheeger check. Writes `λ_2`, the two bounds and whether both hold.
///
/// # Safety
/// Handles must be live or null as described; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ipl_verify_cheeger(
    g: *const IplGraph,
    mv: *const IplMatrix,
    me: *const IplMatrix,
    lambda_2: *mut f64,
    lower: *mut f64,
    upper: *mut f64,
    pass: *mut i32,
) -> IplStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let (mv, me) = inner_products(g, mv, me);
        let r = verify_cheeger(g, &mv, &me, &Limits::default())?;
        write_out(lambda_2, r.lambda_2, "lambda_2")?;
        write_out(lower, r.lower_bound, "lower")?;
        write_out(upper, r.upper_bound, "upper")?;
        write_out(pass, r.pass as i32, "pass")
    })
}
