//! Dense symmetric linear algebra kernel.
//!
//! Everything downstream (conformality, Laplacian construction, the
//! isoperimetric checks) runs on small dense matrices, so the kernel is a
//! cyclic Jacobi eigensolver plus a symmetric positive definite wrapper that
//! caches its eigendecomposition and symmetric square root.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// `λ_min > dim · PD_TOL · λ_max` is required of every inner product matrix.
pub const PD_TOL: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Largest absolute asymmetry `|a_ij − a_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Validates squareness and symmetry, returning the symmetrized `(A + Aᵀ)/2`.
pub fn symmetrize_checked(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let scale = a.amax();
    let asym = asymmetry(a);
    if asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Asymmetric { asymmetry: asym });
    }
    Ok((a + a.transpose()) * 0.5)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues are ascending. Each eigenvector is signed so that its
/// largest-magnitude component is positive (first such index on ties).
pub fn sym_eig(a: &DMatrix<f64>) -> Result<SymEig> {
    let a = symmetrize_checked(a)?;
    jacobi(&a)
}

pub(crate) fn jacobi(a: &DMatrix<f64>) -> Result<SymEig> {
    let n = a.nrows();
    if n == 0 {
        return Ok(SymEig {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    // Row-major working copies.
    let mut w: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro = a.norm();
    let mut converged = fro == 0.0;
    let mut sweeps = 0;
    while !converged {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += w[p * n + q] * w[p * n + q];
                }
            }
        }
        if off.sqrt() <= JACOBI_TOL * fro {
            converged = true;
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = w[r * n + p];
                    let arq = w[r * n + q];
                    let np = c * arp - s * arq;
                    let nq = s * arp + c * arq;
                    w[r * n + p] = np;
                    w[p * n + r] = np;
                    w[r * n + q] = nq;
                    w[q * n + r] = nq;
                }
                w[p * n + p] = app - t * apq;
                w[q * n + q] = aqq + t * apq;
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[i * n + i].total_cmp(&w[j * n + j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| w[i * n + i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[r * n + src];
        }
    }
    canonical_signs(&mut vectors);
    Ok(SymEig { values, vectors })
}

/// Flips each column so its largest-magnitude entry (lowest index on ties)
/// is positive.
pub fn canonical_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm_sym(a: &DMatrix<f64>) -> Result<f64> {
    let eig = sym_eig(a)?;
    if eig.dim() == 0 {
        return Ok(0.0);
    }
    Ok(eig.min().abs().max(eig.max().abs()))
}

/// `V · diag(f(λ)) · Vᵀ`, symmetrized.
fn spectral_function(eig: &SymEig, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = eig.dim();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let s = f(eig.values[j]);
        scaled.column_mut(j).scale_mut(s);
    }
    let m = &scaled * eig.vectors.transpose();
    (&m + m.transpose()) * 0.5
}

/// A symmetric positive definite matrix representing an inner product in
/// a fixed basis, with its eigendecomposition and symmetric root cached.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    eig: SymEig,
    root: DMatrix<f64>,
    inv_root: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl SpdMatrix {
    /// Validates and wraps `m`. The input is symmetrized; construction fails
    /// if `λ_min ≤ dim · 1e-12 · λ_max`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let m = symmetrize_checked(&m)?;
        let n = m.nrows();
        if n == 0 {
            return Err(Error::Dimension("inner product matrix must be non-empty".into()));
        }
        let eig = jacobi(&m)?;
        if !(eig.min() > n as f64 * PD_TOL * eig.max()) {
            return Err(Error::NotPositiveDefinite {
                min: eig.min(),
                max: eig.max(),
            });
        }
        Self::from_parts(m, eig)
    }

    fn from_parts(matrix: DMatrix<f64>, eig: SymEig) -> Result<Self> {
        let root = spectral_function(&eig, f64::sqrt);
        let inv_root = spectral_function(&eig, |l| 1.0 / l.sqrt());
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::Numerical("Cholesky factorization failed on a positive definite matrix".into()))?;
        let out = Self {
            matrix,
            eig,
            root,
            inv_root,
            chol,
        };
        let recon = (&out.root * &out.root - &out.matrix).norm() / out.matrix.norm();
        if recon > 1e-10 {
            return Err(Error::Numerical(format!("square root reconstruction error {recon:e}")));
        }
        Ok(out)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n]).expect("identity is positive definite")
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eig(&self) -> &SymEig {
        &self.eig
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eig.values
    }

    /// Symmetric `Q` with `Q·Q = M`.
    pub fn sqrt_root(&self) -> &DMatrix<f64> {
        &self.root
    }

    pub fn inv_sqrt_root(&self) -> &DMatrix<f64> {
        &self.inv_root
    }

    /// Condition number `λ_max / λ_min`.
    pub fn condition(&self) -> f64 {
        self.eig.max() / self.eig.min()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == 0.0))
    }

    /// Explicit inverse. Prefer [`SpdMatrix::solve`] unless the inverse
    /// itself is the object of interest.
    pub fn inverse(&self) -> DMatrix<f64> {
        spectral_function(&self.eig, |l| 1.0 / l)
    }

    /// The inverse as an inner product matrix in its own right.
    pub fn inverse_spd(&self) -> Result<SpdMatrix> {
        let n = self.dim();
        let values = DVector::from_iterator(n, (0..n).rev().map(|i| 1.0 / self.eig.values[i]));
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, src) in (0..n).rev().enumerate() {
            vectors.set_column(dst, &self.eig.vectors.column(src));
        }
        Self::from_parts(self.inverse(), SymEig { values, vectors })
    }

    /// Solves `M·X = B` through the cached Cholesky factor.
    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if b.nrows() != self.dim() {
            return Err(Error::Dimension(format!(
                "right-hand side has {} rows, matrix has dimension {}",
                b.nrows(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(b))
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, matrix has dimension {}",
                b.len(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(b))
    }

    /// `xᵀ M y`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.matrix * y)[(0, 0)]
    }

    /// Principal submatrix on `idx` (already positive definite).
    pub fn principal(&self, idx: &[usize]) -> DMatrix<f64> {
        submatrix(&self.matrix, idx, idx)
    }
}

impl Serialize for SpdMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rows::serialize(&self.matrix, s)
    }
}

impl<'de> Deserialize<'de> for SpdMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = rows::deserialize(d)?;
        SpdMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Symmetric square root of an inner product matrix, itself positive definite.
pub fn spd_sqrt(m: &SpdMatrix) -> SpdMatrix {
    let values = m.eig.values.map(f64::sqrt);
    let eig = SymEig {
        values,
        vectors: m.eig.vectors.clone(),
    };
    let root = m.root.clone();
    SpdMatrix::from_parts(root, eig).expect("square root of a valid SPD matrix is valid")
}

/// Solves `M·x = b`.
pub fn spd_solve(m: &SpdMatrix, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.solve(b)
}

/// Generalized symmetric-definite eigenproblem `A·v = λ·B·v`.
///
/// `A` must be symmetric positive semidefinite. Eigenvalues ascend and the
/// eigenvectors are `B`-orthonormal. Computed as the ordinary problem for
/// `B^{-1/2}·A·B^{-1/2}`.
pub fn gen_eig(a: &DMatrix<f64>, b: &SpdMatrix) -> Result<SymEig> {
    let a = symmetrize_checked(a)?;
    if a.nrows() != b.dim() {
        return Err(Error::Dimension(format!(
            "pencil dimensions differ: {} vs {}",
            a.nrows(),
            b.dim()
        )));
    }
    let c = b.inv_sqrt_root() * &a * b.inv_sqrt_root();
    let c = (&c + c.transpose()) * 0.5;
    let eig = jacobi(&c)?;
    let tol = 1e-9 * eig.max().abs().max(1.0);
    if eig.dim() > 0 && eig.min() < -tol {
        return Err(Error::Domain(format!(
            "left-hand matrix is not positive semidefinite (eigenvalue {:e})",
            eig.min()
        )));
    }
    let mut vectors = b.inv_sqrt_root() * eig.vectors;
    canonical_signs(&mut vectors);
    Ok(SymEig {
        values: eig.values,
        vectors,
    })
}

pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `I + c·J`.
pub fn identity_plus_ones(n: usize, c: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + c } else { c })
}

/// Serde adapter writing a dense matrix as `{"rows": [[…], …]}`.
pub mod rows {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Rows {
        rows: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        Rows {
            rows: matrix_to_rows(m),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<f64>, D::Error> {
        let r = Rows::deserialize(d)?;
        matrix_from_rows(&r.rows).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for an optional dense matrix.
pub mod opt_rows {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::rows")] DMatrix<f64>);

    pub fn serialize<S: Serializer>(m: &Option<DMatrix<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(|m| Wrap(m.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<DMatrix<f64>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
