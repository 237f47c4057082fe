//! Inner product (Hodge) Laplacians and their classical special cases.
//!
//! For a chain complex with boundary maps `B_i` and inner product matrices
//! `M_i = Q_i²`, the Laplacian on i-chains is
//!
//! `ℒ_i = Q_i·B_iᵀ·M_{i−1}⁻¹·B_i·Q_i + Q_i⁻¹·B_{i+1}·M_{i+1}·B_{i+1}ᵀ·Q_i⁻¹`,
//!
//! with the first term absent for `i = 0` and the second absent at the top
//! dimension.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::{clique_expansion, Graph, Hypergraph, SimplicialComplex};
use crate::conformality::{weak_conformality_with, WeakOptions};
use crate::error::{Error, Result};
use crate::linalg::{jacobi, rows, sym_eig, SpdMatrix};
use crate::report::Verdict;

/// Relative threshold for counting an eigenvalue as zero.
pub const ZERO_TOL: f64 = 1e-9;
/// Slack for bound checks.
pub const CHECK_SLACK: f64 = 1e-9;

pub fn zero_threshold(lambda_max: f64) -> f64 {
    ZERO_TOL * lambda_max.max(1.0)
}

fn to_f64(b: &DMatrix<i32>) -> DMatrix<f64> {
    b.map(|x| x as f64)
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

fn max_abs(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        0.0
    } else {
        a.amax()
    }
}

/// A complex with one inner product per face dimension.
#[derive(Debug, Clone)]
pub struct IplSetup {
    complex: SimplicialComplex,
    inner: Vec<SpdMatrix>,
    /// Per-dimension orientation signs of the faces.
    signs: Vec<Vec<i8>>,
}

impl IplSetup {
    pub fn new(complex: SimplicialComplex, inner: Vec<SpdMatrix>) -> Result<Self> {
        if inner.len() != complex.dimension() + 1 {
            return Err(Error::Dimension(format!(
                "{} inner products for a complex of dimension {}",
                inner.len(),
                complex.dimension()
            )));
        }
        for (i, m) in inner.iter().enumerate() {
            if m.dim() != complex.num_faces(i) {
                return Err(Error::Dimension(format!(
                    "inner product for dimension {i} has size {}, complex has {} faces",
                    m.dim(),
                    complex.num_faces(i)
                )));
            }
        }
        let signs = (0..inner.len()).map(|i| vec![1; complex.num_faces(i)]).collect();
        Ok(Self { complex, inner, signs })
    }

    /// The 1-skeleton of `g` with vertex and edge inner products; the graph's
    /// orientation becomes the edge signs.
    pub fn for_graph(g: &Graph, mv: SpdMatrix, me: SpdMatrix) -> Result<Self> {
        if g.m() == 0 {
            return Err(Error::Domain("graph has no edges".into()));
        }
        let mut s = Self::new(SimplicialComplex::from_graph(g), vec![mv, me])?;
        s.signs[1] = g.orientation().to_vec();
        Ok(s)
    }

    /// Dual setup with every inner product inverted, whose boundary Laplacian
    /// is the coboundary-based one.
    pub fn inverted(&self) -> Result<Self> {
        Ok(Self {
            complex: self.complex.clone(),
            inner: self.inner.iter().map(SpdMatrix::inverse_spd).collect::<Result<_>>()?,
            signs: self.signs.clone(),
        })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn dimension(&self) -> usize {
        self.complex.dimension()
    }

    pub fn inner(&self, i: usize) -> &SpdMatrix {
        &self.inner[i]
    }

    /// Oriented boundary `diag(σ_{i−1})·B_i·diag(σ_i)` as floats.
    pub fn boundary(&self, i: usize) -> Result<DMatrix<f64>> {
        let mut b = to_f64(&self.complex.boundary_matrix(i)?);
        if i >= 1 {
            for (r, &s) in self.signs[i - 1].iter().enumerate() {
                if s < 0 {
                    b.row_mut(r).neg_mut();
                }
            }
        }
        for (c, &s) in self.signs[i].iter().enumerate() {
            if s < 0 {
                b.column_mut(c).neg_mut();
            }
        }
        Ok(b)
    }

    /// `ζ_i = Q_{i−1}⁻¹·B_i·Q_i`, the boundary map in orthonormal coordinates.
    pub fn zeta(&self, i: usize) -> Result<DMatrix<f64>> {
        if i == 0 || i > self.dimension() {
            return Err(Error::Domain(format!("no boundary map in dimension {i}")));
        }
        Ok(self.inner[i - 1].inv_sqrt_root() * self.boundary(i)? * self.inner[i].sqrt_root())
    }

    /// `Q_i·B_iᵀ·M_{i−1}⁻¹·B_i·Q_i`, or `None` for `i = 0`.
    pub fn down_term(&self, i: usize) -> Result<Option<DMatrix<f64>>> {
        if i == 0 {
            return Ok(None);
        }
        let b = self.boundary(i)?;
        let q = self.inner[i].sqrt_root();
        let solved = self.inner[i - 1].solve(&b)?;
        Ok(Some(symmetrize(q * b.transpose() * solved * q)))
    }

    /// `Q_i⁻¹·B_{i+1}·M_{i+1}·B_{i+1}ᵀ·Q_i⁻¹`, or `None` at the top dimension.
    pub fn up_term(&self, i: usize) -> Result<Option<DMatrix<f64>>> {
        if i >= self.dimension() {
            return Ok(None);
        }
        let b = self.boundary(i + 1)?;
        let qi = self.inner[i].inv_sqrt_root();
        Ok(Some(symmetrize(
            qi * &b * self.inner[i + 1].matrix() * b.transpose() * qi,
        )))
    }

    pub fn laplacian_matrix(&self, i: usize) -> Result<DMatrix<f64>> {
        if i > self.dimension() {
            return Err(Error::Domain(format!(
                "dimension {i} exceeds complex dimension {}",
                self.dimension()
            )));
        }
        let n = self.complex.num_faces(i);
        let mut l = DMatrix::zeros(n, n);
        if let Some(d) = self.down_term(i)? {
            l += d;
        }
        if let Some(u) = self.up_term(i)? {
            l += u;
        }
        Ok(l)
    }
}

/// A Laplacian with its full spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    #[serde(with = "rows")]
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column.
    #[serde(with = "rows")]
    pub eigenvectors: DMatrix<f64>,
    /// Columns `f` with `Q·f` equal to the matching eigenvector.
    #[serde(with = "rows")]
    pub harmonic_eigenvectors: DMatrix<f64>,
    pub zero_multiplicity: usize,
}

impl SpectrumResult {
    /// Diagonalizes `matrix`; `q_inv` maps eigenvectors to harmonic ones.
    pub fn compute(matrix: DMatrix<f64>, q_inv: &DMatrix<f64>) -> Result<Self> {
        let eig = sym_eig(&matrix)?;
        let lmax = if eig.dim() == 0 { 0.0 } else { eig.max() };
        let thr = zero_threshold(lmax);
        let zero_multiplicity = eig.values.iter().filter(|&&l| l <= thr).count();
        let harmonic = q_inv * &eig.vectors;
        Ok(Self {
            matrix,
            eigenvalues: eig.values.as_slice().to_vec(),
            eigenvectors: eig.vectors,
            harmonic_eigenvectors: harmonic,
            zero_multiplicity,
        })
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Smallest eigenvalue above the zero threshold, if any.
    pub fn lambda_2(&self) -> Option<f64> {
        self.eigenvalues.get(self.zero_multiplicity).copied()
    }
}

/// `ℒ_i` of the setup with its spectrum.
pub fn inner_product_laplacian(setup: &IplSetup, i: usize) -> Result<SpectrumResult> {
    let l = setup.laplacian_matrix(i)?;
    SpectrumResult::compute(l, setup.inner(i).inv_sqrt_root())
}

/// Dimension-0 IPL of a graph, `Q_V⁻¹·B·M_E·Bᵀ·Q_V⁻¹`.
pub fn graph_laplacian(g: &Graph, mv: &SpdMatrix, me: &SpdMatrix) -> Result<SpectrumResult> {
    semi_hodge(&to_f64(&g.incidence()), mv, me)
}

/// `Q_V⁻¹·B·M_E·Bᵀ·Q_V⁻¹` for any (signed or unsigned) incidence `B`.
pub fn semi_hodge(b: &DMatrix<f64>, mv: &SpdMatrix, me: &SpdMatrix) -> Result<SpectrumResult> {
    if b.nrows() != mv.dim() || b.ncols() != me.dim() {
        return Err(Error::Dimension(format!(
            "incidence is {}x{}, inner products have sizes {} and {}",
            b.nrows(),
            b.ncols(),
            mv.dim(),
            me.dim()
        )));
    }
    let qi = mv.inv_sqrt_root();
    let l = symmetrize(qi * b * me.matrix() * b.transpose() * qi);
    SpectrumResult::compute(l, qi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub omega: f64,
    pub perfect: bool,
    /// `d_v / w_v` per vertex.
    pub per_vertex: Vec<f64>,
}

/// `ω = max_v 𝟙_{E(v)}ᵀ·M_E·𝟙_{E(v)} / (M_V)_{vv}`, with `E(v)` the columns of
/// `b` that are nonzero in row `v`.
pub fn compatibility(b: &DMatrix<f64>, mv: &SpdMatrix, me: &SpdMatrix) -> Result<Compatibility> {
    if b.nrows() != mv.dim() || b.ncols() != me.dim() {
        return Err(Error::Dimension("incidence does not match inner products".into()));
    }
    let mut per_vertex = Vec::with_capacity(b.nrows());
    for v in 0..b.nrows() {
        let ind = DVector::from_fn(b.ncols(), |e, _| if b[(v, e)] != 0.0 { 1.0 } else { 0.0 });
        let d = me.inner(&ind, &ind);
        per_vertex.push(d / mv.matrix()[(v, v)]);
    }
    let omega = per_vertex.iter().copied().fold(0.0, f64::max);
    let perfect = per_vertex.iter().all(|&r| (r - omega).abs() <= 1e-9 * omega.abs());
    Ok(Compatibility {
        omega,
        perfect,
        per_vertex,
    })
}

pub fn graph_compatibility(g: &Graph, mv: &SpdMatrix, me: &SpdMatrix) -> Result<Compatibility> {
    compatibility(&to_f64(&g.incidence()), mv, me)
}

/// Weak conformality, taken as 0 for one-dimensional spaces.
pub fn weak_rho(m: &SpdMatrix, opts: &WeakOptions) -> Result<f64> {
    if m.dim() < 2 {
        return Ok(0.0);
    }
    Ok(weak_conformality_with(m, opts)?.rho_weak)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub lambda_max: f64,
    pub rho_v: f64,
    pub rho_e: f64,
    /// Largest number of vertices on an edge.
    pub r: usize,
    pub omega: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

impl Verdict for RadiusReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

/// Checks `λ_max ≤ ((1+ρ_V)/(1−ρ_V))·((1+ρ_E)/(1−ρ_E))²·r·ω` for the
/// semi-Hodge Laplacian of `b`.
pub fn verify_radius_bound(
    b: &DMatrix<f64>,
    mv: &SpdMatrix,
    me: &SpdMatrix,
    opts: &WeakOptions,
) -> Result<RadiusReport> {
    let spec = semi_hodge(b, mv, me)?;
    let rho_v = weak_rho(mv, opts)?;
    let rho_e = weak_rho(me, opts)?;
    let r = b
        .column_iter()
        .map(|c| c.iter().filter(|&&x| x != 0.0).count())
        .max()
        .unwrap_or(0);
    let omega = compatibility(b, mv, me)?.omega;
    let fe = (1.0 + rho_e) / (1.0 - rho_e);
    let bound = (1.0 + rho_v) / (1.0 - rho_v) * fe * fe * r as f64 * omega;
    let lambda_max = spec.lambda_max();
    Ok(RadiusReport {
        lambda_max,
        rho_v,
        rho_e,
        r,
        omega,
        bound,
        margin: bound - lambda_max,
        pass: lambda_max <= bound + CHECK_SLACK,
    })
}

/// Orthonormal basis of the column space of `a`, from the eigenvectors of
/// `a·aᵀ` above the zero threshold.
fn image_basis(aat: &DMatrix<f64>, thr: f64) -> Result<DMatrix<f64>> {
    let eig = jacobi(&symmetrize(aat.clone()))?;
    let cols: Vec<_> = (0..eig.dim())
        .filter(|&j| eig.values[j] > thr)
        .map(|j| eig.vectors.column(j).into_owned())
        .collect();
    Ok(if cols.is_empty() {
        DMatrix::zeros(aat.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeDecomposition {
    /// Basis of `Im(Q_i·B_iᵀ·Q_{i−1}⁻¹)`.
    #[serde(with = "rows")]
    pub basis_up: DMatrix<f64>,
    /// Basis of `Ker ℒ_i`.
    #[serde(with = "rows")]
    pub basis_harmonic: DMatrix<f64>,
    /// Basis of `Im(Q_i⁻¹·B_{i+1}·Q_{i+1})`.
    #[serde(with = "rows")]
    pub basis_down: DMatrix<f64>,
    /// `(dim up, dim harmonic, dim down)`.
    pub dims: [usize; 3],
    /// Largest absolute entry of the three cross Gram blocks.
    pub cross_gram: f64,
    /// Largest gap between the nonzero spectrum of `ℒ_i` and the union of the
    /// nonzero spectra of its two terms (infinite if the counts differ).
    pub spectrum_residual: f64,
}

/// Splits `ℝⁿ` into the images of the two Laplacian terms and the kernel.
pub fn hodge_decomposition(setup: &IplSetup, i: usize) -> Result<HodgeDecomposition> {
    let n = setup.complex().num_faces(i);
    let full = inner_product_laplacian(setup, i)?;
    let thr = zero_threshold(full.lambda_max());
    let down = setup.down_term(i)?.unwrap_or_else(|| DMatrix::zeros(n, n));
    let up = setup.up_term(i)?.unwrap_or_else(|| DMatrix::zeros(n, n));
    let basis_up = image_basis(&down, thr)?;
    let basis_down = image_basis(&up, thr)?;
    let kernel_cols: Vec<_> = (0..full.zero_multiplicity)
        .map(|j| full.eigenvectors.column(j).into_owned())
        .collect();
    let basis_harmonic = if kernel_cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&kernel_cols)
    };
    let cross_gram = [
        basis_up.transpose() * &basis_harmonic,
        basis_up.transpose() * &basis_down,
        basis_harmonic.transpose() * &basis_down,
    ]
    .iter()
    .map(max_abs)
    .fold(0.0, f64::max);

    let nonzero = |m: &DMatrix<f64>| -> Result<Vec<f64>> {
        Ok(sym_eig(m)?.values.iter().copied().filter(|&l| l > thr).collect())
    };
    let mut parts = nonzero(&down)?;
    parts.extend(nonzero(&up)?);
    parts.sort_by(f64::total_cmp);
    let whole: Vec<f64> = full.eigenvalues.iter().copied().filter(|&l| l > thr).collect();
    let spectrum_residual = if parts.len() == whole.len() {
        parts.iter().zip(&whole).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(HodgeDecomposition {
        dims: [basis_up.ncols(), basis_harmonic.ncols(), basis_down.ncols()],
        basis_up,
        basis_harmonic,
        basis_down,
        cross_gram,
        spectrum_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalKind {
    Combinatorial,
    Normalized,
    Signless,
    NormalizedSignless,
}

impl std::str::FromStr for ClassicalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combinatorial" => Ok(Self::Combinatorial),
            "normalized" => Ok(Self::Normalized),
            "signless" => Ok(Self::Signless),
            "normalized-signless" => Ok(Self::NormalizedSignless),
            _ => Err(Error::Domain(format!("unknown Laplacian kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub kind: ClassicalKind,
    pub mv: SpdMatrix,
    pub me: SpdMatrix,
    pub spectrum: SpectrumResult,
    /// The textbook matrix built from degrees and adjacency.
    #[serde(with = "rows")]
    pub textbook: DMatrix<f64>,
    pub max_entry_error: f64,
}

/// Weighted degrees `Σ_{e ∋ v} w_e`.
pub fn weighted_degrees(g: &Graph, weights: &[f64]) -> Vec<f64> {
    (0..g.n())
        .map(|v| g.incident_edges(v).iter().map(|&e| weights[e]).sum())
        .collect()
}

fn check_weights(g: &Graph, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let w = weights.map_or_else(|| vec![1.0; g.m()], <[f64]>::to_vec);
    if w.len() != g.m() {
        return Err(Error::Dimension(format!("{} weights for {} edges", w.len(), g.m())));
    }
    if let Some(x) = w.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("edge weight {x} is not positive")));
    }
    Ok(w)
}

/// Combinatorial, normalized, signless and normalized signless Laplacians as
/// inner product Laplacians with diagonal inner products.
pub fn recover_classical(kind: ClassicalKind, g: &Graph, weights: Option<&[f64]>) -> Result<Recovery> {
    let w = check_weights(g, weights)?;
    if g.m() == 0 {
        return Err(Error::Domain("graph has no edges".into()));
    }
    let deg = weighted_degrees(g, &w);
    let n = g.n();
    let mut adj = DMatrix::zeros(n, n);
    for (k, &(u, v)) in g.edges().iter().enumerate() {
        adj[(u, v)] = w[k];
        adj[(v, u)] = w[k];
    }
    let normalized = matches!(kind, ClassicalKind::Normalized | ClassicalKind::NormalizedSignless);
    if normalized && deg.contains(&0.0) {
        return Err(Error::Domain(
            "normalized Laplacians need every vertex to have an edge".into(),
        ));
    }
    let me = SpdMatrix::from_diagonal(&w)?;
    let mv = if normalized {
        SpdMatrix::from_diagonal(&deg)?
    } else {
        SpdMatrix::identity(n)
    };
    let signed = to_f64(&g.incidence());
    let spectrum = match kind {
        ClassicalKind::Combinatorial | ClassicalKind::Normalized => semi_hodge(&signed, &mv, &me)?,
        _ => semi_hodge(&signed.abs(), &mv, &me)?,
    };
    let dmat = DMatrix::from_diagonal(&DVector::from_vec(deg.clone()));
    let textbook = match kind {
        ClassicalKind::Combinatorial => &dmat - &adj,
        ClassicalKind::Signless => &dmat + &adj,
        ClassicalKind::Normalized | ClassicalKind::NormalizedSignless => {
            let s = if kind == ClassicalKind::Normalized { -1.0 } else { 1.0 };
            DMatrix::from_fn(n, n, |i, j| {
                let a = s * adj[(i, j)] / (deg[i] * deg[j]).sqrt();
                if i == j {
                    1.0 + a
                } else {
                    a
                }
            })
        }
    };
    let max_entry_error = max_abs(&(&spectrum.matrix - &textbook));
    Ok(Recovery {
        kind,
        mv,
        me,
        spectrum,
        textbook,
        max_entry_error,
    })
}

/// Graph summary for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> Self {
        Self {
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|&(u, v)| [g.vertices()[u].clone(), g.vertices()[v].clone()])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergraphIplReport {
    /// `‖L·π‖` before reconstruction.
    pub kernel_residual: f64,
    /// Largest entry of `Π·L·Π − H̃·diag(w̃)·H̃ᵀ`.
    pub factorization_residual: f64,
    /// Largest entry of the IPL with `M_V = Π²`, `M_E = diag(w̃)` minus `L`.
    pub ipl_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict for HypergraphIplReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergraphIpl {
    pub graph: GraphSummary,
    /// Pair weights `w̃` in sorted edge order.
    pub pair_weights: Vec<f64>,
    pub mv: SpdMatrix,
    pub me: SpdMatrix,
    #[serde(with = "rows")]
    pub laplacian: DMatrix<f64>,
    #[serde(with = "rows")]
    pub conjugated: DMatrix<f64>,
    pub report: HypergraphIplReport,
    #[serde(skip)]
    pub clique_graph: Option<Graph>,
}

fn check_positive(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension(format!("{name} has length {}, expected {n}", v.len())));
    }
    if let Some(x) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("{name} entry {x} is not positive")));
    }
    Ok(())
}

/// `D̃·H·W·Hᵀ·D̃`.
fn hyper_adjacency(hg: &Hypergraph, dt: &[f64], w: &[f64]) -> DMatrix<f64> {
    let h = to_f64(&hg.incidence());
    let dtm = DMatrix::from_diagonal(&DVector::from_column_slice(dt));
    let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    &dtm * &h * wm * h.transpose() * &dtm
}

/// The diagonal `D` making `π` a kernel vector: `D_u = (D̃HWHᵀD̃π)_u / π_u`.
pub fn kernel_consistent_degrees(hg: &Hypergraph, dt: &[f64], w: &[f64], pi: &[f64]) -> Result<Vec<f64>> {
    check_positive("D~", dt, hg.n())?;
    check_positive("W", w, hg.m())?;
    check_positive("pi", pi, hg.n())?;
    let a = hyper_adjacency(hg, dt, w);
    let api = &a * DVector::from_column_slice(pi);
    Ok((0..hg.n()).map(|u| api[u] / pi[u]).collect())
}

/// Expresses `L = D − D̃·H·W·Hᵀ·D̃` (with `L·π = 0`) as the inner product
/// Laplacian of the clique expansion with `M_V = Π²` and
/// `M_E = diag(π_u·π_v·d̃_u·d̃_v·Σ_{e ∋ u,v} w_e)`.
pub fn hypergraph_to_ipl(hg: &Hypergraph, d: &[f64], dt: &[f64], w: &[f64], pi: &[f64]) -> Result<HypergraphIpl> {
    let n = hg.n();
    check_positive("D", d, n)?;
    check_positive("D~", dt, n)?;
    check_positive("W", w, hg.m())?;
    check_positive("pi", pi, n)?;
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(d));
    let l = symmetrize(dm - hyper_adjacency(hg, dt, w));
    let piv = DVector::from_column_slice(pi);
    let kernel_residual = (&l * &piv).norm();
    let tol = 1e-9;
    let scale = 1.0 + l.norm() * piv.norm();
    if kernel_residual > tol * scale {
        return Err(Error::Precondition(format!(
            "pi is not in the kernel of L (residual norm {kernel_residual:e})"
        )));
    }
    let (g, sums) = clique_expansion(hg, w)?;
    let pair_weights: Vec<f64> = g
        .edges()
        .iter()
        .zip(&sums)
        .map(|(&(u, v), s)| pi[u] * pi[v] * dt[u] * dt[v] * s)
        .collect();
    ipl_from_pairs(g, pair_weights, l, pi, kernel_residual, tol * scale)
}

fn ipl_from_pairs(
    g: Graph,
    pair_weights: Vec<f64>,
    l: DMatrix<f64>,
    pi: &[f64],
    kernel_residual: f64,
    tol: f64,
) -> Result<HypergraphIpl> {
    let pim = DMatrix::from_diagonal(&DVector::from_column_slice(pi));
    let conjugated = &pim * &l * &pim;
    let b = to_f64(&g.incidence());
    let me_diag = DMatrix::from_diagonal(&DVector::from_column_slice(&pair_weights));
    let factorization_residual = max_abs(&(&conjugated - &b * &me_diag * b.transpose()));
    let mv = SpdMatrix::from_diagonal(&pi.iter().map(|p| p * p).collect::<Vec<_>>())?;
    let me = if pair_weights.is_empty() {
        return Err(Error::Domain("clique expansion has no edges".into()));
    } else {
        SpdMatrix::from_diagonal(&pair_weights)?
    };
    let ipl = graph_laplacian(&g, &mv, &me)?;
    let ipl_residual = max_abs(&(&ipl.matrix - &l));
    Ok(HypergraphIpl {
        graph: GraphSummary::of(&g),
        pair_weights,
        mv,
        me,
        laplacian: l,
        conjugated,
        report: HypergraphIplReport {
            kernel_residual,
            factorization_residual,
            ipl_residual,
            tolerance: tol,
            pass: factorization_residual <= tol && ipl_residual <= tol,
        },
        clique_graph: Some(g),
    })
}

/// Largest number of power iterations for the stationary distribution.
pub const STATIONARY_MAX_ITER: usize = 100_000;
pub const STATIONARY_TOL: f64 = 1e-12;

fn check_stochastic(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() || p.nrows() == 0 {
        return Err(Error::Dimension(
            "transition matrix must be square and non-empty".into(),
        ));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain("transition probabilities must be non-negative".into()));
    }
    for (i, r) in p.row_iter().enumerate() {
        let s: f64 = r.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("row {i} sums to {s}, not 1")));
        }
    }
    Ok(())
}

fn strongly_connected(p: &DMatrix<f64>) -> bool {
    let n = p.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let w = if forward { p[(u, v)] } else { p[(v, u)] };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Stationary distribution of an irreducible chain by power iteration on the
/// lazy chain `(I + P)/2`, which shares it and converges for periodic chains.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_stochastic(p)?;
    if !strongly_connected(p) {
        return Err(Error::Domain(
            "chain is not irreducible (no unique stationary distribution)".into(),
        ));
    }
    let n = p.nrows();
    let pt = p.transpose();
    let mut pi = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..STATIONARY_MAX_ITER {
        let mut next = (&pi + &pt * &pi) * 0.5;
        next /= next.sum();
        let delta = (&next - &pi).abs().sum();
        pi = next;
        if delta <= STATIONARY_TOL {
            return Ok(pi);
        }
    }
    Err(Error::Numerical(format!(
        "stationary distribution did not converge in {STATIONARY_MAX_ITER} iterations"
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigraphReport {
    /// `max |πᵀP − πᵀ|`.
    pub stationarity_residual: f64,
    /// IPL with `M_V = I` against `L`.
    pub ipl_residual: f64,
    /// IPL with `M_V = Π` against the normalized Laplacian.
    pub normalized_ipl_residual: f64,
    pub min_eigenvalue: f64,
    pub normalized_min_eigenvalue: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict for DigraphReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigraphLaplacian {
    pub pi: Vec<f64>,
    #[serde(with = "rows")]
    pub laplacian: DMatrix<f64>,
    #[serde(with = "rows")]
    pub normalized_laplacian: DMatrix<f64>,
    pub support_graph: GraphSummary,
    /// `(π_u·P_uv + π_v·P_vu)/2` in sorted edge order.
    pub edge_weights: Vec<f64>,
    pub report: DigraphReport,
}

/// `L = Π − (Π·P + Pᵀ·Π)/2` and `ℒ = Π^{-1/2}·L·Π^{-1/2}` for an ergodic chain,
/// re-expressed as IPLs on the undirected support graph.
/// States are labeled `labels`, or `v1..vn` when `None`.
pub fn digraph_laplacian(p: &DMatrix<f64>, labels: Option<&[String]>) -> Result<DigraphLaplacian> {
    let pi = stationary_distribution(p)?;
    let n = p.nrows();
    let pim = DMatrix::from_diagonal(&pi);
    let l = symmetrize(&pim - (&pim * p + p.transpose() * &pim) * 0.5);
    let rs = DMatrix::from_diagonal(&pi.map(|x| x.sqrt()));
    let rsi = DMatrix::from_diagonal(&pi.map(|x| 1.0 / x.sqrt()));
    let normalized = symmetrize(DMatrix::identity(n, n) - (&rs * p * &rsi + &rsi * p.transpose() * &rs) * 0.5);
    let stationarity_residual = (p.transpose() * &pi - &pi).amax();

    let mut edges = Vec::new();
    let mut raw = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if p[(u, v)] > 0.0 || p[(v, u)] > 0.0 {
                edges.push((u, v));
                raw.push((pi[u] * p[(u, v)] + pi[v] * p[(v, u)]) / 2.0);
            }
        }
    }
    let labels: Vec<String> = match labels {
        Some(l) if l.len() == n => l.to_vec(),
        Some(l) => {
            return Err(Error::Dimension(format!("{} labels for {n} states", l.len())));
        }
        None => (1..=n).map(|i| format!("v{i}")).collect(),
    };
    let (g, _) = Graph::build(labels, &edges)?;
    if g.m() == 0 {
        return Err(Error::Domain("chain has no transitions between distinct states".into()));
    }
    let me = SpdMatrix::from_diagonal(&raw)?;
    let ipl = graph_laplacian(&g, &SpdMatrix::identity(n), &me)?;
    let nipl = graph_laplacian(&g, &SpdMatrix::from_diagonal(pi.as_slice())?, &me)?;
    let ipl_residual = max_abs(&(&ipl.matrix - &l));
    let normalized_ipl_residual = max_abs(&(&nipl.matrix - &normalized));
    let min_eigenvalue = sym_eig(&l)?.min();
    let normalized_min_eigenvalue = sym_eig(&normalized)?.min();
    let tol = 1e-9;
    let pass = stationarity_residual <= 1e-10
        && ipl_residual <= tol
        && normalized_ipl_residual <= tol
        && min_eigenvalue >= -tol
        && normalized_min_eigenvalue >= -tol;
    Ok(DigraphLaplacian {
        pi: pi.as_slice().to_vec(),
        laplacian: l,
        normalized_laplacian: normalized,
        support_graph: GraphSummary::of(&g),
        edge_weights: raw,
        report: DigraphReport {
            stationarity_residual,
            ipl_residual,
            normalized_ipl_residual,
            min_eigenvalue,
            normalized_min_eigenvalue,
            tolerance: tol,
            pass,
        },
    })
}

/// Transition matrix of the random walk with edge-dependent vertex weights:
/// `P_uv = Σ_{e ∋ u} (w_e / d(u))·(γ_e(v) / δ(e))`, with `d(u) = Σ_{e ∋ u} w_e`
/// and `δ(e) = Σ_{v ∈ e} γ_e(v)`. `gamma[e]` lists weights in hyperedge order.
pub fn edvw_transition(hg: &Hypergraph, w: &[f64], gamma: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    check_positive("W", w, hg.m())?;
    if gamma.len() != hg.m() {
        return Err(Error::Dimension("one vertex-weight list per hyperedge required".into()));
    }
    let n = hg.n();
    let mut d = vec![0.0; n];
    for (e, he) in hg.hyperedges().iter().enumerate() {
        check_positive("gamma", &gamma[e], he.len())?;
        for &u in he {
            d[u] += w[e];
        }
    }
    if let Some(u) = d.iter().position(|&x| x == 0.0) {
        return Err(Error::Domain(format!(
            "vertex {} lies in no hyperedge",
            hg.vertices()[u]
        )));
    }
    let mut p = DMatrix::zeros(n, n);
    for (e, he) in hg.hyperedges().iter().enumerate() {
        let delta: f64 = gamma[e].iter().sum();
        for &u in he {
            for (k, &v) in he.iter().enumerate() {
                p[(u, v)] += w[e] / d[u] * gamma[e][k] / delta;
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity_plus_ones;
    use approx::assert_relative_eq;

    fn assert_mat(a: &DMatrix<f64>, rows: &[&[f64]], tol: f64) {
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                assert!((a[(i, j)] - x).abs() <= tol, "entry ({i},{j}) = {} vs {x}", a[(i, j)]);
            }
        }
    }

    fn p3_setup(signs: &[i8]) -> IplSetup {
        let g = Graph::path(3).with_orientation(signs).unwrap();
        let me = SpdMatrix::new(identity_plus_ones(2, 1.0)).unwrap();
        IplSetup::for_graph(&g, SpdMatrix::identity(3), me).unwrap()
    }

    #[test]
    fn p3_orientation_example() {
        let s = inner_product_laplacian(&p3_setup(&[1, 1]), 0).unwrap();
        assert_mat(
            &s.matrix,
            &[&[2.0, -1.0, -1.0], &[-1.0, 2.0, -1.0], &[-1.0, -1.0, 2.0]],
            1e-12,
        );
        assert_relative_eq!(s.eigenvalues[0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(s.eigenvalues[2], 3.0, epsilon = 1e-9);
        let s = inner_product_laplacian(&p3_setup(&[1, -1]), 0).unwrap();
        assert_mat(
            &s.matrix,
            &[&[2.0, -3.0, 1.0], &[-3.0, 6.0, -3.0], &[1.0, -3.0, 2.0]],
            1e-12,
        );
        assert_relative_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.eigenvalues[2], 9.0, epsilon = 1e-9);
    }

    #[test]
    fn identity_inner_products_give_combinatorial() {
        let g = Graph::petersen();
        let s = graph_laplacian(&g, &SpdMatrix::identity(10), &SpdMatrix::identity(15)).unwrap();
        let expect = DMatrix::from_diagonal_element(10, 10, 3.0) - g.adjacency_matrix();
        assert_eq!(s.matrix, expect);
        assert_eq!(s.zero_multiplicity, 1);
    }

    #[test]
    fn semi_hodge_signless() {
        let g = Graph::path(3);
        let h = to_f64(&g.unsigned_incidence());
        let s = semi_hodge(&h, &SpdMatrix::identity(3), &SpdMatrix::identity(2)).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(g.degrees()));
        assert_eq!(s.matrix, &d + g.adjacency_matrix());
        let dv = SpdMatrix::from_diagonal(&g.degrees()).unwrap();
        let s = semi_hodge(&h, &dv, &SpdMatrix::identity(2)).unwrap();
        assert_relative_eq!(s.matrix[(0, 1)], 1.0 / 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(s.matrix[(1, 1)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn compatibility_examples() {
        let g = Graph::path(4);
        let c = graph_compatibility(
            &g,
            &SpdMatrix::from_diagonal(&g.degrees()).unwrap(),
            &SpdMatrix::identity(3),
        )
        .unwrap();
        assert_eq!(c.omega, 1.0);
        assert!(c.perfect);
        let c = graph_compatibility(&g, &SpdMatrix::identity(4), &SpdMatrix::identity(3)).unwrap();
        assert_eq!(c.omega, 2.0);
        assert!(!c.perfect);
    }

    #[test]
    fn radius_examples() {
        let g = Graph::complete(3);
        let b = to_f64(&g.incidence());
        let r = verify_radius_bound(
            &b,
            &SpdMatrix::identity(3),
            &SpdMatrix::identity(3),
            &WeakOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.lambda_max, 3.0, epsilon = 1e-12);
        assert_eq!(r.bound, 4.0);
        assert!(r.pass);

        // ω for P3 with M_E = I + J is 6 at the middle vertex.
        let g = Graph::path(3);
        let me = SpdMatrix::new(identity_plus_ones(2, 1.0)).unwrap();
        let r = verify_radius_bound(
            &to_f64(&g.incidence()),
            &SpdMatrix::identity(3),
            &me,
            &WeakOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.rho_e, 0.5, epsilon = 1e-12);
        assert_eq!(r.r, 2);
        assert_relative_eq!(r.omega, 6.0);
        assert_relative_eq!(r.bound, 108.0, epsilon = 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn hodge_examples() {
        let k = SimplicialComplex::build(&[vec!["a".into(), "b".into(), "c".into()]]).unwrap();
        let setup = IplSetup::new(
            k,
            vec![SpdMatrix::identity(3), SpdMatrix::identity(3), SpdMatrix::identity(1)],
        )
        .unwrap();
        let h = hodge_decomposition(&setup, 1).unwrap();
        assert_eq!(h.dims, [2, 0, 1]);
        assert!(h.cross_gram < 1e-9);
        assert!(h.spectrum_residual < 1e-8);

        let h = hodge_decomposition(&p3_setup(&[1, 1]), 0).unwrap();
        assert_eq!(h.dims, [0, 1, 2]);

        let (g, _) = Graph::build(vec!["a".into(), "b".into(), "c".into(), "d".into()], &[(0, 1), (2, 3)]).unwrap();
        let s = IplSetup::for_graph(&g, SpdMatrix::identity(4), SpdMatrix::identity(2)).unwrap();
        assert_eq!(hodge_decomposition(&s, 0).unwrap().dims[1], 2);
    }

    #[test]
    fn recovery_examples() {
        let r = recover_classical(ClassicalKind::Combinatorial, &Graph::complete(3), None).unwrap();
        assert_mat(
            &r.spectrum.matrix,
            &[&[2.0, -1.0, -1.0], &[-1.0, 2.0, -1.0], &[-1.0, -1.0, 2.0]],
            1e-12,
        );
        let r = recover_classical(ClassicalKind::Normalized, &Graph::complete(2), None).unwrap();
        assert_mat(&r.spectrum.matrix, &[&[1.0, -1.0], &[-1.0, 1.0]], 1e-12);
        assert_relative_eq!(r.spectrum.eigenvalues[1], 2.0, epsilon = 1e-12);
        let r = recover_classical(ClassicalKind::Normalized, &Graph::path(3), None).unwrap();
        for (got, want) in r.spectrum.eigenvalues.iter().zip([0.0, 1.0, 2.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        for kind in [ClassicalKind::Signless, ClassicalKind::NormalizedSignless] {
            let r = recover_classical(kind, &Graph::cycle(4), Some(&[1.0, 2.0, 0.5, 3.0])).unwrap();
            assert!(r.max_entry_error <= 1e-12);
        }
        assert!(recover_classical(ClassicalKind::Combinatorial, &Graph::path(3), Some(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn hypergraph_single_edge() {
        let (hg, _) = Hypergraph::build(vec!["1".into(), "2".into(), "3".into()], &[vec![0, 1, 2]]).unwrap();
        let r = hypergraph_to_ipl(&hg, &[3.0; 3], &[1.0; 3], &[1.0], &[1.0; 3]).unwrap();
        assert!(r.report.pass);
        assert_eq!(r.pair_weights, vec![1.0; 3]);
        let k3 = DMatrix::from_diagonal_element(3, 3, 3.0) - DMatrix::from_element(3, 3, 1.0);
        assert!(max_abs(&(&r.laplacian - &k3)) <= 1e-9);
        assert!(hypergraph_to_ipl(&hg, &[2.0; 3], &[1.0; 3], &[1.0], &[1.0; 3]).is_err());
    }

    #[test]
    fn hypergraph_two_edges() {
        let (hg, perm) =
            Hypergraph::build(vec!["1".into(), "2".into(), "3".into()], &[vec![0, 1], vec![0, 1, 2]]).unwrap();
        let raw = [1.0, 2.0];
        let w: Vec<f64> = perm.iter().map(|&k| raw[k]).collect();
        let d = kernel_consistent_degrees(&hg, &[1.0; 3], &w, &[1.0; 3]).unwrap();
        let r = hypergraph_to_ipl(&hg, &d, &[1.0; 3], &w, &[1.0; 3]).unwrap();
        assert_eq!(r.pair_weights, vec![3.0, 2.0, 2.0]);
        assert!(r.report.pass);

        let pi = [0.5, 1.0, 2.0];
        let dt = [1.5, 0.7, 1.1];
        let d = kernel_consistent_degrees(&hg, &dt, &w, &pi).unwrap();
        let r = hypergraph_to_ipl(&hg, &d, &dt, &w, &pi).unwrap();
        assert!(r.report.pass, "{:?}", r.report);
    }

    #[test]
    fn digraph_examples() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = digraph_laplacian(&p, None).unwrap();
        assert_relative_eq!(r.pi[0], 0.5, epsilon = 1e-12);
        assert_mat(&r.laplacian, &[&[0.5, -0.5], &[-0.5, 0.5]], 1e-12);
        assert!(r.report.pass);

        let p = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 0.5 });
        let r = digraph_laplacian(&p, None).unwrap();
        let pim = DMatrix::from_diagonal(&DVector::from_vec(r.pi.clone()));
        let want = &pim - (&pim * &p + p.transpose() * &pim) * 0.5;
        assert!(max_abs(&(&r.laplacian - want)) <= 1e-12);
        assert!(r.report.pass);

        let reducible = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        assert!(digraph_laplacian(&reducible, None).is_err());
        assert!(digraph_laplacian(&DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 1.0, 0.0]), None).is_err());
    }

    #[test]
    fn edvw_support_is_clique_expansion() {
        let (hg, _) = Hypergraph::build(vec!["1".into(), "2".into(), "3".into()], &[vec![0, 1], vec![1, 2]]).unwrap();
        let p = edvw_transition(&hg, &[1.0, 2.0], &[vec![1.0, 3.0], vec![2.0, 1.0]]).unwrap();
        let r = digraph_laplacian(&p, Some(hg.vertices())).unwrap();
        let (g, _) = clique_expansion(&hg, &[1.0, 2.0]).unwrap();
        assert_eq!(r.support_graph, GraphSummary::of(&g));
        assert!(r.report.pass);
    }
}
