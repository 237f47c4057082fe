//! Cuts, conductance, and the spectral inequalities relating them to the
//! inner product Laplacian; Dirichlet and Neumann subgraph eigenvalues.
//!
//! Volumes are measured in the vertex inner product, `Vol(X, Y) = 𝟙_Xᵀ·M_V·𝟙_Y`,
//! and edge sets in the edge inner product, `e(X, Y) = 𝟙_{E(X,Y)}ᵀ·M_E·𝟙_{E(X,Y)}`
//! with `E(X, Y)` taken as a set.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::Graph;
use crate::conformality::WeakOptions;
use crate::error::{Error, Result};
use crate::laplacian::{graph_compatibility, graph_laplacian, weak_rho, zero_threshold, CHECK_SLACK};
use crate::linalg::{canonical_signs, jacobi, sym_eig, SpdMatrix};
use crate::report::Verdict;

pub const DEFAULT_CUT_CAP: usize = 24;
pub const DEFAULT_LOCAL_CAP: usize = 20;
pub const DEFAULT_BATCH_CAP: usize = 10;

/// Enumeration limits shared by the exhaustive routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub weak_cap: usize,
    pub cut_cap: usize,
    pub local_cap: usize,
    pub batch_cap: usize,
    pub force: bool,
    pub threads: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            weak_cap: crate::conformality::DEFAULT_WEAK_CAP,
            cut_cap: DEFAULT_CUT_CAP,
            local_cap: DEFAULT_LOCAL_CAP,
            batch_cap: DEFAULT_BATCH_CAP,
            force: false,
            threads: 1,
        }
    }
}

impl Limits {
    pub fn weak(&self) -> WeakOptions {
        WeakOptions {
            cap: self.weak_cap,
            force: self.force,
            threads: self.threads,
        }
    }

    fn check(&self, what: &'static str, size: usize, cap: usize) -> Result<()> {
        if size > cap && !self.force {
            return Err(Error::CapExceeded { what, size, cap });
        }
        Ok(())
    }
}

fn check_dims(g: &Graph, mv: &SpdMatrix, me: &SpdMatrix) -> Result<()> {
    if mv.dim() != g.n() || me.dim() != g.m() {
        return Err(Error::Dimension(format!(
            "graph has {} vertices and {} edges, inner products have sizes {} and {}",
            g.n(),
            g.m(),
            mv.dim(),
            me.dim()
        )));
    }
    Ok(())
}

fn indicator(n: usize, set: &[usize]) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    for &i in set {
        v[i] = 1.0;
    }
    v
}

fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !set.contains(i)).collect()
}

/// `Σ_{i,j ∈ sel} M_ij`.
fn mass(m: &DMatrix<f64>, sel: &[usize]) -> f64 {
    let mut s = 0.0;
    for &i in sel {
        for &j in sel {
            s += m[(i, j)];
        }
    }
    s
}

/// Edges with one endpoint in `x` and the other in `y`, as a set.
fn edges_between(g: &Graph, inx: &[bool], iny: &[bool]) -> Vec<usize> {
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| (inx[u] && iny[v]) || (inx[v] && iny[u]))
        .map(|(k, _)| k)
        .collect()
}

fn membership(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in set {
        m[i] = true;
    }
    m
}

fn labels(g: &Graph, set: &[usize]) -> Vec<String> {
    set.iter().map(|&i| g.vertices()[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutStats {
    pub vol_x: f64,
    pub vol_y: f64,
    pub vol_xy: f64,
    pub vol_x_ybar: f64,
    pub vol_xbar_y: f64,
    pub vol_xbar_ybar: f64,
    pub vol_g: f64,
    pub cor_xy: f64,
    pub cor_x: f64,
    pub cor_y: f64,
    pub e_xy: f64,
    pub e_x: f64,
    pub e_y: f64,
    /// `e(X ∩ Y)`.
    pub e_x_cap_y: f64,
    /// The edges of `E(X, Y)`.
    pub boundary_edge_set: Vec<[String; 2]>,
}

/// `Cor(X, Y) = Vol(X,Y)·Vol(X̄,Ȳ) − Vol(X,Ȳ)·Vol(X̄,Y)` from the four volumes.
fn correlation(mv: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>, one: &DVector<f64>) -> f64 {
    let xb = one - x;
    let yb = one - y;
    let vol = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * mv * b)[(0, 0)];
    vol(x, y) * vol(&xb, &yb) - vol(x, &yb) * vol(&xb, y)
}

pub fn cut_stats(g: &Graph, mv: &SpdMatrix, me: &SpdMatrix, x: &[usize], y: &[usize]) -> Result<CutStats> {
    check_dims(g, mv, me)?;
    let n = g.n();
    if let Some(&v) = x.iter().chain(y).find(|&&v| v >= n) {
        return Err(Error::Domain(format!("vertex index {v} out of range")));
    }
    let m = mv.matrix();
    let one = DVector::from_element(n, 1.0);
    let xi = indicator(n, x);
    let yi = indicator(n, y);
    let xb = &one - &xi;
    let yb = &one - &yi;
    let vol = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * m * b)[(0, 0)];
    let inx = membership(n, x);
    let iny = membership(n, y);
    let cap: Vec<usize> = x.iter().copied().filter(|v| iny[*v]).collect();
    let incap = membership(n, &cap);
    let exy = edges_between(g, &inx, &iny);
    let e = |sel: &[usize]| mass(me.matrix(), sel);
    Ok(CutStats {
        vol_x: vol(&xi, &xi),
        vol_y: vol(&yi, &yi),
        vol_xy: vol(&xi, &yi),
        vol_x_ybar: vol(&xi, &yb),
        vol_xbar_y: vol(&xb, &yi),
        vol_xbar_ybar: vol(&xb, &yb),
        vol_g: vol(&one, &one),
        cor_xy: correlation(m, &xi, &yi, &one),
        cor_x: correlation(m, &xi, &xi, &one),
        cor_y: correlation(m, &yi, &yi, &one),
        e_xy: e(&exy),
        e_x: e(&edges_between(g, &inx, &inx)),
        e_y: e(&edges_between(g, &iny, &iny)),
        e_x_cap_y: e(&edges_between(g, &incap, &incap)),
        boundary_edge_set: exy
            .iter()
            .map(|&k| {
                let (u, v) = g.edges()[k];
                [g.vertices()[u].clone(), g.vertices()[v].clone()]
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutEntry {
    pub set: Vec<String>,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conductance {
    pub phi: f64,
    pub argmin: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table: Option<Vec<CutEntry>>,
    #[serde(skip)]
    pub argmin_index: Vec<usize>,
}

/// `Φ(S) = e(S, S̄) / min{Vol(S), Vol(S̄)}`.
fn phi_of(g: &Graph, mv: &DMatrix<f64>, me: &DMatrix<f64>, s: &[usize]) -> f64 {
    let n = g.n();
    let ins = membership(n, s);
    let out: Vec<bool> = ins.iter().map(|b| !b).collect();
    let cut = edges_between(g, &ins, &out);
    let sb = complement(n, s);
    let vs = mass(mv, s);
    let vsb = mass(mv, &sb);
    mass(me, &cut) / vs.min(vsb)
}

fn subset_of_mask(base: &[usize], mask: u64) -> Vec<usize> {
    base.iter()
        .enumerate()
        .filter(|(j, _)| mask >> j & 1 == 1)
        .map(|(_, &v)| v)
        .collect()
}

/// Best value, its subset, and every evaluated `(subset, value)` pair.
type SubsetSearch = (f64, Vec<usize>, Vec<(Vec<usize>, f64)>);

/// Minimizes `f` over the subsets produced by `masks`, breaking ties by the
/// lexicographically smallest set; work is split across `threads`.
fn argmin_subsets<F>(masks: &[u64], base: &[usize], threads: usize, f: F) -> SubsetSearch
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let run = |chunk: &[u64]| {
        chunk
            .iter()
            .map(|&mask| {
                let s = subset_of_mask(base, mask);
                let v = f(&s);
                (s, v)
            })
            .collect::<Vec<_>>()
    };
    let threads = threads.clamp(1, masks.len().max(1));
    let all: Vec<(Vec<usize>, f64)> = if threads == 1 {
        run(masks)
    } else {
        let chunk = masks.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = masks.chunks(chunk).map(|c| scope.spawn(move || run(c))).collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };
    let mut best: Option<(f64, Vec<usize>)> = None;
    for (s, v) in &all {
        let better = match &best {
            None => true,
            Some((bv, bs)) => *v < *bv || (*v == *bv && s < bs),
        };
        if better {
            best = Some((*v, s.clone()));
        }
    }
    let (v, s) = best.unwrap_or((f64::INFINITY, Vec::new()));
    (v, s, all)
}

/// Exact inner product conductance over all cuts `(S, S̄)` with vertex 0 in `S`.
pub fn conductance(
    g: &Graph,
    mv: &SpdMatrix,
    me: &SpdMatrix,
    with_table: bool,
    limits: &Limits,
) -> Result<Conductance> {
    check_dims(g, mv, me)?;
    let n = g.n();
    if n < 2 {
        return Err(Error::Domain("conductance needs at least 2 vertices".into()));
    }
    limits.check("conductance enumeration", n, limits.cut_cap)?;
    if !g.is_connected() {
        let comp: Vec<usize> = (0..n).filter(|&v| g.component_of(v) == g.component_of(0)).collect();
        return Ok(Conductance {
            phi: 0.0,
            argmin: labels(g, &comp),
            table: None,
            argmin_index: comp,
        });
    }
    let rest: Vec<usize> = (1..n).collect();
    let full = (1u64 << (n - 1)) - 1;
    let masks: Vec<u64> = (0..full).collect();
    let (phi, s_rest, all) = argmin_subsets(&masks, &rest, limits.threads, |s| {
        let mut with0 = vec![0];
        with0.extend_from_slice(s);
        phi_of(g, mv.matrix(), me.matrix(), &with0)
    });
    let with0 = |s: &[usize]| {
        let mut v = vec![0];
        v.extend_from_slice(s);
        v
    };
    let argmin_index = with0(&s_rest);
    let table = with_table.then(|| {
        all.iter()
            .map(|(s, v)| CutEntry {
                set: labels(g, &with0(s)),
                phi: *v,
            })
            .collect()
    });
    Ok(Conductance {
        phi,
        argmin: labels(g, &argmin_index),
        table,
        argmin_index,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerReport {
    pub phi: f64,
    pub argmin: Vec<String>,
    pub lambda_2: f64,
    pub rho_v: f64,
    pub rho_e: f64,
    pub omega: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub pass: bool,
}

impl Verdict for CheegerReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

/// Checks `((1−ρ_V)/(1+ρ_V))⁷·((1−ρ_E)/(1+ρ_E))⁴·Φ²/(2ω) ≤ λ_2 ≤
/// (2/(1−ρ_V))·((1+ρ_E)/(1−ρ_E))·Φ`, using the graph's orientation.
pub fn verify_cheeger(g: &Graph, mv: &SpdMatrix, me: &SpdMatrix, limits: &Limits) -> Result<CheegerReport> {
    check_dims(g, mv, me)?;
    if !g.is_connected() || g.n() < 2 {
        return Err(Error::Domain("the Cheeger check needs a connected graph".into()));
    }
    let c = conductance(g, mv, me, false, limits)?;
    let spec = graph_laplacian(g, mv, me)?;
    let lambda_2 = spec.eigenvalues[1];
    let rho_v = weak_rho(mv, &limits.weak())?;
    let rho_e = weak_rho(me, &limits.weak())?;
    let omega = graph_compatibility(g, mv, me)?.omega;
    let rv = (1.0 - rho_v) / (1.0 + rho_v);
    let re = (1.0 - rho_e) / (1.0 + rho_e);
    let lower_bound = rv.powi(7) * re.powi(4) * c.phi * c.phi / (2.0 * omega);
    let upper_bound = 2.0 / (1.0 - rho_v) / re * c.phi;
    Ok(CheegerReport {
        phi: c.phi,
        argmin: c.argmin,
        lambda_2,
        rho_v,
        rho_e,
        omega,
        lower_bound,
        upper_bound,
        lower_margin: lambda_2 - lower_bound,
        upper_margin: upper_bound - lambda_2,
        pass: lambda_2 >= lower_bound - CHECK_SLACK && lambda_2 <= upper_bound + CHECK_SLACK,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmlReport {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub e_xy: f64,
    pub e_x_cap_y: f64,
    /// `Σ_{a ∈ X∩Y} e({a}, V − {a})`.
    pub star_sum: f64,
    pub cor_xy: f64,
    pub cor_x: f64,
    pub cor_y: f64,
    pub vol_g: f64,
    pub lambda_2: f64,
    pub lambda_n: f64,
    pub rho_e: f64,
    pub trace_me: f64,
    pub lhs: f64,
    pub main_term: f64,
    pub correction_term: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Whether the inequality holds without the conformality correction.
    pub main_term_pass: bool,
    /// Same inequality with `λ_1 = 0` in place of `λ_2` (shift `λ_n/2`).
    pub lhs_lambda1: f64,
    pub rhs_lambda1: f64,
    pub margin_lambda1: f64,
    pub pass: bool,
}

impl Verdict for EmlReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

/// Quantities shared by every `(X, Y)` pair on one instance.
struct EmlContext<'a> {
    g: &'a Graph,
    mv: &'a SpdMatrix,
    me: &'a SpdMatrix,
    lambda_2: f64,
    lambda_n: f64,
    rho_e: f64,
    trace_me: f64,
    vol_g: f64,
    /// `e({a}, V − {a})` per vertex.
    star: Vec<f64>,
}

impl<'a> EmlContext<'a> {
    fn new(g: &'a Graph, mv: &'a SpdMatrix, me: &'a SpdMatrix, limits: &Limits) -> Result<Self> {
        check_dims(g, mv, me)?;
        if !g.is_connected() || g.n() < 2 {
            return Err(Error::Domain("the mixing inequality needs a connected graph".into()));
        }
        let spec = graph_laplacian(g, mv, me)?;
        let star = (0..g.n()).map(|a| mass(me.matrix(), g.incident_edges(a))).collect();
        Ok(Self {
            g,
            mv,
            me,
            lambda_2: spec.eigenvalues[1],
            lambda_n: spec.lambda_max(),
            rho_e: weak_rho(me, &limits.weak())?,
            trace_me: me.matrix().trace(),
            vol_g: mass(mv.matrix(), &(0..g.n()).collect::<Vec<_>>()),
            star,
        })
    }

    fn report(&self, x: &[usize], y: &[usize]) -> Result<EmlReport> {
        let s = cut_stats(self.g, self.mv, self.me, x, y)?;
        let iny = membership(self.g.n(), y);
        let star_sum: f64 = x.iter().filter(|&&a| iny[a]).map(|&a| self.star[a]).sum();
        let base = s.e_xy + s.e_x_cap_y - star_sum;
        let root = (s.cor_x.max(0.0) * s.cor_y.max(0.0)).sqrt();
        let tau = (self.lambda_n + self.lambda_2) / 2.0;
        let lhs = (base + tau * s.cor_xy / self.vol_g).abs();
        let main_term = (self.lambda_n - self.lambda_2) / 2.0 * root / self.vol_g;
        let correction_term = 12.0 * self.rho_e / (1.0 - self.rho_e * self.rho_e) * self.trace_me;
        let rhs = main_term + correction_term;
        let lhs_lambda1 = (base + self.lambda_n / 2.0 * s.cor_xy / self.vol_g).abs();
        let rhs_lambda1 = self.lambda_n / 2.0 * root / self.vol_g + correction_term;
        Ok(EmlReport {
            x: labels(self.g, x),
            y: labels(self.g, y),
            e_xy: s.e_xy,
            e_x_cap_y: s.e_x_cap_y,
            star_sum,
            cor_xy: s.cor_xy,
            cor_x: s.cor_x,
            cor_y: s.cor_y,
            vol_g: self.vol_g,
            lambda_2: self.lambda_2,
            lambda_n: self.lambda_n,
            rho_e: self.rho_e,
            trace_me: self.trace_me,
            lhs,
            main_term,
            correction_term,
            rhs,
            margin: rhs - lhs,
            main_term_pass: lhs <= main_term + CHECK_SLACK,
            lhs_lambda1,
            rhs_lambda1,
            margin_lambda1: rhs_lambda1 - lhs_lambda1,
            pass: lhs <= rhs + CHECK_SLACK,
        })
    }
}

/// The mixing inequality for one pair of vertex sets.
pub fn verify_eml(
    g: &Graph,
    mv: &SpdMatrix,
    me: &SpdMatrix,
    x: &[usize],
    y: &[usize],
    limits: &Limits,
) -> Result<EmlReport> {
    EmlContext::new(g, mv, me, limits)?.report(x, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmlBatchReport {
    pub pairs: usize,
    pub failures: usize,
    pub worst_margin: f64,
    pub worst: EmlReport,
    /// Pairs failing without the conformality correction.
    pub main_term_failures: usize,
    /// The pair with the smallest `main_term − lhs`.
    pub worst_main_term: EmlReport,
    pub pass: bool,
}

impl Verdict for EmlBatchReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

/// Sweeps every pair of subsets `(X, Y)` of `V`.
pub fn verify_eml_batch(g: &Graph, mv: &SpdMatrix, me: &SpdMatrix, limits: &Limits) -> Result<EmlBatchReport> {
    let n = g.n();
    limits.check("mixing inequality batch", n, limits.batch_cap)?;
    let ctx = EmlContext::new(g, mv, me, limits)?;
    let all: Vec<usize> = (0..n).collect();
    let total = 1u64 << n;
    let mut pairs = 0;
    let mut failures = 0;
    let mut main_term_failures = 0;
    let mut worst: Option<EmlReport> = None;
    let mut worst_main: Option<EmlReport> = None;
    for xm in 0..total {
        let x = subset_of_mask(&all, xm);
        for ym in 0..total {
            let y = subset_of_mask(&all, ym);
            let r = ctx.report(&x, &y)?;
            pairs += 1;
            if !r.pass {
                failures += 1;
            }
            if !r.main_term_pass {
                main_term_failures += 1;
            }
            if worst_main
                .as_ref()
                .is_none_or(|w| r.main_term - r.lhs < w.main_term - w.lhs)
            {
                worst_main = Some(r.clone());
            }
            if worst.as_ref().is_none_or(|w| r.margin < w.margin) {
                worst = Some(r);
            }
        }
    }
    let worst = worst.expect("at least one pair");
    Ok(EmlBatchReport {
        pairs,
        failures,
        worst_margin: worst.margin,
        worst,
        main_term_failures,
        worst_main_term: worst_main.expect("at least one pair"),
        pass: failures == 0,
    })
}

/// The three-part example graph on which the mixing inequality needs its
/// conformality correction: `|A| = |B| = k`, `|C| = 2k`, complete bipartite
/// `A–B`, `k`-regular bipartite `(A ∪ B)–C`, and a perfect matching on `C`.
pub struct EmlExample {
    pub graph: Graph,
    pub mv: SpdMatrix,
    pub me: SpdMatrix,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

pub fn eml_example(k: usize) -> Result<EmlExample> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let mut names = Vec::new();
    names.extend((1..=k).map(|i| format!("a{i}")));
    names.extend((1..=k).map(|i| format!("b{i}")));
    names.extend((1..=2 * k).map(|i| format!("c{i}")));
    let a: Vec<usize> = (0..k).collect();
    let b: Vec<usize> = (k..2 * k).collect();
    let c: Vec<usize> = (2 * k..4 * k).collect();
    let mut edges = Vec::new();
    for &u in &a {
        for &v in &b {
            edges.push((u, v));
        }
    }
    for i in 0..2 * k {
        for j in 0..k {
            edges.push((i, c[(i + j) % (2 * k)]));
        }
    }
    for t in 0..k {
        edges.push((c[2 * t], c[2 * t + 1]));
    }
    let (graph, _) = Graph::build(names, &edges)?;
    let kf = k as f64;
    let mut mvd = vec![2.0 * kf * kf + 2.0 * kf; 2 * k];
    mvd.extend(vec![2.0 * kf * kf + kf; 2 * k]);
    let mv = SpdMatrix::from_diagonal(&mvd)?;
    let in_ab = |e: (usize, usize)| e.0 < k && (k..2 * k).contains(&e.1);
    let in_c = |e: (usize, usize)| e.0 >= 2 * k;
    let es = graph.edges();
    let me = DMatrix::from_fn(es.len(), es.len(), |i, j| {
        let (ei, ej) = (es[i], es[j]);
        if in_ab(ei) && in_ab(ej) {
            if i == j {
                3.0
            } else {
                2.0
            }
        } else if i != j {
            0.0
        } else if in_c(ei) {
            2.0 * kf * kf
        } else {
            1.0
        }
    });
    Ok(EmlExample {
        graph,
        mv,
        me: SpdMatrix::new(me)?,
        a,
        b,
        c,
    })
}

fn check_subset(g: &Graph, s: &[usize]) -> Result<Vec<usize>> {
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Err(Error::Domain("subset must be non-empty".into()));
    }
    if let Some(&v) = s.iter().find(|&&v| v >= g.n()) {
        return Err(Error::Domain(format!("vertex index {v} out of range")));
    }
    Ok(s)
}

/// Eigenvalues of `(D_S − A_SS)·f = λ·D_S·f`, i.e. the Rayleigh quotient over
/// functions on `S` vanishing on `∂S`.
pub fn dirichlet_eigenvalues(g: &Graph, s: &[usize]) -> Result<Vec<f64>> {
    let s = check_subset(g, s)?;
    if g.vertex_boundary(&s).is_empty() {
        return Err(Error::Domain("subset has empty vertex boundary".into()));
    }
    let k = s.len();
    let a = g.adjacency_matrix();
    let num = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            g.degree(s[i]) as f64
        } else {
            -a[(s[i], s[j])]
        }
    });
    let den = SpdMatrix::from_diagonal(&s.iter().map(|&v| g.degree(v) as f64).collect::<Vec<_>>())?;
    Ok(crate::linalg::gen_eig(&num, &den)?.values.as_slice().to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStep {
    pub epsilon: f64,
    pub lambda2: Option<f64>,
    pub kernel_dim: Option<usize>,
    /// Harmonic eigenvector on `S ∪ ∂S`, normalized and sign-aligned.
    pub f: Vec<f64>,
    pub gap: Option<f64>,
    pub vector_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannResult {
    pub subset: Vec<String>,
    pub boundary: Vec<String>,
    /// `S ∪ ∂S` in vertex order; `f` and the trace vectors are indexed by it.
    pub domain: Vec<String>,
    pub lambda_s: f64,
    /// Second non-constant eigenvalue, when `|S| > 2`.
    pub next_eigenvalue: Option<f64>,
    pub f: Vec<f64>,
    pub weighted_mean: f64,
    pub rayleigh: f64,
    pub epsilon_trace: Vec<EpsilonStep>,
    pub converged: bool,
    pub final_gap: Option<f64>,
    pub final_vector_gap: Option<f64>,
    /// Every completed step had a one-dimensional kernel.
    pub kernel_ok: bool,
}

impl Verdict for NeumannResult {
    fn passed(&self) -> bool {
        self.converged && self.kernel_ok
    }
}

pub const NEUMANN_LAMBDA_TOL: f64 = 1e-4;
pub const NEUMANN_VECTOR_TOL: f64 = 1e-3;

pub fn default_schedule() -> Vec<f64> {
    (1..=8).map(|i| 10f64.powi(-i)).collect()
}

/// Rayleigh quotient of the Neumann problem for `f` on `S ∪ ∂S`.
fn neumann_rayleigh(g: &Graph, ins: &[bool], pos: &[Option<usize>], f: &[f64]) -> f64 {
    let mut num = 0.0;
    for &(u, v) in g.edges() {
        if ins[u] || ins[v] {
            let d = f[pos[u].unwrap()] - f[pos[v].unwrap()];
            num += d * d;
        }
    }
    let den: f64 = (0..g.n())
        .filter(|&v| ins[v])
        .map(|v| f[pos[v].unwrap()].powi(2) * g.degree(v) as f64)
        .sum();
    num / den
}

struct NeumannSetup {
    s: Vec<usize>,
    boundary: Vec<usize>,
    domain: Vec<usize>,
    ins: Vec<bool>,
    pos: Vec<Option<usize>>,
}

fn neumann_setup(g: &Graph, s: &[usize]) -> Result<NeumannSetup> {
    let s = check_subset(g, s)?;
    if s.len() < 2 {
        return Err(Error::Domain("Neumann eigenvalue needs |S| >= 2".into()));
    }
    if !g.is_connected() {
        return Err(Error::Domain("Neumann eigenvalue needs a connected graph".into()));
    }
    let boundary = g.vertex_boundary(&s);
    if boundary.is_empty() {
        return Err(Error::Domain("subset has empty vertex boundary".into()));
    }
    let mut domain: Vec<usize> = s.iter().chain(&boundary).copied().collect();
    domain.sort_unstable();
    let mut pos = vec![None; g.n()];
    for (i, &v) in domain.iter().enumerate() {
        pos[v] = Some(i);
    }
    let ins = membership(g.n(), &s);
    Ok(NeumannSetup {
        s,
        boundary,
        domain,
        ins,
        pos,
    })
}

/// Neumann eigenvalue of `S` and its eigenfunction on `S ∪ ∂S`.
///
/// Each boundary vertex takes the mean of its neighbors in `S`, which reduces
/// the problem to a quadratic form on `S`; the `deg`-weighted constant is
/// projected out and the smallest remaining eigenvalue taken.
pub fn neumann_eigenvalue(g: &Graph, s: &[usize]) -> Result<NeumannResult> {
    let ns = neumann_setup(g, s)?;
    let k = ns.s.len();
    let mut idx = vec![usize::MAX; g.n()];
    for (i, &v) in ns.s.iter().enumerate() {
        idx[v] = i;
    }
    let mut num = DMatrix::<f64>::zeros(k, k);
    for &(u, v) in g.edges() {
        if ns.ins[u] && ns.ins[v] {
            let (a, b) = (idx[u], idx[v]);
            num[(a, a)] += 1.0;
            num[(b, b)] += 1.0;
            num[(a, b)] -= 1.0;
            num[(b, a)] -= 1.0;
        }
    }
    for &t in &ns.boundary {
        let nb: Vec<usize> = g.neighbors(t).iter().filter(|&&w| ns.ins[w]).map(|&w| idx[w]).collect();
        let c = 1.0 / nb.len() as f64;
        for &a in &nb {
            num[(a, a)] += 1.0;
            for &b in &nb {
                num[(a, b)] -= c;
            }
        }
    }
    let deg: Vec<f64> = ns.s.iter().map(|&v| g.degree(v) as f64).collect();
    let dh = DVector::from_iterator(k, deg.iter().map(|d| d.sqrt()));
    let c = DMatrix::from_fn(k, k, |i, j| num[(i, j)] / (dh[i] * dh[j]));
    // Orthonormal basis of the complement of D^{1/2}𝟙.
    let u0 = &dh / dh.norm();
    let proj = DMatrix::identity(k, k) - &u0 * u0.transpose();
    let pe = jacobi(&((&proj + proj.transpose()) * 0.5))?;
    let basis = pe.vectors.columns(1, k - 1).into_owned();
    let reduced = basis.transpose() * &c * &basis;
    let re = jacobi(&((&reduced + reduced.transpose()) * 0.5))?;
    let lambda_s = re.values[0].max(0.0);
    let w = &basis * re.vectors.column(0);
    let mut fs: Vec<f64> = (0..k).map(|i| w[i] / dh[i]).collect();
    let norm: f64 = fs.iter().zip(&deg).map(|(f, d)| f * f * d).sum::<f64>().sqrt();
    fs.iter_mut().for_each(|x| *x /= norm);

    let mut f = vec![0.0; ns.domain.len()];
    for (i, &v) in ns.s.iter().enumerate() {
        f[ns.pos[v].unwrap()] = fs[i];
    }
    for &t in &ns.boundary {
        let nb: Vec<f64> = g
            .neighbors(t)
            .iter()
            .filter(|&&w| ns.ins[w])
            .map(|&w| fs[idx[w]])
            .collect();
        f[ns.pos[t].unwrap()] = nb.iter().sum::<f64>() / nb.len() as f64;
    }
    let mut fm = DMatrix::from_column_slice(f.len(), 1, &f);
    canonical_signs(&mut fm);
    let f = fm.as_slice().to_vec();
    let weighted_mean = ns.s.iter().map(|&v| f[ns.pos[v].unwrap()] * g.degree(v) as f64).sum();
    let rayleigh = neumann_rayleigh(g, &ns.ins, &ns.pos, &f);
    Ok(NeumannResult {
        subset: labels(g, &ns.s),
        boundary: labels(g, &ns.boundary),
        domain: labels(g, &ns.domain),
        lambda_s,
        next_eigenvalue: (k > 2).then(|| re.values[1]),
        f,
        weighted_mean,
        rayleigh,
        epsilon_trace: Vec::new(),
        converged: false,
        final_gap: None,
        final_vector_gap: None,
        kernel_ok: true,
    })
}

/// Edge weights `w_ε` (1 on edges touching `S`, ε elsewhere) and the vertex
/// root `q` with `q_v² = deg_ε(v)` on `S` and `ε·deg_ε(v)` off `S`.
fn epsilon_weights(g: &Graph, ins: &[bool], eps: f64) -> (Vec<f64>, Vec<f64>) {
    let w: Vec<f64> = g
        .edges()
        .iter()
        .map(|&(u, v)| if ins[u] || ins[v] { 1.0 } else { eps })
        .collect();
    let q = (0..g.n())
        .map(|v| {
            let d: f64 = g.incident_edges(v).iter().map(|&e| w[e]).sum();
            if ins[v] {
                d.sqrt()
            } else {
                (eps * d).sqrt()
            }
        })
        .collect();
    (w, q)
}

/// Tracks `λ_2` and its harmonic eigenvector along a decreasing ε schedule
/// for the weighted inner products that converge to the Neumann problem.
///
/// The Laplacian `Q⁻¹·B·W·Bᵀ·Q⁻¹` is assembled directly from the diagonals:
/// for small ε the vertex inner product is too ill-conditioned for the
/// general positive definite wrapper, while the diagonal form stays exact.
pub fn neumann_limit_experiment(g: &Graph, s: &[usize], schedule: &[f64]) -> Result<NeumannResult> {
    if schedule.is_empty() {
        return Err(Error::Domain("empty epsilon schedule".into()));
    }
    if schedule.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::Domain("epsilon values must lie in (0, 1)".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("epsilon schedule must be strictly decreasing".into()));
    }
    let mut result = neumann_eigenvalue(g, s)?;
    let ns = neumann_setup(g, s)?;
    let deg_s: Vec<(usize, f64)> = ns.s.iter().map(|&v| (ns.pos[v].unwrap(), g.degree(v) as f64)).collect();
    let b = g.incidence().map(|x| x as f64);
    let mut previous: Option<Vec<f64>> = None;
    let mut kernel_ok = true;
    for &eps in schedule {
        let (w, q) = epsilon_weights(g, &ns.ins, eps);
        let bw = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * w[j]);
        let core = &bw * b.transpose();
        let l = DMatrix::from_fn(g.n(), g.n(), |i, j| core[(i, j)] / (q[i] * q[j]));
        let step = match sym_eig(&l) {
            Err(e) => Err(e),
            Ok(eig) => {
                let thr = zero_threshold(eig.max());
                let kernel_dim = eig.values.iter().filter(|&&x| x <= thr).count();
                let gv = eig.vectors.column(1);
                let mut f: Vec<f64> = ns.domain.iter().map(|&v| gv[v] / q[v]).collect();
                let norm: f64 = deg_s.iter().map(|&(i, d)| f[i] * f[i] * d).sum::<f64>().sqrt();
                f.iter_mut().for_each(|x| *x /= norm);
                let reference = previous.as_deref().unwrap_or(&result.f);
                let dot: f64 = f.iter().zip(reference).map(|(a, b)| a * b).sum();
                if dot < 0.0 {
                    f.iter_mut().for_each(|x| *x = -*x);
                }
                Ok((eig.values[1], kernel_dim, f))
            }
        };
        match step {
            Ok((lambda2, kernel_dim, f)) => {
                kernel_ok &= kernel_dim == 1;
                let vector_gap = f.iter().zip(&result.f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                result.epsilon_trace.push(EpsilonStep {
                    epsilon: eps,
                    lambda2: Some(lambda2),
                    kernel_dim: Some(kernel_dim),
                    gap: Some((lambda2 - result.lambda_s).abs()),
                    vector_gap: Some(vector_gap),
                    f: f.clone(),
                    error: None,
                });
                previous = Some(f);
            }
            Err(e) => {
                result.epsilon_trace.push(EpsilonStep {
                    epsilon: eps,
                    lambda2: None,
                    kernel_dim: None,
                    f: Vec::new(),
                    gap: None,
                    vector_gap: None,
                    error: Some(e.to_string()),
                });
                break;
            }
        }
    }
    let last = result.epsilon_trace.iter().rev().find(|s| s.error.is_none());
    result.final_gap = last.and_then(|s| s.gap);
    result.final_vector_gap = last.and_then(|s| s.vector_gap);
    result.converged = matches!(
        (result.final_gap, result.final_vector_gap),
        (Some(a), Some(b)) if a <= NEUMANN_LAMBDA_TOL && b <= NEUMANN_VECTOR_TOL
    );
    result.kernel_ok = kernel_ok && last.is_some();
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalConductanceReport {
    pub phi_s: f64,
    pub witness: Vec<String>,
    pub lambda_s: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

impl Verdict for LocalConductanceReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

/// `Φ_S = min_T e(T, T̄)/min{Vol(T), Vol(S − T)}` over proper non-empty
/// `T ⊂ S`, with degree volumes and edge counts; checks `λ_S ≤ 2·Φ_S`.
pub fn s_local_conductance(g: &Graph, s: &[usize], limits: &Limits) -> Result<LocalConductanceReport> {
    let s = check_subset(g, s)?;
    if s.len() < 2 {
        return Err(Error::Domain("S-local conductance needs |S| >= 2".into()));
    }
    limits.check("local conductance enumeration", s.len(), limits.local_cap)?;
    let lambda_s = neumann_eigenvalue(g, &s)?.lambda_s;
    let n = g.n();
    let deg = g.degrees();
    let vol = |set: &[usize]| set.iter().map(|&v| deg[v]).sum::<f64>();
    let full = (1u64 << s.len()) - 1;
    let masks: Vec<u64> = (1..full).collect();
    let (phi_s, t, _) = argmin_subsets(&masks, &s, limits.threads, |t| {
        let int = membership(n, t);
        let out: Vec<bool> = int.iter().map(|b| !b).collect();
        let cut = edges_between(g, &int, &out).len() as f64;
        let rest: Vec<usize> = s.iter().copied().filter(|v| !int[*v]).collect();
        cut / vol(t).min(vol(&rest))
    });
    let bound = 2.0 * phi_s;
    Ok(LocalConductanceReport {
        phi_s,
        witness: labels(g, &t),
        lambda_s,
        bound,
        margin: bound - lambda_s,
        pass: lambda_s <= bound + CHECK_SLACK,
    })
}

/// `(M_V, M_E) = (diag(deg), I)`, the inner products of the normalized Laplacian.
pub fn normalized_inner_products(g: &Graph) -> Result<(SpdMatrix, SpdMatrix)> {
    Ok((SpdMatrix::from_diagonal(&g.degrees())?, SpdMatrix::identity(g.m())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn normalized(g: &Graph) -> (SpdMatrix, SpdMatrix) {
        normalized_inner_products(g).unwrap()
    }

    #[test]
    fn k2_cut_stats() {
        let g = Graph::complete(2);
        let s = cut_stats(&g, &SpdMatrix::identity(2), &SpdMatrix::identity(1), &[0], &[1]).unwrap();
        assert_eq!(s.e_xy, 1.0);
        assert_eq!(s.cor_xy, -1.0);
        assert_eq!(s.cor_x, 1.0);
        assert_eq!(s.cor_y, 1.0);
        let s = cut_stats(&g, &SpdMatrix::identity(2), &SpdMatrix::identity(1), &[], &[]).unwrap();
        assert_eq!((s.vol_x, s.e_xy, s.cor_xy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn eml_example_stats() {
        let ex = eml_example(2).unwrap();
        let s = cut_stats(&ex.graph, &ex.mv, &ex.me, &ex.a, &ex.b).unwrap();
        assert_eq!(s.e_xy, 36.0);
        assert_eq!(s.vol_x, 24.0);
        assert_eq!(s.vol_y, 24.0);
        assert_eq!(s.vol_g, 88.0);
        let c = graph_compatibility(&ex.graph, &ex.mv, &ex.me).unwrap();
        assert!(c.perfect);
        assert_eq!(c.omega, 1.0);
        let r = verify_eml(&ex.graph, &ex.mv, &ex.me, &ex.a, &ex.b, &Limits::default()).unwrap();
        assert_relative_eq!(r.rho_e, 0.8, epsilon = 1e-12);
        assert!(r.pass);
        let ab: Vec<usize> = ex.a.iter().chain(&ex.b).copied().collect();
        let all: Vec<usize> = (0..8).collect();
        let r = verify_eml(&ex.graph, &ex.mv, &ex.me, &ab, &all, &Limits::default()).unwrap();
        assert!(r.pass);
        assert!(!r.main_term_pass);
        assert_relative_eq!(r.lhs, 32.0, epsilon = 1e-9);
    }

    #[test]
    fn conductance_examples() {
        let g = Graph::complete(2);
        let (mv, me) = normalized(&g);
        let c = conductance(&g, &mv, &me, false, &Limits::default()).unwrap();
        assert_eq!(c.phi, 1.0);
        assert_eq!(c.argmin, vec!["v1"]);
        let g = Graph::cycle(4);
        let (mv, me) = normalized(&g);
        let c = conductance(&g, &mv, &me, true, &Limits::default()).unwrap();
        assert_eq!(c.phi, 0.5);
        assert_eq!(c.table.unwrap().len(), 7);
    }

    #[test]
    fn cheeger_k2_upper_tight() {
        let g = Graph::complete(2);
        let (mv, me) = normalized(&g);
        let r = verify_cheeger(&g, &mv, &me, &Limits::default()).unwrap();
        assert_relative_eq!(r.lambda_2, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.lower_bound, 0.5);
        assert_relative_eq!(r.upper_bound, 2.0);
        assert!(r.upper_margin.abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn eml_k2() {
        let g = Graph::complete(2);
        let (mv, me) = normalized(&g);
        let r = verify_eml(&g, &mv, &me, &[0], &[1], &Limits::default()).unwrap();
        assert!(r.lhs.abs() < 1e-12);
        assert!(r.rhs.abs() < 1e-12);
        assert!(r.pass);
        let b = verify_eml_batch(&g, &mv, &me, &Limits::default()).unwrap();
        assert_eq!(b.pairs, 16);
        assert!(b.pass);
    }

    #[test]
    fn dirichlet_examples() {
        let d = dirichlet_eigenvalues(&Graph::path(3), &[1]).unwrap();
        assert_relative_eq!(d[0], 1.0, epsilon = 1e-14);
        let d = dirichlet_eigenvalues(&Graph::path(4), &[1, 2]).unwrap();
        assert_relative_eq!(d[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(d[1], 1.5, epsilon = 1e-14);
        assert!(dirichlet_eigenvalues(&Graph::path(3), &[0, 1, 2]).is_err());
    }

    #[test]
    fn neumann_p4() {
        let r = neumann_eigenvalue(&Graph::path(4), &[1, 2]).unwrap();
        assert_relative_eq!(r.lambda_s, 1.0, epsilon = 1e-12);
        let c = r.f[0];
        for (got, want) in r.f.iter().zip([c, c, -c, -c]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(r.weighted_mean.abs() < 1e-9);
        assert_relative_eq!(r.rayleigh, r.lambda_s, epsilon = 1e-9);
    }

    #[test]
    fn neumann_sweep_p4() {
        let r = neumann_limit_experiment(&Graph::path(4), &[1, 2], &default_schedule()).unwrap();
        assert!(r.kernel_ok);
        assert!(r.converged, "{:?}", r.final_gap);
        let r = neumann_limit_experiment(&Graph::path(4), &[1, 2], &[0.5]).unwrap();
        assert!(r.epsilon_trace[0].lambda2.unwrap() <= 1.0);
        assert!(neumann_limit_experiment(&Graph::path(4), &[1, 2], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn local_conductance_p4() {
        let r = s_local_conductance(&Graph::path(4), &[1, 2], &Limits::default()).unwrap();
        assert_eq!(r.phi_s, 1.0);
        assert_eq!(r.witness, vec!["v2"]);
        assert!(r.pass);
    }
}
