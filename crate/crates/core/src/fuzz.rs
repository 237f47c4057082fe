//! Seeded random instances for property checks and the `fuzz` command.
//!
//! Every generator is a pure function of its seed (ChaCha8).

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::complex::{Graph, SimplicialComplex};
use crate::conformality::DEFAULT_WEAK_CAP;
use crate::error::Result;
use crate::isoperimetry::neumann_eigenvalue;
use crate::linalg::SpdMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Diagonal entries uniform in `[0.5, 2]`.
pub fn random_diagonal(rng: &mut impl Rng, n: usize) -> SpdMatrix {
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    SpdMatrix::from_diagonal(&d).expect("positive diagonal")
}

/// `G·Gᵀ/n + c·I` with standard normal `G` and `c` uniform in `[0.2, 1]`.
pub fn random_dense(rng: &mut impl Rng, n: usize) -> SpdMatrix {
    loop {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let c = rng.gen_range(0.2..1.0);
        let m = &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * c;
        if let Ok(s) = SpdMatrix::new((&m + m.transpose()) * 0.5) {
            return s;
        }
    }
}

pub fn random_spd(rng: &mut impl Rng, n: usize, dense: bool) -> SpdMatrix {
    if dense {
        random_dense(rng, n)
    } else {
        random_diagonal(rng, n)
    }
}

/// Random spanning tree on `n` vertices plus each other pair with probability `p`.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((order[i].min(order[j]), order[i].max(order[j])));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let labels = (1..=n).map(|i| format!("v{i}")).collect();
    Graph::build(labels, &edges).expect("valid edges").0
}

pub fn random_orientation(rng: &mut impl Rng, m: usize) -> Vec<i8> {
    (0..m).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect()
}

/// A connected oriented graph with vertex and edge inner products.
#[derive(Debug, Clone)]
pub struct GraphCase {
    pub seed: u64,
    pub graph: Graph,
    pub mv: SpdMatrix,
    pub me: SpdMatrix,
}

/// `|V|` uniform in `[2, max_n]`. With `dense`, each inner product is dense
/// with probability 1/2 as long as its size stays within the weak
/// conformality cap; otherwise it is diagonal.
pub fn graph_case(seed: u64, max_n: usize, dense: bool) -> GraphCase {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n.max(2));
    let p = r.gen_range(0.1..0.7);
    let g = random_connected_graph(&mut r, n, p);
    let orient = random_orientation(&mut r, g.m());
    let graph = g.with_orientation(&orient).expect("matching length");
    let dv = dense && r.gen_bool(0.5);
    let de = dense && graph.m() <= DEFAULT_WEAK_CAP && r.gen_bool(0.5);
    let mv = random_spd(&mut r, graph.n(), dv);
    let me = random_spd(&mut r, graph.m(), de);
    GraphCase { seed, graph, mv, me }
}

pub fn graph_suite(count: usize, base_seed: u64, max_n: usize, dense: bool) -> Vec<GraphCase> {
    (0..count as u64)
        .map(|i| graph_case(base_seed + i, max_n, dense))
        .collect()
}

/// Random SPD matrix of dimension in `[2, max_dim]`, diagonal with probability 1/4.
pub fn spd_case(seed: u64, max_dim: usize) -> SpdMatrix {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_dim.max(2));
    let diag = r.gen_bool(0.25);
    random_spd(&mut r, n, !diag)
}

/// Complex on at most `max_n` vertices with 1 to 4 random facets of
/// dimension at most `max_dim`, plus dense inner products in every dimension.
pub fn complex_case(seed: u64, max_n: usize, max_dim: usize) -> (SimplicialComplex, Vec<SpdMatrix>) {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n.max(2));
    let count = r.gen_range(1..=4);
    let mut facets = Vec::new();
    for _ in 0..count {
        let size = r.gen_range(2..=(max_dim + 1).min(n));
        let mut verts: Vec<usize> = (0..n).collect();
        verts.shuffle(&mut r);
        facets.push(verts[..size].to_vec());
    }
    let labels = (1..=n).map(|i| format!("v{i}")).collect();
    let c = SimplicialComplex::from_index_facets(labels, &facets).expect("valid facets");
    let inner = (0..=c.dimension())
        .map(|i| random_dense(&mut r, c.num_faces(i)))
        .collect();
    (c, inner)
}

/// Row-stochastic matrix whose support contains the cycle `0 → 1 → … → 0`
/// plus random extra arcs, so the chain is irreducible.
pub fn ergodic_chain(seed: u64, max_n: usize) -> DMatrix<f64> {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n.max(2));
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        p[(i, (i + 1) % n)] = r.gen_range(0.2..1.0);
        for j in 0..n {
            if j != (i + 1) % n && r.gen_bool(0.4) {
                p[(i, j)] = r.gen_range(0.1..1.0);
            }
        }
        let s: f64 = p.row(i).sum();
        for j in 0..n {
            p[(i, j)] /= s;
        }
    }
    p
}

/// A graph and vertex subset whose Neumann problem is well separated:
/// `λ_S ≥ 0.05`, and when a second eigenvalue exists it exceeds `λ_S` by at
/// least 0.05.
#[derive(Debug, Clone)]
pub struct NeumannCase {
    pub seed: u64,
    pub graph: Graph,
    pub subset: Vec<usize>,
}

pub fn neumann_case(seed: u64) -> Result<NeumannCase> {
    let mut r = rng(seed);
    loop {
        let n = r.gen_range(5..=8);
        let p = r.gen_range(0.2..0.5);
        let g = random_connected_graph(&mut r, n, p);
        let size = r.gen_range(2..=n - 2);
        let mut verts: Vec<usize> = (0..n).collect();
        verts.shuffle(&mut r);
        let mut s = verts[..size].to_vec();
        s.sort_unstable();
        if g.vertex_boundary(&s).is_empty() {
            continue;
        }
        let Ok(res) = neumann_eigenvalue(&g, &s) else {
            continue;
        };
        let separated = res.next_eigenvalue.is_none_or(|l| l - res.lambda_s >= 0.05);
        if res.lambda_s >= 0.05 && separated {
            return Ok(NeumannCase {
                seed,
                graph: g,
                subset: s,
            });
        }
    }
}
