//! Simplicial complexes, graphs and hypergraphs with their boundary and
//! incidence matrices.
//!
//! A fixed global vertex order determines every face order and every boundary
//! sign. Graph edges use the convention `∂(u, v) = v − u` for `u < v`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest facet accepted; its closure has `2^size − 1` faces.
pub const MAX_FACET_SIZE: usize = 16;

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("v{i}")).collect()
}

fn label_index(labels: &[String]) -> Result<HashMap<&str, usize>> {
    let mut map = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if map.insert(l.as_str(), i).is_some() {
            return Err(Error::Domain(format!("duplicate vertex label {l:?}")));
        }
    }
    Ok(map)
}

fn lookup(map: &HashMap<&str, usize>, label: &str) -> Result<usize> {
    map.get(label)
        .copied()
        .ok_or_else(|| Error::Domain(format!("unknown vertex label {label:?}")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    ground_set: Vec<String>,
    /// `faces[i]`: sorted i-faces, each a strictly increasing index tuple.
    faces: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Downward closure of `facets`. Vertices are numbered by first
    /// appearance; labels new to a facet are numbered in sorted order.
    pub fn build(facets: &[Vec<String>]) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::Domain("a complex needs at least one facet".into()));
        }
        let mut ground: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for f in facets {
            if f.is_empty() {
                return Err(Error::Domain("empty facet".into()));
            }
            let mut fresh: Vec<&String> = f.iter().filter(|l| !index.contains_key(*l)).collect();
            fresh.sort();
            fresh.dedup();
            for l in fresh {
                index.insert(l.clone(), ground.len());
                ground.push(l.clone());
            }
        }
        let idx: Vec<Vec<usize>> = facets.iter().map(|f| f.iter().map(|l| index[l]).collect()).collect();
        Self::from_index_facets(ground, &idx)
    }

    /// Closure of facets given as vertex indices into `ground_set`.
    pub fn from_index_facets(ground_set: Vec<String>, facets: &[Vec<usize>]) -> Result<Self> {
        label_index(&ground_set)?;
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for f in facets {
            let mut f = f.clone();
            f.sort_unstable();
            let len = f.len();
            f.dedup();
            if f.len() != len {
                return Err(Error::Domain("facet repeats a vertex".into()));
            }
            if f.is_empty() {
                return Err(Error::Domain("empty facet".into()));
            }
            if f.len() > MAX_FACET_SIZE {
                return Err(Error::Domain(format!(
                    "facet of size {} exceeds the supported maximum {MAX_FACET_SIZE}",
                    f.len()
                )));
            }
            if let Some(&v) = f.iter().find(|&&v| v >= ground_set.len()) {
                return Err(Error::Domain(format!("vertex index {v} out of range")));
            }
            if by_dim.len() < f.len() {
                by_dim.resize(f.len(), BTreeSet::new());
            }
            for mask in 1u32..(1u32 << f.len()) {
                let face: Vec<usize> = (0..f.len()).filter(|j| mask >> j & 1 == 1).map(|j| f[j]).collect();
                by_dim[face.len() - 1].insert(face);
            }
        }
        // Isolated vertices that appear in no facet still belong to dimension 0.
        if by_dim.is_empty() {
            by_dim.push(BTreeSet::new());
        }
        for v in 0..ground_set.len() {
            by_dim[0].insert(vec![v]);
        }
        Ok(Self {
            ground_set,
            faces: by_dim.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// The 1-skeleton of a graph (vertices and edges).
    pub fn from_graph(g: &Graph) -> Self {
        let facets: Vec<Vec<usize>> = g.edges().iter().map(|&(u, v)| vec![u, v]).collect();
        Self::from_index_facets(g.vertices().to_vec(), &facets).expect("graph is a valid 1-complex")
    }

    pub fn ground_set(&self) -> &[String] {
        &self.ground_set
    }

    /// Largest face dimension.
    pub fn dimension(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn faces(&self, i: usize) -> &[Vec<usize>] {
        self.faces.get(i).map_or(&[], Vec::as_slice)
    }

    pub fn num_faces(&self, i: usize) -> usize {
        self.faces(i).len()
    }

    pub fn face_index(&self, i: usize, face: &[usize]) -> Option<usize> {
        self.faces(i).binary_search_by(|f| f.as_slice().cmp(face)).ok()
    }

    /// Signed boundary `B_i : C_i → C_{i−1}` of shape `|S_{i−1}| × |S_i|`.
    /// `B_0` is the zero map to the trivial space, `0 × |S_0|`.
    pub fn boundary_matrix(&self, i: usize) -> Result<DMatrix<i32>> {
        if i > self.dimension() {
            return Err(Error::Domain(format!(
                "boundary dimension {i} exceeds complex dimension {}",
                self.dimension()
            )));
        }
        if i == 0 {
            return Ok(DMatrix::zeros(0, self.num_faces(0)));
        }
        let mut b = DMatrix::zeros(self.num_faces(i - 1), self.num_faces(i));
        for (col, g) in self.faces(i).iter().enumerate() {
            for j in 0..g.len() {
                let mut f = g.clone();
                f.remove(j);
                let row = self.face_index(i - 1, &f).expect("complex is downward closed");
                b[(row, col)] = if j % 2 == 0 { 1 } else { -1 };
            }
        }
        Ok(b)
    }

    pub fn face_labels(&self, i: usize) -> Vec<Vec<String>> {
        self.faces(i)
            .iter()
            .map(|f| f.iter().map(|&v| self.ground_set[v].clone()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
    orientation: Vec<i8>,
    adjacency: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
    component: Vec<usize>,
    n_components: usize,
}

impl Graph {
    /// Builds a simple graph. Edges are normalized to `u < v` and sorted;
    /// the returned permutation maps sorted position to input position.
    pub fn build(vertices: Vec<String>, edges: &[(usize, usize)]) -> Result<(Self, Vec<usize>)> {
        label_index(&vertices)?;
        let n = vertices.len();
        let mut keyed = Vec::with_capacity(edges.len());
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::Domain(format!("edge ({a}, {b}) references a missing vertex")));
            }
            if a == b {
                return Err(Error::Domain(format!("loop at vertex {}", vertices[a])));
            }
            keyed.push(((a.min(b), a.max(b)), k));
        }
        keyed.sort();
        for w in keyed.windows(2) {
            if w[0].0 == w[1].0 {
                let (u, v) = w[0].0;
                return Err(Error::Domain(format!(
                    "duplicate edge {{{}, {}}}",
                    vertices[u], vertices[v]
                )));
            }
        }
        let perm = keyed.iter().map(|&(_, k)| k).collect();
        let sorted: Vec<(usize, usize)> = keyed.into_iter().map(|(e, _)| e).collect();
        Ok((Self::from_sorted(vertices, sorted), perm))
    }

    /// Builds from labeled edges; when `vertices` is `None` the vertex order is
    /// first appearance in `edges`.
    pub fn from_labels(vertices: Option<Vec<String>>, edges: &[(String, String)]) -> Result<(Self, Vec<usize>)> {
        let vertices = match vertices {
            Some(v) => v,
            None => {
                let mut seen = Vec::<String>::new();
                for (a, b) in edges {
                    for l in [a, b] {
                        if !seen.contains(l) {
                            seen.push(l.clone());
                        }
                    }
                }
                seen
            }
        };
        let map = label_index(&vertices)?;
        let idx = edges
            .iter()
            .map(|(a, b)| Ok((lookup(&map, a)?, lookup(&map, b)?)))
            .collect::<Result<Vec<_>>>()?;
        let (g, perm) = Self::build(vertices.clone(), &idx)?;
        Ok((g, perm))
    }

    fn from_sorted(vertices: Vec<String>, edges: Vec<(usize, usize)>) -> Self {
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        for (k, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push(v);
            adjacency[v].push(u);
            incident[u].push(k);
            incident[v].push(k);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        let mut component = vec![usize::MAX; n];
        let mut n_components = 0;
        for s in 0..n {
            if component[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            component[s] = n_components;
            while let Some(u) = stack.pop() {
                for &w in &adjacency[u] {
                    if component[w] == usize::MAX {
                        component[w] = n_components;
                        stack.push(w);
                    }
                }
            }
            n_components += 1;
        }
        let m = edges.len();
        Self {
            vertices,
            edges,
            orientation: vec![1; m],
            adjacency,
            incident,
            component,
            n_components,
        }
    }

    /// Same graph with the given per-edge signs (in sorted edge order).
    pub fn with_orientation(mut self, signs: &[i8]) -> Result<Self> {
        if signs.len() != self.edges.len() {
            return Err(Error::Dimension(format!(
                "orientation has {} signs for {} edges",
                signs.len(),
                self.edges.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("orientation signs must be +1 or -1".into()));
        }
        self.orientation = signs.to_vec();
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n()).map(|v| self.degree(v) as f64).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Indices of the edges at `v`, ascending.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    pub fn num_components(&self) -> usize {
        self.n_components
    }

    pub fn is_connected(&self) -> bool {
        self.n_components <= 1
    }

    pub fn vertex_index(&self, label: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Domain(format!("unknown vertex label {label:?}")))
    }

    pub fn vertex_set(&self, labels: &[String]) -> Result<Vec<usize>> {
        let mut out = labels
            .iter()
            .map(|l| self.vertex_index(l))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Signed vertex-edge incidence: edge `(u, v)` has `−σ` at `u`, `+σ` at `v`.
    pub fn incidence(&self) -> DMatrix<i32> {
        let mut b = DMatrix::zeros(self.n(), self.m());
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            let s = self.orientation[k] as i32;
            b[(u, k)] = -s;
            b[(v, k)] = s;
        }
        b
    }

    pub fn unsigned_incidence(&self) -> DMatrix<i32> {
        self.incidence().abs()
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n(), self.n());
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// Vertices outside `s` adjacent to some vertex of `s`.
    pub fn vertex_boundary(&self, s: &[usize]) -> Vec<usize> {
        let inside: BTreeSet<usize> = s.iter().copied().collect();
        let mut out = BTreeSet::new();
        for &u in s {
            for &w in &self.adjacency[u] {
                if !inside.contains(&w) {
                    out.insert(w);
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
        Self::build(default_labels(n), &edges).expect("valid").0
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::build(default_labels(n), &edges).expect("valid").0
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Self::build(default_labels(n), &edges).expect("valid").0
    }

    /// Star with center `v1` and `n − 1` leaves.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Self::build(default_labels(n), &edges).expect("valid").0
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        Self::build(default_labels(10), &edges).expect("valid").0
    }

    pub fn by_name(name: &str) -> Option<Self> {
        let parse = |p: &str| name.strip_prefix(p).and_then(|r| r.parse::<usize>().ok());
        match name {
            "petersen" => Some(Self::petersen()),
            _ => {
                if let Some(n) = parse("K") {
                    Some(Self::complete(n))
                } else if let Some(n) = parse("P") {
                    Some(Self::path(n))
                } else if let Some(n) = parse("C") {
                    (n >= 3).then(|| Self::cycle(n))
                } else {
                    parse("S").map(Self::star)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: Vec<String>,
    hyperedges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Hyperedges are sorted internally and then listed in lexicographic
    /// order; the permutation maps sorted position to input position.
    pub fn build(vertices: Vec<String>, hyperedges: &[Vec<usize>]) -> Result<(Self, Vec<usize>)> {
        label_index(&vertices)?;
        let mut keyed = Vec::with_capacity(hyperedges.len());
        for (k, e) in hyperedges.iter().enumerate() {
            let mut e = e.clone();
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(Error::Domain("empty hyperedge".into()));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Domain(format!("hyperedge references missing vertex {v}")));
            }
            keyed.push((e, k));
        }
        if keyed.is_empty() {
            return Err(Error::Domain("a hypergraph needs at least one hyperedge".into()));
        }
        keyed.sort();
        let perm = keyed.iter().map(|(_, k)| *k).collect();
        Ok((
            Self {
                vertices,
                hyperedges: keyed.into_iter().map(|(e, _)| e).collect(),
            },
            perm,
        ))
    }

    pub fn from_labels(vertices: Option<Vec<String>>, hyperedges: &[Vec<String>]) -> Result<(Self, Vec<usize>)> {
        let vertices = match vertices {
            Some(v) => v,
            None => {
                let mut seen = Vec::<String>::new();
                for e in hyperedges {
                    for l in e {
                        if !seen.contains(l) {
                            seen.push(l.clone());
                        }
                    }
                }
                seen
            }
        };
        let map = label_index(&vertices)?;
        let idx = hyperedges
            .iter()
            .map(|e| e.iter().map(|l| lookup(&map, l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::build(vertices.clone(), &idx)
    }

    /// A graph viewed as a 2-uniform hypergraph.
    pub fn from_graph(g: &Graph) -> Self {
        let edges: Vec<Vec<usize>> = g.edges().iter().map(|&(u, v)| vec![u, v]).collect();
        Self::build(g.vertices().to_vec(), &edges)
            .expect("graph edges are valid")
            .0
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn hyperedges(&self) -> &[Vec<usize>] {
        &self.hyperedges
    }

    /// Unsigned `|V| × |E|` incidence with column `e` supported on hyperedge `e`.
    pub fn incidence(&self) -> DMatrix<i32> {
        let mut h = DMatrix::zeros(self.n(), self.m());
        for (k, e) in self.hyperedges.iter().enumerate() {
            for &v in e {
                h[(v, k)] = 1;
            }
        }
        h
    }

    /// Largest hyperedge size.
    pub fn rank(&self) -> usize {
        self.hyperedges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest number of hyperedges at a vertex.
    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.n()];
        for e in &self.hyperedges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

/// Clique expansion: `{u, v}` is an edge iff some hyperedge contains both,
/// with pair weight `Σ_{e ∋ u, v} w_e`. Weights are returned in the graph's
/// sorted edge order.
pub fn clique_expansion(hg: &Hypergraph, weights: &[f64]) -> Result<(Graph, Vec<f64>)> {
    if weights.len() != hg.m() {
        return Err(Error::Dimension(format!(
            "{} weights for {} hyperedges",
            weights.len(),
            hg.m()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::Domain(format!("hyperedge weight {w} is not positive")));
    }
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (e, &w) in hg.hyperedges().iter().zip(weights) {
        for (a, &u) in e.iter().enumerate() {
            for &v in &e[a + 1..] {
                *pairs.entry((u, v)).or_insert(0.0) += w;
            }
        }
    }
    let edges: Vec<(usize, usize)> = pairs.keys().copied().collect();
    let (g, _) = Graph::build(hg.vertices().to_vec(), &edges)?;
    Ok((g, pairs.into_values().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(fs: &[&[&str]]) -> Vec<Vec<String>> {
        fs.iter().map(|f| f.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn closure_counts() {
        let k = SimplicialComplex::build(&labels(&[&["a", "b", "c"]])).unwrap();
        assert_eq!((k.num_faces(0), k.num_faces(1), k.num_faces(2)), (3, 3, 1));
        let k = SimplicialComplex::build(&labels(&[&["a", "b"], &["b", "c"]])).unwrap();
        assert_eq!((k.dimension(), k.num_faces(0), k.num_faces(1)), (1, 3, 2));
        let k = SimplicialComplex::build(&labels(&[&["a", "b", "c"], &["c", "d"]])).unwrap();
        assert_eq!((k.num_faces(0), k.num_faces(1), k.num_faces(2)), (4, 4, 1));
        assert!(SimplicialComplex::build(&labels(&[&[]])).is_err());
    }

    #[test]
    fn ground_set_order() {
        let k = SimplicialComplex::build(&labels(&[&["z", "y"], &["x", "z"]])).unwrap();
        assert_eq!(k.ground_set(), &["y", "z", "x"]);
    }

    #[test]
    fn triangle_boundaries() {
        let k = SimplicialComplex::build(&labels(&[&["a", "b", "c"]])).unwrap();
        let b1 = k.boundary_matrix(1).unwrap();
        let b2 = k.boundary_matrix(2).unwrap();
        for col in b1.column_iter() {
            assert_eq!(col.iter().filter(|&&x| x == 1).count(), 1);
            assert_eq!(col.iter().filter(|&&x| x == -1).count(), 1);
        }
        // Edges sort as (a,b), (a,c), (b,c).
        assert_eq!(b2.as_slice(), &[1, -1, 1]);
        assert_eq!(&b1 * &b2, DMatrix::zeros(3, 1));
        assert_eq!(k.boundary_matrix(0).unwrap().shape(), (0, 3));
        assert!(k.boundary_matrix(3).is_err());
    }

    #[test]
    fn path_boundary_matches_graph_incidence() {
        let k = SimplicialComplex::build(&labels(&[&["v1", "v2"], &["v2", "v3"]])).unwrap();
        let b = k.boundary_matrix(1).unwrap();
        let expect = DMatrix::from_row_slice(3, 2, &[-1, 0, 1, -1, 0, 1]);
        assert_eq!(b, expect);
        assert_eq!(Graph::path(3).incidence(), expect);
        let g = Graph::path(3).with_orientation(&[1, -1]).unwrap();
        assert_eq!(g.incidence(), DMatrix::from_row_slice(3, 2, &[-1, 0, 1, 1, 0, -1]));
    }

    #[test]
    fn graph_build_normalizes() {
        let (g, perm) = Graph::build(default_labels(3), &[(2, 1), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(perm, vec![1, 0]);
        assert!(Graph::build(default_labels(2), &[(0, 0)]).is_err());
        assert!(Graph::build(default_labels(2), &[(0, 1), (1, 0)]).is_err());
        let single = Graph::complete(2).incidence();
        assert_eq!(single.as_slice(), &[-1, 1]);
    }

    #[test]
    fn named_graphs() {
        let p = Graph::petersen();
        assert_eq!((p.n(), p.m(), p.max_degree()), (10, 15, 3));
        assert!((0..10).all(|v| p.degree(v) == 3));
        assert_eq!(Graph::cycle(4).m(), 4);
        assert_eq!(Graph::complete(4).m(), 6);
        let (g, _) = Graph::build(default_labels(4), &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.num_components(), 2);
        assert_eq!(Graph::by_name("C5").unwrap().m(), 5);
    }

    #[test]
    fn clique_expansion_examples() {
        let (h, _) = Hypergraph::build(default_labels(3), &[vec![0, 1, 2]]).unwrap();
        let (g, w) = clique_expansion(&h, &[1.0]).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(w, vec![1.0, 1.0, 1.0]);

        let (h, _) = Hypergraph::build(default_labels(3), &[vec![0, 1], vec![1, 2]]).unwrap();
        let (g, w) = clique_expansion(&h, &[1.0, 1.0]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(w, vec![1.0, 1.0]);

        let (h, perm) = Hypergraph::build(default_labels(3), &[vec![0, 1, 2], vec![0, 1]]).unwrap();
        let raw = [1.0, 2.0];
        let w: Vec<f64> = perm.iter().map(|&k| raw[k]).collect();
        let (g, wt) = clique_expansion(&h, &w).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(wt, vec![3.0, 1.0, 1.0]);
        assert!(clique_expansion(&h, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn hypergraph_incidence() {
        let (h, _) = Hypergraph::build(default_labels(3), &[vec![2], vec![0, 1, 2]]).unwrap();
        assert_eq!(h.rank(), 3);
        assert_eq!(h.max_degree(), 2);
        let inc = h.incidence();
        assert_eq!(inc.column(0).iter().sum::<i32>(), 3);
        assert_eq!(inc.column(1).as_slice(), &[0, 0, 1]);
    }
}
