//! JSON input files and command-line list syntax.
//!
//! Edge-indexed data (orientation, weights, edge inner product rows) is
//! given in the order the edges are listed in the graph file and permuted
//! into the graph's sorted edge order on load. An edge listed as `[a, b]` is
//! oriented from `a` to `b`; an orientation entry of `-1` reverses it.

use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complex::{Graph, Hypergraph, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::{matrix_from_rows, SpdMatrix};

/// Parses JSON text, reporting line and column on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        matrix_from_rows(&self.rows)
    }

    pub fn spd(&self) -> Result<SpdMatrix> {
        SpdMatrix::new(self.matrix()?)
    }
}

/// A vector given either as a bare array or as `{"values": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorFile {
    Bare(Vec<f64>),
    Wrapped { values: Vec<f64> },
}

impl VectorFile {
    pub fn values(self) -> Vec<f64> {
        match self {
            VectorFile::Bare(v) | VectorFile::Wrapped { values: v } => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// A graph with its edge-indexed input data in sorted edge order.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `perm[k]` is the input position of sorted edge `k`.
    pub perm: Vec<usize>,
    pub weights: Option<Vec<f64>>,
}

impl LoadedGraph {
    /// Reorders a matrix indexed by input edge order.
    pub fn edge_matrix(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let k = self.perm.len();
        if m.nrows() != k || m.ncols() != k {
            return Err(Error::Dimension(format!(
                "edge matrix is {}x{} for {k} edges",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(DMatrix::from_fn(k, k, |i, j| m[(self.perm[i], self.perm[j])]))
    }

    pub fn edge_spd(&self, file: &MatrixFile) -> Result<SpdMatrix> {
        SpdMatrix::new(self.edge_matrix(&file.matrix()?)?)
    }
}

impl GraphFile {
    /// Builds the oriented graph; `orientation` overrides the file's signs.
    pub fn load(&self, orientation: Option<&[i8]>) -> Result<LoadedGraph> {
        let edges: Vec<(String, String)> = self.edges.iter().map(|[a, b]| (a.clone(), b.clone())).collect();
        let (g, perm) = Graph::from_labels(self.vertices.clone(), &edges)?;
        let m = edges.len();
        let given = orientation.map(<[i8]>::to_vec).or_else(|| self.orientation.clone());
        let signs = given.unwrap_or_else(|| vec![1; m]);
        if signs.len() != m {
            return Err(Error::Dimension(format!(
                "orientation has {} signs for {m} edges",
                signs.len()
            )));
        }
        let sorted: Vec<i8> = perm
            .iter()
            .zip(g.edges())
            .map(|(&k, &(u, _))| {
                let listed_forward = g.vertices()[u] == edges[k].0;
                if listed_forward {
                    signs[k]
                } else {
                    -signs[k]
                }
            })
            .collect();
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("orientation signs must be +1 or -1".into()));
        }
        let weights = match &self.weights {
            None => None,
            Some(w) if w.len() != m => {
                return Err(Error::Dimension(format!("{} weights for {m} edges", w.len())));
            }
            Some(w) => Some(perm.iter().map(|&k| w[k]).collect()),
        };
        Ok(LoadedGraph {
            graph: g.with_orientation(&sorted)?,
            perm,
            weights,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub facets: Vec<Vec<String>>,
}

impl ComplexFile {
    pub fn load(&self) -> Result<SimplicialComplex> {
        SimplicialComplex::build(&self.facets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    pub hyperedges: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl HypergraphFile {
    /// The hypergraph and its weights in sorted hyperedge order (default 1).
    pub fn load(&self) -> Result<(Hypergraph, Vec<f64>)> {
        let (hg, perm) = Hypergraph::from_labels(self.vertices.clone(), &self.hyperedges)?;
        let raw = self.weights.clone().unwrap_or_else(|| vec![1.0; self.hyperedges.len()]);
        if raw.len() != self.hyperedges.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} hyperedges",
                raw.len(),
                self.hyperedges.len()
            )));
        }
        let w = perm.iter().map(|&k| raw[k]).collect();
        Ok((hg, w))
    }
}

/// `+,-,+` or `1,-1,1`.
pub fn parse_orientation(text: &str) -> Result<Vec<i8>> {
    text.split(',')
        .map(|t| match t.trim() {
            "+" | "1" | "+1" => Ok(1),
            "-" | "-1" => Ok(-1),
            other => Err(Error::Input(format!("bad orientation sign {other:?}"))),
        })
        .collect()
}

pub fn parse_labels(text: &str) -> Vec<String> {
    text.split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

/// `a:b` for decade steps from `a` down to `b`, or an explicit comma list.
pub fn parse_schedule(text: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Input(format!("bad epsilon {t:?}")))
    };
    if let Some((a, b)) = text.split_once(':') {
        let (a, b) = (num(a)?, num(b)?);
        if !(a > 0.0 && b > 0.0 && b <= a) {
            return Err(Error::Input(format!("bad schedule range {text:?}")));
        }
        let (la, lb) = (a.log10(), b.log10());
        let steps = (la - lb).round() as i32;
        if (la - lb - steps as f64).abs() > 1e-9 {
            return Err(Error::Input("schedule range must span whole decades".into()));
        }
        Ok((0..=steps).map(|i| 10f64.powf(la - i as f64)).collect())
    } else {
        text.split(',').map(num).collect()
    }
}
