use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};

use ipl::complex::Graph;
use ipl::conformality::{
    self, inverse_conformality_check, make_conformality_pair, partition_gadget, solve_partition, strong_conformality,
    verify_conformality_bounds, weak_conformality_with, WeakOptions,
};
use ipl::error::{Error, Result};
use ipl::io::{self, ComplexFile, GraphFile, HypergraphFile, LoadedGraph, MatrixFile, VectorFile};
use ipl::isoperimetry::{self as iso, Limits};
use ipl::laplacian::{self as lap, ClassicalKind, IplSetup};
use ipl::linalg::{matrix_to_rows, SpdMatrix};
use ipl::report::{self, csv_number, table_csv};
use ipl::{fuzz, laplacian};

const REPORT_FORMAT: u32 = 1;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "ipl",
    version = concat!(env!("CARGO_PKG_VERSION"), " (report format 1)"),
    about = "Inner product Laplacians, conformality, and spectral graph inequalities"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Worker threads for subset enumerations
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Emit CSV instead of JSON
    #[arg(long, global = true)]
    csv: bool,
    /// Run exhaustive enumerations beyond their size caps
    #[arg(long, global = true)]
    force: bool,
    /// Largest matrix whose weak conformality is enumerated exactly
    #[arg(long, global = true, default_value_t = conformality::DEFAULT_WEAK_CAP)]
    weak_cap: usize,
    /// Largest vertex count for exhaustive conductance
    #[arg(long, global = true, default_value_t = iso::DEFAULT_CUT_CAP)]
    cut_cap: usize,
}

impl Global {
    fn limits(&self) -> Limits {
        Limits {
            weak_cap: self.weak_cap,
            cut_cap: self.cut_cap,
            force: self.force,
            threads: self.threads.max(1),
            ..Limits::default()
        }
    }

    fn weak(&self) -> WeakOptions {
        self.limits().weak()
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Spectrum of the inner product Laplacian of a graph or complex
    Spectrum(SpectrumArgs),
    /// Orthogonal decomposition into the images of the two Laplacian terms and the kernel
    Hodge(HodgeArgs),
    /// Classical graph Laplacians as inner product Laplacians
    Recover(RecoverArgs),
    /// Semi-Hodge Laplacian of an arbitrary incidence matrix
    SemiHodge(SemiHodgeArgs),
    /// Inner product Laplacian reproducing a hypergraph Laplacian
    HypergraphToIpl(HypergraphArgs),
    /// Laplacians of an ergodic Markov chain
    Digraph(DigraphArgs),
    /// Strong and weak conformality of an SPD matrix
    Conformality(ConformalityArgs),
    /// Exact inner product conductance
    Conductance(ConductanceArgs),
    /// Neumann eigenvalue of a subset and its weighted-limit sweep
    Neumann(NeumannArgs),
    /// Dirichlet eigenvalues of a subset
    Dirichlet(SubsetArgs),
    /// S-local conductance and the Neumann eigenvalue bound
    LocalConductance(SubsetArgs),
    /// Weak conformality of the Partition gadget matrix
    Gadget(GadgetArgs),
    /// SPD matrix with prescribed weak and strong conformality
    Pair(PairArgs),
    /// Run a seeded check over random instances
    Fuzz(FuzzArgs),
    /// Check an inequality and report its margins
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Verify {
    /// Both Cheeger inequalities
    Cheeger(GraphIpArgs),
    /// The mixing inequality for one pair of sets or all pairs
    Eml(EmlArgs),
    /// Spectral radius bound from conformality and compatibility
    Radius(RadiusArgs),
    /// Quadratic form bounds from weak conformality
    Bounds(BoundsArgs),
    /// Conformality of a matrix and of its inverse agree
    Inverse(MatrixArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum IpKind {
    /// M_V = diag(deg), M_E = I
    Normalized,
    /// M_V = I, M_E = I
    Combinatorial,
}

#[derive(Args, Debug, Serialize)]
struct GraphIpArgs {
    /// Graph JSON file
    #[arg(long)]
    graph: PathBuf,
    /// Vertex inner product ({"rows": ...}); identity if omitted
    #[arg(long, conflicts_with = "kind")]
    mv: Option<PathBuf>,
    /// Edge inner product, rows in graph-file edge order; identity if omitted
    #[arg(long, conflicts_with = "kind")]
    me: Option<PathBuf>,
    /// Standard inner products instead of files
    #[arg(long, value_enum)]
    kind: Option<IpKind>,
    /// Edge signs in graph-file edge order, e.g. +,-
    #[arg(long, allow_hyphen_values = true)]
    orientation: Option<String>,
}

struct GraphIp {
    loaded: LoadedGraph,
    mv: SpdMatrix,
    me: SpdMatrix,
}

impl GraphIpArgs {
    fn load(&self) -> Result<GraphIp> {
        let file: GraphFile = io::read_json(&self.graph)?;
        let orientation = self.orientation.as_deref().map(io::parse_orientation).transpose()?;
        let loaded = file.load(orientation.as_deref())?;
        let g = &loaded.graph;
        let (mv, me) = match self.kind {
            Some(IpKind::Normalized) => iso::normalized_inner_products(g)?,
            Some(IpKind::Combinatorial) => (SpdMatrix::identity(g.n()), SpdMatrix::identity(g.m())),
            None => {
                let mv = match &self.mv {
                    Some(p) => io::read_json::<MatrixFile>(p)?.spd()?,
                    None => SpdMatrix::identity(g.n()),
                };
                let me = match &self.me {
                    Some(p) => loaded.edge_spd(&io::read_json(p)?)?,
                    None => SpdMatrix::identity(g.m()),
                };
                (mv, me)
            }
        };
        Ok(GraphIp { loaded, mv, me })
    }
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    ip: Option<GraphIpArgs>,
    /// Complex JSON file (instead of --graph)
    #[arg(long, conflicts_with = "graph")]
    complex: Option<PathBuf>,
    /// Comma-separated inner product files, one per dimension; identity if omitted
    #[arg(long, requires = "complex")]
    inner: Option<String>,
    /// Face dimension of the Laplacian
    #[arg(long, default_value_t = 0)]
    dim: usize,
}

#[derive(Args, Debug, Serialize)]
struct HodgeArgs {
    /// Complex JSON file
    #[arg(long)]
    complex: PathBuf,
    /// Comma-separated inner product files, one per dimension; identity if omitted
    #[arg(long)]
    inner: Option<String>,
    /// Face dimension
    #[arg(long, default_value_t = 0)]
    dim: usize,
}

#[derive(Args, Debug, Serialize)]
struct RecoverArgs {
    #[arg(long, value_enum)]
    kind: RecoverKind,
    /// Graph JSON file; its "weights" are used when present
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RecoverKind {
    Combinatorial,
    Normalized,
    Signless,
    NormalizedSignless,
}

impl From<RecoverKind> for ClassicalKind {
    fn from(k: RecoverKind) -> Self {
        match k {
            RecoverKind::Combinatorial => ClassicalKind::Combinatorial,
            RecoverKind::Normalized => ClassicalKind::Normalized,
            RecoverKind::Signless => ClassicalKind::Signless,
            RecoverKind::NormalizedSignless => ClassicalKind::NormalizedSignless,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SemiHodgeArgs {
    /// Incidence matrix ({"rows": ...}), vertices by edges
    #[arg(long)]
    boundary: PathBuf,
    #[arg(long)]
    mv: Option<PathBuf>,
    #[arg(long)]
    me: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct HypergraphArgs {
    /// Hypergraph JSON file
    #[arg(long)]
    hypergraph: PathBuf,
    /// Kernel vector of the hypergraph Laplacian; all ones if omitted
    #[arg(long)]
    pi: Option<PathBuf>,
    /// Diagonal D~ inside the adjacency; all ones if omitted
    #[arg(long)]
    dt: Option<PathBuf>,
    /// Diagonal D of the Laplacian; chosen so that pi is in the kernel if omitted
    #[arg(long)]
    d: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DigraphArgs {
    /// Row-stochastic transition matrix ({"rows": ...})
    #[arg(long)]
    transition: PathBuf,
    /// Comma-separated state labels
    #[arg(long)]
    labels: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct ConformalityArgs {
    /// Matrix file ({"rows": ...})
    #[arg(conflicts_with = "matrix")]
    path: Option<PathBuf>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Also run the sampled lower-bound oracles with this many trials
    #[arg(long, requires = "seed")]
    sampled: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct MatrixArgs {
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Test vector (JSON array)
    #[arg(long)]
    vector: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ConductanceArgs {
    #[command(flatten)]
    ip: GraphIpArgs,
    /// Include every enumerated cut
    #[arg(long)]
    table: bool,
}

#[derive(Args, Debug, Serialize)]
struct SubsetArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated vertex labels
    #[arg(long)]
    subset: String,
}

#[derive(Args, Debug, Serialize)]
struct NeumannArgs {
    #[command(flatten)]
    subset: SubsetArgs,
    /// Decade range a:b or comma list of epsilon values
    #[arg(long, default_value = "1e-1:1e-8")]
    schedule: String,
}

#[derive(Args, Debug, Serialize)]
struct EmlArgs {
    #[command(flatten)]
    ip: Option<GraphIpArgs>,
    /// Use the built-in three-part example graph with this k
    #[arg(long, conflicts_with = "graph")]
    example: Option<usize>,
    /// Comma-separated labels of X
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Comma-separated labels of Y
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Check every pair of vertex subsets
    #[arg(long, conflicts_with_all = ["x", "y"])]
    all_pairs: bool,
}

#[derive(Args, Debug, Serialize)]
struct RadiusArgs {
    #[command(flatten)]
    ip: Option<GraphIpArgs>,
    /// Incidence matrix file instead of a graph
    #[arg(long, conflicts_with = "graph")]
    boundary: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GadgetArgs {
    /// Comma-separated positive integers
    #[arg(long)]
    instance: String,
}

#[derive(Args, Debug, Serialize)]
struct PairArgs {
    #[arg(long)]
    rho_weak: f64,
    #[arg(long)]
    rho_strong: f64,
    #[arg(long)]
    dim: usize,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Radius,
    Cheeger,
    Eml,
    Hodge,
    Neumann,
    Digraph,
    Conformality,
}

#[derive(Args, Debug, Serialize)]
struct FuzzArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Seed of the first instance; instance i uses seed + i
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Largest vertex count (or matrix dimension) generated
    #[arg(long, default_value_t = 7)]
    max_n: usize,
}

/// Fields of the serialized arguments that name input files.
const INPUT_ROLES: &[&str] = &[
    "graph",
    "mv",
    "me",
    "complex",
    "inner",
    "boundary",
    "hypergraph",
    "pi",
    "dt",
    "d",
    "transition",
    "path",
    "matrix",
    "vector",
];

#[derive(Serialize)]
struct RunConfig {
    command: String,
    input_paths: BTreeMap<String, Value>,
    flags: BTreeMap<String, Value>,
    version: String,
    report_format: u32,
}

fn flatten_args(value: &Value, inputs: &mut BTreeMap<String, Value>, flags: &mut BTreeMap<String, Value>) {
    if let Value::Object(map) = value {
        for (k, v) in map {
            match v {
                Value::Object(_) => flatten_args(v, inputs, flags),
                Value::Null => {}
                _ if INPUT_ROLES.contains(&k.as_str()) => {
                    inputs.insert(k.clone(), v.clone());
                }
                _ => {
                    flags.insert(k.clone(), v.clone());
                }
            }
        }
    }
}

impl RunConfig {
    fn of(cli: &Cli) -> Self {
        let cmd = serde_json::to_value(&cli.command).expect("arguments serialize");
        let (mut names, mut args) = (Vec::new(), &cmd);
        while let Value::Object(map) = args {
            match map.iter().next() {
                Some((name, inner)) if map.len() == 1 && is_command_name(name) => {
                    names.push(name.clone());
                    args = inner;
                }
                _ => break,
            }
        }
        let mut input_paths = BTreeMap::new();
        let mut flags = BTreeMap::new();
        flatten_args(args, &mut input_paths, &mut flags);
        flatten_args(
            &serde_json::to_value(&cli.global).expect("flags serialize"),
            &mut input_paths,
            &mut flags,
        );
        RunConfig {
            command: names.join(" "),
            input_paths,
            flags,
            version: env!("CARGO_PKG_VERSION").into(),
            report_format: REPORT_FORMAT,
        }
    }
}

fn is_command_name(name: &str) -> bool {
    [
        "spectrum",
        "hodge",
        "recover",
        "semi-hodge",
        "hypergraph-to-ipl",
        "digraph",
        "conformality",
        "conductance",
        "neumann",
        "dirichlet",
        "local-conductance",
        "gadget",
        "pair",
        "fuzz",
        "verify",
        "cheeger",
        "eml",
        "radius",
        "bounds",
        "inverse",
    ]
    .contains(&name)
}

/// A computed report and whether its verification passed.
struct Outcome {
    value: Value,
    pass: bool,
    /// Replaces the flattened key/value CSV when present.
    table: Option<String>,
}

impl Outcome {
    fn new<T: Serialize>(report: &T, pass: bool) -> Self {
        Self {
            value: serde_json::to_value(report).expect("reports serialize"),
            pass,
            table: None,
        }
    }

    fn computed<T: Serialize>(report: &T) -> Self {
        Self::new(report, true)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            let text = if cli.global.csv {
                out.table
                    .clone()
                    .unwrap_or_else(|| report::to_csv(&with_config(&cli, out.value.clone())))
            } else {
                let mut s = report::value_to_json(&with_config(&cli, out.value));
                s.push('\n');
                s
            };
            print!("{text}");
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn with_config(cli: &Cli, value: Value) -> Value {
    let config = serde_json::to_value(RunConfig::of(cli)).expect("config serializes");
    match value {
        Value::Object(mut map) => {
            map.insert("run_config".into(), config);
            Value::Object(map)
        }
        other => json!({"result": other, "run_config": config}),
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Hodge(a) => {
            let setup = complex_setup(&a.complex, a.inner.as_deref())?;
            let h = lap::hodge_decomposition(&setup, a.dim)?;
            let pass = h.cross_gram <= lap::CHECK_SLACK && h.spectrum_residual <= lap::CHECK_SLACK;
            Ok(Outcome::new(&h, pass))
        }
        Command::Recover(a) => {
            let loaded = io::read_json::<GraphFile>(&a.graph)?.load(None)?;
            let r = lap::recover_classical(a.kind.into(), &loaded.graph, loaded.weights.as_deref())?;
            let pass = r.max_entry_error <= 1e-12;
            Ok(Outcome::new(
                &json!({"recovery": r, "graph": lap::GraphSummary::of(&loaded.graph)}),
                pass,
            ))
        }
        Command::SemiHodge(a) => {
            let b = io::read_json::<MatrixFile>(&a.boundary)?.matrix()?;
            let mv = optional_spd(a.mv.as_deref(), b.nrows())?;
            let me = optional_spd(a.me.as_deref(), b.ncols())?;
            Ok(Outcome::computed(&lap::semi_hodge(&b, &mv, &me)?))
        }
        Command::HypergraphToIpl(a) => hypergraph(a),
        Command::Digraph(a) => {
            let p = io::read_json::<MatrixFile>(&a.transition)?.matrix()?;
            let labels = a.labels.as_deref().map(io::parse_labels);
            let r = lap::digraph_laplacian(&p, labels.as_deref())?;
            let pass = r.report.pass;
            Ok(Outcome::new(&r, pass))
        }
        Command::Conformality(a) => conformality_cmd(a, g),
        Command::Conductance(a) => {
            let ip = a.ip.load()?;
            let c = iso::conductance(&ip.loaded.graph, &ip.mv, &ip.me, a.table, &g.limits())?;
            let mut out = Outcome::computed(&c);
            if let (true, Some(t)) = (g.csv, &c.table) {
                let rows: Vec<Vec<String>> = t.iter().map(|e| vec![e.set.join(" "), csv_number(e.phi)]).collect();
                out.table = Some(table_csv(&["set", "phi"], &rows));
            }
            Ok(out)
        }
        Command::Neumann(a) => {
            let (graph, s) = subset_input(&a.subset)?;
            let schedule = io::parse_schedule(&a.schedule)?;
            let r = iso::neumann_limit_experiment(&graph, &s, &schedule)?;
            let mut out = Outcome::new(&r, r.converged && r.kernel_ok);
            if g.csv {
                let opt = |x: Option<f64>| x.map(csv_number).unwrap_or_default();
                let rows: Vec<Vec<String>> = r
                    .epsilon_trace
                    .iter()
                    .map(|s| {
                        vec![
                            csv_number(s.epsilon),
                            opt(s.lambda2),
                            opt(s.gap),
                            opt(s.vector_gap),
                            s.kernel_dim.map(|k| k.to_string()).unwrap_or_default(),
                        ]
                    })
                    .collect();
                out.table = Some(table_csv(
                    &["epsilon", "lambda2", "gap", "vector_gap", "kernel_dim"],
                    &rows,
                ));
            }
            Ok(out)
        }
        Command::Dirichlet(a) => {
            let (graph, s) = subset_input(a)?;
            let values = iso::dirichlet_eigenvalues(&graph, &s)?;
            Ok(Outcome::computed(
                &json!({"subset": labels_of(&graph, &s), "eigenvalues": values}),
            ))
        }
        Command::LocalConductance(a) => {
            let (graph, s) = subset_input(a)?;
            let r = iso::s_local_conductance(&graph, &s, &g.limits())?;
            let pass = r.pass;
            Ok(Outcome::new(&r, pass))
        }
        Command::Gadget(a) => gadget(a, g),
        Command::Pair(a) => {
            let m = make_conformality_pair(a.rho_weak, a.rho_strong, a.dim)?;
            let r = weak_conformality_with(&m, &g.weak())?;
            let pass = (r.rho_weak - a.rho_weak).abs() <= 1e-8 && (r.rho_strong - a.rho_strong).abs() <= 1e-8;
            Ok(Outcome::new(
                &json!({"matrix": {"rows": matrix_to_rows(m.matrix())}, "rho_weak": r.rho_weak, "rho_strong": r.rho_strong}),
                pass,
            ))
        }
        Command::Fuzz(a) => fuzz_cmd(a, g),
        Command::Verify(v) => verify(v, g),
    }
}

fn optional_spd(path: Option<&Path>, n: usize) -> Result<SpdMatrix> {
    match path {
        Some(p) => io::read_json::<MatrixFile>(p)?.spd(),
        None => Ok(SpdMatrix::identity(n)),
    }
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    Ok(io::read_json::<VectorFile>(path)?.values())
}

fn labels_of(g: &Graph, s: &[usize]) -> Vec<String> {
    s.iter().map(|&i| g.vertices()[i].clone()).collect()
}

fn subset_input(a: &SubsetArgs) -> Result<(Graph, Vec<usize>)> {
    let loaded = io::read_json::<GraphFile>(&a.graph)?.load(None)?;
    let s = loaded.graph.vertex_set(&io::parse_labels(&a.subset))?;
    Ok((loaded.graph, s))
}

fn complex_setup(path: &Path, inner: Option<&str>) -> Result<IplSetup> {
    let c = io::read_json::<ComplexFile>(path)?.load()?;
    let mats = match inner {
        Some(list) => {
            let files: Vec<&str> = list.split(',').map(str::trim).collect();
            if files.len() != c.dimension() + 1 {
                return Err(Error::Dimension(format!(
                    "{} inner products for a complex of dimension {}",
                    files.len(),
                    c.dimension()
                )));
            }
            files
                .iter()
                .map(|f| io::read_json::<MatrixFile>(Path::new(f))?.spd())
                .collect::<Result<Vec<_>>>()?
        }
        None => (0..=c.dimension())
            .map(|i| SpdMatrix::identity(c.num_faces(i)))
            .collect(),
    };
    IplSetup::new(c, mats)
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    if let Some(path) = &a.complex {
        let setup = complex_setup(path, a.inner.as_deref())?;
        let r = lap::inner_product_laplacian(&setup, a.dim)?;
        let faces = setup.complex().face_labels(a.dim);
        let mut v = serde_json::to_value(&r).expect("serializes");
        v["faces"] = json!(faces);
        return Ok(Outcome {
            value: v,
            pass: true,
            table: None,
        });
    }
    let Some(ipa) = &a.ip else {
        return Err(Error::Input("one of --graph or --complex is required".into()));
    };
    if a.dim != 0 {
        return Err(Error::Input("graph spectra use --dim 0".into()));
    }
    let ip = ipa.load()?;
    let r = lap::graph_laplacian(&ip.loaded.graph, &ip.mv, &ip.me)?;
    let mut v = serde_json::to_value(&r).expect("serializes");
    v["graph"] = serde_json::to_value(graph_summary(&ip.loaded.graph)).expect("serializes");
    Ok(Outcome {
        value: v,
        pass: true,
        table: None,
    })
}

fn graph_summary(g: &Graph) -> Value {
    json!({
        "vertices": g.vertices(),
        "edges": g.edges().iter().map(|&(u, v)| [g.vertices()[u].clone(), g.vertices()[v].clone()]).collect::<Vec<_>>(),
        "orientation": g.orientation(),
    })
}

fn hypergraph(a: &HypergraphArgs) -> Result<Outcome> {
    let (hg, w) = io::read_json::<HypergraphFile>(&a.hypergraph)?.load()?;
    let n = hg.n();
    let pi = match &a.pi {
        Some(p) => read_vector(p)?,
        None => vec![1.0; n],
    };
    let dt = match &a.dt {
        Some(p) => read_vector(p)?,
        None => vec![1.0; n],
    };
    let d = match &a.d {
        Some(p) => read_vector(p)?,
        None => lap::kernel_consistent_degrees(&hg, &dt, &w, &pi)?,
    };
    let r = lap::hypergraph_to_ipl(&hg, &d, &dt, &w, &pi)?;
    let pass = r.report.pass;
    Ok(Outcome::new(&r, pass))
}

fn conformality_cmd(a: &ConformalityArgs, g: &Global) -> Result<Outcome> {
    let path = a
        .path
        .as_ref()
        .or(a.matrix.as_ref())
        .ok_or_else(|| Error::Input("a matrix file is required".into()))?;
    let m = io::read_json::<MatrixFile>(path)?.spd()?;
    let r = weak_conformality_with(&m, &g.weak())?;
    let mut v = serde_json::to_value(&r).expect("serializes");
    let mut pass = true;
    if let (Some(trials), Some(seed)) = (a.sampled, a.seed) {
        let sw = conformality::weak_conformality_sampled(&m, trials, seed)?;
        let ss = conformality::strong_conformality_sampled(&m, trials, seed)?;
        pass = sw <= r.rho_weak + 1e-9 && ss <= r.rho_strong + 1e-9;
        v["sampled_weak"] = json!(sw);
        v["sampled_strong"] = json!(ss);
        v["pass"] = json!(pass);
    }
    Ok(Outcome {
        value: v,
        pass,
        table: None,
    })
}

fn gadget(a: &GadgetArgs, g: &Global) -> Result<Outcome> {
    let instance: Vec<u64> = a
        .instance
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Input(format!("bad instance entry {t:?}")))
        })
        .collect::<Result<_>>()?;
    let gadget = partition_gadget(&instance)?;
    let r = weak_conformality_with(&gadget.gadget_matrix, &g.weak())?;
    let split = solve_partition(&instance);
    let gap = gadget.affirmative_value - r.rho_weak;
    let pass = match split {
        Some(_) => gap.abs() <= 1e-9,
        None => gap > 1e-6,
    };
    Ok(Outcome::new(
        &json!({
            "instance": instance,
            "half_sum": gadget.half_sum,
            "affirmative_value": gadget.affirmative_value,
            "rho_weak": r.rho_weak,
            "witness_S": r.witness_s,
            "partition": split,
            "gap": gap,
            "pass": pass,
        }),
        pass,
    ))
}

fn verify(v: &Verify, g: &Global) -> Result<Outcome> {
    let limits = g.limits();
    match v {
        Verify::Cheeger(a) => {
            let ip = a.load()?;
            let r = iso::verify_cheeger(&ip.loaded.graph, &ip.mv, &ip.me, &limits)?;
            let pass = r.pass;
            Ok(Outcome::new(&r, pass))
        }
        Verify::Eml(a) => {
            let (graph, mv, me) = match (a.example, &a.ip) {
                (Some(k), _) => {
                    let ex = iso::eml_example(k)?;
                    (ex.graph, ex.mv, ex.me)
                }
                (None, Some(ipa)) => {
                    let ip = ipa.load()?;
                    (ip.loaded.graph, ip.mv, ip.me)
                }
                (None, None) => return Err(Error::Input("one of --graph or --example is required".into())),
            };
            if a.all_pairs {
                let r = iso::verify_eml_batch(&graph, &mv, &me, &limits)?;
                let pass = r.pass;
                return Ok(Outcome::new(&r, pass));
            }
            let (Some(x), Some(y)) = (&a.x, &a.y) else {
                return Err(Error::Input(
                    "--x and --y are required unless --all-pairs is given".into(),
                ));
            };
            let xs = graph.vertex_set(&io::parse_labels(x))?;
            let ys = graph.vertex_set(&io::parse_labels(y))?;
            let r = iso::verify_eml(&graph, &mv, &me, &xs, &ys, &limits)?;
            let pass = r.pass;
            Ok(Outcome::new(&r, pass))
        }
        Verify::Radius(a) => {
            let (b, mv, me) = match (&a.boundary, &a.ip) {
                (Some(p), _) => {
                    let b = io::read_json::<MatrixFile>(p)?.matrix()?;
                    let mv = SpdMatrix::identity(b.nrows());
                    let me = SpdMatrix::identity(b.ncols());
                    (b, mv, me)
                }
                (None, Some(ipa)) => {
                    let ip = ipa.load()?;
                    let setup = IplSetup::for_graph(&ip.loaded.graph, ip.mv.clone(), ip.me.clone())?;
                    (setup.boundary(1)?, ip.mv, ip.me)
                }
                (None, None) => return Err(Error::Input("one of --graph or --boundary is required".into())),
            };
            let r = lap::verify_radius_bound(&b, &mv, &me, &g.weak())?;
            let pass = r.pass;
            Ok(Outcome::new(&r, pass))
        }
        Verify::Bounds(a) => {
            let m = io::read_json::<MatrixFile>(&a.matrix)?.spd()?;
            let x = DVector::from_vec(read_vector(&a.vector)?);
            let r = verify_conformality_bounds(&m, &x, &g.weak())?;
            let pass = r.pass;
            Ok(Outcome::new(&r, pass))
        }
        Verify::Inverse(a) => {
            let m = io::read_json::<MatrixFile>(&a.matrix)?.spd()?;
            let r = inverse_conformality_check(&m, &g.weak())?;
            let pass = r.pass;
            Ok(Outcome::new(&r, pass))
        }
    }
}

#[derive(Serialize)]
struct FuzzCase {
    seed: u64,
    pass: bool,
    margin: f64,
}

#[derive(Serialize)]
struct FuzzReport {
    suite: Suite,
    cases: Vec<FuzzCase>,
    failures: usize,
    worst_margin: f64,
    pass: bool,
}

fn fuzz_cmd(a: &FuzzArgs, g: &Global) -> Result<Outcome> {
    let limits = g.limits();
    let mut cases = Vec::new();
    for i in 0..a.count as u64 {
        let seed = a.seed.wrapping_add(i);
        let (pass, margin) = match a.suite {
            Suite::Radius => {
                let c = fuzz::graph_case(seed, a.max_n, true);
                let setup = IplSetup::for_graph(&c.graph, c.mv.clone(), c.me.clone())?;
                let r = lap::verify_radius_bound(&setup.boundary(1)?, &c.mv, &c.me, &limits.weak())?;
                (r.pass, r.margin)
            }
            Suite::Cheeger => {
                let c = fuzz::graph_case(seed, a.max_n, true);
                let r = iso::verify_cheeger(&c.graph, &c.mv, &c.me, &limits)?;
                (r.pass, r.lower_margin.min(r.upper_margin))
            }
            Suite::Eml => {
                let c = fuzz::graph_case(seed, a.max_n, true);
                let r = iso::verify_eml_batch(&c.graph, &c.mv, &c.me, &limits)?;
                (r.pass, r.worst_margin)
            }
            Suite::Hodge => {
                let (c, inner) = fuzz::complex_case(seed, a.max_n, 3);
                let setup = IplSetup::new(c, inner)?;
                let mut worst: f64 = 0.0;
                for d in 0..=setup.dimension() {
                    let h = lap::hodge_decomposition(&setup, d)?;
                    worst = worst.max(h.cross_gram);
                }
                (worst <= lap::CHECK_SLACK, lap::CHECK_SLACK - worst)
            }
            Suite::Neumann => {
                let c = fuzz::neumann_case(seed)?;
                let r = iso::neumann_limit_experiment(&c.graph, &c.subset, &iso::default_schedule())?;
                let gap = r.final_gap.unwrap_or(f64::INFINITY);
                (r.converged && r.kernel_ok, iso::NEUMANN_LAMBDA_TOL - gap)
            }
            Suite::Digraph => {
                let p = fuzz::ergodic_chain(seed, a.max_n);
                let r = laplacian::digraph_laplacian(&p, None)?;
                let worst = r.report.ipl_residual.max(r.report.normalized_ipl_residual);
                (r.report.pass, r.report.tolerance - worst)
            }
            Suite::Conformality => {
                let m = fuzz::spd_case(seed, a.max_n);
                let exact = weak_conformality_with(&m, &limits.weak())?;
                let sampled = conformality::weak_conformality_sampled(&m, 10_000, seed)?;
                let strong = strong_conformality(&m)?;
                let margin = (exact.rho_weak - sampled).min(strong - exact.rho_weak);
                (margin >= -1e-9, margin)
            }
        };
        cases.push(FuzzCase { seed, pass, margin });
    }
    let failures = cases.iter().filter(|c| !c.pass).count();
    let worst_margin = cases.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let report = FuzzReport {
        suite: a.suite,
        cases,
        failures,
        worst_margin,
        pass: failures == 0,
    };
    Ok(Outcome::new(&report, failures == 0))
}
