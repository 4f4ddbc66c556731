//! Benchmark instance families built on Erdős–Rényi graphs.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::{Assignment, QuboInstance};

/// Simple undirected graph: edges are `(i, j)` with `i < j`, no repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RandomGraph {
    /// Builds a graph from an edge list, normalizing orientation and
    /// rejecting loops, duplicates and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at {a}")));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        if out.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate edge"));
        }
        Ok(RandomGraph { n, edges: out })
    }

    pub fn cycle(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).expect("valid clique")
    }

    /// Uniformly random recursive tree: node `i > 0` attaches to a uniform
    /// earlier node.
    pub fn random_tree(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(n, (1..n).map(|i| (rng.gen_range(0..i), i))).expect("valid tree")
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    /// Number of edges with exactly one endpoint set in `x`.
    pub fn cut_size(&self, x: &Assignment) -> usize {
        self.edges
            .iter()
            .filter(|&&(i, j)| x.get(i) != x.get(j))
            .count()
    }

    /// Number of edges with both endpoints set in `x`.
    pub fn violated_edges(&self, x: &Assignment) -> usize {
        self.edges
            .iter()
            .filter(|&&(i, j)| x.get(i) == 1 && x.get(j) == 1)
            .count()
    }

    /// Edge-list text: header `graph <n> <m>` then `i j` lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "graph {} {}", self.n, self.edges.len()).unwrap();
        for (i, j) in &self.edges {
            writeln!(out, "{i} {j}").unwrap();
        }
        out
    }
}

/// G(n, p): every pair is an edge independently with probability `p`.
pub fn gen_er_graph(n: usize, p: f64, seed: u64) -> Result<RandomGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "edge probability {p} outside [0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("graph needs at least one node"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Ok(RandomGraph { n, edges })
}

/// Max-Cut with unit weights: `h[i] = -deg(i)`, `w = 2` per edge, so that
/// `E(x) = -cut(x)`.
pub fn maxcut_to_qubo(g: &RandomGraph) -> QuboInstance {
    let fields = g.degrees().into_iter().map(|d| -(d as f64)).collect();
    QuboInstance::new(fields, g.edges.iter().map(|&(i, j)| (i, j, 2.0)))
        .expect("graph edges are valid couplings")
}

pub const DEFAULT_MIS_PENALTY: f64 = 2.0;

/// Maximum independent set: `h[i] = -1`, `w = penalty` per edge. Any
/// `penalty > 1` makes every minimizer a maximum independent set.
pub fn mis_to_qubo(g: &RandomGraph, penalty: f64) -> Result<QuboInstance> {
    if !(penalty > 1.0) || !penalty.is_finite() {
        return Err(Error::invalid(format!(
            "MIS penalty must be a finite value > 1, got {penalty}"
        )));
    }
    QuboInstance::new(
        vec![-1.0; g.n],
        g.edges.iter().map(|&(i, j)| (i, j, penalty)),
    )
}

/// Random sparse QUBO on the edges of `g`: every field and every edge
/// coupling is uniform on `[-1, 1]`. Exact zeros are redrawn so the coupling
/// pattern is exactly `g`.
pub fn random_sparse_qubo(g: &RandomGraph, seed: u64) -> QuboInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let v: f64 = rng.gen_range(-1.0..=1.0);
        if v != 0.0 {
            break v;
        }
    };
    let fields = (0..g.n).map(|_| draw()).collect();
    let couplings: Vec<_> = g.edges.iter().map(|&(i, j)| (i, j, draw())).collect();
    QuboInstance::new(fields, couplings).expect("graph edges are valid couplings")
}

/// Benchmark family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemClass {
    MaxCut,
    Mis,
    Random,
}

impl ProblemClass {
    pub fn name(self) -> &'static str {
        match self {
            ProblemClass::MaxCut => "maxcut",
            ProblemClass::Mis => "mis",
            ProblemClass::Random => "random",
        }
    }
}

impl std::str::FromStr for ProblemClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxcut" => Ok(ProblemClass::MaxCut),
            "mis" => Ok(ProblemClass::Mis),
            "random" => Ok(ProblemClass::Random),
            other => Err(Error::invalid(format!("unknown problem class {other:?}"))),
        }
    }
}

/// Generator spec: graph `G(n, p)` from `seed`, then the chosen encoding.
/// The random family draws its coefficients from a stream derived from the
/// same seed.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorSpec {
    pub class: ProblemClass,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub penalty: f64,
}

impl GeneratorSpec {
    pub fn graph(&self) -> Result<RandomGraph> {
        gen_er_graph(self.n, self.p, self.seed)
    }

    pub fn build(&self) -> Result<(RandomGraph, QuboInstance)> {
        let g = self.graph()?;
        let q = match self.class {
            ProblemClass::MaxCut => maxcut_to_qubo(&g),
            ProblemClass::Mis => mis_to_qubo(&g, self.penalty)?,
            ProblemClass::Random => random_sparse_qubo(&g, self.seed ^ 0x9E37_79B9_7F4A_7C15),
        };
        Ok((g, q))
    }
}
