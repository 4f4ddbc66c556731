#![allow(dead_code)]

use ibp_core::generate::RandomGraph;
use ibp_core::oracle::exact_marginals;
use ibp_core::subtree::{SubTree, TreeProblem};
use ibp_core::QuboInstance;
use rand::Rng;

/// A tree-shaped instance whose fields and couplings are uniform on
/// `[-scale, scale]`, with the sub-tree covering it in index order.
pub struct RandomTree {
    pub q: QuboInstance,
    pub tree: SubTree,
}

impl RandomTree {
    pub fn new<R: Rng>(rng: &mut R, size: usize, scale: f64) -> Self {
        let g = RandomGraph::random_tree(size, rng.gen());
        let mut coef = || loop {
            let v: f64 = rng.gen_range(-scale..=scale);
            if v != 0.0 {
                break v;
            }
        };
        let fields = (0..size).map(|_| coef()).collect();
        let couplings: Vec<_> = g.edges.iter().map(|&(i, j)| (i, j, coef())).collect();
        let q = QuboInstance::new(fields, couplings).unwrap();
        let order: Vec<usize> = (0..size).collect();
        let tree = SubTree::from_nodes(&q, &order).unwrap();
        RandomTree { q, tree }
    }

    /// The tree conditioned on nothing: effective fields are the raw fields.
    pub fn problem(&self, beta: f64) -> TreeProblem<'_> {
        TreeProblem::new(&self.tree, self.q.fields().to_vec(), beta).unwrap()
    }

    /// Enumeration oracle for the tree's marginals, indexed like `tree.nodes()`.
    pub fn exact_marginals(&self, beta: f64) -> Vec<f64> {
        let p = exact_marginals(&self.q, beta).unwrap();
        self.tree.nodes().iter().map(|&v| p[v]).collect()
    }
}

/// Number of coupled pairs inside `nodes`, found by checking every pair.
pub fn induced_edge_count(q: &QuboInstance, nodes: &[usize]) -> usize {
    let mut m = 0;
    for (a, &u) in nodes.iter().enumerate() {
        for &v in &nodes[a + 1..] {
            if q.coupling(u, v) != 0.0 {
                m += 1;
            }
        }
    }
    m
}

/// True when every node of `nodes` is reachable from the first one using
/// couplings inside the set.
pub fn induced_connected(q: &QuboInstance, nodes: &[usize]) -> bool {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..nodes.len() {
            if !seen[b] && q.coupling(nodes[a], nodes[b]) != 0.0 {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Largest cut of `g` by enumerating all bipartitions.
pub fn max_cut_by_enumeration(g: &RandomGraph) -> usize {
    (0..1u64 << g.n)
        .map(|m| {
            g.edges
                .iter()
                .filter(|&&(i, j)| ((m >> i) ^ (m >> j)) & 1 == 1)
                .count()
        })
        .max()
        .unwrap()
}

/// Independence number of `g` by enumerating all subsets.
pub fn independence_number(g: &RandomGraph) -> usize {
    (0..1u64 << g.n)
        .filter(|m| g.edges.iter().all(|&(i, j)| (m >> i) & (m >> j) & 1 == 0))
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap()
}
