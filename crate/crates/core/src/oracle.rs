//! Exact answers for small instances and for forests.
//!
//! Everything here is deliberately naive: full enumeration over `2^n` states
//! or a direct leaf-elimination DP. These are the references the solvers are
//! tested against.

use crate::error::{Error, Result};
use crate::qubo::{Assignment, QuboInstance};

pub const MIN_ENUMERATION_LIMIT: usize = 24;
pub const DISTRIBUTION_LIMIT: usize = 20;

/// Assignment whose first variable is the most significant bit of `k`, so
/// increasing `k` walks assignments in lexicographic order.
fn lex_assignment(n: usize, k: u64) -> Assignment {
    Assignment::from_bits((0..n).map(|i| ((k >> (n - 1 - i)) & 1) as u8))
}

/// Exhaustive minimum. Ties go to the lexicographically smallest assignment.
pub fn brute_force_min(q: &QuboInstance) -> Result<(Assignment, f64)> {
    let n = q.n();
    if n > MIN_ENUMERATION_LIMIT {
        return Err(Error::Capacity {
            n,
            limit: MIN_ENUMERATION_LIMIT,
        });
    }
    let mut best = (
        Assignment::zeros(n),
        q.energy_unchecked(&Assignment::zeros(n)),
    );
    for k in 1..1u64 << n {
        let x = lex_assignment(n, k);
        let e = q.energy_unchecked(&x);
        if e < best.1 {
            best = (x, e);
        }
    }
    Ok(best)
}

/// Boltzmann law `P(x) = e^{-beta E(x)} / Z` over all `2^n` states.
///
/// State `k` is the assignment with `x[i]` equal to bit `i` of `k`.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub n: usize,
    pub energies: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl ExactDistribution {
    pub fn index_of(x: &Assignment) -> usize {
        x.bits()
            .iter()
            .enumerate()
            .map(|(i, &b)| (b as usize) << i)
            .sum()
    }

    pub fn probability(&self, x: &Assignment) -> f64 {
        self.probabilities[Self::index_of(x)]
    }

    /// `P(x_i = 1)` for every variable.
    pub fn marginals(&self) -> Vec<f64> {
        let mut p1 = vec![0.0; self.n];
        for (k, &p) in self.probabilities.iter().enumerate() {
            for (i, slot) in p1.iter_mut().enumerate() {
                if (k >> i) & 1 == 1 {
                    *slot += p;
                }
            }
        }
        p1
    }

    /// Total-variation distance to an empirical histogram over state indices.
    pub fn tv_distance(&self, counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        0.5 * self
            .probabilities
            .iter()
            .zip(counts)
            .map(|(&p, &c)| (p - c as f64 / total as f64).abs())
            .sum::<f64>()
    }
}

pub fn boltzmann_distribution(q: &QuboInstance, beta: f64) -> Result<ExactDistribution> {
    let n = q.n();
    if n > DISTRIBUTION_LIMIT {
        return Err(Error::Capacity {
            n,
            limit: DISTRIBUTION_LIMIT,
        });
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let energies: Vec<f64> = (0..1u64 << n)
        .map(|k| q.energy_unchecked(&Assignment::from_mask(n, k)))
        .collect();
    let shift = energies
        .iter()
        .map(|&e| -beta * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energies
        .iter()
        .map(|&e| (-beta * e - shift).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(ExactDistribution {
        n,
        energies,
        probabilities: weights.into_iter().map(|w| w / z).collect(),
    })
}

pub fn exact_marginals(q: &QuboInstance, beta: f64) -> Result<Vec<f64>> {
    Ok(boltzmann_distribution(q, beta)?.marginals())
}

/// Exact minimum of a QUBO whose coupling graph is a forest, by repeatedly
/// folding a leaf into its neighbor.
pub fn tree_dp_min(q: &QuboInstance) -> Result<f64> {
    let n = q.n();
    // a forest on n nodes with c components has n - c edges
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for &(i, j, _) in q.couplings() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a == b {
            return Err(Error::invalid(format!(
                "coupling graph has a cycle through ({i}, {j})"
            )));
        }
        parent[a] = b;
    }

    // cost[v][b]: best energy of everything folded into v, given x_v = b
    let mut cost: Vec<[f64; 2]> = q.fields().iter().map(|&h| [0.0, h]).collect();
    let mut degree: Vec<usize> = (0..n).map(|v| q.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut leaves: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut total = 0.0;

    while let Some(v) = leaves.pop() {
        if removed[v] || degree[v] != 1 {
            continue;
        }
        let (nbrs, ws) = q.neighbors(v);
        let (u, w) = nbrs
            .iter()
            .zip(ws)
            .find(|(&u, _)| !removed[u])
            .map(|(&u, &w)| (u, w))
            .expect("leaf has one live neighbor");
        let [c0, c1] = cost[v];
        cost[u][0] += c0.min(c1);
        cost[u][1] += c0.min(c1 + w);
        removed[v] = true;
        degree[u] -= 1;
        if degree[u] == 1 {
            leaves.push(u);
        }
    }
    for v in 0..n {
        if !removed[v] {
            total += cost[v][0].min(cost[v][1]);
        }
    }
    Ok(total)
}
