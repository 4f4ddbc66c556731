//! Exact belief propagation on a conditioned sub-tree.
//!
//! Messages are log-ratios `z[k->i] = ln(m[k->i](1) / m[k->i](0))`. On a tree
//! the fixed point is reached by one leaves-to-root sweep followed by one
//! root-to-leaves sweep. With
//!
//! ```text
//! S[k->i] = -beta * b[k] + sum_{l in N(k) \ i} z[l->k]
//! z[k->i] = softplus(S[k->i] - beta * w[i,k]) - softplus(S[k->i])
//! ```
//!
//! where `softplus(t) = ln(1 + e^t)` is evaluated without overflow. Marginals
//! and the conditional sampling law are logistic functions of the summed
//! incoming messages.
//!
//! [`bp_pass_reference`] iterates the probability-domain update from uniform
//! messages until it stops moving. It exists to cross-check the log-domain
//! path on moderate `beta`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::subtree::TreeProblem;

/// Numerically stable `ln(1 + e^t)`.
#[inline]
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Logistic function `1 / (1 + e^{-t})`.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Log-ratio messages on both directions of every tree edge.
///
/// Indexed by the child's local index `k >= 1`: `up[k]` is the message from
/// `k` to its parent, `down[k]` from the parent to `k`. `inflow[k]` caches the
/// sum of the messages from `k`'s children.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSet {
    pub beta: f64,
    up: Vec<f64>,
    down: Vec<f64>,
    inflow: Vec<f64>,
}

impl MessageSet {
    fn empty(size: usize, beta: f64) -> Self {
        MessageSet {
            beta,
            up: vec![0.0; size],
            down: vec![0.0; size],
            inflow: vec![0.0; size],
        }
    }

    /// Number of directed messages, `2 (M - 1)`.
    pub fn len(&self) -> usize {
        2 * self.up.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Message from local node `from` to its tree neighbor `to`.
    pub fn get(&self, tp: &TreeProblem<'_>, from: usize, to: usize) -> Option<f64> {
        if tp.tree.parent(from) == Some(to) {
            Some(self.up[from])
        } else if tp.tree.parent(to) == Some(from) {
            Some(self.down[to])
        } else {
            None
        }
    }

    /// All messages as `(from, to, z)` in local indices.
    pub fn iter<'s>(
        &'s self,
        tp: &'s TreeProblem<'_>,
    ) -> impl Iterator<Item = (usize, usize, f64)> + 's {
        (1..tp.size()).flat_map(move |k| {
            let p = tp.tree.parent(k).expect("non-root has a parent");
            [(k, p, self.up[k]), (p, k, self.down[k])]
        })
    }

    /// Log-odds of local node `k` given every tree neighbor.
    #[inline]
    fn total_field(&self, tp: &TreeProblem<'_>, k: usize) -> f64 {
        -tp.beta * tp.eff_field[k] + self.inflow[k] + self.down[k]
    }

    /// Log-odds of local node `k` given every tree neighbor except its parent.
    #[inline]
    fn cavity_field(&self, tp: &TreeProblem<'_>, k: usize) -> f64 {
        -tp.beta * tp.eff_field[k] + self.inflow[k]
    }

    pub fn all_finite(&self) -> bool {
        self.up.iter().chain(&self.down).all(|z| z.is_finite())
    }
}

/// Probability that a variable equals 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeBelief {
    pub p1: f64,
}

fn check_inputs(tp: &TreeProblem<'_>) -> Result<()> {
    if !tp.beta.is_finite() || tp.beta <= 0.0 {
        return Err(Error::Numeric(format!(
            "beta = {} is not a positive finite value",
            tp.beta
        )));
    }
    if let Some(k) = tp.eff_field.iter().position(|b| !b.is_finite()) {
        return Err(Error::Numeric(format!(
            "effective field of local node {k} is not finite"
        )));
    }
    if let Some(k) = (1..tp.size()).find(|&k| !tp.tree.parent_weight(k).is_finite()) {
        return Err(Error::Numeric(format!(
            "coupling above local node {k} is not finite"
        )));
    }
    Ok(())
}

#[inline]
fn edge_message(cavity: f64, beta_w: f64) -> f64 {
    softplus(cavity - beta_w) - softplus(cavity)
}

/// Exact messages by one upward and one downward sweep.
pub fn bp_pass(tp: &TreeProblem<'_>) -> Result<MessageSet> {
    check_inputs(tp)?;
    let m = tp.size();
    let tree = tp.tree;
    let beta = tp.beta;
    let mut ms = MessageSet::empty(m, beta);

    // parents precede children, so reverse order visits children first
    for k in (1..m).rev() {
        let p = tree.parent(k).expect("non-root has a parent");
        let z = edge_message(ms.cavity_field(tp, k), beta * tree.parent_weight(k));
        ms.up[k] = z;
        ms.inflow[p] += z;
    }
    for k in 1..m {
        let p = tree.parent(k).expect("non-root has a parent");
        let cavity = ms.total_field(tp, p) - ms.up[k];
        ms.down[k] = edge_message(cavity, beta * tree.parent_weight(k));
    }
    Ok(ms)
}

/// Probability-domain BP iterated to convergence from uniform messages.
///
/// Valid while `beta * |w|` and `beta * |b|` stay moderate (roughly below
/// 50); beyond that the products underflow.
pub fn bp_pass_reference(tp: &TreeProblem<'_>) -> Result<MessageSet> {
    check_inputs(tp)?;
    let m = tp.size();
    let beta = tp.beta;

    // directed edges (from, to, w) and, per node, the ids of incoming edges
    let mut edges = Vec::new();
    let mut incoming = vec![Vec::new(); m];
    for k in 1..m {
        let p = tp.tree.parent(k).unwrap();
        let w = tp.tree.parent_weight(k);
        incoming[p].push(edges.len());
        edges.push((k, p, w));
        incoming[k].push(edges.len());
        edges.push((p, k, w));
    }

    let mut mu = vec![[0.5f64, 0.5]; edges.len()];
    let cap = 10 * m;
    let mut converged = edges.is_empty();
    for _ in 0..cap {
        if converged {
            break;
        }
        let mut next = mu.clone();
        let mut change = 0.0f64;
        for (e, &(from, to, w)) in edges.iter().enumerate() {
            let mut out = [0.0f64; 2];
            for (a, slot) in out.iter_mut().enumerate() {
                for b in 0..2 {
                    let mut prod = (-beta * w * (a * b) as f64).exp()
                        * (-beta * tp.eff_field[from] * b as f64).exp();
                    for &f in &incoming[from] {
                        if edges[f].0 != to {
                            prod *= mu[f][b];
                        }
                    }
                    *slot += prod;
                }
            }
            let norm = out[0] + out[1];
            let new = [out[0] / norm, out[1] / norm];
            change = change
                .max((new[0] - mu[e][0]).abs())
                .max((new[1] - mu[e][1]).abs());
            next[e] = new;
        }
        mu = next;
        converged = change < 1e-12;
    }
    if !converged {
        return Err(Error::Convergence { sweeps: cap });
    }

    let mut ms = MessageSet::empty(m, beta);
    for (e, &(from, to, _)) in edges.iter().enumerate() {
        let z = (mu[e][1] / mu[e][0]).ln();
        if tp.tree.parent(from) == Some(to) {
            ms.up[from] = z;
            ms.inflow[to] += z;
        } else {
            ms.down[to] = z;
        }
    }
    Ok(ms)
}

/// Marginal of local node `k`.
pub fn marginal(tp: &TreeProblem<'_>, ms: &MessageSet, k: usize) -> Result<NodeBelief> {
    if k >= tp.size() {
        return Err(Error::invalid(format!(
            "local node {k} not in a tree of size {}",
            tp.size()
        )));
    }
    Ok(NodeBelief {
        p1: sigmoid(ms.total_field(tp, k)),
    })
}

/// `P(x_k = 1 | x_parent = parent_bit)` for non-root local node `k`.
#[inline]
pub fn conditional_p1(tp: &TreeProblem<'_>, ms: &MessageSet, k: usize, parent_bit: u8) -> f64 {
    let coupling = if parent_bit == 1 {
        tp.beta * tp.tree.parent_weight(k)
    } else {
        0.0
    };
    sigmoid(ms.cavity_field(tp, k) - coupling)
}

/// Exact sample of the conditioned sub-problem's Boltzmann law, as local
/// bits in tree order. The root is drawn from its marginal, then each node
/// from its conditional given the already drawn parent.
pub fn sample_tree<R: Rng + ?Sized>(tp: &TreeProblem<'_>, ms: &MessageSet, rng: &mut R) -> Vec<u8> {
    let mut bits = vec![0u8; tp.size()];
    sample_tree_into(tp, ms, rng, &mut bits);
    bits
}

pub(crate) fn sample_tree_into<R: Rng + ?Sized>(
    tp: &TreeProblem<'_>,
    ms: &MessageSet,
    rng: &mut R,
    bits: &mut [u8],
) {
    let p_root = sigmoid(ms.total_field(tp, 0));
    bits[0] = (rng.gen::<f64>() < p_root) as u8;
    for k in 1..tp.size() {
        let p = tp.tree.parent(k).unwrap();
        let p1 = conditional_p1(tp, ms, k, bits[p]);
        bits[k] = (rng.gen::<f64>() < p1) as u8;
    }
}

/// Greedy read-out along the sampling order: the most likely value at every
/// step, ties going to 0.
pub fn map_assign_tree(tp: &TreeProblem<'_>, ms: &MessageSet) -> Vec<u8> {
    let mut bits = vec![0u8; tp.size()];
    bits[0] = (ms.total_field(tp, 0) > 0.0) as u8;
    for k in 1..tp.size() {
        let p = tp.tree.parent(k).unwrap();
        let coupling = if bits[p] == 1 {
            tp.beta * tp.tree.parent_weight(k)
        } else {
            0.0
        };
        bits[k] = (ms.cavity_field(tp, k) - coupling > 0.0) as u8;
    }
    bits
}
