//! Iterative belief propagation.
//!
//! Each iteration selects one random induced sub-tree, shared by all
//! replicas. Every replica then conditions the tree on its own outside bits,
//! runs exact BP on it and redraws the tree's bits from the conditioned
//! Boltzmann law. That is a heat-bath block update, so at fixed `beta` the
//! Boltzmann distribution of the full instance is stationary.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bp::{bp_pass, map_assign_tree, sample_tree_into};
use crate::ensemble::{anneal, ReplicaEnsemble, RunConfig, RunTrace};
use crate::error::{Error, Result};
use crate::qubo::{Assignment, QuboInstance};
use crate::schedule::AnnealSchedule;
use crate::subtree::{effective_fields, SubTree, SubtreeSelector, TreeProblem};

// below this many replicas the per-step fork/join costs more than it saves
const PARALLEL_MIN_REPLICAS: usize = 4;

/// Selection scratch and the shared random stream of an IBP chain.
#[derive(Debug, Clone)]
pub struct IbpSampler {
    selector: SubtreeSelector,
    rng: ChaCha8Rng,
}

impl IbpSampler {
    pub fn new(q: &QuboInstance, seed: u64) -> Self {
        IbpSampler {
            selector: SubtreeSelector::new(q.n()),
            rng: ReplicaEnsemble::shared_rng(seed),
        }
    }

    /// One IBP iteration at `beta`. Returns the size `M` of the sub-tree.
    pub fn step(
        &mut self,
        q: &QuboInstance,
        ens: &mut ReplicaEnsemble,
        beta: f64,
    ) -> Result<usize> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {beta}")));
        }
        let tree = self.selector.select(q, &mut self.rng);
        resample_tree(q, &tree, ens, beta)?;
        Ok(tree.size())
    }
}

/// Redraws the bits of `tree` in every replica from the conditioned
/// Boltzmann law at `beta`, keeping cached energies in step.
pub fn resample_tree(
    q: &QuboInstance,
    tree: &SubTree,
    ens: &mut ReplicaEnsemble,
    beta: f64,
) -> Result<()> {
    let work = |((x, e), rng): ((&mut Assignment, &mut f64), &mut ChaCha8Rng)| {
        resample_replica(q, tree, x, e, rng, beta)
    };
    if ens.len() < PARALLEL_MIN_REPLICAS {
        ens.states
            .iter_mut()
            .zip(ens.energies.iter_mut())
            .zip(ens.rngs.iter_mut())
            .try_for_each(work)
    } else {
        ens.states
            .par_iter_mut()
            .zip(ens.energies.par_iter_mut())
            .zip(ens.rngs.par_iter_mut())
            .try_for_each(work)
    }
}

fn resample_replica<R: Rng + ?Sized>(
    q: &QuboInstance,
    tree: &SubTree,
    x: &mut Assignment,
    energy: &mut f64,
    rng: &mut R,
    beta: f64,
) -> Result<()> {
    let tp = TreeProblem {
        tree,
        eff_field: effective_fields(q, tree, x),
        beta,
    };
    let ms = bp_pass(&tp)?;
    let old: Vec<u8> = tree.nodes().iter().map(|&v| x.get(v)).collect();
    let mut new = vec![0u8; tree.size()];
    sample_tree_into(&tp, &ms, rng, &mut new);
    // the conditioned energy differs from the full one by a constant
    *energy += tp.energy(&new) - tp.energy(&old);
    for (&v, &b) in tree.nodes().iter().zip(&new) {
        x.set(v, b);
    }
    Ok(())
}

/// Overwrites the bits of `tree` in `x` with the greedy most-likely read-out
/// of the conditioned sub-problem at `beta`. Returns the energy change.
pub fn map_readout(q: &QuboInstance, tree: &SubTree, x: &mut Assignment, beta: f64) -> Result<f64> {
    let tp = TreeProblem::new(tree, effective_fields(q, tree, x), beta)?;
    let ms = bp_pass(&tp)?;
    let old: Vec<u8> = tree.nodes().iter().map(|&v| x.get(v)).collect();
    let new = map_assign_tree(&tp, &ms);
    for (&v, &b) in tree.nodes().iter().zip(&new) {
        x.set(v, b);
    }
    Ok(tp.energy(&new) - tp.energy(&old))
}

/// One IBP iteration with a fresh selector; returns the sub-tree size.
pub fn ibp_step<R: Rng + ?Sized>(
    q: &QuboInstance,
    ens: &mut ReplicaEnsemble,
    beta: f64,
    rng: &mut R,
) -> Result<usize> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let tree = SubtreeSelector::new(q.n()).select(q, rng);
    resample_tree(q, &tree, ens, beta)?;
    Ok(tree.size())
}

/// Full IBP run from random initial states. Spin updates are counted per
/// replica as the summed sizes of the selected sub-trees.
pub fn ibp_run(
    q: &QuboInstance,
    schedule: &AnnealSchedule,
    config: &RunConfig,
) -> Result<RunTrace> {
    let ens = ReplicaEnsemble::random(q, config.replicas, config.seed)?;
    let mut sampler = IbpSampler::new(q, config.seed);
    anneal(ens, schedule, config, |ens, beta| {
        sampler.step(q, ens, beta).map(|m| m as u64)
    })
}

/// Mean sub-tree size over `samples` selections, from a stream independent
/// of any run seeded with `seed`.
pub fn mean_subtree_size(q: &QuboInstance, samples: usize, seed: u64) -> f64 {
    let mut rng = ReplicaEnsemble::shared_rng(seed);
    rng.set_stream(u64::MAX);
    let mut selector = SubtreeSelector::new(q.n());
    let total: usize = (0..samples.max(1))
        .map(|_| selector.select(q, &mut rng).size())
        .sum();
    total as f64 / samples.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_er_graph, mis_to_qubo, random_sparse_qubo, RandomGraph};
    use rand::SeedableRng;

    #[test]
    fn uncoupled_instance_goes_to_optimum() {
        let q = QuboInstance::new(vec![-1.0; 6], []).unwrap();
        let mut ens = ReplicaEnsemble::random(&q, 8, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let before = ens.states.clone();
        let m = ibp_step(&q, &mut ens, 50.0, &mut rng).unwrap();
        assert_eq!(m, 1);
        let changed: Vec<usize> = (0..6)
            .filter(|&v| {
                ens.states
                    .iter()
                    .zip(&before)
                    .any(|(a, b)| a.get(v) != b.get(v))
            })
            .collect();
        assert!(changed.len() <= 1);
        // the selected variable is 1 in every replica now
        let v = (0..6).find(|&v| ens.states.iter().all(|x| x.get(v) == 1));
        assert!(v.is_some());
    }

    #[test]
    fn cached_energies_follow_steps() {
        let g = gen_er_graph(60, 0.08, 2).unwrap();
        let q = random_sparse_qubo(&g, 2);
        let mut ens = ReplicaEnsemble::random(&q, 6, 2).unwrap();
        let mut sampler = IbpSampler::new(&q, 2);
        for t in 0..200 {
            sampler.step(&q, &mut ens, 0.1 + t as f64 * 0.05).unwrap();
            assert!(ens.max_energy_drift(&q) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_beta() {
        let q = QuboInstance::new(vec![-1.0; 2], []).unwrap();
        let mut ens = ReplicaEnsemble::random(&q, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(ibp_step(&q, &mut ens, 0.0, &mut rng).is_err());
        assert!(ibp_step(&q, &mut ens, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn empty_schedule_returns_initial_state() {
        let q = mis_to_qubo(&RandomGraph::cycle(5), 2.0).unwrap();
        let sched = AnnealSchedule::from_betas(vec![]).unwrap();
        let trace = ibp_run(&q, &sched, &RunConfig::new(1, 8)).unwrap();
        let init = ReplicaEnsemble::random(&q, 1, 8).unwrap();
        assert_eq!(trace.checkpoints.len(), 1);
        assert_eq!(trace.best_energy, init.energies[0]);
        assert_eq!(trace.final_states, init.states);
    }

    #[test]
    fn spin_updates_sum_subtree_sizes() {
        // on a path every selection covers all n nodes
        let q = mis_to_qubo(&RandomGraph::path(7), 2.0).unwrap();
        let sched = AnnealSchedule::geometric(0.5, 5.0, 10).unwrap();
        let trace = ibp_run(&q, &sched, &RunConfig::new(3, 1)).unwrap();
        let marks: Vec<u64> = trace.checkpoints.iter().map(|c| c.spin_updates).collect();
        assert_eq!(marks, (0..=10).map(|t| 7 * t).collect::<Vec<_>>());
    }

    #[test]
    fn mean_subtree_size_on_a_tree_is_n() {
        let q = mis_to_qubo(&RandomGraph::random_tree(30, 4), 2.0).unwrap();
        assert_eq!(mean_subtree_size(&q, 20, 0), 30.0);
    }
}
