//! Simulated annealing with single-spin Metropolis updates.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::ensemble::{anneal, ReplicaEnsemble, RunConfig, RunTrace};
use crate::error::Result;
use crate::qubo::{Assignment, QuboInstance};
use crate::schedule::AnnealSchedule;

const PARALLEL_MIN_REPLICAS: usize = 4;

/// Outcome of one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    pub accepted: usize,
    /// Energy change over the sweep.
    pub delta_energy: f64,
}

/// One Metropolis sweep over all variables in a fresh random order. A flip
/// with energy change `d` is accepted with probability `min(1, e^{-beta d})`.
pub fn sa_sweep<R: Rng + ?Sized>(
    q: &QuboInstance,
    x: &mut Assignment,
    beta: f64,
    rng: &mut R,
) -> SweepStats {
    let mut order: Vec<usize> = (0..q.n()).collect();
    sweep_in_order(q, x, beta, rng, &mut order)
}

fn sweep_in_order<R: Rng + ?Sized>(
    q: &QuboInstance,
    x: &mut Assignment,
    beta: f64,
    rng: &mut R,
    order: &mut [usize],
) -> SweepStats {
    order.shuffle(rng);
    let mut stats = SweepStats {
        accepted: 0,
        delta_energy: 0.0,
    };
    for &i in order.iter() {
        let d = q.delta_energy_unchecked(x, i);
        if d <= 0.0 || rng.gen::<f64>() < (-beta * d).exp() {
            x.flip(i);
            stats.accepted += 1;
            stats.delta_energy += d;
        }
    }
    stats
}

/// One sweep per schedule entry on every replica. Spin updates are counted
/// as `n` per sweep per replica.
pub fn sa_run(q: &QuboInstance, schedule: &AnnealSchedule, config: &RunConfig) -> Result<RunTrace> {
    let ens = ReplicaEnsemble::random(q, config.replicas, config.seed)?;
    let n = q.n();
    anneal(ens, schedule, config, |ens, beta| {
        let work = |((x, e), rng): ((&mut Assignment, &mut f64), &mut _)| {
            let mut order: Vec<usize> = (0..n).collect();
            *e += sweep_in_order(q, x, beta, rng, &mut order).delta_energy;
        };
        if ens.len() < PARALLEL_MIN_REPLICAS {
            ens.states
                .iter_mut()
                .zip(ens.energies.iter_mut())
                .zip(ens.rngs.iter_mut())
                .for_each(work);
        } else {
            ens.states
                .par_iter_mut()
                .zip(ens.energies.par_iter_mut())
                .zip(ens.rngs.par_iter_mut())
                .for_each(work);
        }
        Ok(n as u64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_er_graph, maxcut_to_qubo, mis_to_qubo, RandomGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frozen_at_local_optimum() {
        let q = mis_to_qubo(&RandomGraph::cycle(6), 2.0).unwrap();
        // alternating set is a strict local optimum: every flip costs >= 1
        let mut x = Assignment::from_bits([1, 0, 1, 0, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let s = sa_sweep(&q, &mut x, 1e9, &mut rng);
            assert_eq!(s.accepted, 0);
        }
        assert_eq!(x, Assignment::from_bits([1, 0, 1, 0, 1, 0]));
    }

    #[test]
    fn downhill_moves_always_accepted() {
        let q = QuboInstance::new(vec![-1.0; 5], []).unwrap();
        let mut x = Assignment::zeros(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sa_sweep(&q, &mut x, 1e-3, &mut rng);
        assert_eq!(s.accepted, 5);
        assert_eq!(s.delta_energy, -5.0);
        assert_eq!(x, Assignment::from_bits([1; 5]));
    }

    #[test]
    fn two_state_acceptance_rate() {
        let q = QuboInstance::new(vec![-1.0], []).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let mut flips = 0;
        for _ in 0..trials {
            let mut x = Assignment::from_bits([1]);
            flips += sa_sweep(&q, &mut x, 1.0, &mut rng).accepted;
        }
        let p = (-1f64).exp();
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        let rate = flips as f64 / trials as f64;
        assert!((rate - p).abs() < 3.0 * sd, "rate {rate} vs {p}");
    }

    #[test]
    fn run_accounting_and_cache() {
        let g = gen_er_graph(40, 0.1, 3).unwrap();
        let q = maxcut_to_qubo(&g);
        let sched = AnnealSchedule::geometric(0.1, 3.0, 25).unwrap();
        let trace = sa_run(&q, &sched, &RunConfig::new(5, 3).checkpoint_every(200)).unwrap();
        let marks: Vec<u64> = trace.checkpoints.iter().map(|c| c.spin_updates).collect();
        assert_eq!(marks, vec![0, 200, 400, 600, 800, 1000]);
        for (x, &e) in trace.final_states.iter().zip(&trace.final_energies) {
            assert!((q.energy(x).unwrap() - e).abs() < 1e-9);
        }
        assert_eq!(q.energy(&trace.best_state).unwrap(), trace.best_energy);
    }

    #[test]
    fn uncoupled_instance_reaches_minus_n() {
        let q = QuboInstance::new(vec![-1.0; 30], []).unwrap();
        let sched = AnnealSchedule::geometric(1.0, 20.0, 20).unwrap();
        let trace = sa_run(&q, &sched, &RunConfig::new(4, 5)).unwrap();
        assert_eq!(trace.best_energy, -30.0);
    }
}
