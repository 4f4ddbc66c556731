//! Replica ensembles and the annealing loop shared by both solvers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::{Assignment, QuboInstance};
use crate::schedule::AnnealSchedule;

/// `R` independent replicas, each with its own state, cached energy and
/// random stream.
///
/// Replica `r` draws from ChaCha stream `r + 1` of the master seed; stream 0
/// is left for work shared by all replicas (sub-tree selection). Results
/// therefore do not depend on how replicas are scheduled across threads.
#[derive(Debug, Clone)]
pub struct ReplicaEnsemble {
    pub states: Vec<Assignment>,
    pub energies: Vec<f64>,
    pub rngs: Vec<ChaCha8Rng>,
}

impl ReplicaEnsemble {
    /// Fair-coin random initial states.
    pub fn random(q: &QuboInstance, replicas: usize, seed: u64) -> Result<Self> {
        if replicas == 0 {
            return Err(Error::invalid("need at least one replica"));
        }
        let mut rngs: Vec<ChaCha8Rng> = (0..replicas)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64 + 1);
                rng
            })
            .collect();
        let states: Vec<Assignment> = rngs
            .iter_mut()
            .map(|rng| Assignment::from_bits((0..q.n()).map(|_| rng.gen::<bool>() as u8)))
            .collect();
        let energies = states.iter().map(|x| q.energy_unchecked(x)).collect();
        Ok(ReplicaEnsemble {
            states,
            energies,
            rngs,
        })
    }

    /// Ensemble with the given starting states.
    pub fn from_states(q: &QuboInstance, states: Vec<Assignment>, seed: u64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("need at least one replica"));
        }
        let energies = states
            .iter()
            .map(|x| q.energy(x))
            .collect::<Result<Vec<_>>>()?;
        let rngs = (0..states.len())
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64 + 1);
                rng
            })
            .collect();
        Ok(ReplicaEnsemble {
            states,
            energies,
            rngs,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Random stream for work shared by all replicas.
    pub fn shared_rng(seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        rng
    }

    /// Largest gap between a cached energy and a fresh recomputation.
    pub fn max_energy_drift(&self, q: &QuboInstance) -> f64 {
        self.states
            .iter()
            .zip(&self.energies)
            .map(|(x, &e)| (q.energy_unchecked(x) - e).abs())
            .fold(0.0, f64::max)
    }

    /// Index of the lowest cached energy, first one on ties.
    fn argmin(&self) -> usize {
        let mut best = 0;
        for (r, &e) in self.energies.iter().enumerate() {
            if e < self.energies[best] {
                best = r;
            }
        }
        best
    }
}

/// Linear interpolation between the closest order statistics of `sorted`
/// (ascending). `q` is a fraction in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Ensemble statistics after a given amount of work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    /// Cumulative spin updates per replica.
    pub spin_updates: u64,
    /// Lowest energy seen by any replica so far.
    pub best: f64,
    /// Median of the current replica energies.
    pub median: f64,
    /// 1st percentile of the current replica energies.
    pub p01: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub checkpoints: Vec<Checkpoint>,
    pub final_states: Vec<Assignment>,
    pub final_energies: Vec<f64>,
    pub best_state: Assignment,
    pub best_energy: f64,
    /// Solver iterations performed (sub-trees for IBP, sweeps for SA).
    pub iterations: u64,
}

impl RunTrace {
    pub fn total_spin_updates(&self) -> u64 {
        self.checkpoints.last().map_or(0, |c| c.spin_updates)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub replicas: usize,
    pub seed: u64,
    /// Record statistics each time the per-replica spin-update count crosses
    /// a multiple of this value. The initial and final states are always
    /// recorded.
    pub checkpoint_every: u64,
    /// When set, the run stops as soon as this many spin updates per replica
    /// are reached, holding at the last schedule entry if the schedule runs
    /// out first. When unset, exactly one iteration per schedule entry.
    pub budget: Option<u64>,
}

impl RunConfig {
    pub fn new(replicas: usize, seed: u64) -> Self {
        RunConfig {
            replicas,
            seed,
            checkpoint_every: 1,
            budget: None,
        }
    }

    pub fn checkpoint_every(mut self, every: u64) -> Self {
        self.checkpoint_every = every;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    fn validate(&self, schedule: &AnnealSchedule) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::invalid("need at least one replica"));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::invalid("checkpoint interval must be positive"));
        }
        if matches!(self.budget, Some(b) if b > 0) && schedule.is_empty() {
            return Err(Error::invalid(
                "a positive budget needs a non-empty schedule",
            ));
        }
        Ok(())
    }
}

fn checkpoint(ens: &ReplicaEnsemble, spin_updates: u64, best: f64) -> Checkpoint {
    let mut sorted = ens.energies.clone();
    sorted.sort_by(f64::total_cmp);
    Checkpoint {
        spin_updates,
        best,
        median: percentile(&sorted, 0.5),
        p01: percentile(&sorted, 0.01),
    }
}

/// Runs `step` once per schedule entry (or until the budget is met) and
/// collects the trace. `step` returns the per-replica spin updates it did.
pub(crate) fn anneal<F>(
    mut ens: ReplicaEnsemble,
    schedule: &AnnealSchedule,
    config: &RunConfig,
    mut step: F,
) -> Result<RunTrace>
where
    F: FnMut(&mut ReplicaEnsemble, f64) -> Result<u64>,
{
    config.validate(schedule)?;
    let every = config.checkpoint_every;

    let first = ens.argmin();
    let mut best_energy = ens.energies[first];
    let mut best_state = ens.states[first].clone();
    let mut spin_updates = 0u64;
    let mut checkpoints = vec![checkpoint(&ens, 0, best_energy)];
    let mut next_mark = every;
    let mut iterations = 0u64;

    loop {
        let done = match config.budget {
            Some(b) => spin_updates >= b,
            None => iterations as usize >= schedule.len(),
        };
        if done {
            break;
        }
        let beta = schedule
            .at(iterations as usize)
            .expect("schedule checked non-empty");
        spin_updates += step(&mut ens, beta)?;
        iterations += 1;

        let r = ens.argmin();
        if ens.energies[r] < best_energy {
            best_energy = ens.energies[r];
            best_state.clone_from(&ens.states[r]);
        }
        if spin_updates >= next_mark {
            checkpoints.push(checkpoint(&ens, spin_updates, best_energy));
            next_mark = (spin_updates / every + 1) * every;
        }
    }
    if checkpoints.last().map(|c| c.spin_updates) != Some(spin_updates) {
        checkpoints.push(checkpoint(&ens, spin_updates, best_energy));
    }

    Ok(RunTrace {
        checkpoints,
        final_states: ens.states,
        final_energies: ens.energies,
        best_state,
        best_energy,
        iterations,
    })
}
