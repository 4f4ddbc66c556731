//! Budgeted runs and IBP-vs-SA comparisons with CSV output.
//!
//! Both solvers get the same spin-update budget per replica and the same
//! geometric `beta` range. SA needs `ceil(budget / n)` sweeps; IBP's schedule
//! length is the budget divided by a pilot estimate of the mean sub-tree
//! size. Runs stop at the first iteration that meets the budget.

use std::fmt::Write as _;

use crate::ensemble::{RunConfig, RunTrace};
use crate::error::{Error, Result};
use crate::ibp::{ibp_run, mean_subtree_size};
use crate::qubo::QuboInstance;
use crate::sa::sa_run;
use crate::schedule::AnnealSchedule;

pub const CSV_HEADER: &str = "spin_updates,best,median,p01";
pub const BENCH_CSV_HEADER: &str = "algo,spin_updates,best,median,p01";

const PILOT_SELECTIONS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Ibp,
    Sa,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ibp => "ibp",
            Algorithm::Sa => "sa",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ibp" => Ok(Algorithm::Ibp),
            "sa" => Ok(Algorithm::Sa),
            other => Err(Error::invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub replicas: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Spin updates per replica.
    pub budget: u64,
    /// Number of evenly spaced checkpoints over the budget.
    pub checkpoints: u64,
    pub seed: u64,
}

impl SolveConfig {
    fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::invalid("need at least one replica"));
        }
        if self.checkpoints == 0 {
            return Err(Error::invalid("need at least one checkpoint"));
        }
        AnnealSchedule::geometric(self.beta_start, self.beta_end, 1)?;
        Ok(())
    }

    fn checkpoint_every(&self) -> u64 {
        (self.budget / self.checkpoints).max(1)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub algorithm: Algorithm,
    pub schedule_len: usize,
    pub trace: RunTrace,
}

/// Schedule length that spends `budget` spin updates per replica.
pub fn schedule_steps(q: &QuboInstance, algorithm: Algorithm, budget: u64, seed: u64) -> usize {
    if budget == 0 {
        return 0;
    }
    let per_step = match algorithm {
        Algorithm::Sa => q.n() as f64,
        Algorithm::Ibp => mean_subtree_size(q, PILOT_SELECTIONS, seed),
    };
    ((budget as f64 / per_step).ceil() as usize).max(1)
}

pub fn solve(q: &QuboInstance, algorithm: Algorithm, config: &SolveConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let steps = schedule_steps(q, algorithm, config.budget, config.seed);
    let schedule = if steps == 0 {
        AnnealSchedule::from_betas(Vec::new())?
    } else {
        AnnealSchedule::geometric(config.beta_start, config.beta_end, steps)?
    };
    let run = RunConfig {
        replicas: config.replicas,
        seed: config.seed,
        checkpoint_every: config.checkpoint_every(),
        budget: Some(config.budget),
    };
    let trace = match algorithm {
        Algorithm::Ibp => ibp_run(q, &schedule, &run)?,
        Algorithm::Sa => sa_run(q, &schedule, &run)?,
    };
    Ok(SolveOutcome {
        algorithm,
        schedule_len: schedule.len(),
        trace,
    })
}

/// `spin_updates,best,median,p01` rows with a header.
pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in &trace.checkpoints {
        writeln!(out, "{},{},{},{}", c.spin_updates, c.best, c.median, c.p01).unwrap();
    }
    out
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub runs: Vec<SolveOutcome>,
}

impl BenchOutcome {
    pub fn run(&self, algorithm: Algorithm) -> Option<&SolveOutcome> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }

    pub fn final_median(&self, algorithm: Algorithm) -> Option<f64> {
        self.run(algorithm)?
            .trace
            .checkpoints
            .last()
            .map(|c| c.median)
    }

    /// SA spin updates needed to first reach IBP's final median, divided by
    /// IBP's total spin updates. `None` if SA never gets there (or either
    /// run is missing).
    pub fn sa_to_ibp_ratio(&self) -> Option<f64> {
        let ibp = &self.run(Algorithm::Ibp)?.trace;
        let sa = &self.run(Algorithm::Sa)?.trace;
        let target = ibp.checkpoints.last()?.median;
        let reached = sa.checkpoints.iter().find(|c| c.median <= target)?;
        Some(reached.spin_updates as f64 / ibp.total_spin_updates().max(1) as f64)
    }

    /// One CSV with an `algo` column, runs in the order they were made.
    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(BENCH_CSV_HEADER);
        out.push('\n');
        for run in &self.runs {
            for c in &run.trace.checkpoints {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    run.algorithm.name(),
                    c.spin_updates,
                    c.best,
                    c.median,
                    c.p01
                )
                .unwrap();
            }
        }
        out
    }
}

/// Runs each algorithm with the same budget, `beta` range and seed.
pub fn bench(
    q: &QuboInstance,
    algorithms: &[Algorithm],
    config: &SolveConfig,
) -> Result<BenchOutcome> {
    if algorithms.is_empty() {
        return Err(Error::invalid("no algorithms selected"));
    }
    let runs = algorithms
        .iter()
        .map(|&a| solve(q, a, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchOutcome { runs })
}
