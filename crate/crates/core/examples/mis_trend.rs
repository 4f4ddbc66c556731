//! IBP vs SA on a few random MIS instances.
//!
//! Usage: `cargo run --release -p ibp-core --example mis_trend [budget] [seeds]`

use std::time::Instant;

use ibp_core::bench::{bench, Algorithm, SolveConfig};
use ibp_core::generate::{gen_er_graph, mis_to_qubo, DEFAULT_MIS_PENALTY};

fn main() {
    let mut args = std::env::args().skip(1);
    let budget: u64 = args.next().map_or(200_000, |a| a.parse().expect("budget"));
    let seeds: u64 = args.next().map_or(5, |a| a.parse().expect("seed count"));
    for seed in 0..seeds {
        let g = gen_er_graph(500, 0.02, seed).unwrap();
        let q = mis_to_qubo(&g, DEFAULT_MIS_PENALTY).unwrap();
        let cfg = SolveConfig {
            replicas: 64,
            beta_start: 0.1,
            beta_end: 10.0,
            budget,
            checkpoints: 10,
            seed,
        };
        let start = Instant::now();
        let out = bench(&q, &[Algorithm::Ibp, Algorithm::Sa], &cfg).unwrap();
        let best = |a| out.run(a).unwrap().trace.best_energy;
        println!(
            "seed {seed}: ibp median {} best {} | sa median {} best {} | {:.1}s",
            out.final_median(Algorithm::Ibp).unwrap(),
            best(Algorithm::Ibp),
            out.final_median(Algorithm::Sa).unwrap(),
            best(Algorithm::Sa),
            start.elapsed().as_secs_f64()
        );
    }
}
