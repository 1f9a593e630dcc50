//! Graph clustering of Gaussian blobs: similarity graph, a few network
//! restarts (lowest training loss wins), row argmax, then accuracy / NMI /
//! purity against the generating labels. The classical scheme is run through
//! the same pipeline for comparison.
//!
//! cargo run --release --example cluster_blobs -- [seed]

use symnmf::cli::{cluster_pipeline, RunConfig, Solver};
use symnmf::graph::gaussian_blobs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let (points, truth) = gaussian_blobs(150, 3, 10.0, 1.0, seed);

    for solver in [Solver::Net, Solver::Scheme] {
        let mut cfg = RunConfig {
            solver,
            seed,
            ..RunConfig::default()
        };
        cfg.classical.max_iters = 5000;
        let out = cluster_pipeline(&cfg, &points, Some(&truth))?;
        println!(
            "{solver:?} (restart {}, E = {:.4e})\n{}",
            out.chosen_restart,
            out.fit.trace.last_error().unwrap(),
            out.result.to_report()
        );
    }
    Ok(())
}
