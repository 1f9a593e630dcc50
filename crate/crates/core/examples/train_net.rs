//! Train a 10-block network on a planted instance and compare it with the
//! classical scheme run for the same number of forward iterations.
//!
//! cargo run --release --example train_net -- [seed]

use symnmf::classical::{random_init, run_classical, ClassicalConfig};
use symnmf::graph::synth_planted;
use symnmf::linalg::fro_norm;
use symnmf::net::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let inst = synth_planted(90, 3, 0.05, seed);
    let u0 = random_init(&inst.x, inst.r, seed);
    let lambda = fro_norm(&inst.x);

    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let (params, trace) = train(&inst.x, &u0, &cfg)?;

    // 10 blocks = 10 half-steps = 5 sweeps
    let budget = ClassicalConfig {
        max_iters: cfg.num_blocks / 2,
        tol: 0.0,
        ..ClassicalConfig::new(lambda)
    };
    let (_, short) = run_classical(&inst.x, &u0, &budget)?;
    let (_, long) = run_classical(&inst.x, &u0, &ClassicalConfig::new(lambda))?;

    for r in trace.records.iter().step_by(25) {
        println!(
            "epoch {:4}  E {:.6e}  lambda {:.4}  loss {:.6e}",
            r.iteration,
            r.relative_error,
            r.lambda,
            r.loss.unwrap_or(f64::NAN)
        );
    }
    println!(
        "net E (K={})          {:.6e}",
        cfg.num_blocks,
        trace.last_error().unwrap()
    );
    println!("net lambda              {:.6}", params.lambda);
    println!(
        "classical E, {} sweeps   {:.6e}",
        budget.max_iters,
        short.last_error().unwrap()
    );
    println!(
        "classical E, converged  {:.6e} ({} sweeps)",
        long.last_error().unwrap(),
        long.len()
    );
    Ok(())
}
