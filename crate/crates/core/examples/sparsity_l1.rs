//! Effect of the ℓ1 penalty on the trained factor: sparse factor (SF) and
//! relative error for a few values of `gamma_l1` on one planted instance.
//!
//! cargo run --release --example sparsity_l1 -- [seed]

use symnmf::classical::random_init;
use symnmf::graph::synth_planted;
use symnmf::metrics::sparse_factor;
use symnmf::net::{net_forward, train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let inst = synth_planted(90, 3, 0.05, seed);
    let u0 = random_init(&inst.x, inst.r, seed);

    println!("gamma_l1      E             SF");
    for gamma in [0.0, 1e-5, 1e-4, 1e-3, 1e-2] {
        let cfg = TrainConfig {
            gamma_l1: gamma,
            seed,
            ..TrainConfig::default()
        };
        let (params, trace) = train(&inst.x, &u0, &cfg)?;
        let u = net_forward(&u0, &params)?.output().clone();
        println!(
            "{gamma:<10.0e}  {:.6e}  {:.4}",
            trace.last_error().unwrap(),
            sparse_factor(&u)
        );
    }
    Ok(())
}
