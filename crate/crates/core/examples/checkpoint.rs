//! Train briefly, save a checkpoint, reload it and check the reloaded network
//! reproduces the same output bit for bit.
//!
//! cargo run --release --example checkpoint -- [path]

use symnmf::classical::random_init;
use symnmf::graph::synth_planted;
use symnmf::net::checkpoint::load_checkpoint_for;
use symnmf::net::{net_forward, save_checkpoint, train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("example.symn")
            .display()
            .to_string()
    });
    let inst = synth_planted(40, 2, 0.05, 5);
    let u0 = random_init(&inst.x, 2, 5);
    let cfg = TrainConfig {
        epochs: 50,
        ..TrainConfig::default()
    };
    let (params, trace) = train(&inst.x, &u0, &cfg)?;
    save_checkpoint(&params, &path)?;
    let back = load_checkpoint_for(&path, 40, 2)?;

    let a = net_forward(&u0, &params)?.output().clone();
    let b = net_forward(&u0, &back)?.output().clone();
    println!("saved {path} ({} bytes)", std::fs::metadata(&path)?.len());
    println!(
        "E after {} epochs: {:.6e}",
        cfg.epochs,
        trace.last_error().unwrap()
    );
    println!("params identical: {}", params == back);
    println!("outputs identical: {}", a == b);
    Ok(())
}
