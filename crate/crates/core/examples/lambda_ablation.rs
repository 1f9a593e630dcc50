//! Fixed small λ versus learned, projected λ on the same planted instance.
//! Prints the relative-error curve of each run every 20 epochs.
//!
//! cargo run --release --example lambda_ablation -- [seed]

use symnmf::classical::random_init;
use symnmf::graph::synth_planted;
use symnmf::linalg::fro_norm;
use symnmf::net::{init_params, net_forward, train, TrainConfig};
use symnmf::theory::LambdaBound;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let inst = synth_planted(90, 3, 0.05, seed);
    let u0 = random_init(&inst.x, inst.r, seed);

    // bound at the start of training: weights sit on the classical trajectory
    let lambda0 = fro_norm(&inst.x);
    let fwd = net_forward(&u0, &init_params(&inst.x, &u0, lambda0, 10)?)?;
    let bound = LambdaBound::compute(&inst.x, &u0, fwd.max_factor_norm(), 0.0)?;
    println!(
        "bound {:.4} (proximality {:.4}, sufficiency {:.4})",
        bound.value(),
        bound.proximality,
        bound.sufficiency
    );

    let mut runs = vec![("projected".to_string(), TrainConfig::default())];
    for frac in [0.1, 0.5, 1.0] {
        runs.push((
            format!("fixed {frac} x bound"),
            TrainConfig {
                lambda_init: Some(frac * bound.value()),
                learn_lambda: false,
                ..TrainConfig::default()
            },
        ));
    }
    for (name, cfg) in runs {
        let (params, trace) = train(&inst.x, &u0, &cfg)?;
        let curve: Vec<String> = trace
            .records
            .iter()
            .step_by(100)
            .map(|r| format!("{:.3}", r.relative_error))
            .collect();
        let e0 = trace.records[0].relative_error;
        let e1 = trace.last_error().unwrap();
        println!(
            "{name:>18}: lambda {:.4}  E {e0:.4} -> {e1:.4} (ratio {:.3})\n    {}",
            params.lambda,
            e1 / e0,
            curve.join(" ")
        );
    }
    Ok(())
}
