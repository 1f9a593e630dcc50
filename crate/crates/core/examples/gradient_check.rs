//! Hand-written backward pass against central finite differences of the
//! training loss, on a tiny random problem.
//!
//! cargo run --release --example gradient_check

use rand::Rng;
use symnmf::classical::random_init;
use symnmf::linalg::DenseMatrix;
use symnmf::net::{init_params, loss, net_backward, net_forward, NetParams, TrainConfig};
use symnmf::seeded_rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = seeded_rng(11);
    let n = 6;
    let b = DenseMatrix::from_fn(n, 3, |_, _| rng.random_range(0.0..1.0));
    let x = symnmf::linalg::matmul(&b, &b.transpose())?;
    let u0 = random_init(&x, 2, 3);
    let cfg = TrainConfig {
        num_blocks: 3,
        beta: 0.1,
        ..TrainConfig::default()
    };
    let mut params = init_params(&x, &u0, 2.0, cfg.num_blocks)?;
    // move off the classical weights so the regularizer contributes
    for p in &mut params.blocks {
        for v in p.as_mut_slice() {
            *v += rng.random_range(-0.05..0.05);
        }
    }

    let f = |p: &NetParams| -> f64 {
        let fwd = net_forward(&u0, p).unwrap();
        loss(&x, &fwd, p, &cfg).unwrap()
    };
    let grads = net_backward(&x, &net_forward(&u0, &params)?, &params, &cfg)?;
    let h = 1e-6;

    let mut worst = 0.0f64;
    for (k, g) in grads.d_blocks.iter().enumerate() {
        for idx in 0..g.as_slice().len() {
            let (mut plus, mut minus) = (params.clone(), params.clone());
            plus.blocks[k].as_mut_slice()[idx] += h;
            minus.blocks[k].as_mut_slice()[idx] -= h;
            let fd = (f(&plus) - f(&minus)) / (2.0 * h);
            let an = g.as_slice()[idx];
            worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-7));
        }
    }
    let (mut plus, mut minus) = (params.clone(), params.clone());
    plus.lambda += h;
    minus.lambda -= h;
    let fd = (f(&plus) - f(&minus)) / (2.0 * h);
    println!(
        "dL/dlambda  analytic {:.10e}  numeric {fd:.10e}",
        grads.d_lambda
    );
    println!("largest relative error over all block weights: {worst:.3e}");
    Ok(())
}
