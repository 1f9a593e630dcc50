//! Certify one block: build a weight `P` within relative distance ε of the
//! classical value, pick λ above `a² + 4aε`, then sample inputs in the ε-ball
//! and compare every output distance with `Cε`.
//!
//! cargo run --release --example certify_bounds -- [eps]

use rand::Rng;
use rand_distr::StandardNormal;
use symnmf::classical::{random_init, shifted_product};
use symnmf::graph::synth_planted;
use symnmf::linalg::{fro_norm, spectral_norm_exact, DenseMatrix};
use symnmf::seeded_rng;
use symnmf::theory::{condition_number_inv, proximality_lambda_bound, verify_proximality};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps: f64 = std::env::args().nth(1).map_or(Ok(0.05), |s| s.parse())?;
    let inst = synth_planted(30, 3, 0.05, 1);
    let x = &inst.x;
    let u = random_init(x, 3, 1);
    let u = u.scale(1.0 / fro_norm(&u));

    // every sample satisfies ‖U‖_F ≤ ‖Ũ‖_F + ε√r
    let a = 1.0 + eps * 3f64.sqrt();
    let lambda = 2.0 * proximality_lambda_bound(a, eps);

    // P = (X + λI)Ũ + D with ‖D‖_F = ε/2 · ‖X + λI‖₂ ‖Ũ‖_F
    let reference = shifted_product(x, &u, lambda)?;
    let mut rng = seeded_rng(2);
    let d = DenseMatrix::from_fn(30, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
    let target = 0.5 * eps * spectral_norm_exact(&x.shift_diag(lambda)?)? * fro_norm(&u);
    let mut p = reference.clone();
    p.add_scaled(target / fro_norm(&d), &d)?;

    let report = verify_proximality(x, &u, &p, lambda, eps, 2000, 3)?;
    print!("{}", report.to_report());
    let (cond, cond_bound) = condition_number_inv(&u, lambda)?;
    println!("cond((UᵀU+λI)⁻¹) = {cond:.6} <= {cond_bound:.6}");
    println!(
        "largest distance {:.3e} vs C·eps {:.3e}",
        report.max_distance,
        report.c * eps
    );
    Ok(())
}
