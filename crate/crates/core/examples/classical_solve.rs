//! The penalized alternating scheme and projected gradient descent on a
//! planted instance, with their relative-error curves.
//!
//! cargo run --release --example classical_solve -- [seed]

use symnmf::classical::{default_pgd_step, random_init, run_classical, run_pgd, ClassicalConfig};
use symnmf::graph::synth_planted;
use symnmf::linalg::fro_norm;
use symnmf::metrics::ClusteringResult;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let inst = synth_planted(90, 3, 0.05, seed);
    let u0 = random_init(&inst.x, inst.r, seed);
    let cfg = ClassicalConfig::new(fro_norm(&inst.x));

    let (u_scheme, scheme) = run_classical(&inst.x, &u0, &cfg)?;
    let step = default_pgd_step(&inst.x)?;
    let (u_pgd, pgd) = run_pgd(&inst.x, &u0, step, &cfg)?;

    println!("iter  scheme E       pgd E");
    let len = scheme.len().max(pgd.len());
    for i in (0..len).step_by(10) {
        let e = |t: &symnmf::classical::SolverTrace| {
            t.records
                .get(i)
                .map_or("-".to_string(), |r| format!("{:.6e}", r.relative_error))
        };
        println!("{i:4}  {:<13}  {}", e(&scheme), e(&pgd));
    }
    println!(
        "scheme: {} records, final E {:.6e}",
        scheme.len(),
        scheme.last_error().unwrap()
    );
    println!(
        "pgd:    {} records, final E {:.6e} (step {step:.4})",
        pgd.len(),
        pgd.last_error().unwrap()
    );
    for (name, u) in [("scheme", &u_scheme), ("pgd", &u_pgd)] {
        let res = ClusteringResult::evaluate(u, Some(&inst.labels))?;
        println!("{name} accuracy {:.3}", res.accuracy.unwrap());
    }
    Ok(())
}
