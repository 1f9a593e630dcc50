//! Symmetric nonnegative matrix factorization `X ≈ UUᵀ, U ≥ 0`.
//!
//! - [`classical`]: the penalized alternating scheme and projected gradient descent.
//! - [`net`]: the unrolled network (forward, hand-written backward, Adam, checkpoints).
//! - [`theory`]: λ lower bounds, the proximality constant and its empirical check.
//! - [`graph`]: kNN similarity graphs and synthetic instances.
//! - [`metrics`]: relative error, sparsity, label assignment and clustering scores.
//! - [`cli`]: file formats and the `symnmf` subcommands.
//!
//! Runnable walkthroughs live under `examples/`:
//!
//! ```text
//! cargo run --release --example classical_solve
//! cargo run --release --example train_net
//! ```

pub mod classical;
pub mod cli;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod net;
pub mod theory;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used everywhere a seed is accepted.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
