//! The unrolled network. Block `i` maps `U_{i-1}` to
//!
//! ```text
//! INV_i = (U_{i-1}ᵀ U_{i-1} + λI)⁻¹      inversion layer
//! Z_i   = P_i · INV_i                    linear layer
//! U_i   = ReLU(Z_i)
//! ```
//!
//! with learnable `P_i ∈ ℝ^{n×r}` and one shared `λ`. Initializing
//! `P_i = (X + λI) U_{i-1}` along the classical trajectory makes the forward
//! pass reproduce the classical scheme exactly.
//!
//! Gradients are written out by hand. For a block with upstream gradient `G`
//! and `M = INV`:
//!
//! ```text
//! G_Z  = G ⊙ mask
//! ∂P   = G_Z M
//! G_M  = Pᵀ G_Z
//! G_A  = −M G_M M            (A = UᵀU + λI)
//! ∂U   = U (G_A + G_Aᵀ)
//! ∂λ   = tr(G_A)
//! ```

pub mod adam;
pub mod checkpoint;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::{shifted_product, sym_gradient};
use crate::linalg::{
    self, fro_norm, fro_norm_sq, gram, matmul, relu, spd_inverse, t_matmul, DenseMatrix,
    LinalgError, ReluMask,
};
use crate::theory::LambdaBound;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use train::{train, train_with_params, TrainOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("block {block}: {source}")]
    Block { block: usize, source: LinalgError },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },
}

pub type Result<T> = std::result::Result<T, NetError>;

/// Slack added to the λ lower bound so the projected value satisfies it
/// strictly.
pub const LAMBDA_MARGIN: f64 = 1e-6;

/// Learnable state: one linear weight per block and the shared λ.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    pub blocks: Vec<DenseMatrix>,
    pub lambda: f64,
}

impl NetParams {
    pub fn new(blocks: Vec<DenseMatrix>, lambda: f64) -> Result<Self> {
        let p = Self { blocks, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.blocks.first() else {
            return Err(NetError::Shape("network needs at least one block".into()));
        };
        if let Some((i, b)) = self
            .blocks
            .iter()
            .enumerate()
            .find(|(_, b)| b.shape() != first.shape())
        {
            return Err(NetError::Shape(format!(
                "block {i} is {:?}, block 0 is {:?}",
                b.shape(),
                first.shape()
            )));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(NetError::Config(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    /// `(n, r)` of every block weight.
    pub fn dims(&self) -> (usize, usize) {
        self.blocks.first().map_or((0, 0), |b| b.shape())
    }
}

/// Intermediates of one block kept for the backward pass.
#[derive(Debug, Clone)]
pub struct BlockCache {
    pub u_in: DenseMatrix,
    pub inv: DenseMatrix,
    pub pre_act: DenseMatrix,
    pub mask: ReluMask,
}

/// Block outputs `U_1..U_K` and their caches.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub outputs: Vec<DenseMatrix>,
    pub caches: Vec<BlockCache>,
}

impl ForwardPass {
    /// `U_out = U_K`.
    pub fn output(&self) -> &DenseMatrix {
        self.outputs.last().expect("non-empty network")
    }

    /// Largest `‖U_i‖_F` over the input and every block output.
    pub fn max_factor_norm(&self) -> f64 {
        let input = self.caches.first().map_or(0.0, |c| fro_norm(&c.u_in));
        self.outputs.iter().map(fro_norm).fold(input, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads {
    pub d_blocks: Vec<DenseMatrix>,
    pub d_lambda: f64,
    /// Gradient with respect to the network input; diagnostic only.
    pub d_u0: Option<DenseMatrix>,
}

impl NetGrads {
    pub fn zeros_like(params: &NetParams) -> Self {
        let (n, r) = params.dims();
        Self {
            d_blocks: vec![DenseMatrix::zeros(n, r); params.depth()],
            d_lambda: 0.0,
            d_u0: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_lambda.is_finite() && self.d_blocks.iter().all(DenseMatrix::is_finite)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub num_blocks: usize,
    pub lr: f64,
    /// Weight of the `‖P_i − (X + λI)U_{i-1}‖²` regularizer.
    pub beta: f64,
    /// Weight of the ℓ1 penalty on the network output.
    pub gamma_l1: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Multiplies the learning rate whenever a step is rejected for raising
    /// the loss.
    pub lr_decay: f64,
    /// Multiplies the learning rate after every accepted step, up to `lr`.
    pub lr_growth: f64,
    pub lambda_projection: bool,
    /// The ε entering the projected bound `a² + 4aε`: the tolerated relative
    /// deviation of the weights (and of block inputs) from the classical
    /// iteration.
    pub proximity_eps: f64,
    /// Train λ along with the weights. When false λ stays at its initial
    /// value and is never projected.
    pub learn_lambda: bool,
    /// Initial λ; `None` means `‖X‖_F`.
    pub lambda_init: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_blocks: 10,
            lr: 0.5,
            beta: 5e-6,
            gamma_l1: 0.0,
            epochs: 1000,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            lr_decay: 0.5,
            lr_growth: 1.1,
            lambda_projection: true,
            proximity_eps: 0.01,
            learn_lambda: true,
            lambda_init: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NetError::Config(m));
        if self.num_blocks < 1 {
            return bad("num_blocks must be >= 1".into());
        }
        if !(self.lr > 0.0) {
            return bad(format!("lr must be > 0, got {}", self.lr));
        }
        if !(self.beta >= 0.0) || !(self.gamma_l1 >= 0.0) || !(self.proximity_eps >= 0.0) {
            return bad("beta, gamma_l1 and proximity_eps must be >= 0".into());
        }
        for (name, v) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps must be > 0".into());
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad(format!(
                "lr_decay must lie in (0, 1], got {}",
                self.lr_decay
            ));
        }
        if !(self.lr_growth >= 1.0) || !self.lr_growth.is_finite() {
            return bad(format!("lr_growth must be >= 1, got {}", self.lr_growth));
        }
        if let Some(l) = self.lambda_init {
            if !(l > 0.0) {
                return bad(format!("lambda_init must be > 0, got {l}"));
            }
        }
        Ok(())
    }
}

pub fn block_forward(
    u_in: &DenseMatrix,
    p: &DenseMatrix,
    lambda: f64,
) -> Result<(DenseMatrix, BlockCache)> {
    if p.rows() != u_in.rows() || p.cols() != u_in.cols() {
        return Err(NetError::Shape(format!(
            "block weight {:?} does not match input {:?}",
            p.shape(),
            u_in.shape()
        )));
    }
    let inv = spd_inverse(&gram(u_in), lambda)?;
    let pre_act = matmul(p, &inv)?;
    let (out, mask) = relu(&pre_act);
    Ok((
        out,
        BlockCache {
            u_in: u_in.clone(),
            inv,
            pre_act,
            mask,
        },
    ))
}

pub fn net_forward(u0: &DenseMatrix, params: &NetParams) -> Result<ForwardPass> {
    params.validate()?;
    let mut outputs = Vec::with_capacity(params.depth());
    let mut caches = Vec::with_capacity(params.depth());
    let mut u = u0.clone();
    for (i, p) in params.blocks.iter().enumerate() {
        let (next, cache) = block_forward(&u, p, params.lambda).map_err(|e| match e {
            NetError::Linalg(source) => NetError::Block { block: i, source },
            other => other,
        })?;
        caches.push(cache);
        outputs.push(next.clone());
        u = next;
    }
    Ok(ForwardPass { outputs, caches })
}

/// Weights along the classical trajectory: `P_i = (X + λI) U_{i-1}`, then
/// `U_i = max{P_i (U_{i-1}ᵀU_{i-1} + λI)⁻¹, 0}`.
pub fn init_params(x: &DenseMatrix, u0: &DenseMatrix, lambda: f64, k: usize) -> Result<NetParams> {
    if k < 1 {
        return Err(NetError::Config("need at least one block".into()));
    }
    if !x.is_square() || x.rows() != u0.rows() {
        return Err(NetError::Shape(format!(
            "X {:?} vs U0 {:?}",
            x.shape(),
            u0.shape()
        )));
    }
    let mut blocks = Vec::with_capacity(k);
    let mut u = u0.clone();
    for _ in 0..k {
        let p = shifted_product(x, &u, lambda)?;
        let (next, _) = block_forward(&u, &p, lambda)?;
        blocks.push(p);
        u = next;
    }
    NetParams::new(blocks, lambda)
}

fn check_pass(fwd: &ForwardPass, params: &NetParams) -> Result<()> {
    if fwd.outputs.len() != params.depth() || fwd.caches.len() != params.depth() {
        return Err(NetError::Shape(format!(
            "forward pass has {} outputs / {} caches for {} blocks",
            fwd.outputs.len(),
            fwd.caches.len(),
            params.depth()
        )));
    }
    Ok(())
}

/// `P_i − (X + λI) U_{i-1}`.
fn weight_deviation(
    x: &DenseMatrix,
    cache: &BlockCache,
    p: &DenseMatrix,
    lambda: f64,
) -> Result<DenseMatrix> {
    Ok(p.sub(&shifted_product(x, &cache.u_in, lambda)?)?)
}

/// Deep-supervised training loss
///
/// ```text
/// Σ_i ‖X − U_iU_iᵀ‖²_F + β‖P_i − (X + λI)U_{i-1}‖²_F  (+ γ Σ|U_K|)
/// ```
pub fn loss(
    x: &DenseMatrix,
    fwd: &ForwardPass,
    params: &NetParams,
    cfg: &TrainConfig,
) -> Result<f64> {
    check_pass(fwd, params)?;
    let mut total = 0.0;
    for ((u, cache), p) in fwd.outputs.iter().zip(&fwd.caches).zip(&params.blocks) {
        total += crate::metrics::residual_sq(x, u)?;
        if cfg.beta != 0.0 {
            total += cfg.beta * fro_norm_sq(&weight_deviation(x, cache, p, params.lambda)?);
        }
    }
    if cfg.gamma_l1 > 0.0 {
        total += cfg.gamma_l1 * fwd.output().abs_sum();
    }
    Ok(total)
}

/// Backward through one block. Returns `(∂U_in, ∂P, ∂λ)`.
pub fn block_backward(
    cache: &BlockCache,
    p: &DenseMatrix,
    _lambda: f64,
    grad_out: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix, f64)> {
    if grad_out.shape() != cache.pre_act.shape() || p.shape() != cache.pre_act.shape() {
        return Err(NetError::Shape(format!(
            "upstream {:?} / weight {:?} vs block output {:?}",
            grad_out.shape(),
            p.shape(),
            cache.pre_act.shape()
        )));
    }
    let m = &cache.inv;
    let g_z = cache.mask.gate(grad_out)?;
    let grad_p = matmul(&g_z, m)?;
    let g_m = t_matmul(p, &g_z)?;
    let g_a = matmul(&matmul(m, &g_m)?, m)?.scale(-1.0);
    let g_a_sym = g_a.add(&g_a.transpose())?;
    let grad_u = matmul(&cache.u_in, &g_a_sym)?;
    Ok((grad_u, grad_p, g_a.trace()))
}

/// Gradients of [`loss`] with respect to every `P_i`, `λ` and the input.
pub fn net_backward(
    x: &DenseMatrix,
    fwd: &ForwardPass,
    params: &NetParams,
    cfg: &TrainConfig,
) -> Result<NetGrads> {
    check_pass(fwd, params)?;
    let k = params.depth();
    let lambda = params.lambda;
    let mut grads = NetGrads::zeros_like(params);

    // ∂/∂U_K of the last reconstruction term (and the ℓ1 penalty)
    let mut upstream = sym_gradient(fwd.output(), x)?.scale(4.0);
    if cfg.gamma_l1 > 0.0 {
        let sign = fwd
            .output()
            .map(|v| if v > 0.0 { cfg.gamma_l1 } else { 0.0 });
        upstream.add_scaled(1.0, &sign)?;
    }

    for i in (0..k).rev() {
        let cache = &fwd.caches[i];
        let p = &params.blocks[i];
        let (mut g_in, mut g_p, g_lambda) = block_backward(cache, p, lambda, &upstream)?;
        grads.d_lambda += g_lambda;
        if cfg.beta != 0.0 {
            let dev = weight_deviation(x, cache, p, lambda)?;
            g_p.add_scaled(2.0 * cfg.beta, &dev)?;
            // −2β (X + λI) D, X symmetric
            g_in.add_scaled(-2.0 * cfg.beta, &shifted_product(x, &dev, lambda)?)?;
            grads.d_lambda -= 2.0 * cfg.beta * dev.dot(&cache.u_in)?;
        }
        grads.d_blocks[i] = g_p;
        if i > 0 {
            g_in.add_scaled(4.0, &sym_gradient(&cache.u_in, x)?)?;
            upstream = g_in;
        } else {
            grads.d_u0 = Some(g_in);
        }
    }
    Ok(grads)
}

/// `max(λ, max{a² + 4aε, ½(‖X‖_F + ‖X − U₀U₀ᵀ‖_F)} + margin)`.
pub fn project_lambda(
    lambda: f64,
    x: &DenseMatrix,
    u0: &DenseMatrix,
    a: f64,
    eps: f64,
) -> Result<f64> {
    let bound = LambdaBound::compute(x, u0, a, eps).map_err(|e| match e {
        crate::theory::TheoryError::Linalg(l) => NetError::Linalg(l),
        other => NetError::Config(other.to_string()),
    })?;
    Ok(lambda.max(bound.value() + LAMBDA_MARGIN))
}

/// Largest relative deviation `‖P_i − (X+λI)U_{i-1}‖_F / ‖(X+λI)U_{i-1}‖_F`
/// over the blocks of a forward pass.
pub fn max_weight_deviation(x: &DenseMatrix, fwd: &ForwardPass, params: &NetParams) -> Result<f64> {
    let mut worst = 0.0f64;
    for (cache, p) in fwd.caches.iter().zip(&params.blocks) {
        let reference = shifted_product(x, &cache.u_in, params.lambda)?;
        let num = fro_norm(&p.sub(&reference)?);
        let den = fro_norm(&reference);
        let r = if num == 0.0 {
            0.0
        } else if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        };
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `‖INV_i‖₂` for every block, by power iteration.
pub fn inversion_norms(fwd: &ForwardPass) -> Result<Vec<f64>> {
    fwd.caches
        .iter()
        .map(|c| Ok(linalg::spectral_norm_default(&c.inv)?))
        .collect()
}
