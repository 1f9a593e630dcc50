use std::time::Instant;

use crate::classical::{SolverTrace, TraceRecord};
use crate::linalg::{fro_norm, fro_norm_sq, DenseMatrix};
use crate::metrics::relative_error_unchecked;

use super::adam::{adam_step_with_lr, AdamState};
use super::{
    init_params, loss, net_backward, net_forward, project_lambda, ForwardPass, NetError, NetParams,
    Result, TrainConfig,
};

/// Smallest λ an unprojected, learned λ may reach; the inversion layer needs
/// λ > 0.
pub const LAMBDA_FLOOR: f64 = 1e-8;

const PROJECTION_ROUNDS: usize = 5;

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetParams,
    pub trace: SolverTrace,
    /// Learning rate at the end of training.
    pub final_lr: f64,
}

/// Initializes λ (to `‖X‖_F` unless overridden) and the block weights along
/// the classical trajectory, then trains. With projection on, the starting λ
/// is first raised onto the lower bound of the initialized network.
pub fn train(
    x: &DenseMatrix,
    u0: &DenseMatrix,
    cfg: &TrainConfig,
) -> Result<(NetParams, SolverTrace)> {
    cfg.validate()?;
    let mut lambda = cfg.lambda_init.unwrap_or_else(|| fro_norm(x));
    if !(lambda > 0.0) {
        return Err(NetError::Config(
            "lambda initialization is zero (X = 0?)".into(),
        ));
    }
    let mut params = init_params(x, u0, lambda, cfg.num_blocks)?;
    if cfg.learn_lambda && cfg.lambda_projection {
        for _ in 0..PROJECTION_ROUNDS {
            let fwd = net_forward(u0, &params)?;
            let projected =
                project_lambda(lambda, x, u0, fwd.max_factor_norm(), cfg.proximity_eps)?;
            if projected == lambda {
                break;
            }
            lambda = projected;
            params = init_params(x, u0, lambda, cfg.num_blocks)?;
        }
    }
    let out = train_with_params(x, u0, params, cfg)?;
    Ok((out.params, out.trace))
}

/// Trains from given parameters. The trace holds one record per epoch,
/// starting with the state before the first update, so it has
/// `epochs + 1` rows.
///
/// Each epoch takes one Adam step from the current parameters. A step that
/// raises the loss (or breaks the forward pass) is rejected: parameters are
/// kept, the Adam moments are reset and the learning rate is multiplied by
/// `cfg.lr_decay`. A learned λ is projected onto the lower bound computed
/// from the candidate's own factor norms and `cfg.proximity_eps`.
pub fn train_with_params(
    x: &DenseMatrix,
    u0: &DenseMatrix,
    params: NetParams,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    params.validate()?;
    if !u0.is_nonnegative() {
        return Err(NetError::Config(
            "initial factor must be nonnegative".into(),
        ));
    }
    let start = Instant::now();
    let x_norm_sq = fro_norm_sq(x);

    let mut params = params;
    let mut fwd = net_forward(u0, &params)?;
    let mut cur_loss = loss(x, &fwd, &params, cfg)?;
    if !cur_loss.is_finite() {
        return Err(NetError::Divergence { epoch: 0 });
    }
    let mut state = AdamState::new(&params);
    let mut trace = SolverTrace::default();
    let mut lr = cfg.lr;

    for epoch in 0..=cfg.epochs {
        let out = fwd.output();
        trace.records.push(TraceRecord {
            iteration: epoch,
            relative_error: relative_error_unchecked(x, out, x_norm_sq)?,
            factor_norm: fro_norm(out),
            lambda: params.lambda,
            loss: Some(cur_loss),
            elapsed: start.elapsed().as_secs_f64(),
        });
        if epoch == cfg.epochs {
            break;
        }

        let grads = net_backward(x, &fwd, &params, cfg)?;
        if !grads.is_finite() {
            return Err(NetError::Divergence { epoch });
        }
        let (mut next, next_state) = adam_step_with_lr(&params, &grads, &state, cfg, lr);
        let candidate = if cfg.learn_lambda && cfg.lambda_projection {
            project_candidate(x, u0, &mut next, cfg.proximity_eps).ok()
        } else {
            if cfg.learn_lambda {
                next.lambda = next.lambda.max(LAMBDA_FLOOR);
            }
            net_forward(u0, &next).ok()
        };
        let candidate = candidate.and_then(|f| match loss(x, &f, &next, cfg) {
            Ok(l) if l.is_finite() && l <= cur_loss => Some((f, l)),
            _ => None,
        });
        match candidate {
            Some((f, l)) => {
                params = next;
                state = next_state;
                lr = (lr * cfg.lr_growth).min(cfg.lr);
                fwd = f;
                cur_loss = l;
            }
            None => {
                lr *= cfg.lr_decay;
                state = AdamState::new(&params);
            }
        }
    }
    Ok(TrainOutcome {
        params,
        trace,
        final_lr: lr,
    })
}

/// Raises `params.lambda` until it clears the bound evaluated on its own
/// forward pass (the bound moves with λ, so this takes a few rounds).
/// Returns the forward pass at the final λ.
fn project_candidate(
    x: &DenseMatrix,
    u0: &DenseMatrix,
    params: &mut NetParams,
    eps: f64,
) -> Result<ForwardPass> {
    let mut fwd = net_forward(u0, params)?;
    for _ in 0..PROJECTION_ROUNDS {
        let a = fwd.max_factor_norm();
        let lambda = project_lambda(params.lambda, x, u0, a, eps)?;
        if lambda == params.lambda {
            break;
        }
        params.lambda = lambda;
        fwd = net_forward(u0, params)?;
    }
    Ok(fwd)
}
