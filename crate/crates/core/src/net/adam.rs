//! Adam with bias correction over every block weight and λ.

use crate::linalg::DenseMatrix;

use super::{NetGrads, NetParams, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m_blocks: Vec<DenseMatrix>,
    pub v_blocks: Vec<DenseMatrix>,
    pub m_lambda: f64,
    pub v_lambda: f64,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &NetParams) -> Self {
        let (n, r) = params.dims();
        Self {
            m_blocks: vec![DenseMatrix::zeros(n, r); params.depth()],
            v_blocks: vec![DenseMatrix::zeros(n, r); params.depth()],
            m_lambda: 0.0,
            v_lambda: 0.0,
            t: 0,
        }
    }
}

struct Moments {
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    lr: f64,
    eps: f64,
}

impl Moments {
    /// Updates `(m, v)` in place and returns the parameter increment.
    #[inline]
    fn step(&self, g: f64, m: &mut f64, v: &mut f64) -> f64 {
        *m = self.b1 * *m + (1.0 - self.b1) * g;
        *v = self.b2 * *v + (1.0 - self.b2) * g * g;
        let m_hat = *m / self.c1;
        let v_hat = *v / self.c2;
        -self.lr * m_hat / (v_hat.sqrt() + self.eps)
    }
}

/// One Adam step at learning rate `lr`. λ is left untouched unless
/// `cfg.learn_lambda` is set.
pub fn adam_step_with_lr(
    params: &NetParams,
    grads: &NetGrads,
    state: &AdamState,
    cfg: &TrainConfig,
    lr: f64,
) -> (NetParams, AdamState) {
    let mut params = params.clone();
    let mut state = state.clone();
    state.t += 1;
    let t = state.t as i32;
    let mo = Moments {
        b1: cfg.adam_beta1,
        b2: cfg.adam_beta2,
        c1: 1.0 - cfg.adam_beta1.powi(t),
        c2: 1.0 - cfg.adam_beta2.powi(t),
        lr,
        eps: cfg.adam_eps,
    };
    for ((p, g), (m, v)) in params
        .blocks
        .iter_mut()
        .zip(&grads.d_blocks)
        .zip(state.m_blocks.iter_mut().zip(state.v_blocks.iter_mut()))
    {
        let p = p.as_mut_slice();
        let (m, v) = (m.as_mut_slice(), v.as_mut_slice());
        for (k, &gk) in g.as_slice().iter().enumerate() {
            p[k] += mo.step(gk, &mut m[k], &mut v[k]);
        }
    }
    if cfg.learn_lambda {
        params.lambda += mo.step(grads.d_lambda, &mut state.m_lambda, &mut state.v_lambda);
    }
    (params, state)
}

pub fn adam_step(
    params: &NetParams,
    grads: &NetGrads,
    state: &AdamState,
    cfg: &TrainConfig,
) -> (NetParams, AdamState) {
    adam_step_with_lr(params, grads, state, cfg, cfg.lr)
}
