//! Baseline solvers: the penalized alternating scheme and projected gradient
//! descent, both with per-iteration traces.
//!
//! One sweep of the alternating scheme is
//!
//! ```text
//! W' = max{(X + λI) V (VᵀV + λI)⁻¹, 0}
//! V' = max{(X + λI) W' (W'ᵀW' + λI)⁻¹, 0}
//! ```
//!
//! i.e. two applications of the same single-factor map, which is exactly what
//! one network block computes at initialization.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, fro_norm, fro_norm_sq, gram, matmul, relu, spd_inverse, DenseMatrix, LinalgError,
};
use crate::metrics::relative_error_unchecked;
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("iterates diverged (non-finite values) at iteration {iteration}")]
    Divergence { iteration: usize },
}

/// Window length of the relative-error stopping rule.
pub const STOP_WINDOW: usize = 5;

/// Relative errors at or below this are treated as an exact factorization.
pub const EXACT_ERROR: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConfig {
    pub lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl ClassicalConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            max_iters: 500,
            tol: 1e-10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(SolverError::Config(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if self.max_iters < 1 {
            return Err(SolverError::Config("max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(SolverError::Config(format!(
                "tol must be >= 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// One row of a solver or training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub relative_error: f64,
    pub factor_norm: f64,
    pub lambda: f64,
    /// Training loss; `None` for the classical solvers.
    pub loss: Option<f64>,
    /// Seconds since the start of the run. Not part of the emitted
    /// deterministic trace.
    pub elapsed: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_error(&self) -> Option<f64> {
        self.records.last().map(|r| r.relative_error)
    }

    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.relative_error).collect()
    }
}

/// Random nonnegative starting factor with entries uniform on
/// `[0, sqrt(mean(X) / r)]`.
pub fn random_init(x: &DenseMatrix, r: usize, seed: u64) -> DenseMatrix {
    let hi = (x.mean().max(0.0) / r.max(1) as f64).sqrt();
    let mut rng = seeded_rng(seed);
    DenseMatrix::from_fn(x.rows(), r, |_, _| {
        if hi > 0.0 {
            rng.random_range(0.0..=hi)
        } else {
            0.0
        }
    })
}

/// `(X + λI) U` without forming `X + λI`.
pub fn shifted_product(
    x: &DenseMatrix,
    u: &DenseMatrix,
    lambda: f64,
) -> Result<DenseMatrix, LinalgError> {
    let mut out = matmul(x, u)?;
    out.add_scaled(lambda, u)?;
    Ok(out)
}

/// The single-factor map `max{(X + λI) U (UᵀU + λI)⁻¹, 0}`.
pub fn half_step(
    u: &DenseMatrix,
    x: &DenseMatrix,
    lambda: f64,
) -> Result<DenseMatrix, SolverError> {
    let p = shifted_product(x, u, lambda)?;
    let inv = spd_inverse(&gram(u), lambda)?;
    Ok(relu(&matmul(&p, &inv)?).0)
}

fn check_inputs(x: &DenseMatrix, u: &DenseMatrix) -> Result<(), SolverError> {
    if !x.is_square() {
        return Err(SolverError::Shape(format!(
            "X must be square, got {:?}",
            x.shape()
        )));
    }
    if u.rows() != x.rows() {
        return Err(SolverError::Shape(format!(
            "factor has {} rows, X is {}x{}",
            u.rows(),
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

/// One sweep of the alternating scheme; returns `(W', V')`.
pub fn scheme_step(
    w: &DenseMatrix,
    v: &DenseMatrix,
    x: &DenseMatrix,
    lambda: f64,
) -> Result<(DenseMatrix, DenseMatrix), SolverError> {
    check_inputs(x, v)?;
    if w.shape() != v.shape() {
        return Err(SolverError::Shape(format!(
            "W {:?} vs V {:?}",
            w.shape(),
            v.shape()
        )));
    }
    let w_next = half_step(v, x, lambda)?;
    let v_next = half_step(&w_next, x, lambda)?;
    Ok((w_next, v_next))
}

fn should_stop(errors: &[f64], tol: f64) -> bool {
    let last = *errors.last().unwrap();
    if last <= EXACT_ERROR {
        return true;
    }
    errors.len() > STOP_WINDOW && (errors[errors.len() - 1 - STOP_WINDOW] - last).abs() < tol
}

/// Iterates [`scheme_step`] from `W = V = u0`. Returns the final `V` and the
/// trace (one record per sweep). Stops early when the relative error hits
/// machine zero or changes by less than `tol` over [`STOP_WINDOW`] sweeps.
pub fn run_classical(
    x: &DenseMatrix,
    u0: &DenseMatrix,
    cfg: &ClassicalConfig,
) -> Result<(DenseMatrix, SolverTrace), SolverError> {
    cfg.validate()?;
    check_inputs(x, u0)?;
    if !u0.is_nonnegative() {
        return Err(SolverError::Config(
            "initial factor must be nonnegative".into(),
        ));
    }
    let start = Instant::now();
    let x_norm_sq = fro_norm_sq(x);
    let mut w = u0.clone();
    let mut v = u0.clone();
    let mut trace = SolverTrace::default();
    let mut errors = Vec::new();
    for it in 1..=cfg.max_iters {
        let (w_next, v_next) = scheme_step(&w, &v, x, cfg.lambda)?;
        if !w_next.is_finite() || !v_next.is_finite() {
            return Err(SolverError::Divergence { iteration: it });
        }
        w = w_next;
        v = v_next;
        let e = relative_error_unchecked(x, &v, x_norm_sq)?;
        if !e.is_finite() {
            return Err(SolverError::Divergence { iteration: it });
        }
        errors.push(e);
        trace.records.push(TraceRecord {
            iteration: it,
            relative_error: e,
            factor_norm: fro_norm(&v),
            lambda: cfg.lambda,
            loss: None,
            elapsed: start.elapsed().as_secs_f64(),
        });
        if should_stop(&errors, cfg.tol) {
            break;
        }
    }
    Ok((v, trace))
}

/// Gradient of `¼‖X − UUᵀ‖²_F` for symmetric `X`: `(UUᵀ − X)U`.
pub fn sym_gradient(u: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let uutu = matmul(u, &gram(u))?;
    uutu.sub(&matmul(x, u)?)
}

/// `U' = max{U − step·(UUᵀ − X)U, 0}`.
pub fn pgd_step(u: &DenseMatrix, x: &DenseMatrix, step: f64) -> Result<DenseMatrix, SolverError> {
    if !(step > 0.0) {
        return Err(SolverError::Config(format!("step must be > 0, got {step}")));
    }
    check_inputs(x, u)?;
    let mut next = u.clone();
    next.add_scaled(-step, &sym_gradient(u, x)?)?;
    Ok(relu(&next).0)
}

/// Default PGD step `1 / (2‖X‖₂)`.
pub fn default_pgd_step(x: &DenseMatrix) -> Result<f64, SolverError> {
    let b = linalg::spectral_norm_default(x)?;
    if b == 0.0 {
        return Err(SolverError::Config("X is zero; no PGD step size".into()));
    }
    Ok(1.0 / (2.0 * b))
}

/// Projected gradient descent with a fixed step, same stopping rule as
/// [`run_classical`]. `cfg.lambda` is ignored apart from validation.
pub fn run_pgd(
    x: &DenseMatrix,
    u0: &DenseMatrix,
    step: f64,
    cfg: &ClassicalConfig,
) -> Result<(DenseMatrix, SolverTrace), SolverError> {
    cfg.validate()?;
    check_inputs(x, u0)?;
    let start = Instant::now();
    let x_norm_sq = fro_norm_sq(x);
    let mut u = u0.clone();
    let mut trace = SolverTrace::default();
    let mut errors = Vec::new();
    for it in 1..=cfg.max_iters {
        u = pgd_step(&u, x, step)?;
        let e = relative_error_unchecked(x, &u, x_norm_sq)?;
        if !u.is_finite() || !e.is_finite() {
            return Err(SolverError::Divergence { iteration: it });
        }
        errors.push(e);
        trace.records.push(TraceRecord {
            iteration: it,
            relative_error: e,
            factor_norm: fro_norm(&u),
            lambda: 0.0,
            loss: None,
            elapsed: start.elapsed().as_secs_f64(),
        });
        if should_stop(&errors, cfg.tol) {
            break;
        }
    }
    Ok((u, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matmul;

    fn indicator() -> DenseMatrix {
        let s = 0.5f64.sqrt();
        DenseMatrix::from_rows(&[[s, 0.0], [s, 0.0], [0.0, s], [0.0, s]])
    }

    #[test]
    fn fixed_point_of_scheme() {
        let u = indicator();
        let x = matmul(&u, &u.transpose()).unwrap();
        for lambda in [0.1, 1.0, 7.5] {
            let (w, v) = scheme_step(&u, &u, &x, lambda).unwrap();
            assert!(w.max_abs_diff(&u).unwrap() < 1e-10);
            assert!(v.max_abs_diff(&u).unwrap() < 1e-10);
        }
    }

    #[test]
    fn zero_case_and_identity_case() {
        let z = DenseMatrix::zeros(3, 2);
        let (w, v) = scheme_step(&z, &z, &DenseMatrix::zeros(3, 3), 0.7).unwrap();
        assert_eq!(w, z);
        assert_eq!(v, z);

        let i2 = DenseMatrix::identity(2);
        let (w, v) = scheme_step(&i2, &i2, &i2, 1.0).unwrap();
        assert!(w.max_abs_diff(&i2).unwrap() < 1e-15);
        assert!(v.max_abs_diff(&i2).unwrap() < 1e-15);
    }

    #[test]
    fn run_from_fixed_point_stops_immediately() {
        let u = indicator();
        let x = matmul(&u, &u.transpose()).unwrap();
        let (v, trace) = run_classical(&x, &u, &ClassicalConfig::new(1.0)).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(trace.last_error().unwrap() < 1e-20);
        assert!(v.max_abs_diff(&u).unwrap() < 1e-10);
    }

    #[test]
    fn config_validation() {
        let x = DenseMatrix::identity(2);
        let u = DenseMatrix::filled(2, 1, 0.5);
        let mut cfg = ClassicalConfig::new(1.0);
        cfg.max_iters = 0;
        assert!(matches!(
            run_classical(&x, &u, &cfg),
            Err(SolverError::Config(_))
        ));
        let cfg = ClassicalConfig::new(-1.0);
        assert!(matches!(
            run_classical(&x, &u, &cfg),
            Err(SolverError::Config(_))
        ));
    }

    #[test]
    fn tol_zero_runs_full_budget() {
        let x = DenseMatrix::from_rows(&[[1.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 1.0]]);
        let u0 = random_init(&x, 2, 3);
        let mut cfg = ClassicalConfig::new(1.0);
        cfg.tol = 0.0;
        cfg.max_iters = 3;
        let (_, trace) = run_classical(&x, &u0, &cfg).unwrap();
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn pgd_cases() {
        let u = indicator();
        let x = matmul(&u, &u.transpose()).unwrap();
        assert!(pgd_step(&u, &x, 0.3).unwrap().max_abs_diff(&u).unwrap() < 1e-15);
        let z = DenseMatrix::zeros(4, 2);
        assert_eq!(pgd_step(&z, &x, 0.3).unwrap(), z);
        let e = DenseMatrix::from_rows(&[[1.0], [0.0]]);
        assert_eq!(pgd_step(&e, &DenseMatrix::identity(2), 0.1).unwrap(), e);
        assert!(pgd_step(&e, &DenseMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn random_init_scale() {
        let x = DenseMatrix::filled(5, 5, 2.0);
        let u = random_init(&x, 2, 9);
        assert!(u.is_nonnegative());
        assert!(u.as_slice().iter().all(|&v| v <= 1.0));
        assert_eq!(u, random_init(&x, 2, 9));
    }
}
