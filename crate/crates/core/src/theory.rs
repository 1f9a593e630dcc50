//! Executable checks for the λ lower bounds of the inversion layer.
//!
//! A block `F(U) = ReLU(P (UᵀU + λI)⁻¹)` is compared with the classical map
//! `T(Ũ) = ReLU((X + λI) Ũ (ŨᵀŨ + λI)⁻¹)`. With `B = ‖X‖₂`, `a` a bound on
//! the factor norms and `P` ε-bounded, `λ > a² + 4aε` guarantees
//! `‖F(U) − T(Ũ)‖_F ≤ Cε` on the spectral ball `‖U − Ũ‖₂ ≤ ε`, where
//!
//! ```text
//! C = 4(B + λ)a² / (λ − a²)² + (B + λ)a / (λ − a²)
//! ```
//!
//! Everything here uses exact (eigenvalue based) spectral norms; the matrices
//! involved are small.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::classical::shifted_product;
use crate::linalg::{
    self, fro_norm, gram, inverse, matmul, relu, spd_inverse, spectral_norm_exact, DenseMatrix,
    LinalgError,
};
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, TheoryError>;

/// Inputs of the proximality bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// `‖X‖₂`
    pub b: f64,
    /// Uniform bound on the Frobenius norms of the factors.
    pub a: f64,
    pub eps: f64,
    pub lambda: f64,
}

/// `a² + 4aε`.
pub fn proximality_lambda_bound(a: f64, eps: f64) -> f64 {
    a * a + 4.0 * a * eps
}

/// `½(‖X‖_F + ‖X − U₀U₀ᵀ‖_F)`, the component of the λ bound that keeps the
/// classical critical points critical for the network.
pub fn sufficiency_bound(x: &DenseMatrix, u0: &DenseMatrix) -> Result<f64> {
    let uut = matmul(u0, &u0.transpose())?;
    Ok(0.5 * (fro_norm(x) + fro_norm(&x.sub(&uut)?)))
}

/// Both components of the combined λ lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaBound {
    pub proximality: f64,
    pub sufficiency: f64,
}

impl LambdaBound {
    pub fn compute(x: &DenseMatrix, u0: &DenseMatrix, a: f64, eps: f64) -> Result<Self> {
        Ok(Self {
            proximality: proximality_lambda_bound(a, eps),
            sufficiency: sufficiency_bound(x, u0)?,
        })
    }

    pub fn value(&self) -> f64 {
        self.proximality.max(self.sufficiency)
    }

    /// Strict inequality `λ > max{..}`.
    pub fn satisfied_by(&self, lambda: f64) -> bool {
        lambda > self.value()
    }
}

/// The proximality constant `C`. Requires `λ > a²`.
pub fn proximality_constant(b: &BoundInputs) -> Result<f64> {
    let gap = b.lambda - b.a * b.a;
    if !(gap > 0.0) {
        return Err(TheoryError::Domain(format!(
            "proximality constant needs lambda > a^2 (lambda = {}, a^2 = {})",
            b.lambda,
            b.a * b.a
        )));
    }
    let s = b.b + b.lambda;
    Ok(4.0 * s * b.a * b.a / (gap * gap) + s * b.a / gap)
}

/// Relative deviation `‖P − (X+λI)Ũ‖_F / ‖(X+λI)Ũ‖_F` of a block weight from
/// its classical value (0 when both vanish).
pub fn delta_ratio(
    p: &DenseMatrix,
    x: &DenseMatrix,
    u_prev: &DenseMatrix,
    lambda: f64,
) -> Result<f64> {
    let reference = shifted_product(x, u_prev, lambda)?;
    let num = fro_norm(&p.sub(&reference)?);
    let den = fro_norm(&reference);
    Ok(ratio(num, den))
}

/// The proof-side form `‖P − (X+λI)Ũ‖_F / (‖X+λI‖₂ ‖Ũ‖_F)`.
pub fn epsilon_ratio(
    p: &DenseMatrix,
    x: &DenseMatrix,
    u_prev: &DenseMatrix,
    lambda: f64,
) -> Result<f64> {
    let reference = shifted_product(x, u_prev, lambda)?;
    let num = fro_norm(&p.sub(&reference)?);
    let den = spectral_norm_exact(&x.shift_diag(lambda)?)? * fro_norm(u_prev);
    Ok(ratio(num, den))
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Outcome of [`verify_proximality`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProximalityReport {
    pub samples: usize,
    /// Largest observed `‖F(U) − T(Ũ)‖_F / ε` (the raw distance when ε = 0).
    pub max_ratio: f64,
    pub max_distance: f64,
    /// Theoretical constant `C` at the measured `a`.
    pub c: f64,
    pub violations: usize,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub eps: f64,
    /// Relative deviation of `P` as in the δ-bound.
    pub delta_ratio: f64,
    /// Proof-side deviation of `P`, must be ≤ ε.
    pub epsilon_ratio: f64,
}

impl ProximalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_report(&self) -> String {
        format!(
            "samples: {}\nviolations: {}\nmax_ratio: {:.17e}\nmax_distance: {:.17e}\nC: {:.17e}\na: {:.17e}\nB: {:.17e}\nlambda: {:.17e}\neps: {:.17e}\ndelta_ratio: {:.17e}\nepsilon_ratio: {:.17e}\n",
            self.samples,
            self.violations,
            self.max_ratio,
            self.max_distance,
            self.c,
            self.a,
            self.b,
            self.lambda,
            self.eps,
            self.delta_ratio,
            self.epsilon_ratio,
        )
    }
}

/// Samples `U` in the spectral ball of radius `eps` around `Ũ` (random
/// Gaussian direction, radius uniform on `[0, eps]`) and checks
/// `‖F(U) − T(Ũ)‖_F ≤ Cε`, with `a` measured over `Ũ` and every sample.
pub fn verify_proximality(
    x: &DenseMatrix,
    u_tilde: &DenseMatrix,
    p: &DenseMatrix,
    lambda: f64,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<ProximalityReport> {
    if !(lambda > 0.0) || !(eps >= 0.0) {
        return Err(TheoryError::Domain("need lambda > 0 and eps >= 0".into()));
    }
    if p.shape() != u_tilde.shape() || x.rows() != u_tilde.rows() || !x.is_square() {
        return Err(TheoryError::Domain(format!(
            "shape mismatch: X {:?}, U {:?}, P {:?}",
            x.shape(),
            u_tilde.shape(),
            p.shape()
        )));
    }
    let eps_ratio = epsilon_ratio(p, x, u_tilde, lambda)?;
    if eps_ratio > eps * (1.0 + 1e-12) {
        return Err(TheoryError::Domain(format!(
            "P is not eps-bounded: deviation ratio {eps_ratio} > eps {eps}"
        )));
    }
    let (n, r) = u_tilde.shape();
    let target = relu(&matmul(
        &shifted_product(x, u_tilde, lambda)?,
        &spd_inverse(&gram(u_tilde), lambda)?,
    )?)
    .0;

    let mut rng = seeded_rng(seed);
    let mut a = fro_norm(u_tilde);
    let mut distances = Vec::with_capacity(samples);
    for _ in 0..samples {
        let dir = DenseMatrix::from_fn(n, r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let dir_norm = spectral_norm_exact(&dir)?;
        let radius = if eps > 0.0 {
            rng.random_range(0.0..=eps)
        } else {
            0.0
        };
        let mut u = u_tilde.clone();
        if dir_norm > 0.0 {
            u.add_scaled(radius / dir_norm, &dir)?;
        }
        a = a.max(fro_norm(&u));
        let out = relu(&matmul(p, &spd_inverse(&gram(&u), lambda)?)?).0;
        distances.push(fro_norm(&out.sub(&target)?));
    }

    if !(lambda > proximality_lambda_bound(a, eps)) {
        return Err(TheoryError::Domain(format!(
            "lambda = {lambda} does not exceed a^2 + 4 a eps = {} (a = {a})",
            proximality_lambda_bound(a, eps)
        )));
    }
    let b = spectral_norm_exact(x)?;
    let c = proximality_constant(&BoundInputs { b, a, eps, lambda })?;
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let (max_ratio, violations) = if eps > 0.0 {
        let bound = c * eps * (1.0 + 1e-12);
        (
            max_distance / eps,
            distances.iter().filter(|&&d| d > bound).count(),
        )
    } else {
        (
            max_distance,
            distances.iter().filter(|&&d| d > 1e-14).count(),
        )
    };
    Ok(ProximalityReport {
        samples,
        max_ratio,
        max_distance,
        c,
        violations,
        a,
        b,
        lambda,
        eps,
        delta_ratio: delta_ratio(p, x, u_tilde, lambda)?,
        epsilon_ratio: eps_ratio,
    })
}

/// `(cond((UᵀU + λI)⁻¹), 1 + σ₁²(U)/λ)`; the first never exceeds the second.
pub fn condition_number_inv(u: &DenseMatrix, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(TheoryError::Domain(
            "condition number needs lambda > 0".into(),
        ));
    }
    let eig = linalg::symmetric_eigenvalues(&gram(u))?;
    let top = eig.first().copied().unwrap_or(0.0).max(0.0);
    let bottom = eig.last().copied().unwrap_or(0.0).max(0.0);
    Ok(((top + lambda) / (bottom + lambda), 1.0 + top / lambda))
}

/// Both sides of the two inverse-perturbation inequalities, in spectral
/// norm, for `B = A + Δ`:
///
/// ```text
/// ‖B⁻¹ − A⁻¹‖ ≤ ‖A⁻¹‖² ‖Δ‖ / (1 − ‖A⁻¹Δ‖)
/// ‖B⁻¹‖       ≤ ‖A⁻¹‖ / (1 − ‖A⁻¹Δ‖)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub inv_a_norm: f64,
    pub delta_norm: f64,
    pub inv_a_delta_norm: f64,
    pub diff_lhs: f64,
    pub diff_rhs: f64,
    pub inv_b_lhs: f64,
    pub inv_b_rhs: f64,
}

impl PerturbationReport {
    pub fn diff_slack(&self) -> f64 {
        self.diff_rhs - self.diff_lhs
    }

    pub fn inv_slack(&self) -> f64 {
        self.inv_b_rhs - self.inv_b_lhs
    }

    /// Both inequalities hold, up to rounding in the last few ulps.
    pub fn holds(&self) -> bool {
        let tol = |v: f64| 1e-12 * v.abs().max(1e-300);
        self.diff_slack() >= -tol(self.diff_rhs) && self.inv_slack() >= -tol(self.inv_b_rhs)
    }
}

pub fn check_inverse_perturbation(
    a_mat: &DenseMatrix,
    delta: &DenseMatrix,
) -> Result<PerturbationReport> {
    if a_mat.shape() != delta.shape() || !a_mat.is_square() {
        return Err(TheoryError::Domain(format!(
            "A {:?} and Δ {:?} must be square and equal-sized",
            a_mat.shape(),
            delta.shape()
        )));
    }
    let inv_a = inverse(a_mat)?;
    let inv_a_delta_norm = spectral_norm_exact(&matmul(&inv_a, delta)?)?;
    if !(inv_a_delta_norm < 1.0) {
        return Err(TheoryError::Domain(format!(
            "perturbation too large: ‖A⁻¹Δ‖ = {inv_a_delta_norm} >= 1"
        )));
    }
    let inv_b = inverse(&a_mat.add(delta)?)?;
    let inv_a_norm = spectral_norm_exact(&inv_a)?;
    let delta_norm = spectral_norm_exact(delta)?;
    let denom = 1.0 - inv_a_delta_norm;
    Ok(PerturbationReport {
        inv_a_norm,
        delta_norm,
        inv_a_delta_norm,
        diff_lhs: spectral_norm_exact(&inv_b.sub(&inv_a)?)?,
        diff_rhs: inv_a_norm * inv_a_norm * delta_norm / denom,
        inv_b_lhs: spectral_norm_exact(&inv_b)?,
        inv_b_rhs: inv_a_norm / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proximality_bound_values() {
        assert_eq!(proximality_lambda_bound(0.0, 3.0), 0.0);
        assert_eq!(proximality_lambda_bound(1.0, 0.0), 1.0);
        assert!((proximality_lambda_bound(1.0, 0.1) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn proximality_constant_values() {
        let c = |b, a, lambda| {
            proximality_constant(&BoundInputs {
                b,
                a,
                eps: 0.0,
                lambda,
            })
        };
        assert_eq!(c(3.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(c(1.0, 1.0, 2.0).unwrap(), 15.0);
        assert!((c(1.0, 0.7, 1e6).unwrap() - 0.7).abs() < 1e-3);
        assert!(matches!(c(1.0, 2.0, 4.0), Err(TheoryError::Domain(_))));
    }

    #[test]
    fn proximality_constant_decreasing_in_lambda() {
        for &(b, a) in &[(1.0, 1.0), (5.0, 0.3), (0.2, 2.0)] {
            let mut prev = f64::INFINITY;
            for k in 1..400 {
                let lambda = a * a + 1e-3 + 0.05 * k as f64;
                let c = proximality_constant(&BoundInputs {
                    b,
                    a,
                    eps: 0.0,
                    lambda,
                })
                .unwrap();
                assert!(c < prev, "not decreasing at lambda={lambda}");
                prev = c;
            }
        }
    }

    #[test]
    fn condition_number_values() {
        assert_eq!(
            condition_number_inv(&DenseMatrix::zeros(3, 2), 1.0).unwrap(),
            (1.0, 1.0)
        );
        let (c, b) = condition_number_inv(&DenseMatrix::identity(2), 1.0).unwrap();
        assert!((c - 1.0).abs() < 1e-15 && (b - 2.0).abs() < 1e-15);
        let u = DenseMatrix::from_rows(&[[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        let (c, b) = condition_number_inv(&u, 1.0).unwrap();
        assert!((c - 2.5).abs() < 1e-14 && (b - 5.0).abs() < 1e-14);
    }

    #[test]
    fn perturbation_values() {
        let a = DenseMatrix::identity(2).scale(2.0);
        let r = check_inverse_perturbation(&a, &DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(r.diff_lhs, 0.0);
        assert_eq!(r.diff_rhs, 0.0);
        assert!(r.holds());

        let r = check_inverse_perturbation(&a, &DenseMatrix::identity(2).scale(0.5)).unwrap();
        assert!((r.diff_lhs - 0.1).abs() < 1e-14);
        assert!((r.diff_rhs - 1.0 / 6.0).abs() < 1e-14);
        assert!((r.inv_b_lhs - 0.4).abs() < 1e-14);
        assert!(r.holds());

        let big = DenseMatrix::identity(2).scale(3.0);
        assert!(matches!(
            check_inverse_perturbation(&a, &big),
            Err(TheoryError::Domain(_))
        ));
    }

    #[test]
    fn combined_bound_components() {
        let u = DenseMatrix::from_rows(&[[1.0], [1.0]]);
        let x = matmul(&u, &u.transpose()).unwrap();
        let bound = LambdaBound::compute(&x, &u, 1.0, 0.1).unwrap();
        assert!((bound.proximality - 1.4).abs() < 1e-15);
        assert_eq!(bound.sufficiency, 0.5 * fro_norm(&x));
        assert!(!bound.satisfied_by(1.4));
        assert!(bound.satisfied_by(1.41));
    }

    #[test]
    fn coincident_operators_have_zero_distance() {
        let x = DenseMatrix::from_rows(&[[1.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.0]]);
        let u = DenseMatrix::from_rows(&[[0.3, 0.1], [0.2, 0.4], [0.1, 0.1]]);
        let lambda = 2.0;
        let p = shifted_product(&x, &u, lambda).unwrap();
        let rep = verify_proximality(&x, &u, &p, lambda, 0.0, 50, 1).unwrap();
        assert_eq!(rep.max_distance, 0.0);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn lambda_below_a_squared_is_rejected() {
        let x = DenseMatrix::identity(3);
        let u = DenseMatrix::filled(3, 2, 1.0);
        let lambda = 1.0; // a² = 6
        let p = shifted_product(&x, &u, lambda).unwrap();
        assert!(matches!(
            verify_proximality(&x, &u, &p, lambda, 0.01, 10, 0),
            Err(TheoryError::Domain(_))
        ));
    }
}
