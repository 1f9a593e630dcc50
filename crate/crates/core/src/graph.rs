//! Similarity graphs for clustering and synthetic test instances.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{fro_norm, matmul, DenseMatrix};
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("invalid similarity config: {0}")]
    Config(String),
}

/// Floor applied to a zero kernel bandwidth.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityConfig {
    pub k_neighbors: usize,
    /// Per-point bandwidth (distance to the k-th neighbor) instead of the
    /// global median distance.
    pub self_tuning: bool,
    /// Apply `D^{-1/2} A D^{-1/2}`.
    pub normalize: bool,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 7,
            self_tuning: true,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Similarity {
    pub matrix: DenseMatrix,
    /// Some bandwidth was zero (duplicate points) and got floored.
    pub sigma_floored: bool,
}

fn pairwise_distances(m: &DenseMatrix) -> Vec<Vec<f64>> {
    let n = m.rows();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = m
                .row(i)
                .iter()
                .zip(m.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[i][j] = s.sqrt();
            d[j][i] = d[i][j];
        }
    }
    d
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Gaussian-kernel kNN graph over the rows of `m` (samples × features).
///
/// An edge is kept when either endpoint lists the other among its `k`
/// nearest neighbors; points tied with the k-th distance count as
/// neighbors. Weights are `exp(−d²/(σ_i σ_j))` with zero diagonal.
pub fn build_similarity(m: &DenseMatrix, cfg: &SimilarityConfig) -> Result<Similarity, GraphError> {
    let n = m.rows();
    let k = cfg.k_neighbors;
    if k < 1 || k >= n {
        return Err(GraphError::Config(format!(
            "k_neighbors must satisfy 1 <= k < n (k = {k}, n = {n})"
        )));
    }
    let d = pairwise_distances(m);

    let mut knn = vec![vec![false; n]; n];
    let mut kth = vec![0.0; n];
    for i in 0..n {
        let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[i][j]).collect();
        others.sort_by(f64::total_cmp);
        let radius = others[k - 1];
        kth[i] = radius;
        for j in 0..n {
            if j != i && d[i][j] <= radius {
                knn[i][j] = true;
            }
        }
    }

    let mut sigma_floored = false;
    let global = if cfg.self_tuning {
        0.0
    } else {
        median(
            (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| d[i][j])
                .collect(),
        )
    };
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            let s = if cfg.self_tuning { kth[i] } else { global };
            if s < SIGMA_FLOOR {
                sigma_floored = true;
                SIGMA_FLOOR
            } else {
                s
            }
        })
        .collect();

    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if knn[i][j] || knn[j][i] {
                let w = (-(d[i][j] * d[i][j]) / (sigma[i] * sigma[j])).exp();
                a.set(i, j, w);
                a.set(j, i, w);
            }
        }
    }

    if cfg.normalize {
        let deg: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
        let inv_sqrt: Vec<f64> = deg
            .iter()
            .map(|&g| if g > 0.0 { 1.0 / g.sqrt() } else { 0.0 })
            .collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = a.get(i, j) * inv_sqrt[i] * inv_sqrt[j];
                a.set(i, j, w);
                a.set(j, i, w);
            }
        }
    }
    Ok(Similarity {
        matrix: a,
        sigma_floored,
    })
}

/// A symmetric instance built from known cluster-indicator factors.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub x: DenseMatrix,
    /// Cluster index (`0..r`) of every row.
    pub labels: Vec<usize>,
    pub r: usize,
    /// The planted factor `U*`.
    pub factor: DenseMatrix,
}

/// Balanced contiguous cluster assignment of `n` rows into `r` groups.
fn balanced_labels(n: usize, r: usize) -> Vec<usize> {
    let base = n / r;
    let extra = n % r;
    let mut labels = Vec::with_capacity(n);
    for c in 0..r {
        let size = base + usize::from(c < extra);
        labels.extend(std::iter::repeat_n(c, size));
    }
    labels
}

/// `X = U*U*ᵀ + E`, clipped at zero and re-symmetrized, where `U*` has
/// disjoint indicator columns scaled by `1/sqrt(cluster size)`. `E` is
/// symmetric with i.i.d. uniform entries scaled so that
/// `‖E‖_F ≈ noise · ‖U*U*ᵀ‖_F`.
pub fn synth_planted(n: usize, r: usize, noise: f64, seed: u64) -> PlantedInstance {
    assert!(r >= 1 && r <= n, "need 1 <= r <= n");
    assert!(noise >= 0.0, "noise must be >= 0");
    let labels = balanced_labels(n, r);
    let mut sizes = vec![0usize; r];
    for &l in &labels {
        sizes[l] += 1;
    }
    let factor = DenseMatrix::from_fn(n, r, |i, j| {
        if labels[i] == j {
            1.0 / (sizes[j] as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut x = matmul(&factor, &factor.transpose()).expect("conformable");
    if noise > 0.0 {
        // uniform[-1, 1] has variance 1/3
        let scale = noise * fro_norm(&x) / n as f64 * 3f64.sqrt();
        let mut rng = seeded_rng(seed);
        for i in 0..n {
            for j in i..n {
                let e = scale * rng.random_range(-1.0..=1.0);
                let v = (x.get(i, j) + e).max(0.0);
                x.set(i, j, v);
                x.set(j, i, v);
            }
        }
    }
    PlantedInstance {
        x,
        labels,
        r,
        factor,
    }
}

/// Isotropic Gaussian blobs in 2-D with centers evenly spaced on a circle.
/// Returns `(features, labels)`.
pub fn gaussian_blobs(
    n: usize,
    clusters: usize,
    radius: f64,
    spread: f64,
    seed: u64,
) -> (DenseMatrix, Vec<usize>) {
    assert!(clusters >= 1, "need at least one cluster");
    let labels = balanced_labels(n, clusters);
    let mut rng = seeded_rng(seed);
    let mut data = Vec::with_capacity(2 * n);
    for &l in &labels {
        let angle = 2.0 * std::f64::consts::PI * l as f64 / clusters as f64;
        let (cx, cy) = (radius * angle.cos(), radius * angle.sin());
        data.push(cx + spread * rng.sample::<f64, _>(StandardNormal));
        data.push(cy + spread * rng.sample::<f64, _>(StandardNormal));
    }
    (DenseMatrix::from_vec(n, 2, data).expect("finite"), labels)
}
