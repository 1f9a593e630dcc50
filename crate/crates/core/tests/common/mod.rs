//! Reference implementations used as oracles. They share nothing with the
//! library kernels beyond the matrix container: plain triple loops,
//! Gauss-Jordan inversion with partial pivoting, brute-force permutations.
#![allow(dead_code)]

use rand::Rng;
use symnmf::linalg::DenseMatrix;
use symnmf::net::{loss, net_forward, NetParams, TrainConfig};
use symnmf::seeded_rng;

pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
}

pub fn naive_transpose(a: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.cols(), a.rows(), |i, j| a.get(j, i))
}

pub fn gauss_jordan_inverse(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        assert!(d != 0.0, "singular");
        for v in &mut m[c] {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    DenseMatrix::from_fn(n, n, |i, j| m[i][n + j])
}

/// `max{(X + λI) U (UᵀU + λI)⁻¹, 0}` from first principles.
pub fn oracle_half_step(x: &DenseMatrix, u: &DenseMatrix, lambda: f64) -> DenseMatrix {
    let n = x.rows();
    let shifted =
        DenseMatrix::from_fn(n, n, |i, j| x.get(i, j) + if i == j { lambda } else { 0.0 });
    let mut g = naive_matmul(&naive_transpose(u), u);
    for i in 0..g.rows() {
        g.set(i, i, g.get(i, i) + lambda);
    }
    naive_matmul(&naive_matmul(&shifted, u), &gauss_jordan_inverse(&g)).map(|v| v.max(0.0))
}

pub fn fro(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn fro_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Random symmetric nonnegative `BBᵀ` with `B` uniform on `[0, 1)`.
pub fn random_sym(n: usize, inner: usize, seed: u64) -> DenseMatrix {
    let mut rng = seeded_rng(seed);
    let b = DenseMatrix::from_fn(n, inner, |_, _| rng.random_range(0.0..1.0));
    naive_matmul(&b, &naive_transpose(&b))
}

pub fn random_nonneg(rows: usize, cols: usize, hi: f64, seed: u64) -> DenseMatrix {
    let mut rng = seeded_rng(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(0.0..hi))
}

/// Central differences of the training loss in every block weight and λ.
/// Returns `(d_blocks, d_lambda)`.
pub fn fd_gradients(
    x: &DenseMatrix,
    u0: &DenseMatrix,
    params: &NetParams,
    cfg: &TrainConfig,
    h: f64,
) -> (Vec<DenseMatrix>, f64) {
    let f = |p: &NetParams| {
        let fwd = net_forward(u0, p).unwrap();
        loss(x, &fwd, p, cfg).unwrap()
    };
    let mut d_blocks = Vec::new();
    for (k, b) in params.blocks.iter().enumerate() {
        let mut g = DenseMatrix::zeros(b.rows(), b.cols());
        for idx in 0..b.as_slice().len() {
            let (mut plus, mut minus) = (params.clone(), params.clone());
            plus.blocks[k].as_mut_slice()[idx] += h;
            minus.blocks[k].as_mut_slice()[idx] -= h;
            g.as_mut_slice()[idx] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
        d_blocks.push(g);
    }
    let (mut plus, mut minus) = (params.clone(), params.clone());
    plus.lambda += h;
    minus.lambda -= h;
    (d_blocks, (f(&plus) - f(&minus)) / (2.0 * h))
}

/// Gradient entries agree within `rel` relative error, with `abs_floor` on
/// the denominator.
pub fn grad_close(analytic: f64, numeric: f64, rel: f64, abs_floor: f64) -> bool {
    (analytic - numeric).abs() <= rel * analytic.abs().max(numeric.abs()).max(abs_floor)
}

/// Every permutation of `0..k`.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Best fraction of matches over all relabelings of `pred` (labels in
/// `0..k`).
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let best = permutations(k)
        .iter()
        .map(|perm| {
            pred.iter()
                .zip(truth)
                .filter(|(p, t)| perm[**p] == **t)
                .count()
        })
        .max()
        .unwrap();
    best as f64 / pred.len() as f64
}
