//! Evaluation quantities: relative error, argmax labels, clustering
//! accuracy (optimal label matching), NMI, purity and the sparse factor.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::{fro_norm_sq, gram, DenseMatrix, LinalgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `‖X − UUᵀ‖²_F / ‖X‖²_F`.
pub fn relative_error(x: &DenseMatrix, u: &DenseMatrix) -> Result<f64, MetricsError> {
    let x_norm_sq = fro_norm_sq(x);
    if x_norm_sq == 0.0 {
        return Err(MetricsError::Domain(
            "relative error undefined for X = 0".into(),
        ));
    }
    Ok(relative_error_unchecked(x, u, x_norm_sq)?)
}

/// Squared residual `‖X − UUᵀ‖²_F`, summed entry by entry rather than
/// through the trace expansion, which cancels badly near an exact
/// factorization.
pub fn residual_sq(x: &DenseMatrix, u: &DenseMatrix) -> Result<f64, LinalgError> {
    let (n, r) = u.shape();
    if x.shape() != (n, n) {
        return Err(LinalgError::Shape {
            op: "residual",
            left: x.shape(),
            right: (n, n),
        });
    }
    let (xs, us) = (x.as_slice(), u.as_slice());
    let mut total = 0.0;
    for i in 0..n {
        let ui = &us[i * r..(i + 1) * r];
        let xi = &xs[i * n..(i + 1) * n];
        for (j, &xij) in xi.iter().enumerate() {
            let uj = &us[j * r..(j + 1) * r];
            let d = xij - ui.iter().zip(uj).map(|(a, b)| a * b).sum::<f64>();
            total += d * d;
        }
    }
    Ok(total)
}

pub(crate) fn relative_error_unchecked(
    x: &DenseMatrix,
    u: &DenseMatrix,
    x_norm_sq: f64,
) -> Result<f64, LinalgError> {
    if x_norm_sq == 0.0 {
        return Ok(if gram(u).max_abs() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(residual_sq(x, u)? / x_norm_sq)
}

/// Per-row argmax; ties go to the lowest column index.
pub fn assign_labels(u: &DenseMatrix) -> Vec<usize> {
    (0..u.rows())
        .map(|i| {
            let row = u.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Maps arbitrary labels onto `0..k` in order of first appearance.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let next = map.len();
        out.push(*map.entry(l).or_insert(next));
    }
    (out, map.len())
}

/// Contingency table `counts[p][t]` plus the number of predicted and true
/// classes.
fn contingency(pred: &[usize], truth: &[usize]) -> (Vec<Vec<usize>>, usize, usize) {
    let (p, kp) = compact(pred);
    let (t, kt) = compact(truth);
    let mut table = vec![vec![0usize; kt]; kp];
    for (&a, &b) in p.iter().zip(&t) {
        table[a][b] += 1;
    }
    (table, kp, kt)
}

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<(), MetricsError> {
    if pred.len() != truth.len() {
        return Err(MetricsError::Domain(format!(
            "label vectors differ in length: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(MetricsError::Domain("empty label vectors".into()));
    }
    Ok(())
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method,
/// potentials formulation). Returns `assignment[row] = col`.
pub fn hungarian(costs: &[Vec<i64>]) -> Vec<usize> {
    let n = costs.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Fraction of samples correctly labeled under the best one-to-one matching
/// of predicted to true labels.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64, MetricsError> {
    check_lengths(pred, truth)?;
    let (table, kp, kt) = contingency(pred, truth);
    let k = kp.max(kt);
    let max_count = pred.len() as i64;
    // pad to square; maximize matches == minimize (max - count)
    let costs: Vec<Vec<i64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let c = if i < kp && j < kt {
                        table[i][j] as i64
                    } else {
                        0
                    };
                    max_count - c
                })
                .collect()
        })
        .collect();
    let assignment = hungarian(&costs);
    let matched: usize = assignment
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < kp && j < kt)
        .map(|(i, &j)| table[i][j])
        .sum();
    Ok(matched as f64 / pred.len() as f64)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(P;T) / sqrt(H(P) H(T))` (natural log).
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64, MetricsError> {
    check_lengths(pred, truth)?;
    let n = pred.len() as f64;
    let (table, kp, kt) = contingency(pred, truth);
    let row: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..kt).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    // same partition up to relabeling
    if kp == kt
        && table
            .iter()
            .all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
    {
        return Ok(1.0);
    }
    let hp = entropy(row.iter().copied(), n);
    let ht = entropy(col.iter().copied(), n);
    if hp == 0.0 || ht == 0.0 {
        // single-cluster on at least one side
        return Ok(if kp == 1 && kt == 1 { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for i in 0..kp {
        for j in 0..kt {
            let c = table[i][j];
            if c == 0 {
                continue;
            }
            let pij = c as f64 / n;
            mi += pij * (pij * n * n / (row[i] as f64 * col[j] as f64)).ln();
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// `(1/n) Σ_clusters max_class |cluster ∩ class|`.
pub fn purity(pred: &[usize], truth: &[usize]) -> Result<f64, MetricsError> {
    check_lengths(pred, truth)?;
    let (table, _, _) = contingency(pred, truth);
    let hits: usize = table
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / pred.len() as f64)
}

/// Sparse factor: fraction of entries with `|x| > 0.01 · mean(x)`, the mean
/// taken over all entries including zeros.
pub fn sparse_factor(u: &DenseMatrix) -> f64 {
    let data = u.as_slice();
    if data.is_empty() {
        return 0.0;
    }
    let threshold = 0.01 * u.mean();
    data.iter().filter(|v| v.abs() > threshold).count() as f64 / data.len() as f64
}

/// Predicted labels plus the metrics that need ground truth (absent when no
/// truth was supplied).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub predicted: Vec<usize>,
    pub accuracy: Option<f64>,
    pub nmi: Option<f64>,
    pub purity: Option<f64>,
    pub sparse_factor: Option<f64>,
}

impl ClusteringResult {
    pub fn evaluate(u: &DenseMatrix, truth: Option<&[usize]>) -> Result<Self, MetricsError> {
        let predicted = assign_labels(u);
        let Some(truth) = truth else {
            return Ok(Self {
                predicted,
                accuracy: None,
                nmi: None,
                purity: None,
                sparse_factor: None,
            });
        };
        Ok(Self {
            accuracy: Some(accuracy(&predicted, truth)?),
            nmi: Some(nmi(&predicted, truth)?),
            purity: Some(purity(&predicted, truth)?),
            sparse_factor: Some(sparse_factor(u)),
            predicted,
        })
    }

    /// `key: value` lines; metric keys are omitted when absent.
    pub fn to_report(&self) -> String {
        let mut s = format!("samples: {}\n", self.predicted.len());
        let clusters = compact(&self.predicted).1;
        s.push_str(&format!("clusters_found: {clusters}\n"));
        for (key, val) in [
            ("accuracy", self.accuracy),
            ("nmi", self.nmi),
            ("purity", self.purity),
            ("sparse_factor", self.sparse_factor),
        ] {
            if let Some(v) = val {
                s.push_str(&format!("{key}: {v:.17e}\n"));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matmul;

    #[test]
    fn relative_error_cases() {
        let u = DenseMatrix::from_rows(&[[1.0], [2.0]]);
        let x = matmul(&u, &u.transpose()).unwrap();
        assert_eq!(relative_error(&x, &u).unwrap(), 0.0);
        assert_eq!(relative_error(&x, &DenseMatrix::zeros(2, 1)).unwrap(), 1.0);
        let e = relative_error(
            &DenseMatrix::identity(2),
            &DenseMatrix::from_rows(&[[1.0], [0.0]]),
        )
        .unwrap();
        assert_eq!(e, 0.5);
        assert!(relative_error(&DenseMatrix::zeros(2, 2), &u).is_err());
    }

    #[test]
    fn labels() {
        let ind = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(assign_labels(&ind), vec![0, 1, 0]);
        assert_eq!(assign_labels(&DenseMatrix::zeros(2, 3)), vec![0, 0]);
        let u = DenseMatrix::from_rows(&[[0.1, 0.9], [0.7, 0.3]]);
        assert_eq!(assign_labels(&u), vec![1, 0]);
    }

    #[test]
    fn accuracy_cases() {
        let t = [0, 1, 2, 2, 1, 0];
        assert_eq!(accuracy(&t, &t).unwrap(), 1.0);
        let permuted: Vec<usize> = t.iter().map(|&l| [7, 3, 5][l]).collect();
        assert_eq!(accuracy(&permuted, &t).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[0], &[0, 1]).is_err());
        // more predicted clusters than classes
        assert_eq!(accuracy(&[0, 1, 2, 3], &[0, 0, 1, 1]).unwrap(), 0.5);
    }

    #[test]
    fn nmi_cases() {
        let t = [0, 0, 1, 1, 2, 2];
        assert_eq!(nmi(&t, &t).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap(), 0.0);
        assert_eq!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.0);
        assert_eq!(nmi(&[4, 4, 4], &[1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn purity_cases() {
        let t = [0, 1, 2, 0, 1, 2];
        assert_eq!(purity(&t, &t).unwrap(), 1.0);
        assert!((purity(&[0; 6], &t).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
    }

    #[test]
    fn sparse_factor_cases() {
        assert_eq!(sparse_factor(&DenseMatrix::zeros(2, 2)), 0.0);
        assert_eq!(sparse_factor(&DenseMatrix::filled(3, 2, 1.0)), 1.0);
        assert_eq!(
            sparse_factor(&DenseMatrix::from_rows(&[[1.0, 1.0, 1.0, 0.0]])),
            0.75
        );
    }

    #[test]
    fn report_omits_absent_metrics() {
        let u = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
        let r = ClusteringResult::evaluate(&u, None).unwrap();
        let text = r.to_report();
        assert!(!text.contains("accuracy") && !text.contains("nmi"));
        let r = ClusteringResult::evaluate(&u, Some(&[1, 0])).unwrap();
        assert!(r.to_report().contains("accuracy: 1.0"));
    }
}
