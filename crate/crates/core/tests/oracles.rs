//! Library kernels checked against the reference implementations in
//! `common`.

mod common;

use common::*;
use rand::Rng;
use symnmf::classical::{half_step, random_init, run_classical, sym_gradient, ClassicalConfig};
use symnmf::graph::synth_planted;
use symnmf::linalg::{gram, spd_inverse, spectral_norm_default, spectral_norm_exact, DenseMatrix};
use symnmf::metrics::{accuracy, assign_labels, nmi, purity, relative_error};
use symnmf::net::{init_params, net_backward, net_forward, TrainConfig};
use symnmf::seeded_rng;

#[test]
fn spd_inverse_matches_gauss_jordan() {
    for seed in 0..20 {
        let u = random_nonneg(7, 4, 2.0, seed);
        let lambda = 0.1 + seed as f64 * 0.3;
        let mut shifted = naive_matmul(&naive_transpose(&u), &u);
        for i in 0..4 {
            shifted.set(i, i, shifted.get(i, i) + lambda);
        }
        let got = spd_inverse(&gram(&u), lambda).unwrap();
        let want = gauss_jordan_inverse(&shifted);
        assert!(fro_diff(&got, &want) < 1e-12 * fro(&want), "seed {seed}");
    }
}

#[test]
fn half_step_matches_first_principles() {
    for seed in 0..20 {
        let x = random_sym(9, 3, seed);
        let u = random_init(&x, 3, seed + 100);
        let lambda = 0.05 + seed as f64;
        let got = half_step(&u, &x, lambda).unwrap();
        let want = oracle_half_step(&x, &u, lambda);
        assert!(fro_diff(&got, &want) < 1e-11 * fro(&want).max(1.0));
    }
}

#[test]
fn fresh_network_follows_the_scheme() {
    for seed in 0..10 {
        let x = random_sym(12, 4, seed);
        let u0 = random_init(&x, 3, seed);
        let lambda = 0.5 + seed as f64 * 0.7;
        let k = 1 + (seed as usize % 7);
        let params = init_params(&x, &u0, lambda, k).unwrap();
        let fwd = net_forward(&u0, &params).unwrap();
        let mut u = u0.clone();
        for (i, out) in fwd.outputs.iter().enumerate() {
            u = oracle_half_step(&x, &u, lambda);
            assert!(fro_diff(out, &u) < 1e-10, "seed {seed} block {i}");
        }
    }
}

#[test]
fn sym_gradient_matches_finite_differences() {
    for seed in 0..10 {
        let x = random_sym(6, 3, seed);
        let u = random_nonneg(6, 3, 1.0, seed + 50);
        let f = |u: &DenseMatrix| {
            let r = x.sub(&naive_matmul(u, &naive_transpose(u))).unwrap();
            0.25 * fro(&r).powi(2)
        };
        let g = sym_gradient(&u, &x).unwrap();
        let h = 1e-6;
        for idx in 0..18 {
            let (mut p, mut m) = (u.clone(), u.clone());
            p.as_mut_slice()[idx] += h;
            m.as_mut_slice()[idx] -= h;
            let fd = (f(&p) - f(&m)) / (2.0 * h);
            assert!(
                grad_close(g.as_slice()[idx], fd, 1e-5, 1e-7),
                "seed {seed} entry {idx}"
            );
        }
    }
}

#[test]
fn backward_matches_finite_differences_with_all_terms() {
    let mut rng = seeded_rng(77);
    for seed in 0..8u64 {
        let x = random_sym(5, 2, seed);
        let u0 = random_nonneg(5, 2, 0.8, seed + 10);
        let cfg = TrainConfig {
            num_blocks: 3,
            beta: 0.3,
            gamma_l1: if seed % 2 == 0 { 0.05 } else { 0.0 },
            ..TrainConfig::default()
        };
        let mut params = init_params(&x, &u0, 1.5, 3).unwrap();
        for p in &mut params.blocks {
            for v in p.as_mut_slice() {
                *v += rng.random_range(-0.1..0.1);
            }
        }
        let fwd = net_forward(&u0, &params).unwrap();
        let g = net_backward(&x, &fwd, &params, &cfg).unwrap();
        let (fd_blocks, fd_lambda) = fd_gradients(&x, &u0, &params, &cfg, 1e-6);
        for (a, n) in g.d_blocks.iter().zip(&fd_blocks) {
            for (av, nv) in a.as_slice().iter().zip(n.as_slice()) {
                assert!(
                    grad_close(*av, *nv, 1e-5, 1e-7),
                    "seed {seed}: {av} vs {nv}"
                );
            }
        }
        assert!(grad_close(g.d_lambda, fd_lambda, 1e-5, 1e-7));
    }
}

#[test]
fn hungarian_accuracy_equals_exhaustive_search() {
    let mut rng = seeded_rng(3);
    for _ in 0..100 {
        let k = rng.random_range(1..=5);
        let n = rng.random_range(1..=25);
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let got = accuracy(&pred, &truth).unwrap();
        assert_eq!(got, brute_force_accuracy(&pred, &truth, k));
    }
}

/// NMI straight from the contingency table, natural log, geometric mean.
fn oracle_nmi(pred: &[usize], truth: &[usize]) -> f64 {
    let n = pred.len() as f64;
    let kp = pred.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let mut joint = vec![vec![0.0; kt]; kp];
    for (p, t) in pred.iter().zip(truth) {
        joint[*p][*t] += 1.0;
    }
    let rp: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let rt: Vec<f64> = (0..kt).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let h = |c: &[f64]| -> f64 {
        c.iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| -(v / n) * (v / n).ln())
            .sum()
    };
    let mut mi = 0.0;
    for i in 0..kp {
        for j in 0..kt {
            let v = joint[i][j];
            if v > 0.0 {
                mi += (v / n) * ((v * n) / (rp[i] * rt[j])).ln();
            }
        }
    }
    mi / (h(&rp) * h(&rt)).sqrt()
}

#[test]
fn nmi_and_purity_match_contingency_formulas() {
    let mut rng = seeded_rng(8);
    for _ in 0..100 {
        let n = rng.random_range(4..=30);
        let pred: Vec<usize> = (0..n)
            .map(|i| if i < 2 { i } else { rng.random_range(0..3) })
            .collect();
        let truth: Vec<usize> = (0..n)
            .map(|i| if i < 2 { 1 - i } else { rng.random_range(0..4) })
            .collect();
        assert!((nmi(&pred, &truth).unwrap() - oracle_nmi(&pred, &truth)).abs() < 1e-12);

        let mut majority = 0usize;
        for c in 0..3 {
            let mut counts = [0usize; 4];
            for (p, t) in pred.iter().zip(&truth) {
                if *p == c {
                    counts[*t] += 1;
                }
            }
            majority += counts.iter().max().unwrap();
        }
        assert_eq!(purity(&pred, &truth).unwrap(), majority as f64 / n as f64);
    }
}

#[test]
fn planted_optimum_is_exact() {
    for (n, r) in [(12, 3), (30, 2), (20, 4)] {
        let inst = synth_planted(n, r, 0.0, 0);
        assert_eq!(relative_error(&inst.x, &inst.factor).unwrap(), 0.0);
        assert_eq!(assign_labels(&inst.factor), inst.labels);
        let cfg = ClassicalConfig::new(1.0);
        let (u, trace) = run_classical(&inst.x, &inst.factor, &cfg).unwrap();
        assert!(trace.last_error().unwrap() < 1e-24);
        assert!(fro_diff(&u, &inst.factor) < 1e-10);
    }
}

#[test]
fn power_iteration_agrees_with_jacobi() {
    for seed in 0..10 {
        let a = random_nonneg(8, 5, 1.0, seed);
        let p = spectral_norm_default(&a).unwrap();
        let e = spectral_norm_exact(&a).unwrap();
        assert!((p - e).abs() < 1e-8 * e);
    }
}
