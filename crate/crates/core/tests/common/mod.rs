//! Brute-force reference implementations.
//!
//! Each one enumerates its whole configuration space directly: no Gray code,
//! no incremental updates, no analytic reduction of the last axis and no
//! symmetry halving.
#![allow(dead_code)]

use radchaos::{CoeffTensor, SimplexCoeffs, WeightedHypergraph};

/// All vectors in `{-1, 1}^n`.
pub fn sign_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..1u64 << n)
        .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect()
}

/// All indicator vectors of subsets of `0..n`.
pub fn subsets(n: usize) -> Vec<Vec<bool>> {
    (0..1u64 << n)
        .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::new();
        for prefix in &out {
            for o in options {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn cells(a: &CoeffTensor) -> Vec<(Vec<usize>, f64)> {
    let ranges: Vec<Vec<usize>> = a.dims().iter().map(|&n| (0..n).collect()).collect();
    cartesian(&ranges)
        .into_iter()
        .map(|idx| {
            let v = a.get(&idx);
            (idx, v)
        })
        .collect()
}

pub fn cut(a: &CoeffTensor) -> f64 {
    let cs = cells(a);
    let choices: Vec<Vec<Vec<bool>>> = a.dims().iter().map(|&n| subsets(n)).collect();
    cartesian(&choices)
        .iter()
        .map(|sets| {
            cs.iter()
                .filter(|(idx, _)| idx.iter().zip(sets).all(|(&i, s)| s[i]))
                .map(|(_, v)| v)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

pub fn linf(a: &CoeffTensor) -> f64 {
    let cs = cells(a);
    let choices: Vec<Vec<Vec<f64>>> = a.dims().iter().map(|&n| sign_vectors(n)).collect();
    cartesian(&choices)
        .iter()
        .map(|xs| {
            cs.iter()
                .map(|(idx, v)| v * idx.iter().zip(xs).map(|(&i, x)| x[i]).product::<f64>())
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// `max over x in {-1,1}^m of ||A x||_1`.
pub fn opnorm(a: &CoeffTensor) -> f64 {
    let (n, m) = (a.dims()[0], a.dims()[1]);
    sign_vectors(m)
        .iter()
        .map(|x| {
            (0..n)
                .map(|i| (0..m).map(|j| a.get(&[i, j]) * x[j]).sum::<f64>().abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

pub fn star(a: &SimplexCoeffs) -> f64 {
    subsets(a.n())
        .iter()
        .map(|s| {
            a.values()
                .iter()
                .filter(|(k, _)| k.iter().all(|&j| s[j - 1]))
                .map(|(_, v)| v)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

pub fn chaos(a: &SimplexCoeffs) -> f64 {
    sign_vectors(a.n())
        .iter()
        .map(|e| {
            a.values()
                .iter()
                .map(|(k, v)| v * k.iter().map(|&j| e[j - 1]).product::<f64>())
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

pub fn lp(a: &[f64], p: f64) -> f64 {
    let all = sign_vectors(a.len());
    let mean = all
        .iter()
        .map(|e| e.iter().zip(a).map(|(s, x)| s * x).sum::<f64>().abs().powf(p))
        .sum::<f64>()
        / all.len() as f64;
    mean.powf(1.0 / p)
}

/// `max over V' of |sum of theta(e) w(e) over edges inside V'|`.
pub fn disc_for(h: &WeightedHypergraph, theta: &[f64]) -> f64 {
    subsets(h.n())
        .iter()
        .map(|s| {
            h.edges()
                .iter()
                .zip(theta)
                .filter(|(e, _)| e.vertices.iter().all(|&v| s[v]))
                .map(|(e, t)| t * e.weight)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

pub fn disc_all(h: &WeightedHypergraph) -> Vec<f64> {
    sign_vectors(h.edge_count())
        .iter()
        .map(|t| disc_for(h, t))
        .collect()
}

pub fn disc(h: &WeightedHypergraph) -> f64 {
    disc_all(h).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn expected_disc(h: &WeightedHypergraph) -> f64 {
    let all = disc_all(h);
    all.iter().sum::<f64>() / all.len() as f64
}

/// `sum over l of ||{a_j : j_k = l}||_2` for each axis `k`.
pub fn mixed(a: &CoeffTensor) -> Vec<f64> {
    let cs = cells(a);
    (0..a.order())
        .map(|k| {
            (0..a.dims()[k])
                .map(|l| {
                    cs.iter()
                        .filter(|(idx, _)| idx[k] == l)
                        .map(|(_, v)| v * v)
                        .sum::<f64>()
                        .sqrt()
                })
                .sum()
        })
        .collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
