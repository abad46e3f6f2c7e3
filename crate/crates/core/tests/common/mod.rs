//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use chainspec::graph::{BirthDeath, FiniteGraph, Potential};
use chainspec::sequence::SequenceSpec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense minimiser assembled from explicit matrices: mass `M`, Laplacian
/// rows `L` on the truncated path `0..=n+1`, and weighted incidence `D`.
/// Works in `u = 1 - f`, which vanishes from `n` on.
pub fn dense_minimum(chain: &BirthDeath, n: usize, k: Option<usize>) -> f64 {
    let size = n + 2;
    let lo = k.map_or(0, |k| k + 1);
    let m: Vec<f64> = (0..size).map(|r| chain.m(r).unwrap()).collect();
    let b: Vec<f64> = (0..size).map(|r| chain.b(r).unwrap()).collect();
    let mut lap = DMatrix::<f64>::zeros(n + 1, size);
    for r in 0..=n {
        if r > 0 {
            lap[(r, r)] += b[r - 1] / m[r];
            lap[(r, r - 1)] -= b[r - 1] / m[r];
        }
        lap[(r, r)] += b[r] / m[r];
        lap[(r, r + 1)] -= b[r] / m[r];
    }
    let mut inc = DMatrix::<f64>::zeros(n, size);
    for r in 0..n {
        inc[(r, r)] = b[r].sqrt();
        inc[(r, r + 1)] = -b[r].sqrt();
    }
    let mut mass = DMatrix::<f64>::zeros(size, size);
    for r in 0..n {
        mass[(r, r)] = m[r];
    }
    let weight_lap = DMatrix::from_diagonal(&DVector::from_iterator(n + 1, m[..=n].iter().copied()));
    // u = P x + p with x the free values u(lo..n) and p = 1 below lo
    let free = n - lo;
    let mut p_mat = DMatrix::<f64>::zeros(size, free);
    for j in 0..free {
        p_mat[(lo + j, j)] = 1.0;
    }
    let p_vec = DVector::from_iterator(size, (0..size).map(|r| if r < lo { 1.0 } else { 0.0 }));
    let ones_minus_p = DVector::from_iterator(size, (0..size).map(|r| if r < lo { 0.0 } else { 1.0 }));
    let lp = &lap * &p_mat;
    let dp = &inc * &p_mat;
    let gram = p_mat.transpose() * &mass * &p_mat + lp.transpose() * &weight_lap * &lp + dp.transpose() * &dp;
    let rhs = p_mat.transpose() * &mass * ones_minus_p
        - lp.transpose() * &weight_lap * (&lap * &p_vec)
        - dp.transpose() * (&inc * &p_vec);
    let x = gram.cholesky().expect("Gram matrix positive definite").solve(&rhs);
    let u = &p_mat * x + p_vec;
    let lu = &lap * &u;
    let du = &inc * &u;
    let tail = chain.measure.tail_sum(n).unwrap().unwrap().value;
    (0..n).map(|r| (1.0 - u[r]).powi(2) * m[r]).sum::<f64>()
        + tail
        + (0..=n).map(|r| lu[r] * lu[r] * m[r]).sum::<f64>()
        + du.iter().map(|d| d * d).sum::<f64>()
}

/// Chains with summable measure, for capacity checks.
pub fn capacity_chain(rng: &mut ChaCha8Rng) -> BirthDeath {
    let edge = if rng.gen_bool(0.5) {
        SequenceSpec::power(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.5))
    } else {
        SequenceSpec::exponential(rng.gen_range(0.5..2.0), rng.gen_range(0.9..1.1))
    };
    let measure = if rng.gen_bool(0.5) {
        SequenceSpec::power(rng.gen_range(0.5..2.0), rng.gen_range(-5.0..-1.5))
    } else {
        SequenceSpec::exponential(rng.gen_range(0.5..2.0), rng.gen_range(0.5..0.95))
    };
    BirthDeath::new(edge, measure)
}

/// Second-order form of the eigen equation, solved forward row by row.
pub fn naive_eigen(chain: &BirthDeath, w: &Potential, lambda: f64, n: usize) -> Vec<f64> {
    let mut v = vec![1.0];
    for r in 0..n {
        let left = if r == 0 {
            0.0
        } else {
            chain.b(r - 1).unwrap() * (v[r] - v[r - 1])
        };
        let mass = chain.m(r).unwrap();
        // b(r) (v(r) - v(r+1)) = (lambda - W) v m - left
        let rhs = (lambda - w.eval(r).unwrap()) * v[r] * mass - left;
        v.push(v[r] - rhs / chain.b(r).unwrap());
    }
    v
}

/// Rows `1..n-1` of `H` and `T^-1 (L + W) T`, entry by entry.
pub fn dense_gap(chain: &BirthDeath, w: &Potential, lambda: f64, v: &[f64]) -> f64 {
    let n = v.len() - 1;
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let (bl, br, m) = (chain.b(i - 1).unwrap(), chain.b(i).unwrap(), chain.m(i).unwrap());
        let mt = m * v[i] * v[i];
        let h = [
            -bl * v[i - 1] * v[i] / mt,
            (bl * v[i - 1] * v[i] + br * v[i] * v[i + 1]) / mt + lambda,
            -br * v[i] * v[i + 1] / mt,
        ];
        let conj = [
            -bl / m * v[i - 1] / v[i],
            (bl + br) / m + w.eval(i).unwrap(),
            -br / m * v[i + 1] / v[i],
        ];
        let scale = h.iter().chain(conj.iter()).fold(0.0f64, |a, x| a.max(x.abs()));
        for j in 0..3 {
            worst = worst.max((h[j] - conj[j]).abs() / scale);
        }
    }
    worst
}

/// Each side of the identity computed from its definition, vertex by vertex.
pub fn split_laplacians(g: &FiniteGraph, x1: &BTreeSet<usize>, f: &[f64], x: usize) -> (f64, f64) {
    let inner = |v: usize| x1.contains(&v);
    let on_boundary = |v: usize| g.neighbours(v).iter().any(|&(y, _)| inner(y) != inner(v));
    let f1 = |v: usize| if inner(v) { f[v] } else { 0.0 };
    let f2 = |v: usize| if inner(v) { 0.0 } else { f[v] };
    let f3 = |v: usize| if on_boundary(v) { f[v] } else { 0.0 };
    let mut full = 0.0;
    let mut parts = 0.0;
    for &(y, b) in g.neighbours(x) {
        full += b * (f[x] - f[y]);
        parts += match (inner(x), inner(y)) {
            (true, true) => b * (f1(x) - f1(y)),
            (false, false) => b * (f2(x) - f2(y)),
            _ => b * (f3(x) - f3(y)),
        };
    }
    (full / g.measure[x], parts / g.measure[x])
}
