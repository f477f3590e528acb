//! Gauss–Jacobi rules on `[0, 1]` for weights `tau^a (1 - tau)^b`.
//!
//! Nodes come from the eigenvalues of the Jacobi matrix (Golub–Welsch) and are
//! then polished by Newton steps on the three-term recurrence. Weights are the
//! Christoffel numbers `1 / sum_k p_k(x)^2` of the orthonormal polynomials, so
//! they are normalized to a probability rule.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes and non-negative weights approximating `integral P(tau) f(tau) dtau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let order = nodes.len();
        Self {
            nodes,
            weights,
            order,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(t, w)| w * f(t)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Same nodes with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
            order: self.order,
        }
    }
}

// Recurrence coefficients of the Jacobi polynomials for weight
// (1 - x)^alpha (1 + x)^beta on [-1, 1]: diagonal a_k and off-diagonal b_k
// (b_k couples degree k-1 and k).
fn jacobi_diag(k: usize, alpha: f64, beta: f64) -> f64 {
    let s = alpha + beta;
    if k == 0 {
        (beta - alpha) / (s + 2.0)
    } else {
        let kk = 2.0 * k as f64 + s;
        (beta * beta - alpha * alpha) / (kk * (kk + 2.0))
    }
}

fn jacobi_offdiag(k: usize, alpha: f64, beta: f64) -> f64 {
    let s = alpha + beta;
    let kf = k as f64;
    let kk = 2.0 * kf + s;
    // For k = 1 the factor (k + s) / (2k + s - 1) is identically 1.
    let ratio = if k == 1 { 1.0 } else { (kf + s) / (kk - 1.0) };
    (4.0 * kf * (kf + alpha) * (kf + beta) * ratio / (kk * kk * (kk + 1.0))).sqrt()
}

/// Evaluates the orthonormal recurrence at `x`. Returns
/// `(sum_{k<n} p_k^2, p_n, p_n')`, with `p_n` rescaled so its leading
/// behavior is the monic-like recurrence without the final `1 / b_n`.
fn recurrence(x: f64, n: usize, diag: &[f64], off: &[f64]) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut p = 1.0;
    let mut dp_prev = 0.0;
    let mut dp = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += p * p;
        let b_prev = if k == 0 { 0.0 } else { off[k - 1] };
        let next = (x - diag[k]) * p - b_prev * p_prev;
        let dnext = p + (x - diag[k]) * dp - b_prev * dp_prev;
        if k + 1 < n {
            let b = off[k];
            p_prev = p;
            p = next / b;
            dp_prev = dp;
            dp = dnext / b;
        } else {
            return (sum_sq, next, dnext);
        }
    }
    unreachable!("n >= 1")
}

/// Gauss–Jacobi rule with `order` nodes for the probability weight
/// proportional to `tau^a (1 - tau)^b` on `[0, 1]`.
pub fn gauss_jacobi_unit(order: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    if !(a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Jacobi exponents must exceed -1 (got {a}, {b})"
        )));
    }
    // tau = (1 + x) / 2 maps tau^a to (1 + x)^a, i.e. the Jacobi beta parameter.
    let (alpha, beta) = (b, a);
    let diag: Vec<f64> = (0..order).map(|k| jacobi_diag(k, alpha, beta)).collect();
    let off: Vec<f64> = (1..order).map(|k| jacobi_offdiag(k, alpha, beta)).collect();

    let mut jm = DMatrix::<f64>::zeros(order, order);
    for k in 0..order {
        jm[(k, k)] = diag[k];
        if k + 1 < order {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let mut xs: Vec<f64> = jm.symmetric_eigenvalues().iter().copied().collect();
    xs.sort_by(|p, q| p.total_cmp(q));

    let mut weights = Vec::with_capacity(order);
    for x in xs.iter_mut() {
        for _ in 0..3 {
            let (_, p, dp) = recurrence(*x, order, &diag, &off);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            let cand = *x - step;
            if !(-1.0..=1.0).contains(&cand) {
                break;
            }
            *x = cand;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (sum_sq, _, _) = recurrence(*x, order, &diag, &off);
        weights.push(1.0 / sum_sq);
    }
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    let nodes = xs.into_iter().map(|x| (0.5 * (1.0 + x)).clamp(0.0, 1.0)).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
    })
}

/// Gauss–Legendre on `[0, 1]` with weights summing to 1.
pub fn gauss_legendre_unit(order: usize) -> Result<QuadratureRule> {
    gauss_jacobi_unit(order, 0.0, 0.0)
}
