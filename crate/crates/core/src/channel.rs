//! The pure-loss channel on a truncated Fock basis.
//!
//! Two independent evaluations are provided. [`apply_kraus`] sums the Kraus
//! operators `sqrt((1-tau)^l / l!) tau^(n/2) a^l` as dense matrices.
//! [`apply_ladder`] instead propagates each off-diagonal ladder
//! `c^(l) = (rho[l,0], rho[1+l,1], ...)` with the closed-form exponential of the
//! master-equation generator restricted to that ladder.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{CMatrix, DensityMatrix};

/// Power transmissivity `tau = exp(-gamma t)` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Transmissivity(f64);

impl Transmissivity {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidTransmissivity(tau));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Transmissivity {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        Self::new(tau)
    }
}

/// Precomputed Kraus operators for one `(tau, cutoff)` pair.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(tau: Transmissivity, cutoff: usize) -> Self {
        let tau = tau.value();
        let dim = cutoff + 1;
        let zero = Complex64::new(0.0, 0.0);
        let annihilation = CMatrix::from_fn(dim, dim, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                zero
            }
        });
        let damping = CMatrix::from_diagonal(&DVector::from_fn(dim, |n, _| {
            Complex64::new(tau.sqrt().powi(n as i32), 0.0)
        }));

        let mut ops = Vec::with_capacity(dim);
        let mut a_pow = CMatrix::identity(dim, dim);
        let mut scale = 1.0; // (1 - tau)^l / l!
        for l in 0..dim {
            if l > 0 {
                a_pow = &a_pow * &annihilation;
                scale *= (1.0 - tau) / l as f64;
            }
            ops.push(&damping * &a_pow * Complex64::new(scale.sqrt(), 0.0));
        }
        Self { ops }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn cutoff(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let dim = rho.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for k in &self.ops {
            out += k * rho * k.adjoint();
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.cutoff() != self.cutoff() {
            return Err(Error::DimensionMismatch {
                left: rho.cutoff(),
                right: self.cutoff(),
            });
        }
        Ok(DensityMatrix::from_channel_output(self.apply_matrix(rho.matrix())))
    }
}

/// Output of the pure-loss channel via its Kraus decomposition.
pub fn apply_kraus(rho: &DensityMatrix, tau: Transmissivity) -> DensityMatrix {
    let channel = KrausChannel::new(tau, rho.cutoff());
    DensityMatrix::from_channel_output(channel.apply_matrix(rho.matrix()))
}

/// Closed-form `exp(A^(l) t)` acting on the ladder vector `c^(l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPropagator {
    l: usize,
    matrix: DMatrix<f64>,
}

impl LadderPropagator {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Builds the upper-triangular propagator of ladder `l` with `dim` entries.
///
/// Entry `(i, j)` for `j >= i` (0-based) is
/// `tau^(l/2 + i) * (1-tau)^(j-i) / (j-i)! * prod_{r=i+1}^{j} sqrt(r (l + r))`,
/// the diagonal decay times the exponential of the nilpotent hopping part.
pub fn ladder_propagator(l: usize, tau: Transmissivity, dim: usize) -> LadderPropagator {
    let tau = tau.value();
    let loss = 1.0 - tau;
    let mut matrix = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let decay = tau.sqrt().powi(l as i32) * tau.powi(i as i32);
        let mut hop = 1.0;
        matrix[(i, i)] = decay;
        for j in (i + 1)..dim {
            let r = j as f64;
            hop *= loss * (r * (l as f64 + r)).sqrt() / (j - i) as f64;
            matrix[(i, j)] = decay * hop;
        }
    }
    LadderPropagator { l, matrix }
}

/// Output of the pure-loss channel by evolving every ladder `c^(l)` separately.
pub fn apply_ladder(rho: &DensityMatrix, tau: Transmissivity) -> DensityMatrix {
    let dim = rho.dim();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(dim, dim);
    for l in 0..dim {
        let len = dim - l;
        let prop = ladder_propagator(l, tau, len);
        for i in 0..len {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i..len {
                acc += m[(j + l, j)] * prop.matrix[(i, j)];
            }
            out[(i + l, i)] = acc;
            if l > 0 {
                out[(i, i + l)] = acc.conj();
            }
        }
    }
    DensityMatrix::from_channel_output(out)
}
