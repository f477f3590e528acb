//! Single-mode states and operators on a truncated Fock basis `|0>, ..., |N>`.
//!
//! The cutoff `N` is carried by every object and is never changed implicitly.
//! Pure loss only moves weight towards lower photon numbers, so a state whose
//! support fits under the cutoff stays there exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub type CMatrix = DMatrix<Complex64>;

/// Pure state `sum_n d_n |n>` truncated at photon number `cutoff()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    /// Builds a state from amplitudes that are already normalized.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("no amplitudes".into()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NumericPolicy::DEFAULT.construction {
            return Err(Error::InvalidState(format!(
                "squared norm {norm} differs from 1"
            )));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("amplitudes have zero norm".into()));
        }
        Self::new(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Fock state `|n>` embedded under `cutoff`.
    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        FockState::new(n).pure(cutoff)
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Photon-number distribution `|d_n|^2`.
    pub fn weights(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_photon(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    /// `|psi><psi|`.
    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.dim();
        let mat = CMatrix::from_fn(dim, dim, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix { mat }
    }

    /// Applies `exp(i phi n)`.
    pub fn phase_rotated(&self, phi: f64) -> Self {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(n, a)| a * Complex64::from_polar(1.0, phi * n as f64))
            .collect();
        Self { amps }
    }

    /// Pads with vacuum amplitudes up to a larger cutoff.
    pub fn embed(&self, cutoff: usize) -> Result<Self> {
        if cutoff < self.cutoff() {
            return Err(Error::InvalidState(format!(
                "cannot shrink cutoff {} to {cutoff}",
                self.cutoff()
            )));
        }
        let mut amps = self.amps.clone();
        amps.resize(cutoff + 1, Complex64::new(0.0, 0.0));
        Ok(Self { amps })
    }
}

/// Free-function form of [`PureState::to_density`].
pub fn pure_to_density(state: &PureState) -> DensityMatrix {
    state.to_density()
}

/// Free-function form of [`PureState::mean_photon`].
pub fn mean_photon(state: &PureState) -> f64 {
    state.mean_photon()
}

/// Hermitian, positive semidefinite, unit-trace matrix on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let policy = NumericPolicy::DEFAULT;
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidDensityMatrix("matrix must be square and non-empty".into()));
        }
        let herm = max_abs(&(&mat - mat.adjoint()));
        if herm > policy.construction {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max deviation {herm:e})"
            )));
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > policy.derived || trace.im.abs() > policy.derived {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace} differs from 1")));
        }
        let min_eig = mat
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -policy.derived {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix produced by a trace-preserving map of a valid input.
    pub(crate) fn from_channel_output(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn cutoff(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Diagonal in the Fock basis, i.e. the photon-number distribution.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    pub fn mean_photon(&self) -> f64 {
        (0..self.dim()).map(|i| i as f64 * self.mat[(i, i)].re).sum()
    }

    /// Largest modulus of an off-diagonal entry.
    pub fn max_coherence(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i != j {
                    worst = worst.max(self.mat[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Photon-number eigenstate `|n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FockState {
    pub n: usize,
}

impl FockState {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn pure(&self, cutoff: usize) -> Result<PureState> {
        if cutoff < self.n {
            return Err(Error::InvalidState(format!(
                "Fock state |{}> does not fit under cutoff {cutoff}",
                self.n
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        amps[self.n] = Complex64::new(1.0, 0.0);
        Ok(PureState { amps })
    }
}

/// Real superposition of the two Fock states adjacent to a mean photon number:
/// `|a| |ceil(nbar) - 1> + |c| |ceil(nbar)>` with `|c|^2 = 1 - ceil(nbar) + nbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InBetweenState {
    nbar: f64,
}

impl InBetweenState {
    pub fn new(nbar: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::InvalidState(format!("mean photon number {nbar} must be >= 0")));
        }
        Ok(Self { nbar })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// `ceil(nbar)`, the upper Fock index and the smallest admissible cutoff.
    pub fn upper(&self) -> usize {
        self.nbar.ceil() as usize
    }

    /// `|c(nbar)|`, amplitude on `|ceil(nbar)>`.
    pub fn upper_amplitude(&self) -> f64 {
        (1.0 - self.nbar.ceil() + self.nbar).clamp(0.0, 1.0).sqrt()
    }

    /// `|a(nbar)|`, amplitude on `|ceil(nbar) - 1>`.
    pub fn lower_amplitude(&self) -> f64 {
        let c = self.upper_amplitude();
        (1.0 - c * c).max(0.0).sqrt()
    }

    pub fn is_fock(&self) -> bool {
        self.nbar.fract() == 0.0
    }

    pub fn pure(&self, cutoff: usize) -> Result<PureState> {
        let upper = self.upper();
        if cutoff < upper {
            return Err(Error::Infeasible { nbar: self.nbar, cutoff });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        amps[upper] = Complex64::new(self.upper_amplitude(), 0.0);
        if upper > 0 {
            amps[upper - 1] = Complex64::new(self.lower_amplitude(), 0.0);
        }
        Ok(PureState { amps })
    }
}

/// Frobenius norm of `AB - BA`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok((a * b - b * a).norm())
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
