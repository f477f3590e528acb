//! Personick's minimum mean square error for a probe state and a prior.
//!
//! With `Gamma_k = integral P(tau) tau^k rho(tau) dtau`, the optimal estimator
//! operator `B` solves `Gamma_0 B + B Gamma_0 = 2 Gamma_1` and the attainable
//! minimum is `delta = tr Gamma_2 - tr(B Gamma_1)`. The optimal projective
//! measurement is the eigenbasis of `B`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{KrausChannel, Transmissivity};
use crate::error::{Error, Result};
use crate::fock::{commutator_norm, CMatrix, PureState};
use crate::policy::NumericPolicy;
use crate::prior::{PriorPdf, DEFAULT_ORDER};
use crate::quadrature::QuadratureRule;

/// Controls for the quadrature behind the `Gamma_k` integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseOptions {
    /// Starting number of Gauss nodes for continuous priors.
    pub order: usize,
    /// Stop doubling once successive MMSE values differ by less than this.
    pub tolerance: f64,
    pub max_order: usize,
    pub policy: NumericPolicy,
}

impl Default for MmseOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            tolerance: 1e-10,
            max_order: 3200,
            policy: NumericPolicy::DEFAULT,
        }
    }
}

/// Nodes used to assemble the `Gamma_k`.
///
/// Entries `rho(tau)[m, n]` are `tau^((m+n)/2)` times a polynomial, so for a
/// continuous prior the odd-parity entries are integrated with a second rule
/// that carries the extra `sqrt(tau)` in its weight. Both parts are then exact
/// once the rule has enough nodes for the polynomial degree.
#[derive(Debug, Clone)]
pub struct GammaQuadrature {
    rule: QuadratureRule,
    sqrt_rule: Option<QuadratureRule>,
    order: usize,
}

impl GammaQuadrature {
    pub fn new(prior: &PriorPdf, order: usize) -> Result<Self> {
        let prior = effective_prior(prior);
        Ok(Self {
            rule: prior.make_rule(order)?,
            sqrt_rule: prior.make_sqrt_rule(order)?,
            order,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Whether the rules integrate every `Gamma_k` entry exactly for this cutoff.
    pub fn is_exact_for(&self, cutoff: usize) -> bool {
        // Highest polynomial degree in tau is k + cutoff with k <= 2.
        self.sqrt_rule.is_none() || 2 * self.order >= cutoff + 3
    }
}

fn effective_prior(prior: &PriorPdf) -> PriorPdf {
    match prior.point_mass() {
        Some(tau0) if !matches!(prior, PriorPdf::Delta { .. }) => PriorPdf::Delta { tau0 },
        _ => prior.clone(),
    }
}

/// The moment operators `Gamma_0`, `Gamma_1`, `Gamma_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gammas {
    pub gamma0: CMatrix,
    pub gamma1: CMatrix,
    pub gamma2: CMatrix,
}

impl Gammas {
    pub fn cutoff(&self) -> usize {
        self.gamma0.nrows() - 1
    }

    /// `||[Gamma_0, Gamma_1]||_F`.
    pub fn commutator_g01(&self) -> f64 {
        commutator_norm(&self.gamma0, &self.gamma1).unwrap_or(f64::NAN)
    }
}

fn accumulate(
    gammas: &mut [CMatrix; 3],
    rho: &CMatrix,
    weight: f64,
    tau: f64,
    parity: Option<usize>,
) {
    let dim = rho.nrows();
    let scales = [weight, weight * tau, weight * tau * tau];
    for (g, s) in gammas.iter_mut().zip(scales) {
        for i in 0..dim {
            for j in 0..dim {
                if parity.is_none_or(|p| (i + j) % 2 == p) {
                    g[(i, j)] += rho[(i, j)] * s;
                }
            }
        }
    }
}

/// Assembles the `Gamma_k` for `state` from channel outputs at the quadrature nodes.
pub fn build_gammas_with(state: &PureState, quad: &GammaQuadrature) -> Gammas {
    let dim = state.dim();
    let rho0 = state.to_density().into_matrix();
    let mut acc = [CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim)];
    let output = |tau: f64| {
        // Rules only produce nodes inside [0, 1].
        let t = Transmissivity::new(tau.clamp(0.0, 1.0)).expect("node in [0, 1]");
        KrausChannel::new(t, state.cutoff()).apply_matrix(&rho0)
    };

    let even_only = quad.sqrt_rule.is_some().then_some(0);
    for (tau, w) in quad.rule.iter() {
        if w == 0.0 {
            continue;
        }
        accumulate(&mut acc, &output(tau), w, tau, even_only);
    }
    if let Some(sqrt_rule) = &quad.sqrt_rule {
        for (tau, w) in sqrt_rule.iter() {
            if w == 0.0 || tau == 0.0 {
                continue;
            }
            accumulate(&mut acc, &output(tau), w / tau.sqrt(), tau, Some(1));
        }
    }
    let [gamma0, gamma1, gamma2] = acc;
    Gammas {
        gamma0,
        gamma1,
        gamma2,
    }
}

/// `Gamma_k` with the default quadrature order.
pub fn build_gammas(state: &PureState, prior: &PriorPdf) -> Result<Gammas> {
    Ok(build_gammas_with(state, &GammaQuadrature::new(prior, DEFAULT_ORDER)?))
}

/// Solution of `Gamma_0 B + B Gamma_0 = 2 Gamma_1` in the eigenbasis of `Gamma_0`.
#[derive(Debug, Clone)]
pub struct SolvedB {
    pub b: CMatrix,
    /// Rank of `Gamma_0` above the null threshold.
    pub support_dim: usize,
    /// `tr(B Gamma_1)` evaluated as `sum_ij 2 |G1_ij|^2 / (l_i + l_j)`.
    pub tr_b_gamma1: f64,
    /// `tr(Gamma_0^+ Gamma_1^2)` on the same support.
    pub tr_pinv_gamma1_sq: f64,
}

/// Closed-form evaluation of `B = 2 integral_0^inf exp(-z G0) G1 exp(-z G0) dz`.
///
/// `B` is set to zero on the null space of `Gamma_0`. If `Gamma_1` has weight
/// on a pair of null directions the system is reported as ill-posed.
pub fn solve_b(gammas: &Gammas) -> Result<SolvedB> {
    solve_b_with(gammas, &NumericPolicy::DEFAULT)
}

pub fn solve_b_with(gammas: &Gammas, policy: &NumericPolicy) -> Result<SolvedB> {
    let dim = gammas.gamma0.nrows();
    let eig = SymmetricEigen::new(gammas.gamma0.clone());
    let lambda = eig.eigenvalues;
    let u = eig.eigenvectors;
    let g1 = u.adjoint() * &gammas.gamma1 * &u;

    let lmax = lambda.iter().copied().fold(0.0, f64::max);
    let eps = policy.null_relative * lmax;
    let support = |i: usize| lambda[i] > eps;

    let mut bt = CMatrix::zeros(dim, dim);
    let mut tr_b_g1 = 0.0;
    let mut tr_pinv = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let sum = lambda[i] + lambda[j];
            let mag = g1[(i, j)].norm_sqr();
            if sum > eps {
                bt[(i, j)] = g1[(i, j)] * (2.0 / sum);
                tr_b_g1 += 2.0 * mag / sum;
            } else if g1[(i, j)].norm() > policy.ill_posed {
                return Err(Error::IllPosed {
                    magnitude: g1[(i, j)].norm(),
                });
            }
            if support(i) {
                tr_pinv += mag / lambda[i];
            }
        }
    }
    let b = &u * bt * u.adjoint();
    let b = (&b + b.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(SolvedB {
        b,
        support_dim: (0..dim).filter(|&i| support(i)).count(),
        tr_b_gamma1: tr_b_g1,
        tr_pinv_gamma1_sq: tr_pinv,
    })
}

/// `delta_LB = integral P tau^2 - tr(Gamma_0^+ Gamma_1^2)`, never above the MMSE.
pub fn mmse_lower_bound(gammas: &Gammas, prior: &PriorPdf) -> Result<f64> {
    let solved = solve_b(gammas)?;
    Ok(prior.moment(2) - solved.tr_pinv_gamma1_sq)
}

/// `Gamma_k` together with `B` and its diagnostics.
#[derive(Debug, Clone)]
pub struct PersonickSet {
    pub gamma0: CMatrix,
    pub gamma1: CMatrix,
    pub gamma2: CMatrix,
    pub b_op: CMatrix,
    pub support_dim: usize,
    pub commutator_g01: f64,
}

/// One projector of the optimal measurement and the estimate attached to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementOutcome {
    pub estimate: f64,
    /// Eigenvector of `B` as `(re, im)` pairs over the Fock basis.
    pub vector: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmseReport {
    pub mmse: f64,
    pub lower_bound: f64,
    pub tr_gamma2: f64,
    pub commutator_g01: f64,
    pub support_dim: usize,
    /// Quadrature order the result converged at.
    pub order: usize,
    pub measurement: Vec<MeasurementOutcome>,
}

impl MmseReport {
    /// Eigenvalues of `B`, ascending.
    pub fn b_eigenvalues(&self) -> Vec<f64> {
        self.measurement.iter().map(|m| m.estimate).collect()
    }
}

/// Reusable MMSE evaluator for a fixed prior.
#[derive(Debug, Clone)]
pub struct PersonickSolver {
    prior: PriorPdf,
    options: MmseOptions,
    quad: GammaQuadrature,
}

impl PersonickSolver {
    pub fn new(prior: &PriorPdf, options: MmseOptions) -> Result<Self> {
        let prior = effective_prior(prior);
        let quad = GammaQuadrature::new(&prior, options.order)?;
        Ok(Self {
            prior,
            options,
            quad,
        })
    }

    pub fn prior(&self) -> &PriorPdf {
        &self.prior
    }

    pub fn gammas(&self, state: &PureState) -> Gammas {
        build_gammas_with(state, &self.quad)
    }

    pub fn personick_set(&self, state: &PureState) -> Result<PersonickSet> {
        let g = self.gammas(state);
        let solved = solve_b_with(&g, &self.options.policy)?;
        let commutator_g01 = g.commutator_g01();
        Ok(PersonickSet {
            gamma0: g.gamma0,
            gamma1: g.gamma1,
            gamma2: g.gamma2,
            b_op: solved.b,
            support_dim: solved.support_dim,
            commutator_g01,
        })
    }

    /// MMSE value only, skipping the measurement basis.
    pub fn mmse_value(&self, state: &PureState) -> Result<f64> {
        Ok(self.evaluate(state)?.0)
    }

    fn evaluate(&self, state: &PureState) -> Result<(f64, Gammas, SolvedB, usize)> {
        let run = |quad: &GammaQuadrature| -> Result<(f64, Gammas, SolvedB)> {
            let g = build_gammas_with(state, quad);
            let solved = solve_b_with(&g, &self.options.policy)?;
            let delta = g.gamma2.trace().re - solved.tr_b_gamma1;
            Ok((delta, g, solved))
        };
        let (mut delta, mut g, mut solved) = run(&self.quad)?;
        let mut order = self.quad.order;
        if !self.quad.is_exact_for(state.cutoff()) {
            while 2 * order <= self.options.max_order {
                let finer = GammaQuadrature::new(&self.prior, 2 * order)?;
                let (d2, g2, s2) = run(&finer)?;
                let converged = (d2 - delta).abs() < self.options.tolerance;
                (delta, g, solved, order) = (d2, g2, s2, 2 * order);
                if converged || finer.is_exact_for(state.cutoff()) {
                    break;
                }
            }
        }
        Ok((delta, g, solved, order))
    }

    pub fn mmse(&self, state: &PureState) -> Result<MmseReport> {
        let (delta, g, solved, order) = self.evaluate(state)?;
        let eig = SymmetricEigen::new(solved.b.clone());
        let mut measurement: Vec<MeasurementOutcome> = (0..eig.eigenvalues.len())
            .map(|i| MeasurementOutcome {
                estimate: eig.eigenvalues[i],
                vector: eig.eigenvectors.column(i).iter().map(|z| (z.re, z.im)).collect(),
            })
            .collect();
        measurement.sort_by(|a, b| a.estimate.total_cmp(&b.estimate));
        Ok(MmseReport {
            mmse: delta,
            lower_bound: self.prior.moment(2) - solved.tr_pinv_gamma1_sq,
            tr_gamma2: g.gamma2.trace().re,
            commutator_g01: g.commutator_g01(),
            support_dim: solved.support_dim,
            order,
            measurement,
        })
    }
}

/// MMSE of `state` under `prior` with default options.
pub fn mmse(state: &PureState, prior: &PriorPdf) -> Result<MmseReport> {
    PersonickSolver::new(prior, MmseOptions::default())?.mmse(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::InBetweenState;
    use crate::fock_forms::binomial_law;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn fig3() -> PriorPdf {
        PriorPdf::two_point(0.79, 0.127, 0.641).unwrap()
    }

    fn real_diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    #[test]
    fn fock_two_point_gammas_are_binomial() {
        let (q, t0, t1): (f64, f64, f64) = (0.79, 0.127, 0.641);
        let g = build_gammas(&PureState::fock(3, 3).unwrap(), &fig3()).unwrap();
        for k in 0..3 {
            let gk = [&g.gamma0, &g.gamma1, &g.gamma2][k];
            for l in 0..=3 {
                let expect = q * t0.powi(k as i32) * binomial_law(3, l, t0)
                    + (1.0 - q) * t1.powi(k as i32) * binomial_law(3, l, t1);
                assert_abs_diff_eq!(gk[(3 - l, 3 - l)].re, expect, epsilon = 1e-15);
            }
            assert!(crate::fock::max_abs(&(gk - real_diag(&(0..4).map(|i| gk[(i, i)].re).collect::<Vec<_>>()))) < 1e-16);
        }
    }

    #[test]
    fn vacuum_gammas_are_moments() {
        let prior = PriorPdf::beta(2.0, 4.0).unwrap();
        let g = build_gammas(&PureState::fock(0, 2).unwrap(), &prior).unwrap();
        for (k, gk) in [&g.gamma0, &g.gamma1, &g.gamma2].into_iter().enumerate() {
            assert_abs_diff_eq!(gk[(0, 0)].re, prior.moment(k as u32), epsilon = 1e-14);
            assert_abs_diff_eq!(gk.trace().re, prior.moment(k as u32), epsilon = 1e-14);
        }
    }

    #[test]
    fn in_between_beta_traces() {
        let prior = PriorPdf::beta(2.0, 4.0).unwrap();
        let state = InBetweenState::new(1.5).unwrap().pure(2).unwrap();
        let g = build_gammas(&state, &prior).unwrap();
        assert_abs_diff_eq!(g.gamma0.trace().re, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(g.gamma1.trace().re, 1.0 / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(g.gamma2.trace().re, 1.0 / 7.0, epsilon = 1e-13);
    }

    #[test]
    fn scalar_sylvester() {
        let g = Gammas {
            gamma0: real_diag(&[0.5, 0.5]),
            gamma1: real_diag(&[0.25, 0.25]),
            gamma2: real_diag(&[0.0, 0.0]),
        };
        let b = solve_b(&g).unwrap().b;
        assert!(crate::fock::max_abs(&(b - real_diag(&[0.5, 0.5]))) < 1e-15);
    }

    #[test]
    fn ill_posed_diagnostic() {
        let g = Gammas {
            gamma0: real_diag(&[1.0, 0.0]),
            gamma1: real_diag(&[0.5, 0.3]),
            gamma2: real_diag(&[0.0, 0.0]),
        };
        assert!(matches!(solve_b(&g), Err(Error::IllPosed { .. })));
    }

    #[test]
    fn fock_two_point_b_is_diagonal() {
        let report = mmse(&PureState::fock(1, 1).unwrap(), &PriorPdf::two_point(0.5, 0.2, 0.8).unwrap()).unwrap();
        let eigs = report.b_eigenvalues();
        // b for |1> (l = 0) is 0.68, for |0> (l = 1) it is (0.1*0.8 + 0.5*0.8*0.2)/(0.4 + 0.1).
        assert_abs_diff_eq!(eigs[1], 0.68, epsilon = 1e-14);
        assert_abs_diff_eq!(eigs[0], (0.5 * 0.2 * 0.8 + 0.5 * 0.8 * 0.2) / (0.5 * 0.8 + 0.5 * 0.2), epsilon = 1e-14);
    }

    #[test]
    fn fig3_fock_one() {
        let r = mmse(&PureState::fock(1, 1).unwrap(), &fig3()).unwrap();
        assert_abs_diff_eq!(r.mmse, 0.0331422064144538, epsilon = 1e-14);
        assert_abs_diff_eq!(r.lower_bound, r.mmse, epsilon = 1e-14);
        assert!(r.commutator_g01 < 1e-15);
    }

    #[test]
    fn delta_prior_is_zero() {
        let state = PureState::normalized(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(0.5, -0.2),
            Complex64::new(0.1, 0.7),
        ])
        .unwrap();
        for prior in [
            PriorPdf::delta(0.42).unwrap(),
            PriorPdf::two_point(1.0, 0.3, 0.9).unwrap(),
            PriorPdf::two_point(0.3, 0.6, 0.6).unwrap(),
        ] {
            let r = mmse(&state, &prior).unwrap();
            assert_abs_diff_eq!(r.mmse, 0.0, epsilon = 1e-10);
            let g = build_gammas(&state, &prior).unwrap();
            assert_abs_diff_eq!(mmse_lower_bound(&g, &prior).unwrap(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn vacuum_gives_prior_variance() {
        for prior in [fig3(), PriorPdf::beta(2.0, 4.0).unwrap(), PriorPdf::beta(0.5, 0.7).unwrap()] {
            let r = mmse(&PureState::fock(0, 0).unwrap(), &prior).unwrap();
            assert_abs_diff_eq!(r.mmse, prior.variance(), epsilon = 1e-13);
        }
    }

    #[test]
    fn in_between_gap_is_strict() {
        let state = InBetweenState::new(1.5).unwrap().pure(2).unwrap();
        let r = mmse(&state, &fig3()).unwrap();
        assert!(r.commutator_g01 > 1e-6);
        assert!(r.mmse - r.lower_bound > 1e-8, "gap {}", r.mmse - r.lower_bound);
    }

    #[test]
    fn complex_gamma0_eigenbasis_reconstructs() {
        // Complex Hermitian eigensolvers have shipped with wrong eigenvectors; guard against it.
        let state = crate::search::sample_states(0.2, 4, 143, 2).unwrap().pop().unwrap().state;
        let g = build_gammas(&state, &PriorPdf::beta(1.0, 1.0).unwrap()).unwrap();
        let eig = SymmetricEigen::new(g.gamma0.clone());
        let lambda = CMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(x, 0.0)));
        let recon = &eig.eigenvectors * lambda * eig.eigenvectors.adjoint();
        assert!((recon - &g.gamma0).norm() < 1e-13);
        let r = mmse(&state, &PriorPdf::beta(1.0, 1.0).unwrap()).unwrap();
        assert!(r.lower_bound >= -1e-12 && r.lower_bound <= r.mmse + 1e-12);
    }

    #[test]
    fn b_matches_exponential_integral() {
        // B = 2 int_0^inf exp(-z G0) G1 exp(-z G0) dz, with z = t / (1 - t).
        let prior = PriorPdf::beta(2.0, 4.0).unwrap();
        let state = InBetweenState::new(0.5).unwrap().pure(1).unwrap();
        let g = build_gammas(&state, &prior).unwrap();
        let rule = crate::quadrature::gauss_legendre_unit(400).unwrap();
        let mut b = CMatrix::zeros(2, 2);
        for (t, w) in rule.iter() {
            let z = t / (1.0 - t);
            let e = (&g.gamma0 * Complex64::new(-z, 0.0)).exp();
            b += &e * &g.gamma1 * &e * Complex64::new(2.0 * w / ((1.0 - t) * (1.0 - t)), 0.0);
        }
        let oracle = (&b * &g.gamma1).trace().re;
        assert_abs_diff_eq!(solve_b(&g).unwrap().tr_b_gamma1, oracle, epsilon = 1e-6);
        assert!((solve_b(&g).unwrap().b - b).norm() < 1e-6);
    }

    #[test]
    fn residual_of_sylvester() {
        let prior = PriorPdf::beta(1.3, 2.1).unwrap();
        let state = PureState::normalized(vec![
            Complex64::new(0.4, 0.0),
            Complex64::new(0.2, 0.5),
            Complex64::new(-0.3, 0.1),
            Complex64::new(0.6, -0.2),
        ])
        .unwrap();
        let g = build_gammas(&state, &prior).unwrap();
        let b = solve_b(&g).unwrap().b;
        let residual = &g.gamma0 * &b + &b * &g.gamma0 - &g.gamma1 * Complex64::new(2.0, 0.0);
        assert!(residual.norm() < 1e-10, "{}", residual.norm());
    }
}
