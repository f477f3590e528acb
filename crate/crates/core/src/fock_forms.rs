//! Closed forms for Fock-state probes.
//!
//! The channel maps `|n><n|` to `sum_l e_l(tau) |n-l><n-l|` with the binomial
//! law `e_l(tau) = C(n, l) tau^(n-l) (1-tau)^l`, so every `Gamma_k` is diagonal
//! with entries `g_l^(k) = integral P tau^k e_l`. Then `B` has eigenvalues
//! `g_l^(1) / g_l^(0)` and the MMSE is `sum_l g_l^(2) - (g_l^(1))^2 / g_l^(0)`.

use statrs::function::factorial::{binomial, ln_binomial};

use crate::error::Result;
use crate::prior::{PriorPdf, DEFAULT_ORDER};

/// `C(n, l) tau^(n-l) (1-tau)^l`, the probability of losing `l` of `n` photons.
pub fn binomial_law(n: usize, l: usize, tau: f64) -> f64 {
    if l > n {
        return 0.0;
    }
    let kept = (n - l) as i32;
    let lost = l as i32;
    if n <= 30 {
        return binomial(n as u64, l as u64) * tau.powi(kept) * (1.0 - tau).powi(lost);
    }
    if (kept > 0 && tau == 0.0) || (lost > 0 && tau == 1.0) {
        return 0.0;
    }
    let mut log = ln_binomial(n as u64, l as u64);
    if kept > 0 {
        log += kept as f64 * tau.ln();
    }
    if lost > 0 {
        log += lost as f64 * (1.0 - tau).ln();
    }
    log.exp()
}

/// Photon-loss law of the Fock state `|n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialOutputLaw {
    pub n: usize,
}

impl BinomialOutputLaw {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// `e_l(tau)`, attached to the output projector `|n-l><n-l|`.
    pub fn prob(&self, l: usize, tau: f64) -> f64 {
        binomial_law(self.n, l, tau)
    }

    pub fn probs(&self, tau: f64) -> Vec<f64> {
        (0..=self.n).map(|l| self.prob(l, tau)).collect()
    }
}

/// `g_l^(k) = integral P(tau) tau^k e_l(tau) dtau` for `k = 0, 1, 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericPriorFunctionals {
    pub n: usize,
    /// Indexed by `l`, then `k`.
    pub g: Vec<[f64; 3]>,
}

impl GenericPriorFunctionals {
    /// Estimate attached to each projector `|n-l><n-l|`. Outcomes with no
    /// prior weight get the prior mean.
    pub fn b_eigenvalues(&self, prior_mean: f64) -> Vec<f64> {
        self.g
            .iter()
            .map(|g| if g[0] > 0.0 { g[1] / g[0] } else { prior_mean })
            .collect()
    }

    pub fn mmse(&self) -> f64 {
        self.g
            .iter()
            .filter(|g| g[0] > 0.0)
            .map(|g| g[2] - g[1] * g[1] / g[0])
            .sum::<f64>()
            .max(0.0)
    }
}

pub fn generic_prior_functionals(n: usize, prior: &PriorPdf) -> Result<GenericPriorFunctionals> {
    // tau^k e_l is a polynomial of degree n + k, integrated exactly by the rule.
    let rule = prior.make_rule(DEFAULT_ORDER.max(n / 2 + 3))?;
    let law = BinomialOutputLaw::new(n);
    let mut g = vec![[0.0; 3]; n + 1];
    for (tau, w) in rule.iter() {
        for (l, gl) in g.iter_mut().enumerate() {
            let e = w * law.prob(l, tau);
            gl[0] += e;
            gl[1] += e * tau;
            gl[2] += e * tau * tau;
        }
    }
    Ok(GenericPriorFunctionals { n, g })
}

/// MMSE of `|n>` under an arbitrary prior.
pub fn fock_mmse_generic(n: usize, prior: &PriorPdf) -> Result<f64> {
    if prior.point_mass().is_some() {
        return Ok(0.0);
    }
    Ok(generic_prior_functionals(n, prior)?.mmse())
}

/// Eigenvalues of `B` for `|n>`, indexed by the number of lost photons `l`.
pub fn fock_b_eigenvalues_generic(n: usize, prior: &PriorPdf) -> Result<Vec<f64>> {
    if let Some(tau0) = prior.point_mass() {
        return Ok(vec![tau0; n + 1]);
    }
    Ok(generic_prior_functionals(n, prior)?.b_eigenvalues(prior.mean()))
}

fn two_point_terms(n: usize, q: f64, tau0: f64, tau1: f64) -> impl Iterator<Item = (f64, f64)> {
    (0..=n).map(move |l| {
        let (e0, e1) = (binomial_law(n, l, tau0), binomial_law(n, l, tau1));
        let num = q * tau0 * e0 + (1.0 - q) * tau1 * e1;
        let den = q * e0 + (1.0 - q) * e1;
        (num, den)
    })
}

/// MMSE of `|n>` under the two-point prior `q delta(tau0) + (1-q) delta(tau1)`.
pub fn fock_mmse_twopoint(n: usize, q: f64, tau0: f64, tau1: f64) -> Result<f64> {
    let prior = PriorPdf::two_point(q, tau0, tau1)?;
    if prior.point_mass().is_some() {
        return Ok(0.0);
    }
    let second = q * tau0 * tau0 + (1.0 - q) * tau1 * tau1;
    let explained: f64 = two_point_terms(n, q, tau0, tau1)
        .filter(|&(_, den)| den > 0.0)
        .map(|(num, den)| num * num / den)
        .sum();
    Ok((second - explained).max(0.0))
}

/// `b_l = [q tau0 e_l(tau0) + (1-q) tau1 e_l(tau1)] / [q e_l(tau0) + (1-q) e_l(tau1)]`.
pub fn fock_b_eigenvalues_twopoint(n: usize, q: f64, tau0: f64, tau1: f64) -> Result<Vec<f64>> {
    let prior = PriorPdf::two_point(q, tau0, tau1)?;
    if let Some(t) = prior.point_mass() {
        return Ok(vec![t; n + 1]);
    }
    let mean = prior.mean();
    Ok(two_point_terms(n, q, tau0, tau1)
        .map(|(num, den)| if den > 0.0 { num / den } else { mean })
        .collect())
}

/// `alpha beta / ((s)(s + 1)(s + nbar))` with `s = alpha + beta`.
pub fn fock_mmse_beta(nbar: f64, alpha: f64, beta: f64) -> Result<f64> {
    PriorPdf::beta(alpha, beta)?;
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(crate::Error::InvalidArgument(format!("nbar = {nbar} must be >= 0")));
    }
    let s = alpha + beta;
    Ok(alpha * beta / (s * (s + 1.0) * (s + nbar)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binomial_law_sums_to_one() {
        for &n in &[0, 1, 5, 30, 31, 80, 170] {
            for &t in &[0.0, 0.2, 0.5, 0.93, 1.0] {
                let total: f64 = BinomialOutputLaw::new(n).probs(t).iter().sum();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(binomial_law(n, 0, 1.0), 1.0);
            }
        }
        // Log-space path agrees with the direct product where both are representable.
        let direct = binomial(40, 13) * 0.3f64.powi(27) * 0.7f64.powi(13);
        assert_abs_diff_eq!(binomial_law(40, 13, 0.3) / direct, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fig3_value() {
        let v = fock_mmse_twopoint(1, 0.79, 0.127, 0.641).unwrap();
        assert_abs_diff_eq!(v, 0.0331422064144538, epsilon = 1e-15);
    }

    #[test]
    fn two_point_trivial_cases() {
        let (q, t0, t1) = (0.3, 0.2, 0.9);
        assert_abs_diff_eq!(
            fock_mmse_twopoint(0, q, t0, t1).unwrap(),
            q * (1.0 - q) * (t0 - t1) * (t0 - t1),
            epsilon = 1e-15
        );
        assert_eq!(fock_mmse_twopoint(4, q, 0.5, 0.5).unwrap(), 0.0);
        assert_eq!(fock_b_eigenvalues_twopoint(3, 1.0, 0.4, 0.8).unwrap(), vec![0.4; 4]);
        assert_eq!(fock_b_eigenvalues_twopoint(2, 0.5, 0.6, 0.6).unwrap(), vec![0.6; 3]);
    }

    #[test]
    fn b_eigenvalue_example() {
        let b = fock_b_eigenvalues_twopoint(1, 0.5, 0.2, 0.8).unwrap();
        assert_abs_diff_eq!(b[0], 0.68, epsilon = 1e-15);
        for &v in &b {
            assert!((0.2..=0.8).contains(&v));
        }
        // With atoms at 1 and 0 each outcome identifies its atom.
        let edge = fock_b_eigenvalues_twopoint(1, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(edge, vec![1.0, 0.0]);
    }

    #[test]
    fn beta_examples() {
        assert_abs_diff_eq!(fock_mmse_beta(1.0, 1.0, 1.0).unwrap(), 1.0 / 18.0, epsilon = 1e-15);
        let p = PriorPdf::beta(2.5, 0.7).unwrap();
        assert_abs_diff_eq!(fock_mmse_beta(0.0, 2.5, 0.7).unwrap(), p.variance(), epsilon = 1e-15);
        let mut last = f64::INFINITY;
        for n in 1..=50 {
            let v = fock_mmse_beta(n as f64, 2.33, 3.84).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn generic_functionals_uniform() {
        let f = generic_prior_functionals(1, &PriorPdf::beta(1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(f.g[0][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.g[1][0], 0.5, epsilon = 1e-15);
        let b = f.b_eigenvalues(0.5);
        assert_abs_diff_eq!(b[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b[1], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.mmse(), 1.0 / 18.0, epsilon = 1e-14);
    }

    #[test]
    fn generic_functionals_invariants() {
        for prior in [
            PriorPdf::beta(2.33, 3.84).unwrap(),
            PriorPdf::two_point(0.377, 0.416, 0.139).unwrap(),
            PriorPdf::beta(0.4, 0.9).unwrap(),
        ] {
            let f = generic_prior_functionals(7, &prior).unwrap();
            for k in 0..3 {
                let total: f64 = f.g.iter().map(|g| g[k]).sum();
                assert_abs_diff_eq!(total, prior.moment(k as u32), epsilon = 1e-13);
            }
        }
        let f = generic_prior_functionals(3, &PriorPdf::delta(0.3).unwrap()).unwrap();
        for (l, g) in f.g.iter().enumerate() {
            assert_abs_diff_eq!(g[1], 0.3 * binomial_law(3, l, 0.3), epsilon = 1e-15);
        }
    }

    #[test]
    fn generic_reduces_to_closed_forms() {
        let fig1a = PriorPdf::two_point(0.541, 0.706, 0.279).unwrap();
        assert_abs_diff_eq!(
            fock_mmse_generic(3, &fig1a).unwrap(),
            fock_mmse_twopoint(3, 0.541, 0.706, 0.279).unwrap(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(fock_mmse_generic(3, &fig1a).unwrap(), 0.0267548895673195, epsilon = 1e-14);
        let gb = fock_b_eigenvalues_generic(4, &fig1a).unwrap();
        let tb = fock_b_eigenvalues_twopoint(4, 0.541, 0.706, 0.279).unwrap();
        for (a, b) in gb.iter().zip(&tb) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        for n in 0..10 {
            assert_abs_diff_eq!(
                fock_mmse_generic(n, &PriorPdf::beta(2.0, 4.0).unwrap()).unwrap(),
                fock_mmse_beta(n as f64, 2.0, 4.0).unwrap(),
                epsilon = 1e-13
            );
        }
        assert_eq!(fock_mmse_generic(5, &PriorPdf::delta(0.4).unwrap()).unwrap(), 0.0);
        assert_eq!(fock_b_eigenvalues_generic(2, &PriorPdf::delta(0.4).unwrap()).unwrap(), vec![0.4; 3]);
    }

    #[test]
    fn squared_second_moment_is_not_the_mmse() {
        // Squaring g_l^(2) in the first term breaks agreement with the beta closed form.
        let prior = PriorPdf::beta(1.0, 1.0).unwrap();
        let f = generic_prior_functionals(1, &prior).unwrap();
        let squared: f64 = f.g.iter().map(|g| g[2] * g[2] - g[1] * g[1] / g[0]).sum();
        let unsquared = f.mmse();
        assert_abs_diff_eq!(unsquared, 1.0 / 18.0, epsilon = 1e-14);
        assert!((squared - 1.0 / 18.0).abs() > 0.1);
    }

    #[test]
    fn fig3_sequence_is_decreasing() {
        let expect = [
            0.02623159982, 0.02063032461, 0.01660009442, 0.01336322821, 0.01077089754,
            0.00879442146, 0.00714479482, 0.00583172317, 0.00479423774,
        ];
        for (i, &e) in expect.iter().enumerate() {
            let v = fock_mmse_twopoint(i + 2, 0.79, 0.127, 0.641).unwrap();
            assert_abs_diff_eq!(v, e, epsilon = 1e-11);
        }
    }

    #[test]
    fn monotone_in_photon_number() {
        for prior in [
            PriorPdf::two_point(0.79, 0.127, 0.641).unwrap(),
            PriorPdf::two_point(0.541, 0.706, 0.279).unwrap(),
            PriorPdf::two_point(0.377, 0.416, 0.139).unwrap(),
            PriorPdf::beta(1.0, 1.0).unwrap(),
            PriorPdf::beta(2.0, 4.0).unwrap(),
        ] {
            let values: Vec<f64> = (0..=30).map(|n| fock_mmse_generic(n, &prior).unwrap()).collect();
            assert_abs_diff_eq!(values[0], prior.variance(), epsilon = 1e-13);
            for w in values.windows(2) {
                assert!(w[1] <= w[0] + 1e-15, "{prior:?}: {} > {}", w[1], w[0]);
            }
        }
    }
}
