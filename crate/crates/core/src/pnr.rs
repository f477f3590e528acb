//! Photon-number-resolving detection followed by the Bayes estimator.
//!
//! Outcome `k` has likelihood `P(k|tau) = <k|rho(tau)|k>` and is mapped to the
//! posterior mean `Pi_k`. The resulting error is never below the MMSE and
//! equals it for Fock probes.

use serde::Serialize;

use crate::channel::{KrausChannel, Transmissivity};
use crate::error::Result;
use crate::fock::{InBetweenState, PureState};
use crate::fock_forms::binomial_law;
use crate::prior::{PriorPdf, DEFAULT_ORDER};

/// `P(k|tau)` for `k = 0..=cutoff`, read off the diagonal of the channel output.
pub fn outcome_law(state: &PureState, tau: Transmissivity) -> Vec<f64> {
    let rho = state.to_density();
    let out = KrausChannel::new(tau, state.cutoff()).apply_matrix(rho.matrix());
    (0..state.dim()).map(|k| out[(k, k)].re).collect()
}

/// Closed-form `P(k|tau)` of an in-between state for `k = 0..=ceil(nbar)`.
pub fn outcome_law_in_between(state: &InBetweenState, tau: Transmissivity) -> Vec<f64> {
    let upper = state.upper();
    let c2 = state.upper_amplitude().powi(2);
    let tau = tau.value();
    (0..=upper)
        .map(|k| {
            let from_upper = c2 * binomial_law(upper, upper - k, tau);
            let from_lower = if upper > 0 && k < upper {
                (1.0 - c2) * binomial_law(upper - 1, upper - 1 - k, tau)
            } else {
                0.0
            };
            from_upper + from_lower
        })
        .collect()
}

/// Bayes estimates `Pi_k` and the marginal probability of each outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalMean {
    pub pi: Vec<f64>,
    pub marginal: Vec<f64>,
}

// Outcome likelihoods at every node of a rule that integrates them exactly.
fn likelihood_table(state: &PureState, prior: &PriorPdf) -> Result<Vec<(f64, f64, Vec<f64>)>> {
    // Diagonal entries of rho(tau) are polynomials of degree <= cutoff.
    let rule = prior.make_rule(DEFAULT_ORDER.max(state.cutoff() / 2 + 2))?;
    Ok(rule
        .iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(tau, w)| {
            let t = Transmissivity::new(tau.clamp(0.0, 1.0)).expect("node in [0, 1]");
            (tau, w, outcome_law(state, t))
        })
        .collect())
}

fn means_from_table(table: &[(f64, f64, Vec<f64>)], dim: usize, prior_mean: f64) -> ConditionalMean {
    let mut num = vec![0.0; dim];
    let mut den = vec![0.0; dim];
    for (tau, w, law) in table {
        for k in 0..dim {
            den[k] += w * law[k];
            num[k] += w * law[k] * tau;
        }
    }
    let pi = num
        .iter()
        .zip(&den)
        .map(|(&n, &d)| if d > 0.0 { n / d } else { prior_mean })
        .collect();
    ConditionalMean { pi, marginal: den }
}

pub fn conditional_means(state: &PureState, prior: &PriorPdf) -> Result<ConditionalMean> {
    let table = likelihood_table(state, prior)?;
    Ok(means_from_table(&table, state.dim(), prior.mean()))
}

/// `sum_k integral P(tau) P(k|tau) (Pi_k - tau)^2 dtau`.
pub fn pnr_mse(state: &PureState, prior: &PriorPdf) -> Result<f64> {
    let table = likelihood_table(state, prior)?;
    let means = means_from_table(&table, state.dim(), prior.mean());
    Ok(table
        .iter()
        .map(|(tau, w, law)| {
            law.iter()
                .zip(&means.pi)
                .map(|(p, pi)| w * p * (pi - tau) * (pi - tau))
                .sum::<f64>()
        })
        .sum())
}
