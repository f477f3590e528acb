//! Prior densities on the transmissivity and the quadrature rules built from them.

use serde::Serialize;
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::fisher::FisherValue;
use crate::policy::NumericPolicy;
use crate::quadrature::{gauss_jacobi_unit, QuadratureRule};

/// Number of Gauss nodes used for continuous priors unless told otherwise.
pub const DEFAULT_ORDER: usize = 200;

/// Prior PDF `P(tau)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorPdf {
    Delta { tau0: f64 },
    TwoPoint { q: f64, tau0: f64, tau1: f64 },
    Beta { alpha: f64, beta: f64 },
    NumericQuadrature { nodes: Vec<f64>, weights: Vec<f64> },
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidPrior(format!("{name} = {x} must lie in [0, 1]")));
    }
    Ok(())
}

impl PriorPdf {
    pub fn delta(tau0: f64) -> Result<Self> {
        check_unit("tau0", tau0)?;
        Ok(Self::Delta { tau0 })
    }

    /// `q delta(tau - tau0) + (1 - q) delta(tau - tau1)`.
    pub fn two_point(q: f64, tau0: f64, tau1: f64) -> Result<Self> {
        check_unit("q", q)?;
        check_unit("tau0", tau0)?;
        check_unit("tau1", tau1)?;
        Ok(Self::TwoPoint { q, tau0, tau1 })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidPrior(format!(
                "beta parameters must be positive (got {alpha}, {beta})"
            )));
        }
        Ok(Self::Beta { alpha, beta })
    }

    /// Discrete prior given as point masses; weights must sum to one.
    pub fn numeric(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidPrior(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        for &t in &nodes {
            check_unit("node", t)?;
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidPrior("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NumericPolicy::DEFAULT.construction {
            return Err(Error::InvalidPrior(format!("weights sum to {total}, not 1")));
        }
        Ok(Self::NumericQuadrature { nodes, weights })
    }

    /// Location of the single point mass if the prior is a Dirac delta in
    /// disguise (a degenerate two-point prior or a one-atom numeric prior).
    pub fn point_mass(&self) -> Option<f64> {
        match *self {
            Self::Delta { tau0 } => Some(tau0),
            Self::TwoPoint { q, tau0, tau1 } => {
                if tau0 == tau1 || q == 1.0 {
                    Some(tau0)
                } else if q == 0.0 {
                    Some(tau1)
                } else {
                    None
                }
            }
            Self::Beta { .. } => None,
            Self::NumericQuadrature {
                ref nodes,
                ref weights,
            } => {
                let mut atoms = nodes.iter().zip(weights).filter(|(_, &w)| w > 0.0);
                let first = *atoms.next()?.0;
                atoms.all(|(&t, _)| t == first).then_some(first)
            }
        }
    }

    /// Whether the prior is a finite set of point masses.
    pub fn is_discrete(&self) -> bool {
        !matches!(self, Self::Beta { .. })
    }

    /// `integral P(tau) tau^k dtau`.
    pub fn moment(&self, k: u32) -> f64 {
        match *self {
            Self::Delta { tau0 } => tau0.powi(k as i32),
            Self::TwoPoint { q, tau0, tau1 } => {
                q * tau0.powi(k as i32) + (1.0 - q) * tau1.powi(k as i32)
            }
            // B(alpha + k, beta) / B(alpha, beta) as a finite product.
            Self::Beta { alpha, beta } => (0..k)
                .map(|i| (alpha + i as f64) / (alpha + beta + i as f64))
                .product(),
            Self::NumericQuadrature {
                ref nodes,
                ref weights,
            } => nodes
                .iter()
                .zip(weights)
                .map(|(t, w)| w * t.powi(k as i32))
                .sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Delta { .. } => 0.0,
            Self::TwoPoint { q, tau0, tau1 } => q * (1.0 - q) * (tau0 - tau1).powi(2),
            Self::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
            Self::NumericQuadrature { .. } => {
                let m = self.mean();
                self.make_rule(1)
                    .map(|r| r.integrate(|t| (t - m) * (t - m)))
                    .unwrap_or(0.0)
            }
        }
    }

    /// Density at `tau` for continuous priors, `None` for point masses.
    pub fn density(&self, tau: f64) -> Option<f64> {
        match *self {
            Self::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&tau) {
                    return Some(0.0);
                }
                let log = (alpha - 1.0) * tau.ln() + (beta - 1.0) * (1.0 - tau).ln()
                    - ln_beta(alpha, beta);
                Some(log.exp())
            }
            _ => None,
        }
    }

    /// Quadrature rule for `integral P(tau) f(tau) dtau`.
    ///
    /// Point-mass priors return their atoms exactly. A beta prior folds its whole
    /// density into Gauss–Jacobi weights, which keeps integrable endpoint
    /// singularities (`alpha < 1` or `beta < 1`) exact for polynomial `f`.
    pub fn make_rule(&self, order: usize) -> Result<QuadratureRule> {
        if order == 0 {
            return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
        }
        Ok(match *self {
            Self::Delta { tau0 } => QuadratureRule::new(vec![tau0], vec![1.0]),
            Self::TwoPoint { q, tau0, tau1 } => {
                QuadratureRule::new(vec![tau0, tau1], vec![q, 1.0 - q])
            }
            Self::Beta { alpha, beta } => gauss_jacobi_unit(order, alpha - 1.0, beta - 1.0)?,
            Self::NumericQuadrature {
                ref nodes,
                ref weights,
            } => QuadratureRule::new(nodes.clone(), weights.clone()),
        })
    }

    /// Rule for `integral P(tau) sqrt(tau) g(tau) dtau`, exact for polynomial `g`.
    ///
    /// Only meaningful for the beta prior, where `sqrt(tau)` is absorbed into
    /// the Jacobi weight. Point-mass priors return `None` since their plain
    /// rule is already exact.
    pub fn make_sqrt_rule(&self, order: usize) -> Result<Option<QuadratureRule>> {
        match *self {
            Self::Beta { alpha, beta } => {
                let rule = gauss_jacobi_unit(order, alpha - 0.5, beta - 1.0)?;
                let mass = (ln_beta(alpha + 0.5, beta) - ln_beta(alpha, beta)).exp();
                Ok(Some(rule.scaled(mass)))
            }
            _ => Ok(None),
        }
    }

    /// Fisher information of the prior, `integral P (d ln P / d tau)^2`.
    ///
    /// Finite only for a beta prior with `alpha > 2` and `beta > 2`; every
    /// point-mass prior is reported as divergent.
    pub fn fisher_information(&self) -> FisherValue {
        match *self {
            Self::Beta { alpha, beta } if alpha > 2.0 && beta > 2.0 => {
                // P (d ln P)^2 = ((a-1)(1-t) - (b-1)t)^2 t^(a-3) (1-t)^(b-3) / B(a, b).
                let order = 3;
                let rule = match gauss_jacobi_unit(order, alpha - 3.0, beta - 3.0) {
                    Ok(r) => r,
                    Err(_) => return FisherValue::Divergent,
                };
                let mass = (ln_beta(alpha - 2.0, beta - 2.0) - ln_beta(alpha, beta)).exp();
                let poly = |t: f64| ((alpha - 1.0) * (1.0 - t) - (beta - 1.0) * t).powi(2);
                FisherValue::Finite(mass * rule.integrate(poly))
            }
            _ => FisherValue::Divergent,
        }
    }
}

/// Free-function form of [`PriorPdf::moment`].
pub fn moment(prior: &PriorPdf, k: u32) -> f64 {
    prior.moment(k)
}

/// Free-function form of [`PriorPdf::variance`].
pub fn variance(prior: &PriorPdf) -> f64 {
    prior.variance()
}

/// Free-function form of [`PriorPdf::make_rule`].
pub fn make_rule(prior: &PriorPdf, order: usize) -> Result<QuadratureRule> {
    prior.make_rule(order)
}

/// Free-function form of [`PriorPdf::fisher_information`].
pub fn prior_fisher_jp(prior: &PriorPdf) -> FisherValue {
    prior.fisher_information()
}
