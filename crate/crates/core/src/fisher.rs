//! Fisher-information based Bayesian quantities for Fock-state probes.
//!
//! With the Fock-state QFI `F(tau) = n / (tau (1 - tau))` these are
//! `J_E^{-1} = E[1/F]`, `J_D = E[F]`, `J_P` (the prior's own Fisher
//! information) and `J_B = J_D + J_P`. Several of them diverge for common
//! priors, so every value is a [`FisherValue`].

use std::fmt;

use serde::{Serialize, Serializer};

use crate::prior::PriorPdf;

/// A Fisher-type quantity that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FisherValue {
    Finite(f64),
    Divergent,
}

impl FisherValue {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Divergent => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// `1 / x`, mapping divergence to zero and zero to divergence.
    pub fn recip(self) -> Self {
        match self {
            Self::Divergent => Self::Finite(0.0),
            Self::Finite(0.0) => Self::Divergent,
            Self::Finite(v) => Self::Finite(1.0 / v),
        }
    }

    fn add(self, other: Self) -> Self {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a + b),
            _ => Self::Divergent,
        }
    }
}

impl fmt::Display for FisherValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{}", crate::output::fmt_sig(*v)),
            Self::Divergent => f.write_str("divergent"),
        }
    }
}

impl Serialize for FisherValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Divergent => s.serialize_str("divergent"),
        }
    }
}

/// QFI of `|n>` with respect to `tau`. Photon counting attains it.
pub fn qfi_fock(n: usize, tau: f64) -> FisherValue {
    if n == 0 {
        return FisherValue::Finite(0.0);
    }
    if tau <= 0.0 || tau >= 1.0 {
        return FisherValue::Divergent;
    }
    FisherValue::Finite(n as f64 / (tau * (1.0 - tau)))
}

/// Prior average of the inverse QFI.
pub fn je_inv(n: usize, prior: &PriorPdf) -> FisherValue {
    if n == 0 {
        return FisherValue::Divergent;
    }
    let n = n as f64;
    let v = match *prior {
        PriorPdf::Delta { tau0 } => tau0 * (1.0 - tau0) / n,
        PriorPdf::TwoPoint { q, tau0, tau1 } => {
            (tau1 * (1.0 - tau1) + q * (tau0 - tau1) * (1.0 - tau0 - tau1)) / n
        }
        PriorPdf::Beta { alpha, beta } => {
            let s = alpha + beta;
            alpha * beta / (n * s * (s + 1.0))
        }
        PriorPdf::NumericQuadrature {
            ref nodes,
            ref weights,
        } => {
            nodes
                .iter()
                .zip(weights)
                .map(|(t, w)| w * t * (1.0 - t))
                .sum::<f64>()
                / n
        }
    };
    FisherValue::Finite(v)
}

fn atoms_qfi_mean(n: usize, atoms: impl Iterator<Item = (f64, f64)>) -> FisherValue {
    let mut total = 0.0;
    for (t, w) in atoms {
        if w == 0.0 {
            continue;
        }
        match qfi_fock(n, t) {
            FisherValue::Finite(f) => total += w * f,
            FisherValue::Divergent => return FisherValue::Divergent,
        }
    }
    FisherValue::Finite(total)
}

/// Prior average of the QFI.
pub fn jd(n: usize, prior: &PriorPdf) -> FisherValue {
    if n == 0 {
        return FisherValue::Finite(0.0);
    }
    match *prior {
        PriorPdf::Delta { tau0 } => qfi_fock(n, tau0),
        PriorPdf::TwoPoint { q, tau0, tau1 } => {
            atoms_qfi_mean(n, [(tau0, q), (tau1, 1.0 - q)].into_iter())
        }
        // n B(a-1, b-1) / B(a, b) = n (s-1)(s-2) / ((a-1)(b-1)).
        PriorPdf::Beta { alpha, beta } if alpha > 1.0 && beta > 1.0 => {
            let s = alpha + beta;
            FisherValue::Finite(n as f64 * (s - 1.0) * (s - 2.0) / ((alpha - 1.0) * (beta - 1.0)))
        }
        PriorPdf::Beta { .. } => FisherValue::Divergent,
        PriorPdf::NumericQuadrature {
            ref nodes,
            ref weights,
        } => atoms_qfi_mean(n, nodes.iter().copied().zip(weights.iter().copied())),
    }
}

/// Prior Fisher information `J_P`.
pub fn jp(prior: &PriorPdf) -> FisherValue {
    prior.fisher_information()
}

/// `J_B = J_D + J_P`.
///
/// For a beta prior with `alpha, beta > 2` this is the closed form
/// `C(a, b) [n (a-2)(b-2) + (a-1)(b-1)(a+b-4)]` with
/// `C(a, b) = B(a-2, b-2) / (B(a, b) (a+b-4)(a+b-3))`.
pub fn jb(n: usize, prior: &PriorPdf) -> FisherValue {
    match *prior {
        PriorPdf::Beta { alpha, beta } if alpha > 2.0 && beta > 2.0 => {
            let s = alpha + beta;
            let c = (s - 1.0) * (s - 2.0)
                / ((alpha - 1.0) * (alpha - 2.0) * (beta - 1.0) * (beta - 2.0));
            let f = (alpha - 2.0) * (beta - 2.0);
            let g = (alpha - 1.0) * (beta - 1.0) * (s - 4.0);
            FisherValue::Finite(c * (n as f64 * f + g))
        }
        _ => jd(n, prior).add(jp(prior)),
    }
}

/// All Fisher-type quantities for `|n>` under one prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub je_inv: FisherValue,
    pub jd: FisherValue,
    pub jp: FisherValue,
    pub jb: FisherValue,
    pub jd_inv: FisherValue,
    pub jb_inv: FisherValue,
}

pub fn bounds(n: usize, prior: &PriorPdf) -> BoundsReport {
    let jd = jd(n, prior);
    let jb = jb(n, prior);
    BoundsReport {
        n,
        je_inv: je_inv(n, prior),
        jd,
        jp: jp(prior),
        jb,
        jd_inv: jd.recip(),
        jb_inv: jb.recip(),
    }
}
