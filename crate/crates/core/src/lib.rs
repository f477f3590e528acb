//! Bayesian estimation of the transmissivity of a pure-loss bosonic channel.
//!
//! Probe states live on a truncated Fock basis. For a prior on the
//! transmissivity, [`personick`] computes the minimum mean square error over
//! all measurements together with the optimal measurement, [`fock_forms`]
//! gives closed forms for Fock probes, [`pnr`] evaluates photon counting, and
//! [`search`] samples random probes at fixed energy to compare against the
//! two-level in-between states.

pub mod channel;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod fock_forms;
pub mod output;
pub mod personick;
pub mod pnr;
pub mod policy;
pub mod prior;
pub mod quadrature;
pub mod search;

pub use channel::{apply_kraus, apply_ladder, ladder_propagator, KrausChannel, Transmissivity};
pub use error::{Error, Result};
pub use fisher::{bounds, je_inv, jb, jd, jp, qfi_fock, BoundsReport, FisherValue};
pub use fock::{commutator_norm, CMatrix, DensityMatrix, FockState, InBetweenState, PureState};
pub use fock_forms::{
    fock_b_eigenvalues_generic, fock_b_eigenvalues_twopoint, fock_mmse_beta, fock_mmse_generic,
    fock_mmse_twopoint, generic_prior_functionals, BinomialOutputLaw, GenericPriorFunctionals,
};
pub use personick::{
    build_gammas, mmse, mmse_lower_bound, solve_b, Gammas, MmseOptions, MmseReport, PersonickSet,
    PersonickSolver,
};
pub use pnr::{conditional_means, outcome_law, outcome_law_in_between, pnr_mse, ConditionalMean};
pub use policy::NumericPolicy;
pub use prior::PriorPdf;
pub use quadrature::QuadratureRule;
pub use search::{conjecture_check, nbar_grid, sample_states, sweep, ConjectureReport, StateSample, SweepConfig, SweepResult};
