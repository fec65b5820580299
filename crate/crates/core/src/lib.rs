//! Passive-environment bosonic channels and Fock-majorization on truncated Fock spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: Fock-diagonal distributions, density matrices, passive environments.
//! - [`majorization`]: regular and Fock majorization, the lower-triangular transfer
//!   matrix construction and monotone-function tests.
//! - [`amplitudes`]: exact beam-splitter amplitudes per photon-number block, the
//!   `B^{(i,k)}_m` coefficient recurrence and two-mode-squeezer amplitudes obtained by
//!   partial time reversal.
//! - [`channels`]: the beam-splitter and two-mode-squeezer channels with a passive
//!   environment, their full density-matrix action and the adjoint relation between them.
//! - [`verify`]: the ladder, passivity, preservation, duality and counterexample suites.
//! - [`cli`]: the `fockmaj` command-line front end.
//!
//! All vectors are indexed by photon number starting at 0. The energy is the number
//! operator (unit quanta, no zero-point offset).

#![forbid(unsafe_code)]

pub mod amplitudes;
pub mod channels;
pub mod cli;
mod error;
pub mod fock;
pub mod majorization;
pub mod verify;

pub use error::{Error, Result};

pub use amplitudes::{
    b_table_oracle, b_table_recurrence, bs_amplitude_block, tms_amplitude, AmplitudeBlock,
    AmplitudeCache, CoefficientTable,
};
pub use channels::{
    adjoint, apply_diag, apply_full, apply_projector_channel, duality_gap, AdjointChannel,
    ChannelKind, ChannelOutput, ChannelResponse, ChannelSpec, DualityGap, MatrixOutput, Truncation,
};
pub use fock::{
    is_passive, mean_energy, partial_sum, passive_decompose, DensityMatrix, EnvironmentSpec,
    FockDistribution, Projector, RealizedEnvironment, Tolerances,
};
pub use majorization::{
    construct_transfer_matrix, equivalence_on_passive, fock_majorizes, majorizes,
    monotone_functional_gap, step_function_test, MonotoneFunction, MonotoneFunctionFamily,
    TransferMatrix,
};
pub use verify::{CheckResult, VerificationReport};
