//! Fidelity of bosonic Gaussian noise channels in truncated Fock space.
//!
//! The channel displaces a state by a random complex amplitude drawn from
//! `G(α) = (2/πγ) e^{−2|α|²/γ}`. This crate builds states
//! ([`fock`]), their phase-space functions ([`phasespace`]), the channel
//! itself ([`channel`]), numeric fidelities by independent routes
//! ([`fidelity`]) and the analytic formulas they are checked against
//! ([`closedform`]).

pub mod channel;
pub mod closedform;
pub mod error;
pub mod fidelity;
pub mod fock;
pub mod format;
pub mod phasespace;
pub mod special;

pub use channel::{apply_channel, apply_channel_mc, kraus_weights, McSpec, QuadratureSpec};
pub use error::{Error, Result};
pub use fidelity::{Ensemble, FidelityValue, Method};
pub use fock::{DensityMatrix, SqueezeSpec, ThermalSpec, TruncatedPureState};
pub use phasespace::{ChannelNoise, GridSpec, PhaseGrid, PhasePoint};
