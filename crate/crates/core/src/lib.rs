//! Giant atoms in a one-dimensional coupled-cavity array.
//!
//! The crate works in the single-excitation sector and exposes two engines
//! that check each other:
//!
//! * [`evolve`]: split-step spectral integration of the Schrödinger equation
//!   (exact block exponential for the atoms, FFT for the bath);
//! * [`resolvent`]: closed-form self-energies, poles on both Riemann sheets,
//!   residues and branch-cut integrals, from which atomic amplitudes are
//!   rebuilt without any time stepping.
//!
//! [`metrics`] builds the decoherence-free-interaction figures of merit and the
//! giant-versus-small comparison on top of both.
//!
//! Energies are in units of the hopping `J`, times in units of `1/J`, `ħ = 1`.

pub mod bath;
mod error;
pub mod evolve;
pub mod hamiltonian;
pub mod layout;
pub mod metrics;
pub mod quad;
pub mod resolvent;

pub use bath::{BathParams, MomentumGrid};
pub use error::{Error, Result};
pub use evolve::{DynamicsTrace, EvolveConfig, Splitting};
pub use hamiltonian::{SingleExcitationState, SpectrumResult};
pub use layout::{AtomSpec, Layout, PhasePoint, Topology};
pub use metrics::{ComparisonRow, DfiMetrics};
pub use resolvent::{Channel, ComplexEnergy, Pole, PoleKind, PoleSet, SelfEnergyEval, Sheet};

/// Re-export of the complex type used throughout.
pub use num_complex::Complex64;
