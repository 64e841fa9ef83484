use thiserror::Error;

/// Errors raised by the simulator and the resolvent machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("outside the band: |Δ| = {delta} exceeds 2J")]
    OutsideBand { delta: f64 },

    #[error("band-edge divergence at E = {energy}")]
    BandEdgeDivergence { energy: f64 },

    #[error("z = {z} is a branch point of the lattice Green's function")]
    BranchPoint { z: f64 },

    #[error("Green's function evaluated at a pole (|G^-1| = {magnitude:e})")]
    AtPole { magnitude: f64 },

    #[error("degenerate pole: |1 - dΣ/dz| = {magnitude:e}")]
    DegeneratePole { magnitude: f64 },

    #[error("index {index} is not a bound state")]
    NotBoundState { index: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
