//! The coupled-cavity bath: cosine band, density of states, group velocity
//! and the discrete momentum grid of a periodic array.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative distance to `±2J` below which an energy counts as sitting on a
/// band edge.
const EDGE_TOL: f64 = 1e-14;

/// Array of `n` cavities with nearest-neighbour hopping `j`.
///
/// `omega_b` is the cavity frequency. Everything is computed in the frame
/// rotating at `omega_b`, so it is carried along as metadata only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub n: usize,
    pub j: f64,
    #[serde(default)]
    pub omega_b: f64,
}

impl BathParams {
    pub fn new(n: usize, j: f64) -> Result<Self> {
        let bath = Self { n, j, omega_b: 0.0 };
        bath.validate()?;
        Ok(bath)
    }

    /// Bath with `J = 1`, the unit used by every other module.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "bath needs at least 2 cavities, got {}",
                self.n
            )));
        }
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "hopping must be positive, got {}",
                self.j
            )));
        }
        Ok(())
    }

    /// `ω(k) = -2J cos k`.
    pub fn dispersion(&self, k: f64) -> f64 {
        -2.0 * self.j * k.cos()
    }

    /// `D(E) = 1 / (π √(4J² - E²))` inside the band and zero outside.
    ///
    /// The band edges are integrable singularities; evaluating exactly there
    /// returns [`Error::BandEdgeDivergence`] so that quadratures have to treat
    /// the edge explicitly.
    pub fn density_of_states(&self, energy: f64) -> Result<f64> {
        let edge = 2.0 * self.j;
        if (energy.abs() - edge).abs() <= EDGE_TOL * edge {
            return Err(Error::BandEdgeDivergence { energy });
        }
        if energy.abs() > edge {
            return Ok(0.0);
        }
        Ok(1.0 / (PI * (edge * edge - energy * energy).sqrt()))
    }

    /// `v_g(Δ) = ∂ω/∂k` at the in-band momentum with `ω(k) = Δ`, i.e.
    /// `√(4J² - Δ²)`.
    pub fn group_velocity(&self, delta: f64) -> Result<f64> {
        let edge = 2.0 * self.j;
        if delta.abs() > edge {
            return Err(Error::OutsideBand { delta });
        }
        Ok((edge * edge - delta * delta).max(0.0).sqrt())
    }

    /// Momenta of the periodic array, see [`momentum_grid`].
    pub fn momentum_grid(&self) -> Result<MomentumGrid> {
        momentum_grid(self.n)
    }
}

/// Discrete momenta `k ∈ [-π, π - 2π/N]` of a periodic array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub k_values: Vec<f64>,
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.k_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.k_values.len() as f64
    }
}

pub fn momentum_grid(n: usize) -> Result<MomentumGrid> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "momentum grid needs at least 2 points, got {n}"
        )));
    }
    let step = 2.0 * PI / n as f64;
    let k_values = (0..n).map(|i| -PI + i as f64 * step).collect();
    Ok(MomentumGrid { k_values })
}
