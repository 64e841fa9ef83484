use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cuts::{branch_cut_contribution, CutOptions};
use super::kernel::Kernel;
use super::lattice::f_pm;
use super::poles::{find_real_poles, find_unstable_poles, PoleSearch};
use super::{Channel, ComplexEnergy, PoleSet};
use crate::layout::Layout;
use crate::quad;
use crate::{Error, Result};

/// Amplitude rebuilt from poles and cuts on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub channel: Channel,
    pub times: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    pub pole_part: Vec<Complex64>,
    pub cut_part: Vec<Complex64>,
    pub poles: PoleSet,
    /// False if any cut integral missed its tolerance.
    pub cut_converged: bool,
}

impl Reconstruction {
    pub fn populations(&self) -> Vec<f64> {
        self.amplitude.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// `C(t) = Σ_β R_β e^{-i z_β t} + Σ_α C_α(t)`.
pub fn amplitude_from_poles(
    times: &[f64],
    channel: Channel,
    layout: &Layout,
    search: &PoleSearch,
    cut: &CutOptions,
) -> Result<Reconstruction> {
    let poles = find_real_poles(layout, channel, search)?.merged(&find_unstable_poles(layout, channel, search)?);
    let pole_part: Vec<Complex64> = times
        .iter()
        .map(|&t| {
            poles
                .iter()
                .map(|p| p.residue * (Complex64::new(0.0, -t) * p.z_pole).exp())
                .sum()
        })
        .collect();
    let cuts = times
        .par_iter()
        .map(|&t| branch_cut_contribution(t, channel, layout, cut))
        .collect::<Result<Vec<_>>>()?;
    let cut_converged = cuts.iter().all(|c| c.converged);
    let cut_part: Vec<Complex64> = cuts.iter().map(|c| c.value).collect();
    let amplitude = pole_part.iter().zip(&cut_part).map(|(a, b)| a + b).collect();
    Ok(Reconstruction {
        channel,
        times: times.to_vec(),
        amplitude,
        pole_part,
        cut_part,
        poles,
        cut_converged,
    })
}

/// Settings of the direct Fourier path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    /// Height of the integration line above the real axis.
    pub eta: f64,
    /// The line runs over `[-e_max, e_max]`.
    pub e_max: f64,
    pub abs_tol: f64,
    pub max_segments: usize,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            eta: 0.02,
            e_max: 10.0,
            abs_tol: 1e-9,
            max_segments: 20_000,
        }
    }
}

/// `C(t) = (i/2π) ∫ G(E + iη) e^{-i(E + iη)t} dE`, with the free propagator
/// `1/(z - Δ)` subtracted under the integral and added back exactly.
pub fn amplitude_direct(
    times: &[f64],
    channel: Channel,
    layout: &Layout,
    options: &DirectOptions,
) -> Result<Vec<Complex64>> {
    let kernel = Kernel::new(layout, channel)?;
    let delta = kernel.delta;
    let eta = options.eta;
    times
        .par_iter()
        .map(|&t| {
            let h = |e: f64| {
                let z = Complex64::new(e, eta);
                let Ok(f) = f_pm(ComplexEnergy::physical(z)) else {
                    return Complex64::new(0.0, 0.0);
                };
                let g = (z - delta - kernel.sigma_f(f)).inv() - (z - delta).inv();
                g * Complex64::from_polar(1.0, -e * t)
            };
            let q = quad::integrate(
                h,
                -options.e_max,
                options.e_max,
                options.abs_tol,
                0.0,
                options.max_segments,
            );
            if !q.value.is_finite() {
                return Err(Error::Numeric(format!("direct amplitude diverged at t = {t}")));
            }
            let integral = q.value * Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI)) * (eta * t).exp();
            Ok(Complex64::from_polar(1.0, -delta * t) + integral)
        })
        .collect()
}

/// `C_eg = (C_+ + C_-)/2`, `C_ge = (C_+ - C_-)/2`.
pub fn combine_pm(c_plus: &[Complex64], c_minus: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if c_plus.len() != c_minus.len() {
        return Err(Error::InvalidArgument(format!(
            "channel amplitudes differ in length: {} vs {}",
            c_plus.len(),
            c_minus.len()
        )));
    }
    Ok(c_plus
        .iter()
        .zip(c_minus)
        .map(|(p, m)| ((p + m) * 0.5, (p - m) * 0.5))
        .unzip())
}
