use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::lattice::f_pm;
use super::{Channel, ComplexEnergy};
use crate::layout::Layout;
use crate::quad;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutOptions {
    /// Absolute tolerance of the adaptive quadrature.
    pub abs_tol: f64,
    /// The contour is truncated where the integrand drops below this.
    pub floor: f64,
    pub max_segments: usize,
}

impl Default for CutOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            floor: 1e-12,
            max_segments: 4000,
        }
    }
}

/// Contribution of both band-edge cuts to the amplitude at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutIntegral {
    pub value: Complex64,
    pub abs_error: f64,
    /// Depth of the vertical contours.
    pub y_max: f64,
    pub converged: bool,
}

/// `G_II - G_I` at `z = x - iy` (`y > 0`).
fn discontinuity(kernel: &Kernel, x: f64, y: f64) -> Complex64 {
    let Ok(f1) = f_pm(ComplexEnergy::physical(Complex64::new(x, -y))) else {
        return Complex64::new(0.0, 0.0);
    };
    let g1 = kernel.inverse_green_f(f1).inv();
    let g2 = kernel.inverse_green_f(f1.inv()).inv();
    let g2 = if g2.is_finite() { g2 } else { Complex64::new(0.0, 0.0) };
    g2 - g1
}

/// Integrand in `u` with `y = u²`.
fn integrand(kernel: &Kernel, t: f64, u: f64) -> Complex64 {
    let y = u * u;
    if y == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let left = discontinuity(kernel, -2.0, y) * Complex64::from_polar(1.0, 2.0 * t);
    let right = -discontinuity(kernel, 2.0, y) * Complex64::from_polar(1.0, -2.0 * t);
    (left + right) * ((-y * t).exp() * 2.0 * u / (2.0 * std::f64::consts::PI))
}

/// Amplitude carried by the detours around the cuts descending from `±2`:
///
/// `(1/2π) ∫₀^∞ [ΔG(-2 - iy) e^{2it} - ΔG(2 - iy) e^{-2it}] e^{-yt} dy`,
/// `ΔG = G_II - G_I`.
pub fn branch_cut_contribution(t: f64, channel: Channel, layout: &Layout, options: &CutOptions) -> Result<CutIntegral> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    let kernel = Kernel::new(layout, channel)?;
    let h = |u: f64| integrand(&kernel, t, u);
    let mut u_max = 1.0;
    let mut truncated = false;
    for _ in 0..60 {
        if h(u_max).norm() < options.floor && h(0.5 * u_max).norm() < options.floor * 1e3 {
            truncated = true;
            break;
        }
        u_max *= 2.0;
    }
    let q = quad::integrate(h, 0.0, u_max, options.abs_tol, 0.0, options.max_segments);
    if !q.value.is_finite() {
        return Err(Error::Numeric(format!("branch-cut integral diverged at t = {t}")));
    }
    Ok(CutIntegral {
        value: q.value,
        abs_error: q.abs_error,
        y_max: u_max * u_max,
        converged: q.converged && truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_time() {
        let l = Layout::giant(0.0, 0.2, 2, 1).unwrap();
        assert!(branch_cut_contribution(-1.0, Channel::E, &l, &CutOptions::default()).is_err());
    }

    #[test]
    fn decoupled_atom_has_no_cut() {
        let l = Layout::giant(0.7, 1e-8, 2, 1).unwrap();
        for t in [0.0, 1.0, 10.0] {
            let c = branch_cut_contribution(t, Channel::E, &l, &CutOptions::default()).unwrap();
            assert!(c.value.norm() < 1e-7, "{t}: {c:?}");
            assert!(c.converged);
        }
    }

    #[test]
    fn cut_is_small_far_in_the_gap_at_late_times() {
        let l = Layout::braided(3.0, 0.2, 1).unwrap();
        let c = branch_cut_contribution(100.0, Channel::Plus, &l, &CutOptions::default()).unwrap();
        assert!(c.value.norm() < 1e-3, "{c:?}");
    }
}
