use num_complex::Complex64;

use super::lattice::{energy_of, f_pm};
use super::{Channel, ComplexEnergy};
use crate::layout::Layout;
use crate::{Error, Result};

/// `G⁻¹` of one channel written in the uniformising variable `f`:
///
/// `G⁻¹(f) = z(f) - Δ - g² Q(f) / s(f)`, `z = -(f + 1/f)`, `s = f - 1/f`,
///
/// where `Q(f) = Σ_m q_m f^m` collects the distances between coupling points
/// (each ordered pair once; inter-atom pairs carry the channel sign).
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub channel: Channel,
    pub delta: f64,
    pub g2: f64,
    /// `q[m]` is the weight of `f^m`.
    pub q: Vec<f64>,
}

fn add_distance(q: &mut Vec<f64>, m: usize, w: f64) {
    if q.len() <= m {
        q.resize(m + 1, 0.0);
    }
    q[m] += w;
}

fn intra(points: &[usize], q: &mut Vec<f64>) {
    for &a in points {
        for &b in points {
            add_distance(q, a.abs_diff(b), 1.0);
        }
    }
}

fn intra_weights(points: &[usize]) -> Vec<f64> {
    let mut q = Vec::new();
    intra(points, &mut q);
    q
}

impl Kernel {
    pub fn new(layout: &Layout, channel: Channel) -> Result<Self> {
        let atoms = layout.atoms();
        let first = &atoms[0];
        let mut q = Vec::new();
        intra(&first.coupling_points, &mut q);
        let sign = match (atoms.len(), channel) {
            (_, Channel::E) => None,
            (1, _) => return Err(Error::Unsupported(format!("channel {channel} needs two atoms"))),
            (_, Channel::Plus) => Some(1.0),
            (_, Channel::Minus) => Some(-1.0),
        };
        if let Some(sign) = sign {
            let second = &atoms[1];
            let identical =
                first.detuning == second.detuning && first.g == second.g && intra_weights(&second.coupling_points) == q;
            if !identical {
                return Err(Error::Unsupported(
                    "the ± decomposition needs identical atoms (equal Δ, g and internal spacing)".into(),
                ));
            }
            for &a in &first.coupling_points {
                for &b in &second.coupling_points {
                    add_distance(&mut q, a.abs_diff(b), sign);
                }
            }
        }
        Ok(Self {
            channel,
            delta: first.detuning,
            g2: first.g * first.g,
            q,
        })
    }

    /// Kernel of the interaction part alone: `Σ_int = g² Q_int / s`.
    pub(crate) fn interaction(layout: &Layout) -> Result<Self> {
        let atoms = layout.atoms();
        if atoms.len() != 2 {
            return Err(Error::Unsupported("interaction self-energy needs two atoms".into()));
        }
        if atoms[0].g != atoms[1].g {
            return Err(Error::Unsupported("atoms with different couplings".into()));
        }
        let mut q = Vec::new();
        for &a in &atoms[0].coupling_points {
            for &b in &atoms[1].coupling_points {
                add_distance(&mut q, a.abs_diff(b), 1.0);
            }
        }
        Ok(Self {
            channel: Channel::Plus,
            delta: atoms[0].detuning,
            g2: atoms[0].g * atoms[0].g,
            q,
        })
    }

    pub fn max_distance(&self) -> usize {
        self.q.len().saturating_sub(1)
    }

    fn q_and_derivative(&self, f: Complex64) -> (Complex64, Complex64) {
        let mut q = Complex64::new(0.0, 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        for &c in self.q.iter().rev() {
            dq = dq * f + q;
            q = q * f + c;
        }
        (q, dq)
    }

    /// `Σ(f)`.
    pub fn sigma_f(&self, f: Complex64) -> Complex64 {
        let (q, _) = self.q_and_derivative(f);
        self.g2 * q * f / (f * f - 1.0)
    }

    /// `dΣ/df`.
    pub fn dsigma_df(&self, f: Complex64) -> Complex64 {
        let (q, dq) = self.q_and_derivative(f);
        let w = f * f - 1.0;
        self.g2 * ((q + f * dq) * w - 2.0 * f * f * q) / (w * w)
    }

    /// `dΣ/dz` via the chain rule, `dz/df = -(f² - 1)/f²`.
    pub fn dsigma_dz(&self, f: Complex64) -> Complex64 {
        let dz_df = -(f * f - 1.0) / (f * f);
        self.dsigma_df(f) / dz_df
    }

    /// `G⁻¹(f) = z - Δ - Σ`.
    pub fn inverse_green_f(&self, f: Complex64) -> Complex64 {
        energy_of(f) - self.delta - self.sigma_f(f)
    }

    /// `d G⁻¹ / df`.
    pub fn inverse_green_df(&self, f: Complex64) -> Complex64 {
        -(1.0 - (f * f).inv()) - self.dsigma_df(f)
    }

    /// `Σ` at a band edge (`f0 = ±1`) when `Q(f0) = 0` cancels the
    /// density-of-states divergence: `g² Q'(f0) / 2`. `None` otherwise.
    pub fn edge_limit(&self, f0: f64) -> Option<f64> {
        let (q, dq) = self.q_and_derivative(Complex64::new(f0, 0.0));
        let scale: f64 = self.q.iter().map(|w| w.abs()).sum();
        (q.norm() <= 1e-12 * scale).then_some(0.5 * self.g2 * dq.re)
    }

    pub fn sigma(&self, z: ComplexEnergy) -> Result<Complex64> {
        Ok(self.sigma_f(f_pm(z)?))
    }

    pub fn inverse_green(&self, z: ComplexEnergy) -> Result<Complex64> {
        let f = f_pm(z)?;
        Ok(z.z - self.delta - self.sigma_f(f))
    }

    /// Coefficients (ascending powers) of `f² (f² - 1) · f⁻¹ · G⁻¹`, a
    /// polynomial with real coefficients whose roots are the poles on both
    /// sheets. `f = ±1` may show up as spurious roots.
    pub fn pole_polynomial(&self) -> Vec<f64> {
        // -(f⁴ - 1) - Δ (f³ - f) - g² f² Q(f)
        let degree = (self.q.len() + 1).max(4);
        let mut c = vec![0.0; degree + 1];
        c[0] += 1.0;
        c[1] += self.delta;
        c[3] -= self.delta;
        c[4] -= 1.0;
        for (m, &w) in self.q.iter().enumerate() {
            c[m + 2] -= self.g2 * w;
        }
        while c.len() > 1 && c.last().is_some_and(|&x| x.abs() < 1e-300) {
            c.pop();
        }
        c
    }
}
