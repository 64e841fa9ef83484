//! Frequency-domain description of the atoms: self-energies, Green's
//! functions, poles on both Riemann sheets, residues, branch-cut integrals and
//! the amplitudes rebuilt from them.
//!
//! # Branch convention
//!
//! The lattice Green's function between cavities a distance `m` apart is
//! `f(z)^m / √(z² - 4J²)` with `f` a root of `J f² + z f + J = 0`. On the
//! physical sheet the square root is `√(z - 2J) √(z + 2J)` with principal
//! factors: it is analytic off `[-2J, 2J]`, tends to `z` at infinity, has
//! positive imaginary part just above the band, and makes `|f| < 1`. The
//! second sheet flips the root, i.e. `f → 1/f`.
//!
//! Internally everything is written in terms of `f`, which uniformises the
//! two-sheeted surface: `z = -J (f + 1/f)` and `√(z² - 4J²) = J (f - 1/f)`.
//! `|f| < 1` is the physical sheet, `|f| > 1` the second sheet and the unit
//! circle the cut. Energies are in units of `J`.

mod amplitude;
mod cuts;
mod kernel;
mod lattice;
mod poles;
mod self_energy;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use amplitude::{amplitude_direct, amplitude_from_poles, combine_pm, DirectOptions, Reconstruction};
pub use cuts::{branch_cut_contribution, CutIntegral, CutOptions};
pub use kernel::Kernel;
pub use lattice::{f_pm, physical_root};
pub use poles::{find_real_poles, find_unstable_poles, residue_at, residue_finite_difference, PoleSearch};
pub use self_energy::{
    green, interaction_self_energy, markov_split, self_energy_braided, self_energy_nested, self_energy_separate,
    self_energy_single, self_energy_two, MarkovSplit,
};

/// Branch of `√(z² - 4J²)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    Physical,
    Second,
}

/// A complex energy together with the sheet it lives on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub z: crate::Complex64,
    pub sheet: Sheet,
}

impl ComplexEnergy {
    pub fn physical(z: crate::Complex64) -> Self {
        Self {
            z,
            sheet: Sheet::Physical,
        }
    }

    pub fn second(z: crate::Complex64) -> Self {
        Self {
            z,
            sheet: Sheet::Second,
        }
    }

    /// `E + i0⁺` on the physical sheet.
    pub fn above(energy: f64) -> Self {
        Self::physical(crate::Complex64::new(energy, 0.0))
    }
}

/// Which diagonal element of the resolvent is meant.
///
/// `E` is the excited state of a single atom (or of atom 1 in a pair);
/// `Plus`/`Minus` are the symmetric and antisymmetric single-excitation
/// states of two identical atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    E,
    Plus,
    Minus,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::E => "e",
            Channel::Plus => "plus",
            Channel::Minus => "minus",
        })
    }
}

/// Self-energies evaluated at one complex energy.
///
/// `delta_e` and `gamma_e` split `sigma_e = delta_e - i gamma_e / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyEval {
    pub sigma_e: crate::Complex64,
    pub sigma_int: crate::Complex64,
    pub delta_e: f64,
    pub gamma_e: f64,
}

impl SelfEnergyEval {
    pub fn new(sigma_e: crate::Complex64, sigma_int: crate::Complex64) -> Self {
        Self {
            sigma_e,
            sigma_int,
            delta_e: sigma_e.re,
            gamma_e: -2.0 * sigma_e.im,
        }
    }

    pub fn sigma_plus(&self) -> crate::Complex64 {
        self.sigma_e + self.sigma_int
    }

    pub fn sigma_minus(&self) -> crate::Complex64 {
        self.sigma_e - self.sigma_int
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PoleKind {
    /// Real pole outside the band: a bound state.
    Real,
    /// Second-sheet pole below the band (or on it): an emitting resonance.
    Unstable,
}

impl fmt::Display for PoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoleKind::Real => "real",
            PoleKind::Unstable => "unstable",
        })
    }
}

/// A zero of `G⁻¹` and the residue of `G` there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub z_pole: crate::Complex64,
    pub residue: crate::Complex64,
    pub kind: PoleKind,
    pub channel: Channel,
    /// Uniformising variable at the pole; `|f| < 1` on the physical sheet.
    pub f: crate::Complex64,
}

impl Pole {
    pub fn sheet(&self) -> Sheet {
        if self.f.norm() < 1.0 - lattice::CUT_TOL {
            Sheet::Physical
        } else {
            Sheet::Second
        }
    }
}

/// Poles of one channel, sorted by decreasing `|residue|`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
}

impl PoleSet {
    pub fn new(mut poles: Vec<Pole>) -> Self {
        poles.sort_by(|a, b| b.residue.norm().total_cmp(&a.residue.norm()));
        Self { poles }
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    /// Pole with the largest `|residue|`.
    pub fn dominant(&self) -> Option<&Pole> {
        self.poles.first()
    }

    pub fn residue_sum(&self) -> crate::Complex64 {
        self.poles.iter().map(|p| p.residue).sum()
    }

    /// Union of two sets (e.g. real and unstable poles of one channel).
    pub fn merged(&self, other: &PoleSet) -> PoleSet {
        PoleSet::new(self.poles.iter().chain(&other.poles).copied().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter()
    }
}
