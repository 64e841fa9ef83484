//! Real-space single-excitation Hamiltonian and its exact diagonalisation.
//!
//! Basis order: the atomic excitations first, then one photon in cavity
//! `0..N`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::BathParams;
use crate::layout::Layout;
use crate::{Error, Result};

/// Eigenvalues with `|E| > 2J (1 + BOUND_MARGIN)` are bound states.
pub const BOUND_MARGIN: f64 = 1e-9;

/// Amplitudes of a single-excitation state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleExcitationState {
    pub atom_amplitudes: Vec<Complex64>,
    pub cavity_amplitudes: Vec<Complex64>,
}

impl SingleExcitationState {
    /// Atom `which` excited, field in vacuum.
    pub fn atom_excited(n_atoms: usize, n_cavities: usize, which: usize) -> Result<Self> {
        if which >= n_atoms {
            return Err(Error::InvalidArgument(format!(
                "atom {which} out of range for {n_atoms} atoms"
            )));
        }
        let mut atom_amplitudes = vec![Complex64::new(0.0, 0.0); n_atoms];
        atom_amplitudes[which] = Complex64::new(1.0, 0.0);
        Ok(Self {
            atom_amplitudes,
            cavity_amplitudes: vec![Complex64::new(0.0, 0.0); n_cavities],
        })
    }

    /// One photon in cavity `site`.
    pub fn photon_at(n_atoms: usize, n_cavities: usize, site: usize) -> Result<Self> {
        if site >= n_cavities {
            return Err(Error::InvalidArgument(format!(
                "cavity {site} out of range for N = {n_cavities}"
            )));
        }
        let mut cavity_amplitudes = vec![Complex64::new(0.0, 0.0); n_cavities];
        cavity_amplitudes[site] = Complex64::new(1.0, 0.0);
        Ok(Self {
            atom_amplitudes: vec![Complex64::new(0.0, 0.0); n_atoms],
            cavity_amplitudes,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.atom_weight() + self.cavity_amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Total population in the atomic states.
    pub fn atom_weight(&self) -> f64 {
        self.atom_amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Numeric("cannot normalise a zero or non-finite state".into()));
        }
        for c in self.atom_amplitudes.iter_mut().chain(self.cavity_amplitudes.iter_mut()) {
            *c /= n;
        }
        Ok(self)
    }
}

/// Eigen-decomposition of the single-excitation Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub n_atoms: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` belongs to `eigenvalues[i]`. Empty for [`energy_levels`].
    pub eigenvectors: DMatrix<f64>,
    pub bound_state_indices: Vec<usize>,
}

impl SpectrumResult {
    pub fn bound_energies(&self) -> Vec<f64> {
        self.bound_state_indices.iter().map(|&i| self.eigenvalues[i]).collect()
    }
}

/// `H = H_B + H_A + H_int` as a dense real symmetric matrix.
pub fn build_hamiltonian(bath: &BathParams, layout: &Layout, periodic: bool) -> Result<DMatrix<f64>> {
    bath.validate()?;
    let n = bath.n;
    if layout.max_point() >= n {
        return Err(Error::InvalidLayout(format!(
            "coupling point {} outside the array of {n} cavities",
            layout.max_point()
        )));
    }
    let a = layout.n_atoms();
    let dim = a + n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut hop = |i: usize, j: usize| {
        h[(a + i, a + j)] -= bath.j;
        h[(a + j, a + i)] -= bath.j;
    };
    for i in 0..n - 1 {
        hop(i, i + 1);
    }
    if periodic {
        hop(n - 1, 0);
    }
    for (i, atom) in layout.atoms().iter().enumerate() {
        h[(i, i)] = atom.detuning;
        for &p in &atom.coupling_points {
            h[(i, a + p)] = atom.g;
            h[(a + p, i)] = atom.g;
        }
    }
    Ok(h)
}

fn bound_indices(values: &[f64], j: f64) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, e)| e.abs() > 2.0 * j * (1.0 + BOUND_MARGIN))
        .map(|(i, _)| i)
        .collect()
}

/// Full spectrum with eigenvectors of the periodic array.
pub fn energy_spectrum(bath: &BathParams, layout: &Layout) -> Result<SpectrumResult> {
    energy_spectrum_with(bath, layout, true)
}

pub fn energy_spectrum_with(bath: &BathParams, layout: &Layout, periodic: bool) -> Result<SpectrumResult> {
    let h = build_hamiltonian(bath, layout, periodic)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = eig.eigenvectors.select_columns(&order);
    Ok(SpectrumResult {
        n_atoms: layout.n_atoms(),
        bound_state_indices: bound_indices(&eigenvalues, bath.j),
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only; cheaper for large arrays.
pub fn energy_levels(bath: &BathParams, layout: &Layout, periodic: bool) -> Result<SpectrumResult> {
    let h = build_hamiltonian(bath, layout, periodic)?;
    let mut eigenvalues: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumResult {
        n_atoms: layout.n_atoms(),
        bound_state_indices: bound_indices(&eigenvalues, bath.j),
        eigenvalues,
        eigenvectors: DMatrix::zeros(0, 0),
    })
}

/// Normalised eigenvector of a bound state.
pub fn bound_state_profile(spectrum: &SpectrumResult, index: usize) -> Result<SingleExcitationState> {
    if !spectrum.bound_state_indices.contains(&index) {
        return Err(Error::NotBoundState { index });
    }
    if spectrum.eigenvectors.ncols() <= index {
        return Err(Error::InvalidArgument(
            "spectrum was computed without eigenvectors".into(),
        ));
    }
    let v = spectrum.eigenvectors.column(index);
    let a = spectrum.n_atoms;
    let re = |x: &f64| Complex64::new(*x, 0.0);
    SingleExcitationState {
        atom_amplitudes: v.iter().take(a).map(re).collect(),
        cavity_amplitudes: v.iter().skip(a).map(re).collect(),
    }
    .normalized()
}
