use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::lattice::f_pm;
use super::{Channel, ComplexEnergy, SelfEnergyEval};
use crate::layout::Layout;
use crate::{Error, Result};

/// `f` and the sheet-consistent `√(z² - 4) = f - 1/f` at `z`.
fn root_pair(z: ComplexEnergy) -> Result<(Complex64, Complex64)> {
    let f = f_pm(z)?;
    Ok((f, f - f.inv()))
}

/// Self-energy of one giant atom with `p` coupling points spaced by `d`:
///
/// `Σ_e = g²/√(z²-4) · [P + 2 Σ_{p=1}^{P-1} p f^{(P-p)d}]`.
pub fn self_energy_single(z: ComplexEnergy, p: usize, d: usize, g: f64) -> Result<Complex64> {
    if p == 0 {
        return Err(Error::InvalidArgument("P must be at least 1".into()));
    }
    let (f, s) = root_pair(z)?;
    let mut bracket = Complex64::new(p as f64, 0.0);
    for k in 1..p {
        bracket += 2.0 * k as f64 * f.powu(((p - k) * d) as u32);
    }
    Ok(g * g / s * bracket)
}

/// Interaction self-energy of two equidistant separate atoms,
/// `g²/√ · [f^d + 2 f^{2d} + f^{3d}]`.
pub fn self_energy_separate(z: ComplexEnergy, d: usize, g: f64) -> Result<Complex64> {
    let (f, s) = root_pair(z)?;
    let fd = f.powu(d as u32);
    Ok(g * g / s * (fd + 2.0 * fd * fd + fd * fd * fd))
}

/// Interaction self-energy of two equidistant braided atoms,
/// `g²/√ · [3 f^d + f^{3d}]`.
pub fn self_energy_braided(z: ComplexEnergy, d: usize, g: f64) -> Result<Complex64> {
    let (f, s) = root_pair(z)?;
    let fd = f.powu(d as u32);
    Ok(g * g / s * (3.0 * fd + fd * fd * fd))
}

/// Interaction self-energy of two equidistant nested atoms,
/// `g²/√ · [2 f^d + 2 f^{2d}]`.
pub fn self_energy_nested(z: ComplexEnergy, d: usize, g: f64) -> Result<Complex64> {
    let (f, s) = root_pair(z)?;
    let fd = f.powu(d as u32);
    Ok(g * g / s * (2.0 * fd + 2.0 * fd * fd))
}

/// `Σ_int = g²/√(z²-4) · Σ_{p,q} f^{|n_1p - n_2q|}` for any two-atom layout.
pub fn interaction_self_energy(z: ComplexEnergy, layout: &Layout) -> Result<Complex64> {
    Kernel::interaction(layout)?.sigma(z)
}

/// `Σ_e`, `Σ_int` and the Markov split for a pair of identical atoms (or
/// `Σ_e` alone, with `Σ_int = 0`, for a single atom).
pub fn self_energy_two(z: ComplexEnergy, layout: &Layout) -> Result<SelfEnergyEval> {
    let sigma_e = Kernel::new(layout, Channel::E)?.sigma(z)?;
    if layout.n_atoms() == 1 {
        return Ok(SelfEnergyEval::new(sigma_e, Complex64::new(0.0, 0.0)));
    }
    // the ± kernel checks that both atoms are identical
    Kernel::new(layout, Channel::Plus)?;
    let sigma_int = interaction_self_energy(z, layout)?;
    Ok(SelfEnergyEval::new(sigma_e, sigma_int))
}

/// Markovian rates at `E + i0⁺`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovSplit {
    /// `Re Σ_e`
    pub delta_e: f64,
    /// `-2 Im Σ_e`
    pub gamma_e: f64,
    /// `Re Σ_int`
    pub exchange: f64,
    /// `-2 Im Σ_int`
    pub collective: f64,
}

/// At a band edge the split is finite only if the coupling pattern cancels
/// the density-of-states divergence; otherwise this reports it.
pub fn markov_split(energy: f64, layout: &Layout) -> Result<MarkovSplit> {
    if (energy.abs() - 2.0).abs() < 1e-12 {
        return edge_split(energy, layout);
    }
    let z = ComplexEnergy::above(energy);
    let sigma_e = Kernel::new(layout, Channel::E)?.sigma(z)?;
    let sigma_int = if layout.n_atoms() == 2 {
        interaction_self_energy(z, layout)?
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(MarkovSplit {
        delta_e: sigma_e.re,
        gamma_e: -2.0 * sigma_e.im,
        exchange: sigma_int.re,
        collective: -2.0 * sigma_int.im,
    })
}

fn edge_split(energy: f64, layout: &Layout) -> Result<MarkovSplit> {
    // f = -1 at E = 2, f = 1 at E = -2
    let f0 = -energy.signum();
    let divergent = Error::BandEdgeDivergence { energy };
    let delta_e = Kernel::new(layout, Channel::E)?
        .edge_limit(f0)
        .ok_or(divergent.clone())?;
    let exchange = if layout.n_atoms() == 2 {
        Kernel::interaction(layout)?.edge_limit(f0).ok_or(divergent)?
    } else {
        0.0
    };
    Ok(MarkovSplit {
        delta_e,
        gamma_e: 0.0,
        exchange,
        collective: 0.0,
    })
}

/// `G(z) = 1 / (z - Δ - Σ_channel(z))` on the sheet carried by `z`.
pub fn green(z: ComplexEnergy, channel: Channel, layout: &Layout) -> Result<Complex64> {
    let inv = Kernel::new(layout, channel)?.inverse_green(z)?;
    if inv.norm() < 1e-14 {
        return Err(Error::AtPole { magnitude: inv.norm() });
    }
    Ok(inv.inv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::momentum_grid;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Finite-N momentum sum: (g²/N) Σ_k Σ_{p,q} e^{ik(n_p - n_q)} / (z + 2cos k).
    fn k_sum(z: Complex64, a: &[usize], b: &[usize], g: f64, n: usize) -> Complex64 {
        let grid = momentum_grid(n).unwrap();
        let mut total = c(0.0, 0.0);
        for &k in &grid.k_values {
            let mut phase = c(0.0, 0.0);
            for &p in a {
                for &q in b {
                    phase += c(0.0, k * (p as f64 - q as f64)).exp();
                }
            }
            total += phase / (z + 2.0 * k.cos());
        }
        total * g * g / n as f64
    }

    #[test]
    fn small_atom_limit() {
        for &z in &[c(3.0, 0.0), c(0.4, 0.2), c(-2.5, -0.1)] {
            let e = ComplexEnergy::physical(z);
            let s = super::super::physical_root(z);
            let got = self_energy_single(e, 1, 3, 0.3).unwrap();
            assert!((got - 0.09 / s).norm() < 1e-14);
        }
    }

    #[test]
    fn two_point_values() {
        let g = 0.2;
        // d = 2 at band centre: 1 + f² = 0
        let s = self_energy_single(ComplexEnergy::above(0.0), 2, 2, g).unwrap();
        assert!(s.norm() < 1e-16);
        // d = 1 at band centre: (g²)(1 - i)
        let s = self_energy_single(ComplexEnergy::above(0.0), 2, 1, g).unwrap();
        assert!((s - c(g * g, -g * g)).norm() < 1e-15);
        // d = 1 approaching the upper edge: Γ → 0
        let near = self_energy_single(ComplexEnergy::above(2.0 - 1e-8), 2, 1, g).unwrap();
        assert!(-2.0 * near.im < 1e-5);
        let small = self_energy_single(ComplexEnergy::above(0.0), 1, 1, g).unwrap();
        assert!((-2.0 * small.im - g * g).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_pair_sums() {
        for d in 1..6 {
            for &z in &[c(3.0, 0.0), c(0.7, 0.05), c(-1.1, -0.3), c(-2.4, 0.0)] {
                let e = ComplexEnergy::physical(z);
                let g = 0.35;
                let bra = interaction_self_energy(e, &Layout::braided(0.0, g, d).unwrap()).unwrap();
                let sep = interaction_self_energy(e, &Layout::separate(0.0, g, d).unwrap()).unwrap();
                let nes = interaction_self_energy(e, &Layout::nested(0.0, g, d).unwrap()).unwrap();
                assert!((bra - self_energy_braided(e, d, g).unwrap()).norm() < 1e-14);
                assert!((sep - self_energy_separate(e, d, g).unwrap()).norm() < 1e-14);
                assert!((nes - self_energy_nested(e, d, g).unwrap()).norm() < 1e-14);
                for p in 1..5 {
                    let single = Kernel::new(&Layout::giant(0.0, g, p, d).unwrap(), Channel::E)
                        .unwrap()
                        .sigma(e)
                        .unwrap();
                    assert!((single - self_energy_single(e, p, d, g).unwrap()).norm() < 1e-13);
                }
            }
        }
    }

    /// The braided closed form has the distances of positions (0,2d),(d,3d):
    /// d, d, d and 3d.
    #[test]
    fn braided_term_by_term() {
        for d in 1..8usize {
            let (a, b) = ([0usize, 2 * d], [d, 3 * d]);
            let mut dists: Vec<usize> = a.iter().flat_map(|&p| b.iter().map(move |&q| p.abs_diff(q))).collect();
            dists.sort_unstable();
            assert_eq!(dists, vec![d, d, d, 3 * d]);
        }
    }

    #[test]
    fn interaction_vanishes_deep_in_gap() {
        let e = ComplexEnergy::above(3.0);
        for l in [
            Layout::braided(3.0, 0.2, 40),
            Layout::nested(3.0, 0.2, 40),
            Layout::separate(3.0, 0.2, 40),
        ] {
            assert!(interaction_self_energy(e, &l.unwrap()).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn braided_gap_matches_k_sum() {
        let z = c(3.0, 0.0);
        let got = self_energy_braided(ComplexEnergy::physical(z), 1, 0.2).unwrap();
        let sum = k_sum(z, &[0, 2], &[1, 3], 0.2, 200_000);
        assert!((got - sum).norm() / got.norm() < 1e-4);
    }

    #[test]
    fn markov_split_values() {
        let small = Layout::single(0.0, 0.2, vec![0]).unwrap();
        let m = markov_split(0.0, &small).unwrap();
        assert!((m.gamma_e - 0.04).abs() < 1e-15);
        assert_eq!(m.exchange, 0.0);
        assert!(matches!(
            markov_split(2.0, &small),
            Err(Error::BandEdgeDivergence { .. })
        ));
        assert!(markov_split(-2.0, &small).is_err());

        // two points one site apart cancel the divergence at the upper edge
        let ga = Layout::giant(0.0, 0.2, 2, 1).unwrap();
        let edge = markov_split(2.0, &ga).unwrap();
        assert_eq!(edge.gamma_e, 0.0);
        assert!((edge.delta_e - 0.04).abs() < 1e-15);
        let near = markov_split(2.0 - 1e-10, &ga).unwrap();
        assert!((near.delta_e - edge.delta_e).abs() < 1e-6 && near.gamma_e < 1e-6);
        assert!(markov_split(-2.0, &ga).is_err());

        // braided pair in the upper gap: exchange carries the sign (-1)^d
        let g = 0.2;
        for d in 1..6 {
            let m = markov_split(3.0, &Layout::braided(3.0, g, d).unwrap()).unwrap();
            let theta = (1.5f64).acosh();
            let closed = g * g / 5f64.sqrt() * (3.0 * (-(d as f64) * theta).exp() + (-3.0 * d as f64 * theta).exp());
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            assert!((m.exchange - sign * closed).abs() < 1e-14 * closed.max(1e-3));
            assert!(m.collective.abs() < 1e-15);
        }
    }

    #[test]
    fn four_point_rate_has_several_zeros() {
        let l = Layout::giant(0.0, 0.2, 4, 2).unwrap();
        let n = 4000;
        let rates: Vec<f64> = (1..n)
            .map(|i| markov_split(-2.0 + 4.0 * i as f64 / n as f64, &l).unwrap().gamma_e)
            .collect();
        // interior local minima touching zero
        let zeros = rates
            .windows(3)
            .filter(|w| w[1] <= w[0] && w[1] <= w[2] && w[1] < 1e-5)
            .count();
        assert!(zeros >= 3, "{zeros}");
    }

    #[test]
    fn green_limits() {
        let l = Layout::giant(0.4, 1e-9, 2, 1).unwrap();
        let z = ComplexEnergy::physical(c(1.0, 0.3));
        let g = green(z, Channel::E, &l).unwrap();
        assert!((g - (z.z - 0.4).inv()).norm() < 1e-12);

        let pair = Layout::braided(0.0, 0.2, 1).unwrap();
        let gp = green(z, Channel::Plus, &pair).unwrap();
        let gm = green(z, Channel::Minus, &pair).unwrap();
        assert!((gp - gm).norm() > 1e-3);
    }

    /// |G(E + i0⁺)| peaks close to E = Δ + Re Σ(Δ) for weak coupling.
    #[test]
    fn green_lorentzian_peak() {
        let l = Layout::giant(0.5, 0.1, 2, 1).unwrap();
        let shift = markov_split(0.5, &l).unwrap().delta_e;
        let (mut best, mut best_e) = (0.0, 0.0);
        for i in 0..20_001 {
            let e = 0.4 + 0.2 * i as f64 / 20_000.0;
            let v = green(ComplexEnergy::above(e), Channel::E, &l).unwrap().norm();
            if v > best {
                best = v;
                best_e = e;
            }
        }
        assert!((best_e - (0.5 + shift)).abs() < 1e-3, "{best_e} vs {}", 0.5 + shift);
    }

    #[test]
    fn self_energy_two_rejects_non_identical() {
        let nested = Layout::nested(0.0, 0.2, 1).unwrap();
        assert!(matches!(
            self_energy_two(ComplexEnergy::above(0.3), &nested),
            Err(Error::Unsupported(_))
        ));
        let bra = Layout::braided(0.0, 0.2, 1).unwrap();
        let ev = self_energy_two(ComplexEnergy::above(0.0), &bra).unwrap();
        // decoherence-free point: Σ_e = 0, Σ_int = g²
        assert!(ev.sigma_e.norm() < 1e-15);
        assert!((ev.sigma_int - c(0.04, 0.0)).norm() < 1e-15);
        assert_eq!(ev.gamma_e, -2.0 * ev.sigma_e.im);
    }

    proptest! {
        #[test]
        fn rate_non_negative_in_band(e in -1.999f64..1.999, p in 1usize..6, d in 1usize..6, g in 0.01f64..1.0) {
            let l = Layout::giant(0.0, g, p, d).unwrap();
            prop_assert!(markov_split(e, &l).unwrap().gamma_e >= -1e-14);
        }

        #[test]
        fn reflection_symmetry(re in -5.0f64..5.0, im in 0.01f64..3.0, d in 1usize..5) {
            let z = c(re, im);
            for l in [Layout::braided(0.0, 0.3, d).unwrap(), Layout::giant(0.0, 0.3, 3, d).unwrap()] {
                let a = self_energy_two(ComplexEnergy::physical(z), &l).unwrap();
                let b = self_energy_two(ComplexEnergy::physical(z.conj()), &l).unwrap();
                prop_assert!((a.sigma_e - b.sigma_e.conj()).norm() < 1e-13);
                prop_assert!((a.sigma_int - b.sigma_int.conj()).norm() < 1e-13);
            }
        }
    }
}
