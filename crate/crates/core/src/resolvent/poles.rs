use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::lattice::{energy_of, f_pm, root_near, CUT_TOL};
use super::{Channel, ComplexEnergy, Pole, PoleKind, PoleSet};
use crate::layout::Layout;
use crate::{Error, Result};

/// Search settings for [`find_real_poles`] and [`find_unstable_poles`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSearch {
    /// Uniform scan points per band gap.
    pub scan_points: usize,
    /// Real-axis seed spacing over `[-2, 2]`.
    pub seed_step: f64,
    /// Imaginary parts of the seed grid.
    pub seed_imag: Vec<f64>,
    /// Residual `|G⁻¹|` accepted as converged.
    pub tolerance: f64,
    /// Poles closer than this are merged.
    pub dedupe: f64,
    pub max_iterations: usize,
}

impl Default for PoleSearch {
    fn default() -> Self {
        Self {
            scan_points: 10_000,
            seed_step: 0.05,
            seed_imag: vec![-0.01, -0.1, -0.5],
            tolerance: 1e-12,
            dedupe: 1e-8,
            max_iterations: 100,
        }
    }
}

/// Newton iteration on `G⁻¹(f)`. Returns `None` if it does not converge.
fn newton(kernel: &Kernel, mut f: Complex64, tol: f64, max_iter: usize) -> Option<Complex64> {
    for _ in 0..max_iter {
        let v = kernel.inverse_green_f(f);
        if !v.is_finite() {
            return None;
        }
        let d = kernel.inverse_green_df(f);
        if d.norm() == 0.0 {
            return None;
        }
        let step = v / d;
        f -= step;
        if step.norm() <= 1e-15 * f.norm().max(1.0) {
            break;
        }
    }
    let residual = kernel.inverse_green_f(f).norm();
    (f.is_finite() && residual <= tol.max(1e-15 * f.norm().max(f.inv().norm()))).then_some(f)
}

/// `f = ±1` are band-edge artefacts of the pole polynomial.
fn is_edge(f: Complex64) -> bool {
    (f - 1.0).norm() < 1e-6 || (f + 1.0).norm() < 1e-6
}

/// Roots of a real polynomial (ascending coefficients) from the eigenvalues
/// of its companion matrix, or from Aberth iteration when the QR sweeps
/// stall (nalgebra applies no exceptional shifts).
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    match Schur::try_new(m, f64::EPSILON, 2000 * n) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => aberth(coeffs),
    }
}

fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |x: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |(p, dp), &c| {
                (p * x + c, dp * x + p)
            })
    };
    let radius = 1.0 + coeffs[..n].iter().map(|c| (c / coeffs[n]).abs()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval(roots[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (roots[i] - roots[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            roots[i] -= step;
            moved = moved.max(step.norm() / roots[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

fn residue_from_f(kernel: &Kernel, f: Complex64) -> Result<Complex64> {
    // R = 1 / (dG⁻¹/dz) = (dz/df) / (dG⁻¹/df)
    let dz_df = -(f * f - 1.0) / (f * f);
    let d = kernel.inverse_green_df(f) / dz_df;
    if d.norm() < 1e-12 {
        return Err(Error::DegeneratePole { magnitude: d.norm() });
    }
    Ok(d.inv())
}

fn make_pole(kernel: &Kernel, f: Complex64, kind: PoleKind) -> Result<Pole> {
    let mut z = energy_of(f);
    if kind == PoleKind::Real {
        z.im = 0.0;
    }
    Ok(Pole {
        z_pole: z,
        residue: residue_from_f(kernel, f)?,
        kind,
        channel: kernel.channel,
        f,
    })
}

fn push_unique(found: &mut Vec<Complex64>, f: Complex64, tol: f64) {
    let z = energy_of(f);
    if !found
        .iter()
        .any(|&g| (energy_of(g) - z).norm() < tol && (g.norm() < 1.0) == (f.norm() < 1.0))
    {
        found.push(f);
    }
}

/// Bound-state poles: real `z` with `|z| > 2`, i.e. real `f` with `0 < |f| < 1`.
pub fn find_real_poles(layout: &Layout, channel: Channel, search: &PoleSearch) -> Result<PoleSet> {
    let kernel = Kernel::new(layout, channel)?;
    let g = |x: f64| kernel.inverse_green_f(Complex64::new(x, 0.0)).re;
    let mut found: Vec<Complex64> = Vec::new();
    let n = search.scan_points.max(2);
    // f ∈ (-1, 0) is the upper gap, f ∈ (0, 1) the lower gap
    for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
        let xs: Vec<f64> = (1..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        for w in xs.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (mut ga, gb) = (g(a), g(b));
            if ga == 0.0 {
                push_unique(&mut found, Complex64::new(a, 0.0), search.dedupe);
                continue;
            }
            if ga.signum() == gb.signum() {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let gm = g(m);
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            let x = 0.5 * (a + b);
            let f = newton(&kernel, Complex64::new(x, 0.0), search.tolerance, 5)
                .map(|f| Complex64::new(f.re, 0.0))
                .unwrap_or(Complex64::new(x, 0.0));
            push_unique(&mut found, f, search.dedupe);
        }
    }
    // double roots touch zero without a sign change
    for r in polynomial_roots(&kernel.pole_polynomial()) {
        if r.im.abs() < 1e-7 && r.re.abs() < 1.0 - 1e-9 && r.re.abs() > 0.0 && !is_edge(r) {
            if let Some(f) = newton(
                &kernel,
                Complex64::new(r.re, 0.0),
                search.tolerance,
                search.max_iterations,
            ) {
                if f.im.abs() < 1e-10 {
                    push_unique(&mut found, Complex64::new(f.re, 0.0), search.dedupe);
                }
            }
        }
    }
    let poles = found
        .into_iter()
        .filter(|f| kernel.inverse_green_f(*f).norm() <= search.tolerance.max(1e-12))
        .map(|f| make_pole(&kernel, f, PoleKind::Real))
        .collect::<Result<Vec<_>>>()?;
    Ok(PoleSet::new(poles))
}

/// Whether a root `f` gives a pole that the contour deformation picks up:
/// second sheet (or on the cut), below the band, `|Re z| < 2`.
fn contributes(f: Complex64) -> bool {
    f.norm() >= 1.0 - CUT_TOL && f.im > 0.0 && energy_of(f).re.abs() < 2.0
}

/// Resonances: second-sheet zeros of `G⁻¹` below the band.
pub fn find_unstable_poles(layout: &Layout, channel: Channel, search: &PoleSearch) -> Result<PoleSet> {
    let kernel = Kernel::new(layout, channel)?;
    let mut seeds: Vec<Complex64> = polynomial_roots(&kernel.pole_polynomial());

    let markov = kernel.delta + kernel.sigma(ComplexEnergy::above(kernel.delta.clamp(-2.0 + 1e-9, 2.0 - 1e-9)))?;
    let mut zs = vec![markov];
    let steps = (4.0 / search.seed_step).round() as usize;
    for i in 0..=steps {
        let re = -2.0 + 4.0 * i as f64 / steps as f64;
        for &im in &search.seed_imag {
            zs.push(Complex64::new(re, im));
        }
    }
    for z in zs {
        if (z.re.abs() - 2.0).abs() < 1e-12 && z.im == 0.0 {
            continue;
        }
        seeds.push(f_pm(ComplexEnergy::second(z))?);
    }

    let mut found: Vec<Complex64> = Vec::new();
    for seed in seeds {
        if is_edge(seed) || seed.norm() < 1e-12 {
            continue;
        }
        if let Some(mut f) = newton(&kernel, seed, search.tolerance, search.max_iterations) {
            if is_edge(f) {
                continue;
            }
            // snap numerically unimodular roots onto the cut
            if (f.norm() - 1.0).abs() < CUT_TOL {
                f /= f.norm();
            }
            if contributes(f) {
                push_unique(&mut found, f, search.dedupe);
            }
        }
    }
    let poles = found
        .into_iter()
        .map(|f| make_pole(&kernel, f, PoleKind::Unstable))
        .collect::<Result<Vec<_>>>()?;
    Ok(PoleSet::new(poles))
}

/// Residue `1 / (1 - ∂_z Σ)` at a converged pole.
pub fn residue_at(z_pole: ComplexEnergy, channel: Channel, layout: &Layout) -> Result<Complex64> {
    let kernel = Kernel::new(layout, channel)?;
    residue_from_f(&kernel, f_pm(z_pole)?)
}

/// Residue from a central difference of `G⁻¹` with step `h`, continuing the
/// root through the cut when the pole sits next to it. The step shrinks near
/// the branch points.
pub fn residue_finite_difference(pole: &Pole, layout: &Layout, h: f64) -> Result<Complex64> {
    let kernel = Kernel::new(layout, pole.channel)?;
    let edge = (pole.z_pole - 2.0).norm().min((pole.z_pole + 2.0).norm());
    let h = h.min(1e-4 * edge);
    let at = |z: Complex64| kernel.inverse_green_f(root_near(z, pole.f));
    let d = (at(pole.z_pole + h) - at(pole.z_pole - h)) / (2.0 * h);
    if d.norm() < 1e-12 {
        return Err(Error::DegeneratePole { magnitude: d.norm() });
    }
    Ok(d.inv())
}
