//! Figures of merit for decoherence-free interaction between braided atoms
//! and the giant-versus-small comparison.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::BathParams;
use crate::evolve::{max_population_transfer_until, simulate_from_atom, EvolveConfig};
use crate::layout::{dfi_candidate_points_with, DfiBranches, Layout};
use crate::resolvent::{find_real_poles, find_unstable_poles, Channel, Pole, PoleSearch, PoleSet};
use crate::{Error, Result};

/// `z_I` at or below this counts as zero.
pub const RATE_TOL: f64 = 1e-12;
/// A channel is multi-pole when a runner-up pole still carries more than this
/// fraction of the dominant pole's weight `|R| e^{Im z · τ}` at the
/// interference delay `τ`.
pub const DOMINANCE: f64 = 0.2;

/// Oscillation and damping rates from the dominant `±` poles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfiPoleRates {
    pub z_r: f64,
    pub z_i: f64,
    /// `z_R / (2 z_I)`, `+∞` when `z_I ≤ RATE_TOL`.
    pub ratio: f64,
    pub well_defined: bool,
}

/// `z_R = |Re z_+ - Re z_-|/2`, `z_I = |Im z_+ + Im z_-|/2`. Poles are
/// weighed at time `horizon` for the multi-pole flag.
pub fn dfi_rates(plus: &PoleSet, minus: &PoleSet, horizon: f64) -> Result<DfiPoleRates> {
    let (Some(p), Some(m)) = (plus.dominant(), minus.dominant()) else {
        return Err(Error::InvalidArgument("empty pole set".into()));
    };
    let z_r = (p.z_pole.re - m.z_pole.re).abs() / 2.0;
    let z_i = (p.z_pole.im + m.z_pole.im).abs() / 2.0;
    let ratio = if z_i <= RATE_TOL {
        f64::INFINITY
    } else {
        z_r / (2.0 * z_i)
    };
    let weight = |q: &Pole| q.residue.norm() * (q.z_pole.im * horizon).exp();
    let single_pole = |set: &PoleSet| {
        let top = weight(&set.poles[0]);
        set.poles[1..].iter().all(|q| weight(q) <= DOMINANCE * top)
    };
    Ok(DfiPoleRates {
        z_r,
        z_i,
        ratio,
        well_defined: single_pole(plus) && single_pole(minus),
    })
}

/// All contributing poles (bound states and resonances) of one channel.
pub fn channel_poles(layout: &Layout, channel: Channel, search: &PoleSearch) -> Result<PoleSet> {
    Ok(find_real_poles(layout, channel, search)?.merged(&find_unstable_poles(layout, channel, search)?))
}

/// Rates of a two-atom layout, weighing poles at the interference delay of
/// its spacing (the spacing itself outside the band).
pub fn pair_rates(layout: &Layout, search: &PoleSearch) -> Result<DfiPoleRates> {
    let d = layout.spacing().unwrap_or(1);
    let horizon = interference_delay(d, layout.atoms()[0].detuning).unwrap_or(d as f64);
    dfi_rates(
        &channel_poles(layout, Channel::Plus, search)?,
        &channel_poles(layout, Channel::Minus, search)?,
        horizon,
    )
}

/// Delay before the second coupling point of an atom hears the first:
/// `τ J = 2d J / v_g(Δ)`, `= d` at the band centre.
pub fn interference_delay(d: usize, delta: f64) -> Result<f64> {
    if delta.abs() >= 2.0 {
        return Err(Error::OutsideBand { delta });
    }
    let v_g = BathParams::unit(2)?.group_velocity(delta)?;
    Ok(2.0 * d as f64 / v_g)
}

/// Settings shared by the scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub search: PoleSearch,
    pub dt: f64,
    /// Transfer is searched for `t ≤ d + window_periods / z_R`.
    pub window_periods: f64,
    /// Upper bound on the transfer window.
    pub t_cap: f64,
    /// Array size for runs in the band gap, where the light stays bound.
    pub gap_cavities: usize,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        Self {
            search: PoleSearch::default(),
            dt: 0.05,
            window_periods: 4.0,
            t_cap: 1.0e5,
            gap_cavities: 256,
        }
    }
}

impl MetricsOptions {
    pub fn window(&self, d: usize, z_r: f64) -> f64 {
        if z_r <= 0.0 {
            return self.t_cap;
        }
        (d as f64 + self.window_periods / z_r).min(self.t_cap)
    }
}

/// Largest population reached by atom 2 with atom 1 initially excited.
pub fn transfer(layout: &Layout, d: usize, z_r: f64, options: &MetricsOptions) -> Result<f64> {
    let window = options.window(d, z_r);
    let in_gap = layout.atoms()[0].detuning.abs() > 2.0;
    let config = EvolveConfig {
        n_cavities: in_gap.then(|| options.gap_cavities.max((layout.span() + 64).next_power_of_two())),
        ..EvolveConfig::new(options.dt, window)
    };
    let trace = simulate_from_atom(layout, 0, &config)?;
    max_population_transfer_until(&trace, window)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfiMetrics {
    pub d: usize,
    pub delta: f64,
    pub z_r: f64,
    pub z_i: f64,
    pub ratio: f64,
    /// Computed for scan optima only.
    pub max_transfer: Option<f64>,
    /// `None` outside the band.
    pub tau_j: Option<f64>,
    pub well_defined: bool,
}

/// Rates (and optionally transfer) of one braided pair.
pub fn dfi_point(d: usize, delta: f64, g: f64, with_transfer: bool, options: &MetricsOptions) -> Result<DfiMetrics> {
    let layout = Layout::braided(delta, g, d)?;
    let rates = pair_rates(&layout, &options.search)?;
    let max_transfer = if with_transfer {
        Some(transfer(&layout, d, rates.z_r, options)?)
    } else {
        None
    };
    Ok(DfiMetrics {
        d,
        delta,
        z_r: rates.z_r,
        z_i: rates.z_i,
        ratio: rates.ratio,
        max_transfer,
        tau_j: interference_delay(d, delta).ok(),
        well_defined: rates.well_defined,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DfiScan {
    /// Grid points, `d`-major.
    pub points: Vec<DfiMetrics>,
    /// Per-`d` maximum of the ratio among well-defined points, refined off
    /// the grid, with transfer.
    pub optima: Vec<DfiMetrics>,
}

impl DfiScan {
    /// Whether the optimal ratio and transfer never increase with `d`.
    pub fn monotone(&self) -> bool {
        self.optima.windows(2).all(|w| {
            w[1].ratio <= w[0].ratio * (1.0 + 1e-9)
                && w[1].max_transfer.unwrap_or(0.0) <= w[0].max_transfer.unwrap_or(0.0) + 1e-9
        })
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Ratio and well-definedness over `d ∈ 1..=d_max` and `delta_grid`, plus
/// the per-`d` optimum.
pub fn dfi_scan(d_max: usize, delta_grid: &[f64], g: f64, options: &MetricsOptions) -> Result<DfiScan> {
    let jobs: Vec<(usize, f64)> = (1..=d_max)
        .flat_map(|d| delta_grid.iter().map(move |&x| (d, x)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(d, delta)| dfi_point(d, delta, g, false, options))
        .collect::<Result<Vec<_>>>()?;

    let mut optima = Vec::new();
    for d in 1..=d_max {
        let row: Vec<(usize, &DfiMetrics)> = points.iter().filter(|p| p.d == d).enumerate().collect();
        let Some(&(best_i, best)) = row
            .iter()
            .filter(|(_, p)| p.well_defined && p.ratio.is_finite())
            .max_by(|a, b| a.1.ratio.total_cmp(&b.1.ratio))
        else {
            continue;
        };
        let lo = row.get(best_i.wrapping_sub(1)).map_or(best.delta, |r| r.1.delta);
        let hi = row.get(best_i + 1).map_or(best.delta, |r| r.1.delta);
        let score = |x: f64| {
            dfi_point(d, x, g, false, options)
                .ok()
                .filter(|m| m.well_defined && m.ratio.is_finite())
                .map_or(f64::NEG_INFINITY, |m| m.ratio)
        };
        let refined = if hi > lo {
            golden_max(score, lo, hi, 40)
        } else {
            best.delta
        };
        let delta = if score(refined) >= best.ratio {
            refined
        } else {
            best.delta
        };
        optima.push((d, delta));
    }
    let optima = optima
        .par_iter()
        .map(|&(d, delta)| dfi_point(d, delta, g, true, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(DfiScan { points, optima })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    SmallPair,
    BraidedPair,
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairKind::SmallPair => "small",
            PairKind::BraidedPair => "braided",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    InBand,
    Gap,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::InBand => "band",
            Region::Gap => "gap",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: PairKind,
    pub region: Region,
    pub delta: f64,
    pub d: usize,
    pub g: f64,
    pub z_r: f64,
    pub max_transfer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub gap_deltas: Vec<f64>,
    pub d_values: Vec<usize>,
    pub g_values: Vec<f64>,
    /// Adds small pairs with twice the coupling of the giant atoms.
    pub handicap: bool,
    /// Adds braided pairs at the in-band decoherence-free point closest to
    /// the band centre for each `d`.
    pub in_band: bool,
    pub options: MetricsOptions,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            gap_deltas: vec![2.1, 3.0],
            d_values: (1..=10).collect(),
            g_values: vec![0.2, 0.4],
            handicap: true,
            in_band: true,
            options: MetricsOptions::default(),
        }
    }
}

/// In-band decoherence-free detuning closest to the band centre.
pub fn central_dfi_point(d: usize) -> Option<f64> {
    dfi_candidate_points_with(d, 1e-9, DfiBranches::Both)
        .into_iter()
        .filter(|&(dd, _)| dd == d)
        .map(|(_, x)| x)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)))
}

fn row(
    kind: PairKind,
    region: Region,
    delta: f64,
    d: usize,
    g: f64,
    g_small: f64,
    options: &MetricsOptions,
) -> Result<ComparisonRow> {
    let (layout, g) = match kind {
        PairKind::SmallPair => (Layout::small_pair(delta, g_small, d)?, g_small),
        PairKind::BraidedPair => (Layout::braided(delta, g, d)?, g),
    };
    let rates = pair_rates(&layout, &options.search)?;
    Ok(ComparisonRow {
        kind,
        region,
        delta,
        d,
        g,
        z_r: rates.z_r,
        max_transfer: transfer(&layout, d, rates.z_r, options)?,
    })
}

/// Rows for small and braided pairs in the gap and braided pairs at in-band
/// decoherence-free points.
pub fn compare_giant_small(config: &CompareConfig) -> Result<Vec<ComparisonRow>> {
    let mut jobs: Vec<(PairKind, Region, f64, usize, f64, f64)> = Vec::new();
    for &g in &config.g_values {
        for &d in &config.d_values {
            for &delta in &config.gap_deltas {
                if delta.abs() <= 2.0 {
                    return Err(Error::InvalidArgument(format!("gap detuning {delta} lies in the band")));
                }
                jobs.push((PairKind::BraidedPair, Region::Gap, delta, d, g, g));
                jobs.push((PairKind::SmallPair, Region::Gap, delta, d, g, g));
                if config.handicap {
                    jobs.push((PairKind::SmallPair, Region::Gap, delta, d, g, 2.0 * g));
                }
            }
            if config.in_band {
                if let Some(delta) = central_dfi_point(d) {
                    jobs.push((PairKind::BraidedPair, Region::InBand, delta, d, g, g));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(kind, region, delta, d, g, gs)| row(kind, region, delta, d, g, gs, &config.options))
        .collect()
}
