//! One function per subcommand. Each returns its tables, derived defaults
//! and warnings; writing is left to the caller.

use giant_atoms::evolve::{auto_cavities, simulate_from_atom};
use giant_atoms::hamiltonian::energy_levels;
use giant_atoms::metrics::{compare_giant_small, dfi_scan, CompareConfig, DfiMetrics};
use giant_atoms::resolvent::{
    amplitude_from_poles, branch_cut_contribution, combine_pm, find_real_poles, find_unstable_poles,
    interaction_self_energy, markov_split, Kernel,
};
use giant_atoms::{BathParams, Channel, Complex64, ComplexEnergy, Error, Layout, PoleKind, PoleSet, Sheet};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::output::{Cell, Table};
use crate::CliError;

pub struct Outcome {
    pub tables: Vec<Table>,
    pub derived: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(tables: Vec<Table>) -> Self {
        Self {
            tables,
            derived: Map::new(),
            warnings: Vec::new(),
        }
    }
}

/// Resolvent channels available for a layout: `e` for one atom, `±` for
/// two identical atoms, none otherwise.
fn channels(layout: &Layout) -> Vec<Channel> {
    match layout.n_atoms() {
        1 => vec![Channel::E],
        _ if Kernel::new(layout, Channel::Plus).is_ok() => vec![Channel::Plus, Channel::Minus],
        _ => Vec::new(),
    }
}

fn all_poles(layout: &Layout, channel: Channel, config: &RunConfig) -> Result<PoleSet, Error> {
    let search = config.tolerances.search();
    Ok(find_real_poles(layout, channel, &search)?.merged(&find_unstable_poles(layout, channel, &search)?))
}

fn kind_name(kind: PoleKind) -> &'static str {
    match kind {
        PoleKind::Real => "real",
        PoleKind::Unstable => "unstable",
    }
}

fn sheet_name(sheet: Sheet) -> &'static str {
    match sheet {
        Sheet::Physical => "physical",
        Sheet::Second => "second",
    }
}

pub fn spectrum(config: &RunConfig) -> Result<Outcome, CliError> {
    let n = config.bath.n;
    let bath = BathParams::unit(n).map_err(CliError::from_config)?;
    let gs = config.spectrum.g.values();
    let results = gs
        .par_iter()
        .map(|&g| -> Result<_, CliError> {
            let levels = if g == 0.0 {
                // Decoupled: bath modes plus the bare atomic levels.
                let mut e: Vec<f64> = if config.bath.periodic {
                    let k = bath.momentum_grid().map_err(CliError::from_config)?;
                    k.k_values.iter().map(|&k| bath.dispersion(k)).collect()
                } else {
                    (1..=n)
                        .map(|j| bath.dispersion(std::f64::consts::PI * j as f64 / (n + 1) as f64))
                        .collect()
                };
                let atoms = config.layout.build()?.n_atoms();
                e.extend(std::iter::repeat_n(config.layout.delta, atoms));
                e.sort_by(f64::total_cmp);
                let bound = vec![false; e.len()];
                (e, bound, Vec::new())
            } else {
                let layout = config.layout.build_with(config.layout.delta, g)?;
                let centred = layout.centered_in(n).map_err(CliError::from_config)?;
                let s = energy_levels(&bath, &centred, config.bath.periodic)?;
                let mut bound = vec![false; s.eigenvalues.len()];
                for &i in &s.bound_state_indices {
                    bound[i] = true;
                }
                let mut poles = Vec::new();
                for channel in channels(&layout) {
                    for p in find_real_poles(&layout, channel, &config.tolerances.search())?.iter() {
                        poles.push((channel, p.z_pole.re, p.residue.re));
                    }
                }
                (s.eigenvalues, bound, poles)
            };
            Ok((g, levels))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut levels = Table::new("spectrum", &["g", "index", "energy", "bound"]);
    let mut poles = Table::new("spectrum_poles", &["g", "channel", "energy", "residue"]);
    for (g, (e, bound, p)) in results {
        for (i, (e, b)) in e.into_iter().zip(bound).enumerate() {
            levels.push(vec![g.into(), i.into(), e.into(), b.into()]);
        }
        for (channel, e, r) in p {
            poles.push(vec![g.into(), channel.to_string().into(), e.into(), r.into()]);
        }
    }
    let mut out = Outcome::new(vec![levels, poles]);
    out.derived.insert("n_cavities".into(), json!(n));
    Ok(out)
}

pub fn decay_rate(config: &RunConfig) -> Result<Outcome, CliError> {
    let deltas = config.decay_rate.delta.values();
    let rows = deltas
        .par_iter()
        .map(|&delta| -> Result<_, CliError> {
            let layout = config.layout.build_with(delta, config.layout.g)?;
            let markov = match markov_split(delta, &layout) {
                Ok(m) => Some(m),
                Err(Error::BandEdgeDivergence { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let pole = if config.decay_rate.poles {
                let set = all_poles(&layout, Channel::E, config)?;
                set.dominant().map(|p| (p.z_pole, p.residue.norm()))
            } else {
                None
            };
            Ok((delta, markov, pole))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Outcome::new(Vec::new());
    let mut curve = Table::new("decay_rate", &["delta", "lamb_shift", "gamma"]);
    let mut markers = Table::new("decay_rate_poles", &["delta", "z_re", "z_im", "gamma", "residue_abs"]);
    for (delta, markov, pole) in rows {
        match markov {
            Some(m) => curve.push(vec![delta.into(), m.delta_e.into(), m.gamma_e.into()]),
            None => {
                out.warnings
                    .push(format!("Markov rate diverges at the band edge Δ = {delta}"));
                curve.push(vec![delta.into(), f64::NAN.into(), f64::INFINITY.into()]);
            }
        }
        if let Some((z, r)) = pole {
            markers.push(vec![
                delta.into(),
                z.re.into(),
                z.im.into(),
                (-2.0 * z.im).into(),
                r.into(),
            ]);
        }
    }
    out.tables = vec![curve, markers];
    Ok(out)
}

pub fn evolve(config: &RunConfig) -> Result<Outcome, CliError> {
    let layout = config.layout.build()?;
    let ev = config.evolve.config();
    let which = config.evolve.initial_atom;
    if which >= layout.n_atoms() {
        return Err(CliError::Config(format!(
            "evolve.initial_atom = {which} but the layout has {} atoms",
            layout.n_atoms()
        )));
    }
    let trace = simulate_from_atom(&layout, which, &ev)?;
    let a = trace.n_atoms();

    let overlay = if config.evolve.overlay {
        Some(reconstruct(&layout, which, &trace.times, config)?)
    } else {
        None
    };

    const ATOM_COLUMNS: [&str; 2] = ["p1", "p2"];
    const OVERLAY_COLUMNS: [&str; 2] = ["p1_resolvent", "p2_resolvent"];
    let mut header = vec!["t"];
    header.extend(&ATOM_COLUMNS[..a]);
    header.push("norm");
    if overlay.is_some() {
        header.extend(&OVERLAY_COLUMNS[..a]);
    }
    let mut table = Table::new("trace", &header);
    for (s, &t) in trace.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend((0..a).map(|i| trace.atom_populations[i][s].into()));
        row.push(trace.total_norm[s].into());
        if let Some(o) = &overlay {
            row.extend((0..a).map(|i| o[i][s].into()));
        }
        table.push(row);
    }

    let mut out = Outcome::new(vec![table]);
    out.derived.insert("n_cavities".into(), json!(trace.n_cavities));
    out.derived
        .insert("auto_cavities".into(), json!(auto_cavities(&layout, ev.t_max)));
    out.derived.insert("dt".into(), json!(trace.dt));
    out.derived.insert("steps".into(), json!(ev.steps()));
    out.derived.insert("record_stride".into(), json!(ev.stride()));
    out.derived.insert("norm_drift".into(), json!(trace.norm_drift()));
    if trace.wrap_warning {
        out.warnings.push(format!(
            "light emitted by the atoms can wrap around the ring of N = {} within t = {}",
            trace.n_cavities, ev.t_max
        ));
    }
    if trace.norm_drift() > config.tolerances.norm_drift {
        out.warnings
            .push(format!("norm drift {:e} exceeds tolerance", trace.norm_drift()));
    }
    Ok(out)
}

/// Atom populations from the pole and cut expansion, per atom.
fn reconstruct(layout: &Layout, which: usize, times: &[f64], config: &RunConfig) -> Result<Vec<Vec<f64>>, CliError> {
    let search = config.tolerances.search();
    let cut = config.tolerances.cut();
    let pops = |c: &[Complex64]| c.iter().map(|x| x.norm_sqr()).collect::<Vec<f64>>();
    match channels(layout).as_slice() {
        [Channel::E] => Ok(vec![pops(
            &amplitude_from_poles(times, Channel::E, layout, &search, &cut)?.amplitude,
        )]),
        [plus, minus] => {
            let p = amplitude_from_poles(times, *plus, layout, &search, &cut)?;
            let m = amplitude_from_poles(times, *minus, layout, &search, &cut)?;
            let (same, other) = combine_pm(&p.amplitude, &m.amplitude)?;
            let (same, other) = (pops(&same), pops(&other));
            Ok(if which == 0 {
                vec![same, other]
            } else {
                vec![other, same]
            })
        }
        _ => Err(CliError::Config(
            "the resolvent overlay needs a single atom or two identical atoms".into(),
        )),
    }
}

pub fn selfenergy_scan(config: &RunConfig) -> Result<Outcome, CliError> {
    let layout = config.layout.build()?;
    let kernel = Kernel::new(&layout, Channel::E)?;
    let two = layout.n_atoms() == 2;
    let sheet: Sheet = config.selfenergy.sheet.into();
    let im = config.selfenergy.im;
    let rows = config
        .selfenergy
        .energy
        .values()
        .par_iter()
        .map(|&re| -> Result<_, CliError> {
            let z = ComplexEnergy {
                z: Complex64::new(re, im),
                sheet,
            };
            let e = match kernel.sigma(z) {
                Ok(s) => s,
                Err(Error::BranchPoint { .. }) => Complex64::new(f64::NAN, f64::NAN),
                Err(e) => return Err(e.into()),
            };
            let int = if two {
                match interaction_self_energy(z, &layout) {
                    Ok(s) => s,
                    Err(Error::BranchPoint { .. }) => Complex64::new(f64::NAN, f64::NAN),
                    Err(e) => return Err(e.into()),
                }
            } else {
                Complex64::new(0.0, 0.0)
            };
            Ok((re, e, int))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(
        "selfenergy",
        &[
            "z_re",
            "z_im",
            "sigma_e_re",
            "sigma_e_im",
            "sigma_int_re",
            "sigma_int_im",
        ],
    );
    for (re, e, int) in rows {
        table.push(vec![
            re.into(),
            im.into(),
            e.re.into(),
            e.im.into(),
            int.re.into(),
            int.im.into(),
        ]);
    }
    let mut out = Outcome::new(vec![table]);
    out.derived.insert("sheet".into(), json!(sheet_name(sheet)));
    Ok(out)
}

pub fn poles(config: &RunConfig) -> Result<Outcome, CliError> {
    let layout = config.layout.build()?;
    let chans = channels(&layout);
    if chans.is_empty() {
        return Err(CliError::Config(
            "pole search needs a single atom or two identical atoms".into(),
        ));
    }
    let mut table = Table::new(
        "poles",
        &[
            "channel",
            "kind",
            "sheet",
            "z_re",
            "z_im",
            "residue_re",
            "residue_im",
            "residue_abs",
        ],
    );
    let mut out = Outcome::new(Vec::new());
    for channel in chans {
        let set = all_poles(&layout, channel, config)?;
        for p in set.iter() {
            table.push(vec![
                channel.to_string().into(),
                kind_name(p.kind).into(),
                sheet_name(p.sheet()).into(),
                p.z_pole.re.into(),
                p.z_pole.im.into(),
                p.residue.re.into(),
                p.residue.im.into(),
                p.residue.norm().into(),
            ]);
        }
        let cut = branch_cut_contribution(0.0, channel, &layout, &config.tolerances.cut())?;
        let defect = (set.residue_sum() + cut.value - 1.0).norm();
        out.derived
            .insert(format!("completeness_defect_{channel}"), json!(defect));
        if defect > config.tolerances.completeness {
            out.warnings.push(format!(
                "channel {channel}: residues plus cut at t = 0 miss 1 by {defect:e}"
            ));
        }
        if !cut.converged {
            out.warnings
                .push(format!("channel {channel}: cut integral did not converge"));
        }
    }
    out.tables.push(table);
    Ok(out)
}

const DFI_HEADER: [&str; 8] = [
    "d",
    "delta",
    "zR",
    "zI",
    "ratio",
    "max_transfer",
    "tau_J",
    "well_defined",
];

fn dfi_row(m: &DfiMetrics) -> Vec<Cell> {
    vec![
        m.d.into(),
        m.delta.into(),
        m.z_r.into(),
        m.z_i.into(),
        m.ratio.into(),
        m.max_transfer.unwrap_or(f64::NAN).into(),
        m.tau_j.unwrap_or(f64::NAN).into(),
        m.well_defined.into(),
    ]
}

pub fn dfi(config: &RunConfig) -> Result<Outcome, CliError> {
    let s = &config.dfi_scan;
    let grid = s.delta.values();
    let scan = dfi_scan(s.d_max, &grid, s.g, &config.metrics())?;
    let mut points = Table::new("dfi_scan", &DFI_HEADER);
    let mut optima = Table::new("dfi_optima", &DFI_HEADER);
    scan.points.iter().for_each(|m| points.push(dfi_row(m)));
    scan.optima.iter().for_each(|m| optima.push(dfi_row(m)));
    let mut out = Outcome::new(vec![points, optima]);
    out.derived.insert("monotone".into(), json!(scan.monotone()));
    out.derived.insert("dt".into(), json!(config.evolve.dt));
    if !scan.monotone() {
        out.warnings.push("per-d optima are not non-increasing in d".into());
    }
    Ok(out)
}

pub fn compare(config: &RunConfig) -> Result<Outcome, CliError> {
    let c = &config.compare;
    let rows = compare_giant_small(&CompareConfig {
        gap_deltas: c.gap_deltas.clone(),
        d_values: c.d_values.clone(),
        g_values: c.g_values.clone(),
        handicap: c.handicap,
        in_band: c.in_band,
        options: config.metrics(),
    })?;
    let mut table = Table::new("compare", &["kind", "region", "delta", "d", "g", "zR", "max_transfer"]);
    for r in &rows {
        table.push(vec![
            r.kind.to_string().into(),
            r.region.to_string().into(),
            r.delta.into(),
            r.d.into(),
            r.g.into(),
            r.z_r.into(),
            r.max_transfer.into(),
        ]);
    }
    let mut out = Outcome::new(vec![table]);
    out.derived.insert("dt".into(), json!(config.evolve.dt));
    Ok(out)
}
