//! Run configuration, read from TOML. Every field has a default so an empty
//! file (or no file) is a valid config.

use std::path::Path;

use giant_atoms::evolve::EvolveConfig;
use giant_atoms::metrics::MetricsOptions;
use giant_atoms::resolvent::{CutOptions, PoleSearch};
use giant_atoms::{Layout, Sheet, Splitting};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub layout: LayoutConfig,
    pub bath: BathConfig,
    pub evolve: EvolveSection,
    pub spectrum: SpectrumSection,
    pub decay_rate: DecayRateSection,
    pub selfenergy: SelfEnergySection,
    pub dfi_scan: DfiScanSection,
    pub compare: CompareSection,
    pub tolerances: Tolerances,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Giant,
    Braided,
    Separate,
    Nested,
    SmallPair,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub kind: LayoutKind,
    pub delta: f64,
    pub g: f64,
    pub d: usize,
    /// Coupling points of a giant atom.
    pub p: usize,
    /// Coupling points per atom for `kind = "custom"`.
    pub atoms: Vec<Vec<usize>>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            kind: LayoutKind::Giant,
            delta: 0.0,
            g: 0.2,
            d: 1,
            p: 2,
            atoms: Vec::new(),
        }
    }
}

impl LayoutConfig {
    pub fn build(&self) -> Result<Layout, CliError> {
        self.build_with(self.delta, self.g)
    }

    pub fn build_with(&self, delta: f64, g: f64) -> Result<Layout, CliError> {
        let layout = match self.kind {
            LayoutKind::Giant => Layout::giant(delta, g, self.p, self.d),
            LayoutKind::Braided => Layout::braided(delta, g, self.d),
            LayoutKind::Separate => Layout::separate(delta, g, self.d),
            LayoutKind::Nested => Layout::nested(delta, g, self.d),
            LayoutKind::SmallPair => Layout::small_pair(delta, g, self.d),
            LayoutKind::Custom => match self.atoms.as_slice() {
                [one] => Layout::single(delta, g, one.clone()),
                [a, b] => Layout::pair(delta, g, a.clone(), b.clone()),
                _ => {
                    return Err(CliError::Config(format!(
                        "custom layouts need one or two atoms, got {}",
                        self.atoms.len()
                    )))
                }
            },
        };
        layout.map_err(CliError::from_config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathConfig {
    /// Cavities for diagonalisation.
    pub n: usize,
    pub periodic: bool,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self { n: 201, periodic: true }
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    fn validate(&self, name: &str) -> Result<(), CliError> {
        if !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(CliError::Config(format!(
                "{name}: need finite min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingChoice {
    Lie,
    Strang,
}

impl From<SplittingChoice> for Splitting {
    fn from(s: SplittingChoice) -> Self {
        match s {
            SplittingChoice::Lie => Splitting::Lie,
            SplittingChoice::Strang => Splitting::Strang,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub dt: f64,
    pub t_max: f64,
    pub splitting: SplittingChoice,
    pub n_cavities: Option<usize>,
    pub record_stride: Option<usize>,
    /// Atom excited at `t = 0`.
    pub initial_atom: usize,
    /// Adds populations rebuilt from poles and cuts.
    pub overlay: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_max: 50.0,
            splitting: SplittingChoice::Lie,
            n_cavities: None,
            record_stride: None,
            initial_atom: 0,
            overlay: false,
        }
    }
}

impl EvolveSection {
    pub fn config(&self) -> EvolveConfig {
        EvolveConfig {
            record_stride: self.record_stride,
            splitting: self.splitting.into(),
            n_cavities: self.n_cavities,
            ..EvolveConfig::new(self.dt, self.t_max)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub g: Grid,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            g: Grid::new(0.0, 1.0, 21),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayRateSection {
    pub delta: Grid,
    /// Adds the dominant resonance at each detuning.
    pub poles: bool,
}

impl Default for DecayRateSection {
    fn default() -> Self {
        Self {
            delta: Grid::new(-3.0, 3.0, 121),
            poles: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SheetChoice {
    Physical,
    Second,
}

impl From<SheetChoice> for Sheet {
    fn from(s: SheetChoice) -> Self {
        match s {
            SheetChoice::Physical => Sheet::Physical,
            SheetChoice::Second => Sheet::Second,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfEnergySection {
    /// Real part of `z`.
    pub energy: Grid,
    /// Fixed imaginary part of `z`.
    pub im: f64,
    pub sheet: SheetChoice,
}

impl Default for SelfEnergySection {
    fn default() -> Self {
        Self {
            energy: Grid::new(-3.0, 3.0, 241),
            im: 1e-3,
            sheet: SheetChoice::Physical,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfiScanSection {
    pub d_max: usize,
    pub delta: Grid,
    pub g: f64,
}

impl Default for DfiScanSection {
    fn default() -> Self {
        Self {
            d_max: 10,
            delta: Grid::new(-1.95, 1.95, 79),
            g: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub gap_deltas: Vec<f64>,
    pub d_values: Vec<usize>,
    pub g_values: Vec<f64>,
    pub handicap: bool,
    pub in_band: bool,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            gap_deltas: vec![2.1, 3.0],
            d_values: (1..=10).collect(),
            g_values: vec![0.2, 0.4],
            handicap: true,
            in_band: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub pole_tolerance: f64,
    pub scan_points: usize,
    pub cut_abs_tol: f64,
    /// Largest tolerated norm deviation of a trace.
    pub norm_drift: f64,
    /// Largest tolerated `|Σ R + cut(0) - 1|`.
    pub completeness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pole_tolerance: PoleSearch::default().tolerance,
            scan_points: PoleSearch::default().scan_points,
            cut_abs_tol: CutOptions::default().abs_tol,
            norm_drift: 1e-8,
            completeness: 1e-3,
        }
    }
}

impl Tolerances {
    pub fn search(&self) -> PoleSearch {
        PoleSearch {
            tolerance: self.pole_tolerance,
            scan_points: self.scan_points,
            ..PoleSearch::default()
        }
    }

    pub fn cut(&self) -> CutOptions {
        CutOptions {
            abs_tol: self.cut_abs_tol,
            ..CutOptions::default()
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.layout.build()?;
        self.evolve.config().validate().map_err(CliError::from_config)?;
        if self.bath.n < 2 {
            return Err(CliError::Config(format!(
                "bath.n must be at least 2, got {}",
                self.bath.n
            )));
        }
        self.spectrum.g.validate("spectrum.g")?;
        self.decay_rate.delta.validate("decay_rate.delta")?;
        self.selfenergy.energy.validate("selfenergy.energy")?;
        self.dfi_scan.delta.validate("dfi_scan.delta")?;
        if !self.selfenergy.im.is_finite() {
            return Err(CliError::Config("selfenergy.im must be finite".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("pole_tolerance", t.pole_tolerance),
            ("cut_abs_tol", t.cut_abs_tol),
            ("norm_drift", t.norm_drift),
            ("completeness", t.completeness),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn metrics(&self) -> MetricsOptions {
        MetricsOptions {
            search: self.tolerances.search(),
            dt: self.evolve.dt,
            ..MetricsOptions::default()
        }
    }
}
