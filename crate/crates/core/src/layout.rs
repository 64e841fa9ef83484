//! Emitter configurations: where each atom touches the array, its detuning,
//! the interleaving topology of two giant atoms, and the in-band phase map.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One two-level emitter coupled to the cavities `coupling_points` with
/// strength `g` each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub detuning: f64,
    pub coupling_points: Vec<usize>,
    pub g: f64,
}

impl AtomSpec {
    pub fn new(detuning: f64, g: f64, coupling_points: Vec<usize>) -> Self {
        Self {
            detuning,
            coupling_points,
            g,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.coupling_points.is_empty() {
            return Err(Error::InvalidLayout("atom without coupling points".into()));
        }
        if self.coupling_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLayout(format!(
                "coupling points must be strictly increasing: {:?}",
                self.coupling_points
            )));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidLayout(format!(
                "coupling must be positive, got {}",
                self.g
            )));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidLayout("non-finite detuning".into()));
        }
        Ok(())
    }

    /// Spacing between consecutive coupling points when they are evenly spaced.
    pub fn internal_spacing(&self) -> Option<usize> {
        uniform_gap(&self.coupling_points)
    }
}

/// Interleaving order of the coupling points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    Single,
    Separate,
    Nested,
    Braided,
    /// Two atoms that are not both two-point giant atoms (e.g. a pair of small
    /// atoms).
    Other,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Topology::Single => "single",
            Topology::Separate => "separate",
            Topology::Nested => "nested",
            Topology::Braided => "braided",
            Topology::Other => "other",
        };
        f.write_str(s)
    }
}

/// One or two atoms on the array.
///
/// Construction validates the atoms and derives the topology and, when all
/// coupling points are evenly spaced, the common spacing `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AtomSpec>", into = "Vec<AtomSpec>")]
pub struct Layout {
    atoms: Vec<AtomSpec>,
    topology: Topology,
    spacing: Option<usize>,
}

impl TryFrom<Vec<AtomSpec>> for Layout {
    type Error = Error;

    fn try_from(atoms: Vec<AtomSpec>) -> Result<Self> {
        Layout::new(atoms)
    }
}

impl From<Layout> for Vec<AtomSpec> {
    fn from(layout: Layout) -> Self {
        layout.atoms
    }
}

impl Layout {
    pub fn new(atoms: Vec<AtomSpec>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() > 2 {
            return Err(Error::InvalidLayout(format!(
                "expected one or two atoms, got {}",
                atoms.len()
            )));
        }
        for atom in &atoms {
            atom.validate()?;
        }
        let mut all: Vec<usize> = atoms.iter().flat_map(|a| a.coupling_points.iter().copied()).collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidLayout("atoms may not share a cavity".into()));
        }
        let topology = if atoms.len() == 1 {
            Topology::Single
        } else {
            interleaving(&atoms[0], &atoms[1]).unwrap_or(Topology::Other)
        };
        let spacing = uniform_gap(&all);
        Ok(Self {
            atoms,
            topology,
            spacing,
        })
    }

    /// Single atom coupled at arbitrary points.
    pub fn single(delta: f64, g: f64, points: Vec<usize>) -> Result<Self> {
        Self::new(vec![AtomSpec::new(delta, g, points)])
    }

    /// Single giant atom with `p` evenly spaced coupling points, starting at 0.
    pub fn giant(delta: f64, g: f64, p: usize, d: usize) -> Result<Self> {
        if p == 0 || (p > 1 && d == 0) {
            return Err(Error::InvalidLayout(format!("bad giant atom p={p}, d={d}")));
        }
        Self::single(delta, g, (0..p).map(|i| i * d).collect())
    }

    /// Two identical giant atoms, points `(0, 2d)` and `(d, 3d)`.
    pub fn braided(delta: f64, g: f64, d: usize) -> Result<Self> {
        Self::pair(delta, g, vec![0, 2 * d], vec![d, 3 * d])
    }

    /// Points `(0, d)` and `(2d, 3d)`.
    pub fn separate(delta: f64, g: f64, d: usize) -> Result<Self> {
        Self::pair(delta, g, vec![0, d], vec![2 * d, 3 * d])
    }

    /// Points `(0, 3d)` and `(d, 2d)`.
    pub fn nested(delta: f64, g: f64, d: usize) -> Result<Self> {
        Self::pair(delta, g, vec![0, 3 * d], vec![d, 2 * d])
    }

    /// Two small atoms `d` cavities apart.
    pub fn small_pair(delta: f64, g: f64, d: usize) -> Result<Self> {
        Self::pair(delta, g, vec![0], vec![d])
    }

    pub fn pair(delta: f64, g: f64, first: Vec<usize>, second: Vec<usize>) -> Result<Self> {
        Self::new(vec![AtomSpec::new(delta, g, first), AtomSpec::new(delta, g, second)])
    }

    pub fn atoms(&self) -> &[AtomSpec] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Common spacing of all coupling points, if they are evenly spaced.
    pub fn spacing(&self) -> Option<usize> {
        self.spacing
    }

    pub fn equidistant(&self) -> bool {
        self.spacing.is_some()
    }

    /// Every coupling point of every atom, ascending.
    pub fn all_points(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .atoms
            .iter()
            .flat_map(|a| a.coupling_points.iter().copied())
            .collect();
        all.sort_unstable();
        all
    }

    pub fn min_point(&self) -> usize {
        self.all_points()[0]
    }

    pub fn max_point(&self) -> usize {
        *self.all_points().last().unwrap()
    }

    /// Distance between the outermost coupling points.
    pub fn span(&self) -> usize {
        self.max_point() - self.min_point()
    }

    /// Same layout with every coupling point shifted by `offset`.
    pub fn translated(&self, offset: usize) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| AtomSpec {
                coupling_points: a.coupling_points.iter().map(|p| p + offset).collect(),
                ..a.clone()
            })
            .collect();
        Self { atoms, ..self.clone() }
    }

    /// Same layout placed in the middle of an `n`-cavity array.
    pub fn centered_in(&self, n: usize) -> Result<Self> {
        let span = self.span();
        if span >= n {
            return Err(Error::InvalidLayout(format!(
                "layout span {span} does not fit into {n} cavities"
            )));
        }
        let min = self.min_point();
        let start = (n - 1 - span) / 2;
        let atoms = self
            .atoms
            .iter()
            .map(|a| AtomSpec {
                coupling_points: a.coupling_points.iter().map(|p| p - min + start).collect(),
                ..a.clone()
            })
            .collect();
        Ok(Self { atoms, ..self.clone() })
    }

    /// Copy with every coupling strength replaced by `g`.
    pub fn with_coupling(&self, g: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|a| AtomSpec { g, ..a.clone() }).collect())
    }

    /// Copy with every detuning replaced by `delta`.
    pub fn with_detuning(&self, delta: f64) -> Result<Self> {
        Self::new(
            self.atoms
                .iter()
                .map(|a| AtomSpec {
                    detuning: delta,
                    ..a.clone()
                })
                .collect(),
        )
    }

    /// Non-fatal remarks about the validity of the model for this layout.
    pub fn warnings(&self) -> Vec<String> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.g > 1.0)
            .map(|(i, a)| {
                format!(
                    "atom {}: g/J = {} > 1, outside the weak-coupling regime of the model",
                    i + 1,
                    a.g
                )
            })
            .collect()
    }
}

fn uniform_gap(points: &[usize]) -> Option<usize> {
    if points.len() < 2 {
        return None;
    }
    let d = points[1] - points[0];
    points.windows(2).all(|w| w[1] - w[0] == d).then_some(d)
}

fn interleaving(a: &AtomSpec, b: &AtomSpec) -> Option<Topology> {
    if a.coupling_points.len() != 2 || b.coupling_points.len() != 2 {
        return None;
    }
    let mut tagged: Vec<(usize, u8)> = a
        .coupling_points
        .iter()
        .map(|&p| (p, 0u8))
        .chain(b.coupling_points.iter().map(|&p| (p, 1u8)))
        .collect();
    tagged.sort_unstable();
    let pattern: Vec<u8> = tagged.iter().map(|t| t.1).collect();
    match pattern.as_slice() {
        [x, y, z, w] if x == y && z == w => Some(Topology::Separate),
        [x, y, z, w] if x == w && y == z => Some(Topology::Nested),
        [x, y, z, w] if x == z && y == w => Some(Topology::Braided),
        _ => None,
    }
}

/// Classifies two two-point giant atoms as separate, nested or braided.
pub fn classify_topology(layout: &Layout) -> Result<Topology> {
    let atoms = layout.atoms();
    if atoms.len() != 2 {
        return Err(Error::Unsupported("topology classification needs two atoms".into()));
    }
    interleaving(&atoms[0], &atoms[1])
        .ok_or_else(|| Error::Unsupported("topology classification needs two coupling points per atom".into()))
}

/// In-band phase accumulated over `d` cavities at detuning `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub d: usize,
    pub delta: f64,
    pub varphi: f64,
}

impl PhasePoint {
    /// Phase per hop, `arccos(-Δ/2J)`.
    pub fn per_hop(&self) -> f64 {
        self.varphi / self.d as f64
    }
}

/// `φ = d · arccos(-Δ/2J)`, only defined inside the band.
pub fn phase_map(d: usize, delta: f64) -> Result<PhasePoint> {
    if delta.abs() > 2.0 || !delta.is_finite() {
        return Err(Error::OutsideBand { delta });
    }
    if d == 0 {
        return Err(Error::InvalidArgument("distance must be positive".into()));
    }
    let varphi = d as f64 * (-delta / 2.0).acos();
    Ok(PhasePoint { d, delta, varphi })
}

/// Which target phases count as decoherence-free points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DfiBranches {
    /// `φ ≡ π/2 (mod 2π)` only.
    QuarterTurn,
    /// `φ ≡ π/2` and `φ ≡ 3π/2 (mod 2π)`. The second family is the mirror
    /// image `Δ → -Δ` of the first for even `d`.
    Both,
}

/// All in-band `(d, Δ)` with `φ(d, Δ) ≡ π/2 (mod 2π)` for `d ≤ d_max`.
pub fn dfi_candidate_points(d_max: usize, tol: f64) -> Vec<(usize, f64)> {
    dfi_candidate_points_with(d_max, tol, DfiBranches::QuarterTurn)
}

/// Like [`dfi_candidate_points`] with a choice of phase branches. Points are
/// sorted by `d`, then by `Δ`.
pub fn dfi_candidate_points_with(d_max: usize, tol: f64, branches: DfiBranches) -> Vec<(usize, f64)> {
    let offsets: &[f64] = match branches {
        DfiBranches::QuarterTurn => &[FRAC_PI_2],
        DfiBranches::Both => &[FRAC_PI_2, 3.0 * FRAC_PI_2],
    };
    let mut out = Vec::new();
    for d in 1..=d_max {
        let limit = d as f64 * PI;
        let mut deltas = Vec::new();
        for &offset in offsets {
            let mut target = offset;
            while target <= limit + 1e-12 {
                let delta = -2.0 * (target / d as f64).min(PI).cos();
                let delta = if delta.abs() < 1e-12 { 0.0 } else { delta };
                if let Ok(p) = phase_map(d, delta) {
                    if phase_residual(p.varphi, offset) <= tol {
                        deltas.push(delta);
                    }
                }
                target += 2.0 * PI;
            }
        }
        deltas.sort_by(f64::total_cmp);
        deltas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out.extend(deltas.into_iter().map(|delta| (d, delta)));
    }
    out
}

/// `|mod(φ, 2π) - target|`, wrapped to `[0, π]`.
pub fn phase_residual(varphi: f64, target: f64) -> f64 {
    let r = (varphi - target).rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: Vec<usize>, b: Vec<usize>) -> Layout {
        Layout::pair(0.0, 0.1, a, b).unwrap()
    }

    #[test]
    fn topologies_from_orderings() {
        assert_eq!(
            classify_topology(&pair(vec![0, 5], vec![10, 15])).unwrap(),
            Topology::Separate
        );
        assert_eq!(
            classify_topology(&pair(vec![0, 15], vec![5, 10])).unwrap(),
            Topology::Nested
        );
        assert_eq!(
            classify_topology(&pair(vec![0, 10], vec![5, 15])).unwrap(),
            Topology::Braided
        );
        // label swap does not change the class
        assert_eq!(
            classify_topology(&pair(vec![5, 10], vec![0, 15])).unwrap(),
            Topology::Nested
        );
        assert_eq!(
            classify_topology(&pair(vec![5, 15], vec![0, 10])).unwrap(),
            Topology::Braided
        );
    }

    #[test]
    fn constructors_have_expected_topology() {
        assert_eq!(Layout::braided(0.0, 0.2, 5).unwrap().topology(), Topology::Braided);
        assert_eq!(Layout::nested(0.0, 0.2, 2).unwrap().topology(), Topology::Nested);
        assert_eq!(Layout::separate(0.0, 0.2, 2).unwrap().topology(), Topology::Separate);
        assert_eq!(Layout::small_pair(0.0, 0.2, 2).unwrap().topology(), Topology::Other);
        let b = Layout::braided(0.0, 0.2, 5).unwrap();
        assert_eq!(b.spacing(), Some(5));
        assert_eq!(b.span(), 15);
        assert_eq!(b.atoms()[0].internal_spacing(), Some(10));
    }

    #[test]
    fn invalid_layouts() {
        assert!(matches!(
            Layout::pair(0.0, 0.1, vec![0, 5], vec![5, 10]),
            Err(Error::InvalidLayout(_))
        ));
        assert!(Layout::single(0.0, 0.1, vec![3, 1]).is_err());
        assert!(Layout::single(0.0, 0.0, vec![1]).is_err());
        assert!(Layout::single(0.0, 0.1, vec![]).is_err());
        let small = Layout::small_pair(0.0, 0.1, 3).unwrap();
        assert!(matches!(classify_topology(&small), Err(Error::Unsupported(_))));
        let single = Layout::giant(0.0, 0.1, 2, 1).unwrap();
        assert!(classify_topology(&single).is_err());
    }

    #[test]
    fn strong_coupling_warns() {
        assert!(Layout::giant(0.0, 0.5, 2, 1).unwrap().warnings().is_empty());
        assert_eq!(Layout::giant(0.0, 1.5, 2, 1).unwrap().warnings().len(), 1);
    }

    #[test]
    fn phase_map_values() {
        assert!((phase_map(1, 0.0).unwrap().varphi - FRAC_PI_2).abs() < 1e-15);
        assert!((phase_map(2, 0.0).unwrap().varphi - PI).abs() < 1e-15);
        assert!((phase_map(3, -1.0).unwrap().varphi - PI).abs() < 1e-14);
        assert!(matches!(phase_map(1, 2.5), Err(Error::OutsideBand { .. })));
    }

    #[test]
    fn dfi_points_closed_form() {
        assert_eq!(dfi_candidate_points(1, 1e-9), vec![(1, 0.0)]);

        let d2: Vec<f64> = dfi_candidate_points(2, 1e-9)
            .into_iter()
            .filter(|p| p.0 == 2)
            .map(|p| p.1)
            .collect();
        assert_eq!(d2.len(), 1);
        assert!((d2[0] + 2f64.sqrt()).abs() < 1e-12);

        // root scan of φ(2, Δ) - π/2 over the band
        let n = 400_000;
        let mut roots = vec![];
        let f = |x: f64| phase_map(2, x).unwrap().varphi - FRAC_PI_2;
        for i in 0..n {
            let (a, b) = (-2.0 + 4.0 * i as f64 / n as f64, -2.0 + 4.0 * (i + 1) as f64 / n as f64);
            if f(a) * f(b) <= 0.0 {
                roots.push(0.5 * (a + b));
            }
        }
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - d2[0]).abs() < 1e-4);

        let d5: Vec<f64> = dfi_candidate_points(5, 1e-9)
            .into_iter()
            .filter(|p| p.0 == 5)
            .map(|p| p.1)
            .collect();
        assert!(d5.iter().any(|x| (x + 2.0 * (PI / 10.0).cos()).abs() < 1e-12));
        assert!(d5.iter().any(|x| x.abs() < 1e-12));
    }

    #[test]
    fn mirror_branch_contains_band_centre_for_d7() {
        let pts = dfi_candidate_points_with(7, 1e-9, DfiBranches::Both);
        assert!(pts.iter().any(|&(d, x)| d == 7 && x.abs() < 1e-12));
        let quarter = dfi_candidate_points(7, 1e-9);
        assert!(!quarter.iter().any(|&(d, x)| d == 7 && x.abs() < 1e-12));
    }

    proptest::proptest! {
        #[test]
        fn topology_translation_invariant(
            a in 0usize..50, b in 1usize..50, c in 1usize..50, e in 1usize..50, shift in 0usize..1000
        ) {
            let pts = [a, a + b, a + b + c, a + b + c + e];
            for perm in [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]] {
                let l = pair(vec![pts[perm[0]], pts[perm[1]]], vec![pts[perm[2]], pts[perm[3]]]);
                let t = classify_topology(&l).unwrap();
                proptest::prop_assert_eq!(t, classify_topology(&l.translated(shift)).unwrap());
            }
        }

        #[test]
        fn phase_linear_in_distance(d in 1usize..40, delta in -2.0f64..=2.0) {
            let one = phase_map(1, delta).unwrap().varphi;
            proptest::prop_assert_eq!(phase_map(d, delta).unwrap().varphi, d as f64 * one);
        }

        #[test]
        fn dfi_points_reevaluate(d_max in 1usize..30) {
            for (d, delta) in dfi_candidate_points(d_max, 1e-9) {
                let p = phase_map(d, delta).unwrap();
                proptest::prop_assert!(phase_residual(p.varphi, FRAC_PI_2) <= 1e-9);
            }
        }
    }
}
