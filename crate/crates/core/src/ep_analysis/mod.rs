//! Detection and classification of spectral degeneracies.
//!
//! A degeneracy is labelled from four measurements: the eigenvalue cluster
//! (algebraic multiplicity), the rank of `H - w0 I` (geometric multiplicity),
//! the imaginary parts on a small probe disk (local reality and branch cuts)
//! and the power law of the band splitting along rays (dispersion exponent).

mod cone;
mod find;
mod fit;
mod puiseux;
mod reality;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::AnalysisError;
use crate::family::{HamiltonianFamily, ParamPoint};
use crate::linalg::{
    default_degeneracy_tol, eig_dense, geometric_multiplicity, overlap, Spectrum,
};

pub use cone::{default_radii, default_rays, fit_cone, fit_cone_at, ConeFit, RayFit, LINE_SPLIT_TOL};
pub use find::{find_degeneracies, DegeneracyCandidate};
pub use fit::{least_squares, LeastSquares};
pub use puiseux::{puiseux_diagnostic, PuiseuxFit, PuiseuxModel, PUISEUX_RATIO};
pub use reality::{local_reality, RealityProbe};

/// Smallest probe radius; below it eigenvalue noise swamps the splitting.
pub const MIN_PROBE_RADIUS: f64 = 1e-6;

/// Which degenerate eigenvalue cluster of a spectrum to analyse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BandPairSelector {
    /// The degenerate cluster with the smallest real part.
    Lowest,
    /// The cluster containing this index of the (real, imaginary)-sorted spectrum.
    Index(usize),
    /// The degenerate cluster whose centre is closest to this energy.
    Nearest(Complex64),
}

/// Table-style label of a two-fold degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegeneracyLabel {
    DiracPoint,
    DiracEP,
    ConventionalEP2,
    Unresolved,
}

impl std::fmt::Display for DegeneracyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DegeneracyLabel::DiracPoint => "DiracPoint",
            DegeneracyLabel::DiracEP => "DiracEP",
            DegeneracyLabel::ConventionalEP2 => "ConventionalEP2",
            DegeneracyLabel::Unresolved => "Unresolved",
        };
        f.write_str(s)
    }
}

/// Closed exponent window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentBand {
    pub lo: f64,
    pub hi: f64,
}

impl ExponentBand {
    pub fn contains(&self, p: f64) -> bool {
        (self.lo..=self.hi).contains(&p)
    }
}

/// Tolerances and probe geometry for [`classify_degeneracy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    /// Eigenvalue clustering tolerance; `None` means `1e-8 * max(1, rho)`.
    pub degeneracy_tol: Option<f64>,
    /// Relative singular-value cut for the rank of `H - w0 I`.
    pub rank_tol: f64,
    /// Overlap above which the cluster eigenvectors count as coalesced.
    pub overlap_threshold: f64,
    pub reality_tol: f64,
    pub probe_radius: f64,
    pub probe_angles: usize,
    pub probe_rings: usize,
    pub ray_count: usize,
    pub radii: Vec<f64>,
    pub max_radius: f64,
    pub linear_band: ExponentBand,
    pub sqrt_band: ExponentBand,
    pub band_pair: BandPairSelector,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            degeneracy_tol: None,
            rank_tol: 1e-8,
            overlap_threshold: 0.999,
            reality_tol: 1e-9,
            probe_radius: 0.02,
            probe_angles: 16,
            probe_rings: 5,
            ray_count: 8,
            radii: default_radii(1e-4, 2e-2, 8),
            max_radius: 0.02,
            linear_band: ExponentBand { lo: 0.8, hi: 1.2 },
            sqrt_band: ExponentBand { lo: 0.35, hi: 0.65 },
            band_pair: BandPairSelector::Lowest,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), AnalysisError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::InvalidInput(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if let Some(t) = self.degeneracy_tol {
            positive("degeneracy tolerance", t)?;
        }
        positive("rank tolerance", self.rank_tol)?;
        positive("reality tolerance", self.reality_tol)?;
        positive("probe radius", self.probe_radius)?;
        positive("max radius", self.max_radius)?;
        if !(0.0..=1.0).contains(&self.overlap_threshold) {
            return Err(AnalysisError::InvalidInput(
                "overlap threshold must lie in [0, 1]".into(),
            ));
        }
        if self.probe_angles < 3 || self.probe_rings == 0 || self.ray_count == 0 {
            return Err(AnalysisError::InvalidInput(
                "need at least 3 probe angles, 1 ring and 1 ray".into(),
            ));
        }
        if self.radii.len() < 4 {
            return Err(AnalysisError::TooFewRadii {
                needed: 4,
                got: self.radii.len(),
            });
        }
        if let Some(r) = self
            .radii
            .iter()
            .find(|&&r| !(r >= MIN_PROBE_RADIUS && r <= self.max_radius))
        {
            return Err(AnalysisError::InvalidInput(format!(
                "radius {r} outside [{MIN_PROBE_RADIUS}, {}]",
                self.max_radius
            )));
        }
        for b in [self.linear_band, self.sqrt_band] {
            if !(b.lo.is_finite() && b.hi.is_finite() && b.lo <= b.hi) {
                return Err(AnalysisError::InvalidInput("bad exponent window".into()));
            }
        }
        Ok(())
    }

    fn tol_for(&self, spectrum: &Spectrum) -> f64 {
        self.degeneracy_tol
            .unwrap_or_else(|| default_degeneracy_tol(spectrum.spectral_radius()))
    }
}

/// Dispersion exponent with its spread over rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponent {
    pub value: f64,
    pub uncertainty: f64,
}

/// Everything measured at one degeneracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub model: String,
    pub axis_names: [String; 2],
    pub location: ParamPoint,
    pub omega0: Complex64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    /// Largest normalised overlap between eigenvectors of the cluster.
    pub coalescence_overlap: f64,
    pub locally_real: bool,
    pub max_imag: f64,
    pub branch_cut_detected: bool,
    /// Mean over rays that are not exceptional lines; `None` if there are none.
    pub dispersion_exponent: Option<Exponent>,
    /// Per ray; `None` marks an exceptional-line direction.
    pub ray_exponents: Vec<Option<f64>>,
    pub rays: Vec<[f64; 2]>,
    pub label: DegeneracyLabel,
}

/// Single-linkage clusters of `values` within `tol`, each sorted, ordered by
/// their first member.
pub(crate) fn clusters(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn center(values: &[Complex64], members: &[usize]) -> Complex64 {
    members.iter().map(|&i| values[i]).sum::<Complex64>() / members.len() as f64
}

fn min_gap(values: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            g = g.min((values[i] - values[j]).norm());
        }
    }
    g
}

/// Picks the cluster requested by `selector`, or fails with the smallest gap.
pub(crate) fn select_cluster(
    values: &[Complex64],
    selector: BandPairSelector,
    tol: f64,
) -> Result<Vec<usize>, AnalysisError> {
    let groups = clusters(values, tol);
    let not_degenerate = || AnalysisError::NotDegenerate {
        gap: min_gap(values),
        tol,
    };
    match selector {
        BandPairSelector::Lowest => groups
            .into_iter()
            .find(|g| g.len() >= 2)
            .ok_or_else(not_degenerate),
        BandPairSelector::Index(i) => {
            if i >= values.len() {
                return Err(AnalysisError::InvalidInput(format!(
                    "band index {i} out of range for {} bands",
                    values.len()
                )));
            }
            let g = groups.into_iter().find(|g| g.contains(&i)).unwrap_or_default();
            if g.len() >= 2 {
                Ok(g)
            } else {
                let gap = values
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, z)| (z - values[i]).norm())
                    .fold(f64::INFINITY, f64::min);
                Err(AnalysisError::NotDegenerate { gap, tol })
            }
        }
        BandPairSelector::Nearest(w) => groups
            .into_iter()
            .filter(|g| g.len() >= 2)
            .min_by(|a, b| {
                let da = (center(values, a) - w).norm();
                let db = (center(values, b) - w).norm();
                da.total_cmp(&db)
            })
            .ok_or_else(not_degenerate),
    }
}

/// Degenerate energy picked by `selector` at `point`, with its multiplicity.
pub fn degenerate_energy<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    selector: BandPairSelector,
    tol: Option<f64>,
) -> Result<(Complex64, usize), AnalysisError> {
    let spec = eig_dense(&family.matrix(point)?)?;
    let tol = tol.unwrap_or_else(|| default_degeneracy_tol(spec.spectral_radius()));
    let members = select_cluster(&spec.eigenvalues, selector, tol)?;
    Ok((center(&spec.eigenvalues, &members), members.len()))
}

/// The two eigenvalues closest to `omega0`, as `[upper, lower]` sheets.
///
/// Sheets are ordered by real part when the pair is split more along the
/// real axis, otherwise by imaginary part.
pub fn tracked_pair(values: &[Complex64], omega0: Complex64) -> [Complex64; 2] {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        (values[i] - omega0)
            .norm()
            .total_cmp(&(values[j] - omega0).norm())
            .then(i.cmp(&j))
    });
    let (a, b) = (values[idx[0]], values[idx[1]]);
    let d = a - b;
    let a_upper = if d.re.abs() >= d.im.abs() {
        d.re >= 0.0
    } else {
        d.im >= 0.0
    };
    if a_upper {
        [a, b]
    } else {
        [b, a]
    }
}

/// [`tracked_pair`] of the spectrum at `point`.
pub fn sheets_at<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    omega0: Complex64,
) -> Result<[Complex64; 2], AnalysisError> {
    Ok(tracked_pair(&eigenvalues_at(family, point)?, omega0))
}

pub(crate) fn eigenvalues_at<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
) -> Result<Vec<Complex64>, AnalysisError> {
    Ok(eig_dense(&family.matrix(point)?)?.eigenvalues)
}

pub(crate) fn offset(point: ParamPoint, dir: [f64; 2], r: f64) -> ParamPoint {
    [point[0] + r * dir[0], point[1] + r * dir[1]]
}

pub(crate) fn unit(dir: [f64; 2]) -> Result<[f64; 2], AnalysisError> {
    let n = dir[0].hypot(dir[1]);
    if !(n > 0.0 && n.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!(
            "direction {dir:?} cannot be normalised"
        )));
    }
    Ok([dir[0] / n, dir[1] / n])
}

/// Full Table-style classification of the degeneracy at `point`.
pub fn classify_degeneracy<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    config: &AnalysisConfig,
) -> Result<DegeneracyReport, AnalysisError> {
    config.validate()?;
    let h = family.matrix(point)?;
    let spec = eig_dense(&h)?;
    let tol = config.tol_for(&spec);
    let members = select_cluster(&spec.eigenvalues, config.band_pair, tol)?;
    let omega0 = center(&spec.eigenvalues, &members);
    let algebraic = members.len();
    let geometric = geometric_multiplicity(&h, omega0, config.rank_tol)?;

    let mut coalescence = 0.0f64;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            coalescence = coalescence.max(overlap(&spec.eigenvectors[i], &spec.eigenvectors[j]));
        }
    }

    let probe = reality::probe_disk(
        family,
        point,
        omega0,
        config.probe_radius,
        config.probe_angles,
        config.probe_rings,
        config.reality_tol,
    )?;

    let rays = default_rays(config.ray_count);
    let cone = cone::fit_cone_at(family, point, omega0, &rays, &config.radii)?;
    let ray_exponents: Vec<Option<f64>> = cone.rays.iter().map(|r| r.exponent).collect();
    let measured: Vec<f64> = ray_exponents.iter().flatten().copied().collect();
    let dispersion_exponent = (!measured.is_empty()).then(|| {
        let mean = measured.iter().sum::<f64>() / measured.len() as f64;
        let spread = measured.iter().map(|p| (p - mean).abs()).fold(0.0, f64::max);
        let stderr = cone
            .rays
            .iter()
            .filter_map(|r| r.exponent_stderr)
            .fold(0.0, f64::max);
        Exponent {
            value: mean,
            uncertainty: spread.max(stderr),
        }
    });

    let all_linear = ray_exponents
        .iter()
        .all(|p| p.is_some_and(|p| config.linear_band.contains(p)));
    let any_sqrt = measured.iter().any(|&p| config.sqrt_band.contains(p));
    let label = match (algebraic, geometric) {
        (2, 2) if probe.locally_real && all_linear => DegeneracyLabel::DiracPoint,
        (2, 1) if probe.locally_real && !probe.branch_cut_detected && all_linear => {
            DegeneracyLabel::DiracEP
        }
        (2, 1) if any_sqrt || probe.branch_cut_detected => DegeneracyLabel::ConventionalEP2,
        _ => DegeneracyLabel::Unresolved,
    };

    let names = family.axis_names();
    Ok(DegeneracyReport {
        model: family.id(),
        axis_names: [names[0].to_string(), names[1].to_string()],
        location: point,
        omega0,
        algebraic_multiplicity: algebraic,
        geometric_multiplicity: geometric,
        coalescence_overlap: coalescence,
        locally_real: probe.locally_real,
        max_imag: probe.max_imag,
        branch_cut_detected: probe.branch_cut_detected,
        dispersion_exponent,
        ray_exponents,
        rays,
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn clusters_link_chains() {
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(1.0 + 5e-9, 0.0), c(1.0 + 1e-8, 0.0), c(3.0, 0.0)];
        assert_eq!(clusters(&v, 6e-9), vec![vec![0], vec![1, 2, 3], vec![4]]);
    }

    #[test]
    fn selectors() {
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)];
        assert_eq!(select_cluster(&v, BandPairSelector::Lowest, 1e-9).unwrap(), vec![1, 2]);
        assert_eq!(select_cluster(&v, BandPairSelector::Index(4), 1e-9).unwrap(), vec![3, 4]);
        assert_eq!(
            select_cluster(&v, BandPairSelector::Nearest(c(1.9, 0.0)), 1e-9).unwrap(),
            vec![3, 4]
        );
        match select_cluster(&v, BandPairSelector::Index(0), 1e-9) {
            Err(AnalysisError::NotDegenerate { gap, .. }) => assert_eq!(gap, 1.0),
            other => panic!("{other:?}"),
        }
        assert!(select_cluster(&v, BandPairSelector::Index(9), 1e-9).is_err());
        let w = [c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            select_cluster(&w, BandPairSelector::Lowest, 1e-9),
            Err(AnalysisError::NotDegenerate { .. })
        ));
    }

    #[test]
    fn tracked_pair_orders_sheets() {
        let v = [c(5.0, 0.0), c(0.9, 0.0), c(1.1, 0.0)];
        assert_eq!(tracked_pair(&v, c(1.0, 0.0)), [c(1.1, 0.0), c(0.9, 0.0)]);
        let v = [c(1.0, -0.1), c(1.0, 0.1)];
        assert_eq!(tracked_pair(&v, c(1.0, 0.0)), [c(1.0, 0.1), c(1.0, -0.1)]);
    }

    #[test]
    fn config_validation() {
        assert!(AnalysisConfig::default().validate().is_ok());
        let bad = AnalysisConfig {
            radii: vec![1e-3, 2e-3, 3e-3],
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(AnalysisError::TooFewRadii { .. })));
        let bad = AnalysisConfig {
            radii: vec![1e-7, 1e-3, 2e-3, 3e-3],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnalysisConfig {
            rank_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
