//! Grid-wide spectrum comparison between two families, and the free-space
//! check of the crystal at the symmetry-breaking threshold.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bloch::{build_bloch, free_space_levels, BlochSpec};
use crate::ep_analysis::{
    classify_degeneracy, degenerate_energy, find_degeneracies, AnalysisConfig,
    BandPairSelector, DegeneracyLabel,
};
use crate::error::AnalysisError;
use crate::family::{HamiltonianFamily, ParamPoint};
use crate::linalg::{eig_dense, sorted_re_im};
use crate::sweep::{eigenvalues_on, Grid2};

/// Tolerance of the free-space comparison; the match is exact by triangularity.
pub const FREE_SPACE_TOL: f64 = 1e-12;

/// Largest elementwise distance after sorting both spectra by (real, imaginary).
pub fn sorted_spectrum_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::DimensionMismatch(a.len(), b.len()));
    }
    let (a, b) = (sorted_re_im(a), sorted_re_im(b));
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Labels of both families at a degeneracy they share.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyComparison {
    pub point: ParamPoint,
    pub omega_a: Complex64,
    pub omega_b: Complex64,
    pub label_a: DegeneracyLabel,
    pub label_b: DegeneracyLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsospectralReport {
    pub family_a: String,
    pub family_b: String,
    pub grid: Grid2,
    pub tol: f64,
    pub max_deviation: f64,
    pub worst_point: ParamPoint,
    pub pass: bool,
    pub degeneracy_comparison: Vec<DegeneracyComparison>,
}

/// Compares sorted spectra of `a` and `b` at every grid point and classifies
/// both families at every degeneracy they share on the grid.
pub fn verify_isospectral<A, B>(
    a: &A,
    b: &B,
    grid: &Grid2,
    tol: f64,
    config: &AnalysisConfig,
) -> Result<IsospectralReport, AnalysisError>
where
    A: HamiltonianFamily + ?Sized,
    B: HamiltonianFamily + ?Sized,
{
    if a.dim() != b.dim() {
        return Err(AnalysisError::DimensionMismatch(a.dim(), b.dim()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!("bad tolerance {tol}")));
    }
    config.validate()?;
    let points = grid.points();
    let sa = eigenvalues_on(a, &points)?;
    let sb = eigenvalues_on(b, &points)?;
    let mut max_deviation = 0.0;
    let mut worst_point = points[0];
    for ((x, y), p) in sa.iter().zip(&sb).zip(&points) {
        let d = sorted_spectrum_distance(x, y)?;
        if d > max_deviation {
            max_deviation = d;
            worst_point = *p;
        }
    }

    let mut candidates = find_degeneracies(a, grid, config.degeneracy_tol)?;
    candidates.extend(find_degeneracies(b, grid, config.degeneracy_tol)?);
    let mut seen: Vec<(ParamPoint, Complex64)> = Vec::new();
    let mut shared = Vec::new();
    for c in candidates {
        let dup = seen.iter().any(|(p, w)| {
            (p[0] - c.point[0]).abs() <= 1e-8
                && (p[1] - c.point[1]).abs() <= 1e-8
                && (w - c.omega0).norm() <= 1e-8 * c.omega0.norm().max(1.0)
        });
        if dup {
            continue;
        }
        seen.push((c.point, c.omega0));
        let near = BandPairSelector::Nearest(c.omega0);
        let (Ok((wa, _)), Ok((wb, _))) = (
            degenerate_energy(a, c.point, near, config.degeneracy_tol),
            degenerate_energy(b, c.point, near, config.degeneracy_tol),
        ) else {
            continue;
        };
        let scale = c.omega0.norm().max(1.0);
        let close = |w: Complex64| (w - c.omega0).norm() <= 1e-6 * scale;
        if close(wa) && close(wb) {
            shared.push((c.point, c.omega0));
        }
    }
    let degeneracy_comparison = shared
        .par_iter()
        .map(|&(point, w)| {
            let cfg = AnalysisConfig {
                band_pair: BandPairSelector::Nearest(w),
                ..config.clone()
            };
            let ra = classify_degeneracy(a, point, &cfg)?;
            let rb = classify_degeneracy(b, point, &cfg)?;
            Ok(DegeneracyComparison {
                point,
                omega_a: ra.omega0,
                omega_b: rb.omega0,
                label_a: ra.label,
                label_b: rb.label,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    Ok(IsospectralReport {
        family_a: a.id(),
        family_b: b.id(),
        grid: *grid,
        tol,
        max_deviation,
        worst_point,
        pass: max_deviation <= tol,
        degeneracy_comparison,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeSpaceReport {
    pub v0: f64,
    pub trunc_m: usize,
    pub k_grid: Vec<f64>,
    pub max_deviation: f64,
    pub worst_k: f64,
    pub pass: bool,
}

/// Checks that the crystal at `tau = 1` has exactly the folded free-particle
/// spectrum `{(m + k)^2}` at every `k`, whatever `V0` is.
///
/// This is a consequence of the matrix being triangular at threshold, not a
/// genuine isospectral partner.
pub fn free_space_equivalence(
    spec: &BlochSpec,
    k_grid: &[f64],
) -> Result<FreeSpaceReport, AnalysisError> {
    if spec.tau != 1.0 {
        return Err(AnalysisError::TauNotOne(spec.tau));
    }
    if k_grid.is_empty() || k_grid.iter().any(|k| !k.is_finite()) {
        return Err(AnalysisError::InvalidInput("k grid must be nonempty and finite".into()));
    }
    let devs = k_grid
        .par_iter()
        .map(|&k| {
            let ev = eig_dense(&build_bloch(spec, k))?.eigenvalues;
            let free: Vec<Complex64> = free_space_levels(spec.trunc_m, k)
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect();
            sorted_spectrum_distance(&ev, &free)
        })
        .collect::<Result<Vec<f64>, AnalysisError>>()?;
    let (mut max_deviation, mut worst_k) = (0.0, k_grid[0]);
    for (&d, &k) in devs.iter().zip(k_grid) {
        if d > max_deviation {
            (max_deviation, worst_k) = (d, k);
        }
    }
    Ok(FreeSpaceReport {
        v0: spec.v0,
        trunc_m: spec.trunc_m,
        k_grid: k_grid.to_vec(),
        max_deviation,
        worst_k,
        pass: max_deviation <= FREE_SPACE_TOL,
    })
}
