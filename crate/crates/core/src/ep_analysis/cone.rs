use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::least_squares;
use super::{degenerate_energy, eigenvalues_at, offset, tracked_pair, unit, BandPairSelector};
use super::MIN_PROBE_RADIUS;
use crate::error::AnalysisError;
use crate::family::{HamiltonianFamily, ParamPoint};

/// Splitting below which a ray counts as running along an exceptional line.
pub const LINE_SPLIT_TOL: f64 = 1e-12;

/// Dispersion measured along one ray out of the degeneracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayFit {
    pub direction: [f64; 2],
    /// Power law of `|w+ - w-|` in the radius; `None` on an exceptional line.
    pub exponent: Option<f64>,
    pub exponent_stderr: Option<f64>,
    /// RMS residual of the log-log splitting fit.
    pub exponent_residual_rms: f64,
    /// Linear coefficients of the `[upper, lower]` sheet offsets `w - w0`,
    /// per unit radius, from a fit on `[r, r^2]`.
    pub slopes: [Complex64; 2],
    /// Mean of the two sheet slopes.
    pub tilt: Complex64,
    pub slope_residual_rms: f64,
    pub exceptional_line: bool,
    pub splittings: Vec<f64>,
    /// `[upper, lower]` sheet energies at each radius.
    pub sheets: Vec<[Complex64; 2]>,
}

/// Cone fit around one degeneracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeFit {
    pub model: String,
    pub location: ParamPoint,
    pub omega0: Complex64,
    pub radii: Vec<f64>,
    pub rays: Vec<RayFit>,
}

impl ConeFit {
    pub fn line_directions(&self) -> Vec<[f64; 2]> {
        self.rays
            .iter()
            .filter(|r| r.exceptional_line)
            .map(|r| r.direction)
            .collect()
    }
}

/// `count` radii log-spaced over `[lo, hi]`, endpoints exact.
pub fn default_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![hi; count];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// `count` unit directions at angles `2 pi i / count`.
pub fn default_rays(count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / count as f64;
            [th.cos(), th.sin()]
        })
        .collect()
}

/// Fits the dispersion of the `band_pair` degeneracy at `point` along `rays`.
///
/// The exponent is taken from the splitting only, so a common-mode tilt does
/// not bias it. Rays with zero splitting are flagged as exceptional lines.
pub fn fit_cone<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    band_pair: BandPairSelector,
    rays: &[[f64; 2]],
    radii: &[f64],
) -> Result<ConeFit, AnalysisError> {
    let (omega0, _) = degenerate_energy(family, point, band_pair, None)?;
    fit_cone_at(family, point, omega0, rays, radii)
}

/// [`fit_cone`] around a known degenerate energy `omega0`.
pub fn fit_cone_at<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    omega0: Complex64,
    rays: &[[f64; 2]],
    radii: &[f64],
) -> Result<ConeFit, AnalysisError> {
    if radii.len() < 4 {
        return Err(AnalysisError::TooFewRadii {
            needed: 4,
            got: radii.len(),
        });
    }
    if let Some(r) = radii.iter().find(|&&r| !(r >= MIN_PROBE_RADIUS && r.is_finite())) {
        return Err(AnalysisError::InvalidInput(format!(
            "radius {r} below {MIN_PROBE_RADIUS} or not finite"
        )));
    }
    if rays.is_empty() {
        return Err(AnalysisError::InvalidInput("no rays given".into()));
    }
    let dirs = rays.iter().map(|&d| unit(d)).collect::<Result<Vec<_>, _>>()?;
    let fits = dirs
        .par_iter()
        .map(|&d| fit_ray(family, point, omega0, d, radii))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConeFit {
        model: family.id(),
        location: point,
        omega0,
        radii: radii.to_vec(),
        rays: fits,
    })
}

fn fit_ray<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    omega0: Complex64,
    dir: [f64; 2],
    radii: &[f64],
) -> Result<RayFit, AnalysisError> {
    let sheets = radii
        .iter()
        .map(|&r| Ok(tracked_pair(&eigenvalues_at(family, offset(point, dir, r))?, omega0)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let splittings: Vec<f64> = sheets.iter().map(|[a, b]| (a - b).norm()).collect();
    let exceptional_line = splittings.iter().all(|&s| s < LINE_SPLIT_TOL);

    let (exponent, exponent_stderr, exponent_residual_rms) = if exceptional_line {
        (None, None, 0.0)
    } else {
        let (rows, ys): (Vec<Vec<f64>>, Vec<f64>) = radii
            .iter()
            .zip(&splittings)
            .filter(|(_, &s)| s > 0.0)
            .map(|(&r, &s)| (vec![1.0, r.ln()], s.ln()))
            .unzip();
        if rows.len() < 2 {
            (None, None, 0.0)
        } else {
            let fit = least_squares(&rows, &ys)?;
            (Some(fit.coeffs[1]), fit.stderr.get(1).copied(), fit.residual_rms)
        }
    };

    let rows: Vec<Vec<f64>> = radii.iter().map(|&r| vec![r, r * r]).collect();
    let mut slopes = [Complex64::new(0.0, 0.0); 2];
    let mut ssq = 0.0;
    for (s, slope) in slopes.iter_mut().enumerate() {
        let re: Vec<f64> = sheets.iter().map(|p| (p[s] - omega0).re).collect();
        let im: Vec<f64> = sheets.iter().map(|p| (p[s] - omega0).im).collect();
        let fre = least_squares(&rows, &re)?;
        let fim = least_squares(&rows, &im)?;
        *slope = Complex64::new(fre.coeffs[0], fim.coeffs[0]);
        ssq += fre.residual_rms.powi(2) + fim.residual_rms.powi(2);
    }
    Ok(RayFit {
        direction: dir,
        exponent,
        exponent_stderr,
        exponent_residual_rms,
        tilt: (slopes[0] + slopes[1]) / 2.0,
        slopes,
        slope_residual_rms: (ssq / 2.0).sqrt(),
        exceptional_line,
        splittings,
        sheets,
    })
}
