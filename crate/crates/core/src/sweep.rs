//! Parameter sweeps with continuity-ordered bands.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::AnalysisError;
use crate::family::{HamiltonianFamily, ParamPoint};
use crate::linalg::{default_degeneracy_tol, eig_dense, pair_continuation, sorted_re_im};

/// Inclusive linear grid `min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self, AnalysisError> {
        if !(min.is_finite() && max.is_finite()) || count == 0 || (count > 1 && min > max) {
            return Err(AnalysisError::InvalidInput(format!(
                "bad grid {min}:{max}:{count}"
            )));
        }
        if count == 1 && min != max {
            return Err(AnalysisError::InvalidInput(
                "single-point grid needs min == max".into(),
            ));
        }
        Ok(Self { min, max, count })
    }

    pub fn fixed(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            count: 1,
        }
    }

    /// Grid values; endpoints are exact and the midpoint of an odd-count grid
    /// is exactly `(min + max) / 2`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n1 = (self.count - 1) as f64;
        let center = (self.min + self.max) / 2.0;
        let half = (self.max - self.min) / 2.0;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i == self.count - 1 {
                    self.max
                } else {
                    center + half * (2.0 * i as f64 - n1) / n1
                }
            })
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }
}

/// Two-axis grid; the first axis is the outer (slow) index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid2 {
    pub axis0: GridAxis,
    pub axis1: GridAxis,
}

impl Grid2 {
    pub fn new(axis0: GridAxis, axis1: GridAxis) -> Self {
        Self { axis0, axis1 }
    }

    pub fn points(&self) -> Vec<ParamPoint> {
        let a = self.axis0.values();
        let b = self.axis1.values();
        a.iter()
            .flat_map(|&x| b.iter().map(move |&y| [x, y]))
            .collect()
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.axis0.count, self.axis1.count]
    }
}

/// Named axis values of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: Vec<f64>) -> Result<Self, AnalysisError> {
        let mono = values.windows(2).all(|w| w[0] < w[1]) || values.windows(2).all(|w| w[0] > w[1]);
        if values.is_empty() || !mono {
            return Err(AnalysisError::InvalidInput(format!(
                "axis {name} must be nonempty and strictly monotonic"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            values,
        })
    }
}

/// Band energies over a grid, `bands[band][point]`, points in grid-major
/// order (first axis slowest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub model: String,
    pub axes: Vec<Axis>,
    pub shape: Vec<usize>,
    pub bands: Vec<Vec<Complex64>>,
    /// Grid points whose smallest eigenvalue gap is below ten times the
    /// degeneracy tolerance; band labels there are not unique.
    pub degenerate_points: Vec<usize>,
}

impl SweepResult {
    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn point_count(&self) -> usize {
        self.bands.first().map_or(0, Vec::len)
    }

    /// Energies of all bands at grid point `idx`.
    pub fn at(&self, idx: usize) -> Vec<Complex64> {
        self.bands.iter().map(|b| b[idx]).collect()
    }
}

/// Eigenvalues at every point, sorted by (real, imaginary) part.
pub fn eigenvalues_on<F: HamiltonianFamily + ?Sized>(
    family: &F,
    points: &[ParamPoint],
) -> Result<Vec<Vec<Complex64>>, AnalysisError> {
    points
        .par_iter()
        .map(|&p| Ok(eig_dense(&family.matrix(p)?)?.eigenvalues))
        .collect()
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

fn flag_degenerate(spectra: &[Vec<Complex64>]) -> Vec<usize> {
    spectra
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let rho = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
            min_gap(s) < 10.0 * default_degeneracy_tol(rho)
        })
        .map(|(i, _)| i)
        .collect()
}

fn transpose(ordered: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let n = ordered.first().map_or(0, Vec::len);
    (0..n)
        .map(|b| ordered.iter().map(|s| s[b]).collect())
        .collect()
}

/// Orders `next` against a linear prediction from the last two points (or
/// the last point alone), so bands crossing on a grid point keep their slope.
fn follow(
    before: Option<&[Complex64]>,
    prev: &[Complex64],
    next: &[Complex64],
) -> Result<Vec<Complex64>, AnalysisError> {
    let predicted: Vec<Complex64> = match before {
        Some(b) => prev.iter().zip(b).map(|(p, q)| 2.0 * p - q).collect(),
        None => prev.to_vec(),
    };
    let perm = pair_continuation(&predicted, next)?;
    Ok(perm.iter().map(|&j| next[j]).collect())
}

/// Sweep along a path; bands are sorted by real part at the first point and
/// followed with [`pair_continuation`] from there.
pub fn sweep_path<F: HamiltonianFamily + ?Sized>(
    family: &F,
    points: &[ParamPoint],
    axes: Vec<Axis>,
) -> Result<SweepResult, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::InvalidInput("empty sweep".into()));
    }
    let spectra = eigenvalues_on(family, points)?;
    let degenerate_points = flag_degenerate(&spectra);
    let mut ordered: Vec<Vec<Complex64>> = Vec::with_capacity(spectra.len());
    ordered.push(sorted_re_im(&spectra[0]));
    for s in &spectra[1..] {
        let n = ordered.len();
        let before = (n >= 2).then(|| ordered[n - 2].as_slice());
        let next = follow(before, &ordered[n - 1], s)?;
        ordered.push(next);
    }
    Ok(SweepResult {
        model: family.id(),
        shape: vec![points.len()],
        axes,
        bands: transpose(ordered),
        degenerate_points,
    })
}

/// Sweep over the full two-parameter plane.
///
/// Each row (fixed first-axis value) is followed along the second axis; the
/// first point of a row continues from the first point of the previous row.
pub fn hybrid_sweep<F: HamiltonianFamily + ?Sized>(
    family: &F,
    grid: &Grid2,
) -> Result<SweepResult, AnalysisError> {
    let names = family.axis_names();
    let axes = vec![
        Axis::new(names[0], grid.axis0.values())?,
        Axis::new(names[1], grid.axis1.values())?,
    ];
    let points = grid.points();
    let spectra = eigenvalues_on(family, &points)?;
    let degenerate_points = flag_degenerate(&spectra);
    let [rows, cols] = grid.shape();
    let mut ordered: Vec<Vec<Complex64>> = Vec::with_capacity(points.len());
    for r in 0..rows {
        for c in 0..cols {
            let s = &spectra[r * cols + c];
            let next = if r == 0 && c == 0 {
                sorted_re_im(s)
            } else if c == 0 {
                let before = (r >= 2).then(|| ordered[(r - 2) * cols].as_slice());
                follow(before, &ordered[(r - 1) * cols], s)?
            } else {
                let n = ordered.len();
                let before = (c >= 2).then(|| ordered[n - 2].as_slice());
                follow(before, &ordered[n - 1], s)?
            };
            ordered.push(next);
        }
    }
    Ok(SweepResult {
        model: family.id(),
        axes,
        shape: vec![rows, cols],
        bands: transpose(ordered),
        degenerate_points,
    })
}
