use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::eigenvalues_at;
use crate::error::AnalysisError;
use crate::family::{HamiltonianFamily, ParamPoint};
use crate::linalg::default_degeneracy_tol;
use crate::sweep::{eigenvalues_on, Grid2};

/// Parameter resolution of the gap refinement.
const RESOLUTION: f64 = 1e-10;
const MAX_STEPS: usize = 10_000;

/// A refined point where two adjacent eigenvalues meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegeneracyCandidate {
    pub point: ParamPoint,
    pub omega0: Complex64,
    pub gap: f64,
    /// Index of the lower eigenvalue in the (real, imaginary)-sorted spectrum.
    pub band: usize,
}

fn gap_at(values: &[Complex64], b: usize) -> f64 {
    (values[b + 1] - values[b]).norm()
}

/// Scans `grid` for degeneracies.
///
/// For every pair of adjacent eigenvalues (in the sorted spectrum) each grid
/// local minimum of their gap is refined by compass search down to a
/// parameter step of `1e-10`, staying inside the grid box. Refined points
/// with a gap below `tol` (default `1e-8 * max(1, rho)`) are kept; candidates
/// within the resolution of each other and at the same energy are merged.
pub fn find_degeneracies<F: HamiltonianFamily + ?Sized>(
    family: &F,
    grid: &Grid2,
    tol: Option<f64>,
) -> Result<Vec<DegeneracyCandidate>, AnalysisError> {
    let points = grid.points();
    let spectra = eigenvalues_on(family, &points)?;
    let n = spectra.first().map_or(0, Vec::len);
    if n < 2 {
        return Ok(Vec::new());
    }
    let [rows, cols] = grid.shape();
    let mut seeds = Vec::new();
    for b in 0..n - 1 {
        for r in 0..rows {
            for c in 0..cols {
                let g = gap_at(&spectra[r * cols + c], b);
                let is_min = neighbours(r, c, rows, cols)
                    .all(|(rr, cc)| g <= gap_at(&spectra[rr * cols + cc], b));
                if is_min {
                    seeds.push((b, r * cols + c));
                }
            }
        }
    }

    let refined = seeds
        .par_iter()
        .map(|&(b, idx)| refine(family, grid, points[idx], b))
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    let mut out: Vec<(DegeneracyCandidate, f64)> = Vec::new();
    for (cand, rho) in refined {
        let t = tol.unwrap_or_else(|| default_degeneracy_tol(rho));
        if cand.gap >= t {
            continue;
        }
        let duplicate = out.iter().any(|(o, ot)| {
            (o.point[0] - cand.point[0]).abs() <= 1e2 * RESOLUTION
                && (o.point[1] - cand.point[1]).abs() <= 1e2 * RESOLUTION
                && (o.omega0 - cand.omega0).norm() <= t.max(*ot)
        });
        if !duplicate {
            out.push((cand, t));
        }
    }
    let mut out: Vec<DegeneracyCandidate> = out.into_iter().map(|(c, _)| c).collect();
    out.sort_by(|a, b| {
        a.point[0]
            .total_cmp(&b.point[0])
            .then(a.point[1].total_cmp(&b.point[1]))
            .then(a.omega0.re.total_cmp(&b.omega0.re))
            .then(a.omega0.im.total_cmp(&b.omega0.im))
    });
    Ok(out)
}

fn neighbours(
    r: usize,
    c: usize,
    rows: usize,
    cols: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let rr = r.saturating_sub(1)..=(r + 1).min(rows - 1);
    rr.flat_map(move |i| {
        (c.saturating_sub(1)..=(c + 1).min(cols - 1)).map(move |j| (i, j))
    })
    .filter(move |&(i, j)| (i, j) != (r, c))
}

/// Compass search on the gap of band pair `b`; returns the candidate and the
/// spectral radius at the refined point.
fn refine<F: HamiltonianFamily + ?Sized>(
    family: &F,
    grid: &Grid2,
    start: ParamPoint,
    b: usize,
) -> Result<(DegeneracyCandidate, f64), AnalysisError> {
    let axes = [grid.axis0, grid.axis1];
    let eval = |p: ParamPoint| -> Result<(f64, Vec<Complex64>), AnalysisError> {
        let v = eigenvalues_at(family, p)?;
        Ok((gap_at(&v, b), v))
    };
    let mut p = start;
    let (mut g, mut values) = eval(p)?;
    let mut step = [axes[0].spacing(), axes[1].spacing()];
    let mut iter = 0;
    while g > 0.0 && step.iter().any(|&s| s >= RESOLUTION) && iter < MAX_STEPS {
        iter += 1;
        let mut moved = false;
        for a in 0..2 {
            if axes[a].count < 2 || step[a] < RESOLUTION {
                continue;
            }
            for sign in [1.0, -1.0] {
                let mut q = p;
                q[a] = (p[a] + sign * step[a]).clamp(axes[a].min, axes[a].max);
                if q[a] == p[a] {
                    continue;
                }
                let (gq, vq) = eval(q)?;
                if gq < g {
                    (p, g, values) = (q, gq, vq);
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step = [step[0] / 2.0, step[1] / 2.0];
        }
    }
    let rho = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((
        DegeneracyCandidate {
            point: p,
            omega0: (values[b] + values[b + 1]) / 2.0,
            gap: g,
            band: b,
        },
        rho,
    ))
}
