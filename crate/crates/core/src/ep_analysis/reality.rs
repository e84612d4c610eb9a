use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{degenerate_energy, eigenvalues_at, offset, tracked_pair, AnalysisConfig};
use crate::error::AnalysisError;
use crate::family::{HamiltonianFamily, ParamPoint};

/// Imaginary parts of the tracked pair on a probe disk around a degeneracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealityProbe {
    pub radius: f64,
    pub max_imag: f64,
    /// Largest `|Im w|` over the rings, per probe angle `2 pi i / n`.
    pub angle_max_imag: Vec<f64>,
    pub locally_real: bool,
    /// Complex energies fill an angular sector of two or more adjacent probe
    /// angles, but not the whole disk.
    pub branch_cut_detected: bool,
}

/// Probes the lowest degeneracy at `point` on a disk of `radius` with the
/// default 16 angles, 5 rings and reality tolerance.
pub fn local_reality<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    radius: f64,
) -> Result<RealityProbe, AnalysisError> {
    let cfg = AnalysisConfig::default();
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!("bad probe radius {radius}")));
    }
    let (omega0, _) = degenerate_energy(family, point, cfg.band_pair, None)?;
    probe_disk(
        family,
        point,
        omega0,
        radius,
        cfg.probe_angles,
        cfg.probe_rings,
        cfg.reality_tol,
    )
}

pub(crate) fn probe_disk<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    omega0: Complex64,
    radius: f64,
    angles: usize,
    rings: usize,
    reality_tol: f64,
) -> Result<RealityProbe, AnalysisError> {
    let angle_max_imag = (0..angles)
        .into_par_iter()
        .map(|i| {
            let th = 2.0 * PI * i as f64 / angles as f64;
            let dir = [th.cos(), th.sin()];
            (1..=rings).try_fold(0.0f64, |m, j| {
                let r = radius * j as f64 / rings as f64;
                let pair = tracked_pair(&eigenvalues_at(family, offset(point, dir, r))?, omega0);
                Ok(m.max(pair[0].im.abs()).max(pair[1].im.abs()))
            })
        })
        .collect::<Result<Vec<f64>, AnalysisError>>()?;
    let max_imag = angle_max_imag.iter().copied().fold(0.0, f64::max);
    let flagged: Vec<bool> = angle_max_imag.iter().map(|&m| m > reality_tol).collect();
    let n = flagged.len();
    let all = flagged.iter().all(|&f| f);
    let adjacent = (0..n).any(|i| flagged[i] && flagged[(i + 1) % n]);
    Ok(RealityProbe {
        radius,
        max_imag,
        angle_max_imag,
        locally_real: max_imag <= reality_tol,
        branch_cut_detected: adjacent && !all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Model;

    #[test]
    fn hermitian_block_is_real() {
        let p = local_reality(&Model::HbPrime { v0: 1.0 }, [1.0, 0.0], 0.02).unwrap();
        assert_eq!(p.max_imag, 0.0);
        assert!(p.locally_real && !p.branch_cut_detected);
    }

    #[test]
    fn imaginary_cone_is_complex_everywhere_but_has_no_cut() {
        let p = local_reality(&Model::ImagCone, [0.0, 0.0], 0.02).unwrap();
        assert!(!p.locally_real);
        assert!((p.max_imag - 0.02).abs() < 0.02 * 0.05);
        assert!(!p.branch_cut_detected);
    }
}
