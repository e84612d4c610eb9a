//! Plane-wave Bloch Hamiltonian of the crystal with potential
//! `V0 (cos x + i tau sin x)`, truncated to `m = -M..=M`.

use serde::Serialize;

use crate::error::{AnalysisError, ModelError};
use crate::family::Model;
use crate::linalg::CMatrix;
use crate::sweep::{sweep_path, Axis, SweepResult};
use num_complex::Complex64;

/// Default plane-wave cutoff, giving 17x17 matrices.
pub const DEFAULT_TRUNCATION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochSpec {
    pub v0: f64,
    pub tau: f64,
    pub trunc_m: usize,
}

impl BlochSpec {
    pub fn new(v0: f64, tau: f64, trunc_m: usize) -> Result<Self, ModelError> {
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "v0",
                value: v0,
                reason: "must be positive and finite",
            });
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "must be non-negative and finite",
            });
        }
        if trunc_m < 2 {
            return Err(ModelError::InvalidParameter {
                name: "trunc_m",
                value: trunc_m as f64,
                reason: "must be at least 2",
            });
        }
        Ok(Self { v0, tau, trunc_m })
    }

    pub fn size(&self) -> usize {
        2 * self.trunc_m + 1
    }

    pub fn t_minus(&self) -> f64 {
        self.v0 * (1.0 - self.tau) / 2.0
    }

    pub fn t_plus(&self) -> f64 {
        self.v0 * (1.0 + self.tau) / 2.0
    }

    /// Plane-wave indices `-M..=M` in row order.
    pub fn plane_waves(&self) -> impl Iterator<Item = i64> {
        let m = self.trunc_m as i64;
        -m..=m
    }
}

/// Tridiagonal `H_k`: diagonal `(m + k)^2`, `t_-` on the superdiagonal
/// (row `m`, column `m + 1`) and `t_+` on the subdiagonal.
///
/// At `tau = 1` the superdiagonal vanishes and the matrix is lower triangular.
pub fn build_bloch(spec: &BlochSpec, k: f64) -> CMatrix {
    let n = spec.size();
    let m0 = spec.trunc_m as f64;
    let (tm, tp) = (spec.t_minus(), spec.t_plus());
    CMatrix::from_fn(n, |i, j| {
        let v = if i == j {
            let m = i as f64 - m0;
            (m + k) * (m + k)
        } else if j == i + 1 {
            tm
        } else if i == j + 1 {
            tp
        } else {
            0.0
        };
        Complex64::new(v, 0.0)
    })
}

/// Folded free-particle energies `{(m + k)^2 : |m| <= M}`, ascending.
pub fn free_space_levels(trunc_m: usize, k: f64) -> Vec<f64> {
    let m = trunc_m as i64;
    let mut v: Vec<f64> = (-m..=m).map(|m| (m as f64 + k) * (m as f64 + k)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// All `2M + 1` bands along a monotonic path inside the first Brillouin zone.
pub fn band_structure(spec: &BlochSpec, k_grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    if k_grid.iter().any(|k| !(-0.5..=0.5).contains(k)) {
        return Err(AnalysisError::InvalidInput(
            "k grid must lie in [-1/2, 1/2]".into(),
        ));
    }
    let family = Model::Bloch {
        v0: spec.v0,
        trunc_m: spec.trunc_m,
    };
    let points: Vec<[f64; 2]> = k_grid.iter().map(|&k| [spec.tau, k]).collect();
    sweep_path(&family, &points, vec![Axis::new("k", k_grid.to_vec())?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_dense;

    #[test]
    fn spec_validation() {
        assert!(BlochSpec::new(1.0, 1.0, 1).is_err());
        assert!(BlochSpec::new(-1.0, 1.0, 4).is_err());
        assert!(BlochSpec::new(1.0, -1.0, 4).is_err());
        assert_eq!(BlochSpec::new(1.0, 1.0, 8).unwrap().size(), 17);
    }

    #[test]
    fn layout() {
        let spec = BlochSpec::new(2.0, 0.5, 2).unwrap();
        let h = build_bloch(&spec, 0.1);
        assert_eq!(h.dim(), 5);
        assert!((h.get(0, 0).re - 1.9 * 1.9).abs() < 1e-15);
        assert_eq!(h.get(0, 1).re, 0.5);
        assert_eq!(h.get(1, 0).re, 1.5);
        assert_eq!(h.get(0, 2).re, 0.0);
    }

    #[test]
    fn triangular_at_tau_one() {
        let spec = BlochSpec::new(1.0, 1.0, 2).unwrap();
        let h = build_bloch(&spec, 0.25);
        assert!(h.is_lower_triangular());
        let ev: Vec<f64> = eig_dense(&h).unwrap().eigenvalues.iter().map(|z| z.re).collect();
        assert_eq!(ev, vec![0.0625, 0.5625, 1.5625, 3.0625, 5.0625]);
    }

    #[test]
    fn hermitian_at_tau_zero() {
        let spec = BlochSpec::new(1.0, 0.0, 4).unwrap();
        assert!(build_bloch(&spec, 0.3).is_hermitian());
    }

    #[test]
    fn rejects_k_outside_zone() {
        let spec = BlochSpec::new(1.0, 1.0, 2).unwrap();
        assert!(band_structure(&spec, &[0.0, 0.6]).is_err());
    }
}
