//! Named two-parameter Hamiltonian families.
//!
//! Every analysis in this crate works on a point of a two-dimensional
//! parameter plane, e.g. `(tau, k)` for the crystal-derived models or `(k, g)`
//! for the imaginary cone.

use num_complex::Complex64;
use serde::Serialize;

use crate::bloch::{build_bloch, BlochSpec};
use crate::error::ModelError;
use crate::linalg::CMatrix;
use crate::models::{
    build_block_stack, build_h3, build_ha_double_prime, build_ha_prime, build_hb_prime,
    build_imag_cone, two_band_generic, BlockStackSpec, ModelParams, PauliPerturbation,
};

/// A point in a family's parameter plane, ordered as its axis names.
pub type ParamPoint = [f64; 2];

/// Parametrised map from a parameter point to a dense complex matrix.
pub trait HamiltonianFamily: Send + Sync {
    fn id(&self) -> String;
    fn axis_names(&self) -> [&'static str; 2];
    fn dim(&self) -> usize;
    fn matrix(&self, point: ParamPoint) -> Result<CMatrix, ModelError>;
}

/// How the two real parameters of the two-band family enter `dH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoBandVariant {
    /// `(D-, D3)`, `D+ = 0`, non-Hermitian.
    FirstOrder,
    /// `(d-, D3)` with `D- = d-^2`, `D+ = 0`, non-Hermitian.
    SecondOrder,
    /// `(D, D3)` with `D- = D+ = D`, Hermitian.
    Hermitian,
}

/// Every model shipped with the crate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    H3 { v0: f64 },
    HaPrime { v0: f64 },
    HbPrime { v0: f64 },
    HaDoublePrime { v0: f64 },
    ImagCone,
    Bloch { v0: f64, trunc_m: usize },
    Stack { v0: f64, spec: BlockStackSpec },
    TwoBand { variant: TwoBandVariant },
}

impl Model {
    fn tau_k(v0: f64, point: ParamPoint) -> Result<ModelParams, ModelError> {
        ModelParams::new(v0, point[0], point[1])
    }
}

impl HamiltonianFamily for Model {
    fn id(&self) -> String {
        match self {
            Model::H3 { .. } => "h3".into(),
            Model::HaPrime { .. } => "haprime".into(),
            Model::HbPrime { .. } => "hbprime".into(),
            Model::HaDoublePrime { .. } => "haddprime".into(),
            Model::ImagCone => "imagcone".into(),
            Model::Bloch { .. } => "bloch".into(),
            Model::Stack { spec, .. } => match spec.kind {
                crate::models::StackKind::A => "stack_a".into(),
                crate::models::StackKind::B => "stack_b".into(),
            },
            Model::TwoBand { variant } => match variant {
                TwoBandVariant::FirstOrder => "twoband_first".into(),
                TwoBandVariant::SecondOrder => "twoband_second".into(),
                TwoBandVariant::Hermitian => "twoband_hermitian".into(),
            },
        }
    }

    fn axis_names(&self) -> [&'static str; 2] {
        match self {
            Model::ImagCone => ["k", "g"],
            Model::TwoBand { variant } => match variant {
                TwoBandVariant::FirstOrder => ["delta_minus", "delta_3"],
                TwoBandVariant::SecondOrder => ["small_minus", "delta_3"],
                TwoBandVariant::Hermitian => ["delta", "delta_3"],
            },
            _ => ["tau", "k"],
        }
    }

    fn dim(&self) -> usize {
        match self {
            Model::H3 { .. } | Model::ImagCone => 3,
            Model::HaPrime { .. }
            | Model::HbPrime { .. }
            | Model::HaDoublePrime { .. }
            | Model::TwoBand { .. } => 2,
            Model::Bloch { trunc_m, .. } => 2 * trunc_m + 1,
            Model::Stack { spec, .. } => 2 * spec.shifts().len(),
        }
    }

    fn matrix(&self, point: ParamPoint) -> Result<CMatrix, ModelError> {
        if !point.iter().all(|x| x.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "point",
                value: f64::NAN,
                reason: "must be finite",
            });
        }
        Ok(match self {
            Model::H3 { v0 } => build_h3(&Self::tau_k(*v0, point)?),
            Model::HaPrime { v0 } => build_ha_prime(&Self::tau_k(*v0, point)?),
            Model::HbPrime { v0 } => build_hb_prime(&Self::tau_k(*v0, point)?),
            Model::HaDoublePrime { v0 } => build_ha_double_prime(&Self::tau_k(*v0, point)?),
            Model::ImagCone => build_imag_cone(point[0], point[1]),
            Model::Bloch { v0, trunc_m } => {
                let spec = BlochSpec::new(*v0, point[0], *trunc_m)?;
                build_bloch(&spec, point[1])
            }
            Model::Stack { v0, spec } => build_block_stack(spec, &Self::tau_k(*v0, point)?),
            Model::TwoBand { variant } => {
                let re = |x: f64| Complex64::new(x, 0.0);
                let (a, d3) = (point[0], point[1]);
                let pert = match variant {
                    TwoBandVariant::FirstOrder => {
                        PauliPerturbation::new(re(0.0), re(a), re(d3), false)?
                    }
                    TwoBandVariant::SecondOrder => {
                        PauliPerturbation::second_order_minus(re(0.0), re(a), re(d3))?
                    }
                    TwoBandVariant::Hermitian => PauliPerturbation::new(re(a), re(a), re(d3), true)?,
                };
                two_band_generic(&pert).0
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::StackKind;

    #[test]
    fn dims_match_matrices() {
        let models = [
            Model::H3 { v0: 1.0 },
            Model::HaPrime { v0: 1.0 },
            Model::HbPrime { v0: 1.0 },
            Model::HaDoublePrime { v0: 1.0 },
            Model::ImagCone,
            Model::Bloch { v0: 1.0, trunc_m: 3 },
            Model::Stack {
                v0: 1.0,
                spec: BlockStackSpec::new(vec![1.0, 2.0, 3.0], StackKind::B).unwrap(),
            },
            Model::TwoBand {
                variant: TwoBandVariant::SecondOrder,
            },
        ];
        for m in &models {
            assert_eq!(m.matrix([0.9, 0.1]).unwrap().dim(), m.dim(), "{}", m.id());
        }
    }

    #[test]
    fn rejects_negative_tau() {
        assert!(Model::H3 { v0: 1.0 }.matrix([-0.5, 0.0]).is_err());
        assert!(Model::H3 { v0: 1.0 }.matrix([f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn two_band_variants() {
        let m = Model::TwoBand {
            variant: TwoBandVariant::SecondOrder,
        }
        .matrix([0.1, 0.0])
        .unwrap();
        // D- = 0.01 enters the lower-left entry as 2 D-
        assert!((m.get(1, 0).re - 0.02).abs() < 1e-15);
        let h = Model::TwoBand {
            variant: TwoBandVariant::Hermitian,
        }
        .matrix([0.1, 0.3])
        .unwrap();
        assert!(h.is_hermitian());
    }
}
