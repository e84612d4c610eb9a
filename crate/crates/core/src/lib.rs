//! Complex band structures of non-Hermitian matrix models and classification
//! of their degeneracies as Dirac points, Dirac exceptional points or
//! conventional second-order exceptional points.

pub mod bloch;
pub mod ep_analysis;
pub mod error;
pub mod family;
pub mod isospectral;
pub mod linalg;
pub mod models;
pub mod sweep;

pub use ep_analysis::{
    classify_degeneracy, find_degeneracies, fit_cone, local_reality, puiseux_diagnostic,
    AnalysisConfig, BandPairSelector, ConeFit, DegeneracyLabel, DegeneracyReport,
};
pub use error::{AnalysisError, LinalgError, ModelError};
pub use isospectral::{free_space_equivalence, verify_isospectral, IsospectralReport};
pub use family::{HamiltonianFamily, Model, ParamPoint, TwoBandVariant};
pub use linalg::{CMatrix, Spectrum};
pub use num_complex::Complex64;
