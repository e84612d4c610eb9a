use num_complex::Complex64;
use serde::Serialize;

use super::fit::least_squares;
use super::{degenerate_energy, eigenvalues_at, offset, tracked_pair, unit, BandPairSelector};
use crate::error::AnalysisError;
use crate::family::{HamiltonianFamily, ParamPoint};

/// `|c_half| / |c_one|` above which the half-integer series is selected.
pub const PUISEUX_RATIO: f64 = 1e-3;

const EPS_MIN: f64 = 1e-6;
const EPS_MAX: f64 = 1e-3;
const SAMPLES: usize = 16;

/// Which expansion describes the sheets along the probed direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PuiseuxModel {
    HalfInteger,
    Integer,
}

/// Fit of `w(eps) - w0 = c_half eps^1/2 + c_one eps + c_3/2 eps^3/2 + c_2 eps^2`
/// for both sheets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PuiseuxFit {
    pub model: PuiseuxModel,
    pub direction: [f64; 2],
    pub omega0: Complex64,
    pub eps: Vec<f64>,
    /// Per `[upper, lower]` sheet.
    pub c_half: [Complex64; 2],
    pub c_one: [Complex64; 2],
    /// Largest `|c_half|` and `|c_one|` over the two sheets.
    pub c_half_abs: f64,
    pub c_one_abs: f64,
    /// RMS of the relative (`1 / eps` weighted) residual, per sheet.
    pub residual_rms: [f64; 2],
}

fn eps_samples() -> Vec<f64> {
    let (a, b) = (EPS_MIN.ln(), EPS_MAX.ln());
    (0..SAMPLES)
        .map(|i| match i {
            0 => EPS_MIN,
            i if i == SAMPLES - 1 => EPS_MAX,
            i => (a + (b - a) * i as f64 / (SAMPLES - 1) as f64).exp(),
        })
        .collect()
}

/// Tests whether the perturbation series along `direction` needs half-integer
/// powers of the distance `eps`, sampled log-spaced in `[1e-6, 1e-3]`.
///
/// The two higher orders only absorb curvature so that it does not leak
/// into the two leading coefficients.
pub fn puiseux_diagnostic<F: HamiltonianFamily + ?Sized>(
    family: &F,
    point: ParamPoint,
    band_pair: BandPairSelector,
    direction: [f64; 2],
) -> Result<PuiseuxFit, AnalysisError> {
    let dir = unit(direction)?;
    let (omega0, mult) = degenerate_energy(family, point, band_pair, None)?;
    if mult != 2 {
        return Err(AnalysisError::WrongMultiplicity(mult));
    }
    let eps = eps_samples();
    let sheets = eps
        .iter()
        .map(|&e| Ok(tracked_pair(&eigenvalues_at(family, offset(point, dir, e))?, omega0)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let rows: Vec<Vec<f64>> = eps
        .iter()
        .map(|&e| vec![e.powf(-0.5), 1.0, e.sqrt(), e])
        .collect();

    let mut c_half = [Complex64::new(0.0, 0.0); 2];
    let mut c_one = [Complex64::new(0.0, 0.0); 2];
    let mut residual_rms = [0.0; 2];
    for s in 0..2 {
        let re: Vec<f64> = sheets.iter().zip(&eps).map(|(p, e)| (p[s] - omega0).re / e).collect();
        let im: Vec<f64> = sheets.iter().zip(&eps).map(|(p, e)| (p[s] - omega0).im / e).collect();
        let fre = least_squares(&rows, &re)?;
        let fim = least_squares(&rows, &im)?;
        c_half[s] = Complex64::new(fre.coeffs[0], fim.coeffs[0]);
        c_one[s] = Complex64::new(fre.coeffs[1], fim.coeffs[1]);
        residual_rms[s] = fre.residual_rms.hypot(fim.residual_rms);
    }
    let c_half_abs = c_half[0].norm().max(c_half[1].norm());
    let c_one_abs = c_one[0].norm().max(c_one[1].norm());
    let model = if c_half_abs > PUISEUX_RATIO * c_one_abs {
        PuiseuxModel::HalfInteger
    } else {
        PuiseuxModel::Integer
    };
    Ok(PuiseuxFit {
        model,
        direction: dir,
        omega0,
        eps,
        c_half,
        c_one,
        c_half_abs,
        c_one_abs,
        residual_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Model, TwoBandVariant};

    #[test]
    fn samples_span_the_window() {
        let e = eps_samples();
        assert_eq!(e.len(), SAMPLES);
        assert_eq!((e[0], e[SAMPLES - 1]), (EPS_MIN, EPS_MAX));
    }

    #[test]
    fn first_order_two_band_is_half_integer() {
        let fam = Model::TwoBand {
            variant: TwoBandVariant::FirstOrder,
        };
        let fit = puiseux_diagnostic(&fam, [0.0, 0.0], BandPairSelector::Lowest, [1.0, 0.0]).unwrap();
        assert_eq!(fit.model, PuiseuxModel::HalfInteger);
        // eigenvalues are exactly +/- 2 sqrt(eps)
        assert!((fit.c_half[0].re - 2.0).abs() < 1e-8, "{:?}", fit.c_half);
        assert!((fit.c_half[1].re + 2.0).abs() < 1e-8);
    }

    #[test]
    fn three_band_k_direction_is_integer() {
        let fam = Model::H3 { v0: 1.0 };
        let fit = puiseux_diagnostic(&fam, [1.0, 0.0], BandPairSelector::Lowest, [0.0, 1.0]).unwrap();
        assert_eq!(fit.model, PuiseuxModel::Integer);
        assert!((fit.c_one_abs - 2.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_zero_direction() {
        let fam = Model::H3 { v0: 1.0 };
        assert!(puiseux_diagnostic(&fam, [1.0, 0.0], BandPairSelector::Lowest, [0.0, 0.0]).is_err());
    }
}
