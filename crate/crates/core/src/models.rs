//! Closed-form matrix models and their analytic dispersions.
//!
//! Conventions: `t_-+ = V0 (1 -+ tau) / 2`, `t^2 = t_- t_+ = V0^2 (1 - tau^2) / 4`
//! and `dtau = tau - 1`. Matrix builders always use the exact `t^2`; only the
//! leading-order cone formulas use `t^2 ~ -(V0^2 / 2) dtau`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::ModelError;
use crate::linalg::{solve_cubic, CMatrix, CubicCoeffs};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Potential amplitude, gain/loss strength and Bloch momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub v0: f64,
    pub tau: f64,
    pub k: f64,
}

impl ModelParams {
    pub fn new(v0: f64, tau: f64, k: f64) -> Result<Self, ModelError> {
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
        if !k.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "k",
                value: k,
                reason: "must be finite",
            });
        }
        Ok(Self { v0, tau, k })
    }

    /// Parameters at `tau = 1 + dtau`.
    pub fn near_ep(v0: f64, dtau: f64, k: f64) -> Result<Self, ModelError> {
        Self::new(v0, 1.0 + dtau, k)
    }

    pub fn t_minus(&self) -> f64 {
        self.v0 * (1.0 - self.tau) / 2.0
    }

    pub fn t_plus(&self) -> f64 {
        self.v0 * (1.0 + self.tau) / 2.0
    }

    /// `t^2 = t_- t_+`, negative for `tau > 1`.
    pub fn t_sq(&self) -> f64 {
        self.t_minus() * self.t_plus()
    }

    pub fn dtau(&self) -> f64 {
        self.tau - 1.0
    }
}

/// Three-band model with a Dirac EP at `tau = 1, k = 0`.
pub fn build_h3(p: &ModelParams) -> CMatrix {
    let (tm, tp, k) = (p.t_minus(), p.t_plus(), p.k);
    let rows = [
        [1.0 - 2.0 * k, tm, 0.0],
        [tp, 0.0, tm],
        [0.0, tp, 1.0 + 2.0 * k],
    ];
    CMatrix::from_fn(3, |i, j| re(rows[i][j]))
}

/// Split of [`build_h3`] into the EP matrix `H0` and the first-order `dH`.
pub fn h3_split(p: &ModelParams) -> (CMatrix, CMatrix) {
    let v0 = p.v0;
    let g = v0 * p.dtau() / 2.0;
    let k = p.k;
    let h0 = [[1.0, 0.0, 0.0], [v0, 0.0, 0.0], [0.0, v0, 1.0]];
    let dh = [[-2.0 * k, -g, 0.0], [g, 0.0, -g], [0.0, g, 2.0 * k]];
    (
        CMatrix::from_fn(3, |i, j| re(h0[i][j])),
        CMatrix::from_fn(3, |i, j| re(dh[i][j])),
    )
}

/// Characteristic cubic of [`build_h3`]:
/// `w (1 - w)^2 + 2 t^2 (1 - w) - 4 k^2 w = 0`, expanded.
pub fn char_poly_h3(p: &ModelParams) -> CubicCoeffs {
    let t2 = p.t_sq();
    let k2 = p.k * p.k;
    CubicCoeffs::new(1.0, -2.0, 1.0 - 2.0 * t2 - 4.0 * k2, 2.0 * t2)
}

/// Leading-order band offsets from `w0 = 1`: `t^2 +/- sqrt(t^4 + 4k^2)` with
/// `t^2 = -(V0^2 / 2) dtau`. Returned as `(plus, minus)`.
pub fn h3_cone_exact(k: f64, dtau: f64, v0: f64) -> (f64, f64) {
    let t2 = -(v0 * v0 / 2.0) * dtau;
    let root = (t2 * t2 + 4.0 * k * k).sqrt();
    (t2 + root, t2 - root)
}

/// Linear dispersion along the ray `dtau = (2 alpha / V0^2) k`:
/// `(-alpha +/- sqrt(4 + alpha^2)) k`, returned as `(plus, minus)`.
pub fn h3_cone_ray(alpha: f64, k: f64) -> (f64, f64) {
    let root = (4.0 + alpha * alpha).sqrt();
    ((-alpha + root) * k, (-alpha - root) * k)
}

/// `dtau` on the ray of slope `alpha` at momentum `k`.
pub fn ray_dtau(alpha: f64, k: f64, v0: f64) -> f64 {
    2.0 * alpha * k / (v0 * v0)
}

/// Two-band reduction with the eigenvalue in the couplings replaced by 1:
/// `(1 + t^2) I + [[-2k, t_-^2], [t_+^2, 2k]]`.
pub fn build_ha_prime(p: &ModelParams) -> CMatrix {
    ha_block(p, 1.0)
}

/// Hermitian two-band reduction `[[1 + 2t^2, -2k], [-2k, 1]]`.
pub fn build_hb_prime(p: &ModelParams) -> CMatrix {
    hb_block(p, 1.0)
}

fn ha_block(p: &ModelParams, shift: f64) -> CMatrix {
    let d = shift + p.t_sq();
    let (tm, tp, k) = (p.t_minus(), p.t_plus(), p.k);
    let rows = [[d - 2.0 * k, tm * tm], [tp * tp, d + 2.0 * k]];
    CMatrix::from_fn(2, |i, j| re(rows[i][j]))
}

fn hb_block(p: &ModelParams, shift: f64) -> CMatrix {
    let t2 = p.t_sq();
    let k = p.k;
    let rows = [[shift + 2.0 * t2, -2.0 * k], [-2.0 * k, shift]];
    CMatrix::from_fn(2, |i, j| re(rows[i][j]))
}

/// Closed-form eigenvalues shared by `H_a'` and `H_b'`:
/// `1 + t^2 +/- sqrt(4k^2 + t^4)`, returned as `(minus, plus)`.
pub fn ha_prime_eigenvalues(p: &ModelParams) -> (f64, f64) {
    let t2 = p.t_sq();
    let root = (4.0 * p.k * p.k + t2 * t2).sqrt();
    (1.0 + t2 - root, 1.0 + t2 + root)
}

/// `H_a' = H0 + dH + dH'` with the second-order block `dH'` split off.
pub fn ha_prime_split(p: &ModelParams) -> (CMatrix, CMatrix, CMatrix) {
    let v2 = p.v0 * p.v0;
    let dt = p.dtau();
    let k = p.k;
    let h0 = [[1.0, 0.0], [v2, 1.0]];
    let dh = [
        [-v2 / 2.0 * dt - 2.0 * k, 0.0],
        [v2 * dt, -v2 / 2.0 * dt + 2.0 * k],
    ];
    let c = v2 / 4.0 * dt * dt;
    let dh2 = [[-c, c], [c, -c]];
    (
        CMatrix::from_fn(2, |i, j| re(h0[i][j])),
        CMatrix::from_fn(2, |i, j| re(dh[i][j])),
        CMatrix::from_fn(2, |i, j| re(dh2[i][j])),
    )
}

/// `H_a'' = H0 + dH`: `H_a'` without the `dtau^2` block. Lower triangular,
/// with eigenvalues `1 - (V0^2 / 2) dtau -/+ 2k`.
pub fn build_ha_double_prime(p: &ModelParams) -> CMatrix {
    let v2 = p.v0 * p.v0;
    let dt = p.dtau();
    let k = p.k;
    let d = 1.0 - v2 / 2.0 * dt;
    let rows = [[d - 2.0 * k, 0.0], [v2 * (1.0 + dt), d + 2.0 * k]];
    CMatrix::from_fn(2, |i, j| re(rows[i][j]))
}

/// Which square-root branch of the self-consistent two-band equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Damped fixed-point settings for [`nonlinear_eig_ha`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates with smaller modulus count as leaving the basin.
    pub min_modulus: f64,
    /// Allowed distance from the nearest root of [`char_poly_h3`].
    pub root_tol: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-12,
            max_iter: 1000,
            min_modulus: 0.1,
            root_tol: 1e-10,
        }
    }
}

/// Right-hand side of `w = (1 + t^2/w) +/- sqrt(4k^2 + t^4/w^2)`.
pub fn nonlinear_rhs(p: &ModelParams, branch: Branch, w: Complex64) -> Complex64 {
    let t2 = p.t_sq();
    let radicand = re(4.0 * p.k * p.k) + (t2 * t2) / (w * w);
    1.0 + t2 / w + branch.sign() * radicand.sqrt()
}

/// Solves the self-consistent eigenvalue equation of the reduced two-band
/// problem `H_a(w)` by damped fixed-point iteration from `init`.
///
/// The converged value is checked against the roots of [`char_poly_h3`].
pub fn nonlinear_eig_ha(
    p: &ModelParams,
    branch: Branch,
    init: Complex64,
    cfg: &FixedPointConfig,
) -> Result<Complex64, ModelError> {
    let lambda = cfg.damping;
    let mut w = init;
    for _ in 0..cfg.max_iter {
        if w.norm() < cfg.min_modulus || !w.re.is_finite() || !w.im.is_finite() {
            return Err(ModelError::LeftBasin(w.norm()));
        }
        let next = (1.0 - lambda) * w + lambda * nonlinear_rhs(p, branch, w);
        let step = (next - w).norm();
        w = next;
        if step <= cfg.tol {
            let roots = solve_cubic(&char_poly_h3(p))?;
            let dist = roots.iter().map(|r| (r - w).norm()).fold(f64::INFINITY, f64::min);
            if dist > cfg.root_tol {
                return Err(ModelError::NotACubicRoot(w));
            }
            return Ok(w);
        }
    }
    Err(ModelError::NotConverged(cfg.max_iter))
}

/// Result of [`nonlinear_eig_ha_or_cubic`], flagging the fallback path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearOutcome {
    pub omega: Complex64,
    pub converged: bool,
    pub fallback_used: bool,
    pub failure: Option<String>,
}

/// [`nonlinear_eig_ha`], falling back to the cubic root nearest the
/// fixed-point initial guess when the iteration fails.
pub fn nonlinear_eig_ha_or_cubic(
    p: &ModelParams,
    branch: Branch,
    init: Complex64,
    cfg: &FixedPointConfig,
) -> Result<NonlinearOutcome, ModelError> {
    match nonlinear_eig_ha(p, branch, init, cfg) {
        Ok(omega) => Ok(NonlinearOutcome {
            omega,
            converged: true,
            fallback_used: false,
            failure: None,
        }),
        Err(err @ (ModelError::LeftBasin(_)
        | ModelError::NotConverged(_)
        | ModelError::NotACubicRoot(_))) => {
            let roots = solve_cubic(&char_poly_h3(p))?;
            // the branch sign orders the two roots nearest w0 = 1
            let mut near: Vec<Complex64> = roots.to_vec();
            near.sort_by(|a, b| (a - 1.0).norm().total_cmp(&(b - 1.0).norm()));
            let (lo, hi) = if near[0].re <= near[1].re {
                (near[0], near[1])
            } else {
                (near[1], near[0])
            };
            let omega = match branch {
                Branch::Plus => hi,
                Branch::Minus => lo,
            };
            Ok(NonlinearOutcome {
                omega,
                converged: false,
                fallback_used: true,
                failure: Some(err.to_string()),
            })
        }
        Err(e) => Err(e),
    }
}

/// Perturbation `dH = D+ s+ + D- s- + D3 s3` of a two-band model.
///
/// Ladder operators are `s+- = s1 +/- i s2`, i.e. `[[0,2],[0,0]]` and
/// `[[0,0],[2,0]]`, and the non-Hermitian EP matrix is `H0 = s+`. In this
/// normalisation the eigenvalues are exactly `+/- sqrt(4 D- (1 + D+) + D3^2)`
/// (non-Hermitian) and `+/- sqrt(4 D- D+ + D3^2)` (Hermitian, `H0 = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PauliPerturbation {
    pub delta_plus: Complex64,
    pub delta_minus: Complex64,
    pub delta_3: Complex64,
    pub hermitian_variant: bool,
}

impl PauliPerturbation {
    pub fn new(
        delta_plus: Complex64,
        delta_minus: Complex64,
        delta_3: Complex64,
        hermitian_variant: bool,
    ) -> Result<Self, ModelError> {
        for (name, z) in [
            ("delta_plus", delta_plus),
            ("delta_minus", delta_minus),
            ("delta_3", delta_3),
        ] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: f64::NAN,
                    reason: "must be finite",
                });
            }
        }
        Ok(Self {
            delta_plus,
            delta_minus,
            delta_3,
            hermitian_variant,
        })
    }

    /// Non-Hermitian perturbation with a second-order `D- = d-^2`.
    pub fn second_order_minus(
        delta_plus: Complex64,
        small_minus: Complex64,
        delta_3: Complex64,
    ) -> Result<Self, ModelError> {
        Self::new(delta_plus, small_minus * small_minus, delta_3, false)
    }
}

/// Matrix and closed-form eigenvalues `(w+, w-)` of the two-band model.
pub fn two_band_generic(pert: &PauliPerturbation) -> (CMatrix, (Complex64, Complex64)) {
    let (dp, dm, d3) = (pert.delta_plus, pert.delta_minus, pert.delta_3);
    let h0_upper = if pert.hermitian_variant { 0.0 } else { 2.0 };
    let rows = [[d3, h0_upper + 2.0 * dp], [2.0 * dm, -d3]];
    let m = CMatrix::from_fn(2, |i, j| rows[i][j]);
    let radicand = if pert.hermitian_variant {
        4.0 * dm * dp + d3 * d3
    } else {
        4.0 * dm * (1.0 + dp) + d3 * d3
    };
    let w = radicand.sqrt();
    (m, (w, -w))
}

/// Three-band model with an imaginary Dirac cone around an EP at the origin.
pub fn build_imag_cone(k: f64, g: f64) -> CMatrix {
    let i = Complex64::i();
    let rows = [
        [i * k, re(g), re(1.0)],
        [re(g), re(1.0), re(g)],
        [re(0.0), re(g), -i * k],
    ];
    CMatrix::from_fn(3, |r, c| rows[r][c])
}

/// `w^3 - w^2 + (k^2 - 2g^2) w - (k^2 + g^2)`.
pub fn char_poly_imag_cone(k: f64, g: f64) -> CubicCoeffs {
    CubicCoeffs::new(1.0, -1.0, k * k - 2.0 * g * g, -(k * k + g * g))
}

/// Which two-band block a stack is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StackKind {
    /// Non-Hermitian blocks from `H_a'`.
    A,
    /// Hermitian blocks from `H_b'`.
    B,
}

/// Energy offsets of a block-diagonal stack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStackSpec {
    shifts: Vec<f64>,
    pub kind: StackKind,
}

impl BlockStackSpec {
    pub fn new(shifts: Vec<f64>, kind: StackKind) -> Result<Self, ModelError> {
        let increasing = shifts.windows(2).all(|w| w[0] < w[1]);
        if shifts.is_empty() || !increasing || shifts.iter().any(|s| !s.is_finite()) {
            return Err(ModelError::InvalidShifts);
        }
        Ok(Self { shifts, kind })
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }
}

/// Block-diagonal stack whose `m`-th block is `H_a'` or `H_b'` with the
/// identity offset `1 + t^2` replaced by `shift_m + t^2`.
pub fn build_block_stack(spec: &BlockStackSpec, p: &ModelParams) -> CMatrix {
    let blocks: Vec<CMatrix> = spec
        .shifts
        .iter()
        .map(|&s| match spec.kind {
            StackKind::A => ha_block(p, s),
            StackKind::B => hb_block(p, s),
        })
        .collect();
    CMatrix::block_diag(&blocks)
}
