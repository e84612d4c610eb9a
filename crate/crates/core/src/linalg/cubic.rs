use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::cmp_re_im;
use crate::error::LinalgError;

/// Real cubic `c3 w^3 + c2 w^2 + c1 w + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicCoeffs {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        ((w * self.c3 + self.c2) * w + self.c1) * w + self.c0
    }

    fn eval_derivative(&self, w: Complex64) -> Complex64 {
        (w * (3.0 * self.c3) + 2.0 * self.c2) * w + self.c1
    }

    pub fn max_abs_coeff(&self) -> f64 {
        [self.c3, self.c2, self.c1, self.c0]
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max)
    }

    /// Companion matrix whose characteristic polynomial is the monic cubic.
    pub fn companion(&self) -> [[f64; 3]; 3] {
        [
            [0.0, 0.0, -self.c0 / self.c3],
            [1.0, 0.0, -self.c1 / self.c3],
            [0.0, 1.0, -self.c2 / self.c3],
        ]
    }
}

/// Roots of a real cubic, sorted by real part then imaginary part.
///
/// Three real roots use the trigonometric form; one real root uses Cardano
/// with the cube root taken on the side that does not cancel. A complex pair
/// is assembled as `re -/+ i im`, so it is conjugate bit for bit. Each root
/// then gets at most a few Newton steps, accepted only when the residual
/// drops.
pub fn solve_cubic(c: &CubicCoeffs) -> Result<[Complex64; 3], LinalgError> {
    if c.c3 == 0.0 {
        return Err(LinalgError::ZeroLeadingCoefficient);
    }
    if ![c.c3, c.c2, c.c1, c.c0].iter().all(|x| x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let a = c.c2 / c.c3;
    let b = c.c1 / c.c3;
    let d = c.c0 / c.c3;
    // w = x - a/3 turns the monic cubic into x^3 + p x + q
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;

    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let t1 = half_q * half_q;
    let t2 = third_p * third_p * third_p;
    let disc = t1 + t2;
    let scale = t1.abs().max(t2.abs());

    let mut real_roots: Vec<f64> = Vec::with_capacity(3);
    let mut pair: Option<(f64, f64)> = None;

    if disc.abs() <= 64.0 * f64::EPSILON * scale || scale == 0.0 {
        // repeated root: {-2u, u, u} with u^3 = q/2
        let u = half_q.cbrt();
        real_roots.extend([-2.0 * u, u, u]);
    } else if disc < 0.0 {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            real_roots.push(m * (theta - 2.0 * PI * k as f64 / 3.0).cos());
        }
    } else {
        let sq = disc.sqrt();
        let big = -(half_q.abs() + sq).cbrt().copysign(q);
        let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        real_roots.push(big + small);
        pair = Some((-(big + small) / 2.0, 3f64.sqrt() / 2.0 * (big - small).abs()));
    }

    let mut roots: Vec<Complex64> = real_roots
        .into_iter()
        .map(|x| polish(c, Complex64::new(x - shift, 0.0)))
        .collect();
    if let Some((re, im)) = pair {
        let z = polish(c, Complex64::new(re - shift, im));
        if z.im == 0.0 {
            roots.extend([z, z]);
        } else {
            roots.extend([z.conj(), z]);
        }
    }
    roots.sort_by(cmp_re_im);
    Ok([roots[0], roots[1], roots[2]])
}

fn polish(c: &CubicCoeffs, mut z: Complex64) -> Complex64 {
    let mut res = c.eval(z).norm();
    for _ in 0..4 {
        if res == 0.0 {
            break;
        }
        let dp = c.eval_derivative(z);
        if dp.norm() == 0.0 {
            break;
        }
        let mut next = z - c.eval(z) / dp;
        if z.im == 0.0 {
            next.im = 0.0;
        }
        let r = c.eval(next).norm();
        // stop on NaN or once Newton no longer improves the residual
        if r.is_nan() || r >= res {
            break;
        }
        z = next;
        res = r;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual_ok(c: &CubicCoeffs, roots: &[Complex64; 3]) -> bool {
        roots.iter().all(|&w| {
            c.eval(w).norm() <= 1e-12 * c.max_abs_coeff() * (1.0 + w.norm().powi(3))
        })
    }

    fn conj_closed(roots: &[Complex64; 3]) -> bool {
        roots
            .iter()
            .all(|z| roots.iter().any(|w| w.re == z.re && w.im == -z.im))
    }

    #[test]
    fn double_root_at_one() {
        // w (1 - w)^2
        let c = CubicCoeffs::new(1.0, -2.0, 1.0, 0.0);
        let r = solve_cubic(&c).unwrap();
        let re: Vec<f64> = r.iter().map(|z| z.re).collect();
        assert!(r.iter().all(|z| z.im == 0.0));
        assert!(re[0].abs() < 1e-15);
        assert!((re[1] - 1.0).abs() < 1e-15 && (re[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn double_root_at_zero() {
        // w^3 - w^2
        let c = CubicCoeffs::new(1.0, -1.0, 0.0, 0.0);
        let r = solve_cubic(&c).unwrap();
        assert!(r.iter().all(|z| z.im == 0.0));
        assert!(r[0].re.abs() < 1e-15 && r[1].re.abs() < 1e-15);
        assert!((r[2].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cube_roots_of_unity() {
        let c = CubicCoeffs::new(1.0, 0.0, 0.0, -1.0);
        let r = solve_cubic(&c).unwrap();
        let h = 3f64.sqrt() / 2.0;
        assert!((r[0] - Complex64::new(-0.5, -h)).norm() < 1e-15);
        assert!((r[1] - Complex64::new(-0.5, h)).norm() < 1e-15);
        assert!((r[2] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(conj_closed(&r));
    }

    #[test]
    fn triple_root() {
        // (w - 2)^3
        let c = CubicCoeffs::new(1.0, -6.0, 12.0, -8.0);
        let r = solve_cubic(&c).unwrap();
        assert!(r.iter().all(|z| (z - Complex64::new(2.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn zero_leading_coefficient() {
        assert_eq!(
            solve_cubic(&CubicCoeffs::new(0.0, 1.0, 0.0, 0.0)),
            Err(LinalgError::ZeroLeadingCoefficient)
        );
    }

    #[test]
    fn cancellation_safe_branch() {
        // one tiny real root next to large ones: (w - 1e-9)(w^2 + 1e6)
        let c = CubicCoeffs::new(1.0, -1e-9, 1e6, -1e-3);
        let r = solve_cubic(&c).unwrap();
        let real = r.iter().find(|z| z.im == 0.0).unwrap();
        assert!((real.re - 1e-9).abs() < 1e-20, "{}", real.re);
        assert!(residual_ok(&c, &r));
    }

    proptest! {
        #[test]
        fn residual_and_conjugacy(
            c3 in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64],
            c2 in -3.0..3.0f64,
            c1 in -3.0..3.0f64,
            c0 in -3.0..3.0f64,
        ) {
            let c = CubicCoeffs::new(c3, c2, c1, c0);
            let r = solve_cubic(&c).unwrap();
            prop_assert!(residual_ok(&c, &r));
            prop_assert!(conj_closed(&r));
        }

        #[test]
        fn recovers_constructed_roots(
            x in -2.0..2.0f64,
            re in -2.0..2.0f64,
            im in 0.0..2.0f64,
        ) {
            // (w - x)(w - re - i im)(w - re + i im)
            let s = re * re + im * im;
            let c = CubicCoeffs::new(1.0, -(x + 2.0 * re), s + 2.0 * re * x, -x * s);
            let r = solve_cubic(&c).unwrap();
            prop_assert!(residual_ok(&c, &r));
            prop_assert!(r.iter().any(|z| (z.re - x).abs() < 1e-6 && z.im.abs() < 1e-6));
        }
    }
}
