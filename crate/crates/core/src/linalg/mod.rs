//! Dense complex linear algebra used by every model and analysis.
//!
//! Eigenpairs come from a complex Schur factorisation `A = Q T Q*` followed
//! by back-substitution on the triangular factor. Triangular inputs skip the
//! factorisation entirely, so their eigenvalues are the diagonal bit for bit.
//! Several models in this crate are exactly triangular at their degeneracies,
//! and this keeps those points free of the `sqrt(eps)` splitting a defective
//! pair otherwise picks up.

mod continuation;
mod cubic;

pub use continuation::pair_continuation;
pub use cubic::{solve_cubic, CubicCoeffs};

use nalgebra::{DMatrix, Schur, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::LinalgError;

/// Entries with modulus at or below this value are skipped when fixing the
/// eigenvector phase.
pub const PHASE_PIVOT_THRESHOLD: f64 = 1e-12;

/// Relative scale of the default degeneracy clustering tolerance.
pub const DEFAULT_DEGENERACY_SCALE: f64 = 1e-8;

const SCHUR_MAX_ITER: usize = 10_000;

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(LinalgError::Empty);
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(LinalgError::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Wraps a matrix built from finite model parameters.
    pub(crate) fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let m = DMatrix::from_fn(n, n, f);
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `A - omega I`.
    pub fn shifted(&self, omega: Complex64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= omega;
        }
        Self(m)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.0[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn is_lower_triangular(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i + 1..n).all(|j| self.0[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.0[(i, j)] == self.0[(j, i)].conj()))
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(blocks: &[CMatrix]) -> Self {
        let n: usize = blocks.iter().map(CMatrix::dim).sum();
        let mut m = DMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            let d = b.dim();
            m.view_mut((off, off), (d, d)).copy_from(&b.0);
            off += d;
        }
        Self(m)
    }
}

/// How the eigenpairs of a [`Spectrum`] are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumOrdering {
    ByRealPart,
    ByContinuity,
    Unsorted,
}

/// Eigenvalues and unit right eigenvectors of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub ordering: SpectrumOrdering,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `||A v - w v||` over all pairs.
    pub fn max_residual(&self, a: &CMatrix) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&w, v)| {
                let av = a.mul_vec(v);
                av.iter()
                    .zip(v)
                    .map(|(x, y)| (x - w * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Reorders eigenpairs so that entry `i` becomes `perm[i]` of the old order.
    pub fn permuted(&self, perm: &[usize], ordering: SpectrumOrdering) -> Spectrum {
        Spectrum {
            eigenvalues: perm.iter().map(|&j| self.eigenvalues[j]).collect(),
            eigenvectors: perm.iter().map(|&j| self.eigenvectors[j].clone()).collect(),
            ordering,
        }
    }
}

/// Lexicographic (real, imaginary) total order on complex numbers.
pub fn cmp_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Copy of `values` sorted by real part, then imaginary part.
pub fn sorted_re_im(values: &[Complex64]) -> Vec<Complex64> {
    let mut v = values.to_vec();
    v.sort_by(cmp_re_im);
    v
}

/// Default clustering tolerance `1e-8 * max(1, rho)`.
pub fn default_degeneracy_tol(spectral_radius: f64) -> f64 {
    DEFAULT_DEGENERACY_SCALE * spectral_radius.max(1.0)
}

/// Eigenpairs sorted by real part then imaginary part.
pub fn eig_dense(a: &CMatrix) -> Result<Spectrum, LinalgError> {
    let spec = eig_dense_unsorted(a)?;
    let mut perm: Vec<usize> = (0..spec.len()).collect();
    perm.sort_by(|&i, &j| cmp_re_im(&spec.eigenvalues[i], &spec.eigenvalues[j]));
    Ok(spec.permuted(&perm, SpectrumOrdering::ByRealPart))
}

/// Eigenpairs in the order they come off the Schur diagonal.
pub fn eig_dense_unsorted(a: &CMatrix) -> Result<Spectrum, LinalgError> {
    let n = a.dim();
    let (q, t) = if a.is_upper_triangular() {
        (DMatrix::identity(n, n), a.0.clone())
    } else if a.is_lower_triangular() {
        // index reversal maps lower- to upper-triangular
        let rev = DMatrix::from_fn(n, n, |i, j| {
            if i + j == n - 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let t = DMatrix::from_fn(n, n, |i, j| a.0[(n - 1 - i, n - 1 - j)]);
        (rev, t)
    } else {
        schur_with_balancing(&a.0)?
    };

    let vectors = triangular_eigenvectors(&t);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for (i, x) in vectors.into_iter().enumerate() {
        eigenvalues.push(t[(i, i)]);
        let v: Vec<Complex64> = (0..n)
            .map(|r| (0..=i).map(|c| q[(r, c)] * x[c]).sum())
            .collect();
        eigenvectors.push(normalize_phase(v));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        ordering: SpectrumOrdering::Unsorted,
    })
}

fn schur_with_balancing(
    m: &DMatrix<Complex64>,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), LinalgError> {
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Ok(s.unpack());
    }
    // retry on D^-1 A D; eigenvectors of A are D times those of the balanced matrix
    let d = balancing_scales(m);
    let n = m.nrows();
    let balanced = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * (d[j] / d[i]));
    let s = Schur::try_new(balanced, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(LinalgError::NoConvergence)?;
    let (q, t) = s.unpack();
    let q = DMatrix::from_fn(n, n, |i, j| q[(i, j)] * d[i]);
    Ok((q, t))
}

/// Power-of-two diagonal scaling that roughly equalises row and column norms.
fn balancing_scales(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let mut b = m.clone();
    let mut d = vec![1.0; n];
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..n {
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| b[(j, i)].norm()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)].norm()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / 2.0 {
                cc *= 2.0;
                rr /= 2.0;
                f *= 2.0;
            }
            while cc >= rr * 2.0 {
                cc /= 2.0;
                rr *= 2.0;
                f /= 2.0;
            }
            if (c + r) * 0.95 > cc + rr {
                changed = true;
                d[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// Right eigenvectors of an upper-triangular matrix by back-substitution.
///
/// A vanishing pivot `T_jj - T_ii` is replaced by `eps * ||T||`, so the
/// vectors of a defective cluster come out nearly parallel. The floor keeps
/// `|d|^2` inside the normal range, since complex division squares it.
fn triangular_eigenvectors(t: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    let n = t.nrows();
    let norm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let smin = (f64::EPSILON * norm).max(1e-150);
    (0..n)
        .map(|i| {
            let lambda = t[(i, i)];
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[i] = Complex64::new(1.0, 0.0);
            for j in (0..i).rev() {
                let s: Complex64 = (j + 1..=i).map(|l| t[(j, l)] * x[l]).sum();
                let mut d = t[(j, j)] - lambda;
                if d.norm() < smin {
                    d = Complex64::new(smin, 0.0);
                }
                x[j] = -s / d;
                let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if big > 1e150 {
                    x.iter_mut().for_each(|z| *z /= big);
                }
            }
            x
        })
        .collect()
}

/// Unit norm, first entry above [`PHASE_PIVOT_THRESHOLD`] real and positive.
pub fn normalize_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v;
    }
    v.iter_mut().for_each(|z| *z /= norm);
    if let Some(p) = v.iter().find(|z| z.norm() > PHASE_PIVOT_THRESHOLD) {
        let phase = p.conj() / p.norm();
        v.iter_mut().for_each(|z| *z *= phase);
        if let Some(p) = v.iter_mut().find(|z| z.norm() > PHASE_PIVOT_THRESHOLD) {
            *p = Complex64::new(p.norm(), 0.0);
        }
    }
    v
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.0.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn check_tol(tol: f64) -> Result<(), LinalgError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(LinalgError::InvalidTolerance(tol))
    }
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(a: &CMatrix, tol: f64) -> Result<usize, LinalgError> {
    check_tol(tol)?;
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > tol * smax).count())
}

/// Dimension of the eigenspace of `omega`, as `n - rank(A - omega I)`.
///
/// `omega` counts as an eigenvalue when `A - omega I` is rank deficient at
/// `tol`; otherwise [`LinalgError::NotAnEigenvalue`] is returned.
pub fn geometric_multiplicity(
    a: &CMatrix,
    omega: Complex64,
    tol: f64,
) -> Result<usize, LinalgError> {
    let n = a.dim();
    let rank = numerical_rank(&a.shifted(omega), tol)?;
    if rank == n {
        return Err(LinalgError::NotAnEigenvalue(omega));
    }
    Ok(n - rank)
}

/// Orthonormal basis of the numerical null space of `A - omega I`.
///
/// Vectors follow the same phase convention as [`Spectrum`] eigenvectors.
pub fn null_vectors(
    a: &CMatrix,
    omega: Complex64,
    tol: f64,
) -> Result<Vec<Vec<Complex64>>, LinalgError> {
    check_tol(tol)?;
    let n = a.dim();
    let shifted = a.shifted(omega).0;
    let svd = SVD::new(shifted, false, true);
    let v_t = svd.v_t.as_ref().ok_or(LinalgError::NoConvergence)?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    Ok(idx
        .into_iter()
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= tol * smax)
        .map(|i| normalize_phase((0..n).map(|c| v_t[(i, c)].conj()).collect()))
        .collect())
}

/// `|<u, v>| / (|u| |v|)`.
pub fn overlap(u: &[Complex64], v: &[Complex64]) -> f64 {
    let dot: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot.norm() / (nu * nv)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn jordan() -> CMatrix {
        CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        let m = DMatrix::from_element(2, 3, c(0.0));
        assert!(matches!(
            CMatrix::new(m),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        ));
        let m = DMatrix::from_element(2, 2, c(f64::NAN));
        assert_eq!(CMatrix::new(m), Err(LinalgError::NonFinite));
        assert_eq!(
            CMatrix::new(DMatrix::zeros(0, 0)),
            Err(LinalgError::Empty)
        );
    }

    #[test]
    fn jordan_block_has_parallel_eigenvectors() {
        let a = jordan();
        let s = eig_dense(&a).unwrap();
        assert_eq!(s.eigenvalues, vec![c(1.0), c(1.0)]);
        assert!(overlap(&s.eigenvectors[0], &s.eigenvectors[1]) > 0.999);
        assert!(s.max_residual(&a) <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn identity_has_two_eigenvectors() {
        let a = CMatrix::identity(2);
        let s = eig_dense(&a).unwrap();
        assert_eq!(s.eigenvalues, vec![c(1.0), c(1.0)]);
        assert!(overlap(&s.eigenvectors[0], &s.eigenvectors[1]) < 1e-12);
        assert_eq!(geometric_multiplicity(&a, c(1.0), 1e-8).unwrap(), 2);
    }

    #[test]
    fn diagonal_is_exact() {
        let a = CMatrix::from_real_rows(&[
            vec![0.0625, 0.0, 0.0],
            vec![0.0, 0.5625, 0.0],
            vec![0.0, 0.0, 1.5625],
        ])
        .unwrap();
        let s = eig_dense(&a).unwrap();
        assert_eq!(s.eigenvalues, vec![c(0.0625), c(0.5625), c(1.5625)]);
    }

    #[test]
    fn general_matrix_residual_and_phase() {
        let a = CMatrix::from_rows(&[
            vec![Complex64::new(0.3, 1.0), c(2.0), Complex64::new(0.0, -1.0)],
            vec![c(-1.0), Complex64::new(0.5, 0.5), c(0.7)],
            vec![Complex64::new(0.2, 0.1), c(0.0), c(-2.0)],
        ])
        .unwrap();
        let s = eig_dense(&a).unwrap();
        assert!(s.max_residual(&a) <= 1e-10 * a.frobenius_norm());
        for v in &s.eigenvectors {
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
            let p = v.iter().find(|z| z.norm() > PHASE_PIVOT_THRESHOLD).unwrap();
            assert!(p.im == 0.0 && p.re > 0.0);
        }
        for w in s.eigenvalues.windows(2) {
            assert_ne!(cmp_re_im(&w[0], &w[1]), std::cmp::Ordering::Greater);
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&CMatrix::zeros(3), 1e-8).unwrap(), 0);
        assert_eq!(numerical_rank(&CMatrix::identity(3), 1e-8).unwrap(), 3);
        let shifted = jordan().shifted(c(1.0));
        assert_eq!(numerical_rank(&shifted, 1e-8).unwrap(), 1);
        assert!(numerical_rank(&shifted, 0.0).is_err());
    }

    #[test]
    fn zero_matrix_has_orthogonal_eigenvectors() {
        let s = eig_dense(&CMatrix::zeros(2)).unwrap();
        let (u, v) = (&s.eigenvectors[0], &s.eigenvectors[1]);
        assert!(u.iter().chain(v).all(|z| z.re.is_finite() && z.im.is_finite()));
        assert_eq!(overlap(u, v), 0.0);
    }

    #[test]
    fn geometric_multiplicity_rejects_non_eigenvalue() {
        assert_eq!(geometric_multiplicity(&jordan(), c(1.0), 1e-8).unwrap(), 1);
        assert!(matches!(
            geometric_multiplicity(&jordan(), c(3.0), 1e-8),
            Err(LinalgError::NotAnEigenvalue(_))
        ));
    }

    #[test]
    fn null_vector_of_jordan_block() {
        let v = null_vectors(&jordan(), c(1.0), 1e-8).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0][0].norm()) < 1e-15);
        assert!((v[0][1] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn block_diag_layout() {
        let b = CMatrix::block_diag(&[jordan(), CMatrix::identity(1)]);
        assert_eq!(b.dim(), 3);
        assert_eq!(b.get(1, 0), c(1.0));
        assert_eq!(b.get(2, 2), c(1.0));
        assert_eq!(b.get(0, 2), c(0.0));
    }

    #[test]
    fn balancing_scales_badly_scaled_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1e6), c(1e-6), c(2.0)]);
        let d = balancing_scales(&m);
        let b = DMatrix::from_fn(2, 2, |i, j| m[(i, j)] * (d[j] / d[i]));
        let ratio = b[(0, 1)].norm() / b[(1, 0)].norm();
        assert!(ratio < 4.0 && ratio > 0.25, "ratio {ratio}");
    }
}
