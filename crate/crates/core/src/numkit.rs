//! Dense kernels for small real symmetric and complex Hermitian matrices.
//!
//! Everything here works at dimension ≤ 8 (real) or ≤ 4 (complex), so the
//! eigensolvers are cyclic Jacobi sweeps: unconditionally convergent and
//! bit-for-bit deterministic for identical input.

use nalgebra::{Complex, DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest supported dimension for [`SymMat`].
pub const MAX_SYM_DIM: usize = 8;
/// Largest supported dimension for [`HermMat`].
pub const MAX_HERM_DIM: usize = 4;

const MAX_SWEEPS: usize = 64;

/// Real symmetric matrix of dimension ≤ 8.
///
/// Construction symmetrizes the input, so `s[(i, j)] == s[(j, i)]` holds
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() > MAX_SYM_DIM {
            return Err(Error::DimensionTooLarge {
                dim: m.nrows(),
                max: MAX_SYM_DIM,
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::wrap(m))
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(entries.len(), dim * dim));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Symmetrizes without dimension checks; callers guarantee a square input.
    pub(crate) fn wrap(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        Self(out)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &SymMat, b: f64) -> SymMat {
        assert_eq!(self.dim(), other.dim(), "SymMat dimension mismatch");
        Self::wrap(&self.0 * a + &other.0 * b)
    }

    /// Quadratic form `⟨x|S|x⟩`.
    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.0 * x))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sym_eig(self).eigenvalues[0]
    }
}

/// Complex Hermitian matrix of dimension ≤ 4.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMat(DMatrix<C64>);

impl HermMat {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() > MAX_HERM_DIM {
            return Err(Error::DimensionTooLarge {
                dim: m.nrows(),
                max: MAX_HERM_DIM,
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::wrap(m))
    }

    /// Hermitizes without dimension checks.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Self(out)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(DMatrix::from_diagonal(&DVector::from_vec(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        herm_eig(self).eigenvalues[0]
    }
}

/// Spectral decomposition: eigenvalues ascending, eigenvectors as orthonormal
/// columns in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult<T: nalgebra::Scalar> {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<T>,
}

impl<T: nalgebra::Scalar + Copy> EigResult<T> {
    pub fn eigenvector(&self, i: usize) -> DVector<T> {
        self.eigenvectors.column(i).into_owned()
    }
}

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi.
pub fn sym_eig(s: &SymMat) -> EigResult<f64> {
    let mut a = s.0.clone();
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm();
    let mut converged = n <= 1 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let g = 100.0 * apq.abs();
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        let off: f64 = off_diagonal_norm(a.iter().copied(), n, |x| x * x);
        assert!(
            off <= 1e-13 * scale,
            "internal defect: symmetric Jacobi did not converge (off-diagonal {off:e})"
        );
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    sort_spectrum(diag, v)
}

/// Full eigendecomposition of a complex Hermitian matrix by complex Jacobi
/// rotations (a phase alignment followed by a real plane rotation).
pub fn herm_eig(h: &HermMat) -> EigResult<C64> {
    let mut a = h.0.clone();
    let n = a.nrows();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = h.frobenius_norm();
    let mut converged = n <= 1 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = a[(p, q)];
                let r = hpq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let g = 100.0 * r;
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                // e^{-iφ} with φ = arg h_pq
                let phase = hpq.conj() / r;
                let theta = 0.5 * (aqq - app) / r;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                // W = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]] on the (p, q) plane.
                let wqp = -phase * sn;
                let wqq = phase * c;
                for k in 0..n {
                    let hkp = a[(k, p)];
                    let hkq = a[(k, q)];
                    a[(k, p)] = hkp * c + hkq * wqp;
                    a[(k, q)] = hkp * sn + hkq * wqq;
                }
                for k in 0..n {
                    let hpk = a[(p, k)];
                    let hqk = a[(q, k)];
                    a[(p, k)] = hpk * c + hqk * wqp.conj();
                    a[(q, k)] = hpk * sn + hqk * wqq.conj();
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * wqp;
                    v[(k, q)] = vkp * sn + vkq * wqq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        let off = off_diagonal_norm(a.iter().copied(), n, |z: C64| z.norm_sqr());
        assert!(
            off <= 1e-13 * scale,
            "internal defect: Hermitian Jacobi did not converge (off-diagonal {off:e})"
        );
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    sort_spectrum(diag, v)
}

fn off_diagonal_norm<T>(entries: impl Iterator<Item = T>, n: usize, sq: impl Fn(T) -> f64) -> f64 {
    // nalgebra iterates column-major
    entries
        .enumerate()
        .filter(|(k, _)| k % n != k / n)
        .map(|(_, x)| sq(x))
        .sum::<f64>()
        .sqrt()
}

fn sort_spectrum<T: nalgebra::Scalar + Copy>(
    values: Vec<f64>,
    vectors: DMatrix<T>,
) -> EigResult<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, order[c])]
    });
    EigResult {
        eigenvalues,
        eigenvectors,
    }
}

/// Square root, inverse square root and inverse of a positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PdFunctions {
    pub sqrt: HermMat,
    pub inv_sqrt: HermMat,
    pub inv: HermMat,
}

/// Relative floor below which a matrix does not count as positive definite.
pub fn pd_floor(p: &HermMat) -> f64 {
    1e-12 * (1.0 + p.frobenius_norm())
}

pub fn pd_functions(p: &HermMat) -> Result<PdFunctions> {
    let eig = herm_eig(p);
    let floor = pd_floor(p);
    let min = eig.eigenvalues[0];
    if min <= floor {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            floor,
        });
    }
    Ok(PdFunctions {
        sqrt: spectral_apply(&eig, f64::sqrt),
        inv_sqrt: spectral_apply(&eig, |x| 1.0 / x.sqrt()),
        inv: spectral_apply(&eig, |x| 1.0 / x),
    })
}

/// `V·diag(f(λ))·V†` for a Hermitian spectral decomposition.
pub fn spectral_apply(eig: &EigResult<C64>, f: impl Fn(f64) -> f64) -> HermMat {
    let v = &eig.eigenvectors;
    let n = v.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let fl = f(lambda);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[(i, k)] * v[(j, k)].conj() * fl;
            }
        }
    }
    HermMat::wrap(out)
}

/// Proper singular value decomposition of a 3×3 real matrix:
/// `m = u·diag(s)·vᵀ` with `u, v ∈ SO(3)` and `s₀ ≥ s₁ ≥ |s₂|`.
/// A negative determinant shows up as `s₂ < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd3 {
    pub u: Matrix3<f64>,
    pub s: Vector3<f64>,
    pub v: Matrix3<f64>,
}

impl Svd3 {
    pub fn reconstruct(&self) -> Matrix3<f64> {
        self.u * Matrix3::from_diagonal(&self.s) * self.v.transpose()
    }
}

pub fn svd3(m: &Matrix3<f64>) -> Svd3 {
    let mtm = m.transpose() * m;
    let eig = sym_eig(&SymMat::wrap(DMatrix::from_iterator(
        3,
        3,
        mtm.iter().copied(),
    )));
    // descending, stable on ties
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut v = Matrix3::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    let mut b = m * v;

    // One-sided Jacobi polish so the columns of b = m·v are orthogonal to
    // working precision; eigenvectors of mᵀm alone lose accuracy on small
    // singular values.
    for _ in 0..16 {
        let mut rotated = false;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let alpha = b.column(i).norm_squared();
                let beta = b.column(j).norm_squared();
                let gamma = b.column(i).dot(&b.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut b, &mut v] {
                    for r in 0..3 {
                        let xi = mat[(r, i)];
                        let xj = mat[(r, j)];
                        mat[(r, i)] = c * xi - s * xj;
                        mat[(r, j)] = s * xi + c * xj;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms = [b.column(0).norm(), b.column(1).norm(), b.column(2).norm()];
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut v = Matrix3::from_fn(|r, c| v[(r, order[c])]);
    let mut b = Matrix3::from_fn(|r, c| b[(r, order[c])]);
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
        b.column_mut(2).neg_mut();
    }

    let b0: Vector3<f64> = b.column(0).into_owned();
    let b1: Vector3<f64> = b.column(1).into_owned();
    let b2: Vector3<f64> = b.column(2).into_owned();
    let u0 = if b0.norm() > 0.0 {
        b0.normalize()
    } else {
        Vector3::x()
    };
    let mut w = b1;
    for _ in 0..2 {
        w -= u0 * u0.dot(&w);
    }
    let u1 = if w.norm() > 0.0 && w.norm() > 1e-8 * b1.norm() {
        w.normalize()
    } else {
        orthogonal_unit(&u0)
    };
    let u2 = u0.cross(&u1);
    let u = Matrix3::from_columns(&[u0, u1, u2]);
    let s = Vector3::new(u0.dot(&b0), u1.dot(&b1), u2.dot(&b2));
    Svd3 { u, s, v }
}

/// A deterministic unit vector orthogonal to the unit vector `a`.
fn orthogonal_unit(a: &Vector3<f64>) -> Vector3<f64> {
    let axis = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vector3::x()
    } else if a.y.abs() <= a.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let mut w = axis - a * a.dot(&axis);
    w -= a * a.dot(&w);
    w.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn identity_and_diagonal_spectra() {
        let e = sym_eig(&SymMat::identity(3));
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let e = sym_eig(&SymMat::from_diagonal(&[3.0, 1.0, 2.0]).unwrap());
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut st = 7u64;
        for n in 1..=8 {
            let m = DMatrix::from_fn(n, n, |_, _| lcg(&mut st));
            let s = SymMat::new(&m + m.transpose()).unwrap();
            let e = sym_eig(&s);
            let lam = DMatrix::from_diagonal(&DVector::from_vec(e.eigenvalues.clone()));
            let rec = &e.eigenvectors * lam * e.eigenvectors.transpose();
            assert!((rec - s.as_matrix()).norm() <= 1e-12 * (1.0 + s.frobenius_norm()));
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn hermitian_closed_forms() {
        let e = herm_eig(&HermMat::identity(2));
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        let e = herm_eig(&HermMat::from_real_diagonal(&[1.0, -1.0]).unwrap());
        assert_eq!(e.eigenvalues, vec![-1.0, 1.0]);
        // ½(I + σ_y): trace 1, determinant 0
        let h = HermMat::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.0, -0.5),
                C64::new(0.0, 0.5),
                C64::new(0.5, 0.0),
            ],
        ))
        .unwrap();
        let e = herm_eig(&h);
        assert!(e.eigenvalues[0].abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pd_functions_on_diagonals() {
        let f = pd_functions(&HermMat::identity(2)).unwrap();
        assert_eq!(f.sqrt, HermMat::identity(2));
        assert_eq!(f.inv, HermMat::identity(2));
        let f = pd_functions(&HermMat::from_real_diagonal(&[4.0, 1.0]).unwrap()).unwrap();
        let expect = |d: &[f64]| HermMat::from_real_diagonal(d).unwrap();
        assert_eq!(f.sqrt, expect(&[2.0, 1.0]));
        assert_eq!(f.inv_sqrt, expect(&[0.5, 1.0]));
        assert_eq!(f.inv, expect(&[0.25, 1.0]));
        let err = pd_functions(&expect(&[1.0, 1e-14])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn svd3_sign_convention() {
        let d = svd3(&Matrix3::identity());
        assert_eq!(d.s, Vector3::new(1.0, 1.0, 1.0));
        assert_eq!(d.u, Matrix3::identity());
        assert_eq!(d.v, Matrix3::identity());

        let m = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        let d = svd3(&m);
        assert_eq!(d.s, Vector3::new(1.0, 1.0, -1.0));
        assert!((d.u.determinant() - 1.0).abs() < 1e-15);
        assert!((d.v.determinant() - 1.0).abs() < 1e-15);
        assert!((d.reconstruct() - m).norm() < 1e-15);
    }

    #[test]
    fn svd3_rank_deficient() {
        let d = svd3(&Matrix3::zeros());
        assert_eq!(d.s, Vector3::zeros());
        assert!((d.u.determinant() - 1.0).abs() < 1e-15);
        let m = Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 6.0, -1.0, -2.0, -3.0);
        let d = svd3(&m);
        assert!((d.reconstruct() - m).norm() < 1e-13);
        assert!(d.s[1].abs() < 1e-12 && d.s[2].abs() < 1e-12);
    }
}
