//! Lorentz cone `L_m = {x : x₀ ≥ 0, x₀² ≥ Σ_{k≥1} x_k²}` in any dimension
//! `m ≥ 2`, and its identification with 2×2 positive semi-definite matrices
//! at `m = 4` (`q(x) = 4·det ρ`).

use nalgebra::{DMatrix, DVector, Vector4};

use crate::error::{Error, Result};
use crate::numkit::SymMat;
use crate::qmap::{Herm2, QubitMap};
use crate::slemma::mu_search;

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzVec(pub DVector<f64>);

impl LorentzVec {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzMap(pub DMatrix<f64>);

impl LorentzMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() < 2 || matrix.nrows() > crate::numkit::MAX_SYM_DIM {
            return Err(Error::DimensionTooLarge {
                dim: matrix.nrows(),
                max: crate::numkit::MAX_SYM_DIM,
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(matrix))
    }

    pub fn from_qubit_map(m: &QubitMap) -> Self {
        Self(DMatrix::from_iterator(4, 4, m.ptm().iter().copied()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `LᵀJL`, the quadratic form `x ↦ q(Lx)`.
    pub fn pullback_form(&self) -> SymMat {
        let j = minkowski(self.dim()).into_inner();
        SymMat::wrap(self.0.transpose() * j * &self.0)
    }
}

/// `J = diag(1, −1, …, −1)`.
pub fn minkowski(m: usize) -> SymMat {
    let mut d = DMatrix::<f64>::zeros(m, m);
    d[(0, 0)] = 1.0;
    for k in 1..m {
        d[(k, k)] = -1.0;
    }
    SymMat::wrap(d)
}

/// `q(x) = x₀² − Σ_{k≥1} x_k²`.
pub fn q_form(x: &LorentzVec) -> f64 {
    let v = &x.0;
    v[0] * v[0] - v.iter().skip(1).map(|t| t * t).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMembership {
    Interior,
    Boundary,
    Outside,
    NegativeCone,
}

/// Cone membership with tolerances relative to `‖x‖` (for `x₀`) and `‖x‖²`
/// (for `q`), so the verdict is constant along rays.
pub fn in_cone(x: &LorentzVec, tol: f64) -> ConeMembership {
    let n2 = x.0.norm_squared();
    let n = n2.sqrt();
    let q = q_form(x);
    let x0 = x.0[0];
    if q > tol * n2 {
        if x0 > tol * n {
            ConeMembership::Interior
        } else {
            ConeMembership::NegativeCone
        }
    } else if q.abs() <= tol * n2 {
        if x0 >= -tol * n {
            ConeMembership::Boundary
        } else {
            ConeMembership::NegativeCone
        }
    } else {
        ConeMembership::Outside
    }
}

pub fn herm_to_lorentz(rho: &Herm2) -> LorentzVec {
    LorentzVec(DVector::from_iterator(4, rho.bloch().iter().copied()))
}

pub fn lorentz_to_herm(x: &LorentzVec) -> Result<Herm2> {
    if x.dim() != 4 {
        return Err(Error::DimensionMismatch(x.dim(), 4));
    }
    Ok(Herm2::from_bloch(Vector4::new(
        x.0[0], x.0[1], x.0[2], x.0[3],
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Image lies in `L_m`.
    Positive,
    /// Image lies in `−L_m`.
    Negative,
    Neither,
}

/// Outcome of the cone-preservation test for a Lorentz map.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeTest {
    /// `max_{μ≥0} λ_min(LᵀJL − μJ)`.
    pub g_star: f64,
    pub mu: f64,
    pub q: SymMat,
    /// `1 + ‖LᵀJL‖_F + μ‖J‖_F`, the scale the tolerance is relative to.
    pub scale: f64,
    pub quadratic_ok: bool,
    pub orientation: Orientation,
}

impl ConeTest {
    /// `L(L_m) ⊆ L_m`.
    pub fn preserves(&self) -> bool {
        self.quadratic_ok && self.orientation == Orientation::Positive
    }

    /// `L(L_m) ⊆ −L_m`.
    pub fn preserves_negative(&self) -> bool {
        self.quadratic_ok && self.orientation == Orientation::Negative
    }
}

/// Decides whether `L` maps the Lorentz cone into itself.
///
/// `q(Lx) ≥ 0` on `{q ≥ 0}` is an S-lemma question with `F = LᵀJL`, `G = J`
/// and Slater point `e₀`. It only places the image in `L_m ∪ −L_m`; the
/// orientation is then read from the first row `r` of `L`, since
/// `(Lx)₀ = ⟨r, x⟩ ≥ 0` on `L_m` iff `r ∈ L_m` (the cone is self-dual).
pub fn cone_preservation(l: &LorentzMap, tol: f64) -> ConeTest {
    let m = l.dim();
    let f = l.pullback_form();
    let j = minkowski(m);
    let search = mu_search(&f, &j).expect("dimensions agree");
    let scale = 1.0 + f.frobenius_norm() + search.mu * j.frobenius_norm();
    let quadratic_ok = search.g_star >= -tol * scale;
    let row = LorentzVec(l.0.row(0).transpose());
    let rn = row.0.norm();
    let tail = row.0.rows(1, m - 1).norm();
    let r0 = row.0[0];
    let slack = tol * rn;
    let orientation = if r0 >= tail - slack {
        Orientation::Positive
    } else if -r0 >= tail - slack {
        Orientation::Negative
    } else {
        Orientation::Neither
    };
    ConeTest {
        g_star: search.g_star,
        mu: search.mu,
        q: search.q,
        scale,
        quadratic_ok,
        orientation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_form_examples() {
        assert_eq!(q_form(&LorentzVec::new(vec![1.0, 0.0, 0.0, 0.0])), 1.0);
        assert_eq!(q_form(&LorentzVec::new(vec![1.0, 0.0, 0.0, 1.0])), 0.0);
        let x = herm_to_lorentz(&Herm2::identity());
        assert_eq!(q_form(&x), 4.0 * Herm2::identity().det());
        assert_eq!(q_form(&x), 4.0);
    }

    #[test]
    fn membership_examples() {
        let t = 1e-10;
        assert_eq!(
            in_cone(&LorentzVec::new(vec![1.0, 0.0, 0.0, 0.0]), t),
            ConeMembership::Interior
        );
        assert_eq!(
            in_cone(&LorentzVec::new(vec![1.0, 0.0, 0.0, 1.0]), t),
            ConeMembership::Boundary
        );
        assert_eq!(
            in_cone(&LorentzVec::new(vec![-1.0, 0.0, 0.0, 0.0]), t),
            ConeMembership::NegativeCone
        );
        assert_eq!(
            in_cone(&LorentzVec::new(vec![0.5, 1.0, 0.0, 0.0]), t),
            ConeMembership::Outside
        );
    }

    #[test]
    fn herm_identification() {
        assert_eq!(
            herm_to_lorentz(&Herm2::identity()).0.as_slice(),
            &[2.0, 0.0, 0.0, 0.0]
        );
        let ket0 = Herm2::pure([0.0, 0.0, 1.0]);
        let x = herm_to_lorentz(&ket0);
        assert_eq!(x.0.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(q_form(&x), 0.0);
        assert_eq!(
            herm_to_lorentz(&Herm2::maximally_mixed()).0.as_slice(),
            &[1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(lorentz_to_herm(&x).unwrap(), ket0);
    }

    #[test]
    fn degenerate_rank_one_needs_orientation() {
        // x ↦ x₁·u with u on the boundary: q(Lx) = 0 everywhere, but the
        // image covers both nappes.
        let mut l = DMatrix::zeros(4, 4);
        l[(0, 1)] = 1.0;
        l[(3, 1)] = 1.0;
        let test = cone_preservation(&LorentzMap::new(l).unwrap(), 1e-10);
        assert!(test.quadratic_ok);
        assert!(!test.preserves());
        assert!(!test.preserves_negative());
    }

    #[test]
    fn identity_and_negation() {
        let id = LorentzMap::new(DMatrix::identity(5, 5)).unwrap();
        assert!(cone_preservation(&id, 1e-10).preserves());
        let neg = LorentzMap::new(-DMatrix::identity(5, 5)).unwrap();
        assert!(cone_preservation(&neg, 1e-10).preserves_negative());
    }
}
