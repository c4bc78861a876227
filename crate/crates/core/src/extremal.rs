//! Extreme rays of the cone of Lorentz-cone preserving maps.
//!
//! A map `L` with `L(L_m) ⊆ L_m` satisfies `LᵀJL = μJ + Q` with `μ ≥ 0` and
//! `Q ⪰ 0`. If `Q = 0` the map is a scaled cone automorphism; if `L` has rank
//! one it is `|u⟩⟨v|` and extreme exactly when `u, v` lie on the boundary.
//! Otherwise a rank-one slice of `Q` yields an explicit perturbation `Δ` with
//! `L ± Δ` both cone preserving.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::lorentz::{
    cone_preservation, in_cone, minkowski, ConeMembership, LorentzMap, LorentzVec,
};
use crate::numkit::{herm_eig, sym_eig, SymMat, C64};
use crate::qmap::QubitMap;

/// Tolerance of the cone-preservation tests used here.
pub const CONE_TOL: f64 = 1e-10;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-9;
/// Relative size of `Q` below which the map counts as an automorphism.
pub const AUTOMORPHISM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ExtremalVerdict {
    /// `LᵀJL = μJ`: a positive multiple of an orthochronous Lorentz map.
    Automorphism { mu: f64 },
    /// `L = |u⟩⟨v|` with `u, v` on the boundary of the cone.
    RankOneExtreme { u: LorentzVec, v: LorentzVec },
    /// `L ± eps·Δ̂` both preserve the cone, where `delta = eps·Δ̂`.
    NotExtreme { delta: LorentzMap, eps: f64 },
    /// `L` does not map the cone into itself.
    NotInCone,
}

fn preserves(l: &DMatrix<f64>) -> bool {
    cone_preservation(&LorentzMap(l.clone()), CONE_TOL).preserves()
}

/// Numerical rank and the thin SVD of `L`.
fn rank_svd(l: &DMatrix<f64>) -> (usize, nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>) {
    let svd = l.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * smax && s > 0.0)
        .count();
    (rank, svd)
}

/// Halves `eps` from `eps0` until `L ± eps·D` both preserve the cone.
fn line_search(l: &DMatrix<f64>, d: &DMatrix<f64>, eps0: f64) -> Result<f64> {
    let floor = 1e-12 * l.norm().max(f64::MIN_POSITIVE) / d.norm().max(f64::MIN_POSITIVE);
    let mut eps = eps0;
    while eps >= floor {
        if preserves(&(l + d * eps)) && preserves(&(l - d * eps)) {
            return Ok(eps);
        }
        eps *= 0.5;
    }
    Err(Error::PerturbationFailure { floor })
}

/// A unit vector orthogonal to `x` (the coordinate axis least aligned with
/// it, orthogonalized).
fn orthogonal_to(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let xn = x.normalize();
    let axis = (0..n)
        .min_by(|&i, &j| xn[i].abs().total_cmp(&xn[j].abs()))
        .expect("nonempty");
    let mut w = DVector::zeros(n);
    w[axis] = 1.0;
    for _ in 0..2 {
        w -= &xn * xn.dot(&w);
    }
    w.normalize()
}

/// Classifies a Lorentz-cone preserving map.
pub fn classify(l: &LorentzMap) -> Result<ExtremalVerdict> {
    let test = cone_preservation(l, CONE_TOL);
    if !test.preserves() {
        return Ok(ExtremalVerdict::NotInCone);
    }
    let mat = l.matrix();
    let (rank, svd) = rank_svd(mat);
    if rank == 0 {
        return Err(Error::RankDeficientInput { rank });
    }
    if rank == 1 {
        return classify_rank_one(mat, &svd);
    }
    let scale = mat.norm_squared();
    if test.q.frobenius_norm() <= AUTOMORPHISM_TOL * scale && test.mu > 0.0 {
        return Ok(ExtremalVerdict::Automorphism { mu: test.mu });
    }
    let (delta, eps) = build_perturbation(l, test.mu, &test.q)?;
    Ok(ExtremalVerdict::NotExtreme { delta, eps })
}

fn classify_rank_one(
    mat: &DMatrix<f64>,
    svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
) -> Result<ExtremalVerdict> {
    let (idx, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let u_full = svd.u.as_ref().expect("requested");
    let vt_full = svd.v_t.as_ref().expect("requested");
    let mut u: DVector<f64> = u_full.column(idx) * sigma.sqrt();
    let mut v: DVector<f64> = vt_full.row(idx).transpose() * sigma.sqrt();
    if u[0] < 0.0 {
        u = -u;
        v = -v;
    }
    let (u, v) = (LorentzVec(u), LorentzVec(v));
    let u_state = in_cone(&u, RANK_TOL);
    let v_state = in_cone(&v, RANK_TOL);
    if u_state == ConeMembership::Boundary && v_state == ConeMembership::Boundary {
        return Ok(ExtremalVerdict::RankOneExtreme { u, v });
    }
    // One factor is interior: tilt it in a direction it can absorb.
    let d = if v_state == ConeMembership::Interior {
        &u.0 * orthogonal_to(&v.0).transpose() * v.0.norm()
    } else {
        orthogonal_to(&u.0) * v.0.transpose() * u.0.norm()
    };
    let eps = line_search(mat, &d, 0.5)?;
    Ok(ExtremalVerdict::NotExtreme {
        delta: LorentzMap(d * eps),
        eps,
    })
}

/// Largest `s` such that `1 ± 2sδ + s²a ≥ 0` for both signs.
fn window(delta: f64, a: f64) -> f64 {
    if delta == 0.0 {
        if a >= 0.0 {
            f64::INFINITY
        } else {
            1.0 / (-a).sqrt()
        }
    } else if a > 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 + (1.0 - a).sqrt())
    }
}

/// Perturbation `Δ = eps·|u⟩⟨v|` with `L ± Δ` cone preserving, built from
/// the decomposition `LᵀJL = μJ + Q`.
///
/// `v = √λ₁·e₁` is the top eigenpair of `Q`, so `Q − |v⟩⟨v| ⪰ 0`. `u` solves
/// `LᵀJu = δv` with `δ = 1` when `LᵀJ` is invertible and `δ = 0` otherwise
/// (then `Ju` spans part of the left null space of `L`). Along `L + s|u⟩⟨v|`
/// the pullback form is `μJ + (Q − |v⟩⟨v|) + (1 + 2sδ + s²⟨u|J|u⟩)|v⟩⟨v|`,
/// so `μ` itself does not enter the construction.
pub fn build_perturbation(l: &LorentzMap, _mu: f64, q: &SymMat) -> Result<(LorentzMap, f64)> {
    let mat = l.matrix();
    let m = l.dim();
    let (rank, svd) = rank_svd(mat);
    if rank < 2 {
        return Err(Error::RankDeficientInput { rank });
    }
    if q.frobenius_norm() <= 1e-14 * (1.0 + mat.norm_squared()) {
        return Err(Error::QZero);
    }
    let eig = sym_eig(q);
    let lambda1 = eig.eigenvalues[m - 1].max(0.0);
    let v = eig.eigenvector(m - 1) * lambda1.sqrt();
    let j = minkowski(m).into_inner();

    let (u, delta) = if rank == m {
        let ltj = mat.transpose() * &j;
        let u = ltj
            .lu()
            .solve(&v)
            .ok_or(Error::RankDeficientInput { rank })?;
        (u, 1.0)
    } else {
        let smin = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("nonempty");
        let left = svd.u.as_ref().expect("requested").column(smin).into_owned();
        (&j * left, 0.0)
    };
    let a = u.dot(&(&j * &u));
    let d = &u * v.transpose();
    let s_max = window(delta, a);
    let cap = mat.norm() / d.norm().max(f64::MIN_POSITIVE);
    let eps0 = (0.5 * s_max).min(cap);
    let eps = line_search(mat, &d, eps0)?;
    Ok((LorentzMap(d * eps), eps))
}

fn top_ratio(eigenvalues: &[f64]) -> f64 {
    let n = eigenvalues.len();
    let top = eigenvalues[n - 1];
    if top <= 0.0 {
        return f64::INFINITY;
    }
    eigenvalues[n - 2].abs().max(eigenvalues[0].abs()) / top
}

/// `V` with `Choi = |w⟩⟨w|`, `w[2i + k] = V[k][i]`, phase fixed so the
/// largest entry is real and positive.
fn unflatten(choi: &crate::numkit::HermMat) -> (Matrix2<C64>, f64) {
    let eig = herm_eig(choi);
    let ratio = top_ratio(&eig.eigenvalues);
    let lambda = eig.eigenvalues[3].max(0.0);
    let w = eig.eigenvector(3);
    let lead = (0..4).fold(0, |b, i| if w[i].norm() > w[b].norm() { i } else { b });
    let phase = if w[lead].norm() > 0.0 {
        w[lead].conj() / w[lead].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let s = C64::new(lambda.sqrt(), 0.0) * phase;
    (Matrix2::new(w[0] * s, w[2] * s, w[1] * s, w[3] * s), ratio)
}

/// Writes a qubit automorphism as `ρ ↦ VρV†` (`is_co = false`) or
/// `ρ ↦ VρᵀV†` (`is_co = true`).
pub fn kadison_extract(m: &QubitMap) -> Result<(Matrix2<C64>, bool)> {
    match classify(&LorentzMap::from_qubit_map(m))? {
        ExtremalVerdict::Automorphism { .. } => {}
        _ => return Err(Error::NotAutomorphism),
    }
    let tol = 1e-9 * (1.0 + m.ptm().norm());
    let (v, ratio) = unflatten(&m.choi());
    if ratio <= RANK_TOL {
        if let Ok(phi) = QubitMap::conjugation(&v) {
            if phi.distance(m) <= tol {
                return Ok((v, false));
            }
        }
    }
    let mt = m.compose(&QubitMap::transpose());
    let (v_t, ratio_t) = unflatten(&mt.choi());
    if ratio_t <= RANK_TOL {
        if let Ok(phi) = QubitMap::conjugation(&v_t) {
            if phi.compose(&QubitMap::transpose()).distance(m) <= tol {
                return Ok((v_t, true));
            }
        }
    }
    Err(Error::ExtractionFailure { ratio, ratio_t })
}
