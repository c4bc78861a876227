//! Decomposition of positive qubit maps into at most four conjugations and
//! transposed conjugations.
//!
//! A bistochastic positive map acts on the Bloch ball through a 3×3 block `R`
//! of operator norm at most one. With the proper SVD `R = U·diag(s)·Vᵀ` the
//! vector `s` lies in the cube `[−1, 1]³`, hence is a convex combination of at
//! most four vertices `ε_k`, and `R = Σ λ_k U·D_{ε_k}·Vᵀ` is a convex
//! combination of orthogonal matrices. Proper rotations lift to unitary
//! conjugations; improper ones are a rotation composed with the transpose.
//! General interior maps are first scaled to bistochastic form.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::numkit::{svd3, C64};
use crate::positivity::{self, PositivityCertificate, PositivityOptions};
use crate::qmap::{Decomposition, Herm2, QubitMap};
use crate::scaling::{self, ScalingOptions, ScalingResult};

/// A point of the cube `[−1, 1]³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubePoint {
    pub s: [f64; 3],
}

impl CubePoint {
    /// Clamps overshoot beyond `±1` (up to `1e−12`) back onto the cube.
    pub fn new(s: [f64; 3]) -> Self {
        Self {
            s: s.map(|x| x.clamp(-1.0, 1.0)),
        }
    }
}

/// A vertex of the cube with its convex weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexWeight {
    pub weight: f64,
    pub signs: [i8; 3],
}

const VERTEX_WEIGHT_FLOOR: f64 = 1e-14;

fn vertex(index: usize) -> [i8; 3] {
    std::array::from_fn(|i| if index >> i & 1 == 0 { 1 } else { -1 })
}

/// Columns `(1, ε)` of the affine system for the given support.
fn affine_matrix(support: &[[i8; 3]]) -> DMatrix<f64> {
    DMatrix::from_fn(4, support.len(), |r, c| {
        if r == 0 {
            1.0
        } else {
            support[c][r - 1] as f64
        }
    })
}

/// Unit vector `c` with `M·c ≈ 0`, if the columns of `M` are dependent.
fn dependence(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let k = m.ncols();
    let rows = k.max(m.nrows());
    let mut padded = DMatrix::zeros(rows, k);
    padded.view_mut((0, 0), (m.nrows(), k)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (idx, &smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    (smin <= 1e-10).then(|| vt.row(idx).transpose())
}

/// Writes `s` as a convex combination of at most four cube vertices.
///
/// Starts from the product weights `Π_i (1 + ε_i s_i)/2` over all eight
/// vertices and removes support points along affine dependences until the
/// support is affinely independent, then re-solves the weights exactly.
pub fn caratheodory_cube(point: CubePoint) -> Vec<VertexWeight> {
    let s = point.s;
    let mut support: Vec<[i8; 3]> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for idx in 0..8 {
        let e = vertex(idx);
        let w: f64 = (0..3).map(|i| 0.5 * (1.0 + e[i] as f64 * s[i])).product();
        if w > 0.0 {
            support.push(e);
            weights.push(w);
        }
    }

    while support.len() > 1 {
        let Some(mut c) = dependence(&affine_matrix(&support)) else {
            break;
        };
        if c.iter().all(|&x| x <= 0.0) {
            c = -c;
        }
        let mut theta = f64::INFINITY;
        let mut hit = 0;
        for (j, (&cj, &wj)) in c.iter().zip(&weights).enumerate() {
            if cj > 0.0 && wj / cj < theta {
                theta = wj / cj;
                hit = j;
            }
        }
        for (w, cj) in weights.iter_mut().zip(c.iter()) {
            *w -= theta * cj;
        }
        weights[hit] = 0.0;
        let keep: Vec<bool> = weights.iter().map(|&w| w > VERTEX_WEIGHT_FLOOR).collect();
        let mut k = keep.iter();
        support.retain(|_| *k.next().unwrap());
        weights.retain(|&w| w > VERTEX_WEIGHT_FLOOR);
    }

    // The support is now affinely independent: solve for the weights directly.
    let m = affine_matrix(&support);
    let rhs = DVector::from_vec(vec![1.0, s[0], s[1], s[2]]);
    let normal = m.transpose() * &m;
    if let Some(sol) = normal.lu().solve(&(m.transpose() * &rhs)) {
        let old_err = (&m * DVector::from_vec(weights.clone()) - &rhs).norm();
        let new_err = (&m * &sol - &rhs).norm();
        if sol.iter().all(|&w| w > 0.0) && new_err <= old_err {
            weights = sol.iter().copied().collect();
        }
    }
    support
        .into_iter()
        .zip(weights)
        .filter(|(_, w)| *w >= VERTEX_WEIGHT_FLOOR)
        .map(|(signs, weight)| VertexWeight { weight, signs })
        .collect()
}

/// The unit quaternion `(w, x, y, z)` of a rotation, by Shepperd's method.
fn rotation_quaternion(r: &Matrix3<f64>) -> [f64; 4] {
    let tr = r.trace();
    let q = if tr >= r[(0, 0)] && tr >= r[(1, 1)] && tr >= r[(2, 2)] {
        let w = 0.5 * (1.0 + tr).max(0.0).sqrt();
        let f = 0.25 / w;
        [
            w,
            (r[(2, 1)] - r[(1, 2)]) * f,
            (r[(0, 2)] - r[(2, 0)]) * f,
            (r[(1, 0)] - r[(0, 1)]) * f,
        ]
    } else if r[(0, 0)] >= r[(1, 1)] && r[(0, 0)] >= r[(2, 2)] {
        let x = 0.5 * (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).max(0.0).sqrt();
        let f = 0.25 / x;
        [
            (r[(2, 1)] - r[(1, 2)]) * f,
            x,
            (r[(0, 1)] + r[(1, 0)]) * f,
            (r[(0, 2)] + r[(2, 0)]) * f,
        ]
    } else if r[(1, 1)] >= r[(2, 2)] {
        let y = 0.5 * (1.0 - r[(0, 0)] + r[(1, 1)] - r[(2, 2)]).max(0.0).sqrt();
        let f = 0.25 / y;
        [
            (r[(0, 2)] - r[(2, 0)]) * f,
            (r[(0, 1)] + r[(1, 0)]) * f,
            y,
            (r[(1, 2)] + r[(2, 1)]) * f,
        ]
    } else {
        let z = 0.5 * (1.0 - r[(0, 0)] - r[(1, 1)] + r[(2, 2)]).max(0.0).sqrt();
        let f = 0.25 / z;
        [
            (r[(1, 0)] - r[(0, 1)]) * f,
            (r[(0, 2)] + r[(2, 0)]) * f,
            (r[(1, 2)] + r[(2, 1)]) * f,
            z,
        ]
    };
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut q = q.map(|v| v / n);
    let lead = (0..4).fold(
        0,
        |best, i| if q[i].abs() > q[best].abs() { i } else { best },
    );
    if q[lead] < 0.0 {
        q = q.map(|v| -v);
    }
    q
}

/// `U ∈ SU(2)` with `½ tr(σ_i U σ_j U†) = R_ij`. Of the two lifts `±U` the
/// one whose largest-magnitude quaternion component is positive is returned.
pub fn spinor_lift(r: &Matrix3<f64>) -> Result<Matrix2<C64>> {
    let defect = (r.transpose() * r - Matrix3::identity()).norm();
    let det = r.determinant();
    if defect > 1e-8 || det <= 0.0 {
        return Err(Error::NotRotation { defect, det });
    }
    let [w, x, y, z] = rotation_quaternion(r);
    // U = w·Id − i(xσ_x + yσ_y + zσ_z)
    Ok(Matrix2::new(
        C64::new(w, -z),
        C64::new(-y, -x),
        C64::new(y, -x),
        C64::new(w, z),
    ))
}

/// Bloch rotation `R_ij = ½ tr(σ_i U σ_j U†)` of a 2×2 unitary.
pub fn rotation_of(u: &Matrix2<C64>) -> Matrix3<f64> {
    QubitMap::conjugation(u)
        .map(|m| m.bloch_block())
        .unwrap_or_else(|_| Matrix3::zeros())
}

/// One orthogonal matrix of a convex combination.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationTerm {
    pub weight: f64,
    pub o: Matrix3<f64>,
    pub det_sign: i8,
}

/// The Bloch reflection induced by the transpose.
fn transpose_reflection() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))
}

/// Writes the Bloch block of a bistochastic positive map as a convex
/// combination of at most four orthogonal matrices.
pub fn bistochastic_decompose(m: &QubitMap) -> Result<Vec<RotationTerm>> {
    let report_tol = PositivityOptions::default().tol_structure;
    let l = m.ptm();
    let unital = (Matrix4::identity().column(0) - l.column(0)).norm();
    let trace = (Matrix4::identity().row(0) - l.row(0)).norm();
    if unital > report_tol || trace > report_tol {
        return Err(Error::NotBistochastic { unital, trace });
    }
    let r = m.bloch_block();
    let svd = svd3(&r);
    if svd.s[0] > 1.0 + 1e-8 {
        return Err(Error::NormExceeded { norm: svd.s[0] });
    }
    let verts = caratheodory_cube(CubePoint::new([svd.s[0], svd.s[1], svd.s[2]]));
    if verts.len() == 1 {
        // s is a vertex: R itself is orthogonal, and using it directly keeps
        // exact inputs such as the identity exact.
        let v = verts[0];
        return Ok(vec![RotationTerm {
            weight: 1.0,
            o: r,
            det_sign: v.signs.iter().product(),
        }]);
    }
    Ok(verts
        .into_iter()
        .map(|v| {
            let d = Matrix3::from_diagonal(&Vector3::new(
                v.signs[0] as f64,
                v.signs[1] as f64,
                v.signs[2] as f64,
            ));
            RotationTerm {
                weight: v.weight,
                o: svd.u * d * svd.v.transpose(),
                det_sign: v.signs.iter().product(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    /// Bound on the verified reconstruction residual.
    pub tol: f64,
    pub scaling: ScalingOptions,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            scaling: ScalingOptions::default(),
        }
    }
}

/// How a decomposition was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecompositionPath {
    /// The input was already bistochastic; no scaling was needed.
    Bistochastic,
    /// Scaled to bistochastic form first.
    Interior,
    /// Decomposition of `(1 − ε)Φ + εΩ`.
    Regularized { eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeOutcome {
    pub decomposition: Decomposition,
    /// `‖ptm(from_kraus(d)) − ptm(m)‖_F` against the input map.
    pub residual: f64,
    pub path: DecompositionPath,
    pub scaling: Option<ScalingResult>,
}

/// `‖ptm(from_kraus(d)) − ptm(m)‖_F`; an empty decomposition stands for the
/// zero map.
pub fn verify_decomposition(m: &QubitMap, d: &Decomposition) -> f64 {
    match d.to_map() {
        Ok(rebuilt) => rebuilt.distance(m),
        Err(_) => m.ptm().norm(),
    }
}

fn inverse_matrix(h: &Herm2) -> Result<Matrix2<C64>> {
    h.to_matrix()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: h.min_eigenvalue(),
            floor: 0.0,
        })
}

/// Lifts rotation terms and wraps them between `A⁻¹` and `B⁻¹`.
fn assemble(
    terms: &[RotationTerm],
    a_inv: &Matrix2<C64>,
    b_inv: &Matrix2<C64>,
) -> Result<Decomposition> {
    let mut d = Decomposition::default();
    for t in terms {
        let w = C64::new(t.weight.sqrt(), 0.0);
        if t.det_sign > 0 {
            let u = spinor_lift(&t.o)?;
            d.kraus.push(a_inv * u * b_inv * w);
        } else {
            let u = spinor_lift(&(t.o * transpose_reflection()))?;
            d.co_kraus.push(a_inv * u * b_inv.map(|z| z.conj()) * w);
        }
    }
    Ok(d)
}

fn not_positive(result: &positivity::PositivityResult) -> Error {
    let min_eigenvalue = match &result.certificate {
        PositivityCertificate::ViolatingState { min_eigenvalue, .. } => *min_eigenvalue,
        _ => f64::NAN,
    };
    Error::NotPositive { min_eigenvalue }
}

fn is_bistochastic(m: &QubitMap) -> bool {
    let tol = PositivityOptions::default().tol_structure;
    let l = m.ptm();
    (Matrix4::identity().column(0) - l.column(0)).norm() <= tol
        && (Matrix4::identity().row(0) - l.row(0)).norm() <= tol
}

fn checked(m: &QubitMap, decomposition: Decomposition, tol: f64) -> Result<f64> {
    let residual = verify_decomposition(m, &decomposition);
    if residual.is_nan() || residual > tol {
        return Err(Error::VerificationFailed { residual, tol });
    }
    Ok(residual)
}

/// Scales a map known to be interior and decomposes the scaled map.
fn decompose_scaled(m: &QubitMap, scaled: ScalingResult, tol: f64) -> Result<DecomposeOutcome> {
    let terms = bistochastic_decompose(&scaled.scaled)?;
    let d = assemble(
        &terms,
        &inverse_matrix(&scaled.a)?,
        &inverse_matrix(&scaled.b)?,
    )?;
    let residual = checked(m, d.clone(), tol)?;
    Ok(DecomposeOutcome {
        decomposition: d,
        residual,
        path: DecompositionPath::Interior,
        scaling: Some(scaled),
    })
}

/// Decomposes a positive map that is bistochastic or interior.
///
/// Boundary maps that are not bistochastic are refused with
/// [`Error::BoundaryMap`]; [`decompose_general`] handles them.
pub fn decompose(m: &QubitMap, opts: &DecomposeOptions) -> Result<DecomposeOutcome> {
    let pos = positivity::is_positive(m);
    if !pos.is_positive() {
        return Err(not_positive(&pos));
    }
    if is_bistochastic(m) {
        let terms = bistochastic_decompose(m)?;
        let id = Matrix2::identity();
        let d = assemble(&terms, &id, &id)?;
        let residual = checked(m, d.clone(), opts.tol)?;
        return Ok(DecomposeOutcome {
            decomposition: d,
            residual,
            path: DecompositionPath::Bistochastic,
            scaling: None,
        });
    }
    if !positivity::is_interior(m) {
        return Err(Error::BoundaryMap);
    }
    let scaled = scaling::scale_to_bistochastic(m, &opts.scaling)?;
    decompose_scaled(m, scaled, opts.tol)
}

/// One step of the regularization schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedStep {
    pub eps: f64,
    /// Term count and residual against the original map, or the failure.
    pub outcome: std::result::Result<(usize, f64), Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralOutcome {
    pub decomposition: Decomposition,
    /// Verified residual against the original map.
    pub residual: f64,
    /// `ε‖Φ − Ω‖_F` plus the inner residual of the accepted step (zero
    /// regularization for interior inputs).
    pub residual_bound: f64,
    pub path: DecompositionPath,
    pub steps: Vec<RegularizedStep>,
}

pub const DEFAULT_EPS_SCHEDULE: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Decomposes any positive map, regularizing boundary maps as
/// `Φ_ε = (1 − ε)Φ + εΩ` along a decreasing schedule. The residual is always
/// measured against the original map.
pub fn decompose_general(
    m: &QubitMap,
    eps_schedule: &[f64],
    opts: &DecomposeOptions,
) -> Result<GeneralOutcome> {
    let pos = positivity::is_positive(m);
    if !pos.is_positive() {
        return Err(not_positive(&pos));
    }
    match decompose(m, opts) {
        Ok(out) => {
            return Ok(GeneralOutcome {
                residual: out.residual,
                residual_bound: out.residual,
                decomposition: out.decomposition,
                path: out.path,
                steps: Vec::new(),
            })
        }
        Err(Error::BoundaryMap) => {}
        Err(e) => return Err(e),
    }

    let omega = QubitMap::depolarizing();
    let gap = m.distance(&omega);
    let mut steps = Vec::new();
    let mut best: Option<GeneralOutcome> = None;
    for &eps in eps_schedule {
        let m_eps = m.mix(&omega, eps);
        // Φ_ε is interior for every ε > 0 because Φ is positive, so the
        // strict-feasibility gate is skipped: its S-lemma margin can shrink
        // like ε² (rank-one inputs) even though every pure state maps to a
        // matrix with eigenvalues at least ε/2.
        // The regularization already costs ε‖Φ − Ω‖, so the inner check only
        // needs to be that tight; the reported residual is re-measured below.
        let inner_tol = opts.tol.max(eps * gap);
        let attempt = scaling::scale_unchecked(&m_eps, &opts.scaling, None)
            .and_then(|scaled| decompose_scaled(&m_eps, scaled, inner_tol));
        match attempt {
            Ok(out) => {
                let residual = verify_decomposition(m, &out.decomposition);
                steps.push(RegularizedStep {
                    eps,
                    outcome: Ok((out.decomposition.term_count(), residual)),
                });
                best = Some(GeneralOutcome {
                    residual,
                    residual_bound: eps * gap + out.residual,
                    decomposition: out.decomposition,
                    path: DecompositionPath::Regularized { eps },
                    steps: Vec::new(),
                });
            }
            Err(e) => steps.push(RegularizedStep {
                eps,
                outcome: Err(e),
            }),
        }
    }
    match best {
        Some(mut out) => {
            out.steps = steps;
            Ok(out)
        }
        None => {
            let last = steps.into_iter().rev().find_map(|s| s.outcome.err());
            Err(last.unwrap_or(Error::BoundaryMap))
        }
    }
}
