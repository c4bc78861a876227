//! Bistochastic scaling of interior positive maps.
//!
//! For an interior positive `Φ` the map `f(S) = Φ(Φ*(S)⁻¹)⁻¹` sends positive
//! definite matrices to positive definite matrices, and its normalized form
//! `f₁(σ) = f(σ)/tr f(σ)` has a fixed point `σ₀` on the density matrices.
//! With `A = σ₀^{1/2}` and `B = Φ*(σ₀)^{-1/2}` the map `Φ_A ∘ Φ ∘ Φ_B` is
//! unital and trace preserving, where `Φ_X(ρ) = XρX`.

use nalgebra::{Matrix3, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::numkit::pd_functions;
use crate::positivity::{interior_report, PositivityOptions};
use crate::qmap::{Herm2, QubitMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingOptions {
    /// Bound on both bistochasticity residuals and on `‖f₁(σ₀) − σ₀‖_F`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// Iteration that produced the accepted fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingScheme {
    /// `σ ← (1 − η)σ + η f₁(σ)` with step halving.
    Damped,
    /// Newton steps on `f₁(σ) = σ`, used once the damped iteration contracts
    /// slowly (near the boundary of the positive cone).
    Newton,
    /// `B² ← Φ*(A²)⁻¹`, `A² ← Φ(B²)⁻¹`, renormalized to `tr A² = 1`.
    Alternating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub a: Herm2,
    pub b: Herm2,
    /// `Φ_A ∘ Φ ∘ Φ_B`.
    pub scaled: QubitMap,
    /// Fixed point of `f₁`, trace one.
    pub sigma0: Herm2,
    pub iterations: usize,
    /// `‖scaled(Id) − Id‖_F`.
    pub residual_unital: f64,
    /// `‖scaled*(Id) − Id‖_F`.
    pub residual_tp: f64,
    /// `‖f₁(σ₀) − σ₀‖_F`.
    pub fixed_point_residual: f64,
    /// `tr f(σ₀)`, which equals one at an exact fixed point.
    pub alpha: f64,
    pub scheme: ScalingScheme,
    /// Set when the input sits close to the boundary of the positive cone.
    pub warning: Option<String>,
}

fn pd_inverse(h: &Herm2, what: &str) -> Result<Herm2> {
    pd_functions(&h.to_herm_mat())
        .map(|f| Herm2::from_herm_mat(&f.inv))
        .map_err(|e| Error::NotInterior {
            reason: format!("{what} is not positive definite ({e})"),
        })
}

fn pd_sqrt_pair(h: &Herm2, what: &str) -> Result<(Herm2, Herm2)> {
    pd_functions(&h.to_herm_mat())
        .map(|f| {
            (
                Herm2::from_herm_mat(&f.sqrt),
                Herm2::from_herm_mat(&f.inv_sqrt),
            )
        })
        .map_err(|e| Error::NotInterior {
            reason: format!("{what} is not positive definite ({e})"),
        })
}

/// `f(S) = Φ(Φ*(S)⁻¹)⁻¹`.
pub fn f_map(m: &QubitMap, s: &Herm2) -> Result<Herm2> {
    pd_inverse(s, "S")?;
    let inner = pd_inverse(&m.adjoint().apply(s), "Φ*(S)")?;
    pd_inverse(&m.apply(&inner), "Φ(Φ*(S)⁻¹)")
}

/// `f₁(S) = f(S)/tr f(S)`.
pub fn f_map_normalized(m: &QubitMap, s: &Herm2) -> Result<Herm2> {
    let f = f_map(m, s)?;
    Ok(f.scale(1.0 / f.trace()))
}

fn herm_distance(a: &Herm2, b: &Herm2) -> f64 {
    Herm2::from_bloch(a.bloch() - b.bloch()).frobenius_norm()
}

struct Candidate {
    a: Herm2,
    b: Herm2,
    scaled: QubitMap,
    residual_unital: f64,
    residual_tp: f64,
    fixed_point_residual: f64,
    alpha: f64,
}

impl Candidate {
    fn worst(&self) -> f64 {
        self.residual_unital
            .max(self.residual_tp)
            .max(self.fixed_point_residual)
    }
}

/// Builds `(A, B, Φ_A∘Φ∘Φ_B)` from a trace-one `σ` and measures all residuals.
fn evaluate(m: &QubitMap, sigma: &Herm2) -> Result<(Candidate, Herm2)> {
    let f = f_map(m, sigma)?;
    let alpha = f.trace();
    let f1 = f.scale(1.0 / alpha);
    let (a, _) = pd_sqrt_pair(sigma, "σ")?;
    let (_, b) = pd_sqrt_pair(&m.adjoint().apply(sigma), "Φ*(σ)")?;
    let phi_a = QubitMap::conjugation(&a.to_matrix())?;
    let phi_b = QubitMap::conjugation(&b.to_matrix())?;
    let scaled = phi_a.compose(&m.compose(&phi_b));
    let l = scaled.ptm();
    let col = Vector4::new(l[(0, 0)] - 1.0, l[(1, 0)], l[(2, 0)], l[(3, 0)]);
    let row = Vector4::new(l[(0, 0)] - 1.0, l[(0, 1)], l[(0, 2)], l[(0, 3)]);
    let cand = Candidate {
        a,
        b,
        scaled,
        residual_unital: std::f64::consts::SQRT_2 * col.norm(),
        residual_tp: std::f64::consts::SQRT_2 * row.norm(),
        fixed_point_residual: herm_distance(&f1, sigma),
        alpha,
    };
    Ok((cand, f1))
}

fn finish(
    cand: Candidate,
    sigma: Herm2,
    iterations: usize,
    scheme: ScalingScheme,
    warning: Option<String>,
) -> ScalingResult {
    ScalingResult {
        a: cand.a,
        b: cand.b,
        scaled: cand.scaled,
        sigma0: sigma,
        iterations,
        residual_unital: cand.residual_unital,
        residual_tp: cand.residual_tp,
        fixed_point_residual: cand.fixed_point_residual,
        alpha: cand.alpha,
        scheme,
        warning,
    }
}

/// Finds `A, B ≻ 0` with `Φ_A ∘ Φ ∘ Φ_B` bistochastic.
///
/// The damped iteration runs first and hands over to Newton steps when it
/// contracts slowly; if both stall the remaining budget goes to alternating
/// normalization. The gauge freedom `(cA, B/c)` is
/// fixed by `tr σ₀ = 1`.
pub fn scale_to_bistochastic(m: &QubitMap, opts: &ScalingOptions) -> Result<ScalingResult> {
    let report = interior_report(m, &PositivityOptions::default());
    if !report.interior {
        return Err(Error::NotInterior {
            reason: format!(
                "g* = {:e}, smallest sampled pure-state eigenvalue {:e}",
                report.g_star, report.sample_min
            ),
        });
    }
    let warning = (report.relative_margin() < 1e-6).then(|| {
        format!(
            "interiority margin {:e} is below 1e-6; expect poor conditioning",
            report.relative_margin()
        )
    });
    scale_unchecked(m, opts, warning)
}

/// [`scale_to_bistochastic`] without the interiority gate, for callers that
/// know the map is interior by construction. Intermediate matrices that fail
/// positive-definiteness still raise [`Error::NotInterior`].
pub fn scale_unchecked(
    m: &QubitMap,
    opts: &ScalingOptions,
    warning: Option<String>,
) -> Result<ScalingResult> {
    let mut sigma = Herm2::maximally_mixed();
    let (mut cand, mut f1) = evaluate(m, &sigma)?;
    let mut best = cand.worst();
    let mut iterations = 0;
    let mut eta = 1.0;
    let mut slow = false;
    let mut scheme = ScalingScheme::Damped;
    while iterations < opts.max_iter {
        if cand.worst() <= opts.tol {
            return Ok(finish(cand, sigma, iterations, scheme, warning));
        }
        iterations += 1;
        if slow {
            if let Some((s, c, f)) = newton_step(m, &sigma, cand.fixed_point_residual) {
                sigma = s;
                cand = c;
                f1 = f;
                best = best.min(cand.worst());
                scheme = ScalingScheme::Newton;
                continue;
            }
        }
        let trial = Herm2::from_bloch(sigma.bloch() * (1.0 - eta) + f1.bloch() * eta);
        let trial = trial.scale(1.0 / trial.trace());
        match evaluate(m, &trial) {
            Ok((c, f))
                if c.fixed_point_residual < cand.fixed_point_residual || c.worst() <= opts.tol =>
            {
                slow = c.fixed_point_residual > 0.5 * cand.fixed_point_residual;
                sigma = trial;
                cand = c;
                f1 = f;
                best = best.min(cand.worst());
                eta = (eta * 2.0).min(1.0);
                scheme = ScalingScheme::Damped;
            }
            _ => {
                slow = true;
                eta *= 0.5;
                if eta < 1e-6 {
                    break;
                }
            }
        }
    }

    // Alternating normalization from the best point reached so far.
    while iterations < opts.max_iter {
        if cand.worst() <= opts.tol {
            return Ok(finish(
                cand,
                sigma,
                iterations,
                ScalingScheme::Alternating,
                warning,
            ));
        }
        iterations += 1;
        let b2 = pd_inverse(&m.adjoint().apply(&sigma), "Φ*(A²)")?;
        let a2 = pd_inverse(&m.apply(&b2), "Φ(B²)")?;
        sigma = a2.scale(1.0 / a2.trace());
        let (c, _) = evaluate(m, &sigma)?;
        cand = c;
        best = best.min(cand.worst());
    }
    if cand.worst() <= opts.tol {
        return Ok(finish(cand, sigma, iterations, scheme, warning));
    }
    Err(Error::NoConvergence {
        iterations,
        best_residual: best,
    })
}

/// `f₁(σ) − σ` in the Bloch coordinates of a trace-one `σ = ½(Id + x·σ⃗)`.
fn fixed_point_gap(m: &QubitMap, x: &Vector3<f64>) -> Option<Vector3<f64>> {
    if x.norm() >= 1.0 {
        return None;
    }
    let sigma = Herm2::from_bloch(Vector4::new(1.0, x[0], x[1], x[2]));
    let f1 = f_map_normalized(m, &sigma).ok()?;
    let b = f1.bloch();
    Some(Vector3::new(b[1], b[2], b[3]) - x)
}

/// One Newton step on `f₁(σ) = σ` with a central-difference Jacobian and
/// backtracking. Returns the new point only if it lowers the fixed-point
/// residual.
fn newton_step(m: &QubitMap, sigma: &Herm2, current: f64) -> Option<(Herm2, Candidate, Herm2)> {
    let b = sigma.bloch();
    let x = Vector3::new(b[1], b[2], b[3]);
    let r = fixed_point_gap(m, &x)?;
    let h = 1e-7 * (1.0 - x.norm()).max(1e-6);
    let mut jac = Matrix3::zeros();
    for k in 0..3 {
        let mut e = Vector3::zeros();
        e[k] = h;
        let col = (fixed_point_gap(m, &(x + e))? - fixed_point_gap(m, &(x - e))?) / (2.0 * h);
        jac.set_column(k, &col);
    }
    let dx = jac.lu().solve(&(-r))?;
    let mut t = 1.0;
    for _ in 0..30 {
        let xt = x + dx * t;
        if xt.norm() < 1.0 {
            let trial = Herm2::from_bloch(Vector4::new(1.0, xt[0], xt[1], xt[2]));
            if let Ok((c, f)) = evaluate(m, &trial) {
                if c.fixed_point_residual < current {
                    return Some((trial, c, f));
                }
            }
        }
        t *= 0.5;
    }
    None
}
