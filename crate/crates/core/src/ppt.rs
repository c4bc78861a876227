//! Partial-transpose separability test for two-qubit states.
//!
//! For two qubits a state is separable iff its partial transpose is positive
//! semi-definite, so the verdict below is exact rather than a one-sided test.
//! The transpose acts on the second tensor factor; row index `2i + k` refers
//! to `|i⟩ ⊗ |k⟩`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numkit::{herm_eig, HermMat, C64};

/// Tolerance for state validity and for the verdict.
pub const PPT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: HermMat,
}

impl TwoQubitState {
    /// Validates a 4×4 density matrix: Hermitian, unit trace and positive
    /// semi-definite up to [`PPT_TOL`].
    pub fn new(rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != 4 || rho.ncols() != 4 {
            return Err(Error::InvalidState {
                reason: format!("expected 4x4, got {}x{}", rho.nrows(), rho.ncols()),
            });
        }
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState {
                reason: "non-finite entries".into(),
            });
        }
        let asym = (&rho - rho.adjoint()).norm();
        if asym > PPT_TOL * (1.0 + rho.norm()) {
            return Err(Error::InvalidState {
                reason: format!("not Hermitian (defect {asym:e})"),
            });
        }
        let h = HermMat::new(rho).map_err(|e| Error::InvalidState {
            reason: e.to_string(),
        })?;
        let tr = h.trace();
        if (tr - 1.0).abs() > PPT_TOL {
            return Err(Error::InvalidState {
                reason: format!("trace {tr} is not 1"),
            });
        }
        let min = h.min_eigenvalue();
        if min < -PPT_TOL {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {min:e}"),
            });
        }
        Ok(Self { rho: h })
    }

    pub fn rho(&self) -> &HermMat {
        &self.rho
    }
}

/// Transpose of the second factor: `(i k, j l) ↦ (i l, j k)`.
pub fn partial_transpose(state: &TwoQubitState) -> HermMat {
    partial_transpose_matrix(state.rho.as_matrix())
}

/// [`partial_transpose`] on an arbitrary 4×4 matrix.
pub fn partial_transpose_matrix(rho: &DMatrix<C64>) -> HermMat {
    let out = DMatrix::from_fn(4, 4, |r, c| {
        let (i, k) = (r / 2, r % 2);
        let (j, l) = (c / 2, c % 2);
        rho[(2 * i + l, 2 * j + k)]
    });
    HermMat::new(out).expect("partial transpose of a Hermitian 4x4 is Hermitian 4x4")
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeparabilityVerdict {
    Separable,
    Entangled { min_pt_eigenvalue: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PptReport {
    pub verdict: SeparabilityVerdict,
    /// Spectrum of the partial transpose, ascending.
    pub pt_eigenvalues: Vec<f64>,
    /// `|λ_min| ≤ tol`: the state sits on the PPT boundary.
    pub boundary: bool,
}

/// Separable iff `λ_min(ρ^{T_B}) ≥ −PPT_TOL`.
pub fn separability_verdict(state: &TwoQubitState) -> PptReport {
    let eig = herm_eig(&partial_transpose(state));
    let min = eig.eigenvalues[0];
    let verdict = if min >= -PPT_TOL {
        SeparabilityVerdict::Separable
    } else {
        SeparabilityVerdict::Entangled {
            min_pt_eigenvalue: min,
        }
    };
    PptReport {
        verdict,
        boundary: min.abs() <= PPT_TOL,
        pt_eigenvalues: eig.eigenvalues,
    }
}

/// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_state() -> TwoQubitState {
    let mut m = DMatrix::zeros(4, 4);
    for &r in &[0usize, 3] {
        for &c in &[0usize, 3] {
            m[(r, c)] = C64::new(0.5, 0.0);
        }
    }
    TwoQubitState {
        rho: HermMat::new(m).expect("valid"),
    }
}

/// Werner state `p|Φ⁺⟩⟨Φ⁺| + (1 − p)Id/4`.
pub fn werner_state(p: f64) -> Result<TwoQubitState> {
    let bell = bell_state().rho.into_inner();
    let id = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
    TwoQubitState::new(bell * C64::new(p, 0.0) + id * C64::new(1.0 - p, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_is_fixed() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = C64::new(1.0, 0.0);
        let s = TwoQubitState::new(m.clone()).unwrap();
        assert_eq!(partial_transpose(&s).as_matrix(), &m);
        assert_eq!(
            separability_verdict(&s).verdict,
            SeparabilityVerdict::Separable
        );
    }

    #[test]
    fn bell_state_spectrum() {
        let r = separability_verdict(&bell_state());
        assert!((r.pt_eigenvalues[0] + 0.5).abs() < 1e-12);
        for &e in &r.pt_eigenvalues[1..] {
            assert!((e - 0.5).abs() < 1e-12);
        }
        assert!(matches!(r.verdict, SeparabilityVerdict::Entangled { .. }));
    }

    #[test]
    fn werner_family() {
        let ent = separability_verdict(&werner_state(0.4).unwrap());
        assert!(matches!(ent.verdict, SeparabilityVerdict::Entangled { .. }));
        let sep = separability_verdict(&werner_state(0.3).unwrap());
        assert_eq!(sep.verdict, SeparabilityVerdict::Separable);
    }

    #[test]
    fn invalid_states() {
        let m = DMatrix::<C64>::identity(4, 4);
        assert!(matches!(
            TwoQubitState::new(m),
            Err(Error::InvalidState { .. })
        ));
        let mut m = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(
            TwoQubitState::new(m),
            Err(Error::InvalidState { .. })
        ));
    }
}
