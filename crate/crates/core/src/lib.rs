//! Positive linear maps on 2×2 Hermitian matrices.
//!
//! The crate decides positivity of a qubit map, scales interior positive maps
//! to bistochastic form, and writes every positive map as a sum of at most four
//! conjugations `ρ ↦ AρA†` and transposed conjugations `ρ ↦ Bρᵀ B†`, with a
//! residual that can be checked independently.
//!
//! Maps are stored as 4×4 real Pauli-transfer matrices,
//! `L[a][b] = ½ tr(σ_a Φ(σ_b))` with `σ₀ = Id`. In this basis the Bloch vector
//! of a positive semi-definite matrix lies in the Lorentz cone `L₄`, so the same
//! matrix is both the transfer matrix and the Lorentz-cone representation.
//!
//! Module map:
//!
//! - [`numkit`]: Jacobi eigensolvers, positive-definite matrix functions, 3×3 SVD.
//! - [`qmap`]: transfer matrices, Choi matrices, Kraus constructors, seeded generators.
//! - [`lorentz`]: Lorentz cone geometry for any dimension `m ≥ 2`.
//! - [`slemma`]: one-constraint quadratic implications with certificates.
//! - [`positivity`]: positivity, interiority and sub-cone membership.
//! - [`scaling`]: bistochastic scaling via a normalized fixed-point map.
//! - [`decomp`]: the decomposition pipeline.
//! - [`extremal`]: extreme-ray classification of Lorentz-cone preserving maps.
//! - [`ppt`]: partial-transpose separability verdicts for two-qubit states.

#![forbid(unsafe_code)]

pub mod decomp;
pub mod error;
pub mod extremal;
pub mod lorentz;
pub mod numkit;
pub mod positivity;
pub mod ppt;
pub mod qmap;
pub mod scaling;
pub mod slemma;

pub use error::{Error, Result};
pub use numkit::C64;
pub use qmap::{Decomposition, Herm2, QubitMap};
