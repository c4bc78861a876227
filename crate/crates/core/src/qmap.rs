//! Linear maps on 2×2 Hermitian matrices.
//!
//! A [`QubitMap`] is stored as its Pauli-transfer matrix
//! `L[a][b] = ½ tr(σ_a Φ(σ_b))`, `σ₀ = Id`. A Hermitian `ρ` has Bloch
//! coordinates `x_a = tr(σ_a ρ)` and the map acts as `x ↦ L·x`.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Vector2, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numkit::{HermMat, C64};
use crate::positivity;

/// Pauli matrix `σ_a` for `a ∈ {0, 1, 2, 3}` with `σ₀ = Id`.
pub fn pauli(a: usize) -> Matrix2<C64> {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match a {
        0 => Matrix2::new(one, z, z, one),
        1 => Matrix2::new(z, one, one, z),
        2 => Matrix2::new(z, -i, i, z),
        3 => Matrix2::new(one, z, z, -one),
        _ => panic!("Pauli index {a} out of range"),
    }
}

fn trace2(m: &Matrix2<C64>) -> C64 {
    m[(0, 0)] + m[(1, 1)]
}

/// A 2×2 Hermitian matrix in Bloch coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm2 {
    bloch: Vector4<f64>,
}

impl Herm2 {
    pub fn from_bloch(x: Vector4<f64>) -> Self {
        Self { bloch: x }
    }

    /// Bloch coordinates of the Hermitian part of `m`.
    pub fn from_matrix(m: &Matrix2<C64>) -> Self {
        let x = Vector4::from_fn(|a, _| (pauli(a) * m).trace().re);
        Self { bloch: x }
    }

    pub fn identity() -> Self {
        Self::from_bloch(Vector4::new(2.0, 0.0, 0.0, 0.0))
    }

    /// `Id/2`.
    pub fn maximally_mixed() -> Self {
        Self::from_bloch(Vector4::new(1.0, 0.0, 0.0, 0.0))
    }

    /// Pure state with Bloch direction `n` (normalized internally).
    pub fn pure(n: [f64; 3]) -> Self {
        let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        Self::from_bloch(Vector4::new(1.0, n[0] / r, n[1] / r, n[2] / r))
    }

    pub fn bloch(&self) -> &Vector4<f64> {
        &self.bloch
    }

    pub fn to_matrix(&self) -> Matrix2<C64> {
        let x = &self.bloch;
        Matrix2::new(
            C64::new(0.5 * (x[0] + x[3]), 0.0),
            C64::new(0.5 * x[1], -0.5 * x[2]),
            C64::new(0.5 * x[1], 0.5 * x[2]),
            C64::new(0.5 * (x[0] - x[3]), 0.0),
        )
    }

    pub fn to_herm_mat(&self) -> HermMat {
        HermMat::wrap(DMatrix::from_iterator(
            2,
            2,
            self.to_matrix().iter().copied(),
        ))
    }

    pub fn from_herm_mat(h: &HermMat) -> Self {
        let m = h.as_matrix();
        Self::from_matrix(&Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
    }

    pub fn trace(&self) -> f64 {
        self.bloch[0]
    }

    pub fn det(&self) -> f64 {
        let x = &self.bloch;
        0.25 * (x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3])
    }

    /// Eigenvalues `½(x₀ ∓ |x⃗|)`, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let x = &self.bloch;
        let r = (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
        [0.5 * (x[0] - r), 0.5 * (x[0] + r)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn frobenius_norm(&self) -> f64 {
        (0.5 * self.bloch.norm_squared()).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_bloch(self.bloch * c)
    }
}

/// State vector `cos(θ/2)|0⟩ + e^{iϕ} sin(θ/2)|1⟩` of the pure state with Bloch
/// direction `n`.
pub fn pure_state_vector(n: [f64; 3]) -> Vector2<C64> {
    let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let (x, y, z) = (n[0] / r, n[1] / r, n[2] / r);
    let c = (0.5 * (1.0 + z)).max(0.0).sqrt();
    let s = (0.5 * (1.0 - z)).max(0.0).sqrt();
    let rho = (x * x + y * y).sqrt();
    let phase = if rho > 0.0 {
        C64::new(x / rho, y / rho)
    } else {
        C64::new(1.0, 0.0)
    };
    Vector2::new(C64::new(c, 0.0), phase * s)
}

/// A real-linear map on 2×2 Hermitian matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitMap {
    ptm: Matrix4<f64>,
}

impl QubitMap {
    pub fn new(ptm: Matrix4<f64>) -> Result<Self> {
        if ptm.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { ptm })
    }

    pub(crate) fn from_ptm(ptm: Matrix4<f64>) -> Self {
        Self { ptm }
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn from_diagonal(d: [f64; 4]) -> Result<Self> {
        Self::new(Matrix4::from_diagonal(&Vector4::from(d)))
    }

    pub fn ptm(&self) -> &Matrix4<f64> {
        &self.ptm
    }

    pub fn identity() -> Self {
        Self::from_ptm(Matrix4::identity())
    }

    /// Transposition `ρ ↦ ρᵀ`: flips the sign of the σ_y coordinate.
    pub fn transpose() -> Self {
        Self::from_ptm(Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, -1.0, 1.0)))
    }

    /// Completely depolarizing map `ρ ↦ tr(ρ)·Id/2`.
    pub fn depolarizing() -> Self {
        Self::from_ptm(Matrix4::from_diagonal(&Vector4::new(1.0, 0.0, 0.0, 0.0)))
    }

    /// `ρ ↦ MρM†`.
    pub fn conjugation(m: &Matrix2<C64>) -> Result<Self> {
        if m.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::ZeroMatrix);
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_ptm(conjugation_ptm(m, false)))
    }

    /// `Φ(ρ) = Σ_j A_j ρ A_j† + Σ_k B_k ρᵀ B_k†`.
    pub fn from_kraus(kraus: &[Matrix2<C64>], co_kraus: &[Matrix2<C64>]) -> Result<Self> {
        if kraus.is_empty() && co_kraus.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut ptm = Matrix4::zeros();
        for k in kraus {
            ptm += conjugation_ptm(k, false);
        }
        for k in co_kraus {
            ptm += conjugation_ptm(k, true);
        }
        Self::new(ptm)
    }

    pub fn apply(&self, rho: &Herm2) -> Herm2 {
        Herm2::from_bloch(self.ptm * rho.bloch())
    }

    /// Complex-linear extension of the map to all 2×2 matrices.
    pub fn apply_matrix(&self, x: &Matrix2<C64>) -> Matrix2<C64> {
        let coeffs: [C64; 4] = std::array::from_fn(|b| trace2(&(pauli(b) * x)));
        let mut out = Matrix2::zeros();
        for a in 0..4 {
            let mut c = C64::new(0.0, 0.0);
            for (b, cb) in coeffs.iter().enumerate() {
                c += cb * self.ptm[(a, b)];
            }
            out += pauli(a) * (c * 0.5);
        }
        out
    }

    /// Adjoint with respect to the Hilbert–Schmidt inner product. The Pauli
    /// basis is orthogonal for that inner product, so this is the transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_ptm(self.ptm.transpose())
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &QubitMap) -> Self {
        Self::from_ptm(self.ptm * first.ptm)
    }

    pub fn add(&self, other: &QubitMap) -> Self {
        Self::from_ptm(self.ptm + other.ptm)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_ptm(self.ptm * c)
    }

    /// `(1 − t)·self + t·other`.
    pub fn mix(&self, other: &QubitMap, t: f64) -> Self {
        Self::from_ptm(self.ptm * (1.0 - t) + other.ptm * t)
    }

    /// Lower-right 3×3 block: the action on traceless Bloch coordinates.
    pub fn bloch_block(&self) -> Matrix3<f64> {
        self.ptm.fixed_view::<3, 3>(1, 1).into_owned()
    }

    /// Choi matrix `C = Σ_ij E_ij ⊗ Φ(E_ij)`, row index `2i + k`.
    pub fn choi(&self) -> HermMat {
        let mut c = DMatrix::<C64>::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                let mut e = Matrix2::zeros();
                e[(i, j)] = C64::new(1.0, 0.0);
                let img = self.apply_matrix(&e);
                for k in 0..2 {
                    for l in 0..2 {
                        c[(2 * i + k, 2 * j + l)] = img[(k, l)];
                    }
                }
            }
        }
        HermMat::wrap(c)
    }

    pub fn distance(&self, other: &QubitMap) -> f64 {
        (self.ptm - other.ptm).norm()
    }
}

/// Transfer matrix of `ρ ↦ KρK†`, or of `ρ ↦ KρᵀK†` when `transposed`.
fn conjugation_ptm(k: &Matrix2<C64>, transposed: bool) -> Matrix4<f64> {
    let kd = k.adjoint();
    let images: [Matrix2<C64>; 4] = std::array::from_fn(|b| {
        let sb = if transposed {
            pauli(b).transpose()
        } else {
            pauli(b)
        };
        k * sb * kd
    });
    Matrix4::from_fn(|a, b| 0.5 * trace2(&(pauli(a) * images[b])).re)
}

/// Named maps.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecialMap {
    Identity,
    Transpose,
    Depolarizing,
    Conjugation(Matrix2<C64>),
}

pub fn special_map(kind: &SpecialMap) -> Result<QubitMap> {
    match kind {
        SpecialMap::Identity => Ok(QubitMap::identity()),
        SpecialMap::Transpose => Ok(QubitMap::transpose()),
        SpecialMap::Depolarizing => Ok(QubitMap::depolarizing()),
        SpecialMap::Conjugation(m) => QubitMap::conjugation(m),
    }
}

/// Kraus and co-Kraus operators of a decomposable map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Decomposition {
    pub kraus: Vec<Matrix2<C64>>,
    pub co_kraus: Vec<Matrix2<C64>>,
}

impl Decomposition {
    pub fn term_count(&self) -> usize {
        self.kraus.len() + self.co_kraus.len()
    }

    pub fn to_map(&self) -> Result<QubitMap> {
        QubitMap::from_kraus(&self.kraus, &self.co_kraus)
    }

    /// The completely positive part alone (zero map if there are no Kraus terms).
    pub fn cp_part(&self) -> QubitMap {
        QubitMap::from_kraus(&self.kraus, &[]).unwrap_or(QubitMap::from_ptm(Matrix4::zeros()))
    }

    /// The co-completely positive part alone.
    pub fn ccp_part(&self) -> QubitMap {
        QubitMap::from_kraus(&[], &self.co_kraus).unwrap_or(QubitMap::from_ptm(Matrix4::zeros()))
    }
}

/// Families produced by [`random_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandomKind {
    /// `(1 − t)Ψ + tΩ` with Ψ a random CP + co-CP map, `t ∈ (0, 1]`.
    Interior {
        t: f64,
    },
    Cp,
    Ccp,
    /// Positive maps on the boundary of the positive cone.
    Boundary,
    /// Maps that fail positivity.
    NonPositive,
}

/// Seeded generator shared by every random routine in the crate: ChaCha8
/// seeded through `seed_from_u64`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_complex_matrix(rng: &mut impl Rng) -> Matrix2<C64> {
    Matrix2::from_fn(|_, _| complex_gaussian(rng))
}

/// Haar-random element of SU(2): Gram–Schmidt QR of a complex Gaussian matrix
/// with the phases of `R`'s diagonal removed, then the determinant phase
/// divided out.
pub fn haar_su2(rng: &mut impl Rng) -> Matrix2<C64> {
    let z = random_complex_matrix(rng);
    let c0 = z.column(0).into_owned();
    let q0 = c0 / C64::new(c0.norm(), 0.0);
    let c1 = z.column(1).into_owned();
    let proj = q0.dotc(&c1);
    let w = c1 - q0 * proj;
    let q1 = w / C64::new(w.norm(), 0.0);
    let q = Matrix2::from_columns(&[q0, q1]);
    let det = q.determinant();
    q * det.sqrt().conj()
}

fn normalized(m: QubitMap) -> QubitMap {
    let l00 = m.ptm[(0, 0)];
    m.scale(1.0 / l00)
}

fn random_kraus_list(rng: &mut impl Rng, count: usize) -> Vec<Matrix2<C64>> {
    (0..count).map(|_| random_complex_matrix(rng)).collect()
}

fn random_decomposable(rng: &mut impl Rng) -> QubitMap {
    let mut nk = rng.random_range(0..=4usize);
    let nc = rng.random_range(0..=4usize);
    if nk + nc == 0 {
        nk = 1;
    }
    let kraus = random_kraus_list(rng, nk);
    let co = random_kraus_list(rng, nc);
    normalized(QubitMap::from_kraus(&kraus, &co).expect("nonempty"))
}

/// Deterministic random map of the requested family. Maps are normalized so
/// that `L₀₀ = ½ tr Φ(Id) = 1` before any mixing.
pub fn random_map(seed: u64, kind: RandomKind) -> QubitMap {
    let mut rng = rng_from_seed(seed);
    match kind {
        RandomKind::Interior { t } => {
            assert!(
                t > 0.0 && t <= 1.0,
                "interior mixing weight must lie in (0, 1]"
            );
            let psi = random_decomposable(&mut rng);
            psi.mix(&QubitMap::depolarizing(), t)
        }
        RandomKind::Cp => {
            let n = rng.random_range(1..=4usize);
            let kraus = random_kraus_list(&mut rng, n);
            normalized(QubitMap::from_kraus(&kraus, &[]).expect("nonempty"))
        }
        RandomKind::Ccp => {
            let n = rng.random_range(1..=4usize);
            let co = random_kraus_list(&mut rng, n);
            normalized(QubitMap::from_kraus(&[], &co).expect("nonempty"))
        }
        RandomKind::Boundary => match rng.random_range(0..4u32) {
            0 => {
                let v = random_complex_matrix(&mut rng);
                normalized(QubitMap::from_kraus(&[v], &[]).expect("nonempty"))
            }
            1 => {
                let v = random_complex_matrix(&mut rng);
                normalized(QubitMap::from_kraus(&[], &[v]).expect("nonempty"))
            }
            2 => {
                let psi = Vector2::from_fn(|_, _| complex_gaussian(&mut rng));
                let xi = Vector2::from_fn(|_, _| complex_gaussian(&mut rng));
                let k = psi * xi.adjoint();
                normalized(QubitMap::from_kraus(&[k], &[]).expect("nonempty"))
            }
            _ => {
                // Shift a decomposable map by −cΩ until its smallest pure-state
                // eigenvalue reaches zero.
                let psi = random_decomposable(&mut rng);
                let (min, _) = positivity::min_pure_eigenvalue(&psi);
                let shifted = psi.add(&QubitMap::depolarizing().scale(-2.0 * min));
                normalized(shifted)
            }
        },
        RandomKind::NonPositive => loop {
            let psi = random_decomposable(&mut rng);
            let noise = Matrix4::from_fn(|_, _| 0.5 * rng.sample::<f64, _>(StandardNormal));
            let candidate = QubitMap::from_ptm(psi.ptm + noise);
            if !positivity::is_positive(&candidate).is_positive() {
                return candidate;
            }
        },
    }
}
