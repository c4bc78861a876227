//! Membership of a qubit map in the positive cone, its interior, and the
//! standard sub-cones.
//!
//! Positivity is decided through the Lorentz-cone picture: `Φ` is positive iff
//! its transfer matrix maps `L₄` into itself, which is an S-lemma question plus
//! an orientation check (see [`crate::lorentz::cone_preservation`]). Sampling
//! of pure states is only used to produce witnesses and to cross-check
//! interiority; it never certifies positivity on its own.

use nalgebra::{DVector, Vector2, Vector3, Vector4};

use crate::lorentz::{cone_preservation, LorentzMap, Orientation};
use crate::numkit::{SymMat, C64};
use crate::qmap::{pure_state_vector, QubitMap};
use crate::slemma::{decide, SLemmaOptions, SLemmaOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityOptions {
    /// Relative tolerance of the positivity decision.
    pub tol: f64,
    /// Relative strictness threshold separating interior from boundary.
    pub tol_strict: f64,
    /// Absolute tolerance for the unital / trace-preserving / Choi tests.
    pub tol_structure: f64,
    /// Number of quasi-uniform pure states used by the sampling routines.
    pub samples: usize,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            tol_strict: 1e-8,
            tol_structure: 1e-9,
            samples: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityVerdict {
    Positive,
    /// `−Φ` is positive (and `Φ ≠ 0`).
    NegativePositive,
    NotPositive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PositivityCertificate {
    /// `PTMᵀJ·PTM − μJ = Q` with `λ_min(Q) = g_star`, together with the
    /// first-row orientation check.
    SLemma { mu: f64, q: SymMat, g_star: f64 },
    /// A pure state `|φ⟩⟨φ|` with Bloch vector `bloch` whose image has a
    /// negative eigenvalue.
    ViolatingState {
        phi: Vector2<C64>,
        bloch: [f64; 3],
        min_eigenvalue: f64,
    },
    /// The map vanishes.
    ZeroMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityResult {
    pub verdict: PositivityVerdict,
    pub certificate: PositivityCertificate,
    /// `max_μ λ_min(PTMᵀJ·PTM − μJ)`.
    pub g_star: f64,
    pub mu: f64,
    /// Scale the tolerances are relative to.
    pub scale: f64,
    /// `Φ(Id) ≈ 0` and the verdict came from the six axis states.
    pub degenerate: bool,
    /// `|g_star| ≤ tol_strict·scale`: the verdict sits inside the margin band.
    pub in_margin_band: bool,
}

impl PositivityResult {
    pub fn is_positive(&self) -> bool {
        self.verdict == PositivityVerdict::Positive
    }
}

/// `λ_min(Φ(P(n)))` for the pure state with unit Bloch vector `n`:
/// `½(y₀ − |y⃗|)` with `y = L·(1, n)`.
pub fn pure_image_min(m: &QubitMap, n: [f64; 3]) -> f64 {
    let y = m.ptm() * Vector4::new(1.0, n[0], n[1], n[2]);
    0.5 * (y[0] - Vector3::new(y[1], y[2], y[3]).norm())
}

/// `count` quasi-uniform points on the unit sphere (Fibonacci lattice).
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

const AXES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
];

/// Smallest eigenvalue of `Φ(P)` over the pure states `P`, with a minimizing
/// Bloch vector. Uses a 2000-point sample refined by projected gradient steps.
pub fn min_pure_eigenvalue(m: &QubitMap) -> (f64, [f64; 3]) {
    min_pure_eigenvalue_seeded(m, 2000, &[])
}

fn normalize3(v: Vector3<f64>) -> Option<[f64; 3]> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// Projected gradient descent of `n ↦ λ_min(Φ(P(n)))` on the sphere.
fn refine(m: &QubitMap, start: [f64; 3]) -> ([f64; 3], f64) {
    let l = m.ptm();
    let c = Vector3::new(l[(0, 1)], l[(0, 2)], l[(0, 3)]);
    let b = Vector3::new(l[(1, 0)], l[(2, 0)], l[(3, 0)]);
    let bb = l.fixed_view::<3, 3>(1, 1).into_owned();
    let mut n = Vector3::from(start);
    let mut val = pure_image_min(m, start);
    let mut step = 0.5;
    for _ in 0..300 {
        let w = b + bb * n;
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        let grad = 0.5 * (c - bb.transpose() * w / wn);
        let tangent = grad - n * n.dot(&grad);
        let tn = tangent.norm();
        if tn <= 1e-15 * (1.0 + l.norm()) {
            break;
        }
        let mut improved = false;
        while step > 1e-14 {
            let Some(trial) = normalize3(n - tangent * (step / tn)) else {
                break;
            };
            let tv = pure_image_min(m, trial);
            if tv < val {
                n = Vector3::from(trial);
                val = tv;
                improved = true;
                step = (step * 2.0).min(0.5);
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    ([n[0], n[1], n[2]], val)
}

/// Among antipodal near-ties prefer the vector whose first non-negligible
/// component is positive, so symmetric maps get a reproducible witness.
fn canonical_sign(m: &QubitMap, n: [f64; 3], val: f64) -> ([f64; 3], f64) {
    let anti = [-n[0], -n[1], -n[2]];
    let anti_val = pure_image_min(m, anti);
    if (anti_val - val).abs() <= 1e-12 * (1.0 + m.ptm().norm()) {
        let lead = n.iter().copied().find(|x| x.abs() > 1e-6).unwrap_or(0.0);
        if lead < 0.0 {
            return (anti, anti_val);
        }
    }
    (n, val)
}

fn min_pure_eigenvalue_seeded(m: &QubitMap, samples: usize, seeds: &[[f64; 3]]) -> (f64, [f64; 3]) {
    let pts = fibonacci_sphere(samples.max(1));
    let mut scored: Vec<(f64, [f64; 3])> = pts.iter().map(|&n| (pure_image_min(m, n), n)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut starts: Vec<[f64; 3]> = seeds.to_vec();
    starts.extend(AXES.iter().copied());
    starts.extend(scored.iter().take(6).map(|s| s.1));
    let mut best: Option<([f64; 3], f64)> = None;
    for s in starts {
        let (n, v) = refine(m, s);
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((n, v));
        }
    }
    let (n, v) = best.expect("at least one start");
    let (n, v) = canonical_sign(m, n, v);
    (v, n)
}

fn violating(m: &QubitMap, samples: usize, seeds: &[[f64; 3]]) -> PositivityCertificate {
    let (min_eigenvalue, bloch) = min_pure_eigenvalue_seeded(m, samples, seeds);
    PositivityCertificate::ViolatingState {
        phi: pure_state_vector(bloch),
        bloch,
        min_eigenvalue,
    }
}

pub fn is_positive(m: &QubitMap) -> PositivityResult {
    is_positive_with(m, &PositivityOptions::default())
}

pub fn is_positive_with(m: &QubitMap, opts: &PositivityOptions) -> PositivityResult {
    let l = m.ptm();
    let norm = l.norm();
    let lmap = LorentzMap::from_qubit_map(m);
    let test = cone_preservation(&lmap, opts.tol);
    let in_margin_band = test.g_star.abs() <= opts.tol_strict * test.scale;
    let base = |verdict, certificate, degenerate| PositivityResult {
        verdict,
        certificate,
        g_star: test.g_star,
        mu: test.mu,
        scale: test.scale,
        degenerate,
        in_margin_band,
    };
    if norm == 0.0 {
        return base(
            PositivityVerdict::Positive,
            PositivityCertificate::ZeroMap,
            false,
        );
    }

    let col0 = Vector4::new(l[(0, 0)], l[(1, 0)], l[(2, 0)], l[(3, 0)]);
    if col0.norm() <= opts.tol * norm {
        // Φ(P) + Φ(Id − P) = Φ(Id) ≈ 0, so any non-vanishing axis image has a
        // partner with a negative eigenvalue.
        let (bloch, min_eigenvalue) = AXES
            .iter()
            .map(|&n| (n, pure_image_min(m, n)))
            .fold(None, |acc: Option<([f64; 3], f64)>, (n, v)| match acc {
                Some((_, bv)) if bv <= v => acc,
                _ => Some((n, v)),
            })
            .expect("six axes");
        if min_eigenvalue >= -opts.tol * norm {
            return base(
                PositivityVerdict::Positive,
                PositivityCertificate::ZeroMap,
                true,
            );
        }
        let cert = PositivityCertificate::ViolatingState {
            phi: pure_state_vector(bloch),
            bloch,
            min_eigenvalue,
        };
        return base(PositivityVerdict::NotPositive, cert, true);
    }

    if test.preserves() {
        let cert = PositivityCertificate::SLemma {
            mu: test.mu,
            q: test.q.clone(),
            g_star: test.g_star,
        };
        return base(PositivityVerdict::Positive, cert, false);
    }

    let mut seeds = Vec::new();
    if !test.quadratic_ok {
        let f = lmap.pullback_form();
        let j = crate::lorentz::minkowski(4);
        let xbar = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let sopts = SLemmaOptions {
            tol: opts.tol,
            ..SLemmaOptions::default()
        };
        if let Ok(SLemmaOutcome::Infeasible { witness, .. }) = decide(&f, &j, &xbar, &sopts) {
            // ρ_x is a mixture of the pure states along ±x⃗/|x⃗|.
            if let Some(n) = normalize3(Vector3::new(witness[1], witness[2], witness[3])) {
                seeds.push(n);
                seeds.push([-n[0], -n[1], -n[2]]);
            }
        }
    }
    let verdict = if test.orientation == Orientation::Negative && test.quadratic_ok {
        PositivityVerdict::NegativePositive
    } else {
        PositivityVerdict::NotPositive
    };
    base(verdict, violating(m, opts.samples, &seeds), false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorResult {
    pub interior: bool,
    pub g_star: f64,
    pub scale: f64,
    /// Smallest `λ_min(Φ(P))` over the sampled pure states.
    pub sample_min: f64,
    /// `|g_star| ≤ tol_strict·scale`: boundary within tolerance.
    pub boundary_band: bool,
}

impl InteriorResult {
    /// `g_star / scale`, the relative strict-feasibility margin.
    pub fn relative_margin(&self) -> f64 {
        self.g_star / self.scale
    }
}

pub fn is_interior(m: &QubitMap) -> bool {
    interior_report(m, &PositivityOptions::default()).interior
}

/// Strict S-lemma feasibility with positive orientation, cross-checked on a
/// Fibonacci sample of pure states.
pub fn interior_report(m: &QubitMap, opts: &PositivityOptions) -> InteriorResult {
    let test = cone_preservation(&LorentzMap::from_qubit_map(m), opts.tol);
    let sample_min = fibonacci_sphere(opts.samples.max(1))
        .into_iter()
        .map(|n| pure_image_min(m, n))
        .fold(f64::INFINITY, f64::min);
    let strict =
        test.g_star > opts.tol_strict * test.scale && test.orientation == Orientation::Positive;
    let sampled = sample_min > opts.tol_strict * m.ptm().norm();
    InteriorResult {
        interior: strict && sampled,
        g_star: test.g_star,
        scale: test.scale,
        sample_min,
        boundary_band: test.g_star.abs() <= opts.tol_strict * test.scale,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub positive: PositivityResult,
    pub interior: InteriorResult,
    pub cp: bool,
    pub ccp: bool,
    /// `λ_min(choi(Φ))`.
    pub choi_min: f64,
    /// `λ_min(choi(Φ∘T))`.
    pub choi_t_min: f64,
    pub unital: bool,
    pub trace_preserving: bool,
    pub bistochastic: bool,
    /// `‖PTM[:,0] − e₀‖`.
    pub unital_defect: f64,
    /// `‖PTM[0,:] − e₀‖`.
    pub tp_defect: f64,
}

pub fn property_report(m: &QubitMap) -> PropertyReport {
    property_report_with(m, &PositivityOptions::default())
}

pub fn property_report_with(m: &QubitMap, opts: &PositivityOptions) -> PropertyReport {
    let l = m.ptm();
    let e0 = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let unital_defect = (Vector4::new(l[(0, 0)], l[(1, 0)], l[(2, 0)], l[(3, 0)]) - e0).norm();
    let tp_defect = (Vector4::new(l[(0, 0)], l[(0, 1)], l[(0, 2)], l[(0, 3)]) - e0).norm();
    let choi_min = m.choi().min_eigenvalue();
    let choi_t_min = m.compose(&QubitMap::transpose()).choi().min_eigenvalue();
    let unital = unital_defect <= opts.tol_structure;
    let trace_preserving = tp_defect <= opts.tol_structure;
    PropertyReport {
        positive: is_positive_with(m, opts),
        interior: interior_report(m, opts),
        cp: choi_min >= -opts.tol_structure,
        ccp: choi_t_min >= -opts.tol_structure,
        choi_min,
        choi_t_min,
        unital,
        trace_preserving,
        bistochastic: unital && trace_preserving,
        unital_defect,
        tp_defect,
    }
}
