//! One-constraint quadratic implications (the S-lemma).
//!
//! For symmetric `F, G` with a Slater point (`⟨x̄|G|x̄⟩ > 0`), the implication
//! `⟨x|G|x⟩ ≥ 0 ⇒ ⟨x|F|x⟩ ≥ 0` holds iff `F − μG ⪰ 0` for some `μ ≥ 0`.
//! [`decide`] returns either the pair `(μ, Q = F − μG)` or a unit vector that
//! breaks the implication. [`reformulated_decide`] handles the pencil form:
//! either `(1 − t)M + tN ⪰ 0` for some `t ∈ [0, 1]`, or some `x` has
//! `⟨x|M|x⟩ < 0` and `⟨x|N|x⟩ < 0`.
//!
//! Both `μ ↦ λ_min(F − μG)` and `t ↦ λ_min((1 − t)M + tN)` are concave
//! (pointwise minima of affine functions), so feasibility reduces to a
//! bracketed golden-section search.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numkit::{sym_eig, SymMat};
use crate::qmap::rng_from_seed;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizer of `g(μ) = λ_min(F − μG)` over `μ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuSearch {
    pub mu: f64,
    pub g_star: f64,
    pub q: SymMat,
}

fn check_dims(a: &SymMat, b: &SymMat) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Golden-section maximization of a concave function on `[lo, hi]`.
/// Returns the best abscissa seen together with its value.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_width: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fd > fc { (d, fd) } else { (c, fc) };
    for _ in 0..400 {
        if b - a <= rel_width * b.abs().max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    for x in [lo, hi, a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximizes `g(μ) = λ_min(F − μG)` over `μ ≥ 0`.
///
/// The bracket starts at `[0, 1]` and doubles until `g` decreases across its
/// upper half, capped at `1e12·(1 + ‖F‖/max(‖G‖, ε))`; golden-section search
/// then narrows it to relative width `1e−12`.
pub fn mu_search(f: &SymMat, g: &SymMat) -> Result<MuSearch> {
    check_dims(f, g)?;
    let eval = |mu: f64| f.lin_comb(1.0, g, -mu).min_eigenvalue();
    let cap = 1e12 * (1.0 + f.frobenius_norm() / g.frobenius_norm().max(f64::EPSILON));
    let mut hi = 1.0;
    let mut g_half = eval(0.5);
    let mut g_hi = eval(hi);
    while g_hi > g_half && hi < cap {
        hi *= 2.0;
        g_half = g_hi;
        g_hi = eval(hi);
    }
    let (mu, g_star) = golden_max(eval, 0.0, hi, 1e-12);
    Ok(MuSearch {
        mu,
        g_star,
        q: f.lin_comb(1.0, g, -mu),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SLemmaOptions {
    /// Relative feasibility tolerance.
    pub tol: f64,
    /// Seed from which the multistart seeds are derived.
    pub seed: u64,
    /// Number of random starts in the witness search.
    pub starts: usize,
    /// Grid step of the pencil walk.
    pub pencil_step: f64,
}

impl Default for SLemmaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            seed: 0,
            starts: 64,
            pencil_step: 1.0 / 256.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SLemmaOutcome {
    /// `F − μG = Q ⪰ 0` up to `threshold`; `margin = λ_min(Q)`.
    Feasible {
        mu: f64,
        q: SymMat,
        margin: f64,
        threshold: f64,
    },
    /// `⟨x|G|x⟩ > 0` and `⟨x|F|x⟩ < 0` for the unit vector `witness`;
    /// `margin = min(−⟨x|F|x⟩, ⟨x|G|x⟩)`.
    Infeasible {
        witness: DVector<f64>,
        f_value: f64,
        g_value: f64,
        margin: f64,
        g_star: f64,
        mu: f64,
    },
}

impl SLemmaOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SLemmaOutcome::Feasible { .. })
    }
}

/// Feasibility threshold used by [`decide`]: `tol·(1 + ‖F‖ + μ‖G‖)`.
pub fn feasibility_threshold(f: &SymMat, g: &SymMat, mu: f64, tol: f64) -> f64 {
    tol * (1.0 + f.frobenius_norm() + mu * g.frobenius_norm())
}

pub fn decide(
    f: &SymMat,
    g: &SymMat,
    xbar: &DVector<f64>,
    opts: &SLemmaOptions,
) -> Result<SLemmaOutcome> {
    check_dims(f, g)?;
    if xbar.len() != g.dim() {
        return Err(Error::DimensionMismatch(xbar.len(), g.dim()));
    }
    let slater = g.quad(xbar);
    if slater <= 0.0 || !slater.is_finite() {
        return Err(Error::SlaterViolation { value: slater });
    }
    let search = mu_search(f, g)?;
    let threshold = feasibility_threshold(f, g, search.mu, opts.tol);
    if search.g_star >= -threshold {
        return Ok(SLemmaOutcome::Feasible {
            mu: search.mu,
            margin: search.g_star,
            q: search.q,
            threshold,
        });
    }

    // max(⟨x|F|x⟩, ⟨x|−G|x⟩) < 0 is the pencil counterexample for (F, −G).
    let neg_g = g.lin_comb(-1.0, g, 0.0);
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    if let Some((x, _)) = pencil_counterexample(f, &neg_g, opts.pencil_step) {
        candidates.push(x);
    }
    for i in 0..opts.starts {
        let mut rng = rng_from_seed(
            opts.seed
                .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1)),
        );
        let x = DVector::from_fn(f.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        if x.norm() > 0.0 {
            candidates.push(x.normalize());
        }
    }
    let mut best: Option<(f64, DVector<f64>)> = None;
    for x0 in candidates {
        let x = polish(x0, f, &neg_g);
        let m = -max_pair(&x, f, &neg_g);
        // strict improvement keeps the lowest index on ties
        if best.as_ref().is_none_or(|(bm, _)| m > *bm) {
            best = Some((m, x));
        }
    }
    match best {
        Some((margin, x)) if margin > 0.0 => Ok(SLemmaOutcome::Infeasible {
            f_value: f.quad(&x),
            g_value: g.quad(&x),
            witness: x,
            margin,
            g_star: search.g_star,
            mu: search.mu,
        }),
        _ => Err(Error::WitnessNotFound {
            g_star: search.g_star,
        }),
    }
}

fn max_pair(x: &DVector<f64>, a: &SymMat, b: &SymMat) -> f64 {
    a.quad(x).max(b.quad(x))
}

/// Projected subgradient descent of `max(⟨x|A|x⟩, ⟨x|B|x⟩)` on the unit
/// sphere with backtracking. Never returns a worse point than `x0`.
fn polish(x0: DVector<f64>, a: &SymMat, b: &SymMat) -> DVector<f64> {
    let mut x = x0.normalize();
    let mut h = max_pair(&x, a, b);
    let mut step = 1.0;
    for _ in 0..400 {
        let active = if a.quad(&x) >= b.quad(&x) { a } else { b };
        let grad = active.as_matrix() * &x * 2.0;
        let tangent = &grad - &x * x.dot(&grad);
        let gn = tangent.norm();
        if gn == 0.0 {
            break;
        }
        let mut improved = false;
        while step > 1e-16 {
            let trial = (&x - &tangent * (step / gn)).normalize();
            let ht = max_pair(&trial, a, b);
            if ht < h {
                x = trial;
                h = ht;
                improved = true;
                step = (step * 2.0).min(1.0);
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilOptions {
    pub tol: f64,
    /// Grid step of the walk over `t ∈ [0, 1]`.
    pub step: f64,
}

impl Default for PencilOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            step: 1.0 / 256.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PencilOutcome {
    /// `(1 − t)M + tN` has `λ_min ≥ −tol·(1 + (1 − t)‖M‖ + t‖N‖)`; `t` is the
    /// smallest such value up to bisection accuracy.
    Witness { t: f64, lambda_min: f64 },
    /// Unit `x` with `⟨x|M|x⟩ < 0` and `⟨x|N|x⟩ < 0`, found at pencil
    /// parameter `t`.
    Counterexample {
        x: DVector<f64>,
        m_value: f64,
        n_value: f64,
        t: f64,
    },
}

/// One point of the pencil walk: `M_t = (1 − t)M + tN`, its smallest
/// eigenvalue and an orthonormal basis of the eigenvectors within
/// `cluster_tol` of it.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilWalkState {
    pub t: f64,
    pub lambda_t: f64,
    pub eigenspace: DMatrix<f64>,
}

pub fn pencil_state(m: &SymMat, n: &SymMat, t: f64, cluster_tol: f64) -> PencilWalkState {
    let mt = m.lin_comb(1.0 - t, n, t);
    let eig = sym_eig(&mt);
    let lambda = eig.eigenvalues[0];
    let k = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| l <= lambda + cluster_tol)
        .count();
    let eigenspace = eig.eigenvectors.columns(0, k).into_owned();
    PencilWalkState {
        t,
        lambda_t: lambda,
        eigenspace,
    }
}

fn pencil_scale(m: &SymMat, n: &SymMat, t: f64) -> f64 {
    1.0 + (1.0 - t) * m.frobenius_norm() + t * n.frobenius_norm()
}

pub fn reformulated_decide(m: &SymMat, n: &SymMat, opts: &PencilOptions) -> Result<PencilOutcome> {
    check_dims(m, n)?;
    let lam = |t: f64| m.lin_comb(1.0 - t, n, t).min_eigenvalue();
    // λ_min(M_t) + tol·scale(t) is concave in t; so is its feasible set.
    let slack = |t: f64| lam(t) + opts.tol * pencil_scale(m, n, t);
    if slack(0.0) >= 0.0 {
        return Ok(PencilOutcome::Witness {
            t: 0.0,
            lambda_min: lam(0.0),
        });
    }
    let (t_star, s_star) = golden_max(slack, 0.0, 1.0, 1e-13);
    if s_star >= 0.0 {
        let (mut lo, mut hi) = (0.0, t_star);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if slack(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 {
                break;
            }
        }
        return Ok(PencilOutcome::Witness {
            t: hi,
            lambda_min: lam(hi),
        });
    }
    match pencil_counterexample(m, n, opts.step) {
        Some((x, t)) => {
            let x = polish(x, m, n);
            Ok(PencilOutcome::Counterexample {
                m_value: m.quad(&x),
                n_value: n.quad(&x),
                x,
                t,
            })
        }
        None => Err(Error::WitnessNotFound { g_star: s_star }),
    }
}

/// Walks the pencil `t ∈ [0, 1]`, looking in the bottom eigenspace `Λ_t` for
/// a vector outside both `{⟨x|M|x⟩ ≥ 0}` and `{⟨x|N|x⟩ ≥ 0}`.
///
/// Along the walk the bottom eigenvector leaves the set `B = {⟨x|N|x⟩ ≥ 0}`
/// at some `τ` and enters `A = {⟨x|M|x⟩ ≥ 0}` later; between the two it lies
/// in neither. The grid, the crossing `τ` and the maximizer of `λ_min(M_t)`
/// are all scanned and the candidate with the largest violation wins (lowest
/// `t` on ties).
pub fn pencil_counterexample(m: &SymMat, n: &SymMat, step: f64) -> Option<(DVector<f64>, f64)> {
    let step = step.clamp(1e-6, 1.0);
    let cluster = |t: f64| 1e-8 * pencil_scale(m, n, t);
    let steps = (1.0 / step).ceil() as usize;
    let mut ts: Vec<f64> = (0..=steps).map(|i| (i as f64 * step).min(1.0)).collect();

    // τ = sup{t : Λ_t ∩ B ≠ ∅}, located on the grid and refined by bisection.
    let meets_b = |t: f64| {
        let st = pencil_state(m, n, t, cluster(t));
        let reduced = SymMat::wrap(st.eigenspace.transpose() * n.as_matrix() * &st.eigenspace);
        sym_eig(&reduced)
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
            >= 0.0
    };
    if let Some(last) = ts.iter().rposition(|&t| meets_b(t)) {
        if last + 1 < ts.len() {
            let (mut lo, mut hi) = (ts[last], ts[last + 1]);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if meets_b(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ts.push(lo);
            ts.push(hi);
        }
    }
    let lam = |t: f64| m.lin_comb(1.0 - t, n, t).min_eigenvalue();
    ts.push(golden_max(lam, 0.0, 1.0, 1e-13).0);

    let mut best: Option<(f64, f64, DVector<f64>)> = None;
    for &t in &ts {
        let st = pencil_state(m, n, t, cluster(t));
        let (x, h) = best_in_subspace(&st.eigenspace, m, n);
        if h < 0.0 {
            let better = match &best {
                None => true,
                Some((bh, bt, _)) => h < *bh || (h == *bh && t < *bt),
            };
            if better {
                best = Some((h, t, x));
            }
        }
    }
    best.map(|(_, t, x)| (x, t))
}

/// Minimizes `max(⟨x|A|x⟩, ⟨x|B|x⟩)` over unit `x` in the column span of the
/// orthonormal `basis`: exact for one column, a 720-point circle plus golden
/// refinement for two, and a fixed pseudo-random sample of the sphere
/// otherwise. The sphere of a multi-dimensional eigenspace is connected, so a
/// grid over it finds the crossing between the two sets.
fn best_in_subspace(basis: &DMatrix<f64>, a: &SymMat, b: &SymMat) -> (DVector<f64>, f64) {
    let k = basis.ncols();
    let ar = basis.transpose() * a.as_matrix() * basis;
    let br = basis.transpose() * b.as_matrix() * basis;
    let h = |y: &DVector<f64>| y.dot(&(&ar * y)).max(y.dot(&(&br * y)));
    let y = match k {
        1 => DVector::from_element(1, 1.0),
        2 => {
            let circ = |th: f64| DVector::from_vec(vec![th.cos(), th.sin()]);
            let grid = 720;
            let dth = std::f64::consts::PI / grid as f64;
            let (mut best_th, mut best_h) = (0.0, f64::INFINITY);
            for i in 0..grid {
                let th = i as f64 * dth;
                let v = h(&circ(th));
                if v < best_h {
                    best_h = v;
                    best_th = th;
                }
            }
            let (th, _) = golden_max(|th| -h(&circ(th)), best_th - dth, best_th + dth, 1e-15);
            if h(&circ(th)) < best_h {
                circ(th)
            } else {
                circ(best_th)
            }
        }
        _ => {
            let mut rng = rng_from_seed(k as u64);
            let mut best_y = DVector::from_fn(k, |i, _| if i == 0 { 1.0 } else { 0.0 });
            let mut best_h = h(&best_y);
            for _ in 0..4096 {
                let y = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = y.normalize();
                let v = h(&y);
                if v < best_h {
                    best_h = v;
                    best_y = y;
                }
            }
            best_y
        }
    };
    let x = basis * &y;
    let x = x.normalize();
    let val = max_pair(&x, a, b);
    (x, val)
}
