//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use posmap_cli::{run_request, Command, Options, EXIT_NO_CONVERGENCE};
use posmap_core::decomp::{
    decompose, decompose_general, rotation_of, spinor_lift, verify_decomposition, DecomposeOptions,
    DEFAULT_EPS_SCHEDULE,
};
use posmap_core::extremal::{classify, ExtremalVerdict};
use posmap_core::lorentz::{cone_preservation, LorentzMap};
use posmap_core::numkit::{sym_eig, SymMat};
use posmap_core::positivity::{fibonacci_sphere, is_positive, pure_image_min, PositivityVerdict};
use posmap_core::ppt::{bell_state, separability_verdict, werner_state, SeparabilityVerdict};
use posmap_core::qmap::{complex_gaussian, haar_su2, random_map, rng_from_seed, RandomKind};
use posmap_core::scaling::{scale_to_bistochastic, ScalingOptions};
use posmap_core::slemma::{
    decide, reformulated_decide, PencilOptions, PencilOutcome, SLemmaOptions, SLemmaOutcome,
};
use posmap_core::{Error, Herm2, QubitMap, C64};
use rayon::prelude::*;
use serde_json::json;

type Verdict = Result<String, String>;

const INTERIOR_T: [f64; 3] = [0.05, 0.3, 0.8];

fn interior_ensemble() -> Vec<QubitMap> {
    (0..1000u64)
        .map(|i| {
            random_map(
                i,
                RandomKind::Interior {
                    t: INTERIOR_T[i as usize % 3],
                },
            )
        })
        .collect()
}

fn mixed_ensemble() -> Vec<QubitMap> {
    (0..1000u64)
        .map(|i| {
            let kind = match i % 5 {
                0 => RandomKind::Interior {
                    t: INTERIOR_T[(i / 5) as usize % 3],
                },
                1 => RandomKind::Cp,
                2 => RandomKind::Ccp,
                3 => RandomKind::Boundary,
                _ => RandomKind::NonPositive,
            };
            random_map(10_000 + i, kind)
        })
        .collect()
}

fn ptm_json(m: &QubitMap) -> serde_json::Value {
    let p = m.ptm();
    json!({ "ptm": (0..4).map(|r| (0..4).map(|c| p[(r, c)]).collect::<Vec<_>>()).collect::<Vec<_>>() })
}

fn round_trip() -> Verdict {
    let maps = interior_ensemble();
    let results: Vec<Result<(usize, f64), String>> = maps
        .par_iter()
        .map(|m| match decompose(m, &DecomposeOptions::default()) {
            Ok(out) => Ok((
                out.decomposition.term_count(),
                verify_decomposition(m, &out.decomposition),
            )),
            Err(e) => Err(e.to_string()),
        })
        .collect();
    let mut worst = 0.0f64;
    let mut max_terms = 0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok((terms, residual)) => {
                if *terms > 4 || *residual > 1e-8 {
                    return Err(format!("map {i}: {terms} terms, residual {residual:e}"));
                }
                worst = worst.max(*residual);
                max_terms = max_terms.max(*terms);
            }
            Err(e) => return Err(format!("map {i}: {e}")),
        }
    }
    Ok(format!(
        "1000/1000 maps, at most {max_terms} terms, worst residual {worst:.2e}"
    ))
}

fn scaling_contract() -> Verdict {
    let maps = interior_ensemble();
    let opts = ScalingOptions::default();
    let outcomes: Vec<Result<(), String>> = maps
        .par_iter()
        .map(|m| match scale_to_bistochastic(m, &opts) {
            Ok(r) => {
                let phi_a = QubitMap::conjugation(&r.a.to_matrix()).map_err(|e| e.to_string())?;
                let phi_b = QubitMap::conjugation(&r.b.to_matrix()).map_err(|e| e.to_string())?;
                let rebuilt = phi_a.compose(&m.compose(&phi_b));
                let id = Herm2::identity().to_matrix();
                let unital = (rebuilt.apply(&Herm2::identity()).to_matrix() - id).norm();
                let tp = (rebuilt.adjoint().apply(&Herm2::identity()).to_matrix() - id).norm();
                if r.residual_unital > 1e-10
                    || r.residual_tp > 1e-10
                    || unital > 1e-10
                    || tp > 1e-10
                {
                    return Err(format!(
                        "accepted a result with residuals {unital:e}, {tp:e}"
                    ));
                }
                Ok(())
            }
            Err(Error::NoConvergence { .. }) => {
                let code = run_request(Command::Scale, &ptm_json(m), &Options::default()).exit_code;
                if code == EXIT_NO_CONVERGENCE {
                    Err("no_convergence".into())
                } else {
                    Err(format!("non-convergence surfaced with exit code {code}"))
                }
            }
            Err(e) => Err(e.to_string()),
        })
        .collect();
    let converged = outcomes.iter().filter(|o| o.is_ok()).count();
    if let Some(bad) = outcomes
        .iter()
        .filter_map(|o| o.as_ref().err())
        .find(|e| *e != "no_convergence")
    {
        return Err(bad.clone());
    }
    if converged < 990 {
        return Err(format!("only {converged}/1000 converged"));
    }
    for (i, m) in maps.iter().take(50).enumerate() {
        let forced = run_request(
            Command::Scale,
            &ptm_json(m),
            &Options {
                max_iter: Some(1),
                ..Default::default()
            },
        );
        if forced.exit_code != EXIT_NO_CONVERGENCE {
            return Err(format!(
                "map {i}: budget of 1 iteration gave exit code {}",
                forced.exit_code
            ));
        }
    }
    let omega =
        scale_to_bistochastic(&QubitMap::depolarizing(), &opts).map_err(|e| e.to_string())?;
    let a_err = (omega.a.to_matrix()
        - Matrix2::identity() * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
    .norm();
    let b_err = (omega.b.to_matrix()
        - Matrix2::identity() * C64::new(std::f64::consts::SQRT_2, 0.0))
    .norm();
    if a_err > 1e-12 || b_err > 1e-12 {
        return Err(format!("depolarizer scaling off by {a_err:e} / {b_err:e}"));
    }
    Ok(format!("{converged}/1000 converged, forced budget exhaustion exits 3, depolarizer closed form within {:.1e}", a_err.max(b_err)))
}

fn diag_positive(a: f64) -> bool {
    is_positive(&QubitMap::from_diagonal([1.0, a, a, a]).expect("finite")).is_positive()
}

/// Bisection for the sign change of `positive` between `inside` and `outside`.
fn crossing(mut inside: f64, mut outside: f64, positive: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if positive(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

fn oracle_agreement() -> Verdict {
    let maps = mixed_ensemble();
    let grid = fibonacci_sphere(10_000);
    let rows: Vec<(bool, bool, bool)> = maps
        .par_iter()
        .map(|m| {
            let r = is_positive(m);
            let sample_min = grid
                .iter()
                .map(|&n| pure_image_min(m, n))
                .fold(f64::INFINITY, f64::min);
            let sampled_positive = sample_min >= -1e-12 * (1.0 + m.ptm().norm());
            (
                r.verdict == PositivityVerdict::Positive,
                sampled_positive,
                r.in_margin_band,
            )
        })
        .collect();
    let band = rows.iter().filter(|r| r.2).count();
    let band_agree = rows.iter().filter(|r| r.2 && r.0 == r.1).count();
    let disagreements: Vec<usize> = (0..rows.len())
        .filter(|&i| !rows[i].2 && rows[i].0 != rows[i].1)
        .collect();
    if !disagreements.is_empty() {
        return Err(format!(
            "{} disagreements outside the band (first: map {})",
            disagreements.len(),
            disagreements[0]
        ));
    }
    let upper = crossing(0.5, 1.5, diag_positive);
    let lower = crossing(-0.5, -1.5, diag_positive);
    if (upper - 1.0).abs() > 1e-9 || (lower + 1.0).abs() > 1e-9 {
        return Err(format!("diag(1,a,a,a) crossings at {upper} and {lower}"));
    }
    Ok(format!(
        "0 disagreements on {} maps outside the band ({band} in band, {band_agree} of them agreeing), crossings at 1{:+.1e} and -1{:+.1e}",
        rows.len() - band,
        upper - 1.0,
        lower + 1.0
    ))
}

fn random_sym(seed: u64, dim: usize) -> SymMat {
    let mut rng = rng_from_seed(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut rng).re);
    SymMat::new(&m + m.transpose()).expect("finite")
}

fn slemma_soundness() -> Verdict {
    let opts = SLemmaOptions::default();
    let results: Vec<Result<bool, String>> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let dim = 2 + (i % 5) as usize;
            let f = random_sym(2 * i + 1, dim);
            let mut g = random_sym(2 * i + 2, dim);
            // guarantee a Slater point along the top eigenvector
            let eig = sym_eig(&g);
            let top = *eig.eigenvalues.last().expect("nonempty");
            if top <= 0.1 {
                g = g.lin_comb(1.0, &SymMat::identity(dim), 0.1 - top + 0.1);
            }
            let xbar: DVector<f64> = sym_eig(&g).eigenvector(dim - 1);
            let outcome = decide(&f, &g, &xbar, &opts).map_err(|e| format!("pair {i}: {e}"))?;
            let feasible = match &outcome {
                SLemmaOutcome::Feasible { mu, .. } => {
                    let lambda = f.lin_comb(1.0, &g, -mu).min_eigenvalue();
                    let bound = -1e-9 * (1.0 + f.frobenius_norm() + mu * g.frobenius_norm());
                    if *mu < 0.0 || lambda < bound {
                        return Err(format!(
                            "pair {i}: feasible certificate has λ_min {lambda:e}"
                        ));
                    }
                    true
                }
                SLemmaOutcome::Infeasible { witness, .. } => {
                    let margin = (-f.quad(witness)).min(g.quad(witness));
                    if margin < 1e-10 {
                        return Err(format!("pair {i}: witness margin {margin:e}"));
                    }
                    false
                }
            };
            let neg_g = g.lin_comb(-1.0, &g, 0.0);
            let pencil = reformulated_decide(&f, &neg_g, &PencilOptions::default())
                .map_err(|e| format!("pair {i}: {e}"))?;
            match (&pencil, feasible) {
                (PencilOutcome::Witness { t, .. }, true) if *t < 1.0 => Ok(true),
                (PencilOutcome::Counterexample { .. }, false) => Ok(false),
                (PencilOutcome::Witness { t, .. }, true) => {
                    Err(format!("pair {i}: pencil witness at the t = {t} corner"))
                }
                _ => Err(format!("pair {i}: decide and reformulated_decide disagree")),
            }
        })
        .collect();
    let mut feasible = 0;
    for r in results {
        feasible += usize::from(r?);
    }
    Ok(format!(
        "500 pairs sound and consistent ({feasible} feasible, {} infeasible)",
        500 - feasible
    ))
}

fn exact_entry(m: &Matrix2<C64>, expected: &Matrix2<C64>) -> bool {
    m == expected
}

fn known_values() -> Verdict {
    let id = Matrix2::<C64>::identity();
    let t = decompose(&QubitMap::transpose(), &DecomposeOptions::default())
        .map_err(|e| e.to_string())?;
    if !(t.decomposition.kraus.is_empty()
        && t.decomposition.co_kraus.len() == 1
        && exact_entry(&t.decomposition.co_kraus[0], &id)
        && t.residual == 0.0)
    {
        return Err(format!("transpose decomposed as {:?}", t.decomposition));
    }
    let i = decompose(&QubitMap::identity(), &DecomposeOptions::default())
        .map_err(|e| e.to_string())?;
    if !(i.decomposition.co_kraus.is_empty()
        && i.decomposition.kraus.len() == 1
        && exact_entry(&i.decomposition.kraus[0], &id)
        && i.residual == 0.0)
    {
        return Err(format!("identity decomposed as {:?}", i.decomposition));
    }
    let d = decompose(&QubitMap::depolarizing(), &DecomposeOptions::default())
        .map_err(|e| e.to_string())?;
    if d.residual > 1e-12 {
        return Err(format!("depolarizer residual {:e}", d.residual));
    }
    let bell = separability_verdict(&bell_state());
    let min = bell.pt_eigenvalues[0];
    if (min + 0.5).abs() > 1e-12 || !matches!(bell.verdict, SeparabilityVerdict::Entangled { .. }) {
        return Err(format!("Bell state minimum eigenvalue {min}"));
    }
    let separable = |p: f64| {
        separability_verdict(&werner_state(p).expect("valid")).verdict
            == SeparabilityVerdict::Separable
    };
    let threshold = crossing(0.0, 1.0, separable);
    if (threshold - 1.0 / 3.0).abs() > 1e-9 {
        return Err(format!("Werner threshold at {threshold}"));
    }
    Ok(format!(
        "transpose and identity exact, depolarizer residual {:.1e}, Bell min {min}, Werner threshold 1/3{:+.1e}",
        d.residual,
        threshold - 1.0 / 3.0
    ))
}

/// `x ↦ (cosh η, sinh η·n)`-boost along unit `n`, followed by an orthogonal
/// map on the spatial block.
fn lorentz_transformation(seed: u64, m: usize) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    let mut gauss = || complex_gaussian(&mut rng).re;
    let raw = DVector::from_fn(m - 1, |_, _| gauss());
    let n = raw.normalize();
    let eta = gauss().abs().min(2.0);
    let mut boost = DMatrix::identity(m, m);
    boost[(0, 0)] = eta.cosh();
    for i in 0..m - 1 {
        boost[(0, i + 1)] = eta.sinh() * n[i];
        boost[(i + 1, 0)] = eta.sinh() * n[i];
        for j in 0..m - 1 {
            boost[(i + 1, j + 1)] += (eta.cosh() - 1.0) * n[i] * n[j];
        }
    }
    let q = DMatrix::from_fn(m - 1, m - 1, |_, _| gauss()).qr().q();
    let mut rot = DMatrix::identity(m, m);
    rot.view_mut((1, 1), (m - 1, m - 1)).copy_from(&q);
    boost * rot
}

fn boundary_ray(seed: u64, m: usize) -> DVector<f64> {
    let mut rng = rng_from_seed(seed);
    let raw = DVector::from_fn(m - 1, |_, _| complex_gaussian(&mut rng).re).normalize();
    let scale = 0.5 + complex_gaussian(&mut rng).re.abs();
    let mut v = DVector::zeros(m);
    v[0] = scale;
    v.rows_mut(1, m - 1).copy_from(&(raw * scale));
    v
}

fn check_not_extreme(l: &LorentzMap) -> Result<(), String> {
    match classify(l).map_err(|e| e.to_string())? {
        ExtremalVerdict::NotExtreme { delta, .. } => {
            let plus = LorentzMap(l.matrix() + delta.matrix());
            let minus = LorentzMap(l.matrix() - delta.matrix());
            if cone_preservation(&plus, 1e-10).preserves()
                && cone_preservation(&minus, 1e-10).preserves()
            {
                Ok(())
            } else {
                Err("perturbation leaves the cone".into())
            }
        }
        other => Err(format!("strict mix classified as {other:?}")),
    }
}

fn extremal_suite() -> Verdict {
    let per_dim: Vec<Result<(), String>> = [3usize, 4, 5, 6]
        .par_iter()
        .flat_map(|&m| (0..200u64).into_par_iter().map(move |i| (m, i)))
        .map(|(m, i)| {
            let seed = (m as u64) << 32 | i;
            let tag = |e: String| format!("m = {m}, instance {i}: {e}");
            // automorphism
            let (l, mu_expected) = if m == 4 {
                let mut rng = rng_from_seed(seed);
                let v = Matrix2::from_fn(|_, _| complex_gaussian(&mut rng));
                let phi = QubitMap::conjugation(&v).map_err(|e| tag(e.to_string()))?;
                (LorentzMap::from_qubit_map(&phi), v.determinant().norm_sqr())
            } else {
                let c = 0.5 + (i as f64) / 200.0;
                (LorentzMap(lorentz_transformation(seed, m) * c), c * c)
            };
            match classify(&l).map_err(|e| tag(e.to_string()))? {
                ExtremalVerdict::Automorphism { mu }
                    if (mu - mu_expected).abs() <= 1e-9 * mu_expected.max(1.0) => {}
                other => {
                    return Err(tag(format!(
                        "automorphism classified as {other:?}, expected μ = {mu_expected}"
                    )))
                }
            }
            // rank one on boundary rays
            let rank_one = if m == 4 {
                let mut rng = rng_from_seed(seed ^ 0xabcd);
                let psi = nalgebra::Vector2::from_fn(|_, _| complex_gaussian(&mut rng));
                let xi = nalgebra::Vector2::from_fn(|_, _| complex_gaussian(&mut rng));
                let k = psi * xi.adjoint();
                LorentzMap::from_qubit_map(
                    &QubitMap::from_kraus(&[k], &[]).map_err(|e| tag(e.to_string()))?,
                )
            } else {
                let u = boundary_ray(seed ^ 1, m);
                let v = boundary_ray(seed ^ 2, m);
                LorentzMap(&u * v.transpose())
            };
            match classify(&rank_one).map_err(|e| tag(e.to_string()))? {
                ExtremalVerdict::RankOneExtreme { .. } => {}
                other => return Err(tag(format!("rank-one map classified as {other:?}"))),
            }
            // strict convex mix of two automorphisms
            let w = 0.1 + 0.8 * ((i * 37 % 200) as f64) / 200.0;
            let mix = if m == 4 {
                let mut rng = rng_from_seed(seed ^ 0x1234);
                let v1 = haar_su2(&mut rng) * C64::new(1.3, 0.0);
                let v2 = Matrix2::from_fn(|_, _| complex_gaussian(&mut rng));
                let a = QubitMap::conjugation(&v1).map_err(|e| tag(e.to_string()))?;
                let b = QubitMap::conjugation(&v2).map_err(|e| tag(e.to_string()))?;
                LorentzMap::from_qubit_map(&a.mix(&b, w))
            } else {
                let a = lorentz_transformation(seed ^ 3, m);
                let b = lorentz_transformation(seed ^ 4, m);
                LorentzMap(a * (1.0 - w) + b * w)
            };
            check_not_extreme(&mix).map_err(tag)
        })
        .collect();
    for r in per_dim {
        r?;
    }
    Ok("m = 3, 4, 5, 6: 200 automorphisms, 200 rank-one extremes, 200 strict mixes each".into())
}

fn spinor_and_adjoint() -> Verdict {
    let mut worst_lift = 0.0f64;
    let mut worst_adj = 0.0f64;
    for seed in 0..1000u64 {
        let mut rng = rng_from_seed(seed);
        let u = haar_su2(&mut rng);
        let lifted = spinor_lift(&rotation_of(&u)).map_err(|e| e.to_string())?;
        worst_lift = worst_lift.max((lifted - u).norm().min((lifted + u).norm()));
        let m = Matrix2::from_fn(|_, _| complex_gaussian(&mut rng));
        let a = QubitMap::conjugation(&m)
            .map_err(|e| e.to_string())?
            .adjoint();
        let b = QubitMap::conjugation(&m.adjoint()).map_err(|e| e.to_string())?;
        worst_adj = worst_adj.max(a.distance(&b));
    }
    if worst_lift > 1e-12 || worst_adj > 1e-12 {
        return Err(format!(
            "spinor lift error {worst_lift:e}, adjoint error {worst_adj:e}"
        ));
    }
    let mut maps = mixed_ensemble();
    maps.extend(interior_ensemble());
    maps.push(QubitMap::new(-Matrix4::identity()).expect("finite"));
    let mismatches: Vec<usize> = maps
        .par_iter()
        .enumerate()
        .filter(|(_, m)| is_positive(m).verdict != is_positive(&m.adjoint()).verdict)
        .map(|(i, _)| i)
        .collect();
    if let Some(i) = mismatches.first() {
        return Err(format!(
            "{} adjoint positivity mismatches (first: map {i})",
            mismatches.len()
        ));
    }
    Ok(format!(
        "lift error {worst_lift:.1e}, adjoint error {worst_adj:.1e}, adjoint positivity agrees on {} maps",
        maps.len()
    ))
}

fn boundary_honesty() -> Verdict {
    let eps_min = *DEFAULT_EPS_SCHEDULE.last().expect("nonempty");
    let omega = QubitMap::depolarizing();
    let results: Vec<Result<f64, String>> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let m = random_map(50_000 + i, RandomKind::Boundary);
            let out = decompose_general(&m, &DEFAULT_EPS_SCHEDULE, &DecomposeOptions::default())
                .map_err(|e| format!("map {i}: {e}"))?;
            let measured = verify_decomposition(&m, &out.decomposition);
            if measured != out.residual {
                return Err(format!(
                    "map {i}: reported {:e}, measured {measured:e}",
                    out.residual
                ));
            }
            if out.residual > out.residual_bound * (1.0 + 1e-12) {
                return Err(format!(
                    "map {i}: residual {:e} exceeds its bound {:e}",
                    out.residual, out.residual_bound
                ));
            }
            let allowed = 3.0 * eps_min * m.distance(&omega);
            if out.residual > allowed {
                return Err(format!(
                    "map {i}: residual {:e} > {allowed:e}",
                    out.residual
                ));
            }
            Ok(out.residual / (eps_min * m.distance(&omega)))
        })
        .collect();
    let mut worst = 0.0f64;
    for r in results {
        worst = worst.max(r?);
    }
    Ok(format!(
        "100/100 boundary maps verified, worst residual / (ε_min‖Φ−Ω‖) = {worst:.3}"
    ))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("round trip on 1000 interior maps", round_trip),
        ("bistochastic scaling contract", scaling_contract),
        ("positivity oracle agreement", oracle_agreement),
        ("S-lemma soundness and pencil consistency", slemma_soundness),
        ("known values", known_values),
        ("extremal classification", extremal_suite),
        ("spinor and adjoint identities", spinor_and_adjoint),
        ("boundary honesty", boundary_honesty),
    ];
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1}s)", n + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name}: {detail} ({secs:.1}s)", n + 1);
            }
        }
    }
    if failures == 0 {
        println!("acceptance: 8/8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
