//! Command handlers. Each handler parses its input, runs the library, and
//! returns a result object together with a certificate that `verify` accepts
//! unchanged.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use posmap_core::decomp::{self, DecomposeOptions, DecompositionPath, DEFAULT_EPS_SCHEDULE};
use posmap_core::extremal::{self, ExtremalVerdict};
use posmap_core::lorentz::{
    cone_preservation, in_cone, minkowski, ConeMembership, LorentzMap, LorentzVec, Orientation,
};
use posmap_core::numkit::SymMat;
use posmap_core::positivity::{
    self, PositivityCertificate, PositivityOptions, PositivityResult, PositivityVerdict,
};
use posmap_core::ppt::{self, SeparabilityVerdict, TwoQubitState};
use posmap_core::qmap::{random_map, RandomKind};
use posmap_core::scaling::{self, ScalingOptions, ScalingScheme};
use posmap_core::slemma::{self, PencilOptions, PencilOutcome, SLemmaOptions, SLemmaOutcome};
use posmap_core::{Decomposition, Herm2, QubitMap, C64};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::schema::*;

const DEFAULT_MAX_ITER: usize = 10_000;
const DEFAULT_SLEMMA_TOL: f64 = 1e-9;
const DEFAULT_VERIFY_TOL: f64 = 1e-9;
const DEFAULT_DECOMPOSITION_TOL: f64 = 1e-8;
const DEFAULT_INTERIOR_T: f64 = 0.3;

/// Result object plus certificate (`Value::Null` when the command makes no
/// claim, as for `random`).
pub struct Outcome {
    pub result: Value,
    pub certificate: Value,
}

/// A failure that still carries re-verifiable evidence for its verdict.
pub struct Failure {
    pub error: CliError,
    pub certificate: Value,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Self {
            error,
            certificate: Value::Null,
        }
    }
}

impl From<posmap_core::Error> for Failure {
    fn from(e: posmap_core::Error) -> Self {
        CliError::from(e).into()
    }
}

type Handled = Result<Outcome, Failure>;

pub fn dispatch(command: Command, input: &Value, opts: &Options) -> Handled {
    match command {
        Command::Check => check(parse(input)?, opts),
        Command::Scale => scale(parse(input)?, opts),
        Command::Decompose => decompose(parse(input)?, opts),
        Command::Slemma => slemma_cmd(parse(input)?, opts),
        Command::Extreme => extreme(parse(input)?),
        Command::Ppt => ppt_cmd(parse(input)?),
        Command::Random => random(parse(input)?, opts),
        Command::Verify => verify(parse(input)?, opts),
    }
}

/// Deserializes `input`, reporting the field path of the first error.
pub fn parse<T: DeserializeOwned>(input: &Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(input).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            "input".to_string()
        } else {
            format!("input.{inner}")
        };
        CliError::invalid(path, e.into_inner().to_string())
    })
}

// JSON encoders -------------------------------------------------------------

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn cmat2_json(m: &Matrix2<C64>) -> Value {
    json!([
        [complex(m[(0, 0)]), complex(m[(0, 1)])],
        [complex(m[(1, 0)]), complex(m[(1, 1)])]
    ])
}

fn herm2_json(h: &Herm2) -> Value {
    cmat2_json(&h.to_matrix())
}

fn ptm_json(m: &Matrix4<f64>) -> Value {
    Value::Array(
        (0..4)
            .map(|r| json!([m[(r, 0)], m[(r, 1)], m[(r, 2)], m[(r, 3)]]))
            .collect(),
    )
}

fn dmat_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| json!(m.row(r).iter().copied().collect::<Vec<_>>()))
            .collect(),
    )
}

fn cdmat_json(m: &DMatrix<C64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array(m.row(r).iter().map(|z| complex(*z)).collect()))
            .collect(),
    )
}

fn dvec_json(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<_>>())
}

fn map_json(m: &QubitMap) -> Value {
    json!({ "ptm": ptm_json(m.ptm()) })
}

fn decomposition_json(d: &Decomposition) -> Value {
    json!({
        "kraus": d.kraus.iter().map(cmat2_json).collect::<Vec<_>>(),
        "co_kraus": d.co_kraus.iter().map(cmat2_json).collect::<Vec<_>>(),
    })
}

fn map_from(input: &MapInput) -> Result<QubitMap, CliError> {
    input.to_map("input")
}

// check ----------------------------------------------------------------------

fn positivity_options(opts: &Options) -> PositivityOptions {
    let mut p = PositivityOptions::default();
    if let Some(tol) = opts.tol {
        p.tol = tol;
    }
    p
}

fn verdict_name(v: PositivityVerdict) -> &'static str {
    match v {
        PositivityVerdict::Positive => "positive",
        PositivityVerdict::NegativePositive => "negative_positive",
        PositivityVerdict::NotPositive => "not_positive",
    }
}

fn positivity_certificate_json(m: &QubitMap, r: &PositivityResult) -> Value {
    let inner = match &r.certificate {
        PositivityCertificate::SLemma { mu, .. } => json!({ "slemma": { "mu": mu } }),
        PositivityCertificate::ViolatingState { bloch, .. } => {
            json!({ "violating_state": { "bloch": bloch } })
        }
        PositivityCertificate::ZeroMap => json!({ "zero_map": {} }),
    };
    json!({ "kind": "positivity", "map": map_json(m), "certificate": inner })
}

fn positivity_json(r: &PositivityResult) -> Value {
    let witness = match &r.certificate {
        PositivityCertificate::SLemma { mu, q, g_star } => json!({
            "slemma": { "mu": mu, "g_star": g_star, "q": dmat_json(q.as_matrix()) }
        }),
        PositivityCertificate::ViolatingState {
            phi,
            bloch,
            min_eigenvalue,
        } => json!({
            "violating_state": {
                "phi": [complex(phi[0]), complex(phi[1])],
                "bloch": bloch,
                "min_eigenvalue": min_eigenvalue,
            }
        }),
        PositivityCertificate::ZeroMap => json!({ "zero_map": {} }),
    };
    json!({
        "verdict": verdict_name(r.verdict),
        "g_star": r.g_star,
        "mu": r.mu,
        "scale": r.scale,
        "degenerate": r.degenerate,
        "in_margin_band": r.in_margin_band,
        "witness": witness,
    })
}

fn check(input: MapInput, opts: &Options) -> Handled {
    let m = map_from(&input)?;
    let popts = positivity_options(opts);
    let report = positivity::property_report_with(&m, &popts);
    let result = json!({
        "map": map_json(&m),
        "positive": report.positive.is_positive(),
        "positivity": positivity_json(&report.positive),
        "interior": report.interior.interior,
        "interior_report": {
            "g_star": report.interior.g_star,
            "scale": report.interior.scale,
            "relative_margin": report.interior.relative_margin(),
            "sample_min": report.interior.sample_min,
            "boundary_within_tolerance": report.interior.boundary_band,
        },
        "cp": report.cp,
        "ccp": report.ccp,
        "choi_min": report.choi_min,
        "choi_t_min": report.choi_t_min,
        "unital": report.unital,
        "trace_preserving": report.trace_preserving,
        "bistochastic": report.bistochastic,
        "unital_defect": report.unital_defect,
        "tp_defect": report.tp_defect,
    });
    Ok(Outcome {
        result,
        certificate: positivity_certificate_json(&m, &report.positive),
    })
}

/// Attaches the positivity certificate of `m` to a refusal, so a "not
/// positive" verdict can be re-checked like any other.
fn refusal_with_positivity(e: posmap_core::Error, m: &QubitMap) -> Failure {
    let error = CliError::from(e);
    let certificate = if error.kind == "NotPositive" || error.kind == "NotInterior" {
        positivity_certificate_json(m, &positivity::is_positive(m))
    } else {
        Value::Null
    };
    Failure { error, certificate }
}

// scale ----------------------------------------------------------------------

fn scheme_name(s: ScalingScheme) -> &'static str {
    match s {
        ScalingScheme::Damped => "damped",
        ScalingScheme::Newton => "newton",
        ScalingScheme::Alternating => "alternating",
    }
}

fn scaling_options(opts: &Options) -> ScalingOptions {
    let mut s = ScalingOptions::default();
    if let Some(tol) = opts.tol {
        s.tol = tol;
    }
    s.max_iter = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    s
}

fn scale(input: MapInput, opts: &Options) -> Handled {
    let m = map_from(&input)?;
    let r = scaling::scale_to_bistochastic(&m, &scaling_options(opts))
        .map_err(|e| refusal_with_positivity(e, &m))?;
    let result = json!({
        "a": herm2_json(&r.a),
        "b": herm2_json(&r.b),
        "scaled": map_json(&r.scaled),
        "sigma0": herm2_json(&r.sigma0),
        "iterations": r.iterations,
        "residual_unital": r.residual_unital,
        "residual_tp": r.residual_tp,
        "fixed_point_residual": r.fixed_point_residual,
        "alpha": r.alpha,
        "scheme": scheme_name(r.scheme),
        "warning": r.warning,
    });
    let certificate = json!({
        "kind": "scaling",
        "map": map_json(&m),
        "a": herm2_json(&r.a),
        "b": herm2_json(&r.b),
    });
    Ok(Outcome {
        result,
        certificate,
    })
}

// decompose ------------------------------------------------------------------

fn path_json(p: DecompositionPath) -> Value {
    match p {
        DecompositionPath::Bistochastic => json!("bistochastic"),
        DecompositionPath::Interior => json!("interior"),
        DecompositionPath::Regularized { eps } => json!({ "regularized": { "eps": eps } }),
    }
}

fn decompose(input: MapInput, opts: &Options) -> Handled {
    let m = map_from(&input)?;
    let mut dopts = DecomposeOptions {
        tol: opts.tol.unwrap_or(DEFAULT_DECOMPOSITION_TOL),
        ..Default::default()
    };
    dopts.scaling.max_iter = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    let schedule = opts
        .eps_schedule
        .clone()
        .unwrap_or_else(|| DEFAULT_EPS_SCHEDULE.to_vec());
    let out = decomp::decompose_general(&m, &schedule, &dopts)
        .map_err(|e| refusal_with_positivity(e, &m))?;
    let steps: Vec<Value> = out
        .steps
        .iter()
        .map(|s| match &s.outcome {
            Ok((terms, residual)) => json!({ "eps": s.eps, "terms": terms, "residual": residual }),
            Err(e) => json!({ "eps": s.eps, "error": CliError::from(e.clone()).to_json() }),
        })
        .collect();
    let d = &out.decomposition;
    let result = json!({
        "decomposition": decomposition_json(d),
        "terms": d.term_count(),
        "residual": out.residual,
        "residual_bound": out.residual_bound,
        "path": path_json(out.path),
        "steps": steps,
    });
    let certificate = json!({
        "kind": "decomposition",
        "map": map_json(&m),
        "decomposition": decomposition_json(d),
        "residual_bound": out.residual_bound.max(out.residual),
    });
    Ok(Outcome {
        result,
        certificate,
    })
}

// slemma ---------------------------------------------------------------------

fn slemma_cmd(input: SlemmaInput, opts: &Options) -> Handled {
    let tol = opts.tol.unwrap_or(DEFAULT_SLEMMA_TOL);
    match (&input.f, &input.g, &input.xbar, &input.m, &input.n) {
        (Some(f), Some(g), Some(xbar), None, None) => {
            let fm = sym_matrix(f, "input.F")?;
            let gm = sym_matrix(g, "input.G")?;
            let x = DVector::from_vec(xbar.clone());
            let sopts = SLemmaOptions {
                tol,
                seed: opts.seed.unwrap_or(0),
                ..Default::default()
            };
            let outcome = slemma::decide(&fm, &gm, &x, &sopts)?;
            let (result, cert) = match &outcome {
                SLemmaOutcome::Feasible {
                    mu,
                    q,
                    margin,
                    threshold,
                } => (
                    json!({
                        "verdict": "feasible",
                        "mu": mu,
                        "q": dmat_json(q.as_matrix()),
                        "margin": margin,
                        "threshold": threshold,
                    }),
                    json!({ "feasible": { "mu": mu } }),
                ),
                SLemmaOutcome::Infeasible {
                    witness,
                    f_value,
                    g_value,
                    margin,
                    g_star,
                    mu,
                } => (
                    json!({
                        "verdict": "infeasible",
                        "witness": dvec_json(witness),
                        "f_value": f_value,
                        "g_value": g_value,
                        "margin": margin,
                        "g_star": g_star,
                        "mu": mu,
                    }),
                    json!({ "infeasible": { "witness": dvec_json(witness) } }),
                ),
            };
            let certificate =
                json!({ "kind": "slemma", "F": f, "G": g, "xbar": xbar, "certificate": cert });
            Ok(Outcome {
                result,
                certificate,
            })
        }
        (None, None, None, Some(mm), Some(nn)) => {
            let a = sym_matrix(mm, "input.M")?;
            let b = sym_matrix(nn, "input.N")?;
            let outcome = slemma::reformulated_decide(
                &a,
                &b,
                &PencilOptions {
                    tol,
                    ..Default::default()
                },
            )?;
            let (result, cert) = match &outcome {
                PencilOutcome::Witness { t, lambda_min } => (
                    json!({ "verdict": "witness", "t": t, "lambda_min": lambda_min }),
                    json!({ "witness": { "t": t } }),
                ),
                PencilOutcome::Counterexample {
                    x,
                    m_value,
                    n_value,
                    t,
                } => (
                    json!({
                        "verdict": "counterexample",
                        "x": dvec_json(x),
                        "m_value": m_value,
                        "n_value": n_value,
                        "t": t,
                    }),
                    json!({ "counterexample": { "x": dvec_json(x) } }),
                ),
            };
            let certificate = json!({ "kind": "pencil", "M": mm, "N": nn, "certificate": cert });
            Ok(Outcome {
                result,
                certificate,
            })
        }
        _ => Err(CliError::invalid("input", "expected either {F, G, xbar} or {M, N}").into()),
    }
}

// extreme --------------------------------------------------------------------

fn extreme(input: ExtremeInput) -> Handled {
    let (l, qubit) = match input.lorentz {
        Some(rows) => {
            if input.ptm.is_some() || input.kraus.is_some() || input.co_kraus.is_some() {
                return Err(CliError::invalid(
                    "input",
                    "give either \"lorentz\" or a qubit map, not both",
                )
                .into());
            }
            let mat = real_matrix(&rows, "input.lorentz")?;
            (
                LorentzMap::new(mat)
                    .map_err(|e| CliError::invalid("input.lorentz", e.to_string()))?,
                None,
            )
        }
        None => {
            let m = MapInput {
                ptm: input.ptm,
                kraus: input.kraus,
                co_kraus: input.co_kraus,
            }
            .to_map("input")?;
            (LorentzMap::from_qubit_map(&m), Some(m))
        }
    };
    let verdict = extremal::classify(&l)?;
    let (mut result, cert) = match &verdict {
        ExtremalVerdict::Automorphism { mu } => (
            json!({ "verdict": "automorphism", "mu": mu }),
            json!({ "automorphism": { "mu": mu } }),
        ),
        ExtremalVerdict::RankOneExtreme { u, v } => (
            json!({ "verdict": "rank_one_extreme", "u": dvec_json(&u.0), "v": dvec_json(&v.0) }),
            json!({ "rank_one_extreme": { "u": dvec_json(&u.0), "v": dvec_json(&v.0) } }),
        ),
        ExtremalVerdict::NotExtreme { delta, eps } => (
            json!({ "verdict": "not_extreme", "delta": dmat_json(delta.matrix()), "eps": eps }),
            json!({ "not_extreme": { "delta": dmat_json(delta.matrix()) } }),
        ),
        ExtremalVerdict::NotInCone => (
            json!({ "verdict": "not_in_cone" }),
            json!({ "not_in_cone": {} }),
        ),
    };
    if let (Some(m), ExtremalVerdict::Automorphism { .. }) = (&qubit, &verdict) {
        result["kraus_form"] = match extremal::kadison_extract(m) {
            Ok((v, transposed)) => json!({ "v": cmat2_json(&v), "transposed": transposed }),
            Err(e) => json!({ "error": CliError::from(e).to_json() }),
        };
    }
    let certificate =
        json!({ "kind": "extremal", "lorentz": dmat_json(l.matrix()), "certificate": cert });
    Ok(Outcome {
        result,
        certificate,
    })
}

// ppt ------------------------------------------------------------------------

fn ppt_cmd(input: PptInput) -> Handled {
    let rho = complex_matrix(&input.rho, 4, "input.rho")?;
    let state = TwoQubitState::new(rho.clone())
        .map_err(|e| CliError::invalid("input.rho", e.to_string()))?;
    let report = ppt::separability_verdict(&state);
    let (verdict, min) = match report.verdict {
        SeparabilityVerdict::Separable => ("separable", report.pt_eigenvalues[0]),
        SeparabilityVerdict::Entangled { min_pt_eigenvalue } => ("entangled", min_pt_eigenvalue),
    };
    let result = json!({
        "verdict": verdict,
        "min_pt_eigenvalue": min,
        "pt_eigenvalues": report.pt_eigenvalues,
        "ppt_boundary": report.boundary,
        "partial_transpose": cdmat_json(ppt::partial_transpose(&state).as_matrix()),
    });
    let certificate = json!({
        "kind": "ppt",
        "rho": cdmat_json(&rho),
        "separable": report.verdict == SeparabilityVerdict::Separable,
    });
    Ok(Outcome {
        result,
        certificate,
    })
}

// random ---------------------------------------------------------------------

fn random(input: RandomInput, opts: &Options) -> Handled {
    let seed = input.seed.or(opts.seed).unwrap_or(0);
    if input.t.is_some() && input.kind != RandomKindName::Interior {
        return Err(
            CliError::invalid("input.t", "only the interior family takes a mixing weight").into(),
        );
    }
    let (kind, name) = match input.kind {
        RandomKindName::Interior => {
            let t = input.t.unwrap_or(DEFAULT_INTERIOR_T);
            if !(t > 0.0 && t <= 1.0) {
                return Err(CliError::invalid(
                    "input.t",
                    format!("mixing weight {t} is not in (0, 1]"),
                )
                .into());
            }
            (RandomKind::Interior { t }, "interior")
        }
        RandomKindName::Cp => (RandomKind::Cp, "cp"),
        RandomKindName::Ccp => (RandomKind::Ccp, "ccp"),
        RandomKindName::Boundary => (RandomKind::Boundary, "boundary"),
        RandomKindName::Nonpositive => (RandomKind::NonPositive, "nonpositive"),
    };
    let m = random_map(seed, kind);
    let result = json!({ "kind": name, "t": input.t, "seed": seed, "map": map_json(&m) });
    Ok(Outcome {
        result,
        certificate: Value::Null,
    })
}

// verify ---------------------------------------------------------------------

fn checked_result(valid: bool, claim: &str, details: Value) -> Outcome {
    Outcome {
        result: json!({ "valid": valid, "claim": claim, "details": details }),
        certificate: Value::Null,
    }
}

fn sym_from_dmat(m: DMatrix<f64>) -> SymMat {
    SymMat::new(m).expect("symmetric by construction")
}

/// Quadratic part of cone preservation at a given `μ`, plus the orientation
/// read from the first row.
fn cone_certificate(l: &DMatrix<f64>, mu: f64, tol: f64) -> (bool, f64, f64, Orientation) {
    let dim = l.nrows();
    let j = minkowski(dim);
    let f = sym_from_dmat(l.transpose() * j.as_matrix() * l);
    let q = f.lin_comb(1.0, &j, -mu);
    let g = q.min_eigenvalue();
    let scale = 1.0 + f.frobenius_norm() + mu * j.frobenius_norm();
    let row = LorentzVec::new(l.row(0).iter().copied().collect());
    let orientation = match in_cone(&row, tol) {
        ConeMembership::Interior | ConeMembership::Boundary => Orientation::Positive,
        ConeMembership::NegativeCone => Orientation::Negative,
        ConeMembership::Outside => Orientation::Neither,
    };
    (mu >= 0.0 && g >= -tol * scale, g, scale, orientation)
}

fn vector(v: &[f64], dim: usize, path: &str) -> Result<DVector<f64>, CliError> {
    if v.len() != dim {
        return Err(CliError::invalid(
            path,
            format!("expected {dim} entries, got {}", v.len()),
        ));
    }
    Ok(DVector::from_column_slice(v))
}

fn verify(input: VerifyInput, opts: &Options) -> Handled {
    let tol = opts.tol.unwrap_or(DEFAULT_VERIFY_TOL);
    let outcome = match input {
        VerifyInput::Decomposition {
            map,
            decomposition,
            residual_bound,
        } => {
            let m = map.to_map("input.map")?;
            let d = Decomposition {
                kraus: decomposition.kraus.iter().map(cmat2).collect(),
                co_kraus: decomposition.co_kraus.iter().map(cmat2).collect(),
            };
            let residual = decomp::verify_decomposition(&m, &d);
            let allowed = residual_bound
                .unwrap_or(0.0)
                .max(opts.tol.unwrap_or(DEFAULT_DECOMPOSITION_TOL));
            let valid = residual <= allowed && d.term_count() <= 4;
            checked_result(
                valid,
                "decomposition",
                json!({ "residual": residual, "allowed": allowed, "terms": d.term_count() }),
            )
        }
        VerifyInput::Positivity { map, certificate } => {
            let m = map.to_map("input.map")?;
            match certificate {
                PositivityCertificateInput::Slemma { mu } => {
                    let l = LorentzMap::from_qubit_map(&m);
                    let (ok, g, scale, orientation) = cone_certificate(l.matrix(), mu, tol);
                    let claim = match orientation {
                        Orientation::Positive => "positive",
                        Orientation::Negative => "negative_positive",
                        Orientation::Neither => "none",
                    };
                    checked_result(
                        ok && orientation != Orientation::Neither,
                        claim,
                        json!({ "g": g, "scale": scale }),
                    )
                }
                PositivityCertificateInput::ViolatingState { bloch } => {
                    let norm = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if !(norm > 0.0 && norm.is_finite()) {
                        return Err(CliError::invalid(
                            "input.certificate.violating_state.bloch",
                            "zero vector",
                        )
                        .into());
                    }
                    let n = [bloch[0] / norm, bloch[1] / norm, bloch[2] / norm];
                    let min = positivity::pure_image_min(&m, n);
                    checked_result(min < 0.0, "not_positive", json!({ "min_eigenvalue": min }))
                }
                PositivityCertificateInput::ZeroMap {} => {
                    let norm = m.ptm().norm();
                    checked_result(norm <= tol, "zero_map", json!({ "norm": norm }))
                }
            }
        }
        VerifyInput::Scaling { map, a, b } => {
            let m = map.to_map("input.map")?;
            let (a, b) = (cmat2(&a), cmat2(&b));
            let pd = |h: &Matrix2<C64>| {
                let herm = (h - h.adjoint()).norm() <= tol * (1.0 + h.norm());
                herm && Herm2::from_matrix(h).min_eigenvalue() > 0.0
            };
            let phi_a = QubitMap::conjugation(&a)
                .map_err(|e| CliError::invalid("input.a", e.to_string()))?;
            let phi_b = QubitMap::conjugation(&b)
                .map_err(|e| CliError::invalid("input.b", e.to_string()))?;
            let scaled = phi_a.compose(&m.compose(&phi_b));
            let id = Herm2::identity();
            let residual_unital = (scaled.apply(&id).to_matrix() - id.to_matrix()).norm();
            let residual_tp = (scaled.adjoint().apply(&id).to_matrix() - id.to_matrix()).norm();
            let valid = pd(&a) && pd(&b) && residual_unital <= tol && residual_tp <= tol;
            checked_result(
                valid,
                "bistochastic_scaling",
                json!({ "residual_unital": residual_unital, "residual_tp": residual_tp }),
            )
        }
        VerifyInput::Slemma {
            f,
            g,
            xbar,
            certificate,
        } => {
            let fm = sym_matrix(&f, "input.F")?;
            let gm = sym_matrix(&g, "input.G")?;
            let x = vector(&xbar, gm.dim(), "input.xbar")?;
            let slater = gm.quad(&x);
            match certificate {
                SlemmaCertificateInput::Feasible { mu } => {
                    let lambda = fm.lin_comb(1.0, &gm, -mu).min_eigenvalue();
                    let threshold = slemma::feasibility_threshold(&fm, &gm, mu, tol);
                    let valid = slater > 0.0 && mu >= 0.0 && lambda >= -threshold;
                    checked_result(
                        valid,
                        "implication_holds",
                        json!({ "lambda_min": lambda, "threshold": threshold, "slater": slater }),
                    )
                }
                SlemmaCertificateInput::Infeasible { witness } => {
                    let w = vector(&witness, fm.dim(), "input.certificate.infeasible.witness")?;
                    let (fv, gv) = (fm.quad(&w), gm.quad(&w));
                    checked_result(
                        gv > 0.0 && fv < 0.0,
                        "implication_fails",
                        json!({ "f_value": fv, "g_value": gv, "slater": slater }),
                    )
                }
            }
        }
        VerifyInput::Pencil { m, n, certificate } => {
            let a = sym_matrix(&m, "input.M")?;
            let b = sym_matrix(&n, "input.N")?;
            if a.dim() != b.dim() {
                return Err(CliError::invalid("input.N", "dimension differs from M").into());
            }
            match certificate {
                PencilCertificateInput::Witness { t } => {
                    let lambda = a.lin_comb(1.0 - t, &b, t).min_eigenvalue();
                    let scale = 1.0 + (1.0 - t) * a.frobenius_norm() + t * b.frobenius_norm();
                    let valid = (0.0..=1.0).contains(&t) && lambda >= -tol * scale;
                    checked_result(
                        valid,
                        "pencil_psd",
                        json!({ "lambda_min": lambda, "scale": scale }),
                    )
                }
                PencilCertificateInput::Counterexample { x } => {
                    let v = vector(&x, a.dim(), "input.certificate.counterexample.x")?;
                    let (mv, nv) = (a.quad(&v), b.quad(&v));
                    checked_result(
                        mv < 0.0 && nv < 0.0,
                        "common_negative_vector",
                        json!({ "m_value": mv, "n_value": nv }),
                    )
                }
            }
        }
        VerifyInput::Extremal {
            lorentz,
            certificate,
        } => {
            let l = real_matrix(&lorentz, "input.lorentz")?;
            let lm = LorentzMap::new(l.clone())
                .map_err(|e| CliError::invalid("input.lorentz", e.to_string()))?;
            let dim = l.nrows();
            match certificate {
                ExtremalCertificateInput::Automorphism { mu } => {
                    let j = minkowski(dim);
                    let f = l.transpose() * j.as_matrix() * &l;
                    let defect = (&f - j.as_matrix() * mu).norm();
                    let (_, _, _, orientation) = cone_certificate(&l, mu, tol);
                    let valid = mu > 0.0
                        && defect <= tol * (1.0 + f.norm())
                        && orientation == Orientation::Positive;
                    checked_result(valid, "automorphism", json!({ "defect": defect }))
                }
                ExtremalCertificateInput::RankOneExtreme { u, v } => {
                    let u = vector(&u, dim, "input.certificate.rank_one_extreme.u")?;
                    let v = vector(&v, dim, "input.certificate.rank_one_extreme.v")?;
                    let defect = (&l - &u * v.transpose()).norm();
                    let on_boundary = |x: &DVector<f64>| {
                        in_cone(&LorentzVec(x.clone()), extremal::RANK_TOL)
                            == ConeMembership::Boundary
                    };
                    let valid =
                        defect <= tol * (1.0 + l.norm()) && on_boundary(&u) && on_boundary(&v);
                    checked_result(valid, "extreme_ray", json!({ "defect": defect }))
                }
                ExtremalCertificateInput::NotExtreme { delta } => {
                    let d = real_matrix(&delta, "input.certificate.not_extreme.delta")?;
                    if d.nrows() != dim {
                        return Err(CliError::invalid(
                            "input.certificate.not_extreme.delta",
                            "dimension differs",
                        )
                        .into());
                    }
                    let plus = cone_preservation(&LorentzMap(&l + &d), tol).preserves();
                    let minus = cone_preservation(&LorentzMap(&l - &d), tol).preserves();
                    let size = d.norm();
                    checked_result(
                        plus && minus && size > 0.0,
                        "not_extreme",
                        json!({ "plus_preserves": plus, "minus_preserves": minus, "delta_norm": size }),
                    )
                }
                ExtremalCertificateInput::NotInCone {} => {
                    let test = cone_preservation(&lm, tol);
                    checked_result(
                        !test.preserves(),
                        "not_in_cone",
                        json!({ "g_star": test.g_star }),
                    )
                }
            }
        }
        VerifyInput::Ppt { rho, separable } => {
            let r = complex_matrix(&rho, 4, "input.rho")?;
            let state =
                TwoQubitState::new(r).map_err(|e| CliError::invalid("input.rho", e.to_string()))?;
            let report = ppt::separability_verdict(&state);
            let actual = report.verdict == SeparabilityVerdict::Separable;
            checked_result(
                actual == separable,
                if separable { "separable" } else { "entangled" },
                json!({ "min_pt_eigenvalue": report.pt_eigenvalues[0] }),
            )
        }
    };
    Ok(outcome)
}
