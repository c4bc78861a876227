//! Request schemas. Every object rejects unknown fields; complex numbers are
//! written as `[re, im]`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use posmap_core::numkit::SymMat;
use posmap_core::{QubitMap, C64};
use serde::Deserialize;

use crate::error::CliError;

pub type Complex = [f64; 2];
pub type CMat2 = [[Complex; 2]; 2];
pub type RealMatrix = Vec<Vec<f64>>;
pub type ComplexMatrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Scale,
    Decompose,
    Slemma,
    Extreme,
    Ppt,
    Random,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Scale => "scale",
            Command::Decompose => "decompose",
            Command::Slemma => "slemma",
            Command::Extreme => "extreme",
            Command::Ppt => "ppt",
            Command::Random => "random",
            Command::Verify => "verify",
        }
    }
}

/// Per-request options; absent fields fall back to the command defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    #[serde(alias = "eps")]
    pub eps_schedule: Option<Vec<f64>>,
}

impl Options {
    /// Fields set in `self` win over `base`.
    pub fn over(&self, base: &Options) -> Options {
        Options {
            tol: self.tol.or(base.tol),
            max_iter: self.max_iter.or(base.max_iter),
            seed: self.seed.or(base.seed),
            eps_schedule: self
                .eps_schedule
                .clone()
                .or_else(|| base.eps_schedule.clone()),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::invalid(
                    "options.tol",
                    format!("tolerance must be positive and finite, got {t}"),
                ));
            }
        }
        if self.max_iter == Some(0) {
            return Err(CliError::invalid(
                "options.max_iter",
                "iteration budget must be at least 1",
            ));
        }
        if let Some(eps) = &self.eps_schedule {
            if eps.is_empty() {
                return Err(CliError::invalid(
                    "options.eps_schedule",
                    "schedule must not be empty",
                ));
            }
            for (i, e) in eps.iter().enumerate() {
                if !(e.is_finite() && *e > 0.0 && *e < 1.0) {
                    return Err(CliError::invalid(
                        format!("options.eps_schedule[{i}]"),
                        format!("{e} is not in (0, 1)"),
                    ));
                }
            }
            if eps.windows(2).any(|w| w[1] >= w[0]) {
                return Err(CliError::invalid(
                    "options.eps_schedule",
                    "schedule must be strictly decreasing",
                ));
            }
        }
        Ok(())
    }
}

/// One element of a batch.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchItem {
    pub command: Command,
    #[serde(default)]
    pub input: serde_json::Value,
    #[serde(default)]
    pub options: Options,
}

/// A qubit map, either as a transfer matrix or as Kraus / co-Kraus lists.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapInput {
    pub ptm: Option<[[f64; 4]; 4]>,
    pub kraus: Option<Vec<CMat2>>,
    pub co_kraus: Option<Vec<CMat2>>,
}

pub fn cmat2(m: &CMat2) -> Matrix2<C64> {
    Matrix2::from_fn(|r, c| C64::new(m[r][c][0], m[r][c][1]))
}

impl MapInput {
    pub fn to_map(&self, path: &str) -> Result<QubitMap, CliError> {
        match (&self.ptm, &self.kraus, &self.co_kraus) {
            (Some(rows), None, None) => QubitMap::from_rows(*rows)
                .map_err(|e| CliError::invalid(format!("{path}.ptm"), e.to_string())),
            (None, k, c) if k.is_some() || c.is_some() => {
                let kraus: Vec<_> = k.iter().flatten().map(cmat2).collect();
                let co: Vec<_> = c.iter().flatten().map(cmat2).collect();
                QubitMap::from_kraus(&kraus, &co)
                    .map_err(|e| CliError::invalid(path, e.to_string()))
            }
            _ => Err(CliError::invalid(
                path,
                "give either \"ptm\" or \"kraus\"/\"co_kraus\", not both or neither",
            )),
        }
    }
}

pub fn real_matrix(rows: &RealMatrix, path: &str) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::invalid(path, "matrix is empty"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(CliError::invalid(
                format!("{path}[{i}]"),
                format!("expected {n} entries, got {}", r.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

pub fn sym_matrix(rows: &RealMatrix, path: &str) -> Result<SymMat, CliError> {
    let m = real_matrix(rows, path)?;
    let asym = (&m - m.transpose()).norm();
    if asym > 1e-12 * (1.0 + m.norm()) {
        return Err(CliError::invalid(
            path,
            format!("matrix is not symmetric (defect {asym:e})"),
        ));
    }
    SymMat::new(m).map_err(|e| CliError::invalid(path, e.to_string()))
}

pub fn complex_matrix(
    rows: &ComplexMatrix,
    dim: usize,
    path: &str,
) -> Result<DMatrix<C64>, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::invalid(
            path,
            format!("expected a {dim}x{dim} matrix of [re, im] pairs"),
        ));
    }
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        C64::new(rows[r][c][0], rows[r][c][1])
    }))
}

pub fn ptm_of(rows: &[[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| rows[r][c])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlemmaInput {
    #[serde(rename = "F", alias = "f")]
    pub f: Option<RealMatrix>,
    #[serde(rename = "G", alias = "g")]
    pub g: Option<RealMatrix>,
    pub xbar: Option<Vec<f64>>,
    #[serde(rename = "M", alias = "m")]
    pub m: Option<RealMatrix>,
    #[serde(rename = "N", alias = "n")]
    pub n: Option<RealMatrix>,
}

/// A Lorentz map, or a qubit map whose transfer matrix is used as one.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremeInput {
    pub lorentz: Option<RealMatrix>,
    pub ptm: Option<[[f64; 4]; 4]>,
    pub kraus: Option<Vec<CMat2>>,
    pub co_kraus: Option<Vec<CMat2>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PptInput {
    pub rho: ComplexMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomKindName {
    Interior,
    Cp,
    Ccp,
    Boundary,
    Nonpositive,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInput {
    pub kind: RandomKindName,
    pub t: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionInput {
    #[serde(default)]
    pub kraus: Vec<CMat2>,
    #[serde(default)]
    pub co_kraus: Vec<CMat2>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PositivityCertificateInput {
    Slemma { mu: f64 },
    ViolatingState { bloch: [f64; 3] },
    ZeroMap {},
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SlemmaCertificateInput {
    Feasible { mu: f64 },
    Infeasible { witness: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PencilCertificateInput {
    Witness { t: f64 },
    Counterexample { x: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ExtremalCertificateInput {
    Automorphism { mu: f64 },
    RankOneExtreme { u: Vec<f64>, v: Vec<f64> },
    NotExtreme { delta: RealMatrix },
    NotInCone {},
}

/// Offline re-verification payloads; each verdict-bearing response carries
/// one of these under `"certificate"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifyInput {
    Decomposition {
        map: MapInput,
        decomposition: DecompositionInput,
        residual_bound: Option<f64>,
    },
    Positivity {
        map: MapInput,
        certificate: PositivityCertificateInput,
    },
    Scaling {
        map: MapInput,
        a: CMat2,
        b: CMat2,
    },
    Slemma {
        #[serde(rename = "F", alias = "f")]
        f: RealMatrix,
        #[serde(rename = "G", alias = "g")]
        g: RealMatrix,
        xbar: Vec<f64>,
        certificate: SlemmaCertificateInput,
    },
    Pencil {
        #[serde(rename = "M", alias = "m")]
        m: RealMatrix,
        #[serde(rename = "N", alias = "n")]
        n: RealMatrix,
        certificate: PencilCertificateInput,
    },
    Extremal {
        lorentz: RealMatrix,
        certificate: ExtremalCertificateInput,
    },
    Ppt {
        rho: ComplexMatrix,
        separable: bool,
    },
}
