//! JSON problem files. The layout is documented in `docs/schemas.md`.

use std::path::Path;

use serde::Deserialize;

use super::{Domain, GroundTruth, PolynomialMap, Problem, Term};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::majorant::ModelKind;
use crate::prox::ProxSpec;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    input_dim: usize,
    output_dim: usize,
    components: Vec<Vec<(f64, Vec<u32>)>>,
    penalty: PenaltyFile,
    domain: DomainFile,
    #[serde(default)]
    ground_truth: Option<GroundTruthFile>,
    #[serde(default)]
    model: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
enum PenaltyFile {
    Zero,
    WeightedL1 {
        weights: Vec<f64>,
    },
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
enum DomainFile {
    WholeSpace { radius: f64 },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroundTruthFile {
    x_star: Vec<f64>,
    #[serde(default, rename = "L")]
    lipschitz: Option<f64>,
    #[serde(default)]
    gamma: Option<f64>,
}

/// Parses and validates a problem document. Syntax errors carry the line
/// and column; semantic errors name the offending field.
pub fn parse_problem(text: &str, name: &str) -> Result<Problem> {
    let raw: ProblemFile = serde_json::from_str(text).map_err(|e| {
        Error::InvalidProblem(format!(
            "{name}: line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    build(raw, name).map_err(|e| match e {
        Error::InvalidProblem(msg) => Error::InvalidProblem(format!("{name}: {msg}")),
        Error::InvalidPenalty(msg) => Error::InvalidProblem(format!("{name}: penalty: {msg}")),
        other => Error::InvalidProblem(format!("{name}: {other}")),
    })
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidProblem(format!("cannot read {}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_problem(&text, &name).map_err(|e| match e {
        Error::InvalidProblem(msg) => Error::InvalidProblem(format!("{} ({msg})", path.display())),
        other => other,
    })
}

fn build(raw: ProblemFile, name: &str) -> Result<Problem> {
    if raw.components.len() != raw.output_dim {
        return Err(Error::InvalidProblem(format!(
            "components has {} entries but output_dim is {}",
            raw.components.len(),
            raw.output_dim
        )));
    }
    let components = raw
        .components
        .into_iter()
        .map(|comp| comp.into_iter().map(|(c, e)| Term::new(c, e)).collect())
        .collect();
    let map = PolynomialMap::new(raw.input_dim, components)?;

    let penalty = match raw.penalty {
        PenaltyFile::Zero => ProxSpec::Zero,
        PenaltyFile::WeightedL1 { weights } => ProxSpec::WeightedL1 { weights },
        PenaltyFile::Box { lower, upper } => ProxSpec::BoxIndicator {
            lower: lower
                .into_iter()
                .map(|v| v.unwrap_or(f64::NEG_INFINITY))
                .collect(),
            upper: upper
                .into_iter()
                .map(|v| v.unwrap_or(f64::INFINITY))
                .collect(),
        },
    };
    let domain = match raw.domain {
        DomainFile::WholeSpace { radius } => Domain::WholeSpace { radius },
        DomainFile::Ball { center, radius } => Domain::Ball {
            center: Vector::from_vec(center),
            radius,
        },
    };
    let ground_truth = raw.ground_truth.map(|gt| GroundTruth {
        x_star: Vector::from_vec(gt.x_star),
        lipschitz: gt.lipschitz,
        gamma: gt.gamma,
    });
    let default_model = match raw.model.as_deref() {
        None => ModelKind::Lipschitz,
        Some(s) => s
            .parse()
            .map_err(|_| Error::InvalidProblem(format!("model: unknown kind `{s}`")))?,
    };
    Problem::new(name, map, penalty, domain, ground_truth, default_model)
}
