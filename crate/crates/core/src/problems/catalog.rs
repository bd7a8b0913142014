use super::{Domain, GroundTruth, PolynomialMap, Problem, Term};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::majorant::ModelKind;
use crate::prox::ProxSpec;

pub const CATALOG_NAMES: [&str; 5] = [
    "linear1d",
    "softthresh1d",
    "quad2d",
    "quad2d-l1",
    "rosenbrock-res",
];

const CATALOG_RADIUS: f64 = 10.0;

/// Built-in problems with closed-form minimizers and majorant constants.
pub fn catalog() -> Vec<Problem> {
    CATALOG_NAMES
        .iter()
        .map(|name| catalog_problem(name).expect("catalog entries are valid"))
        .collect()
}

pub fn catalog_problem(name: &str) -> Result<Problem> {
    let whole = Domain::WholeSpace {
        radius: CATALOG_RADIUS,
    };
    match name {
        "linear1d" => Problem::new(
            name,
            shifted_identity_1d(),
            ProxSpec::Zero,
            whole,
            Some(truth(vec![2.0], Some(0.0), Some(0.0))),
            ModelKind::Lipschitz,
        ),
        // −F'(1)ᵀF(1) = 1 = w·sign(1)
        "softthresh1d" => Problem::new(
            name,
            shifted_identity_1d(),
            ProxSpec::WeightedL1 { weights: vec![1.0] },
            whole,
            Some(truth(vec![1.0], Some(0.0), Some(0.0))),
            ModelKind::Lipschitz,
        ),
        "quad2d" => Problem::new(
            name,
            quad2d_map(),
            ProxSpec::Zero,
            whole,
            Some(truth(vec![0.0, 0.0], Some(2.0), Some(1.0))),
            ModelKind::Smale,
        ),
        "quad2d-l1" => Problem::new(
            name,
            quad2d_map(),
            ProxSpec::WeightedL1 {
                weights: vec![0.01, 0.02],
            },
            whole,
            Some(truth(vec![0.0, 0.0], Some(2.0), Some(1.0))),
            ModelKind::Lipschitz,
        ),
        "rosenbrock-res" => {
            // F'(1,1) = [[−20, 10], [−1, 0]]; F'ᵀF' = [[401, −200], [−200, 100]]
            let lambda_min = 0.5 * (501.0 - (501.0f64 * 501.0 - 400.0).sqrt());
            let beta = 1.0 / lambda_min.sqrt();
            Problem::new(
                name,
                rosenbrock_map(),
                ProxSpec::Zero,
                whole,
                Some(truth(vec![1.0, 1.0], Some(20.0 * beta), Some(10.0 * beta))),
                ModelKind::Lipschitz,
            )
        }
        other => Err(Error::InvalidProblem(format!(
            "unknown catalog problem `{other}` (available: {})",
            CATALOG_NAMES.join(", ")
        ))),
    }
}

fn truth(x_star: Vec<f64>, lipschitz: Option<f64>, gamma: Option<f64>) -> GroundTruth {
    GroundTruth {
        x_star: Vector::from_vec(x_star),
        lipschitz,
        gamma,
    }
}

/// `F(x) = x − 2`
fn shifted_identity_1d() -> PolynomialMap {
    PolynomialMap::new(
        1,
        vec![vec![Term::new(1.0, vec![1]), Term::new(-2.0, vec![0])]],
    )
    .unwrap()
}

/// `F(x) = (x₁, x₂, x₁² + x₂²)`
fn quad2d_map() -> PolynomialMap {
    PolynomialMap::new(
        2,
        vec![
            vec![Term::new(1.0, vec![1, 0])],
            vec![Term::new(1.0, vec![0, 1])],
            vec![Term::new(1.0, vec![2, 0]), Term::new(1.0, vec![0, 2])],
        ],
    )
    .unwrap()
}

/// `F(x) = (10(x₂ − x₁²), 1 − x₁)`
fn rosenbrock_map() -> PolynomialMap {
    PolynomialMap::new(
        2,
        vec![
            vec![Term::new(10.0, vec![0, 1]), Term::new(-10.0, vec![2, 0])],
            vec![Term::new(1.0, vec![0, 0]), Term::new(-1.0, vec![1, 0])],
        ],
    )
    .unwrap()
}
