//! Problem representation: polynomial residual maps, penalties, domains,
//! ground truth, and extraction of the local constants `c`, `β`, `κ`, `δ`
//! together with a majorant parameter.

mod catalog;
mod file;
mod polynomial;

pub use catalog::{catalog, catalog_problem, CATALOG_NAMES};
pub use file::{load_problem, parse_problem};
pub use polynomial::{homogeneous_norm, PolynomialMap, TensorNorm, Term};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::majorant::{LocalConstants, MajorantModel, ModelKind};
use crate::prox::{subdifferential_distance, ProxSpec};

/// Stationarity residual allowed for a declared minimizer.
pub const GROUND_TRUTH_STATIONARITY_TOL: f64 = 1e-10;

/// Seed of the sampling used when `L` or a tensor norm must be estimated.
pub const ESTIMATE_SEED: u64 = 0x5eed;

const LIPSCHITZ_SAMPLE_PAIRS: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// All of `ℝⁿ`; `radius` plays the role of `δ`.
    WholeSpace { radius: f64 },
    /// Closed ball.
    Ball {
        #[serde(serialize_with = "crate::solver::serialize_vector")]
        center: Vector,
        radius: f64,
    },
}

impl Domain {
    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Domain::WholeSpace { .. } => x.iter().all(|v| v.is_finite()),
            Domain::Ball { center, radius } => (x - center).norm() <= *radius,
        }
    }

    /// Largest `t` with `B(x*, t) ⊂ Ω`.
    pub fn delta(&self, x_star: &Vector) -> f64 {
        match self {
            Domain::WholeSpace { radius } => *radius,
            Domain::Ball { center, radius } => radius - (x_star - center).norm(),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Domain::WholeSpace { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidProblem(format!(
                        "domain.radius must be positive, got {radius}"
                    )));
                }
            }
            Domain::Ball { center, radius } => {
                if center.len() != dim {
                    return Err(Error::InvalidProblem(format!(
                        "domain.center has length {}, expected {dim}",
                        center.len()
                    )));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidProblem(format!(
                        "domain.radius must be positive and finite, got {radius}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    #[serde(serialize_with = "crate::solver::serialize_vector")]
    pub x_star: Vector,
    /// Known Lipschitz majorant constant.
    pub lipschitz: Option<f64>,
    /// Known Smale constant.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub map: PolynomialMap,
    pub penalty: ProxSpec,
    pub domain: Domain,
    pub ground_truth: Option<GroundTruth>,
    /// Model used when none is requested.
    pub default_model: ModelKind,
}

/// Local constants at `x*` plus the majorant built for a given model kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub constants: LocalConstants,
    pub model: MajorantModel,
    /// True when the model parameter was estimated rather than declared.
    pub parameter_estimated: bool,
    pub smallest_singular: f64,
    pub largest_singular: f64,
}

impl Problem {
    /// Validates dimensions, the penalty, the domain and, when present, the
    /// ground truth (inside the domain and stationary).
    pub fn new(
        name: impl Into<String>,
        map: PolynomialMap,
        penalty: ProxSpec,
        domain: Domain,
        ground_truth: Option<GroundTruth>,
        default_model: ModelKind,
    ) -> Result<Self> {
        let dim = map.input_dim();
        penalty.validate(dim)?;
        domain.validate(dim)?;
        let problem = Problem {
            name: name.into(),
            map,
            penalty,
            domain,
            ground_truth,
            default_model,
        };
        if let Some(gt) = &problem.ground_truth {
            if gt.x_star.len() != dim {
                return Err(Error::InvalidProblem(format!(
                    "ground_truth.x_star has length {}, expected {dim}",
                    gt.x_star.len()
                )));
            }
            if !problem.domain.contains(&gt.x_star) {
                return Err(Error::InvalidProblem(
                    "ground_truth.x_star lies outside the domain".into(),
                ));
            }
            for (field, v) in [("L", gt.lipschitz), ("gamma", gt.gamma)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::InvalidProblem(format!(
                            "ground_truth.{field} must be finite and nonnegative, got {v}"
                        )));
                    }
                }
            }
            let stat = problem.stationarity(&gt.x_star)?;
            if !(stat <= GROUND_TRUTH_STATIONARITY_TOL) {
                return Err(Error::InvalidProblem(format!(
                    "ground_truth.x_star is not stationary (residual {stat:e})"
                )));
            }
        }
        Ok(problem)
    }

    pub fn dim(&self) -> usize {
        self.map.input_dim()
    }

    pub fn residual(&self, x: &Vector) -> Result<Vector> {
        self.map.evaluate(x)
    }

    pub fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        self.map.jacobian(x)
    }

    /// `½‖F(x)‖² + J(x)`
    pub fn objective(&self, x: &Vector) -> Result<f64> {
        Ok(0.5 * self.residual(x)?.norm_squared() + self.penalty.value(x))
    }

    /// `dist(−F'(x)ᵀF(x), ∂J(x))`
    pub fn stationarity(&self, x: &Vector) -> Result<f64> {
        let g = -self.jacobian(x)?.tr_mul(&self.residual(x)?);
        Ok(subdifferential_distance(&self.penalty, x, &g))
    }

    pub fn x_star(&self) -> Result<&Vector> {
        self.ground_truth
            .as_ref()
            .map(|gt| &gt.x_star)
            .ok_or(Error::MissingGroundTruth)
    }

    /// `c = ‖F(x*)‖`, `β = 1/σ_min(F'(x*))`, `κ = β σ_max(F'(x*))`, `δ` from
    /// the domain, and `L` or `γ` (declared, else estimated).
    pub fn local_constants(&self, kind: ModelKind) -> Result<ConstantsReport> {
        let x_star = self.x_star()?;
        let gt = self
            .ground_truth
            .as_ref()
            .ok_or(Error::MissingGroundTruth)?;
        let jac = self.jacobian(x_star)?;
        let factors = linalg::svd(&jac)?;
        let smallest = factors.smallest_singular();
        let largest = factors.largest_singular();
        if !(smallest > factors.default_rank_tolerance()) {
            return Err(Error::NotInjectiveAtMinimizer(smallest));
        }
        let beta = 1.0 / smallest;
        let constants = LocalConstants::new(
            self.residual(x_star)?.norm(),
            beta,
            beta * largest,
            self.domain.delta(x_star),
        )?;
        let (parameter, parameter_estimated) = match kind {
            ModelKind::Lipschitz => match gt.lipschitz {
                Some(l) => (l, false),
                None => (
                    self.estimate_lipschitz(x_star, beta, constants.delta)?,
                    true,
                ),
            },
            ModelKind::Smale => match gt.gamma {
                Some(g) => (g, false),
                None => {
                    let est = self.smale_gamma(x_star, beta)?;
                    (est.value, est.estimated)
                }
            },
        };
        Ok(ConstantsReport {
            constants,
            model: MajorantModel::new(kind, parameter)?,
            parameter_estimated,
            smallest_singular: smallest,
            largest_singular: largest,
        })
    }

    /// `γ = max_{n ≥ 2} (β ‖F⁽ⁿ⁾(x*)/n!‖)^{1/(n−1)}`, a finite max for
    /// polynomial maps. Zero for affine maps.
    pub fn smale_gamma(&self, x_star: &Vector, beta: f64) -> Result<TensorNorm> {
        let parts = self.map.shifted_homogeneous_parts(x_star)?;
        let mut gamma = TensorNorm {
            value: 0.0,
            estimated: false,
        };
        for (n, part) in parts.iter().enumerate().skip(2) {
            let norm = homogeneous_norm(part, ESTIMATE_SEED + n as u64);
            let candidate = (beta * norm.value).powf(1.0 / (n as f64 - 1.0));
            gamma.estimated |= norm.estimated && norm.value > 0.0;
            gamma.value = gamma.value.max(candidate);
        }
        Ok(gamma)
    }

    /// `max β‖F'(x) − F'(y)‖ / ‖x − y‖` over seeded random pairs in
    /// `B(x*, radius)`. A lower estimate of the true constant.
    pub fn estimate_lipschitz(&self, x_star: &Vector, beta: f64, radius: f64) -> Result<f64> {
        if self.map.total_degree() <= 1 {
            return Ok(0.0);
        }
        let radius = if radius.is_finite() { radius } else { 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(ESTIMATE_SEED);
        let n = self.dim();
        let mut best: f64 = 0.0;
        for _ in 0..LIPSCHITZ_SAMPLE_PAIRS {
            let x = x_star + sample_ball(&mut rng, n, radius);
            let y = x_star + sample_ball(&mut rng, n, radius);
            let dist = (&x - &y).norm();
            if dist < 1e-12 {
                continue;
            }
            let diff = linalg::spectral_norm(&(self.jacobian(&x)? - self.jacobian(&y)?))?;
            best = best.max(beta * diff / dist);
        }
        Ok(best)
    }
}

/// Uniform sample from the ball of the given radius centered at the origin.
pub fn sample_ball(rng: &mut impl Rng, n: usize, radius: f64) -> Vector {
    let dir = loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            break v / norm;
        }
    };
    let u: f64 = rng.random();
    dir * (radius * u.powf(1.0 / n as f64))
}
