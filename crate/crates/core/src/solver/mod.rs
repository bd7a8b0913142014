//! The proximal Gauss-Newton outer loop.
//!
//! Each iteration takes the Gauss-Newton point `z = x − F'(x)†F(x)` and
//! maps it through `prox_J^{H(x)}` with `H(x) = F'(x)ᵀF'(x)`. The loop stops
//! on stationarity, a vanishing step, the iteration cap, or a failure of one
//! of the hypotheses (injective Jacobian, iterates in `Ω`, prox solvable).

mod verify;

pub use verify::{verification_starts, verify_run, StepAudit, VerificationReport, FLOOR_SIGMA};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SvdFactors, Vector};
use crate::majorant::RadiusCertificate;
use crate::problems::Problem;
use crate::prox::{prox, subdifferential_distance, ProxResult};

/// Serializes a vector as a JSON array; non-finite entries become `null`.
pub fn serialize_vector<S: Serializer>(v: &Vector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once `‖x_{k+1} − x_k‖` is at most this.
    pub step_tolerance: f64,
    /// Converged once `dist(−F'(x)ᵀF(x), ∂J(x))` is at most this.
    pub stationarity_tolerance: f64,
    pub prox_tolerance: f64,
    /// `F'(x)` counts as injective while `σ_min` exceeds this.
    pub jacobian_injectivity_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 100,
            step_tolerance: 1e-14,
            stationarity_tolerance: 1e-12,
            prox_tolerance: 1e-12,
            jacobian_injectivity_threshold: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("step_tolerance", self.step_tolerance),
            ("stationarity_tolerance", self.stationarity_tolerance),
            ("prox_tolerance", self.prox_tolerance),
            (
                "jacobian_injectivity_threshold",
                self.jacobian_injectivity_threshold,
            ),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// State at `x_k`. `step_norm` and `prox_inner_iterations` describe the step
/// taken from `x_k` and are zero on the last record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub index: usize,
    #[serde(serialize_with = "serialize_vector")]
    pub point: Vector,
    pub sigma: Option<f64>,
    pub step_norm: f64,
    pub residual_norm: f64,
    pub smallest_singular: f64,
    pub prox_inner_iterations: usize,
    pub stationarity_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Converged,
    /// The step fell below `step_tolerance` at a non-stationary point.
    Stalled,
    MaxIterations,
    SingularJacobian,
    LeftDomain,
    ProxFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub trace: Vec<IterationRecord>,
    /// Last iterate; for `LeftDomain` the point outside `Ω`.
    #[serde(serialize_with = "serialize_vector")]
    pub final_point: Vector,
    pub message: Option<String>,
    pub certificate: Option<RadiusCertificate>,
    pub verification: Option<VerificationReport>,
}

impl RunReport {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn last(&self) -> &IterationRecord {
        self.trace.last().expect("a run report always has a record")
    }
}

/// `x − Jac† F_val`. Fails when `σ_min(Jac)` is at or below the threshold.
pub fn gn_step(f_val: &Vector, jac: &Matrix, x: &Vector, cfg: &SolverConfig) -> Result<Vector> {
    let factors = linalg::svd(jac)?;
    gn_step_with(&factors, f_val, x, cfg)
}

fn gn_step_with(
    factors: &SvdFactors,
    f_val: &Vector,
    x: &Vector,
    cfg: &SolverConfig,
) -> Result<Vector> {
    let smallest = factors.smallest_singular();
    if !(smallest > cfg.jacobian_injectivity_threshold) {
        return Err(Error::SingularJacobian(smallest));
    }
    let pinv = factors.pseudoinverse(factors.default_rank_tolerance());
    Ok(x - pinv * f_val)
}

struct PointState {
    residual: Vector,
    jacobian: Matrix,
    factors: SvdFactors,
    stationarity: f64,
}

fn evaluate_point(problem: &Problem, x: &Vector) -> Result<PointState> {
    let residual = problem.residual(x)?;
    let jacobian = problem.jacobian(x)?;
    let factors = linalg::svd(&jacobian)?;
    let g = -jacobian.tr_mul(&residual);
    let stationarity = subdifferential_distance(&problem.penalty, x, &g);
    Ok(PointState {
        residual,
        jacobian,
        factors,
        stationarity,
    })
}

fn record_for(
    state: &PointState,
    index: usize,
    x: &Vector,
    x_star: Option<&Vector>,
) -> IterationRecord {
    IterationRecord {
        index,
        point: x.clone(),
        sigma: x_star.map(|s| (x - s).norm()),
        step_norm: 0.0,
        residual_norm: state.residual.norm(),
        smallest_singular: state.factors.smallest_singular(),
        prox_inner_iterations: 0,
        stationarity_residual: state.stationarity,
    }
}

fn prox_step(
    problem: &Problem,
    state: &PointState,
    x: &Vector,
    cfg: &SolverConfig,
) -> Result<ProxResult> {
    let z = gn_step_with(&state.factors, &state.residual, x, cfg)?;
    let h = linalg::metric_operator(&state.jacobian);
    prox(&problem.penalty, &h, &z, cfg.prox_tolerance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgnStep {
    pub next: Vector,
    pub record: IterationRecord,
}

/// One step `prox_J^{H(x)}(x − F'(x)†F(x))`.
pub fn pgn_iterate(problem: &Problem, x: &Vector, cfg: &SolverConfig) -> Result<PgnStep> {
    let state = evaluate_point(problem, x)?;
    let mut record = record_for(&state, 0, x, problem.x_star().ok());
    let p = prox_step(problem, &state, x, cfg)?;
    if !problem.domain.contains(&p.point) {
        return Err(Error::LeftDomain);
    }
    record.step_norm = (&p.point - x).norm();
    record.prox_inner_iterations = p.inner_iterations;
    Ok(PgnStep {
        next: p.point,
        record,
    })
}

/// Runs the iteration from `x0`. Failures of the iteration hypotheses end
/// the run with the matching status; only invalid input is an `Err`.
pub fn solve(problem: &Problem, x0: &Vector, cfg: &SolverConfig) -> Result<RunReport> {
    cfg.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    if !problem.domain.contains(x0) {
        return Err(Error::LeftDomain);
    }
    let x_star = problem.x_star().ok();
    let mut trace = Vec::new();
    let mut x = x0.clone();
    let mut small_step = false;
    let (status, message) = loop {
        let state = evaluate_point(problem, &x)?;
        let mut record = record_for(&state, trace.len(), &x, x_star);
        if record.stationarity_residual <= cfg.stationarity_tolerance {
            trace.push(record);
            break (RunStatus::Converged, None);
        }
        if small_step {
            trace.push(record);
            break (RunStatus::Stalled, None);
        }
        if trace.len() >= cfg.max_iterations {
            trace.push(record);
            break (RunStatus::MaxIterations, None);
        }
        let p = match prox_step(problem, &state, &x, cfg) {
            Ok(p) => p,
            Err(e) => {
                trace.push(record);
                let status = match e {
                    Error::SingularJacobian(_) => RunStatus::SingularJacobian,
                    _ => RunStatus::ProxFailure,
                };
                break (status, Some(e.to_string()));
            }
        };
        record.step_norm = (&p.point - &x).norm();
        record.prox_inner_iterations = p.inner_iterations;
        log::debug!(
            "iter {}: residual {:.3e}, step {:.3e}, stationarity {:.3e}",
            record.index,
            record.residual_norm,
            record.step_norm,
            record.stationarity_residual
        );
        small_step = record.step_norm <= cfg.step_tolerance;
        trace.push(record);
        x = p.point;
        if !problem.domain.contains(&x) {
            break (RunStatus::LeftDomain, Some(Error::LeftDomain.to_string()));
        }
    };
    log::info!(
        "{}: {:?} after {} steps",
        problem.name,
        status,
        trace.len() - 1
    );
    Ok(RunReport {
        status,
        trace,
        final_point: x,
        message,
        certificate: None,
        verification: None,
    })
}

/// `‖F(y) − F(x) − F'(x)(y − x)‖`
pub fn linearization_error(problem: &Problem, x: &Vector, y: &Vector) -> Result<f64> {
    problem.map.linearization_error(x, y)
}
