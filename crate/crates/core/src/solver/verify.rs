//! Audits a finished run against the local convergence bounds: the error
//! recursion with coefficients frozen at `σ(x₀)`, its per-step variant,
//! strict decrease of `σ`, containment in `B(x*, r)`, and the majorant bound
//! on the linearization error of `F`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::RunReport;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::majorant::{
    error_recursion_coefficients, LocalConstants, MajorantModel, RecursionCoefficients,
};
use crate::problems::{sample_ball, Problem};

/// Distances below this are treated as floating-point floor: excluded from
/// the decrease check and from ratio estimates.
pub const FLOOR_SIGMA: f64 = 1e-13;

/// Slack allowed on the recursion checks, relative to `max(1, σ(x₀))`.
pub const RECURSION_SLACK_TOL: f64 = 1e-8;

/// Fractions of the radius used for verification start points.
pub const START_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.9];

/// Directions per radius fraction.
pub const START_DIRECTIONS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepAudit {
    pub index: usize,
    pub sigma: f64,
    pub next_sigma: f64,
    /// Bound with coefficients at `σ(x₀)` minus `σ_{k+1}`.
    pub recursion_slack: f64,
    /// Bound with coefficients at `σ_k` minus `σ_{k+1}`; `None` at `σ_k = 0`.
    pub per_step_slack: Option<f64>,
    pub decrease_ok: bool,
    pub quadratic_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub sigma0: f64,
    pub radius: f64,
    pub coefficients: Option<RecursionCoefficients>,
    pub steps: Vec<StepAudit>,
    pub recursion_slacks: Vec<f64>,
    pub per_step_slacks: Vec<f64>,
    /// `e_f(σ_k, 0) − β‖E_F(x_k, x*)‖` for every iterate.
    pub linearization_slacks: Vec<f64>,
    pub quadratic_ratio_estimates: Vec<f64>,
    pub slack_tolerance: f64,
    pub min_recursion_slack: f64,
    pub recursion_ok: bool,
    pub per_step_ok: bool,
    pub linearization_ok: bool,
    pub monotone_decrease_ok: bool,
    pub stayed_in_ball_ok: bool,
    pub final_sigma: f64,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.recursion_ok
            && self.per_step_ok
            && self.linearization_ok
            && self.monotone_decrease_ok
            && self.stayed_in_ball_ok
    }
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Audits `report`, a run on `problem` started inside `B(x*, radius)`. A run
/// that violates the bounds yields negative slacks, not an error.
pub fn verify_run(
    problem: &Problem,
    report: &RunReport,
    model: &MajorantModel,
    consts: &LocalConstants,
    radius: f64,
) -> Result<VerificationReport> {
    let x_star = problem.x_star()?;
    let sigmas: Vec<f64> = report
        .trace
        .iter()
        .map(|r| (&r.point - x_star).norm())
        .collect();
    let sigma0 = sigmas[0];
    let tol = RECURSION_SLACK_TOL * sigma0.max(1.0);

    let coefficients = if sigma0 > 0.0 {
        match error_recursion_coefficients(model, consts, sigma0) {
            Ok(c) => Some(c),
            Err(Error::DomainError { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let mut steps = Vec::with_capacity(sigmas.len().saturating_sub(1));
    for (k, pair) in sigmas.windows(2).enumerate() {
        let (s, next) = (pair[0], pair[1]);
        let recursion_slack = match (&coefficients, sigma0 > 0.0) {
            (Some(c), _) => c.bound(s) - next,
            (None, false) => -next,
            (None, true) => f64::NEG_INFINITY,
        };
        let per_step_slack = if s > 0.0 {
            Some(match error_recursion_coefficients(model, consts, s) {
                Ok(c) => c.bound(s) - next,
                Err(_) => f64::NEG_INFINITY,
            })
        } else {
            None
        };
        let decrease_ok = s <= FLOOR_SIGMA || next < s;
        let quadratic_ratio = (s >= FLOOR_SIGMA && next >= FLOOR_SIGMA).then(|| next / (s * s));
        steps.push(StepAudit {
            index: k,
            sigma: s,
            next_sigma: next,
            recursion_slack,
            per_step_slack,
            decrease_ok,
            quadratic_ratio,
        });
    }

    let f_star = problem.residual(x_star)?;
    let mut linearization_slacks = Vec::with_capacity(sigmas.len());
    for (rec, &s) in report.trace.iter().zip(&sigmas) {
        let x = &rec.point;
        let jac = problem.jacobian(x)?;
        let e = (&f_star - problem.residual(x)? - jac * (x_star - x)).norm();
        let bound = if s < model.domain_bound() {
            model.remainder(s)
        } else {
            f64::INFINITY
        };
        linearization_slacks.push(if bound.is_finite() {
            bound - consts.beta * e
        } else {
            f64::NEG_INFINITY
        });
    }

    let recursion_slacks: Vec<f64> = steps.iter().map(|s| s.recursion_slack).collect();
    let per_step_slacks: Vec<f64> = steps.iter().filter_map(|s| s.per_step_slack).collect();
    let min_recursion_slack = min_of(&recursion_slacks);
    Ok(VerificationReport {
        sigma0,
        radius,
        coefficients,
        recursion_ok: recursion_slacks.iter().all(|&s| s >= -tol),
        per_step_ok: per_step_slacks.iter().all(|&s| s >= -tol),
        linearization_ok: linearization_slacks.iter().all(|&s| s >= -tol),
        monotone_decrease_ok: steps.iter().all(|s| s.decrease_ok),
        stayed_in_ball_ok: sigmas.iter().all(|&s| s < radius),
        quadratic_ratio_estimates: steps.iter().filter_map(|s| s.quadratic_ratio).collect(),
        final_sigma: *sigmas.last().expect("nonempty trace"),
        steps,
        recursion_slacks,
        per_step_slacks,
        linearization_slacks,
        slack_tolerance: tol,
        min_recursion_slack,
    })
}

/// `8 × 3` start points `x* + t·d`, `t ∈ radius·{0.25, 0.5, 0.9}`, with unit
/// directions `d` drawn from a seeded generator and shared across radii.
pub fn verification_starts(x_star: &Vector, radius: f64, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vector> = (0..START_DIRECTIONS)
        .map(|_| {
            let d = sample_ball(&mut rng, x_star.len(), 1.0);
            d.normalize()
        })
        .collect();
    START_FRACTIONS
        .iter()
        .flat_map(|frac| dirs.iter().map(move |d| x_star + d * (frac * radius)))
        .collect()
}
