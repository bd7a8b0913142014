//! Majorant functions and the local convergence constants derived from them.
//!
//! A majorant `f: [0, R) → ℝ` with `f(0) = 0`, `f'(0) = −1` and `f'` convex,
//! strictly increasing bounds the variation of the Jacobian around a
//! stationary point `x*`:
//!
//! ```text
//! β‖F'(x) − F'(x* + τ(x − x*))‖ ≤ f'(‖x − x*‖) − f'(τ‖x − x*‖),   τ ∈ [0, 1]
//! ```
//!
//! Two models ship:
//!
//! | model     | f(t)               | f'(t)               | D⁺f'(0) | ν            |
//! |-----------|--------------------|---------------------|---------|--------------|
//! | Lipschitz | L t²/2 − t         | L t − 1             | L       | 1/L          |
//! | Smale     | t/(1 − γt) − 2t    | 1/(1 − γt)² − 2     | 2γ      | (2 − √2)/2γ  |
//!
//! Given `c = ‖F(x*)‖`, `β = ‖F'(x*)†‖`, `κ = β‖F'(x*)‖` the contraction
//! ratio is
//!
//! ```text
//! Q(t) = ( [f'+1+κ][t f' − f + cβ(1+√2)(f'+1)] + cβ(f'+1) ) / ( t f'² )
//! ```
//!
//! and `ρ = sup{t ∈ (0, ν) : Q(t) < 1}`, `r = min(ρ, δ)`. `Q` is increasing
//! on `(0, ν)` with `Q(0⁺) = h`, so `ρ` is found by bisection whenever the
//! gate `h = [(1+√2)κ+1] c β D⁺f'(0) < 1` holds. Both models also have closed
//! forms for `ρ`; [`certificate`] computes both and insists they agree.

use serde::Serialize;

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const ONE_PLUS_SQRT_2: f64 = 1.0 + SQRT_2;

/// Relative disagreement between closed-form and bisection radii that is
/// treated as an internal error.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

/// Upper end of the `ρ` search interval, as a fraction of `ν`.
const NU_SHRINK: f64 = 1.0 - 1e-12;

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_ABS: f64 = 1e-14;
const BISECTION_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lipschitz,
    Smale,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lipschitz => "lipschitz",
            ModelKind::Smale => "smale",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lipschitz" => Ok(ModelKind::Lipschitz),
            "smale" => Ok(ModelKind::Smale),
            other => Err(Error::InvalidModel(format!(
                "unknown model kind `{other}` (expected lipschitz or smale)"
            ))),
        }
    }
}

/// A majorant function `f` with `f(0) = 0` and `f'(0) = −1` by construction.
///
/// `Lipschitz { l: 0 }` is accepted for affine residual maps: `f(t) = −t`,
/// so `ν = ρ = +∞` and every recursion coefficient vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MajorantModel {
    Lipschitz { l: f64 },
    Smale { gamma: f64 },
}

impl MajorantModel {
    pub fn lipschitz(l: f64) -> Result<Self> {
        if l.is_finite() && l >= 0.0 {
            Ok(MajorantModel::Lipschitz { l })
        } else {
            Err(Error::InvalidModel(format!(
                "Lipschitz constant must be finite and nonnegative, got {l}"
            )))
        }
    }

    pub fn smale(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(MajorantModel::Smale { gamma })
        } else {
            Err(Error::InvalidModel(format!(
                "Smale model requires gamma > 0, got {gamma}"
            )))
        }
    }

    pub fn new(kind: ModelKind, parameter: f64) -> Result<Self> {
        match kind {
            ModelKind::Lipschitz => Self::lipschitz(parameter),
            ModelKind::Smale => Self::smale(parameter),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            MajorantModel::Lipschitz { .. } => ModelKind::Lipschitz,
            MajorantModel::Smale { .. } => ModelKind::Smale,
        }
    }

    /// `L` or `γ`.
    pub fn parameter(&self) -> f64 {
        match *self {
            MajorantModel::Lipschitz { l } => l,
            MajorantModel::Smale { gamma } => gamma,
        }
    }

    /// Right end `R_f` of the interval where `f` is defined.
    pub fn domain_bound(&self) -> f64 {
        match *self {
            MajorantModel::Lipschitz { .. } => f64::INFINITY,
            MajorantModel::Smale { gamma } => 1.0 / gamma,
        }
    }

    /// `f(t)`
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            MajorantModel::Lipschitz { l } => 0.5 * l * t * t - t,
            MajorantModel::Smale { gamma } => t / (1.0 - gamma * t) - 2.0 * t,
        }
    }

    /// `f'(t)`
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            MajorantModel::Lipschitz { l } => l * t - 1.0,
            MajorantModel::Smale { gamma } => {
                let s = 1.0 - gamma * t;
                1.0 / (s * s) - 2.0
            }
        }
    }

    /// `f'(t) + 1 = f'(t) − f'(0)`, evaluated without cancellation.
    pub fn derivative_gap(&self, t: f64) -> f64 {
        match *self {
            MajorantModel::Lipschitz { l } => l * t,
            MajorantModel::Smale { gamma } => {
                let s = 1.0 - gamma * t;
                gamma * t * (1.0 + s) / (s * s)
            }
        }
    }

    /// `t f'(t) − f(t) = e_f(t, 0)`, evaluated without cancellation.
    pub fn remainder(&self, t: f64) -> f64 {
        match *self {
            MajorantModel::Lipschitz { l } => 0.5 * l * t * t,
            MajorantModel::Smale { gamma } => {
                let s = 1.0 - gamma * t;
                gamma * t * t / (s * s)
            }
        }
    }

    /// `D⁺f'(0)`
    pub fn dplus_derivative_at_zero(&self) -> f64 {
        match *self {
            MajorantModel::Lipschitz { l } => l,
            MajorantModel::Smale { gamma } => 2.0 * gamma,
        }
    }
}

/// Linearization error of the majorant, `e_f(t, u) = f(u) − f(t) − f'(t)(u − t)`.
pub fn majorant_linearization_error(model: &MajorantModel, t: f64, u: f64) -> f64 {
    if u == 0.0 {
        return model.remainder(t);
    }
    model.value(u) - model.value(t) - model.derivative(t) * (u - t)
}

/// Constants measured at the reference point `x*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalConstants {
    /// `‖F(x*)‖`
    pub c: f64,
    /// `‖F'(x*)†‖`
    pub beta: f64,
    /// `β‖F'(x*)‖`
    pub kappa: f64,
    /// Largest `t` with `B(x*, t) ⊂ Ω`.
    pub delta: f64,
}

impl LocalConstants {
    pub fn new(c: f64, beta: f64, kappa: f64, delta: f64) -> Result<Self> {
        let bad = |name: &str, v: f64| {
            Err(Error::InvalidConstants(format!(
                "{name} = {v} is out of range"
            )))
        };
        if !(c.is_finite() && c >= 0.0) {
            return bad("c", c);
        }
        if !(beta.is_finite() && beta > 0.0) {
            return bad("beta", beta);
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return bad("kappa", kappa);
        }
        if !(delta > 0.0) {
            return bad("delta", delta);
        }
        Ok(LocalConstants {
            c,
            beta,
            kappa,
            delta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RadiusMethod {
    GenericBisection,
    LipschitzClosedForm,
    SmaleQuartic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusCertificate {
    pub nu: f64,
    pub rho: f64,
    pub r: f64,
    pub h_value: f64,
    pub h_ok: bool,
    pub method: RadiusMethod,
    /// `ρ` from bisection on `Q(t) = 1`.
    pub rho_bisection: f64,
    /// Relative gap between `rho` and `rho_bisection`.
    pub cross_check_delta: f64,
}

/// `h = [(1+√2)κ + 1] c β D⁺f'(0)`
pub fn condition_h(model: &MajorantModel, consts: &LocalConstants) -> f64 {
    (ONE_PLUS_SQRT_2 * consts.kappa + 1.0)
        * consts.c
        * consts.beta
        * model.dplus_derivative_at_zero()
}

/// `ν = sup{t ∈ [0, R_f) : f'(t) < 0}` in closed form.
pub fn nu(model: &MajorantModel) -> f64 {
    match *model {
        MajorantModel::Lipschitz { l } => {
            if l == 0.0 {
                f64::INFINITY
            } else {
                1.0 / l
            }
        }
        MajorantModel::Smale { gamma } => (2.0 - SQRT_2) / (2.0 * gamma),
    }
}

/// Moves `inside` (predicate true) and `outside` (predicate false) toward
/// each other and returns the final `inside` point.
fn bisect(mut inside: f64, mut outside: f64, abs_tol: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..BISECTION_MAX_ITER {
        let width = (outside - inside).abs();
        if width <= abs_tol || width <= BISECTION_REL * inside.abs().max(outside.abs()) {
            break;
        }
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// `ν` by bisection on the sign of `f'`, valid because `f'` is increasing.
pub fn nu_bisection(model: &MajorantModel) -> f64 {
    if model.dplus_derivative_at_zero() == 0.0 {
        return f64::INFINITY;
    }
    let mut outside = model.domain_bound();
    if outside.is_infinite() {
        outside = 1.0;
        while model.derivative(outside) < 0.0 {
            outside *= 2.0;
        }
    }
    // the relative criterion alone is enough; ν has no scale yet
    bisect(0.0, outside, 0.0, |t| model.derivative(t) < 0.0)
}

/// `Q(t)`; see the module docs.
pub fn contraction_ratio(model: &MajorantModel, consts: &LocalConstants, t: f64) -> f64 {
    let d = model.derivative(t);
    let gap = model.derivative_gap(t);
    let cb = consts.c * consts.beta;
    let numerator =
        (gap + consts.kappa) * (model.remainder(t) + cb * ONE_PLUS_SQRT_2 * gap) + cb * gap;
    numerator / (t * d * d)
}

fn check_gate(model: &MajorantModel, consts: &LocalConstants) -> Result<f64> {
    let h = condition_h(model, consts);
    if h < 1.0 {
        Ok(h)
    } else {
        Err(Error::H3Violated(h))
    }
}

/// `ρ` by bisection on `Q(t) − 1` over `(0, ν(1 − 10⁻¹²))`. When `Q` stays
/// below one on the whole interval the right end is returned.
pub fn rho_generic(model: &MajorantModel, consts: &LocalConstants) -> Result<f64> {
    check_gate(model, consts)?;
    let nu = nu_bisection(model);
    if nu.is_infinite() {
        // f' ≡ −1: Q ≡ 0
        return Ok(f64::INFINITY);
    }
    let upper = nu * NU_SHRINK;
    if contraction_ratio(model, consts, upper) < 1.0 {
        return Ok(upper);
    }
    Ok(bisect(0.0, upper, BISECTION_ABS * nu, |t| {
        contraction_ratio(model, consts, t) < 1.0
    }))
}

/// Closed-form `ρ` for the Lipschitz model: the smaller root of
/// `u² − (4 + κ + 2c(1+√2)βL)u + 2(1 − h) = 0` divided by `L`.
pub fn rho_lipschitz(consts: &LocalConstants, l: f64) -> Result<f64> {
    let model = MajorantModel::lipschitz(l)?;
    let h = check_gate(&model, consts)?;
    if l == 0.0 {
        return Ok(f64::INFINITY);
    }
    let b = 4.0 + consts.kappa + 2.0 * consts.c * ONE_PLUS_SQRT_2 * consts.beta * l;
    let disc = b * b - 8.0 * (1.0 - h);
    // (b − √disc)/2 written without cancellation
    let u = 4.0 * (1.0 - h) / (b + disc.sqrt());
    Ok(u / l)
}

/// The quartic whose sign decides `Q < 1` after the substitution
/// `s = 1 − γt`:
///
/// ```text
/// p(s) = −4s⁴ + (1−κ+a+b(κ−1))s³ + (3+κ+a+b(κ−1))s² + (b−1)s + b
/// ```
///
/// with `a = γcβ`, `b = (1+√2)γcβ`. `Q(t) < 1` iff `p(1 − γt) < 0` for
/// `s ∈ (√2/2, 1)`, and `p(1) = h − 1`.
pub fn smale_polynomial(consts: &LocalConstants, gamma: f64, s: f64) -> f64 {
    let a = gamma * consts.c * consts.beta;
    let b = ONE_PLUS_SQRT_2 * a;
    let k = consts.kappa;
    let c3 = 1.0 - k + a + b * (k - 1.0);
    let c2 = 3.0 + k + a + b * (k - 1.0);
    (((-4.0 * s + c3) * s + c2) * s + (b - 1.0)) * s + b
}

/// Closed-form `ρ = (1 − s̄)/γ` for the Smale model, where
/// `s̄ = inf{s ∈ (√2/2, 1) : p(s) < 0}` is located by bisection.
pub fn rho_smale(consts: &LocalConstants, gamma: f64) -> Result<f64> {
    let model = MajorantModel::smale(gamma)?;
    check_gate(&model, consts)?;
    let s_low = SQRT_2 / 2.0;
    if smale_polynomial(consts, gamma, s_low) <= 0.0 {
        return Err(Error::RadiusUndefined(
            "quartic has no sign change on (√2/2, 1)".into(),
        ));
    }
    // tolerance in s matching 1e-14·ν in t
    let abs_tol = BISECTION_ABS * (1.0 - s_low);
    let s_bar = bisect(1.0, s_low, abs_tol, |s| {
        smale_polynomial(consts, gamma, s) < 0.0
    });
    Ok((1.0 - s_bar) / gamma)
}

/// Assembles `ν`, `ρ` and `r = min(ρ, δ)`. The closed-form `ρ` is reported;
/// the generic bisection always runs alongside and must agree to
/// [`CROSS_CHECK_TOL`] relative.
pub fn certificate(model: &MajorantModel, consts: &LocalConstants) -> Result<RadiusCertificate> {
    let h_value = check_gate(model, consts)?;
    let (closed, method) = match *model {
        MajorantModel::Lipschitz { l } => {
            (rho_lipschitz(consts, l)?, RadiusMethod::LipschitzClosedForm)
        }
        MajorantModel::Smale { gamma } => (rho_smale(consts, gamma)?, RadiusMethod::SmaleQuartic),
    };
    let generic = rho_generic(model, consts)?;
    let cross_check_delta = relative_gap(closed, generic);
    if !(cross_check_delta <= CROSS_CHECK_TOL) {
        return Err(Error::CrossCheckMismatch { closed, generic });
    }
    Ok(RadiusCertificate {
        nu: nu(model),
        rho: closed,
        r: closed.min(consts.delta),
        h_value,
        h_ok: h_value < 1.0,
        method,
        rho_bisection: generic,
        cross_check_delta,
    })
}

/// Certificate using only the model-agnostic bisection path.
pub fn certificate_generic(
    model: &MajorantModel,
    consts: &LocalConstants,
) -> Result<RadiusCertificate> {
    let h_value = check_gate(model, consts)?;
    let rho = rho_generic(model, consts)?;
    Ok(RadiusCertificate {
        nu: nu_bisection(model),
        rho,
        r: rho.min(consts.delta),
        h_value,
        h_ok: h_value < 1.0,
        method: RadiusMethod::GenericBisection,
        rho_bisection: rho,
        cross_check_delta: 0.0,
    })
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Coefficients of the error recursion
/// `‖x_{k+1} − x*‖ ≤ (quad_a + quad_b)‖x_k − x*‖² + lin‖x_k − x*‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionCoefficients {
    pub quad_a: f64,
    pub quad_b: f64,
    pub lin: f64,
}

impl RecursionCoefficients {
    pub fn quadratic(&self) -> f64 {
        self.quad_a + self.quad_b
    }

    pub fn bound(&self, sigma: f64) -> f64 {
        self.quadratic() * sigma * sigma + self.lin * sigma
    }
}

/// Recursion coefficients evaluated at `t` from the generic majorant form:
///
/// ```text
/// quad_a = [f'+1+κ][t f' − f] / (t f')²
/// quad_b = (1+√2) β c (f'+1)² / (t f')²
/// lin    = c β [(1+√2)κ + 1](f'+1) / (t f'²)
/// ```
pub fn error_recursion_coefficients(
    model: &MajorantModel,
    consts: &LocalConstants,
    t: f64,
) -> Result<RecursionCoefficients> {
    let nu = nu(model);
    if !(t > 0.0 && t < nu) {
        return Err(Error::DomainError { t, nu });
    }
    let d = model.derivative(t);
    let gap = model.derivative_gap(t);
    let td2 = (t * d) * (t * d);
    let cb = consts.c * consts.beta;
    Ok(RecursionCoefficients {
        quad_a: (gap + consts.kappa) * model.remainder(t) / td2,
        quad_b: ONE_PLUS_SQRT_2 * cb * gap * gap / td2,
        lin: cb * (ONE_PLUS_SQRT_2 * consts.kappa + 1.0) * gap / (t * d * d),
    })
}

/// Lipschitz-specialized coefficients. The quadratic total is
/// `(κL + 2c(1+√2)βL² + L²t) / (2(1 − Lt)²)` and the linear one
/// `[(1+√2)κ+1]cβL / (1 − Lt)²`.
pub fn lipschitz_recursion_coefficients(
    consts: &LocalConstants,
    l: f64,
    t: f64,
) -> Result<RecursionCoefficients> {
    let model = MajorantModel::lipschitz(l)?;
    let nu = nu(&model);
    if !(t > 0.0 && t < nu) {
        return Err(Error::DomainError { t, nu });
    }
    let w = (1.0 - l * t) * (1.0 - l * t);
    let cb = consts.c * consts.beta;
    Ok(RecursionCoefficients {
        quad_a: (consts.kappa * l + l * l * t) / (2.0 * w),
        quad_b: ONE_PLUS_SQRT_2 * cb * l * l / w,
        lin: (ONE_PLUS_SQRT_2 * consts.kappa + 1.0) * cb * l / w,
    })
}

/// Smale-specialized coefficients with `s = 1 − γt`, `D = (1 − 2s²)²`:
///
/// ```text
/// quad_a = γ[1 + (κ−1)s²] / D
/// quad_b = (1+√2) β c γ² (1+s)² / D
/// lin    = c β [(1+√2)κ+1] γ (1+s) s² / D
/// ```
pub fn smale_recursion_coefficients(
    consts: &LocalConstants,
    gamma: f64,
    t: f64,
) -> Result<RecursionCoefficients> {
    let model = MajorantModel::smale(gamma)?;
    let nu = nu(&model);
    if !(t > 0.0 && t < nu) {
        return Err(Error::DomainError { t, nu });
    }
    let s = 1.0 - gamma * t;
    let d = (1.0 - 2.0 * s * s).powi(2);
    let cb = consts.c * consts.beta;
    Ok(RecursionCoefficients {
        quad_a: gamma * (1.0 + (consts.kappa - 1.0) * s * s) / d,
        quad_b: ONE_PLUS_SQRT_2 * cb * gamma * gamma * (1.0 + s).powi(2) / d,
        lin: cb * (ONE_PLUS_SQRT_2 * consts.kappa + 1.0) * gamma * (1.0 + s) * s * s / d,
    })
}
