//! Acceptance suite: one PASS/FAIL line per criterion. Oracles are computed
//! here, independently of the library routes they check.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use proxgn_core::linalg::{check_perturbation_lemma, pseudoinverse};
use proxgn_core::majorant::{
    error_recursion_coefficients, lipschitz_recursion_coefficients, nu, rho_generic, rho_lipschitz,
    rho_smale, smale_recursion_coefficients, LocalConstants, MajorantModel,
};
use proxgn_core::problems::{catalog, catalog_problem, sample_ball};
use proxgn_core::prox::{
    check_two_metric_bound, prox, prox_iterative, DEFAULT_MAX_INNER_ITERATIONS,
};
use proxgn_core::solver::{
    pgn_iterate, solve, verification_starts, verify_run, RunStatus, SolverConfig,
};
use proxgn_core::{majorant::certificate, Problem, ProxSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Mat = DMatrix<f64>;
type Vect = DVector<f64>;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const START_SEED: u64 = 2024;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `√λ_max(AᵀA)` by a symmetric eigensolver, a route separate from the
/// library's SVD.
fn spectral(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let g = a.transpose() * a;
    g.symmetric_eigenvalues().max().max(0.0).sqrt()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// 1 ------------------------------------------------------------------------

fn c1_pseudoinverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut deficient = 0;
    for i in 0..1000 {
        let rows = rng.random_range(1..=8);
        let cols = rng.random_range(1..=8);
        let full = rows.min(cols);
        let rank = if i % 3 == 0 {
            rng.random_range(0..full)
        } else {
            full
        };
        let a = if rank < full {
            deficient += 1;
            gaussian(&mut rng, rows, rank) * gaussian(&mut rng, rank, cols)
        } else {
            gaussian(&mut rng, rows, cols)
        };
        let p = pseudoinverse(&a, None).map_err(|e| e.to_string())?;
        let scale = spectral(&a).max(1.0);
        let residuals = [
            (&a * &p * &a - &a).amax(),
            (&p * &a * &p - &p).amax(),
            ((&a * &p).transpose() - &a * &p).amax(),
            ((&p * &a).transpose() - &p * &a).amax(),
        ];
        for r in residuals {
            worst = worst.max(r / scale);
            check(r <= 1e-10 * scale, || {
                format!("matrix {i} ({rows}x{cols}, rank {rank}): Penrose residual {r:e}")
            })?;
        }
        if rank == cols && rows >= cols {
            let e = (&p * &a - Mat::identity(cols, cols)).amax();
            worst_identity = worst_identity.max(e);
            check(e <= 1e-10, || format!("matrix {i}: A†A − I = {e:e}"))?;
        }
    }
    Ok(format!(
        "1000 matrices ({deficient} rank-deficient), worst scaled Penrose residual {worst:.1e}, worst |A†A−I| {worst_identity:.1e}"
    ))
}

// 2 ------------------------------------------------------------------------

fn c2_perturbation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = f64::INFINITY;
    for i in 0..500 {
        let cols = rng.random_range(1..=6);
        let rows = rng.random_range(cols..=8);
        let a = gaussian(&mut rng, rows, cols);
        let e = gaussian(&mut rng, rows, cols);
        // normal-equations pseudoinverse as the oracle
        let pinv = |m: &Mat| (m.transpose() * m).try_inverse().map(|g| g * m.transpose());
        let Some(a_pinv) = pinv(&a) else { continue };
        let a_pinv_norm = spectral(&a_pinv);
        let u: f64 = rng.random_range(0.0..0.95);
        let b = &a + &e * (u / (a_pinv_norm * spectral(&e)));
        let diff = spectral(&(&a - &b));
        let contraction = a_pinv_norm * diff;
        let b_pinv = pinv(&b).ok_or_else(|| format!("pair {i}: B not injective"))?;
        let norm_slack = a_pinv_norm / (1.0 - contraction) - spectral(&b_pinv);
        let diff_slack = SQRT_2 * a_pinv_norm * a_pinv_norm * diff / (1.0 - contraction)
            - spectral(&(&b_pinv - &a_pinv));
        let report = check_perturbation_lemma(&a, &b).map_err(|e| format!("pair {i}: {e}"))?;
        worst = worst
            .min(norm_slack)
            .min(diff_slack)
            .min(report.norm_slack)
            .min(report.diff_slack);
        check(norm_slack >= -1e-10 && diff_slack >= -1e-10, || {
            format!("pair {i}: oracle slacks {norm_slack:e}, {diff_slack:e}")
        })?;
        check(
            report.norm_slack >= -1e-10 && report.diff_slack >= -1e-10,
            || {
                format!(
                    "pair {i}: library slacks {:e}, {:e}",
                    report.norm_slack, report.diff_slack
                )
            },
        )?;
    }
    Ok(format!("500 pairs, smallest slack {worst:.3e}"))
}

// 3 ------------------------------------------------------------------------

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let g = gaussian(rng, n, n);
    g.transpose() * g + Mat::identity(n, n) * 0.2
}

fn random_penalty(rng: &mut ChaCha8Rng, n: usize) -> ProxSpec {
    if rng.random_bool(0.5) {
        ProxSpec::WeightedL1 {
            weights: (0..n).map(|_| rng.random_range(0.0..2.0)).collect(),
        }
    } else {
        let lower: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.2) {
                    f64::NEG_INFINITY
                } else {
                    rng.random_range(-2.0..0.5)
                }
            })
            .collect();
        let upper = lower
            .iter()
            .map(|l| {
                if rng.random_bool(0.2) {
                    f64::INFINITY
                } else {
                    l.max(-1.0) + rng.random_range(0.0..2.0)
                }
            })
            .collect();
        ProxSpec::BoxIndicator { lower, upper }
    }
}

/// `dist(g, ∂J(p))` written out from the definitions.
fn first_order_residual(spec: &ProxSpec, p: &Vect, g: &Vect) -> f64 {
    let mut sq = 0.0;
    for i in 0..p.len() {
        let d: f64 = match spec {
            ProxSpec::Zero => g[i].abs(),
            ProxSpec::WeightedL1 { weights } => {
                let w = weights[i];
                if p[i] > 0.0 {
                    (g[i] - w).abs()
                } else if p[i] < 0.0 {
                    (g[i] + w).abs()
                } else {
                    (g[i].abs() - w).max(0.0)
                }
            }
            ProxSpec::BoxIndicator { lower, upper } => {
                let (at_lo, at_hi) = (p[i] <= lower[i], p[i] >= upper[i]);
                match (at_lo, at_hi) {
                    (true, true) => 0.0,
                    (true, false) => g[i].max(0.0),
                    (false, true) => (-g[i]).max(0.0),
                    (false, false) => g[i].abs(),
                }
            }
        };
        sq += d * d;
    }
    sq.sqrt()
}

fn c3_prox() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tol = 1e-10;
    let mut worst_gap: f64 = 0.0;
    for i in 0..500 {
        let n = rng.random_range(1..=6);
        let h = Mat::from_diagonal(&Vect::from_fn(n, |_, _| rng.random_range(0.5..4.0)));
        let z = Vect::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let spec = random_penalty(&mut rng, n);
        let closed = prox(&spec, &h, &z, tol).map_err(|e| format!("diag {i}: {e}"))?;
        let inner = prox_iterative(&spec, &h, &z, tol, DEFAULT_MAX_INNER_ITERATIONS)
            .map_err(|e| format!("diag {i}: {e}"))?;
        let gap = (&closed.point - &inner.point).norm();
        worst_gap = worst_gap.max(gap);
        check(gap <= 10.0 * tol, || {
            format!("diag {i}: closed vs inner {gap:e}")
        })?;
    }

    let mut worst_res: f64 = 0.0;
    for i in 0..500 {
        let n = rng.random_range(1..=6);
        let h = random_spd(&mut rng, n);
        let z = Vect::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let spec = random_penalty(&mut rng, n);
        let out = prox(&spec, &h, &z, tol).map_err(|e| format!("general {i}: {e}"))?;
        let res = first_order_residual(&spec, &out.point, &(&h * (&z - &out.point)));
        let bound = tol * (spectral(&h) * z.norm()).max(1.0);
        worst_res = worst_res.max(res / bound);
        check(res <= bound, || {
            format!("general {i}: first-order residual {res:e} > {bound:e}")
        })?;
    }

    let mut worst_slack: f64 = f64::INFINITY;
    for i in 0..500 {
        let n = rng.random_range(1..=5);
        let h1 = random_spd(&mut rng, n);
        let h2 = random_spd(&mut rng, n);
        let z1 = Vect::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let z2 = Vect::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let spec = random_penalty(&mut rng, n);
        let rep = check_two_metric_bound(&spec, &h1, &h2, &z1, &z2, tol)
            .map_err(|e| format!("two-metric {i}: {e}"))?;
        worst_slack = worst_slack.min(rep.slack);
        check(rep.slack >= -1e-6, || {
            format!("two-metric {i}: slack {:e}", rep.slack)
        })?;
    }
    Ok(format!(
        "closed vs inner max gap {worst_gap:.1e} (limit {:.0e}); first-order residual max {worst_res:.2} of bound; two-metric min slack {worst_slack:.3e}",
        10.0 * tol
    ))
}

// 4 ------------------------------------------------------------------------

fn admissible(rng: &mut ChaCha8Rng, smale: bool) -> (MajorantModel, LocalConstants) {
    let kappa = rng.random_range(0.5..5.0);
    let param = rng.random_range(0.1..10.0);
    let beta = rng.random_range(0.2..5.0);
    let h = rng.random_range(0.0..0.9);
    let model = if smale {
        MajorantModel::smale(param).unwrap()
    } else {
        MajorantModel::lipschitz(param).unwrap()
    };
    let c = h / (((1.0 + SQRT_2) * kappa + 1.0) * beta * model.dplus_derivative_at_zero());
    (
        model,
        LocalConstants::new(c, beta, kappa, f64::INFINITY).unwrap(),
    )
}

fn c4_radii() -> Outcome {
    let unit = LocalConstants::new(0.0, 1.0, 1.0, 10.0).unwrap();
    let lip = rho_lipschitz(&unit, 1.0).map_err(|e| e.to_string())?;
    let golden = (5.0 - 17f64.sqrt()) / 2.0;
    check((lip - golden).abs() <= 1e-12, || {
        format!("rho_lipschitz {lip} vs {golden}")
    })?;

    // independent bisection of −4s³ + 4s − 1 on (√2/2, 1)
    let p = |s: f64| -4.0 * s * s * s + 4.0 * s - 1.0;
    let (mut lo, mut hi) = (SQRT_2 / 2.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 1.0 - 0.5 * (lo + hi);
    let sm = rho_smale(&unit, 1.0).map_err(|e| e.to_string())?;
    check((sm - oracle).abs() <= 1e-9, || {
        format!("rho_smale {sm} vs oracle {oracle}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (model, consts) = admissible(&mut rng, i % 2 == 1);
        let closed = match model {
            MajorantModel::Lipschitz { l } => rho_lipschitz(&consts, l),
            MajorantModel::Smale { gamma } => rho_smale(&consts, gamma),
        }
        .map_err(|e| format!("set {i}: {e}"))?;
        let generic = rho_generic(&model, &consts).map_err(|e| format!("set {i}: {e}"))?;
        worst = worst.max(rel(closed, generic));
        check(rel(closed, generic) <= 1e-8, || {
            format!("set {i}: closed {closed} generic {generic}")
        })?;
    }
    Ok(format!(
        "rho_lipschitz {lip:.10}, rho_smale {sm:.9} (oracle s̄ = {:.6}), 200 sets max relative gap {worst:.1e}",
        1.0 - oracle
    ))
}

// 5 ------------------------------------------------------------------------

fn c5_coefficients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let smale = i % 2 == 1;
        let (model, k) = admissible(&mut rng, smale);
        let t = rng.random_range(1e-3..0.999) * nu(&model);
        let g =
            error_recursion_coefficients(&model, &k, t).map_err(|e| format!("tuple {i}: {e}"))?;
        let cb = k.c * k.beta;
        let (quad, lin, lib) = match model {
            MajorantModel::Lipschitz { l } => {
                let w = 2.0 * (1.0 - l * t).powi(2);
                (
                    (k.kappa * l + 2.0 * k.c * (1.0 + SQRT_2) * k.beta * l * l + l * l * t) / w,
                    ((1.0 + SQRT_2) * k.kappa + 1.0) * cb * l / (1.0 - l * t).powi(2),
                    lipschitz_recursion_coefficients(&k, l, t),
                )
            }
            MajorantModel::Smale { gamma } => {
                let s = 1.0 - gamma * t;
                let d = (1.0 - 2.0 * s * s).powi(2);
                (
                    gamma * (1.0 + (k.kappa - 1.0) * s * s) / d
                        + (1.0 + SQRT_2) * cb * gamma * gamma * (1.0 + s).powi(2) / d,
                    cb * ((1.0 + SQRT_2) * k.kappa + 1.0) * gamma * (2.0 - gamma * t) * s * s / d,
                    smale_recursion_coefficients(&k, gamma, t),
                )
            }
        };
        let lib = lib.map_err(|e| format!("tuple {i}: {e}"))?;
        let errs = [
            rel(g.quadratic(), quad),
            rel(g.lin, lin),
            rel(g.quad_a, lib.quad_a),
            rel(g.quad_b, lib.quad_b),
            rel(g.lin, lib.lin),
        ];
        for e in errs {
            worst = worst.max(e);
            check(e <= 1e-10, || {
                format!("tuple {i} ({model:?}, t = {t}): relative gap {e:e}")
            })?;
        }
    }
    Ok(format!("1000 tuples, max relative gap {worst:.1e}"))
}

// 6 ------------------------------------------------------------------------

fn c6_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let n = 10_000;
    for i in 0..50 {
        for smale in [false, true] {
            let (model, k) = admissible(&mut rng, smale);
            let nu = nu(&model);
            let eval = |t: f64| {
                let d = model.derivative(t);
                [
                    -1.0 / d,
                    -(model.derivative_gap(t) + k.kappa) / d,
                    model.remainder(t) / (t * t),
                    model.derivative_gap(t) / t,
                ]
            };
            let mut prev = eval(nu / (n as f64 + 1.0));
            for j in 2..=n {
                let t = nu * j as f64 / (n as f64 + 1.0);
                let cur = eval(t);
                for f in 0..4 {
                    worst = worst.max(prev[f] - cur[f]);
                    check(cur[f] > 0.0 && cur[f] >= prev[f] - 1e-12, || {
                        format!(
                            "parameterization {i} {model:?}: function {} fails at t = {t}",
                            f + 1
                        )
                    })?;
                }
                prev = cur;
            }
        }
    }
    Ok(format!(
        "100 models x 4 functions x 10^4 points, largest decrease {:.1e}",
        worst.max(0.0)
    ))
}

// 7 ------------------------------------------------------------------------

fn c7_majorant_condition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = f64::INFINITY;
    for problem in catalog() {
        let rep = problem
            .local_constants(problem.default_model)
            .map_err(|e| e.to_string())?;
        let x_star = problem.x_star().unwrap();
        let radius = nu(&rep.model).min(rep.constants.delta);
        for _ in 0..100 {
            let x = x_star + sample_ball(&mut rng, problem.dim(), radius);
            let tau: f64 = rng.random();
            let sigma = (&x - x_star).norm();
            let mid = x_star + (&x - x_star) * tau;
            let jd = problem.jacobian(&x).unwrap() - problem.jacobian(&mid).unwrap();
            let lhs = rep.constants.beta * spectral(&jd);
            let rhs = rep.model.derivative(sigma) - rep.model.derivative(tau * sigma);
            worst = worst.min(rhs - lhs);
            check(rhs - lhs >= -1e-10, || {
                format!("{}: slack {:e}", problem.name, rhs - lhs)
            })?;
        }
    }
    Ok(format!("5 problems x 100 samples, min slack {worst:.3e}"))
}

// 8, 9 ---------------------------------------------------------------------

fn audit(problem: &Problem) -> Result<Vec<proxgn_core::VerificationReport>, String> {
    let rep = problem
        .local_constants(problem.default_model)
        .map_err(|e| e.to_string())?;
    let cert = certificate(&rep.model, &rep.constants).map_err(|e| e.to_string())?;
    let x_star = problem.x_star().unwrap();
    let cfg = SolverConfig::default();
    let mut out = Vec::new();
    for (i, x0) in verification_starts(x_star, cert.r, START_SEED)
        .into_iter()
        .enumerate()
    {
        let run =
            solve(problem, &x0, &cfg).map_err(|e| format!("{} start {i}: {e}", problem.name))?;
        check(run.status == RunStatus::Converged, || {
            format!("{} start {i}: status {:?}", problem.name, run.status)
        })?;
        out.push(
            verify_run(problem, &run, &rep.model, &rep.constants, cert.r)
                .map_err(|e| e.to_string())?,
        );
    }
    Ok(out)
}

fn c8_run_audit() -> Outcome {
    let mut runs = 0;
    let mut worst_slack: f64 = f64::INFINITY;
    for problem in catalog() {
        for (i, v) in audit(&problem)?.iter().enumerate() {
            runs += 1;
            let tol = 1e-8 * v.sigma0.max(1.0);
            let name = &problem.name;
            // strict decrease checked here directly, except at the floor
            for s in &v.steps {
                check(s.next_sigma < s.sigma || s.sigma <= 1e-13, || {
                    format!("{name} start {i}: sigma {} -> {}", s.sigma, s.next_sigma)
                })?;
            }
            check(v.steps.iter().all(|s| s.sigma < v.radius), || {
                format!("{name} start {i}: left B(x*, r)")
            })?;
            for &s in &v.recursion_slacks {
                worst_slack = worst_slack.min(s);
                check(s >= -tol, || {
                    format!("{name} start {i}: recursion slack {s:e}")
                })?;
            }
            check(v.final_sigma <= 1e-10, || {
                format!("{name} start {i}: final sigma {:e}", v.final_sigma)
            })?;
        }
    }
    Ok(format!(
        "{runs} runs, min recursion slack {worst_slack:.3e}"
    ))
}

fn c9_quadratic_rate() -> Outcome {
    let mut notes = Vec::new();
    for name in ["quad2d", "rosenbrock-res"] {
        let problem = catalog_problem(name).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for v in audit(&problem)? {
            let quad_a = v.coefficients.ok_or("missing coefficients")?.quad_a;
            for &q in &v.quadratic_ratio_estimates {
                count += 1;
                worst = worst.max(q / quad_a);
                check(q <= 1.1 * quad_a, || {
                    format!("{name}: ratio {q} vs quad_a {quad_a}")
                })?;
            }
        }
        check(count > 0, || format!("{name}: no informative steps"))?;
        notes.push(format!(
            "{name} {count} ratios, max ratio/quad_a {worst:.3}"
        ));
    }
    Ok(notes.join("; "))
}

// 10 -----------------------------------------------------------------------

fn c10_fixed_point() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for problem in catalog() {
        let x_star = problem.x_star().unwrap();
        let step =
            pgn_iterate(&problem, x_star, &cfg).map_err(|e| format!("{}: {e}", problem.name))?;
        let d = (&step.next - x_star).norm();
        worst = worst.max(d);
        check(d <= 10.0 * cfg.prox_tolerance, || {
            format!("{}: moved {d:e}", problem.name)
        })?;
    }
    Ok(format!("5 problems, max displacement {worst:.1e}"))
}

// 11 -----------------------------------------------------------------------

fn c11_gauss_newton_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for problem in catalog()
        .into_iter()
        .filter(|p| p.penalty == ProxSpec::Zero)
    {
        let rep = problem
            .local_constants(problem.default_model)
            .map_err(|e| e.to_string())?;
        let r = certificate(&rep.model, &rep.constants)
            .map_err(|e| e.to_string())?
            .r;
        let mut starts = verification_starts(problem.x_star().unwrap(), r, START_SEED);
        starts.push(problem.x_star().unwrap() + Vect::from_element(problem.dim(), 0.3));
        for x0 in starts {
            runs += 1;
            let run = solve(&problem, &x0, &SolverConfig::default()).map_err(|e| e.to_string())?;
            let mut x = x0.clone();
            for rec in &run.trace {
                let d = (&rec.point - &x).norm();
                worst = worst.max(d);
                check(d <= 1e-12, || {
                    format!("{} iterate {}: gap {d:e}", problem.name, rec.index)
                })?;
                // reference step: least squares via Householder QR
                let jac = problem.jacobian(&x).unwrap();
                let f = problem.residual(&x).unwrap();
                let qr = jac.qr();
                let step = qr
                    .r()
                    .solve_upper_triangular(&(-(qr.q().transpose() * f)))
                    .unwrap();
                x += step;
            }
        }
    }
    Ok(format!(
        "{runs} runs on zero-penalty problems, max iterate gap {worst:.1e}"
    ))
}

// 12 -----------------------------------------------------------------------

const H3_FIXTURE: &str = r#"{
  "input_dim": 1,
  "output_dim": 2,
  "components": [[[1.0, [1]]], [[1.0, [2]], [1.0, [0]]]],
  "penalty": {"kind": "zero"},
  "domain": {"kind": "whole_space", "params": {"radius": 10.0}},
  "ground_truth": {"x_star": [0.0], "L": 2.0}
}"#;

fn proxgn(args: &[&str], out: &Path) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_proxgn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    status
        .status
        .code()
        .ok_or_else(|| "terminated by signal".into())
}

fn c12_cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [
        "solve",
        "--problem",
        "quad2d-l1",
        "--x0",
        "auto",
        "--seed",
        "17",
    ];
    let code_a = proxgn(&args, &a)?;
    let code_b = proxgn(&args, &b)?;
    check(code_a == 0 && code_b == 0, || {
        format!("success path exit codes {code_a}, {code_b}")
    })?;
    let ta = std::fs::read(a.join("trace.csv")).map_err(|e| e.to_string())?;
    let tb = std::fs::read(b.join("trace.csv")).map_err(|e| e.to_string())?;
    check(ta == tb && !ta.is_empty(), || "traces differ".into())?;

    let code = proxgn(&["solve", "--problem", "quad2d", "--max-iter", "1"], &a)?;
    check(code == 2, || format!("non-convergence exit code {code}"))?;

    let fixture = dir.path().join("h3.json");
    std::fs::write(&fixture, H3_FIXTURE).map_err(|e| e.to_string())?;
    let code = proxgn(
        &[
            "certify",
            "--problem-file",
            fixture.to_str().unwrap(),
            "--model",
            "lipschitz",
        ],
        &a,
    )?;
    check(code == 3, || format!("H3Violated exit code {code}"))?;

    let code = proxgn(&["solve", "--problem-file", "missing.json"], &a)?;
    check(code == 1, || format!("usage error exit code {code}"))?;
    Ok(format!(
        "byte-identical traces ({} bytes); exit codes 0/2/3/1 as documented",
        ta.len()
    ))
}

// --------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 12] = [
        ("pseudoinverse correctness", c1_pseudoinverse),
        ("perturbation lemma", c2_perturbation),
        ("prox correctness", c3_prox),
        ("radius golden values", c4_radii),
        ("coefficient consistency", c5_coefficients),
        ("majorant monotonicity", c6_monotonicity),
        ("majorant condition sampling", c7_majorant_condition),
        ("end-to-end run audit", c8_run_audit),
        ("zero-residual quadratic rate", c9_quadratic_rate),
        ("fixed-point property", c10_fixed_point),
        ("plain Gauss-Newton equivalence", c11_gauss_newton_oracle),
        ("CLI determinism and exit codes", c12_cli),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
