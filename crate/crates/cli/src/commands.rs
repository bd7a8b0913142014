use proxgn_core::majorant::{certificate, condition_h};
use proxgn_core::problems::{catalog, catalog_problem, load_problem, sample_ball, ConstantsReport};
use proxgn_core::solver::{solve, verification_starts, verify_run};
use proxgn_core::{
    Error, IterationRecord, MajorantModel, ModelKind, Problem, RadiusCertificate, RadiusMethod,
    RunStatus, SolverConfig, Vector, VerificationReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{parse_x0, CertifyArgs, CommonArgs, SolveArgs, VerifyArgs};
use crate::output::{trace_csv, write_atomic, write_json, SCHEMA_VERSION};
use crate::CliError;

/// Final distance to `x*` required for a verification run to count as converged.
pub const VERIFY_FINAL_SIGMA: f64 = 1e-10;

fn load(common: &CommonArgs) -> Result<Problem, CliError> {
    match (&common.source.problem, &common.source.problem_file) {
        (Some(name), None) => {
            catalog_problem(name).map_err(|e| CliError::usage(format!("--problem: {e}")))
        }
        (None, Some(path)) => {
            load_problem(path).map_err(|e| CliError::usage(format!("--problem-file: {e}")))
        }
        _ => Err(CliError::usage(
            "exactly one of --problem or --problem-file is required",
        )),
    }
}

fn model_kind(common: &CommonArgs, problem: &Problem) -> ModelKind {
    common
        .model
        .map(ModelKind::from)
        .unwrap_or(problem.default_model)
}

#[derive(Debug, Serialize)]
struct ModelInfo {
    kind: ModelKind,
    parameter: f64,
    estimated: bool,
}

#[derive(Debug, Serialize)]
struct CertificateDoc {
    schema_version: u32,
    problem: String,
    c: f64,
    beta: f64,
    kappa: f64,
    delta: f64,
    model: ModelInfo,
    h: f64,
    h_ok: bool,
    nu: f64,
    rho: f64,
    r: f64,
    method: RadiusMethod,
    rho_bisection: f64,
    cross_check_delta: f64,
}

impl CertificateDoc {
    fn new(problem: &Problem, rep: &ConstantsReport, cert: &RadiusCertificate) -> Self {
        CertificateDoc {
            schema_version: SCHEMA_VERSION,
            problem: problem.name.clone(),
            c: rep.constants.c,
            beta: rep.constants.beta,
            kappa: rep.constants.kappa,
            delta: rep.constants.delta,
            model: model_info(rep),
            h: cert.h_value,
            h_ok: cert.h_ok,
            nu: cert.nu,
            rho: cert.rho,
            r: cert.r,
            method: cert.method,
            rho_bisection: cert.rho_bisection,
            cross_check_delta: cert.cross_check_delta,
        }
    }
}

fn model_info(rep: &ConstantsReport) -> ModelInfo {
    ModelInfo {
        kind: rep.model.kind(),
        parameter: rep.model.parameter(),
        estimated: rep.parameter_estimated,
    }
}

/// Constants and certificate, with gate failures mapped to exit code 3.
fn certify_problem(
    problem: &Problem,
    kind: ModelKind,
) -> Result<(ConstantsReport, RadiusCertificate), CliError> {
    let rep = problem.local_constants(kind).map_err(|e| match e {
        Error::InvalidModel(msg) => CliError::gate(format!(
            "{}: {} model unavailable: {msg}",
            problem.name,
            kind.name()
        )),
        other => CliError::from(other),
    })?;
    if rep.parameter_estimated {
        log::warn!(
            "{}: {} parameter {} is an estimate",
            problem.name,
            kind.name(),
            rep.model.parameter()
        );
    }
    let cert = certificate(&rep.model, &rep.constants).map_err(|e| match e {
        Error::H3Violated(h) => CliError::gate(format!(
            "{}: h-condition violated, h = {h} >= 1 ({} model)",
            problem.name,
            kind.name()
        )),
        other => CliError::from(other),
    })?;
    Ok((rep, cert))
}

pub fn certify(args: &CertifyArgs) -> Result<i32, CliError> {
    let problem = load(&args.common)?;
    let kind = model_kind(&args.common, &problem);
    let (rep, cert) = certify_problem(&problem, kind)?;
    let path = write_json(
        &args.common.out,
        "certificate.json",
        &CertificateDoc::new(&problem, &rep, &cert),
    )?;
    println!(
        "{}: {} model, h = {:.6e}, rho = {:.6e}, r = {:.6e} -> {}",
        problem.name,
        kind.name(),
        cert.h_value,
        cert.rho,
        cert.r,
        path.display()
    );
    Ok(0)
}

#[derive(Debug, Serialize)]
struct SolveDoc<'a> {
    schema_version: u32,
    problem: String,
    penalty: &'static str,
    model: Option<ModelInfo>,
    seed: u64,
    #[serde(serialize_with = "proxgn_core::solver::serialize_vector")]
    x0: Vector,
    config: SolverConfig,
    status: RunStatus,
    iterations: usize,
    #[serde(serialize_with = "proxgn_core::solver::serialize_vector")]
    final_point: &'a Vector,
    stationarity_residual: f64,
    message: Option<&'a str>,
    certificate: Option<CertificateDoc>,
    verification: Option<&'a VerificationReport>,
    trace: &'a [IterationRecord],
}

fn auto_start(problem: &Problem, r: f64, scale: f64, seed: u64) -> Result<Vector, CliError> {
    let x_star = problem.x_star()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = sample_ball(&mut rng, problem.dim(), 1.0).normalize();
    Ok(x_star + dir * (0.5 * scale * r))
}

pub fn solve_cmd(args: &SolveArgs) -> Result<i32, CliError> {
    let problem = load(&args.common)?;
    let kind = model_kind(&args.common, &problem);
    let cfg = args.solver.config();
    let requested = parse_x0(&args.x0).map_err(CliError::usage)?;

    let certified = match (&requested, &problem.ground_truth) {
        (None, _) => Some(certify_problem(&problem, kind)?),
        (Some(_), Some(_)) => match certify_problem(&problem, kind) {
            Ok(c) => Some(c),
            Err(e) => {
                log::warn!("no certificate: {}", e.message);
                None
            }
        },
        (Some(_), None) => None,
    };
    let x0 = match requested {
        Some(values) => {
            if values.len() != problem.dim() {
                return Err(CliError::usage(format!(
                    "--x0: expected {} values, got {}",
                    problem.dim(),
                    values.len()
                )));
            }
            Vector::from_vec(values)
        }
        None => {
            let (_, cert) = certified
                .as_ref()
                .expect("auto start requires a certificate");
            let x0 = auto_start(&problem, cert.r, args.radius_scale, args.seed)?;
            eprintln!(
                "auto start: seed {}, distance {:.6e} from x*",
                args.seed,
                0.5 * args.radius_scale * cert.r
            );
            x0
        }
    };
    if !problem.domain.contains(&x0) {
        return Err(CliError::usage(
            "--x0: start point lies outside the problem domain",
        ));
    }

    let mut report = solve(&problem, &x0, &cfg)?;
    if let Some((rep, cert)) = &certified {
        report.certificate = Some(*cert);
        report.verification = Some(verify_run(
            &problem,
            &report,
            &rep.model,
            &rep.constants,
            cert.r,
        )?);
    }

    let doc = SolveDoc {
        schema_version: SCHEMA_VERSION,
        problem: problem.name.clone(),
        penalty: problem.penalty.kind_name(),
        model: certified.as_ref().map(|(rep, _)| model_info(rep)),
        seed: args.seed,
        x0: x0.clone(),
        config: cfg,
        status: report.status,
        iterations: report.iterations(),
        final_point: &report.final_point,
        stationarity_residual: report.last().stationarity_residual,
        message: report.message.as_deref(),
        certificate: certified
            .as_ref()
            .map(|(rep, cert)| CertificateDoc::new(&problem, rep, cert)),
        verification: report.verification.as_ref(),
        trace: &report.trace,
    };
    write_json(&args.common.out, "report.json", &doc)?;
    write_atomic(
        &args.common.out,
        "trace.csv",
        trace_csv(&report.trace).as_bytes(),
    )?;

    let point: Vec<String> = report.final_point.iter().map(|v| format!("{v}")).collect();
    println!(
        "{}: {:?} after {} iterations, x = [{}], stationarity {:.3e}",
        problem.name,
        report.status,
        report.iterations(),
        point.join(", "),
        report.last().stationarity_residual
    );
    if let Some(v) = &report.verification {
        println!(
            "certified r = {:.6e}; min recursion slack {:.3e}; checks {}",
            v.radius,
            v.min_recursion_slack,
            if v.all_ok() { "pass" } else { "FAIL" }
        );
    }
    Ok(if report.status == RunStatus::Converged {
        0
    } else {
        2
    })
}

#[derive(Debug, Serialize)]
struct RunSummary {
    start_index: usize,
    #[serde(serialize_with = "proxgn_core::solver::serialize_vector")]
    x0: Vector,
    status: Option<RunStatus>,
    error: Option<String>,
    iterations: usize,
    passed: bool,
    verification: Option<VerificationReport>,
}

#[derive(Debug, Serialize)]
struct Aggregate {
    runs: usize,
    passed: usize,
    min_recursion_slack: f64,
    min_per_step_slack: f64,
    min_linearization_slack: f64,
    max_quadratic_ratio: Option<f64>,
    max_final_sigma: f64,
}

#[derive(Debug, Serialize)]
struct VerifyDoc {
    schema_version: u32,
    problem: String,
    seed: u64,
    radius_scale: f64,
    config: SolverConfig,
    certificate: CertificateDoc,
    all_passed: bool,
    aggregate: Aggregate,
    runs: Vec<RunSummary>,
}

fn run_one(
    problem: &Problem,
    model: &MajorantModel,
    rep: &ConstantsReport,
    r: f64,
    cfg: &SolverConfig,
    index: usize,
    x0: Vector,
) -> RunSummary {
    let outcome = solve(problem, &x0, cfg)
        .and_then(|run| verify_run(problem, &run, model, &rep.constants, r).map(|v| (run, v)));
    match outcome {
        Ok((run, v)) => RunSummary {
            start_index: index,
            x0,
            status: Some(run.status),
            error: run.message.clone(),
            iterations: run.iterations(),
            passed: run.status == RunStatus::Converged
                && v.all_ok()
                && v.final_sigma <= VERIFY_FINAL_SIGMA,
            verification: Some(v),
        },
        Err(e) => RunSummary {
            start_index: index,
            x0,
            status: None,
            error: Some(e.to_string()),
            iterations: 0,
            passed: false,
            verification: None,
        },
    }
}

fn fold_min<'a>(it: impl Iterator<Item = &'a f64>) -> f64 {
    it.copied().fold(f64::INFINITY, f64::min)
}

pub fn verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let problem = load(&args.common)?;
    let kind = model_kind(&args.common, &problem);
    let cfg = args.solver.config();
    let (rep, cert) = certify_problem(&problem, kind)?;
    let x_star = problem.x_star()?.clone();
    let starts = verification_starts(&x_star, args.radius_scale * cert.r, args.seed);

    let runs: Vec<RunSummary> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, x0)| run_one(&problem, &rep.model, &rep, cert.r, &cfg, i, x0))
        .collect();

    let verifs: Vec<&VerificationReport> = runs
        .iter()
        .filter_map(|r| r.verification.as_ref())
        .collect();
    let aggregate = Aggregate {
        runs: runs.len(),
        passed: runs.iter().filter(|r| r.passed).count(),
        min_recursion_slack: fold_min(verifs.iter().flat_map(|v| &v.recursion_slacks)),
        min_per_step_slack: fold_min(verifs.iter().flat_map(|v| &v.per_step_slacks)),
        min_linearization_slack: fold_min(verifs.iter().flat_map(|v| &v.linearization_slacks)),
        max_quadratic_ratio: verifs
            .iter()
            .flat_map(|v| &v.quadratic_ratio_estimates)
            .copied()
            .reduce(f64::max),
        max_final_sigma: verifs.iter().map(|v| v.final_sigma).fold(0.0, f64::max),
    };
    let all_passed = aggregate.passed == aggregate.runs;
    println!(
        "{}: {} model, r = {:.6e}, {}/{} runs pass, min recursion slack {:.3e}",
        problem.name,
        kind.name(),
        cert.r,
        aggregate.passed,
        aggregate.runs,
        aggregate.min_recursion_slack
    );
    if let Some(q) = aggregate.max_quadratic_ratio {
        let quad_a = verifs
            .iter()
            .filter_map(|v| v.coefficients)
            .map(|c| c.quad_a)
            .fold(0.0, f64::max);
        println!("max quadratic ratio {q:.4e} (largest quad_a {quad_a:.4e})");
    }
    let doc = VerifyDoc {
        schema_version: SCHEMA_VERSION,
        problem: problem.name.clone(),
        seed: args.seed,
        radius_scale: args.radius_scale,
        config: cfg,
        certificate: CertificateDoc::new(&problem, &rep, &cert),
        all_passed,
        aggregate,
        runs,
    };
    write_json(&args.common.out, "verification.json", &doc)?;
    Ok(if all_passed { 0 } else { 2 })
}

pub fn catalog_cmd() -> Result<i32, CliError> {
    println!(
        "{:<16} {:>3} {:>3}  {:<12} {:<10} {:>8}",
        "name", "n", "m", "penalty", "model", "h"
    );
    for p in catalog() {
        let h = p
            .local_constants(p.default_model)
            .map(|rep| condition_h(&rep.model, &rep.constants))
            .unwrap_or(f64::NAN);
        println!(
            "{:<16} {:>3} {:>3}  {:<12} {:<10} {:>8.2e}",
            p.name,
            p.dim(),
            p.map.output_dim(),
            p.penalty.kind_name(),
            p.default_model.name(),
            h
        );
    }
    Ok(0)
}
