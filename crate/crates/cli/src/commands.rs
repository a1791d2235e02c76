use std::fs;
use std::io::Write;
use std::path::Path;

use fjlp_core::fourwise::FourWiseMatrix;
use fjlp_core::io::{self, VectorFormat};
use fjlp_core::lowerbound::{self, RoundtripMap, TargetNorm};
use fjlp_core::profile::{self, ProfileConfig};
use fjlp_core::verify::{self, GaussianSampling, VerificationReport};
use fjlp_core::{required_k, MomentConstants, Transform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::args::*;
use crate::{CliError, Outcome};

type CmdResult = Result<Outcome, CliError>;

fn param(msg: impl Into<String>) -> CliError {
    CliError::Param(msg.into())
}

fn emit(value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn threads() -> usize {
    rayon::current_num_threads()
}

fn build_transform(a: &TransformArgs, default_d: Option<usize>) -> Result<Transform, CliError> {
    let d = a.d.or(default_d).ok_or_else(|| param("--d is required"))?;
    let k = a.k.ok_or_else(|| param("--k is required"))?;
    Ok(Transform::plan(d, k, a.p, a.seed, !a.relaxed)?)
}

fn unit_input(shape: InputShape, d: usize) -> Vec<f64> {
    match shape {
        InputShape::Flat => verify::flat_unit(d),
        InputShape::Spike => verify::basis_vector(d, 0),
    }
}

fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn random_units(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

pub fn plan(a: &PlanArgs) -> CmdResult {
    let required = match a.n {
        Some(n) => {
            let eps = a.eps.ok_or_else(|| param("--eps is required with --n"))?;
            let k = required_k(n, eps, a.rho, a.c0)?;
            eprintln!("required k = {k} for n = {n}, eps = {eps}, rho = {}, C0 = {}", a.rho, a.c0);
            Some(json!({ "n": n, "eps": eps, "rho": a.rho, "C0": a.c0, "required_k": k }))
        }
        None => None,
    };
    let spec = match a.transform.d {
        Some(_) => {
            let t = build_transform(&a.transform, None)?;
            eprintln!(
                "transform {} -> {} (padded {}), p = {}, scale = {}",
                t.input_dim(),
                t.output_dim(),
                t.padded_dim(),
                t.p(),
                t.scale()
            );
            Some(serde_json::to_value(t.to_spec()).map_err(|e| CliError::Io(e.to_string()))?)
        }
        None => None,
    };
    let value = match (required, spec) {
        (Some(r), Some(s)) => json!({ "required": r, "spec": s }),
        (Some(r), None) => r,
        (None, Some(s)) => s,
        (None, None) => return Err(param("give --n/--eps and/or --d/--k")),
    };
    match &a.out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))?;
            fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        None => emit(&value)?,
    }
    Ok(Outcome::Pass)
}

fn read_spec(path: &Path) -> Result<Transform, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(Transform::from_json(&text)?)
}

pub fn embed(a: &EmbedArgs) -> CmdResult {
    let (vectors, detected) = io::read_vectors(&a.input)?;
    let t = match &a.spec {
        Some(path) => read_spec(path)?,
        None => build_transform(&a.transform, vectors.first().map(Vec::len))?,
    };
    let out = t.apply_set(&vectors)?;
    let format = match a.format {
        FormatArg::Auto => detected,
        FormatArg::Csv => VectorFormat::Csv,
        FormatArg::Binary => VectorFormat::Binary,
    };
    io::write_vectors(&a.output, &out, format)?;
    eprintln!(
        "embedded {} vectors: {} -> {} ({:?})",
        out.len(),
        t.input_dim(),
        t.output_dim(),
        format
    );
    Ok(Outcome::Pass)
}

fn finish(mut reports: Vec<VerificationReport>) -> CmdResult {
    for r in &mut reports {
        r.set_param("threads", threads());
        eprintln!(
            "{}: {} (estimate {:.6}, ci [{:.6}, {:.6}], bound {:.6}, trials {})",
            r.check,
            if r.pass { "pass" } else { "FAIL" },
            r.estimate,
            r.ci[0],
            r.ci[1],
            r.bound,
            r.trials
        );
    }
    let pass = reports.iter().all(|r| r.pass);
    if reports.len() == 1 {
        emit(&reports[0])?;
    } else {
        emit(&reports)?;
    }
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

pub fn verify(check: &VerifyCommand) -> CmdResult {
    let reports = match check {
        VerifyCommand::Fourwise { k, d, budget } => {
            vec![FourWiseMatrix::build(*k, *d)?.verify_strength4(*budget)]
        }
        VerifyCommand::Moment { d, p, c0, x } => {
            let constants = MomentConstants::new(*p, *c0)?;
            let a_row: Vec<f64> = match FourWiseMatrix::build(1, *d) {
                Ok(a) => (0..*d).map(|j| a.entry(0, j).map(f64::from)).collect::<Result<_, _>>()?,
                Err(_) => vec![1.0; *d],
            };
            vec![verify::moment_check(&unit_input(*x, *d), &a_row, &constants)?]
        }
        VerifyCommand::Tail { transform, eps, trials, c0, x } => {
            let t = build_transform(transform, None)?;
            verify::tail_profile(&t, &unit_input(*x, t.input_dim()), eps, *trials, *c0)?
        }
        VerifyCommand::Flatness { d, t, trials, seed, x } => {
            vec![verify::l4_flatness_check(&unit_input(*x, *d), *t, *trials, *seed)?]
        }
        VerifyCommand::Opnorm { k, d, vectors, iterations, restarts, seed } => {
            let a = FourWiseMatrix::build(*k, *d)?;
            let xs = random_units(*vectors, *d, *seed);
            vec![verify::opnorm_check(&a, &xs, *iterations, *restarts, *seed)?]
        }
        VerifyCommand::Distortion { transform, n, input, eps, rho, gaussian_seeds, ratio } => {
            let points = match input {
                Some(path) => io::read_vectors(path)?.0,
                None => {
                    let d = transform.d.ok_or_else(|| param("--d is required without --input"))?;
                    random_points(*n, d, transform.seed)
                }
            };
            match gaussian_seeds {
                Some(seeds) => {
                    let k = transform.k.ok_or_else(|| param("--k is required with --gaussian-seeds"))?;
                    vec![verify::distortion_vs_gaussian(&points, k, transform.p, *seeds, transform.seed, *ratio)?]
                }
                None => vec![verify::distortion_suite(&points, transform.p, *eps, *rho, transform.k, transform.seed)?],
            }
        }
        VerifyCommand::Gaussian { transform, trials, threshold, x } => {
            let t = build_transform(transform, None)?;
            let x = unit_input(*x, t.input_dim());
            vec![verify::compare_gaussian(&t, &x, *trials, *threshold, GaussianSampling::Auto)?]
        }
    };
    finish(reports)
}

pub fn bench(a: &BenchArgs) -> CmdResult {
    let config = ProfileConfig {
        dims: a.dims.clone(),
        k: a.k,
        p: a.p,
        seed: a.seed,
        repeats: a.repeats,
        explicit_budget: a.explicit_budget,
    };
    let report = profile::profile(&config)?;
    for r in &report.rows {
        eprintln!(
            "d = {:>8}: diag {:.3e}s  H {:.3e}s  A-fast {:.3e}s  A-explicit {}  pipeline {:.3e}s",
            r.d,
            r.diagonals.min,
            r.hadamard.min,
            r.a_fast.min,
            r.a_explicit.map_or("-".to_string(), |t| format!("{:.3e}s", t.min)),
            r.pipeline.min
        );
    }
    if let (Some(f), Some(r2)) = (report.max_per_doubling(), report.pipeline_r2) {
        eprintln!("A-fast max factor per doubling {f:.3}; pipeline d log d fit R^2 = {r2:.4}");
    }
    emit(&report)?;
    Ok(Outcome::Pass)
}

pub fn lowerbound(a: &LowerboundArgs) -> CmdResult {
    let norm = match a.norm {
        NormArg::Euclidean => TargetNorm::Euclidean,
        NormArg::Max => TargetNorm::Max,
    };
    let s = lowerbound::subset_size(a.eps)?;
    if s > a.d {
        return Err(param(format!("subset size {s} exceeds d = {}", a.d)));
    }
    let k = a.k.unwrap_or(a.d);
    let separation = lowerbound::separation_intervals(s, a.eps)?;
    let cover = lowerbound::CoverCode::new(k, a.eps, norm)?;
    let roundtrips = [RoundtripMap::Identity, RoundtripMap::RandomOrthogonal]
        .into_iter()
        .map(|map| lowerbound::roundtrip_trials(a.d, k, a.eps, a.families, a.seed, map, norm))
        .collect::<Result<Vec<_>, _>>()?;

    let mut ns = if a.n.is_empty() {
        let base = 2 * a.d + 1;
        let mut ns = vec![base];
        ns.extend([1_000, 10_000, 100_000, 1_000_000].into_iter().filter(|&n| n > base));
        ns
    } else {
        a.n.clone()
    };
    ns.sort_unstable();
    ns.dedup();
    let table = ns
        .iter()
        .map(|&n| lowerbound::table_row(n, a.eps, k, norm))
        .collect::<Result<Vec<_>, _>>()?;
    let scales: Vec<f64> = table.iter().filter_map(|r| r.lower_bound_scale).collect();
    let monotone = scales.windows(2).all(|w| w[1] > w[0]);

    let exact = roundtrips.iter().all(|r| r.exact == r.families);
    for r in &roundtrips {
        eprintln!("{:?}: {}/{} exact recoveries, {} bits", r.map, r.exact, r.families, r.bits);
    }
    eprintln!("s = {s}, d_in = {:.4}, d_out = {:.4}, gap = {:.4}, tau = {:.4}", separation.d_in, separation.d_out, separation.gap, separation.tau);
    let value: Value = json!({
        "d": a.d,
        "k": k,
        "eps": a.eps,
        "s": s,
        "norm": norm,
        "separation": separation,
        "cover": cover,
        "roundtrips": roundtrips,
        "table": table,
        "monotone_in_n": monotone,
        "threads": threads(),
        "pass": exact && separation.sufficient,
    });
    emit(&value)?;
    Ok(if exact && separation.sufficient { Outcome::Pass } else { Outcome::Fail })
}
