//! Subcommand dispatch and the report shapes written to disk.

use crate::config::{
    resolve_seed, resolve_workers, validate_nb, write_json, ApproxArg, MetricArg, ThetaArg,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use geostat_core::io::{fmt_f64, read_locations_csv, write_locations_csv, write_trace_csv};
use geostat_core::likelihood::default_config;
use geostat_core::tilealg::tile_cholesky_traced;
use geostat_core::{
    distance_matrix, gen_cov_matrix, generate_locations, k_fold_cv, krige, krige_with_variance,
    mle_fit, Approximation, KrigingConfig, LikelihoodProblem, LocationSet, MaternParams, Metric,
    SimulationSpec,
};
use serde::Serialize;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Subcommand)]
pub enum Command {
    /// Draw one synthetic field realization and write it as x,y,z CSV.
    Simulate(SimulateArgs),
    /// Fit Matérn parameters to a measurement CSV by maximum likelihood.
    Estimate(EstimateArgs),
    /// Krige a target-locations CSV from an observation CSV.
    Predict(PredictArgs),
    /// k-fold cross-validated prediction error under fixed parameters.
    Cv(CvArgs),
    /// Time the tile Cholesky across worker counts and dump kernel traces.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    n: usize,
    /// Matérn parameters as theta1,theta2,theta3.
    #[arg(long)]
    theta: ThetaArg,
    #[arg(long, default_value_t = 0.0)]
    nugget: f64,
    /// RNG seed; omitted = fresh entropy (the chosen seed is printed).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 128)]
    nb: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "euclidean")]
    metric: MetricArg,
    /// Output CSV path; a sidecar JSON with the run metadata goes next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct EstimateArgs {
    /// Input x,y,z CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "euclidean")]
    metric: MetricArg,
    /// Fixed nugget applied to every candidate θ.
    #[arg(long, default_value_t = 0.0)]
    nugget: f64,
    #[arg(long, default_value_t = 128)]
    nb: usize,
    #[arg(long)]
    workers: Option<usize>,
    /// `exact` or `ind:<s>` (independent blocks with s×s-tile super blocks).
    #[arg(long, default_value = "exact")]
    approx: ApproxArg,
    #[arg(long)]
    max_evals: Option<usize>,
    #[arg(long)]
    xtol_rel: Option<f64>,
    /// Optimizer start point theta1,theta2,theta3 (default: mid-bounds).
    #[arg(long)]
    start: Option<ThetaArg>,
    #[arg(long)]
    lower: Option<ThetaArg>,
    #[arg(long)]
    upper: Option<ThetaArg>,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Observations x,y,z CSV.
    #[arg(long)]
    obs: PathBuf,
    /// Target locations x,y CSV (a z column, if present, is ignored).
    #[arg(long)]
    targets: PathBuf,
    /// Matérn parameters theta1,theta2,theta3.
    #[arg(long, conflicts_with = "theta_json")]
    theta: Option<ThetaArg>,
    /// JSON file holding either the parameters or an estimate report
    /// (its theta_hat is used).
    #[arg(long)]
    theta_json: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    nugget: f64,
    #[arg(long, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long, default_value_t = 128)]
    nb: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "exact")]
    approx: ApproxArg,
    /// Also emit the kriging variance as a fourth CSV column.
    #[arg(long)]
    variance: bool,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct CvArgs {
    /// Input x,y,z CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    theta: Option<ThetaArg>,
    #[arg(long)]
    theta_json: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    nugget: f64,
    #[arg(long, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long, default_value_t = 128)]
    nb: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "exact")]
    approx: ApproxArg,
    /// Seed for the fold shuffle; omitted = fresh entropy (printed).
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 2048)]
    n: usize,
    /// Comma-separated worker counts, e.g. 1,4.
    #[arg(long, default_value = "1,4", value_delimiter = ',')]
    workers: Vec<usize>,
    #[arg(long, default_value_t = 128)]
    nb: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the per-run kernel trace CSVs.
    #[arg(long, default_value = ".")]
    trace_dir: PathBuf,
    /// Optional summary JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Predict(a) => predict(a),
        Command::Cv(a) => cv(a),
        Command::Bench(a) => bench(a),
    }
}

#[derive(Serialize)]
struct SimulateMeta {
    n: usize,
    theta: MaternParams,
    seed: u64,
    nb: usize,
    metric: Metric,
    workers: usize,
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let nb = validate_nb(a.nb)?;
    let workers = resolve_workers(a.workers)?;
    let seed = resolve_seed(a.seed);
    let params = a.theta.into_params(a.nugget)?;
    let spec = SimulationSpec { n: a.n, params, seed, metric: a.metric.0, nb, workers };
    let (locations, z) = geostat_core::simulate_field(&spec)?;
    write_locations_csv(&a.out, &locations, Some(&z))?;
    let meta = SimulateMeta { n: a.n, theta: params, seed, nb, metric: a.metric.0, workers };
    write_json(&a.out.with_extension("json"), &meta)?;
    println!("wrote {} rows to {}", a.n, a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    n: usize,
    nb: usize,
    workers: usize,
    approx: Approximation,
    theta_hat: MaternParams,
    loglik: f64,
    evaluations: usize,
    wall_seconds: f64,
    /// Wall time of each likelihood evaluation.
    eval_seconds: Vec<f64>,
    /// Achieved Gflop/s per evaluation, from the n³/3 + n² flop count of
    /// one Cholesky plus one triangular solve.
    gflops: Vec<f64>,
    trace: Vec<geostat_core::likelihood::TraceEntry>,
}

fn load_data(path: &PathBuf, metric: Metric) -> Result<(LocationSet, Vec<f64>)> {
    let file = read_locations_csv(path)?;
    let (set, z) = file.into_set(metric)?;
    let z = z.with_context(|| format!("{}: a z column is required here", path.display()))?;
    Ok((set, z))
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let nb = validate_nb(a.nb)?;
    let workers = resolve_workers(a.workers)?;
    let (locations, z) = load_data(&a.data, a.metric.0)?;
    let n = locations.n();
    let problem = LikelihoodProblem::with_nugget(locations, z, nb, a.approx.0, workers, a.nugget)?;

    let mut cfg = default_config(&problem);
    if let Some(t) = a.lower {
        cfg.lower = t.0.to_vec();
    }
    if let Some(t) = a.upper {
        cfg.upper = t.0.to_vec();
    }
    if let Some(t) = a.start {
        cfg.start = t.0.to_vec();
    } else if a.lower.is_some() || a.upper.is_some() {
        cfg.start = cfg.lower.iter().zip(&cfg.upper).map(|(l, u)| (l * u).sqrt()).collect();
    }
    if let Some(m) = a.max_evals {
        cfg.max_evals = m;
    }
    if let Some(x) = a.xtol_rel {
        cfg.xtol_rel = x;
    }

    let fit = mle_fit(&problem, &cfg)?;
    let flops = (n as f64).powi(3) / 3.0 + (n as f64).powi(2);
    let gflops = fit.eval_seconds.iter().map(|s| flops / s / 1e9).collect();
    let report = EstimateReport {
        n,
        nb,
        workers,
        approx: a.approx.0,
        theta_hat: fit.theta_hat,
        loglik: fit.loglik,
        evaluations: fit.evaluations,
        wall_seconds: fit.wall_time.as_secs_f64(),
        eval_seconds: fit.eval_seconds,
        gflops,
        trace: fit.trace,
    };
    write_json(&a.out, &report)?;
    println!(
        "theta_hat = ({}, {}, {})  loglik = {}  evaluations = {}",
        report.theta_hat.theta1,
        report.theta_hat.theta2,
        report.theta_hat.theta3,
        report.loglik,
        report.evaluations
    );
    Ok(())
}

/// θ from --theta, or from a JSON file that is either a bare parameter
/// object or an estimate report carrying `theta_hat`.
fn resolve_theta(
    theta: Option<ThetaArg>,
    theta_json: &Option<PathBuf>,
    nugget: f64,
) -> Result<MaternParams> {
    if let Some(t) = theta {
        return t.into_params(nugget);
    }
    let Some(path) = theta_json else {
        bail!("one of --theta or --theta-json is required");
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value.get("theta_hat").unwrap_or(&value);
    let params: MaternParams = serde_json::from_value(obj.clone())
        .with_context(|| format!("{}: expected Matérn parameters or an estimate report", path.display()))?;
    MaternParams::new(params.theta1, params.theta2, params.theta3, nugget.max(params.nugget))
        .map_err(Into::into)
}

fn predict(a: PredictArgs) -> Result<()> {
    let nb = validate_nb(a.nb)?;
    let workers = resolve_workers(a.workers)?;
    let params = resolve_theta(a.theta, &a.theta_json, a.nugget)?;
    let (sources, z) = load_data(&a.obs, a.metric.0)?;
    let (targets, _) = read_locations_csv(&a.targets)?.into_set(a.metric.0)?;
    let cfg = KrigingConfig { params, nb, workers, approx: a.approx.0 };

    let mut out = std::io::BufWriter::new(std::fs::File::create(&a.out)?);
    if a.variance {
        let (pred, var) = krige_with_variance(&sources, &z, &targets, &cfg)?;
        writeln!(out, "x,y,z,var")?;
        for (i, p) in targets.points().iter().enumerate() {
            writeln!(out, "{},{},{},{}", fmt_f64(p.c1), fmt_f64(p.c2), fmt_f64(pred[i]), fmt_f64(var[i]))?;
        }
    } else {
        let pred = krige(&sources, &z, &targets, &cfg)?;
        writeln!(out, "x,y,z")?;
        for (i, p) in targets.points().iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_f64(p.c1), fmt_f64(p.c2), fmt_f64(pred[i]))?;
        }
    }
    out.flush()?;
    println!("wrote {} predictions to {}", targets.n(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct CvReport {
    n: usize,
    k: usize,
    seed: u64,
    theta: MaternParams,
    approx: Approximation,
    fold_mse: Vec<f64>,
    mse: f64,
    wall_seconds: f64,
    /// Average wall time spent per held-out prediction.
    seconds_per_prediction: f64,
}

fn cv(a: CvArgs) -> Result<()> {
    let nb = validate_nb(a.nb)?;
    let workers = resolve_workers(a.workers)?;
    let seed = resolve_seed(a.seed);
    let params = resolve_theta(a.theta, &a.theta_json, a.nugget)?;
    let (locations, z) = load_data(&a.data, a.metric.0)?;
    let cfg = KrigingConfig { params, nb, workers, approx: a.approx.0 };

    let t0 = Instant::now();
    let result = k_fold_cv(&locations, &z, a.k, seed, &cfg)?;
    let wall = t0.elapsed().as_secs_f64();
    let report = CvReport {
        n: locations.n(),
        k: result.k,
        seed,
        theta: params,
        approx: a.approx.0,
        fold_mse: result.fold_mse,
        mse: result.mse,
        wall_seconds: wall,
        seconds_per_prediction: wall / locations.n() as f64,
    };
    write_json(&a.out, &report)?;
    println!("cv mse = {} over {} folds", report.mse, report.k);
    Ok(())
}

#[derive(Serialize)]
struct BenchRun {
    workers: usize,
    wall_seconds: f64,
    gflops: f64,
    trace_csv: String,
}

#[derive(Serialize)]
struct BenchReport {
    n: usize,
    nb: usize,
    seed: u64,
    runs: Vec<BenchRun>,
    /// Wall-time ratio of each run against the first listed worker count.
    speedup_vs_first: Vec<f64>,
}

fn bench(a: BenchArgs) -> Result<()> {
    let nb = validate_nb(a.nb)?;
    if a.workers.is_empty() {
        bail!("--workers needs at least one worker count");
    }
    let seed = resolve_seed(a.seed);
    std::fs::create_dir_all(&a.trace_dir)?;

    let params = MaternParams::new(1.0, 0.1, 0.5, 1e-6)?;
    let locations = generate_locations(a.n, seed);
    let d = distance_matrix(&locations, &locations)?;
    let base = gen_cov_matrix(&d, &params, nb, *a.workers.iter().max().unwrap())?;
    let flops = (a.n as f64).powi(3) / 3.0;

    let mut runs = Vec::new();
    for &w in &a.workers {
        if w < 1 {
            bail!("worker count must be >= 1");
        }
        let sigma = base.deep_clone();
        let t0 = Instant::now();
        let (result, trace) = tile_cholesky_traced(&sigma, w);
        let wall = t0.elapsed().as_secs_f64();
        result?;
        let trace_csv = a.trace_dir.join(format!("trace_n{}_w{w}.csv", a.n));
        write_trace_csv(&trace_csv, &trace)?;
        println!(
            "workers={w}: {:.3} s, {:.2} Gflop/s, {} kernels -> {}",
            wall,
            flops / wall / 1e9,
            trace.len(),
            trace_csv.display()
        );
        runs.push(BenchRun {
            workers: w,
            wall_seconds: wall,
            gflops: flops / wall / 1e9,
            trace_csv: trace_csv.display().to_string(),
        });
    }
    let first = runs[0].wall_seconds;
    let report = BenchReport {
        n: a.n,
        nb,
        seed,
        speedup_vs_first: runs.iter().map(|r| first / r.wall_seconds).collect(),
        runs,
    };
    for (r, s) in report.runs.iter().zip(&report.speedup_vs_first) {
        println!("speedup x{s:.2} at workers={}", r.workers);
    }
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    Ok(())
}
