//! Command-line front end: simulate -> fit -> select -> bootstrap -> curve
//! export, with reproducible outputs and a manifest alongside every file.

mod dataio;
mod manifest;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lognlogs::seed::derive_seed;
use lognlogs::{
    aaem_fit, aem_fit, bootstrap_se, closed_form_loglik_nobg, flux_posterior_sample, generate,
    iem_fit, lognlogs_curve, lognlogs_overlay, naive_fluxes, power_posterior_loglik, saem_fit,
    select_b, BrokenParetoParams, Dataset, EmConfig, Error as CoreError, FitResult, PerSource,
    PowerPosteriorConfig, SimSetting,
};
use manifest::RunManifest;
use serde::Serialize;
use serde_json::json;

/// CLI failure categories, mapped to exit codes: usage 2, data 3, numeric 4.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParams(_) | CoreError::Domain(_) => CliError::Usage(e.to_string()),
            CoreError::Data(_) => CliError::Data(e.to_string()),
            CoreError::FitFailed { .. } | CoreError::Numeric(_) | CoreError::Bootstrap(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lognlogs",
    version,
    about = "Broken power-law (log N-log S) flux distribution estimation from Poisson counts"
)]
struct Cli {
    /// Worker threads for parallel sections (defaults to all cores).
    /// Outputs are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset from the hierarchical count model.
    Simulate(SimulateArgs),
    /// Fit the B-piece model by Monte-Carlo EM.
    Fit(FitArgs),
    /// Choose the number of pieces by AIC/BIC over candidate fits.
    Select(SelectArgs),
    /// Evaluate the observed-data log-likelihood at given parameters.
    Loglik(LoglikArgs),
    /// Bootstrap standard errors for the fitted parameters.
    Bootstrap(BootstrapArgs),
    /// Emit log N-log S curve data (CSV, optional SVG).
    Lognlogs(LognlogsArgs),
}

#[derive(Args, Clone)]
struct EmFlags {
    /// MH steps per E-step chain.
    #[arg(long, default_value_t = 1000)]
    n_sim: usize,
    /// Leading chain steps discarded.
    #[arg(long, default_value_t = 200)]
    n_burn: usize,
    /// Maximum EM iterations.
    #[arg(long, default_value_t = 200)]
    n_limit: usize,
    /// Relative-change convergence tolerance on the parameters.
    #[arg(long, default_value_t = 1e-3)]
    theta_tol: f64,
}

impl EmFlags {
    fn config(&self, seed: u64) -> EmConfig {
        EmConfig {
            n_sim: self.n_sim,
            n_burn: self.n_burn,
            n_limit: self.n_limit,
            theta_tol: self.theta_tol,
            seed,
            ..EmConfig::default()
        }
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "n_sim": self.n_sim,
            "n_burn": self.n_burn,
            "n_limit": self.n_limit,
            "theta_tol": self.theta_tol,
        })
    }
}

#[derive(Args, Clone)]
struct PpFlags {
    /// Temperature ladder intervals (the ladder has n_grid + 1 rungs).
    #[arg(long = "pp-n-grid", default_value_t = 30)]
    pp_n_grid: usize,
    /// Ladder density exponent; rungs at (k/n_grid)^c.
    #[arg(long = "c", default_value_t = 3.0)]
    c: f64,
    /// MH steps per rung.
    #[arg(long = "pp-n-sim", default_value_t = 1000)]
    pp_n_sim: usize,
    /// Steps discarded per rung.
    #[arg(long = "pp-n-burn", default_value_t = 200)]
    pp_n_burn: usize,
}

impl PpFlags {
    fn config(&self, seed: u64) -> PowerPosteriorConfig {
        PowerPosteriorConfig {
            n_grid: self.pp_n_grid,
            c: self.c,
            n_sim: self.pp_n_sim,
            n_burn: self.pp_n_burn,
            seed,
        }
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "n_grid": self.pp_n_grid,
            "c": self.c,
            "n_sim": self.pp_n_sim,
            "n_burn": self.pp_n_burn,
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Named preset (setting1..setting4).
    #[arg(long, conflicts_with_all = ["beta", "tau", "n"])]
    preset: Option<String>,
    /// Comma-separated slopes, e.g. 0.5,3.
    #[arg(long, value_delimiter = ',', requires = "tau", requires = "n")]
    beta: Option<Vec<f64>>,
    /// Comma-separated breakpoints, ascending.
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<f64>>,
    /// Number of sources.
    #[arg(long)]
    n: Option<usize>,
    /// Effective area applied to every source.
    #[arg(long, default_value_t = 1e19)]
    a: f64,
    /// Expected background count applied to every source.
    #[arg(long, default_value_t = 10.0)]
    b: f64,
    #[arg(long, env = "LOGNLOGS_SEED", default_value_t = 0)]
    seed: u64,
    /// Output dataset CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Saem,
    Aaem,
    Aem,
    Iem,
}

impl Algo {
    fn name(&self) -> &'static str {
        match self {
            Algo::Saem => "saem",
            Algo::Aaem => "aaem",
            Algo::Aem => "aem",
            Algo::Iem => "iem",
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Input dataset CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of Pareto pieces.
    #[arg(long)]
    b: usize,
    /// EM variant.
    #[arg(long, value_enum, default_value_t = Algo::Iem)]
    algo: Algo,
    #[command(flatten)]
    em: EmFlags,
    #[command(flatten)]
    pp: PpFlags,
    /// Record the per-iteration parameter trajectory.
    #[arg(long)]
    trace: bool,
    /// Also record the per-iteration closed-form negative log-likelihood
    /// (background-free datasets only).
    #[arg(long)]
    trace_loglik: bool,
    #[arg(long, env = "LOGNLOGS_SEED", default_value_t = 0)]
    seed: u64,
    /// Output fit JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Largest candidate piece count.
    #[arg(long, default_value_t = 4)]
    b_max: usize,
    #[command(flatten)]
    em: EmFlags,
    #[command(flatten)]
    pp: PpFlags,
    #[arg(long, env = "LOGNLOGS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LoglikArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated slopes of the evaluation point.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// Comma-separated breakpoints of the evaluation point.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    #[command(flatten)]
    pp: PpFlags,
    #[arg(long, env = "LOGNLOGS_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the per-rung (t, mean, se) table as CSV.
    #[arg(long)]
    rungs_out: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of Pareto pieces (fixed across replicates).
    #[arg(long)]
    b: usize,
    /// Number of bootstrap replicates.
    #[arg(long, default_value_t = 200)]
    n_boot: usize,
    #[command(flatten)]
    em: EmFlags,
    #[arg(long, env = "LOGNLOGS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImputeMode {
    /// Posterior mean over the retained draws of a final E-step.
    Mean,
    /// The last retained draw.
    Draw,
}

#[derive(Args)]
struct LognlogsArgs {
    /// Input dataset CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Fit JSON; when given, the curve uses imputed fluxes and carries the
    /// fitted overlay and breakpoint markers.
    #[arg(long)]
    fit: Option<PathBuf>,
    /// Flux imputation mode when --fit is given.
    #[arg(long, value_enum, default_value_t = ImputeMode::Mean)]
    impute: ImputeMode,
    /// E-step draws for imputation.
    #[arg(long, default_value_t = 1000)]
    n_sim: usize,
    #[arg(long, default_value_t = 200)]
    n_burn: usize,
    #[arg(long, env = "LOGNLOGS_SEED", default_value_t = 0)]
    seed: u64,
    /// Output curve CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG rendering.
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Select(args) => cmd_select(args),
        Command::Loglik(args) => cmd_loglik(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
        Command::Lognlogs(args) => cmd_lognlogs(args),
    }
}

fn parse_params(beta: &[f64], tau: &[f64]) -> Result<BrokenParetoParams, CliError> {
    BrokenParetoParams::new(beta.to_vec(), tau.to_vec())
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let setting = match (&args.preset, &args.beta, &args.tau, &args.n) {
        (Some(name), None, None, None) => {
            SimSetting::preset(name, args.seed).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown preset '{name}' (expected setting1..setting4)"
                ))
            })?
        }
        (None, Some(beta), Some(tau), Some(n)) => SimSetting {
            params: parse_params(beta, tau)?,
            n: *n,
            area: PerSource::Constant(args.a),
            background: PerSource::Constant(args.b),
            seed: args.seed,
        },
        _ => {
            return Err(CliError::Usage(
                "give either --preset or all of --beta/--tau/--n".into(),
            ))
        }
    };
    let sim = generate(&setting)?;
    dataio::write_text(&args.out, &dataio::dataset_csv(sim.dataset()))?;
    let config = json!({
        "preset": args.preset,
        "beta": setting.params.beta(),
        "tau": setting.params.tau(),
        "n": setting.n,
        "a": match &setting.area { PerSource::Constant(v) => *v, PerSource::Each(_) => f64::NAN },
        "b": match &setting.background { PerSource::Constant(v) => *v, PerSource::Each(_) => f64::NAN },
    });
    RunManifest::new("simulate", args.seed, config)
        .output(&args.out)
        .write_sidecar(&args.out)?;
    Ok(())
}

#[derive(Serialize)]
struct ThetaJson {
    beta: Vec<f64>,
    tau: Vec<f64>,
}

fn theta_json(theta: &BrokenParetoParams) -> ThetaJson {
    ThetaJson { beta: theta.beta().to_vec(), tau: theta.tau().to_vec() }
}

#[derive(Serialize)]
struct FitJson {
    beta: Vec<f64>,
    tau: Vec<f64>,
    log10_tau: Vec<f64>,
    loglik: f64,
    loglik_mc_se: f64,
    loglik_method: &'static str,
    converged: bool,
    iterations: usize,
    accept_rates: Vec<f64>,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<Vec<ThetaJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_steps: Option<Vec<ThetaJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_negloglik: Option<Vec<f64>>,
    manifest: RunManifest,
}

fn run_fit_algo(
    algo: Algo,
    data: &Dataset,
    b: usize,
    cfg: &EmConfig,
) -> Result<FitResult, CoreError> {
    match algo {
        Algo::Saem => saem_fit(data, b, cfg),
        Algo::Aaem => aaem_fit(data, b, cfg),
        Algo::Aem => aem_fit(data, b, cfg),
        Algo::Iem => iem_fit(data, b, cfg),
    }
}

/// Observed-data log-likelihood at θ̂: exact closed form when the dataset is
/// background-free, power-posterior estimate otherwise.
fn fit_loglik(
    data: &Dataset,
    theta: &BrokenParetoParams,
    pp: &PpFlags,
    seed: u64,
) -> Result<(f64, f64, &'static str), CliError> {
    let no_background = data.sources().iter().all(|s| s.b == 0.0);
    if no_background {
        let ys: Vec<u64> = data.sources().iter().map(|s| s.y).collect();
        let areas: Vec<f64> = data.sources().iter().map(|s| s.a).collect();
        let v = closed_form_loglik_nobg(theta, &ys, &areas)?;
        Ok((v, 0.0, "closed_form"))
    } else {
        let est = power_posterior_loglik(theta, data, &pp.config(derive_seed(seed, &[0x10])))?;
        Ok((est.value, est.mc_se, "power_posterior"))
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    if args.b < 1 {
        return Err(CliError::Usage("--b must be at least 1".into()));
    }
    let data = dataio::read_dataset(&args.input)?;
    let cfg = args.em.config(args.seed);
    let fit = run_fit_algo(args.algo, &data, args.b, &cfg)?;
    let (loglik, loglik_mc_se, loglik_method) =
        fit_loglik(&data, &fit.theta_hat, &args.pp, args.seed)?;

    let trace_negloglik = if args.trace_loglik {
        if data.sources().iter().any(|s| s.b != 0.0) {
            return Err(CliError::Usage(
                "--trace-loglik requires a background-free dataset (all b = 0)".into(),
            ));
        }
        let ys: Vec<u64> = data.sources().iter().map(|s| s.y).collect();
        let areas: Vec<f64> = data.sources().iter().map(|s| s.a).collect();
        let mut trace = Vec::with_capacity(fit.trajectory.len());
        for theta in &fit.trajectory {
            trace.push(-closed_form_loglik_nobg(theta, &ys, &areas)?);
        }
        Some(trace)
    } else {
        None
    };

    let warnings: Vec<String> = fit
        .theta_hat
        .near_equal_adjacent_slopes(1e-3)
        .into_iter()
        .map(|j| {
            format!("adjacent slopes {} and {} are within 1e-3 of each other", j + 1, j + 2)
        })
        .collect();

    let config = json!({
        "b": args.b,
        "algo": args.algo.name(),
        "em": args.em.json(),
        "pp": args.pp.json(),
        "trace": args.trace,
        "trace_loglik": args.trace_loglik,
    });
    let manifest = || {
        RunManifest::new("fit", args.seed, config.clone())
            .input(&args.input)
            .output(&args.out)
    };

    let out = FitJson {
        beta: fit.theta_hat.beta().to_vec(),
        tau: fit.theta_hat.tau().to_vec(),
        log10_tau: fit.theta_hat.tau().iter().map(|t| t.log10()).collect(),
        loglik,
        loglik_mc_se,
        loglik_method,
        converged: fit.converged,
        iterations: fit.iterations,
        accept_rates: fit.final_accept_rates.clone(),
        warnings,
        trajectory: args
            .trace
            .then(|| fit.trajectory.iter().map(theta_json).collect()),
        half_steps: (args.trace && !fit.half_steps.is_empty())
            .then(|| fit.half_steps.iter().map(theta_json).collect()),
        trace_negloglik,
        manifest: manifest(),
    };
    dataio::write_json(&args.out, &out)?;
    manifest().write_sidecar(&args.out)?;
    Ok(())
}

#[derive(Serialize)]
struct CandidateJson {
    b: usize,
    beta: Vec<f64>,
    tau: Vec<f64>,
    log10_tau: Vec<f64>,
    loglik: f64,
    loglik_mc_se: f64,
    aic: f64,
    bic: f64,
    converged: bool,
    iterations: usize,
}

#[derive(Serialize)]
struct SelectJson {
    n: usize,
    b_max: usize,
    candidates: Vec<CandidateJson>,
    failures: Vec<(usize, String)>,
    b_hat_aic: usize,
    b_hat_bic: usize,
    close_pairs_aic: Vec<(usize, usize)>,
    close_pairs_bic: Vec<(usize, usize)>,
    manifest: RunManifest,
}

fn cmd_select(args: SelectArgs) -> Result<(), CliError> {
    let data = dataio::read_dataset(&args.input)?;
    let em_cfg = args.em.config(args.seed);
    let pp_cfg = args.pp.config(args.seed);
    let report = select_b(&data, args.b_max, &em_cfg, &pp_cfg)?;
    let config = json!({
        "b_max": args.b_max,
        "em": args.em.json(),
        "pp": args.pp.json(),
    });
    let manifest = || {
        RunManifest::new("select", args.seed, config.clone())
            .input(&args.input)
            .output(&args.out)
    };
    let out = SelectJson {
        n: data.len(),
        b_max: args.b_max,
        candidates: report
            .candidates
            .iter()
            .map(|c| CandidateJson {
                b: c.b,
                beta: c.theta_hat.beta().to_vec(),
                tau: c.theta_hat.tau().to_vec(),
                log10_tau: c.theta_hat.tau().iter().map(|t| t.log10()).collect(),
                loglik: c.loglik,
                loglik_mc_se: c.loglik_mc_se,
                aic: c.aic,
                bic: c.bic,
                converged: c.fit_converged,
                iterations: c.fit_iterations,
            })
            .collect(),
        failures: report.failures.clone(),
        b_hat_aic: report.b_hat_aic,
        b_hat_bic: report.b_hat_bic,
        close_pairs_aic: report.close_pairs_aic.clone(),
        close_pairs_bic: report.close_pairs_bic.clone(),
        manifest: manifest(),
    };
    dataio::write_json(&args.out, &out)?;
    manifest().write_sidecar(&args.out)?;
    Ok(())
}

fn cmd_loglik(args: LoglikArgs) -> Result<(), CliError> {
    let data = dataio::read_dataset(&args.input)?;
    let theta = parse_params(&args.beta, &args.tau)?;
    let est = power_posterior_loglik(&theta, &data, &args.pp.config(args.seed))?;
    println!("loglik {:.6}", est.value);
    println!("mc_se {:.6}", est.mc_se);
    if let Some(path) = &args.rungs_out {
        let mut csv = String::from("t,mean,se\n");
        for ((t, m), se) in est.rung_ts.iter().zip(&est.rung_means).zip(&est.rung_ses) {
            csv.push_str(&format!("{t:e},{m:e},{se:e}\n"));
        }
        dataio::write_text(path, &csv)?;
        let config = json!({ "beta": args.beta, "tau": args.tau, "pp": args.pp.json() });
        RunManifest::new("loglik", args.seed, config)
            .input(&args.input)
            .output(path)
            .write_sidecar(path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ParameterJson {
    name: String,
    estimate: f64,
    se: f64,
}

#[derive(Serialize)]
struct BootstrapJson {
    b: usize,
    n_boot: usize,
    failures: usize,
    parameters: Vec<ParameterJson>,
    manifest: RunManifest,
}

fn cmd_bootstrap(args: BootstrapArgs) -> Result<(), CliError> {
    if args.b < 1 {
        return Err(CliError::Usage("--b must be at least 1".into()));
    }
    let data = dataio::read_dataset(&args.input)?;
    let em_cfg = args.em.config(args.seed);
    let report = bootstrap_se(&data, args.b, args.n_boot, &em_cfg, args.seed)?;
    if report.failures * 2 > args.n_boot {
        return Err(CliError::Numeric(format!(
            "{} of {} bootstrap replicates failed",
            report.failures, args.n_boot
        )));
    }
    let mut parameters = Vec::with_capacity(2 * args.b);
    for j in 0..args.b {
        parameters.push(ParameterJson {
            name: format!("beta_{}", j + 1),
            estimate: report.full_estimate[j],
            se: report.se[j],
        });
    }
    for j in 0..args.b {
        parameters.push(ParameterJson {
            name: format!("log10_tau_{}", j + 1),
            estimate: report.full_estimate[args.b + j],
            se: report.se[args.b + j],
        });
    }
    let config = json!({ "b": args.b, "n_boot": args.n_boot, "em": args.em.json() });
    let manifest = || {
        RunManifest::new("bootstrap", args.seed, config.clone())
            .input(&args.input)
            .output(&args.out)
    };
    let out = BootstrapJson {
        b: args.b,
        n_boot: args.n_boot,
        failures: report.failures,
        parameters,
        manifest: manifest(),
    };
    dataio::write_json(&args.out, &out)?;
    manifest().write_sidecar(&args.out)?;
    Ok(())
}

fn cmd_lognlogs(args: LognlogsArgs) -> Result<(), CliError> {
    let data = dataio::read_dataset(&args.input)?;
    let (fluxes, theta) = match &args.fit {
        None => (naive_fluxes(&data), None),
        Some(fit_path) => {
            let (beta, tau) = dataio::read_fit_params(fit_path)?;
            let theta = parse_params(&beta, &tau)?;
            let cfg = EmConfig {
                n_sim: args.n_sim,
                n_burn: args.n_burn,
                seed: args.seed,
                ..EmConfig::default()
            };
            let sample = flux_posterior_sample(&data, &theta, &cfg)?;
            let fluxes = match args.impute {
                ImputeMode::Mean => sample.posterior_mean(),
                ImputeMode::Draw => sample.last_draw(),
            };
            (fluxes, Some(theta))
        }
    };
    let empirical = lognlogs_curve(&fluxes)?;
    let (overlay, breakpoints) = match &theta {
        Some(theta) => {
            let s_max = fluxes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let overlay = lognlogs_overlay(theta, data.len(), s_max);
            let bps: Vec<(f64, f64)> = theta
                .tau()
                .iter()
                .map(|&t| {
                    let n_at = (data.len() as f64).log10() + theta.survival(t).log10();
                    (t.log10(), n_at)
                })
                .collect();
            (overlay, bps)
        }
        None => (Vec::new(), Vec::new()),
    };
    dataio::write_text(&args.out, &dataio::curve_csv(&empirical, &overlay, &breakpoints))?;
    let config = json!({
        "fit": args.fit.as_ref().map(|p| p.display().to_string()),
        "impute": match args.impute { ImputeMode::Mean => "mean", ImputeMode::Draw => "draw" },
        "n_sim": args.n_sim,
        "n_burn": args.n_burn,
    });
    let mut manifest = RunManifest::new("lognlogs", args.seed, config)
        .input(&args.input)
        .output(&args.out);
    if let Some(svg_path) = &args.svg {
        let bp_x: Vec<f64> = breakpoints.iter().map(|&(x, _)| x).collect();
        dataio::write_text(svg_path, &svg::render(&empirical, &overlay, &bp_x))?;
        manifest = manifest.output(svg_path);
    }
    manifest.write_sidecar(&args.out)?;
    Ok(())
}
