//! Command-line interface: CSV ingestion, JSON configuration, command
//! dispatch, and report serialization.
//!
//! Configuration resolution order: defaults < JSON config file (`--config`)
//! < CLI flags. Every stochastic command requires a seed and echoes the full
//! resolved configuration into its output document, so re-running the
//! embedded config reproduces the output bit for bit.

use std::collections::HashSet;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::inference::{
    advise_method, infer_boundary, infer_cn, infer_sn, spacing_m, CriticalValues,
    CvMethod, InferenceResult, Statistic, DEFAULT_SPACING_P,
};
use crate::limit::{simulate_limit_sample, LimitTarget, SmoothedDesignSampler};
use crate::montecarlo::{
    analytic_sample, coverage_design, coverage_experiment, cauchy_location_design, qq_experiment,
    CoverageMethod, ErrorFamily, Preset,
};
use crate::qr::fit_qr;
use crate::subsample::{
    cn_subsample_draws, default_subsample_size, sn_subsample_draws, SamplingMode,
};
use crate::tail::{default_intermediate_tau, estimate_tail, SpacingForm};

pub const SCHEMA_VERSION: &str = "1";

/// All tunables, shared by the config file (JSON, kebab-case keys matching
/// the CLI flag names) and the command line.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RunConfig {
    /// Input CSV file (header row required).
    #[arg(long)]
    pub input: Option<String>,
    /// Response column name.
    #[arg(long)]
    pub response: Option<String>,
    /// Comma-separated regressor column names (default: all other columns).
    #[arg(long, value_delimiter = ',')]
    pub regressors: Option<Vec<String>>,
    /// Quantile index list.
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Confidence level complement (0.10 gives 90% intervals).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Critical-value method: subsample | analytic.
    #[arg(long)]
    pub method: Option<String>,
    /// Statistic for subsample-cv: sn | cn.
    #[arg(long)]
    pub statistic: Option<String>,
    /// Coefficient index to infer on (0 = intercept).
    #[arg(long)]
    pub coefficient: Option<usize>,
    /// Subsample size b.
    #[arg(long)]
    pub b: Option<usize>,
    /// Number of subsamples B_T.
    #[arg(long)]
    pub subsamples: Option<usize>,
    /// Simulation draw count B.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Point-process truncation M.
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Spacing parameter p in m = (d+p)/(tau*T) + 1.
    #[arg(long)]
    pub spacing_p: Option<usize>,
    /// RNG seed (required for stochastic commands).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Advisor threshold (15-30).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Minimum indicator cell share for the advisor.
    #[arg(long)]
    pub cell_share: Option<f64>,
    /// Sample size for input-free commands.
    #[arg(long)]
    pub t: Option<usize>,
    /// Design dimension for input-free commands.
    #[arg(long)]
    pub d: Option<usize>,
    /// Monte Carlo replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Error family for simulated designs: t | weibull | cauchy | pareto | uniform.
    #[arg(long)]
    pub error_family: Option<String>,
    /// Family parameter (t dof, Weibull shape, Pareto index).
    #[arg(long)]
    pub error_param: Option<f64>,
    /// Coverage methods: sn-subsample,sn-analytic,cn-analytic,normal.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Subsampling mode: iid | timeseries.
    #[arg(long)]
    pub mode: Option<String>,
    /// Experiment preset: quick | full-scale | cauchy-qq.
    #[arg(long)]
    pub preset: Option<String>,
    /// Use the wide Pickands numerator b(4t)-b(t) (compatibility only).
    #[arg(long)]
    pub wide_spacing: Option<bool>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<String>,
    /// Output format: json | csv.
    #[arg(long)]
    pub format: Option<String>,
    /// Overwrite an existing output file.
    #[arg(long)]
    pub force: Option<bool>,
}

impl RunConfig {
    /// CLI values override file values field by field.
    fn overlay(file: RunConfig, cli: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                RunConfig { $($f: cli.$f.or(file.$f)),* }
            };
        }
        pick!(
            input, response, regressors, tau, alpha, method, statistic, coefficient, b,
            subsamples, draws, truncation, spacing_p, seed, threshold, cell_share, t, d, reps,
            error_family, error_param, methods, mode, preset, wide_spacing, output, format, force
        )
    }

    fn spacing_form(&self) -> SpacingForm {
        if self.wide_spacing.unwrap_or(false) {
            SpacingForm::Wide
        } else {
            SpacingForm::Adjacent
        }
    }

    fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::Config("this command is stochastic: --seed is required".into())
        })
    }

    fn single_tau(&self) -> Result<f64> {
        match self.tau.as_deref() {
            Some([tau]) => Ok(*tau),
            Some(_) => Err(Error::Config("this command takes exactly one --tau".into())),
            None => Err(Error::Config("--tau is required".into())),
        }
    }

    fn alpha_or_default(&self) -> f64 {
        self.alpha.unwrap_or(0.10)
    }

    fn sampling_mode(&self) -> Result<SamplingMode> {
        match self.mode.as_deref().unwrap_or("iid") {
            "iid" => Ok(SamplingMode::Iid),
            "timeseries" => Ok(SamplingMode::Timeseries),
            other => Err(Error::Config(format!(
                "unknown sampling mode '{other}' (expected iid | timeseries)"
            ))),
        }
    }

    fn error_family(&self) -> Result<ErrorFamily> {
        let name = self.error_family.as_deref().unwrap_or("t");
        let param = self.error_param;
        match name {
            "t" => Ok(ErrorFamily::StudentT {
                nu: param.unwrap_or(3.0),
            }),
            "weibull" => Ok(ErrorFamily::Weibull {
                alpha: param.unwrap_or(1.0),
            }),
            "cauchy" => Ok(ErrorFamily::Cauchy),
            "pareto" => Ok(ErrorFamily::Pareto {
                xi: param.ok_or_else(|| {
                    Error::Config("pareto family needs --error-param (the EV index)".into())
                })?,
            }),
            "uniform" => Ok(ErrorFamily::Uniform),
            other => Err(Error::Config(format!(
                "unknown error family '{other}' (expected t | weibull | cauchy | pareto | uniform)"
            ))),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "exqr",
    version,
    about = "Extremal quantile regression with extreme-value inference"
)]
struct Cli {
    /// JSON config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit quantile regressions at the requested indices.
    Fit(RunConfig),
    /// Self-normalized inference: median-unbiased estimate and CI.
    InferSn(RunConfig),
    /// Canonically normalized inference using the extrapolated tail scale.
    InferCn(RunConfig),
    /// Inference on the conditional boundary coefficients.
    InferBoundary(RunConfig),
    /// Rule-of-thumb advisor: extremal vs normal inference.
    Advise(RunConfig),
    /// Subsampling critical values.
    SubsampleCv(RunConfig),
    /// Simulated (analytic) limit-law critical values.
    AnalyticCv(RunConfig),
    /// Monte Carlo coverage study.
    McCoverage(RunConfig),
    /// Monte Carlo QQ comparison of EV and normal approximations.
    McQq(RunConfig),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Fit(_) => "fit",
            Command::InferSn(_) => "infer-sn",
            Command::InferCn(_) => "infer-cn",
            Command::InferBoundary(_) => "infer-boundary",
            Command::Advise(_) => "advise",
            Command::SubsampleCv(_) => "subsample-cv",
            Command::AnalyticCv(_) => "analytic-cv",
            Command::McCoverage(_) => "mc-coverage",
            Command::McQq(_) => "mc-qq",
        }
    }

    fn config(self) -> RunConfig {
        match self {
            Command::Fit(c)
            | Command::InferSn(c)
            | Command::InferCn(c)
            | Command::InferBoundary(c)
            | Command::Advise(c)
            | Command::SubsampleCv(c)
            | Command::AnalyticCv(c)
            | Command::McCoverage(c)
            | Command::McQq(c) => c,
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let command = cli.command.name();
    let flags = cli.command.config();
    let config = match load_config_file(cli.config.as_deref()) {
        Ok(file) => RunConfig::overlay(file, flags),
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            return e.exit_code();
        }
    };
    match run_command(command, &config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            e.exit_code()
        }
    }
}

fn load_config_file(path: Option<&str>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_string(),
                source,
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad config file {p}: {e}")))
        }
    }
}

/// Load a CSV dataset: header row required, numeric cells, intercept column
/// prepended.
pub fn load_dataset_csv(
    path: &str,
    response: &str,
    regressors: Option<&[String]>,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Data(format!("{path}: {e}")),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("{path}: cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{path}: no column named '{name}'")))
    };
    let y_col = col_index(response)?;
    let reg_names: Vec<String> = match regressors {
        Some(list) => list.to_vec(),
        None => headers
            .iter()
            .filter(|h| h.as_str() != response)
            .cloned()
            .collect(),
    };
    let mut seen = HashSet::new();
    for name in &reg_names {
        if name == response {
            return Err(Error::Data(format!(
                "{path}: column '{name}' selected as both response and regressor"
            )));
        }
        if !seen.insert(name.clone()) {
            return Err(Error::Data(format!(
                "{path}: duplicate regressor column '{name}'"
            )));
        }
    }
    let reg_cols: Vec<usize> = reg_names.iter().map(|n| col_index(n)).collect::<Result<_>>()?;

    let d = reg_cols.len() + 1;
    let mut y = Vec::new();
    let mut x = Vec::new();
    for (row_i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{path}: row {}: {e}", row_i + 1)))?;
        let parse = |col: usize, name: &str| -> Result<f64> {
            let cell = record.get(col).unwrap_or("");
            if cell.trim().is_empty() {
                return Err(Error::Data(format!(
                    "{path}: row {}, column '{name}': missing value",
                    row_i + 1
                )));
            }
            cell.trim().parse::<f64>().map_err(|_| {
                Error::Data(format!(
                    "{path}: row {}, column '{name}': non-numeric value '{cell}'",
                    row_i + 1
                ))
            })
        };
        y.push(parse(y_col, response)?);
        x.push(1.0);
        for (c, name) in reg_cols.iter().zip(&reg_names) {
            x.push(parse(*c, name)?);
        }
    }
    let mut names = vec!["intercept".to_string()];
    names.extend(reg_names);
    Dataset::new(y, x, d, names)
}

fn require_dataset(config: &RunConfig) -> Result<Dataset> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| Error::Config("--input is required".into()))?;
    let response = config
        .response
        .as_deref()
        .ok_or_else(|| Error::Config("--response is required".into()))?;
    load_dataset_csv(input, response, config.regressors.as_deref())
}

fn psi_for(config: &RunConfig, d: usize) -> Result<(usize, Vec<f64>)> {
    let coef = config.coefficient.unwrap_or(0);
    if coef >= d {
        return Err(Error::Config(format!(
            "--coefficient {coef} out of range for d = {d}"
        )));
    }
    let mut psi = vec![0.0; d];
    psi[coef] = 1.0;
    Ok((coef, psi))
}

/// Reduce an upper-tail index to the lower-tail code path: negate y and map
/// tau -> 1 - tau; the caller un-negates location results.
fn lower_tail_view(data: &Dataset, tau: f64) -> (Dataset, f64, bool) {
    if tau > 0.5 {
        (data.negated(), 1.0 - tau, true)
    } else {
        (data.clone(), tau, false)
    }
}

fn inference_json(res: &InferenceResult, names: &[String], coef: usize) -> Value {
    json!({
        "coefficient": names.get(coef),
        "coefficient_index": coef,
        "tau": res.tau,
        "point": res.point,
        "median_unbiased": res.median_unbiased,
        "ci_lo": res.ci_lo,
        "ci_hi": res.ci_hi,
        "alpha": res.alpha,
        "method": res.method,
        "scale_used": res.scale_used,
        "warnings": res.warnings,
    })
}

fn document(command: &str, config: &RunConfig, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": config.seed,
        "config": serde_json::to_value(config).expect("config serializes"),
        "result": result,
    })
}

/// Dispatch a named command with a resolved config and write its report.
pub fn run_command(command: &str, config: &RunConfig) -> Result<()> {
    let result = match command {
        "fit" => cmd_fit(config)?,
        "infer-sn" => cmd_infer(config, Statistic::Sn)?,
        "infer-cn" => cmd_infer(config, Statistic::Cn)?,
        "infer-boundary" => cmd_infer_boundary(config)?,
        "advise" => cmd_advise(config)?,
        "subsample-cv" => cmd_subsample_cv(config)?,
        "analytic-cv" => cmd_analytic_cv(config)?,
        "mc-coverage" => cmd_mc_coverage(config)?,
        "mc-qq" => cmd_mc_qq(config)?,
        other => {
            return Err(Error::InvalidArgument(format!("unknown command '{other}'")));
        }
    };
    let doc = document(command, config, result);
    write_report(&doc, config)
}

fn cmd_fit(config: &RunConfig) -> Result<Value> {
    let data = require_dataset(config)?;
    let taus = config
        .tau
        .clone()
        .ok_or_else(|| Error::Config("--tau is required".into()))?;
    let mut fits = Vec::new();
    for tau in taus {
        let fit = fit_qr(&data, tau)?;
        let coef: Vec<Value> = data
            .names()
            .iter()
            .zip(&fit.beta)
            .map(|(n, b)| json!({ "name": n, "estimate": b }))
            .collect();
        fits.push(json!({
            "tau": tau,
            "coefficients": coef,
            "objective": fit.objective,
            "basis": fit.basis,
            "non_unique": fit.non_unique,
        }));
    }
    Ok(json!({ "t": data.len(), "d": data.dim(), "fits": fits }))
}

fn cmd_infer(config: &RunConfig, statistic: Statistic) -> Result<Value> {
    let data = require_dataset(config)?;
    let tau = config.single_tau()?;
    let alpha = config.alpha_or_default();
    let seed = config.require_seed()?;
    let (coef, psi) = psi_for(config, data.dim())?;
    let (view, tau_lo, flipped) = lower_tail_view(&data, tau);
    let method = config.method.as_deref().unwrap_or("subsample");

    let res = match (statistic, method) {
        (Statistic::Sn, "subsample") => {
            let b = config
                .b
                .unwrap_or_else(|| default_subsample_size(view.len(), view.dim()));
            let b_t = config.subsamples.unwrap_or(200);
            let draws = sn_subsample_draws(
                &view,
                tau_lo,
                b,
                b_t,
                &psi,
                config.spacing_p.unwrap_or(DEFAULT_SPACING_P),
                config.sampling_mode()?,
                seed,
            )?;
            let cv = CriticalValues::from_draws(Statistic::Sn, CvMethod::Subsample, draws.draws)?;
            infer_sn(&view, tau_lo, &psi, alpha, &cv)?
        }
        (Statistic::Sn, "analytic") => {
            let (sample, _) = analytic_sample(
                &view,
                tau_lo,
                &psi,
                config.draws.unwrap_or(1000),
                config.truncation.unwrap_or(500),
                seed,
            )?;
            let cv = CriticalValues::from_draws(Statistic::Sn, CvMethod::Analytic, sample.sn_draws)?;
            infer_sn(&view, tau_lo, &psi, alpha, &cv)?
        }
        (Statistic::Cn, "subsample") => {
            let b = config
                .b
                .unwrap_or_else(|| default_subsample_size(view.len(), view.dim()));
            let b_t = config.subsamples.unwrap_or(200);
            let draws = cn_subsample_draws(
                &view,
                tau_lo,
                b,
                b_t,
                &psi,
                config.sampling_mode()?,
                seed,
            )?;
            let cv = CriticalValues::from_draws(Statistic::Cn, CvMethod::Subsample, draws.draws)?;
            let tail = estimate_tail(
                &view,
                intermediate_tau(&view, tau_lo)?,
                config.spacing_form(),
                Some(view.len()),
            )?;
            infer_cn(&view, tau_lo, &psi, alpha, tail.a_hat.unwrap(), &cv)?
        }
        (Statistic::Cn, "analytic") => {
            let (sample, tail) = analytic_sample(
                &view,
                tau_lo,
                &psi,
                config.draws.unwrap_or(1000),
                config.truncation.unwrap_or(500),
                seed,
            )?;
            let cv = CriticalValues::from_draws(Statistic::Cn, CvMethod::Analytic, sample.cn_draws)?;
            infer_cn(&view, tau_lo, &psi, alpha, tail.a_hat.unwrap(), &cv)?
        }
        (_, other) => {
            return Err(Error::Config(format!(
                "unknown method '{other}' (expected subsample | analytic)"
            )));
        }
    };
    let res = if flipped { res.negate_location() } else { res };
    let mut out = inference_json(&res, data.names(), coef);
    out["tau"] = json!(tau);
    Ok(out)
}

fn intermediate_tau(data: &Dataset, tau: f64) -> Result<f64> {
    match default_intermediate_tau(data.len(), data.dim()) {
        Ok(v) => Ok(v),
        Err(_) if 4.0 * tau < 1.0 && tau * data.len() as f64 >= 1.0 => Ok(tau),
        Err(e) => Err(e),
    }
}

fn cmd_infer_boundary(config: &RunConfig) -> Result<Value> {
    let data = require_dataset(config)?;
    let alpha = config.alpha_or_default();
    let seed = config.require_seed()?;
    let (coef, psi) = psi_for(config, data.dim())?;
    if config.method.as_deref().unwrap_or("analytic") != "analytic" {
        return Err(Error::Config(
            "infer-boundary supports --method analytic only".into(),
        ));
    }
    let t = data.len();
    let d = data.dim();
    let tau_e = 1.0 / t as f64;
    let tail = estimate_tail(
        &data,
        intermediate_tau(&data, tau_e)?,
        config.spacing_form(),
        None,
    )?;
    let k = 1.0;
    let mfac = spacing_m(tau_e, t, d, config.spacing_p.unwrap_or(DEFAULT_SPACING_P))?;
    let m_trunc = config
        .truncation
        .unwrap_or(500)
        .max((2.0 * mfac * k).ceil() as usize);
    let sampler = SmoothedDesignSampler::from_dataset(&data);
    let sample = simulate_limit_sample(
        config.draws.unwrap_or(1000),
        k,
        mfac,
        tail.xi,
        &tail.gamma,
        &data.xbar(),
        &psi,
        m_trunc,
        seed,
        &sampler,
        LimitTarget::Boundary,
    )?;
    let cv = CriticalValues::from_draws(Statistic::Boundary, CvMethod::Analytic, sample.sn_draws)?;
    let res = infer_boundary(&data, &psi, alpha, &cv, Some(tail.xi))?;
    let mut out = inference_json(&res, data.names(), coef);
    out["xi_hat"] = json!(tail.xi);
    Ok(out)
}

fn cmd_advise(config: &RunConfig) -> Result<Value> {
    let tau = config.single_tau()?;
    let (t, d) = match (&config.input, config.t, config.d) {
        (Some(_), _, _) => {
            let data = require_dataset(config)?;
            (data.len(), data.dim())
        }
        (None, Some(t), Some(d)) => (t, d),
        _ => {
            return Err(Error::Config(
                "advise needs --input or both --t and --d".into(),
            ));
        }
    };
    let advice = advise_method(tau, t, d, config.cell_share, config.threshold)?;
    Ok(json!({
        "tau": tau,
        "t": t,
        "d": d,
        "order_dim": advice.order_dim,
        "order_cell": advice.order_cell,
        "effective_order": advice.effective_order,
        "threshold": advice.threshold,
        "recommendation": advice.recommendation.label(),
    }))
}

fn cv_quantiles(draws: &[f64]) -> Result<Value> {
    let grid = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];
    let mut q = serde_json::Map::new();
    for a in grid {
        q.insert(
            format!("{a}"),
            json!(crate::inference::empirical_quantile(draws, a)?),
        );
    }
    Ok(Value::Object(q))
}

fn cmd_subsample_cv(config: &RunConfig) -> Result<Value> {
    let data = require_dataset(config)?;
    let tau = config.single_tau()?;
    let seed = config.require_seed()?;
    let (_, psi) = psi_for(config, data.dim())?;
    let (view, tau_lo, _) = lower_tail_view(&data, tau);
    let b = config
        .b
        .unwrap_or_else(|| default_subsample_size(view.len(), view.dim()));
    let b_t = config.subsamples.unwrap_or(200);
    let mode = config.sampling_mode()?;
    let statistic = config.statistic.as_deref().unwrap_or("sn");
    let out = match statistic {
        "sn" => sn_subsample_draws(
            &view,
            tau_lo,
            b,
            b_t,
            &psi,
            config.spacing_p.unwrap_or(DEFAULT_SPACING_P),
            mode,
            seed,
        )?,
        "cn" => cn_subsample_draws(&view, tau_lo, b, b_t, &psi, mode, seed)?,
        other => {
            return Err(Error::Config(format!(
                "unknown statistic '{other}' (expected sn | cn)"
            )));
        }
    };
    Ok(json!({
        "statistic": statistic,
        "b": out.b,
        "subsamples": out.b_t,
        "tau_b": out.tau_b,
        "skipped": out.skipped,
        "mode": out.mode.label(),
        "quantiles": cv_quantiles(&out.draws)?,
        "draws": out.draws,
    }))
}

fn cmd_analytic_cv(config: &RunConfig) -> Result<Value> {
    let data = require_dataset(config)?;
    let tau = config.single_tau()?;
    let seed = config.require_seed()?;
    let (_, psi) = psi_for(config, data.dim())?;
    let (view, tau_lo, _) = lower_tail_view(&data, tau);
    let (sample, tail) = analytic_sample(
        &view,
        tau_lo,
        &psi,
        config.draws.unwrap_or(1000),
        config.truncation.unwrap_or(500),
        seed,
    )?;
    Ok(json!({
        "k": sample.k,
        "m": sample.m,
        "xi_hat": tail.xi,
        "gamma_hat": tail.gamma,
        "a_hat": tail.a_hat,
        "truncation": sample.m_trunc,
        "draw_count": sample.b,
        "rejections": sample.rejections,
        "sn_quantiles": cv_quantiles(&sample.sn_draws)?,
        "cn_quantiles": cv_quantiles(&sample.cn_draws)?,
        "sn_draws": sample.sn_draws,
        "cn_draws": sample.cn_draws,
    }))
}

fn parse_coverage_methods(config: &RunConfig) -> Result<Vec<CoverageMethod>> {
    let b = config.b.unwrap_or(100);
    let b_t = config.subsamples.unwrap_or(200);
    let draws = config.draws.unwrap_or(400);
    let m_trunc = config.truncation.unwrap_or(300);
    let names = config
        .methods
        .clone()
        .unwrap_or_else(|| vec!["sn-subsample".into(), "normal".into()]);
    names
        .iter()
        .map(|n| match n.as_str() {
            "sn-subsample" => Ok(CoverageMethod::SnSubsample { b, b_t }),
            "sn-analytic" => Ok(CoverageMethod::SnAnalytic { draws, m_trunc }),
            "cn-analytic" => Ok(CoverageMethod::CnAnalytic { draws, m_trunc }),
            "normal" => Ok(CoverageMethod::NormalBaseline),
            other => Err(Error::Config(format!(
                "unknown coverage method '{other}'"
            ))),
        })
        .collect()
}

fn cmd_mc_coverage(config: &RunConfig) -> Result<Value> {
    let seed = config.require_seed()?;
    let preset = config.preset.as_deref().map(Preset::parse).transpose()?;
    let (t, d, reps, taus) = match preset {
        Some(Preset::Quick) => (300, 3, 100, vec![0.05]),
        Some(Preset::FullScale) => (500, 7, 1000, vec![0.01, 0.05, 0.10, 0.25, 0.50]),
        Some(Preset::CauchyQq) => {
            return Err(Error::Config("cauchy-qq is an mc-qq preset".into()));
        }
        None => (
            config.t.unwrap_or(500),
            config.d.unwrap_or(7),
            config.reps.unwrap_or(200),
            config.tau.clone().unwrap_or_else(|| vec![0.05]),
        ),
    };
    let t = config.t.unwrap_or(t);
    let d = config.d.unwrap_or(d);
    let reps = config.reps.unwrap_or(reps);
    let taus = config.tau.clone().unwrap_or(taus);
    let design = coverage_design(t, d, config.error_family()?);
    let methods = parse_coverage_methods(config)?;
    let coefficients = vec![0, (d - 1).min(1)];
    let report = coverage_experiment(
        &design,
        &taus,
        reps,
        &methods,
        &coefficients,
        config.alpha_or_default(),
        seed,
    )?;
    let cells: Vec<Value> = report
        .cells
        .iter()
        .map(|c| {
            json!({
                "tau": c.tau,
                "coefficient": c.coefficient,
                "method": c.method,
                "coverage": c.coverage,
                "avg_width": c.avg_width,
                "reps": c.reps,
            })
        })
        .collect();
    Ok(json!({
        "t": t,
        "d": d,
        "reps": reps,
        "alpha": report.alpha,
        "error_family": config.error_family.as_deref().unwrap_or("t"),
        "error_param": config.error_param,
        "cells": cells,
    }))
}

fn cmd_mc_qq(config: &RunConfig) -> Result<Value> {
    let seed = config.require_seed()?;
    let preset = config.preset.as_deref().map(Preset::parse).transpose()?;
    let (t, reps, taus) = match preset {
        Some(Preset::CauchyQq) => (200, 10000, vec![0.025, 0.1, 0.2, 0.3]),
        Some(_) => {
            return Err(Error::Config("mc-qq supports the cauchy-qq preset only".into()));
        }
        None => (
            config.t.unwrap_or(200),
            config.reps.unwrap_or(2000),
            config.tau.clone().unwrap_or_else(|| vec![0.025, 0.1, 0.2, 0.3]),
        ),
    };
    let t = config.t.unwrap_or(t);
    let reps = config.reps.unwrap_or(reps);
    let taus = config.tau.clone().unwrap_or(taus);
    let design = cauchy_location_design(t);
    let rows = qq_experiment(&design, &taus, reps, config.draws.unwrap_or(5000), seed)?;
    let tables: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "tau": r.tau,
                "ev_mad": r.ev_mad,
                "normal_mad": r.normal_mad,
                "probs": r.probs,
                "true_q": r.true_q,
                "ev_q": r.ev_q,
                "normal_q": r.normal_q,
            })
        })
        .collect();
    Ok(json!({ "t": t, "reps": reps, "tables": tables }))
}

/// Serialize the report document, refusing to overwrite without --force.
pub fn write_report(doc: &Value, config: &RunConfig) -> Result<()> {
    let format = config.format.as_deref().unwrap_or("json");
    let body = match format {
        "json" => {
            let mut s = serde_json::to_string_pretty(doc)
                .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
            s.push('\n');
            s
        }
        "csv" => csv_body(doc)?,
        other => {
            return Err(Error::Config(format!(
                "unknown output format '{other}' (expected json | csv)"
            )));
        }
    };
    match &config.output {
        None => {
            print!("{body}");
            std::io::stdout().flush().map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })?;
            Ok(())
        }
        Some(path) => {
            if Path::new(path).exists() && !config.force.unwrap_or(false) {
                return Err(Error::Io {
                    path: path.clone(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::AlreadyExists,
                        "output exists; pass --force to overwrite",
                    ),
                });
            }
            fs::write(path, body).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // 17 significant digits round-trips every finite f64
    format!("{:.16e}", v)
}

/// Long-format CSV for the commands that emit plot tables.
fn csv_body(doc: &Value) -> Result<String> {
    let command = doc["command"].as_str().unwrap_or("");
    let result = &doc["result"];
    let mut out = String::new();
    match command {
        "mc-coverage" => {
            out.push_str("tau,coefficient,method,coverage,avg_width,reps\n");
            for c in result["cells"].as_array().into_iter().flatten() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_f64(c["tau"].as_f64().unwrap()),
                    c["coefficient"],
                    c["method"].as_str().unwrap_or(""),
                    fmt_f64(c["coverage"].as_f64().unwrap()),
                    fmt_f64(c["avg_width"].as_f64().unwrap()),
                    c["reps"],
                ));
            }
        }
        "mc-qq" => {
            out.push_str("tau,prob,true_q,ev_q,normal_q\n");
            for table in result["tables"].as_array().into_iter().flatten() {
                let tau = table["tau"].as_f64().unwrap();
                let probs = table["probs"].as_array().unwrap();
                let tq = table["true_q"].as_array().unwrap();
                let eq = table["ev_q"].as_array().unwrap();
                let nq = table["normal_q"].as_array().unwrap();
                for i in 0..probs.len() {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt_f64(tau),
                        fmt_f64(probs[i].as_f64().unwrap()),
                        fmt_f64(tq[i].as_f64().unwrap()),
                        fmt_f64(eq[i].as_f64().unwrap()),
                        fmt_f64(nq[i].as_f64().unwrap()),
                    ));
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "csv output is only available for mc-coverage and mc-qq, not '{other}'"
            )));
        }
    }
    Ok(out)
}
