//! Simulation harness: synthetic designs, the EV-vs-normal QQ comparison,
//! and coverage studies of the competing confidence interval methods.
//!
//! All designs are location models Y = X'beta + U, so the true conditional
//! quantile coefficients are known exactly: the intercept shifts by the error
//! quantile Q_U(tau) and the slopes are unchanged. Error draws use inverse-CDF
//! sampling so the scoring quantiles and the samples come from the same
//! closed form.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::gamma as gamma_fn;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::inference::{
    infer_cn, infer_sn, normal_ci, spacing_m, CriticalValues, CvMethod, Statistic,
    DEFAULT_SPACING_P,
};
use crate::limit::{simulate_limit_sample, LimitTarget, SmoothedDesignSampler};
use crate::qr::fit_qr;
use crate::subsample::{sn_subsample_draws, SamplingMode};
use crate::tail::{default_intermediate_tau, estimate_tail, SpacingForm};

/// Error distribution menu for the simulated designs. All laws are oriented
/// so the LOWER tail is the tail of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorFamily {
    /// Student t with nu degrees of freedom; lower-tail EV index 1/nu.
    StudentT { nu: f64 },
    /// W - E[W] with W ~ Weibull(shape alpha, scale 1): finite lower endpoint
    /// -E[W], EV index -1/alpha.
    Weibull { alpha: f64 },
    /// Standard Cauchy; EV index 1.
    Cauchy,
    /// Exact Pareto-type tail: Q_U(tau) = -tau^(-xi) for xi > 0 (unbounded),
    /// Q_U(tau) = tau^(-xi) for xi < 0 (endpoint 0).
    Pareto { xi: f64 },
    /// Uniform(0,1): Q_U(tau) = tau, EV index -1.
    Uniform,
    /// Degenerate zero noise, for exact-fit boundary tests.
    None,
}

impl ErrorFamily {
    /// Lower-tail EV index implied by the family.
    pub fn implied_xi(self) -> Option<f64> {
        match self {
            ErrorFamily::StudentT { nu } => Some(1.0 / nu),
            ErrorFamily::Weibull { alpha } => Some(-1.0 / alpha),
            ErrorFamily::Cauchy => Some(1.0),
            ErrorFamily::Pareto { xi } => Some(xi),
            ErrorFamily::Uniform => Some(-1.0),
            ErrorFamily::None => None,
        }
    }

    /// Finite lower endpoint of the support, when one exists.
    pub fn lower_endpoint(self) -> Option<f64> {
        match self {
            ErrorFamily::Weibull { alpha } => Some(-gamma_fn(1.0 + 1.0 / alpha)),
            ErrorFamily::Pareto { xi } if xi < 0.0 => Some(0.0),
            ErrorFamily::Uniform => Some(0.0),
            ErrorFamily::None => Some(0.0),
            _ => None,
        }
    }

    /// Exact quantile function Q_U(tau).
    pub fn quantile(self, tau: f64) -> Result<f64> {
        if !(0.0 < tau && tau < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile level must lie in (0,1), got {tau}"
            )));
        }
        Ok(match self {
            ErrorFamily::StudentT { nu } => {
                StudentsT::new(0.0, 1.0, nu)
                    .map_err(|e| Error::InvalidArgument(format!("bad t dof: {e}")))?
                    .inverse_cdf(tau)
            }
            ErrorFamily::Weibull { alpha } => {
                // Q_W(tau) = (-ln(1-tau))^(1/alpha), centered at E[W]
                (-(1.0 - tau).ln()).powf(1.0 / alpha) - gamma_fn(1.0 + 1.0 / alpha)
            }
            ErrorFamily::Cauchy => (std::f64::consts::PI * (tau - 0.5)).tan(),
            ErrorFamily::Pareto { xi } => {
                if xi == 0.0 {
                    return Err(Error::InvalidArgument(
                        "Pareto family needs a nonzero EV index".into(),
                    ));
                }
                if xi > 0.0 {
                    -tau.powf(-xi)
                } else {
                    tau.powf(-xi)
                }
            }
            ErrorFamily::Uniform => tau,
            ErrorFamily::None => 0.0,
        })
    }

    /// Inverse-CDF draw.
    pub fn sample(self, rng: &mut impl Rng) -> Result<f64> {
        if self == ErrorFamily::None {
            return Ok(0.0);
        }
        // open-interval uniform keeps the quantile function finite
        let u = loop {
            let v: f64 = rng.random();
            if v > 0.0 && v < 1.0 {
                break v;
            }
        };
        self.quantile(u)
    }

    /// Density at the tau-quantile, f_U(Q_U(tau)) = 1/Q_U'(tau), by central
    /// difference.
    pub fn density_at_quantile(self, tau: f64) -> Result<f64> {
        let h = (tau.min(1.0 - tau) * 1e-3).max(1e-10);
        let qp = self.quantile(tau + h)?;
        let qm = self.quantile(tau - h)?;
        let slope = (qp - qm) / (2.0 * h);
        if !(slope > 0.0) {
            return Err(Error::Simulation(format!(
                "non-increasing quantile function at tau = {tau}"
            )));
        }
        Ok(1.0 / slope)
    }
}

/// Where the regressor rows come from.
#[derive(Debug, Clone)]
pub enum RegressorSource {
    /// X = 1 (intercept-only, the non-regression case).
    ConstantOne,
    /// A fixed T x d matrix used verbatim each replication.
    Fixed { x: Vec<f64>, d: usize },
    /// Rows drawn with replacement from a pool each replication.
    Resample { pool: Vec<f64>, rows: usize, d: usize },
}

impl RegressorSource {
    pub fn dim(&self) -> usize {
        match self {
            RegressorSource::ConstantOne => 1,
            RegressorSource::Fixed { d, .. } | RegressorSource::Resample { d, .. } => *d,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Design {
    pub t: usize,
    pub beta_true: Vec<f64>,
    pub error: ErrorFamily,
    pub regressors: RegressorSource,
}

impl Design {
    pub fn dim(&self) -> usize {
        self.regressors.dim()
    }

    pub fn implied_xi(&self) -> Option<f64> {
        self.error.implied_xi()
    }

    /// True quantile coefficients: intercept shifted by Q_U(tau), slopes
    /// unchanged (location model).
    pub fn true_beta_tau(&self, tau: f64) -> Result<Vec<f64>> {
        let mut b = self.beta_true.clone();
        b[0] += self.error.quantile(tau)?;
        Ok(b)
    }

    /// Known canonical scale A_T = 1/(Q_U(1/T) - endpoint), endpoint-free for
    /// unbounded lower tails.
    pub fn known_a_t(&self) -> Result<f64> {
        let q = self.error.quantile(1.0 / self.t as f64)?;
        let base = match self.error.lower_endpoint() {
            Some(e) => q - e,
            None => q,
        };
        if base == 0.0 {
            return Err(Error::Simulation("degenerate canonical scale".into()));
        }
        Ok(1.0 / base)
    }
}

/// One simulated dataset from the design.
pub fn simulate_design(design: &Design, rng: &mut impl Rng) -> Result<Dataset> {
    let t = design.t;
    let d = design.dim();
    if design.beta_true.len() != d {
        return Err(Error::InvalidArgument(format!(
            "beta_true has {} entries for a {d}-column design",
            design.beta_true.len()
        )));
    }
    let x: Vec<f64> = match &design.regressors {
        RegressorSource::ConstantOne => vec![1.0; t],
        RegressorSource::Fixed { x, d: dd } => {
            if x.len() != t * dd {
                return Err(Error::InvalidArgument(
                    "fixed regressor matrix does not match T".into(),
                ));
            }
            x.clone()
        }
        RegressorSource::Resample { pool, rows, d: dd } => {
            let mut x = Vec::with_capacity(t * dd);
            for _ in 0..t {
                let r = rng.random_range(0..*rows);
                x.extend_from_slice(&pool[r * dd..(r + 1) * dd]);
            }
            x
        }
    };
    let mut y = Vec::with_capacity(t);
    for i in 0..t {
        let mut v = 0.0;
        for j in 0..d {
            v += x[i * d + j] * design.beta_true[j];
        }
        v += design.error.sample(rng)?;
        y.push(v);
    }
    let names = (0..d)
        .map(|j| if j == 0 { "intercept".into() } else { format!("x{j}") })
        .collect();
    Dataset::new(y, x, d, names)
}

/// Bundled synthetic regressor pool: `rows` x 7 matrix with an intercept,
/// three continuous columns (one standard normal, one lognormal-type, one
/// uniform) and three binary indicators with shares 0.5, 0.35, 0.2. Generated
/// from a fixed internal seed so every build ships the same matrix.
pub fn bundled_design_pool(rows: usize) -> (Vec<f64>, usize) {
    let d = 7usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7d5a_9e1c);
    let mut x = Vec::with_capacity(rows * d);
    for _ in 0..rows {
        x.push(1.0);
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        x.push(z);
        let w: f64 = rng.sample(rand_distr::StandardNormal);
        x.push((0.5 * w).exp());
        x.push(rng.random::<f64>() * 2.0);
        x.push(if rng.random::<f64>() < 0.5 { 1.0 } else { 0.0 });
        x.push(if rng.random::<f64>() < 0.35 { 1.0 } else { 0.0 });
        x.push(if rng.random::<f64>() < 0.2 { 1.0 } else { 0.0 });
    }
    (x, d)
}

/// The leading `d` columns of the bundled pool (intercept first).
pub fn bundled_design_pool_dim(rows: usize, d: usize) -> (Vec<f64>, usize) {
    let (full, full_d) = bundled_design_pool(rows);
    assert!(d >= 1 && d <= full_d);
    let mut x = Vec::with_capacity(rows * d);
    for r in 0..rows {
        x.extend_from_slice(&full[r * full_d..r * full_d + d]);
    }
    (x, d)
}

/// QQ comparison table for one quantile index.
#[derive(Debug, Clone)]
pub struct QqRow {
    pub tau: f64,
    /// Probability grid (central 99% range by default).
    pub probs: Vec<f64>,
    /// Empirical quantiles of the finite-sample statistic A_T(b(tau)-beta(tau)).
    pub true_q: Vec<f64>,
    /// Quantiles of the simulated EV limit law.
    pub ev_q: Vec<f64>,
    /// Quantiles of the normal approximation.
    pub normal_q: Vec<f64>,
    /// Mean absolute quantile discrepancies over the grid.
    pub ev_mad: f64,
    pub normal_mad: f64,
}

/// Default central-99% probability grid.
pub fn qq_grid() -> Vec<f64> {
    (0..100).map(|i| 0.005 + 0.01 * i as f64).collect()
}

fn sorted_quantile_at(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let idx = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[idx - 1]
}

/// Finite-sample vs limit-law vs normal quantiles of the canonically
/// normalized QR statistic, with the infeasible scale computed from the known
/// error law.
pub fn qq_experiment(
    design: &Design,
    taus: &[f64],
    reps: usize,
    ev_draws: usize,
    seed: u64,
) -> Result<Vec<QqRow>> {
    if design.error == ErrorFamily::None {
        return Err(Error::InvalidArgument(
            "QQ experiment needs a stochastic error law".into(),
        ));
    }
    if reps < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 replications, got {reps}"
        )));
    }
    let d = design.dim();
    let t = design.t;
    let xi = design.implied_xi().expect("stochastic family has an index");
    let a_t = design.known_a_t()?;
    let psi: Vec<f64> = {
        let mut p = vec![0.0; d];
        p[0] = 1.0;
        p
    };

    // finite-sample statistic draws, one per replication
    let stats: Result<Vec<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64 + 1);
            let data = simulate_design(design, &mut rng)?;
            let mut out = Vec::with_capacity(taus.len());
            for &tau in taus {
                let fit = fit_qr(&data, tau)?;
                let truth = design.true_beta_tau(tau)?;
                let dev: f64 = psi
                    .iter()
                    .zip(fit.beta.iter().zip(&truth))
                    .map(|(p, (b, tr))| p * (b - tr))
                    .sum();
                out.push(a_t * dev);
            }
            Ok(out)
        })
        .collect();
    let stats = stats?;

    // limit-law sampler built from one realized design
    let sampler = match &design.regressors {
        RegressorSource::ConstantOne => SmoothedDesignSampler::constant_one(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(0);
            SmoothedDesignSampler::from_dataset(&simulate_design(design, &mut rng)?)
        }
    };
    let gamma: Vec<f64> = psi.clone(); // location model tail slope: intercept direction
    let xbar = match &design.regressors {
        RegressorSource::ConstantOne => vec![1.0],
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(0);
            simulate_design(design, &mut rng)?.xbar()
        }
    };

    let grid = qq_grid();
    let mut rows = Vec::with_capacity(taus.len());
    for (ti, &tau) in taus.iter().enumerate() {
        let k = tau * t as f64;
        let mfac = (d + DEFAULT_SPACING_P) as f64 / k + 1.0;
        let m_trunc = (500.0f64)
            .max(10.0 * k)
            .max(2.0 * mfac * k)
            .ceil() as usize;
        let sample = simulate_limit_sample(
            ev_draws,
            k,
            mfac,
            xi,
            &gamma,
            &xbar,
            &psi,
            m_trunc,
            seed ^ 0x51ab_33c7,
            &sampler,
            LimitTarget::Centered,
        )?;
        let mut ev = sample.cn_draws.clone();
        ev.sort_by(f64::total_cmp);

        let mut finite: Vec<f64> = stats.iter().map(|s| s[ti]).collect();
        finite.sort_by(f64::total_cmp);

        // normal approximation of the same statistic
        let f_u = design.error.density_at_quantile(tau)?;
        let sigma2_core = second_moment_inv_quadform(design, &psi)?;
        let sd = a_t.abs() * (tau * (1.0 - tau) * sigma2_core / t as f64).sqrt() / f_u;
        let n01 = Normal::new(0.0, 1.0).unwrap();

        let mut true_q = Vec::with_capacity(grid.len());
        let mut ev_q = Vec::with_capacity(grid.len());
        let mut normal_q = Vec::with_capacity(grid.len());
        let mut ev_mad = 0.0;
        let mut normal_mad = 0.0;
        for &p in &grid {
            let tq = sorted_quantile_at(&finite, p);
            let eq = sorted_quantile_at(&ev, p);
            let nq = sd * n01.inverse_cdf(p);
            ev_mad += (tq - eq).abs();
            normal_mad += (tq - nq).abs();
            true_q.push(tq);
            ev_q.push(eq);
            normal_q.push(nq);
        }
        ev_mad /= grid.len() as f64;
        normal_mad /= grid.len() as f64;
        rows.push(QqRow {
            tau,
            probs: grid.clone(),
            true_q,
            ev_q,
            normal_q,
            ev_mad,
            normal_mad,
        });
    }
    Ok(rows)
}

/// psi' E[XX']^-1 psi, exact for the constant design and computed from the
/// regressor pool otherwise.
fn second_moment_inv_quadform(design: &Design, psi: &[f64]) -> Result<f64> {
    let d = design.dim();
    match &design.regressors {
        RegressorSource::ConstantOne => Ok(psi[0] * psi[0]),
        RegressorSource::Fixed { x, .. } | RegressorSource::Resample { pool: x, .. } => {
            let rows = x.len() / d;
            let mut s = vec![0.0; d * d];
            for r in 0..rows {
                let row = &x[r * d..(r + 1) * d];
                for a in 0..d {
                    for b in 0..d {
                        s[a * d + b] += row[a] * row[b];
                    }
                }
            }
            for v in &mut s {
                *v /= rows as f64;
            }
            let inv = crate::linalg::invert(&s, d, 1e-14)
                .ok_or_else(|| Error::Simulation("singular design second moment".into()))?;
            let v = crate::linalg::matvec(&inv, psi, d);
            Ok(crate::linalg::dot(psi, &v))
        }
    }
}

/// CI construction methods compared in coverage studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverageMethod {
    SnSubsample { b: usize, b_t: usize },
    SnAnalytic { draws: usize, m_trunc: usize },
    CnAnalytic { draws: usize, m_trunc: usize },
    NormalBaseline,
}

impl CoverageMethod {
    pub fn label(self) -> &'static str {
        match self {
            CoverageMethod::SnSubsample { .. } => "sn-subsample",
            CoverageMethod::SnAnalytic { .. } => "sn-analytic",
            CoverageMethod::CnAnalytic { .. } => "cn-analytic",
            CoverageMethod::NormalBaseline => "normal",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoverageCell {
    pub tau: f64,
    /// Coefficient index scored (0 = intercept).
    pub coefficient: usize,
    pub method: &'static str,
    pub coverage: f64,
    pub avg_width: f64,
    pub reps: usize,
}

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub cells: Vec<CoverageCell>,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// Empirical coverage and average CI width per (tau, coefficient, method).
pub fn coverage_experiment(
    design: &Design,
    taus: &[f64],
    reps: usize,
    methods: &[CoverageMethod],
    coefficients: &[usize],
    alpha: f64,
    seed: u64,
) -> Result<CoverageReport> {
    if reps < 50 {
        return Err(Error::InvalidArgument(format!(
            "need at least 50 replications, got {reps}"
        )));
    }
    if design.error == ErrorFamily::None {
        return Err(Error::InvalidArgument(
            "coverage experiment needs a stochastic error law".into(),
        ));
    }
    let d = design.dim();
    for &c in coefficients {
        if c >= d {
            return Err(Error::InvalidArgument(format!(
                "coefficient index {c} out of range for d = {d}"
            )));
        }
    }

    // per-replication (hit, width) for every (tau, coefficient, method) cell
    let n_cells = taus.len() * coefficients.len() * methods.len();
    let per_rep: Result<Vec<Vec<(bool, f64)>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64 + 1);
            let data = simulate_design(design, &mut rng)?;
            let sub_seed: u64 = rng.random();
            let sim_seed: u64 = rng.random();
            let mut cells = Vec::with_capacity(n_cells);
            for &tau in taus {
                let truth = design.true_beta_tau(tau)?;
                for &coef in coefficients {
                    let mut psi = vec![0.0; d];
                    psi[coef] = 1.0;
                    for &method in methods {
                        let res = run_method(
                            &data, tau, &psi, alpha, method, sub_seed, sim_seed,
                        )?;
                        let target = truth[coef];
                        let hit = res.ci_lo <= target && target <= res.ci_hi;
                        cells.push((hit, res.ci_hi - res.ci_lo));
                    }
                }
            }
            Ok(cells)
        })
        .collect();
    let per_rep = per_rep?;

    let mut cells = Vec::with_capacity(n_cells);
    let mut idx = 0usize;
    for &tau in taus {
        for &coef in coefficients {
            for &method in methods {
                let mut hits = 0usize;
                let mut width = 0.0;
                for rep in &per_rep {
                    let (h, w) = rep[idx];
                    if h {
                        hits += 1;
                    }
                    width += w;
                }
                cells.push(CoverageCell {
                    tau,
                    coefficient: coef,
                    method: method.label(),
                    coverage: hits as f64 / reps as f64,
                    avg_width: width / reps as f64,
                    reps,
                });
                idx += 1;
            }
        }
    }
    Ok(CoverageReport {
        cells,
        reps,
        alpha,
        seed,
    })
}

fn run_method(
    data: &Dataset,
    tau: f64,
    psi: &[f64],
    alpha: f64,
    method: CoverageMethod,
    sub_seed: u64,
    sim_seed: u64,
) -> Result<crate::inference::InferenceResult> {
    match method {
        CoverageMethod::NormalBaseline => normal_ci(data, tau, psi, alpha),
        CoverageMethod::SnSubsample { b, b_t } => {
            let draws = sn_subsample_draws(
                data,
                tau,
                b,
                b_t,
                psi,
                DEFAULT_SPACING_P,
                SamplingMode::Iid,
                sub_seed,
            )?;
            let cv = CriticalValues::from_draws(Statistic::Sn, CvMethod::Subsample, draws.draws)?;
            infer_sn(data, tau, psi, alpha, &cv)
        }
        CoverageMethod::SnAnalytic { draws, m_trunc } => {
            let (sample, _tail) = analytic_sample(data, tau, psi, draws, m_trunc, sim_seed)?;
            let cv = CriticalValues::from_draws(Statistic::Sn, CvMethod::Analytic, sample.sn_draws)?;
            infer_sn(data, tau, psi, alpha, &cv)
        }
        CoverageMethod::CnAnalytic { draws, m_trunc } => {
            let (sample, tail) = analytic_sample(data, tau, psi, draws, m_trunc, sim_seed)?;
            let a_hat = tail.a_hat.expect("scale requested");
            let cv = CriticalValues::from_draws(Statistic::Cn, CvMethod::Analytic, sample.cn_draws)?;
            infer_cn(data, tau, psi, alpha, a_hat, &cv)
        }
    }
}

/// Tail estimation plus one limit-law simulation for analytic critical
/// values, shared by the SN and CN analytic paths.
pub fn analytic_sample(
    data: &Dataset,
    tau: f64,
    psi: &[f64],
    draws: usize,
    m_trunc: usize,
    seed: u64,
) -> Result<(crate::limit::LimitLawSample, crate::tail::TailEstimates)> {
    let t = data.len();
    let d = data.dim();
    let pick_tau = match default_intermediate_tau(t, d) {
        Ok(v) => v,
        Err(_) if 4.0 * tau < 1.0 && tau * t as f64 >= 1.0 => tau,
        Err(e) => return Err(e),
    };
    let tail = estimate_tail(data, pick_tau, SpacingForm::Adjacent, Some(t))?;
    let k = tau * t as f64;
    let mfac = spacing_m(tau, t, d, DEFAULT_SPACING_P)?;
    let m_trunc = m_trunc
        .max((10.0 * k).ceil() as usize)
        .max((2.0 * mfac * k).ceil() as usize);
    let sampler = SmoothedDesignSampler::from_dataset(data);
    let sample = simulate_limit_sample(
        draws,
        k,
        mfac,
        tail.xi,
        &tail.gamma,
        &data.xbar(),
        psi,
        m_trunc,
        seed,
        &sampler,
        LimitTarget::Centered,
    )?;
    Ok((sample, tail))
}

/// Experiment presets at the scales used throughout the documentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// d=3, T=300, 100 replications.
    Quick,
    /// d=7, T=500, 1000 replications.
    FullScale,
    /// Cauchy QQ design, T=200, 10000 replications.
    CauchyQq,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Preset::Quick),
            "full-scale" => Ok(Preset::FullScale),
            "cauchy-qq" => Ok(Preset::CauchyQq),
            other => Err(Error::InvalidArgument(format!(
                "unknown preset '{other}' (expected quick | full-scale | cauchy-qq)"
            ))),
        }
    }
}

/// Coverage-study design: location model over the bundled regressor pool.
pub fn coverage_design(t: usize, d: usize, error: ErrorFamily) -> Design {
    let (pool, d) = bundled_design_pool_dim(500, d);
    Design {
        t,
        beta_true: vec![1.0; d],
        error,
        regressors: RegressorSource::Resample { pool, rows: 500, d },
    }
}

/// The intercept-only Cauchy QQ design.
pub fn cauchy_location_design(t: usize) -> Design {
    Design {
        t,
        beta_true: vec![0.0],
        error: ErrorFamily::Cauchy,
        regressors: RegressorSource::ConstantOne,
    }
}
