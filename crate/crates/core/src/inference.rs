//! Median-unbiased estimation and confidence intervals for extremal quantile
//! coefficients.
//!
//! Statistics come in two normalizations: SN (self-normalized by the random
//! scale `A_T = sqrt(tau*T) / xbar'(beta_hat(m*tau) - beta_hat(tau))`) and CN
//! (canonically normalized by the extrapolated deterministic scale
//! `A_hat_T = 1/Q_hat_U(1/T)`). Critical-value draws for either statistic can
//! be produced by recentered subsampling or by direct simulation of the limit
//! law; this module turns them into estimates via
//!
//! ```text
//!     median_unbiased = psi'beta_hat(tau) - c_{1/2} / scale
//!     CI = sorted [ point - c_{1-a/2}/scale , point - c_{a/2}/scale ]
//! ```
//!
//! plus a kernel-sandwich normal-approximation baseline and an advisor that
//! flags quantile orders too extreme for normal inference.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::qr::{fit_qr, fit_qr_warm, QuantileFit};

/// Spacing parameter p in m = (d+p)/(tau*T) + 1.
pub const DEFAULT_SPACING_P: usize = 5;

/// Relative tolerance below which a self-normalization spacing counts as zero.
pub const SCALE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Sn,
    Cn,
    Boundary,
}

impl Statistic {
    pub fn label(self) -> &'static str {
        match self {
            Statistic::Sn => "sn",
            Statistic::Cn => "cn",
            Statistic::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMethod {
    Subsample,
    Analytic,
}

impl CvMethod {
    pub fn label(self) -> &'static str {
        match self {
            CvMethod::Subsample => "subsample",
            CvMethod::Analytic => "analytic",
        }
    }
}

/// Critical-value draws for one statistic, kept sorted; quantiles are read
/// off as order statistics, so c_alpha is nondecreasing in alpha by
/// construction.
#[derive(Debug, Clone)]
pub struct CriticalValues {
    pub statistic: Statistic,
    pub method: CvMethod,
    sorted_draws: Vec<f64>,
}

impl CriticalValues {
    pub fn from_draws(statistic: Statistic, method: CvMethod, mut draws: Vec<f64>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InvalidArgument(
                "critical values need at least one draw".into(),
            ));
        }
        if draws.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation("non-finite critical-value draw".into()));
        }
        draws.sort_by(f64::total_cmp);
        Ok(CriticalValues {
            statistic,
            method,
            sorted_draws: draws,
        })
    }

    pub fn draw_count(&self) -> usize {
        self.sorted_draws.len()
    }

    pub fn draws(&self) -> &[f64] {
        &self.sorted_draws
    }

    /// c_alpha, the alpha-quantile of the draws.
    pub fn critical(&self, alpha: f64) -> Result<f64> {
        sorted_quantile(&self.sorted_draws, alpha)
    }
}

#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub psi: Vec<f64>,
    pub tau: f64,
    /// Raw point estimate psi'beta_hat(tau).
    pub point: f64,
    pub median_unbiased: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub alpha: f64,
    /// e.g. "sn-subsample", "cn-analytic", "normal".
    pub method: String,
    /// The normalization divisor used (A_T, A_hat_T, or the normal se).
    pub scale_used: f64,
    pub warnings: Vec<String>,
}

impl InferenceResult {
    /// Map every location-scale endpoint v -> -v, used to undo the
    /// upper-tail reduction (y negated, tau -> 1-tau).
    pub fn negate_location(mut self) -> Self {
        self.point = -self.point;
        self.median_unbiased = -self.median_unbiased;
        let (lo, hi) = (-self.ci_hi, -self.ci_lo);
        self.ci_lo = lo;
        self.ci_hi = hi;
        self
    }
}

/// Spacing multiplier m with tau*T*(m-1) = d + p.
pub fn spacing_m(tau: f64, t: usize, d: usize, p: usize) -> Result<f64> {
    let k = tau * t as f64;
    if k <= 0.0 {
        return Err(Error::InvalidArgument(format!("tau*T must be positive, got {k}")));
    }
    let m = (d + p) as f64 / k + 1.0;
    if m * tau >= 1.0 {
        return Err(Error::QuantileRange(format!(
            "spacing quantile m*tau = {} >= 1; tau = {tau} is too central or T too small",
            m * tau
        )));
    }
    Ok(m)
}

/// Random self-normalization scale A_T = sqrt(tau*T) / xbar'(b(m*tau) - b(tau)).
pub fn sn_scale(data: &Dataset, fit_tau: &QuantileFit, fit_mtau: &QuantileFit) -> Result<f64> {
    let xbar = data.xbar();
    let diff: Vec<f64> = fit_mtau
        .beta
        .iter()
        .zip(&fit_tau.beta)
        .map(|(a, b)| a - b)
        .collect();
    let denom = linalg::dot(&xbar, &diff);
    if denom.abs() < SCALE_REL_TOL * data.y_scale() {
        return Err(Error::DegenerateScale(format!(
            "quantile spacing xbar'(b({}) - b({})) = {denom} is numerically zero",
            fit_mtau.tau, fit_tau.tau
        )));
    }
    Ok((fit_tau.tau * data.len() as f64).sqrt() / denom)
}

/// The ceil(alpha*N)-th order statistic of `draws`.
pub fn empirical_quantile(draws: &[f64], alpha: f64) -> Result<f64> {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted_quantile(&sorted, alpha)
}

fn sorted_quantile(sorted: &[f64], alpha: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("empty draw array".into()));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile level must lie in (0,1), got {alpha}"
        )));
    }
    let n = sorted.len();
    let idx = ((alpha * n as f64).ceil() as usize).clamp(1, n);
    Ok(sorted[idx - 1])
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Shared estimate/interval assembly once the point estimate and the
/// normalization scale are known.
fn assemble(
    psi: &[f64],
    tau: f64,
    point: f64,
    scale: f64,
    alpha: f64,
    cvals: &CriticalValues,
    mut warnings: Vec<String>,
) -> Result<InferenceResult> {
    let c_med = cvals.critical(0.5)?;
    let c_lo = cvals.critical(alpha / 2.0)?;
    let c_hi = cvals.critical(1.0 - alpha / 2.0)?;
    if c_med < c_lo || c_med > c_hi {
        warnings.push(format!(
            "median critical value {c_med} falls outside [{c_lo}, {c_hi}] \
             (simulation noise); reported as-is"
        ));
    }
    let median_unbiased = point - c_med / scale;
    let e1 = point - c_hi / scale;
    let e2 = point - c_lo / scale;
    let (ci_lo, ci_hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
    Ok(InferenceResult {
        psi: psi.to_vec(),
        tau,
        point,
        median_unbiased,
        ci_lo,
        ci_hi,
        alpha,
        method: format!("{}-{}", cvals.statistic.label(), cvals.method.label()),
        scale_used: scale,
        warnings,
    })
}

/// SN inference: critical values divided by the random scale A_T.
pub fn infer_sn(
    data: &Dataset,
    tau: f64,
    psi: &[f64],
    alpha: f64,
    cvals: &CriticalValues,
) -> Result<InferenceResult> {
    validate_alpha(alpha)?;
    if cvals.statistic != Statistic::Sn {
        return Err(Error::InvalidArgument(
            "SN inference needs SN-statistic critical values".into(),
        ));
    }
    let m = spacing_m(tau, data.len(), data.dim(), DEFAULT_SPACING_P)?;
    let fit_tau = fit_qr(data, tau)?;
    let fit_mtau = fit_qr_warm(data, m * tau, Some(&fit_tau.basis))?;
    let scale = sn_scale(data, &fit_tau, &fit_mtau)?;
    let point = linalg::dot(psi, &fit_tau.beta);
    assemble(psi, tau, point, scale, alpha, cvals, Vec::new())
}

/// CN inference: critical values divided by the deterministic scale A_hat_T.
pub fn infer_cn(
    data: &Dataset,
    tau: f64,
    psi: &[f64],
    alpha: f64,
    a_hat: f64,
    cvals: &CriticalValues,
) -> Result<InferenceResult> {
    validate_alpha(alpha)?;
    if cvals.statistic != Statistic::Cn {
        return Err(Error::InvalidArgument(
            "CN inference needs CN-statistic critical values".into(),
        ));
    }
    if !a_hat.is_finite() || a_hat == 0.0 {
        return Err(Error::DegenerateScale(format!(
            "canonical scale A_hat_T = {a_hat} is unusable"
        )));
    }
    let fit_tau = fit_qr(data, tau)?;
    let point = linalg::dot(psi, &fit_tau.beta);
    assemble(psi, tau, point, a_hat, alpha, cvals, Vec::new())
}

/// Inference on the conditional boundary coefficient psi'beta_e.
///
/// The point estimate is the most extreme feasible fit beta_hat(1/T); the
/// statistic A_T(beta_hat(1/T) - beta_e) follows the boundary limit law, so
/// `cvals` must carry boundary-law draws. When the estimated EV index is
/// positive the boundary is infinite under the model and the result carries a
/// warning instead of failing.
pub fn infer_boundary(
    data: &Dataset,
    psi: &[f64],
    alpha: f64,
    cvals: &CriticalValues,
    xi_hat: Option<f64>,
) -> Result<InferenceResult> {
    validate_alpha(alpha)?;
    if cvals.statistic != Statistic::Boundary {
        return Err(Error::InvalidArgument(
            "boundary inference needs boundary-law critical values".into(),
        ));
    }
    let t = data.len();
    let tau_e = 1.0 / t as f64;
    let m = spacing_m(tau_e, t, data.dim(), DEFAULT_SPACING_P)?;
    let fit_e = fit_qr(data, tau_e)?;
    let fit_me = fit_qr_warm(data, m * tau_e, Some(&fit_e.basis))?;
    let scale = sn_scale(data, &fit_e, &fit_me)?;
    let point = linalg::dot(psi, &fit_e.beta);
    let mut warnings = Vec::new();
    if let Some(xi) = xi_hat {
        if xi > 0.0 {
            warnings.push(format!(
                "estimated EV index {xi} > 0: the conditional boundary is \
                 infinite under the model; interpret with caution"
            ));
        }
    }
    assemble(psi, tau_e, point, scale, alpha, cvals, warnings)
}

/// Hall-Sheather-type bandwidth for the kernel density-at-quantile estimate.
/// Minimum number of non-interpolated residuals the normal-baseline kernel
/// window must contain; the bandwidth is floored to achieve it.
pub const NORMAL_MIN_KERNEL_POINTS: usize = 20;

pub fn hall_sheather_bandwidth(t: usize, tau: f64, alpha: f64) -> f64 {
    let n01 = Normal::new(0.0, 1.0).unwrap();
    let z = n01.inverse_cdf(1.0 - alpha / 2.0);
    let q = n01.inverse_cdf(tau);
    let phi = n01.pdf(q);
    (t as f64).powf(-1.0 / 3.0)
        * z.powf(2.0 / 3.0)
        * (1.5 * phi * phi / (2.0 * q * q + 1.0)).powf(1.0 / 3.0)
}

/// Normal-approximation baseline: symmetric interval from the kernel
/// sandwich se^2 = tau(1-tau) psi'J^-1 (X'X/T) J^-1 psi / T, with J the
/// Gaussian-kernel-weighted design second moment at the Hall-Sheather
/// bandwidth.
pub fn normal_ci(data: &Dataset, tau: f64, psi: &[f64], alpha: f64) -> Result<InferenceResult> {
    validate_alpha(alpha)?;
    let t = data.len();
    let d = data.dim();
    if t <= d {
        return Err(Error::InvalidArgument(format!(
            "normal baseline needs T > d (got T={t}, d={d})"
        )));
    }
    let fit = fit_qr(data, tau)?;
    // The Hall-Sheather rate is for a standardized variable; put the
    // bandwidth on the residual scale via the IQR-matched robust sigma.
    let mut res: Vec<f64> = (0..t)
        .map(|i| data.y()[i] - fit.predict(data.row(i)))
        .collect();
    res.sort_by(f64::total_cmp);
    let iqr = res[(3 * t) / 4] - res[t / 4];
    let spread = (iqr / 1.349).max(1e-12 * data.y_scale());
    let mut h = hall_sheather_bandwidth(t, tau, alpha) * spread;
    // At very extreme tau the rate-optimal bandwidth can leave the kernel
    // window empty (residuals are sparse near the fitted hyperplane), which
    // degenerates the density estimate. Floor the bandwidth so at least
    // NORMAL_MIN_KERNEL_POINTS non-interpolated residuals fall within it.
    {
        let mut abs_res: Vec<f64> = res.iter().map(|r| r.abs()).collect();
        abs_res.sort_by(f64::total_cmp);
        let idx = (d + NORMAL_MIN_KERNEL_POINTS - 1).min(abs_res.len() - 1);
        h = h.max(abs_res[idx]);
    }

    let n01 = Normal::new(0.0, 1.0).unwrap();
    let mut j = vec![0.0; d * d];
    let mut s = vec![0.0; d * d];
    // The fit interpolates exactly d observations; their mechanical zero
    // residuals would each add phi(0)/h to the density sum and bias it up,
    // so the kernel sum leaves the basis observations out.
    let mut in_basis = vec![false; t];
    for &i in &fit.basis {
        in_basis[i] = true;
    }
    for i in 0..t {
        let row = data.row(i);
        let u = data.y()[i] - fit.predict(row);
        if !in_basis[i] {
            let w = n01.pdf(u / h) / h;
            for a in 0..d {
                for b in 0..d {
                    j[a * d + b] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                s[a * d + b] += row[a] * row[b];
            }
        }
    }
    for v in &mut j {
        *v /= (t - d) as f64;
    }
    for v in &mut s {
        *v /= t as f64;
    }
    let j_inv = linalg::invert(&j, d, 1e-14).ok_or_else(|| {
        Error::Solver("singular kernel-weighted design in normal baseline".into())
    })?;
    // v = J^-1 psi; se^2 = tau(1-tau) v'S v / T
    let v = linalg::matvec(&j_inv, psi, d);
    let sv = linalg::matvec(&s, &v, d);
    let se2 = tau * (1.0 - tau) * linalg::dot(&v, &sv) / t as f64;
    if !(se2 > 0.0) || !se2.is_finite() {
        return Err(Error::Solver(format!(
            "normal baseline variance {se2} is not positive"
        )));
    }
    let se = se2.sqrt();
    let z = n01.inverse_cdf(1.0 - alpha / 2.0);
    let point = linalg::dot(psi, &fit.beta);
    Ok(InferenceResult {
        psi: psi.to_vec(),
        tau,
        point,
        median_unbiased: point,
        ci_lo: point - z * se,
        ci_hi: point + z * se,
        alpha,
        method: "normal".into(),
        scale_used: se,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recommendation {
    Extremal,
    Normal,
    Both,
}

impl Recommendation {
    pub fn label(self) -> &'static str {
        match self {
            Recommendation::Extremal => "extremal",
            Recommendation::Normal => "normal",
            Recommendation::Both => "both",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Advice {
    /// Dimension-adjusted order tau*T/d.
    pub order_dim: f64,
    /// Cell-adjusted order tau*T*s when a minimum indicator cell share is given.
    pub order_cell: Option<f64>,
    /// The binding (smallest applicable) order.
    pub effective_order: f64,
    pub threshold: f64,
    pub recommendation: Recommendation,
}

/// Flags quantile orders too extreme for the normal approximation.
///
/// The effective order is min(tau*T/d, tau*T*s); "extremal" below 75% of the
/// threshold, "normal" above 125%, "both" in between. The default threshold
/// is 20; 30 is the conservative preset for designs with small indicator
/// cells.
pub fn advise_method(
    tau: f64,
    t: usize,
    d: usize,
    min_cell_share: Option<f64>,
    threshold: Option<f64>,
) -> Result<Advice> {
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::InvalidArgument(format!("tau must lie in (0,1), got {tau}")));
    }
    let thr = threshold.unwrap_or(20.0);
    if !(15.0..=30.0).contains(&thr) {
        return Err(Error::InvalidArgument(format!(
            "advisor threshold must lie in [15, 30], got {thr}"
        )));
    }
    let tail_tau = tau.min(1.0 - tau);
    let k = tail_tau * t as f64;
    let order_dim = k / d as f64;
    let order_cell = match min_cell_share {
        Some(s) => {
            if !(0.0 < s && s <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "cell share must lie in (0,1], got {s}"
                )));
            }
            Some(k * s)
        }
        None => None,
    };
    let effective_order = match order_cell {
        Some(c) => order_dim.min(c),
        None => order_dim,
    };
    let recommendation = if effective_order < 0.75 * thr {
        Recommendation::Extremal
    } else if effective_order > 1.25 * thr {
        Recommendation::Normal
    } else {
        Recommendation::Both
    };
    Ok(Advice {
        order_dim,
        order_cell,
        effective_order,
        threshold: thr,
        recommendation,
    })
}
