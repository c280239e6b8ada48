//! Critical values for extremal quantile statistics by recentered
//! subsampling.
//!
//! Each subsample of size b is refit at the adjusted quantile index tau_b
//! (chosen so the subsample sees the same extreme order tau_b*b = tau_T*T)
//! and the statistic is recentered at the FULL-sample estimate beta_hat(tau_b)
//! rather than the subsample mean, which keeps the procedure valid in the
//! extremal regime:
//!
//! ```text
//!     V_i = A_{i,b} * psi'(beta_hat_{i,b}(tau_b) - beta_hat(tau_b))
//!     A_{i,b} = sqrt(tau_b*b) / xbar_{i,b}'(beta_hat_{i,b}(m*tau_b) - beta_hat_{i,b}(tau_b))
//! ```
//!
//! The CN variant replaces the random subsample scale A_{i,b} with the
//! deterministic extrapolated scale A_hat_b evaluated at n = b.
//!
//! Because every subsample overlaps the full sample used for the recentering
//! estimate, the deviations are shrunk by roughly sqrt(1 - b/T) in finite
//! samples; draws carry the standard (1 - b/T)^{-1/2} overlap correction,
//! which vanishes as b/T -> 0.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::inference::{spacing_m, DEFAULT_SPACING_P, SCALE_REL_TOL};
use crate::linalg::dot;
use crate::qr::{fit_qr, fit_qr_warm};
use crate::tail::{default_intermediate_tau, estimate_tail, SpacingForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Uniformly random size-b subsets (exchangeable data).
    Iid,
    /// Contiguous blocks {i, ..., i+b-1} (serially dependent data).
    Timeseries,
}

impl SamplingMode {
    pub fn label(self) -> &'static str {
        match self {
            SamplingMode::Iid => "iid",
            SamplingMode::Timeseries => "timeseries",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubsampleDraws {
    pub b: usize,
    /// Requested number of subsamples.
    pub b_t: usize,
    pub tau_b: f64,
    /// One value per non-degenerate subsample (length b_t - skipped).
    pub draws: Vec<f64>,
    pub skipped: usize,
    pub mode: SamplingMode,
}

/// Subsample quantile index: preserves the extreme order tau_T*T when that
/// order is extremal, capped at 0.2; central indices pass through unchanged.
pub fn tau_b_rule(tau_t: f64, t: usize, b: usize) -> f64 {
    if tau_t >= 0.2 {
        tau_t
    } else {
        (tau_t * t as f64 / b as f64).min(0.2)
    }
}

/// Default subsample size: ceil(T^0.7) bounded to [5d, T/2].
pub fn default_subsample_size(t: usize, d: usize) -> usize {
    let raw = (t as f64).powf(0.7).ceil() as usize;
    raw.clamp(5 * d, (t / 2).max(5 * d).min(t.saturating_sub(1)).max(1))
}

/// B_T index sets of size b.
pub fn make_subsample_indices(
    t: usize,
    b: usize,
    b_t: usize,
    mode: SamplingMode,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<usize>>> {
    if b == 0 || b >= t {
        return Err(Error::InvalidArgument(format!(
            "subsample size b must satisfy 0 < b < T (b = {b}, T = {t})"
        )));
    }
    if b_t == 0 {
        return Err(Error::InvalidArgument("need at least one subsample".into()));
    }
    match mode {
        SamplingMode::Iid => Ok((0..b_t)
            .map(|_| {
                let mut idx = rand::seq::index::sample(rng, t, b).into_vec();
                idx.sort_unstable();
                idx
            })
            .collect()),
        SamplingMode::Timeseries => {
            let n_blocks = t - b + 1;
            if b_t > n_blocks {
                return Err(Error::InvalidArgument(format!(
                    "timeseries mode allows at most T - b + 1 = {n_blocks} blocks, \
                     requested {b_t}"
                )));
            }
            let starts: Vec<usize> = if b_t == n_blocks {
                (0..n_blocks).collect()
            } else {
                let mut s = rand::seq::index::sample(rng, n_blocks, b_t).into_vec();
                s.sort_unstable();
                s
            };
            Ok(starts.iter().map(|&s| (s..s + b).collect()).collect())
        }
    }
}

/// Per-subsample statistic worker shared by the SN and CN variants; `scale`
/// decides the normalization given the two subsample fits.
fn draws_from_indices<F>(
    data: &Dataset,
    indices: &[Vec<usize>],
    tau_b: f64,
    m: f64,
    center: &[f64],
    psi: &[f64],
    scale: F,
) -> Result<(Vec<f64>, usize)>
where
    F: Fn(&Dataset, &crate::qr::QuantileFit, &crate::qr::QuantileFit) -> Result<Option<f64>>
        + Sync,
{
    let results: Vec<Result<Option<f64>>> = indices
        .par_iter()
        .map(|idx| {
            let sub = data.subset(idx)?;
            let fit_b = fit_qr(&sub, tau_b)?;
            let fit_mb = fit_qr_warm(&sub, m * tau_b, Some(&fit_b.basis))?;
            match scale(&sub, &fit_b, &fit_mb)? {
                None => Ok(None),
                Some(a) => {
                    let dev: f64 = psi
                        .iter()
                        .zip(fit_b.beta.iter().zip(center))
                        .map(|(p, (est, c))| p * (est - c))
                        .sum();
                    Ok(Some(a * dev))
                }
            }
        })
        .collect();
    // finite-sample correction for the overlap between each subsample and
    // the full sample behind `center` (see module docs)
    let b = indices.first().map_or(0, Vec::len);
    let correction = 1.0 / (1.0 - b as f64 / data.len() as f64).sqrt();
    let mut draws = Vec::with_capacity(indices.len());
    let mut skipped = 0usize;
    for r in results {
        match r? {
            Some(v) => draws.push(correction * v),
            None => skipped += 1,
        }
    }
    Ok((draws, skipped))
}

fn common_setup(
    data: &Dataset,
    tau_t: f64,
    b: usize,
    b_t: usize,
    psi: &[f64],
    p: usize,
    mode: SamplingMode,
    seed: u64,
) -> Result<(f64, f64, Vec<f64>, Vec<Vec<usize>>)> {
    let t = data.len();
    let d = data.dim();
    let tau_b = tau_b_rule(tau_t, t, b);
    // one spacing multiplier from the full-sample order, applied at both levels
    let m = spacing_m(tau_t, t, d, p)?;
    if tau_b * b as f64 * (m - 1.0) <= d as f64 {
        return Err(Error::InvalidArgument(format!(
            "subsample order tau_b*b*(m-1) = {} must exceed d = {d}",
            tau_b * b as f64 * (m - 1.0)
        )));
    }
    if m * tau_b >= 1.0 {
        return Err(Error::QuantileRange(format!(
            "subsample spacing quantile m*tau_b = {} >= 1",
            m * tau_b
        )));
    }
    if psi.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidArgument("psi must be a nonzero vector".into()));
    }
    // recenter at the full-sample estimate at the subsample index
    let center = fit_qr(data, tau_b)?.beta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = make_subsample_indices(t, b, b_t, mode, &mut rng)?;
    Ok((tau_b, m, center, indices))
}

fn check_skip_fraction(skipped: usize, b_t: usize) -> Result<()> {
    if skipped * 10 > b_t {
        return Err(Error::UnstableSubsampling(format!(
            "{skipped} of {b_t} subsamples had degenerate normalization scales"
        )));
    }
    Ok(())
}

/// SN critical-value draws: each subsample is normalized by its own random
/// scale A_{i,b}.
pub fn sn_subsample_draws(
    data: &Dataset,
    tau_t: f64,
    b: usize,
    b_t: usize,
    psi: &[f64],
    p: usize,
    mode: SamplingMode,
    seed: u64,
) -> Result<SubsampleDraws> {
    let (tau_b, m, center, indices) = common_setup(data, tau_t, b, b_t, psi, p, mode, seed)?;
    let tol = SCALE_REL_TOL * data.y_scale();
    let (draws, skipped) = draws_from_indices(
        data,
        &indices,
        tau_b,
        m,
        &center,
        psi,
        move |sub, fit_b, fit_mb| {
            let xbar = sub.xbar();
            let diff: Vec<f64> = fit_mb
                .beta
                .iter()
                .zip(&fit_b.beta)
                .map(|(a, c)| a - c)
                .collect();
            let denom = dot(&xbar, &diff);
            if denom.abs() < tol {
                return Ok(None);
            }
            Ok(Some((tau_b * sub.len() as f64).sqrt() / denom))
        },
    )?;
    check_skip_fraction(skipped, b_t)?;
    Ok(SubsampleDraws {
        b,
        b_t,
        tau_b,
        draws,
        skipped,
        mode,
    })
}

/// CN critical-value draws: every subsample shares the deterministic
/// extrapolated scale A_hat_b (evaluated at n = b, not n = T), so no
/// subsample is ever skipped for a degenerate denominator.
pub fn cn_subsample_draws(
    data: &Dataset,
    tau_t: f64,
    b: usize,
    b_t: usize,
    psi: &[f64],
    mode: SamplingMode,
    seed: u64,
) -> Result<SubsampleDraws> {
    let (tau_b, m, center, indices) =
        common_setup(data, tau_t, b, b_t, psi, DEFAULT_SPACING_P, mode, seed)?;
    // tail estimation on the full sample at a safe intermediate index
    let pick_tau = match default_intermediate_tau(data.len(), data.dim()) {
        Ok(v) => v,
        Err(_) if 4.0 * tau_t < 1.0 => tau_t,
        Err(e) => return Err(e),
    };
    let tail = estimate_tail(data, pick_tau, SpacingForm::Adjacent, Some(b))?;
    let a_hat_b = tail.a_hat.expect("requested extrapolated scale");
    let (draws, skipped) =
        draws_from_indices(data, &indices, tau_b, m, &center, psi, move |_, _, _| {
            Ok(Some(a_hat_b))
        })?;
    debug_assert_eq!(skipped, 0);
    Ok(SubsampleDraws {
        b,
        b_t,
        tau_b,
        draws,
        skipped,
        mode,
    })
}
