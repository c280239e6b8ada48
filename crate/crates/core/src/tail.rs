//! Pickands-type estimation of the EV index, the tail slope vector, and the
//! extrapolated canonical scale.
//!
//! The index estimate uses the ratio of adjacent quantile-coefficient
//! spacings,
//!
//! ```text
//!     xi_hat = -(1/ln 2) * ln[ xbar'(b(4t) - b(2t)) / xbar'(b(2t) - b(t)) ]
//! ```
//!
//! which is exact on Pareto tails (plugging Q_U(tau) = c*tau^(-xi) into the
//! spacings gives a ratio of exactly 2^(-xi)). A compatibility flag exposes
//! the wide-spacing numerator b(4t) - b(t) instead.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::qr::{fit_qr_warm, QuantileFit};

/// |xi_hat| below this is clamped away from zero, preserving sign; the limit
/// laws are continuous in xi so the perturbation is negligible.
pub const XI_CLAMP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct TailEstimates {
    /// EV index estimate.
    pub xi: f64,
    /// Tail slope, normalized so that xbar'gamma = 1 exactly.
    pub gamma: Vec<f64>,
    /// Intermediate quantile index the fits were taken at.
    pub tau_t: f64,
    /// Extrapolated canonical scale 1/Q_U(1/n), present when requested.
    pub a_hat: Option<f64>,
}

/// Numerator convention for the Pickands ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpacingForm {
    /// Adjacent spacings b(4t)-b(2t) over b(2t)-b(t); exact on Pareto tails.
    #[default]
    Adjacent,
    /// Wide spacing b(4t)-b(t) over b(2t)-b(t) (compatibility only).
    Wide,
}

fn spacing(hi: &QuantileFit, lo: &QuantileFit, xbar: &[f64]) -> f64 {
    let diff: Vec<f64> = hi.beta.iter().zip(&lo.beta).map(|(a, b)| a - b).collect();
    dot(xbar, &diff)
}

/// EV index from three fits at tau, 2 tau, 4 tau sharing one dataset.
pub fn pickands_xi(
    fit_t: &QuantileFit,
    fit_2t: &QuantileFit,
    fit_4t: &QuantileFit,
    xbar: &[f64],
    form: SpacingForm,
) -> Result<f64> {
    let lower = spacing(fit_2t, fit_t, xbar);
    let upper = match form {
        SpacingForm::Adjacent => spacing(fit_4t, fit_2t, xbar),
        SpacingForm::Wide => spacing(fit_4t, fit_t, xbar),
    };
    if lower == 0.0 || upper == 0.0 {
        return Err(Error::DegenerateTail(
            "zero quantile spacing in Pickands ratio".into(),
        ));
    }
    let ratio = upper / lower;
    if ratio <= 0.0 {
        return Err(Error::DegenerateTail(format!(
            "sign-flipped quantile spacing (ratio {ratio})"
        )));
    }
    let xi = -ratio.ln() / std::f64::consts::LN_2;
    Ok(clamp_xi(xi, ratio))
}

/// Keep xi away from exactly zero, taking the sign from the spacing ratio
/// (ratio < 1 means shrinking spacings, i.e. xi > 0 is ratio < 1? no:
/// ratio = 2^(-xi), so ratio < 1 <=> xi > 0).
fn clamp_xi(xi: f64, ratio: f64) -> f64 {
    if xi.abs() >= XI_CLAMP {
        return xi;
    }
    if ratio < 1.0 {
        XI_CLAMP
    } else {
        -XI_CLAMP
    }
}

/// Tail slope gamma_hat = (b(2t) - b(t)) / xbar'(b(2t) - b(t)).
pub fn pickands_gamma(fit_t: &QuantileFit, fit_2t: &QuantileFit, xbar: &[f64]) -> Result<Vec<f64>> {
    let denom = spacing(fit_2t, fit_t, xbar);
    if denom == 0.0 {
        return Err(Error::DegenerateTail(
            "zero quantile spacing in tail slope".into(),
        ));
    }
    let mut gamma: Vec<f64> = fit_2t
        .beta
        .iter()
        .zip(&fit_t.beta)
        .map(|(a, b)| (a - b) / denom)
        .collect();
    // enforce the normalization exactly (guards accumulated rounding)
    let s = dot(xbar, &gamma);
    for g in &mut gamma {
        *g /= s;
    }
    Ok(gamma)
}

/// Extrapolated canonical scale A_hat_n = 1/Q_hat_U(1/n), using
/// Q_hat_U(tau_t) = xbar'(b(2t) - b(t)) / (2^(-xi) - 1) and the Pareto
/// extrapolation Q_U(1/n) = Q_U(tau_t) * (tau_t * n)^xi.
pub fn canonical_a_hat(
    fit_t: &QuantileFit,
    fit_2t: &QuantileFit,
    xbar: &[f64],
    xi_hat: f64,
    n: usize,
) -> Result<f64> {
    let tau_t = fit_t.tau;
    if tau_t * (n as f64) < 1.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "extrapolation target order tau_t*n = {} < 1",
            tau_t * n as f64
        )));
    }
    let sp = spacing(fit_2t, fit_t, xbar);
    if sp == 0.0 {
        return Err(Error::DegenerateTail(
            "zero quantile spacing in canonical scale".into(),
        ));
    }
    let num = (2.0f64).powf(-xi_hat) - 1.0;
    Ok(num / (sp * (tau_t * n as f64).powf(xi_hat)))
}

/// Default intermediate index: T^(-1/3) clamped to [(d+20)/T, 0.05], so that
/// 4 tau_T <= 0.2 and tau_T*T >= d+20.
pub fn default_intermediate_tau(t: usize, d: usize) -> Result<f64> {
    let lower = (d as f64 + 20.0) / t as f64;
    let upper = 0.05;
    if t as f64 <= 4.0 * (d as f64 + 20.0) || lower > upper {
        return Err(Error::Config(format!(
            "T = {t} is too small for the default intermediate index with d = {d}; \
             supply tau_T explicitly"
        )));
    }
    let raw = (t as f64).powf(-1.0 / 3.0);
    Ok(raw.clamp(lower, upper))
}

/// Convenience: run the three intermediate-order fits and assemble tail
/// estimates, optionally extrapolating the canonical scale to order n.
pub fn estimate_tail(
    data: &Dataset,
    tau_t: f64,
    form: SpacingForm,
    a_hat_n: Option<usize>,
) -> Result<TailEstimates> {
    if 4.0 * tau_t >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "need 4*tau_T < 1, got tau_T = {tau_t}"
        )));
    }
    let fit_t = fit_qr_warm(data, tau_t, None)?;
    let fit_2t = fit_qr_warm(data, 2.0 * tau_t, Some(&fit_t.basis))?;
    let fit_4t = fit_qr_warm(data, 4.0 * tau_t, Some(&fit_2t.basis))?;
    let xbar = data.xbar();
    let xi = pickands_xi(&fit_t, &fit_2t, &fit_4t, &xbar, form)?;
    let gamma = pickands_gamma(&fit_t, &fit_2t, &xbar)?;
    let a_hat = match a_hat_n {
        Some(n) => Some(canonical_a_hat(&fit_t, &fit_2t, &xbar, xi, n)?),
        None => None,
    };
    Ok(TailEstimates {
        xi,
        gamma,
        tau_t,
        a_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Synthetic fits following beta(tau) = beta_e + gamma * c * tau^(-xi).
    fn pareto_fit(tau: f64, beta_e: &[f64], gamma: &[f64], c: f64, xi: f64) -> QuantileFit {
        let q = c * tau.powf(-xi);
        QuantileFit {
            tau,
            beta: beta_e.iter().zip(gamma).map(|(b, g)| b + g * q).collect(),
            objective: 0.0,
            basis: vec![],
            non_unique: false,
        }
    }

    #[test]
    fn exact_pareto_fixed_point() {
        let beta_e = [1.0, -0.5];
        let gamma = [0.7, 0.4];
        let xbar = [1.0, 0.75];
        for xi in [-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0, 0.5] {
            for c in [1.0, -2.5] {
                let tau = 0.01;
                let f1 = pareto_fit(tau, &beta_e, &gamma, c, xi);
                let f2 = pareto_fit(2.0 * tau, &beta_e, &gamma, c, xi);
                let f4 = pareto_fit(4.0 * tau, &beta_e, &gamma, c, xi);
                let est = pickands_xi(&f1, &f2, &f4, &xbar, SpacingForm::Adjacent).unwrap();
                assert!((est - xi).abs() < 1e-12, "xi={xi} c={c} est={est}");
            }
        }
    }

    #[test]
    fn exponential_tail_gives_minus_one() {
        // Q_U(tau) = tau corresponds to xi = -1
        let f = |tau: f64| pareto_fit(tau, &[0.0], &[1.0], 1.0, -1.0);
        let est = pickands_xi(&f(0.02), &f(0.04), &f(0.08), &[1.0], SpacingForm::Adjacent).unwrap();
        assert!((est + 1.0).abs() < 1e-12);
    }

    #[test]
    fn wide_form_is_biased_on_pareto() {
        let xi = 0.5;
        let f = |tau: f64| pareto_fit(tau, &[0.0], &[1.0], 1.0, xi);
        let wide = pickands_xi(&f(0.01), &f(0.02), &f(0.04), &[1.0], SpacingForm::Wide).unwrap();
        // wide numerator gives -(1/ln2) ln(1 + 2^(-xi)) != xi
        let expected = -(1.0 + 2f64.powf(-xi)).ln() / std::f64::consts::LN_2;
        assert!((wide - expected).abs() < 1e-12);
        assert!((wide - xi).abs() > 0.1);
    }

    #[test]
    fn gamma_normalization_exact() {
        let f1 = pareto_fit(0.01, &[0.0, 1.0, 2.0], &[0.5, 0.3, 0.9], 1.0, 0.25);
        let f2 = pareto_fit(0.02, &[0.0, 1.0, 2.0], &[0.5, 0.3, 0.9], 1.0, 0.25);
        let xbar = [1.0, 0.2, -0.4];
        let g = pickands_gamma(&f1, &f2, &xbar).unwrap();
        assert_eq!(dot(&xbar, &g), 1.0);
    }

    #[test]
    fn gamma_intercept_only() {
        let f1 = pareto_fit(0.01, &[0.0], &[1.0], 3.0, -0.5);
        let f2 = pareto_fit(0.02, &[0.0], &[1.0], 3.0, -0.5);
        let g = pickands_gamma(&f1, &f2, &[1.0]).unwrap();
        assert_eq!(g, vec![1.0]);
    }

    #[test]
    fn a_hat_exact_on_pareto() {
        // Q_U(tau) = tau^(-xi) with xi = 0.5, tau_T = 0.05, n = T = 400:
        // A_T = 1/Q_U(1/T) = T^(-0.5)
        let xi = 0.5;
        let f1 = pareto_fit(0.05, &[0.0], &[1.0], 1.0, xi);
        let f2 = pareto_fit(0.10, &[0.0], &[1.0], 1.0, xi);
        let n = 400usize;
        let a = canonical_a_hat(&f1, &f2, &[1.0], xi, n).unwrap();
        assert!((a - (n as f64).powf(-0.5)).abs() < 1e-12);

        // uniform lower tail Q_U(tau) = tau (xi = -1): A_n = n
        let g1 = pareto_fit(0.05, &[0.0], &[1.0], 1.0, -1.0);
        let g2 = pareto_fit(0.10, &[0.0], &[1.0], 1.0, -1.0);
        let a = canonical_a_hat(&g1, &g2, &[1.0], -1.0, 50).unwrap();
        assert!((a - 50.0).abs() < 1e-9);
    }

    #[test]
    fn a_hat_monotone_in_n() {
        let f1 = pareto_fit(0.05, &[0.0], &[1.0], 1.0, 0.5);
        let f2 = pareto_fit(0.10, &[0.0], &[1.0], 1.0, 0.5);
        let a1 = canonical_a_hat(&f1, &f2, &[1.0], 0.5, 100).unwrap();
        let a2 = canonical_a_hat(&f1, &f2, &[1.0], 0.5, 1000).unwrap();
        assert!(a2 < a1, "xi>0: decreasing in n");
        let g1 = pareto_fit(0.05, &[0.0], &[1.0], 1.0, -0.5);
        let g2 = pareto_fit(0.10, &[0.0], &[1.0], 1.0, -0.5);
        let b1 = canonical_a_hat(&g1, &g2, &[1.0], -0.5, 100).unwrap();
        let b2 = canonical_a_hat(&g1, &g2, &[1.0], -0.5, 1000).unwrap();
        assert!(b2 > b1, "xi<0: increasing in n");
    }

    #[test]
    fn default_tau_rule() {
        assert!((default_intermediate_tau(1000, 7).unwrap() - 0.05).abs() < 1e-12);
        assert!((default_intermediate_tau(125000, 7).unwrap() - 0.02).abs() < 1e-12);
        let t600 = default_intermediate_tau(600, 7).unwrap();
        assert!((t600 - 0.05).abs() < 1e-12);
        assert!(t600 * 600.0 >= 27.0);
        assert!(default_intermediate_tau(100, 7).is_err());
    }
}
