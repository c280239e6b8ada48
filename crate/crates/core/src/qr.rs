//! Exact quantile regression: minimize the check-function objective
//! `sum_t rho_tau(y_t - x_t'beta)` with `rho_tau(u) = (tau - 1(u<0)) u`.
//!
//! The problem is cast as a hinge LP,
//! `rho_tau(y - x'b) = tau*(y - x'b) + max(0, x'b - y)`, and solved by the
//! shared vertex simplex, so solutions interpolate exactly d observations.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::solver::HingeProblem;

/// Relative residual tolerance: |r| below this times scale(y) counts as zero.
pub const RESIDUAL_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct QuantileFit {
    pub tau: f64,
    pub beta: Vec<f64>,
    /// Attained check objective.
    pub objective: f64,
    /// Observation indices interpolated by beta (zero residual), sorted.
    pub basis: Vec<usize>,
    /// Set when the solver detected a zero-reduced-cost edge (multiple optima).
    pub non_unique: bool,
}

impl QuantileFit {
    pub fn predict(&self, x_row: &[f64]) -> f64 {
        linalg::dot(&self.beta, x_row)
    }
}

/// Asymmetric absolute deviation loss.
pub fn check_loss(u: f64, tau: f64) -> Result<f64> {
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must lie in (0,1), got {tau}"
        )));
    }
    Ok(if u >= 0.0 { tau * u } else { (tau - 1.0) * u })
}

fn check_objective(data: &Dataset, beta: &[f64], tau: f64) -> f64 {
    (0..data.len())
        .map(|t| {
            let u = data.y()[t] - linalg::dot(data.row(t), beta);
            if u >= 0.0 {
                tau * u
            } else {
                (tau - 1.0) * u
            }
        })
        .sum()
}

fn validate_tau(data: &Dataset, tau: f64) -> Result<()> {
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must lie in (0,1), got {tau}"
        )));
    }
    let t = data.len() as f64;
    if tau * t < 1.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "tau*T = {} < 1: the requested quantile sits below the sample; \
             request tau >= 1/T explicitly",
            tau * t
        )));
    }
    if (1.0 - tau) * t < 1.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "(1-tau)*T = {} < 1: quantile above the sample",
            (1.0 - tau) * t
        )));
    }
    Ok(())
}

/// Global minimizer of the check objective at quantile index `tau`.
pub fn fit_qr(data: &Dataset, tau: f64) -> Result<QuantileFit> {
    fit_qr_warm(data, tau, None)
}

/// Same as [`fit_qr`] but reusing a previous basis as the starting vertex,
/// which shortens the pivot path when fitting nearby quantile indices.
pub fn fit_qr_warm(data: &Dataset, tau: f64, start: Option<&[usize]>) -> Result<QuantileFit> {
    validate_tau(data, tau)?;
    let d = data.dim();
    let xsum = {
        let mut s = vec![0.0; d];
        for t in 0..data.len() {
            for (j, v) in data.row(t).iter().enumerate() {
                s[j] += v;
            }
        }
        s
    };
    let cost: Vec<f64> = xsum.iter().map(|v| -tau * v).collect();
    let problem = HingeProblem {
        cost: &cost,
        rows: data.x_flat(),
        offsets: data.y(),
        d,
        zero_tol: RESIDUAL_REL_TOL * data.y_scale(),
    };
    let sol = problem.solve(start)?;
    let mut basis = sol.basis;
    basis.sort_unstable();
    let objective = check_objective(data, &sol.w, tau);
    Ok(QuantileFit {
        tau,
        beta: sol.w,
        objective,
        basis,
        non_unique: sol.non_unique,
    })
}

/// Exhaustive oracle over all d-element bases. Guarded to tiny instances.
pub fn brute_force_qr(data: &Dataset, tau: f64) -> Result<QuantileFit> {
    validate_tau(data, tau)?;
    let t_n = data.len();
    let d = data.dim();
    if t_n > 30 || d > 4 {
        return Err(Error::InvalidArgument(format!(
            "brute_force_qr is limited to T <= 30 and d <= 4 (got T={t_n}, d={d})"
        )));
    }
    let mut best: Option<QuantileFit> = None;
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        // try this basis
        let mut a = vec![0.0; d * d];
        let mut b = vec![0.0; d];
        for (i, &t) in subset.iter().enumerate() {
            a[i * d..(i + 1) * d].copy_from_slice(data.row(t));
            b[i] = data.y()[t];
        }
        if let Some(beta) = linalg::solve(&a, &b, d, 1e-12) {
            let obj = check_objective(data, &beta, tau);
            // strict improvement keeps the lexicographically smallest tie
            let better = match &best {
                None => true,
                Some(cur) => obj < cur.objective - 1e-12 * (1.0 + cur.objective.abs()),
            };
            if better {
                best = Some(QuantileFit {
                    tau,
                    beta,
                    objective: obj,
                    basis: subset.clone(),
                    non_unique: false,
                });
            }
        }
        // next d-combination in lexicographic order
        let mut i = d;
        loop {
            if i == 0 {
                return best.ok_or_else(|| {
                    Error::Solver("no invertible d-subset of observations".into())
                });
            }
            i -= 1;
            if subset[i] < t_n - (d - i) {
                subset[i] += 1;
                for j in i + 1..d {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng, t: usize, d: usize) -> Dataset {
        let mut y = Vec::with_capacity(t);
        let mut x = Vec::with_capacity(t * d);
        for _ in 0..t {
            x.push(1.0);
            for _ in 1..d {
                x.push(rng.random::<f64>() * 4.0 - 2.0);
            }
            y.push(rng.random::<f64>() * 10.0 - 5.0);
        }
        Dataset::new(y, x, d, (0..d).map(|j| format!("x{j}")).collect()).unwrap()
    }

    #[test]
    fn check_loss_values() {
        assert_eq!(check_loss(1.0, 0.3).unwrap(), 0.3);
        assert_eq!(check_loss(-1.0, 0.3).unwrap(), 0.7);
        assert_eq!(check_loss(0.0, 0.9).unwrap(), 0.0);
        assert!(check_loss(1.0, 0.0).is_err());
        assert!(check_loss(1.0, 1.0).is_err());
    }

    #[test]
    fn median_of_three() {
        let data = Dataset::from_sample(vec![1.0, 2.0, 3.0]).unwrap();
        let fit = fit_qr(&data, 0.5).unwrap();
        assert_eq!(fit.beta, vec![2.0]);
        assert!((fit.objective - 1.0).abs() < 1e-12);
        let bf = brute_force_qr(&data, 0.5).unwrap();
        assert_eq!(bf.beta, vec![2.0]);
    }

    #[test]
    fn exact_fit_recovers_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data = random_instance(&mut rng, 15, 3);
        let beta0 = [2.0, -1.0, 0.5];
        let exact = data.affine_y(0.0, &beta0).unwrap();
        for tau in [0.2, 0.5, 0.8] {
            let fit = fit_qr(&exact, tau).unwrap();
            assert!(fit.objective.abs() < 1e-10, "objective {}", fit.objective);
            for (a, b) in fit.beta.iter().zip(&beta0) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn brute_force_tie_break_prefers_lower_basis() {
        let data = Dataset::from_sample(vec![0.0, 1.0]).unwrap();
        let fit = brute_force_qr(&data, 0.5).unwrap();
        assert_eq!(fit.basis, vec![0]);
        assert_eq!(fit.beta, vec![0.0]);
        assert!((fit.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oracle_equivalence_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..60 {
            let t = 10 + (case % 16);
            let d = 1 + (case % 3);
            let data = random_instance(&mut rng, t, d);
            let tau = [0.1, 0.25, 0.5, 0.75, 0.9][case % 5];
            let fit = fit_qr(&data, tau).unwrap();
            let oracle = brute_force_qr(&data, tau).unwrap();
            assert!(
                (fit.objective - oracle.objective).abs() < 1e-8,
                "case {case}: simplex {} vs oracle {}",
                fit.objective,
                oracle.objective
            );
        }
    }

    #[test]
    fn subgradient_bracketing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in 0..20 {
            let t = 20 + (case % 6);
            let d = 1 + (case % 3);
            let data = random_instance(&mut rng, t, d);
            let tau = 0.3;
            let fit = fit_qr(&data, tau).unwrap();
            let tol = RESIDUAL_REL_TOL * data.y_scale();
            let mut neg = 0usize;
            let mut nonpos = 0usize;
            for i in 0..data.len() {
                let r = data.y()[i] - fit.predict(data.row(i));
                if r < -tol {
                    neg += 1;
                }
                if r <= tol {
                    nonpos += 1;
                }
            }
            let tt = tau * data.len() as f64;
            assert!(neg as f64 <= tt.ceil() + 1e-9, "neg={neg} tauT={tt}");
            assert!(nonpos as f64 >= tt - d as f64 - 1e-9, "nonpos={nonpos} tauT={tt}");
        }
    }

    #[test]
    fn shift_and_scale_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = random_instance(&mut rng, 25, 3);
        let fit = fit_qr(&data, 0.3).unwrap();

        let b = [1.5, -2.0, 0.25];
        let shifted = data.affine_y(1.0, &b).unwrap();
        let fit_s = fit_qr(&shifted, 0.3).unwrap();
        for j in 0..3 {
            assert!((fit_s.beta[j] - (fit.beta[j] + b[j])).abs() < 1e-9);
        }

        let scaled = data.affine_y(3.0, &[0.0; 3]).unwrap();
        let fit_c = fit_qr(&scaled, 0.3).unwrap();
        for j in 0..3 {
            assert!((fit_c.beta[j] - 3.0 * fit.beta[j]).abs() < 1e-9);
        }
        assert!((fit_c.objective - 3.0 * fit.objective).abs() < 1e-8);
    }

    #[test]
    fn local_optimality_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = random_instance(&mut rng, 30, 3);
        let fit = fit_qr(&data, 0.2).unwrap();
        let scale = data.y_scale();
        for j in 0..3 {
            for delta in [1e-3 * scale, -1e-3 * scale] {
                let mut beta = fit.beta.clone();
                beta[j] += delta;
                assert!(check_objective(&data, &beta, 0.2) >= fit.objective - 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_tau_refused() {
        let data = Dataset::from_sample(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(fit_qr(&data, 0.1).is_err()); // tau*T = 0.4 < 1
        assert!(fit_qr(&data, 0.25).is_ok()); // tau*T = 1 requested explicitly
    }
}
