//! Vertex solver for piecewise-linear convex objectives of the form
//!
//! ```text
//!     F(w) = c'w + sum_t max(0, a_t'w - b_t)
//! ```
//!
//! over w in R^d. Both the check-function objective of quantile regression
//! and the truncated point-process argmin problem reduce to this form, so one
//! solver backs both.
//!
//! The algorithm is a primal simplex over bases of d hyperplanes
//! `a_t'w = b_t`: at each vertex it evaluates the exact one-sided directional
//! derivative along the 2d basis edges and takes a maximal (long) step along
//! the steepest descending edge, walking past breakpoints until the
//! directional derivative turns nonnegative. When the optimum is a flat edge,
//! a final zero-cost pivot moves to the lower vertex so that tie-breaking is
//! independent of the pivoting path.

use crate::error::{Error, Result};
use crate::linalg;

/// Threshold on edge derivatives (dimensionless) below which an edge counts
/// as flat, i.e. the optimum is non-unique.
const FLAT_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct HingeSolution {
    /// Minimizer (a vertex).
    pub w: Vec<f64>,
    /// Indices of the d interpolated rows.
    pub basis: Vec<usize>,
    /// Objective value at the minimizer.
    pub objective: f64,
    /// True when a zero-derivative edge was detected at the optimum.
    pub non_unique: bool,
    pub iterations: usize,
}

pub struct HingeProblem<'a> {
    /// Linear cost, length d.
    pub cost: &'a [f64],
    /// Row-major T x d hinge slopes.
    pub rows: &'a [f64],
    /// Hinge offsets, length T.
    pub offsets: &'a [f64],
    pub d: usize,
    /// Residuals with |a_t'w - b_t| below this count as zero.
    pub zero_tol: f64,
}

impl<'a> HingeProblem<'a> {
    pub fn n_rows(&self) -> usize {
        self.offsets.len()
    }

    fn row(&self, t: usize) -> &[f64] {
        &self.rows[t * self.d..(t + 1) * self.d]
    }

    pub fn objective_at(&self, w: &[f64]) -> f64 {
        let mut f = linalg::dot(self.cost, w);
        for t in 0..self.n_rows() {
            let r = linalg::dot(self.row(t), w) - self.offsets[t];
            if r > 0.0 {
                f += r;
            }
        }
        f
    }

    /// Greedy selection of d linearly independent rows for the initial basis.
    fn initial_basis(&self) -> Result<Vec<usize>> {
        let d = self.d;
        let t_n = self.n_rows();
        let mut basis = Vec::with_capacity(d);
        // row-echelon accumulation of chosen rows
        let mut ech: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut pivots: Vec<usize> = Vec::with_capacity(d);
        for t in 0..t_n {
            if basis.len() == d {
                break;
            }
            let mut v = self.row(t).to_vec();
            for (e, &p) in ech.iter().zip(&pivots) {
                let f = v[p] / e[p];
                if f != 0.0 {
                    for j in 0..d {
                        v[j] -= f * e[j];
                    }
                }
            }
            let scale = self.row(t).iter().map(|x| x.abs()).fold(1.0f64, f64::max);
            if let Some((p, _)) = v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > 1e-10 * scale)
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            {
                pivots.push(p);
                ech.push(v);
                basis.push(t);
            }
        }
        if basis.len() < d {
            return Err(Error::Solver(
                "degenerate design: fewer than d linearly independent rows".into(),
            ));
        }
        Ok(basis)
    }

    /// Minimize F. `start` optionally warm-starts from a previous basis; it is
    /// silently discarded when singular.
    pub fn solve(&self, start: Option<&[usize]>) -> Result<HingeSolution> {
        let d = self.d;
        let t_n = self.n_rows();
        if t_n < d {
            return Err(Error::Solver("fewer rows than dimensions".into()));
        }
        let mut basis = match start {
            Some(h) if h.len() == d && h.iter().all(|&t| t < t_n) => h.to_vec(),
            _ => self.initial_basis()?,
        };

        let max_iter = 100 + 20 * d + 4 * t_n;
        let mut iterations = 0;
        let mut residuals = vec![0.0; t_n];
        let mut w = vec![0.0; d];
        let mut flat_pivots_left = 2 * d + 2;
        let mut non_unique = false;

        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::Solver(format!(
                    "no convergence within {max_iter} iterations"
                )));
            }

            let binv = match self.basis_inverse(&basis) {
                Some(b) => b,
                None => {
                    // stale warm start; restart cold once
                    basis = self.initial_basis()?;
                    match self.basis_inverse(&basis) {
                        Some(b) => b,
                        None => return Err(Error::Solver("singular basis".into())),
                    }
                }
            };
            let bvals: Vec<f64> = basis.iter().map(|&t| self.offsets[t]).collect();
            // w solves A(h) w = b(h); binv is column-accessible as binv[i*d+j]
            for i in 0..d {
                let mut s = 0.0;
                for j in 0..d {
                    s += binv[i * d + j] * bvals[j];
                }
                w[i] = s;
            }
            for t in 0..t_n {
                residuals[t] = linalg::dot(self.row(t), &w) - self.offsets[t];
            }
            for &t in &basis {
                residuals[t] = 0.0;
            }

            // Edge derivatives. Direction for coordinate j is sigma * binv_col_j.
            // gamma_j = c'd_j + sum_{r_t > 0} a_t'd_j; degenerate (zero-residual,
            // nonbasic) rows contribute max(0, a_t'(sigma d_j)) per side.
            let mut best: Option<(usize, f64, f64)> = None; // (j, sigma, deriv)
            let mut any_flat = false;
            for j in 0..d {
                let dir: Vec<f64> = (0..d).map(|i| binv[i * d + j]).collect();
                let mut gamma = linalg::dot(self.cost, &dir);
                let mut deg_plus = 0.0; // degenerate contribution along +dir
                let mut deg_minus = 0.0; // along -dir
                for t in 0..t_n {
                    let r = residuals[t];
                    let g = linalg::dot(self.row(t), &dir);
                    if r > self.zero_tol {
                        gamma += g;
                    } else if r > -self.zero_tol && !basis.contains(&t) {
                        if g > 0.0 {
                            deg_plus += g;
                        } else {
                            deg_minus -= g;
                        }
                    }
                }
                // own hinge activates on the + side (a_{h_j}'d_j = 1)
                let d_plus = gamma + 1.0 + deg_plus;
                let d_minus = -gamma + deg_minus;
                if d_plus < -FLAT_TOL && best.map_or(true, |b| d_plus < b.2) {
                    best = Some((j, 1.0, d_plus));
                }
                if d_minus < -FLAT_TOL && best.map_or(true, |b| d_minus < b.2) {
                    best = Some((j, -1.0, d_minus));
                }
                if d_plus.abs() <= FLAT_TOL || d_minus.abs() <= FLAT_TOL {
                    any_flat = true;
                }
            }

            let (j, sigma, deriv) = match best {
                Some(b) => b,
                None => {
                    // Optimal. If an edge is exactly flat, take zero-cost pivots
                    // toward the lower vertex so ties resolve path-independently.
                    if any_flat {
                        non_unique = true;
                        if flat_pivots_left > 0 {
                            if let Some((j, sigma)) =
                                self.flat_descent_edge(&basis, &binv, &residuals)
                            {
                                flat_pivots_left -= 1;
                                if self
                                    .take_step(&mut basis, &binv, &residuals, j, sigma)
                                    .is_some()
                                {
                                    continue;
                                }
                            }
                        }
                    }
                    let objective = self.objective_at(&w);
                    return Ok(HingeSolution {
                        w,
                        basis,
                        objective,
                        non_unique,
                        iterations,
                    });
                }
            };
            debug_assert!(deriv < 0.0);
            if self.take_step(&mut basis, &binv, &residuals, j, sigma).is_none() {
                return Err(Error::Solver(
                    "objective unbounded along an edge (too few effective hinge rows)".into(),
                ));
            }
        }
    }

    fn basis_inverse(&self, basis: &[usize]) -> Option<Vec<f64>> {
        let d = self.d;
        let mut a = vec![0.0; d * d];
        let mut scale = 1.0f64;
        for (i, &t) in basis.iter().enumerate() {
            let r = self.row(t);
            a[i * d..(i + 1) * d].copy_from_slice(r);
            scale = scale.max(r.iter().map(|x| x.abs()).fold(0.0, f64::max));
        }
        // basis matrix has rows a_t; we need columns of A(h)^{-1}, i.e. the
        // inverse of the matrix whose ROWS are the basis rows, transposed so
        // that d_j = column j. invert() returns row-major inv of A; column j of
        // inv(A) is inv[i*d + j].
        linalg::invert(&a, d, 1e-13 * scale)
    }

    /// Find a flat descending edge at an optimal vertex: an edge with exactly
    /// zero derivative along -d_j (so moving there costs nothing) that has a
    /// finite breakpoint. Used only for deterministic tie-breaking.
    fn flat_descent_edge(
        &self,
        basis: &[usize],
        binv: &[f64],
        residuals: &[f64],
    ) -> Option<(usize, f64)> {
        let d = self.d;
        for j in 0..d {
            let dir: Vec<f64> = (0..d).map(|i| binv[i * d + j]).collect();
            let mut gamma = linalg::dot(self.cost, &dir);
            for (t, &r) in residuals.iter().enumerate() {
                if r > self.zero_tol {
                    gamma += linalg::dot(self.row(t), &dir);
                }
            }
            // derivative along -d_j is -gamma
            if gamma.abs() <= FLAT_TOL {
                // make sure there is a breakpoint to land on
                if self.first_breakpoint(basis, residuals, &dir, -1.0).is_some() {
                    return Some((j, -1.0));
                }
            }
        }
        None
    }

    fn first_breakpoint(
        &self,
        basis: &[usize],
        residuals: &[f64],
        dir: &[f64],
        sigma: f64,
    ) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for t in 0..self.n_rows() {
            if basis.contains(&t) {
                continue;
            }
            let r = residuals[t];
            if r.abs() <= self.zero_tol {
                continue;
            }
            let g = sigma * linalg::dot(self.row(t), dir);
            if r * g < 0.0 {
                let s = -r / g;
                if best.map_or(true, |(_, bs)| s < bs) {
                    best = Some((t, s));
                }
            }
        }
        best
    }

    /// Long-step ratio test along sigma * d_j: walk breakpoints until the
    /// cumulative derivative turns nonnegative, then swap that row into the
    /// basis. Returns None when the edge is unbounded below.
    fn take_step(
        &self,
        basis: &mut [usize],
        binv: &[f64],
        residuals: &[f64],
        j: usize,
        sigma: f64,
    ) -> Option<()> {
        let d = self.d;
        let dir: Vec<f64> = (0..d).map(|i| sigma * binv[i * d + j]).collect();
        // initial derivative along dir
        let mut deriv = linalg::dot(self.cost, &dir);
        let t_n = self.n_rows();
        let mut breaks: Vec<(f64, f64, usize)> = Vec::new(); // (s, |g|, t)
        for t in 0..t_n {
            if basis.contains(&t) {
                continue;
            }
            let r = residuals[t];
            let g = linalg::dot(self.row(t), &dir);
            if r > self.zero_tol {
                deriv += g;
            } else if r >= -self.zero_tol {
                if g > 0.0 {
                    deriv += g;
                }
                continue;
            }
            if r * g < 0.0 {
                breaks.push((-r / g, g.abs(), t));
            }
        }
        // own hinge activates when moving along +d_j
        if sigma > 0.0 {
            deriv += 1.0;
        }
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, gabs, t) in breaks {
            deriv += gabs;
            if deriv >= -FLAT_TOL {
                basis[j] = t;
                return Some(());
            }
        }
        None
    }
}
