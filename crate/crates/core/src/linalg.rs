//! Small dense linear algebra helpers for d x d systems (d is the number of
//! regressors, typically single digits).

use crate::error::{Error, Result};

/// Invert a d x d matrix given in row-major order. Gaussian elimination with
/// partial pivoting.
pub fn invert(a: &[f64], d: usize, tol: f64) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), d * d);
    let mut m = a.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for col in 0..d {
        let mut piv = col;
        let mut best = m[col * d + col].abs();
        for row in col + 1..d {
            let v = m[row * d + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best <= tol {
            return None;
        }
        if piv != col {
            for j in 0..d {
                m.swap(col * d + j, piv * d + j);
                inv.swap(col * d + j, piv * d + j);
            }
        }
        let diag = m[col * d + col];
        for j in 0..d {
            m[col * d + j] /= diag;
            inv[col * d + j] /= diag;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let f = m[row * d + col];
            if f != 0.0 {
                for j in 0..d {
                    m[row * d + j] -= f * m[col * d + j];
                    inv[row * d + j] -= f * inv[col * d + j];
                }
            }
        }
    }
    Some(inv)
}

/// Solve A x = b for a d x d row-major A.
pub fn solve(a: &[f64], b: &[f64], d: usize, tol: f64) -> Option<Vec<f64>> {
    let inv = invert(a, d, tol)?;
    Some(matvec(&inv, b, d))
}

/// y = A b for row-major d x d A.
pub fn matvec(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut s = 0.0;
        for j in 0..d {
            s += a[i * d + j] * b[j];
        }
        y[i] = s;
    }
    y
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Check that the d x d Gram matrix of the row-major T x d matrix has full
/// rank, by elimination on X'X.
pub fn gram_full_rank(x: &[f64], t: usize, d: usize) -> Result<()> {
    let mut gram = vec![0.0; d * d];
    for row in 0..t {
        let r = &x[row * d..(row + 1) * d];
        for i in 0..d {
            for j in 0..d {
                gram[i * d + j] += r[i] * r[j];
            }
        }
    }
    // scale-relative tolerance on the pivots
    let scale = gram
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    if invert(&gram, d, 1e-12 * scale).is_none() {
        return Err(Error::Data(
            "design matrix is rank deficient (X'X not invertible)".into(),
        ));
    }
    Ok(())
}
