use super::matrix::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_POWER_TOL: f64 = 1e-8;
const MAX_POWER_ITERS: usize = 10_000;
/// Applied to the last estimate when the iteration stalls; the result is used
/// as a lower bound on a step size, so overshooting is harmless.
const STALL_INFLATION: f64 = 1.01;

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration.
///
/// Iteration starts from the normalized all-ones vector. A second pass from an
/// alternating ramp covers the case where the all-ones vector happens to be
/// orthogonal to the dominant eigenvector (e.g. `[[1, -1], [-1, 1]]`); the
/// larger Rayleigh quotient wins.
pub fn spectral_norm_psd(a: &DenseMatrix, tol: f64) -> Result<f64> {
    let (n, cols) = a.shape();
    if n != cols {
        return Err(Error::Dimension(format!(
            "spectral_norm_psd needs a square matrix, got {n}x{cols}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let scale = a.max_abs();
    if scale == 0.0 || n == 0 {
        return Ok(0.0);
    }
    for j in 0..n {
        for i in (j + 1)..n {
            if (a.get(i, j) - a.get(j, i)).abs() > 1e-10 * scale.max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    let ones = vec![1.0; n];
    let ramp: Vec<f64> = (0..n)
        .map(|i| {
            let mag = 1.0 + i as f64 / n as f64;
            if i % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let first = power_from(a, ones, tol);
    if n == 1 {
        return Ok(first);
    }
    Ok(first.max(power_from(a, ramp, tol)))
}

fn power_from(a: &DenseMatrix, mut v: Vec<f64>, tol: f64) -> f64 {
    let n = v.len();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..MAX_POWER_ITERS {
        apply(a, &v, &mut w);
        let rayleigh = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (rayleigh - estimate).abs() <= tol * rayleigh.abs() {
            return rayleigh;
        }
        estimate = rayleigh;
    }
    estimate * STALL_INFLATION
}

fn apply(a: &DenseMatrix, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (j, &vj) in v.iter().enumerate() {
        for (o, &aij) in out.iter_mut().zip(a.column(j)) {
            *o += aij * vj;
        }
    }
}
