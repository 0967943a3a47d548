//! Thin singular value decomposition by one-sided Jacobi rotations.
//!
//! The solver only ever decomposes tall `m x r` matrices with small `r`, for
//! which Hestenes' method is accurate and cheap: rotate column pairs until
//! every pair is orthogonal, then read off norms and directions.

use super::matrix::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `m = y * diag(sigma) * zᵀ` with `k = min(rows, cols)` components.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub y: DenseMatrix,
    pub sigma: Vec<f64>,
    pub z: DenseMatrix,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut ys = self.y.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            for a in ys.column_mut(j) {
                *a *= s;
            }
        }
        ys.matmul_tr(&self.z)
            .expect("thin svd factors have matching shapes")
    }
}

/// Thin SVD with a fixed sign convention: the largest-magnitude entry of
/// every left singular vector is positive (ties go to the lowest row).
pub fn thin_svd(m: &DenseMatrix) -> Result<ThinSvd> {
    if m.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("thin_svd: non-finite entry".into()));
    }
    let mut out = if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.transpose());
        ThinSvd {
            y: t.z,
            sigma: t.sigma,
            z: t.y,
        }
    };
    fix_signs(&mut out);
    Ok(out)
}

fn jacobi_tall(m: &DenseMatrix) -> ThinSvd {
    let (rows, k) = m.shape();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(k);
    let tol = f64::EPSILON * rows.max(1) as f64;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(a.column(p), a.column(p));
                let beta = dot(a.column(q), a.column(q));
                let gamma = dot(a.column(p), a.column(q));
                if gamma == 0.0 || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(a.data_mut(), rows, p, q, c, s);
                rotate(v.data_mut(), k, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..k).map(|j| norm2(a.column(j))).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // stable: equal singular values keep their column order
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut y = a.select_columns(&order);
    let z = v.select_columns(&order);

    let cutoff = sigma.first().copied().unwrap_or(0.0) * f64::EPSILON * rows.max(k) as f64;
    let mut deficient = Vec::new();
    for (j, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            for e in y.column_mut(j) {
                *e /= s;
            }
        } else {
            deficient.push(j);
        }
    }
    if !deficient.is_empty() {
        complete_basis(&mut y, &deficient);
    }
    ThinSvd { y, sigma, z }
}

/// Applies the plane rotation to columns `p` and `q` of a column-major buffer.
fn rotate(data: &mut [f64], rows: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = data.split_at_mut(q * rows);
    let cp = &mut lo[p * rows..(p + 1) * rows];
    let cq = &mut hi[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Replaces the listed columns of `y` by unit vectors orthogonal to every
/// other column, drawn from the standard basis by Gram-Schmidt.
fn complete_basis(y: &mut DenseMatrix, deficient: &[usize]) {
    let (rows, k) = y.shape();
    let mut settled: Vec<usize> = (0..k).filter(|j| !deficient.contains(j)).collect();
    let mut basis = 0;
    for &j in deficient {
        loop {
            assert!(
                basis < rows,
                "ran out of basis vectors while completing svd"
            );
            let mut cand = vec![0.0; rows];
            cand[basis] = 1.0;
            basis += 1;
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for &s in &settled {
                    let col = y.column(s);
                    let proj = dot(&cand, col);
                    for (c, &e) in cand.iter_mut().zip(col) {
                        *c -= proj * e;
                    }
                }
            }
            let n = norm2(&cand);
            if n > 1e-8 {
                for (dst, c) in y.column_mut(j).iter_mut().zip(&cand) {
                    *dst = c / n;
                }
                settled.push(j);
                break;
            }
        }
    }
}

fn fix_signs(svd: &mut ThinSvd) {
    for j in 0..svd.sigma.len() {
        let col = svd.y.column(j);
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            for e in svd.y.column_mut(j) {
                *e = -*e;
            }
            for e in svd.z.column_mut(j) {
                *e = -*e;
            }
        }
    }
}
