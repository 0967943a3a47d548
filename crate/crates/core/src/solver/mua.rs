//! Multiplicative updates for plain nonnegative factorization, kept as a
//! baseline.

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

pub const DEFAULT_MUA_EPS: f64 = 1e-12;

/// One round of multiplicative updates, `V` first and then `U`:
///
/// ```text
/// V_ij <- V_ij (UᵀX)_ij / ((UᵀU V)_ij + eps)
/// U_ij <- U_ij (X Vᵀ)_ij / ((U V Vᵀ)_ij + eps)
/// ```
pub fn mua_step(
    x: &DenseMatrix,
    u: &DenseMatrix,
    v: &DenseMatrix,
    eps: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = x.shape();
    if u.rows() != m || v.cols() != n || u.cols() != v.rows() {
        return Err(Error::Dimension(format!(
            "X is {m}x{n}, U is {}x{}, V is {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    for (name, a) in [("X", x), ("U", u), ("V", v)] {
        if !a.is_nonnegative() {
            return Err(Error::InvalidInput(format!("{name} has negative entries")));
        }
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }

    let numer = u.tr_matmul(x)?;
    let denom = u.tr_matmul(u)?.matmul(v)?;
    let v_next = ratio_update(v, &numer, &denom, eps);

    let numer = x.matmul_tr(&v_next)?;
    let denom = u.matmul(&v_next.matmul_tr(&v_next)?)?;
    let u_next = ratio_update(u, &numer, &denom, eps);
    Ok((u_next, v_next))
}

fn ratio_update(
    a: &DenseMatrix,
    numer: &DenseMatrix,
    denom: &DenseMatrix,
    eps: f64,
) -> DenseMatrix {
    let data = a
        .data()
        .iter()
        .zip(numer.data())
        .zip(denom.data())
        .map(|((&a, &nu), &de)| {
            let d = de + eps;
            if d > 0.0 {
                a * nu / d
            } else {
                a
            }
        })
        .collect();
    DenseMatrix::from_raw(a.rows(), a.cols(), data)
}

/// `‖X - U V‖²_F`.
pub fn mua_objective(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<f64> {
    Ok(x.sub(&u.matmul(v)?)?.frobenius_norm_sq())
}
