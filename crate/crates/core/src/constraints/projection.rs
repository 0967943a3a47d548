//! Closed-form maximizers of `⟨v, q⟩` over the unit-radius column sets.
//!
//! Every routine writes into `v`, which holds the previous column on entry.
//! When `‖q‖ ≤ DEGENERATE_Q` every feasible point maximizes the linear term, so
//! `v` is left untouched.

use crate::error::{Error, Result};
use crate::numerics::norm2;

/// Threshold below which `q` is treated as zero.
pub const DEGENERATE_Q: f64 = 1e-12;

fn is_degenerate(q: &[f64]) -> bool {
    norm2(q) <= DEGENERATE_Q
}

fn check_sparsity(len: usize, s: usize) -> Result<()> {
    if s == 0 || s > len {
        return Err(Error::InvalidParameter(format!(
            "sparsity {s} outside 1..={len}"
        )));
    }
    Ok(())
}

/// Writes `q / ‖q‖` into `v`, dividing by a norm computed on the written entries.
fn normalize_into(v: &mut [f64]) {
    let n = norm2(v);
    v.iter_mut().for_each(|x| *x /= n);
}

fn basis_at_argmax(q: &[f64], v: &mut [f64]) {
    let mut best = 0;
    for (i, &x) in q.iter().enumerate() {
        if x > q[best] {
            best = i;
        }
    }
    v.iter_mut().for_each(|x| *x = 0.0);
    v[best] = 1.0;
}

/// Indices of the `s` largest keys, ties broken by lowest index.
fn top_indices(keys: impl Iterator<Item = (usize, f64)>, s: usize) -> Vec<usize> {
    let mut idx: Vec<(usize, f64)> = keys.collect();
    idx.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    idx.truncate(s);
    idx.into_iter().map(|(i, _)| i).collect()
}

/// Unit sphere.
pub fn project_sphere(q: &[f64], v: &mut [f64]) {
    assert_eq!(q.len(), v.len());
    if is_degenerate(q) {
        return;
    }
    v.copy_from_slice(q);
    normalize_into(v);
}

/// Nonnegative part of the unit sphere.
///
/// With some `q_i > 0` the optimum is the normalized positive part. Otherwise
/// it is the basis vector at the least negative entry of `q`.
pub fn project_nonneg_sphere(q: &[f64], v: &mut [f64]) {
    assert_eq!(q.len(), v.len());
    if is_degenerate(q) {
        return;
    }
    if q.iter().any(|&x| x > 0.0) {
        for (vi, &qi) in v.iter_mut().zip(q) {
            *vi = if qi > 0.0 { qi } else { 0.0 };
        }
        normalize_into(v);
    } else {
        basis_at_argmax(q, v);
    }
}

/// Unit sphere restricted to at most `s` nonzeros: keep the `s` entries of
/// largest magnitude.
pub fn project_sparse_sphere(q: &[f64], s: usize, v: &mut [f64]) -> Result<()> {
    assert_eq!(q.len(), v.len());
    check_sparsity(q.len(), s)?;
    if is_degenerate(q) {
        return Ok(());
    }
    let keep = top_indices(q.iter().map(|x| x.abs()).enumerate(), s);
    v.iter_mut().for_each(|x| *x = 0.0);
    for i in keep {
        v[i] = q[i];
    }
    normalize_into(v);
    Ok(())
}

/// Nonnegative, `s`-sparse unit vectors.
pub fn project_nonneg_sparse_sphere(q: &[f64], s: usize, v: &mut [f64]) -> Result<()> {
    assert_eq!(q.len(), v.len());
    check_sparsity(q.len(), s)?;
    if is_degenerate(q) {
        return Ok(());
    }
    if q.iter().any(|&x| x > 0.0) {
        let keep = top_indices(q.iter().copied().enumerate().filter(|&(_, x)| x > 0.0), s);
        v.iter_mut().for_each(|x| *x = 0.0);
        for i in keep {
            v[i] = q[i];
        }
        normalize_into(v);
    } else {
        basis_at_argmax(q, v);
    }
    Ok(())
}
