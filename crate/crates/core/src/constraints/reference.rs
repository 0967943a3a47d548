//! Brute-force maximizer of `⟨v, q⟩` over a column set, used to check the
//! closed forms. It enumerates supports instead of sorting or thresholding.

use super::VSet;
use crate::error::{Error, Result};
use crate::numerics::{dot, norm2};

pub const MAX_REFERENCE_DIM: usize = 10;

/// Enumerates every support of admissible size together with every basis
/// vector, and returns the best feasible unit-norm candidate (first one wins
/// on ties).
pub fn reference_projection(q: &[f64], v_set: VSet, s: usize) -> Result<Vec<f64>> {
    let r = q.len();
    if r == 0 || r > MAX_REFERENCE_DIM {
        return Err(Error::InvalidParameter(format!(
            "reference projection supports 1..={MAX_REFERENCE_DIM} dimensions, got {r}"
        )));
    }
    let max_support = if v_set.is_sparse() {
        if s == 0 || s > r {
            return Err(Error::InvalidParameter(format!(
                "sparsity {s} outside 1..={r}"
            )));
        }
        s
    } else {
        r
    };
    let nonneg = v_set.is_nonnegative();

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for i in 0..r {
        let mut e = vec![0.0; r];
        e[i] = 1.0;
        candidates.push(e.clone());
        if !nonneg {
            e[i] = -1.0;
            candidates.push(e);
        }
    }
    for mask in 1u32..(1 << r) {
        if mask.count_ones() as usize > max_support {
            continue;
        }
        let support: Vec<usize> = (0..r).filter(|i| mask & (1 << i) != 0).collect();
        if nonneg && support.iter().any(|&i| q[i] <= 0.0) {
            continue;
        }
        let mut c = vec![0.0; r];
        for &i in &support {
            c[i] = q[i];
        }
        let n = norm2(&c);
        if n == 0.0 {
            continue;
        }
        c.iter_mut().for_each(|x| *x /= n);
        candidates.push(c);
    }

    let mut best = candidates.swap_remove(0);
    let mut best_val = dot(&best, q);
    for c in candidates {
        let val = dot(&c, q);
        if val > best_val {
            best_val = val;
            best = c;
        }
    }
    Ok(best)
}
