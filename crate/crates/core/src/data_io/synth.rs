use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Off-plane jitter bound.
pub const WEDGE_NOISE: f64 = 0.02;

/// Two clusters in ℝ³ that differ by direction rather than position.
///
/// Cluster 0 (first `n/2` columns) lies in the wedge between the line `x = z`
/// and the z axis inside the xz-plane, cluster 1 in the matching wedge of the
/// yz-plane:
///
/// ```text
/// cluster 0: ρ (sin α, 0, cos α) + (0, η, 0)
/// cluster 1: ρ (0, sin α, cos α) + (η, 0, 0)
/// ```
///
/// with `α ~ U(0, π/4)`, `ρ ~ U(0.5, 1.5)` and `η ~ U(0, 0.02)`.
pub fn generate_two_angle_clusters(n: usize, seed: u64) -> Result<LabeledDataset> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "point count must be even and at least 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(3 * n);
    let mut labels = Vec::with_capacity(n);
    for j in 0..n {
        let cluster = if j < n / 2 { 0 } else { 1 };
        let alpha = rng.random_range(0.0..FRAC_PI_4);
        let rho = rng.random_range(0.5..1.5);
        let eta = rng.random_range(0.0..WEDGE_NOISE);
        let (s, c) = alpha.sin_cos();
        if cluster == 0 {
            data.extend_from_slice(&[rho * s, eta, rho * c]);
        } else {
            data.extend_from_slice(&[eta, rho * s, rho * c]);
        }
        labels.push(cluster);
    }
    Ok(LabeledDataset {
        x: DenseMatrix::new(3, n, data)?,
        labels,
    })
}
