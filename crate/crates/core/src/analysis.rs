//! Baselines and diagnostics: k-means, permutation-matched clustering
//! accuracy, pairwise angles and the sphere distance identity, and per-column
//! top coefficients.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{dot, norm2, DenseMatrix};

/// Largest number of distinct labels [`clustering_accuracy`] will search over.
pub const MAX_ACCURACY_CLUSTERS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub assignments: Vec<usize>,
    /// `m x k`, one centroid per column.
    pub centroids: DenseMatrix,
    pub inertia: f64,
    /// Inertia after every centroid update.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &DenseMatrix) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.columns().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn inertia(x: &DenseMatrix, centroids: &DenseMatrix, assignments: &[usize]) -> f64 {
    x.columns()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, centroids.column(a)))
        .sum()
}

/// Recomputes centroids as cluster means. An empty cluster takes over the
/// point farthest from its current centroid.
fn update_centroids(
    x: &DenseMatrix,
    k: usize,
    assignments: &mut [usize],
    centroids: &mut DenseMatrix,
) {
    let m = x.rows();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (j, p) in x.columns().enumerate() {
            if counts[assignments[j]] < 2 {
                continue;
            }
            let d = sq_dist(p, centroids.column(assignments[j]));
            if d > far_d {
                far_d = d;
                far = Some(j);
            }
        }
        match far {
            Some(j) => assignments[j] = empty,
            // fewer distinct points than clusters; cannot happen when k <= n
            None => break,
        }
    }

    let mut sums = DenseMatrix::zeros(m, k);
    let mut counts = vec![0usize; k];
    for (p, &a) in x.columns().zip(assignments.iter()) {
        counts[a] += 1;
        for (s, &v) in sums.column_mut(a).iter_mut().zip(p) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        for (dst, s) in centroids.column_mut(c).iter_mut().zip(sums.column(c)) {
            *dst = s / counts[c] as f64;
        }
    }
}

/// Lloyd's algorithm on the columns of `x`, initialized from `k` distinct
/// random columns.
pub fn kmeans(x: &DenseMatrix, k: usize, seed: u64, max_iters: usize) -> Result<ClusteringResult> {
    let n = x.cols();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k={k} must lie in 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = sample(&mut rng, n, k).into_vec();
    picks.sort_unstable();
    let mut centroids = x.select_columns(&picks);
    let mut assignments: Vec<usize> = x.columns().map(|p| nearest(p, &centroids)).collect();
    let mut history = Vec::new();

    for _ in 0..max_iters.max(1) {
        update_centroids(x, k, &mut assignments, &mut centroids);
        history.push(inertia(x, &centroids, &assignments));
        let next: Vec<usize> = x.columns().map(|p| nearest(p, &centroids)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    let inertia = inertia(x, &centroids, &assignments);
    Ok(ClusteringResult {
        assignments,
        centroids,
        inertia,
        inertia_history: history,
    })
}

/// Fraction of samples labeled correctly under the best one-to-one matching
/// of predicted clusters to true classes.
pub fn clustering_accuracy(pred: &[i64], truth: &[i64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("no samples to score".into()));
    }
    let index = |labels: &[i64]| -> BTreeMap<i64, usize> {
        let mut map = BTreeMap::new();
        for &l in labels {
            let next = map.len();
            map.entry(l).or_insert(next);
        }
        map
    };
    let p_ids = index(pred);
    let t_ids = index(truth);
    let k = p_ids.len().max(t_ids.len());
    if k > MAX_ACCURACY_CLUSTERS {
        return Err(Error::InvalidParameter(format!(
            "{k} clusters exceed the permutation search limit of {MAX_ACCURACY_CLUSTERS}"
        )));
    }
    let mut table = vec![vec![0usize; k]; k];
    for (p, t) in pred.iter().zip(truth) {
        table[p_ids[p]][t_ids[t]] += 1;
    }

    fn search(row: usize, used: u32, table: &[Vec<usize>]) -> usize {
        if row == table.len() {
            return 0;
        }
        (0..table.len())
            .filter(|c| used & (1 << c) == 0)
            .map(|c| table[row][c] + search(row + 1, used | (1 << c), table))
            .max()
            .unwrap_or(0)
    }
    Ok(search(0, 0, &table) as f64 / pred.len() as f64)
}

/// Symmetric matrix of angles between columns, in `[0, π]`.
pub fn pairwise_angles(v: &DenseMatrix) -> Result<DenseMatrix> {
    let n = v.cols();
    let norms: Vec<f64> = v.columns().map(norm2).collect();
    if let Some(j) = norms.iter().position(|&s| s == 0.0) {
        return Err(Error::InvalidInput(format!("column {j} is zero")));
    }
    let mut out = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let cos = dot(v.column(i), v.column(j)) / (norms[i] * norms[j]);
            let theta = cos.clamp(-1.0, 1.0).acos();
            out.set(i, j, theta);
            out.set(j, i, theta);
        }
    }
    Ok(out)
}

/// For columns sharing a norm `l`, checks `‖v_i - v_j‖² = 2l² - 2l² cos θ_ij`
/// over all pairs and returns the largest absolute residual.
pub fn verify_angle_distance_relation(v: &DenseMatrix) -> Result<f64> {
    let norms: Vec<f64> = v.columns().map(norm2).collect();
    let Some(&l) = norms.first() else {
        return Ok(0.0);
    };
    if let Some(j) = norms.iter().position(|&s| (s - l).abs() > 1e-9) {
        return Err(Error::InvalidInput(format!(
            "column {j} has norm {} but column 0 has norm {l}",
            norms[j]
        )));
    }
    let angles = pairwise_angles(v)?;
    let l2 = l * l;
    let mut worst = 0.0f64;
    for j in 0..v.cols() {
        for i in (j + 1)..v.cols() {
            let dist = sq_dist(v.column(i), v.column(j));
            let predicted = 2.0 * l2 - 2.0 * l2 * angles.get(i, j).cos();
            worst = worst.max((dist - predicted).abs());
        }
    }
    Ok(worst)
}

/// Per column, the 0-based row indices of the `top` largest-magnitude
/// coefficients, largest first, ties by lowest index.
pub fn top_components(v: &DenseMatrix, top: usize) -> Result<Vec<Vec<usize>>> {
    if top > v.rows() {
        return Err(Error::InvalidParameter(format!(
            "top={top} exceeds the {} available components",
            v.rows()
        )));
    }
    Ok(v.columns()
        .map(|col| {
            let mut idx: Vec<usize> = (0..col.len()).collect();
            idx.sort_by(|&a, &b| col[b].abs().total_cmp(&col[a].abs()).then(a.cmp(&b)));
            idx.truncate(top);
            idx
        })
        .collect())
}

/// Two-way split of 2-D components by the anti-diagonal: label 1 when the
/// second coordinate exceeds the first, else 0.
pub fn anti_diagonal_split(v: &DenseMatrix) -> Result<Vec<i64>> {
    if v.rows() < 2 {
        return Err(Error::Dimension(format!(
            "anti-diagonal split needs at least 2 rows, got {}",
            v.rows()
        )));
    }
    Ok(v.columns().map(|c| i64::from(c[1] > c[0])).collect())
}
