//! Dataset generation, CSV and IDX ingestion, preprocessing, and result
//! serialization.

mod csv;
mod idx;
mod output;
mod synth;

pub use csv::{
    format_csv_matrix, parse_csv_matrix, read_csv_matrix, read_labels, write_csv_matrix,
    write_labels,
};
pub use idx::{
    parse_idx_images, parse_idx_labels, read_idx_images, read_idx_images_with, read_idx_labels,
    IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use output::{
    format_trace, read_factors, read_meta, write_factors, write_trace, FactorMeta, META_FILE,
    TRACE_FILE, TRACE_HEADER, U_FILE, V_HAT_FILE,
};
pub use synth::{generate_two_angle_clusters, WEDGE_NOISE};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Samples as columns of `x`; label `-1` marks an unlabeled column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DenseMatrix,
    pub labels: Vec<i64>,
}

impl LabeledDataset {
    pub fn new(x: DenseMatrix, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != x.cols() {
            return Err(Error::Dimension(format!(
                "{} labels for {} samples",
                labels.len(),
                x.cols()
            )));
        }
        Ok(Self { x, labels })
    }
}

/// Columns whose label equals `label`, in their original order.
pub fn filter_by_label(ds: &LabeledDataset, label: i64) -> DenseMatrix {
    let keep: Vec<usize> = ds
        .labels
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == label)
        .map(|(j, _)| j)
        .collect();
    ds.x.select_columns(&keep)
}

/// Subtracts the mean column from every column. Returns the centered matrix
/// and the removed mean.
pub fn center_columns(x: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let (m, n) = x.shape();
    if n == 0 {
        return Err(Error::InvalidInput(
            "cannot center a matrix without columns".into(),
        ));
    }
    let mut mean = vec![0.0; m];
    for col in x.columns() {
        for (acc, &v) in mean.iter_mut().zip(col) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n as f64);
    let mut out = x.clone();
    for j in 0..n {
        for (v, mu) in out.column_mut(j).iter_mut().zip(&mean) {
            *v -= mu;
        }
    }
    Ok((out, mean))
}
