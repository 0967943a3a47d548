//! Dense linear-algebra kernels used by the solver.

mod matrix;
mod power;
mod svd;

pub use matrix::DenseMatrix;
pub use power::{spectral_norm_psd, DEFAULT_POWER_TOL};
pub use svd::{thin_svd, ThinSvd};

pub(crate) use matrix::{dot, norm2};

use crate::error::{Error, Result};

/// `Σ a_ij b_ij`, summed in column-major order.
pub fn frobenius_inner(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "frobenius_inner: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(dot(a.data(), b.data()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inner_product_examples() {
        let i2 = DenseMatrix::identity(2);
        assert_eq!(frobenius_inner(&i2, &i2).unwrap(), 2.0);
        assert_eq!(
            frobenius_inner(&i2, &DenseMatrix::zeros(2, 2)).unwrap(),
            0.0
        );
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]).unwrap();
        assert_eq!(frobenius_inner(&a, &b).unwrap(), 70.0);
        assert!(matches!(
            frobenius_inner(&a, &DenseMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    proptest! {
        #[test]
        fn self_inner_is_squared_norm(data in prop::collection::vec(-1e3f64..1e3, 12)) {
            let a = DenseMatrix::new(3, 4, data).unwrap();
            let s = frobenius_inner(&a, &a).unwrap();
            prop_assert!(s >= 0.0);
            prop_assert_eq!(s, a.frobenius_norm_sq());
        }
    }
}
