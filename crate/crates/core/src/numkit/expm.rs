use super::{Matrix, Scalar, MAX_EXP_DIM};
use crate::{Error, Result};

const TRUNCATION: f64 = 1e-18;
const MAX_TERMS: usize = 64;

/// `e^M` by scaling and squaring around a truncated Taylor series.
///
/// The argument is halved until its 1-norm is at most ½, the series is summed
/// until a term drops below `1e-18` of the partial sum, and the result is
/// squared back.
pub fn mat_exp<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() > MAX_EXP_DIM {
        return Err(Error::TooLarge {
            dim: m.rows(),
            max: MAX_EXP_DIM,
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("mat_exp input"));
    }
    let n = m.rows();
    let norm = m.norm_1();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m.map(|x| x.scale(scale));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=MAX_TERMS {
        term = (&term * &a).map(|x| x.scale(1.0 / k as f64));
        sum = &sum + &term;
        if term.norm_1() <= TRUNCATION * sum.norm_1() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    if !sum.is_finite() {
        return Err(Error::NonFinite("mat_exp result"));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{ComplexMatrix, RealMatrix};
    use crate::Complex64;

    fn series(m: &RealMatrix, terms: usize) -> RealMatrix {
        let mut sum = RealMatrix::identity(m.rows());
        let mut term = RealMatrix::identity(m.rows());
        for k in 1..terms {
            term = (&term * m).scaled(1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        let e = mat_exp(&RealMatrix::zeros(2, 2)).unwrap();
        assert_eq!(e, RealMatrix::identity(2));
    }

    #[test]
    fn diagonal() {
        let e = mat_exp(&RealMatrix::from_diag(&[1.0, -1.0])).unwrap();
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn swap_matrix_against_series() {
        let m = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let e = mat_exp(&m).unwrap();
        let oracle = series(&m, 30);
        let exact =
            RealMatrix::from_rows(&[[1f64.cosh(), 1f64.sinh()], [1f64.sinh(), 1f64.cosh()]]);
        assert!(e.max_abs_diff(&oracle) < 1e-12 * oracle.max_abs());
        assert!(e.max_abs_diff(&exact) < 1e-14);
    }

    #[test]
    fn relative_error_against_series_dim4() {
        let m = RealMatrix::from_rows(&[
            [0.3, -0.2, 0.1, 0.0],
            [0.5, -0.4, 0.0, 0.2],
            [0.0, 0.1, 0.2, -0.3],
            [0.2, 0.0, 0.4, -0.1],
        ]);
        let e = mat_exp(&m).unwrap();
        let oracle = series(&m, 40);
        assert!(e.max_abs_diff(&oracle) <= 1e-12 * oracle.max_abs());
    }

    #[test]
    fn complex_rotation() {
        // exp(-iθσx) = cosθ I − i sinθ σx
        let th = 2.5;
        let m = ComplexMatrix::from_rows(&[
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -th)],
            [Complex64::new(0.0, -th), Complex64::new(0.0, 0.0)],
        ]);
        let e = mat_exp(&m).unwrap();
        assert!((e[(0, 0)] - Complex64::new(th.cos(), 0.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - Complex64::new(0.0, -th.sin())).norm() < 1e-13);
    }

    #[test]
    fn errors() {
        assert_eq!(
            mat_exp(&RealMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        );
        let mut m = RealMatrix::zeros(2, 2);
        m[(0, 1)] = f64::INFINITY;
        assert!(matches!(mat_exp(&m), Err(Error::NonFinite(_))));
        assert!(matches!(
            mat_exp(&RealMatrix::zeros(17, 17)),
            Err(Error::TooLarge { .. })
        ));
    }
}
