use alloc::vec::Vec;

use crate::{Error, Result};

/// Central difference `(f(t+h) − f(t−h)) / 2h`.
pub fn numeric_derivative<F>(f: F, t: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Vec<f64>,
{
    try_numeric_derivative(|s| Ok(f(s)), t, h)
}

/// Central difference of a fallible function.
pub fn try_numeric_derivative<F>(f: F, t: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep(h));
    }
    let plus = f(t + h)?;
    let minus = f(t - h)?;
    if plus.len() != minus.len() {
        return Err(Error::DimensionMismatch {
            expected: plus.len(),
            found: minus.len(),
        });
    }
    let d: Vec<f64> = plus
        .iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    if d.iter().all(|x| x.is_finite()) {
        Ok(d)
    } else {
        Err(Error::NonFinite("numeric_derivative"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_has_zero_derivative() {
        let d = numeric_derivative(|_| vec![3.0, -1.0], 0.7, 1e-5).unwrap();
        assert_eq!(d, vec![0.0, 0.0]);
    }

    #[test]
    fn polynomial() {
        let d = numeric_derivative(|t| vec![t * t, t], 1.0, 1e-5).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-8);
        assert!((d[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn non_finite_is_an_error() {
        let r = numeric_derivative(
            |t| vec![if t > 1.0 { f64::INFINITY } else { 0.0 }],
            1.0,
            1e-3,
        );
        assert_eq!(r, Err(Error::NonFinite("numeric_derivative")));
    }
}
