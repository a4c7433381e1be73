use alloc::vec::Vec;

use crate::numkit::RealMatrix;
use crate::{Error, Result};

/// A real rate as a function of time.
#[derive(Clone, Debug, PartialEq)]
pub enum Rate {
    Constant(f64),
    /// `value + slope·t`.
    Affine {
        value: f64,
        slope: f64,
    },
    /// Piecewise-linear through `(t, value)` nodes, held flat outside them.
    Table(Vec<(f64, f64)>),
    /// `Σ c_k·r_k(t)`.
    Sum(Vec<(f64, Rate)>),
}

impl Rate {
    /// Validated piecewise-linear table: nonempty, finite, strictly increasing
    /// times.
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTable("no nodes"));
        }
        if !points.iter().all(|(t, v)| t.is_finite() && v.is_finite()) {
            return Err(Error::InvalidTable("non-finite node"));
        }
        if !points.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::InvalidTable("times must increase strictly"));
        }
        Ok(Rate::Table(points))
    }

    /// `Σ c_k·r_k`, folded to a single constant when every term is one.
    pub fn combination(terms: Vec<(f64, Rate)>) -> Self {
        let terms: Vec<(f64, Rate)> = terms.into_iter().filter(|(c, _)| *c != 0.0).collect();
        if terms.iter().all(|(_, r)| matches!(r, Rate::Constant(_))) {
            return Rate::Constant(terms.iter().map(|(c, r)| c * r.at(0.0)).sum());
        }
        if let [(c, r)] = terms.as_slice() {
            return r.scaled(*c);
        }
        Rate::Sum(terms)
    }

    /// `self + other`.
    pub fn plus(&self, other: &Rate) -> Self {
        Rate::combination(alloc::vec![(1.0, self.clone()), (1.0, other.clone())])
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Rate::Constant(v) => *v,
            Rate::Affine { value, slope } => value + slope * t,
            Rate::Table(pts) => {
                let (first, last) = (pts[0], pts[pts.len() - 1]);
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let k = pts.partition_point(|p| p.0 <= t);
                let (a, b) = (pts[k - 1], pts[k]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
            Rate::Sum(terms) => terms.iter().map(|(c, r)| c * r.at(t)).sum(),
        }
    }

    /// Exact `∫_{t0}^{t1} rate dt`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        match self {
            Rate::Constant(v) => v * (t1 - t0),
            Rate::Affine { value, slope } => value * (t1 - t0) + 0.5 * slope * (t1 * t1 - t0 * t0),
            Rate::Table(_) => self.antiderivative(t1) - self.antiderivative(t0),
            Rate::Sum(terms) => terms.iter().map(|(c, r)| c * r.integral(t0, t1)).sum(),
        }
    }

    /// Antiderivative of a table rate, anchored at its first node.
    fn antiderivative(&self, t: f64) -> f64 {
        let Rate::Table(pts) = self else {
            unreachable!()
        };
        let first = pts[0];
        if t <= first.0 {
            return first.1 * (t - first.0);
        }
        let mut acc = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if t <= b.0 {
                let vt = a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0);
                return acc + 0.5 * (a.1 + vt) * (t - a.0);
            }
            acc += 0.5 * (a.1 + b.1) * (b.0 - a.0);
        }
        let last = pts[pts.len() - 1];
        acc + last.1 * (t - last.0)
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Rate::Constant(_) => true,
            Rate::Affine { slope, .. } => *slope == 0.0,
            Rate::Table(pts) => pts.iter().all(|p| p.1 == pts[0].1),
            Rate::Sum(terms) => terms.iter().all(|(_, r)| r.is_constant()),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Rate::Constant(v) => v.is_finite(),
            Rate::Affine { value, slope } => value.is_finite() && slope.is_finite(),
            Rate::Table(pts) => pts.iter().all(|(t, v)| t.is_finite() && v.is_finite()),
            Rate::Sum(terms) => terms.iter().all(|(c, r)| c.is_finite() && r.is_finite()),
        }
    }

    /// `k·rate(t)`.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Rate::Constant(v) => Rate::Constant(k * v),
            Rate::Affine { value, slope } => Rate::Affine {
                value: k * value,
                slope: k * slope,
            },
            Rate::Table(pts) => Rate::Table(pts.iter().map(|&(t, v)| (t, k * v)).collect()),
            Rate::Sum(terms) => Rate::Sum(terms.iter().map(|(c, r)| (k * c, r.clone())).collect()),
        }
    }
}

impl From<f64> for Rate {
    fn from(v: f64) -> Self {
        Rate::Constant(v)
    }
}

impl Default for Rate {
    fn default() -> Self {
        Rate::Constant(0.0)
    }
}

/// Square matrix of rates, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    n: usize,
    entries: Vec<Rate>,
}

impl RateMatrix {
    pub fn new(n: usize, entries: Vec<Rate>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    pub fn constant(m: &RealMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        Ok(Self {
            n: m.rows(),
            entries: m.as_slice().iter().map(|&v| Rate::Constant(v)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rate {
        &self.entries[i * self.n + j]
    }

    pub fn at(&self, t: f64) -> RealMatrix {
        RealMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).at(t))
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(Rate::is_constant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn table_interpolates_and_holds() {
        let r = Rate::table(vec![(0.0, 0.0), (1.0, 1.0), (3.0, -1.0)]).unwrap();
        assert_eq!(r.at(-1.0), 0.0);
        assert_eq!(r.at(0.5), 0.5);
        assert_eq!(r.at(2.0), 0.0);
        assert_eq!(r.at(9.0), -1.0);
    }

    #[test]
    fn integrals_are_exact() {
        assert_eq!(Rate::Constant(2.0).integral(0.5, 2.0), 3.0);
        let ramp = Rate::table(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(ramp.integral(0.0, 1.0), 0.5);
        assert!((ramp.integral(-1.0, 2.0) - 1.5).abs() < 1e-15);
        assert!((ramp.integral(0.25, 0.75) - 0.25).abs() < 1e-15);
        let aff = Rate::Affine {
            value: 1.0,
            slope: 2.0,
        };
        assert!((aff.integral(1.0, 2.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn table_validation() {
        assert!(Rate::table(vec![]).is_err());
        assert!(Rate::table(vec![(1.0, 0.0), (1.0, 2.0)]).is_err());
        assert!(Rate::table(vec![(0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn combinations() {
        let ramp = Rate::table(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let c = Rate::combination(vec![(2.0, ramp.clone()), (-1.0, Rate::Constant(0.5)), (0.0, ramp.clone())]);
        assert!(matches!(&c, Rate::Sum(t) if t.len() == 2));
        assert_eq!(c.at(0.5), 0.5);
        assert!((c.integral(0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!(!c.is_constant());
        assert_eq!(Rate::Constant(1.0).plus(&Rate::Constant(2.0)), Rate::Constant(3.0));
        assert_eq!(Rate::combination(vec![(3.0, ramp.clone())]), ramp.scaled(3.0));
        assert_eq!(c.scaled(2.0).at(0.5), 1.0);
    }
}
