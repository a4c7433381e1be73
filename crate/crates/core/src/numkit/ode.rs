use alloc::vec::Vec;

use super::{Matrix, Scalar};
use crate::{Error, Result};

/// Time samples with one state vector per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<f64>,
    states: Vec<Vec<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    /// Appends a sample; times must increase strictly and dimensions agree.
    pub fn push(&mut self, t: f64, state: Vec<T>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidInterval { t0: last, t1: t });
            }
            let dim = self.states[0].len();
            if state.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: state.len(),
                });
            }
        }
        self.times.push(t);
        self.states.push(state);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<T>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[T])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[T])> {
        self.times
            .iter()
            .copied()
            .zip(self.states.iter().map(Vec::as_slice))
    }

    /// Applies `f` to every state.
    pub fn map<U: Scalar>(&self, f: impl Fn(&[T]) -> Vec<U>) -> Trajectory<U> {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(|s| f(s)).collect(),
        }
    }
}

impl<T: Scalar> Default for Trajectory<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Number of equal steps covering `[t0, t1]` with spacing at most `dt`.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidStep(dt));
    }
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInterval { t0, t1 });
    }
    let ratio = (t1 - t0) / dt;
    let n = (ratio - 1e-9 * ratio.max(1.0)).ceil();
    Ok(n.max(0.0) as usize)
}

/// Classical RK4 for `dy/dt = f(t, y)` on a uniform grid over `[t0, t1]`.
///
/// The step is `(t1 − t0)/n` with `n` from [`step_count`]; every step is
/// recorded.
pub fn rk4_evolve<T, F>(mut f: F, y0: &[T], t0: f64, t1: f64, dt: f64) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: FnMut(f64, &[T]) -> Result<Vec<T>>,
{
    let n = step_count(t0, t1, dt)?;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
    };
    if !y0.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFiniteState { time: t0 });
    }
    traj.times.push(t0);
    traj.states.push(y0.to_vec());
    if n == 0 {
        return Ok(traj);
    }
    let h = (t1 - t0) / n as f64;
    let mut y = y0.to_vec();
    let mut tmp = y.clone();
    for step in 0..n {
        let t = t0 + step as f64 * h;
        let k1 = f(t, &y)?;
        axpy(&mut tmp, &y, &k1, h * 0.5);
        let k2 = f(t + 0.5 * h, &tmp)?;
        axpy(&mut tmp, &y, &k2, h * 0.5);
        let k3 = f(t + 0.5 * h, &tmp)?;
        axpy(&mut tmp, &y, &k3, h);
        let k4 = f(t + h, &tmp)?;
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]).scale(2.0) + k4[i]).scale(h / 6.0);
        }
        let t_next = if step + 1 == n {
            t1
        } else {
            t0 + (step + 1) as f64 * h
        };
        if !y.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteState { time: t_next });
        }
        traj.times.push(t_next);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

fn axpy<T: Scalar>(out: &mut [T], y: &[T], k: &[T], a: f64) {
    for i in 0..y.len() {
        out[i] = y[i] + k[i].scale(a);
    }
}

/// RK4 trajectory of the linear system `dy/dt = G(t)·y`.
pub fn ode_evolve<T, G>(generator: G, y0: &[T], t0: f64, t1: f64, dt: f64) -> Result<Trajectory<T>>
where
    T: Scalar,
    G: Fn(f64) -> Matrix<T>,
{
    rk4_evolve(
        |t, y| {
            let g = generator(t);
            if g.rows() != y.len() || g.cols() != y.len() {
                return Err(Error::DimensionMismatch {
                    expected: y.len(),
                    found: g.cols(),
                });
            }
            Ok(g.mul_vec(y))
        },
        y0,
        t0,
        t1,
        dt,
    )
}
