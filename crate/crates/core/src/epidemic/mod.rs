//! Two-state (and N-state) classical stochastic machine `dp/dt = S(t)·p`.
//!
//! The generator is unconstrained: columns need not sum to zero, so total
//! probability is generally not conserved and states may leave the simplex.
//! Nothing here clamps; [`ProbState2::on_simplex`] reports violations.
//!
//! Eigenvectors follow the closed form `v = (δ, 2·s21)/(2·s21 + δ)` with
//! `δ = ∓√D + s11 − s22`, normalized so that the components sum to one. That
//! normalization is impossible when the components sum to zero (every
//! probability-conserving generator has such a mode) and ill-conditioned
//! near it, and the formula divides by `s21`; in these cases the frame is
//! computed numerically and tagged [`FrameSource::Numeric`].

mod generator;
mod measure;
mod rate;
mod spectral;

pub use generator::{
    integrate_generator, occupancy_ratio, propagate_closed_form, propagate_n, propagate_rk,
    propagation_gap, Generator2, IntegratedGenerator2, PropagationGap,
};
pub use measure::{measure_projective, measure_weak, sample_outcome, Level};
pub use rate::{Rate, RateMatrix};
pub use spectral::{
    constant_occupancy_residual, eigenmode_evolve_const, eigenmode_evolve_exact,
    ensemble_decompose, frame_evolve, frame_matrix, spectral_frame, spectral_frame_of, FrameSource,
    SpectralFrame2, FRAME_DERIVATIVE_STEP, S21_FLOOR, SUM_FLOOR,
};

use crate::{Error, Result};

/// Occupancy probabilities of the two states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbState2 {
    pub p1: f64,
    pub p2: f64,
}

impl ProbState2 {
    /// Checked constructor: both components finite and nonnegative.
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1.is_finite() && p2.is_finite()) {
            return Err(Error::NonFinite("probability state"));
        }
        if p1 < 0.0 {
            return Err(Error::BelowFloor {
                index: 0,
                value: p1,
            });
        }
        if p2 < 0.0 {
            return Err(Error::BelowFloor {
                index: 1,
                value: p2,
            });
        }
        Ok(Self { p1, p2 })
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.p1, self.p2]
    }

    pub fn total(&self) -> f64 {
        self.p1 + self.p2
    }

    /// Whether both components lie in `[−tol, 1 + tol]` and sum to one
    /// within `tol`.
    pub fn on_simplex(&self, tol: f64) -> bool {
        let inside = |p: f64| p >= -tol && p <= 1.0 + tol;
        inside(self.p1) && inside(self.p2) && (self.total() - 1.0).abs() <= tol
    }
}

impl From<[f64; 2]> for ProbState2 {
    fn from(p: [f64; 2]) -> Self {
        Self { p1: p[0], p2: p[1] }
    }
}

/// Weights of the two eigen-ensembles, `p = pI·v1 + pII·v2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleWeights {
    pub p_i: f64,
    pub p_ii: f64,
}

impl EnsembleWeights {
    pub fn new(p_i: f64, p_ii: f64) -> Self {
        Self { p_i, p_ii }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.p_i, self.p_ii]
    }
}

/// `exp` of a real 2×2 matrix via `cosh`/`sinh(x)/x` with
/// `x² = ((a−d)/2)² + b·c`; used for both the probability propagator and the
/// ensemble-frame propagator.
pub fn exp_2x2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let [[a, b], [c, d]] = m;
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let (ch, shc) = cosh_sinhc(half * half + b * c);
    let e = mean.exp();
    [
        [e * (ch + half * shc), e * b * shc],
        [e * c * shc, e * (ch - half * shc)],
    ]
}

/// `(cosh x, sinh(x)/x)` as functions of `x²`, continued to `x² < 0` as
/// `(cos y, sin(y)/y)` with `y² = −x²`. A 4-term Taylor series is used for
/// `|x| < 1e-6`.
pub fn cosh_sinhc(x2: f64) -> (f64, f64) {
    if x2.abs() < 1e-12 {
        let ch = 1.0 + x2 / 2.0 + x2 * x2 / 24.0 + x2 * x2 * x2 / 720.0;
        let shc = 1.0 + x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0;
        (ch, shc)
    } else if x2 > 0.0 {
        let x = x2.sqrt();
        (x.cosh(), x.sinh() / x)
    } else {
        let y = (-x2).sqrt();
        (y.cos(), y.sin() / y)
    }
}

/// `tanh(x)/x` as a function of `x²`, continued to `tan(y)/y` for `x² < 0`.
fn tanhc(x2: f64) -> f64 {
    if x2.abs() < 1e-12 {
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0 - 17.0 * x2 * x2 * x2 / 315.0
    } else if x2 > 0.0 {
        let x = x2.sqrt();
        x.tanh() / x
    } else {
        let y = (-x2).sqrt();
        y.tan() / y
    }
}

fn mat_vec2(m: [[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_branch_is_continuous() {
        for x2 in [-0.999e-12, 0.999e-12, -1.001e-12, 1.001e-12] {
            let (ch, shc) = cosh_sinhc(x2);
            let x = x2.abs().sqrt();
            let (ch_ref, shc_ref, th_ref) = if x2 > 0.0 {
                (x.cosh(), x.sinh() / x, x.tanh() / x)
            } else {
                (x.cos(), x.sin() / x, x.tan() / x)
            };
            assert!((ch - ch_ref).abs() < 1e-15);
            assert!((shc - shc_ref).abs() < 1e-15);
            assert!((tanhc(x2) - th_ref).abs() < 1e-15);
        }
    }

    #[test]
    fn simplex_flag() {
        assert!(ProbState2 { p1: 0.25, p2: 0.75 }.on_simplex(1e-12));
        assert!(!ProbState2 { p1: 1.2, p2: -0.2 }.on_simplex(1e-12));
        assert!(!ProbState2 { p1: 0.5, p2: 0.6 }.on_simplex(1e-12));
        assert!(ProbState2::new(-0.1, 0.5).is_err());
    }
}
