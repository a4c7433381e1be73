use alloc::vec::Vec;

use super::{cosh_sinhc, exp_2x2, mat_vec2, tanhc, ProbState2, Rate};
use crate::numkit::{ode_evolve, RealMatrix, MAX_EXP_DIM};
use crate::{Error, Result};

/// Time-dependent 2×2 generator `[[s11, s12], [s21, s22]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator2 {
    pub s11: Rate,
    pub s12: Rate,
    pub s21: Rate,
    pub s22: Rate,
}

impl Generator2 {
    pub fn new(s11: Rate, s12: Rate, s21: Rate, s22: Rate) -> Self {
        Self { s11, s12, s21, s22 }
    }

    pub fn constant(s11: f64, s12: f64, s21: f64, s22: f64) -> Self {
        Self::new(s11.into(), s12.into(), s21.into(), s22.into())
    }

    pub fn from_matrix(m: [[f64; 2]; 2]) -> Self {
        Self::constant(m[0][0], m[0][1], m[1][0], m[1][1])
    }

    pub fn at(&self, t: f64) -> [[f64; 2]; 2] {
        [
            [self.s11.at(t), self.s12.at(t)],
            [self.s21.at(t), self.s22.at(t)],
        ]
    }

    pub fn matrix(&self, t: f64) -> RealMatrix {
        RealMatrix::from_rows(&self.at(t))
    }

    pub fn is_constant(&self) -> bool {
        self.rates().iter().all(|r| r.is_constant())
    }

    pub fn rates(&self) -> [&Rate; 4] {
        [&self.s11, &self.s12, &self.s21, &self.s22]
    }

    /// `k·S(t)`.
    pub fn scaled(&self, k: f64) -> Self {
        Self::new(
            self.s11.scaled(k),
            self.s12.scaled(k),
            self.s21.scaled(k),
            self.s22.scaled(k),
        )
    }
}

/// Entrywise time integrals `S_ij = ∫_{t0}^{t} s_ij dt'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratedGenerator2 {
    pub s11: f64,
    pub s12: f64,
    pub s21: f64,
    pub s22: f64,
}

impl IntegratedGenerator2 {
    pub fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.s11, self.s12], [self.s21, self.s22]]
    }

    /// `U = exp([[S11, S12], [S21, S22]])` in sinh/cosh closed form.
    pub fn propagator(&self) -> [[f64; 2]; 2] {
        exp_2x2(self.as_matrix())
    }

    /// `(S11 − S22)² + 4·S12·S21`.
    pub fn discriminant(&self) -> f64 {
        (self.s11 - self.s22).powi(2) + 4.0 * self.s12 * self.s21
    }
}

pub fn integrate_generator(s: &Generator2, t0: f64, t: f64) -> Result<IntegratedGenerator2> {
    if !(t >= t0) {
        return Err(Error::InvalidInterval { t0, t1: t });
    }
    let g = IntegratedGenerator2 {
        s11: s.s11.integral(t0, t),
        s12: s.s12.integral(t0, t),
        s21: s.s21.integral(t0, t),
        s22: s.s22.integral(t0, t),
    };
    if [g.s11, g.s12, g.s21, g.s22].iter().all(|x| x.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFinite("integrated generator"))
    }
}

/// `exp(∫S)·p0`. Exact for constant generators and for families `{S(t)}`
/// that commute; otherwise compare with [`propagation_gap`].
pub fn propagate_closed_form(
    s: &Generator2,
    p0: ProbState2,
    t0: f64,
    t: f64,
) -> Result<ProbState2> {
    let u = integrate_generator(s, t0, t)?.propagator();
    let p = mat_vec2(u, p0.as_array());
    if p.iter().all(|x| x.is_finite()) {
        Ok(p.into())
    } else {
        Err(Error::NonFinite("closed-form propagator"))
    }
}

/// RK4 reference for `dp/dt = S(t)·p`.
pub fn propagate_rk(
    s: &Generator2,
    p0: ProbState2,
    t0: f64,
    t: f64,
    dt: f64,
) -> Result<ProbState2> {
    let tr = ode_evolve(|t| s.matrix(t), &p0.as_array(), t0, t, dt)?;
    let (_, p) = tr.last().expect("trajectory has its initial sample");
    Ok(ProbState2 { p1: p[0], p2: p[1] })
}

/// Closed form and RK reference side by side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationGap {
    pub closed_form: ProbState2,
    pub reference: ProbState2,
    /// `max_k |closed_k − reference_k|`.
    pub gap: f64,
}

pub fn propagation_gap(
    s: &Generator2,
    p0: ProbState2,
    t0: f64,
    t: f64,
    dt: f64,
) -> Result<PropagationGap> {
    let closed_form = propagate_closed_form(s, p0, t0, t)?;
    let reference = propagate_rk(s, p0, t0, t, dt)?;
    let gap = (closed_form.p1 - reference.p1)
        .abs()
        .max((closed_form.p2 - reference.p2).abs());
    Ok(PropagationGap {
        closed_form,
        reference,
        gap,
    })
}

/// `r12 = p1(t)/p2(t)` in tanh form.
///
/// With `δ = (S11−S22)/2` and `x² = δ² + S12·S21`,
/// `r12 = (p1 + (δ·p1 + S12·p2)·tanh(x)/x) / (p2 + (S21·p1 − δ·p2)·tanh(x)/x)`,
/// which is the ratio of the rows of `exp(∫S)·p0` divided through by
/// `cosh x`. Where `cos y` vanishes on the oscillatory branch the undivided
/// rows are used.
pub fn occupancy_ratio(s: &Generator2, p0: ProbState2, t0: f64, t: f64) -> Result<f64> {
    let g = integrate_generator(s, t0, t)?;
    let (p1, p2) = (p0.p1, p0.p2);
    let half = 0.5 * (g.s11 - g.s22);
    let x2 = half * half + g.s12 * g.s21;
    let (ch, shc) = cosh_sinhc(x2);
    let (num, den) = if ch.abs() > 1e-3 {
        let th = tanhc(x2);
        (
            p1 + (half * p1 + g.s12 * p2) * th,
            p2 + (g.s21 * p1 - half * p2) * th,
        )
    } else {
        (
            p1 * ch + (half * p1 + g.s12 * p2) * shc,
            p2 * ch + (g.s21 * p1 - half * p2) * shc,
        )
    };
    let scale = num.abs().max(p1.abs()).max(p2.abs());
    if !(den.abs() > 1e-300_f64.max(1e-15 * scale)) {
        return Err(Error::VanishingDenominator("occupancy ratio"));
    }
    let r = num / den;
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite("occupancy ratio"))
    }
}

/// Endpoint of `dp/dt = S(t)·p` for `N ≤ 16` states.
pub fn propagate_n<G>(s: G, p0: &[f64], t0: f64, t: f64, dt: f64) -> Result<Vec<f64>>
where
    G: Fn(f64) -> RealMatrix,
{
    let n = p0.len();
    if n == 0 || n > MAX_EXP_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    let probe = s(t0);
    if probe.rows() != n || probe.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: probe.rows(),
        });
    }
    let tr = ode_evolve(s, p0, t0, t, dt)?;
    Ok(tr
        .last()
        .expect("trajectory has its initial sample")
        .1
        .to_vec())
}
