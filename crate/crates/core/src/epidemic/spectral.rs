use super::{exp_2x2, mat_vec2, EnsembleWeights, Generator2, ProbState2, Rate};
use crate::numkit::{eig, step_count, RealMatrix};
use crate::{Error, Result};

/// Below this `|s21|` the closed-form eigenvectors are not used.
pub const S21_FLOOR: f64 = 1e-10;
/// Relative cancellation in the closed-form normalization `2·s21 + δ` below
/// which the frame is computed numerically; caps the eigenvector size near
/// `1/SUM_FLOOR`.
pub const SUM_FLOOR: f64 = 1e-3;
/// Central-difference step for eigenvector time derivatives.
pub const FRAME_DERIVATIVE_STEP: f64 = 1e-5;

/// How a [`SpectralFrame2`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameSource {
    /// Closed-form eigenvectors normalized to unit component sum.
    ClosedForm,
    /// Numeric eigenvectors of unit Euclidean norm.
    Numeric,
}

/// Eigenvalues `E1 ≤ E2`, eigenvectors `v1`, `v2` and their squared norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralFrame2 {
    pub e1: f64,
    pub e2: f64,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    pub n1: f64,
    pub n2: f64,
    pub source: FrameSource,
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl SpectralFrame2 {
    /// Weights with `pI·v1 + pII·v2 = p`, from the dual basis of `(v1, v2)`.
    ///
    /// When `v1 ⟂ v2` (symmetric coupling) these equal `⟨v1|p⟩/n1` and
    /// `⟨v2|p⟩/n2`; see [`SpectralFrame2::project`].
    pub fn decompose(&self, p: ProbState2) -> Result<EnsembleWeights> {
        self.check_nondegenerate()?;
        let det = self.v1[0] * self.v2[1] - self.v2[0] * self.v1[1];
        if !(det.abs() > 1e-14 * (self.n1 * self.n2).sqrt()) {
            return Err(Error::DegenerateFrame("eigenvectors are parallel"));
        }
        Ok(EnsembleWeights {
            p_i: (p.p1 * self.v2[1] - p.p2 * self.v2[0]) / det,
            p_ii: (self.v1[0] * p.p2 - self.v1[1] * p.p1) / det,
        })
    }

    /// Orthogonal projections `(⟨v1|p⟩/n1, ⟨v2|p⟩/n2)`. They reconstruct `p`
    /// only when `⟨v1|v2⟩ = 0`.
    pub fn project(&self, p: ProbState2) -> Result<EnsembleWeights> {
        self.check_nondegenerate()?;
        let p = p.as_array();
        Ok(EnsembleWeights {
            p_i: dot(self.v1, p) / self.n1,
            p_ii: dot(self.v2, p) / self.n2,
        })
    }

    fn check_nondegenerate(&self) -> Result<()> {
        if self.n1 > 1e-300 && self.n2 > 1e-300 {
            Ok(())
        } else {
            Err(Error::DegenerateFrame("eigenvector with zero norm"))
        }
    }

    /// `pI·v1 + pII·v2`.
    pub fn reconstruct(&self, w: EnsembleWeights) -> ProbState2 {
        ProbState2 {
            p1: w.p_i * self.v1[0] + w.p_ii * self.v2[0],
            p2: w.p_i * self.v1[1] + w.p_ii * self.v2[1],
        }
    }

    /// `⟨v1|v2⟩`.
    pub fn overlap(&self) -> f64 {
        dot(self.v1, self.v2)
    }

    /// `max_i ‖S·v_i − E_i·v_i‖∞`.
    pub fn residual(&self, s: [[f64; 2]; 2]) -> f64 {
        let r = |e: f64, v: [f64; 2]| {
            let sv = mat_vec2(s, v);
            (sv[0] - e * v[0]).abs().max((sv[1] - e * v[1]).abs())
        };
        r(self.e1, self.v1).max(r(self.e2, self.v2))
    }

    /// `E1/n1 − E2/n2`, the slope of `ln(pI/pII)` under
    /// [`eigenmode_evolve_const`].
    pub fn ratio_rate(&self) -> f64 {
        self.e1 / self.n1 - self.e2 / self.n2
    }
}

/// Spectral frame of `S(t)`.
pub fn spectral_frame(s: &Generator2, t: f64) -> Result<SpectralFrame2> {
    spectral_frame_of(s.at(t))
}

/// Spectral frame of a fixed 2×2 generator.
///
/// `E1,2 = (∓√D + s11 + s22)/2` with `D = (s11 − s22)² + 4·s12·s21`, and
/// `v = (δ, 2·s21)/(2·s21 + δ)` with `δ = ∓√D + s11 − s22`.
pub fn spectral_frame_of(s: [[f64; 2]; 2]) -> Result<SpectralFrame2> {
    let [[s11, s12], [s21, s22]] = s;
    if !s.iter().flatten().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("generator"));
    }
    let disc = (s11 - s22) * (s11 - s22) + 4.0 * s12 * s21;
    if disc < 0.0 {
        return Err(Error::ComplexSpectrum { discriminant: disc });
    }
    let root = disc.sqrt();
    let e1 = 0.5 * (-root + s11 + s22);
    let e2 = 0.5 * (root + s11 + s22);
    if s21.abs() < S21_FLOOR {
        return numeric_frame(s);
    }
    let closed = |delta: f64| {
        let den = 2.0 * s21 + delta;
        if den.abs() <= SUM_FLOOR * (2.0 * s21.abs() + delta.abs()) {
            None
        } else {
            Some([delta / den, 2.0 * s21 / den])
        }
    };
    match (closed(-root + s11 - s22), closed(root + s11 - s22)) {
        (Some(v1), Some(v2)) => Ok(SpectralFrame2 {
            e1,
            e2,
            v1,
            v2,
            n1: dot(v1, v1),
            n2: dot(v2, v2),
            source: FrameSource::ClosedForm,
        }),
        _ => numeric_frame(s),
    }
}

fn numeric_frame(s: [[f64; 2]; 2]) -> Result<SpectralFrame2> {
    let pairs = eig(&RealMatrix::from_rows(&s))?;
    let v1 = [pairs[0].vector[0].re, pairs[0].vector[1].re];
    let v2 = [pairs[1].vector[0].re, pairs[1].vector[1].re];
    Ok(SpectralFrame2 {
        e1: pairs[0].value.re,
        e2: pairs[1].value.re,
        v1,
        v2,
        n1: dot(v1, v1),
        n2: dot(v2, v2),
        source: FrameSource::Numeric,
    })
}

/// Ensemble weights of `p` in the eigenframe of `S(t)`.
pub fn ensemble_decompose(p: ProbState2, s: &Generator2, t: f64) -> Result<EnsembleWeights> {
    spectral_frame(s, t)?.decompose(p)
}

fn evolve_weights(
    s: &Generator2,
    w0: EnsembleWeights,
    t0: f64,
    t: f64,
    printed: bool,
) -> Result<EnsembleWeights> {
    if !s.is_constant() {
        return Err(Error::NotConstant("generator"));
    }
    let f = spectral_frame(s, t0)?;
    f.check_nondegenerate()?;
    let (r1, r2) = if printed {
        (f.e1 / f.n1, f.e2 / f.n2)
    } else {
        (f.e1, f.e2)
    };
    let dt = t - t0;
    Ok(EnsembleWeights {
        p_i: (r1 * dt).exp() * w0.p_i,
        p_ii: (r2 * dt).exp() * w0.p_ii,
    })
}

/// Eigen-ensemble weights under the rate law `d pI/dt = (E1/n1)·pI`,
/// `d pII/dt = (E2/n2)·pII`, so that `ln(pI/pII)` has slope `E1/n1 − E2/n2`.
///
/// The weights of the propagated state itself grow at `E1` and `E2` (see
/// [`eigenmode_evolve_exact`]); the two laws agree only when `n1 = n2 = 1`.
pub fn eigenmode_evolve_const(
    s: &Generator2,
    w0: EnsembleWeights,
    t0: f64,
    t: f64,
) -> Result<EnsembleWeights> {
    evolve_weights(s, w0, t0, t, true)
}

/// Eigen-ensemble weights of `exp(S·(t − t0))·p0`: `pI(t) = e^{E1 (t−t0)}·pI(0)`.
pub fn eigenmode_evolve_exact(
    s: &Generator2,
    w0: EnsembleWeights,
    t0: f64,
    t: f64,
) -> Result<EnsembleWeights> {
    evolve_weights(s, w0, t0, t, false)
}

/// Frame at `t` and connection terms `c[i][j] = ⟨v_i|dv_j/dt⟩` from central
/// differences with step `h`.
fn connection(s: &Generator2, t: f64, h: f64) -> Result<(SpectralFrame2, [[f64; 2]; 2])> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep(h));
    }
    let mid = spectral_frame(s, t)?;
    let plus = spectral_frame(s, t + h)?;
    let minus = spectral_frame(s, t - h)?;
    if plus.source != mid.source || minus.source != mid.source {
        return Err(Error::DegenerateFrame(
            "frame source changes inside the stencil",
        ));
    }
    if dot(plus.v1, minus.v1) <= 0.0 || dot(plus.v2, minus.v2) <= 0.0 {
        return Err(Error::DegenerateFrame(
            "eigenvector orientation flips inside the stencil",
        ));
    }
    let d = |a: [f64; 2], b: [f64; 2]| [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)];
    let dv1 = d(plus.v1, minus.v1);
    let dv2 = d(plus.v2, minus.v2);
    let c = [
        [dot(mid.v1, dv1), dot(mid.v1, dv2)],
        [dot(mid.v2, dv1), dot(mid.v2, dv2)],
    ];
    if c.iter().flatten().all(|x| x.is_finite()) {
        Ok((mid, c))
    } else {
        Err(Error::NonFinite("connection terms"))
    }
}

/// `|⟨v1|v̇2⟩·⟨v2|v̇1⟩ − (E1 − ⟨v1|v̇1⟩)·(E2 − ⟨v2|v̇2⟩)|`: how far `S(t)`
/// is from admitting constant ensemble weights at `t`. A diagnostic only.
pub fn constant_occupancy_residual(s: &Generator2, t: f64, h: f64) -> Result<f64> {
    let (f, c) = connection(s, t, h)?;
    Ok((c[0][1] * c[1][0] - (f.e1 - c[0][0]) * (f.e2 - c[1][1])).abs())
}

/// Rate matrix of the ensemble weights in the moving frame:
/// `[[E1 − ⟨v1|v̇1⟩, e21 − ⟨v1|v̇2⟩], [e12 − ⟨v2|v̇1⟩, E2 − ⟨v2|v̇2⟩]]`.
pub fn frame_matrix(s: &Generator2, e12: &Rate, e21: &Rate, t: f64) -> Result<[[f64; 2]; 2]> {
    let (f, c) = connection(s, t, FRAME_DERIVATIVE_STEP)?;
    Ok([
        [f.e1 - c[0][0], e21.at(t) - c[0][1]],
        [e12.at(t) - c[1][0], f.e2 - c[1][1]],
    ])
}

/// `exp(g)·w0` with `g = ∫ frame_matrix dt` by the composite trapezoid rule
/// on a grid of spacing at most `dt`.
pub fn frame_evolve(
    s: &Generator2,
    e12: &Rate,
    e21: &Rate,
    w0: EnsembleWeights,
    t0: f64,
    t: f64,
    dt: f64,
) -> Result<EnsembleWeights> {
    let n = step_count(t0, t, dt)?;
    if n == 0 {
        return Ok(w0);
    }
    let h = (t - t0) / n as f64;
    let mut g = [[0.0; 2]; 2];
    for k in 0..=n {
        let tk = if k == n { t } else { t0 + k as f64 * h };
        let m = frame_matrix(s, e12, e21, tk)?;
        let weight = if k == 0 || k == n { 0.5 * h } else { h };
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] += weight * m[i][j];
            }
        }
    }
    if !g.iter().flatten().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("frame quadrature"));
    }
    let w = mat_vec2(exp_2x2(g), w0.as_array());
    Ok(EnsembleWeights {
        p_i: w[0],
        p_ii: w[1],
    })
}
