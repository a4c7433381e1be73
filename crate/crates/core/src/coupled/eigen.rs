use super::{Form4, Generator4};
use crate::epidemic::{spectral_frame_of, FrameSource};
use crate::{Error, Result};

/// Below this `|s ∓ s21|` the closed-form vectors are not used.
pub const COUPLING_FLOOR: f64 = 1e-10;

/// Eigenpair of the symmetric coupled generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledMode {
    /// Rayleigh quotient of `vector`.
    pub value: f64,
    /// Unnormalized eigenvector.
    pub vector: [f64; 4],
    /// Whether all components share one sign, so that the mode can be read
    /// as occupancies.
    pub sign_definite: bool,
    pub source: FrameSource,
}

impl CoupledMode {
    /// `‖S(t)·V − λ·V‖∞`.
    pub fn residual(&self, g: &Generator4, t: f64) -> f64 {
        let mv = g.at(t).mul_vec(&self.vector);
        mv.iter().zip(&self.vector).map(|(a, b)| (a - self.value * b).abs()).fold(0.0, f64::max)
    }
}

/// Eigenpairs `V1..V4` of the symmetric coupled generator at `t`.
///
/// With `R∓ = √(4(s ∓ s12)(s ∓ s21) + (s11 − s22)²)`:
///
/// * `V1,2 = (x, −1, −x, 1)`, `x = (s11 − s22 ∓ R−)/(2(s − s21))`;
/// * `V3,4 = (a, 1, a, 1)`, `a = (s11 − s22 ∓ R+)/(2(s + s21))`.
///
/// V1 and V2 are antisymmetric under exchanging A and B and V3 and V4 are
/// symmetric; each pair diagonalizes the 2×2 block
/// `[[s11, s12 ∓ s], [s21 ∓ s, s22]]`. When a denominator falls below
/// [`COUPLING_FLOOR`] that block is solved by
/// [`spectral_frame_of`] instead and the pair is tagged
/// [`FrameSource::Numeric`].
pub fn coupled_eigenvectors(g: &Generator4, t: f64) -> Result<[CoupledMode; 4]> {
    let Form4::Symmetric { s, coupling } = g.form() else {
        return Err(Error::UnsupportedForm("closed-form coupled eigenvectors"));
    };
    let [[s11, s12], [s21, s22]] = s.at(t);
    let c = coupling.at(t);
    let m = g.at(t);
    let d = s11 - s22;
    let rad_anti = 4.0 * (c - s12) * (c - s21) + d * d;
    let rad_sym = 4.0 * (c + s12) * (c + s21) + d * d;
    for rad in [rad_anti, rad_sym] {
        if rad < 0.0 {
            return Err(Error::ComplexSpectrum { discriminant: rad });
        }
    }
    let mode = |v: [f64; 4], source: FrameSource| {
        let mv = m.mul_vec(&v);
        let num: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        let sign_definite = v.iter().all(|&x| x >= 0.0) || v.iter().all(|&x| x <= 0.0);
        CoupledMode { value: num / den, vector: v, sign_definite, source }
    };
    let pair = |den: f64, rad: f64, sign: f64| -> Result<[CoupledMode; 2]> {
        if den.abs() >= COUPLING_FLOOR {
            let root = rad.sqrt();
            let x1 = (d - root) / (2.0 * den);
            let x2 = (d + root) / (2.0 * den);
            let v = |x: f64| [x, sign, sign * x, 1.0];
            return Ok([mode(v(x1), FrameSource::ClosedForm), mode(v(x2), FrameSource::ClosedForm)]);
        }
        let block = spectral_frame_of([[s11, s12 + sign * c], [s21 + sign * c, s22]])?;
        let embed = |w: [f64; 2]| {
            let w = if w[1].abs() > COUPLING_FLOOR { [sign * w[0] / w[1], sign] } else { w };
            [w[0], w[1], sign * w[0], sign * w[1]]
        };
        Ok([mode(embed(block.v1), FrameSource::Numeric), mode(embed(block.v2), FrameSource::Numeric)])
    };
    let [v1, v2] = pair(c - s21, rad_anti, -1.0)?;
    let [v3, v4] = pair(c + s21, rad_sym, 1.0)?;
    let out = [v1, v2, v3, v4];
    if out.iter().all(|k| k.value.is_finite() && k.vector.iter().all(|x| x.is_finite())) {
        Ok(out)
    } else {
        Err(Error::NonFinite("coupled eigenvectors"))
    }
}
