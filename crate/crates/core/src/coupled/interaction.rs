use alloc::vec::Vec;

use super::{Basis4, Form4, Generator4};
use crate::epidemic::{Rate, SpectralFrame2};
use crate::numkit::RealMatrix;
use crate::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Orthonormal eigenframe of one subsystem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame2 {
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

impl Frame2 {
    /// Checks `⟨vi|vj⟩ = δij` within `1e-10`.
    pub fn new(v1: [f64; 2], v2: [f64; 2]) -> Result<Self> {
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let defect = (dot(v1, v1) - 1.0).abs().max((dot(v2, v2) - 1.0).abs()).max(dot(v1, v2).abs());
        if !(defect <= ORTHONORMAL_TOL) {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self { v1, v2 })
    }

    /// Normalizes both eigenvectors; fails unless they are orthogonal, which
    /// for a closed-form frame means symmetric coupling.
    pub fn from_spectral(f: &SpectralFrame2) -> Result<Self> {
        let unit = |v: [f64; 2], n: f64| [v[0] / n.sqrt(), v[1] / n.sqrt()];
        Self::new(unit(f.v1, f.n1), unit(f.v2, f.n2))
    }

    fn vector(&self, k: usize) -> [f64; 2] {
        if k == 0 {
            self.v1
        } else {
            self.v2
        }
    }
}

/// Joint eigenlevels `I = (1A,1B)`, `II = (1A,2B)`, `III = (2A,1B)`,
/// `IV = (2A,2B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JointLevel {
    I,
    II,
    III,
    IV,
}

impl JointLevel {
    pub const ALL: [JointLevel; 4] = [JointLevel::I, JointLevel::II, JointLevel::III, JointLevel::IV];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Rates of the generator in the joint eigenbasis: four level rates on the
/// diagonal and one transfer rate `from → to` for each ordered pair, stored
/// at `(to, from)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JointRates {
    entries: [[Rate; 4]; 4],
}

impl JointRates {
    pub fn new(levels: [Rate; 4]) -> Self {
        let mut r = Self::default();
        for (k, e) in levels.into_iter().enumerate() {
            r.entries[k][k] = e;
        }
        r
    }

    pub fn level(&self, k: JointLevel) -> &Rate {
        &self.entries[k.index()][k.index()]
    }

    /// Sets the transfer rate `from → to`; a no-op on the diagonal.
    pub fn set_transfer(&mut self, from: JointLevel, to: JointLevel, rate: Rate) -> &mut Self {
        if from != to {
            self.entries[to.index()][from.index()] = rate;
        }
        self
    }

    pub fn transfer(&self, from: JointLevel, to: JointLevel) -> &Rate {
        &self.entries[to.index()][from.index()]
    }

    /// The joint-eigenbasis matrix at `t`.
    pub fn matrix(&self, t: f64) -> RealMatrix {
        RealMatrix::from_fn(4, 4, |i, j| self.entries[i][j].at(t))
    }
}

/// Generator in the product basis whose matrix in the joint eigenbasis
/// `Φ_kl = u_k ⊗ w_l` is `rates`: `S = Φ·R·Φᵀ`.
pub fn interaction_generator(rates: &JointRates, frame_a: &Frame2, frame_b: &Frame2) -> Result<Generator4> {
    // Re-check in case the frames were built field by field.
    let frame_a = Frame2::new(frame_a.v1, frame_a.v2)?;
    let frame_b = Frame2::new(frame_b.v1, frame_b.v2)?;
    let phi = RealMatrix::from_fn(4, 4, |i, k| {
        let u = frame_a.vector(k / 2);
        let w = frame_b.vector(k % 2);
        u[i / 2] * w[i % 2]
    });
    let mut entries = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let mut terms = Vec::new();
            for k in 0..4 {
                for l in 0..4 {
                    let c = phi[(i, k)] * phi[(j, l)];
                    if c != 0.0 {
                        terms.push((c, rates.entries[k][l].clone()));
                    }
                }
            }
            entries.push(Rate::combination(terms));
        }
    }
    Generator4::with_form(entries, Form4::Interaction, Basis4::Product)
}
