//! Two coupled two-state machines A and B.
//!
//! Two orderings of the four components are in use. The traffic ordering
//! `(pA1, pA2, pB1, pB2)` stacks the two subsystems; the product ordering
//! `(1A1B, 1A2B, 2A1B, 2A2B)` indexes joint states with B varying fastest,
//! so that `S_A ⊗ I + I ⊗ S_B` acts on it directly. [`ProbState4`] records
//! which one it holds.

mod eigen;
mod generator;
mod interaction;

pub use eigen::{coupled_eigenvectors, CoupledMode, COUPLING_FLOOR};
pub use generator::{build_traffic_generator, kron_sum_generator, CrossCouplings, Form4, Generator4};
pub use interaction::{interaction_generator, Frame2, JointLevel, JointRates};

use crate::epidemic::ProbState2;
use crate::numkit::{ode_evolve, RealMatrix, Trajectory};
use crate::{Error, Result};

/// Ordering of the four components of a [`ProbState4`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis4 {
    /// `(pA1, pA2, pB1, pB2)`.
    Traffic,
    /// `(p_1A1B, p_1A2B, p_2A1B, p_2A2B)`.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbState4 {
    pub p: [f64; 4],
    pub basis: Basis4,
}

impl ProbState4 {
    /// Checked constructor: finite, nonnegative components.
    pub fn new(p: [f64; 4], basis: Basis4) -> Result<Self> {
        for (index, &value) in p.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("probability state"));
            }
            if value < 0.0 {
                return Err(Error::BelowFloor { index, value });
            }
        }
        Ok(Self { p, basis })
    }

    pub fn traffic(p: [f64; 4]) -> Result<Self> {
        Self::new(p, Basis4::Traffic)
    }

    pub fn product(p: [f64; 4]) -> Result<Self> {
        Self::new(p, Basis4::Product)
    }

    /// Product-basis state `a ⊗ b`.
    pub fn from_marginals(a: ProbState2, b: ProbState2) -> Self {
        Self {
            p: [a.p1 * b.p1, a.p1 * b.p2, a.p2 * b.p1, a.p2 * b.p2],
            basis: Basis4::Product,
        }
    }

    /// Subsystem occupancies. In the product basis these are the sums over
    /// the other subsystem.
    pub fn marginals(&self) -> (ProbState2, ProbState2) {
        let p = self.p;
        match self.basis {
            Basis4::Traffic => (ProbState2 { p1: p[0], p2: p[1] }, ProbState2 { p1: p[2], p2: p[3] }),
            Basis4::Product => (
                ProbState2 { p1: p[0] + p[1], p2: p[2] + p[3] },
                ProbState2 { p1: p[0] + p[2], p2: p[1] + p[3] },
            ),
        }
    }

    /// The same four numbers read in the other ordering, component by
    /// component. This is the identification `pA1 ↔ 1A1B`, `pA2 ↔ 1A2B`,
    /// `pB1 ↔ 2A1B`, `pB2 ↔ 2A2B`; it is a relabeling, not a change of
    /// variables.
    pub fn relabel(&self, basis: Basis4) -> Self {
        Self { p: self.p, basis }
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Outcome of a subsystem measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    OneA,
    TwoA,
    OneB,
    TwoB,
}

impl Site {
    pub const ALL: [Site; 4] = [Site::OneA, Site::TwoA, Site::OneB, Site::TwoB];

    /// Traffic-basis index of the measured component.
    pub fn index(self) -> usize {
        match self {
            Site::OneA => 0,
            Site::TwoA => 1,
            Site::OneB => 2,
            Site::TwoB => 3,
        }
    }

    /// `1..=4` in the order 1A, 2A, 1B, 2B.
    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1..=4 => Ok(Self::ALL[usize::from(k - 1)]),
            _ => Err(Error::InvalidOutcome(k)),
        }
    }

    fn sibling(self) -> usize {
        self.index() ^ 1
    }
}

/// Diagonal projector for a subsystem measurement in the traffic basis: the
/// other component of the measured subsystem is removed and everything else
/// is kept, so `P(1A) = diag(1, 0, 1, 1)`.
///
/// These are idempotent but not complementary: `P(1A) + P(2A) ≠ I`.
pub fn projector(target: Site) -> RealMatrix {
    let mut d = [1.0; 4];
    d[target.sibling()] = 0.0;
    RealMatrix::from_diag(&d)
}

/// State after observing `target`: the measured component becomes 1, its
/// sibling 0, and the other subsystem is left as it was. Measuring 1A maps
/// `(pA1, pA2, pB1, pB2)` to `(1, 0, pB1, pB2)`.
pub fn measure_subsystem(p: ProbState4, target: Site) -> Result<ProbState4> {
    if p.basis != Basis4::Traffic {
        return Err(Error::WrongBasis("subsystem measurement"));
    }
    let mut out = projector(target).mul_vec(&p.p);
    out[target.index()] = 1.0;
    Ok(ProbState4 {
        p: [out[0], out[1], out[2], out[3]],
        basis: Basis4::Traffic,
    })
}

/// `|p_I·p_IV − p_II·p_III|` for a product-basis state; zero exactly when
/// the state is an outer product of two 2-vectors.
pub fn factorization_defect(p: &ProbState4) -> Result<f64> {
    if p.basis != Basis4::Product {
        return Err(Error::WrongBasis("factorization defect"));
    }
    Ok((p.p[0] * p.p[3] - p.p[1] * p.p[2]).abs())
}

/// RK4 trajectory of `dp/dt = S(t)·p`. The state keeps its basis; the
/// generator is assumed to act on that ordering.
pub fn evolve4(g: &Generator4, p0: ProbState4, t0: f64, t: f64, dt: f64) -> Result<Trajectory<f64>> {
    ode_evolve(|s| g.at(s), &p0.p, t0, t, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ProbState4 {
        ProbState4::traffic([0.1, 0.2, 0.3, 0.4]).unwrap()
    }

    #[test]
    fn printed_after_states() {
        let expect = [
            [1.0, 0.0, 0.3, 0.4],
            [0.0, 1.0, 0.3, 0.4],
            [0.1, 0.2, 1.0, 0.0],
            [0.1, 0.2, 0.0, 1.0],
        ];
        for (site, e) in Site::ALL.iter().zip(expect) {
            assert_eq!(measure_subsystem(p(), *site).unwrap().p, e);
        }
    }

    #[test]
    fn projectors_are_idempotent_not_complete() {
        for site in Site::ALL {
            let m = projector(site);
            assert_eq!(&m * &m, m);
            let again = measure_subsystem(measure_subsystem(p(), site).unwrap(), site).unwrap();
            assert_eq!(again, measure_subsystem(p(), site).unwrap());
        }
        assert_eq!(projector(Site::OneA).diagonal(), [1.0, 0.0, 1.0, 1.0]);
        assert_eq!(projector(Site::OneB).diagonal(), [1.0, 1.0, 1.0, 0.0]);
        let sum = &projector(Site::OneA) + &projector(Site::TwoA);
        assert_ne!(sum, RealMatrix::identity(4));
    }

    #[test]
    fn basis_checks() {
        let q = p().relabel(Basis4::Product);
        assert!(matches!(measure_subsystem(q, Site::OneA), Err(Error::WrongBasis(_))));
        assert!(matches!(factorization_defect(&p()), Err(Error::WrongBasis(_))));
        assert_eq!(Site::from_number(3).unwrap(), Site::OneB);
        assert_eq!(Site::from_number(5), Err(Error::InvalidOutcome(5)));
        assert!(ProbState4::traffic([0.1, -0.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn defect_examples() {
        let prod = ProbState4::from_marginals(ProbState2 { p1: 0.2, p2: 0.8 }, ProbState2 { p1: 0.5, p2: 0.5 });
        assert_eq!(prod.p, [0.1, 0.1, 0.4, 0.4]);
        assert_eq!(factorization_defect(&prod).unwrap(), 0.0);
        let bell = ProbState4::product([0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(factorization_defect(&bell).unwrap(), 0.25);
        let (a, b) = prod.marginals();
        assert!((a.p1 - 0.2).abs() < 1e-15 && (b.p2 - 0.5).abs() < 1e-15);
    }
}
