use alloc::vec::Vec;

use super::Basis4;
use crate::epidemic::{Generator2, Rate};
use crate::numkit::RealMatrix;
use crate::{Error, Result};

/// Cross rates of the traffic generator, named by the components they join.
/// They sit at entries `(1,4)`, `(2,3)`, `(3,2)` and `(4,1)` (1-based).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrossCouplings {
    /// Entry `(1,4)`: `pB2 → pA1`.
    pub s_1a2b: Rate,
    /// Entry `(2,3)`: `pB1 → pA2`.
    pub s_2a2b: Rate,
    /// Entry `(3,2)`: `pA2 → pB1`.
    pub s_2a1b: Rate,
    /// Entry `(4,1)`: `pA1 → pB2`.
    pub s_1a1b: Rate,
}

impl CrossCouplings {
    /// The same rate in all four slots.
    pub fn uniform(s: Rate) -> Self {
        Self { s_1a2b: s.clone(), s_2a2b: s.clone(), s_2a1b: s.clone(), s_1a1b: s }
    }
}

/// How a [`Generator4`] was assembled.
#[derive(Clone, Debug, PartialEq)]
pub enum Form4 {
    Traffic,
    /// Identical subsystems `s` joined by one common rate.
    Symmetric { s: Generator2, coupling: Rate },
    KronSum,
    Interaction,
    Dense,
}

/// 4×4 time-dependent rate generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator4 {
    entries: Vec<Rate>,
    form: Form4,
    basis: Basis4,
}

impl Generator4 {
    /// Generator from 16 row-major rates acting on the given ordering.
    pub fn from_rates(entries: Vec<Rate>, basis: Basis4) -> Result<Self> {
        Self::with_form(entries, Form4::Dense, basis)
    }

    pub(crate) fn with_form(entries: Vec<Rate>, form: Form4, basis: Basis4) -> Result<Self> {
        if entries.len() != 16 {
            return Err(Error::DimensionMismatch { expected: 16, found: entries.len() });
        }
        if !entries.iter().all(Rate::is_finite) {
            return Err(Error::NonFinite("generator rates"));
        }
        Ok(Self { entries, form, basis })
    }

    /// Constant generator.
    pub fn dense(m: &RealMatrix, basis: Basis4) -> Result<Self> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: m.rows().max(m.cols()) });
        }
        Self::from_rates(m.as_slice().iter().map(|&v| Rate::Constant(v)).collect(), basis)
    }

    /// Block layout
    ///
    /// ```text
    /// [ sA11  sA12  0     c14  ]
    /// [ sA21  sA22  c23   0    ]
    /// [ 0     c32   sB11  sB12 ]
    /// [ c41   0     sB21  sB22 ]
    /// ```
    ///
    /// on the traffic ordering.
    pub fn traffic(sa: &Generator2, sb: &Generator2, cross: &CrossCouplings) -> Self {
        let z = Rate::Constant(0.0);
        let entries = alloc::vec![
            sa.s11.clone(), sa.s12.clone(), z.clone(), cross.s_1a2b.clone(),
            sa.s21.clone(), sa.s22.clone(), cross.s_2a2b.clone(), z.clone(),
            z.clone(), cross.s_2a1b.clone(), sb.s11.clone(), sb.s12.clone(),
            cross.s_1a1b.clone(), z, sb.s21.clone(), sb.s22.clone(),
        ];
        Self { entries, form: Form4::Traffic, basis: Basis4::Traffic }
    }

    /// Two copies of `s` joined by the rate `coupling` in all four cross
    /// slots of the traffic layout.
    pub fn symmetric(s: &Generator2, coupling: Rate) -> Self {
        let mut g = Self::traffic(s, s, &CrossCouplings::uniform(coupling.clone()));
        g.form = Form4::Symmetric { s: s.clone(), coupling };
        g
    }

    /// `S_A ⊗ I + I ⊗ S_B` on the product ordering.
    pub fn kron_sum(sa: &Generator2, sb: &Generator2) -> Self {
        let a = sa.rates();
        let b = sb.rates();
        let mut entries = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                let (ia, ib, ja, jb) = (i / 2, i % 2, j / 2, j % 2);
                let mut terms = Vec::new();
                if ib == jb {
                    terms.push((1.0, a[2 * ia + ja].clone()));
                }
                if ia == ja {
                    terms.push((1.0, b[2 * ib + jb].clone()));
                }
                entries.push(Rate::combination(terms));
            }
        }
        Self { entries, form: Form4::KronSum, basis: Basis4::Product }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rate {
        &self.entries[4 * i + j]
    }

    pub fn at(&self, t: f64) -> RealMatrix {
        RealMatrix::from_fn(4, 4, |i, j| self.entry(i, j).at(t))
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(Rate::is_constant)
    }

    pub fn form(&self) -> &Form4 {
        &self.form
    }

    /// Ordering of the state this generator acts on.
    pub fn basis(&self) -> Basis4 {
        self.basis
    }
}

/// See [`Generator4::traffic`].
pub fn build_traffic_generator(sa: &Generator2, sb: &Generator2, cross: &CrossCouplings) -> Generator4 {
    Generator4::traffic(sa, sb, cross)
}

/// See [`Generator4::kron_sum`].
pub fn kron_sum_generator(sa: &Generator2, sb: &Generator2) -> Generator4 {
    Generator4::kron_sum(sa, sb)
}
