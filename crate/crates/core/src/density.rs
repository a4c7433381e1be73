//! Square-root amplitudes `a = √p`, the state-dependent generator that moves
//! them, the classical density matrix `ρ = a·aᵀ` and reduced densities with
//! their von Neumann entropies.
//!
//! For `dp/dt = S·p` the amplitudes obey `da/dt = H(p)·a` with
//! `H_ij = ½·√(p_j/p_i)·s_ij`, that is `H = ½·D⁻¹·S·D` with `D = diag(√p)`.
//! The density then moves by `dρ/dt = H·ρ + ρ·Hᵀ`; this equals the
//! anticommutator `H·ρ + ρ·H` only when `H` is symmetric.

use alloc::vec::Vec;

use crate::coupled::{Generator4, ProbState4};
use crate::numkit::{mat_exp, rk4_evolve, ComplexMatrix, RealMatrix, Trajectory};
use crate::{Complex64, Error, Result};

/// Smallest probability admitted inside `D(p)⁻¹`.
pub const PROB_FLOOR: f64 = 1e-12;
/// Largest tolerated gap between the squared amplitude flow and the
/// master equation before [`evolve_sqrt`] reports a step-size problem.
pub const DIVERGENCE_LIMIT: f64 = 1e-6;
/// Eigenvalues of a reduced density below `−NEGATIVE_TOL` are an error;
/// smaller negative values are clipped to zero.
pub const NEGATIVE_TOL: f64 = 1e-8;

/// What to do with probabilities below [`PROB_FLOOR`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Regularization {
    /// Fail with [`Error::BelowFloor`].
    #[default]
    Strict,
    /// Raise them to the floor.
    Clamp,
}

fn floored(p: f64, index: usize, reg: Regularization) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::NonFinite("probability"));
    }
    if p >= PROB_FLOOR {
        return Ok(p);
    }
    match reg {
        Regularization::Strict => Err(Error::BelowFloor { index, value: p }),
        Regularization::Clamp => Ok(PROB_FLOOR),
    }
}

/// Principal square roots of four probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqrtState4 {
    pub a: [f64; 4],
}

impl SqrtState4 {
    pub fn from_probabilities(p: &ProbState4) -> Self {
        Self { a: p.p.map(f64::sqrt) }
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.a.map(|x| x * x)
    }
}

/// `H = ½·D⁻¹·S·D` for an `N×N` generator and `N` probabilities.
pub fn sqrt_hamiltonian(s: &RealMatrix, p: &[f64], reg: Regularization) -> Result<RealMatrix> {
    let n = p.len();
    if s.rows() != n || s.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: s.rows() });
    }
    let root: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(k, &x)| floored(x, k, reg).map(f64::sqrt))
        .collect::<Result<_>>()?;
    let h = RealMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.5 * s[(i, i)]
        } else {
            0.5 * (root[j] / root[i]) * s[(i, j)]
        }
    });
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::NonFinite("square-root generator"))
    }
}

/// [`sqrt_hamiltonian`] of `S(t)` at the state `p`.
pub fn sqrt_dynamics_generator(g: &Generator4, t: f64, p: &ProbState4, reg: Regularization) -> Result<RealMatrix> {
    sqrt_hamiltonian(&g.at(t), &p.p, reg)
}

/// Amplitude trajectory and its agreement with the master equation.
#[derive(Clone, Debug, PartialEq)]
pub struct SqrtEvolution {
    /// `a(t)` on the RK grid.
    pub amplitudes: Trajectory<f64>,
    /// `max_t max_k |a_k(t)² − p_k(t)|` against RK on `dp/dt = S·p` with the
    /// same grid.
    pub max_divergence: f64,
}

impl SqrtEvolution {
    pub fn probabilities(&self) -> Trajectory<f64> {
        self.amplitudes.map(|a| a.iter().map(|x| x * x).collect())
    }
}

/// Integrates `da/dt = H(t, a²)·a` by RK4. Every stage must keep
/// `a_k² ≥ PROB_FLOOR`; the squared trajectory is compared with the master
/// equation on the same grid and a gap above [`DIVERGENCE_LIMIT`] is an
/// error.
pub fn evolve_sqrt(g: &Generator4, p0: &ProbState4, t0: f64, t: f64, dt: f64) -> Result<SqrtEvolution> {
    let a0 = SqrtState4::from_probabilities(p0).a;
    for (k, &x) in a0.iter().enumerate() {
        floored(x * x, k, Regularization::Strict)?;
    }
    let amplitudes = rk4_evolve(
        |s, a| {
            let p: Vec<f64> = a.iter().map(|x| x * x).collect();
            Ok(sqrt_hamiltonian(&g.at(s), &p, Regularization::Strict)?.mul_vec(a))
        },
        &a0,
        t0,
        t,
        dt,
    )?;
    let master = rk4_evolve(|s, p| Ok(g.at(s).mul_vec(p)), &p0.p, t0, t, dt)?;
    let max_divergence = amplitudes
        .states()
        .iter()
        .zip(master.states())
        .flat_map(|(a, p)| a.iter().zip(p).map(|(x, y)| (x * x - y).abs()))
        .fold(0.0, f64::max);
    if !(max_divergence <= DIVERGENCE_LIMIT) {
        return Err(Error::Divergence(max_divergence));
    }
    Ok(SqrtEvolution { amplitudes, max_divergence })
}

/// Rank-one classical density `ρ = a·aᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDensity4 {
    rho: RealMatrix,
}

impl ClassicalDensity4 {
    pub fn matrix(&self) -> &RealMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace()
    }
}

pub fn density_from_state(a: &SqrtState4) -> ClassicalDensity4 {
    ClassicalDensity4 { rho: RealMatrix::from_fn(4, 4, |i, j| a.a[i] * a.a[j]) }
}

/// Both candidate right-hand sides of the density equation of motion,
/// measured against a central difference of the exact flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EomResidual {
    /// `‖Δρ/Δt − (H·ρ + ρ·Hᵀ)‖∞`.
    pub transpose_form: f64,
    /// `‖Δρ/Δt − (H·ρ + ρ·H)‖∞`.
    pub anticommutator: f64,
    /// `‖H − Hᵀ‖∞`.
    pub asymmetry: f64,
}

/// Compares `(ρ(t+h) − ρ(t−h))/2h`, with `ρ(t±h)` from `exp(±S·h)·p`, to
/// the two candidate right-hand sides at `ρ(t) = √p·√pᵀ`.
pub fn density_eom_residual(g: &Generator4, p: &ProbState4, h: f64) -> Result<EomResidual> {
    if !g.is_constant() {
        return Err(Error::NotConstant("generator"));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep(h));
    }
    let s = g.at(0.0);
    let rho_at = |sign: f64| -> Result<RealMatrix> {
        let q = mat_exp(&s.scaled(sign * h))?.mul_vec(&p.p);
        for (k, &x) in q.iter().enumerate() {
            floored(x, k, Regularization::Strict)?;
        }
        let a = SqrtState4 { a: [q[0].sqrt(), q[1].sqrt(), q[2].sqrt(), q[3].sqrt()] };
        Ok(density_from_state(&a).rho)
    };
    let drho = (&rho_at(1.0)? - &rho_at(-1.0)?).scaled(1.0 / (2.0 * h));
    let hm = sqrt_hamiltonian(&s, &p.p, Regularization::Strict)?;
    let rho = density_from_state(&SqrtState4::from_probabilities(p)).rho;
    let ht = hm.transpose();
    let transpose_rhs = &(&hm * &rho) + &(&rho * &ht);
    let anti_rhs = &(&hm * &rho) + &(&rho * &hm);
    Ok(EomResidual {
        transpose_form: (&drho - &transpose_rhs).norm_inf(),
        anticommutator: (&drho - &anti_rhs).norm_inf(),
        asymmetry: (&hm - &ht).norm_inf(),
    })
}

/// Which subsystem a reduced density describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Index convention of the 4×4 density.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Ordering {
    /// `(1A1B, 1A2B, 2A1B, 2A2B)`: A is the slow index. With this ordering
    /// `ρ_A = [[ρ11+ρ22, ρ13+ρ24], [ρ31+ρ42, ρ33+ρ44]]` and
    /// `ρ_B = [[ρ11+ρ33, ρ12+ρ34], [ρ21+ρ43, ρ22+ρ44]]`.
    #[default]
    AMajor,
    /// `(1A1B, 2A1B, 1A2B, 2A2B)`: the roles of the two formulas swap.
    BMajor,
}

/// Unit-trace 2×2 density.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity2 {
    rho: ComplexMatrix,
}

impl ReducedDensity2 {
    /// Checked constructor: 2×2 with unit trace within `1e-12`.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.rows() != 2 || rho.cols() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: rho.rows() });
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::NotNormalized(tr.re));
        }
        Ok(Self { rho })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.rho[(0, 0)].re;
        let d = self.rho[(1, 1)].re;
        let b = 0.5 * (self.rho[(0, 1)] + self.rho[(1, 0)].conj());
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }
}

/// Partial trace of a 4×4 density, normalized by its trace.
pub fn reduced_density(rho: &ComplexMatrix, subsystem: Subsystem, ordering: Ordering) -> Result<ReducedDensity2> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.rows() });
    }
    if !rho.is_finite() {
        return Err(Error::NonFinite("density"));
    }
    let tr = rho.trace().re;
    if !(tr > 1e-300) {
        return Err(Error::ZeroTrace);
    }
    let keep_slow = matches!(
        (subsystem, ordering),
        (Subsystem::A, Ordering::AMajor) | (Subsystem::B, Ordering::BMajor)
    );
    let r = |i: usize, j: usize| rho[(i - 1, j - 1)];
    let m = if keep_slow {
        [[r(1, 1) + r(2, 2), r(1, 3) + r(2, 4)], [r(3, 1) + r(4, 2), r(3, 3) + r(4, 4)]]
    } else {
        [[r(1, 1) + r(3, 3), r(1, 2) + r(3, 4)], [r(2, 1) + r(4, 3), r(2, 2) + r(4, 4)]]
    };
    Ok(ReducedDensity2 { rho: ComplexMatrix::from_rows(&m).scaled(Complex64::new(1.0 / tr, 0.0)) })
}

/// [`reduced_density`] of a real density.
pub fn reduced_density_real(rho: &RealMatrix, subsystem: Subsystem, ordering: Ordering) -> Result<ReducedDensity2> {
    reduced_density(&rho.to_complex(), subsystem, ordering)
}

/// `S = −Σ λ ln λ` in nats, with `0·ln 0 = 0`. Eigenvalues in
/// `[−1e-8, 0)` are clipped to zero.
pub fn von_neumann_entropy(rho: &ReducedDensity2) -> Result<f64> {
    let mut s = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < -NEGATIVE_TOL {
            return Err(Error::NegativeEigenvalue(lambda));
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}

/// `(S_A, S_B)` of the classical density built from `p` read in the product
/// ordering.
pub fn classical_entropies(p: &ProbState4) -> Result<(f64, f64)> {
    let rho = density_from_state(&SqrtState4::from_probabilities(p)).rho;
    let sa = von_neumann_entropy(&reduced_density_real(&rho, Subsystem::A, Ordering::AMajor)?)?;
    let sb = von_neumann_entropy(&reduced_density_real(&rho, Subsystem::B, Ordering::AMajor)?)?;
    Ok((sa, sb))
}
