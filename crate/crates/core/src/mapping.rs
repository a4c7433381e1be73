//! The 2N real image of an N-level quantum evolution.
//!
//! An amplitude `γk = √pk·e^{iΘk}` becomes the pair
//! `y = (√pk·cosΘk, √pk·sinΘk)`, which moves linearly under the real form
//! `A` of `−i·H`. Squaring gives the split state
//! `x = (pk·cos²Θk, pk·sin²Θk)`, and `dx/dt = S·x` with
//! `S_mj = 2·A_mj·y_m/y_j` wherever every `x_j` is above [`SPLIT_FLOOR`].
//! `S` depends on the state, so it certifies a known quantum trajectory
//! rather than defining an autonomous classical model.

use alloc::vec::Vec;

use crate::numkit::{ode_evolve, ComplexMatrix, RealMatrix};
use crate::quantum::{build_hamiltonian, evolve_schrodinger, polar_split, TBHamiltonian2Q, WaveState4};
use crate::{Complex64, Error, Result};

/// Smallest split component admitted in the denominators of `S`.
pub const SPLIT_FLOOR: f64 = 1e-12;

/// `(Re p_I, Im p_I, …, Re p_IV, Im p_IV)` with `Re pk = pk·cos²Θk` and
/// `Im pk = pk·sin²Θk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitState8 {
    pub x: [f64; 8],
}

impl SplitState8 {
    pub fn probabilities(&self) -> [f64; 4] {
        core::array::from_fn(|k| self.x[2 * k] + self.x[2 * k + 1])
    }
}

pub fn split_state(p: [f64; 4], theta: [f64; 4]) -> SplitState8 {
    let mut x = [0.0; 8];
    for k in 0..4 {
        let (s, c) = theta[k].sin_cos();
        x[2 * k] = p[k] * c * c;
        x[2 * k + 1] = p[k] * s * s;
    }
    SplitState8 { x }
}

/// `pk = Re + Im` and `tan²Θk = Im/Re`, with `+∞` where `Re` is below
/// [`SPLIT_FLOOR`]. The quadrant of `Θk` is not recoverable.
pub fn phase_from_split(x: &SplitState8) -> ([f64; 4], [f64; 4]) {
    let tan2 = core::array::from_fn(|k| {
        let (re, im) = (x.x[2 * k], x.x[2 * k + 1]);
        if re < SPLIT_FLOOR {
            f64::INFINITY
        } else {
            im / re
        }
    });
    (x.probabilities(), tan2)
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Real `2N×2N` generator on the interleaved `(Re γ, Im γ)` vector: block
/// `(k, j)` is `[[Im H_kj, Re H_kj], [−Re H_kj, Im H_kj]]`, so that
/// `dx/dt = A·x` is `dψ/dt = −i·H·ψ`.
pub fn real_form_generator(h: &ComplexMatrix) -> Result<RealMatrix> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    check_dim(h.rows())?;
    Ok(RealMatrix::from_fn(2 * h.rows(), 2 * h.cols(), |m, j| {
        let z = h[(m / 2, j / 2)];
        match (m % 2, j % 2) {
            (0, 0) | (1, 1) => z.im,
            (0, 1) => z.re,
            _ => -z.re,
        }
    }))
}

/// `(Re γ1, Im γ1, Re γ2, …)`.
pub fn embed(psi: &[Complex64]) -> Vec<f64> {
    psi.iter().flat_map(|g| [g.re, g.im]).collect()
}

/// Inverse of [`embed`].
pub fn reconstruct(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// `S_mj = 2·A_mj·y_m/y_j` at the state `psi`, for `N ∈ {2, 4}`.
pub fn build_s_matrix(h: &ComplexMatrix, psi: &[Complex64]) -> Result<RealMatrix> {
    let a = real_form_generator(h)?;
    if psi.len() != h.rows() {
        return Err(Error::DimensionMismatch { expected: h.rows(), found: psi.len() });
    }
    let y = embed(psi);
    for (j, v) in y.iter().enumerate() {
        if !(v * v >= SPLIT_FLOOR) {
            return Err(Error::BelowFloor { index: j, value: v * v });
        }
    }
    Ok(RealMatrix::from_fn(y.len(), y.len(), |m, j| 2.0 * a[(m, j)] * y[m] / y[j]))
}

/// [`build_s_matrix`] for the two-qubit Hamiltonian.
pub fn build_s8(h: &TBHamiltonian2Q, psi: &WaveState4) -> Result<RealMatrix> {
    build_s_matrix(&build_hamiltonian(h), &psi.gamma)
}

/// `dx/dt` of the split state along `dψ/dt = −i·H·ψ`: `2·y ⊙ (A·y)`.
pub fn split_derivative(h: &ComplexMatrix, psi: &[Complex64]) -> Result<Vec<f64>> {
    let a = real_form_generator(h)?;
    let y = embed(psi);
    Ok(a.mul_vec(&y).iter().zip(&y).map(|(ay, y)| 2.0 * y * ay).collect())
}

/// Vector potential sampled at the four sites.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VectorPotential {
    /// `A_x` at `1A, 2A, 1B, 2B`.
    pub ax: [f64; 4],
    /// Dot diameter.
    pub delta_l: f64,
    pub e_over_hbar: f64,
}

/// Adds `(A_x(iA) + A_x(jB))·ΔL·e/ħ` to the phase of the level `(iA, jB)`.
pub fn apply_aharonov_bohm(theta: [f64; 4], v: &VectorPotential) -> [f64; 4] {
    let k = v.delta_l * v.e_over_hbar;
    let [a1, a2, b1, b2] = v.ax;
    let shift = [a1 + b1, a1 + b2, a2 + b1, a2 + b2];
    core::array::from_fn(|i| theta[i] + shift[i] * k)
}

/// Outcome of [`verify_equivalence`].
#[derive(Clone, Debug, PartialEq)]
pub struct MappingReport {
    pub samples: usize,
    pub times: Vec<f64>,
    /// Split state `x` per sample.
    pub split: Vec<Vec<f64>>,
    /// `max ‖Δx/Δt − S·x‖∞` over interior samples outside excluded
    /// intervals, with `Δx/Δt` the central difference of the split
    /// trajectory.
    pub max_residual: f64,
    /// `‖Δx/Δt − S·x‖∞` per sample; `NaN` at the two ends and wherever the
    /// stencil touches an excluded sample.
    pub residuals: Vec<f64>,
    /// `max |pk − (x_{2k−1} + x_{2k})|`.
    pub split_error: f64,
    /// `max |tan²Θ_recovered − tan²Θ| / max(1, tan²Θ)` where defined.
    pub tan2_error: f64,
    /// `max |Θ̇_fd − Im(γ̄·γ̇)/p|` from central differences of the unwrapped
    /// phases.
    pub phase_velocity_error: f64,
    /// `max |ψ − reconstruct(x)|` with `x` integrated under the real form.
    pub embedding_error: f64,
    /// `Σpk` per sample.
    pub total_probability: Vec<f64>,
    /// `max |Σp(t) − Σp(t0)|`.
    pub conservation_error: f64,
    pub monotone_nonincreasing: bool,
    pub hermitian: bool,
    /// Time spans where some split component is below [`SPLIT_FLOOR`].
    pub excluded: Vec<(f64, f64)>,
}

/// Runs the quantum evolution of `psi0` under `h(t)` and certifies its 2N
/// image.
pub fn verify_equivalence_with<H>(h: H, psi0: &[Complex64], t0: f64, t1: f64, dt: f64) -> Result<MappingReport>
where
    H: Fn(f64) -> ComplexMatrix,
{
    check_dim(psi0.len())?;
    let traj = evolve_schrodinger(&h, psi0, t0, t1, dt)?;
    let x0 = embed(psi0);
    let real = ode_evolve(|t| real_form_generator(&h(t)).unwrap_or_else(|_| RealMatrix::zeros(0, 0)), &x0, t0, t1, dt)?;
    let polar = polar_split(&traj);
    let n = psi0.len();
    let times = traj.times();
    let states = traj.states();

    let split: Vec<Vec<f64>> = (0..traj.len())
        .map(|i| {
            (0..n)
                .flat_map(|k| {
                    let (s, c) = polar.theta[i][k].sin_cos();
                    let p = polar.p[i][k];
                    [p * c * c, p * s * s]
                })
                .collect()
        })
        .collect();
    let below: Vec<bool> = split.iter().map(|x| x.iter().any(|&v| v < SPLIT_FLOOR)).collect();

    let mut report = MappingReport {
        samples: traj.len(),
        times: times.to_vec(),
        split: Vec::new(),
        max_residual: 0.0,
        residuals: alloc::vec![f64::NAN; traj.len()],
        split_error: 0.0,
        tan2_error: 0.0,
        phase_velocity_error: 0.0,
        embedding_error: 0.0,
        total_probability: polar.p.iter().map(|p| p.iter().sum()).collect(),
        conservation_error: 0.0,
        monotone_nonincreasing: true,
        hermitian: (0..=1).all(|k| {
            let m = h(t0 + k as f64 * (t1 - t0));
            m.max_abs_diff(&m.adjoint()) <= 1e-12
        }),
        excluded: Vec::new(),
    };

    let mut open: Option<f64> = None;
    for i in 0..traj.len() {
        match (below[i], open) {
            (true, None) => open = Some(times[i]),
            (false, Some(start)) => {
                report.excluded.push((start, times[i - 1]));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        report.excluded.push((start, times[traj.len() - 1]));
    }

    for i in 0..traj.len() {
        let x = &split[i];
        for k in 0..n {
            let p = polar.p[i][k];
            report.split_error = report.split_error.max((p - (x[2 * k] + x[2 * k + 1])).abs());
            if x[2 * k] >= SPLIT_FLOOR {
                let truth = polar.theta[i][k].tan().powi(2);
                let got = x[2 * k + 1] / x[2 * k];
                report.tan2_error = report.tan2_error.max((got - truth).abs() / truth.max(1.0));
            }
        }
        let back = reconstruct(&real.states()[i]);
        let gap = back.iter().zip(&states[i]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        report.embedding_error = report.embedding_error.max(gap);
        let total = report.total_probability[i];
        report.conservation_error = report.conservation_error.max((total - report.total_probability[0]).abs());
        if i > 0 && total > report.total_probability[i - 1] {
            report.monotone_nonincreasing = false;
        }

        if i == 0 || i + 1 == traj.len() || below[i - 1] || below[i] || below[i + 1] {
            continue;
        }
        let step = times[i + 1] - times[i - 1];
        let hm = h(times[i]);
        let s = build_s_matrix(&hm, &states[i])?;
        let sx = s.mul_vec(x);
        let mut worst = 0.0f64;
        for m in 0..2 * n {
            let fd = (split[i + 1][m] - split[i - 1][m]) / step;
            worst = worst.max((fd - sx[m]).abs());
        }
        report.residuals[i] = worst;
        report.max_residual = report.max_residual.max(worst);
        let dpsi: Vec<Complex64> = hm.mul_vec(&states[i]).iter().map(|z| z * Complex64::new(0.0, -1.0)).collect();
        for k in 0..n {
            let fd = (polar.theta[i + 1][k] - polar.theta[i - 1][k]) / step;
            let exact = (states[i][k].conj() * dpsi[k]).im / polar.p[i][k];
            report.phase_velocity_error = report.phase_velocity_error.max((fd - exact).abs());
        }
    }
    report.split = split;
    Ok(report)
}

/// [`verify_equivalence_with`] for a constant two-qubit Hamiltonian.
pub fn verify_equivalence(h: &TBHamiltonian2Q, psi0: &WaveState4, t0: f64, t1: f64, dt: f64) -> Result<MappingReport> {
    let m = build_hamiltonian(h);
    verify_equivalence_with(|_| m.clone(), &psi0.gamma, t0, t1, dt)
}
