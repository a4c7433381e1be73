//! Two electrostatically coupled position-based qubits in a minimal
//! tight-binding model, with `ħ = 1`.
//!
//! The basis is `(1A1B, 1A2B, 2A1B, 2A2B)`. On-site energies may be complex;
//! a negative imaginary part removes probability from that site.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::density::{reduced_density, von_neumann_entropy, Ordering, Subsystem};
use crate::numkit::{mat_exp, ode_evolve, ComplexMatrix, Trajectory};
use crate::{Complex64, Error, Result};

/// Below this `|γ|²` a phase is undefined and held at its last value.
pub const PHASE_FLOOR: f64 = 1e-14;
/// Tolerance of [`TBHamiltonian2Q::check_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Hopping amplitudes of one qubit, one per direction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Hopping {
    pub one_to_two: Complex64,
    pub two_to_one: Complex64,
}

impl Hopping {
    /// `t` for `2 → 1` and `conj(t)` for `1 → 2`.
    pub fn hermitian(t: Complex64) -> Self {
        Self { one_to_two: t.conj(), two_to_one: t }
    }

    pub fn real(t: f64) -> Self {
        Self::hermitian(Complex64::new(t, 0.0))
    }
}

/// Parameters of the two-qubit Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TBHamiltonian2Q {
    pub ep1a: Complex64,
    pub ep2a: Complex64,
    pub ep1b: Complex64,
    pub ep2b: Complex64,
    pub ts_a: Hopping,
    pub ts_b: Hopping,
    /// Coulomb energy between site `i` of A and site `j` of B.
    pub ec11: f64,
    pub ec12: f64,
    pub ec21: f64,
    pub ec22: f64,
}

impl TBHamiltonian2Q {
    /// Real on-site energies, real symmetric hoppings.
    pub fn hermitian(ep: [f64; 4], ts_a: f64, ts_b: f64, ec: [f64; 4]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self {
            ep1a: c(ep[0]),
            ep2a: c(ep[1]),
            ep1b: c(ep[2]),
            ep2b: c(ep[3]),
            ts_a: Hopping::real(ts_a),
            ts_b: Hopping::real(ts_b),
            ec11: ec[0],
            ec12: ec[1],
            ec21: ec[2],
            ec22: ec[3],
        }
    }

    /// Adds `−i·kappa` to every on-site energy.
    pub fn with_escape(mut self, kappa: f64) -> Self {
        for e in [&mut self.ep1a, &mut self.ep2a, &mut self.ep1b, &mut self.ep2b] {
            e.im -= kappa;
        }
        self
    }

    /// Fails with the largest defect unless the on-site energies are real and
    /// each qubit's hoppings are conjugate.
    pub fn check_hermitian(&self) -> Result<()> {
        let defect = [self.ep1a, self.ep2a, self.ep1b, self.ep2b]
            .iter()
            .map(|e| e.im.abs())
            .chain([self.ts_a, self.ts_b].iter().map(|h| (h.one_to_two - h.two_to_one.conj()).norm()))
            .fold(0.0, f64::max);
        if defect <= HERMITIAN_TOL {
            Ok(())
        } else {
            Err(Error::NotHermitian(defect))
        }
    }

    pub fn is_finite(&self) -> bool {
        let c = [self.ep1a, self.ep2a, self.ep1b, self.ep2b];
        let h = [self.ts_a.one_to_two, self.ts_a.two_to_one, self.ts_b.one_to_two, self.ts_b.two_to_one];
        c.iter().chain(&h).all(|z| z.re.is_finite() && z.im.is_finite())
            && [self.ec11, self.ec12, self.ec21, self.ec22].iter().all(|x| x.is_finite())
    }
}

/// The 4×4 matrix
///
/// ```text
/// [ E1A+E1B+Ec11  tB(2→1)       tA(2→1)       0            ]
/// [ tB(1→2)       E1A+E2B+Ec12  0             tA(2→1)      ]
/// [ tA(1→2)       0             E2A+E1B+Ec21  tB(2→1)      ]
/// [ 0             tA(1→2)       tB(1→2)       E2A+E2B+Ec22 ]
/// ```
pub fn build_hamiltonian(h: &TBHamiltonian2Q) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    let (a, b) = (h.ts_a, h.ts_b);
    ComplexMatrix::from_rows(&[
        [h.ep1a + h.ep1b + c(h.ec11), b.two_to_one, a.two_to_one, z],
        [b.one_to_two, h.ep1a + h.ep2b + c(h.ec12), z, a.two_to_one],
        [a.one_to_two, z, h.ep2a + h.ep1b + c(h.ec21), b.two_to_one],
        [z, a.one_to_two, b.one_to_two, h.ep2a + h.ep2b + c(h.ec22)],
    ])
}

/// `q²/d` in whatever units the caller uses.
pub fn coulomb_energy(charge: f64, distance: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() || !charge.is_finite() {
        return Err(Error::VanishingDenominator("coulomb distance"));
    }
    Ok(charge * charge / distance)
}

/// Amplitudes `γ1..γ4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveState4 {
    pub gamma: [Complex64; 4],
}

impl WaveState4 {
    pub fn new(gamma: [Complex64; 4]) -> Self {
        Self { gamma }
    }

    /// `γk = √pk·e^{iΘk}`.
    pub fn from_polar(p: [f64; 4], theta: [f64; 4]) -> Self {
        Self { gamma: core::array::from_fn(|k| Complex64::from_polar(p[k].sqrt(), theta[k])) }
    }

    pub fn from_slice(v: &[Complex64]) -> Result<Self> {
        let gamma: [Complex64; 4] =
            v.try_into().map_err(|_| Error::DimensionMismatch { expected: 4, found: v.len() })?;
        Ok(Self { gamma })
    }

    /// `(pk, Θk)` with `Θk ∈ (−π, π]`.
    pub fn polar(&self) -> ([f64; 4], [f64; 4]) {
        (self.gamma.map(|g| g.norm_sqr()), self.gamma.map(|g| g.arg()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.gamma.iter().map(|g| g.norm_sqr()).sum()
    }
}

/// RK4 trajectory of `dψ/dt = −i·H(t)·ψ` for any dimension.
pub fn evolve_schrodinger<H>(h: H, psi0: &[Complex64], t0: f64, t: f64, dt: f64) -> Result<Trajectory<Complex64>>
where
    H: Fn(f64) -> ComplexMatrix,
{
    ode_evolve(|s| h(s).scaled(-I), psi0, t0, t, dt)
}

/// `exp(−i·H·t)·ψ0` for constant `H`.
pub fn schrodinger_exact(h: &ComplexMatrix, psi0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    Ok(mat_exp(&h.scaled(-I * t))?.mul_vec(psi0))
}

/// `⟨ψ|H|ψ⟩`.
pub fn expectation(h: &ComplexMatrix, psi: &[Complex64]) -> Complex64 {
    let hp = h.mul_vec(psi);
    psi.iter().zip(&hp).map(|(a, b)| a.conj() * b).sum()
}

/// Occupancies and continuous phases along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarTrajectory {
    pub times: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    /// `held[i][k]`: `pk < PHASE_FLOOR` at sample `i`, so `Θk` was carried
    /// over.
    pub held: Vec<Vec<bool>>,
}

impl PolarTrajectory {
    pub fn any_held(&self) -> bool {
        self.held.iter().flatten().any(|&h| h)
    }
}

/// `pk = |γk|²` and `Θk` unwrapped greedily: each sample takes the branch of
/// `arg γk` nearest to the previous phase.
pub fn polar_split(traj: &Trajectory<Complex64>) -> PolarTrajectory {
    let mut out = PolarTrajectory {
        times: traj.times().to_vec(),
        p: Vec::with_capacity(traj.len()),
        theta: Vec::with_capacity(traj.len()),
        held: Vec::with_capacity(traj.len()),
    };
    let mut prev: Option<Vec<f64>> = None;
    for (_, psi) in traj.iter() {
        let p: Vec<f64> = psi.iter().map(|g| g.norm_sqr()).collect();
        let held: Vec<bool> = p.iter().map(|&x| x < PHASE_FLOOR).collect();
        let theta: Vec<f64> = psi
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let last = prev.as_ref().map(|v| v[k]);
                match (held[k], last) {
                    (true, Some(last)) => last,
                    (true, None) => 0.0,
                    (false, None) => g.arg(),
                    (false, Some(last)) => nearest_branch(g.arg(), last),
                }
            })
            .collect();
        prev = Some(theta.clone());
        out.p.push(p);
        out.theta.push(theta);
        out.held.push(held);
    }
    out
}

fn nearest_branch(angle: f64, reference: f64) -> f64 {
    let mut d = (angle - reference) % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    reference + d
}

/// `(S_A, S_B)` of the pure state `ψψ†/‖ψ‖²`.
pub fn pure_entropy_pair(psi: &WaveState4) -> Result<(f64, f64)> {
    let g = psi.gamma;
    let rho = ComplexMatrix::from_fn(4, 4, |i, j| g[i] * g[j].conj());
    let sa = von_neumann_entropy(&reduced_density(&rho, Subsystem::A, Ordering::AMajor)?)?;
    let sb = von_neumann_entropy(&reduced_density(&rho, Subsystem::B, Ordering::AMajor)?)?;
    Ok((sa, sb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::max_abs_diff;
    use core::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn reference() -> TBHamiltonian2Q {
        TBHamiltonian2Q::hermitian([1.0, 1.05, 0.95, 1.0], 0.1, 0.1, [0.2, 0.05, 0.05, 0.2])
    }

    #[test]
    fn matrix_layout() {
        let mut h = TBHamiltonian2Q {
            ep1a: c(1.0),
            ep2a: c(2.0),
            ep1b: c(10.0),
            ep2b: c(20.0),
            ec11: 0.1,
            ec12: 0.2,
            ec21: 0.3,
            ec22: 0.4,
            ..Default::default()
        };
        let m = build_hamiltonian(&h);
        assert_eq!(m.diagonal(), [c(11.1), c(21.2), c(12.3), c(22.4)]);
        assert_eq!(m.max_abs_diff(&ComplexMatrix::from_diag(&m.diagonal())), 0.0);
        h.ts_a = Hopping { one_to_two: c(1.0), two_to_one: c(2.0) };
        h.ts_b = Hopping { one_to_two: c(3.0), two_to_one: c(4.0) };
        let m = build_hamiltonian(&h);
        assert_eq!((m[(0, 1)], m[(1, 0)], m[(2, 3)], m[(3, 2)]), (c(4.0), c(3.0), c(4.0), c(3.0)));
        assert_eq!((m[(0, 2)], m[(2, 0)], m[(1, 3)], m[(3, 1)]), (c(2.0), c(1.0), c(2.0), c(1.0)));
        assert_eq!((m[(0, 3)], m[(3, 0)], m[(1, 2)], m[(2, 1)]), (c(0.0), c(0.0), c(0.0), c(0.0)));
        assert!(h.check_hermitian().is_err());
    }

    #[test]
    fn hermitian_parameters_give_hermitian_matrix() {
        let mut h = reference();
        h.ts_a = Hopping::hermitian(Complex64::new(0.1, 0.03));
        h.check_hermitian().unwrap();
        let m = build_hamiltonian(&h);
        assert!(m.max_abs_diff(&m.adjoint()) <= 1e-15);
        assert!(matches!(h.with_escape(0.1).check_hermitian(), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn coulomb_helper() {
        assert_eq!(coulomb_energy(2.0, 4.0).unwrap(), 1.0);
        assert!(coulomb_energy(1.0, 0.0).is_err());
    }

    #[test]
    fn free_and_diagonal_evolution() {
        let psi0 = [c(0.5), Complex64::new(0.0, 0.5), c(-0.5), c(0.5)];
        let tr = evolve_schrodinger(|_| ComplexMatrix::zeros(4, 4), &psi0, 0.0, 1.0, 0.1).unwrap();
        assert!(tr.iter().all(|(_, y)| y == psi0));
        let e = [0.3, -1.0, 2.0, 0.5];
        let h = ComplexMatrix::from_diag(&e.map(c));
        let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 2.0, 1e-3).unwrap();
        let (t, last) = tr.last().unwrap();
        let expect: Vec<Complex64> = (0..4).map(|k| (-I * e[k] * t).exp() * psi0[k]).collect();
        assert!(max_abs_diff(last, &expect) < 1e-10);
    }

    #[test]
    fn rk_matches_exponential() {
        let h = build_hamiltonian(&reference());
        let psi0 = [c(1.0), c(0.0), c(0.0), c(0.0)];
        let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 3.0, 1e-3).unwrap();
        let exact = schrodinger_exact(&h, &psi0, 3.0).unwrap();
        assert!(max_abs_diff(tr.last().unwrap().1, &exact) <= 1e-8);
    }

    #[test]
    fn polar_examples() {
        let w = WaveState4::new([c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(w.polar(), ([1.0, 0.0, 0.0, 0.0], [0.0; 4]));
        let e = 1.3;
        let psi0 = [c(0.5); 4];
        let h = ComplexMatrix::identity(4).scaled(c(e));
        let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 10.0, 1e-3).unwrap();
        let pol = polar_split(&tr);
        for (i, &t) in pol.times.iter().enumerate() {
            for k in 0..4 {
                assert!((pol.theta[i][k] + e * t).abs() < 1e-9);
            }
        }
        assert!(pol.theta.last().unwrap()[0] < -12.0);
        assert!(!pol.any_held());
    }

    #[test]
    fn polar_holds_undefined_phases() {
        let h = ComplexMatrix::from_diag(&[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let psi0 = [c(1.0), c(0.0), c(0.0), c(0.0)];
        let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 1.0, 0.1).unwrap();
        let pol = polar_split(&tr);
        assert!(pol.held.iter().all(|h| !h[0] && h[1] && h[2] && h[3]));
        assert!(pol.theta.iter().all(|th| th[1] == 0.0));
    }

    #[test]
    fn entropy_pairs() {
        let r = FRAC_1_SQRT_2;
        let bell = WaveState4::new([c(r), c(0.0), c(0.0), c(r)]);
        let (sa, sb) = pure_entropy_pair(&bell).unwrap();
        assert!((sa - LN_2).abs() < 1e-12 && (sb - LN_2).abs() < 1e-12);
        let (u, v) = ([c(0.6), Complex64::new(0.0, 0.8)], [c(r), c(-r)]);
        let prod = WaveState4::new([u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]]);
        let (sa, sb) = pure_entropy_pair(&prod).unwrap();
        assert!(sa.abs() < 1e-9 && sb.abs() < 1e-9);
        assert!(pure_entropy_pair(&WaveState4::new([c(0.0); 4])).is_err());
    }
}
