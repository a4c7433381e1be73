use epitb_core::mapping::{
    apply_aharonov_bohm, embed, phase_from_split, real_form_generator, reconstruct, split_state, verify_equivalence,
    verify_equivalence_with, VectorPotential,
};
use epitb_core::numkit::{max_abs_diff, ode_evolve, ComplexMatrix};
use epitb_core::quantum::{build_hamiltonian, evolve_schrodinger, TBHamiltonian2Q, WaveState4};
use epitb_core::Complex64;
use proptest::prelude::*;

fn reference() -> TBHamiltonian2Q {
    TBHamiltonian2Q::hermitian([1.05, 0.95, 1.0, 1.05], 0.1, 0.1, [0.2, 0.05, 0.1, 0.15])
}

fn psi0() -> WaveState4 {
    WaveState4::from_polar([0.1, 0.2, 0.3, 0.4], [0.3, 1.0, -2.0, 2.5])
}

#[test]
fn certificate_along_reference_trajectory() {
    let r = verify_equivalence(&reference(), &psi0(), 0.0, 5.0, 1e-4).unwrap();
    assert!(r.max_residual <= 1e-6, "{:e}", r.max_residual);
    assert!(r.split_error <= 1e-10);
    assert!(r.embedding_error <= 1e-8);
    assert!(r.conservation_error <= 1e-9);
    assert!(r.phase_velocity_error <= 1e-6);
    assert!(r.tan2_error <= 1e-6);
    assert!(r.hermitian);
}

#[test]
fn two_level_embedding_reconstructs_psi() {
    let h = ComplexMatrix::from_rows(&[
        [Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.2)],
        [Complex64::new(0.1, -0.2), Complex64::new(-0.3, 0.0)],
    ]);
    let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
    let r = verify_equivalence_with(|_| h.clone(), &psi, 0.0, 5.0, 1e-3).unwrap();
    assert!(r.embedding_error <= 1e-8);
    let a = real_form_generator(&h).unwrap();
    let x = ode_evolve(|_| a.clone(), &embed(&psi), 0.0, 5.0, 1e-3).unwrap();
    let q = evolve_schrodinger(|_| h.clone(), &psi, 0.0, 5.0, 1e-3).unwrap();
    assert!(max_abs_diff(&reconstruct(x.last().unwrap().1), q.last().unwrap().1) <= 1e-8);
}

#[test]
fn escape_is_monotone() {
    let r = verify_equivalence(&reference().with_escape(0.1), &psi0(), 0.0, 5.0, 1e-3).unwrap();
    assert!(r.monotone_nonincreasing && !r.hermitian);
    let last = *r.total_probability.last().unwrap();
    assert!(last < 0.95 * r.total_probability[0]);
}

#[test]
fn global_vector_potential_leaves_probabilities_unchanged() {
    let h = build_hamiltonian(&reference());
    let (p, theta) = psi0().polar();
    let v = VectorPotential { ax: [0.7; 4], delta_l: 1.5, e_over_hbar: 0.9 };
    let shifted = WaveState4::from_polar(p, apply_aharonov_bohm(theta, &v));
    let a = evolve_schrodinger(|_| h.clone(), &psi0().gamma, 0.0, 5.0, 1e-3).unwrap();
    let b = evolve_schrodinger(|_| h.clone(), &shifted.gamma, 0.0, 5.0, 1e-3).unwrap();
    for (x, y) in a.states().iter().zip(b.states()) {
        for k in 0..4 {
            assert!((x[k].norm_sqr() - y[k].norm_sqr()).abs() <= 1e-8);
        }
    }
    // A site-local potential changes relative phases and so the dynamics.
    let local = VectorPotential { ax: [0.7, 0.0, 0.0, 0.0], delta_l: 1.5, e_over_hbar: 0.9 };
    let moved = WaveState4::from_polar(p, apply_aharonov_bohm(theta, &local));
    let c = evolve_schrodinger(|_| h.clone(), &moved.gamma, 0.0, 5.0, 1e-3).unwrap();
    let gap = a.states().iter().zip(c.states()).map(|(x, y)| (x[0].norm_sqr() - y[0].norm_sqr()).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-4);
}

proptest! {
    #[test]
    fn tan2_roundtrip(
        w in proptest::array::uniform4(0.01..1.0f64),
        theta in proptest::array::uniform4(0.01..1.56f64),
    ) {
        let total: f64 = w.iter().sum();
        let p = w.map(|x| x / total);
        let (back, tan2) = phase_from_split(&split_state(p, theta));
        for k in 0..4 {
            prop_assert!((back[k] - p[k]).abs() <= 1e-15);
            let t = theta[k].tan().powi(2);
            prop_assert!((tan2[k] - t).abs() <= 1e-12 * t.max(1.0));
        }
    }

    #[test]
    fn real_form_dimension_is_doubled(re in proptest::array::uniform16(-1.0..1.0f64)) {
        let h = ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new(re[4 * i + j], re[4 * j + i]));
        let a = real_form_generator(&h).unwrap();
        prop_assert_eq!((a.rows(), a.cols()), (8, 8));
        let psi: Vec<Complex64> = (0..4).map(|k| Complex64::new(re[k], re[k + 4])).collect();
        let lhs = reconstruct(&a.mul_vec(&embed(&psi)));
        let rhs: Vec<Complex64> = h.mul_vec(&psi).iter().map(|z| z * Complex64::new(0.0, -1.0)).collect();
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-14);
    }
}
