use epitb_core::coupled::{Basis4, Generator4, ProbState4};
use epitb_core::density::{
    density_eom_residual, density_from_state, evolve_sqrt, reduced_density, von_neumann_entropy, Ordering,
    SqrtState4, Subsystem,
};
use epitb_core::numkit::{mat_exp, ComplexMatrix, RealMatrix};
use epitb_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_master_generator(rng: &mut ChaCha8Rng) -> RealMatrix {
    let mut m = RealMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { rng.random_range(0.0..0.5) });
    for j in 0..4 {
        let out: f64 = (0..4).map(|i| m[(i, j)]).sum();
        m[(j, j)] = -out;
    }
    m
}

fn random_state(rng: &mut ChaCha8Rng) -> ProbState4 {
    let w: [f64; 4] = core::array::from_fn(|_| rng.random_range(0.05..1.0));
    let total: f64 = w.iter().sum();
    ProbState4::traffic(w.map(|x| x / total)).unwrap()
}

#[test]
fn sqrt_flow_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let s = random_master_generator(&mut rng);
        let p0 = random_state(&mut rng);
        let g = Generator4::dense(&s, Basis4::Traffic).unwrap();
        let e = evolve_sqrt(&g, &p0, 0.0, 2.0, 1e-3).unwrap();
        let exact = mat_exp(&s.scaled(2.0)).unwrap().mul_vec(&p0.p);
        let last = e.probabilities().last().unwrap().1.to_vec();
        for k in 0..4 {
            assert!((last[k] - exact[k]).abs() <= 1e-10);
        }
        assert!(e.max_divergence <= 1e-10);
    }
}

#[test]
fn transpose_form_holds_for_random_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut anti_gaps = 0;
    for _ in 0..50 {
        let s = random_master_generator(&mut rng);
        let p = random_state(&mut rng);
        let r = density_eom_residual(&Generator4::dense(&s, Basis4::Traffic).unwrap(), &p, 1e-4).unwrap();
        assert!(r.transpose_form <= 1e-6, "{r:?}");
        if r.anticommutator > 1e-4 {
            anti_gaps += 1;
        }
    }
    assert!(anti_gaps > 40);
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

proptest! {
    #[test]
    fn classical_density_is_symmetric_with_unit_trace(w in proptest::array::uniform4(0.01..1.0f64)) {
        let total: f64 = w.iter().sum();
        let p = ProbState4::traffic(w.map(|x| x / total)).unwrap();
        let rho = density_from_state(&SqrtState4::from_probabilities(&p));
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-14);
        prop_assert!(rho.matrix().max_abs_diff(&rho.matrix().transpose()) <= 1e-12);
    }

    #[test]
    fn entropy_lies_between_zero_and_ln2(
        re in proptest::array::uniform8(-1.0..1.0f64),
        im in proptest::array::uniform8(-1.0..1.0f64),
    ) {
        // Random mixed state ρ = M·M† / Tr.
        let m = ComplexMatrix::from_fn(4, 2, |i, j| Complex64::new(re[2 * i + j], im[2 * i + j]));
        let rho = &m * &m.adjoint();
        prop_assume!(rho.trace().re > 1e-6);
        for sub in [Subsystem::A, Subsystem::B] {
            let red = reduced_density(&rho, sub, Ordering::AMajor).unwrap();
            prop_assert!(red.matrix().max_abs_diff(&red.matrix().adjoint()) <= 1e-12);
            let s = von_neumann_entropy(&red).unwrap();
            prop_assert!((-1e-12..=core::f64::consts::LN_2 + 1e-12).contains(&s));
        }
    }

    #[test]
    fn product_states_have_zero_entropy(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let u = [a.sqrt(), (1.0 - a).sqrt()];
        let v = [b.sqrt(), (1.0 - b).sqrt()];
        let x = [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]];
        let rho = ComplexMatrix::from_fn(4, 4, |i, j| c(x[i] * x[j]));
        for sub in [Subsystem::A, Subsystem::B] {
            let s = von_neumann_entropy(&reduced_density(&rho, sub, Ordering::AMajor).unwrap()).unwrap();
            prop_assert!(s.abs() <= 1e-6);
        }
    }
}
