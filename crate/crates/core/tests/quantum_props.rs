use epitb_core::numkit::max_abs_diff;
use epitb_core::quantum::{
    build_hamiltonian, evolve_schrodinger, expectation, polar_split, pure_entropy_pair, schrodinger_exact,
    TBHamiltonian2Q, WaveState4,
};
use epitb_core::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn reference() -> TBHamiltonian2Q {
    TBHamiltonian2Q::hermitian([1.0, 1.05, 0.95, 1.0], 0.1, 0.1, [0.05, 0.1, 0.15, 0.2])
}

#[test]
fn unitarity_and_energy_over_ten_time_units() {
    let h = build_hamiltonian(&reference());
    let psi0 = [c(0.8), Complex64::new(0.0, 0.6), c(0.0), c(0.0)];
    let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 10.0, 1e-3).unwrap();
    let e0 = expectation(&h, &psi0);
    let mut norm_drift = 0.0f64;
    let mut energy_drift = 0.0f64;
    for (_, psi) in tr.iter() {
        let n: f64 = psi.iter().map(|g| g.norm_sqr()).sum();
        norm_drift = norm_drift.max((n - 1.0).abs());
        energy_drift = energy_drift.max((expectation(&h, psi) - e0).norm());
    }
    assert!(norm_drift <= 1e-9, "{norm_drift:e}");
    assert!(energy_drift <= 1e-8, "{energy_drift:e}");
    let exact = schrodinger_exact(&h, &psi0, 10.0).unwrap();
    assert!(max_abs_diff(tr.last().unwrap().1, &exact) <= 1e-8);
}

#[test]
fn escape_drains_probability() {
    let h = build_hamiltonian(&reference().with_escape(0.1));
    let psi0 = [c(0.5); 4];
    let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 5.0, 1e-3).unwrap();
    let totals: Vec<f64> = tr.states().iter().map(|s| s.iter().map(|g| g.norm_sqr()).sum()).collect();
    assert!(totals.windows(2).all(|w| w[1] < w[0]));
    // Every level carries two on-site energies, so Σp(t) = e^{−4κt}.
    assert!((totals.last().unwrap() - (-2.0f64).exp()).abs() < 1e-9);
}

#[test]
fn non_interacting_evolution_stays_unentangled() {
    // Equal Coulomb energies shift every level alike, so H = HA⊗I + I⊗HB + const.
    let h = build_hamiltonian(&TBHamiltonian2Q::hermitian([1.0, 1.05, 0.95, 1.0], 0.1, 0.07, [0.1; 4]));
    let (u, v) = ([c(0.6), c(0.8)], [c(1.0), c(0.0)]);
    let psi0 = [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]];
    let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 5.0, 1e-3).unwrap();
    for (_, psi) in tr.iter().step_by(50) {
        let (sa, sb) = pure_entropy_pair(&WaveState4::from_slice(psi).unwrap()).unwrap();
        assert!(sa <= 1e-9 && sb <= 1e-9);
    }
    // The interaction is Ec11 + Ec22 − Ec12 − Ec21.
    let h = build_hamiltonian(&TBHamiltonian2Q::hermitian([1.0, 1.05, 0.95, 1.0], 0.1, 0.07, [0.2, 0.05, 0.05, 0.2]));
    let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 5.0, 1e-3).unwrap();
    let (sa, _) = pure_entropy_pair(&WaveState4::from_slice(tr.last().unwrap().1).unwrap()).unwrap();
    assert!(sa > 1e-6);
}

#[test]
fn polar_roundtrip_along_trajectory() {
    let h = build_hamiltonian(&reference());
    let psi0 = [c(0.5), c(0.5), Complex64::new(0.0, 0.5), c(-0.5)];
    let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 20.0, 1e-2).unwrap();
    let pol = polar_split(&tr);
    for (i, psi) in tr.states().iter().enumerate() {
        for k in 0..4 {
            let back = Complex64::from_polar(pol.p[i][k].sqrt(), pol.theta[i][k]);
            assert!((back - psi[k]).norm() <= 1e-12);
        }
        if i > 0 {
            for k in 0..4 {
                assert!((pol.theta[i][k] - pol.theta[i - 1][k]).abs() < core::f64::consts::PI);
            }
        }
    }
}

proptest! {
    #[test]
    fn pure_states_have_equal_entropies(
        re in proptest::array::uniform4(-1.0..1.0f64),
        im in proptest::array::uniform4(-1.0..1.0f64),
    ) {
        let psi = WaveState4::new(core::array::from_fn(|k| Complex64::new(re[k], im[k])));
        prop_assume!(psi.norm_sqr() > 1e-6);
        let (sa, sb) = pure_entropy_pair(&psi).unwrap();
        prop_assert!((sa - sb).abs() <= 1e-9);
        prop_assert!((-1e-12..=core::f64::consts::LN_2 + 1e-12).contains(&sa));
    }

    #[test]
    fn hermitian_parameters_build_hermitian_matrices(
        ep in proptest::array::uniform4(-2.0..2.0f64),
        ta in -1.0..1.0f64,
        tb in -1.0..1.0f64,
        ec in proptest::array::uniform4(0.0..1.0f64),
    ) {
        let h = build_hamiltonian(&TBHamiltonian2Q::hermitian(ep, ta, tb, ec));
        prop_assert!(h.max_abs_diff(&h.adjoint()) == 0.0);
        prop_assert_eq!(h[(0, 3)], c(0.0));
        prop_assert_eq!(h[(3, 0)], c(0.0));
    }
}
