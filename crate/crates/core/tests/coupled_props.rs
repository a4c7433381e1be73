use epitb_core::coupled::{
    coupled_eigenvectors, evolve4, factorization_defect, kron_sum_generator, measure_subsystem, CrossCouplings,
    Generator4, ProbState4, Site,
};
use epitb_core::epidemic::{propagate_closed_form, propagate_rk, FrameSource, Generator2, ProbState2, Rate};
use epitb_core::numkit::eig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn kron_sum_flow_preserves_products() {
    let sa = Generator2::new(Rate::Affine { value: -0.3, slope: 0.05 }, 0.4.into(), 0.3.into(), (-0.4).into());
    let sb = Generator2::constant(-0.2, 0.6, 0.2, -0.6);
    let a0 = ProbState2::new(0.2, 0.8).unwrap();
    let b0 = ProbState2::new(0.7, 0.3).unwrap();
    let g = kron_sum_generator(&sa, &sb);
    let tr = evolve4(&g, ProbState4::from_marginals(a0, b0), 0.0, 5.0, 1e-3).unwrap();
    for (t, p) in tr.iter().step_by(100) {
        let state = ProbState4::product([p[0], p[1], p[2], p[3]]).unwrap();
        assert!(factorization_defect(&state).unwrap() <= 1e-10, "t = {t}");
    }
    // Independent oracle: the two subsystems propagated separately.
    let (_, last) = tr.last().unwrap();
    let rk_a = propagate_rk(&sa, a0, 0.0, 5.0, 1e-3).unwrap();
    let b = propagate_closed_form(&sb, b0, 0.0, 5.0).unwrap();
    let expect = ProbState4::from_marginals(rk_a, b).p;
    for k in 0..4 {
        assert!((last[k] - expect[k]).abs() <= 1e-10);
    }
}

#[test]
fn measurement_back_action_reaches_b() {
    let sa = Generator2::constant(-0.5, 0.3, 0.5, -0.3);
    let sb = Generator2::constant(-0.2, 0.4, 0.2, -0.4);
    let g = Generator4::traffic(&sa, &sb, &CrossCouplings::uniform(0.25.into()));
    let p0 = ProbState4::traffic([0.3, 0.7, 0.6, 0.4]).unwrap();
    let t_meas = 1.0;
    let at_meas = evolve4(&g, p0, 0.0, t_meas, 1e-3).unwrap();
    let (_, p) = at_meas.last().unwrap();
    let p = ProbState4::traffic([p[0], p[1], p[2], p[3]]).unwrap();
    let measured = measure_subsystem(p, Site::OneA).unwrap();
    assert_eq!(&measured.p[2..], &p.p[2..]);
    let free = evolve4(&g, p, t_meas, t_meas + 1.0, 1e-3).unwrap();
    let kicked = evolve4(&g, measured, t_meas, t_meas + 1.0, 1e-3).unwrap();
    let (a, b) = (free.last().unwrap().1, kicked.last().unwrap().1);
    let divergence = (a[2] - b[2]).abs().max((a[3] - b[3]).abs());
    assert!(divergence > 1e-6, "{divergence}");
    // Without cross couplings B never notices.
    let g0 = Generator4::traffic(&sa, &sb, &CrossCouplings::default());
    let free = evolve4(&g0, p, t_meas, t_meas + 1.0, 1e-3).unwrap();
    let kicked = evolve4(&g0, measured, t_meas, t_meas + 1.0, 1e-3).unwrap();
    let (a, b) = (free.last().unwrap().1, kicked.last().unwrap().1);
    assert_eq!((a[2], a[3]), (b[2], b[3]));
}

#[test]
fn symmetric_closed_forms_over_seeded_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut checked, mut attempts) = (0, 0);
    while checked < 500 {
        attempts += 1;
        assert!(attempts < 5000);
        let s = Generator2::constant(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let g = Generator4::symmetric(&s, Rate::Constant(rng.random_range(-0.5..0.5)));
        let Ok(modes) = coupled_eigenvectors(&g, 0.0) else { continue };
        for k in &modes {
            let size = k.vector.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            assert!(k.residual(&g, 0.0) <= 1e-10 * size);
        }
        checked += 1;
    }
}

#[test]
fn spectrum_matches_numeric_eig() {
    let s = Generator2::constant(0.2, 0.3, 0.3, 0.2);
    let g = Generator4::symmetric(&s, Rate::Constant(0.1));
    let modes = coupled_eigenvectors(&g, 0.0).unwrap();
    let mut closed: Vec<f64> = modes.iter().map(|k| k.value).collect();
    closed.sort_by(f64::total_cmp);
    let numeric = eig(&g.at(0.0)).unwrap();
    for (a, b) in closed.iter().zip(&numeric) {
        assert!((a - b.value.re).abs() <= 1e-12);
    }
    assert!(modes.iter().all(|k| k.source == FrameSource::ClosedForm));
}

proptest! {
    #[test]
    fn measurement_is_idempotent(p in proptest::array::uniform4(0.0..1.0f64), k in 1u8..=4) {
        let site = Site::from_number(k).unwrap();
        let once = measure_subsystem(ProbState4::traffic(p).unwrap(), site).unwrap();
        prop_assert_eq!(measure_subsystem(once, site).unwrap(), once);
    }

    #[test]
    fn outer_products_have_no_defect(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let s = ProbState4::from_marginals(ProbState2::new(a, 1.0 - a).unwrap(), ProbState2::new(b, 1.0 - b).unwrap());
        prop_assert!(factorization_defect(&s).unwrap() <= 1e-16);
    }
}
