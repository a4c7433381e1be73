use epitb_core::epidemic::{
    eigenmode_evolve_const, eigenmode_evolve_exact, ensemble_decompose, propagate_closed_form,
    propagate_n, propagate_rk, spectral_frame, spectral_frame_of, EnsembleWeights, FrameSource,
    Generator2, ProbState2,
};
use epitb_core::numkit::{mat_exp, RealMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_real_spectrum(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    loop {
        let m: [[f64; 2]; 2] = [
            [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
        ];
        let disc = (m[0][0] - m[1][1]).powi(2) + 4.0 * m[0][1] * m[1][0];
        if disc > 0.0 {
            return m;
        }
    }
}

#[test]
fn eigen_residual_over_random_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut closed = 0;
    for _ in 0..1000 {
        let m = random_real_spectrum(&mut rng);
        let f = spectral_frame_of(m).unwrap();
        if f.source == FrameSource::ClosedForm {
            closed += 1;
        }
        assert!(f.e1 <= f.e2);
        assert!(f.residual(m) <= 1e-12, "{m:?}: {}", f.residual(m));
    }
    assert!(closed > 900);
}

#[test]
fn orthogonality_is_conditional_on_symmetric_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let c = rng.random_range(0.05..1.0);
        let m = [
            [rng.random_range(-1.0..1.0), c],
            [c, rng.random_range(-1.0..1.0)],
        ];
        assert!(spectral_frame_of(m).unwrap().overlap().abs() <= 1e-12);
    }
    let witness = spectral_frame_of([[0.1, 0.2], [0.8, -0.3]]).unwrap();
    assert!(witness.overlap().abs() > 1e-6);
}

#[test]
fn constant_generators_match_rk() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let m: [[f64; 2]; 2] =
            core::array::from_fn(|_| core::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let s = Generator2::from_matrix(m);
        let p0 = ProbState2::new(rng.random(), rng.random()).unwrap();
        let a = propagate_closed_form(&s, p0, 0.0, 1.0).unwrap();
        let b = propagate_rk(&s, p0, 0.0, 1.0, 1e-4).unwrap();
        assert!((a.p1 - b.p1).abs() <= 1e-8 && (a.p2 - b.p2).abs() <= 1e-8);
    }
}

#[test]
fn zero_column_sums_conserve_probability() {
    let s = Generator2::constant(-0.7, 0.4, 0.7, -0.4);
    let p0 = ProbState2::new(0.25, 0.75).unwrap();
    for k in 0..=20 {
        let t = 0.5 * k as f64;
        let p = propagate_closed_form(&s, p0, 0.0, t).unwrap();
        assert!((p.total() - 1.0).abs() <= 1e-10);
    }
    let g4 = RealMatrix::from_rows(&[
        [-0.9, 0.2, 0.0, 0.5],
        [0.4, -0.6, 0.3, 0.0],
        [0.5, 0.1, -0.8, 0.2],
        [0.0, 0.3, 0.5, -0.7],
    ]);
    let p = propagate_n(|_| g4.clone(), &[0.1, 0.2, 0.3, 0.4], 0.0, 10.0, 1e-3).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
}

#[test]
fn propagate_n_agrees_with_closed_form_and_expm() {
    let m = [[0.2, -0.5], [0.3, -0.1]];
    let s = Generator2::from_matrix(m);
    let p0 = ProbState2::new(0.6, 0.4).unwrap();
    let a = propagate_closed_form(&s, p0, 0.0, 1.5).unwrap();
    let b = propagate_n(|t| s.matrix(t), &[0.6, 0.4], 0.0, 1.5, 1e-3).unwrap();
    assert!((a.p1 - b[0]).abs() <= 1e-8 && (a.p2 - b[1]).abs() <= 1e-8);
    let u = mat_exp(&RealMatrix::from_rows(&m).scaled(1.5))
        .unwrap()
        .mul_vec(&[0.6, 0.4]);
    assert!((a.p1 - u[0]).abs() <= 1e-12 && (a.p2 - u[1]).abs() <= 1e-12);
    assert_eq!(
        propagate_n(|_| RealMatrix::zeros(3, 3), &[0.2, 0.3, 0.5], 0.0, 2.0, 0.1).unwrap(),
        vec![0.2, 0.3, 0.5]
    );
    assert!(propagate_n(|_| RealMatrix::zeros(3, 3), &[0.5, 0.5], 0.0, 1.0, 0.1).is_err());
}

fn fitted_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    sxy / sxx
}

#[test]
fn log_ratio_is_affine_with_the_predicted_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut done = 0;
    while done < 20 {
        let m = random_real_spectrum(&mut rng);
        let f = spectral_frame_of(m).unwrap();
        if f.source != FrameSource::ClosedForm {
            continue;
        }
        let s = Generator2::from_matrix(m);
        let w0 = EnsembleWeights::new(rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
        let ts: Vec<f64> = (0..100).map(|k| 0.02 * k as f64).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let w = eigenmode_evolve_const(&s, w0, 0.0, t).unwrap();
                (w.p_i / w.p_ii).ln()
            })
            .collect();
        assert!((fitted_slope(&ts, &ys) - f.ratio_rate()).abs() <= 1e-9);
        done += 1;
    }
}

#[test]
fn exact_eigenmode_law_matches_decompose_after_propagate() {
    let s = Generator2::constant(1.0, 0.5, 0.5, 0.2);
    let p0 = ProbState2::new(0.3, 0.7).unwrap();
    let w0 = ensemble_decompose(p0, &s, 0.0).unwrap();
    let direct =
        ensemble_decompose(propagate_closed_form(&s, p0, 0.0, 1.0).unwrap(), &s, 1.0).unwrap();
    let exact = eigenmode_evolve_exact(&s, w0, 0.0, 1.0).unwrap();
    assert!((exact.p_i - direct.p_i).abs() <= 1e-8 && (exact.p_ii - direct.p_ii).abs() <= 1e-8);
    // The E/n law differs from the propagated state whenever n ≠ 1.
    let printed = eigenmode_evolve_const(&s, w0, 0.0, 1.0).unwrap();
    let f = spectral_frame(&s, 0.0).unwrap();
    assert!((f.n1 - 1.0).abs() > 1e-3);
    assert!(
        (printed.p_i - direct.p_i)
            .abs()
            .max((printed.p_ii - direct.p_ii).abs())
            > 1e-3
    );
}

#[test]
fn roundtrip_over_seeded_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let s = Generator2::constant(1.0, 0.3, 0.6, 0.2);
    let f = spectral_frame(&s, 0.0).unwrap();
    for _ in 0..1000 {
        let p = ProbState2::new(rng.random(), rng.random()).unwrap();
        let back = f.reconstruct(f.decompose(p).unwrap());
        assert!((back.p1 - p.p1).abs() <= 1e-12 && (back.p2 - p.p2).abs() <= 1e-12);
    }
}

proptest! {
    #[test]
    fn closed_form_composes_over_intervals(
        a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64,
        t1 in 0.0..1.5f64, t2 in 0.0..1.5f64,
    ) {
        let s = Generator2::constant(a, b, c, d);
        let p0 = ProbState2::new(0.4, 0.6).unwrap();
        let mid = propagate_closed_form(&s, p0, 0.0, t1).unwrap();
        let two = propagate_closed_form(&s, mid, t1, t1 + t2).unwrap();
        let one = propagate_closed_form(&s, p0, 0.0, t1 + t2).unwrap();
        prop_assert!((two.p1 - one.p1).abs() <= 1e-12 * (1.0 + one.p1.abs()));
        prop_assert!((two.p2 - one.p2).abs() <= 1e-12 * (1.0 + one.p2.abs()));
    }

    #[test]
    fn eigenvalue_sum_and_product(a in -1.0..1.0f64, b in 0.01..1.0f64, c in 0.01..1.0f64, d in -1.0..1.0f64) {
        let f = spectral_frame_of([[a, b], [c, d]]).unwrap();
        prop_assert!((f.e1 + f.e2 - (a + d)).abs() <= 1e-14);
        prop_assert!((f.e1 * f.e2 - (a * d - b * c)).abs() <= 1e-14);
    }
}
