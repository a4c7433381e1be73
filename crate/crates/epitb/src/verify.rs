//! Built-in verification suite. Each criterion compares the library against
//! an independent computation and returns its measured checks.

use std::f64::consts::LN_2;

use epitb_core::coupled::{
    coupled_eigenvectors, evolve4, measure_subsystem, Basis4, CrossCouplings, Generator4, ProbState4, Site,
};
use epitb_core::density::{density_eom_residual, evolve_sqrt};
use epitb_core::epidemic::{
    eigenmode_evolve_const, measure_weak, propagate_closed_form, propagate_rk, spectral_frame, spectral_frame_of,
    EnsembleWeights, FrameSource, Generator2, ProbState2, Rate,
};
use epitb_core::mapping::{apply_aharonov_bohm, verify_equivalence, verify_equivalence_with, VectorPotential};
use epitb_core::numkit::{mat_exp, ComplexMatrix, RealMatrix};
use epitb_core::quantum::{
    build_hamiltonian, evolve_schrodinger, expectation, pure_entropy_pair, TBHamiltonian2Q, WaveState4,
};
use epitb_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::report::Check;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub summary: &'static str,
    run: fn() -> Vec<Check>,
}

impl Criterion {
    pub fn run(&self) -> CriterionResult {
        let checks = (self.run)();
        CriterionResult { id: self.id, name: self.name, pass: checks.iter().all(|c| c.pass), checks }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion {
        id: 1,
        name: "closed-form-propagator",
        summary: "closed-form 2x2 propagator against RK4 for 100 random generators",
        run: closed_form_propagator,
    },
    Criterion {
        id: 2,
        name: "spectral-fidelity",
        summary: "closed-form eigenpair residuals and conditional orthogonality",
        run: spectral_fidelity,
    },
    Criterion { id: 3, name: "rabi-ratio-law", summary: "log(pI/pII) slope along eigenmode evolution", run: rabi_ratio_law },
    Criterion { id: 4, name: "ensemble-roundtrip", summary: "decompose then reconstruct 1000 states", run: ensemble_roundtrip },
    Criterion { id: 5, name: "sqrt-transform", summary: "squared amplitude flow against the master equation", run: sqrt_transform },
    Criterion { id: 6, name: "density-eom", summary: "finite-difference density derivative against H rho + rho H^T", run: density_eom },
    Criterion { id: 7, name: "entanglement-entropy", summary: "reduced-density entropies of pure states", run: entanglement_entropy },
    Criterion { id: 8, name: "quantum-unitarity", summary: "norm and energy drift over [0, 10]", run: quantum_unitarity },
    Criterion { id: 9, name: "mapping-certificate", summary: "real 2N image of the quantum trajectory", run: mapping_certificate },
    Criterion { id: 10, name: "dissipation", summary: "complex on-site energies drain probability", run: dissipation },
    Criterion { id: 11, name: "aharonov-bohm", summary: "vector-potential phase shifts", run: aharonov_bohm },
    Criterion {
        id: 12,
        name: "measurement-semantics",
        summary: "projective and weak updates and coupled back-action",
        run: measurement_semantics,
    },
];

/// Criteria whose name contains `filter`, ignoring case.
pub fn select(filter: Option<&str>) -> Result<Vec<&'static Criterion>> {
    let f = filter.unwrap_or("").to_lowercase();
    let picked: Vec<_> = CRITERIA.iter().filter(|c| c.name.contains(&f)).collect();
    if picked.is_empty() {
        return Err(CliError::NoMatch(filter.unwrap_or("").to_owned()));
    }
    Ok(picked)
}

pub fn run_suite(filter: Option<&str>) -> Result<Vec<CriterionResult>> {
    Ok(select(filter)?.into_iter().map(Criterion::run).collect())
}

fn random_matrix2(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
}

fn random_real_spectrum(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    loop {
        let m = random_matrix2(rng);
        if (m[0][0] - m[1][1]).powi(2) + 4.0 * m[0][1] * m[1][0] > 0.0 {
            return m;
        }
    }
}

/// Random 4×4 rate generator with zero column sums.
fn random_master_generator(rng: &mut ChaCha8Rng, symmetric: bool) -> RealMatrix {
    let mut m = RealMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..i {
            m[(i, j)] = rng.random_range(0.0..0.5);
            m[(j, i)] = if symmetric { m[(i, j)] } else { rng.random_range(0.0..0.5) };
        }
    }
    for j in 0..4 {
        let out: f64 = (0..4).map(|i| m[(i, j)]).sum();
        m[(j, j)] = -out;
    }
    m
}

fn random_simplex(rng: &mut ChaCha8Rng, lo: f64) -> [f64; 4] {
    let w: [f64; 4] = std::array::from_fn(|_| rng.random_range(lo..1.0));
    let total: f64 = w.iter().sum();
    w.map(|x| x / total)
}

fn closed_form_propagator() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = Generator2::from_matrix(random_matrix2(&mut rng));
        let p0 = ProbState2 { p1: rng.random(), p2: rng.random() };
        let run = || -> epitb_core::Result<f64> {
            let a = propagate_closed_form(&s, p0, 0.0, 1.0)?;
            let b = propagate_rk(&s, p0, 0.0, 1.0, 1e-4)?;
            Ok((a.p1 - b.p1).abs().max((a.p2 - b.p2).abs()))
        };
        match run() {
            Ok(d) => worst = worst.max(d),
            Err(e) => return vec![Check::failed("closed_form_vs_rk", e)],
        }
    }
    vec![Check::at_most("closed_form_vs_rk", worst, 1e-8)]
}

fn spectral_fidelity() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut residual = 0.0f64;
    for _ in 0..1000 {
        let m = random_real_spectrum(&mut rng);
        match spectral_frame_of(m) {
            Ok(f) => residual = residual.max(f.residual(m)),
            Err(e) => return vec![Check::failed("residual_2x2", e)],
        }
    }
    let mut residual4 = 0.0f64;
    let (mut checked, mut attempts) = (0, 0);
    while checked < 500 && attempts < 5000 {
        attempts += 1;
        let s = Generator2::from_matrix(random_matrix2(&mut rng));
        let g = Generator4::symmetric(&s, Rate::Constant(rng.random_range(-0.5..0.5)));
        // Complex spectra have no real eigenvectors to check.
        let Ok(modes) = coupled_eigenvectors(&g, 0.0) else { continue };
        for k in &modes {
            let size = k.vector.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            residual4 = residual4.max(k.residual(&g, 0.0) / size);
        }
        checked += 1;
    }
    let mut overlap = 0.0f64;
    for _ in 0..200 {
        let c = rng.random_range(0.05..1.0);
        let m = [[rng.random_range(-1.0..1.0), c], [c, rng.random_range(-1.0..1.0)]];
        if let Ok(f) = spectral_frame_of(m) {
            overlap = overlap.max(f.overlap().abs());
        }
    }
    let witness = spectral_frame_of([[0.1, 0.2], [0.8, -0.3]]).map(|f| f.overlap().abs()).unwrap_or(f64::NAN);
    vec![
        Check::at_most("residual_2x2", residual, 1e-12),
        Check::at_most("residual_4x4_symmetric", residual4, 1e-10).with_note(format!("{checked} real-spectrum generators")),
        Check::at_most("overlap_when_s12_eq_s21", overlap, 1e-12),
        Check::above("overlap_witness_s12_ne_s21", witness, 1e-6),
    ]
}

fn fitted_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    sxy / sxx
}

fn rabi_ratio_law() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut done) = (0.0f64, 0);
    let ts: Vec<f64> = (0..100).map(|k| 0.02 * k as f64).collect();
    while done < 20 {
        let m = random_real_spectrum(&mut rng);
        let Ok(f) = spectral_frame_of(m) else { continue };
        if f.source != FrameSource::ClosedForm {
            continue;
        }
        let s = Generator2::from_matrix(m);
        let w0 = EnsembleWeights::new(rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
        let ys: epitb_core::Result<Vec<f64>> = ts
            .iter()
            .map(|&t| eigenmode_evolve_const(&s, w0, 0.0, t).map(|w| (w.p_i / w.p_ii).ln()))
            .collect();
        match ys {
            Ok(ys) => worst = worst.max((fitted_slope(&ts, &ys) - f.ratio_rate()).abs()),
            Err(e) => return vec![Check::failed("slope_error", e)],
        }
        done += 1;
    }
    vec![Check::at_most("slope_error", worst, 1e-9)]
}

fn ensemble_roundtrip() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = Generator2::constant(1.0, 0.3, 0.6, 0.2);
    let f = match spectral_frame(&s, 0.0) {
        Ok(f) => f,
        Err(e) => return vec![Check::failed("roundtrip_error", e)],
    };
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = ProbState2 { p1: rng.random(), p2: rng.random() };
        match f.decompose(p) {
            Ok(w) => {
                let back = f.reconstruct(w);
                worst = worst.max((back.p1 - p.p1).abs().max((back.p2 - p.p2).abs()));
            }
            Err(e) => return vec![Check::failed("roundtrip_error", e)],
        }
    }
    vec![Check::at_most("roundtrip_error", worst, 1e-12)]
}

fn sqrt_transform() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut endpoint, mut floor) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..4 {
        let s = random_master_generator(&mut rng, false);
        let p0 = ProbState4 { p: random_simplex(&mut rng, 0.05), basis: Basis4::Traffic };
        let run = || -> epitb_core::Result<(f64, f64, f64)> {
            let g = Generator4::dense(&s, Basis4::Traffic)?;
            let e = evolve_sqrt(&g, &p0, 0.0, 5.0, 1e-4)?;
            let probs = e.probabilities();
            let low = probs.states().iter().flatten().fold(f64::INFINITY, |m, &x| m.min(x));
            // Independent oracle: the matrix exponential at the endpoint.
            let exact = mat_exp(&s.scaled(5.0))?.mul_vec(&p0.p);
            let last = probs.last().expect("nonempty").1;
            let gap = last.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok((e.max_divergence, gap, low))
        };
        match run() {
            Ok((d, gap, low)) => {
                worst = worst.max(d);
                endpoint = endpoint.max(gap);
                floor = floor.min(low);
            }
            Err(e) => return vec![Check::failed("squared_vs_master", e)],
        }
    }
    vec![
        Check::at_most("squared_vs_master", worst, 1e-8),
        Check::at_most("endpoint_vs_expm", endpoint, 1e-8),
        Check::above("min_probability", floor, 1e-6),
    ]
}

fn density_eom() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut transpose, mut anti_gap, mut symmetric) = (0.0f64, f64::INFINITY, 0.0f64);
    for k in 0..40 {
        let sym = k % 2 == 1;
        let s = random_master_generator(&mut rng, sym);
        // Uniform occupancies make H = S/2 symmetric when S is.
        let p = ProbState4 { p: if sym { [0.25; 4] } else { random_simplex(&mut rng, 0.05) }, basis: Basis4::Traffic };
        let r = match Generator4::dense(&s, Basis4::Traffic).and_then(|g| density_eom_residual(&g, &p, 1e-4)) {
            Ok(r) => r,
            Err(e) => return vec![Check::failed("transpose_form", e)],
        };
        transpose = transpose.max(r.transpose_form);
        if sym {
            symmetric = symmetric.max(r.anticommutator);
        } else {
            anti_gap = anti_gap.min(r.anticommutator);
        }
    }
    vec![
        Check::at_most("transpose_form", transpose, 1e-6),
        Check::at_most("anticommutator_symmetric_h", symmetric, 1e-6),
        Check::info("min_anticommutator_gap_asymmetric_h", anti_gap),
    ]
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn entanglement_entropy() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let entropies = |psi: [Complex64; 4]| pure_entropy_pair(&WaveState4::new(psi));
    let mut run = || -> epitb_core::Result<Vec<Check>> {
        let mut sym = 0.0f64;
        for _ in 0..1000 {
            let psi = std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let (sa, sb) = entropies(psi)?;
            sym = sym.max((sa - sb).abs());
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (bell, _) = entropies([c(r), c(0.0), c(0.0), c(r)])?;
        let mut product = 0.0f64;
        for _ in 0..100 {
            let u = [Complex64::new(rng.random(), rng.random()), Complex64::new(rng.random(), rng.random())];
            let v = [Complex64::new(rng.random(), rng.random()), Complex64::new(rng.random(), rng.random())];
            let (sa, sb) = entropies([u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]])?;
            product = product.max(sa).max(sb);
        }
        // Equal Coulomb energies add no interaction.
        let h = build_hamiltonian(&TBHamiltonian2Q::hermitian([1.0, 1.05, 0.95, 1.0], 0.1, 0.07, [0.1; 4]));
        let psi0 = [c(0.6), c(0.0), c(0.8), c(0.0)];
        let tr = evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 5.0, 1e-3)?;
        let mut free = 0.0f64;
        for (_, psi) in tr.iter().step_by(10) {
            free = free.max(pure_entropy_pair(&WaveState4::from_slice(psi)?)?.0);
        }
        Ok(vec![
            Check::at_most("pure_state_sa_minus_sb", sym, 1e-9),
            Check::at_most("bell_analog_minus_ln2", (bell - LN_2).abs(), 1e-9),
            Check::at_most("product_state_entropy", product, 1e-9),
            Check::at_most("non_interacting_entropy", free, 1e-9),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("entanglement", e)])
}

fn quantum_unitarity() -> Vec<Check> {
    let h = build_hamiltonian(&TBHamiltonian2Q::hermitian([1.0, 1.05, 0.95, 1.0], 0.1, 0.1, [0.05, 0.1, 0.15, 0.2]));
    let psi0 = [c(0.8), Complex64::new(0.0, 0.6), c(0.0), c(0.0)];
    let tr = match evolve_schrodinger(|_| h.clone(), &psi0, 0.0, 10.0, 1e-3) {
        Ok(tr) => tr,
        Err(e) => return vec![Check::failed("norm_drift", e)],
    };
    let e0 = expectation(&h, &psi0);
    let (mut norm, mut energy) = (0.0f64, 0.0f64);
    for (_, psi) in tr.iter() {
        norm = norm.max((psi.iter().map(|g| g.norm_sqr()).sum::<f64>() - 1.0).abs());
        energy = energy.max((expectation(&h, psi) - e0).norm());
    }
    vec![Check::at_most("norm_drift", norm, 1e-9), Check::at_most("energy_drift", energy, 1e-8)]
}

fn mapping_certificate() -> Vec<Check> {
    let psi0 = WaveState4::from_polar([0.1, 0.2, 0.3, 0.4], [0.3, 1.0, -2.0, 2.5]);
    let (mut residual, mut split, mut embedding, mut excluded) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for ec in [[0.2, 0.05, 0.1, 0.15], [0.05, 0.1, 0.15, 0.2]] {
        let h = TBHamiltonian2Q::hermitian([1.05, 0.95, 1.0, 1.05], 0.1, 0.1, ec);
        match verify_equivalence(&h, &psi0, 0.0, 5.0, 1e-4) {
            Ok(r) => {
                residual = residual.max(r.max_residual);
                split = split.max(r.split_error);
                embedding = embedding.max(r.embedding_error);
                excluded += r.excluded.len();
            }
            Err(e) => return vec![Check::failed("max_residual", e)],
        }
    }
    let h2 = ComplexMatrix::from_rows(&[
        [c(0.5), Complex64::new(0.1, 0.2)],
        [Complex64::new(0.1, -0.2), c(-0.3)],
    ]);
    let embedding2 = verify_equivalence_with(|_| h2.clone(), &[c(0.6), Complex64::new(0.0, 0.8)], 0.0, 5.0, 1e-3)
        .map(|r| r.embedding_error)
        .unwrap_or(f64::NAN);
    vec![
        Check::at_most("max_residual", residual, 1e-6),
        Check::at_most("split_error", split, 1e-10),
        Check::at_most("embedding_error_n4", embedding, 1e-8),
        Check::at_most("embedding_error_n2", embedding2, 1e-8),
        Check::info("excluded_intervals", excluded as f64),
    ]
}

fn dissipation() -> Vec<Check> {
    let h = TBHamiltonian2Q::hermitian([1.05, 0.95, 1.0, 1.05], 0.1, 0.1, [0.2, 0.05, 0.1, 0.15]).with_escape(0.1);
    let psi0 = WaveState4::from_polar([0.1, 0.2, 0.3, 0.4], [0.3, 1.0, -2.0, 2.5]);
    let m = build_hamiltonian(&h);
    match evolve_schrodinger(|_| m.clone(), &psi0.gamma, 0.0, 5.0, 1e-3) {
        Ok(tr) => {
            let totals: Vec<f64> = tr.states().iter().map(|s| s.iter().map(|g| g.norm_sqr()).sum()).collect();
            let ratio = totals[totals.len() - 1] / totals[0];
            vec![
                Check::flag("monotone_nonincreasing", totals.windows(2).all(|w| w[1] <= w[0])),
                Check::at_most("final_over_initial", ratio, 0.95),
            ]
        }
        Err(e) => vec![Check::failed("monotone_nonincreasing", e)],
    }
}

fn aharonov_bohm() -> Vec<Check> {
    let theta = [0.3, 1.0, -2.0, 2.5];
    let zero = apply_aharonov_bohm(theta, &VectorPotential { ax: [0.0; 4], delta_l: 1.5, e_over_hbar: 0.9 });
    let identity = zero.iter().zip(&theta).all(|(a, b)| a == b);
    // A potential on site 2A touches the levels (2A,1B) and (2A,2B) only.
    let local = apply_aharonov_bohm(theta, &VectorPotential { ax: [0.0, 0.7, 0.0, 0.0], delta_l: 1.5, e_over_hbar: 0.9 });
    let expect = 0.7 * 1.5 * 0.9;
    let shifts: Vec<f64> = local.iter().zip(&theta).map(|(a, b)| a - b).collect();
    let local_error = [0.0, 0.0, expect, expect].iter().zip(&shifts).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let h = build_hamiltonian(&TBHamiltonian2Q::hermitian([1.05, 0.95, 1.0, 1.05], 0.1, 0.1, [0.2, 0.05, 0.1, 0.15]));
    let p = [0.1, 0.2, 0.3, 0.4];
    let global = apply_aharonov_bohm(theta, &VectorPotential { ax: [0.7; 4], delta_l: 1.5, e_over_hbar: 0.9 });
    let run = |th: [f64; 4]| evolve_schrodinger(|_| h.clone(), &WaveState4::from_polar(p, th).gamma, 0.0, 5.0, 1e-3);
    let invariance = match (run(theta), run(global)) {
        (Ok(a), Ok(b)) => a
            .states()
            .iter()
            .zip(b.states())
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u.norm_sqr() - v.norm_sqr()).abs()))
            .fold(0.0, f64::max),
        (Err(e), _) | (_, Err(e)) => return vec![Check::failed("global_potential_invariance", e)],
    };
    vec![
        Check::flag("zero_potential_identity", identity),
        Check::at_most("local_shift_error", local_error, 1e-15),
        Check::at_most("global_potential_invariance", invariance, 1e-8),
    ]
}

fn measurement_semantics() -> Vec<Check> {
    let run = || -> epitb_core::Result<Vec<Check>> {
        let p = ProbState4::traffic([0.3, 0.7, 0.6, 0.4])?;
        let expect = [[1.0, 0.0, 0.6, 0.4], [0.0, 1.0, 0.6, 0.4], [0.3, 0.7, 1.0, 0.0], [0.3, 0.7, 0.0, 1.0]];
        let mut exact = true;
        for (site, e) in Site::ALL.iter().zip(expect) {
            exact &= measure_subsystem(p, *site)?.p == e;
        }
        let q = ProbState2 { p1: 0.35, p2: 0.65 };
        let test = ProbState2 { p1: 0.9, p2: 0.1 };
        let w = measure_weak(q, 1000, 40, test)?;
        let weak_exact = w.p1 == (960.0 * 0.35 + 40.0 * 0.9) / 1000.0 && w.p2 == (960.0 * 0.65 + 40.0 * 0.1) / 1000.0;

        let sa = Generator2::constant(-0.5, 0.3, 0.5, -0.3);
        let sb = Generator2::constant(-0.2, 0.4, 0.2, -0.4);
        let g = Generator4::traffic(&sa, &sb, &CrossCouplings::uniform(0.25.into()));
        let at = evolve4(&g, p, 0.0, 1.0, 1e-3)?;
        let y = at.last().expect("nonempty").1;
        let before = ProbState4::traffic([y[0], y[1], y[2], y[3]])?;
        let measured = measure_subsystem(before, Site::OneA)?;
        let free = evolve4(&g, before, 1.0, 2.0, 1e-3)?;
        let kicked = evolve4(&g, measured, 1.0, 2.0, 1e-3)?;
        let (a, b) = (free.last().expect("nonempty").1, kicked.last().expect("nonempty").1);
        let divergence = (a[2] - b[2]).abs().max((a[3] - b[3]).abs());
        Ok(vec![
            Check::flag("projective_after_states", exact),
            Check::flag("weak_update", weak_exact),
            Check::above("back_action_on_b", divergence, 1e-6),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("measurement", e)])
}
