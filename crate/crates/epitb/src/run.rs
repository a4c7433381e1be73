//! Scenario execution: integrate between events, apply each event, record
//! the requested series and collect checks.

use std::path::Path;

use epitb_core::coupled::{evolve4, factorization_defect, measure_subsystem, Basis4, Form4, ProbState4, Site};
use epitb_core::density::classical_entropies;
use epitb_core::epidemic::{
    ensemble_decompose, measure_projective, measure_weak, occupancy_ratio, propagate_closed_form, sample_outcome,
    Generator2, Level, ProbState2,
};
use epitb_core::mapping::{apply_aharonov_bohm, verify_equivalence, VectorPotential};
use epitb_core::numkit::{ode_evolve, Scalar, Trajectory};
use epitb_core::quantum::{build_hamiltonian, evolve_schrodinger, expectation, pure_entropy_pair, WaveState4};
use epitb_core::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{rate_matrix, Event, Model, Output, Scenario, Target};
use crate::error::{invalid, CliError, Result};
use crate::report::{Check, RunReport};
use crate::series::{write_csv, write_meta, Series};

/// Series and report of one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub series: Series,
    pub report: RunReport,
}

impl RunOutput {
    /// `series.csv`, `series.meta.json` and `report.json` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        let csv = dir.join("series.csv");
        write_csv(&self.series, &csv)?;
        write_meta(&self.series, &self.report.scenario_digest, &csv)?;
        self.report.write(&dir.join("report.json"))
    }
}

/// Runs any model. Mapping scenarios produce the same certificate as
/// [`map`].
pub fn simulate(s: &Scenario) -> Result<RunOutput> {
    s.validate()?;
    match &s.model {
        Model::Epidemic2 { .. } => run_epidemic2(s),
        Model::EpidemicN { .. } => run_epidemic_n(s),
        Model::Coupled4 { .. } => run_coupled4(s),
        Model::Quantum2q { .. } => run_quantum(s),
        Model::Mapping { .. } => run_mapping(s),
    }
}

/// Certificate mode; only mapping scenarios are accepted.
pub fn map(s: &Scenario) -> Result<RunOutput> {
    s.validate()?;
    match s.model {
        Model::Mapping { .. } => run_mapping(s),
        _ => invalid(format!("map needs a mapping scenario, got {}", s.model.name())),
    }
}

/// Integrates piecewise between event times. `row` receives the sample and
/// the start of its segment; a post-event row shares the event time.
fn drive<T: Scalar>(
    s: &Scenario,
    y0: Vec<T>,
    mut evolve: impl FnMut(f64, f64, &[T]) -> Result<Trajectory<T>>,
    mut apply: impl FnMut(&Event, &mut Vec<T>) -> Result<()>,
    mut row: impl FnMut(f64, &[T], (f64, &[T])) -> Result<Vec<f64>>,
    series: &mut Series,
) -> Result<()> {
    let mut y = y0;
    let mut start = (s.t0, y.clone());
    let mut emit = |t: f64, y: &[T], start: &(f64, Vec<T>), series: &mut Series| -> Result<()> {
        let mut r = vec![t];
        r.extend(row(t, y, (start.0, &start.1))?);
        series.push(r);
        Ok(())
    };
    emit(s.t0, &y, &start, series)?;
    let mut cur = s.t0;
    let mut step = 0usize;
    let ends = s.events.iter().map(|e| (e.time, Some(&e.event))).chain([(s.t1, None)]);
    for (t_end, event) in ends {
        if t_end > cur {
            let traj = evolve(cur, t_end, &y)?;
            let n = traj.len();
            for (i, (t, state)) in traj.iter().enumerate().skip(1) {
                step += 1;
                if step.is_multiple_of(s.stride) || i + 1 == n {
                    emit(t, state, &start, series)?;
                }
            }
            y = traj.last().expect("trajectory has its initial sample").1.to_vec();
            cur = t_end;
        }
        if let Some(e) = event {
            apply(e, &mut y)?;
            start = (cur, y.clone());
            emit(cur, &y, &start, series)?;
        }
    }
    Ok(())
}

fn rng(s: &Scenario) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(s.seed.unwrap_or(0))
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| (*s).to_owned()).collect()
}

fn run_epidemic2(s: &Scenario) -> Result<RunOutput> {
    let Model::Epidemic2 { generator, initial } = &s.model else { unreachable!() };
    let g = Generator2::new(
        generator[0][0].to_rate()?,
        generator[0][1].to_rate()?,
        generator[1][0].to_rate()?,
        generator[1][1].to_rate()?,
    );
    let outputs = s.effective_outputs();
    let mut cols = columns(&["t"]);
    for o in &outputs {
        cols.extend(columns(match o {
            Output::Probabilities => &["p1", "p2"],
            Output::EnsembleWeights => &["pI", "pII"],
            Output::Ratio => &["r12"],
            Output::Residuals => &["gap"],
            Output::Entropies => &[],
        }));
    }
    let mut series = Series::new(cols);
    let mut rng = rng(s);
    let (mut gap, mut ratio_err, mut undefined) = (0.0f64, 0.0f64, 0usize);
    drive(
        s,
        initial.to_vec(),
        |a, b, y| Ok(ode_evolve(|t| g.matrix(t), y, a, b, s.dt)?),
        |e, y| {
            let p = ProbState2 { p1: y[0], p2: y[1] };
            let after = match e {
                Event::Projective { target: Target::Level(k) } => {
                    measure_projective(p, if *k == 1 { Level::One } else { Level::Two })?
                }
                Event::Projective { .. } => measure_projective(p, sample_outcome(p, rng.random())?)?,
                Event::Weak { population, tested, p_test } => {
                    measure_weak(p, *population, *tested, ProbState2 { p1: p_test[0], p2: p_test[1] })?
                }
                Event::AharonovBohm { .. } => unreachable!("rejected by validation"),
            };
            *y = after.as_array().to_vec();
            Ok(())
        },
        |t, y, (t_s, y_s)| {
            let p = ProbState2 { p1: y[0], p2: y[1] };
            let p_s = ProbState2 { p1: y_s[0], p2: y_s[1] };
            let mut r = Vec::new();
            for o in &outputs {
                match o {
                    Output::Probabilities => r.extend([p.p1, p.p2]),
                    Output::EnsembleWeights => {
                        let w = ensemble_decompose(p, &g, t)?;
                        r.extend([w.p_i, w.p_ii]);
                    }
                    Output::Ratio => match occupancy_ratio(&g, p_s, t_s, t) {
                        Ok(v) => {
                            if p.p2.abs() > 1e-12 {
                                ratio_err = ratio_err.max((v - p.p1 / p.p2).abs() / (p.p1 / p.p2).abs().max(1.0));
                            }
                            r.push(v);
                        }
                        Err(Error::VanishingDenominator(_)) => {
                            undefined += 1;
                            r.push(f64::NAN);
                        }
                        Err(e) => return Err(e.into()),
                    },
                    Output::Residuals => {
                        let c = propagate_closed_form(&g, p_s, t_s, t)?;
                        let d = (c.p1 - p.p1).abs().max((c.p2 - p.p2).abs());
                        gap = gap.max(d);
                        r.push(d);
                    }
                    Output::Entropies => {}
                }
            }
            Ok(r)
        },
        &mut series,
    )?;
    let exact = g.is_constant();
    let mut checks = Vec::new();
    if outputs.contains(&Output::Residuals) {
        checks.push(if exact {
            Check::at_most("closed_form_gap", gap, 1e-8)
        } else {
            Check::info("closed_form_gap", gap).with_note("time-dependent generator: exp of the integral is approximate")
        });
    }
    if outputs.contains(&Output::Ratio) {
        checks.push(if exact { Check::at_most("ratio_vs_p1_over_p2", ratio_err, 1e-8) } else { Check::info("ratio_vs_p1_over_p2", ratio_err) });
        checks.push(Check::info("ratio_undefined_samples", undefined as f64));
    }
    Ok(RunOutput { series, report: RunReport::new(s, checks) })
}

fn run_epidemic_n(s: &Scenario) -> Result<RunOutput> {
    let Model::EpidemicN { generator, initial } = &s.model else { unreachable!() };
    let g = rate_matrix(generator)?;
    let n = initial.len();
    let outputs = s.effective_outputs();
    let mut cols = columns(&["t"]);
    if outputs.contains(&Output::Probabilities) {
        cols.extend((1..=n).map(|k| format!("p{k}")));
    }
    if outputs.contains(&Output::Residuals) {
        cols.push("drift".into());
    }
    let mut series = Series::new(cols);
    let mut rng = rng(s);
    let mut drift = 0.0f64;
    drive(
        s,
        initial.clone(),
        |a, b, y| Ok(ode_evolve(|t| g.at(t), y, a, b, s.dt)?),
        |e, y| {
            match e {
                Event::Projective { target } => {
                    let k = match *target {
                        Target::Level(k) => k as usize - 1,
                        _ => {
                            let total: f64 = y.iter().sum();
                            if !(total > 0.0) {
                                return Err(Error::EmptyState(total).into());
                            }
                            let u: f64 = rng.random::<f64>() * total;
                            let mut acc = 0.0;
                            y.iter().position(|&p| {
                                acc += p.max(0.0);
                                u < acc
                            })
                            .unwrap_or(n - 1)
                        }
                    };
                    y.iter_mut().enumerate().for_each(|(i, p)| *p = if i == k { 1.0 } else { 0.0 });
                }
                Event::Weak { population, tested, p_test } => {
                    let (nn, n1) = (*population as f64, *tested as f64);
                    y.iter_mut().zip(p_test).for_each(|(p, q)| *p = ((nn - n1) * *p + n1 * q) / nn);
                }
                Event::AharonovBohm { .. } => unreachable!("rejected by validation"),
            }
            Ok(())
        },
        |_, y, (_, y_s)| {
            let mut r = Vec::new();
            if outputs.contains(&Output::Probabilities) {
                r.extend_from_slice(y);
            }
            if outputs.contains(&Output::Residuals) {
                let d = y.iter().sum::<f64>() - y_s.iter().sum::<f64>();
                drift = drift.max(d.abs());
                r.push(d);
            }
            Ok(r)
        },
        &mut series,
    )?;
    let checks = if outputs.contains(&Output::Residuals) { vec![Check::info("max_probability_drift", drift)] } else { vec![] };
    Ok(RunOutput { series, report: RunReport::new(s, checks) })
}

fn run_coupled4(s: &Scenario) -> Result<RunOutput> {
    let Model::Coupled4 { generator, initial } = &s.model else { unreachable!() };
    let g = generator.build()?;
    let basis = g.basis();
    let outputs = s.effective_outputs();
    let mut cols = columns(&["t"]);
    for o in &outputs {
        match o {
            Output::Probabilities => cols.extend(columns(match basis {
                Basis4::Traffic => &["pA1", "pA2", "pB1", "pB2"],
                Basis4::Product => &["pI", "pII", "pIII", "pIV"],
            })),
            Output::Entropies => cols.extend(columns(&["SA", "SB"])),
            Output::Residuals => {
                cols.push("drift".into());
                if basis == Basis4::Product {
                    cols.push("defect".into());
                }
            }
            _ => {}
        }
    }
    let mut series = Series::new(cols);
    let mut rng = rng(s);
    let (mut drift, mut defect, mut undefined) = (0.0f64, 0.0f64, 0usize);
    let state = |y: &[f64]| ProbState4 { p: [y[0], y[1], y[2], y[3]], basis };
    drive(
        s,
        initial.to_vec(),
        |a, b, y| Ok(evolve4(&g, state(y), a, b, s.dt)?),
        |e, y| {
            let Event::Projective { target } = e else { unreachable!("rejected by validation") };
            let site = match *target {
                Target::Level(k) => Site::from_number(k)?,
                Target::SampleA | Target::SampleB => {
                    let a = *target == Target::SampleA;
                    let (lo, hi) = if a { (y[0], y[1]) } else { (y[2], y[3]) };
                    let level = sample_outcome(ProbState2 { p1: lo, p2: hi }, rng.random())?;
                    match (a, level) {
                        (true, Level::One) => Site::OneA,
                        (true, Level::Two) => Site::TwoA,
                        (false, Level::One) => Site::OneB,
                        (false, Level::Two) => Site::TwoB,
                    }
                }
                Target::Sample => unreachable!("rejected by validation"),
            };
            *y = measure_subsystem(state(y), site)?.p.to_vec();
            Ok(())
        },
        |_, y, (_, y_s)| {
            let mut r = Vec::new();
            for o in &outputs {
                match o {
                    Output::Probabilities => r.extend_from_slice(y),
                    Output::Entropies => match ProbState4::product([y[0], y[1], y[2], y[3]]) {
                        Ok(p) if p.total() > 0.0 => {
                            let (sa, sb) = classical_entropies(&p)?;
                            r.extend([sa, sb]);
                        }
                        _ => {
                            undefined += 1;
                            r.extend([f64::NAN, f64::NAN]);
                        }
                    },
                    Output::Residuals => {
                        let d = y.iter().sum::<f64>() - y_s.iter().sum::<f64>();
                        drift = drift.max(d.abs());
                        r.push(d);
                        if basis == Basis4::Product {
                            let f = factorization_defect(&state(y))?;
                            defect = defect.max(f);
                            r.push(f);
                        }
                    }
                    _ => {}
                }
            }
            Ok(r)
        },
        &mut series,
    )?;
    let mut checks = Vec::new();
    if outputs.contains(&Output::Residuals) {
        checks.push(Check::info("max_probability_drift", drift));
        if basis == Basis4::Product {
            let start = factorization_defect(&state(initial))?;
            let product_flow = matches!(g.form(), Form4::KronSum) && start <= 1e-14 && s.events.is_empty();
            checks.push(if product_flow {
                Check::at_most("max_factorization_defect", defect, 1e-10)
            } else {
                Check::info("max_factorization_defect", defect)
            });
        }
    }
    if outputs.contains(&Output::Entropies) {
        checks.push(Check::info("entropy_undefined_samples", undefined as f64));
    }
    Ok(RunOutput { series, report: RunReport::new(s, checks) })
}

fn phase_shift(psi: &mut [Complex64], v: VectorPotential) {
    let shift = apply_aharonov_bohm([0.0; 4], &v);
    for (g, d) in psi.iter_mut().zip(shift) {
        *g *= Complex64::from_polar(1.0, d);
    }
}

fn run_quantum(s: &Scenario) -> Result<RunOutput> {
    let Model::Quantum2q { hamiltonian, initial } = &s.model else { unreachable!() };
    let params = hamiltonian.build()?;
    let h = build_hamiltonian(&params);
    let hermitian = params.check_hermitian().is_ok();
    let dissipative = [params.ep1a, params.ep2a, params.ep1b, params.ep2b].iter().all(|e| e.im <= 0.0)
        && [params.ep1a, params.ep2a, params.ep1b, params.ep2b].iter().any(|e| e.im < 0.0);
    let outputs = s.effective_outputs();
    let mut cols = columns(&["t"]);
    for o in &outputs {
        cols.extend(columns(match o {
            Output::Probabilities => &["pI", "pII", "pIII", "pIV"],
            Output::Entropies => &["SA", "SB"],
            Output::Residuals => &["norm", "energy"],
            _ => &[],
        }));
    }
    let mut series = Series::new(cols);
    let (mut entropy_gap, mut norm_drift, mut energy_drift) = (0.0f64, 0.0f64, 0.0f64);
    let mut totals = Vec::new();
    drive(
        s,
        initial.build()?.gamma.to_vec(),
        |a, b, y| Ok(evolve_schrodinger(|_| h.clone(), y, a, b, s.dt)?),
        |e, y| {
            let Event::AharonovBohm { potential } = e else { unreachable!("rejected by validation") };
            phase_shift(y, (*potential).into());
            Ok(())
        },
        |_, y, (_, y_s)| {
            let norm: f64 = y.iter().map(|g| g.norm_sqr()).sum();
            totals.push(norm);
            let norm_s: f64 = y_s.iter().map(|g| g.norm_sqr()).sum();
            norm_drift = norm_drift.max((norm - norm_s).abs());
            let energy = expectation(&h, y);
            energy_drift = energy_drift.max((energy - expectation(&h, y_s)).norm());
            let mut r = Vec::new();
            for o in &outputs {
                match o {
                    Output::Probabilities => r.extend(y.iter().map(|g| g.norm_sqr())),
                    Output::Entropies => {
                        let (sa, sb) = pure_entropy_pair(&WaveState4::from_slice(y)?)?;
                        entropy_gap = entropy_gap.max((sa - sb).abs());
                        r.extend([sa, sb]);
                    }
                    Output::Residuals => r.extend([norm, energy.re]),
                    _ => {}
                }
            }
            Ok(r)
        },
        &mut series,
    )?;
    let span = ((s.t1 - s.t0) / 10.0).max(1.0);
    let mut checks = Vec::new();
    if outputs.contains(&Output::Entropies) {
        checks.push(Check::at_most("entropy_symmetry", entropy_gap, 1e-9));
    }
    if hermitian {
        checks.push(Check::at_most("norm_drift", norm_drift, 1e-9 * span));
        checks.push(Check::at_most("energy_drift", energy_drift, 1e-8 * span));
    } else {
        checks.push(Check::info("norm_drift", norm_drift));
    }
    if dissipative {
        checks.push(Check::flag("probability_nonincreasing", totals.windows(2).all(|w| w[1] <= w[0])));
    }
    Ok(RunOutput { series, report: RunReport::new(s, checks) })
}

fn run_mapping(s: &Scenario) -> Result<RunOutput> {
    let Model::Mapping { hamiltonian, initial } = &s.model else { unreachable!() };
    let params = hamiltonian.build()?;
    let mut psi = initial.build()?;
    for e in &s.events {
        if let Event::AharonovBohm { potential } = &e.event {
            phase_shift(&mut psi.gamma, (*potential).into());
        }
    }
    let r = verify_equivalence(&params, &psi, s.t0, s.t1, s.dt)?;
    let outputs = s.effective_outputs();
    // The split state drops the phase signs that the entropies need.
    let amplitudes = if outputs.contains(&Output::Entropies) {
        let h = build_hamiltonian(&params);
        evolve_schrodinger(|_| h.clone(), &psi.gamma, s.t0, s.t1, s.dt)?.states().to_vec()
    } else {
        Vec::new()
    };
    let mut cols = columns(&["t", "ReI", "ImI", "ReII", "ImII", "ReIII", "ImIII", "ReIV", "ImIV"]);
    for o in &outputs {
        cols.extend(columns(match o {
            Output::Probabilities => &["pI", "pII", "pIII", "pIV"],
            Output::Entropies => &["SA", "SB"],
            Output::Residuals => &["residual", "total"],
            _ => &[],
        }));
    }
    let mut series = Series::new(cols);
    for (i, x) in r.split.iter().enumerate() {
        if i % s.stride != 0 && i + 1 != r.split.len() {
            continue;
        }
        let mut row = vec![r.times[i]];
        row.extend_from_slice(x);
        for o in &outputs {
            match o {
                Output::Probabilities => row.extend((0..4).map(|k| x[2 * k] + x[2 * k + 1])),
                Output::Entropies => {
                    let (sa, sb) = pure_entropy_pair(&WaveState4::from_slice(&amplitudes[i])?)?;
                    row.extend([sa, sb]);
                }
                Output::Residuals => row.extend([r.residuals[i], r.total_probability[i]]),
                _ => {}
            }
        }
        series.push(row);
    }
    let dissipative = [params.ep1a, params.ep2a, params.ep1b, params.ep2b].iter().any(|e| e.im < 0.0);
    let mut checks = vec![
        Check::at_most("max_residual", r.max_residual, 1e-6),
        Check::at_most("split_error", r.split_error, 1e-10),
        Check::at_most("embedding_error", r.embedding_error, 1e-8),
        Check::info("tan2_error", r.tan2_error),
        Check::info("phase_velocity_error", r.phase_velocity_error),
        Check::info("excluded_intervals", r.excluded.len() as f64),
    ];
    if r.hermitian {
        checks.push(Check::at_most("conservation_error", r.conservation_error, 1e-9));
    }
    if dissipative {
        checks.push(Check::flag("probability_nonincreasing", r.monotone_nonincreasing));
    }
    let mut report = RunReport::new(s, checks);
    report.excluded_intervals = r.excluded.iter().map(|&(a, b)| [a, b]).collect();
    Ok(RunOutput { series, report })
}
