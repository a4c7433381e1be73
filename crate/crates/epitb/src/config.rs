//! Scenario files: JSON with a `version` field and a model tagged by `kind`.
//!
//! ```json
//! {
//!   "version": 1,
//!   "t0": 0.0, "t1": 5.0, "dt": 0.001,
//!   "model": {
//!     "kind": "epidemic2",
//!     "generator": [[-0.5, 0.3], [0.5, -0.3]],
//!     "initial": [0.2, 0.8]
//!   },
//!   "events": [{ "time": 1.0, "kind": "projective", "target": "sample" }],
//!   "seed": 7
//! }
//! ```
//!
//! A rate is a number, `{"value": v, "slope": s}` or a table
//! `[[t, value], ...]`.

use std::path::Path;

use epitb_core::coupled::{Basis4, CrossCouplings, Generator4};
use epitb_core::epidemic::{Generator2, Rate, RateMatrix};
use epitb_core::mapping::VectorPotential;
use epitb_core::numkit::RealMatrix;
use epitb_core::quantum::{coulomb_energy, Hopping, TBHamiltonian2Q, WaveState4};
use epitb_core::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    /// Required whenever an event samples a measurement outcome.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Keep every `stride`-th integration step; segment ends are always kept.
    #[serde(default = "one")]
    pub stride: usize,
    pub model: Model,
    #[serde(default)]
    pub events: Vec<TimedEvent>,
    /// Empty means every series the model supports.
    #[serde(default)]
    pub outputs: Vec<Output>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Constant(f64),
    Table(Vec<[f64; 2]>),
    Affine { value: f64, slope: f64 },
}

impl RateSpec {
    pub fn to_rate(&self) -> Result<Rate> {
        match self {
            RateSpec::Constant(v) => Ok(Rate::Constant(*v)),
            RateSpec::Affine { value, slope } => Ok(Rate::Affine { value: *value, slope: *slope }),
            RateSpec::Table(points) => Ok(Rate::table(points.iter().map(|p| (p[0], p[1])).collect())?),
        }
    }
}

impl From<f64> for RateSpec {
    fn from(v: f64) -> Self {
        RateSpec::Constant(v)
    }
}

fn rate_or_zero(r: &Option<RateSpec>) -> Result<Rate> {
    r.as_ref().map_or(Ok(Rate::Constant(0.0)), RateSpec::to_rate)
}

fn generator2(m: &[[RateSpec; 2]; 2]) -> Result<Generator2> {
    Ok(Generator2::new(m[0][0].to_rate()?, m[0][1].to_rate()?, m[1][0].to_rate()?, m[1][1].to_rate()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Model {
    #[serde(rename = "epidemic2")]
    Epidemic2 { generator: [[RateSpec; 2]; 2], initial: [f64; 2] },
    #[serde(rename = "epidemicN")]
    EpidemicN { generator: Vec<Vec<RateSpec>>, initial: Vec<f64> },
    #[serde(rename = "coupled4")]
    Coupled4 { generator: Coupled4Spec, initial: [f64; 4] },
    #[serde(rename = "quantum2q")]
    Quantum2q { hamiltonian: HamiltonianSpec, initial: WaveSpec },
    #[serde(rename = "mapping")]
    Mapping { hamiltonian: HamiltonianSpec, initial: WaveSpec },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Epidemic2 { .. } => "epidemic2",
            Model::EpidemicN { .. } => "epidemicN",
            Model::Coupled4 { .. } => "coupled4",
            Model::Quantum2q { .. } => "quantum2q",
            Model::Mapping { .. } => "mapping",
        }
    }

    /// Series each model can emit, in column order.
    pub fn supported_outputs(&self) -> &'static [Output] {
        use Output::*;
        match self {
            Model::Epidemic2 { .. } => &[Probabilities, EnsembleWeights, Ratio, Residuals],
            Model::EpidemicN { .. } => &[Probabilities, Residuals],
            Model::Coupled4 { .. } | Model::Quantum2q { .. } | Model::Mapping { .. } => {
                &[Probabilities, Entropies, Residuals]
            }
        }
    }

    pub fn default_outputs(&self) -> &'static [Output] {
        match self {
            Model::Epidemic2 { .. } => &[Output::Probabilities, Output::EnsembleWeights, Output::Ratio],
            _ => self.supported_outputs(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSpec {
    #[serde(default)]
    pub s_1a2b: Option<RateSpec>,
    #[serde(default)]
    pub s_2a2b: Option<RateSpec>,
    #[serde(default)]
    pub s_2a1b: Option<RateSpec>,
    #[serde(default)]
    pub s_1a1b: Option<RateSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisSpec {
    Traffic,
    Product,
}

impl From<BasisSpec> for Basis4 {
    fn from(b: BasisSpec) -> Self {
        match b {
            BasisSpec::Traffic => Basis4::Traffic,
            BasisSpec::Product => Basis4::Product,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Coupled4Spec {
    Traffic {
        sa: [[RateSpec; 2]; 2],
        sb: [[RateSpec; 2]; 2],
        #[serde(default)]
        cross: CrossSpec,
    },
    Symmetric { s: [[RateSpec; 2]; 2], coupling: RateSpec },
    KronSum { sa: [[RateSpec; 2]; 2], sb: [[RateSpec; 2]; 2] },
    Dense { matrix: Vec<Vec<RateSpec>>, basis: BasisSpec },
}

impl Coupled4Spec {
    pub fn build(&self) -> Result<Generator4> {
        Ok(match self {
            Coupled4Spec::Traffic { sa, sb, cross } => {
                let cross = CrossCouplings {
                    s_1a2b: rate_or_zero(&cross.s_1a2b)?,
                    s_2a2b: rate_or_zero(&cross.s_2a2b)?,
                    s_2a1b: rate_or_zero(&cross.s_2a1b)?,
                    s_1a1b: rate_or_zero(&cross.s_1a1b)?,
                };
                Generator4::traffic(&generator2(sa)?, &generator2(sb)?, &cross)
            }
            Coupled4Spec::Symmetric { s, coupling } => Generator4::symmetric(&generator2(s)?, coupling.to_rate()?),
            Coupled4Spec::KronSum { sa, sb } => Generator4::kron_sum(&generator2(sa)?, &generator2(sb)?),
            Coupled4Spec::Dense { matrix, basis } => {
                if matrix.len() != 4 || matrix.iter().any(|r| r.len() != 4) {
                    return invalid("dense coupled4 generator must be 4x4");
                }
                let entries = matrix.iter().flatten().map(RateSpec::to_rate).collect::<Result<Vec<_>>>()?;
                Generator4::from_rates(entries, (*basis).into())?
            }
        })
    }

    pub fn basis(&self) -> Basis4 {
        match self {
            Coupled4Spec::Traffic { .. } | Coupled4Spec::Symmetric { .. } => Basis4::Traffic,
            Coupled4Spec::KronSum { .. } => Basis4::Product,
            Coupled4Spec::Dense { basis, .. } => (*basis).into(),
        }
    }
}

pub fn rate_matrix(m: &[Vec<RateSpec>]) -> Result<RateMatrix> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return invalid("epidemicN generator must be a nonempty square matrix");
    }
    let entries = m.iter().flatten().map(RateSpec::to_rate).collect::<Result<Vec<_>>>()?;
    Ok(RateMatrix::new(n, entries)?)
}

/// A real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexSpec {
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexSpec::Real(x) => Complex64::new(x, 0.0),
            ComplexSpec::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

/// A single amplitude `t` means `t` for `2 → 1` and `conj(t)` for `1 → 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HoppingSpec {
    Symmetric(ComplexSpec),
    Directed { one_to_two: ComplexSpec, two_to_one: ComplexSpec },
}

impl HoppingSpec {
    pub fn value(&self) -> Hopping {
        match self {
            HoppingSpec::Symmetric(t) => Hopping::hermitian(t.value()),
            HoppingSpec::Directed { one_to_two, two_to_one } => {
                Hopping { one_to_two: one_to_two.value(), two_to_one: two_to_one.value() }
            }
        }
    }
}

/// Coulomb energies `[Ec11, Ec12, Ec21, Ec22]`, or a charge and the four
/// inter-site distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoulombSpec {
    Energies([f64; 4]),
    Geometry { charge: f64, distances: [f64; 4] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    /// On-site energies at `1A, 2A, 1B, 2B`.
    pub ep: [ComplexSpec; 4],
    pub ts_a: HoppingSpec,
    pub ts_b: HoppingSpec,
    pub coulomb: CoulombSpec,
    /// Escape rate `κ`: `−i·κ` is added to every on-site energy.
    #[serde(default)]
    pub escape: f64,
    /// Energies are divided by this before evolving.
    #[serde(default = "unit")]
    pub hbar: f64,
}

fn unit() -> f64 {
    1.0
}

impl HamiltonianSpec {
    /// Parameters in units with `ħ = 1`.
    pub fn build(&self) -> Result<TBHamiltonian2Q> {
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return invalid("hbar must be positive");
        }
        let ec = match self.coulomb {
            CoulombSpec::Energies(e) => e,
            CoulombSpec::Geometry { charge, distances } => {
                let mut e = [0.0; 4];
                for (k, d) in distances.iter().enumerate() {
                    e[k] = coulomb_energy(charge, *d)?;
                }
                e
            }
        };
        let k = 1.0 / self.hbar;
        let scale = |h: Hopping| Hopping { one_to_two: h.one_to_two * k, two_to_one: h.two_to_one * k };
        let h = TBHamiltonian2Q {
            ep1a: self.ep[0].value() * k,
            ep2a: self.ep[1].value() * k,
            ep1b: self.ep[2].value() * k,
            ep2b: self.ep[3].value() * k,
            ts_a: scale(self.ts_a.value()),
            ts_b: scale(self.ts_b.value()),
            ec11: ec[0] * k,
            ec12: ec[1] * k,
            ec21: ec[2] * k,
            ec22: ec[3] * k,
        }
        .with_escape(self.escape * k);
        if !h.is_finite() {
            return invalid("hamiltonian parameters must be finite");
        }
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WaveSpec {
    Amplitudes([ComplexSpec; 4]),
    Polar { p: [f64; 4], theta: [f64; 4] },
}

impl WaveSpec {
    pub fn build(&self) -> Result<WaveState4> {
        let w = match self {
            WaveSpec::Amplitudes(a) => WaveState4::new(a.map(|z| z.value())),
            WaveSpec::Polar { p, theta } => {
                if p.iter().any(|x| *x < 0.0) {
                    return invalid("polar probabilities must be nonnegative");
                }
                WaveState4::from_polar(*p, *theta)
            }
        };
        let n = w.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return invalid("initial wave state must have a positive finite norm");
        }
        Ok(w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub time: f64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Projective { target: Target },
    Weak { population: u64, tested: u64, p_test: Vec<f64> },
    AharonovBohm { potential: PotentialSpec },
}

/// `{"level": k}` with `k` 1-based, `"sample"` to draw the level, or
/// `"sample_a"` / `"sample_b"` to draw one subsystem of a coupled model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Level(u8),
    Sample,
    SampleA,
    SampleB,
}

impl Target {
    pub fn is_sampled(self) -> bool {
        !matches!(self, Target::Level(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// `A_x` at `1A, 2A, 1B, 2B`.
    pub ax: [f64; 4],
    pub delta_l: f64,
    pub e_over_hbar: f64,
}

impl From<PotentialSpec> for VectorPotential {
    fn from(p: PotentialSpec) -> Self {
        VectorPotential { ax: p.ax, delta_l: p.delta_l, e_over_hbar: p.e_over_hbar }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Probabilities,
    EnsembleWeights,
    Entropies,
    Residuals,
    Ratio,
}

impl Scenario {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Reads, parses and validates a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let s = Self::from_json(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })?;
        s.validate()?;
        Ok(s)
    }

    /// Compact JSON with fields in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    /// Hex SHA-256 of [`Scenario::canonical_json`].
    pub fn digest(&self) -> String {
        format!("{:x}", Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Requested outputs in the model's column order.
    pub fn effective_outputs(&self) -> Vec<Output> {
        let wanted: &[Output] = if self.outputs.is_empty() { self.model.default_outputs() } else { &self.outputs };
        self.model.supported_outputs().iter().copied().filter(|o| wanted.contains(o)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return invalid(format!("unsupported version {} (expected {SCHEMA_VERSION})", self.version));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 < self.t1) {
            return invalid("need finite t0 < t1");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid("dt must be positive");
        }
        if self.stride == 0 {
            return invalid("stride must be at least 1");
        }
        for o in &self.outputs {
            if !self.model.supported_outputs().contains(o) {
                return invalid(format!("model {} has no {o:?} output", self.model.name()));
            }
        }
        let mut last = self.t0;
        for e in &self.events {
            if !(e.time >= self.t0 && e.time <= self.t1) {
                return invalid(format!("event time {} outside [t0, t1]", e.time));
            }
            if e.time < last {
                return invalid("events must be sorted by time");
            }
            last = e.time;
        }
        if self.events.iter().any(|e| matches!(&e.event, Event::Projective { target } if target.is_sampled()))
            && self.seed.is_none()
        {
            return invalid("sampled measurements need a seed");
        }
        self.validate_model()
    }

    fn validate_model(&self) -> Result<()> {
        let nonneg = |p: &[f64]| -> Result<()> {
            if p.iter().all(|x| x.is_finite() && *x >= 0.0) && p.iter().sum::<f64>() > 0.0 {
                Ok(())
            } else {
                invalid("initial probabilities must be nonnegative, finite and not all zero")
            }
        };
        match &self.model {
            Model::Epidemic2 { generator, initial } => {
                generator2(generator)?;
                nonneg(initial)?;
                self.check_classical_events(2, false)
            }
            Model::EpidemicN { generator, initial } => {
                let m = rate_matrix(generator)?;
                if m.dim() != initial.len() {
                    return invalid("epidemicN initial state and generator sizes differ");
                }
                if m.dim() > epitb_core::numkit::MAX_EXP_DIM {
                    return invalid("epidemicN supports at most 16 states");
                }
                nonneg(initial)?;
                self.check_classical_events(initial.len(), false)
            }
            Model::Coupled4 { generator, initial } => {
                generator.build()?;
                nonneg(initial)?;
                if generator.basis() != Basis4::Traffic
                    && self.events.iter().any(|e| matches!(e.event, Event::Projective { .. }))
                {
                    return invalid("coupled4 measurements need the traffic ordering");
                }
                self.check_classical_events(4, true)
            }
            Model::Quantum2q { hamiltonian, initial } => {
                hamiltonian.build()?;
                initial.build()?;
                self.check_quantum_events(false)
            }
            Model::Mapping { hamiltonian, initial } => {
                hamiltonian.build()?;
                initial.build()?;
                self.check_quantum_events(true)
            }
        }
    }

    fn check_classical_events(&self, n: usize, coupled: bool) -> Result<()> {
        for e in &self.events {
            match &e.event {
                Event::Projective { target } => match *target {
                    Target::Level(k) if k == 0 || k as usize > n => {
                        return invalid(format!("level {k} outside 1..={n}"));
                    }
                    Target::Sample if coupled => return invalid("coupled4 samples need sample_a or sample_b"),
                    Target::SampleA | Target::SampleB if !coupled => {
                        return invalid("sample_a and sample_b apply to coupled4 only");
                    }
                    _ => {}
                },
                Event::Weak { population, tested, p_test } => {
                    if coupled {
                        return invalid("weak measurements apply to epidemic models only");
                    }
                    if *population == 0 || tested > population {
                        return invalid("weak measurement needs 0 <= tested <= population, population > 0");
                    }
                    if p_test.len() != n || !p_test.iter().all(|x| x.is_finite()) {
                        return invalid(format!("p_test must hold {n} finite values"));
                    }
                }
                Event::AharonovBohm { .. } => return invalid("aharonov_bohm applies to quantum models only"),
            }
        }
        Ok(())
    }

    fn check_quantum_events(&self, initial_only: bool) -> Result<()> {
        for e in &self.events {
            match &e.event {
                Event::AharonovBohm { potential } => {
                    let v = potential;
                    if !(v.ax.iter().all(|x| x.is_finite()) && v.delta_l.is_finite() && v.e_over_hbar.is_finite()) {
                        return invalid("vector potential must be finite");
                    }
                    if initial_only && e.time != self.t0 {
                        return invalid("mapping scenarios apply aharonov_bohm at t0 only");
                    }
                }
                _ => return invalid("quantum models accept aharonov_bohm events only"),
            }
        }
        Ok(())
    }
}

/// Constant matrix as rate specs, for building scenarios in code.
pub fn constant_matrix(m: &RealMatrix) -> Vec<Vec<RateSpec>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|&v| RateSpec::Constant(v)).collect()).collect()
}
