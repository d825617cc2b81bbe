//! Shot-by-shot simulation of the heralding protocols.
//!
//! The quantum part of every protocol is deterministic given the detector
//! record, so it is worked out once: a [`Simulation`] precomputes a tree of
//! unit outcomes with their exact probabilities and conditional states.
//! Each shot then walks that tree, drawing the true photon counts from the
//! table, thinning them through the detectors and applying the acceptance
//! rule of the current unit.
//!
//! Shot `i` of a run with seed `s` draws from ChaCha8 seeded with `s` on
//! stream `i`, so any shot can be replayed on its own and shard boundaries
//! never change the result.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{
    efficiency_penalty, AnalyticsReport, CascadeSpec, DetectionScheme, Parity, ResolvingReport,
};
use crate::error::{Error, Result};
use crate::fock::{fidelity, make_noon, NoonSpec, PureState, Reflectance};
use crate::unit::{
    detection_table, relabel_for_next_unit, unit_propagate, DetectionEvent, MODE_A, MODE_A_OUT,
    MODE_B, MODE_B_OUT,
};

/// Shards used by the convenience entry points.
pub const DEFAULT_SHARDS: usize = 8;

/// Fidelity at or above which an output counts as the target state.
pub const CORRECT_FIDELITY: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// Reports the number of photons that survive thinning.
    Resolving,
    /// Reports only whether any photon survived.
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    /// Probability that each incident photon is registered.
    pub efficiency: f64,
}

impl DetectorModel {
    pub fn new(kind: DetectorKind, efficiency: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "detector efficiency must lie in (0, 1], got {efficiency}"
            )));
        }
        Ok(DetectorModel { kind, efficiency })
    }

    pub fn ideal(kind: DetectorKind) -> Self {
        DetectorModel {
            kind,
            efficiency: 1.0,
        }
    }

    fn clamp(&self, registered: u32) -> u32 {
        match self.kind {
            DetectorKind::Resolving => registered,
            DetectorKind::Threshold => registered.min(1),
        }
    }

    fn observe<R: Rng + ?Sized>(&self, incident: u32, rng: &mut R) -> u32 {
        let registered = if incident == 0 || self.efficiency >= 1.0 {
            incident
        } else {
            Binomial::new(incident as u64, self.efficiency)
                .expect("efficiency validated")
                .sample(rng) as u32
        };
        self.clamp(registered)
    }

    /// Probability that `incident` photons register as `registered` before
    /// clamping.
    fn thinning_pmf(&self, incident: u32, registered: u32) -> f64 {
        let eta = self.efficiency;
        crate::unit::binomial(incident, registered)
            * eta.powi(registered as i32)
            * (1.0 - eta).powi((incident - registered) as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    OddCascade,
    EvenCascade,
    Resolving,
}

/// Acceptance rule of one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    /// Both detectors report exactly one.
    Coincidence,
    /// Exactly one detector reports one; `∓π/2` on `b'`.
    SingleClick,
    /// Reports summing to the given total; `(c - d)π/2` on `b'`.
    Total(u32),
}

impl Stage {
    /// Quarter turns to apply on `b'` if `observed` is accepted.
    fn accept(self, observed: DetectionEvent) -> Option<i32> {
        match self {
            Stage::Coincidence => (observed.d == 1 && observed.c == 1).then_some(0),
            Stage::SingleClick => match (observed.d, observed.c) {
                (1, 0) => Some(-1),
                (0, 1) => Some(1),
                _ => None,
            },
            Stage::Total(total) => {
                (observed.total() == total).then_some(observed.c as i32 - observed.d as i32)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Next {
    Unit(usize),
    /// Fidelity of the output after 0, 1, 2 or 3 quarter turns on `b'`.
    Output([f64; 4]),
    /// No observation of this event can be accepted.
    Stop,
}

#[derive(Debug, Clone)]
struct Branch {
    event: DetectionEvent,
    probability: f64,
    next: Next,
}

#[derive(Debug, Clone)]
struct Node {
    stage: Stage,
    branches: Vec<Branch>,
    cumulative: Vec<f64>,
}

impl Node {
    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Branch {
        let u = rng.random::<f64>() * self.total();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        &self.branches[idx.min(self.branches.len() - 1)]
    }
}

type Fingerprint = Vec<(u32, u32, i64, i64)>;

fn fingerprint(state: &PureState) -> Fingerprint {
    let mut fp: Fingerprint = state
        .terms()
        .map(|(fock, amp)| {
            (
                fock.get(MODE_A),
                fock.get(MODE_B),
                (amp.re * 1e9).round() as i64,
                (amp.im * 1e9).round() as i64,
            )
        })
        .collect();
    fp.sort_unstable();
    fp
}

struct TreeBuilder<'a> {
    units: &'a [(Reflectance, Stage)],
    target: &'a PureState,
    nodes: Vec<Node>,
    memo: HashMap<(usize, Fingerprint), usize>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, depth: usize, state: &PureState) -> Result<usize> {
        let key = (depth, fingerprint(state));
        if let Some(&idx) = self.memo.get(&key) {
            return Ok(idx);
        }
        let (rho, stage) = self.units[depth];
        let last = depth + 1 == self.units.len();
        let mut branches = Vec::new();
        for outcome in detection_table(&unit_propagate(state, rho)?)? {
            let next = if last {
                let mut fids = [0.0; 4];
                for (q, f) in fids.iter_mut().enumerate() {
                    let turned = outcome
                        .transmitted
                        .phase_shift(MODE_B_OUT, q as f64 * FRAC_PI_2)?;
                    *f = fidelity(&turned, self.target)?;
                }
                Next::Output(fids)
            } else if outcome.event.d >= 1 && outcome.event.c >= 1 {
                let input = relabel_for_next_unit(&outcome.transmitted)?;
                Next::Unit(self.build(depth + 1, &input)?)
            } else {
                Next::Stop
            };
            branches.push(Branch {
                event: outcome.event,
                probability: outcome.probability,
                next,
            });
        }
        let cumulative = branches
            .iter()
            .scan(0.0, |acc, b| {
                *acc += b.probability;
                Some(*acc)
            })
            .collect();
        self.nodes.push(Node {
            stage,
            branches,
            cumulative,
        });
        let idx = self.nodes.len() - 1;
        self.memo.insert(key, idx);
        Ok(idx)
    }
}

/// The record of one simulated shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub index: u64,
    /// True photon counts per unit, in propagation order, up to the first
    /// rejection.
    pub events: Vec<DetectionEvent>,
    /// What the detectors reported for the same units.
    pub observed: Vec<DetectionEvent>,
    pub accepted: bool,
    /// Output fidelity with the target after the heralded correction.
    pub fidelity: Option<f64>,
    pub correct: bool,
}

/// Integer outcome counts; merging is exact and associative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub shots: u64,
    pub accepted: u64,
    pub correct: u64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            shots: self.shots + other.shots,
            accepted: self.accepted + other.accepted,
            correct: self.correct + other.correct,
        }
    }
}

/// Exact acceptance and success probabilities of a [`Simulation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRates {
    pub p_accept: f64,
    /// Unconditional probability of accepting a correct output.
    pub p_correct: f64,
}

impl ExactRates {
    pub fn p_cond(&self) -> f64 {
        if self.p_accept > 0.0 {
            self.p_correct / self.p_accept
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub protocol: ProtocolKind,
    pub photons: u32,
    pub phase: f64,
    /// Unit 1 first.
    pub reflectances: Vec<f64>,
    pub detector: DetectorModel,
    pub shots: u64,
    pub accepted: u64,
    pub correct: u64,
    /// Fraction of shots that emit the target state.
    pub efficiency_hat: f64,
    pub efficiency_se: f64,
    /// Fraction of accepted shots that are correct; `None` if nothing was
    /// accepted.
    pub fidelity_hat: Option<f64>,
    pub fidelity_se: Option<f64>,
    /// Aggregate efficiency multiplier quoted for the scheme, for reference;
    /// the simulation itself thins photon by photon.
    pub literal_penalty: f64,
    pub seed: u64,
    pub shards: usize,
    pub library_version: String,
}

/// A protocol instance ready to be sampled.
#[derive(Debug, Clone)]
pub struct Simulation {
    protocol: ProtocolKind,
    photons: u32,
    phase: f64,
    reflectances: Vec<f64>,
    detector: DetectorModel,
    nodes: Vec<Node>,
    root: usize,
}

impl Simulation {
    pub fn cascade(spec: &CascadeSpec, detector: DetectorModel) -> Result<Self> {
        let l = spec.units();
        // propagation order: unit l first
        let units: Vec<(Reflectance, Stage)> = (1..=l)
            .rev()
            .map(|k| {
                let stage = if k == 1 && spec.parity() == Parity::Even {
                    Stage::SingleClick
                } else {
                    Stage::Coincidence
                };
                (spec.reflectance(k), stage)
            })
            .collect();
        let protocol = match spec.parity() {
            Parity::Odd => ProtocolKind::OddCascade,
            Parity::Even => ProtocolKind::EvenCascade,
        };
        Self::build(
            protocol,
            spec.photons(),
            spec.phase(),
            spec.reflectances(),
            &units,
            detector,
        )
    }

    pub fn resolving(
        photons: u32,
        phase: f64,
        rho: Reflectance,
        detector: DetectorModel,
    ) -> Result<Self> {
        if photons < 2 {
            return Err(Error::InvalidSpec(format!(
                "resolving protocol needs N >= 2, got {photons}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("phase must be finite".into()));
        }
        Self::build(
            ProtocolKind::Resolving,
            photons,
            phase,
            vec![rho.value()],
            &[(rho, Stage::Total(photons - 1))],
            detector,
        )
    }

    fn build(
        protocol: ProtocolKind,
        photons: u32,
        phase: f64,
        reflectances: Vec<f64>,
        units: &[(Reflectance, Stage)],
        detector: DetectorModel,
    ) -> Result<Self> {
        DetectorModel::new(detector.kind, detector.efficiency)?;
        let input = make_noon(NoonSpec::standard(photons, phase)?, (MODE_A, MODE_B))?;
        let target = make_noon(
            NoonSpec::new(1, photons, phase)?,
            (MODE_A_OUT, MODE_B_OUT),
        )?;
        let mut builder = TreeBuilder {
            units,
            target: &target,
            nodes: Vec::new(),
            memo: HashMap::new(),
        };
        let root = builder.build(0, &input)?;
        Ok(Simulation {
            protocol,
            photons,
            phase,
            reflectances,
            detector,
            nodes: builder.nodes,
            root,
        })
    }

    pub fn detector(&self) -> DetectorModel {
        self.detector
    }

    fn rng(seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        rng
    }

    fn walk<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        mut record: impl FnMut(DetectionEvent, DetectionEvent),
    ) -> Option<f64> {
        let mut node = &self.nodes[self.root];
        loop {
            let branch = node.sample(rng);
            let observed = DetectionEvent::new(
                self.detector.observe(branch.event.d, rng),
                self.detector.observe(branch.event.c, rng),
            );
            record(branch.event, observed);
            let quarter = node.stage.accept(observed)?;
            match &branch.next {
                Next::Unit(child) => node = &self.nodes[*child],
                Next::Output(fids) => return Some(fids[quarter.rem_euclid(4) as usize]),
                Next::Stop => return None,
            }
        }
    }

    /// Replays shot `index` of a run seeded with `seed`.
    pub fn shot(&self, seed: u64, index: u64) -> Shot {
        let mut rng = Self::rng(seed, index);
        let mut events = Vec::new();
        let mut observed = Vec::new();
        let fidelity = self.walk(&mut rng, |e, o| {
            events.push(e);
            observed.push(o);
        });
        Shot {
            index,
            events,
            observed,
            accepted: fidelity.is_some(),
            fidelity,
            correct: fidelity.is_some_and(|f| f >= CORRECT_FIDELITY),
        }
    }

    /// Counts over shots `range`, seeded with `seed`.
    pub fn tally(&self, seed: u64, range: std::ops::Range<u64>) -> Tally {
        let mut tally = Tally::default();
        for index in range {
            let mut rng = Self::rng(seed, index);
            tally.shots += 1;
            if let Some(f) = self.walk(&mut rng, |_, _| {}) {
                tally.accepted += 1;
                if f >= CORRECT_FIDELITY {
                    tally.correct += 1;
                }
            }
        }
        tally
    }

    /// Runs `shots` shots split into `shards` contiguous ranges evaluated in
    /// parallel. The counts do not depend on `shards`.
    pub fn run(&self, shots: u64, seed: u64, shards: usize) -> Result<SimulationReport> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be positive".into()));
        }
        if shards == 0 {
            return Err(Error::InvalidParameter("shards must be positive".into()));
        }
        let per = shots.div_ceil(shards as u64);
        let tally = (0..shards as u64)
            .into_par_iter()
            .map(|s| {
                let start = (s * per).min(shots);
                let end = ((s + 1) * per).min(shots);
                self.tally(seed, start..end)
            })
            .reduce(Tally::default, Tally::merge);
        self.report(tally, seed, shards)
    }

    fn report(&self, tally: Tally, seed: u64, shards: usize) -> Result<SimulationReport> {
        let n = tally.shots as f64;
        let efficiency_hat = tally.correct as f64 / n;
        let (fidelity_hat, fidelity_se) = if tally.accepted > 0 {
            let a = tally.accepted as f64;
            let f = tally.correct as f64 / a;
            (Some(f), Some((f * (1.0 - f) / a).sqrt()))
        } else {
            (None, None)
        };
        let scheme = match self.protocol {
            ProtocolKind::Resolving => DetectionScheme::NumberResolving,
            _ => DetectionScheme::Coincidence,
        };
        Ok(SimulationReport {
            protocol: self.protocol,
            photons: self.photons,
            phase: self.phase,
            reflectances: self.reflectances.clone(),
            detector: self.detector,
            shots: tally.shots,
            accepted: tally.accepted,
            correct: tally.correct,
            efficiency_hat,
            efficiency_se: (efficiency_hat * (1.0 - efficiency_hat) / n).sqrt(),
            fidelity_hat,
            fidelity_se,
            literal_penalty: efficiency_penalty(scheme, self.photons, self.detector.efficiency)?,
            seed,
            shards,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    /// Acceptance and success probabilities summed over every detector
    /// record, including thinning.
    pub fn exact(&self) -> ExactRates {
        let mut memo = vec![None; self.nodes.len()];
        let (p_accept, p_correct) = self.exact_from(self.root, &mut memo);
        ExactRates {
            p_accept,
            p_correct,
        }
    }

    fn exact_from(&self, idx: usize, memo: &mut Vec<Option<(f64, f64)>>) -> (f64, f64) {
        if let Some(v) = memo[idx] {
            return v;
        }
        let node = &self.nodes[idx];
        let total = node.total();
        let (mut accept, mut correct) = (0.0, 0.0);
        for branch in &node.branches {
            let p = branch.probability / total;
            let e = branch.event;
            for rd in 0..=e.d {
                for rc in 0..=e.c {
                    let w = p * self.detector.thinning_pmf(e.d, rd) * self.detector.thinning_pmf(e.c, rc);
                    if w == 0.0 {
                        continue;
                    }
                    let observed =
                        DetectionEvent::new(self.detector.clamp(rd), self.detector.clamp(rc));
                    let Some(quarter) = node.stage.accept(observed) else {
                        continue;
                    };
                    match &branch.next {
                        Next::Unit(child) => {
                            let (a, c) = self.exact_from(*child, memo);
                            accept += w * a;
                            correct += w * c;
                        }
                        Next::Output(fids) => {
                            accept += w;
                            if fids[quarter.rem_euclid(4) as usize] >= CORRECT_FIDELITY {
                                correct += w;
                            }
                        }
                        Next::Stop => {}
                    }
                }
            }
        }
        memo[idx] = Some((accept, correct));
        (accept, correct)
    }
}

/// Runs a cascade with [`DEFAULT_SHARDS`] shards.
pub fn simulate_cascade(
    spec: &CascadeSpec,
    detector: DetectorModel,
    shots: u64,
    seed: u64,
) -> Result<SimulationReport> {
    Simulation::cascade(spec, detector)?.run(shots, seed, DEFAULT_SHARDS)
}

/// Runs the number-resolving protocol with [`DEFAULT_SHARDS`] shards.
pub fn simulate_resolving(
    photons: u32,
    phase: f64,
    rho: Reflectance,
    eta: f64,
    shots: u64,
    seed: u64,
) -> Result<SimulationReport> {
    let detector = DetectorModel::new(DetectorKind::Resolving, eta)?;
    Simulation::resolving(photons, phase, rho, detector)?.run(shots, seed, DEFAULT_SHARDS)
}

/// Something with a predicted efficiency and conditional fidelity.
pub trait Prediction {
    fn efficiency(&self) -> f64;
    fn fidelity(&self) -> f64;
}

impl Prediction for AnalyticsReport {
    fn efficiency(&self) -> f64 {
        self.p_success
    }

    fn fidelity(&self) -> f64 {
        self.p_cond
    }
}

impl Prediction for ResolvingReport {
    fn efficiency(&self) -> f64 {
        self.p_success
    }

    fn fidelity(&self) -> f64 {
        1.0
    }
}

impl Prediction for ExactRates {
    fn efficiency(&self) -> f64 {
        self.p_correct
    }

    fn fidelity(&self) -> f64 {
        self.p_cond()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Nothing was accepted, so the fidelity could not be checked.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub z_efficiency: f64,
    pub z_fidelity: Option<f64>,
    pub verdict: Verdict,
}

/// Binomial z-score of `observed` against `predicted` over `n` trials.
fn z_score(observed: f64, predicted: f64, n: f64) -> f64 {
    let diff = observed - predicted;
    let sigma = (predicted * (1.0 - predicted) / n).sqrt();
    if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Checks a simulation against a prediction at three standard errors.
pub fn compare(report: &SimulationReport, prediction: &dyn Prediction) -> Comparison {
    let z_efficiency = z_score(
        report.efficiency_hat,
        prediction.efficiency(),
        report.shots as f64,
    );
    let z_fidelity = report
        .fidelity_hat
        .map(|f| z_score(f, prediction.fidelity(), report.accepted as f64));
    let verdict = if z_efficiency.abs() > 3.0 {
        Verdict::Fail
    } else {
        match z_fidelity {
            None => Verdict::Inconclusive,
            Some(z) if z.abs() > 3.0 => Verdict::Fail,
            Some(_) => Verdict::Pass,
        }
    };
    Comparison {
        z_efficiency,
        z_fidelity,
        verdict,
    }
}
