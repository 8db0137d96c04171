//! Heralded protocols built from the transmission gate.
//!
//! Every protocol has two independent evaluation paths:
//!
//! - [`Protocol::branches`] propagates the unnormalized register through the
//!   gates and post-selections, so each heralded branch carries its exact
//!   probability as its squared norm;
//! - [`Sampler::trial`] runs one stochastic trajectory: photon loss is
//!   sampled after every cavity pass and heralds are drawn with
//!   [`QuantumRegister::measure_qubit`].
//!
//! [`monte_carlo`] fans trajectories out over rayon with one ChaCha stream
//! per trial index, so tallies depend only on `(protocol, n_trials, seed)`.

mod dephasing;
mod interface;
mod photon;
mod spin;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::ProbeFrequency;
use crate::error::{Error, Result};
use crate::gate::{apply_gate, build_gate, GateMode, GateOperator};
use crate::qstate::{
    check_normalized, state_fidelity, Basis, Outcome, QuantumRegister, QubitKind, QubitLabel,
    SingleQubitOp,
};

pub use dephasing::{
    decoherence_curve, entanglement_fidelity, spin_dephase, DecoherenceCurve, DecoherenceRow,
    DephasedBranch, DephasedPairReport, DephasedPhotonPair, DephasingParams,
    DECOHERENCE_CSV_HEADER,
};
pub use interface::{photon_to_spin, spin_to_photon, PhotonToSpin, SpinToPhoton};
pub use photon::{entangle_photons, ghz_photons, PhotonGhz};
pub use spin::{entangle_spins, ghz_spins, qnd_spin_measurement, QndMeasurement, SpinGhz};

/// Normalized single-qubit amplitudes `alpha|0> + beta|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        check_normalized(alpha, beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// `|0>`: R for photons, up for spins.
    pub fn zero() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    /// `(|0> + |1>)/sqrt2`: H for photons.
    pub fn balanced() -> Self {
        Self {
            alpha: Complex64::new(FRAC_1_SQRT_2, 0.0),
            beta: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    /// Read a normalized one-qubit register back into amplitudes.
    pub fn from_register(reg: &QuantumRegister) -> Result<Self> {
        if reg.num_qubits() != 1 {
            return Err(Error::WrongDimension {
                expected: 1,
                got: reg.num_qubits(),
            });
        }
        let a = reg.amplitudes();
        Self::new(a[0], a[1])
    }

    fn validate(&self) -> Result<()> {
        check_normalized(self.alpha, self.beta)
    }
}

/// A photon input: polarization amplitudes plus its own carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonInput {
    pub state: QubitState,
    pub omega: ProbeFrequency,
}

/// How a protocol reads out the electron spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinReadout {
    /// Ideal projective readout; no extra attrition.
    #[default]
    Projective,
    /// Readout with an auxiliary H-polarized probe photon through an ideal
    /// gate, detected in the circular basis. Costs one more transmission
    /// herald.
    PhysicalQnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProtocolOptions {
    pub readout: SpinReadout,
    /// Apply Z to the receiving qubit on the "minus" herald (V photon or
    /// spin down) so both heralds deliver the same state.
    pub correct_phase: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeraldRecord {
    pub measurement: String,
    pub outcome: String,
}

impl HeraldRecord {
    fn new(measurement: &str, basis: Basis, outcome: Outcome) -> Self {
        Self {
            measurement: measurement.to_string(),
            outcome: basis.outcome_name(outcome).to_string(),
        }
    }
}

/// Compact key such as `"H"` or `"up"`, used to tally heralds.
pub fn herald_key(herald: &[HeraldRecord]) -> String {
    herald
        .iter()
        .map(|h| h.outcome.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// One heralded branch of the exact calculation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub herald: Vec<HeraldRecord>,
    /// Absolute probability of this herald (includes photon loss).
    pub probability: f64,
    /// Heralded output, normalized.
    pub state: QuantumRegister,
    /// Closed-form target ket for this herald.
    pub target: QuantumRegister,
    /// `|<target|state>|^2`.
    pub target_overlap: f64,
}

impl Branch {
    fn from_unnormalized(
        herald: Vec<HeraldRecord>,
        unnormalized: QuantumRegister,
        target: QuantumRegister,
    ) -> Result<Option<Self>> {
        let probability = unnormalized.norm_sqr();
        if probability <= 0.0 {
            return Ok(None);
        }
        let state = unnormalized.normalized()?;
        let target_overlap = state_fidelity(&state, &target)?;
        Ok(Some(Self {
            herald,
            probability,
            state,
            target,
            target_overlap,
        }))
    }
}

/// Monte Carlo tally over independent trajectories.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrialTally {
    pub n_trials: u64,
    pub n_success: u64,
    /// Successful trials keyed by [`herald_key`].
    pub counts: BTreeMap<String, u64>,
    /// Mean `|<target|state>|^2` over successful trajectories.
    pub mean_target_overlap: Option<f64>,
    pub seed: u64,
}

impl TrialTally {
    pub fn success_fraction(&self) -> f64 {
        if self.n_trials == 0 {
            0.0
        } else {
            self.n_success as f64 / self.n_trials as f64
        }
    }

    /// Binomial standard error of the success fraction around `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n_trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolOutcome {
    pub protocol: String,
    /// The sampled heralded output, normalized.
    #[serde(rename = "final")]
    pub final_state: QuantumRegister,
    pub herald: Vec<HeraldRecord>,
    /// Exact probability that any success herald fires.
    pub p_success: f64,
    pub branches: Vec<Branch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<TrialTally>,
    pub warnings: Vec<String>,
}

impl ProtocolOutcome {
    pub fn branch(&self, key: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| herald_key(&b.herald) == key)
    }
}

/// One successful stochastic trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub herald: Vec<HeraldRecord>,
    /// Output state, normalized.
    pub state: QuantumRegister,
    pub target_overlap: f64,
}

pub trait Sampler: Sync {
    /// Run one trajectory; `Ok(None)` means a photon was lost.
    fn trial(&self, rng: &mut dyn RngCore) -> Result<Option<Trajectory>>;
}

pub trait Protocol: Sampler {
    fn name(&self) -> &'static str;

    /// Exact heralded branches. Branches of zero probability are omitted.
    fn branches(&self) -> Result<Vec<Branch>>;

    fn warnings(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Evaluate a protocol exactly and sample which herald fires, conditioned on
/// success.
pub fn run<P: Protocol + ?Sized, R: Rng + ?Sized>(
    protocol: &P,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    let branches = protocol.branches()?;
    let p_success: f64 = branches.iter().map(|b| b.probability).sum();
    if branches.is_empty() || p_success <= 0.0 {
        return Err(Error::ZeroSuccessProbability);
    }
    let mut u = rng.random::<f64>() * p_success;
    let mut chosen = branches.len() - 1;
    for (i, b) in branches.iter().enumerate() {
        if u < b.probability {
            chosen = i;
            break;
        }
        u -= b.probability;
    }
    let pick = &branches[chosen];
    Ok(ProtocolOutcome {
        protocol: protocol.name().to_string(),
        final_state: pick.state.clone(),
        herald: pick.herald.clone(),
        p_success,
        branches: branches.clone(),
        trials: None,
        warnings: protocol.warnings(),
    })
}

/// [`run`] followed by a [`monte_carlo`] tally attached to the outcome.
pub fn run_with_trials<P: Protocol + ?Sized, R: Rng + ?Sized>(
    protocol: &P,
    rng: &mut R,
    n_trials: u64,
    seed: u64,
) -> Result<ProtocolOutcome> {
    let mut outcome = run(protocol, rng)?;
    outcome.trials = Some(monte_carlo(protocol, n_trials, seed)?);
    Ok(outcome)
}

/// Independent RNG for trial `index` of a batch seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Run `n_trials` trajectories in parallel. The tally is identical for any
/// thread count: counts are integer sums and the overlap mean is folded in
/// trial order.
pub fn monte_carlo<S: Sampler + ?Sized>(
    sampler: &S,
    n_trials: u64,
    seed: u64,
) -> Result<TrialTally> {
    let results: Vec<Option<(String, f64)>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            Ok(sampler
                .trial(&mut rng)?
                .map(|t| (herald_key(&t.herald), t.target_overlap)))
        })
        .collect::<Result<_>>()?;
    let mut tally = TrialTally {
        n_trials,
        seed,
        ..TrialTally::default()
    };
    let mut overlap_sum = 0.0;
    for (key, overlap) in results.into_iter().flatten() {
        tally.n_success += 1;
        *tally.counts.entry(key).or_insert(0) += 1;
        overlap_sum += overlap;
    }
    if tally.n_success > 0 {
        tally.mean_target_overlap = Some(overlap_sum / tally.n_success as f64);
    }
    Ok(tally)
}

// ---------------------------------------------------------------------------
// Shared building blocks.

fn z() -> SingleQubitOp {
    SingleQubitOp::pauli_z()
}

fn sign(outcome: Outcome, correct_phase: bool) -> f64 {
    match (outcome, correct_phase) {
        (Outcome::One, false) => -1.0,
        _ => 1.0,
    }
}

/// Closed-form `prod(alpha)|00..0> +/- prod(beta)|11..1>`, normalized.
/// Falls back to the unnormalized ket when both products vanish.
fn two_branch_target(
    labels: Vec<QubitLabel>,
    states: &[QubitState],
    sign: f64,
) -> Result<QuantumRegister> {
    let dim = 1usize << labels.len();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = states.iter().map(|s| s.alpha).product();
    amps[dim - 1] += sign * states.iter().map(|s| s.beta).product::<Complex64>();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm > 0.0 {
        let scale = 1.0 / norm.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
    }
    QuantumRegister::from_amplitudes(labels, amps)
}

/// Gate a photon and, in a trajectory, sample whether it was transmitted.
fn pass_sampled(
    reg: &QuantumRegister,
    photon: usize,
    spin: usize,
    gate: &GateOperator,
    rng: &mut dyn RngCore,
) -> Result<Option<QuantumRegister>> {
    let (out, p_transmit) = apply_gate(reg, photon, spin, gate)?;
    if rng.random::<f64>() < p_transmit {
        Ok(Some(out.normalized()?))
    } else {
        Ok(None)
    }
}

/// Sample a measurement of qubit `idx` and remove it from the register.
fn detect_sampled(
    reg: &QuantumRegister,
    idx: usize,
    basis: Basis,
    rng: &mut dyn RngCore,
) -> Result<(Outcome, QuantumRegister)> {
    let m = reg.measure_qubit(idx, basis, rng)?;
    let reduced = m.collapsed.post_select(idx, basis, m.outcome)?;
    Ok((m.outcome, reduced))
}

const PROBE_ID: &str = "qnd_probe";

fn aux_gate(gate_params: &crate::cavity::CavityParams) -> Result<GateOperator> {
    build_gate(gate_params, gate_params.cavity_resonance(), GateMode::Ideal)
}

fn append_probe(reg: &QuantumRegister, gate: &GateOperator) -> Result<QuantumRegister> {
    let h = QubitState::balanced();
    reg.append_qubit(
        QubitLabel::photon_at(PROBE_ID, gate.probe()),
        h.alpha,
        h.beta,
    )
}

/// Exact spin readout. Returns one entry per outcome: the herald records and
/// the unnormalized register with the spin (and any probe) removed.
fn read_spin_exact(
    reg: &QuantumRegister,
    spin: usize,
    readout: SpinReadout,
    aux: &GateOperator,
) -> Result<Vec<(Outcome, Vec<HeraldRecord>, QuantumRegister)>> {
    debug_assert_eq!(reg.label(spin)?.kind, QubitKind::Spin);
    match readout {
        SpinReadout::Projective => Outcome::BOTH
            .into_iter()
            .map(|o| {
                let out = reg.post_select(spin, Basis::SpinZ, o)?;
                Ok((o, vec![HeraldRecord::new("spin", Basis::SpinZ, o)], out))
            })
            .collect(),
        SpinReadout::PhysicalQnd => {
            let with_probe = append_probe(reg, aux)?;
            let probe = with_probe.num_qubits() - 1;
            let (gated, _) = apply_gate(&with_probe, probe, spin, aux)?;
            Outcome::BOTH
                .into_iter()
                .map(|o| {
                    // The ideal gate ties R to spin up and L to spin down.
                    let detected = gated.post_select(probe, Basis::Circular, o)?;
                    let out = detected.post_select(spin, Basis::SpinZ, o)?;
                    Ok((
                        o,
                        vec![HeraldRecord::new(PROBE_ID, Basis::Circular, o)],
                        out,
                    ))
                })
                .collect()
        }
    }
}

/// Sampled spin readout; `Ok(None)` if the QND probe photon is lost.
fn read_spin_sampled(
    reg: &QuantumRegister,
    spin: usize,
    readout: SpinReadout,
    aux: &GateOperator,
    rng: &mut dyn RngCore,
) -> Result<Option<(Outcome, Vec<HeraldRecord>, QuantumRegister)>> {
    match readout {
        SpinReadout::Projective => {
            let (o, out) = detect_sampled(reg, spin, Basis::SpinZ, rng)?;
            Ok(Some((
                o,
                vec![HeraldRecord::new("spin", Basis::SpinZ, o)],
                out,
            )))
        }
        SpinReadout::PhysicalQnd => {
            let with_probe = append_probe(reg, aux)?;
            let probe = with_probe.num_qubits() - 1;
            let Some(gated) = pass_sampled(&with_probe, probe, spin, aux, rng)? else {
                return Ok(None);
            };
            let (o, after_probe) = detect_sampled(&gated, probe, Basis::Circular, rng)?;
            let out = after_probe
                .post_select(spin, Basis::SpinZ, o)?
                .normalized()?;
            Ok(Some((
                o,
                vec![HeraldRecord::new(PROBE_ID, Basis::Circular, o)],
                out,
            )))
        }
    }
}

fn apply_correction(
    reg: QuantumRegister,
    receiver: usize,
    outcome: Outcome,
    options: &ProtocolOptions,
) -> Result<QuantumRegister> {
    if options.correct_phase && outcome == Outcome::One {
        reg.apply_single_qubit(receiver, &z())
    } else {
        Ok(reg)
    }
}

fn frequency_window_warning(
    photon: &str,
    omega: f64,
    params: &crate::cavity::CavityParams,
) -> Option<String> {
    ((omega - params.omega_c).abs() >= params.kappa).then(|| {
        format!(
            "photon `{photon}` at omega = {omega} lies outside |omega - omega_c| < kappa; gate fidelity degrades"
        )
    })
}
