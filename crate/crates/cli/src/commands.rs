use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spingate::protocols::{
    decoherence_curve, herald_key, monte_carlo, run, DephasedPhotonPair, HeraldRecord, Protocol,
    SpinReadout, TrialTally,
};
use spingate::{
    build_gate, gate_fidelity, sweep_parameter, sweep_spectra, DensityMatrix, GateMode,
    GateOperator, PhotonGhz, PhotonToSpin, QndMeasurement, QuantumRegister, SpinGhz, SpinToPhoton,
};

use crate::config::{ProtocolBlock, ResolvedCavity, ScenarioConfig};
use crate::error::CliError;
use crate::output::{to_json, with_csv_header, Metadata};

pub const PROTOCOL_NAMES: [&str; 7] = [
    "qnd_spin_measurement",
    "entangle_spins",
    "ghz_spins",
    "entangle_photons",
    "ghz_photons",
    "photon_to_spin",
    "spin_to_photon",
];

/// Stream reserved for picking the reported herald; Monte Carlo trials use
/// streams `0..n_trials`.
const HERALD_STREAM: u64 = u64::MAX;

pub struct Rendered {
    pub content: String,
    pub out: Option<String>,
}

fn missing(block: &str) -> CliError {
    CliError::Config(format!("config: missing `{block}` block"))
}

fn check_range(block: &str, min: f64, max: f64) -> Result<(), CliError> {
    if min.partial_cmp(&max) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::Config(format!(
            "{block}.min ({min}) must be below {block}.max ({max})"
        )));
    }
    Ok(())
}

pub fn spectra(cfg: &ScenarioConfig, meta: &Metadata) -> Result<Rendered, CliError> {
    let block = cfg.spectra.as_ref().ok_or_else(|| missing("spectra"))?;
    let cavity = cfg.cavity("spectra.cavity", &block.cavity)?;
    check_range("spectra", block.min, block.max)?;
    let body = match block.parameter {
        None => {
            if block.omega.is_some() {
                return Err(CliError::Config(
                    "spectra.omega: only used together with spectra.parameter".into(),
                ));
            }
            let (lo, hi) = (block.min / cavity.scale, block.max / cavity.scale);
            sweep_spectra(&cavity.params, lo, hi, block.points)
                .map_err(|e| CliError::config("spectra", e))?
                .to_csv()
        }
        Some(parameter) => {
            let probe = match block.omega {
                Some(w) => cavity.frequency("spectra.omega", w)?,
                None => cavity.params.cavity_resonance(),
            };
            let (lo, hi) = (block.min / cavity.scale, block.max / cavity.scale);
            sweep_parameter(&cavity.params, probe, parameter, lo, hi, block.points)
                .map_err(|e| CliError::config("spectra", e))?
                .to_csv()
        }
    };
    Ok(Rendered {
        content: with_csv_header(meta, &body),
        out: block.out.clone(),
    })
}

pub fn decoherence(cfg: &ScenarioConfig, meta: &Metadata) -> Result<Rendered, CliError> {
    let block = cfg
        .decoherence
        .as_ref()
        .ok_or_else(|| missing("decoherence"))?;
    check_range("decoherence", block.min, block.max)?;
    let curve = decoherence_curve(block.t2, block.t1, block.min, block.max, block.points)
        .map_err(|e| CliError::config("decoherence", e))?;
    if let Some(t1) = block.t1 {
        if block.max > t1 / 10.0 {
            log::warn!(
                "decoherence: t up to {} exceeds T1/10 = {}; relaxation is not modelled",
                block.max,
                t1 / 10.0
            );
        }
    }
    Ok(Rendered {
        content: with_csv_header(meta, &curve.to_csv()),
        out: block.out.clone(),
    })
}

#[derive(Serialize)]
struct GateReport<'a> {
    metadata: &'a Metadata,
    gate: &'a GateOperator,
    abs_t0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_t: Option<f64>,
    /// Amplitude fidelity of the full operator against the ideal one.
    fidelity: f64,
}

pub fn gate_describe(cfg: &ScenarioConfig, meta: &Metadata) -> Result<Rendered, CliError> {
    let block = cfg.gate.as_ref().ok_or_else(|| missing("gate"))?;
    let cavity = cfg.cavity("gate.cavity", &block.cavity)?;
    let probe = match block.omega {
        Some(w) => cavity.frequency("gate.omega", w)?,
        None => cavity.params.cavity_resonance(),
    };
    let gate =
        build_gate(&cavity.params, probe, block.mode).map_err(|e| CliError::config("gate", e))?;
    let fidelity = gate_fidelity(&cavity.params, probe).map_err(|e| CliError::config("gate", e))?;
    let report = GateReport {
        metadata: meta,
        gate: &gate,
        abs_t0: gate.t0.norm(),
        abs_t: gate.t.map(|t| t.norm()),
        fidelity,
    };
    Ok(Rendered {
        content: to_json(&report)?,
        out: block.out.clone(),
    })
}

// ---------------------------------------------------------------------------
// protocol

#[derive(Serialize)]
struct Settings {
    mode: GateMode,
    readout: SpinReadout,
    correct_phase: bool,
}

#[derive(Serialize)]
struct HeraldRow {
    herald: String,
    probability: f64,
    /// Probability given that some herald fired.
    conditional_probability: f64,
    target_overlap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trial_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<QuantumRegister>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<DensityMatrix>,
}

#[derive(Serialize)]
struct TrialSummary {
    n_trials: u64,
    n_success: u64,
    success_fraction: f64,
    /// Binomial standard error around the exact success probability.
    sigma: f64,
    counts: BTreeMap<String, u64>,
    mean_target_overlap: Option<f64>,
}

impl TrialSummary {
    fn new(t: TrialTally, p_success: f64) -> Self {
        Self {
            n_trials: t.n_trials,
            n_success: t.n_success,
            success_fraction: t.success_fraction(),
            sigma: if t.n_trials > 0 {
                t.sigma(p_success)
            } else {
                0.0
            },
            counts: t.counts,
            mean_target_overlap: t.mean_target_overlap,
        }
    }
}

#[derive(Serialize)]
struct DephasingSummary {
    t: f64,
    t2: f64,
    flip_probability: f64,
    mean_fidelity: f64,
    predicted_fidelity: f64,
}

#[derive(Serialize)]
struct ProtocolReport<'a> {
    metadata: &'a Metadata,
    protocol: String,
    settings: Settings,
    p_success: f64,
    /// The herald drawn for this run.
    herald: Vec<HeraldRecord>,
    heralds: Vec<HeraldRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<TrialSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dephasing: Option<DephasingSummary>,
    #[serde(rename = "final", skip_serializing_if = "Option::is_none")]
    final_state: Option<QuantumRegister>,
    warnings: Vec<String>,
}

pub struct ProtocolArgs {
    pub seed: u64,
    pub trials: u64,
    pub dump_state: bool,
}

fn gate_for(cavity: &ResolvedCavity, block: &ProtocolBlock) -> Result<GateOperator, CliError> {
    let probe = match block.omega {
        Some(w) => cavity.frequency("protocol.omega", w)?,
        None => cavity.params.cavity_resonance(),
    };
    build_gate(&cavity.params, probe, block.mode).map_err(|e| CliError::config("protocol", e))
}

fn build_protocol(
    cfg: &ScenarioConfig,
    block: &ProtocolBlock,
) -> Result<Box<dyn Protocol>, CliError> {
    let cavity = cfg.cavity("protocol.cavity", &block.cavity)?;
    let wrap = |e| CliError::config("protocol", e);
    let opts = block.options();
    let p: Box<dyn Protocol> = match block.name.as_str() {
        "qnd_spin_measurement" => {
            let spin = block.single("spin", &block.spin)?;
            Box::new(QndMeasurement::new(spin, gate_for(&cavity, block)?).map_err(wrap)?)
        }
        "entangle_spins" | "ghz_spins" => {
            let spins = block.spin_states()?;
            if block.name == "entangle_spins" && spins.len() != 2 {
                return Err(CliError::Config(format!(
                    "protocol.spins: entangle_spins takes exactly 2 spins, got {}",
                    spins.len()
                )));
            }
            let gates = match &block.cavities {
                Some(names) => {
                    if names.len() != spins.len() {
                        return Err(CliError::Config(format!(
                            "protocol.cavities: {} cavities for {} spins",
                            names.len(),
                            spins.len()
                        )));
                    }
                    let probe = gate_for(&cavity, block)?.probe();
                    names
                        .iter()
                        .map(|n| {
                            let c = cfg.cavity("protocol.cavities", n)?;
                            build_gate(&c.params, probe, block.mode).map_err(wrap)
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
                None => vec![gate_for(&cavity, block)?; spins.len()],
            };
            Box::new(SpinGhz::new(spins, gates, opts).map_err(wrap)?)
        }
        "entangle_photons" | "ghz_photons" => {
            let photons = block.photon_inputs(&cavity)?;
            if block.name == "entangle_photons" && photons.len() != 2 {
                return Err(CliError::Config(format!(
                    "protocol.photons: entangle_photons takes exactly 2 photons, got {}",
                    photons.len()
                )));
            }
            Box::new(PhotonGhz::new(photons, cavity.params, block.mode, opts).map_err(wrap)?)
        }
        "photon_to_spin" => {
            let photon = block.single("photon", &block.photon)?;
            Box::new(PhotonToSpin::new(photon, gate_for(&cavity, block)?, opts).map_err(wrap)?)
        }
        "spin_to_photon" => {
            let spin = block.single("spin", &block.spin)?;
            Box::new(SpinToPhoton::new(spin, gate_for(&cavity, block)?, opts).map_err(wrap)?)
        }
        other => {
            return Err(CliError::Config(format!(
                "protocol.name: unknown protocol `{other}` (expected one of {})",
                PROTOCOL_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

fn settings(block: &ProtocolBlock) -> Settings {
    Settings {
        mode: block.mode,
        readout: block.readout,
        correct_phase: block.correct_phase,
    }
}

pub fn protocol(
    cfg: &ScenarioConfig,
    meta: &Metadata,
    args: &ProtocolArgs,
) -> Result<Rendered, CliError> {
    let block = cfg.protocol.as_ref().ok_or_else(|| missing("protocol"))?;
    if block.dephasing.is_some() {
        return dephased_protocol(cfg, block, meta, args);
    }
    let protocol = build_protocol(cfg, block)?;
    let numerical = |e| CliError::config("protocol", e);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(HERALD_STREAM);
    let outcome = run(protocol.as_ref(), &mut rng).map_err(numerical)?;
    let tally = if args.trials > 0 {
        Some(monte_carlo(protocol.as_ref(), args.trials, args.seed).map_err(numerical)?)
    } else {
        None
    };
    let heralds = outcome
        .branches
        .iter()
        .map(|b| {
            let key = herald_key(&b.herald);
            HeraldRow {
                trial_count: tally
                    .as_ref()
                    .map(|t| t.counts.get(&key).copied().unwrap_or(0)),
                herald: key,
                probability: b.probability,
                conditional_probability: b.probability / outcome.p_success,
                target_overlap: b.target_overlap,
                state: args.dump_state.then(|| b.state.clone()),
                density: None,
            }
        })
        .collect();
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    let report = ProtocolReport {
        metadata: meta,
        protocol: outcome.protocol.clone(),
        settings: settings(block),
        p_success: outcome.p_success,
        herald: outcome.herald.clone(),
        heralds,
        trials: tally.map(|t| TrialSummary::new(t, outcome.p_success)),
        dephasing: None,
        final_state: args.dump_state.then(|| outcome.final_state.clone()),
        warnings: outcome.warnings.clone(),
    };
    Ok(Rendered {
        content: to_json(&report)?,
        out: block.out.clone(),
    })
}

fn dephased_protocol(
    cfg: &ScenarioConfig,
    block: &ProtocolBlock,
    meta: &Metadata,
    args: &ProtocolArgs,
) -> Result<Rendered, CliError> {
    if block.name != "entangle_photons" {
        return Err(CliError::Config(format!(
            "protocol.dephasing: only supported for entangle_photons, not `{}`",
            block.name
        )));
    }
    let cavity = cfg.cavity("protocol.cavity", &block.cavity)?;
    let photons = block.photon_inputs(&cavity)?;
    let photons: [_; 2] = photons.try_into().map_err(|p: Vec<_>| {
        CliError::Config(format!(
            "protocol.photons: entangle_photons takes exactly 2 photons, got {}",
            p.len()
        ))
    })?;
    let dephasing = block.dephasing.expect("checked by caller").resolve()?;
    let numerical = |e| CliError::config("protocol", e);
    let pair = DephasedPhotonPair::new(
        photons,
        cavity.params,
        block.mode,
        block.options(),
        dephasing,
    )
    .map_err(numerical)?;
    let report = pair.report().map_err(numerical)?;
    let tally = if args.trials > 0 {
        Some(monte_carlo(&pair, args.trials, args.seed).map_err(numerical)?)
    } else {
        None
    };
    // Pick the reported herald with the same rule as the pure-state path.
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(HERALD_STREAM);
    let mut u = rng.random::<f64>() * report.p_success;
    let mut chosen = report.branches.len() - 1;
    for (i, b) in report.branches.iter().enumerate() {
        if u < b.probability {
            chosen = i;
            break;
        }
        u -= b.probability;
    }
    let heralds = report
        .branches
        .iter()
        .map(|b| {
            let key = herald_key(&b.herald);
            HeraldRow {
                trial_count: tally
                    .as_ref()
                    .map(|t| t.counts.get(&key).copied().unwrap_or(0)),
                herald: key,
                probability: b.probability,
                conditional_probability: b.probability / report.p_success,
                target_overlap: b.fidelity,
                state: None,
                density: args.dump_state.then(|| b.density.clone()),
            }
        })
        .collect();
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let out = ProtocolReport {
        metadata: meta,
        protocol: "entangle_photons".into(),
        settings: settings(block),
        p_success: report.p_success,
        herald: report.branches[chosen].herald.clone(),
        heralds,
        trials: tally.map(|t| TrialSummary::new(t, report.p_success)),
        dephasing: Some(DephasingSummary {
            t: dephasing.t,
            t2: dephasing.t2,
            flip_probability: report.flip_probability,
            mean_fidelity: report.mean_fidelity,
            predicted_fidelity: report.predicted_fidelity,
        }),
        final_state: None,
        warnings: report.warnings.clone(),
    };
    Ok(Rendered {
        content: to_json(&out)?,
        out: block.out.clone(),
    })
}
