//! JSON scenario configuration.
//!
//! ```json
//! {
//!   "seed": 42,
//!   "trials": 100000,
//!   "cavities": {
//!     "main": { "units": "kappa", "g": 2.4, "gamma": 0.1 },
//!     "device": { "units": "ueV", "g": 120, "kappa": 50, "kappa_s": 5, "gamma": 0.3 }
//!   },
//!   "spectra": { "cavity": "main", "min": -5, "max": 5, "points": 1001 },
//!   "protocol": { "name": "entangle_photons", "cavity": "main", "mode": "ideal" },
//!   "decoherence": { "t2": 1.0, "min": 0, "max": 5, "points": 101 },
//!   "gate": { "cavity": "main", "omega": 0.0, "mode": "full" }
//! }
//! ```
//!
//! Cavities in `ueV` are rescaled to units of their own `kappa`, and every
//! frequency in a block that references such a cavity is read in `ueV` too.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Deserialize;
use spingate::protocols::{DephasingParams, PhotonInput, ProtocolOptions, QubitState, SpinReadout};
use spingate::{CavityParams, GateMode, ProbeFrequency, SweepParameter};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<u64>,
    pub cavities: BTreeMap<String, CavityBlock>,
    #[serde(default)]
    pub spectra: Option<SpectraBlock>,
    #[serde(default)]
    pub protocol: Option<ProtocolBlock>,
    #[serde(default)]
    pub decoherence: Option<DecoherenceBlock>,
    #[serde(default)]
    pub gate: Option<GateBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum Units {
    #[default]
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "ueV")]
    MicroEv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityBlock {
    #[serde(default)]
    pub units: Units,
    pub g: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub kappa_s: f64,
    pub gamma: f64,
    #[serde(default)]
    pub omega_c: f64,
    #[serde(default)]
    pub omega_x: f64,
}

/// A cavity in simulator units plus the factor that converts block
/// frequencies into those units.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedCavity {
    pub params: CavityParams,
    pub scale: f64,
}

impl ResolvedCavity {
    pub fn frequency(&self, field: &str, omega: f64) -> Result<ProbeFrequency, CliError> {
        ProbeFrequency::new(omega / self.scale).map_err(|e| CliError::config(field, e))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraBlock {
    pub cavity: String,
    /// Sweep `g` or `kappa_s` at a fixed `omega` instead of the frequency.
    #[serde(default)]
    pub parameter: Option<SweepParameter>,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceBlock {
    pub t2: f64,
    #[serde(default)]
    pub t1: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateBlock {
    pub cavity: String,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default = "default_mode")]
    pub mode: GateMode,
    #[serde(default)]
    pub out: Option<String>,
}

fn default_mode() -> GateMode {
    GateMode::Full
}

/// Either a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(x) => Complex64::new(x, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// A named basis state (`"R"`, `"L"`, `"H"`, `"V"`, `"up"`, `"down"`,
/// `"plus"`, `"minus"`) or explicit amplitudes.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Amplitudes { alpha: Amplitude, beta: Amplitude },
}

impl StateSpec {
    pub fn resolve(&self, field: &str) -> Result<QubitState, CliError> {
        let s = FRAC_1_SQRT_2;
        let (a, b) = match self {
            StateSpec::Named(name) => match name.as_str() {
                "R" | "up" => (1.0.into(), 0.0.into()),
                "L" | "down" => (0.0.into(), 1.0.into()),
                "H" | "plus" => (s.into(), s.into()),
                "V" | "minus" => (s.into(), (-s).into()),
                other => {
                    return Err(CliError::Config(format!(
                        "{field}: unknown state name `{other}` (expected R, L, H, V, up, down, plus or minus)"
                    )))
                }
            },
            StateSpec::Amplitudes { alpha, beta } => (alpha.value(), beta.value()),
        };
        QubitState::new(a, b).map_err(|e| CliError::config(field, e))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonSpec {
    pub state: StateSpec,
    #[serde(default)]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolBlock {
    pub name: String,
    /// Cavity used by every gate unless `cavities` is given.
    pub cavity: String,
    /// One cavity per spin for `entangle_spins` / `ghz_spins`.
    #[serde(default)]
    pub cavities: Option<Vec<String>>,
    #[serde(default = "default_mode")]
    pub mode: GateMode,
    #[serde(default)]
    pub readout: SpinReadout,
    #[serde(default)]
    pub correct_phase: bool,
    /// Probe frequency for protocols with a single photon frequency.
    #[serde(default)]
    pub omega: Option<f64>,
    /// Number of balanced inputs when `spins` / `photons` are omitted.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub spin: Option<StateSpec>,
    #[serde(default)]
    pub spins: Option<Vec<StateSpec>>,
    #[serde(default)]
    pub photon: Option<StateSpec>,
    #[serde(default)]
    pub photons: Option<Vec<PhotonSpec>>,
    /// Spin dephasing between the two photons of `entangle_photons`.
    #[serde(default)]
    pub dephasing: Option<DephasingBlock>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingBlock {
    pub t: f64,
    pub t2: f64,
    #[serde(default)]
    pub t1: Option<f64>,
}

impl DephasingBlock {
    pub fn resolve(&self) -> Result<DephasingParams, CliError> {
        DephasingParams::new(self.t, self.t2, self.t1)
            .map_err(|e| CliError::config("protocol.dephasing", e))
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn cavity(&self, field: &str, name: &str) -> Result<ResolvedCavity, CliError> {
        let block = self
            .cavities
            .get(name)
            .ok_or_else(|| CliError::Config(format!("{field}: unknown cavity `{name}`")))?;
        let field = format!("cavities.{name}");
        match block.units {
            Units::Kappa => {
                let params = CavityParams::new(
                    block.g,
                    block.kappa.unwrap_or(1.0),
                    block.kappa_s,
                    block.gamma,
                    block.omega_c,
                    block.omega_x,
                )
                .map_err(|e| CliError::config(&field, e))?;
                Ok(ResolvedCavity { params, scale: 1.0 })
            }
            Units::MicroEv => {
                let kappa = block.kappa.ok_or_else(|| {
                    CliError::Config(format!("{field}.kappa: required when units = \"ueV\""))
                })?;
                let params = CavityParams::from_micro_ev(
                    block.g,
                    kappa,
                    block.kappa_s,
                    block.gamma,
                    block.omega_c,
                    block.omega_x,
                )
                .map_err(|e| CliError::config(&field, e))?;
                Ok(ResolvedCavity {
                    params,
                    scale: kappa,
                })
            }
        }
    }

    /// Check every cavity and every block reference up front.
    pub fn validate(&self) -> Result<(), CliError> {
        for name in self.cavities.keys() {
            self.cavity("cavities", name)?;
        }
        if let Some(s) = &self.spectra {
            self.cavity("spectra.cavity", &s.cavity)?;
        }
        if let Some(g) = &self.gate {
            self.cavity("gate.cavity", &g.cavity)?;
        }
        if let Some(p) = &self.protocol {
            self.cavity("protocol.cavity", &p.cavity)?;
            for name in p.cavities.iter().flatten() {
                self.cavity("protocol.cavities", name)?;
            }
        }
        Ok(())
    }
}

impl ProtocolBlock {
    pub fn options(&self) -> ProtocolOptions {
        ProtocolOptions {
            readout: self.readout,
            correct_phase: self.correct_phase,
        }
    }

    fn count(&self, given: Option<usize>, default: usize) -> Result<usize, CliError> {
        match (given, self.n) {
            (Some(len), Some(n)) if len != n => Err(CliError::Config(format!(
                "protocol.n: {n} does not match the {len} listed inputs"
            ))),
            (Some(len), _) => Ok(len),
            (None, Some(n)) => Ok(n),
            (None, None) => Ok(default),
        }
    }

    pub fn spin_states(&self) -> Result<Vec<QubitState>, CliError> {
        let n = self.count(self.spins.as_ref().map(Vec::len), 2)?;
        match &self.spins {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, s)| s.resolve(&format!("protocol.spins[{i}]")))
                .collect(),
            None => Ok(vec![QubitState::balanced(); n]),
        }
    }

    pub fn photon_inputs(&self, cavity: &ResolvedCavity) -> Result<Vec<PhotonInput>, CliError> {
        let default_omega = match self.omega {
            Some(w) => cavity.frequency("protocol.omega", w)?,
            None => cavity.params.cavity_resonance(),
        };
        let n = self.count(self.photons.as_ref().map(Vec::len), 2)?;
        match &self.photons {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let field = format!("protocol.photons[{i}]");
                    Ok(PhotonInput {
                        state: p.state.resolve(&field)?,
                        omega: match p.omega {
                            Some(w) => cavity.frequency(&format!("{field}.omega"), w)?,
                            None => default_omega,
                        },
                    })
                })
                .collect(),
            None => Ok(vec![
                PhotonInput {
                    state: QubitState::balanced(),
                    omega: default_omega,
                };
                n
            ]),
        }
    }

    pub fn single(&self, field: &str, spec: &Option<StateSpec>) -> Result<QubitState, CliError> {
        match spec {
            Some(s) => s.resolve(&format!("protocol.{field}")),
            None => Ok(QubitState::balanced()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{ "cavities": { "c": { "g": 2.4, "gamma": 0.1 } } }"#;

    #[test]
    fn minimal_config_defaults_to_kappa_units() {
        let cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        let c = cfg.cavity("x", "c").unwrap();
        assert_eq!(c.params.kappa, 1.0);
        assert_eq!(c.scale, 1.0);
        assert!(cfg.seed.is_none());
    }

    #[test]
    fn micro_ev_cavities_are_rescaled() {
        let cfg = ScenarioConfig::parse(
            r#"{ "cavities": { "d": { "units": "ueV", "g": 120, "kappa": 50, "kappa_s": 5, "gamma": 5, "omega_c": 10 } } }"#,
        )
        .unwrap();
        let c = cfg.cavity("x", "d").unwrap();
        assert_eq!(c.params.g, 2.4);
        assert_eq!(c.params.kappa_s, 0.1);
        assert_eq!(c.params.omega_c, 0.2);
        assert_eq!(c.frequency("w", 25.0).unwrap().0, 0.5);
    }

    #[test]
    fn micro_ev_requires_kappa() {
        let cfg = ScenarioConfig::parse(
            r#"{ "cavities": { "d": { "units": "ueV", "g": 1, "gamma": 1 } } }"#,
        )
        .unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("cavities.d.kappa"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = ScenarioConfig::parse(r#"{ "cavities": {}, "bogus": 1 }"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn unknown_cavity_reference_names_the_field() {
        let cfg =
            ScenarioConfig::parse(r#"{ "cavities": {}, "gate": { "cavity": "nope" } }"#).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("gate.cavity"));
    }

    #[test]
    fn state_specs() {
        let named: StateSpec = serde_json::from_str(r#""V""#).unwrap();
        let v = named.resolve("s").unwrap();
        assert!((v.beta.re + FRAC_1_SQRT_2).abs() < 1e-15);
        let amps: StateSpec =
            serde_json::from_str(r#"{ "alpha": 0.6, "beta": [0, 0.8] }"#).unwrap();
        let q = amps.resolve("s").unwrap();
        assert_eq!(q.beta, Complex64::new(0.0, 0.8));
        let bad: StateSpec = serde_json::from_str(r#"{ "alpha": 1, "beta": 1 }"#).unwrap();
        assert!(bad.resolve("s").unwrap_err().to_string().starts_with("s:"));
        let unknown: StateSpec = serde_json::from_str(r#""Q""#).unwrap();
        assert!(unknown.resolve("s").is_err());
    }

    #[test]
    fn input_counts_must_agree() {
        let cfg = ScenarioConfig::parse(
            r#"{ "cavities": { "c": { "g": 2.4, "gamma": 0.1 } },
                 "protocol": { "name": "ghz_spins", "cavity": "c", "n": 3, "spins": ["H", "H"] } }"#,
        )
        .unwrap();
        let err = cfg.protocol.unwrap().spin_states().unwrap_err();
        assert!(err.to_string().contains("protocol.n"));
    }
}
