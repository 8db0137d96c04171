use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::photon::PhotonGhz;
use super::{
    herald_key, HeraldRecord, PhotonInput, ProtocolOptions, QubitState, Sampler, Trajectory,
};
use crate::cavity::{format_float, uniform_grid, CavityParams};
use crate::error::{Error, Result};
use crate::gate::GateMode;
use crate::qstate::{
    state_fidelity, DensityMatrix, Outcome, QuantumRegister, QubitLabel, SingleQubitOp,
};

/// Pure dephasing of a spin over an elapsed time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingParams {
    pub t: f64,
    pub t2: f64,
    /// Only used to flag `t` that is not small against relaxation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
}

impl DephasingParams {
    pub fn new(t: f64, t2: f64, t1: Option<f64>) -> Result<Self> {
        let p = Self { t, t2, t1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("must be finite and >= 0, got {}", self.t),
            });
        }
        if !(self.t2.is_finite() && self.t2 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "T2",
                reason: format!("must be finite and > 0, got {}", self.t2),
            });
        }
        if let Some(t1) = self.t1 {
            if !(t1.is_finite() && t1 > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "T1",
                    reason: format!("must be finite and > 0, got {t1}"),
                });
            }
        }
        Ok(())
    }

    /// `exp(-t/T2)`.
    pub fn coherence(&self) -> f64 {
        (-self.t / self.t2).exp()
    }

    /// Phase-flip probability of the equivalent Kraus channel.
    pub fn flip_probability(&self) -> f64 {
        (1.0 - self.coherence()) / 2.0
    }

    pub fn warning(&self) -> Option<String> {
        let t1 = self.t1?;
        (self.t > t1 / 10.0).then(|| {
            format!(
                "t = {} exceeds T1/10 = {}; relaxation is not modelled",
                self.t,
                t1 / 10.0
            )
        })
    }
}

/// State of a spin prepared in `(|up> + |down>)/sqrt2` after dephasing for
/// `t`: `[[1/2, e/2], [e/2, 1/2]]` with `e = exp(-t/T2)`.
pub fn spin_dephase(p: &DephasingParams) -> Result<DensityMatrix> {
    p.validate()?;
    let (half, off) = (
        Complex64::new(0.5, 0.0),
        Complex64::new(p.coherence() / 2.0, 0.0),
    );
    let matrix = DMatrix::from_row_slice(2, 2, &[half, off, off, half]);
    DensityMatrix::new(vec![QubitLabel::spin("spin")], matrix)
}

/// Fidelity of the heralded photon pair when the spin dephases between the
/// two photons: `(1 + exp(-t/T2))/2`.
pub fn entanglement_fidelity(p: &DephasingParams) -> Result<f64> {
    p.validate()?;
    Ok((1.0 + p.coherence()) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceRow {
    pub t: f64,
    /// Off-diagonal element of the dephased spin, `exp(-t/T2)/2`.
    pub offdiag: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceCurve {
    pub t2: f64,
    pub rows: Vec<DecoherenceRow>,
}

pub const DECOHERENCE_CSV_HEADER: &str = "t,offdiag,fidelity";

impl DecoherenceCurve {
    /// Same number format as the spectra CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(DECOHERENCE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let cells = [r.t, r.offdiag, r.fidelity].map(format_float);
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Spin coherence and pair fidelity over a uniform grid of elapsed times.
pub fn decoherence_curve(
    t2: f64,
    t1: Option<f64>,
    t_min: f64,
    t_max: f64,
    n_points: usize,
) -> Result<DecoherenceCurve> {
    DephasingParams::new(0.0, t2, t1)?;
    if t_min < 0.0 {
        return Err(Error::InvalidRange {
            name: "t",
            reason: format!("lower bound must be non-negative, got {t_min}"),
        });
    }
    let rows = uniform_grid("t", t_min, t_max, n_points)?
        .into_iter()
        .map(|t| {
            let p = DephasingParams::new(t, t2, t1)?;
            Ok(DecoherenceRow {
                t,
                offdiag: p.coherence() / 2.0,
                fidelity: entanglement_fidelity(&p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecoherenceCurve { t2, rows })
}

/// Photon entangler with the spin dephasing for `dephasing.t` between the
/// two photon passes.
#[derive(Debug, Clone)]
pub struct DephasedPhotonPair {
    pub dephasing: DephasingParams,
    inner: PhotonGhz,
}

#[derive(Debug, Clone, Serialize)]
pub struct DephasedBranch {
    pub herald: Vec<HeraldRecord>,
    pub probability: f64,
    /// Heralded two-photon state, normalized.
    pub density: DensityMatrix,
    pub target: QuantumRegister,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DephasedPairReport {
    pub dephasing: DephasingParams,
    pub flip_probability: f64,
    pub p_success: f64,
    pub branches: Vec<DephasedBranch>,
    /// Herald-averaged fidelity against each herald's target.
    pub mean_fidelity: f64,
    /// `(1 + exp(-t/T2))/2`.
    pub predicted_fidelity: f64,
    pub warnings: Vec<String>,
}

impl DephasedPhotonPair {
    pub fn new(
        photons: [PhotonInput; 2],
        params: CavityParams,
        mode: GateMode,
        options: ProtocolOptions,
        dephasing: DephasingParams,
    ) -> Result<Self> {
        dephasing.validate()?;
        let inner = PhotonGhz::new(photons.to_vec(), params, mode, options)?;
        Ok(Self { dephasing, inner })
    }

    /// Balanced photons on resonance with the cavity.
    pub fn balanced(
        params: CavityParams,
        mode: GateMode,
        dephasing: DephasingParams,
    ) -> Result<Self> {
        let ph = PhotonInput {
            state: QubitState::balanced(),
            omega: params.cavity_resonance(),
        };
        Self::new(
            [ph, ph],
            params,
            mode,
            ProtocolOptions::default(),
            dephasing,
        )
    }

    fn flip_spin(reg: &QuantumRegister) -> Result<QuantumRegister> {
        reg.apply_single_qubit(2, &SingleQubitOp::pauli_z())
    }

    pub fn report(&self) -> Result<DephasedPairReport> {
        let q = self.dephasing.flip_probability();
        let after_first = self.inner.gate_exact(&self.inner.input()?, 0)?;
        let mut kraus = vec![after_first.scaled((1.0 - q).sqrt())];
        if q > 0.0 {
            kraus.push(Self::flip_spin(&after_first)?.scaled(q.sqrt()));
        }
        // Heralded unnormalized photon states, grouped by outcome.
        let mut per_outcome: Vec<(Outcome, Vec<HeraldRecord>, Vec<QuantumRegister>)> = Vec::new();
        for k in &kraus {
            let after_second = self.inner.gate_exact(k, 1)?;
            for (o, herald, state) in self.inner.read_exact(&after_second)? {
                match per_outcome.iter_mut().find(|(po, _, _)| *po == o) {
                    Some(entry) => entry.2.push(state),
                    None => per_outcome.push((o, herald, vec![state])),
                }
            }
        }
        let mut branches = Vec::new();
        for (o, herald, states) in per_outcome {
            let parts: Vec<_> = states.iter().map(|s| (1.0, s)).collect();
            let rho = DensityMatrix::mixture(&parts)?;
            let probability = rho.trace();
            if probability <= 0.0 {
                continue;
            }
            let target = self.inner.target(o)?;
            let fidelity = rho.fidelity_with_pure(&target)?;
            branches.push(DephasedBranch {
                herald,
                probability,
                density: rho.normalized()?,
                target,
                fidelity,
            });
        }
        let p_success: f64 = branches.iter().map(|b| b.probability).sum();
        if p_success <= 0.0 {
            return Err(Error::ZeroSuccessProbability);
        }
        let mean_fidelity = branches
            .iter()
            .map(|b| b.probability * b.fidelity)
            .sum::<f64>()
            / p_success;
        let mut warnings = self.inner.window_warnings();
        warnings.extend(self.dephasing.warning());
        Ok(DephasedPairReport {
            dephasing: self.dephasing,
            flip_probability: q,
            p_success,
            branches,
            mean_fidelity,
            predicted_fidelity: entanglement_fidelity(&self.dephasing)?,
            warnings,
        })
    }
}

impl DephasedPairReport {
    pub fn branch(&self, key: &str) -> Option<&DephasedBranch> {
        self.branches.iter().find(|b| herald_key(&b.herald) == key)
    }
}

impl Sampler for DephasedPhotonPair {
    fn trial(&self, rng: &mut dyn RngCore) -> Result<Option<Trajectory>> {
        let Some(mut reg) = self.inner.gate_sampled(&self.inner.input()?, 0, rng)? else {
            return Ok(None);
        };
        if rng.random::<f64>() < self.dephasing.flip_probability() {
            reg = Self::flip_spin(&reg)?;
        }
        let Some(reg) = self.inner.gate_sampled(&reg, 1, rng)? else {
            return Ok(None);
        };
        let Some((o, herald, state)) = self.inner.read_sampled(&reg, rng)? else {
            return Ok(None);
        };
        let target_overlap = state_fidelity(&state, &self.inner.target(o)?)?;
        Ok(Some(Trajectory {
            herald,
            state,
            target_overlap,
        }))
    }
}
