use rand::{Rng, RngCore};

use super::{
    apply_correction, aux_gate, frequency_window_warning, pass_sampled, read_spin_exact,
    read_spin_sampled, run, sign, two_branch_target, Branch, HeraldRecord, PhotonInput, Protocol,
    ProtocolOptions, ProtocolOutcome, QubitState, Sampler, Trajectory,
};
use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::gate::{apply_gate, build_gate, GateMode, GateOperator};
use crate::qstate::{state_fidelity, Outcome, QuantumRegister, QubitLabel, SingleQubitOp};

const SPIN_ID: &str = "spin";

pub(super) fn photon_id(k: usize) -> String {
    format!("photon{}", k + 1)
}

/// N photons sent in sequence through one cavity whose spin starts in
/// `(|up> + |down>)/sqrt2`. A spin Hadamard and spin readout then herald
/// `prod(alpha)|R..R> +/- prod(beta)|L..L>`; N = 2 is the photon entangler.
#[derive(Debug, Clone)]
pub struct PhotonGhz {
    pub photons: Vec<PhotonInput>,
    pub params: CavityParams,
    pub mode: GateMode,
    pub options: ProtocolOptions,
    gates: Vec<GateOperator>,
    aux: GateOperator,
}

impl PhotonGhz {
    pub fn new(
        photons: Vec<PhotonInput>,
        params: CavityParams,
        mode: GateMode,
        options: ProtocolOptions,
    ) -> Result<Self> {
        if photons.len() < 2 {
            return Err(Error::InvalidProtocolInput(format!(
                "at least two photons are required, got {}",
                photons.len()
            )));
        }
        for p in &photons {
            p.state.validate()?;
        }
        let gates = photons
            .iter()
            .map(|p| build_gate(&params, p.omega, mode))
            .collect::<Result<Vec<_>>>()?;
        let aux = aux_gate(&params)?;
        Ok(Self {
            photons,
            params,
            mode,
            options,
            gates,
            aux,
        })
    }

    pub fn gates(&self) -> &[GateOperator] {
        &self.gates
    }

    fn spin_index(&self) -> usize {
        self.photons.len()
    }

    pub(super) fn input(&self) -> Result<QuantumRegister> {
        let mut specs: Vec<_> = self
            .photons
            .iter()
            .enumerate()
            .map(|(k, p)| {
                (
                    QubitLabel::photon_at(photon_id(k), p.omega),
                    p.state.alpha,
                    p.state.beta,
                )
            })
            .collect();
        let plus = QubitState::balanced();
        specs.push((QubitLabel::spin(SPIN_ID), plus.alpha, plus.beta));
        QuantumRegister::product(&specs)
    }

    pub(super) fn target(&self, outcome: Outcome) -> Result<QuantumRegister> {
        let labels = self
            .photons
            .iter()
            .enumerate()
            .map(|(k, p)| QubitLabel::photon_at(photon_id(k), p.omega))
            .collect();
        let states: Vec<_> = self.photons.iter().map(|p| p.state).collect();
        two_branch_target(labels, &states, sign(outcome, self.options.correct_phase))
    }

    /// Pass photon `k` through the cavity without loss sampling.
    pub(super) fn gate_exact(&self, reg: &QuantumRegister, k: usize) -> Result<QuantumRegister> {
        Ok(apply_gate(reg, k, self.spin_index(), &self.gates[k])?.0)
    }

    pub(super) fn gate_sampled(
        &self,
        reg: &QuantumRegister,
        k: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Option<QuantumRegister>> {
        pass_sampled(reg, k, self.spin_index(), &self.gates[k], rng)
    }

    /// Spin Hadamard and exact readout of a register after all photons have
    /// passed. Returns unnormalized photon states per herald.
    pub(super) fn read_exact(
        &self,
        reg: &QuantumRegister,
    ) -> Result<Vec<(Outcome, Vec<HeraldRecord>, QuantumRegister)>> {
        let rotated = reg.apply_single_qubit(self.spin_index(), &SingleQubitOp::spin_hadamard())?;
        read_spin_exact(&rotated, self.spin_index(), self.options.readout, &self.aux)?
            .into_iter()
            .map(|(o, herald, state)| {
                Ok((
                    o,
                    herald,
                    apply_correction(state, self.photons.len() - 1, o, &self.options)?,
                ))
            })
            .collect()
    }

    pub(super) fn read_sampled(
        &self,
        reg: &QuantumRegister,
        rng: &mut dyn RngCore,
    ) -> Result<Option<(Outcome, Vec<HeraldRecord>, QuantumRegister)>> {
        let rotated = reg.apply_single_qubit(self.spin_index(), &SingleQubitOp::spin_hadamard())?;
        let Some((o, herald, state)) = read_spin_sampled(
            &rotated,
            self.spin_index(),
            self.options.readout,
            &self.aux,
            rng,
        )?
        else {
            return Ok(None);
        };
        let state = apply_correction(state, self.photons.len() - 1, o, &self.options)?;
        Ok(Some((o, herald, state.normalized()?)))
    }

    pub(super) fn window_warnings(&self) -> Vec<String> {
        self.photons
            .iter()
            .enumerate()
            .filter_map(|(k, p)| {
                frequency_window_warning(&photon_id(k), p.omega.value(), &self.params)
            })
            .collect()
    }
}

impl Sampler for PhotonGhz {
    fn trial(&self, rng: &mut dyn RngCore) -> Result<Option<Trajectory>> {
        let mut reg = self.input()?;
        for k in 0..self.photons.len() {
            match self.gate_sampled(&reg, k, rng)? {
                Some(next) => reg = next,
                None => return Ok(None),
            }
        }
        let Some((o, herald, state)) = self.read_sampled(&reg, rng)? else {
            return Ok(None);
        };
        let target_overlap = state_fidelity(&state, &self.target(o)?)?;
        Ok(Some(Trajectory {
            herald,
            state,
            target_overlap,
        }))
    }
}

impl Protocol for PhotonGhz {
    fn name(&self) -> &'static str {
        if self.photons.len() == 2 {
            "entangle_photons"
        } else {
            "ghz_photons"
        }
    }

    fn branches(&self) -> Result<Vec<Branch>> {
        let mut reg = self.input()?;
        for k in 0..self.photons.len() {
            reg = self.gate_exact(&reg, k)?;
        }
        let mut out = Vec::new();
        for (o, herald, state) in self.read_exact(&reg)? {
            out.extend(Branch::from_unnormalized(herald, state, self.target(o)?)?);
        }
        Ok(out)
    }

    fn warnings(&self) -> Vec<String> {
        self.window_warnings()
    }
}

pub fn entangle_photons<R: Rng + ?Sized>(
    ph1: PhotonInput,
    ph2: PhotonInput,
    params: &CavityParams,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    ghz_photons(&[ph1, ph2], params, rng)
}

/// Uses full gates built from `params`; construct [`PhotonGhz`] directly for
/// ideal gates or non-default options.
pub fn ghz_photons<R: Rng + ?Sized>(
    photons: &[PhotonInput],
    params: &CavityParams,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    let p = PhotonGhz::new(
        photons.to_vec(),
        *params,
        GateMode::Full,
        ProtocolOptions::default(),
    )?;
    run(&p, rng)
}
