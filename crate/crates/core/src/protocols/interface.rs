use rand::{Rng, RngCore};

use super::{
    apply_correction, aux_gate, detect_sampled, pass_sampled, read_spin_exact, read_spin_sampled,
    run, sign, two_branch_target, Branch, HeraldRecord, Protocol, ProtocolOptions, ProtocolOutcome,
    QubitState, Sampler, Trajectory,
};
use crate::error::Result;
use crate::gate::{apply_gate, GateOperator};
use crate::qstate::{state_fidelity, Basis, Outcome, QuantumRegister, QubitLabel, SingleQubitOp};

const PHOTON_ID: &str = "photon";
const SPIN_ID: &str = "spin";

/// Transfer a photon polarization onto a spin prepared in
/// `(|up> + |down>)/sqrt2`. The photon is detected in the linear basis;
/// H heralds `alpha|up> + beta|down>`, V the same with a minus sign.
#[derive(Debug, Clone)]
pub struct PhotonToSpin {
    pub photon: QubitState,
    pub gate: GateOperator,
    pub options: ProtocolOptions,
}

impl PhotonToSpin {
    pub fn new(photon: QubitState, gate: GateOperator, options: ProtocolOptions) -> Result<Self> {
        photon.validate()?;
        Ok(Self {
            photon,
            gate,
            options,
        })
    }

    fn input(&self) -> Result<QuantumRegister> {
        let plus = QubitState::balanced();
        QuantumRegister::product(&[
            (
                QubitLabel::photon_at(PHOTON_ID, self.gate.probe()),
                self.photon.alpha,
                self.photon.beta,
            ),
            (QubitLabel::spin(SPIN_ID), plus.alpha, plus.beta),
        ])
    }

    fn target(&self, outcome: Outcome) -> Result<QuantumRegister> {
        two_branch_target(
            vec![QubitLabel::spin(SPIN_ID)],
            &[self.photon],
            sign(outcome, self.options.correct_phase),
        )
    }
}

impl Sampler for PhotonToSpin {
    fn trial(&self, rng: &mut dyn RngCore) -> Result<Option<Trajectory>> {
        let Some(gated) = pass_sampled(&self.input()?, 0, 1, &self.gate, rng)? else {
            return Ok(None);
        };
        let (o, reduced) = detect_sampled(&gated, 0, Basis::Linear, rng)?;
        let state = apply_correction(reduced, 0, o, &self.options)?.normalized()?;
        let target_overlap = state_fidelity(&state, &self.target(o)?)?;
        Ok(Some(Trajectory {
            herald: vec![HeraldRecord::new(PHOTON_ID, Basis::Linear, o)],
            state,
            target_overlap,
        }))
    }
}

impl Protocol for PhotonToSpin {
    fn name(&self) -> &'static str {
        "photon_to_spin"
    }

    fn branches(&self) -> Result<Vec<Branch>> {
        let (gated, _) = apply_gate(&self.input()?, 0, 1, &self.gate)?;
        let mut out = Vec::new();
        for o in Outcome::BOTH {
            let herald = vec![HeraldRecord::new(PHOTON_ID, Basis::Linear, o)];
            let state =
                apply_correction(gated.post_select(0, Basis::Linear, o)?, 0, o, &self.options)?;
            out.extend(Branch::from_unnormalized(herald, state, self.target(o)?)?);
        }
        Ok(out)
    }
}

/// Transfer a spin state onto an H photon: gate, spin Hadamard, spin
/// readout. Spin up heralds `alpha|R> + beta|L>`, down the same with a minus
/// sign.
#[derive(Debug, Clone)]
pub struct SpinToPhoton {
    pub spin: QubitState,
    pub gate: GateOperator,
    pub options: ProtocolOptions,
    aux: GateOperator,
}

impl SpinToPhoton {
    pub fn new(spin: QubitState, gate: GateOperator, options: ProtocolOptions) -> Result<Self> {
        spin.validate()?;
        let aux = aux_gate(gate.params())?;
        Ok(Self {
            spin,
            gate,
            options,
            aux,
        })
    }

    fn photon_label(&self) -> QubitLabel {
        QubitLabel::photon_at(PHOTON_ID, self.gate.probe())
    }

    fn input(&self) -> Result<QuantumRegister> {
        let h = QubitState::balanced();
        QuantumRegister::product(&[
            (self.photon_label(), h.alpha, h.beta),
            (QubitLabel::spin(SPIN_ID), self.spin.alpha, self.spin.beta),
        ])
    }

    fn target(&self, outcome: Outcome) -> Result<QuantumRegister> {
        two_branch_target(
            vec![self.photon_label()],
            &[self.spin],
            sign(outcome, self.options.correct_phase),
        )
    }

    fn rotated(&self, reg: &QuantumRegister) -> Result<QuantumRegister> {
        reg.apply_single_qubit(1, &SingleQubitOp::spin_hadamard())
    }
}

impl Sampler for SpinToPhoton {
    fn trial(&self, rng: &mut dyn RngCore) -> Result<Option<Trajectory>> {
        let Some(gated) = pass_sampled(&self.input()?, 0, 1, &self.gate, rng)? else {
            return Ok(None);
        };
        let rotated = self.rotated(&gated)?;
        let Some((o, herald, reduced)) =
            read_spin_sampled(&rotated, 1, self.options.readout, &self.aux, rng)?
        else {
            return Ok(None);
        };
        let state = apply_correction(reduced, 0, o, &self.options)?.normalized()?;
        let target_overlap = state_fidelity(&state, &self.target(o)?)?;
        Ok(Some(Trajectory {
            herald,
            state,
            target_overlap,
        }))
    }
}

impl Protocol for SpinToPhoton {
    fn name(&self) -> &'static str {
        "spin_to_photon"
    }

    fn branches(&self) -> Result<Vec<Branch>> {
        let (gated, _) = apply_gate(&self.input()?, 0, 1, &self.gate)?;
        let rotated = self.rotated(&gated)?;
        let mut out = Vec::new();
        for (o, herald, reduced) in read_spin_exact(&rotated, 1, self.options.readout, &self.aux)? {
            let state = apply_correction(reduced, 0, o, &self.options)?;
            out.extend(Branch::from_unnormalized(herald, state, self.target(o)?)?);
        }
        Ok(out)
    }
}

pub fn photon_to_spin<R: Rng + ?Sized>(
    photon: QubitState,
    gate: &GateOperator,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    run(
        &PhotonToSpin::new(photon, *gate, ProtocolOptions::default())?,
        rng,
    )
}

pub fn spin_to_photon<R: Rng + ?Sized>(
    spin: QubitState,
    gate: &GateOperator,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    run(
        &SpinToPhoton::new(spin, *gate, ProtocolOptions::default())?,
        rng,
    )
}
