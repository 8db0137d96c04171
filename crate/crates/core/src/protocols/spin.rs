use rand::{Rng, RngCore};

use super::{
    apply_correction, detect_sampled, pass_sampled, run, sign, two_branch_target, Branch,
    HeraldRecord, Protocol, ProtocolOptions, ProtocolOutcome, QubitState, Sampler, Trajectory,
};
use crate::error::{Error, Result};
use crate::gate::{apply_gate, GateOperator, FREQUENCY_TOL};
use crate::qstate::{state_fidelity, Basis, Outcome, QuantumRegister, QubitLabel};

const PHOTON_ID: &str = "photon";

fn spin_id(k: usize) -> String {
    format!("spin{}", k + 1)
}

/// QND readout of one spin: an H photon is transmitted through the cavity
/// and its helicity detected. R heralds spin up, L spin down.
#[derive(Debug, Clone)]
pub struct QndMeasurement {
    pub spin: QubitState,
    pub gate: GateOperator,
}

impl QndMeasurement {
    pub fn new(spin: QubitState, gate: GateOperator) -> Result<Self> {
        spin.validate()?;
        Ok(Self { spin, gate })
    }

    fn input(&self) -> Result<QuantumRegister> {
        let h = QubitState::balanced();
        QuantumRegister::product(&[
            (
                QubitLabel::photon_at(PHOTON_ID, self.gate.probe()),
                h.alpha,
                h.beta,
            ),
            (
                QubitLabel::spin(spin_id(0)),
                self.spin.alpha,
                self.spin.beta,
            ),
        ])
    }

    fn target(outcome: Outcome) -> Result<QuantumRegister> {
        let (a, b) = match outcome {
            Outcome::Zero => (1.0, 0.0),
            Outcome::One => (0.0, 1.0),
        };
        QuantumRegister::product(&[(QubitLabel::spin(spin_id(0)), a.into(), b.into())])
    }
}

impl Sampler for QndMeasurement {
    fn trial(&self, rng: &mut dyn RngCore) -> Result<Option<Trajectory>> {
        let Some(gated) = pass_sampled(&self.input()?, 0, 1, &self.gate, rng)? else {
            return Ok(None);
        };
        let (o, state) = detect_sampled(&gated, 0, Basis::Circular, rng)?;
        let state = state.normalized()?;
        let target_overlap = state_fidelity(&state, &Self::target(o)?)?;
        Ok(Some(Trajectory {
            herald: vec![HeraldRecord::new(PHOTON_ID, Basis::Circular, o)],
            state,
            target_overlap,
        }))
    }
}

impl Protocol for QndMeasurement {
    fn name(&self) -> &'static str {
        "qnd_spin_measurement"
    }

    fn branches(&self) -> Result<Vec<Branch>> {
        let (gated, _) = apply_gate(&self.input()?, 0, 1, &self.gate)?;
        let mut out = Vec::new();
        for o in Outcome::BOTH {
            let herald = vec![HeraldRecord::new(PHOTON_ID, Basis::Circular, o)];
            let state = gated.post_select(0, Basis::Circular, o)?;
            out.extend(Branch::from_unnormalized(herald, state, Self::target(o)?)?);
        }
        Ok(out)
    }
}

/// One H photon threaded through N cavities, then detected in the linear
/// basis. Heralds `prod(alpha)|up..up> +/- prod(beta)|down..down>`; N = 2 is
/// the spin entangler.
#[derive(Debug, Clone)]
pub struct SpinGhz {
    pub spins: Vec<QubitState>,
    pub gates: Vec<GateOperator>,
    pub options: ProtocolOptions,
}

impl SpinGhz {
    pub fn new(
        spins: Vec<QubitState>,
        gates: Vec<GateOperator>,
        options: ProtocolOptions,
    ) -> Result<Self> {
        if spins.len() < 2 {
            return Err(Error::InvalidProtocolInput(format!(
                "at least two spins are required, got {}",
                spins.len()
            )));
        }
        if spins.len() != gates.len() {
            return Err(Error::InvalidProtocolInput(format!(
                "{} spins but {} gates",
                spins.len(),
                gates.len()
            )));
        }
        for s in &spins {
            s.validate()?;
        }
        let probe = gates[0].probe().value();
        if let Some(g) = gates
            .iter()
            .find(|g| (g.probe().value() - probe).abs() > FREQUENCY_TOL)
        {
            return Err(Error::InvalidProtocolInput(format!(
                "a single photon crosses every cavity, but gates are built at omega = {probe} and {}",
                g.probe().value()
            )));
        }
        Ok(Self {
            spins,
            gates,
            options,
        })
    }

    fn labels(&self) -> Vec<QubitLabel> {
        (0..self.spins.len())
            .map(|k| QubitLabel::spin(spin_id(k)))
            .collect()
    }

    fn input(&self) -> Result<QuantumRegister> {
        let h = QubitState::balanced();
        let mut specs = vec![(
            QubitLabel::photon_at(PHOTON_ID, self.gates[0].probe()),
            h.alpha,
            h.beta,
        )];
        specs.extend(
            self.spins
                .iter()
                .enumerate()
                .map(|(k, s)| (QubitLabel::spin(spin_id(k)), s.alpha, s.beta)),
        );
        QuantumRegister::product(&specs)
    }

    fn target(&self, outcome: Outcome) -> Result<QuantumRegister> {
        two_branch_target(
            self.labels(),
            &self.spins,
            sign(outcome, self.options.correct_phase),
        )
    }

    fn finish(&self, outcome: Outcome, reduced: QuantumRegister) -> Result<QuantumRegister> {
        apply_correction(reduced, self.spins.len() - 1, outcome, &self.options)
    }
}

impl Sampler for SpinGhz {
    fn trial(&self, rng: &mut dyn RngCore) -> Result<Option<Trajectory>> {
        let mut reg = self.input()?;
        for (k, gate) in self.gates.iter().enumerate() {
            match pass_sampled(&reg, 0, k + 1, gate, rng)? {
                Some(next) => reg = next,
                None => return Ok(None),
            }
        }
        let (o, reduced) = detect_sampled(&reg, 0, Basis::Linear, rng)?;
        let state = self.finish(o, reduced)?.normalized()?;
        let target_overlap = state_fidelity(&state, &self.target(o)?)?;
        Ok(Some(Trajectory {
            herald: vec![HeraldRecord::new(PHOTON_ID, Basis::Linear, o)],
            state,
            target_overlap,
        }))
    }
}

impl Protocol for SpinGhz {
    fn name(&self) -> &'static str {
        if self.spins.len() == 2 {
            "entangle_spins"
        } else {
            "ghz_spins"
        }
    }

    fn branches(&self) -> Result<Vec<Branch>> {
        let mut reg = self.input()?;
        for (k, gate) in self.gates.iter().enumerate() {
            reg = apply_gate(&reg, 0, k + 1, gate)?.0;
        }
        let mut out = Vec::new();
        for o in Outcome::BOTH {
            let herald = vec![HeraldRecord::new(PHOTON_ID, Basis::Linear, o)];
            let state = self.finish(o, reg.post_select(0, Basis::Linear, o)?)?;
            out.extend(Branch::from_unnormalized(herald, state, self.target(o)?)?);
        }
        Ok(out)
    }
}

pub fn qnd_spin_measurement<R: Rng + ?Sized>(
    spin: QubitState,
    gate: &GateOperator,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    run(&QndMeasurement::new(spin, *gate)?, rng)
}

pub fn entangle_spins<R: Rng + ?Sized>(
    spin1: QubitState,
    spin2: QubitState,
    gate1: &GateOperator,
    gate2: &GateOperator,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    ghz_spins(&[spin1, spin2], &[*gate1, *gate2], rng)
}

pub fn ghz_spins<R: Rng + ?Sized>(
    spins: &[QubitState],
    gates: &[GateOperator],
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    let p = SpinGhz::new(spins.to_vec(), gates.to_vec(), ProtocolOptions::default())?;
    run(&p, rng)
}
