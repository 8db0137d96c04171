//! Simulator for a spin-conditioned photon transmission gate built from a
//! singly charged quantum dot in a double-sided microcavity.
//!
//! The crate is layered bottom-up:
//!
//! - [`cavity`]: closed-form steady-state reflection/transmission
//!   coefficients of the empty and dot-coupled cavity, the amplitude-based
//!   gate fidelity, and frequency/parameter sweeps.
//! - [`qstate`]: a small dense state-vector and density-matrix engine for
//!   registers of photon-polarization and electron-spin qubits.
//! - [`gate`]: the diagonal transmission operator acting on one
//!   photon/spin pair, applied as a post-selected (non-unitary) map.
//! - [`protocols`]: heralded QND readout, spin and photon entanglers, GHZ
//!   builders, photon/spin state transfer and the spin dephasing model, each
//!   with exact branch probabilities and seeded Monte Carlo statistics.
//!
//! All rates and frequencies are expressed in one common unit; the canonical
//! choice is multiples of the cavity decay rate `kappa`.

pub mod cavity;
pub mod error;
pub mod gate;
pub mod protocols;
pub mod qstate;

pub use num_complex::Complex64;

pub use cavity::{
    coupled_cavity_coeffs, empty_cavity_coeffs, gate_fidelity, sweep_parameter, sweep_spectra,
    CavityParams, CoefficientPair, ParameterSweep, ProbeFrequency, SpectraRow, SpectraTable,
    SweepParameter,
};
pub use error::{Error, Result};
pub use gate::{apply_gate, build_gate, GateMode, GateOperator};
pub use protocols::{
    decoherence_curve, entangle_photons, entangle_spins, entanglement_fidelity, ghz_photons,
    ghz_spins, monte_carlo, photon_to_spin, qnd_spin_measurement, run, spin_dephase,
    spin_to_photon, DephasedPhotonPair, DephasingParams, PhotonGhz, PhotonInput, PhotonToSpin,
    Protocol, ProtocolOptions, ProtocolOutcome, QndMeasurement, QubitState, Sampler, SpinGhz,
    SpinReadout, SpinToPhoton,
};
pub use qstate::{
    concurrence, state_fidelity, Basis, DensityMatrix, Measurement, Outcome, QuantumRegister,
    QubitKind, QubitLabel, SingleQubitOp,
};
