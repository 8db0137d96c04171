//! The spin-conditioned transmission operator on one photon/spin pair.
//!
//! With the spin up, an R photon sees the empty cavity and an L photon the
//! coupled one; with the spin down the roles swap. Only the transmitted
//! branch is kept, so the operator is diagonal and generally non-unitary:
//! whatever is reflected or leaked counts as a lost photon.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{coupled_cavity_coeffs, empty_cavity_coeffs, CavityParams, ProbeFrequency};
use crate::error::{Error, Result};
use crate::qstate::{QuantumRegister, QubitKind};

/// Photon label frequencies must match the gate's probe to this tolerance.
pub const FREQUENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Empty-cavity entries `t0` plus the residual coupled-cavity `t`.
    Full,
    /// Strong-coupling limit: coupled-cavity entries set to zero.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Provenance {
    pub params: CavityParams,
    pub omega: ProbeFrequency,
}

/// Diagonal operator over `(R up, R down, L up, L down)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateOperator {
    pub mode: GateMode,
    pub diag: [Complex64; 4],
    pub t0: Complex64,
    /// Coupled-cavity amplitude; `None` in ideal mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Complex64>,
    pub provenance: Provenance,
}

impl GateOperator {
    pub fn params(&self) -> &CavityParams {
        &self.provenance.params
    }

    pub fn probe(&self) -> ProbeFrequency {
        self.provenance.omega
    }
}

pub fn build_gate(
    params: &CavityParams,
    probe: ProbeFrequency,
    mode: GateMode,
) -> Result<GateOperator> {
    let t0 = empty_cavity_coeffs(params, probe)?.t;
    let (t, coupled) = match mode {
        GateMode::Full => {
            let t = coupled_cavity_coeffs(params, probe)?.t;
            (Some(t), t)
        }
        GateMode::Ideal => (None, Complex64::new(0.0, 0.0)),
    };
    Ok(GateOperator {
        mode,
        diag: [t0, coupled, coupled, t0],
        t0,
        t,
        provenance: Provenance {
            params: *params,
            omega: probe,
        },
    })
}

/// Send the photon at `photon` through the cavity holding the spin at
/// `spin`. Returns the (unnormalized) transmitted branch and the
/// transmission probability `|psi_out|^2 / |psi_in|^2`.
pub fn apply_gate(
    reg: &QuantumRegister,
    photon: usize,
    spin: usize,
    op: &GateOperator,
) -> Result<(QuantumRegister, f64)> {
    let photon_label = reg.label(photon)?;
    let spin_label = reg.label(spin)?;
    if photon_label.kind != QubitKind::Photon {
        return Err(Error::KindMismatch {
            id: photon_label.id.clone(),
            expected: "photon",
            found: photon_label.kind.name(),
        });
    }
    if spin_label.kind != QubitKind::Spin {
        return Err(Error::KindMismatch {
            id: spin_label.id.clone(),
            expected: "spin",
            found: spin_label.kind.name(),
        });
    }
    if let Some(freq) = photon_label.frequency {
        if (freq.0 - op.probe().0).abs() > FREQUENCY_TOL {
            return Err(Error::FrequencyMismatch {
                id: photon_label.id.clone(),
                photon: freq.0,
                gate: op.probe().0,
            });
        }
    }
    let before = reg.norm_sqr();
    if before <= 0.0 {
        return Err(Error::ZeroNormRegister);
    }
    let out = reg.apply_pair_diagonal(photon, spin, &op.diag)?;
    let p_transmit = out.norm_sqr() / before;
    Ok((out, p_transmit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::QubitLabel;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn fig2() -> CavityParams {
        CavityParams::resonant(2.4, 0.0, 0.1).unwrap()
    }

    fn h_spin(alpha: f64, beta: f64) -> QuantumRegister {
        QuantumRegister::product(&[
            (QubitLabel::photon("p"), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)),
            (QubitLabel::spin("s"), c(alpha), c(beta)),
        ])
        .unwrap()
    }

    #[test]
    fn full_gate_at_operating_point() {
        let gate = build_gate(&fig2(), ProbeFrequency(0.0), GateMode::Full).unwrap();
        let t = -0.05 / 5.81;
        let expected = [-1.0, t, t, -1.0];
        for (d, e) in gate.diag.iter().zip(expected) {
            assert_abs_diff_eq!(d.re, e, epsilon = 1e-15);
            assert_eq!(d.im, 0.0);
        }
        assert!(gate.t.is_some());
    }

    #[test]
    fn ideal_gate_zeroes_cross_terms() {
        let gate = build_gate(&fig2(), ProbeFrequency(0.0), GateMode::Ideal).unwrap();
        assert_eq!(gate.diag, [c(-1.0), ZERO, ZERO, c(-1.0)]);
        assert_eq!(gate.t, None);
    }

    #[test]
    fn decoupled_gate_is_spin_independent() {
        let p = CavityParams::resonant(0.0, 0.4, 0.1).unwrap();
        let gate = build_gate(&p, ProbeFrequency(0.3), GateMode::Full).unwrap();
        assert!(gate.diag.iter().all(|&d| d == gate.t0));
    }

    #[test]
    fn h_photon_with_spin_up_keeps_only_r() {
        let gate = build_gate(&fig2(), ProbeFrequency(0.0), GateMode::Ideal).unwrap();
        let (out, p) = apply_gate(&h_spin(1.0, 0.0), 0, 1, &gate).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[0].re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(out.amplitudes()[1..].iter().all(|a| *a == ZERO));
    }

    #[test]
    fn h_photon_entangles_with_superposed_spin() {
        let gate = build_gate(&fig2(), ProbeFrequency(0.0), GateMode::Ideal).unwrap();
        for (a, b) in [(0.6, 0.8), (FRAC_1_SQRT_2, FRAC_1_SQRT_2), (0.0, 1.0)] {
            let (out, p) = apply_gate(&h_spin(a, b), 0, 1, &gate).unwrap();
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
            let amps = out.amplitudes();
            assert_abs_diff_eq!(amps[0].re, -FRAC_1_SQRT_2 * a, epsilon = 1e-15);
            assert_abs_diff_eq!(amps[3].re, -FRAC_1_SQRT_2 * b, epsilon = 1e-15);
            assert_eq!(amps[1], ZERO);
            assert_eq!(amps[2], ZERO);
        }
    }

    #[test]
    fn r_photon_spin_up_through_full_gate() {
        let gate = build_gate(&fig2(), ProbeFrequency(0.0), GateMode::Full).unwrap();
        let reg = QuantumRegister::product(&[
            (QubitLabel::photon("p"), c(1.0), ZERO),
            (QubitLabel::spin("s"), c(1.0), ZERO),
        ])
        .unwrap();
        let (out, p) = apply_gate(&reg, 0, 1, &gate).unwrap();
        assert_eq!(out.amplitudes()[0], c(-1.0));
        assert_eq!(p, 1.0);
    }

    #[test]
    fn kind_and_frequency_checks() {
        let gate = build_gate(&fig2(), ProbeFrequency(0.0), GateMode::Full).unwrap();
        assert!(matches!(
            apply_gate(&h_spin(1.0, 0.0), 1, 0, &gate),
            Err(Error::KindMismatch { .. })
        ));
        let detuned = QuantumRegister::product(&[
            (
                QubitLabel::photon_at("p", ProbeFrequency(0.3)),
                c(1.0),
                ZERO,
            ),
            (QubitLabel::spin("s"), c(1.0), ZERO),
        ])
        .unwrap();
        assert!(matches!(
            apply_gate(&detuned, 0, 1, &gate),
            Err(Error::FrequencyMismatch { .. })
        ));
        let matched = build_gate(&fig2(), ProbeFrequency(0.3), GateMode::Full).unwrap();
        assert!(apply_gate(&detuned, 0, 1, &matched).is_ok());
    }

    #[test]
    fn full_gate_converges_to_ideal_with_coupling() {
        let ratios: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&g| {
                let p = CavityParams::resonant(g, 0.0, 0.1).unwrap();
                let gate = build_gate(&p, ProbeFrequency(0.0), GateMode::Full).unwrap();
                gate.t.unwrap().norm() / gate.t0.norm()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(ratios[3] < 1e-3);
    }

    #[test]
    fn ideal_gate_is_scaled_projector() {
        let p = CavityParams::resonant(2.4, 0.5, 0.1).unwrap();
        let gate = build_gate(&p, ProbeFrequency(0.2), GateMode::Ideal).unwrap();
        for d in gate.diag {
            assert_abs_diff_eq!((d * d - gate.t0 * d).norm(), 0.0, epsilon = 1e-15);
        }
        let rank = gate.diag.iter().filter(|d| d.norm() > 0.0).count();
        assert_eq!(rank, 2);
    }

    #[test]
    fn json_describes_gate() {
        let gate = build_gate(&fig2(), ProbeFrequency(0.0), GateMode::Ideal).unwrap();
        let json = serde_json::to_value(gate).unwrap();
        assert_eq!(json["mode"], "ideal");
        assert_eq!(json["diag"][0][0].as_f64().unwrap(), -1.0);
        assert_eq!(json["provenance"]["params"]["g"].as_f64().unwrap(), 2.4);
        assert!(json.get("t").is_none());
    }

    fn arb_state(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n).prop_filter_map(
            "zero",
            |v| {
                let v: Vec<Complex64> = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                (norm > 1e-3).then(|| v.iter().map(|z| z / norm).collect())
            },
        )
    }

    fn three(amps: Vec<Complex64>) -> QuantumRegister {
        QuantumRegister::from_amplitudes(
            vec![
                QubitLabel::photon("p"),
                QubitLabel::spin("s"),
                QubitLabel::photon("q"),
            ],
            amps,
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn transmission_probability_bounded(amps in arb_state(3), g in 0.0..5.0f64, ks in 0.0..2.0f64, w in -3.0..3.0f64) {
            let p = CavityParams::resonant(g, ks, 0.1).unwrap();
            let gate = build_gate(&p, ProbeFrequency(w), GateMode::Full).unwrap();
            let (_, pt) = apply_gate(&three(amps), 0, 1, &gate).unwrap();
            prop_assert!((0.0..=1.0 + 1e-9).contains(&pt));
        }

        #[test]
        fn commutes_with_operations_elsewhere(amps in arb_state(3), w in -1.0..1.0f64) {
            let gate = build_gate(&fig2(), ProbeFrequency(w), GateMode::Full).unwrap();
            let op = crate::qstate::SingleQubitOp::photon_hadamard();
            let reg = three(amps);
            let (a, _) = apply_gate(&reg.apply_single_qubit(2, &op).unwrap(), 0, 1, &gate).unwrap();
            let b = apply_gate(&reg, 0, 1, &gate).unwrap().0.apply_single_qubit(2, &op).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn never_mixes_parity_subspaces(amps in arb_state(2), w in -2.0..2.0f64, g in 0.0..4.0f64) {
            // Even parity: (R up, L down); odd parity: (R down, L up).
            let p = CavityParams::resonant(g, 0.2, 0.1).unwrap();
            let gate = build_gate(&p, ProbeFrequency(w), GateMode::Full).unwrap();
            let mut even = amps.clone();
            even[1] = ZERO;
            even[2] = ZERO;
            let reg = QuantumRegister::from_amplitudes(
                vec![QubitLabel::photon("p"), QubitLabel::spin("s")],
                even,
            ).unwrap();
            let (out, _) = apply_gate(&reg, 0, 1, &gate).unwrap();
            prop_assert_eq!(out.amplitudes()[1], ZERO);
            prop_assert_eq!(out.amplitudes()[2], ZERO);
        }
    }
}
