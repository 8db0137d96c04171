//! Protocol outputs against the dense brute-force simulator, Full gates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spingate::protocols::{Branch, DephasingParams};
use spingate::*;
use spingate_oracle::protocols::{self as oracle, Cavity, Heralds};
use spingate_oracle::{fidelity, Ket};

const TOL: f64 = 1e-9;

fn random_params(rng: &mut ChaCha8Rng) -> CavityParams {
    CavityParams::new(
        rng.random_range(1.5..5.0),
        1.0,
        rng.random_range(0.0..0.5),
        rng.random_range(0.01..0.3),
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
    )
    .unwrap()
}

fn cavity(p: &CavityParams) -> Cavity {
    Cavity {
        g: p.g,
        kappa: p.kappa,
        kappa_s: p.kappa_s,
        gamma: p.gamma,
        omega_c: p.omega_c,
        omega_x: p.omega_x,
    }
}

fn random_qubit(rng: &mut ChaCha8Rng) -> QubitState {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    QubitState::new(
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    )
    .unwrap()
}

fn pair(s: QubitState) -> (Complex64, Complex64) {
    (s.alpha, s.beta)
}

fn overlap(reg: &QuantumRegister, ket: &Ket) -> f64 {
    let v = Ket::from_column_slice(reg.amplitudes());
    spingate_oracle::overlap(&v, ket)
}

fn compare(branches: &[Branch], keys: [&str; 2], expected: &Heralds) {
    for (key, exp) in keys.iter().zip(expected) {
        let got = branches.iter().find(|b| {
            b.herald
                .iter()
                .map(|h| h.outcome.as_str())
                .collect::<Vec<_>>()
                .join(",")
                == *key
        });
        match (got, exp) {
            (None, None) => {}
            (Some(b), Some(e)) => {
                assert!(
                    (b.probability - e.probability).abs() < TOL,
                    "herald {key}: {} vs {}",
                    b.probability,
                    e.probability
                );
                let ov = overlap(&b.state, &e.state);
                assert!((ov - 1.0).abs() < TOL, "herald {key}: overlap {ov}");
            }
            (Some(b), None) => assert!(b.probability < TOL, "herald {key} only fires in simulator"),
            (None, Some(e)) => assert!(e.probability < TOL, "herald {key} only fires in oracle"),
        }
    }
}

#[test]
fn cavity_coefficients_match_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let w = ProbeFrequency(rng.random_range(-2.0..2.0));
        let cav = cavity(&p);
        let t0 = empty_cavity_coeffs(&p, w).unwrap();
        let t = coupled_cavity_coeffs(&p, w).unwrap();
        assert!((t0.t - cav.empty_t(w.0)).norm() < 1e-12);
        assert!((t.t - cav.coupled_t(w.0)).norm() < 1e-12);
        let r =
            spingate_oracle::cavity_rt(p.g, p.kappa, p.kappa_s, p.gamma, p.omega_c, p.omega_x, w.0)
                .0;
        assert!((t.r - r).norm() < 1e-12);
    }
}

#[test]
fn qnd_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let w = ProbeFrequency(rng.random_range(-0.5..0.5));
        let spin = random_qubit(&mut rng);
        let gate = build_gate(&p, w, GateMode::Full).unwrap();
        let b = QndMeasurement::new(spin, gate).unwrap().branches().unwrap();
        compare(
            &b,
            ["R", "L"],
            &oracle::qnd(pair(spin), cavity(&p).full_diag(w.0)),
        );
    }
}

#[test]
fn spin_ghz_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [2, 3, 4] {
        for _ in 0..20 {
            let w = ProbeFrequency(rng.random_range(-0.5..0.5));
            let params: Vec<_> = (0..n).map(|_| random_params(&mut rng)).collect();
            let spins: Vec<_> = (0..n).map(|_| random_qubit(&mut rng)).collect();
            let correct = rng.random_bool(0.5);
            let gates = params
                .iter()
                .map(|p| build_gate(p, w, GateMode::Full).unwrap())
                .collect();
            let opts = ProtocolOptions {
                correct_phase: correct,
                ..ProtocolOptions::default()
            };
            let b = SpinGhz::new(spins.clone(), gates, opts)
                .unwrap()
                .branches()
                .unwrap();
            let diags: Vec<_> = params.iter().map(|p| cavity(p).full_diag(w.0)).collect();
            let spins: Vec<_> = spins.into_iter().map(pair).collect();
            compare(&b, ["H", "V"], &oracle::spin_ghz(&spins, &diags, correct));
        }
    }
}

#[test]
fn photon_ghz_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [2, 3, 4] {
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let photons: Vec<_> = (0..n)
                .map(|_| PhotonInput {
                    state: random_qubit(&mut rng),
                    omega: ProbeFrequency(rng.random_range(-0.5..0.5)),
                })
                .collect();
            let physical = rng.random_bool(0.5);
            let correct = rng.random_bool(0.5);
            let opts = ProtocolOptions {
                readout: if physical {
                    SpinReadout::PhysicalQnd
                } else {
                    SpinReadout::Projective
                },
                correct_phase: correct,
            };
            let b = PhotonGhz::new(photons.clone(), p, GateMode::Full, opts)
                .unwrap()
                .branches()
                .unwrap();
            let cav = cavity(&p);
            let diags: Vec<_> = photons.iter().map(|ph| cav.full_diag(ph.omega.0)).collect();
            let probe = physical.then(|| cav.ideal_diag(p.omega_c));
            let states: Vec<_> = photons.iter().map(|ph| pair(ph.state)).collect();
            let keys = if physical { ["R", "L"] } else { ["up", "down"] };
            compare(
                &b,
                keys,
                &oracle::photon_ghz(&states, &diags, probe, correct),
            );
        }
    }
}

#[test]
fn interface_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let w = ProbeFrequency(rng.random_range(-0.5..0.5));
        let input = random_qubit(&mut rng);
        let correct = rng.random_bool(0.5);
        let physical = rng.random_bool(0.5);
        let opts = ProtocolOptions {
            readout: if physical {
                SpinReadout::PhysicalQnd
            } else {
                SpinReadout::Projective
            },
            correct_phase: correct,
        };
        let gate = build_gate(&p, w, GateMode::Full).unwrap();
        let cav = cavity(&p);
        let b = PhotonToSpin::new(input, gate, opts)
            .unwrap()
            .branches()
            .unwrap();
        compare(
            &b,
            ["H", "V"],
            &oracle::photon_to_spin(pair(input), cav.full_diag(w.0), correct),
        );
        let b = SpinToPhoton::new(input, gate, opts)
            .unwrap()
            .branches()
            .unwrap();
        let probe = physical.then(|| cav.ideal_diag(p.omega_c));
        let keys = if physical { ["R", "L"] } else { ["up", "down"] };
        compare(
            &b,
            keys,
            &oracle::spin_to_photon(pair(input), cav.full_diag(w.0), probe, correct),
        );
    }
}

#[test]
fn dephased_pair_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..30 {
        let p = random_params(&mut rng);
        let photons = [0, 1].map(|_| PhotonInput {
            state: random_qubit(&mut rng),
            omega: ProbeFrequency(rng.random_range(-0.5..0.5)),
        });
        let d = DephasingParams::new(rng.random_range(0.0..3.0), 1.0, None).unwrap();
        let pair_protocol =
            DephasedPhotonPair::new(photons, p, GateMode::Full, ProtocolOptions::default(), d)
                .unwrap();
        let report = pair_protocol.report().unwrap();
        let cav = cavity(&p);
        let expected = oracle::dephased_photon_pair(
            photons.map(|ph| pair(ph.state)),
            photons.map(|ph| cav.full_diag(ph.omega.0)),
            d.flip_probability(),
        );
        for (key, exp) in ["up", "down"].iter().zip(&expected) {
            let got = report.branch(key).unwrap();
            let exp = exp.as_ref().unwrap();
            assert!((got.probability - exp.probability).abs() < TOL);
            let rho = got.density.matrix();
            assert!((rho - &exp.rho).norm() < TOL);
            let target = Ket::from_column_slice(got.target.amplitudes());
            assert!((got.fidelity - fidelity(&exp.rho, &target)).abs() < TOL);
        }
    }
}
