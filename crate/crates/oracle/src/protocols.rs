//! Whole-register reference runs of the heralded protocols.
//!
//! Each function returns one entry per herald outcome (`[0]` for R / H / up,
//! `[1]` for L / V / down), `None` when that herald never fires.

use crate::*;

/// Cavity parameters in the same units as the simulator.
#[derive(Debug, Clone, Copy)]
pub struct Cavity {
    pub g: f64,
    pub kappa: f64,
    pub kappa_s: f64,
    pub gamma: f64,
    pub omega_c: f64,
    pub omega_x: f64,
}

impl Cavity {
    pub fn empty_t(&self, w: f64) -> C {
        cavity_rt(
            0.0,
            self.kappa,
            self.kappa_s,
            self.gamma,
            self.omega_c,
            self.omega_x,
            w,
        )
        .1
    }

    pub fn coupled_t(&self, w: f64) -> C {
        cavity_rt(
            self.g,
            self.kappa,
            self.kappa_s,
            self.gamma,
            self.omega_c,
            self.omega_x,
            w,
        )
        .1
    }

    /// Transmission diagonal over (R up, R down, L up, L down).
    pub fn full_diag(&self, w: f64) -> [C; 4] {
        let (t0, t) = (self.empty_t(w), self.coupled_t(w));
        [t0, t, t, t0]
    }

    pub fn ideal_diag(&self, w: f64) -> [C; 4] {
        let t0 = self.empty_t(w);
        let z = c(0.0, 0.0);
        [t0, z, z, t0]
    }
}

#[derive(Debug, Clone)]
pub struct Herald {
    /// Absolute probability of this herald.
    pub probability: f64,
    /// Heralded state of the remaining qubits, normalized.
    pub state: Ket,
}

pub type Heralds = [Option<Herald>; 2];

fn computational(o: usize) -> Ket {
    if o == 0 {
        ket_r()
    } else {
        ket_l()
    }
}

fn herald(psi: Ket) -> Option<Herald> {
    let p = norm_sqr(&psi);
    (p > 0.0).then(|| Herald {
        probability: p,
        state: normalize(&psi),
    })
}

fn maybe_z(psi: Ket, o: usize, correct: bool, k: usize, n: usize) -> Ket {
    if correct && o == 1 {
        embed(&pauli_z(), k, n) * psi
    } else {
        psi
    }
}

/// Projective spin readout, or the auxiliary-photon version when
/// `probe_diag` is given. `spin` is the spin index in an `n`-qubit ket;
/// the spin is removed from the output.
fn read_spin(psi: &Ket, spin: usize, n: usize, probe_diag: Option<[C; 4]>, o: usize) -> Ket {
    match probe_diag {
        None => contract(&computational(o), spin, n) * psi,
        Some(diag) => {
            let with_probe = kron_ket(psi, &ket_h());
            let gated = embed_pair_diag(&diag, n, spin, n + 1) * with_probe;
            let detected = contract(&computational(o), n, n + 1) * gated;
            contract(&computational(o), spin, n) * detected
        }
    }
}

pub fn qnd(spin: (C, C), diag: [C; 4]) -> Heralds {
    let psi = kron_ket(&ket_h(), &qubit(spin.0, spin.1));
    let gated = embed_pair_diag(&diag, 0, 1, 2) * psi;
    [0, 1].map(|o| herald(contract(&computational(o), 0, 2) * &gated))
}

/// One H photon through every cavity in order, photon Hadamard, R/L
/// detection. Output: the spins.
pub fn spin_ghz(spins: &[(C, C)], diags: &[[C; 4]], correct: bool) -> Heralds {
    let n = spins.len() + 1;
    let mut qubits = vec![(ket_h()[0], ket_h()[1])];
    qubits.extend_from_slice(spins);
    let mut psi = product(&qubits);
    for (k, d) in diags.iter().enumerate() {
        psi = embed_pair_diag(d, 0, k + 1, n) * psi;
    }
    psi = embed(&hadamard(), 0, n) * psi;
    [0, 1].map(|o| {
        let out = contract(&computational(o), 0, n) * &psi;
        herald(maybe_z(out, o, correct, n - 2, n - 1))
    })
}

/// Photons in sequence through one cavity with spin |+>, spin Hadamard,
/// spin readout. Output: the photons.
pub fn photon_ghz(
    photons: &[(C, C)],
    diags: &[[C; 4]],
    probe_diag: Option<[C; 4]>,
    correct: bool,
) -> Heralds {
    let n = photons.len() + 1;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut qubits = photons.to_vec();
    qubits.push((c(s, 0.0), c(s, 0.0)));
    let mut psi = product(&qubits);
    for (k, d) in diags.iter().enumerate() {
        psi = embed_pair_diag(d, k, n - 1, n) * psi;
    }
    psi = embed(&hadamard(), n - 1, n) * psi;
    [0, 1].map(|o| {
        let out = read_spin(&psi, n - 1, n, probe_diag, o);
        herald(maybe_z(out, o, correct, n - 2, n - 1))
    })
}

/// Output: the spin.
pub fn photon_to_spin(photon: (C, C), diag: [C; 4], correct: bool) -> Heralds {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = product(&[photon, (c(s, 0.0), c(s, 0.0))]);
    let psi = embed(&hadamard(), 0, 2) * embed_pair_diag(&diag, 0, 1, 2) * psi;
    [0, 1].map(|o| {
        herald(maybe_z(
            contract(&computational(o), 0, 2) * &psi,
            o,
            correct,
            0,
            1,
        ))
    })
}

/// Output: the photon.
pub fn spin_to_photon(
    spin: (C, C),
    diag: [C; 4],
    probe_diag: Option<[C; 4]>,
    correct: bool,
) -> Heralds {
    let psi = kron_ket(&ket_h(), &qubit(spin.0, spin.1));
    let psi = embed(&hadamard(), 1, 2) * embed_pair_diag(&diag, 0, 1, 2) * psi;
    [0, 1].map(|o| {
        herald(maybe_z(
            read_spin(&psi, 1, 2, probe_diag, o),
            o,
            correct,
            0,
            1,
        ))
    })
}

#[derive(Debug, Clone)]
pub struct MixedHerald {
    pub probability: f64,
    /// Normalized two-photon density matrix.
    pub rho: Op,
}

/// Photon pair with a phase-flip channel of strength `q` on the spin
/// between the two photons.
pub fn dephased_photon_pair(
    photons: [(C, C); 2],
    diags: [[C; 4]; 2],
    q: f64,
) -> [Option<MixedHerald>; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = product(&[photons[0], photons[1], (c(s, 0.0), c(s, 0.0))]);
    let g1 = embed_pair_diag(&diags[0], 0, 2, 3);
    let g2 = embed_pair_diag(&diags[1], 1, 2, 3);
    let h = embed(&hadamard(), 2, 3);
    let rho = density(&(g1 * psi));
    let rho = dephase(&rho, q, 2, 3);
    let rho = &g2 * rho * g2.adjoint();
    let rho = &h * rho * h.adjoint();
    [0, 1].map(|o| {
        let k = contract(&computational(o), 2, 3);
        let out = &k * &rho * k.adjoint();
        let p = out.trace().re;
        (p > 0.0).then(|| MixedHerald {
            probability: p,
            rho: out / c(p, 0.0),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lossless() -> Cavity {
        Cavity {
            g: 2.4,
            kappa: 1.0,
            kappa_s: 0.0,
            gamma: 0.1,
            omega_c: 0.0,
            omega_x: 0.0,
        }
    }

    fn total(h: &Heralds) -> f64 {
        h.iter().flatten().map(|x| x.probability).sum()
    }

    #[test]
    fn ideal_balanced_probabilities() {
        let cav = lossless();
        let d = cav.ideal_diag(0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = (c(s, 0.0), c(s, 0.0));
        assert!((total(&qnd(b, d)) - 0.5).abs() < 1e-14);
        assert!((total(&spin_ghz(&[b, b], &[d, d], false)) - 0.25).abs() < 1e-14);
        assert!((total(&photon_ghz(&[b, b, b], &[d, d, d], None, false)) - 0.125).abs() < 1e-14);
        assert!((total(&photon_to_spin(b, d, false)) - 0.5).abs() < 1e-14);
        assert!((total(&spin_to_photon(b, d, None, false)) - 0.5).abs() < 1e-14);
        assert!((total(&spin_to_photon(b, d, Some(d), false)) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn dephased_pair_fidelity() {
        let cav = lossless();
        let d = cav.ideal_diag(0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = (c(s, 0.0), c(s, 0.0));
        let q = 0.2;
        let out = dephased_photon_pair([b, b], [d, d], q);
        let plus = two_branch(2, c(1.0, 0.0), c(1.0, 0.0), 1.0);
        let f = fidelity(&out[0].as_ref().unwrap().rho, &plus);
        assert!((f - (1.0 - q)).abs() < 1e-14);
    }
}
