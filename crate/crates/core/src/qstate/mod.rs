//! Dense state vectors over photon-polarization and electron-spin qubits.
//!
//! Conventions used throughout the crate:
//!
//! - the qubit at label position 0 is the most significant bit of the
//!   amplitude index;
//! - basis value 0 is `|R>` for photons and `|up>` for spins, basis value 1
//!   is `|L>` / `|down>`;
//! - registers may be sub-normalized. After a post-selection the squared
//!   norm is the probability of the surviving branch.

mod density;

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cavity::ProbeFrequency;
use crate::error::{Error, Result};

pub use density::{concurrence, DensityMatrix};

/// Largest register the engine accepts (65,536 amplitudes).
pub const MAX_QUBITS: usize = 16;

/// Tolerance on `|alpha|^2 + |beta|^2 = 1` for single-qubit inputs.
pub const NORMALIZATION_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitKind {
    Photon,
    Spin,
}

impl QubitKind {
    pub fn name(self) -> &'static str {
        match self {
            QubitKind::Photon => "photon",
            QubitKind::Spin => "spin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitLabel {
    pub kind: QubitKind,
    pub id: String,
    /// Carrier frequency of a photon. Always `None` for spins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<ProbeFrequency>,
}

impl QubitLabel {
    pub fn photon(id: impl Into<String>) -> Self {
        Self {
            kind: QubitKind::Photon,
            id: id.into(),
            frequency: None,
        }
    }

    pub fn photon_at(id: impl Into<String>, frequency: ProbeFrequency) -> Self {
        Self {
            kind: QubitKind::Photon,
            id: id.into(),
            frequency: Some(frequency),
        }
    }

    pub fn spin(id: impl Into<String>) -> Self {
        Self {
            kind: QubitKind::Spin,
            id: id.into(),
            frequency: None,
        }
    }

    fn validate(&self) -> Result<()> {
        match (self.kind, self.frequency) {
            (QubitKind::Spin, Some(_)) => Err(Error::InvalidParameter {
                name: "frequency",
                reason: format!("spin `{}` cannot carry a frequency", self.id),
            }),
            (QubitKind::Photon, Some(f)) => f.validate(),
            _ => Ok(()),
        }
    }
}

fn validate_labels(labels: &[QubitLabel]) -> Result<()> {
    if labels.len() > MAX_QUBITS {
        return Err(Error::TooManyQubits(labels.len()));
    }
    let mut seen = HashSet::new();
    for label in labels {
        label.validate()?;
        if !seen.insert(label.id.as_str()) {
            return Err(Error::DuplicateLabel(label.id.clone()));
        }
    }
    Ok(())
}

/// Measurement basis for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Photon helicity, outcomes R / L.
    Circular,
    /// Photon linear polarization, outcomes H = (R+L)/sqrt2, V = (R-L)/sqrt2.
    Linear,
    /// Spin along the growth axis, outcomes up / down.
    SpinZ,
}

impl Basis {
    fn kind(self) -> QubitKind {
        match self {
            Basis::Circular | Basis::Linear => QubitKind::Photon,
            Basis::SpinZ => QubitKind::Spin,
        }
    }

    /// Components of the basis ket for `outcome` in the computational basis.
    fn ket(self, outcome: Outcome) -> [Complex64; 2] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match (self, outcome) {
            (Basis::Circular | Basis::SpinZ, Outcome::Zero) => [ONE, ZERO],
            (Basis::Circular | Basis::SpinZ, Outcome::One) => [ZERO, ONE],
            (Basis::Linear, Outcome::Zero) => [h, h],
            (Basis::Linear, Outcome::One) => [h, -h],
        }
    }

    pub fn outcome_name(self, outcome: Outcome) -> &'static str {
        match (self, outcome) {
            (Basis::Circular, Outcome::Zero) => "R",
            (Basis::Circular, Outcome::One) => "L",
            (Basis::Linear, Outcome::Zero) => "H",
            (Basis::Linear, Outcome::One) => "V",
            (Basis::SpinZ, Outcome::Zero) => "up",
            (Basis::SpinZ, Outcome::One) => "down",
        }
    }
}

/// Basis value of a single-qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];
}

/// A 2x2 complex matrix acting on one qubit. Need not be unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitOp(pub [[Complex64; 2]; 2]);

impl SingleQubitOp {
    pub fn new(matrix: [[Complex64; 2]; 2]) -> Result<Self> {
        if matrix.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "op",
                reason: "matrix entries must be finite".into(),
            });
        }
        Ok(Self(matrix))
    }

    fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let op = Self([[h, h], [h, -h]]);
        debug_assert!(op.is_unitary(1e-15));
        op
    }

    /// Polarizing-beam-splitter basis change: R -> H, L -> V.
    pub fn photon_hadamard() -> Self {
        Self::hadamard()
    }

    /// pi/2 spin rotation: up -> (up+down)/sqrt2, down -> (up-down)/sqrt2.
    pub fn spin_hadamard() -> Self {
        Self::hadamard()
    }

    pub fn pauli_z() -> Self {
        Self([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let m = &self.0;
        (0..2).all(|i| {
            (0..2).all(|j| {
                let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let expected = if i == j { ONE } else { ZERO };
                (dot - expected).norm() <= tol
            })
        })
    }
}

/// Result of a sampled projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: Outcome,
    /// Squared norm of the selected branch before renormalization. Equals the
    /// conditional outcome probability when the input register is normalized.
    pub prob: f64,
    /// Post-measurement register, renormalized to unit norm.
    pub collapsed: QuantumRegister,
}

/// Ordered qubit labels plus a dense amplitude vector of length `2^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegister")]
pub struct QuantumRegister {
    labels: Vec<QubitLabel>,
    amplitudes: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawRegister {
    labels: Vec<QubitLabel>,
    amplitudes: Vec<Complex64>,
}

impl TryFrom<RawRegister> for QuantumRegister {
    type Error = Error;

    fn try_from(raw: RawRegister) -> Result<Self> {
        Self::from_amplitudes(raw.labels, raw.amplitudes)
    }
}

impl QuantumRegister {
    /// Product state `(x) (alpha|0> + beta|1>)`, one factor per label.
    pub fn product(specs: &[(QubitLabel, Complex64, Complex64)]) -> Result<Self> {
        let labels: Vec<QubitLabel> = specs.iter().map(|(l, _, _)| l.clone()).collect();
        validate_labels(&labels)?;
        let mut amplitudes = vec![ONE];
        for (_, alpha, beta) in specs {
            check_normalized(*alpha, *beta)?;
            amplitudes = amplitudes
                .iter()
                .flat_map(|&a| [a * alpha, a * beta])
                .collect();
        }
        Ok(Self { labels, amplitudes })
    }

    /// Wrap an explicit amplitude vector. Sub-normalized vectors are accepted.
    pub fn from_amplitudes(labels: Vec<QubitLabel>, amplitudes: Vec<Complex64>) -> Result<Self> {
        validate_labels(&labels)?;
        let expected = 1usize << labels.len();
        if amplitudes.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} labels need {} amplitudes, got {}",
                labels.len(),
                expected,
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "amplitudes must be finite".into(),
            });
        }
        let reg = Self { labels, amplitudes };
        let norm = reg.norm_sqr();
        if norm > 1.0 + NORMALIZATION_TOL {
            return Err(Error::NonNormalizedInput(norm));
        }
        Ok(reg)
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l.id == id)
            .ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }

    pub fn label(&self, idx: usize) -> Result<&QubitLabel> {
        self.labels.get(idx).ok_or(Error::IndexOutOfRange {
            index: idx,
            len: self.labels.len(),
        })
    }

    fn stride(&self, idx: usize) -> Result<usize> {
        self.label(idx)?;
        Ok(1 << (self.labels.len() - 1 - idx))
    }

    /// Iterate over `(i0, i1)` index pairs that differ only in qubit `idx`.
    fn pairs(&self, idx: usize) -> Result<impl Iterator<Item = (usize, usize)>> {
        let stride = self.stride(idx)?;
        let dim = self.amplitudes.len();
        Ok((0..dim)
            .filter(move |i| i & stride == 0)
            .map(move |i| (i, i | stride)))
    }

    pub fn apply_single_qubit(&self, idx: usize, op: &SingleQubitOp) -> Result<Self> {
        let m = &op.0;
        let mut out = self.clone();
        for (i0, i1) in self.pairs(idx)? {
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            out.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            out.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(out)
    }

    /// Multiply by a diagonal operator on the qubit pair `(a, b)`; `diag` is
    /// ordered over `(00, 01, 10, 11)` with `a` the high bit.
    pub fn apply_pair_diagonal(&self, a: usize, b: usize, diag: &[Complex64; 4]) -> Result<Self> {
        let sa = self.stride(a)?;
        let sb = self.stride(b)?;
        if a == b {
            return Err(Error::InvalidProtocolInput(format!(
                "pair operator needs two distinct qubits, got {a} twice"
            )));
        }
        let mut out = self.clone();
        for (i, amp) in out.amplitudes.iter_mut().enumerate() {
            let k = (usize::from(i & sa != 0) << 1) | usize::from(i & sb != 0);
            *amp *= diag[k];
        }
        Ok(out)
    }

    fn check_basis(&self, idx: usize, basis: Basis) -> Result<()> {
        let label = self.label(idx)?;
        if label.kind != basis.kind() {
            return Err(Error::KindMismatch {
                id: label.id.clone(),
                expected: basis.kind().name(),
                found: label.kind.name(),
            });
        }
        Ok(())
    }

    /// Projection `P psi` onto one outcome, left unnormalized; its squared
    /// norm is the branch weight.
    pub fn filter_qubit(&self, idx: usize, basis: Basis, outcome: Outcome) -> Result<Self> {
        self.check_basis(idx, basis)?;
        let [b0, b1] = basis.ket(outcome);
        let mut out = self.clone();
        for (i0, i1) in self.pairs(idx)? {
            let c = b0.conj() * self.amplitudes[i0] + b1.conj() * self.amplitudes[i1];
            out.amplitudes[i0] = b0 * c;
            out.amplitudes[i1] = b1 * c;
        }
        Ok(out)
    }

    /// Exact branch probability and the collapsed register (renormalized to
    /// unit norm; all zeros when the branch is empty).
    ///
    /// The two branch probabilities sum to the register's squared norm.
    pub fn project_qubit(&self, idx: usize, basis: Basis, outcome: Outcome) -> Result<(f64, Self)> {
        let filtered = self.filter_qubit(idx, basis, outcome)?;
        let prob = filtered.norm_sqr();
        if prob > 0.0 {
            Ok((prob, filtered.scaled(1.0 / prob.sqrt())))
        } else {
            Ok((0.0, filtered))
        }
    }

    /// Sample a projective measurement of qubit `idx`.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &self,
        idx: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<Measurement> {
        let zero = self.filter_qubit(idx, basis, Outcome::Zero)?;
        let one = self.filter_qubit(idx, basis, Outcome::One)?;
        let (w0, w1) = (zero.norm_sqr(), one.norm_sqr());
        let total = w0 + w1;
        if total <= 0.0 {
            return Err(Error::ZeroNormRegister);
        }
        let u: f64 = rng.random::<f64>() * total;
        let (outcome, prob, branch) = if u < w0 {
            (Outcome::Zero, w0, zero)
        } else {
            (Outcome::One, w1, one)
        };
        Ok(Measurement {
            outcome,
            prob,
            collapsed: branch.scaled(1.0 / prob.sqrt()),
        })
    }

    /// Contract qubit `idx` with the bra of `outcome` and drop it from the
    /// register. Models a detector that absorbs the measured photon (or a
    /// spin that is no longer tracked). The result is unnormalized and its
    /// squared norm equals the branch weight.
    pub fn post_select(&self, idx: usize, basis: Basis, outcome: Outcome) -> Result<Self> {
        self.check_basis(idx, basis)?;
        let [b0, b1] = basis.ket(outcome);
        let amplitudes = self
            .pairs(idx)?
            .map(|(i0, i1)| b0.conj() * self.amplitudes[i0] + b1.conj() * self.amplitudes[i1])
            .collect::<Vec<_>>();
        // pairs() yields i0 in increasing order, which is also the order of
        // the reduced indices.
        let mut labels = self.labels.clone();
        labels.remove(idx);
        Ok(Self { labels, amplitudes })
    }

    /// Tensor a fresh qubit `alpha|0> + beta|1>` onto the end of the register.
    pub fn append_qubit(
        &self,
        label: QubitLabel,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Self> {
        check_normalized(alpha, beta)?;
        let mut labels = self.labels.clone();
        labels.push(label);
        validate_labels(&labels)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| [a * alpha, a * beta])
            .collect();
        Ok(Self { labels, amplitudes })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::ZeroNormRegister);
        }
        Ok(self.scaled(1.0 / norm.sqrt()))
    }

    /// `<self|other>`; registers must have the same qubit kinds in order.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        let kinds = |r: &Self| r.labels.iter().map(|l| l.kind).collect::<Vec<_>>();
        if kinds(self) != kinds(other) {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                kinds(self),
                kinds(other)
            )));
        }
        Ok(())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

impl fmt::Display for QuantumRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.labels.len();
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() < 1e-24 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|", a.re, a.im)?;
            for (q, label) in self.labels.iter().enumerate() {
                let bit = (i >> (n - 1 - q)) & 1;
                let symbol = match (label.kind, bit) {
                    (QubitKind::Photon, 0) => "R",
                    (QubitKind::Photon, _) => "L",
                    (QubitKind::Spin, 0) => "u",
                    (QubitKind::Spin, _) => "d",
                };
                write!(f, "{symbol}")?;
            }
            write!(f, ">")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub(crate) fn check_normalized(alpha: Complex64, beta: Complex64) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if !norm.is_finite() || (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NonNormalizedInput(norm));
    }
    Ok(())
}

/// `|<a|b>|^2` after normalizing both registers.
pub fn state_fidelity(a: &QuantumRegister, b: &QuantumRegister) -> Result<f64> {
    a.check_same_shape(b)?;
    let (a, b) = (a.normalized()?, b.normalized()?);
    Ok(a.inner(&b)?.norm_sqr().min(1.0))
}
