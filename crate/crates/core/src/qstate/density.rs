use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{validate_labels, QuantumRegister, QubitLabel};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;
const PSD_FLOOR: f64 = -1e-9;

/// Eigenvalues of rho below this fraction of the trace are treated as exact
/// zeros when computing concurrence; their square roots would otherwise
/// inject ~1e-8 noise.
const RANK_FLOOR: f64 = 1e-14;

/// Dense `2^n x 2^n` density matrix over labelled qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<QubitLabel>,
    matrix: DMatrix<Complex64>,
}

impl serde::Serialize for DensityMatrix {
    /// Row-major matrix of `[re, im]` pairs next to the labels.
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Repr<'a> {
            labels: &'a [QubitLabel],
            matrix: Vec<Vec<Complex64>>,
        }
        let matrix = self
            .matrix
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect();
        let repr = Repr {
            labels: &self.labels,
            matrix,
        };
        serde::Serialize::serialize(&repr, serializer)
    }
}

impl DensityMatrix {
    /// Validates shape, Hermiticity, trace in `[0, 1]` and positivity.
    pub fn new(labels: Vec<QubitLabel>, matrix: DMatrix<Complex64>) -> Result<Self> {
        validate_labels(&labels)?;
        let dim = 1usize << labels.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "{} labels need a {dim}x{dim} matrix, got {}x{}",
                labels.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dm = Self { labels, matrix };
        let asym = (&dm.matrix - dm.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: format!("not Hermitian (max deviation {asym:e})"),
            });
        }
        let tr = dm.trace();
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(Error::InvalidTrace(tr));
        }
        let min_eig = dm.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < PSD_FLOOR {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: format!("not positive semidefinite (eigenvalue {min_eig:e})"),
            });
        }
        Ok(dm)
    }

    /// `|psi><psi|` for a possibly sub-normalized register.
    pub fn from_pure(reg: &QuantumRegister) -> Self {
        let psi = nalgebra::DVector::from_column_slice(reg.amplitudes());
        Self {
            labels: reg.labels().to_vec(),
            matrix: &psi * psi.adjoint(),
        }
    }

    /// Convex combination `sum_k w_k |psi_k><psi_k|` over registers that
    /// share one label list.
    pub fn mixture(parts: &[(f64, &QuantumRegister)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidProtocolInput("empty mixture".into()))?;
        let mut matrix = DMatrix::zeros(first.amplitudes().len(), first.amplitudes().len());
        for (weight, reg) in parts {
            if reg.labels() != first.labels() {
                return Err(Error::ShapeMismatch(
                    "mixture components differ in labels".into(),
                ));
            }
            if !(weight.is_finite() && *weight >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "weight",
                    reason: format!("mixture weights must be non-negative, got {weight}"),
                });
            }
            matrix += Self::from_pure(reg).matrix * Complex64::from(*weight);
        }
        Self::new(first.labels().to_vec(), matrix)
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Real eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut eig: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// `rho / tr(rho)`.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::ZeroNormRegister);
        }
        Ok(Self {
            labels: self.labels.clone(),
            matrix: &self.matrix / Complex64::from(tr),
        })
    }

    /// `<psi|rho|psi> / (<psi|psi> tr rho)`.
    pub fn fidelity_with_pure(&self, target: &QuantumRegister) -> Result<f64> {
        let kinds = |labels: &[QubitLabel]| labels.iter().map(|l| l.kind).collect::<Vec<_>>();
        if kinds(&self.labels) != kinds(target.labels()) {
            return Err(Error::ShapeMismatch(
                "target does not match density matrix".into(),
            ));
        }
        let rho = self.normalized()?;
        let psi = target.normalized()?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok((v.adjoint() * &rho.matrix * &v)[(0, 0)].re)
    }

    /// Trace out every qubit whose id is not in `keep`. Kept qubits retain
    /// their original relative order; the total trace is unchanged.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        for id in keep {
            if !self.labels.iter().any(|l| l.id == *id) {
                return Err(Error::UnknownLabel(id.to_string()));
            }
        }
        let n = self.labels.len();
        let (kept, traced): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&q| keep.contains(&self.labels[q].id.as_str()));
        let scatter = |sub: usize, positions: &[usize]| -> usize {
            positions.iter().enumerate().fold(0, |acc, (k, &q)| {
                let bit = (sub >> (positions.len() - 1 - k)) & 1;
                acc | (bit << (n - 1 - q))
            })
        };
        let dk = 1usize << kept.len();
        let dt = 1usize << traced.len();
        let mut out = DMatrix::zeros(dk, dk);
        for i in 0..dk {
            let fi = scatter(i, &kept);
            for j in 0..dk {
                let fj = scatter(j, &kept);
                out[(i, j)] = (0..dt)
                    .map(|t| {
                        let ft = scatter(t, &traced);
                        self.matrix[(fi | ft, fj | ft)]
                    })
                    .sum();
            }
        }
        Ok(Self {
            labels: kept.iter().map(|&q| self.labels[q].clone()).collect(),
            matrix: out,
        })
    }
}

/// Wootters concurrence of a normalized two-qubit density matrix.
///
/// Uses `rho = W W^dagger` from the eigendecomposition; the concurrence
/// spectrum is the singular values of `W^dagger (Y (x) Y) conj(W)`.
pub fn concurrence(dm: &DensityMatrix) -> Result<f64> {
    if dm.num_qubits() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            got: dm.num_qubits(),
        });
    }
    let tr = dm.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(tr));
    }
    let eig = dm.matrix.clone().symmetric_eigen();
    let columns: Vec<_> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .filter(|(&p, _)| p > RANK_FLOOR * tr)
        .map(|(&p, v)| v * Complex64::from(p.sqrt()))
        .collect();
    if columns.is_empty() {
        return Ok(0.0);
    }
    let w = DMatrix::from_columns(&columns);
    // sigma_y (x) sigma_y is real: anti-diagonal (-1, 1, 1, -1).
    let mut yy = DMatrix::<Complex64>::zeros(4, 4);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        yy[(i, 3 - i)] = Complex64::from(s);
    }
    let tau = w.adjoint() * yy * w.map(|z| z.conj());
    let mut sv: Vec<f64> = tau.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let c = sv[0] - sv[1..].iter().sum::<f64>();
    Ok(c.clamp(0.0, 1.0))
}
