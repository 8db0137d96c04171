//! Brute-force reference simulator for cross-checking `spingate`.
//!
//! Everything here is deliberately naive: cavity coefficients come from a
//! numerical solve of the steady-state field equations, every operator is
//! embedded as a full `2^n x 2^n` matrix via Kronecker products, and
//! measurements are explicit projector or bra contractions. Qubit 0 is the
//! most significant bit; basis index 0 is R / up, 1 is L / down.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64 as C;

pub mod protocols;

pub type Ket = DVector<C>;
pub type Op = DMatrix<C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

// ---------------------------------------------------------------------------
// Cavity

/// Steady-state `(r, t)` from solving
///
/// ```text
/// [ c  g ] [a]   [-sqrt(kappa)]
/// [-g  d ] [s] = [     0      ]
/// ```
///
/// with `c = i(wc - w) + kappa + ks/2`, `d = i(wx - w) + gamma/2`, then
/// `t = sqrt(kappa) a` and `r = 1 + t` (unit input amplitude).
#[allow(clippy::too_many_arguments)]
pub fn cavity_rt(g: f64, kappa: f64, kappa_s: f64, gamma: f64, wc: f64, wx: f64, w: f64) -> (C, C) {
    let cc = c(kappa + kappa_s / 2.0, wc - w);
    let d = c(gamma / 2.0, wx - w);
    let m = Matrix2::new(cc, c(g, 0.0), c(-g, 0.0), d);
    let rhs = Vector2::new(c(-kappa.sqrt(), 0.0), c(0.0, 0.0));
    let sol = m.lu().solve(&rhs).expect("singular cavity system");
    let t = sol[0] * kappa.sqrt();
    (c(1.0, 0.0) + t, t)
}

// ---------------------------------------------------------------------------
// States and operators

pub fn qubit(alpha: C, beta: C) -> Ket {
    DVector::from_vec(vec![alpha, beta])
}

pub fn kron_ket(a: &Ket, b: &Ket) -> Ket {
    let mut out = DVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

pub fn product(qubits: &[(C, C)]) -> Ket {
    qubits
        .iter()
        .fold(DVector::from_element(1, c(1.0, 0.0)), |acc, &(a, b)| {
            kron_ket(&acc, &qubit(a, b))
        })
}

pub fn kron(a: &Op, b: &Op) -> Op {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn identity(dim: usize) -> Op {
    DMatrix::identity(dim, dim)
}

/// `I (x) .. (x) op (x) .. (x) I` with `op` on qubit `k` of `n`.
pub fn embed(op: &Op, k: usize, n: usize) -> Op {
    let left = identity(1 << k);
    let right = identity(1 << (n - k - 1));
    kron(&kron(&left, op), &right)
}

/// Full diagonal matrix acting as `diag` on the pair `(a, b)`, where `diag`
/// is indexed by `2*bit_a + bit_b`.
pub fn embed_pair_diag(diag: &[C; 4], a: usize, b: usize, n: usize) -> Op {
    let dim = 1 << n;
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        out[(i, i)] = diag[2 * bit(i, a) + bit(i, b)];
    }
    out
}

/// `I (x) <bra| (x) I`: removes qubit `k` from an `n`-qubit ket.
pub fn contract(bra: &Ket, k: usize, n: usize) -> Op {
    let row = DMatrix::from_fn(1, 2, |_, j| bra[j].conj());
    kron(&kron(&identity(1 << k), &row), &identity(1 << (n - k - 1)))
}

pub fn projector(ket: &Ket, k: usize, n: usize) -> Op {
    embed(&(ket * ket.adjoint()), k, n)
}

pub fn hadamard() -> Op {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub fn pauli_z() -> Op {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn ket_r() -> Ket {
    qubit(c(1.0, 0.0), c(0.0, 0.0))
}

pub fn ket_l() -> Ket {
    qubit(c(0.0, 0.0), c(1.0, 0.0))
}

pub fn ket_h() -> Ket {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    qubit(c(s, 0.0), c(s, 0.0))
}

pub fn ket_v() -> Ket {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    qubit(c(s, 0.0), c(-s, 0.0))
}

// ---------------------------------------------------------------------------
// Metrics and channels

pub fn norm_sqr(psi: &Ket) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

pub fn normalize(psi: &Ket) -> Ket {
    psi / c(norm_sqr(psi).sqrt(), 0.0)
}

/// `|<a|b>|^2 / (|a|^2 |b|^2)`.
pub fn overlap(a: &Ket, b: &Ket) -> f64 {
    let ip: C = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    ip.norm_sqr() / (norm_sqr(a) * norm_sqr(b))
}

pub fn density(psi: &Ket) -> Op {
    psi * psi.adjoint()
}

/// `rho -> (1-q) rho + q Z_k rho Z_k`.
pub fn dephase(rho: &Op, q: f64, k: usize, n: usize) -> Op {
    let z = embed(&pauli_z(), k, n);
    rho * c(1.0 - q, 0.0) + &z * rho * &z * c(q, 0.0)
}

/// `<psi|rho|psi> / (tr rho <psi|psi>)`.
pub fn fidelity(rho: &Op, psi: &Ket) -> f64 {
    let v = (psi.adjoint() * rho * psi)[(0, 0)].re;
    v / (rho.trace().re * norm_sqr(psi))
}

/// Equal-weight two-branch ket `a|0..0> + s b|1..1>`, normalized.
pub fn two_branch(n: usize, a: C, b: C, sign: f64) -> Ket {
    let mut v = DVector::zeros(1 << n);
    v[0] = a;
    v[(1 << n) - 1] += b * sign;
    normalize(&v)
}
