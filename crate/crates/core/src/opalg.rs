//! Dense complex matrix algebra for operators on 1 to 3 qubits.
//!
//! Everything in this crate lives in dimension 2, 4 or 8, so operators are
//! stored as plain row-major `Vec<Complex64>` and all arithmetic is exact
//! double-precision with no attempt at sparsity.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum OpError {
    #[error("operator dimensions do not match: {0} qubits vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("tensor product would exceed {MAX_QUBITS} qubits ({0} + {1})")]
    DimensionOverflow(usize, usize),
    #[error("invalid qubit count {0} (must be 1..={MAX_QUBITS})")]
    InvalidQubitCount(usize),
    #[error("invalid subsystem index set {0:?} for an operator on {1} qubits")]
    InvalidSubsystems(Vec<usize>, usize),
    #[error("non-finite entry at ({0}, {1})")]
    NonFiniteEntry(usize, usize),
    #[error("conditional state undefined: branch probability {0:e} below threshold")]
    UndefinedConditional(f64),
}

/// A dense operator on `n_qubits` qubits, row-major.
///
/// Subsystems are labelled 1-based with subsystem 1 as the leftmost
/// (most significant) tensor factor, matching the photon labels 1, 2, 3.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n_qubits: usize,
    entries: Vec<C64>,
}

impl Operator {
    pub fn from_entries(n_qubits: usize, entries: Vec<C64>) -> Result<Self, OpError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(OpError::InvalidQubitCount(n_qubits));
        }
        let dim = 1usize << n_qubits;
        assert_eq!(entries.len(), dim * dim, "entry count must be 4^n_qubits");
        let op = Operator { n_qubits, entries };
        op.check_finite()?;
        Ok(op)
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Operator {
            n_qubits,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut op = Self::zeros(n_qubits);
        let dim = op.dim();
        for i in 0..dim {
            op.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        op
    }

    /// Outer product |u⟩⟨v| of two state vectors of equal power-of-two length.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        let n_qubits = u.len().trailing_zeros() as usize;
        assert_eq!(1usize << n_qubits, u.len());
        let mut op = Self::zeros(n_qubits);
        for (r, &ur) in u.iter().enumerate() {
            for (c, &vc) in v.iter().enumerate() {
                op.entries[r * u.len() + c] = ur * vc.conj();
            }
        }
        op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        let dim = self.dim();
        self.entries[row * dim + col] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    fn check_finite(&self) -> Result<(), OpError> {
        let dim = self.dim();
        for r in 0..dim {
            for c in 0..dim {
                let z = self.get(r, c);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(OpError::NonFiniteEntry(r, c));
                }
            }
        }
        Ok(())
    }

    pub fn tensor(&self, other: &Operator) -> Result<Operator, OpError> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(OpError::DimensionOverflow(self.n_qubits, other.n_qubits));
        }
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut out = Operator {
            n_qubits: n,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        };
        for ra in 0..da {
            for ca in 0..da {
                let a = self.get(ra, ca);
                for rb in 0..db {
                    for cb in 0..db {
                        out.entries[(ra * db + rb) * dim + (ca * db + cb)] = a * other.get(rb, cb);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator, OpError> {
        if self.n_qubits != other.n_qubits {
            return Err(OpError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let dim = self.dim();
        let mut out = Operator::zeros(self.n_qubits);
        for r in 0..dim {
            for k in 0..dim {
                let a = self.get(r, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..dim {
                    out.entries[r * dim + c] += a * other.get(k, c);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator, OpError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator, OpError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Operator, f: impl Fn(C64, C64) -> C64) -> Result<Operator, OpError> {
        if self.n_qubits != other.n_qubits {
            return Err(OpError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Operator {
            n_qubits: self.n_qubits,
            entries,
        })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            n_qubits: self.n_qubits,
            entries: self.entries.iter().map(|&e| e * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Operator {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn adjoint(&self) -> Operator {
        let dim = self.dim();
        let mut out = Operator::zeros(self.n_qubits);
        for r in 0..dim {
            for c in 0..dim {
                out.entries[c * dim + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        let dim = self.dim();
        (0..dim).map(|i| self.get(i, i)).sum()
    }

    /// Conjugation U A U† (U need not be unitary; no check performed).
    pub fn conjugate_by(&self, u: &Operator) -> Result<Operator, OpError> {
        u.mul(self)?.mul(&u.adjoint())
    }

    /// Trace out every subsystem not listed in `keep` (1-based labels,
    /// subsystem 1 = most significant factor). Kept subsystems retain their
    /// relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Operator, OpError> {
        let n = self.n_qubits;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let valid = !sorted.is_empty()
            && sorted.len() == keep.len()
            && sorted.len() < n
            && sorted.iter().all(|&k| k >= 1 && k <= n);
        if !valid {
            return Err(OpError::InvalidSubsystems(keep.to_vec(), n));
        }
        let traced: Vec<usize> = (1..=n).filter(|k| !sorted.contains(k)).collect();
        let nk = sorted.len();
        let nt = traced.len();
        let dk = 1usize << nk;
        let dt = 1usize << nt;
        // bit position of subsystem s within a full index (msb first)
        let bit = |s: usize| n - s;
        let mut out = Operator::zeros(nk);
        for rk in 0..dk {
            for ck in 0..dk {
                let mut sum = C64::new(0.0, 0.0);
                for t in 0..dt {
                    let mut row = 0usize;
                    let mut col = 0usize;
                    for (i, &s) in sorted.iter().enumerate() {
                        let b = (rk >> (nk - 1 - i)) & 1;
                        row |= b << bit(s);
                        let b = (ck >> (nk - 1 - i)) & 1;
                        col |= b << bit(s);
                    }
                    for (i, &s) in traced.iter().enumerate() {
                        let b = (t >> (nt - 1 - i)) & 1;
                        row |= b << bit(s);
                        col |= b << bit(s);
                    }
                    sum += self.get(row, col);
                }
                out.entries[rk * dk + ck] = sum;
            }
        }
        Ok(out)
    }

    /// Largest entrywise absolute difference against `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// ⟨v|A|v⟩ for a state vector of matching dimension.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let dim = self.dim();
        assert_eq!(v.len(), dim);
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..dim {
            for c in 0..dim {
                acc += v[r].conj() * self.get(r, c) * v[c];
            }
        }
        acc
    }
}

/// What `validate` checks an operator against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Hermitian,
    Psd,
    Projector,
    Density,
}

#[derive(Debug, Clone, Copy)]
pub struct Validation {
    pub ok: bool,
    pub residual: f64,
}

impl Operator {
    fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    fn projector_residual(&self) -> f64 {
        let sq = self.mul(self).expect("same dims");
        sq.max_abs_diff(self)
    }

    /// Minimum eigenvalue of a (near-)Hermitian operator, by cyclic Jacobi
    /// on the Hermitian part. Each eigenpair is verified to satisfy
    /// ‖Av − λv‖ ≤ 1e−10 before the value is trusted.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = self.add(&self.adjoint()).expect("same dims").scale_re(0.5);
        let (eigvals, eigvecs) = jacobi_hermitian_eigen(&herm);
        let dim = herm.dim();
        for (k, &lambda) in eigvals.iter().enumerate() {
            let v: Vec<C64> = (0..dim).map(|r| eigvecs.get(r, k)).collect();
            let mut resid = 0.0f64;
            for r in 0..dim {
                let mut av = C64::new(0.0, 0.0);
                for c in 0..dim {
                    av += herm.get(r, c) * v[c];
                }
                resid += (av - v[r] * lambda).norm_sqr();
            }
            assert!(
                resid.sqrt() <= 1e-10,
                "eigenpair residual {:e} exceeds 1e-10",
                resid.sqrt()
            );
        }
        eigvals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self, kind: OperatorKind, tol: f64) -> Validation {
        assert!(tol > 0.0, "tolerance must be positive");
        match kind {
            OperatorKind::Hermitian => {
                let residual = self.hermiticity_residual();
                Validation {
                    ok: residual <= tol,
                    residual,
                }
            }
            OperatorKind::Psd => {
                let min = self.min_eigenvalue();
                let residual = (-min).max(0.0);
                Validation {
                    ok: min >= -tol,
                    residual,
                }
            }
            OperatorKind::Projector => {
                let residual = self.projector_residual();
                Validation {
                    ok: residual <= tol,
                    residual,
                }
            }
            OperatorKind::Density => {
                let herm = self.hermiticity_residual();
                let trace_resid = (self.trace() - C64::new(1.0, 0.0)).norm();
                let min = self.min_eigenvalue();
                let psd_resid = (-min).max(0.0);
                let residual = herm.max(trace_resid).max(psd_resid);
                Validation {
                    ok: herm <= tol && trace_resid <= tol && min >= -tol,
                    residual,
                }
            }
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix by the cyclic Jacobi method.
/// Returns (eigenvalues, column eigenvectors). Fine for dims up to 8.
fn jacobi_hermitian_eigen(a: &Operator) -> (Vec<f64>, Operator) {
    let dim = a.dim();
    let mut m = a.clone();
    let mut vecs = Operator::identity(a.n_qubits());
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += m.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() < 1e-15 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m.get(p, q);
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                // phase so the pivot becomes real, then a real Givens rotation
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c*col_p - s*conj(phase)... derive via J:
                // J_pp = c, J_pq = s*phase, J_qp = -s*conj(phase), J_qq = c
                // update M <- J^† M J, V <- V J
                let jpp = C64::new(c, 0.0);
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                let jqq = C64::new(c, 0.0);
                // M J (columns p, q)
                for r in 0..dim {
                    let mp = m.get(r, p);
                    let mq = m.get(r, q);
                    m.set(r, p, mp * jpp + mq * jqp);
                    m.set(r, q, mp * jpq + mq * jqq);
                }
                // J^† M (rows p, q)
                for col in 0..dim {
                    let mp = m.get(p, col);
                    let mq = m.get(q, col);
                    m.set(p, col, jpp.conj() * mp + jqp.conj() * mq);
                    m.set(q, col, jpq.conj() * mp + jqq.conj() * mq);
                }
                for r in 0..dim {
                    let vp = vecs.get(r, p);
                    let vq = vecs.get(r, q);
                    vecs.set(r, p, vp * jpp + vq * jqp);
                    vecs.set(r, q, vp * jpq + vq * jqq);
                }
            }
        }
    }
    let vals = (0..dim).map(|i| m.get(i, i).re).collect();
    (vals, vecs)
}

/// The 2×2 Pauli matrices and identity.
pub mod pauli {
    use super::{Operator, C64};

    fn op(entries: [[(f64, f64); 2]; 2]) -> Operator {
        let flat = entries
            .iter()
            .flatten()
            .map(|&(re, im)| C64::new(re, im))
            .collect();
        Operator::from_entries(1, flat).expect("finite constants")
    }

    pub fn identity() -> Operator {
        Operator::identity(1)
    }

    pub fn sigma_x() -> Operator {
        op([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])
    }

    pub fn sigma_y() -> Operator {
        op([[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]])
    }

    pub fn sigma_z() -> Operator {
        op([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]])
    }

    pub fn all() -> [Operator; 3] {
        [sigma_x(), sigma_y(), sigma_z()]
    }
}
