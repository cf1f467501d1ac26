//! Axis-parametrized single-photon states and Alice's input qubit.
//!
//! Angle convention: `Axis::theta` is the polar parameter appearing directly
//! in the 2×2 blocks (entries cos²θ, sin²θ, cosθ sinθ e^{±iφ}). This is HALF
//! the usual Bloch polar angle: θ = π/4 here is the equator, not θ = π/2.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

use crate::opalg::{Operator, C64};

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("input amplitudes have zero norm")]
    ZeroNorm,
    #[error("input amplitudes not normalizable: {0}")]
    NotFinite(String),
}

/// Quantization axis (θ, φ) of a single photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub theta: f64,
    pub phi: f64,
}

impl Axis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Axis {
            theta,
            phi: phi.rem_euclid(TAU),
        }
    }
}

/// Eigenvalue sign of the axis operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// The |±⟩ ket along `axis`:
/// plus → (cos θ, sin θ e^{iφ}), minus → (sin θ, −cos θ e^{iφ}).
pub fn basis_ket(axis: Axis, sign: Sign) -> [C64; 2] {
    let (sin_t, cos_t) = axis.theta.sin_cos();
    let phase = Complex64::from_polar(1.0, axis.phi);
    match sign {
        Sign::Plus => [C64::new(cos_t, 0.0), phase * sin_t],
        Sign::Minus => [C64::new(sin_t, 0.0), -phase * cos_t],
    }
}

/// Pure density operator |±⟩⟨±| along `axis`.
pub fn single_density(axis: Axis, sign: Sign) -> Operator {
    let ket = basis_ket(axis, sign);
    Operator::outer(&ket, &ket)
}

/// σ along the axis: single_density(+) − single_density(−).
/// Hermitian, traceless, squares to the identity.
pub fn axis_operator(axis: Axis) -> Operator {
    single_density(axis, Sign::Plus)
        .sub(&single_density(axis, Sign::Minus))
        .expect("both 1 qubit")
}

/// Alice's input photon, a pure superposition a|0⟩ + b|1⟩.
///
/// Unnormalized amplitudes are accepted; the applied normalization factor is
/// recorded so callers can audit it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputQubit {
    a: C64,
    b: C64,
    norm_factor: f64,
}

impl InputQubit {
    pub fn new(a: C64, b: C64) -> Result<Self, StateError> {
        if !a.re.is_finite() || !a.im.is_finite() || !b.re.is_finite() || !b.im.is_finite() {
            return Err(StateError::NotFinite(format!("a={a}, b={b}")));
        }
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm < 1e-300 {
            return Err(StateError::ZeroNorm);
        }
        Ok(InputQubit {
            a: a / norm,
            b: b / norm,
            norm_factor: 1.0 / norm,
        })
    }

    pub fn from_re(a: f64, b: f64) -> Result<Self, StateError> {
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0))
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    /// Factor the constructor multiplied the raw amplitudes by.
    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn ket(&self) -> [C64; 2] {
        [self.a, self.b]
    }
}

/// ρ¹ = [[|a|², ab*], [a*b, |b|²]].
pub fn input_density(q: &InputQubit) -> Operator {
    let ket = q.ket();
    Operator::outer(&ket, &ket)
}
