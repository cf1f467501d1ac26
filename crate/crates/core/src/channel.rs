//! Photon-2,3 pair states: the entangled singlet and the disentangled
//! product mixture along a shared quantization axis.

use std::f64::consts::{PI, TAU};

use crate::bell::BellOutcome;
use crate::opalg::{pauli, Operator};
use crate::states::{single_density, Axis, Sign};

/// Tolerance used by `PairAxis::is_phase_matched` for exact-algebra tests.
pub const PHASE_MATCH_TOL: f64 = 1e-9;

/// Shared polar angle θ with separate azimuthal phases for photons 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairAxis {
    pub theta: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl PairAxis {
    pub fn new(theta: f64, phi2: f64, phi3: f64) -> Self {
        PairAxis {
            theta,
            phi2: phi2.rem_euclid(TAU),
            phi3: phi3.rem_euclid(TAU),
        }
    }

    pub fn axis2(&self) -> Axis {
        Axis::new(self.theta, self.phi2)
    }

    pub fn axis3(&self) -> Axis {
        Axis::new(self.theta, self.phi3)
    }

    pub fn is_phase_matched(&self, tol: f64) -> bool {
        circular_distance(self.phi2, self.phi3) < tol
    }
}

/// min(|Δφ|, 2π − |Δφ|) of two angles.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Which pair model describes photons 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Entangled,
    Disentangled(PairAxis),
}

impl ChannelModel {
    pub fn pair_state(&self) -> Operator {
        match self {
            ChannelModel::Entangled => epr_pair(),
            ChannelModel::Disentangled(axis) => disentangled_pair(axis),
        }
    }
}

/// The isotropic singlet density operator ¼(I⊗I − σ·σ).
pub fn epr_pair() -> Operator {
    let mut ss = Operator::zeros(2);
    for s in pauli::all() {
        ss = ss.add(&s.tensor(&s).unwrap()).unwrap();
    }
    Operator::identity(2).sub(&ss).unwrap().scale_re(0.25)
}

/// The singlet ket (|01⟩ − |10⟩)/√2 on photons 2, 3.
pub fn singlet_ket() -> [crate::opalg::C64; 4] {
    BellOutcome::PsiMinus.ket()
}

/// Equal mixture of opposite-helicity product states along the pair axis:
/// ½[ρ²(+)⊗ρ³(−) + ρ²(−)⊗ρ³(+)].
pub fn disentangled_pair(axis: &PairAxis) -> Operator {
    let pp = single_density(axis.axis2(), Sign::Plus);
    let pm = single_density(axis.axis2(), Sign::Minus);
    let mp = single_density(axis.axis3(), Sign::Plus);
    let mm = single_density(axis.axis3(), Sign::Minus);
    pp.tensor(&mm)
        .unwrap()
        .add(&pm.tensor(&mp).unwrap())
        .unwrap()
        .scale_re(0.5)
}

/// A non-linear crystal advances the selected photon's azimuthal phase by π
/// and leaves θ unchanged.
pub fn crystal_transform(axis: &PairAxis, photon: u8) -> PairAxis {
    assert!(photon == 2 || photon == 3, "photon must be 2 or 3");
    match photon {
        2 => PairAxis::new(axis.theta, axis.phi2 + PI, axis.phi3),
        _ => PairAxis::new(axis.theta, axis.phi2, axis.phi3 + PI),
    }
}
