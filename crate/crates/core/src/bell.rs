//! The four Bell projectors on photons 1-2, the Bell transformation of a
//! three-photon state, and extraction of Bob's conditional state.

use std::fmt;

use crate::opalg::{pauli, OpError, Operator, C64};

/// Probabilities below this are treated as a dead branch.
pub const ZERO_PROB_THRESHOLD: f64 = 1e-14;

/// The four Bell measurement results on photons 1-2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellOutcome {
    /// |Ψ⁻⟩ branch, correction: identity.
    PsiMinus,
    /// |Φ⁻⟩ branch, correction: σ_x.
    PhiMinus,
    /// |Φ⁺⟩ branch, correction: σ_y.
    PhiPlus,
    /// |Ψ⁺⟩ branch, correction: σ_z.
    PsiPlus,
}

pub const OUTCOMES: [BellOutcome; 4] = [
    BellOutcome::PsiMinus,
    BellOutcome::PhiMinus,
    BellOutcome::PhiPlus,
    BellOutcome::PsiPlus,
];

impl BellOutcome {
    /// The Pauli (or identity) that undoes this branch's conjugation of
    /// Bob's photon.
    pub fn correction(self) -> Operator {
        match self {
            BellOutcome::PsiMinus => pauli::identity(),
            BellOutcome::PhiMinus => pauli::sigma_x(),
            BellOutcome::PhiPlus => pauli::sigma_y(),
            BellOutcome::PsiPlus => pauli::sigma_z(),
        }
    }

    /// The Bell ket this branch projects onto, in the computational basis.
    pub fn ket(self) -> [C64; 4] {
        let r = 1.0 / 2.0f64.sqrt();
        let z = C64::new(0.0, 0.0);
        let p = C64::new(r, 0.0);
        let m = C64::new(-r, 0.0);
        match self {
            BellOutcome::PsiMinus => [z, p, m, z],
            BellOutcome::PsiPlus => [z, p, p, z],
            BellOutcome::PhiMinus => [p, z, z, m],
            BellOutcome::PhiPlus => [p, z, z, p],
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellOutcome::PsiMinus => "psi_minus",
            BellOutcome::PhiMinus => "phi_minus",
            BellOutcome::PhiPlus => "phi_plus",
            BellOutcome::PsiPlus => "psi_plus",
        };
        f.write_str(s)
    }
}

/// The complete Bell measurement: one rank-1 projector per outcome.
#[derive(Debug, Clone)]
pub struct BellMeasurement {
    projectors: [Operator; 4],
}

impl BellMeasurement {
    pub fn projector(&self, outcome: BellOutcome) -> &Operator {
        &self.projectors[OUTCOMES.iter().position(|&o| o == outcome).unwrap()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (BellOutcome, &Operator)> {
        OUTCOMES.iter().copied().zip(self.projectors.iter())
    }
}

fn sigma_dot_sigma() -> Operator {
    let mut acc = Operator::zeros(2);
    for s in pauli::all() {
        acc = acc.add(&s.tensor(&s).unwrap()).unwrap();
    }
    acc
}

/// Build the four projectors from their Pauli-sum forms:
/// A = ¼(I·I − σ·σ) and S^k = ¼(I·I + σ·σ − 2 σ_k σ_k).
pub fn build_projectors() -> BellMeasurement {
    let i4 = Operator::identity(2);
    let ss = sigma_dot_sigma();
    let antisym = i4.sub(&ss).unwrap().scale_re(0.25);
    let sym_part = i4.add(&ss).unwrap();
    let sym_k = |s: Operator| {
        sym_part
            .sub(&s.tensor(&s).unwrap().scale_re(2.0))
            .unwrap()
            .scale_re(0.25)
    };
    BellMeasurement {
        // order matches OUTCOMES
        projectors: [
            antisym,
            sym_k(pauli::sigma_x()),
            sym_k(pauli::sigma_y()),
            sym_k(pauli::sigma_z()),
        ],
    }
}

/// The symmetrising projector S = S^x + S^y + S^z.
pub fn symmetric_projector() -> Operator {
    let i4 = Operator::identity(2);
    i4.scale_re(3.0)
        .add(&sigma_dot_sigma())
        .unwrap()
        .scale_re(0.25)
}

/// The four diagonal branches (P⊗I) ρ (P⊗I) of the Bell transformation.
/// Cross terms between branches are deliberately not computed.
pub fn bell_transform(rho123: &Operator) -> Result<[(BellOutcome, Operator); 4], OpError> {
    let meas = build_projectors();
    let id3 = pauli::identity();
    let mut out = Vec::with_capacity(4);
    for (outcome, proj) in meas.iter() {
        let sandwich = proj.tensor(&id3)?;
        let branch = rho123.conjugate_by(&sandwich)?;
        out.push((outcome, branch));
    }
    Ok(out.try_into().expect("four branches"))
}

/// Branch probability and Bob's normalized photon-3 state for one outcome.
pub fn conditional_state(
    rho123: &Operator,
    outcome: BellOutcome,
) -> Result<(f64, Operator), OpError> {
    let meas = build_projectors();
    let sandwich = meas.projector(outcome).tensor(&pauli::identity())?;
    let branch = rho123.conjugate_by(&sandwich)?;
    let prob = branch.trace().re;
    if prob < ZERO_PROB_THRESHOLD {
        return Err(OpError::UndefinedConditional(prob));
    }
    let bob = branch.partial_trace(&[3])?.scale_re(1.0 / prob);
    Ok((prob, bob))
}
