//! End-to-end teleportation: compose Alice's input with a channel state,
//! Bell-transform, extract per-branch Bob states, apply corrections, and
//! compute fidelities and coincidence expectation values.

use thiserror::Error;

use crate::bell::{conditional_state, BellOutcome, OUTCOMES};
use crate::channel::ChannelModel;
use crate::opalg::{OpError, Operator, C64};
use crate::states::{input_density, InputQubit};

#[derive(Debug, Error)]
pub enum TeleportError {
    #[error("operator algebra failure: {0}")]
    Op(#[from] OpError),
    #[error("coincidence query state has norm {0}, expected 1")]
    UnnormalizedQuery(f64),
}

/// One Bell branch of a teleportation run.
#[derive(Debug, Clone)]
pub struct Branch {
    pub outcome: BellOutcome,
    pub probability: f64,
    /// Bob's photon-3 state before the correction Pauli.
    pub bob_raw: Operator,
    /// Bob's state after conjugating with the branch correction.
    pub bob_corrected: Operator,
    /// ⟨ψ_in| bob_corrected |ψ_in⟩.
    pub fidelity: f64,
}

/// Full result of teleporting one input through one channel.
#[derive(Debug, Clone)]
pub struct TeleportReport {
    pub input: InputQubit,
    pub channel: ChannelModel,
    pub branches: [Branch; 4],
}

impl TeleportReport {
    pub fn branch(&self, outcome: BellOutcome) -> &Branch {
        self.branches
            .iter()
            .find(|b| b.outcome == outcome)
            .expect("all four outcomes present")
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

/// A three-photon pure state measured in a coincidence experiment.
#[derive(Debug, Clone)]
pub struct CoincidenceQuery {
    amplitudes: [C64; 8],
}

impl CoincidenceQuery {
    pub fn new(amplitudes: [C64; 8]) -> Result<Self, TeleportError> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(TeleportError::UnnormalizedQuery(norm.sqrt()));
        }
        Ok(CoincidenceQuery { amplitudes })
    }

    /// |ψ₁⟩ ⊗ |χ₂₃⟩ for a 2-component photon-1 ket and 4-component pair ket.
    pub fn product(photon1: &[C64; 2], pair23: &[C64; 4]) -> Result<Self, TeleportError> {
        let mut amplitudes = [C64::new(0.0, 0.0); 8];
        for (i, &a) in photon1.iter().enumerate() {
            for (j, &b) in pair23.iter().enumerate() {
                amplitudes[i * 4 + j] = a * b;
            }
        }
        Self::new(amplitudes)
    }

    /// Preset: Alice's input ket on photon 1 with the singlet on photons 2, 3.
    pub fn input_with_singlet(input: &InputQubit) -> Self {
        Self::product(&input.ket(), &crate::channel::singlet_ket())
            .expect("product of unit kets is unit")
    }

    pub fn amplitudes(&self) -> &[C64; 8] {
        &self.amplitudes
    }
}

/// Fidelity ⟨ψ|ρ|ψ⟩ of a 1-qubit density operator against a pure reference.
pub fn fidelity(rho: &Operator, psi: &[C64; 2]) -> f64 {
    rho.expectation(psi).re
}

/// The three-photon product state ρ¹ ⊗ ρ_i²³.
pub fn joint_state(input: &InputQubit, channel: &ChannelModel) -> Operator {
    input_density(input)
        .tensor(&channel.pair_state())
        .expect("1 + 2 qubits")
}

/// Run the full pipeline for one input and channel.
pub fn run(input: &InputQubit, channel: &ChannelModel) -> Result<TeleportReport, TeleportError> {
    let rho123 = joint_state(input, channel);
    let psi = input.ket();
    let mut branches = Vec::with_capacity(4);
    for outcome in OUTCOMES {
        let (probability, bob_raw) = conditional_state(&rho123, outcome)?;
        let correction = outcome.correction();
        let bob_corrected = bob_raw.conjugate_by(&correction)?;
        let fid = fidelity(&bob_corrected, &psi);
        branches.push(Branch {
            outcome,
            probability,
            bob_raw,
            bob_corrected,
            fidelity: fid,
        });
    }
    Ok(TeleportReport {
        input: *input,
        channel: *channel,
        branches: branches.try_into().expect("four branches"),
    })
}

/// Coincidence expectation value ⟨Φ₁₂₃| ρ¹ ⊗ ρ_i²³ |Φ₁₂₃⟩.
pub fn coincidence(input: &InputQubit, channel: &ChannelModel, q: &CoincidenceQuery) -> f64 {
    coincidence_with_state(&joint_state(input, channel), q)
}

/// Same expectation value against an arbitrary three-photon operator
/// (used for ensemble-averaged states).
pub fn coincidence_with_state(rho123: &Operator, q: &CoincidenceQuery) -> f64 {
    let value = rho123.expectation(q.amplitudes());
    debug_assert!(value.im.abs() < 1e-12, "imaginary residual {:e}", value.im);
    value.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{disentangled_pair, PairAxis};
    use crate::opalg::OperatorKind;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn haar_random_input(rng: &mut impl Rng) -> InputQubit {
        // complex Gaussian amplitudes, normalized inside the constructor
        loop {
            let mut g = || {
                let u: f64 = rng.gen_range(1e-12..1.0);
                let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                (-2.0 * u.ln()).sqrt() * v.cos()
            };
            if let Ok(q) = InputQubit::new(c(g(), g()), c(g(), g())) {
                return q;
            }
        }
    }

    #[test]
    fn entangled_channel_teleports_perfectly() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let q = haar_random_input(&mut rng);
            let report = run(&q, &ChannelModel::Entangled).unwrap();
            for b in &report.branches {
                assert!((b.probability - 0.25).abs() < 1e-12);
                assert!((b.fidelity - 1.0).abs() < 1e-12);
                assert!(b.bob_corrected.validate(OperatorKind::Density, 1e-12).ok);
            }
        }
    }

    #[test]
    fn disentangled_z_destroys_coherence() {
        let q = InputQubit::from_re(0.6, 0.8).unwrap();
        let channel = ChannelModel::Disentangled(PairAxis::new(0.0, 0.0, 0.0));
        let report = run(&q, &channel).unwrap();
        for b in &report.branches {
            assert!((b.bob_corrected.get(0, 0).re - 0.36).abs() < 1e-12);
            assert!((b.bob_corrected.get(1, 1).re - 0.64).abs() < 1e-12);
            assert!(b.bob_corrected.get(0, 1).norm() < 1e-12);
            assert!(b.bob_corrected.get(1, 0).norm() < 1e-12);
        }
    }

    #[test]
    fn disentangled_z_equal_superposition_fidelity_half() {
        let r = 1.0 / 2.0f64.sqrt();
        let q = InputQubit::from_re(r, r).unwrap();
        let channel = ChannelModel::Disentangled(PairAxis::new(0.0, 0.0, 0.0));
        let report = run(&q, &channel).unwrap();
        for b in &report.branches {
            assert!((b.fidelity - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_basics() {
        let q = InputQubit::from_re(0.6, 0.8).unwrap();
        let rho = input_density(&q);
        assert!((fidelity(&rho, &q.ket()) - 1.0).abs() < 1e-14);
        let mixed = Operator::identity(1).scale_re(0.5);
        assert!((fidelity(&mixed, &q.ket()) - 0.5).abs() < 1e-14);
        // diag(|a|², |b|²) against (a, b): |a|⁴ + |b|⁴
        let diag = Operator::from_entries(
            1,
            vec![c(0.36, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.64, 0.0)],
        )
        .unwrap();
        let expected = 0.36f64.powi(2) + 0.64f64.powi(2);
        assert!((fidelity(&diag, &q.ket()) - expected).abs() < 1e-14);
    }

    #[test]
    fn coincidence_singlet_preset_entangled() {
        let q = InputQubit::from_re(1.0, 0.0).unwrap();
        let query = CoincidenceQuery::input_with_singlet(&q);
        let v = coincidence(&q, &ChannelModel::Entangled, &query);
        // ⟨ψ|ρ¹|ψ⟩ · ⟨Ψ⁻|ρ_EPR|Ψ⁻⟩ = 1 · 1
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn coincidence_orthogonal_query_is_zero() {
        // input |0⟩: the |1⟩⊗anything components are outside the support
        let q = InputQubit::from_re(1.0, 0.0).unwrap();
        let mut amps = [c(0.0, 0.0); 8];
        amps[4] = c(1.0, 0.0); // |100⟩
        let query = CoincidenceQuery::new(amps).unwrap();
        let v = coincidence(&q, &ChannelModel::Entangled, &query);
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn coincidence_bell_query_brute_force() {
        // q = |Ψ⁻₁₂⟩ ⊗ |+x⟩₃, entangled channel, input (1, 0);
        // oracle: direct 8-dim contraction of the joint operator
        let q = InputQubit::from_re(1.0, 0.0).unwrap();
        let bell = BellOutcome::PsiMinus.ket();
        let r = 1.0 / 2.0f64.sqrt();
        let mut amps = [c(0.0, 0.0); 8];
        for (ij, &b) in bell.iter().enumerate() {
            // photon 3 is the least significant bit
            amps[ij * 2] = b * r;
            amps[ij * 2 + 1] = b * r;
        }
        let query = CoincidenceQuery::new(amps).unwrap();
        let rho = joint_state(&q, &ChannelModel::Entangled);
        let mut oracle = c(0.0, 0.0);
        for row in 0..8 {
            for col in 0..8 {
                oracle += amps[row].conj() * rho.get(row, col) * amps[col];
            }
        }
        let v = coincidence(&q, &ChannelModel::Entangled, &query);
        assert!((v - oracle.re).abs() < 1e-14);
        assert!(oracle.im.abs() < 1e-14);
    }

    #[test]
    fn unnormalized_query_rejected() {
        let amps = [c(1.0, 0.0); 8];
        assert!(matches!(
            CoincidenceQuery::new(amps),
            Err(TeleportError::UnnormalizedQuery(_))
        ));
    }

    #[test]
    fn report_probabilities_sum_to_one() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let q = haar_random_input(&mut rng);
            let axis = PairAxis::new(
                rng.gen_range(0.0..std::f64::consts::FRAC_PI_2),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            for channel in [ChannelModel::Entangled, ChannelModel::Disentangled(axis)] {
                let report = run(&q, &channel).unwrap();
                assert!((report.total_probability() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn correction_table_consistency() {
        // conjugating bob_raw by the branch Pauli must reproduce ρ_i³ for
        // both channels (the Eq 3.8 branch structure)
        let q = InputQubit::new(c(0.48, 0.36), c(0.6, -0.53)).unwrap();
        let rho_e = input_density(&q);
        let report = run(&q, &ChannelModel::Entangled).unwrap();
        for b in &report.branches {
            assert!(b.bob_corrected.max_abs_diff(&rho_e) < 1e-12);
            let re_raw = b.bob_corrected.conjugate_by(&b.outcome.correction()).unwrap();
            assert!(re_raw.max_abs_diff(&b.bob_raw) < 1e-12);
        }
        let channel = ChannelModel::Disentangled(PairAxis::new(0.0, 0.0, 0.0));
        let rho_d = Operator::from_entries(
            1,
            vec![
                c(q.a().norm_sqr(), 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(q.b().norm_sqr(), 0.0),
            ],
        )
        .unwrap();
        let report = run(&q, &channel).unwrap();
        for b in &report.branches {
            assert!(b.bob_corrected.max_abs_diff(&rho_d) < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn coincidence_linear_in_channel(
            theta_a in 0.0..std::f64::consts::FRAC_PI_2,
            phi_a in 0.0..std::f64::consts::TAU,
            theta_b in 0.0..std::f64::consts::FRAC_PI_2,
            phi_b in 0.0..std::f64::consts::TAU,
        ) {
            let q = InputQubit::from_re(0.6, 0.8).unwrap();
            let query = CoincidenceQuery::input_with_singlet(&q);
            let rho_a = disentangled_pair(&PairAxis::new(theta_a, phi_a, phi_a));
            let rho_b = disentangled_pair(&PairAxis::new(theta_b, phi_b, phi_b));
            let mean_pair = rho_a.add(&rho_b).unwrap().scale_re(0.5);
            let joint_mean = input_density(&q).tensor(&mean_pair).unwrap();
            let va = coincidence_with_state(
                &input_density(&q).tensor(&rho_a).unwrap(), &query);
            let vb = coincidence_with_state(
                &input_density(&q).tensor(&rho_b).unwrap(), &query);
            let vm = coincidence_with_state(&joint_mean, &query);
            prop_assert!((vm - 0.5 * (va + vb)).abs() < 1e-12);
        }
    }
}
