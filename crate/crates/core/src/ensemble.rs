//! Ensemble averaging over quantization axes: θ fixed at its average value
//! π/4, azimuthal angle χ uniform on [0, 2π), by deterministic quadrature or
//! seeded Monte Carlo, with a configurable relation between the photon-2 and
//! photon-3 phases.
//!
//! Monte Carlo sampling is partitioned: partition `p` draws from a
//! ChaCha8 stream `(seed, p)` and partial sums are combined in partition
//! order, so results are bit-identical at any parallelism degree as long as
//! the partition count is fixed.

use std::f64::consts::{FRAC_PI_4, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bell::{conditional_state, OUTCOMES};
use crate::channel::{circular_distance, disentangled_pair, PairAxis};
use crate::opalg::{OpError, Operator};
use crate::states::{input_density, InputQubit};
use crate::teleport::{fidelity, Branch};

pub const DEFAULT_PARTITIONS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("quadrature needs at least 4 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("Monte Carlo needs at least 1 sample, got {0}")]
    TooFewSamples(usize),
    #[error("partition count must be positive")]
    ZeroPartitions,
    #[error("epsilon {0} outside (0, pi]")]
    BadEpsilon(f64),
    #[error("per-sample averaging diagnostic requires the quadrature method")]
    QuadratureRequired,
    #[error("operator algebra failure: {0}")]
    Op(#[from] OpError),
}

/// How the polar angle is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaPolicy {
    /// The ensemble's average value θ̄ = π/4.
    FixedAverage,
    Fixed(f64),
}

impl ThetaPolicy {
    pub fn value(self) -> f64 {
        match self {
            ThetaPolicy::FixedAverage => FRAC_PI_4,
            ThetaPolicy::Fixed(theta) => theta,
        }
    }
}

/// Relation between the photon-2 and photon-3 azimuthal phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseModel {
    /// φ₂ = φ₃ = χ.
    Matched,
    /// φ₃ = φ₂ + Δ.
    Offset(f64),
    /// φ₂ and φ₃ drawn (or gridded) independently.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Quadrature {
        nodes: usize,
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
        partitions: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub theta: ThetaPolicy,
    pub phase: PhaseModel,
    pub method: Method,
}

impl EnsembleSpec {
    pub fn validated(self) -> Result<Self, EnsembleError> {
        match self.method {
            Method::Quadrature { nodes } if nodes < 4 => Err(EnsembleError::TooFewNodes(nodes)),
            Method::MonteCarlo { samples: 0, .. } => Err(EnsembleError::TooFewSamples(0)),
            Method::MonteCarlo { partitions: 0, .. } => Err(EnsembleError::ZeroPartitions),
            _ => Ok(self),
        }
    }

    fn pair_axis(&self, chi2: f64, chi3: f64) -> PairAxis {
        let theta = self.theta.value();
        match self.phase {
            PhaseModel::Matched => PairAxis::new(theta, chi2, chi2),
            PhaseModel::Offset(delta) => PairAxis::new(theta, chi2, chi2 + delta),
            PhaseModel::Independent => PairAxis::new(theta, chi2, chi3),
        }
    }
}

/// Result of averaging the disentangled pair state over the ensemble.
#[derive(Debug, Clone)]
pub struct AveragedResult {
    pub mean_pair_state: Operator,
    /// Per-entry standard error (Monte Carlo only), row-major over the 4×4
    /// pair state; combines the re/im component errors in quadrature.
    pub stderr: Option<Vec<f64>>,
    pub n_effective: usize,
}

struct Accumulator {
    sum: Vec<(f64, f64)>,
    sum_sq: Vec<(f64, f64)>,
    count: usize,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Accumulator {
            sum: vec![(0.0, 0.0); len],
            sum_sq: vec![(0.0, 0.0); len],
            count: 0,
        }
    }

    fn push(&mut self, op: &Operator) {
        for (i, z) in op.entries().iter().enumerate() {
            self.sum[i].0 += z.re;
            self.sum[i].1 += z.im;
            self.sum_sq[i].0 += z.re * z.re;
            self.sum_sq[i].1 += z.im * z.im;
        }
        self.count += 1;
    }

    fn merge(&mut self, other: &Accumulator) {
        for i in 0..self.sum.len() {
            self.sum[i].0 += other.sum[i].0;
            self.sum[i].1 += other.sum[i].1;
            self.sum_sq[i].0 += other.sum_sq[i].0;
            self.sum_sq[i].1 += other.sum_sq[i].1;
        }
        self.count += other.count;
    }

    fn mean_operator(&self, n_qubits: usize) -> Operator {
        let n = self.count as f64;
        let entries = self
            .sum
            .iter()
            .map(|&(re, im)| crate::opalg::C64::new(re / n, im / n))
            .collect();
        Operator::from_entries(n_qubits, entries).expect("finite means")
    }

    fn stderr(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&(s_re, s_im), &(q_re, q_im))| {
                let var_re = (q_re / n - (s_re / n).powi(2)).max(0.0);
                let var_im = (q_im / n - (s_im / n).powi(2)).max(0.0);
                ((var_re + var_im) / n).sqrt()
            })
            .collect()
    }
}

/// Contiguous per-partition sample counts for `samples` over `partitions`.
fn partition_sizes(samples: usize, partitions: usize) -> Vec<usize> {
    let base = samples / partitions;
    let extra = samples % partitions;
    (0..partitions)
        .map(|p| base + usize::from(p < extra))
        .collect()
}

fn partition_rng(seed: u64, partition: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition as u64);
    rng
}

fn sample_phases(rng: &mut ChaCha8Rng, phase: PhaseModel) -> (f64, f64) {
    let chi2 = rng.gen_range(0.0..TAU);
    let chi3 = match phase {
        PhaseModel::Independent => rng.gen_range(0.0..TAU),
        _ => chi2,
    };
    (chi2, chi3)
}

/// Average the disentangled pair state over the ensemble defined by `spec`.
pub fn average_pair_state(spec: &EnsembleSpec) -> Result<AveragedResult, EnsembleError> {
    let spec = spec.validated()?;
    match spec.method {
        Method::Quadrature { nodes } => {
            let mut acc = Accumulator::new(16);
            match spec.phase {
                PhaseModel::Independent => {
                    for j in 0..nodes {
                        let chi2 = TAU * j as f64 / nodes as f64;
                        for k in 0..nodes {
                            let chi3 = TAU * k as f64 / nodes as f64;
                            acc.push(&disentangled_pair(&spec.pair_axis(chi2, chi3)));
                        }
                    }
                }
                _ => {
                    for j in 0..nodes {
                        let chi = TAU * j as f64 / nodes as f64;
                        acc.push(&disentangled_pair(&spec.pair_axis(chi, chi)));
                    }
                }
            }
            Ok(AveragedResult {
                mean_pair_state: acc.mean_operator(2),
                stderr: None,
                n_effective: acc.count,
            })
        }
        Method::MonteCarlo {
            samples,
            seed,
            partitions,
        } => {
            let sizes = partition_sizes(samples, partitions);
            let partials: Vec<Accumulator> = (0..partitions)
                .into_par_iter()
                .map(|p| {
                    let mut rng = partition_rng(seed, p);
                    let mut acc = Accumulator::new(16);
                    for _ in 0..sizes[p] {
                        let (chi2, chi3) = sample_phases(&mut rng, spec.phase);
                        acc.push(&disentangled_pair(&spec.pair_axis(chi2, chi3)));
                    }
                    acc
                })
                .collect();
            let mut acc = Accumulator::new(16);
            for partial in &partials {
                acc.merge(partial);
            }
            Ok(AveragedResult {
                mean_pair_state: acc.mean_operator(2),
                stderr: Some(acc.stderr()),
                n_effective: acc.count,
            })
        }
    }
}

/// Teleportation through the ensemble-averaged channel: average the pair
/// state, form ρ¹ ⊗ ρ̄²³, and Bell-transform the mean once. Valid because
/// every reported quantity is linear in the pair state.
#[derive(Debug, Clone)]
pub struct AveragedTeleport {
    pub pair: AveragedResult,
    pub branches: [Branch; 4],
}

pub fn average_teleport(
    input: &InputQubit,
    spec: &EnsembleSpec,
) -> Result<AveragedTeleport, EnsembleError> {
    let pair = average_pair_state(spec)?;
    let rho123 = input_density(input).tensor(&pair.mean_pair_state)?;
    let psi = input.ket();
    let mut branches = Vec::with_capacity(4);
    for outcome in OUTCOMES {
        let (probability, bob_raw) = conditional_state(&rho123, outcome)?;
        let bob_corrected = bob_raw.conjugate_by(&outcome.correction())?;
        let fid = fidelity(&bob_corrected, &psi);
        branches.push(Branch {
            outcome,
            probability,
            bob_raw,
            bob_corrected,
            fidelity: fid,
        });
    }
    Ok(AveragedTeleport {
        pair,
        branches: branches.try_into().expect("four branches"),
    })
}

/// Diagnostic path: run the full pipeline per quadrature node and average
/// the per-branch reports. Must agree with `average_teleport` on all linear
/// quantities (branch probabilities are identically ¼, so the conditional
/// normalization is sample-independent and everything stays linear).
pub fn average_teleport_per_sample(
    input: &InputQubit,
    spec: &EnsembleSpec,
) -> Result<[Branch; 4], EnsembleError> {
    let spec = spec.validated()?;
    let nodes = match spec.method {
        Method::Quadrature { nodes } => nodes,
        Method::MonteCarlo { .. } => return Err(EnsembleError::QuadratureRequired),
    };
    let axes: Vec<PairAxis> = match spec.phase {
        PhaseModel::Independent => (0..nodes)
            .flat_map(|j| {
                (0..nodes).map(move |k| {
                    (TAU * j as f64 / nodes as f64, TAU * k as f64 / nodes as f64)
                })
            })
            .map(|(c2, c3)| spec.pair_axis(c2, c3))
            .collect(),
        _ => (0..nodes)
            .map(|j| {
                let chi = TAU * j as f64 / nodes as f64;
                spec.pair_axis(chi, chi)
            })
            .collect(),
    };
    let n = axes.len() as f64;
    let mut branches: Vec<Branch> = OUTCOMES
        .iter()
        .map(|&outcome| Branch {
            outcome,
            probability: 0.0,
            bob_raw: Operator::zeros(1),
            bob_corrected: Operator::zeros(1),
            fidelity: 0.0,
        })
        .collect();
    for axis in &axes {
        let report = crate::teleport::run(
            input,
            &crate::channel::ChannelModel::Disentangled(*axis),
        )
        .map_err(|e| match e {
            crate::teleport::TeleportError::Op(op) => EnsembleError::Op(op),
            _ => unreachable!("run takes no query state"),
        })?;
        for (acc, b) in branches.iter_mut().zip(report.branches.iter()) {
            acc.probability += b.probability / n;
            acc.bob_raw = acc.bob_raw.add(&b.bob_raw.scale_re(1.0 / n))?;
            acc.bob_corrected = acc.bob_corrected.add(&b.bob_corrected.scale_re(1.0 / n))?;
            acc.fidelity += b.fidelity / n;
        }
    }
    Ok(branches.try_into().expect("four branches"))
}

/// Fraction of sampled pairs whose phases fall within the acceptance window
/// ε under circular distance. For independent uniform phases the expected
/// value is ε/π.
pub fn detection_rate(epsilon: f64, spec: &EnsembleSpec) -> Result<f64, EnsembleError> {
    if !(epsilon > 0.0 && epsilon <= std::f64::consts::PI) {
        return Err(EnsembleError::BadEpsilon(epsilon));
    }
    let spec = spec.validated()?;
    match spec.method {
        Method::Quadrature { nodes } => {
            let mut hits = 0usize;
            let mut total = 0usize;
            match spec.phase {
                PhaseModel::Independent => {
                    for j in 0..nodes {
                        for k in 0..nodes {
                            let axis = spec.pair_axis(
                                TAU * j as f64 / nodes as f64,
                                TAU * k as f64 / nodes as f64,
                            );
                            total += 1;
                            if circular_distance(axis.phi2, axis.phi3) < epsilon {
                                hits += 1;
                            }
                        }
                    }
                }
                _ => {
                    for j in 0..nodes {
                        let chi = TAU * j as f64 / nodes as f64;
                        let axis = spec.pair_axis(chi, chi);
                        total += 1;
                        if circular_distance(axis.phi2, axis.phi3) < epsilon {
                            hits += 1;
                        }
                    }
                }
            }
            Ok(hits as f64 / total as f64)
        }
        Method::MonteCarlo {
            samples,
            seed,
            partitions,
        } => {
            let sizes = partition_sizes(samples, partitions);
            let hits: Vec<usize> = (0..partitions)
                .into_par_iter()
                .map(|p| {
                    let mut rng = partition_rng(seed, p);
                    let mut h = 0usize;
                    for _ in 0..sizes[p] {
                        let (chi2, chi3) = sample_phases(&mut rng, spec.phase);
                        let axis = spec.pair_axis(chi2, chi3);
                        if circular_distance(axis.phi2, axis.phi3) < epsilon {
                            h += 1;
                        }
                    }
                    h
                })
                .collect();
            Ok(hits.iter().sum::<usize>() as f64 / samples as f64)
        }
    }
}
