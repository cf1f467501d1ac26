//! Command-line front end: flat key=value config files with command-line
//! overrides, CSV/JSON output, and CI-friendly exit codes
//! (0 success, 1 invariant failure, 2 usage/config error).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use qteleport::bell;
use qteleport::channel::{ChannelModel, PairAxis};
use qteleport::ensemble::{
    self, EnsembleSpec, Method, PhaseModel, ThetaPolicy, DEFAULT_PARTITIONS,
};
use qteleport::opalg::{pauli, Operator, OperatorKind, C64};
use qteleport::states::{single_density, Axis, InputQubit, Sign};
use qteleport::teleport::{self, TeleportReport};

/// Default RNG seed used when none is given, so runs are reproducible
/// out of the box.
pub const DEFAULT_SEED: u64 = 20080613;

const EXIT_OK: i32 = 0;
const EXIT_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "qteleport",
    about = "Teleportation through entangled vs disentangled photon-pair channels",
    version
)]
struct CliArgs {
    /// Flat key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the fully resolved config in config-file form and exit.
    #[arg(long, global = true)]
    echo_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the exact-algebra invariant suite and report residuals.
    Verify(CommonOpts),
    /// Teleport one input through one channel; one row per Bell outcome.
    Teleport(CommonOpts),
    /// Ensemble-averaged teleportation over the axis azimuth.
    Ensemble(CommonOpts),
    /// Side-by-side entangled vs disentangled fidelities over an input grid.
    Compare(CommonOpts),
}

#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// Input amplitudes: "a,b" (real) or "a_re,a_im,b_re,b_im".
    #[arg(long)]
    input: Option<String>,

    /// Channel model: entangled | disentangled.
    #[arg(long)]
    model: Option<String>,

    /// Polar angle θ in radians (block convention: θ = π/4 is the equator).
    #[arg(long)]
    theta: Option<f64>,

    /// Photon-2 azimuthal phase in radians.
    #[arg(long)]
    phi2: Option<f64>,

    /// Photon-3 azimuthal phase in radians.
    #[arg(long)]
    phi3: Option<f64>,

    /// Ensemble phase model: matched | independent | offset:<radians>.
    #[arg(long)]
    phase_model: Option<String>,

    /// Monte Carlo sample count (selects the Monte Carlo method).
    #[arg(long)]
    samples: Option<usize>,

    /// Quadrature node count (default method, 64 nodes).
    #[arg(long)]
    nodes: Option<usize>,

    /// Monte Carlo partition count (fixed for reproducibility).
    #[arg(long)]
    partitions: Option<usize>,

    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Phase acceptance window in radians; enables the detection-rate row.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: csv | json.
    #[arg(long)]
    format: Option<String>,

    /// Tolerance for invariant checks.
    #[arg(long)]
    tol: Option<f64>,

    /// Semicolon-separated input grid for `compare`, e.g. "1,0;0.6,0.8".
    #[arg(long)]
    inputs: Option<String>,

    /// Test hook: perturb one Bell-projector entry by 1e-6 before verifying.
    #[arg(long, hide = true)]
    perturb: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved run configuration after merging config file and flags.
#[derive(Debug, Clone)]
struct RunConfig {
    input: String,
    model: String,
    theta: f64,
    phi2: f64,
    phi3: f64,
    phase_model: String,
    samples: Option<usize>,
    nodes: usize,
    partitions: usize,
    seed: u64,
    epsilon: Option<f64>,
    out: Option<PathBuf>,
    format: OutputFormat,
    tol: f64,
    inputs: Option<String>,
    perturb: bool,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value, got {raw:?}", lineno + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_field<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, UsageError>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| usage(format!("config field {key}={raw}: {e}"))),
    }
}

impl RunConfig {
    fn resolve(opts: &CommonOpts, file: &BTreeMap<String, String>) -> Result<Self, UsageError> {
        for key in file.keys() {
            const KNOWN: &[&str] = &[
                "input", "model", "theta", "phi2", "phi3", "phase-model", "samples",
                "nodes", "partitions", "seed", "epsilon", "out", "format", "tol",
                "inputs", "perturb",
            ];
            if !KNOWN.contains(&key.as_str()) {
                return Err(usage(format!("unknown config field: {key}")));
            }
        }
        let format = match opts
            .format
            .clone()
            .or_else(|| file.get("format").cloned())
            .unwrap_or_else(|| "csv".into())
            .as_str()
        {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(usage(format!("unknown format: {other}"))),
        };
        Ok(RunConfig {
            input: opts
                .input
                .clone()
                .or_else(|| file.get("input").cloned())
                .unwrap_or_else(|| "1,0".into()),
            model: opts
                .model
                .clone()
                .or_else(|| file.get("model").cloned())
                .unwrap_or_else(|| "entangled".into()),
            theta: match opts.theta {
                Some(v) => v,
                None => parse_field(file, "theta")?.unwrap_or(std::f64::consts::FRAC_PI_4),
            },
            phi2: match opts.phi2 {
                Some(v) => v,
                None => parse_field(file, "phi2")?.unwrap_or(0.0),
            },
            phi3: match opts.phi3 {
                Some(v) => v,
                None => parse_field(file, "phi3")?.unwrap_or(0.0),
            },
            phase_model: opts
                .phase_model
                .clone()
                .or_else(|| file.get("phase-model").cloned())
                .unwrap_or_else(|| "matched".into()),
            samples: match opts.samples {
                Some(v) => Some(v),
                None => parse_field(file, "samples")?,
            },
            nodes: match opts.nodes {
                Some(v) => v,
                None => parse_field(file, "nodes")?.unwrap_or(64),
            },
            partitions: match opts.partitions {
                Some(v) => v,
                None => parse_field(file, "partitions")?.unwrap_or(DEFAULT_PARTITIONS),
            },
            seed: match opts.seed {
                Some(v) => v,
                None => parse_field(file, "seed")?.unwrap_or(DEFAULT_SEED),
            },
            epsilon: match opts.epsilon {
                Some(v) => Some(v),
                None => parse_field(file, "epsilon")?,
            },
            out: opts
                .out
                .clone()
                .or_else(|| file.get("out").map(PathBuf::from)),
            format,
            tol: match opts.tol {
                Some(v) => v,
                None => parse_field(file, "tol")?.unwrap_or(1e-12),
            },
            inputs: opts.inputs.clone().or_else(|| file.get("inputs").cloned()),
            perturb: opts.perturb || parse_field(file, "perturb")?.unwrap_or(false),
        })
    }

    /// Render in config-file form; re-parsing yields an equivalent config.
    fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "input = {}", self.input);
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "theta = {}", self.theta);
        let _ = writeln!(s, "phi2 = {}", self.phi2);
        let _ = writeln!(s, "phi3 = {}", self.phi3);
        let _ = writeln!(s, "phase-model = {}", self.phase_model);
        if let Some(n) = self.samples {
            let _ = writeln!(s, "samples = {n}");
        }
        let _ = writeln!(s, "nodes = {}", self.nodes);
        let _ = writeln!(s, "partitions = {}", self.partitions);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(e) = self.epsilon {
            let _ = writeln!(s, "epsilon = {e}");
        }
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {}", out.display());
        }
        let _ = writeln!(
            s,
            "format = {}",
            match self.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            }
        );
        let _ = writeln!(s, "tol = {}", self.tol);
        if let Some(inputs) = &self.inputs {
            let _ = writeln!(s, "inputs = {inputs}");
        }
        if self.perturb {
            let _ = writeln!(s, "perturb = true");
        }
        s
    }

    fn parse_input(&self) -> Result<InputQubit, UsageError> {
        parse_amplitudes(&self.input)
    }

    fn channel(&self) -> Result<ChannelModel, UsageError> {
        match self.model.as_str() {
            "entangled" => Ok(ChannelModel::Entangled),
            "disentangled" => Ok(ChannelModel::Disentangled(PairAxis::new(
                self.theta, self.phi2, self.phi3,
            ))),
            other => Err(usage(format!(
                "unknown model {other:?} (expected entangled or disentangled)"
            ))),
        }
    }

    fn phase_model(&self) -> Result<PhaseModel, UsageError> {
        let s = self.phase_model.as_str();
        if s == "matched" {
            Ok(PhaseModel::Matched)
        } else if s == "independent" {
            Ok(PhaseModel::Independent)
        } else if let Some(delta) = s.strip_prefix("offset:") {
            let delta: f64 = delta
                .parse()
                .map_err(|e| usage(format!("bad offset in phase-model {s:?}: {e}")))?;
            Ok(PhaseModel::Offset(delta))
        } else {
            Err(usage(format!(
                "unknown phase-model {s:?} (expected matched, independent, or offset:<rad>)"
            )))
        }
    }

    fn ensemble_spec(&self) -> Result<EnsembleSpec, UsageError> {
        let method = match self.samples {
            Some(samples) => Method::MonteCarlo {
                samples,
                seed: self.seed,
                partitions: self.partitions,
            },
            None => Method::Quadrature { nodes: self.nodes },
        };
        let spec = EnsembleSpec {
            theta: ThetaPolicy::Fixed(self.theta),
            phase: self.phase_model()?,
            method,
        };
        spec.validated().map_err(|e| usage(e.to_string()))
    }
}

fn parse_amplitudes(s: &str) -> Result<InputQubit, UsageError> {
    let parts: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let parts = parts.map_err(|e| usage(format!("bad input amplitudes {s:?}: {e}")))?;
    let (a, b) = match parts.as_slice() {
        [a, b] => (C64::new(*a, 0.0), C64::new(*b, 0.0)),
        [ar, ai, br, bi] => (C64::new(*ar, *ai), C64::new(*br, *bi)),
        _ => {
            return Err(usage(format!(
                "input must have 2 or 4 comma-separated numbers, got {}",
                parts.len()
            )))
        }
    };
    InputQubit::new(a, b).map_err(|e| usage(format!("bad input amplitudes {s:?}: {e}")))
}

fn emit(config: &RunConfig, text: &str) -> Result<(), UsageError> {
    match &config.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // `{}` prints the shortest decimal that round-trips
    format!("{v}")
}

// --- verify ---------------------------------------------------------------

struct Check {
    name: &'static str,
    residual: f64,
}

fn verify_checks(perturb: bool, seed: u64) -> Vec<Check> {
    use rand::{Rng, SeedableRng};
    let mut checks = Vec::new();
    let meas = bell::build_projectors();

    let mut sum = Operator::zeros(2);
    for (_, p) in meas.iter() {
        sum = sum.add(p).unwrap();
    }
    if perturb {
        let mut bumped = sum.clone();
        bumped.set(0, 0, bumped.get(0, 0) + C64::new(1e-6, 0.0));
        sum = bumped;
    }
    checks.push(Check {
        name: "bell_completeness",
        residual: sum.max_abs_diff(&Operator::identity(2)),
    });

    let mut ortho = 0.0f64;
    for (oi, pi) in meas.iter() {
        for (oj, pj) in meas.iter() {
            let prod = pi.mul(pj).unwrap();
            let expected = if oi == oj { pi.clone() } else { Operator::zeros(2) };
            ortho = ortho.max(prod.max_abs_diff(&expected));
        }
    }
    checks.push(Check {
        name: "bell_orthogonality",
        residual: ortho,
    });

    let mut proj_residual = 0.0f64;
    for (_, p) in meas.iter() {
        proj_residual = proj_residual.max(p.validate(OperatorKind::Projector, 1.0).residual);
        proj_residual = proj_residual.max(p.validate(OperatorKind::Hermitian, 1.0).residual);
    }
    checks.push(Check {
        name: "bell_projector_idempotence",
        residual: proj_residual,
    });

    let mut ket_residual = 0.0f64;
    for (outcome, p) in meas.iter() {
        let ket = outcome.ket();
        ket_residual = ket_residual.max(p.max_abs_diff(&Operator::outer(&ket, &ket)));
    }
    checks.push(Check {
        name: "bell_pauli_vs_ket_form",
        residual: ket_residual,
    });

    let epr = qteleport::channel::epr_pair();
    let singlet = qteleport::channel::singlet_ket();
    checks.push(Check {
        name: "epr_pauli_vs_ket_form",
        residual: epr.max_abs_diff(&Operator::outer(&singlet, &singlet)),
    });

    let mut pauli_residual = 0.0f64;
    let [x, y, z] = pauli::all();
    pauli_residual = pauli_residual.max(x.mul(&x).unwrap().max_abs_diff(&Operator::identity(1)));
    pauli_residual = pauli_residual.max(
        x.mul(&y)
            .unwrap()
            .max_abs_diff(&z.scale(C64::new(0.0, 1.0))),
    );
    checks.push(Check {
        name: "pauli_algebra",
        residual: pauli_residual,
    });

    checks.push(Check {
        name: "epr_reduced_state",
        residual: epr
            .partial_trace(&[2])
            .unwrap()
            .max_abs_diff(&Operator::identity(1).scale_re(0.5)),
    });

    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut overlap_residual = 0.0f64;
    let mut density_residual = 0.0f64;
    for _ in 0..50 {
        let theta = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let matched = qteleport::channel::disentangled_pair(&PairAxis::new(theta, phi, phi));
        overlap_residual = overlap_residual.max((matched.expectation(&singlet).re - 0.5).abs());
        let phi3 = rng.gen_range(0.0..std::f64::consts::TAU);
        let general = qteleport::channel::disentangled_pair(&PairAxis::new(theta, phi, phi3));
        density_residual =
            density_residual.max(general.validate(OperatorKind::Density, 1.0).residual);
    }
    checks.push(Check {
        name: "matched_singlet_overlap",
        residual: overlap_residual,
    });
    checks.push(Check {
        name: "disentangled_density_validity",
        residual: density_residual,
    });

    let mut teleport_residual = 0.0f64;
    for _ in 0..20 {
        let q = InputQubit::new(
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        )
        .unwrap();
        let report = teleport::run(&q, &ChannelModel::Entangled).unwrap();
        for b in &report.branches {
            teleport_residual = teleport_residual.max((b.probability - 0.25).abs());
            teleport_residual = teleport_residual.max((b.fidelity - 1.0).abs());
        }
    }
    checks.push(Check {
        name: "entangled_teleport_exactness",
        residual: teleport_residual,
    });

    let axis = Axis::new(rng.gen_range(0.0..std::f64::consts::FRAC_PI_2), rng.gen_range(0.0..std::f64::consts::TAU));
    let completeness = single_density(axis, Sign::Plus)
        .add(&single_density(axis, Sign::Minus))
        .unwrap()
        .max_abs_diff(&Operator::identity(1));
    checks.push(Check {
        name: "axis_basis_completeness",
        residual: completeness,
    });

    checks
}

fn cmd_verify(config: &RunConfig) -> Result<i32, UsageError> {
    let checks = verify_checks(config.perturb, config.seed);
    let mut all_pass = true;
    let text = match config.format {
        OutputFormat::Csv => {
            let mut s = String::from("# schema: qteleport.verify.v1\ncheck,residual,tolerance,pass\n");
            for c in &checks {
                let pass = c.residual <= config.tol;
                all_pass &= pass;
                let _ = writeln!(s, "{},{},{},{}", c.name, fmt_f64(c.residual), fmt_f64(config.tol), pass);
            }
            s
        }
        OutputFormat::Json => {
            let items: Vec<serde_json::Value> = checks
                .iter()
                .map(|c| {
                    let pass = c.residual <= config.tol;
                    all_pass &= pass;
                    serde_json::json!({
                        "check": c.name,
                        "residual": c.residual,
                        "tolerance": config.tol,
                        "pass": pass,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "schema": "qteleport.verify.v1",
                "checks": items,
            }))
            .expect("serializable");
            s.push('\n');
            s
        }
    };
    emit(config, &text)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILURE })
}

// --- teleport -------------------------------------------------------------

fn branch_csv_rows(report: &TeleportReport) -> String {
    let mut s = String::new();
    for b in &report.branches {
        let _ = write!(s, "{},{},{}", b.outcome, fmt_f64(b.probability), fmt_f64(b.fidelity));
        for r in 0..2 {
            for c in 0..2 {
                let e = b.bob_corrected.get(r, c);
                let _ = write!(s, ",{},{}", fmt_f64(e.re), fmt_f64(e.im));
            }
        }
        s.push('\n');
    }
    s
}

const BRANCH_HEADER: &str = "outcome,probability,fidelity,bob00_re,bob00_im,bob01_re,bob01_im,bob10_re,bob10_im,bob11_re,bob11_im";

fn branch_json(b: &qteleport::teleport::Branch) -> serde_json::Value {
    let entry = |r: usize, c: usize| {
        let e = b.bob_corrected.get(r, c);
        serde_json::json!([e.re, e.im])
    };
    serde_json::json!({
        "outcome": b.outcome.to_string(),
        "probability": b.probability,
        "fidelity": b.fidelity,
        "bob_corrected": [
            [entry(0, 0), entry(0, 1)],
            [entry(1, 0), entry(1, 1)],
        ],
    })
}

fn cmd_teleport(config: &RunConfig) -> Result<i32, UsageError> {
    let input = config.parse_input()?;
    let channel = config.channel()?;
    let report = teleport::run(&input, &channel).map_err(|e| usage(e.to_string()))?;
    let text = match config.format {
        OutputFormat::Csv => format!(
            "# schema: qteleport.teleport.v1\n{BRANCH_HEADER}\n{}",
            branch_csv_rows(&report)
        ),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "schema": "qteleport.teleport.v1",
                "input": [input.a().re, input.a().im, input.b().re, input.b().im],
                "model": config.model,
                "branches": report.branches.iter().map(branch_json).collect::<Vec<_>>(),
            }))
            .expect("serializable");
            s.push('\n');
            s
        }
    };
    emit(config, &text)?;
    Ok(EXIT_OK)
}

// --- ensemble -------------------------------------------------------------

fn cmd_ensemble(config: &RunConfig) -> Result<i32, UsageError> {
    let input = config.parse_input()?;
    let spec = config.ensemble_spec()?;
    let avg = ensemble::average_teleport(&input, &spec).map_err(|e| usage(e.to_string()))?;
    let rate = match config.epsilon {
        Some(eps) => {
            Some(ensemble::detection_rate(eps, &spec).map_err(|e| usage(e.to_string()))?)
        }
        None => None,
    };
    let text = match config.format {
        OutputFormat::Csv => {
            let mut s = String::from("# schema: qteleport.ensemble.v1\nsection,key,value\n");
            let _ = writeln!(s, "meta,theta,{}", fmt_f64(spec.theta.value()));
            let _ = writeln!(s, "meta,phase_model,{}", config.phase_model);
            let _ = writeln!(s, "meta,n_effective,{}", avg.pair.n_effective);
            for b in &avg.branches {
                let _ = writeln!(s, "branch:{},probability,{}", b.outcome, fmt_f64(b.probability));
                let _ = writeln!(s, "branch:{},fidelity,{}", b.outcome, fmt_f64(b.fidelity));
                for r in 0..2 {
                    for c in 0..2 {
                        let e = b.bob_corrected.get(r, c);
                        let _ = writeln!(s, "branch:{},bob{r}{c}_re,{}", b.outcome, fmt_f64(e.re));
                        let _ = writeln!(s, "branch:{},bob{r}{c}_im,{}", b.outcome, fmt_f64(e.im));
                    }
                }
            }
            for r in 0..4 {
                for c in 0..4 {
                    let e = avg.pair.mean_pair_state.get(r, c);
                    let _ = writeln!(s, "mean_pair,e{r}{c}_re,{}", fmt_f64(e.re));
                    let _ = writeln!(s, "mean_pair,e{r}{c}_im,{}", fmt_f64(e.im));
                }
            }
            if let Some(stderr) = &avg.pair.stderr {
                for (i, se) in stderr.iter().enumerate() {
                    let _ = writeln!(s, "stderr,e{}{},{}", i / 4, i % 4, fmt_f64(*se));
                }
            }
            if let Some(rate) = rate {
                let _ = writeln!(s, "detection,epsilon,{}", fmt_f64(config.epsilon.unwrap()));
                let _ = writeln!(s, "detection,rate,{}", fmt_f64(rate));
            }
            s
        }
        OutputFormat::Json => {
            let pair: Vec<Vec<serde_json::Value>> = (0..4)
                .map(|r| {
                    (0..4)
                        .map(|c| {
                            let e = avg.pair.mean_pair_state.get(r, c);
                            serde_json::json!([e.re, e.im])
                        })
                        .collect()
                })
                .collect();
            let mut root = serde_json::json!({
                "schema": "qteleport.ensemble.v1",
                "theta": spec.theta.value(),
                "phase_model": config.phase_model,
                "n_effective": avg.pair.n_effective,
                "branches": avg.branches.iter().map(branch_json).collect::<Vec<_>>(),
                "mean_pair_state": pair,
            });
            if let Some(stderr) = &avg.pair.stderr {
                root["stderr"] = serde_json::json!(stderr);
            }
            if let Some(rate) = rate {
                root["detection_rate"] = serde_json::json!(rate);
                root["epsilon"] = serde_json::json!(config.epsilon.unwrap());
            }
            let mut s = serde_json::to_string_pretty(&root).expect("serializable");
            s.push('\n');
            s
        }
    };
    emit(config, &text)?;
    Ok(EXIT_OK)
}

// --- compare --------------------------------------------------------------

const DEFAULT_GRID: &str = "1,0;0,1;0.7071067811865476,0.7071067811865476;0.6,0.8;0.7071067811865476,0,0,0.7071067811865476";

fn mean_fidelity(report: &TeleportReport) -> f64 {
    report
        .branches
        .iter()
        .map(|b| b.probability * b.fidelity)
        .sum::<f64>()
        / report.total_probability()
}

fn cmd_compare(config: &RunConfig) -> Result<i32, UsageError> {
    let grid_raw = config.inputs.clone().unwrap_or_else(|| DEFAULT_GRID.into());
    let specs: Vec<&str> = grid_raw
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if specs.is_empty() {
        return Err(usage("input grid is empty"));
    }
    let inputs: Result<Vec<InputQubit>, _> = specs.iter().map(|s| parse_amplitudes(s)).collect();
    let inputs = inputs?;

    let matched_spec = EnsembleSpec {
        theta: ThetaPolicy::FixedAverage,
        phase: PhaseModel::Matched,
        method: Method::Quadrature { nodes: config.nodes },
    }
    .validated()
    .map_err(|e| usage(e.to_string()))?;
    let independent_spec = EnsembleSpec {
        phase: PhaseModel::Independent,
        ..matched_spec
    };
    let z_axis = ChannelModel::Disentangled(PairAxis::new(0.0, 0.0, 0.0));

    let mut rows = Vec::new();
    for (spec_str, input) in specs.iter().zip(&inputs) {
        let entangled = mean_fidelity(&teleport::run(input, &ChannelModel::Entangled).map_err(|e| usage(e.to_string()))?);
        let dz = mean_fidelity(&teleport::run(input, &z_axis).map_err(|e| usage(e.to_string()))?);
        let avg_fid = |spec: &EnsembleSpec| -> Result<f64, UsageError> {
            let avg = ensemble::average_teleport(input, spec).map_err(|e| usage(e.to_string()))?;
            let total: f64 = avg.branches.iter().map(|b| b.probability).sum();
            Ok(avg.branches.iter().map(|b| b.probability * b.fidelity).sum::<f64>() / total)
        };
        rows.push((
            spec_str.to_string(),
            entangled,
            dz,
            avg_fid(&matched_spec)?,
            avg_fid(&independent_spec)?,
        ));
    }

    let text = match config.format {
        OutputFormat::Csv => {
            let mut s = String::from(
                "# schema: qteleport.compare.v1\ninput,fid_entangled,fid_disentangled_z,fid_avg_matched,fid_avg_independent\n",
            );
            for (input, e, dz, m, ind) in &rows {
                let _ = writeln!(
                    s,
                    "\"{}\",{},{},{},{}",
                    input,
                    fmt_f64(*e),
                    fmt_f64(*dz),
                    fmt_f64(*m),
                    fmt_f64(*ind)
                );
            }
            s
        }
        OutputFormat::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(input, e, dz, m, ind)| {
                    serde_json::json!({
                        "input": input,
                        "fid_entangled": e,
                        "fid_disentangled_z": dz,
                        "fid_avg_matched": m,
                        "fid_avg_independent": ind,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "schema": "qteleport.compare.v1",
                "rows": items,
            }))
            .expect("serializable");
            s.push('\n');
            s
        }
    };
    emit(config, &text)?;
    Ok(EXIT_OK)
}

// --- entry point ----------------------------------------------------------

pub fn run() -> i32 {
    let args = CliArgs::parse();
    let file_map = match &args.config {
        Some(path) => match parse_config_file(path) {
            Ok(map) => map,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        },
        None => BTreeMap::new(),
    };
    let opts = match &args.command {
        Command::Verify(o) | Command::Teleport(o) | Command::Ensemble(o) | Command::Compare(o) => o,
    };
    let config = match RunConfig::resolve(opts, &file_map) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if args.echo_config {
        print!("{}", config.echo());
        return EXIT_OK;
    }
    let result = match &args.command {
        Command::Verify(_) => cmd_verify(&config),
        Command::Teleport(_) => cmd_teleport(&config),
        Command::Ensemble(_) => cmd_ensemble(&config),
        Command::Compare(_) => cmd_compare(&config),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
