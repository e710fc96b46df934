//! `tnbe`: compile tensor networks into block-encoding unitaries, check the
//! result against dense contraction, build QUBO networks and report
//! resources.
//!
//! Exit codes: `0` success, `1` invalid input, `2` the network is the zero
//! operator, `3` a dense oracle would exceed the size limit, `4` verification
//! failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnbe::io::{network_from_json, network_to_json, outcome_from_json, outcome_to_json, qubo_from_json};
use tnbe::qubo::{register_sweep_mpo, slot_requirement, suggest_order, tensor_graph, tensor_sum_mpo, OrderHeuristic};
use tnbe::verify::{verify_block_encoding_with, VerifyOptions};
use tnbe::{
    compile, linalg::spectral_norm, CompileOptions, Error, PadPolicy, ResourceReport, SweepOutcome,
    VerificationReport, C64, DEFAULT_DENSE_LIMIT,
};

const EXIT_INVALID: u8 = 1;
const EXIT_ZERO: u8 = 2;
const EXIT_TOO_LARGE: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "tnbe", version, about = "Tensor-network block-encoding compiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a network file into a sequence of local unitaries.
    Compile {
        network: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Padding of the singular core when the output side is larger.
        #[arg(long, default_value = "identity")]
        pad: PadPolicy,
        /// Explicit processing order, comma separated (greedy when omitted).
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        /// Keep bond dimensions as given instead of padding them to powers of d.
        #[arg(long)]
        no_pad_bonds: bool,
    },
    /// Check a compilation against the dense contraction of its network.
    Verify {
        network: PathBuf,
        result: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = tnbe::verify::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, env = "TNBE_DENSE_LIMIT", default_value_t = DEFAULT_DENSE_LIMIT)]
        dense_limit: usize,
        /// Number of random input states to report success probabilities for.
        #[arg(long, default_value_t = 0)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a tensor network for a QUBO / Ising operator.
    Qubo {
        qubo: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "sweep")]
        method: Method,
        /// Qubit order for the register sweep.
        #[arg(long, default_value = "natural")]
        order: OrderHeuristic,
        #[arg(long, env = "TNBE_DENSE_LIMIT", default_value_t = DEFAULT_DENSE_LIMIT)]
        dense_limit: usize,
    },
    /// Summarize the resources of a compilation.
    Report {
        result: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, env = "TNBE_DENSE_LIMIT", default_value_t = DEFAULT_DENSE_LIMIT)]
        dense_limit: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sweep,
    Sum,
    Graph,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::OracleTooLarge { .. }) => EXIT_TOO_LARGE,
        Some(Error::ZeroOperator { .. }) => EXIT_ZERO,
        _ => EXIT_INVALID,
    }
}

fn cmd_compile(
    network: &Path,
    output: Option<&Path>,
    pad: PadPolicy,
    order: Option<Vec<usize>>,
    no_pad_bonds: bool,
) -> anyhow::Result<u8> {
    let tn = network_from_json(&read(network)?)?;
    let outcome = compile(&tn, &CompileOptions { policy: pad, pad_bonds: !no_pad_bonds, order })?;
    write(output, &outcome_to_json(&outcome, tn.d))?;
    match outcome {
        SweepOutcome::Encoded(r) => {
            eprintln!("compiled {} operators, gamma {}", r.ops.len(), r.gamma);
            Ok(0)
        }
        SweepOutcome::ZeroOperator { vertex, .. } => {
            eprintln!("zero operator: vertex {vertex} is identically zero, gamma 0");
            Ok(EXIT_ZERO)
        }
    }
}

fn random_state(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn cmd_verify(
    network: &Path,
    result: &Path,
    output: Option<&Path>,
    tol: f64,
    dense_limit: usize,
    states: usize,
    seed: u64,
) -> anyhow::Result<u8> {
    let tn = network_from_json(&read(network)?)?;
    let outcome = outcome_from_json(&read(result)?)?;
    let report = match &outcome {
        SweepOutcome::Encoded(r) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = r.layout.physical_dim();
            let states = (0..states).map(|_| random_state(&mut rng, dim)).collect();
            verify_block_encoding_with(&tn, r, &VerifyOptions { tol, dense_limit, states })?
        }
        SweepOutcome::ZeroOperator { .. } => {
            let h = tnbe::contract::contract_dense_with_limit(&tn, dense_limit)?;
            let block_error = spectral_norm(&h.matrix);
            VerificationReport {
                block_error,
                unitarity_errors: Vec::new(),
                gamma: 0.0,
                tolerance: tol,
                success: Vec::new(),
                pass: block_error <= tol,
            }
        }
    };
    write(output, &tnbe::io::to_json(&report))?;
    eprintln!("block error {:e} (tolerance {:e}): {}", report.block_error, tol, if report.pass { "pass" } else { "FAIL" });
    Ok(if report.pass { 0 } else { EXIT_VERIFY_FAILED })
}

fn cmd_qubo(
    path: &Path,
    output: Option<&Path>,
    method: Method,
    order: OrderHeuristic,
    dense_limit: usize,
) -> anyhow::Result<u8> {
    let q = qubo_from_json(&read(path)?)?;
    let tn = match method {
        Method::Sweep => {
            let order = suggest_order(&q, order);
            let plan = slot_requirement(&q, &order)?;
            eprintln!("order {:?}, slots s = {}, bond dimension {}", plan.order, plan.s, plan.s + 2);
            for (qubit, slot) in &plan.slots {
                eprintln!("  qubit {qubit} -> slot {slot}");
            }
            register_sweep_mpo(&q, &order)?
        }
        Method::Sum => tensor_sum_mpo(&q)?,
        Method::Graph => tensor_graph(&q, None, dense_limit)?,
    };
    eprintln!("{} vertices, {} edges", tn.vertices.len(), tn.edges.len());
    write(output, &network_to_json(&tn))?;
    Ok(0)
}

fn cmd_report(result: &Path, format: Format, dense_limit: usize) -> anyhow::Result<u8> {
    let outcome = outcome_from_json(&read(result)?)?;
    let report = match &outcome {
        SweepOutcome::Encoded(r) => match ResourceReport::with_success_bound(r, dense_limit) {
            Ok(rep) => rep,
            Err(Error::OracleTooLarge { .. }) => ResourceReport::from_result(r),
            Err(e) => return Err(e.into()),
        },
        SweepOutcome::ZeroOperator { .. } => ResourceReport::from_outcome(&outcome),
    };
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", tnbe::io::to_json(&report)),
    }
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Compile { network, output, pad, order, no_pad_bonds } => {
            cmd_compile(&network, output.as_deref(), pad, order, no_pad_bonds)
        }
        Command::Verify { network, result, output, tol, dense_limit, states, seed } => {
            cmd_verify(&network, &result, output.as_deref(), tol, dense_limit, states, seed)
        }
        Command::Qubo { qubo, output, method, order, dense_limit } => {
            cmd_qubo(&qubo, output.as_deref(), method, order, dense_limit)
        }
        Command::Report { result, format, dense_limit } => cmd_report(&result, format, dense_limit),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
