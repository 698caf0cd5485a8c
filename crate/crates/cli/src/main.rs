mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Gateway control, infection and Hamiltonian tomography of spin networks.
///
/// Exit status: 0 on success, 2 when the run completed with a negative
/// answer or a refusal (not infecting, not controllable, degenerate spectrum,
/// no convergence), 1 on errors. Set SPINGATE_THREADS to bound the worker
/// pool.
#[derive(Parser)]
#[command(name = "spingate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the infection process from a gateway and print every step.
    Infect {
        #[arg(long)]
        net: PathBuf,
        /// Comma-separated nodes; defaults to the gateway in the network file.
        #[arg(long)]
        gateway: Option<String>,
    },
    /// Find a smallest infecting gateway.
    MinGateway {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Largest N for the exhaustive search.
        #[arg(long, default_value_t = spingate::infection::DEFAULT_EXHAUSTIVE_CAP)]
        cap: usize,
    },
    /// Dynamical Lie algebra of the network with full local control on the gateway.
    Controllable {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        gateway: Option<String>,
        /// Largest N for the closure.
        #[arg(long, default_value_t = spingate::lie::DEFAULT_CLOSURE_CAP)]
        cap: usize,
    },
    /// Whether a two-site coupling is algebraically propagating.
    Propagating {
        #[arg(long, value_enum, default_value_t = Model::Heisenberg)]
        model: Model,
        /// ZZ anisotropy of the Heisenberg coupling.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Coupling strength.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Explicit coupling as WORD:coefficient pairs, e.g. `XX:1,YY:1`.
        #[arg(long, conflicts_with_all = ["model", "delta"])]
        terms: Option<String>,
    },
    /// Fraction of random two-body Hamiltonian pairs that generate u(2^N).
    Universality {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = spingate::lie::DEFAULT_CLOSURE_CAP)]
        cap: usize,
    },
    /// Gateway records, spectral estimation and parameter reconstruction.
    #[command(subcommand)]
    Tomo(Tomo),
    /// Construct a gateway operator that lifts spectral degeneracies.
    Lift {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        gateway: Option<String>,
        /// Use a homogeneous field of this strength on the gateway instead.
        #[arg(long)]
        homogeneous: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimize a gateway-field pulse for a swap on a hopping chain.
    Grape {
        #[command(flatten)]
        grape: GrapeArgs,
        /// Number of sites.
        #[arg(long)]
        n: usize,
        /// `swap:K,L` for exp(−iπh_KL/2) or `logical:M` for logical qubit M.
        #[arg(long)]
        target: String,
        /// Duration; defaults to N².
        #[arg(long)]
        t: Option<f64>,
        /// Comma-separated couplings c_1..c_{N−1}; defaults to all ones.
        #[arg(long)]
        couplings: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// GRAPE at T = N² over a range of chain lengths.
    GrapeScaling {
        #[command(flatten)]
        grape: GrapeArgs,
        /// `START:END:STEP` (inclusive) or a comma-separated list.
        #[arg(long)]
        n: String,
        #[arg(long, value_enum, default_value_t = ScalingTarget::Logical)]
        target: ScalingTarget,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random network, simulated gateway records, Fourier estimate and
    /// reconstruction, with an error report.
    Demo {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gaussian noise per sample.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Probability of each extra edge beyond a random spanning tree.
        #[arg(long, default_value_t = 0.2)]
        extra_edges: f64,
        /// Record length in units of 1/(smallest gap).
        #[arg(long, default_value_t = 40.0)]
        margin: f64,
        /// Write network, signal, spectrum and report files here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Tomo {
    /// Simulate gateway records `e^{iE_0 t}⟨n|U(t)|1⟩` to CSV (t,node,re,im).
    Simulate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        gateway: Option<String>,
        /// Sampling step; defaults to the Nyquist-based recommendation.
        #[arg(long)]
        dt: Option<f64>,
        /// Number of samples; defaults to the resolution-based recommendation.
        #[arg(long)]
        steps: Option<usize>,
        /// Record length in units of 1/(smallest gap) when steps is not given.
        #[arg(long, default_value_t = 40.0)]
        margin: f64,
        /// Gaussian noise per sample and quadrature.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Estimate each quadrature from this many shots instead.
        #[arg(long, conflicts_with = "noise")]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate eigenvalues and gateway overlaps from records.
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of levels to report; fewer resolved lines is a refusal.
        #[arg(long)]
        levels: Option<usize>,
        /// Node the excitation started on; defaults to the smallest node.
        #[arg(long)]
        reference: Option<usize>,
    },
    /// Reconstruct couplings and fields; the network file supplies the
    /// topology, coupling signs and the values errors are measured against.
    Reconstruct {
        #[arg(long = "net-topology")]
        net: PathBuf,
        /// Spectral data from `tomo spectrum` (the default, Fourier mode).
        #[arg(long, required_unless_present = "exact")]
        spectrum: Option<PathBuf>,
        /// Use exact spectral data computed from the network file instead.
        #[arg(long, conflicts_with_all = ["spectrum", "fourier"])]
        exact: bool,
        /// Read the spectrum file (default).
        #[arg(long)]
        fourier: bool,
        /// Gateway for exact mode; defaults to the network file's.
        #[arg(long)]
        gateway: Option<String>,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args)]
struct GrapeArgs {
    /// Piecewise-constant segments; defaults to 10·T.
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target infidelity.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 5000)]
    max_iterations: usize,
    /// Amplitude bound.
    #[arg(long, default_value_t = 10.0)]
    bound: f64,
    #[arg(long, value_enum, default_value_t = AscentKind::Lbfgs)]
    ascent: AscentKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// c(XX + YY + ΔZZ)
    Heisenberg,
    /// c·ZZ
    Ising,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingTarget {
    /// Farthest logical qubit N/2 moved to the control end.
    Logical,
    /// exp(−iπh_{1,N}/2).
    Physical,
}

#[derive(Clone, Copy, ValueEnum)]
enum AscentKind {
    Lbfgs,
    Gradient,
}

/// Result of a subcommand that ran to completion.
pub enum Outcome {
    Success,
    Negative,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SPINGATE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().map_err(|_| format!("SPINGATE_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match commands::run(cli.command) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_refusal() { 2 } else { 1 })
        }
    }
}
