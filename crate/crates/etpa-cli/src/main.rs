use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use etpa::alloc::CountingAllocator;
use etpa::units::FreqConvention;
use etpa_cli::scans;
use etpa_cli::spec::{Engine, RunSpec, Scan};
use etpa_cli::{CliError, Result};

#[global_allocator]
static ALLOC: CountingAllocator = CountingAllocator;

/// Two-photon vibronic excitation by entangled and uncorrelated photon pairs.
#[derive(Parser, Debug)]
#[command(name = "etpa", version)]
struct Cli {
    /// Run spec (TOML). Flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated σ_s/σ ratios; the token `uncorrelated` adds the uncorrelated case.
    #[arg(long, global = true, value_name = "LIST")]
    sigma_s: Option<String>,
    /// Excited level in two-photon resonance.
    #[arg(long, global = true, value_name = "ALPHA")]
    target: Option<usize>,
    #[arg(long, global = true, value_enum)]
    engine: Option<Engine>,
    /// Exact solver on a desk-sized grid.
    #[arg(long, global = true)]
    desk_scale: bool,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// How quoted frequencies become energies: h or hbar.
    #[arg(long, global = true, value_name = "h|hbar")]
    freq_convention: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Population traces per σ_s, optionally checked against the exact solver.
    Populations,
    /// Selectivity of each resonance target.
    Selectivity,
    /// Schmidt spectra and entanglement measures.
    Schmidt,
    /// Transition matrices Θ.
    Theta,
    /// Target steady population against Schmidt number and entropy.
    SteadyVsK,
    /// Exact versus analytic cost.
    Benchmark,
    /// Every scan above into subdirectories of --out.
    ReproduceAll,
}

fn parse_sigma_s(list: &str, spec: &mut RunSpec) -> Result<()> {
    spec.field.uncorrelated = false;
    spec.field.sigma_s.clear();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if tok == "uncorrelated" {
            spec.field.uncorrelated = true;
        } else {
            let r = tok.parse::<f64>().map_err(|_| CliError::Config(format!("bad σ_s ratio {tok:?}")))?;
            spec.field.sigma_s.push(r);
        }
    }
    Ok(())
}

fn build_spec(cli: &Cli) -> Result<RunSpec> {
    let mut spec = match &cli.config {
        Some(p) => RunSpec::load(p)?,
        None => RunSpec::default(),
    };
    if let Some(list) = &cli.sigma_s {
        parse_sigma_s(list, &mut spec)?;
    }
    if let Some(t) = cli.target {
        spec.field.target = t;
        spec.field.k0_ev = None;
    }
    if let Some(e) = cli.engine {
        spec.engine = e;
    }
    if cli.desk_scale {
        spec.desk_scale = true;
    }
    if let Some(o) = &cli.out {
        spec.out = o.clone();
    }
    if let Some(c) = &cli.freq_convention {
        spec.freq_convention =
            FreqConvention::parse(c).ok_or_else(|| CliError::Config(format!("unknown frequency convention {c:?}")))?;
    }
    spec.validate()?;
    Ok(spec)
}

fn run(cli: &Cli) -> Result<()> {
    let spec = build_spec(cli)?;
    let scan = match cli.command {
        Some(Command::ReproduceAll) => {
            let bundles = scans::reproduce_all(&spec)?;
            println!("wrote {} bundles under {}", bundles.len(), spec.out.display());
            return Ok(());
        }
        Some(Command::Populations) => Scan::Populations,
        Some(Command::Selectivity) => Scan::SelectivityResonance,
        Some(Command::Schmidt) => Scan::Schmidt,
        Some(Command::Theta) => Scan::TransitionMatrix,
        Some(Command::SteadyVsK) => Scan::SteadyVsEntanglement,
        Some(Command::Benchmark) => Scan::Benchmark,
        None => spec.scan,
    };
    let bundle = match scan {
        Scan::Populations => scans::run_populations(&spec)?,
        Scan::SelectivityResonance => scans::run_selectivity_scan(&spec)?,
        Scan::Schmidt => scans::run_schmidt(&spec)?,
        Scan::TransitionMatrix => scans::run_transition_matrix(&spec)?,
        Scan::SteadyVsEntanglement => scans::run_steady_vs_entanglement(&spec)?,
        Scan::Benchmark => scans::run_benchmark(&spec)?,
    };
    println!("wrote {} files to {}", bundle.manifest.files.len(), bundle.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("etpa: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
