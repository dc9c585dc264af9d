use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tickgate::{init_threads, run_experiment, ExperimentKind, ExperimentManifest, HResult, HarnessError};
use tickgate_core::gatesim::Method;

#[derive(Parser)]
#[command(name = "tickgate", version, about = "Quantum clock gate-frequency experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Experiment manifest (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the manifest's.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<Method>,
    /// Worker threads; falls back to TICKGATE_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the derived clock parameters.
    Model,
    /// Run one gate program through a single cycle.
    Gates,
    /// Frequency-versus-energy sweep.
    Sweep,
    /// Bus lane read/write fidelities.
    Bus,
    /// Self-oscillator renewal cycles.
    Cycles,
    /// Audit stored reports against the frequency bounds.
    Bounds {
        /// Report files or directories; added to the manifest's list.
        reports: Vec<PathBuf>,
    },
    /// Compare dimensionless outputs at two cycle times.
    Invariance,
    /// Run whatever experiment the manifest names.
    Run,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: tickgate_core::Error| e.to_string())
}

fn manifest(cli: &Cli) -> HResult<ExperimentManifest> {
    let kind = match &cli.cmd {
        Cmd::Model => Some(ExperimentKind::ModelInfo),
        Cmd::Gates => Some(ExperimentKind::GateRun),
        Cmd::Sweep => Some(ExperimentKind::ScalingSweep),
        Cmd::Bus => Some(ExperimentKind::BusLane),
        Cmd::Cycles => Some(ExperimentKind::OscillatorCycles),
        Cmd::Bounds { .. } => Some(ExperimentKind::BoundsAudit),
        Cmd::Invariance => Some(ExperimentKind::T0Invariance),
        Cmd::Run => None,
    };
    let mut m = match (&cli.global.config, kind) {
        (Some(p), _) => ExperimentManifest::from_path(p)?,
        (None, Some(k)) => ExperimentManifest::new(k),
        (None, None) => return Err(HarnessError::config("--config", "`run` needs a manifest")),
    };
    if let Some(k) = kind {
        m.kind = k;
    }
    if let Cmd::Bounds { reports } = &cli.cmd {
        m.bounds.reports.extend(reports.iter().cloned());
    }
    if let Some(s) = cli.global.seed {
        m.seed = s;
    }
    if let Some(o) = &cli.global.out {
        m.output_dir = o.clone();
    }
    if let Some(me) = cli.global.method {
        m.run.method = me;
    }
    m.validate()?;
    Ok(m)
}

fn run(cli: &Cli) -> HResult<Vec<String>> {
    let m = manifest(cli)?;
    init_threads(cli.global.threads);
    let out = run_experiment(&m)?;
    for p in out.artifacts.write(&m.output_dir)? {
        println!("wrote {}", p.display());
    }
    for l in &out.artifacts.log {
        println!("{l}");
    }
    Ok(out.violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) if v.is_empty() => ExitCode::SUCCESS,
        Ok(v) => {
            for x in &v {
                eprintln!("invariant violated: {x}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(s) = e.suggestion() {
                eprintln!("hint: {s}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
