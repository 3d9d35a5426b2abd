use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use strobe::cli::{exit_code, run, Command};
use strobe::config::ExperimentConfig;
use strobe::Error;

#[derive(Parser)]
#[command(
    name = "strobe",
    version,
    about = "Squeezing-enhanced stroboscopic readout: sweeps, fits and dynamics"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// JSON experiment configuration (defaults to the experiment values).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout if absent); reports go next to it as .json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run the oracle cross-checks and exit with 3 if any fails.
    #[arg(long, global = true)]
    check: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Dephasing rate over squeezer gain and phase.
    DephaseSweep,
    /// Measurement rate over squeezer gain and phase.
    MeasSweep,
    /// Quantum efficiency from the two rate models.
    Eta,
    /// SNR versus integration time and the long-time improvement.
    SnrCurve,
    /// Effective qubit lifetime versus DPA gain.
    Lifetime,
    /// Histograms of synthetic mean homodyne voltages with mixture fits.
    Histograms,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::DephaseSweep => Command::DephaseSweep,
            Cmd::MeasSweep => Command::MeasSweep,
            Cmd::Eta => Command::Eta,
            Cmd::SnrCurve => Command::SnrCurve,
            Cmd::Lifetime => Command::Lifetime,
            Cmd::Histograms => Command::Histograms,
        }
    }
}

fn execute(args: &Args) -> Result<bool, Error> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let out = pool.install(|| run(args.command.into(), &cfg, args.check))?;
    let report = out.report.as_ref().map(serde_json::to_string_pretty).transpose()?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &out.csv)?;
            if let Some(r) = &report {
                std::fs::write(path.with_extension("json"), r)?;
            }
        }
        None => {
            print!("{}", out.csv);
            if let Some(r) = &report {
                eprintln!("{r}");
            }
        }
    }
    for c in &out.checks {
        eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(out.all_checks_pass())
}

fn main() -> ExitCode {
    env_logger::init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
