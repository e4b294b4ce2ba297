use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use patchsim::experiments::{
    run_cmi_scan, run_mpoee_bench, run_patch_sample, run_validate, write_csv, ExperimentConfig, ExperimentKind,
};
use patchsim::Error;

#[derive(Parser)]
#[command(name = "patchsim", version, about = "Noisy random circuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean CMI against region separation (CSV).
    CmiScan(Common),
    /// Central-cut operator entanglement against depth and bond dimension (CSV).
    MpoeeBench(Common),
    /// Bitstrings from the patching sampler, one per line, plus a JSON sidecar.
    PatchSample(Common),
    /// Validation suites; prints a JSON verdict.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

fn load(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if config.experiment != kind {
        return Err(Error::InvalidArgument(format!(
            "config is for {:?}, not {kind:?}",
            config.experiment
        )));
    }
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    if let Some(r) = common.realizations {
        config.realizations = r;
    }
    if common.threads.is_some() {
        config.threads = common.threads;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Returns `Ok(false)` when validation ran but failed.
fn execute(command: Command) -> Result<bool, Error> {
    match command {
        Command::CmiScan(c) => {
            let config = load(&c, ExperimentKind::CmiScan)?;
            let rows = run_cmi_scan(&config)?;
            write_csv(&rows, open_output(config.output.as_deref())?)?;
        }
        Command::MpoeeBench(c) => {
            let config = load(&c, ExperimentKind::MpoeeBench)?;
            let rows = run_mpoee_bench(&config)?;
            write_csv(&rows, open_output(config.output.as_deref())?)?;
        }
        Command::PatchSample(c) => {
            let config = load(&c, ExperimentKind::PatchSample)?;
            let result = run_patch_sample(&config)?;
            let mut out = open_output(config.output.as_deref())?;
            result.write_lines(&mut out)?;
            out.flush()?;
            if let Some(path) = &config.output {
                let file = File::create(sidecar_path(path))?;
                serde_json::to_writer_pretty(file, &result.sidecar)?;
            }
        }
        Command::Validate(c) => {
            let config = load(&c, ExperimentKind::Validate)?;
            let report = run_validate(&config)?;
            let mut out = open_output(config.output.as_deref())?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
            for suite in &report.suites {
                eprintln!("{}: {}", suite.suite, if suite.passed { "pass" } else { "FAIL" });
                for check in suite.checks.iter().filter(|c| !c.passed) {
                    eprintln!("  {}: {}", check.name, check.summary);
                }
            }
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_capacity() {
                ExitCode::from(EXIT_CAPACITY)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
