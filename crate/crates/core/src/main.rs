use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ugate::experiments::{
    cmd_converge, cmd_fig6, cmd_fig7, cmd_gate_check, cmd_plan, cmd_rwa_check, write_rows,
    ExperimentConfig, ExperimentError, SweepRow,
};

/// Plan and simulate the multi-target geometric phase gate.
#[derive(Debug, Parser)]
#[command(name = "ugate", version)]
struct Cli {
    /// TOML configuration; built-in defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV destination for sweeps (stdout when neither this nor the config sets one).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Fock cutoff per cavity.
    #[arg(long, global = true, value_name = "N")]
    cutoff: Option<usize>,
    /// RK4 step in ns.
    #[arg(long, global = true, value_name = "NS")]
    step: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve couplings, gate time and drive; print the operating conditions.
    Plan,
    /// Compare the effective-model propagator with the ideal gate.
    GateCheck,
    /// Lossless fidelity sweep over detuning and crosstalk.
    Fig6,
    /// Lossy fidelity sweep over detuning.
    Fig7,
    /// Cutoff and step convergence of the lossy optimum.
    Converge,
    /// Rotating-wave validity versus drive strength.
    RwaCheck,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.numerics.workers = w;
    }
    if let Some(step) = cli.step {
        cfg.numerics.step_ns = Some(step);
    }
    if let Some(c) = cli.cutoff {
        match cli.command {
            Command::GateCheck => cfg.gate_check.cutoff = c,
            Command::RwaCheck => cfg.rwa.cutoff = c,
            _ => cfg.numerics.cutoff = c,
        }
    }
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit_rows(cfg: &ExperimentConfig, rows: &[SweepRow]) -> Result<(), ExperimentError> {
    let io_err = |e: io::Error| ExperimentError::Io(e.to_string());
    match &cfg.output.path {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_rows(rows, &mut w)?;
            w.flush().map_err(io_err)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_rows(rows, io::stdout().lock())?,
    }
    let failed = rows.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        return Err(ExperimentError::Numeric(format!(
            "{failed} of {} grid points failed",
            rows.len()
        )));
    }
    Ok(())
}

/// Prints a report; a closed pipe on stdout is not an error.
fn show(report: &impl std::fmt::Display) -> Result<(), ExperimentError> {
    match write!(io::stdout().lock(), "{report}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(ExperimentError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), ExperimentError> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Plan => show(&cmd_plan(&cfg)?)?,
        Command::GateCheck => show(&cmd_gate_check(&cfg)?)?,
        Command::Fig6 => emit_rows(&cfg, &cmd_fig6(&cfg)?)?,
        Command::Fig7 => emit_rows(&cfg, &cmd_fig7(&cfg)?)?,
        Command::Converge => show(&cmd_converge(&cfg)?)?,
        Command::RwaCheck => show(&cmd_rwa_check(&cfg)?)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
