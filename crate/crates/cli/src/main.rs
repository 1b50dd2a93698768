//! `hmix`: spectrum sweeps, effective parameters, dynamics and ramp
//! experiments for the harmonically mixed two-mode system.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "hmix", version, about = "Floquet spectra and localization under two-frequency driving")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quasienergy branches along A/ω
    Spectrum(Flags),
    /// Averaged coupling F̄, bias δ and effective splitting
    Perturb(Flags),
    /// Populations of the full equations over time
    Dynamics(Flags),
    /// Final populations after an amplitude ramp, per phase
    Ramp(Flags),
    /// Time-space symmetries of the drive, per phase
    Symmetry(Flags),
    /// Linear quasienergies against the monodromy matrix
    Validate(Flags),
}

#[derive(Args, Clone)]
struct Flags {
    /// key = value file; flags take precedence
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Drive-amplitude grid, single value or start:stop:step
    #[arg(long = "A-over-omega", value_name = "GRID", allow_hyphen_values = true)]
    a_over_omega: Option<String>,
    /// Relative phase, single value or start:stop:step (accepts pi, -pi/2, 3*pi/4)
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long)]
    chi: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    v: Option<String>,
    /// Second-harmonic amplitude ratio
    #[arg(long)]
    f: Option<String>,
    /// Fixed Fourier cutoff (adaptive when absent)
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    #[arg(long)]
    damping: Option<String>,
    /// Integration step (default T/500)
    #[arg(long)]
    dt: Option<String>,
    #[arg(long = "t-end")]
    t_end: Option<String>,
    /// Ramp rate of the amplitude
    #[arg(long)]
    alpha: Option<String>,
    /// End of the ramp
    #[arg(long)]
    tf: Option<String>,
    /// Averaging window after the ramp
    #[arg(long = "dt-avg")]
    dt_avg: Option<String>,
    /// Initial state for dynamics: 1, 2 or ground
    #[arg(long)]
    init: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// Also write a JSON mirror (to stdout when no --out)
    #[arg(long)]
    json: bool,
    /// Add quadrature cross-check columns
    #[arg(long)]
    validate: bool,
    /// Preset f=1/4, ω=10, v=1, χ=0.4, α=0.01, tf=2400, dt-avg=400
    #[arg(long)]
    paper: bool,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let opts = [
            ("A-over-omega", &self.a_over_omega),
            ("phi", &self.phi),
            ("chi", &self.chi),
            ("omega", &self.omega),
            ("v", &self.v),
            ("f", &self.f),
            ("N", &self.n),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("damping", &self.damping),
            ("dt", &self.dt),
            ("t-end", &self.t_end),
            ("alpha", &self.alpha),
            ("tf", &self.tf),
            ("dt-avg", &self.dt_avg),
            ("init", &self.init),
            ("out", &self.out),
        ];
        for (k, v) in opts {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        }
        if self.json {
            out.push(("json", "true".into()));
        }
        if self.validate {
            out.push(("validate", "true".into()));
        }
        out
    }
}

fn build_config(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(command);
    if flags.paper {
        cfg.apply_paper();
    }
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
        cfg.command = command;
    }
    for (k, v) in flags.pairs() {
        cfg.set(k, &v)?;
    }
    cfg.check()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, flags) = match &cli.command {
        Cmd::Spectrum(f) => (Command::Spectrum, f),
        Cmd::Perturb(f) => (Command::Perturb, f),
        Cmd::Dynamics(f) => (Command::Dynamics, f),
        Cmd::Ramp(f) => (Command::Ramp, f),
        Cmd::Symmetry(f) => (Command::Symmetry, f),
        Cmd::Validate(f) => (Command::Validate, f),
    };
    let cfg = build_config(command, flags)?;
    let table = commands::run(&cfg)?;
    output::emit(&cfg, &table)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hmix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
