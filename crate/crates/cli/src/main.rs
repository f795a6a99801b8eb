use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bs_spectral::Complex64;
use bs_spectral_cli::config::{CheckFamily, CommandName, RoundtripParams, RunConfig, SchrodingerParams, WaParams};
use bs_spectral_cli::error::{CliError, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

/// Spectral multiplicity checks for matrix families and Birman-Schwinger problems.
#[derive(Debug, Parser)]
#[command(name = "bs-spectral", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Multiplicities of the diagonal monomial gallery.
    Gallery,
    /// Jordan, Bessel, Floquet, determinant and Riesz checks for the periodic model.
    Schrodinger {
        #[arg(long, allow_negative_numbers = true)]
        alpha_re: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        alpha_im: Option<f64>,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        ode_steps: Option<usize>,
        #[arg(long, value_enum, value_delimiter = ',')]
        checks: Option<Vec<CheckFamily>>,
    },
    /// Contour index of a family given in the config.
    Index,
    /// Seeded chain transfer round trips.
    BsRoundtrip {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        max_chain_len: Option<usize>,
    },
    /// Determinant windings against the multiplicity difference.
    Wa {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<usize>>,
    },
}

impl Command {
    fn name(&self) -> CommandName {
        match self {
            Command::Gallery => CommandName::Gallery,
            Command::Schrodinger { .. } => CommandName::Schrodinger,
            Command::Index => CommandName::Index,
            Command::BsRoundtrip { .. } => CommandName::BsRoundtrip,
            Command::Wa { .. } => CommandName::Wa,
        }
    }
}

fn store<T: Serialize>(config: &mut RunConfig, p: &T) {
    config.params = serde_json::to_value(p).expect("params serialize");
}

/// Command-line flags take precedence over the config file.
fn apply_flags(config: &mut RunConfig, command: &Command) -> Result<()> {
    match command {
        Command::Gallery | Command::Index => {}
        Command::Schrodinger { alpha_re, alpha_im, modes, grid, ode_steps, checks } => {
            let mut p: SchrodingerParams = config.params()?;
            let m = &mut p.model;
            if alpha_re.is_some() || alpha_im.is_some() {
                m.alpha = Complex64::new(alpha_re.unwrap_or(m.alpha.re), alpha_im.unwrap_or(m.alpha.im));
            }
            m.modes = modes.unwrap_or(m.modes);
            m.grid = grid.unwrap_or(m.grid);
            m.ode_steps = ode_steps.unwrap_or(m.ode_steps);
            if let Some(c) = checks {
                p.checks = c.clone();
            }
            store(config, &p);
        }
        Command::BsRoundtrip { dim, trials, max_chain_len } => {
            let mut p: RoundtripParams = config.params()?;
            p.dim = dim.unwrap_or(p.dim);
            p.trials = trials.unwrap_or(p.trials);
            p.max_chain_len = max_chain_len.unwrap_or(p.max_chain_len);
            store(config, &p);
        }
        Command::Wa { dim, rank, p: p_list } => {
            let mut p: WaParams = config.params()?;
            if dim.is_some() || rank.is_some() {
                if p.problem.is_some() {
                    return Err(CliError::Config("--dim/--rank apply to seeded problems only".into()));
                }
                let mut s = p.seeded.unwrap_or_default();
                s.dim = dim.unwrap_or(s.dim);
                s.rank = rank.unwrap_or(s.rank);
                p.seeded = Some(s);
            }
            if let Some(l) = p_list {
                p.p = l.clone();
            }
            store(config, &p);
        }
    }
    Ok(())
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut config = match (&cli.config, &cli.command) {
        (Some(path), cmd) => {
            let c = RunConfig::load(path)?;
            if let Some(cmd) = cmd {
                if cmd.name() != c.command {
                    return Err(CliError::Config(format!("config is for {} but {} was requested", c.command.as_str(), cmd.name().as_str())));
                }
            }
            c
        }
        (None, Some(cmd)) => RunConfig::empty(cmd.name()),
        (None, None) => return Err(CliError::Config("give a subcommand or --config".into())),
    };
    if let Some(cmd) = &cli.command {
        apply_flags(&mut config, cmd)?;
    }
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.out.is_some() {
        config.output = cli.out.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load(&cli).and_then(|config| {
        let report = bs_spectral_cli::run(&config, cli.jobs)?;
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        match &config.output {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io { path: path.clone(), source: e })?,
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })?,
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            let s = report.summary;
            eprintln!("{}: {} of {} cases passed ({:.2} s)", report.command, s.passed, s.total, report.wall_time_s);
            for c in report.cases.iter().filter(|c| !c.pass) {
                eprintln!("  FAIL {}: {}", c.id, c.error.as_deref().unwrap_or(&c.anchor));
            }
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
