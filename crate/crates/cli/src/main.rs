//! `qfractal`: render quantum fractals and the Sierpinski reference IFS,
//! sweep boost velocities, and run the numerical self-checks.
//!
//! Exit status: 0 on success, 1 on runtime failure, 2 on usage errors.

mod commands;
mod config;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfractal_core::checks::CheckOptions;

use commands::CliError;
use config::{parse_alphas, Origin, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "qfractal",
    version,
    about = "Quantum fractals on the sphere from place-dependent Möbius boosts",
    args_conflicts_with_subcommands = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Without a subcommand the flags describe a render.
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the chaos game, bin the points and write a PGM image.
    Render(RunArgs),
    /// Render one image per boost velocity.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated velocities, e.g. 0.4,0.5,0.6.
        #[arg(long, required = true)]
        alphas: String,
    },
    /// Run the oracle and invariant checks.
    Check {
        /// Sample count for every sampled check.
        #[arg(long)]
        samples: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Run settings. Every flag has a config-file key of the same name
/// (`burn-in` may be written `burn_in`); flags win over the file.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// quantum | sierpinski
    #[arg(long)]
    mode: Option<String>,
    /// cube8 | octa6 | custom
    #[arg(long)]
    preset: Option<String>,
    /// Boost velocity in (0, 1).
    #[arg(long)]
    alpha: Option<String>,
    /// Custom generator "nx ny nz alpha"; repeatable, replaces file generators.
    #[arg(long, allow_hyphen_values = true)]
    generator: Vec<String>,
    /// Points emitted after burn-in, per chain.
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Independent chains with seeds seed, seed+1, ...; grids are merged.
    #[arg(long)]
    seeds: Option<String>,
    /// Grid size WIDTHxHEIGHT.
    #[arg(long)]
    res: Option<String>,
    /// lambda | uniform
    #[arg(long)]
    probability: Option<String>,
    /// log | linear
    #[arg(long)]
    tone: Option<String>,
    /// upper | lower | both
    #[arg(long)]
    hemisphere: Option<String>,
    /// Put grid row 0 at the bottom of the image.
    #[arg(long)]
    flip: bool,
    /// Write plain-text PGM (P2).
    #[arg(long)]
    plain: bool,
    /// Write every emitted point as text to this file.
    #[arg(long)]
    dump_points: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let usage = |e: config::ConfigError| CliError::Usage(e.0);
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            config.apply_file(&text, path).map_err(usage)?;
        }
        if !self.generator.is_empty() {
            config.generators.clear();
        }
        let pairs = [
            ("mode", &self.mode),
            ("preset", &self.preset),
            ("alpha", &self.alpha),
            ("points", &self.points),
            ("burn_in", &self.burn_in),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("res", &self.res),
            ("probability", &self.probability),
            ("tone", &self.tone),
            ("hemisphere", &self.hemisphere),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, v, &Origin::Flag).map_err(usage)?;
            }
        }
        for g in &self.generator {
            config.set("generator", g, &Origin::Flag).map_err(usage)?;
        }
        config.flip |= self.flip;
        config.plain |= self.plain;
        if let Some(p) = &self.dump_points {
            config.dump_points = Some(p.clone());
        }
        if let Some(p) = &self.out {
            config.out = p.clone();
        }
        config.validate().map_err(usage)?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        None => commands::render(&cli.run.resolve()?, &mut out),
        Some(Command::Render(args)) => commands::render(&args.resolve()?, &mut out),
        Some(Command::Sweep { run, alphas }) => {
            let alphas = parse_alphas(&alphas).map_err(|e| CliError::Usage(format!("--alphas: {e}")))?;
            commands::sweep(&run.resolve()?, &alphas, &mut out)
        }
        Some(Command::Check { samples, seed, inject_fault }) => {
            let samples = samples
                .map(|s| {
                    s.replace('_', "")
                        .parse::<f64>()
                        .ok()
                        .filter(|v| *v >= 1.0 && v.fract() == 0.0)
                        .map(|v| v as u64)
                        .ok_or_else(|| CliError::Usage(format!("--samples: `{s}` is not a positive integer")))
                })
                .transpose()?;
            commands::check(&CheckOptions { samples, seed, inject_fault }, &mut out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfractal: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
