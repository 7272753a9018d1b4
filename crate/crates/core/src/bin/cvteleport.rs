use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cvteleport::config::parse_config;
use cvteleport::run::{run, Command, RunOptions};
use cvteleport::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Spectrum,
    G2,
    Design,
    Simulate,
    Sweep,
    Compare,
}

/// Broadband CV teleportation of light: spectra, g2, design, Monte Carlo.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo seed; overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Spectrum => Command::Spectrum,
        Cmd::G2 => Command::G2,
        Cmd::Design => Command::Design,
        Cmd::Simulate => Command::Simulate,
        Cmd::Sweep => Command::Sweep,
        Cmd::Compare => Command::Compare,
    };
    let result = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Io { path: cli.config.clone(), source: e })
        .and_then(|text| parse_config(&text))
        .and_then(|cfg| {
            let opts = RunOptions { out: cli.out, seed: cli.seed, threads: cli.threads };
            run(command, &cfg, &opts)
        });
    match result {
        Ok(outcome) => {
            for r in &outcome.compare {
                println!(
                    "{:<16} {:<18} mc {:>12.6e} ± {:<10.3e} analytic {:>12.6e} z {:>7.2}",
                    r.quantity, r.label, r.mc, r.se, r.analytic, r.z
                );
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.z_failed {
                eprintln!("error: some |z| exceeds {}", cvteleport::run::Z_LIMIT);
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
