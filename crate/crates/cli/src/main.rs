use std::path::PathBuf;
use std::process::ExitCode;

use biphoton_cli::config::{apply_assignment, from_table, parse_table, preset, set_path};
use biphoton_cli::run::{run_scenario, run_sweep};
use biphoton_cli::{CliError, Result};
use biphoton_core::phasematch::PhiVariant;
use clap::{Args, Parser, Subcommand};

/// Biphoton waveforms from four-wave mixing in a cold atomic ensemble.
#[derive(Parser)]
#[command(name = "biphoton", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a TOML file.
    Run { config: PathBuf },
    /// Run the [sweep] section of a TOML file.
    Sweep { config: PathBuf },
    /// Run a built-in scenario (fig2 or fig3).
    Preset {
        name: String,
        /// Run the preset's sweep instead (requires sweep.parameter via --set).
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Override a config entry, e.g. --set drive.omega_c=4.2*gamma13
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, default_value = ".", global = true)]
    out_dir: PathBuf,
    #[arg(long, global = true)]
    grid_samples: Option<usize>,
    #[arg(long, global = true, value_parser = parse_variant)]
    phi_variant: Option<PhiVariant>,
    #[arg(long, global = true)]
    no_conjugate_stokes: bool,
}

fn parse_variant(s: &str) -> std::result::Result<PhiVariant, String> {
    s.parse()
}

fn read_table(path: &PathBuf) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    parse_table(&text)
}

fn execute(cli: Cli) -> Result<()> {
    let (mut table, sweep) = match &cli.command {
        Command::Run { config } => (read_table(config)?, false),
        Command::Sweep { config } => (read_table(config)?, true),
        Command::Preset { name, sweep } => (preset(name)?, *sweep),
    };
    let c = &cli.common;
    for a in &c.set {
        apply_assignment(&mut table, a)?;
    }
    if let Some(n) = c.grid_samples {
        set_path(&mut table, "grid.samples", toml::Value::Integer(n as i64))?;
    }
    if let Some(v) = c.phi_variant {
        set_path(&mut table, "model.phi_variant", toml::Value::String(v.to_string()))?;
    }
    if c.no_conjugate_stokes {
        set_path(&mut table, "model.conjugate_stokes", toml::Value::Boolean(false))?;
    }
    let cfg = from_table(table)?;
    if sweep {
        let out = run_sweep(&cfg, &c.out_dir)?;
        for r in &out.rows {
            println!(
                "{} R={:e} label={} width={:e}s",
                r.value, r.pair_rate, r.label, r.correlation_width
            );
        }
        println!("wrote {}", out.file.display());
    } else {
        let out = run_scenario(&cfg, &c.out_dir)?;
        let r = &out.report.regime;
        println!("{}: {} (pair rate {:e})", cfg.name, r.label, r.pair_rate.temporal);
        for w in r.warnings.iter().chain(&out.report.histogram_warnings) {
            eprintln!("warning: {w}");
        }
        for f in &out.files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
