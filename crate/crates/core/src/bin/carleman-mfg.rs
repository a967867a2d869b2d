use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carleman_mfg::config::ExperimentConfig;
use carleman_mfg::runner;

#[derive(Parser)]
#[command(
    version,
    about = "Carleman estimates and unique continuation for a mean-field-game system"
)]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set grid.n1=65`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory (overrides the file and CARLEMAN_MFG_OUTPUT_DIR).
    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve the forward-backward system for the configured case.
    Solve,
    /// Sweep one Carleman estimate over s.
    Carleman,
    /// Verify unique continuation on one window and run the reconstruction.
    Uc,
    /// Repeat the window verification over a grid of t0.
    SweepT0,
    /// Manufactured-solution refinement ladder.
    Mms,
    /// Print the resolved configuration and its hash.
    Config,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.overrides.clone();
    if let Some(dir) = &cli.output_dir {
        overrides.push(format!(
            "output_dir={}",
            toml::Value::String(dir.display().to_string())
        ));
    }
    let cfg = match ExperimentConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Config => {
            print!("# config-hash: {}\n{}", cfg.hash(), cfg.to_toml());
            return ExitCode::SUCCESS;
        }
        Command::Solve => runner::cmd_solve(&cfg),
        Command::Carleman => runner::cmd_carleman(&cfg),
        Command::Uc => runner::cmd_uc(&cfg),
        Command::SweepT0 => runner::cmd_sweep_t0(&cfg),
        Command::Mms => runner::cmd_mms(&cfg),
    };
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("verdict: fail");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
