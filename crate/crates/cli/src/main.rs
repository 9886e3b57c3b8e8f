use std::path::PathBuf;
use std::process::ExitCode;

use bcmac_cli::{execute, CliError, Objective, Overrides, ScenarioConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bcmac",
    version,
    about = "Broadcast channel regions and beamforming under linear transmit covariance constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep rate weights and both encoding orders of a two-user region.
    Region(Common),
    /// Max-min SINR balancing.
    Balance(Common),
    /// Power balancing under SINR targets.
    Powermin(Common),
    /// Weighted sum rate under a quadratic constraint via cutting planes.
    Nonlinear(Common),
    /// Parse and check a config without solving.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value = "warn")]
    log_level: log::LevelFilter,
}

fn run(mode: Option<Objective>, c: &Common) -> Result<i32, CliError> {
    let mut cfg = ScenarioConfig::load(&c.config)?;
    cfg.apply(&Overrides { seed: c.seed, tol: c.tol, max_iters: c.max_iters, out: c.out.clone() });
    match mode {
        None => {
            cfg.validate()?;
            let ch = cfg.channel_set()?;
            println!(
                "ok: {} with {} users, {}x{} channels, {} linear constraints",
                cfg.objective.subcommand(),
                ch.users(),
                ch.nr(),
                ch.nt(),
                cfg.constraints.len()
            );
            Ok(0)
        }
        Some(m) => {
            let out = execute(m, &cfg)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            if out.partial {
                eprintln!("some sweep points failed; results are partial");
            }
            Ok(out.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common) = match &cli.command {
        Command::Region(c) => (Some(Objective::WsrRegion), c),
        Command::Balance(c) => (Some(Objective::SinrBalance), c),
        Command::Powermin(c) => (Some(Objective::PowerBalance), c),
        Command::Nonlinear(c) => (Some(Objective::NonlinearWsr), c),
        Command::Validate(c) => (None, c),
    };
    env_logger::Builder::new().filter_level(common.log_level).init();
    match run(mode, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
