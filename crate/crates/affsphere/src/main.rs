use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use affsphere::{run, Command, Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "affsphere", version, about = "Cubic differentials, Wang's equation and convex RP² structures")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV and SVG output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ray and sweep tasks.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Grid nodes across (radial domains: radial nodes).
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Residual tolerance of the Wang solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Solve Wang's equation and write the field table.
    Solve,
    /// Develop the polygon of a polynomial cubic differential.
    Polygon,
    /// Boundary holonomy at a third-order pole.
    Holonomy,
    /// Classify the flat end at a pole.
    ClassifyEnd,
    /// Compare center values of complete disk solutions with the decay bounds.
    Bounds,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Polygon => Command::Polygon,
        Cmd::Holonomy => Command::Holonomy,
        Cmd::ClassifyEnd => Command::ClassifyEnd,
        Cmd::Bounds => Command::Bounds,
    };
    let loaded = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::new()),
    };
    let result = loaded.and_then(|mut cfg| {
        cfg.apply(&Overrides { out: cli.out.clone(), resolution: cli.resolution, tol: cli.tol });
        let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        run(command, &cfg, threads)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
