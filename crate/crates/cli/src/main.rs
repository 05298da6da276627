use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use trailforge::fixtures::FixtureParams;
use trailforge_cli::commands::{self, RenderKind, RunContext, SweepKind};
use trailforge_cli::config::RunConfig;

#[derive(Parser)]
#[command(name = "trailforge", version, about = "Synthetic trajectory generation over potential fields")]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, default_value = "config.txt")]
    config: PathBuf,
    /// Overrides the run seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "TRAILFORGE_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Output directory for artifacts and tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seeded subset size for the multiplier sweep.
    #[arg(long, global = true)]
    max_permutations: Option<usize>,
    /// Caps the number of start cells.
    #[arg(long, global = true)]
    max_starts: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the world, corpus landscape and spacing model.
    Build,
    /// Generate trajectories for every start, seed, distance and mode.
    Generate,
    /// Sweep alpha values or tag multipliers.
    Sweep {
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Paired significance tests and summary tables for a generate run.
    Eval,
    /// Render SVG views of the artifacts.
    Render {
        #[arg(long, value_enum, default_value_t = RenderArg::All)]
        what: RenderArg,
        /// Paths file or search dump to render.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Write a synthetic city and a matching configuration into --out.
    Fixture {
        #[arg(long, default_value_t = 120)]
        rows: usize,
        #[arg(long, default_value_t = 120)]
        cols: usize,
        #[arg(long, default_value_t = 150)]
        pois: usize,
        #[arg(long, default_value_t = 7)]
        fixture_seed: u64,
        #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
        lat: f64,
        #[arg(long, default_value_t = 9.0, allow_negative_numbers = true)]
        lon: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Alpha,
    Multipliers,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderArg {
    All,
    Heatmap,
    Landscape,
    Paths,
    Search,
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut c = RunConfig::from_file(&cli.config)?;
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<()> {
    let ctx = RunContext {
        out: cli.out.clone(),
        workers: cli.workers,
        max_starts: cli.max_starts,
        max_permutations: cli.max_permutations,
    };
    match &cli.command {
        Command::Build => {
            let s = commands::build(&config(&cli)?, &ctx)?;
            println!("built world: {} road cells, {} POIs, {} corpus paths", s.road_cells, s.pois, s.corpus);
        }
        Command::Generate => {
            let s = commands::generate(&config(&cli)?, &ctx)?;
            println!("generated {} trajectories, {} failures", s.ok, s.failed);
        }
        Command::Sweep { kind } => {
            let kind = match kind {
                KindArg::Alpha => SweepKind::Alpha,
                KindArg::Multipliers => SweepKind::Multipliers,
            };
            let s = commands::sweep(&config(&cli)?, &ctx, kind)?;
            println!(
                "{} sweep: {} records, {} failures, {} curves in {}",
                kind.name(),
                s.records,
                s.failed,
                s.curves,
                s.dir.display()
            );
        }
        Command::Eval => {
            let n = commands::eval(&ctx)?;
            println!("wrote {n} test rows");
        }
        Command::Render { what, input } => {
            let kind = match what {
                RenderArg::All => RenderKind::All,
                RenderArg::Heatmap => RenderKind::Heatmap,
                RenderArg::Landscape => RenderKind::Landscape,
                RenderArg::Paths => RenderKind::Paths,
                RenderArg::Search => RenderKind::Search,
            };
            for p in commands::render(&ctx, kind, input.as_deref())? {
                println!("{}", p.display());
            }
        }
        Command::Fixture { rows, cols, pois, fixture_seed, lat, lon } => {
            let params = FixtureParams {
                rows: *rows,
                cols: *cols,
                pois: *pois,
                seed: *fixture_seed,
                ..FixtureParams::default()
            };
            commands::fixture(&cli.out, params, *lat, *lon)?;
            println!("wrote fixture to {}", cli.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
