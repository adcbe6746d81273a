//! `foresight`: floorplan generation, exploration traces, datasets,
//! evaluation and navigation runs from the command line.

mod cmd;
mod config;
mod error;
mod plans;
mod predictor;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cmd::{dataset, eval, explore, gen, nav, render, report};
use config::{env_seed, resolve, ConfigFile, Section};
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "foresight", version, about = "Semantic floorplan simulation and evaluation")]
struct Cli {
    /// TOML config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate floorplans.
    Gen(gen::GenFlags),
    /// Write observation frames for each plan.
    Explore(explore::ExploreFlags),
    /// Build an SSDS training dataset.
    Dataset(dataset::DatasetFlags),
    /// Score a predictor on a dataset.
    Eval(eval::EvalFlags),
    /// Run navigation episodes.
    Nav(nav::NavFlags),
    /// Draw a raster or dataset layer as PPM.
    Render(render::RenderFlags),
    /// Summarise an episodes.tsv file.
    Report(report::ReportFlags),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayFlags),
}

#[derive(clap::Args, Serialize, Debug)]
struct ReplayFlags {
    /// manifest.toml written by a previous run.
    #[serde(skip)]
    manifest: PathBuf,
    /// Write to this location instead of the recorded one.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn execute<S: Section, F: Serialize>(
    file: Option<&ConfigFile>,
    seed: Option<u64>,
    flags: &F,
    run: fn(&S) -> CliResult<()>,
) -> CliResult<()> {
    let cfg: S = resolve(file, seed, flags)?;
    run(&cfg)
}

fn replay(flags: &ReplayFlags) -> CliResult<()> {
    let file = ConfigFile::load(&flags.manifest)?;
    let name = file
        .command()
        .ok_or_else(|| CliError::config(format!("{} records no command", flags.manifest.display())))?
        .to_string();
    let f = Some(&file);
    match name.as_str() {
        gen::GenSection::NAME => execute(f, None, flags, gen::run),
        explore::ExploreSection::NAME => execute(f, None, flags, explore::run),
        dataset::DatasetSection::NAME => execute(f, None, flags, dataset::run),
        eval::EvalSection::NAME => execute(f, None, flags, eval::run),
        nav::NavSection::NAME => execute(f, None, flags, nav::run),
        render::RenderSection::NAME => execute(f, None, flags, render::run),
        report::ReportSection::NAME => execute(f, None, flags, report::run),
        other => Err(CliError::config(format!("cannot replay unknown command `{other}`"))),
    }
}

fn real_main(cli: Cli) -> CliResult<()> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let jobs = match cli.jobs {
        Some(n) => Some(n),
        None => file.as_ref().map(|f| f.jobs()).transpose()?.flatten(),
    };
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("jobs: {e}")))?;
    }
    let f = file.as_ref();
    match &cli.command {
        Command::Replay(flags) => replay(flags),
        command => {
            let seed = env_seed()?;
            match command {
                Command::Gen(x) => execute(f, seed, x, gen::run),
                Command::Explore(x) => execute(f, seed, x, explore::run),
                Command::Dataset(x) => execute(f, seed, x, dataset::run),
                Command::Eval(x) => execute(f, seed, x, eval::run),
                Command::Nav(x) => execute(f, seed, x, nav::run),
                Command::Render(x) => execute(f, seed, x, render::run),
                Command::Report(x) => execute(f, seed, x, report::run),
                Command::Replay(_) => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("foresight: {e}");
            ExitCode::from(e.category as u8)
        }
    }
}
