use std::path::PathBuf;
use std::process::ExitCode;

use cctskit::costsurface::SejMode;
use cctskit::pipeline::{emit_plots, run, Stage};
use cctskit::scenario::Scenario;
use cctskit::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cctskit", version, about = "CO2 capture, transport and storage hub design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's SEJ mode (off, sej3, sej8).
    #[arg(long)]
    sej: Option<SejMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the scenario's).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Capture amounts and costs per facility.
    Capture(RunArgs),
    /// Screen candidate storage sites.
    Screen(RunArgs),
    /// Monte Carlo storage characterization.
    Characterize(RunArgs),
    /// Routing cost surface and SEJ layer.
    Surface(RunArgs),
    /// Candidate pipeline network.
    Route(RunArgs),
    /// Optimal shared network.
    SolveShared(RunArgs),
    /// Dedicated one-pipe-per-source baseline.
    SolveDedicated(RunArgs),
    /// Shared versus dedicated metrics.
    Compare(RunArgs),
    /// Multi-period buildout.
    Phase(RunArgs),
    /// Every stage in order.
    All(RunArgs),
    /// Re-emit plot series from existing artifacts.
    Plots(RunArgs),
    /// Write the mini-gulf fixture inputs and scenario into a directory.
    Fixture {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(args: &RunArgs) -> Result<Scenario, Error> {
    let mut sc = Scenario::load(&args.scenario)?;
    if let Some(mode) = args.sej {
        sc.sej.mode = mode;
        sc.validate()?;
    }
    if let Some(seed) = args.seed {
        sc.seed = seed;
    }
    if let Some(out) = &args.out {
        sc.output_dir = std::path::absolute(out).map_err(|e| Error::io(out, e))?;
    }
    Ok(sc)
}

fn execute(cmd: Command) -> Result<(), Error> {
    let (stage, args) = match cmd {
        Command::Fixture { out } => {
            cctskit::fixtures::write_mini_gulf(&out)?;
            println!("wrote mini-gulf fixture to {}", out.display());
            return Ok(());
        }
        Command::Plots(args) => {
            for p in emit_plots(&load(&args)?)? {
                println!("{}", p.display());
            }
            return Ok(());
        }
        Command::Capture(a) => (Stage::Capture, a),
        Command::Screen(a) => (Stage::Screen, a),
        Command::Characterize(a) => (Stage::Characterize, a),
        Command::Surface(a) => (Stage::Surface, a),
        Command::Route(a) => (Stage::Route, a),
        Command::SolveShared(a) => (Stage::SolveShared, a),
        Command::SolveDedicated(a) => (Stage::SolveDedicated, a),
        Command::Compare(a) => (Stage::Compare, a),
        Command::Phase(a) => (Stage::Phase, a),
        Command::All(a) => (Stage::All, a),
    };
    let sc = load(&args)?;
    let summary = run(&sc, stage)?;
    for s in &summary.stages {
        println!("{s}: ok");
    }
    for (k, v) in &summary.stats {
        println!("{k}: {v}");
    }
    println!("outputs in {}", sc.output_path().display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Infeasible(report)) => {
            eprintln!("infeasible: {}", serde_json::to_string(&report).unwrap_or_default());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
