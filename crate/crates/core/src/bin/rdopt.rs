use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rdopt::config::PipelineConfig;
use rdopt::pipeline::{Manifest, Pipeline, Stage};
use rdopt::Error;

#[derive(Parser)]
#[command(name = "rdopt", version, about = "Surrogate-assisted multi-objective robust design optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build and evaluate the DOE, split train/test.
    Doe(Common),
    /// Fit one surrogate per objective and report NRMSE.
    Fit(Common),
    /// Sobol screening and uncertain-variable selection.
    Sensitivity(Common),
    /// Run every configured formulation on the surrogates.
    Optimize(Common),
    /// Posterior perturbation of the fronts and zone comparisons.
    Analyze(Common),
    /// Write the SVG figures.
    Report(Common),
    /// Full pipeline, or everything from `--stage` on.
    Run {
        #[command(flatten)]
        common: Common,
        /// Stage to resume from (doe, fit, sensitivity, optimize, analyze, report).
        #[arg(long)]
        stage: Option<String>,
    },
    /// List the registered benchmark problems.
    Problems,
}

fn pipeline(c: &Common) -> Result<Pipeline, Error> {
    let mut cfg = PipelineConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    Pipeline::new(cfg)
}

fn summarize(m: &Manifest) {
    for s in &m.stages {
        println!("{:<12} {:>9.2} s  {} files", s.stage.name(), s.seconds, s.files.len());
    }
    for (k, v) in &m.nrmse {
        println!("nrmse {k}: {v:.4} %");
    }
    if !m.uncertain.is_empty() {
        println!("uncertain: {}", m.uncertain.join(", "));
    }
    for (k, v) in &m.fronts {
        println!("front {k}: {v} designs");
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let single = |c: &Common, s: Stage| -> Result<(), Error> {
        let p = pipeline(c)?;
        summarize(&p.run_stage(s)?);
        Ok(())
    };
    match cli.command {
        Command::Doe(c) => single(&c, Stage::Doe),
        Command::Fit(c) => single(&c, Stage::Fit),
        Command::Sensitivity(c) => single(&c, Stage::Sensitivity),
        Command::Optimize(c) => single(&c, Stage::Optimize),
        Command::Analyze(c) => single(&c, Stage::Analyze),
        Command::Report(c) => single(&c, Stage::Report),
        Command::Run { common, stage } => {
            let start = stage.as_deref().map(str::parse).transpose()?.unwrap_or(Stage::Doe);
            let p = pipeline(&common)?;
            let m = p.run_from(start)?;
            summarize(&m);
            println!("artifacts in {}", p.out_dir().display());
            Ok(())
        }
        Command::Problems => {
            for e in rdopt::problems::registry() {
                println!("{:<16} d={:<3} m={}  {}", e.name, e.dim, e.objectives, e.description);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
