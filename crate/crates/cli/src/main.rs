use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use inclab_cli::artifact;
use inclab_cli::config::{closure, PipelineConfig, Stage};
use inclab_cli::pipeline::run_pipeline;

#[derive(Parser)]
#[command(name = "inclab", version, about = "Paraboloid incidence constructions: build, count, transform, sparsify")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// key=value config file; flags below override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; every randomized stage derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for artifacts and reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = library default). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Verb {
    /// Build the truncated paraboloid point set.
    Build,
    /// Additive energy via the sum-multiplicity table.
    Energy,
    /// Sum-defined hyperplane family with multiplicities.
    Family,
    /// Dyadic multiplicity histogram.
    Histogram,
    /// Select the richest dyadic level.
    Select,
    /// Max points shared by two selected hyperplanes.
    K2t,
    /// Dualize the point-hyperplane configuration.
    Dualize,
    /// Translate and invert the dual configuration into spheres.
    Invert,
    /// Shear onto graph hypersurfaces.
    Shear,
    /// Random thinning with an acceptance certificate.
    Sparsify,
    /// Fit the energy growth exponent across sizes.
    Fit,
    /// Run the stage list from the config.
    Pipeline,
}

impl Verb {
    fn stages(&self, cfg: &PipelineConfig) -> Vec<Stage> {
        let wanted: &[Stage] = match self {
            Verb::Build => &[],
            Verb::Energy => &[Stage::Energy],
            Verb::Family => &[Stage::Family],
            Verb::Histogram => &[Stage::Histogram],
            Verb::Select => &[Stage::Select],
            Verb::K2t => &[Stage::K2t],
            Verb::Dualize => &[Stage::Dualize],
            Verb::Invert => &[Stage::Invert],
            Verb::Shear => &[Stage::Shear],
            Verb::Sparsify => &[Stage::Sparsify],
            Verb::Fit => &[Stage::Fit],
            Verb::Pipeline => return cfg.stages.clone(),
        };
        closure(wanted)
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = artifact::read_to_string(path)?;
            PipelineConfig::parse(&text)
                .with_context(|| format!("config {}", path.display()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    cfg.stages = cli.verb.stages(&cfg);

    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .context("setting thread pool size")?;
    }

    let report = run_pipeline(&cfg)?;
    for line in &report.human {
        println!("{line}");
    }
    println!("report: {}", report.out.join("report.txt").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
