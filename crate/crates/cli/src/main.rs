use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use qmc_basket_cli::config::ExperimentConfig;
use qmc_basket_cli::{dump_points, run, Format, RunError, Task};

/// Price and hedge Asian basket options by (randomized) quasi-Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "qmc-basket", version)]
struct Args {
    /// JSON experiment configuration; omitted fields take benchmark defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// price, delta, effdim or dump.
    #[arg(long)]
    task: Option<Task>,

    #[arg(long)]
    seed: Option<u64>,

    /// Report file, or output directory for `dump`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv or json.
    #[arg(long)]
    format: Option<Format>,

    /// 25 monitoring dates and 1024 points per replication.
    #[arg(long)]
    quick: bool,

    /// Also write replication 0 of the first sampler's point set to this file.
    #[arg(long)]
    dump_points: Option<PathBuf>,

    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &Args) -> Result<ExperimentConfig, RunError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(task) = args.task {
        config.task = task;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output.path = Some(out.clone());
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    if args.quick {
        config = config.quick()?;
    }
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn execute(args: &Args) -> Result<(), RunError> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    }
    let config = load(args)?;
    if config.task == Task::Dump && config.output.path.is_none() {
        return Err(RunError::Config("the dump task needs --out <directory>".into()));
    }
    if let Some(path) = &args.dump_points {
        write(path, &dump_points(&config)?)?;
    }
    let output = run(&config)?;
    print!("{}", output.summary);
    match (&config.output.path, config.task) {
        (Some(dir), Task::Dump) => {
            for (name, contents) in &output.files {
                write(&dir.join(name), contents)?;
            }
            let ext = match config.output.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            write(&dir.join(format!("manifest.{ext}")), &output.report)?;
        }
        (Some(path), _) => write(path, &output.report)?,
        (None, _) => print!("{}", output.report),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
