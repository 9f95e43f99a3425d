use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use felp_core::descriptor::{Method, StainMode};
use felp_core::imaging::GradientOperator;
use felp_core::metrics::Metric;
use felp_core::pipeline::{
    cmd_classify, cmd_extract, cmd_report, cmd_search, cmd_stainsep, with_threads, RunConfig,
};
use felp_core::Error;

const DATA_ROOT_ENV: &str = "FELP_DATA_ROOT";

#[derive(Parser, Debug)]
#[command(name = "felp", version, about = "F-ELP histopathology descriptors: stain separation, extraction, retrieval and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Estimate one H&E basis per patient.
    Stainsep,
    /// Compute descriptors for the train, validation and test patches.
    Extract,
    /// kNN retrieval of test patches against the training gallery.
    Search,
    /// Train a linear SVM, tune lambda on validation, score on test.
    Classify,
    /// Merge search and classify results into one report.
    Report,
}

/// Settings given on the command line take precedence over the config file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// TOML file with run settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root of the patch collection (<patient>/<class>/<name>.png).
    #[arg(long, global = true, env = DATA_ROOT_ENV)]
    data_root: Option<PathBuf>,
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Patient split file with [train], [validation] and [test] sections.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    method: Option<Method>,
    /// Window size.
    #[arg(long, short = 'n', global = true)]
    n: Option<usize>,
    /// GRAY or HE.
    #[arg(long, global = true)]
    stain_mode: Option<StainMode>,
    /// Ternary threshold on projection differences.
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    homogeneity_threshold: Option<f64>,
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// central or sobel.
    #[arg(long, global = true, value_parser = parse_gradient)]
    gradient: Option<GradientOperator>,
    /// Comma-separated: L1,L2,COSINE,HUTCHINSON.
    #[arg(long, global = true, value_delimiter = ',')]
    metrics: Option<Vec<Metric>>,
    #[arg(long, global = true, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    #[arg(long, global = true, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fraction of patients per split to use.
    #[arg(long, global = true)]
    subset: Option<f64>,
    /// Patches whose largest channel variance is below this are removed.
    #[arg(long, global = true)]
    artefact_tau: Option<f64>,
    /// Keep patches that are not 50x50.
    #[arg(long, global = true)]
    accept_any_size: bool,
    /// Write H and E map PNGs during stain separation.
    #[arg(long, global = true)]
    export_maps: bool,
    #[arg(long, short = 'j', global = true)]
    threads: Option<usize>,
    /// More log output (repeat for debug).
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn parse_gradient(s: &str) -> Result<GradientOperator, String> {
    match s.to_ascii_lowercase().as_str() {
        "central" => Ok(GradientOperator::Central),
        "sobel" => Ok(GradientOperator::Sobel),
        _ => Err(format!("unknown gradient operator '{s}'")),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn build_config(o: &Overrides) -> Result<RunConfig, Error> {
    let mut c = match &o.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    macro_rules! take {
        ($($field:ident => $target:ident),* $(,)?) => {
            $(if let Some(v) = o.$field.clone() { c.$target = v; })*
        };
    }
    take!(
        method => method, n => n, stain_mode => stain_mode, t => t,
        homogeneity_threshold => homogeneity_threshold, stride => stride,
        gradient => gradient, metrics => metrics, ks => ks, lambdas => lambdas,
        epochs => epochs, seed => seed, subset => subset, artefact_tau => artefact_tau,
        out => output_dir,
    );
    if o.data_root.is_some() {
        c.dataset_root = o.data_root.clone();
    }
    if o.manifest.is_some() {
        c.manifest = o.manifest.clone();
    }
    if o.threads.is_some() {
        c.threads = o.threads;
    }
    c.accept_any_size |= o.accept_any_size;
    c.export_maps |= o.export_maps;
    c.validate()?;
    Ok(c)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidManifest(_) => 2,
        Error::Io { .. } | Error::Image { .. } | Error::Csv { .. } | Error::Parse { .. } => 3,
        Error::EmptyResult(_) | Error::EmptyDescriptor => 4,
        _ => 1,
    }
}

fn run(command: Command, config: &RunConfig) -> Result<(), Error> {
    match command {
        Command::Stainsep => {
            let s = cmd_stainsep(config)?;
            println!(
                "stain bases for {} patients ({} fallback, {} failures)",
                s.patients,
                s.fallback.len(),
                s.failures.len()
            );
            for (p, why) in &s.failures {
                println!("  {p}: {why}");
            }
        }
        Command::Extract => {
            let s = cmd_extract(config)?;
            for (set, n) in &s.rows {
                println!("{set}: {n} descriptors");
            }
            if !s.empty.is_empty() {
                println!("{} patches had no processable window", s.empty.len());
            }
        }
        Command::Search => {
            for r in cmd_search(config)? {
                let s = r.scores();
                println!(
                    "{} k={} {:<10} F1 {:.4} BAC {:.4}",
                    r.variant.label(),
                    r.k,
                    r.metric.title(),
                    s.f1,
                    s.bac
                );
            }
        }
        Command::Classify => {
            let o = cmd_classify(config)?;
            println!(
                "lambda {}: validation BAC {:.4}, test F1 {:.4} BAC {:.4}",
                o.model.lambda, o.val_scores.bac, o.test_scores.f1, o.test_scores.bac
            );
        }
        Command::Report => {
            print!("{}", cmd_report(config)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.opts.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let config = match build_config(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Some(root) = &config.dataset_root {
        let from_env = std::env::var_os(DATA_ROOT_ENV).is_some_and(|v| *v == *root.as_os_str());
        let source = if from_env { DATA_ROOT_ENV } else { "config" };
        eprintln!("dataset root: {} (from {source})", root.display());
    }
    log::info!("output directory: {}", config.output_dir.display());

    let result = with_threads(config.threads, || run(cli.command, &config)).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
