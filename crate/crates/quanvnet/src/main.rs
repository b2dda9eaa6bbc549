use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quanvnet::experiment::{
    cmd_gen_filters, cmd_precompute, cmd_report, cmd_train, ExperimentConfig, ExperimentError,
};

#[derive(Parser)]
#[command(
    name = "quanvnet",
    about = "Quanvolutional neural network experiments on MNIST"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding the MNIST IDX files
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output directory for banks, caches, logs, and reports
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated models: cnn,qnn,random
    #[arg(long)]
    models: Option<String>,
    /// Comma-separated quanvolutional filter counts to sweep
    #[arg(long)]
    filter_counts: Option<String>,
    /// Patch side length (qubits = n*n)
    #[arg(long)]
    n: Option<usize>,
    /// Per-qubit-pair probability of a two-qubit gate
    #[arg(long)]
    connection_probability: Option<f64>,
    /// Pixel threshold for the |1> encoding
    #[arg(long)]
    threshold: Option<f64>,
    /// Quanvolution stride
    #[arg(long)]
    stride: Option<usize>,
    /// Training images per class
    #[arg(long)]
    train_per_class: Option<usize>,
    /// Test images per class
    #[arg(long)]
    test_per_class: Option<usize>,
    /// Training iterations
    #[arg(long)]
    iterations: Option<u64>,
    /// Log cadence in iterations
    #[arg(long)]
    eval_every: Option<u64>,
    /// Mini-batch size
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Number of seeds to sweep per run
    #[arg(long)]
    seeds: Option<usize>,
    /// Master seed for the whole pipeline
    #[arg(long)]
    master_seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the random filter-circuit banks
    GenFilters(CommonArgs),
    /// Precompute quanvolved feature caches for the configured subsets
    Precompute(CommonArgs),
    /// Train the configured models, writing one CSV log per run
    Train(CommonArgs),
    /// Merge CSV logs into a comparison report with plots
    Report(CommonArgs),
}

fn build_config(args: &CommonArgs) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    let mut set = |key: &str, value: Option<String>| -> Result<(), ExperimentError> {
        if let Some(v) = value {
            cfg.apply_key(key, &v).map_err(ExperimentError::Usage)?;
        }
        Ok(())
    };
    set("data_dir", args.data_dir.as_ref().map(|p| p.display().to_string()))?;
    set("out_dir", args.out_dir.as_ref().map(|p| p.display().to_string()))?;
    set("models", args.models.clone())?;
    set("filter_counts", args.filter_counts.clone())?;
    set("n", args.n.map(|v| v.to_string()))?;
    set(
        "connection_probability",
        args.connection_probability.map(|v| v.to_string()),
    )?;
    set("threshold", args.threshold.map(|v| v.to_string()))?;
    set("stride", args.stride.map(|v| v.to_string()))?;
    set("train_per_class", args.train_per_class.map(|v| v.to_string()))?;
    set("test_per_class", args.test_per_class.map(|v| v.to_string()))?;
    set("iterations", args.iterations.map(|v| v.to_string()))?;
    set("eval_every", args.eval_every.map(|v| v.to_string()))?;
    set("batch_size", args.batch_size.map(|v| v.to_string()))?;
    set("learning_rate", args.learning_rate.map(|v| v.to_string()))?;
    set("seeds", args.seeds.map(|v| v.to_string()))?;
    set("master_seed", args.master_seed.map(|v| v.to_string()))?;
    Ok(cfg)
}

fn run() -> Result<(), ExperimentError> {
    let cli = Cli::parse();
    match &cli.command {
        Cmd::GenFilters(args) => cmd_gen_filters(&build_config(args)?),
        Cmd::Precompute(args) => cmd_precompute(&build_config(args)?),
        Cmd::Train(args) => cmd_train(&build_config(args)?),
        Cmd::Report(args) => cmd_report(&build_config(args)?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
