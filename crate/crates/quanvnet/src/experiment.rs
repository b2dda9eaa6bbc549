//! Experiment runner: filter-bank generation, feature precomputation,
//! three-model training with CSV logs, and report assembly.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

use crate::circuitgen::{
    generate_filter_bank, load_filter_bank, save_filter_bank, CircuitGenError, FilterGenConfig,
};
use crate::dataio::{
    fnv1a, load_mnist, precompute_features, subset, DataError, Dataset, FeatureCache,
};
use crate::neuralnet::{train, ModelName, ModelSpec, NnError, TrainingLog};
use crate::quanvolution::{
    build_lookup_table, random_nonlinear_filter, Normalization, Padding, QuanvError, QuanvFilter,
};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Usage(_) => 1,
            ExperimentError::Data(_) => 2,
            ExperimentError::Numerical(_) => 3,
        }
    }
}

impl From<DataError> for ExperimentError {
    fn from(e: DataError) -> Self {
        ExperimentError::Data(e.to_string())
    }
}

impl From<CircuitGenError> for ExperimentError {
    fn from(e: CircuitGenError) -> Self {
        ExperimentError::Data(e.to_string())
    }
}

impl From<QuanvError> for ExperimentError {
    fn from(e: QuanvError) -> Self {
        ExperimentError::Data(e.to_string())
    }
}

impl From<NnError> for ExperimentError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::Diverged { .. } => ExperimentError::Numerical(e.to_string()),
            other => ExperimentError::Usage(other.to_string()),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub models: Vec<ModelName>,
    pub filter_counts: Vec<usize>,
    pub n: usize,
    pub connection_probability: f64,
    pub threshold: f64,
    pub stride: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub iterations: u64,
    pub eval_every: u64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seeds: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_dir: PathBuf::from("data/mnist"),
            out_dir: PathBuf::from("runs"),
            models: vec![ModelName::Cnn, ModelName::Qnn, ModelName::Random],
            filter_counts: vec![1, 5, 10, 25],
            n: 3,
            connection_probability: 0.5,
            threshold: 0.0,
            stride: 1,
            train_per_class: 500,
            test_per_class: 100,
            iterations: 1000,
            eval_every: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            seeds: 3,
            master_seed: 7,
        }
    }
}

impl ExperimentConfig {
    /// Parse a `key value` (or `key = value`) config file; `#` starts a
    /// comment. Unknown keys are usage errors.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ExperimentError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ExperimentError::Usage(format!("cannot read config {path:?}: {e}")))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let cleaned = line.replacen('=', " ", 1);
            let mut parts = cleaned.splitn(2, char::is_whitespace);
            let key = parts.next().unwrap().trim();
            let value = parts
                .next()
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| {
                    ExperimentError::Usage(format!(
                        "config line {}: missing value for {key:?}",
                        lineno + 1
                    ))
                })?;
            self.apply_key(key, value).map_err(|msg| {
                ExperimentError::Usage(format!("config line {}: {msg}", lineno + 1))
            })?;
        }
        Ok(())
    }

    pub fn apply_key(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value {value:?} for {key}"))
        }
        match key {
            "data_dir" => self.data_dir = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "models" => {
                self.models = value
                    .split(',')
                    .map(|m| m.trim().parse())
                    .collect::<Result<_, _>>()?
            }
            "filter_counts" => {
                self.filter_counts = value
                    .split(',')
                    .map(|v| parse::<usize>(key, v.trim()))
                    .collect::<Result<_, _>>()?
            }
            "n" => self.n = parse(key, value)?,
            "connection_probability" => self.connection_probability = parse(key, value)?,
            "threshold" => self.threshold = parse(key, value)?,
            "stride" => self.stride = parse(key, value)?,
            "train_per_class" => self.train_per_class = parse(key, value)?,
            "test_per_class" => self.test_per_class = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "eval_every" => self.eval_every = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "master_seed" => self.master_seed = parse(key, value)?,
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    pub fn bank_dir(&self, count: usize) -> PathBuf {
        self.out_dir.join("filters").join(format!("bank_{count:03}"))
    }

    pub fn cache_path(&self, model: ModelName, count: usize, split: &str) -> PathBuf {
        self.out_dir
            .join("cache")
            .join(format!("{}_f{count:03}_{split}.feat", model.as_str()))
    }

    pub fn log_path(&self, model: ModelName, count: usize, seed_index: usize) -> PathBuf {
        let name = match model {
            ModelName::Cnn => format!("cnn_seed{seed_index}.csv"),
            _ => format!("{}_f{count:03}_seed{seed_index}.csv", model.as_str()),
        };
        self.out_dir.join("logs").join(name)
    }

    pub fn run_seed(&self, model: ModelName, count: usize, seed_index: usize) -> u64 {
        let id = match model {
            ModelName::Cnn => format!("cnn/seed{seed_index}"),
            _ => format!("{}/f{count}/seed{seed_index}", model.as_str()),
        };
        splitmix64(self.master_seed ^ fnv1a(id.as_bytes()))
    }

    fn gen_config(&self) -> FilterGenConfig {
        FilterGenConfig {
            n: self.n,
            connection_probability: self.connection_probability,
            seed: self.master_seed,
        }
    }
}

/// Load the train/test MNIST files and draw the configured balanced subsets.
pub fn load_subsets(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset), ExperimentError> {
    let train_full = load_mnist(
        &cfg.data_dir.join("train-images-idx3-ubyte"),
        &cfg.data_dir.join("train-labels-idx1-ubyte"),
    )?;
    let test_full = load_mnist(
        &cfg.data_dir.join("t10k-images-idx3-ubyte"),
        &cfg.data_dir.join("t10k-labels-idx1-ubyte"),
    )?;
    let train = subset(&train_full, cfg.train_per_class, splitmix64(cfg.master_seed ^ 1));
    let test = subset(&test_full, cfg.test_per_class, splitmix64(cfg.master_seed ^ 2));
    Ok((train, test))
}

/// The RANDOM model's fixed layer: seeded uniform tables, one per channel.
pub fn random_bank(cfg: &ExperimentConfig, count: usize) -> Vec<QuanvFilter> {
    (0..count)
        .map(|i| {
            random_nonlinear_filter(
                splitmix64(cfg.master_seed ^ fnv1a(format!("random-table/{i}").as_bytes())),
                cfg.n,
            )
        })
        .collect()
}

/// Load a persisted circuit bank and materialize its lookup tables.
pub fn load_quanv_bank(
    cfg: &ExperimentConfig,
    count: usize,
) -> Result<Vec<QuanvFilter>, ExperimentError> {
    let dir = cfg.bank_dir(count);
    if !dir.exists() {
        return Err(ExperimentError::Data(format!(
            "filter bank {} not found; run `quanvnet gen-filters` first",
            dir.display()
        )));
    }
    let (_, circuits) = load_filter_bank(&dir)?;
    circuits
        .iter()
        .map(|c| build_lookup_table(c, cfg.threshold).map_err(ExperimentError::from))
        .collect()
}

pub fn cmd_gen_filters(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let gen_cfg = cfg.gen_config();
    for &count in &cfg.filter_counts {
        let bank = generate_filter_bank(&gen_cfg, count)?;
        let dir = cfg.bank_dir(count);
        save_filter_bank(&dir, &gen_cfg, &bank)?;
        let gate_counts: Vec<usize> = bank.iter().map(|c| c.gates.len()).collect();
        let min = gate_counts.iter().min().unwrap();
        let max = gate_counts.iter().max().unwrap();
        let mean = gate_counts.iter().sum::<usize>() as f64 / bank.len() as f64;
        println!(
            "bank {}: {count} circuits, gates min {min} / mean {mean:.1} / max {max}",
            dir.display()
        );
    }
    Ok(())
}

fn precompute_one(
    cfg: &ExperimentConfig,
    model: ModelName,
    count: usize,
    bank: &[QuanvFilter],
    split: &str,
    ds: &Dataset,
) -> Result<FeatureCache, ExperimentError> {
    let path = cfg.cache_path(model, count, split);
    let existed = path.exists();
    let cache = precompute_features(
        &path,
        ds,
        bank,
        cfg.stride,
        Padding::SameZero,
        Normalization::ScaledUnit,
    )?;
    let shape = cache.features.shape();
    let verb = if existed { "reused" } else { "wrote" };
    println!(
        "{verb} {} ({}x{}x{}x{})",
        path.display(),
        shape[0],
        shape[1],
        shape[2],
        shape[3]
    );
    Ok(cache)
}

pub fn cmd_precompute(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let (train_ds, test_ds) = load_subsets(cfg)?;
    for &count in &cfg.filter_counts {
        for model in [ModelName::Qnn, ModelName::Random] {
            if !cfg.models.contains(&model) {
                continue;
            }
            let bank = match model {
                ModelName::Qnn => load_quanv_bank(cfg, count)?,
                ModelName::Random => random_bank(cfg, count),
                ModelName::Cnn => unreachable!(),
            };
            precompute_one(cfg, model, count, &bank, "train", &train_ds)?;
            precompute_one(cfg, model, count, &bank, "test", &test_ds)?;
        }
    }
    Ok(())
}

pub fn log_to_csv(log: &TrainingLog) -> String {
    let mut out = String::from("iteration,test_accuracy,train_logloss\n");
    for r in &log.records {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6}",
            r.iteration, r.test_accuracy, r.train_logloss
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<TrainingLog, ExperimentError> {
    let mut records = Vec::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(ExperimentError::Data(format!("bad CSV row {line:?}")));
        }
        records.push(crate::neuralnet::LogRecord {
            iteration: fields[0]
                .parse()
                .map_err(|_| ExperimentError::Data(format!("bad CSV row {line:?}")))?,
            test_accuracy: fields[1]
                .parse()
                .map_err(|_| ExperimentError::Data(format!("bad CSV row {line:?}")))?,
            train_logloss: fields[2]
                .parse()
                .map_err(|_| ExperimentError::Data(format!("bad CSV row {line:?}")))?,
        });
    }
    Ok(TrainingLog { records })
}

fn model_spec(cfg: &ExperimentConfig, model: ModelName, count: usize) -> ModelSpec {
    let mut spec = ModelSpec::new(model, count);
    spec.learning_rate = cfg.learning_rate;
    spec.batch_size = cfg.batch_size;
    spec.iterations = cfg.iterations;
    spec.eval_every = cfg.eval_every;
    spec
}

/// Train one (model, filter_count, seed) run from already-prepared tensors.
pub fn train_one(
    cfg: &ExperimentConfig,
    model: ModelName,
    count: usize,
    seed_index: usize,
    train_images: &Tensor,
    train_labels: &[u8],
    test_images: &Tensor,
    test_labels: &[u8],
) -> Result<TrainingLog, ExperimentError> {
    let spec = model_spec(cfg, model, count);
    let seed = cfg.run_seed(model, count, seed_index);
    Ok(train(
        &spec,
        train_images,
        train_labels,
        test_images,
        test_labels,
        seed,
    )?)
}

fn load_cached_features(
    cfg: &ExperimentConfig,
    model: ModelName,
    count: usize,
    split: &str,
) -> Result<Tensor, ExperimentError> {
    let path = cfg.cache_path(model, count, split);
    if !path.exists() {
        return Err(ExperimentError::Data(format!(
            "feature cache {} not found; run `quanvnet precompute` first",
            path.display()
        )));
    }
    Ok(crate::dataio::load_feature_cache(&path, None)?.features)
}

pub fn cmd_train(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let (train_ds, test_ds) = load_subsets(cfg)?;
    fs::create_dir_all(cfg.out_dir.join("logs"))
        .map_err(|e| ExperimentError::Data(format!("cannot create logs dir: {e}")))?;
    let cnn_train = train_ds.to_normalized_tensor();
    let cnn_test = test_ds.to_normalized_tensor();

    for &model in &cfg.models {
        let counts: Vec<usize> = if model == ModelName::Cnn {
            vec![0]
        } else {
            cfg.filter_counts.clone()
        };
        for &count in &counts {
            let (train_x, test_x) = if model == ModelName::Cnn {
                (cnn_train.clone(), cnn_test.clone())
            } else {
                (
                    load_cached_features(cfg, model, count, "train")?,
                    load_cached_features(cfg, model, count, "test")?,
                )
            };
            for seed_index in 0..cfg.seeds {
                let path = cfg.log_path(model, count, seed_index);
                let label = match model {
                    ModelName::Cnn => format!("cnn seed{seed_index}"),
                    _ => format!("{} f{count} seed{seed_index}", model.as_str()),
                };
                let start = std::time::Instant::now();
                let log = train_one(
                    cfg,
                    model,
                    count,
                    seed_index,
                    &train_x,
                    &train_ds.labels,
                    &test_x,
                    &test_ds.labels,
                )?;
                fs::write(&path, log_to_csv(&log))
                    .map_err(|e| ExperimentError::Data(format!("cannot write {path:?}: {e}")))?;
                let final_acc = log.records.last().map(|r| r.test_accuracy).unwrap_or(0.0);
                println!(
                    "{label}: final accuracy {final_acc:.4} in {:.0}s -> {}",
                    start.elapsed().as_secs_f64(),
                    path.display()
                );
            }
        }
    }
    Ok(())
}

type RunKey = (String, usize); // (model, filter_count)

fn collect_logs(
    cfg: &ExperimentConfig,
) -> Result<BTreeMap<RunKey, Vec<TrainingLog>>, ExperimentError> {
    let mut runs: BTreeMap<RunKey, Vec<TrainingLog>> = BTreeMap::new();
    for &model in &cfg.models {
        let counts: Vec<usize> = if model == ModelName::Cnn {
            vec![0]
        } else {
            cfg.filter_counts.clone()
        };
        for &count in &counts {
            for seed_index in 0..cfg.seeds {
                let path = cfg.log_path(model, count, seed_index);
                let text = fs::read_to_string(&path).map_err(|_| {
                    ExperimentError::Data(format!(
                        "missing training log {}; run `quanvnet train` for model {} first",
                        path.display(),
                        model.as_str()
                    ))
                })?;
                runs.entry((model.as_str().to_string(), count))
                    .or_default()
                    .push(parse_csv(&text)?);
            }
        }
    }
    Ok(runs)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Render the two comparison figures from merged.csv (written by `quanvnet report`)."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "merged.csv"))))

def series(pred):
    out = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if pred(r):
            key = (r["model"], int(r["filter_count"]))
            out[key][int(r["iteration"])].append(
                (float(r["test_accuracy"]), float(r["train_logloss"])))
    return out

# Figure: QNN accuracy vs iteration for each filter count
qnn = series(lambda r: r["model"] == "qnn")
if qnn:
    plt.figure(figsize=(7, 5))
    for (_, count), byiter in sorted(qnn.items(), key=lambda kv: kv[0][1]):
        iters = sorted(byiter)
        accs = [sum(a for a, _ in byiter[i]) / len(byiter[i]) for i in iters]
        plt.plot(iters, accs, marker="o", label=f"{count} filters")
    plt.xlabel("training iteration")
    plt.ylabel("test accuracy")
    plt.title("QNN accuracy vs filter count")
    plt.legend()
    plt.grid(alpha=0.3)
    plt.savefig(os.path.join(here, "accuracy_vs_filters.png"), dpi=150, bbox_inches="tight")

# Figure: three-model accuracy and log-loss curves
counts = sorted({int(r["filter_count"]) for r in rows if r["model"] != "cnn"})
cmp_count = max(counts) if counts else 0
three = series(lambda r: r["model"] == "cnn" or int(r["filter_count"]) == cmp_count)
if three:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
    for (model, count), byiter in sorted(three.items()):
        iters = sorted(byiter)
        accs = [sum(a for a, _ in byiter[i]) / len(byiter[i]) for i in iters]
        losses = [sum(l for _, l in byiter[i]) / len(byiter[i]) for i in iters]
        label = model.upper() if model == "cnn" else f"{model.upper()} ({count})"
        ax1.plot(iters, accs, marker="o", label=label)
        ax2.plot(iters, losses, marker="o", label=label)
    ax1.set_xlabel("training iteration"); ax1.set_ylabel("test accuracy")
    ax2.set_xlabel("training iteration"); ax2.set_ylabel("train log-loss")
    ax1.legend(); ax2.legend()
    ax1.grid(alpha=0.3); ax2.grid(alpha=0.3)
    fig.suptitle("CNN vs QNN vs RANDOM")
    fig.savefig(os.path.join(here, "model_comparison.png"), dpi=150, bbox_inches="tight")

print("plots written to", here)
"#;

pub fn cmd_report(cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let runs = collect_logs(cfg)?;
    let report_dir = cfg.out_dir.join("report");
    fs::create_dir_all(&report_dir)
        .map_err(|e| ExperimentError::Data(format!("cannot create report dir: {e}")))?;

    let mut merged = String::from(
        "model,filter_count,seed,iteration,test_accuracy,train_logloss\n",
    );
    for ((model, count), logs) in &runs {
        for (seed_index, log) in logs.iter().enumerate() {
            for r in &log.records {
                let _ = writeln!(
                    merged,
                    "{model},{count},{seed_index},{},{:.6},{:.6}",
                    r.iteration, r.test_accuracy, r.train_logloss
                );
            }
        }
    }
    let merged_path = report_dir.join("merged.csv");
    fs::write(&merged_path, &merged)
        .map_err(|e| ExperimentError::Data(format!("cannot write merged csv: {e}")))?;

    let mut summary = String::from("final test accuracy (mean +/- std over seeds)\n");
    for ((model, count), logs) in &runs {
        let finals: Vec<f64> = logs
            .iter()
            .filter_map(|l| l.records.last().map(|r| r.test_accuracy))
            .collect();
        if finals.is_empty() {
            continue;
        }
        let (mean, std) = mean_std(&finals);
        let name = if model == "cnn" {
            "cnn".to_string()
        } else {
            format!("{model} (filters={count})")
        };
        if finals.len() > 1 {
            let _ = writeln!(summary, "  {name}: {mean:.4} +/- {std:.4} ({} seeds)", finals.len());
        } else {
            let _ = writeln!(summary, "  {name}: {mean:.4} (single run)");
        }
    }
    let summary_path = report_dir.join("summary.txt");
    fs::write(&summary_path, &summary)
        .map_err(|e| ExperimentError::Data(format!("cannot write summary: {e}")))?;
    print!("{summary}");

    let script_path = report_dir.join("plot.py");
    fs::write(&script_path, PLOT_SCRIPT)
        .map_err(|e| ExperimentError::Data(format!("cannot write plot script: {e}")))?;
    match Command::new("python3").arg(&script_path).status() {
        Ok(status) if status.success() => {}
        _ => println!(
            "plots not rendered (python3 + matplotlib unavailable); run {} manually",
            script_path.display()
        ),
    }
    println!("report written to {}", report_dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        fs::write(
            &path,
            "# comment\nmodels cnn,qnn\nfilter_counts 1,5\niterations = 50\nmaster_seed 99\n",
        )
        .unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.models, vec![ModelName::Cnn, ModelName::Qnn]);
        assert_eq!(cfg.filter_counts, vec![1, 5]);
        assert_eq!(cfg.iterations, 50);
        assert_eq!(cfg.master_seed, 99);
    }

    #[test]
    fn unknown_config_key_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        fs::write(&path, "bogus 1\n").unwrap();
        let mut cfg = ExperimentConfig::default();
        let err = cfg.apply_file(&path).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let log = TrainingLog {
            records: vec![
                crate::neuralnet::LogRecord {
                    iteration: 100,
                    test_accuracy: 0.53,
                    train_logloss: 1.25,
                },
                crate::neuralnet::LogRecord {
                    iteration: 200,
                    test_accuracy: 0.71,
                    train_logloss: 0.9,
                },
            ],
        };
        let csv = log_to_csv(&log);
        let back = parse_csv(&csv).unwrap();
        assert_eq!(back.records.len(), 2);
        assert_eq!(back.records[1].iteration, 200);
        assert!((back.records[1].test_accuracy - 0.71).abs() < 1e-9);
    }

    #[test]
    fn missing_bank_is_instructive_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let err = load_quanv_bank(&cfg, 5).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("gen-filters"));
    }

    #[test]
    fn run_seeds_are_distinct() {
        let cfg = ExperimentConfig::default();
        let mut seeds = vec![
            cfg.run_seed(ModelName::Cnn, 0, 0),
            cfg.run_seed(ModelName::Cnn, 0, 1),
            cfg.run_seed(ModelName::Qnn, 25, 0),
            cfg.run_seed(ModelName::Qnn, 10, 0),
            cfg.run_seed(ModelName::Random, 25, 0),
        ];
        seeds.sort();
        seeds.dedup();
        assert_eq!(seeds.len(), 5);
    }
}
