//! Random filter-circuit generation.
//!
//! All randomness comes from ChaCha8 seeded with a 64-bit value, so a
//! config reproduces the same circuit on every platform. Per-filter seeds
//! in a bank are derived from the master seed with splitmix64.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qsim::{GateKind, GateSpec, QuantumCircuit};

const ONE_QUBIT_KINDS: [GateKind; 7] = [
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::U3,
    GateKind::P,
    GateKind::T,
    GateKind::H,
];

const TWO_QUBIT_KINDS: [GateKind; 4] = [
    GateKind::CNot,
    GateKind::Swap,
    GateKind::SqrtSwap,
    GateKind::ControlledU3,
];

#[derive(Debug, Error)]
pub enum CircuitGenError {
    #[error("patch side length must be at least 2, got {0}")]
    PatchTooSmall(usize),
    #[error("connection probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("filter bank io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("filter bank manifest error: {0}")]
    Manifest(String),
    #[error(transparent)]
    Circuit(#[from] crate::qsim::QsimError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterGenConfig {
    /// Patch side length; the circuit gets n*n qubits.
    pub n: usize,
    pub connection_probability: f64,
    pub seed: u64,
}

impl Default for FilterGenConfig {
    fn default() -> Self {
        FilterGenConfig {
            n: 3,
            connection_probability: 0.5,
            seed: 0,
        }
    }
}

impl FilterGenConfig {
    pub fn validate(&self) -> Result<(), CircuitGenError> {
        if self.n < 2 {
            return Err(CircuitGenError::PatchTooSmall(self.n));
        }
        if !(0.0..=1.0).contains(&self.connection_probability) {
            return Err(CircuitGenError::BadProbability(self.connection_probability));
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn random_angles(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect()
}

/// Generate one random filter circuit:
/// one Bernoulli(connection_probability) trial per unordered qubit pair for
/// a uniformly drawn two-qubit gate with coin-flipped orientation, then a
/// uniform count in [0, 2n^2] of uniformly drawn one-qubit gates, then a
/// shuffle of the combined list.
pub fn generate_filter_circuit(cfg: &FilterGenConfig) -> Result<QuantumCircuit, CircuitGenError> {
    cfg.validate()?;
    let n_qubits = cfg.n * cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gates: Vec<GateSpec> = Vec::new();

    for a in 0..n_qubits {
        for b in (a + 1)..n_qubits {
            if rng.gen_bool(cfg.connection_probability) {
                let kind = TWO_QUBIT_KINDS[rng.gen_range(0..TWO_QUBIT_KINDS.len())];
                let (first, second) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                let params = random_angles(&mut rng, kind.param_count());
                gates.push(GateSpec::new(kind, vec![first, second], params)?);
            }
        }
    }

    let k = rng.gen_range(0..=2 * n_qubits);
    for _ in 0..k {
        let kind = ONE_QUBIT_KINDS[rng.gen_range(0..ONE_QUBIT_KINDS.len())];
        let target = rng.gen_range(0..n_qubits);
        let params = random_angles(&mut rng, kind.param_count());
        gates.push(GateSpec::new(kind, vec![target], params)?);
    }

    gates.shuffle(&mut rng);
    Ok(QuantumCircuit {
        n_qubits,
        gates,
        seed: cfg.seed,
    })
}

/// Generate `count` circuits with per-filter seeds splitmix64(seed + i).
pub fn generate_filter_bank(
    cfg: &FilterGenConfig,
    count: usize,
) -> Result<Vec<QuantumCircuit>, CircuitGenError> {
    assert!(count >= 1, "filter bank needs at least one filter");
    (0..count)
        .map(|i| {
            let derived = FilterGenConfig {
                seed: splitmix64(cfg.seed.wrapping_add(i as u64)),
                ..*cfg
            };
            generate_filter_circuit(&derived)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BankManifest {
    pub count: usize,
    pub n: usize,
    pub connection_probability: f64,
    pub seed: u64,
}

fn io_err(path: &Path, source: std::io::Error) -> CircuitGenError {
    CircuitGenError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Persist a bank as one circuit file per filter plus a manifest.
pub fn save_filter_bank(
    dir: &Path,
    cfg: &FilterGenConfig,
    circuits: &[QuantumCircuit],
) -> Result<(), CircuitGenError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (i, c) in circuits.iter().enumerate() {
        let path = dir.join(format!("filter_{i:03}.qc"));
        fs::write(&path, c.serialize()).map_err(|e| io_err(&path, e))?;
    }
    let manifest = format!(
        "count {}\nn {}\nconnection_probability {:.16e}\nseed {}\n",
        circuits.len(),
        cfg.n,
        cfg.connection_probability,
        cfg.seed
    );
    let mpath = dir.join("manifest.txt");
    fs::write(&mpath, manifest).map_err(|e| io_err(&mpath, e))?;
    Ok(())
}

pub fn load_manifest(dir: &Path) -> Result<BankManifest, CircuitGenError> {
    let mpath = dir.join("manifest.txt");
    let text = fs::read_to_string(&mpath).map_err(|e| io_err(&mpath, e))?;
    let mut count = None;
    let mut n = None;
    let mut p = None;
    let mut seed = None;
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some("count"), Some(v)) => count = v.parse().ok(),
            (Some("n"), Some(v)) => n = v.parse().ok(),
            (Some("connection_probability"), Some(v)) => p = v.parse().ok(),
            (Some("seed"), Some(v)) => seed = v.parse().ok(),
            _ => {}
        }
    }
    match (count, n, p, seed) {
        (Some(count), Some(n), Some(connection_probability), Some(seed)) => Ok(BankManifest {
            count,
            n,
            connection_probability,
            seed,
        }),
        _ => Err(CircuitGenError::Manifest(format!(
            "incomplete manifest in {}",
            mpath.display()
        ))),
    }
}

pub fn load_filter_bank(
    dir: &Path,
) -> Result<(BankManifest, Vec<QuantumCircuit>), CircuitGenError> {
    let manifest = load_manifest(dir)?;
    let mut circuits = Vec::with_capacity(manifest.count);
    for i in 0..manifest.count {
        let path = dir.join(format!("filter_{i:03}.qc"));
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        circuits.push(QuantumCircuit::deserialize(&text)?);
    }
    Ok((manifest, circuits))
}
