//! Acceptance suite. Each test prints one PASS/FAIL line. The training
//! criteria (4-6) share one set of desk-scale runs behind a lazy harness;
//! expect the full suite to take a couple of hours on a single core.
//!
//! Requires the MNIST IDX files; set MNIST_DIR or place them in
//! /root/data/mnist (see README).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quanvnet::circuitgen::{generate_filter_bank, generate_filter_circuit, FilterGenConfig};
use quanvnet::dataio::load_mnist;
use quanvnet::experiment::{
    cmd_gen_filters, cmd_precompute, cmd_train, load_quanv_bank, random_bank, train_one,
    ExperimentConfig,
};
use quanvnet::neuralnet::{
    build_network, softmax_cross_entropy, LayerSpec, ModelName, ModelSpec,
};
use quanvnet::qsim::{gate_matrix, GateKind, GateMatrix, GateSpec};
use quanvnet::quanvolution::{build_lookup_table, decode_state, Normalization, Padding};
use quanvnet::tensor::Tensor;

fn mnist_dir() -> PathBuf {
    std::env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("/root/data/mnist"))
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "{} criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

// ---------------------------------------------------------------------------
// Criterion 1: simulator correctness (identities, unitarity, norm drift)
// ---------------------------------------------------------------------------

fn as_matrix(g: &GateSpec) -> Vec<Vec<Complex64>> {
    match gate_matrix(g).unwrap() {
        GateMatrix::One(m) => m.iter().map(|r| r.to_vec()).collect(),
        GateMatrix::Two(m) => m.iter().map(|r| r.to_vec()).collect(),
    }
}

fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for r in 0..n {
        for c in 0..n {
            for k in 0..n {
                out[r][c] += a[r][k] * b[k][c];
            }
        }
    }
    out
}

fn max_dev_from_identity(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    let mut max = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let expect = if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            max = max.max((m[r][c] - expect).norm());
        }
    }
    max
}

fn dagger(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = m.len();
    (0..n)
        .map(|r| (0..n).map(|c| m[c][r].conj()).collect())
        .collect()
}

#[test]
fn criterion_1_simulator_correctness() {
    let start = Instant::now();
    let g1 = |kind, params: Vec<f64>| GateSpec::new(kind, vec![0], params).unwrap();
    let g2 = |kind, params: Vec<f64>| GateSpec::new(kind, vec![0, 1], params).unwrap();

    // algebraic identities
    let h = as_matrix(&g1(GateKind::H, vec![]));
    assert!(max_dev_from_identity(&matmul(&h, &h)) < 1e-12, "H^2 != I");
    let cnot = as_matrix(&g2(GateKind::CNot, vec![]));
    assert!(max_dev_from_identity(&matmul(&cnot, &cnot)) < 1e-12, "CNot^2 != I");
    let swap = as_matrix(&g2(GateKind::Swap, vec![]));
    assert!(max_dev_from_identity(&matmul(&swap, &swap)) < 1e-12, "Swap^2 != I");
    let ss = as_matrix(&g2(GateKind::SqrtSwap, vec![]));
    let ss2 = matmul(&ss, &ss);
    let mut dev = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            dev = dev.max((ss2[r][c] - swap[r][c]).norm());
        }
    }
    assert!(dev < 1e-12, "SqrtSwap^2 != Swap (dev {dev})");
    let t = as_matrix(&g1(GateKind::T, vec![]));
    let mut t8 = t.clone();
    for _ in 0..7 {
        t8 = matmul(&t8, &t);
    }
    assert!(max_dev_from_identity(&t8) < 1e-12, "T^8 != I");
    let p = as_matrix(&g1(GateKind::P, vec![]));
    let p4 = matmul(&matmul(&p, &p), &matmul(&p, &p));
    assert!(max_dev_from_identity(&p4) < 1e-12, "P^4 != I");

    // unitarity of every kind over 100 random parameter draws
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let all_kinds = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::U3,
        GateKind::P,
        GateKind::T,
        GateKind::H,
        GateKind::CNot,
        GateKind::Swap,
        GateKind::SqrtSwap,
        GateKind::ControlledU3,
    ];
    for kind in all_kinds {
        for _ in 0..100 {
            let params: Vec<f64> = (0..kind.param_count())
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            let g = if kind.arity() == 1 {
                g1(kind, params)
            } else {
                g2(kind, params)
            };
            let m = as_matrix(&g);
            let dev = max_dev_from_identity(&matmul(&dagger(&m), &m));
            assert!(dev < 1e-12, "{kind:?} not unitary (dev {dev})");
        }
    }

    // norm preservation over 100 random 9-qubit circuits of <= 60 gates
    let mut max_drift = 0.0f64;
    for seed in 0..100u64 {
        let cfg = FilterGenConfig {
            n: 3,
            connection_probability: 0.3,
            seed,
        };
        let mut circuit = generate_filter_circuit(&cfg).unwrap();
        circuit.gates.truncate(60);
        let index = (seed as usize * 97) % 512;
        let state = circuit.run(index).unwrap();
        max_drift = max_drift.max((state.norm() - 1.0).abs());
    }
    assert!(max_drift < 1e-10, "norm drift {max_drift}");

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "1",
        elapsed < 10.0,
        &format!("identities + unitarity + norm drift {max_drift:.2e} in {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: lookup table == direct simulation, 20 filters x 512 inputs
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_lookup_table_equivalence() {
    let start = Instant::now();
    let cfg = FilterGenConfig {
        n: 3,
        connection_probability: 0.5,
        seed: 1717,
    };
    let circuits = generate_filter_bank(&cfg, 20).unwrap();
    for (fi, circuit) in circuits.iter().enumerate() {
        let filter = build_lookup_table(circuit, 0.0).unwrap();
        for k in 0..512usize {
            let direct = decode_state(&circuit.run(k).unwrap()) as u8;
            assert_eq!(
                filter.table[k], direct,
                "filter {fi} entry {k}: table {} vs direct {direct}",
                filter.table[k]
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "2",
        elapsed < 30.0,
        &format!("20 filters x 512 entries exact in {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: finite-difference gradient checks, 5 seeds
// ---------------------------------------------------------------------------

fn max_relative_gradient_error(spec: &ModelSpec, seed: u64, input: &Tensor, labels: &[u8]) -> f64 {
    let mut net = build_network(spec, seed).unwrap();
    let logits = net.forward(input, true);
    let (_, grad) = softmax_cross_entropy(&logits, labels);
    net.zero_grads();
    net.backward(&grad);
    let mut analytic: Vec<Vec<f64>> = Vec::new();
    net.visit_params(&mut |_, g| analytic.push(g.to_vec()));

    let step = 1e-5;
    let mut max_rel = 0.0f64;
    for gi in 0..analytic.len() {
        let len = analytic[gi].len();
        let stride = (len / 25).max(1);
        for pi in (0..len).step_by(stride) {
            let loss_at = |delta: f64| {
                let mut net2 = build_network(spec, seed).unwrap();
                let mut g = 0;
                net2.visit_params(&mut |p, _| {
                    if g == gi {
                        p[pi] += delta;
                    }
                    g += 1;
                });
                softmax_cross_entropy(&net2.forward(input, true), labels).0
            };
            let numeric = (loss_at(step) - loss_at(-step)) / (2.0 * step);
            let a = analytic[gi][pi];
            max_rel = max_rel.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
        }
    }
    max_rel
}

#[test]
fn criterion_3_gradient_checks() {
    let start = Instant::now();
    let dense_spec = ModelSpec {
        name: ModelName::Cnn,
        layers: vec![
            LayerSpec::Dense { units: 6 },
            LayerSpec::Relu,
            LayerSpec::Dense { units: 4 },
        ],
        input_shape: vec![5],
        learning_rate: 1e-3,
        batch_size: 3,
        iterations: 0,
        eval_every: 1,
    };
    let conv_spec = ModelSpec {
        name: ModelName::Cnn,
        layers: vec![
            LayerSpec::Conv2D {
                filters: 3,
                kernel: 3,
            },
            LayerSpec::Relu,
            LayerSpec::MaxPool2D,
            LayerSpec::Conv2D {
                filters: 2,
                kernel: 3,
            },
            LayerSpec::Relu,
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 4 },
        ],
        input_shape: vec![8, 8, 2],
        learning_rate: 1e-3,
        batch_size: 2,
        iterations: 0,
        eval_every: 1,
    };

    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let dense_input = Tensor::new(
            vec![3, 5],
            (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        worst = worst.max(max_relative_gradient_error(
            &dense_spec,
            seed,
            &dense_input,
            &[0, 3, 1],
        ));
        let conv_input = Tensor::new(
            vec![2, 8, 8, 2],
            (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        worst = worst.max(max_relative_gradient_error(
            &conv_spec,
            seed,
            &conv_input,
            &[2, 0],
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "3",
        worst < 1e-4 && elapsed < 30.0,
        &format!("max relative gradient error {worst:.2e} over 5 seeds in {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------------------
// Criteria 4-6: shared desk-scale training runs
// ---------------------------------------------------------------------------

struct HeavyResults {
    /// final test accuracy per seed
    cnn: Vec<f64>,
    qnn: BTreeMap<usize, Vec<f64>>,
    random25: Vec<f64>,
    cnn_seconds: f64,
}

fn desk_config(out_dir: PathBuf) -> ExperimentConfig {
    ExperimentConfig {
        data_dir: mnist_dir(),
        out_dir,
        ..Default::default()
    }
}

fn run_heavy() -> HeavyResults {
    let tmp = tempfile::tempdir().expect("tempdir");
    let cfg = desk_config(tmp.path().to_path_buf());
    let (train_ds, test_ds) = quanvnet::experiment::load_subsets(&cfg).expect(
        "MNIST files missing: set MNIST_DIR or place IDX files in /root/data/mnist",
    );
    println!(
        "[heavy] subsets ready: {} train / {} test",
        train_ds.len(),
        test_ds.len()
    );

    cmd_gen_filters(&cfg).unwrap();

    let finals = |model: ModelName, count: usize, train_x: &Tensor, test_x: &Tensor| {
        (0..cfg.seeds)
            .map(|seed_index| {
                let t0 = Instant::now();
                let log = train_one(
                    &cfg, model, count, seed_index, train_x, &train_ds.labels, test_x,
                    &test_ds.labels,
                )
                .unwrap();
                let acc = log.records.last().unwrap().test_accuracy;
                println!(
                    "[heavy] {} f{count} seed{seed_index}: final accuracy {acc:.4} ({:.0}s)",
                    model.as_str(),
                    t0.elapsed().as_secs_f64()
                );
                acc
            })
            .collect::<Vec<f64>>()
    };

    // CNN baseline
    let cnn_train = train_ds.to_normalized_tensor();
    let cnn_test = test_ds.to_normalized_tensor();
    let cnn_start = Instant::now();
    let cnn = finals(ModelName::Cnn, 0, &cnn_train, &cnn_test);
    let cnn_seconds = cnn_start.elapsed().as_secs_f64() / cfg.seeds as f64;
    drop(cnn_train);
    drop(cnn_test);

    // QNN sweep
    let mut qnn = BTreeMap::new();
    for &count in &[1usize, 5, 10, 25] {
        let bank = load_quanv_bank(&cfg, count).unwrap();
        let feats = |split: &str, ds: &quanvnet::dataio::Dataset| {
            quanvnet::dataio::precompute_features(
                &cfg.cache_path(ModelName::Qnn, count, split),
                ds,
                &bank,
                cfg.stride,
                Padding::SameZero,
                Normalization::ScaledUnit,
            )
            .unwrap()
            .features
        };
        let train_x = feats("train", &train_ds);
        let test_x = feats("test", &test_ds);
        qnn.insert(count, finals(ModelName::Qnn, count, &train_x, &test_x));
    }

    // RANDOM with 25 tables
    let bank = random_bank(&cfg, 25);
    let train_x = quanvnet::dataio::precompute_features(
        &cfg.cache_path(ModelName::Random, 25, "train"),
        &train_ds,
        &bank,
        cfg.stride,
        Padding::SameZero,
        Normalization::ScaledUnit,
    )
    .unwrap()
    .features;
    let test_x = quanvnet::dataio::precompute_features(
        &cfg.cache_path(ModelName::Random, 25, "test"),
        &test_ds,
        &bank,
        cfg.stride,
        Padding::SameZero,
        Normalization::ScaledUnit,
    )
    .unwrap()
    .features;
    let random25 = finals(ModelName::Random, 25, &train_x, &test_x);

    HeavyResults {
        cnn,
        qnn,
        random25,
        cnn_seconds,
    }
}

static HEAVY: Lazy<Mutex<Option<HeavyResults>>> = Lazy::new(|| Mutex::new(None));

fn with_heavy<T>(f: impl FnOnce(&HeavyResults) -> T) -> T {
    let mut guard = HEAVY.lock().unwrap();
    if guard.is_none() {
        *guard = Some(run_heavy());
    }
    f(guard.as_ref().unwrap())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[test]
fn criterion_4_cnn_baseline_accuracy() {
    with_heavy(|h| {
        let m = mean(&h.cnn);
        report(
            "4",
            m >= 0.90,
            &format!(
                "CNN mean final accuracy {m:.4} (seeds {:?}, {:.0}s/run)",
                h.cnn, h.cnn_seconds
            ),
        );
    });
}

#[test]
fn criterion_5_filter_count_trend() {
    with_heavy(|h| {
        let m1 = mean(&h.qnn[&1]);
        let m5 = mean(&h.qnn[&5]);
        let m10 = mean(&h.qnn[&10]);
        let m25 = mean(&h.qnn[&25]);
        report(
            "5",
            m5 > m1 && m10 > m5,
            &format!("QNN mean accuracy by filters: 1->{m1:.4}, 5->{m5:.4}, 10->{m10:.4}, 25->{m25:.4}"),
        );
    });
}

#[test]
fn criterion_6_three_model_comparison() {
    with_heavy(|h| {
        let qnn25 = mean(&h.qnn[&25]);
        let rnd25 = mean(&h.random25);
        let cnn = mean(&h.cnn);
        let gap = (qnn25 - rnd25).abs();
        report(
            "6",
            gap <= 0.02 && qnn25 >= cnn - 0.01,
            &format!(
                "QNN25 {qnn25:.4} vs RANDOM25 {rnd25:.4} (|gap| {gap:.4}) vs CNN {cnn:.4}"
            ),
        );
    });
}

// ---------------------------------------------------------------------------
// Criterion 7: full-pipeline determinism
// ---------------------------------------------------------------------------

fn dir_contents(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_7_pipeline_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let cfg = ExperimentConfig {
            data_dir: mnist_dir(),
            out_dir: out.clone(),
            filter_counts: vec![2],
            train_per_class: 5,
            test_per_class: 2,
            iterations: 20,
            eval_every: 10,
            seeds: 1,
            ..Default::default()
        };
        cmd_gen_filters(&cfg).unwrap();
        cmd_precompute(&cfg).unwrap();
        cmd_train(&cfg).unwrap();
        dir_contents(&out)
    };
    let a = run("a");
    let b = run("b");
    let same = a == b;
    report(
        "7",
        same,
        &format!(
            "two pipeline runs produced {} identical files (filters, caches, CSVs)",
            a.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: official MNIST ingestion
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_mnist_ingestion() {
    let dir = mnist_dir();
    let train = load_mnist(
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
    )
    .expect("MNIST files missing: set MNIST_DIR or place IDX files in /root/data/mnist");
    let test = load_mnist(
        &dir.join("t10k-images-idx3-ubyte"),
        &dir.join("t10k-labels-idx1-ubyte"),
    )
    .unwrap();
    let pass = train.len() == 60_000 && test.len() == 10_000;
    report(
        "8",
        pass,
        &format!("parsed {} train / {} test records", train.len(), test.len()),
    );
}
