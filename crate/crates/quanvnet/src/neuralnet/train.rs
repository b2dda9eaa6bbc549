//! Mini-batch training loop with Adam, plus the stabilized softmax
//! cross-entropy loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{build_network, ModelSpec, Network, NnError};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub iteration: u64,
    pub test_accuracy: f64,
    pub train_logloss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<LogRecord>,
}

/// Mean negative log-likelihood over the batch, stabilized by row-max
/// subtraction, and the logits gradient (softmax - one_hot) / B.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[u8]) -> (f64, Tensor) {
    let &[b, k] = logits.shape() else {
        panic!("logits must be [B,K], got {:?}", logits.shape())
    };
    assert_eq!(labels.len(), b);
    let mut grad = vec![0.0; b * k];
    let mut loss = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        let row = &logits.data()[i * k..(i + 1) * k];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for &v in row {
            sum += (v - max).exp();
        }
        let log_sum = sum.ln() + max;
        loss += log_sum - row[label as usize];
        for j in 0..k {
            let p = (row[j] - max).exp() / sum;
            grad[i * k + j] = (p - if j == label as usize { 1.0 } else { 0.0 }) / b as f64;
        }
    }
    (loss / b as f64, Tensor::new(vec![b, k], grad).unwrap())
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    fn step(&mut self, net: &mut Network) {
        if self.m.is_empty() {
            net.visit_params(&mut |p, _| {
                self.m.push(vec![0.0; p.len()]);
                self.v.push(vec![0.0; p.len()]);
            });
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let (lr, b1, b2, eps) = (self.lr, self.beta1, self.beta2, self.eps);
        let (m_all, v_all) = (&mut self.m, &mut self.v);
        let mut group = 0;
        net.visit_params(&mut |p, g| {
            let m = &mut m_all[group];
            let v = &mut v_all[group];
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
            group += 1;
        });
    }
}

fn gather_batch(images: &Tensor, labels: &[u8], indices: &[usize]) -> (Tensor, Vec<u8>) {
    let sample_len: usize = images.shape()[1..].iter().product();
    let mut shape = vec![indices.len()];
    shape.extend_from_slice(&images.shape()[1..]);
    let mut data = Vec::with_capacity(indices.len() * sample_len);
    let mut batch_labels = Vec::with_capacity(indices.len());
    for &idx in indices {
        data.extend_from_slice(&images.data()[idx * sample_len..(idx + 1) * sample_len]);
        batch_labels.push(labels[idx]);
    }
    (Tensor::new(shape, data).unwrap(), batch_labels)
}

/// Fraction of samples whose argmax logit matches the label.
pub fn evaluate_accuracy(net: &mut Network, images: &Tensor, labels: &[u8]) -> f64 {
    let n = images.shape()[0];
    if n == 0 {
        return 0.0;
    }
    let mut correct = 0usize;
    let chunk = 200;
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let indices: Vec<usize> = (start..end).collect();
        let (batch, batch_labels) = gather_batch(images, labels, &indices);
        let logits = net.forward(&batch, false);
        let k = logits.shape()[1];
        for (i, &label) in batch_labels.iter().enumerate() {
            let row = &logits.data()[i * k..(i + 1) * k];
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            if argmax == label as usize {
                correct += 1;
            }
        }
        start = end;
    }
    correct as f64 / n as f64
}

/// Train per the spec: seeded init, seeded epoch shuffling, Adam updates,
/// one log record per `eval_every` iterations. Aborts if the loss goes
/// non-finite.
pub fn train(
    spec: &ModelSpec,
    train_images: &Tensor,
    train_labels: &[u8],
    test_images: &Tensor,
    test_labels: &[u8],
    seed: u64,
) -> Result<TrainingLog, NnError> {
    if &spec.input_shape[..] != &train_images.shape()[1..] {
        return Err(NnError::BadInput {
            expected: spec.input_shape.clone(),
            got: train_images.shape()[1..].to_vec(),
        });
    }
    let mut net = build_network(spec, seed)?;
    let mut optimizer = Adam::new(spec.learning_rate);
    // separate stream so shuffling does not interact with weight init
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = train_images.shape()[0];
    let mut order: Vec<usize> = (0..n).collect();
    let mut cursor = n; // forces a shuffle on the first batch

    let mut log = TrainingLog::default();
    let mut window_loss = 0.0;
    let mut window_count = 0u64;

    for iteration in 1..=spec.iterations {
        if cursor + spec.batch_size > n {
            order.shuffle(&mut shuffle_rng);
            cursor = 0;
        }
        let batch_indices = &order[cursor..cursor + spec.batch_size];
        cursor += spec.batch_size;

        let (batch, batch_labels) = gather_batch(train_images, train_labels, batch_indices);
        let logits = net.forward(&batch, true);
        let (loss, grad) = softmax_cross_entropy(&logits, &batch_labels);
        if !loss.is_finite() {
            return Err(NnError::Diverged { iteration });
        }
        net.zero_grads();
        net.backward(&grad);
        optimizer.step(&mut net);

        window_loss += loss;
        window_count += 1;
        if iteration % spec.eval_every == 0 {
            let test_accuracy = evaluate_accuracy(&mut net, test_images, test_labels);
            log.records.push(LogRecord {
                iteration,
                test_accuracy,
                train_logloss: window_loss / window_count as f64,
            });
            window_loss = 0.0;
            window_count = 0;
        }
    }
    Ok(log)
}
