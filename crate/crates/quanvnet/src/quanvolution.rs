//! The quanvolutional filter transformation: threshold-encode a patch to a
//! basis state, run the filter circuit, decode the most likely output state
//! to a popcount. The full 2^(n*n) input->output map is materialized once
//! per filter, so sliding over images is pure table lookup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qsim::{QsimError, QuantumCircuit, StateVector};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum QuanvError {
    #[error("circuit has {0} qubits, which is not a perfect square >= 4")]
    NotPatchShaped(usize),
    #[error("image {h}x{w} smaller than {n}x{n} patch under valid padding")]
    ImageTooSmall { h: usize, w: usize, n: usize },
    #[error("filter bank mixes patch sizes or thresholds")]
    MixedBank,
    #[error("filter bank is empty")]
    EmptyBank,
    #[error(transparent)]
    Sim(#[from] QsimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Zero-pad so the output keeps the input's spatial size at stride 1.
    SameZero,
    /// No padding; output shrinks by the window size.
    Valid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Raw popcount in [0, n*n].
    RawCount,
    /// Popcount divided by n*n, in [0, 1].
    ScaledUnit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

/// A materialized filter: the input->output table over every encoded patch.
/// `circuit` is present for quanvolutional filters and absent for the purely
/// classical random tables of the RANDOM model.
#[derive(Debug, Clone, PartialEq)]
pub struct QuanvFilter {
    pub circuit: Option<QuantumCircuit>,
    pub threshold: f64,
    pub n: usize,
    pub table: Vec<u8>,
}

/// Map an n-by-n patch to a basis index: bit (r*n + c) is set iff the pixel
/// strictly exceeds the threshold.
pub fn encode_patch(patch: &[f64], n: usize, threshold: f64) -> usize {
    debug_assert_eq!(patch.len(), n * n);
    let mut index = 0usize;
    for (bit, &v) in patch.iter().enumerate() {
        if v > threshold {
            index |= 1 << bit;
        }
    }
    index
}

/// Popcount of the most likely basis state.
pub fn decode_state(state: &StateVector) -> u32 {
    (state.most_likely_basis_state() as u64).count_ones()
}

fn patch_side(n_qubits: usize) -> Result<usize, QuanvError> {
    let n = (n_qubits as f64).sqrt().round() as usize;
    if n < 2 || n * n != n_qubits {
        return Err(QuanvError::NotPatchShaped(n_qubits));
    }
    Ok(n)
}

/// Simulate every possible encoded patch once and freeze the outputs.
pub fn build_lookup_table(
    circuit: &QuantumCircuit,
    threshold: f64,
) -> Result<QuanvFilter, QuanvError> {
    let n = patch_side(circuit.n_qubits)?;
    let dim = 1usize << circuit.n_qubits;
    let mut table = Vec::with_capacity(dim);
    for k in 0..dim {
        table.push(decode_state(&circuit.run(k)?) as u8);
    }
    Ok(QuanvFilter {
        circuit: Some(circuit.clone()),
        threshold,
        n,
        table,
    })
}

/// A classical stand-in with the same signature: a uniformly random table
/// over {0, ..., n*n}.
pub fn random_nonlinear_filter(seed: u64, n: usize) -> QuanvFilter {
    assert!(n >= 2, "patch side must be at least 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << (n * n);
    let table = (0..dim).map(|_| rng.gen_range(0..=(n * n) as u8)).collect();
    QuanvFilter {
        circuit: None,
        threshold: 0.0,
        n,
        table,
    }
}

fn output_extent(input: usize, n: usize, stride: usize, padding: Padding) -> usize {
    match padding {
        Padding::SameZero => (input + stride - 1) / stride,
        Padding::Valid => (input - n) / stride + 1,
    }
}

/// Slide the filter over the image. Out-of-bounds cells under `SameZero`
/// read as zero pixels, which encode to |0> exactly like genuine zeros.
pub fn apply_filter(
    image: &[f64],
    h: usize,
    w: usize,
    filter: &QuanvFilter,
    stride: usize,
    padding: Padding,
    normalization: Normalization,
) -> Result<FeatureMap, QuanvError> {
    assert!(stride >= 1, "stride must be positive");
    assert_eq!(image.len(), h * w);
    let n = filter.n;
    if padding == Padding::Valid && (h < n || w < n) {
        return Err(QuanvError::ImageTooSmall { h, w, n });
    }
    let out_h = output_extent(h, n, stride, padding);
    let out_w = output_extent(w, n, stride, padding);
    let (pad_top, pad_left) = match padding {
        Padding::SameZero => {
            let pad_h = ((out_h - 1) * stride + n).saturating_sub(h);
            let pad_w = ((out_w - 1) * stride + n).saturating_sub(w);
            (pad_h / 2, pad_w / 2)
        }
        Padding::Valid => (0, 0),
    };

    let scale = match normalization {
        Normalization::RawCount => 1.0,
        Normalization::ScaledUnit => 1.0 / (n * n) as f64,
    };
    let mut values = Vec::with_capacity(out_h * out_w);
    let mut patch = vec![0.0; n * n];
    for or in 0..out_h {
        for oc in 0..out_w {
            for pr in 0..n {
                for pc in 0..n {
                    let r = (or * stride + pr) as isize - pad_top as isize;
                    let c = (oc * stride + pc) as isize - pad_left as isize;
                    patch[pr * n + pc] = if r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w
                    {
                        image[r as usize * w + c as usize]
                    } else {
                        0.0
                    };
                }
            }
            let idx = encode_patch(&patch, n, filter.threshold);
            values.push(filter.table[idx] as f64 * scale);
        }
    }
    Ok(FeatureMap {
        height: out_h,
        width: out_w,
        values,
        normalization,
    })
}

/// Apply every filter in the bank; output layout is [H', W', N] row-major.
pub fn apply_layer(
    image: &[f64],
    h: usize,
    w: usize,
    bank: &[QuanvFilter],
    stride: usize,
    padding: Padding,
    normalization: Normalization,
) -> Result<Tensor, QuanvError> {
    if bank.is_empty() {
        return Err(QuanvError::EmptyBank);
    }
    let n = bank[0].n;
    let threshold = bank[0].threshold;
    if bank
        .iter()
        .any(|f| f.n != n || f.threshold != threshold)
    {
        return Err(QuanvError::MixedBank);
    }
    let maps: Vec<FeatureMap> = bank
        .iter()
        .map(|f| apply_filter(image, h, w, f, stride, padding, normalization))
        .collect::<Result<_, _>>()?;
    let (out_h, out_w) = (maps[0].height, maps[0].width);
    let channels = maps.len();
    let mut data = vec![0.0; out_h * out_w * channels];
    for (ch, map) in maps.iter().enumerate() {
        for (i, &v) in map.values.iter().enumerate() {
            data[i * channels + ch] = v;
        }
    }
    Ok(Tensor::new(vec![out_h, out_w, channels], data).unwrap())
}
