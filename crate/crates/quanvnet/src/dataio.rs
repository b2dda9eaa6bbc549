//! MNIST IDX ingestion, balanced subsets, and the persisted feature cache.
//!
//! Cache file layout (all integers little-endian):
//!   magic  8 bytes  "QNVFEAT1"
//!   shape  4 x u64  (N, H, W, F)
//!   fps    3 x u64  FNV-1a fingerprints: dataset, filter bank, parameters
//!   data   N*H*W*F  f64
//! A human-readable `<file>.manifest.txt` sidecar repeats the header.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::quanvolution::{apply_layer, Normalization, Padding, QuanvFilter, QuanvError};
use crate::tensor::Tensor;

const IMAGES_MAGIC: u32 = 2051;
const LABELS_MAGIC: u32 = 2049;
const CACHE_MAGIC: &[u8; 8] = b"QNVFEAT1";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: bad magic {got} (expected {expected})")]
    BadMagic {
        path: String,
        expected: u32,
        got: u32,
    },
    #[error("{path}: truncated at byte offset {offset} (need {needed} more bytes)")]
    Truncated {
        path: String,
        offset: usize,
        needed: usize,
    },
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: label {label} at record {index} is not a digit class")]
    BadLabel {
        path: String,
        index: usize,
        label: u8,
    },
    #[error("stale feature cache {path}: {field} fingerprint {stored:#018x} != expected {expected:#018x}")]
    StaleCache {
        path: String,
        field: &'static str,
        stored: u64,
        expected: u64,
    },
    #[error("{path}: not a feature cache file")]
    BadCacheFormat { path: String },
    #[error(transparent)]
    Quanv(#[from] QuanvError),
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: usize,
    pub cols: usize,
    /// N * rows * cols raw pixel bytes.
    pub images: Vec<u8>,
    pub labels: Vec<u8>,
    pub split: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let len = self.rows * self.cols;
        &self.images[i * len..(i + 1) * len]
    }

    /// Image pixels as f64 in raw dataset units (0-255).
    pub fn image_f64(&self, i: usize) -> Vec<f64> {
        self.image(i).iter().map(|&b| b as f64).collect()
    }

    /// [N, rows, cols, 1] tensor of pixels scaled to [0, 1].
    pub fn to_normalized_tensor(&self) -> Tensor {
        let data = self.images.iter().map(|&b| b as f64 / 255.0).collect();
        Tensor::new(vec![self.len(), self.rows, self.cols, 1], data).unwrap()
    }
}

fn read_u32_be(bytes: &[u8], offset: usize, path: &Path) -> Result<u32, DataError> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(DataError::Truncated {
            path: path.display().to_string(),
            offset: bytes.len(),
            needed: end - bytes.len(),
        });
    }
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<Dataset, DataError> {
    let img_bytes = fs::read(images_path).map_err(|e| io_err(images_path, e))?;
    let magic = read_u32_be(&img_bytes, 0, images_path)?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            path: images_path.display().to_string(),
            expected: IMAGES_MAGIC,
            got: magic,
        });
    }
    let count = read_u32_be(&img_bytes, 4, images_path)? as usize;
    let rows = read_u32_be(&img_bytes, 8, images_path)? as usize;
    let cols = read_u32_be(&img_bytes, 12, images_path)? as usize;
    let expected_len = 16 + count * rows * cols;
    if img_bytes.len() < expected_len {
        return Err(DataError::Truncated {
            path: images_path.display().to_string(),
            offset: img_bytes.len(),
            needed: expected_len - img_bytes.len(),
        });
    }

    let lbl_bytes = fs::read(labels_path).map_err(|e| io_err(labels_path, e))?;
    let magic = read_u32_be(&lbl_bytes, 0, labels_path)?;
    if magic != LABELS_MAGIC {
        return Err(DataError::BadMagic {
            path: labels_path.display().to_string(),
            expected: LABELS_MAGIC,
            got: magic,
        });
    }
    let lbl_count = read_u32_be(&lbl_bytes, 4, labels_path)? as usize;
    if lbl_bytes.len() < 8 + lbl_count {
        return Err(DataError::Truncated {
            path: labels_path.display().to_string(),
            offset: lbl_bytes.len(),
            needed: 8 + lbl_count - lbl_bytes.len(),
        });
    }
    if lbl_count != count {
        return Err(DataError::CountMismatch {
            images: count,
            labels: lbl_count,
        });
    }

    let labels = lbl_bytes[8..8 + lbl_count].to_vec();
    for (index, &label) in labels.iter().enumerate() {
        if label > 9 {
            return Err(DataError::BadLabel {
                path: labels_path.display().to_string(),
                index,
                label,
            });
        }
    }
    Ok(Dataset {
        rows,
        cols,
        images: img_bytes[16..expected_len].to_vec(),
        labels,
        split: images_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    })
}

/// Class-balanced deterministic subsample: a single seeded shuffle of the
/// index space, walked until each class quota fills.
pub fn subset(ds: &Dataset, per_class: usize, seed: u64) -> Dataset {
    assert!(
        per_class * 10 <= ds.len() || per_class == 0,
        "subset larger than dataset"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut rng);
    let mut quota = [per_class; 10];
    let img_len = ds.rows * ds.cols;
    let mut images = Vec::with_capacity(per_class * 10 * img_len);
    let mut labels = Vec::with_capacity(per_class * 10);
    for idx in order {
        let class = ds.labels[idx] as usize;
        if quota[class] > 0 {
            quota[class] -= 1;
            images.extend_from_slice(ds.image(idx));
            labels.push(ds.labels[idx]);
        }
    }
    assert!(quota.iter().all(|&q| q == 0), "class underflow in subset");
    Dataset {
        rows: ds.rows,
        cols: ds.cols,
        images,
        labels,
        split: format!("{}-subset{}", ds.split, per_class),
    }
}

// ---------------------------------------------------------------------------
// Fingerprints and the feature cache
// ---------------------------------------------------------------------------

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fingerprints {
    pub dataset: u64,
    pub bank: u64,
    pub params: u64,
}

pub fn dataset_fingerprint(ds: &Dataset) -> u64 {
    let mut bytes = Vec::with_capacity(ds.images.len() + ds.labels.len() + 16);
    bytes.extend_from_slice(&(ds.rows as u64).to_le_bytes());
    bytes.extend_from_slice(&(ds.cols as u64).to_le_bytes());
    bytes.extend_from_slice(&ds.images);
    bytes.extend_from_slice(&ds.labels);
    fnv1a(&bytes)
}

pub fn bank_fingerprint(bank: &[QuanvFilter]) -> u64 {
    let mut bytes = Vec::new();
    for f in bank {
        match &f.circuit {
            Some(c) => bytes.extend_from_slice(c.serialize().as_bytes()),
            None => bytes.extend_from_slice(&f.table),
        }
        bytes.extend_from_slice(&f.threshold.to_le_bytes());
    }
    fnv1a(&bytes)
}

pub fn params_fingerprint(
    stride: usize,
    padding: Padding,
    threshold: f64,
    normalization: Normalization,
) -> u64 {
    let text = format!("stride={stride};padding={padding:?};threshold={threshold:.16e};normalization={normalization:?}");
    fnv1a(text.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCache {
    pub fingerprints: Fingerprints,
    /// [N, H, W, F]
    pub features: Tensor,
}

fn write_cache(path: &Path, cache: &FeatureCache) -> Result<(), DataError> {
    let shape = cache.features.shape();
    let mut out = Vec::with_capacity(8 + 7 * 8 + cache.features.len() * 8);
    out.extend_from_slice(CACHE_MAGIC);
    for &dim in shape {
        out.extend_from_slice(&(dim as u64).to_le_bytes());
    }
    for fp in [
        cache.fingerprints.dataset,
        cache.fingerprints.bank,
        cache.fingerprints.params,
    ] {
        out.extend_from_slice(&fp.to_le_bytes());
    }
    for &v in cache.features.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, &out).map_err(|e| io_err(path, e))?;

    let manifest_path = manifest_path(path);
    let mut m = fs::File::create(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
    writeln!(
        m,
        "format QNVFEAT1\nshape {} {} {} {}\ndataset_fingerprint {:#018x}\nbank_fingerprint {:#018x}\nparams_fingerprint {:#018x}",
        shape[0], shape[1], shape[2], shape[3],
        cache.fingerprints.dataset, cache.fingerprints.bank, cache.fingerprints.params
    )
    .map_err(|e| io_err(&manifest_path, e))?;
    Ok(())
}

fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".manifest.txt");
    std::path::PathBuf::from(os)
}

/// Load a cache file; if `expected` is given, any fingerprint mismatch is a
/// stale-cache error.
pub fn load_feature_cache(
    path: &Path,
    expected: Option<&Fingerprints>,
) -> Result<FeatureCache, DataError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let bad = || DataError::BadCacheFormat {
        path: path.display().to_string(),
    };
    if bytes.len() < 8 + 7 * 8 || &bytes[..8] != CACHE_MAGIC {
        return Err(bad());
    }
    let u64_at = |i: usize| {
        u64::from_le_bytes(bytes[8 + i * 8..16 + i * 8].try_into().unwrap())
    };
    let shape: Vec<usize> = (0..4).map(|i| u64_at(i) as usize).collect();
    let fingerprints = Fingerprints {
        dataset: u64_at(4),
        bank: u64_at(5),
        params: u64_at(6),
    };
    if let Some(exp) = expected {
        for (field, stored, expected) in [
            ("dataset", fingerprints.dataset, exp.dataset),
            ("bank", fingerprints.bank, exp.bank),
            ("params", fingerprints.params, exp.params),
        ] {
            if stored != expected {
                return Err(DataError::StaleCache {
                    path: path.display().to_string(),
                    field,
                    stored,
                    expected,
                });
            }
        }
    }
    let count: usize = shape.iter().product();
    let payload = &bytes[8 + 7 * 8..];
    if payload.len() != count * 8 {
        return Err(bad());
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FeatureCache {
        fingerprints,
        features: Tensor::new(shape, data).map_err(|_| bad())?,
    })
}

/// Run the filter bank over every image and persist the result. Idempotent:
/// when the file already holds matching fingerprints it is loaded, not
/// recomputed.
pub fn precompute_features(
    path: &Path,
    ds: &Dataset,
    bank: &[QuanvFilter],
    stride: usize,
    padding: Padding,
    normalization: Normalization,
) -> Result<FeatureCache, DataError> {
    let threshold = bank.first().map(|f| f.threshold).unwrap_or(0.0);
    let fingerprints = Fingerprints {
        dataset: dataset_fingerprint(ds),
        bank: bank_fingerprint(bank),
        params: params_fingerprint(stride, padding, threshold, normalization),
    };
    if path.exists() {
        match load_feature_cache(path, Some(&fingerprints)) {
            Ok(cache) => return Ok(cache),
            Err(DataError::StaleCache { .. }) | Err(DataError::BadCacheFormat { .. }) => {
                // fall through and rebuild
            }
            Err(e) => return Err(e),
        }
    }

    let n = ds.len();
    let mut features: Option<Vec<f64>> = None;
    let mut shape = vec![0usize; 4];
    for i in 0..n {
        let pixels = ds.image_f64(i);
        let t = apply_layer(&pixels, ds.rows, ds.cols, bank, stride, padding, normalization)?;
        if features.is_none() {
            shape = vec![n, t.shape()[0], t.shape()[1], t.shape()[2]];
            features = Some(Vec::with_capacity(n * t.len()));
        }
        features.as_mut().unwrap().extend_from_slice(t.data());
    }
    let cache = FeatureCache {
        fingerprints,
        features: Tensor::new(shape, features.unwrap_or_default()).map_err(|_| {
            DataError::BadCacheFormat {
                path: path.display().to_string(),
            }
        })?,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    write_cache(path, &cache)?;
    Ok(cache)
}
