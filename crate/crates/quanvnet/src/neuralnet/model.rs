//! Model specs for the three compared architectures and the network builder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::layers::{
    Conv2DLayer, DenseLayer, DropoutLayer, FlattenLayer, Layer, MaxPool2DLayer, ReluLayer,
};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("layer {index} ({kind}) cannot consume shape {shape:?}")]
    ShapeMismatch {
        index: usize,
        kind: String,
        shape: Vec<usize>,
    },
    #[error("training diverged: loss became non-finite at iteration {iteration}")]
    Diverged { iteration: u64 },
    #[error("dataset shape {got:?} does not match the model input {expected:?}")]
    BadInput {
        expected: Vec<usize>,
        got: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    Cnn,
    Qnn,
    Random,
}

impl ModelName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Cnn => "cnn",
            ModelName::Qnn => "qnn",
            ModelName::Random => "random",
        }
    }
}

impl std::str::FromStr for ModelName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cnn" => Ok(ModelName::Cnn),
            "qnn" => Ok(ModelName::Qnn),
            "random" => Ok(ModelName::Random),
            other => Err(format!("unknown model {other:?} (expected cnn|qnn|random)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Conv2D { filters: usize, kernel: usize },
    MaxPool2D,
    Relu,
    Dense { units: usize },
    Dropout { rate: f64 },
    Flatten,
    /// Fixed, non-trainable transform applied upstream as preprocessing:
    /// a filter bank of `channels` materialized lookup tables. At build
    /// time it only contributes shape arithmetic (1 channel -> `channels`).
    QuanvFixed { channels: usize },
}

impl LayerSpec {
    fn kind_name(&self) -> &'static str {
        match self {
            LayerSpec::Conv2D { .. } => "Conv2D",
            LayerSpec::MaxPool2D => "MaxPool2D",
            LayerSpec::Relu => "ReLU",
            LayerSpec::Dense { .. } => "Dense",
            LayerSpec::Dropout { .. } => "Dropout",
            LayerSpec::Flatten => "Flatten",
            LayerSpec::QuanvFixed { .. } => "QuanvFixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: ModelName,
    pub layers: Vec<LayerSpec>,
    /// Per-sample shape fed to the trainable stack (after any fixed
    /// transform has been applied to the dataset).
    pub input_shape: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub iterations: u64,
    pub eval_every: u64,
}

/// The shared trainable stack: CONV1(50, 5x5) - POOL1 - CONV2(64, 5x5) -
/// POOL2 - FC1(1024, dropout 0.4) - FC2(10).
fn cnn_stack() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Conv2D {
            filters: 50,
            kernel: 5,
        },
        LayerSpec::Relu,
        LayerSpec::MaxPool2D,
        LayerSpec::Conv2D {
            filters: 64,
            kernel: 5,
        },
        LayerSpec::Relu,
        LayerSpec::MaxPool2D,
        LayerSpec::Flatten,
        LayerSpec::Dense { units: 1024 },
        LayerSpec::Relu,
        LayerSpec::Dropout { rate: 0.4 },
        LayerSpec::Dense { units: 10 },
    ]
}

impl ModelSpec {
    pub fn new(name: ModelName, filter_count: usize) -> Self {
        let mut layers = Vec::new();
        let channels = if name == ModelName::Cnn {
            1
        } else {
            layers.push(LayerSpec::QuanvFixed {
                channels: filter_count,
            });
            filter_count
        };
        layers.extend(cnn_stack());
        ModelSpec {
            name,
            layers,
            input_shape: vec![28, 28, channels],
            learning_rate: 1e-3,
            batch_size: 32,
            iterations: 1000,
            eval_every: 100,
        }
    }
}

/// A built network: the trainable layers only (fixed transforms are applied
/// upstream on the dataset).
pub struct Network {
    pub layers: Vec<Box<dyn Layer>>,
    pub input_shape: Vec<usize>,
    pub output_dim: usize,
}

impl Network {
    pub fn forward(&mut self, input: &Tensor, train: bool) -> Tensor {
        let mut x = input.clone();
        for layer in &mut self.layers {
            x = layer.forward(&x, train);
        }
        x
    }

    pub fn backward(&mut self, grad: &Tensor) {
        let mut g = grad.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g);
        }
    }

    pub fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            layer.zero_grads();
        }
    }

    pub fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
        for layer in &mut self.layers {
            layer.visit_params(f);
        }
    }

    pub fn param_count(&mut self) -> usize {
        let mut total = 0;
        self.visit_params(&mut |p, _| total += p.len());
        total
    }
}

/// Propagate shapes through the spec, instantiate layers with seeded init,
/// and reject stacks whose shapes do not compose.
pub fn build_network(spec: &ModelSpec, seed: u64) -> Result<Network, NnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_shape = spec.input_shape.clone();
    let mut shape = input_shape.clone(); // [H, W, C] or [D]
    let mut layers: Vec<Box<dyn Layer>> = Vec::new();

    let mismatch = |index: usize, spec: &LayerSpec, shape: &[usize]| NnError::ShapeMismatch {
        index,
        kind: spec.kind_name().to_string(),
        shape: shape.to_vec(),
    };

    for (index, layer_spec) in spec.layers.iter().enumerate() {
        match layer_spec {
            LayerSpec::QuanvFixed { channels } => {
                // applied upstream; only participates in shape checking
                if index != 0 || shape.len() != 3 || shape[2] != *channels {
                    return Err(mismatch(index, layer_spec, &shape));
                }
            }
            LayerSpec::Conv2D { filters, kernel } => {
                let [h, w, c] = shape[..] else {
                    return Err(mismatch(index, layer_spec, &shape));
                };
                if *kernel > h || *kernel > w {
                    return Err(mismatch(index, layer_spec, &shape));
                }
                layers.push(Box::new(Conv2DLayer::new(*kernel, c, *filters, &mut rng)));
                shape = vec![h, w, *filters];
            }
            LayerSpec::MaxPool2D => {
                let [h, w, c] = shape[..] else {
                    return Err(mismatch(index, layer_spec, &shape));
                };
                layers.push(Box::new(MaxPool2DLayer::new()));
                shape = vec![(h + 1) / 2, (w + 1) / 2, c];
            }
            LayerSpec::Relu => layers.push(Box::new(ReluLayer::new())),
            LayerSpec::Flatten => {
                let d: usize = shape.iter().product();
                layers.push(Box::new(FlattenLayer::new()));
                shape = vec![d];
            }
            LayerSpec::Dense { units } => {
                let [d] = shape[..] else {
                    return Err(mismatch(index, layer_spec, &shape));
                };
                layers.push(Box::new(DenseLayer::new(d, *units, &mut rng)));
                shape = vec![*units];
            }
            LayerSpec::Dropout { rate } => {
                let drop_seed = rng.gen::<u64>();
                layers.push(Box::new(DropoutLayer::new(*rate, drop_seed)));
            }
        }
    }

    let [output_dim] = shape[..] else {
        return Err(NnError::ShapeMismatch {
            index: spec.layers.len(),
            kind: "output".to_string(),
            shape,
        });
    };
    Ok(Network {
        layers,
        input_shape,
        output_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_model_specs_compose_to_ten_logits() {
        for (name, filters) in [
            (ModelName::Cnn, 0),
            (ModelName::Qnn, 25),
            (ModelName::Random, 25),
        ] {
            let spec = ModelSpec::new(name, filters);
            let net = build_network(&spec, 1).unwrap();
            assert_eq!(net.output_dim, 10, "{name:?}");
        }
    }

    #[test]
    fn cnn_layer_shapes_match_expectations() {
        let spec = ModelSpec::new(ModelName::Cnn, 0);
        let mut net = build_network(&spec, 1).unwrap();
        let x = Tensor::zeros(vec![2, 28, 28, 1]);
        let out = net.forward(&x, false);
        assert_eq!(out.shape(), &[2, 10]);
        // 28x28x1 -> conv 50 -> pool 14x14 -> conv 64 -> pool 7x7 -> 3136 -> 1024 -> 10
        let expected_params = 5 * 5 * 1 * 50 + 50 + 5 * 5 * 50 * 64 + 64 + 3136 * 1024 + 1024
            + 1024 * 10 + 10;
        assert_eq!(net.param_count(), expected_params);
    }

    #[test]
    fn qnn_stack_consumes_feature_channels() {
        let spec = ModelSpec::new(ModelName::Qnn, 3);
        assert_eq!(spec.input_shape, vec![28, 28, 3]);
        let mut net = build_network(&spec, 1).unwrap();
        let x = Tensor::zeros(vec![1, 28, 28, 3]);
        assert_eq!(net.forward(&x, false).shape(), &[1, 10]);
    }

    #[test]
    fn dense_on_spatial_shape_rejected() {
        let spec = ModelSpec {
            name: ModelName::Cnn,
            layers: vec![LayerSpec::Dense { units: 10 }],
            input_shape: vec![28, 28, 1],
            learning_rate: 1e-3,
            batch_size: 32,
            iterations: 0,
            eval_every: 100,
        };
        assert!(matches!(
            build_network(&spec, 0),
            Err(NnError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn forward_is_deterministic() {
        let spec = ModelSpec::new(ModelName::Cnn, 0);
        let mut a = build_network(&spec, 42).unwrap();
        let mut b = build_network(&spec, 42).unwrap();
        let x = Tensor::new(
            vec![1, 28, 28, 1],
            (0..784).map(|i| (i % 7) as f64 / 7.0).collect(),
        )
        .unwrap();
        assert_eq!(a.forward(&x, false).data(), b.forward(&x, false).data());
    }
}
