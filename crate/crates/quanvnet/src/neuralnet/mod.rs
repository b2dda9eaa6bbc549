//! From-scratch trainable network: conv, pool, dense, dropout, relu, and
//! softmax cross-entropy, trained by Adam on mini-batches. Everything is
//! f64 so finite-difference gradient checks are meaningful.

mod layers;
mod model;
mod train;

pub use layers::{
    Conv2DLayer, DenseLayer, DropoutLayer, FlattenLayer, Layer, MaxPool2DLayer, ReluLayer,
};
pub use model::{build_network, LayerSpec, ModelName, ModelSpec, Network, NnError};
pub use train::{evaluate_accuracy, softmax_cross_entropy, train, LogRecord, TrainingLog};
