//! Quanvolutional neural networks end-to-end: a dense statevector
//! simulator, random filter-circuit generation, threshold-encoded
//! patch transforms materialized as lookup tables, a from-scratch CNN,
//! and an experiment runner comparing CNN / QNN / RANDOM models on MNIST.

pub mod circuitgen;
pub mod dataio;
pub mod experiment;
pub mod neuralnet;
pub mod qsim;
pub mod quanvolution;
pub mod tensor;
