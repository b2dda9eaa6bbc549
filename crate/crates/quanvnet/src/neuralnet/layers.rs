//! Layer implementations. Batched tensors are channels-last:
//! spatial activations are [B, H, W, C], flat activations are [B, D].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::Tensor;

/// C = A @ B for row-major matrices, with optional transposes and
/// accumulation into C.
#[allow(clippy::too_many_arguments)]
fn dgemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    trans_a: bool,
    b: &[f64],
    trans_b: bool,
    beta: f64,
    c: &mut [f64],
) {
    // trans_a: A is stored as its k x m transpose, so A[i,j] = buf[j*m + i]
    let (rsa, csa) = if trans_a { (1, m as isize) } else { (k as isize, 1) };
    // trans_b: B is stored as its n x k transpose, so B[l,j] = buf[j*k + l]
    let (rsb, csb) = if trans_b { (1, k as isize) } else { (n as isize, 1) };
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub trait Layer {
    fn forward(&mut self, input: &Tensor, train: bool) -> Tensor;

    /// Consumes the upstream gradient, accumulates parameter gradients, and
    /// returns the gradient with respect to this layer's input. Requires a
    /// preceding `forward` call in train mode.
    fn backward(&mut self, grad_out: &Tensor) -> Tensor;

    /// Visit (parameters, gradients) slices, in a fixed order.
    fn visit_params(&mut self, _f: &mut dyn FnMut(&mut [f64], &mut [f64])) {}

    fn zero_grads(&mut self) {}
}

fn fan_in_uniform(rng: &mut ChaCha8Rng, fan_in: usize, len: usize) -> Vec<f64> {
    let bound = (1.0 / fan_in as f64).sqrt();
    (0..len).map(|_| rng.gen_range(-bound..bound)).collect()
}

// ---------------------------------------------------------------------------
// Conv2D, same padding, stride 1, via im2col + GEMM
// ---------------------------------------------------------------------------

pub struct Conv2DLayer {
    pub kernel: usize,
    pub in_channels: usize,
    pub filters: usize,
    /// [k, k, C, F] row-major
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub w_grad: Vec<f64>,
    pub b_grad: Vec<f64>,
    cached_input: Option<Tensor>,
}

impl Conv2DLayer {
    pub fn new(kernel: usize, in_channels: usize, filters: usize, rng: &mut ChaCha8Rng) -> Self {
        let fan_in = kernel * kernel * in_channels;
        let wlen = fan_in * filters;
        Conv2DLayer {
            kernel,
            in_channels,
            filters,
            weights: fan_in_uniform(rng, fan_in, wlen),
            bias: vec![0.0; filters],
            w_grad: vec![0.0; wlen],
            b_grad: vec![0.0; filters],
            cached_input: None,
        }
    }

    fn pad(&self) -> usize {
        (self.kernel - 1) / 2
    }

    /// Gather one image's patches into cols: [H*W, k*k*C].
    fn im2col(&self, image: &[f64], h: usize, w: usize, cols: &mut [f64]) {
        let k = self.kernel;
        let c = self.in_channels;
        let pad = self.pad() as isize;
        let row_len = k * k * c;
        for or_ in 0..h {
            for oc_ in 0..w {
                let base = (or_ * w + oc_) * row_len;
                for kr in 0..k {
                    let r = or_ as isize + kr as isize - pad;
                    for kc in 0..k {
                        let cc = oc_ as isize + kc as isize - pad;
                        let dst = base + (kr * k + kc) * c;
                        if r >= 0 && (r as usize) < h && cc >= 0 && (cc as usize) < w {
                            let src = (r as usize * w + cc as usize) * c;
                            cols[dst..dst + c].copy_from_slice(&image[src..src + c]);
                        } else {
                            cols[dst..dst + c].fill(0.0);
                        }
                    }
                }
            }
        }
    }

    /// Scatter cols gradients back to an image gradient (transpose of im2col).
    fn col2im(&self, cols: &[f64], h: usize, w: usize, image_grad: &mut [f64]) {
        let k = self.kernel;
        let c = self.in_channels;
        let pad = self.pad() as isize;
        let row_len = k * k * c;
        for or_ in 0..h {
            for oc_ in 0..w {
                let base = (or_ * w + oc_) * row_len;
                for kr in 0..k {
                    let r = or_ as isize + kr as isize - pad;
                    if r < 0 || r as usize >= h {
                        continue;
                    }
                    for kc in 0..k {
                        let cc = oc_ as isize + kc as isize - pad;
                        if cc < 0 || cc as usize >= w {
                            continue;
                        }
                        let src = base + (kr * k + kc) * c;
                        let dst = (r as usize * w + cc as usize) * c;
                        for i in 0..c {
                            image_grad[dst + i] += cols[src + i];
                        }
                    }
                }
            }
        }
    }
}

impl Layer for Conv2DLayer {
    fn forward(&mut self, input: &Tensor, train: bool) -> Tensor {
        let &[b, h, w, c] = input.shape() else {
            panic!("conv expects [B,H,W,C], got {:?}", input.shape())
        };
        assert_eq!(c, self.in_channels, "conv channel mismatch");
        let row_len = self.kernel * self.kernel * c;
        let mut cols = vec![0.0; h * w * row_len];
        let mut out = vec![0.0; b * h * w * self.filters];
        let img_len = h * w * c;
        let out_len = h * w * self.filters;
        for i in 0..b {
            self.im2col(&input.data()[i * img_len..(i + 1) * img_len], h, w, &mut cols);
            dgemm(
                h * w,
                row_len,
                self.filters,
                &cols,
                false,
                &self.weights,
                false,
                0.0,
                &mut out[i * out_len..(i + 1) * out_len],
            );
        }
        for chunk in out.chunks_exact_mut(self.filters) {
            for (v, bb) in chunk.iter_mut().zip(&self.bias) {
                *v += bb;
            }
        }
        if train {
            self.cached_input = Some(input.clone());
        }
        Tensor::new(vec![b, h, w, self.filters], out).unwrap()
    }

    fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        let input = self.cached_input.take().expect("backward without forward");
        let &[b, h, w, c] = input.shape() else { unreachable!() };
        let row_len = self.kernel * self.kernel * c;
        let img_len = h * w * c;
        let out_len = h * w * self.filters;
        let mut cols = vec![0.0; h * w * row_len];
        let mut col_grad = vec![0.0; h * w * row_len];
        let mut input_grad = vec![0.0; b * img_len];
        for i in 0..b {
            let g = &grad_out.data()[i * out_len..(i + 1) * out_len];
            // dW += cols^T @ g
            self.im2col(&input.data()[i * img_len..(i + 1) * img_len], h, w, &mut cols);
            dgemm(
                row_len,
                h * w,
                self.filters,
                &cols,
                true,
                g,
                false,
                1.0,
                &mut self.w_grad,
            );
            // dX = col2im(g @ W^T)
            dgemm(
                h * w,
                self.filters,
                row_len,
                g,
                false,
                &self.weights,
                true,
                0.0,
                &mut col_grad,
            );
            self.col2im(&col_grad, h, w, &mut input_grad[i * img_len..(i + 1) * img_len]);
            for chunk in g.chunks_exact(self.filters) {
                for (bg, &gv) in self.b_grad.iter_mut().zip(chunk) {
                    *bg += gv;
                }
            }
        }
        Tensor::new(vec![b, h, w, c], input_grad).unwrap()
    }

    fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
        f(&mut self.weights, &mut self.w_grad);
        f(&mut self.bias, &mut self.b_grad);
    }

    fn zero_grads(&mut self) {
        self.w_grad.fill(0.0);
        self.b_grad.fill(0.0);
    }
}

// ---------------------------------------------------------------------------
// 2x2 max pool, stride 2; odd edges read as -inf
// ---------------------------------------------------------------------------

pub struct MaxPool2DLayer {
    in_shape: Vec<usize>,
    argmax: Vec<usize>,
}

impl MaxPool2DLayer {
    pub fn new() -> Self {
        MaxPool2DLayer {
            in_shape: Vec::new(),
            argmax: Vec::new(),
        }
    }
}

impl Default for MaxPool2DLayer {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for MaxPool2DLayer {
    fn forward(&mut self, input: &Tensor, train: bool) -> Tensor {
        let &[b, h, w, c] = input.shape() else {
            panic!("pool expects [B,H,W,C], got {:?}", input.shape())
        };
        let oh = (h + 1) / 2;
        let ow = (w + 1) / 2;
        let mut out = vec![0.0; b * oh * ow * c];
        let mut argmax = vec![0usize; b * oh * ow * c];
        let data = input.data();
        for i in 0..b {
            for or_ in 0..oh {
                for oc_ in 0..ow {
                    for ch in 0..c {
                        let mut best = f64::NEG_INFINITY;
                        let mut best_idx = 0;
                        for dr in 0..2 {
                            let r = or_ * 2 + dr;
                            if r >= h {
                                continue;
                            }
                            for dc in 0..2 {
                                let cc = oc_ * 2 + dc;
                                if cc >= w {
                                    continue;
                                }
                                let idx = ((i * h + r) * w + cc) * c + ch;
                                if data[idx] > best {
                                    best = data[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        let o = ((i * oh + or_) * ow + oc_) * c + ch;
                        out[o] = best;
                        argmax[o] = best_idx;
                    }
                }
            }
        }
        if train {
            self.in_shape = input.shape().to_vec();
            self.argmax = argmax;
        }
        Tensor::new(vec![b, oh, ow, c], out).unwrap()
    }

    fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        assert!(!self.in_shape.is_empty(), "backward without forward");
        let mut input_grad = vec![0.0; self.in_shape.iter().product()];
        for (&src, &g) in self.argmax.iter().zip(grad_out.data()) {
            input_grad[src] += g;
        }
        Tensor::new(self.in_shape.clone(), input_grad).unwrap()
    }
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

pub struct DenseLayer {
    pub in_dim: usize,
    pub units: usize,
    /// [in_dim, units] row-major
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub w_grad: Vec<f64>,
    pub b_grad: Vec<f64>,
    cached_input: Option<Tensor>,
}

impl DenseLayer {
    pub fn new(in_dim: usize, units: usize, rng: &mut ChaCha8Rng) -> Self {
        DenseLayer {
            in_dim,
            units,
            weights: fan_in_uniform(rng, in_dim, in_dim * units),
            bias: vec![0.0; units],
            w_grad: vec![0.0; in_dim * units],
            b_grad: vec![0.0; units],
            cached_input: None,
        }
    }
}

impl Layer for DenseLayer {
    fn forward(&mut self, input: &Tensor, train: bool) -> Tensor {
        let &[b, d] = input.shape() else {
            panic!("dense expects [B,D], got {:?}", input.shape())
        };
        assert_eq!(d, self.in_dim, "dense input dim mismatch");
        let mut out = vec![0.0; b * self.units];
        dgemm(
            b,
            d,
            self.units,
            input.data(),
            false,
            &self.weights,
            false,
            0.0,
            &mut out,
        );
        for chunk in out.chunks_exact_mut(self.units) {
            for (v, bb) in chunk.iter_mut().zip(&self.bias) {
                *v += bb;
            }
        }
        if train {
            self.cached_input = Some(input.clone());
        }
        Tensor::new(vec![b, self.units], out).unwrap()
    }

    fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        let input = self.cached_input.take().expect("backward without forward");
        let &[b, d] = input.shape() else { unreachable!() };
        dgemm(
            d,
            b,
            self.units,
            input.data(),
            true,
            grad_out.data(),
            false,
            1.0,
            &mut self.w_grad,
        );
        for chunk in grad_out.data().chunks_exact(self.units) {
            for (bg, &g) in self.b_grad.iter_mut().zip(chunk) {
                *bg += g;
            }
        }
        let mut input_grad = vec![0.0; b * d];
        dgemm(
            b,
            self.units,
            d,
            grad_out.data(),
            false,
            &self.weights,
            true,
            0.0,
            &mut input_grad,
        );
        Tensor::new(vec![b, d], input_grad).unwrap()
    }

    fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
        f(&mut self.weights, &mut self.w_grad);
        f(&mut self.bias, &mut self.b_grad);
    }

    fn zero_grads(&mut self) {
        self.w_grad.fill(0.0);
        self.b_grad.fill(0.0);
    }
}

// ---------------------------------------------------------------------------
// ReLU, Dropout, Flatten
// ---------------------------------------------------------------------------

pub struct ReluLayer {
    mask: Vec<bool>,
    shape: Vec<usize>,
}

impl ReluLayer {
    pub fn new() -> Self {
        ReluLayer {
            mask: Vec::new(),
            shape: Vec::new(),
        }
    }
}

impl Default for ReluLayer {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for ReluLayer {
    fn forward(&mut self, input: &Tensor, train: bool) -> Tensor {
        let out: Vec<f64> = input.data().iter().map(|&v| v.max(0.0)).collect();
        if train {
            self.mask = input.data().iter().map(|&v| v > 0.0).collect();
            self.shape = input.shape().to_vec();
        }
        Tensor::new(input.shape().to_vec(), out).unwrap()
    }

    fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        let data = grad_out
            .data()
            .iter()
            .zip(&self.mask)
            .map(|(&g, &keep)| if keep { g } else { 0.0 })
            .collect();
        Tensor::new(self.shape.clone(), data).unwrap()
    }
}

/// Inverted dropout: train-time activations scale by 1/keep, inference is
/// the identity.
pub struct DropoutLayer {
    pub rate: f64,
    rng: ChaCha8Rng,
    mask: Vec<f64>,
    shape: Vec<usize>,
}

impl DropoutLayer {
    pub fn new(rate: f64, seed: u64) -> Self {
        assert!((0.0..1.0).contains(&rate));
        DropoutLayer {
            rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mask: Vec::new(),
            shape: Vec::new(),
        }
    }
}

impl Layer for DropoutLayer {
    fn forward(&mut self, input: &Tensor, train: bool) -> Tensor {
        if !train {
            return input.clone();
        }
        let keep = 1.0 - self.rate;
        self.mask = input
            .data()
            .iter()
            .map(|_| {
                if self.rng.gen_bool(keep) {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect();
        self.shape = input.shape().to_vec();
        let out = input
            .data()
            .iter()
            .zip(&self.mask)
            .map(|(&v, &m)| v * m)
            .collect();
        Tensor::new(self.shape.clone(), out).unwrap()
    }

    fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        let data = grad_out
            .data()
            .iter()
            .zip(&self.mask)
            .map(|(&g, &m)| g * m)
            .collect();
        Tensor::new(self.shape.clone(), data).unwrap()
    }
}

pub struct FlattenLayer {
    in_shape: Vec<usize>,
}

impl FlattenLayer {
    pub fn new() -> Self {
        FlattenLayer {
            in_shape: Vec::new(),
        }
    }
}

impl Default for FlattenLayer {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for FlattenLayer {
    fn forward(&mut self, input: &Tensor, train: bool) -> Tensor {
        let b = input.shape()[0];
        let rest: usize = input.shape()[1..].iter().product();
        if train {
            self.in_shape = input.shape().to_vec();
        }
        input.clone().reshape(vec![b, rest])
    }

    fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        grad_out.clone().reshape(self.in_shape.clone())
    }
}
