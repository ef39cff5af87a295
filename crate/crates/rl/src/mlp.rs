//! Fully connected network with tanh hidden layers and a linear output,
//! stored as one flat parameter vector.
//!
//! Layer `l` occupies `W_l` (out x in, row-major) followed by `b_l` (out).
//! Batches are row-major `batch x features`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::RlError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations kept by [`Mlp::forward_cached`] for the backward pass.
#[derive(Clone, Debug)]
pub struct Forward {
    batch: usize,
    /// `acts[0]` is the input, `acts[l]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl Forward {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("at least the input")
    }
}

/// `c = a * b + beta * c` for `a: m x k`, `b: k x n`, `c: m x n` with
/// explicit (row, column) strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    sa: (usize, usize),
    b: &[f64],
    sb: (usize, usize),
    beta: f64,
    c: &mut [f64],
    sc: (usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |rows: usize, cols: usize, s: (usize, usize)| (rows - 1) * s.0 + (cols - 1) * s.1;
    assert!(k == 0 || (a.len() > last(m, k, sa) && b.len() > last(k, n, sb)));
    assert!(c.len() > last(m, n, sc));
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is a unique borrow that does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            sa.0 as isize,
            sa.1 as isize,
            b.as_ptr(),
            sb.0 as isize,
            sb.1 as isize,
            beta,
            c.as_mut_ptr(),
            sc.0 as isize,
            sc.1 as isize,
        );
    }
}

impl Mlp {
    /// Uniform `±1/sqrt(fan_in)` initialization; the output layer is scaled
    /// by `output_scale` (small values keep initial policies near zero).
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output_scale: f64, rng: &mut R) -> Self {
        let mut net = Mlp::zeros(sizes);
        let layers = net.layers();
        for l in 0..layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let scale = if l + 1 == layers { output_scale } else { 1.0 };
            let (w, _) = net.offsets(l);
            for p in &mut net.params[w..w + fan_in * fan_out] {
                *p = scale * rng.random_range(-bound..bound);
            }
        }
        net
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        assert!(sizes.iter().all(|s| *s > 0), "layer sizes must be positive");
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Mlp {
            sizes: sizes.to_vec(),
            params: vec![0.0; count],
        }
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self, RlError> {
        let net = Mlp::zeros(sizes);
        if params.len() != net.params.len() {
            return Err(RlError::ShapeMismatch(format!(
                "MLP {sizes:?} needs {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty sizes")
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offsets of `W_l` and `b_l` in the flat vector.
    pub fn offsets(&self, layer: usize) -> (usize, usize) {
        let w: usize = self.sizes[..layer + 1].windows(2).map(|p| p[0] * p[1] + p[1]).sum();
        (w, w + self.sizes[layer] * self.sizes[layer + 1])
    }

    /// `(name, shape)` for each tensor, in storage order.
    pub fn manifest(&self, prefix: &str) -> Vec<(String, Vec<usize>)> {
        (0..self.layers())
            .flat_map(|l| {
                let (i, o) = (self.sizes[l], self.sizes[l + 1]);
                [
                    (format!("{prefix}.l{l}.weight"), vec![o, i]),
                    (format!("{prefix}.l{l}.bias"), vec![o]),
                ]
            })
            .collect()
    }

    pub fn forward(&self, input: &[f64], batch: usize) -> Vec<f64> {
        let mut fwd = self.forward_cached(input, batch);
        fwd.acts.pop().expect("output layer")
    }

    pub fn forward_cached(&self, input: &[f64], batch: usize) -> Forward {
        assert_eq!(input.len(), batch * self.input_dim(), "input shape");
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        for l in 0..self.layers() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w, b) = self.offsets(l);
            let bias = &self.params[b..b + fan_out];
            let mut z: Vec<f64> = (0..batch).flat_map(|_| bias.iter().copied()).collect();
            gemm(
                batch,
                fan_in,
                fan_out,
                &acts[l],
                (fan_in, 1),
                &self.params[w..b],
                (1, fan_in),
                1.0,
                &mut z,
                (fan_out, 1),
            );
            if l + 1 < self.layers() {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        Forward { batch, acts }
    }

    /// Accumulate `d(sum upstream . output)/d params` into `grad` and return
    /// the gradient with respect to the input batch.
    pub fn backward(&self, fwd: &Forward, upstream: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let batch = fwd.batch;
        assert_eq!(upstream.len(), batch * self.output_dim(), "upstream shape");
        assert_eq!(grad.len(), self.params.len(), "gradient shape");
        let mut delta = upstream.to_vec();
        for l in (0..self.layers()).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            if l + 1 < self.layers() {
                for (d, a) in delta.iter_mut().zip(&fwd.acts[l + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let (w, b) = self.offsets(l);
            // dW += delta^T x
            gemm(
                fan_out,
                batch,
                fan_in,
                &delta,
                (1, fan_out),
                &fwd.acts[l],
                (fan_in, 1),
                1.0,
                &mut grad[w..b],
                (fan_in, 1),
            );
            for row in delta.chunks_exact(fan_out) {
                for (g, d) in grad[b..b + fan_out].iter_mut().zip(row) {
                    *g += d;
                }
            }
            // dx = delta W
            let mut dx = vec![0.0; batch * fan_in];
            gemm(
                batch,
                fan_out,
                fan_in,
                &delta,
                (fan_out, 1),
                &self.params[w..b],
                (fan_in, 1),
                0.0,
                &mut dx,
                (fan_in, 1),
            );
            delta = dx;
        }
        delta
    }

    /// `self = tau * source + (1 - tau) * self`.
    pub fn polyak_from(&mut self, source: &Mlp, tau: f64) {
        assert_eq!(self.sizes, source.sizes, "polyak between different shapes");
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = tau * s + (1.0 - tau) * *t;
        }
    }
}

pub fn check_finite(what: &str, values: &[f64]) -> Result<(), RlError> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(index) => Err(RlError::NonFiniteGradient {
            what: what.to_string(),
            index,
        }),
    }
}
