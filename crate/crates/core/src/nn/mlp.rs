use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::{Error, Result};

/// Layer sizes of a fully connected network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
}

impl Architecture {
    pub fn new(input: usize, hidden: Vec<usize>, output: usize) -> Self {
        Architecture { input, hidden, output }
    }

    /// `(fan_in, fan_out)` of every layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut sizes = vec![self.input];
        sizes.extend(&self.hidden);
        sizes.push(self.output);
        sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Weights stored `fan_in x fan_out`, so a batch forward is `x . W + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense {
            weight: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }
}

/// Rectified hidden layers and an identity output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    arch: Architecture,
    layers: Vec<Dense>,
}

/// Parameter-shaped container for gradients and optimizer moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

/// Activations kept for the backward pass.
pub struct ForwardCache {
    /// Input followed by every hidden activation.
    activations: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl Mlp {
    /// He-uniform hidden layers and a zero output layer, so a fresh network
    /// outputs zeros everywhere.
    pub fn new<R: Rng>(arch: Architecture, rng: &mut R) -> Self {
        let dims = arch.layer_dims();
        let last = dims.len() - 1;
        let layers = dims
            .iter()
            .enumerate()
            .map(|(l, &(fan_in, fan_out))| {
                let mut layer = Dense::zeros(fan_in, fan_out);
                if l < last {
                    let limit = (6.0 / fan_in as f64).sqrt();
                    layer.weight.mapv_inplace(|_| rng.random_range(-limit..limit));
                }
                layer
            })
            .collect();
        Mlp { arch, layers }
    }

    pub fn zeros(arch: Architecture) -> Self {
        let layers = arch.layer_dims().into_iter().map(|(i, o)| Dense::zeros(i, o)).collect();
        Mlp { arch, layers }
    }

    pub fn from_layers(arch: Architecture, layers: Vec<Dense>) -> Result<Self> {
        let dims = arch.layer_dims();
        if dims.len() != layers.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                got: layers.len(),
            });
        }
        for (&(i, o), layer) in dims.iter().zip(&layers) {
            if layer.weight.dim() != (i, o) || layer.bias.len() != o {
                return Err(Error::DimensionMismatch {
                    expected: i * o,
                    got: layer.weight.len(),
                });
            }
        }
        Ok(Mlp { arch, layers })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let input = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(input)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        if x.ncols() != self.arch.input {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input,
                got: x.ncols(),
            });
        }
        let mut activations = vec![x.to_owned()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = activations[l].dot(&layer.weight) + &layer.bias;
            if l == last {
                return Ok(ForwardCache { activations, output: z });
            }
            z.mapv_inplace(|v| v.max(0.0));
            activations.push(z);
        }
        unreachable!("network has an output layer")
    }

    /// Gradients of a loss given `d loss / d output` for the cached batch.
    pub fn backward(&self, cache: &ForwardCache, grad_output: Array2<f64>) -> Gradients {
        let mut delta = grad_output;
        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &cache.activations[l];
            let weight = input.t().dot(&delta);
            let bias = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut next = delta.dot(&self.layers[l].weight.t());
                next.zip_mut_with(input, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = next;
            }
            grads.push(Dense { weight, bias });
        }
        grads.reverse();
        Gradients { layers: grads }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Parameter `k` in layer order, weights (row-major) before biases.
    pub fn param(&self, k: usize) -> f64 {
        *locate(&self.layers, k)
    }

    pub fn set_param(&mut self, k: usize, v: f64) {
        *locate_mut(&mut self.layers, k) = v;
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }
}

fn locate(layers: &[Dense], mut k: usize) -> &f64 {
    for layer in layers {
        if k < layer.weight.len() {
            return &layer.weight.as_slice().expect("standard layout")[k];
        }
        k -= layer.weight.len();
        if k < layer.bias.len() {
            return &layer.bias[k];
        }
        k -= layer.bias.len();
    }
    panic!("parameter index out of range")
}

fn locate_mut(layers: &mut [Dense], mut k: usize) -> &mut f64 {
    for layer in layers {
        if k < layer.weight.len() {
            return &mut layer.weight.as_slice_mut().expect("standard layout")[k];
        }
        k -= layer.weight.len();
        if k < layer.bias.len() {
            return &mut layer.bias[k];
        }
        k -= layer.bias.len();
    }
    panic!("parameter index out of range")
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| Dense::zeros(l.weight.nrows(), l.weight.ncols()))
                .collect(),
        }
    }

    pub fn get(&self, k: usize) -> f64 {
        *locate(&self.layers, k)
    }

    pub fn same_shape(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weight.dim() == l.weight.dim() && g.bias.len() == l.bias.len())
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
