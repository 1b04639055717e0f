use rand::Rng;

use super::ModelError;
use crate::{seed, Matrix};

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

/// Weight scale applied to the Glorot-style uniform half-width `sqrt(6 / fan_in)`.
const INIT_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `[out × in]`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { weights: Matrix::zeros(outputs, inputs), bias: vec![0.0; outputs] }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }
}

/// Encoder and mirrored decoder parameters. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// Encoder sizes `[D, h1, …, hk]`.
    pub layer_sizes: Vec<usize>,
    pub leaky_slope: f64,
    /// Encoder layers followed by decoder layers.
    pub layers: Vec<Layer>,
}

/// Embedding and reconstruction of one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub embedding: Vec<f64>,
    pub reconstruction: Vec<f64>,
}

/// Per-layer values kept for backpropagation.
#[derive(Debug, Default, Clone)]
pub(crate) struct Activations {
    /// `inputs[l]` is the input to layer `l`; the last entry is the network output.
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    pub pre: Vec<Vec<f64>>,
}

fn validate_sizes(sizes: &[usize]) -> Result<(), ModelError> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(ModelError::InvalidShape(sizes.to_vec()));
    }
    Ok(())
}

/// Layer widths through the whole autoencoder: `[D, h1, …, hk, …, h1, D]`.
fn full_sizes(sizes: &[usize]) -> Vec<usize> {
    let mut all = sizes.to_vec();
    all.extend(sizes.iter().rev().skip(1));
    all
}

/// Random weights uniform in `±0.5·sqrt(6 / fan_in)`, zero biases.
pub fn init_network(layer_sizes: &[usize], leaky_slope: f64, seed: u64) -> Result<MlpParams, ModelError> {
    validate_sizes(layer_sizes)?;
    let mut rng = seed::rng(seed);
    let widths = full_sizes(layer_sizes);
    let layers = widths
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let half = INIT_SCALE * (6.0 / fan_in as f64).sqrt();
            let data = (0..fan_in * fan_out).map(|_| rng.random_range(-half..half)).collect();
            Layer { weights: Matrix::from_vec(fan_out, fan_in, data), bias: vec![0.0; fan_out] }
        })
        .collect();
    Ok(MlpParams { layer_sizes: layer_sizes.to_vec(), leaky_slope, layers })
}

impl MlpParams {
    pub fn zeros(layer_sizes: &[usize], leaky_slope: f64) -> Result<Self, ModelError> {
        validate_sizes(layer_sizes)?;
        let layers = full_sizes(layer_sizes).windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Ok(Self { layer_sizes: layer_sizes.to_vec(), leaky_slope, layers })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layer_sizes: self.layer_sizes.clone(),
            leaky_slope: self.leaky_slope,
            layers: self.layers.iter().map(|l| Layer::zeros(l.inputs(), l.outputs())).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn embedding_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated non-empty")
    }

    pub fn encoder_depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.bias.len()).sum()
    }

    /// Every weight then bias, layer by layer.
    pub fn values(&self) -> impl Iterator<Item = &f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.as_slice().iter().chain(&l.bias))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers.iter_mut().flat_map(|l| l.weights.as_mut_slice().iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    /// Checks layer shapes against `layer_sizes` and its mirror.
    pub fn check_shapes(&self) -> Result<(), ModelError> {
        validate_sizes(&self.layer_sizes)?;
        let widths = full_sizes(&self.layer_sizes);
        let ok = self.layers.len() + 1 == widths.len()
            && self.layers.iter().zip(widths.windows(2)).all(|(l, w)| {
                l.inputs() == w[0] && l.outputs() == w[1] && l.bias.len() == w[1]
            });
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidShape(self.layer_sizes.clone()))
        }
    }

    #[inline]
    pub(crate) fn activate(&self, z: f64) -> f64 {
        if z >= 0.0 {
            z
        } else {
            self.leaky_slope * z
        }
    }

    #[inline]
    pub(crate) fn activation_slope(&self, z: f64) -> f64 {
        if z >= 0.0 {
            1.0
        } else {
            self.leaky_slope
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.input_dim() {
            return Err(ModelError::DimMismatch { expected: self.input_dim(), found: x.len() });
        }
        Ok(())
    }

    /// Runs the full network, keeping every intermediate value in `acts`.
    pub(crate) fn forward_into(&self, x: &[f64], acts: &mut Activations) {
        let depth = self.layers.len();
        acts.inputs.resize(depth + 1, Vec::new());
        acts.pre.resize(depth, Vec::new());
        acts.inputs[0].clear();
        acts.inputs[0].extend_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = acts.inputs.split_at_mut(l + 1);
            let input = &before[l];
            let pre = &mut acts.pre[l];
            pre.clear();
            pre.extend(
                layer.weights.iter_rows().zip(&layer.bias).map(|(w, b)| b + crate::matrix::dot(w, input)),
            );
            let out = &mut after[0];
            out.clear();
            if l + 1 == depth {
                out.extend_from_slice(pre);
            } else {
                out.extend(pre.iter().map(|&z| self.activate(z)));
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward, ModelError> {
        self.check_input(x)?;
        let mut acts = Activations::default();
        self.forward_into(x, &mut acts);
        Ok(Forward {
            embedding: acts.inputs[self.encoder_depth()].clone(),
            reconstruction: acts.inputs[self.layers.len()].clone(),
        })
    }

    /// Encoder output only.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_input(x)?;
        let mut h = x.to_vec();
        for layer in &self.layers[..self.encoder_depth()] {
            h = layer
                .weights
                .iter_rows()
                .zip(&layer.bias)
                .map(|(w, b)| self.activate(b + crate::matrix::dot(w, &h)))
                .collect();
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded_and_biases_are_zero() {
        let a = init_network(&[6, 4, 2], 0.01, 11).unwrap();
        let b = init_network(&[6, 4, 2], 0.01, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, init_network(&[6, 4, 2], 0.01, 12).unwrap());
        assert!(a.layers.iter().all(|l| l.bias.iter().all(|&v| v == 0.0)));
        let half = 0.5 * (6.0f64 / 6.0).sqrt();
        assert!(a.layers[0].weights.as_slice().iter().all(|w| w.abs() < half));
    }

    #[test]
    fn mirror_shapes() {
        let p = init_network(&[4, 2], 0.01, 0).unwrap();
        assert_eq!(p.layers.len(), 2);
        assert_eq!(p.layers[0].weights.shape(), (2, 4));
        assert_eq!(p.layers[1].weights.shape(), (4, 2));
        let p = init_network(&[10, 6, 3], 0.01, 0).unwrap();
        let shapes: Vec<_> = p.layers.iter().map(|l| l.weights.shape()).collect();
        assert_eq!(shapes, vec![(6, 10), (3, 6), (6, 3), (10, 6)]);
        p.check_shapes().unwrap();
        assert!(matches!(init_network(&[4], 0.01, 0), Err(ModelError::InvalidShape(_))));
        assert!(matches!(init_network(&[4, 0], 0.01, 0), Err(ModelError::InvalidShape(_))));
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = MlpParams::zeros(&[3, 2], 0.01).unwrap();
        let f = p.forward(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(f.embedding, vec![0.0; 2]);
        assert_eq!(f.reconstruction, vec![0.0; 3]);
    }

    #[test]
    fn identity_network_reconstructs_non_negative_input() {
        let mut p = MlpParams::zeros(&[2, 2], 0.01).unwrap();
        for l in &mut p.layers {
            l.weights = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
        }
        assert_eq!(p.forward(&[1.0, 2.0]).unwrap().reconstruction, vec![1.0, 2.0]);
    }

    #[test]
    fn leaky_embedding_of_negative_input() {
        let mut p = MlpParams::zeros(&[1, 1], 0.01).unwrap();
        p.layers[0].weights = Matrix::from_rows(&[[1.0]]);
        assert_eq!(p.forward(&[-1.0]).unwrap().embedding, vec![-0.01]);
        assert_eq!(p.encode(&[-1.0]).unwrap(), vec![-0.01]);
        assert!(matches!(p.forward(&[1.0, 2.0]), Err(ModelError::DimMismatch { expected: 1, found: 2 })));
    }
}
