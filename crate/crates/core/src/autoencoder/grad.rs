use super::network::Activations;
use super::{LossWeights, MlpParams, ModelError, SampleLosses};
use crate::matrix::squared_distance;
use crate::neighbors::NeighborhoodIndex;
use crate::Matrix;

/// Everything the objective needs besides the parameters: the input rows, their
/// neighbor lists (indices into `data`) and the term weights.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub data: &'a Matrix,
    pub neighbors: &'a NeighborhoodIndex,
    pub weights: LossWeights,
}

/// Loss terms for a reconstruction of row `row`, plus `∂loss/∂reconstruction`
/// when `grad` is given. A row without temporal (or feature) neighbors uses its
/// reconstruction loss in place of that term.
fn terms(obj: &Objective<'_>, row: usize, recon: &[f64], grad: Option<&mut [f64]>) -> SampleLosses {
    let x = obj.data.row(row);
    let ae = squared_distance(x, recon);
    let mean_term = |list: &[usize]| -> f64 {
        if list.is_empty() {
            ae
        } else {
            list.iter().map(|&j| squared_distance(obj.data.row(j), recon)).sum::<f64>() / list.len() as f64
        }
    };
    let temporal = &obj.neighbors.temporal[row];
    let feature = &obj.neighbors.feature[row];
    let losses = SampleLosses { ae, tc: mean_term(temporal), lp: mean_term(feature) };

    if let Some(g) = grad {
        let w = obj.weights;
        for (d, gd) in g.iter_mut().enumerate() {
            let r = recon[d];
            let diff_ae = r - x[d];
            // mean over neighbors of (x̃ − x_j), falling back to (x̃ − x)
            let mean_diff = |list: &[usize]| -> f64 {
                if list.is_empty() {
                    diff_ae
                } else {
                    list.iter().map(|&j| r - obj.data.get(j, d)).sum::<f64>() / list.len() as f64
                }
            };
            *gd = 2.0 * (w.ae * diff_ae + w.tc * mean_diff(temporal) + w.lp * mean_diff(feature));
        }
    }
    losses
}

/// Per-sample loss terms of row `row` under `params`.
pub fn sample_losses(params: &MlpParams, obj: &Objective<'_>, row: usize) -> Result<SampleLosses, ModelError> {
    let recon = params.forward(obj.data.row(row))?.reconstruction;
    Ok(terms(obj, row, &recon, None))
}

/// Mean weighted loss over `rows`.
pub fn batch_loss(params: &MlpParams, obj: &Objective<'_>, rows: &[usize]) -> Result<f64, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    check_data(params, obj)?;
    let mut acts = Activations::default();
    let mut total = 0.0;
    for &row in rows {
        params.forward_into(obj.data.row(row), &mut acts);
        let recon = acts.inputs.last().expect("forward fills outputs");
        total += obj.weights.combine(terms(obj, row, recon, None));
    }
    Ok(total / rows.len() as f64)
}

fn check_data(params: &MlpParams, obj: &Objective<'_>) -> Result<(), ModelError> {
    if obj.data.cols() != params.input_dim() {
        return Err(ModelError::DimMismatch { expected: params.input_dim(), found: obj.data.cols() });
    }
    Ok(())
}

/// Exact gradient of the batch-mean objective with respect to every weight and
/// bias, together with the batch loss. Samples are accumulated in `rows` order.
pub fn backward(params: &MlpParams, obj: &Objective<'_>, rows: &[usize]) -> Result<(MlpParams, f64), ModelError> {
    if rows.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    check_data(params, obj)?;
    let scale = 1.0 / rows.len() as f64;
    let depth = params.layers.len();
    let mut grads = params.zeros_like();
    let mut acts = Activations::default();
    let mut delta: Vec<f64> = Vec::new();
    let mut next: Vec<f64> = Vec::new();
    let mut total = 0.0;

    for &row in rows {
        params.forward_into(obj.data.row(row), &mut acts);
        let recon = &acts.inputs[depth];
        delta.clear();
        delta.resize(recon.len(), 0.0);
        total += obj.weights.combine(terms(obj, row, recon, Some(&mut delta)));
        delta.iter_mut().for_each(|d| *d *= scale);

        // output layer is affine, so delta already equals ∂L/∂pre
        for l in (0..depth).rev() {
            let layer = &params.layers[l];
            let input = &acts.inputs[l];
            let g = &mut grads.layers[l];
            for (o, &d) in delta.iter().enumerate() {
                g.bias[o] += d;
                for (gw, &a) in g.weights.row_mut(o).iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if l == 0 {
                break;
            }
            next.clear();
            next.resize(layer.inputs(), 0.0);
            for (o, &d) in delta.iter().enumerate() {
                for (n, &w) in next.iter_mut().zip(layer.weights.row(o)) {
                    *n += w * d;
                }
            }
            for (n, &z) in next.iter_mut().zip(&acts.pre[l - 1]) {
                *n *= params.activation_slope(z);
            }
            std::mem::swap(&mut delta, &mut next);
        }
    }
    Ok((grads, total * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::init_network;
    use crate::features::RowMeta;
    use crate::ingest::SessionRef;

    fn fixture(rows: usize, dim: usize) -> (Matrix, NeighborhoodIndex) {
        let mut rng = crate::seed::rng(5);
        use rand::Rng;
        let data = Matrix::from_vec(rows, dim, (0..rows * dim).map(|_| rng.random_range(-1.0..1.0)).collect());
        let meta: Vec<RowMeta> = (0..rows)
            .map(|i| RowMeta { session: SessionRef::new("s", (i % 2).to_string()), segment_index: i / 2, label: 0 })
            .collect();
        let fm = crate::features::FeatureMatrix { data: data.clone(), meta };
        (data, NeighborhoodIndex::build(&fm, 2, 2))
    }

    #[test]
    fn ae_only_matches_plain_reconstruction_gradient() {
        let (data, nb) = fixture(6, 4);
        let params = init_network(&[4, 3], 0.01, 1).unwrap();
        let obj = Objective { data: &data, neighbors: &nb, weights: LossWeights::joint(0.0, 0.0).unwrap() };
        let rows = [0, 3, 5];
        let (g, loss) = backward(&params, &obj, &rows).unwrap();

        // reconstruction-only objective with empty neighbor lists
        let empty = NeighborhoodIndex { temporal: vec![vec![]; 6], feature: vec![vec![]; 6], ..nb.clone() };
        let plain = Objective { neighbors: &empty, ..obj };
        let (g2, loss2) = backward(&params, &plain, &rows).unwrap();
        assert_eq!(g, g2);
        assert_eq!(loss, loss2);
        let expect: f64 = rows
            .iter()
            .map(|&r| squared_distance(data.row(r), &params.forward(data.row(r)).unwrap().reconstruction))
            .sum::<f64>()
            / 3.0;
        assert!((loss - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_at_global_minimum() {
        // every row identical and the network reproduces it exactly
        let data = Matrix::from_rows(&[[1.0, 2.0]; 4]);
        let meta: Vec<RowMeta> = (0..4)
            .map(|i| RowMeta { session: SessionRef::new("s", "0"), segment_index: i, label: 0 })
            .collect();
        let nb = NeighborhoodIndex::build(&crate::features::FeatureMatrix { data: data.clone(), meta }, 2, 2);
        let mut params = MlpParams::zeros(&[2, 2], 0.01).unwrap();
        for l in &mut params.layers {
            l.weights = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
        }
        let obj = Objective { data: &data, neighbors: &nb, weights: LossWeights::joint(0.3, 0.3).unwrap() };
        let (g, loss) = backward(&params, &obj, &[0, 1, 2, 3]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.values().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_loss_agrees_with_backward() {
        let (data, nb) = fixture(8, 5);
        let params = init_network(&[5, 3, 2], 0.01, 9).unwrap();
        let obj = Objective { data: &data, neighbors: &nb, weights: LossWeights::joint(0.2, 0.4).unwrap() };
        let rows: Vec<usize> = (0..8).collect();
        let (_, l1) = backward(&params, &obj, &rows).unwrap();
        let l2 = batch_loss(&params, &obj, &rows).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        assert!(matches!(backward(&params, &obj, &[]), Err(ModelError::EmptyBatch)));
    }
}
