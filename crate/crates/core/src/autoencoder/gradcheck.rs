//! Central finite-difference check of [`backward`].

use rand::Rng;
use rand_distr::StandardNormal;

use super::grad::{backward, batch_loss, Objective};
use super::network::Activations;
use super::{init_network, LossWeights, MlpParams, Mode, DEFAULT_LEAKY_SLOPE};
use crate::features::{FeatureMatrix, RowMeta};
use crate::ingest::SessionRef;
use crate::neighbors::NeighborhoodIndex;
use crate::{seed, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckTolerance {
    pub step: f64,
    /// Allowed `|analytic − numeric| / max(|analytic|, |numeric|)`.
    pub relative: f64,
    /// Absolute differences below this always pass.
    pub absolute: f64,
}

impl Default for GradCheckTolerance {
    fn default() -> Self {
        Self { step: 1e-5, relative: 1e-5, absolute: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    /// Parameters whose ±step perturbation flipped a LeakyReLU branch; the
    /// difference quotient straddles the kink there and is not compared.
    pub skipped_kinks: usize,
    pub failures: usize,
    /// Largest relative error among parameters above the absolute floor.
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

fn branch_pattern(params: &MlpParams, data: &Matrix, rows: &[usize]) -> Vec<bool> {
    let mut acts = Activations::default();
    let hidden = params.layers.len() - 1;
    let mut out = Vec::new();
    for &r in rows {
        params.forward_into(data.row(r), &mut acts);
        for pre in &acts.pre[..hidden] {
            out.extend(pre.iter().map(|&z| z >= 0.0));
        }
    }
    out
}

/// Compares the analytic gradient of the batch-mean objective with central
/// differences of [`batch_loss`] for every parameter.
pub fn check_gradients(
    params: &MlpParams,
    obj: &Objective<'_>,
    rows: &[usize],
    tol: GradCheckTolerance,
) -> Result<GradCheckReport, super::ModelError> {
    let (analytic, _) = backward(params, obj, rows)?;
    let analytic: Vec<f64> = analytic.values().copied().collect();
    let base_pattern = branch_pattern(params, obj.data, rows);
    let mut probe = params.clone();
    let mut report =
        GradCheckReport { checked: 0, skipped_kinks: 0, failures: 0, max_relative_error: 0.0, max_absolute_error: 0.0 };
    for (idx, &a) in analytic.iter().enumerate() {
        let original = *probe.values().nth(idx).expect("index within parameter count");
        let set = |p: &mut MlpParams, v: f64| *p.values_mut().nth(idx).expect("index within parameter count") = v;

        set(&mut probe, original + tol.step);
        let plus = batch_loss(&probe, obj, rows)?;
        let plus_pattern = branch_pattern(&probe, obj.data, rows);
        set(&mut probe, original - tol.step);
        let minus = batch_loss(&probe, obj, rows)?;
        let minus_pattern = branch_pattern(&probe, obj.data, rows);
        set(&mut probe, original);

        if plus_pattern != base_pattern || minus_pattern != base_pattern {
            report.skipped_kinks += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * tol.step);
        let abs = (a - numeric).abs();
        report.checked += 1;
        report.max_absolute_error = report.max_absolute_error.max(abs);
        if abs <= tol.absolute {
            continue;
        }
        let rel = abs / a.abs().max(numeric.abs());
        report.max_relative_error = report.max_relative_error.max(rel);
        if rel > tol.relative {
            report.failures += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckCase {
    pub layer_sizes: Vec<usize>,
    pub mode: Mode,
    pub report: GradCheckReport,
}

/// Networks exercised by [`run_gradient_suite`].
const SUITE_SHAPES: [&[usize]; 5] = [&[14, 8, 4], &[14, 8, 4], &[6, 4, 2], &[10, 6, 3], &[12, 7, 5, 3]];

/// Gradient check over five small random networks and all four modes. Each
/// network gets random weights and biases and 12 random rows split over two
/// sessions; the batch is the first 8 rows.
pub fn run_gradient_suite(seed_value: u64) -> Result<Vec<GradCheckCase>, super::ModelError> {
    let mut cases = Vec::new();
    for (net, sizes) in SUITE_SHAPES.iter().enumerate() {
        let net_seed = seed::derive(seed_value, &[net as u64]);
        let mut params = init_network(sizes, DEFAULT_LEAKY_SLOPE, net_seed)?;
        let mut rng = seed::rng(seed::derive(net_seed, &[1]));
        for b in params.layers.iter_mut().flat_map(|l| l.bias.iter_mut()) {
            *b = rng.random_range(-0.5..0.5);
        }
        let dim = sizes[0];
        let rows = 12;
        let data = Matrix::from_vec(rows, dim, (0..rows * dim).map(|_| rng.sample(StandardNormal)).collect());
        let meta = (0..rows)
            .map(|i| RowMeta { session: SessionRef::new("g", (i % 2).to_string()), segment_index: i / 2, label: 0 })
            .collect();
        let features = FeatureMatrix { data, meta };
        let neighbors = NeighborhoodIndex::build(&features, 2, 3);
        let batch: Vec<usize> = (0..8).collect();
        for mode in Mode::ALL {
            let weights = LossWeights::for_mode(mode, 0.3, 0.25)?;
            let obj = Objective { data: &features.data, neighbors: &neighbors, weights };
            let report = check_gradients(&params, &obj, &batch, GradCheckTolerance::default())?;
            cases.push(GradCheckCase { layer_sizes: sizes.to_vec(), mode, report });
        }
    }
    Ok(cases)
}
