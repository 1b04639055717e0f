//! Finite-difference check of the analytic gradients on a tiny network.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use actembed::autoencoder::{check_gradients, init_network, GradCheckTolerance, LossWeights, Mode, Objective};
use actembed::features::{FeatureMatrix, FeatureVector, RowMeta};
use actembed::ingest::SessionRef;
use actembed::neighbors::NeighborhoodIndex;
use rand::Rng;

fn main() -> actembed::Result<()> {
    let mut rng = actembed::seed::rng(3);
    let vectors = (0..12)
        .map(|i| FeatureVector {
            values: (0..5).map(|_| rng.random_range(-1.0..1.0)).collect(),
            meta: RowMeta { session: SessionRef::new("s", (i / 6).to_string()), segment_index: i % 6, label: 0 },
        })
        .collect();
    let features = FeatureMatrix::from_vectors(vectors)?;
    let neighbors = NeighborhoodIndex::build(&features, 2, 3);
    let params = init_network(&[5, 4, 2], 0.01, 11)?;
    let rows: Vec<usize> = (0..features.len()).collect();

    for mode in Mode::ALL {
        let obj = Objective { data: &features.data, neighbors: &neighbors, weights: LossWeights::for_mode(mode, 0.3, 0.3)? };
        let report = check_gradients(&params, &obj, &rows, GradCheckTolerance::default())?;
        println!(
            "{:<8} {} checked {} kinks {} max_rel {:.2e}",
            mode,
            if report.passed() { "PASS" } else { "FAIL" },
            report.checked,
            report.skipped_kinks,
            report.max_relative_error
        );
    }
    Ok(())
}
