//! PCA by power iteration with deflation, fitted on correlated data.
//!
//! ```text
//! cargo run --release --example pca_baseline
//! ```

use actembed::baselines::pca_fit;
use actembed::Matrix;
use rand_distr::{Distribution, Normal};

fn main() -> actembed::Result<()> {
    let mut rng = actembed::seed::rng(9);
    let normal = Normal::new(0.0, 1.0).expect("valid std");
    let rows: Vec<[f64; 3]> = (0..500)
        .map(|_| {
            let t = 3.0 * normal.sample(&mut rng);
            let u = normal.sample(&mut rng);
            [t + 0.1 * normal.sample(&mut rng), 0.5 * t + u, 0.2 * normal.sample(&mut rng)]
        })
        .collect();
    let data = Matrix::from_rows(&rows);

    let model = pca_fit(&data, 2, 1e-10, 20_000)?;
    for (i, var) in model.explained_variance.iter().enumerate() {
        println!("component {i}: variance {var:.4}, direction {:?}", model.components.row(i).iter().map(|v| format!("{v:+.3}")).collect::<Vec<_>>());
    }
    let projected = model.transform(&data)?;
    let restored = model.inverse_transform(&projected)?;
    let err: f64 = data.as_slice().iter().zip(restored.as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / data.rows() as f64;
    println!("mean squared reconstruction error with 2 of 3 components: {err:.4}");
    Ok(())
}
