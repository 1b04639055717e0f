//! Seeded k-means with restarts on three Gaussian blobs.
//!
//! ```text
//! cargo run --release --example kmeans_clustering
//! ```

use actembed::cluster::{kmeans, KMeansConfig};
use actembed::Matrix;
use rand_distr::{Distribution, Normal};

fn main() -> actembed::Result<()> {
    let mut rng = actembed::seed::rng(5);
    let noise = Normal::new(0.0, 0.5).expect("valid std");
    let centers = [[0.0, 0.0], [5.0, 0.0], [2.5, 4.0]];
    let rows: Vec<[f64; 2]> = (0..300)
        .map(|i| {
            let c = centers[i % 3];
            [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]
        })
        .collect();
    let points = Matrix::from_rows(&rows);

    let (model, assignment) = kmeans(&points, &KMeansConfig::new(3), 42)?;
    println!("inertia {:.3}", model.inertia);
    println!("restart inertias {:?}", model.restart_inertias.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>());
    for c in 0..model.k {
        let size = assignment.labels.iter().filter(|&&l| l == c).count();
        println!("cluster {c}: centroid ({:.2}, {:.2}), {size} points", model.centroids.get(c, 0), model.centroids.get(c, 1));
    }
    Ok(())
}
