//! ACC, ARI and NMI for a predicted labeling against ground truth.
//!
//! ```text
//! cargo run --release --example clustering_metrics
//! ```

use actembed::metrics::{acc, ari, confusion_after_assignment, contingency, nmi};

fn main() -> actembed::Result<()> {
    let truth = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2];
    let pred = [2, 2, 2, 0, 0, 0, 0, 1, 1, 1, 1, 1];
    let table = contingency(&pred, &truth)?;
    println!("ACC {:.4}", acc(&table));
    println!("ARI {:.4}", ari(&table)?);
    println!("NMI {:.4}", nmi(&table));

    let names: Vec<String> = ["sit", "walk", "run"].map(String::from).into();
    print!("{}", confusion_after_assignment(&table).to_csv_string(&names));

    let relabeled: Vec<usize> = truth.iter().map(|&l| (l + 1) % 3).collect();
    let perfect = contingency(&relabeled, &truth)?;
    println!("relabeled truth: ACC {} ARI {} NMI {}", acc(&perfect), ari(&perfect)?, nmi(&perfect));
    Ok(())
}
