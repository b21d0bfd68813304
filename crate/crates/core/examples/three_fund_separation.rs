//! Decompose the hybrid optimum into minimum-variance, minimum-connectedness
//! and maximum-return funds. With misaligned Σ and C the coefficients go
//! negative: the optimum leaves the triangle the funds span.

use hybrid_risk::analytics::separation_scan;
use hybrid_risk::estimation::ModelDocument;

fn main() -> hybrid_risk::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/misaligned_3.json");
    let model = ModelDocument::read(path)?.to_model()?;
    let grid: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let scan = separation_scan(&model, &grid)?;

    println!("{:>6} {:>9} {:>9} {:>9}", "lambda", "mv", "mc", "max_mu");
    for row in &scan.rows {
        let [a, b, c] = row.decomposition.alphas;
        println!("{:>6.1} {a:>9.4} {b:>9.4} {c:>9.4}", row.lambda);
    }
    println!("convex everywhere: {} (min alpha {:.4})", scan.all_convex, scan.min_alpha);
    Ok(())
}
