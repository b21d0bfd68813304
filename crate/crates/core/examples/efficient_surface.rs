//! Full (μ₀, λ) surface with long-only weights, written as CSV and JSON.
//!
//! Run with an output stem, e.g. `cargo run --example efficient_surface -- /tmp/surface`.

use std::path::PathBuf;

use hybrid_risk::estimation::ModelDocument;
use hybrid_risk::surface::{default_lambda_grid, default_mu0_grid, full_surface};

fn main() -> hybrid_risk::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/misaligned_3.json");
    let model = ModelDocument::read(path)?.to_model()?;
    let surface = full_surface(&model, &default_mu0_grid(&model), &default_lambda_grid(), true)?;

    let binding = surface
        .points
        .iter()
        .filter(|p| p.solved().is_some_and(|c| c.binding_return))
        .count();
    println!(
        "{} cells, {} infeasible, {} with a binding return target",
        surface.points.len(),
        surface.infeasible_count(),
        binding
    );

    if let Some(stem) = std::env::args().nth(1).map(PathBuf::from) {
        let (csv, json) = (stem.with_extension("csv"), stem.with_extension("json"));
        surface.write_files(&csv, &json)?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}
