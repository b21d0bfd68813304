//! Trace (σ², κ) as λ moves from pure connectedness to pure variance.

use hybrid_risk::estimation::ModelDocument;
use hybrid_risk::surface::{default_lambda_grid, risk_risk_frontier};

fn main() -> hybrid_risk::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/misaligned_3.json");
    let model = ModelDocument::read(path)?.to_model()?;
    let frontier = risk_risk_frontier(&model, &default_lambda_grid(), false)?;

    println!("{:>6} {:>10} {:>10}", "lambda", "variance", "conn");
    for p in &frontier.points {
        let cell = p.solved().expect("no return target, every point solves");
        println!("{:>6.2} {:>10.5} {:>10.5}", p.lambda, cell.variance, cell.connectedness);
    }
    Ok(())
}
