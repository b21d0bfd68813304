//! Rank assets by their marginal contribution to portfolio connectedness.

use hybrid_risk::analytics::{connectedness_betas, ranked_betas};
use hybrid_risk::estimation::{estimate_model, EstimationConfig};
use hybrid_risk::riskmodel::portfolio_risks;
use hybrid_risk::surface::solve_at;
use hybrid_risk::synth::{generate, Regime};

fn main() -> hybrid_risk::Result<()> {
    let panel = generate(7, 8, 800, &Regime::default_var1(8))?;
    let last = *panel.dates().last().expect("non-empty panel");
    let model = estimate_model(&panel, last, &EstimationConfig::default())?.model;

    let report = solve_at(&model, 0.5, true)?;
    let kappa = portfolio_risks(&model, &report.weights)?.connectedness;
    let ranked = ranked_betas(&model, &report.weights)?;

    for (label, beta) in ranked.iter().take(5) {
        println!("{label:<10} {beta:.5}");
    }
    let total = report.weights.weights().dot(&connectedness_betas(&model, &report.weights)?);
    println!("sum w*beta = {total:.6e}, 2*kappa = {:.6e}", 2.0 * kappa);
    Ok(())
}
