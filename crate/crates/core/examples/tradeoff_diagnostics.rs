//! Numerical checks of the variance/connectedness trade-off: the
//! finite-difference identity `λσ²' + (1−λ)κ' = 0`, and for commuting
//! matrices the exact eigenbasis solution and derivatives.

use hybrid_risk::riskmodel::RiskModel;
use hybrid_risk::surface::{analytic_risk_curves, tradeoff_check};
use nalgebra::{DMatrix, DVector};

fn main() -> hybrid_risk::Result<()> {
    let sigma = DMatrix::from_row_slice(3, 3, &[0.040, 0.030, 0.020, 0.030, 0.090, 0.010, 0.020, 0.010, 0.160]);
    let conn = DMatrix::from_row_slice(3, 3, &[0.100, -0.020, 0.0, -0.020, 0.050, 0.010, 0.0, 0.010, 0.020]);
    let model = RiskModel::unlabeled(DVector::zeros(3), sigma, conn)?;
    println!("finite differences");
    for lambda in [0.25, 0.5, 0.75] {
        let d = tradeoff_check(&model, lambda, 1e-5)?;
        println!(
            "  lambda {lambda:.2}: slope {:.6} (expected {:.6}), relative residual {:.2e}",
            d.slope,
            d.expected_slope(),
            d.relative_residual()
        );
    }

    let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_row_slice(v));
    let commuting = RiskModel::unlabeled(DVector::zeros(3), diag(&[1.0, 2.0, 4.0]), diag(&[4.0, 2.0, 1.0]))?;
    println!("analytic (commuting pair)");
    for p in analytic_risk_curves(&commuting, &[0.25, 0.5, 0.75])? {
        println!(
            "  lambda {:.2}: sigma2' {:+.5} kappa' {:+.5} identity {:.1e}",
            p.lambda,
            p.dsigma2,
            p.dkappa,
            p.identity_residual()
        );
    }
    Ok(())
}
