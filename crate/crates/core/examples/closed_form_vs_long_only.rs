//! Minimum-variance portfolio with and without short sales.
//!
//! With `C = Σ` the hybrid objective is plain variance for every λ. The
//! unconstrained optimum shorts asset 3; forbidding that costs variance.

use hybrid_risk::qp;
use hybrid_risk::riskmodel::{hybrid_matrix, RiskModel};
use nalgebra::{DMatrix, DVector};

fn main() -> hybrid_risk::Result<()> {
    let sigma = DMatrix::from_row_slice(
        3,
        3,
        &[4.8435, -1.9906, -0.9228, -1.9906, 2.5743, 2.7723, -0.9228, 2.7723, 6.9938],
    ) * 0.05;
    let model = RiskModel::unlabeled(DVector::zeros(3), sigma.clone(), sigma)?;
    let m = hybrid_matrix(&model, 1.0)?;

    let free = qp::solve_closed_form(&m)?;
    let long = qp::solve_long_only(&m, qp::DEFAULT_TOL)?;

    println!("short sales: w = {:.4?}  variance {:.5}", free.weights.weights().as_slice(), free.objective);
    println!("long only:   w = {:.4?}  variance {:.5}", long.weights.weights().as_slice(), long.objective);
    println!("cost of the constraint: {:.4}", long.objective - free.objective);
    println!("active set {:?}, KKT {:?}", long.active_set, long.kkt_residuals(&m, None));
    Ok(())
}
