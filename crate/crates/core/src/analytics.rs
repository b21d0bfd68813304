//! Connectedness betas and the three-fund decomposition.
//!
//! Efficient short-sale portfolios are expressed as affine combinations of
//! three corner funds (minimum variance, minimum connectedness, maximum
//! expected return). The combination is convex only when the portfolio
//! lies inside the triangle the funds span, which misaligned Σ and C can
//! violate.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::qp::SolveReport;
use crate::riskmodel::{check_dim, Portfolio, RiskModel};
use crate::surface::{fmt_sig, solve_at};

/// Coefficients below this count as genuinely negative.
pub const CONVEXITY_TOL: f64 = -1e-9;
/// Reconstruction error above this means the target is outside the funds'
/// affine span.
pub const REPRESENTABLE_TOL: f64 = 1e-6;

/// `β_i = 2·[Cw]_i`, the marginal contribution of asset `i` to `wᵀCw`.
/// They aggregate as `Σ w_i β_i = 2κ`.
pub fn connectedness_betas(model: &RiskModel, p: &Portfolio) -> Result<DVector<f64>> {
    check_dim("portfolio", model.n(), p.len())?;
    Ok(model.conn() * p.weights() * 2.0)
}

/// `(label, β)` pairs sorted by descending β, ties by label order.
pub fn ranked_betas(model: &RiskModel, p: &Portfolio) -> Result<Vec<(String, f64)>> {
    let betas = connectedness_betas(model, p)?;
    let mut ranked: Vec<(String, f64)> = model.labels().iter().cloned().zip(betas.iter().copied()).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ranked)
}

pub fn write_betas_csv<W: Write>(ranked: &[(String, f64)], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["label", "beta"])?;
    for (label, beta) in ranked {
        wtr.write_record([label.as_str(), &fmt_sig(*beta)])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerFunds {
    pub min_variance: Portfolio,
    pub min_connectedness: Portfolio,
    pub max_return: Portfolio,
    /// Solver reports behind the two risk-minimizing funds.
    #[serde(skip)]
    pub reports: Option<(SolveReport, SolveReport)>,
}

impl CornerFunds {
    pub fn as_array(&self) -> [&Portfolio; 3] {
        [&self.min_variance, &self.min_connectedness, &self.max_return]
    }
}

/// MV at λ = 1, MC at λ = 0, and the long-only max-return vertex (the
/// short-sale max-return problem is unbounded, so the vertex is used in
/// both regimes).
pub fn corner_funds(model: &RiskModel, long_only: bool) -> Result<CornerFunds> {
    let mv = solve_at(model, 1.0, long_only).map_err(|e| e.at_lambda(1.0))?;
    let mc = solve_at(model, 0.0, long_only).map_err(|e| e.at_lambda(0.0))?;
    let k = linalg::argmax(model.mu());
    Ok(CornerFunds {
        min_variance: mv.weights.clone(),
        min_connectedness: mc.weights.clone(),
        max_return: Portfolio::unit(model.n(), k),
        reports: Some((mv, mc)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundDecomposition {
    /// Coefficients on (MV, MC, max-μ); they sum to one.
    pub alphas: [f64; 3],
    pub convex: bool,
    /// `‖w − Σ α_k w_k‖_∞`
    pub residual: f64,
    pub representable: bool,
}

/// Barycentric coordinates of `target` with respect to the corner funds.
///
/// Substituting `α₃ = 1 − α₁ − α₂` turns the stacked system
/// `[w₁ w₂ w₃; 1 1 1]·α = [w; 1]` into the least-squares problem
/// `[w₁ − w₃, w₂ − w₃]·(α₁, α₂) ≈ w − w₃`, so `Σα = 1` holds exactly
/// and the residual measures distance from the affine span.
pub fn three_fund_decompose(funds: &CornerFunds, target: &Portfolio) -> Result<FundDecomposition> {
    let n = target.len();
    for f in funds.as_array() {
        check_dim("corner fund", n, f.len())?;
    }
    let [w1, w2, w3] = funds.as_array().map(|p| p.weights());
    let basis = DMatrix::from_columns(&[w1 - w3, w2 - w3]);
    let rhs = target.weights() - w3;

    let svd = basis.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if s_max == 0.0 || s_min <= 1e-10 * s_max {
        return Err(Error::AffinelyDependentFunds);
    }
    let coef = svd.solve(&rhs, 0.0).map_err(|_| Error::AffinelyDependentFunds)?;
    let alphas = [coef[0], coef[1], 1.0 - coef[0] - coef[1]];
    let residual = linalg::max_abs(&(&basis * &coef - &rhs));
    Ok(FundDecomposition {
        alphas,
        convex: alphas.iter().all(|a| *a >= CONVEXITY_TOL),
        residual,
        representable: residual <= REPRESENTABLE_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub decomposition: FundDecomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationScan {
    pub funds: CornerFunds,
    pub rows: Vec<ScanRow>,
    /// Every decomposition along the grid was convex.
    pub all_convex: bool,
    /// λ values where some coefficient was negative.
    pub violations: Vec<f64>,
    pub min_alpha: f64,
    pub max_residual: f64,
}

/// Decomposes the short-sale optimum `w*(λ)` along the grid.
pub fn separation_scan(model: &RiskModel, lambda_grid: &[f64]) -> Result<SeparationScan> {
    let funds = corner_funds(model, false)?;
    let mut rows = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let report = solve_at(model, lambda, false).map_err(|e| e.at_lambda(lambda))?;
        let decomposition = three_fund_decompose(&funds, &report.weights).map_err(|e| e.at_lambda(lambda))?;
        rows.push(ScanRow { lambda, decomposition });
    }
    let violations: Vec<f64> = rows.iter().filter(|r| !r.decomposition.convex).map(|r| r.lambda).collect();
    let min_alpha = rows
        .iter()
        .flat_map(|r| r.decomposition.alphas)
        .fold(f64::INFINITY, f64::min);
    let max_residual = rows.iter().map(|r| r.decomposition.residual).fold(0.0, f64::max);
    Ok(SeparationScan {
        funds,
        all_convex: violations.is_empty(),
        violations,
        rows,
        min_alpha,
        max_residual,
    })
}

impl SeparationScan {
    /// `lambda,alpha_mv,alpha_mc,alpha_max,convex,residual`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["lambda", "alpha_mv", "alpha_mc", "alpha_max", "convex", "residual"])?;
        for row in &self.rows {
            let d = &row.decomposition;
            wtr.write_record([
                fmt_sig(row.lambda),
                fmt_sig(d.alphas[0]),
                fmt_sig(d.alphas[1]),
                fmt_sig(d.alphas[2]),
                d.convex.to_string(),
                fmt_sig(d.residual),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn misaligned() -> RiskModel {
        RiskModel::unlabeled(
            DVector::from_vec(vec![0.08, 0.06, 0.10]),
            DMatrix::from_row_slice(3, 3, &[0.040, 0.030, 0.020, 0.030, 0.090, 0.010, 0.020, 0.010, 0.160]),
            DMatrix::from_row_slice(3, 3, &[0.100, -0.020, 0.0, -0.020, 0.050, 0.010, 0.0, 0.010, 0.020]),
        )
        .unwrap()
    }

    #[test]
    fn betas_zero_and_identity() {
        let zero = RiskModel::unlabeled(DVector::zeros(3), DMatrix::identity(3, 3), DMatrix::zeros(3, 3)).unwrap();
        let p = Portfolio::equal_weight(3);
        assert_eq!(connectedness_betas(&zero, &p).unwrap(), DVector::zeros(3));

        let eye = RiskModel::unlabeled(DVector::zeros(4), DMatrix::identity(4, 4), DMatrix::identity(4, 4)).unwrap();
        let p = Portfolio::equal_weight(4);
        let b = connectedness_betas(&eye, &p).unwrap();
        assert!(b.iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert!((p.weights().dot(&b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn corner_funds_misaligned() {
        let funds = corner_funds(&misaligned(), false).unwrap();
        let close = |p: &Portfolio, e: [f64; 3]| p.weights().iter().zip(e).all(|(a, b)| (a - b).abs() < 1e-3);
        assert!(close(&funds.min_variance, [0.7321, 0.1429, 0.1250]));
        assert!(close(&funds.min_connectedness, [0.1864, 0.2373, 0.5763]));
        assert_eq!(funds.max_return, Portfolio::unit(3, 2));
    }

    #[test]
    fn decomposition_of_corners_and_midpoint() {
        let funds = corner_funds(&misaligned(), false).unwrap();
        let d = three_fund_decompose(&funds, &funds.min_variance).unwrap();
        assert!((d.alphas[0] - 1.0).abs() < 1e-12 && d.alphas[1].abs() < 1e-12 && d.alphas[2].abs() < 1e-12);
        let mid = (funds.min_variance.weights() + funds.min_connectedness.weights()) / 2.0;
        let d = three_fund_decompose(&funds, &Portfolio::new(mid, false).unwrap()).unwrap();
        assert!((d.alphas[0] - 0.5).abs() < 1e-12 && (d.alphas[1] - 0.5).abs() < 1e-12);
        assert!(d.convex && d.representable);
    }

    #[test]
    fn misaligned_model_is_not_convex() {
        let model = misaligned();
        let scan = separation_scan(&model, &[0.4]).unwrap();
        let d = scan.rows[0].decomposition;
        for (a, e) in d.alphas.iter().zip([0.063, 1.565, -0.628]) {
            assert!((a - e).abs() < 2e-2, "{:?}", d.alphas);
        }
        assert!(!d.convex);
        assert!(!scan.all_convex);
        assert_eq!(scan.violations, vec![0.4]);
    }

    #[test]
    fn proportional_model_has_coincident_funds() {
        let sigma = misaligned().sigma().clone();
        let model = RiskModel::unlabeled(DVector::from_vec(vec![0.08, 0.06, 0.10]), sigma.clone(), sigma).unwrap();
        let err = separation_scan(&model, &[0.5]).unwrap_err();
        assert!(matches!(err.root(), Error::AffinelyDependentFunds));
    }

    #[test]
    fn ranked_betas_descending() {
        let model = misaligned();
        let ranked = ranked_betas(&model, &Portfolio::equal_weight(3)).unwrap();
        assert!(ranked.windows(2).all(|w| w[0].1 >= w[1].1));
        let mut buf = Vec::new();
        write_betas_csv(&ranked, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("label,beta\n"));
    }
}
