//! Sweeping `(μ₀, λ)` grids to build the efficient surface
//! `(E[r], σ², κ)`, plus trade-off diagnostics along λ.
//!
//! Along the short-sale frontier the envelope identity
//! `λ·dσ²/dλ + (1 − λ)·dκ/dλ = 0` holds, so the frontier slope in the
//! `(κ, σ²)` plane is `−(1 − λ)/λ`. [`tradeoff_check`] verifies this with
//! finite differences; [`analytic_risk_curves`] evaluates it exactly when
//! Σ and C share an eigenbasis.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg;
use crate::qp::{self, SolveReport};
use crate::riskmodel::{hybrid_matrix, portfolio_risks, Portfolio, RiskModel};

/// θ above this marks the return target as binding.
const BINDING_TOL: f64 = 1e-10;

/// Relative Frobenius tolerance on `‖ΣC − CΣ‖` for a shared eigenbasis.
pub const COMMUTATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedCell {
    pub expected_return: f64,
    pub variance: f64,
    pub connectedness: f64,
    pub weights: Portfolio,
    pub binding_return: bool,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CellOutcome {
    Solved(SolvedCell),
    /// The return target exceeds what the weight constraints allow.
    Infeasible { max_return: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub lambda: f64,
    /// `None` on the pure risk–risk frontier.
    pub mu0: Option<f64>,
    pub outcome: CellOutcome,
}

impl SurfacePoint {
    pub fn solved(&self) -> Option<&SolvedCell> {
        match &self.outcome {
            CellOutcome::Solved(cell) => Some(cell),
            CellOutcome::Infeasible { .. } => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            CellOutcome::Solved(_) => "ok",
            CellOutcome::Infeasible { .. } => "infeasible",
        }
    }
}

/// Row-major grid over `mu0_grid × lambda_grid`. A frontier has one
/// pseudo-row with `mu0 = None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub labels: Vec<String>,
    pub long_only: bool,
    pub lambda_grid: Vec<f64>,
    pub mu0_grid: Option<Vec<f64>>,
    pub points: Vec<SurfacePoint>,
    /// SHA-256 over the model inputs.
    pub model_fingerprint: String,
}

impl Surface {
    pub fn infeasible_count(&self) -> usize {
        self.points.iter().filter(|p| p.solved().is_none()).count()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// `mu0,lambda,exp_return,variance,connectedness,binding,w_1..w_N,status`
    /// with numbers at 10 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n = self.labels.len();
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = ["mu0", "lambda", "exp_return", "variance", "connectedness", "binding"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=n).map(|i| format!("w_{i}")));
        header.push("status".into());
        wtr.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![p.mu0.map(fmt_sig).unwrap_or_default(), fmt_sig(p.lambda)];
            match p.solved() {
                Some(c) => {
                    row.extend([fmt_sig(c.expected_return), fmt_sig(c.variance), fmt_sig(c.connectedness)]);
                    row.push(c.binding_return.to_string());
                    row.extend(c.weights.weights().iter().map(|&w| fmt_sig(w)));
                }
                None => row.extend(std::iter::repeat_n(String::new(), 4 + n)),
            }
            row.push(p.status().into());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_files(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(csv_path)?)?;
        std::fs::write(json_path, self.to_json()?)?;
        Ok(())
    }
}

/// Ten significant digits, plain notation for moderate magnitudes.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" { "0".into() } else { s }
    } else {
        format!("{:.*e}", (DIGITS - 1) as usize, x)
    }
}

pub fn model_fingerprint(model: &RiskModel) -> String {
    let mut h = Sha256::new();
    h.update((model.n() as u64).to_le_bytes());
    for label in model.labels() {
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
    }
    for v in model.mu().iter().chain(model.sigma().iter()).chain(model.conn().iter()) {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn validate_lambda_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("lambda grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::LambdaOutOfRange(*bad));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("lambda grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `start, start + step, …` up to `end` (inclusive within half a step's
/// rounding), computed as `start + k·step` to avoid drift.
pub fn linear_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::InvalidInput(format!("bad grid {start}:{end}:{step}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            let v = start + k as f64 * step;
            // snap round-off so 0.1·3 prints as 0.3
            (v * 1e12).round() / 1e12
        })
        .collect())
}

/// `count` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k == count - 1 {
                    end
                } else {
                    start + (end - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Default λ grid `{0, 0.05, …, 1}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

/// 21 targets spanning the long-only attainable returns `[min μ, max μ]`.
pub fn default_mu0_grid(model: &RiskModel) -> Vec<f64> {
    linspace(model.mu().min(), model.mu().max(), 21)
}

fn solved_cell(model: &RiskModel, report: &SolveReport) -> Result<SolvedCell> {
    let risks = portfolio_risks(model, &report.weights)?;
    Ok(SolvedCell {
        expected_return: risks.expected_return,
        variance: risks.variance,
        connectedness: risks.connectedness,
        weights: report.weights.clone(),
        binding_return: report.theta > BINDING_TOL,
        objective: report.objective,
    })
}

/// Solves the budget-only (or long-only) problem at one λ.
pub fn solve_at(model: &RiskModel, lambda: f64, long_only: bool) -> Result<SolveReport> {
    let m = hybrid_matrix(model, lambda)?;
    if long_only {
        qp::solve_long_only(&m, qp::DEFAULT_TOL)
    } else {
        qp::solve_short_sale(&m)
    }
}

/// One point per λ with no return target. λ = 1 is the minimum-variance
/// portfolio, λ = 0 the minimum-connectedness one.
pub fn risk_risk_frontier(model: &RiskModel, lambda_grid: &[f64], long_only: bool) -> Result<Surface> {
    validate_lambda_grid(lambda_grid)?;
    let points = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let report = solve_at(model, lambda, long_only).map_err(|e| e.at_lambda(lambda))?;
            Ok(SurfacePoint {
                lambda,
                mu0: None,
                outcome: CellOutcome::Solved(solved_cell(model, &report)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Surface {
        labels: model.labels().to_vec(),
        long_only,
        lambda_grid: lambda_grid.to_vec(),
        mu0_grid: None,
        points,
        model_fingerprint: model_fingerprint(model),
    })
}

/// Solves every `(μ₀, λ)` cell. Unattainable targets are kept as
/// infeasible cells; any other solver failure aborts with the cell's λ.
pub fn full_surface(model: &RiskModel, mu0_grid: &[f64], lambda_grid: &[f64], long_only: bool) -> Result<Surface> {
    validate_lambda_grid(lambda_grid)?;
    if mu0_grid.is_empty() || mu0_grid.iter().any(|m| !m.is_finite()) {
        return Err(Error::InvalidInput("mu0 grid must be non-empty and finite".into()));
    }
    let cells: Vec<(f64, f64)> = mu0_grid
        .iter()
        .flat_map(|&mu0| lambda_grid.iter().map(move |&lambda| (mu0, lambda)))
        .collect();
    let points = cells
        .par_iter()
        .map(|&(mu0, lambda)| {
            let outcome = match qp::solve_with_return_target(model, lambda, mu0, long_only, qp::DEFAULT_TOL) {
                Ok(report) => CellOutcome::Solved(solved_cell(model, &report)?),
                Err(Error::InfeasibleTarget { max_return, .. }) => CellOutcome::Infeasible { max_return },
                Err(e) => {
                    return Err(Error::AtCell {
                        mu0,
                        lambda,
                        source: Box::new(e),
                    });
                }
            };
            Ok(SurfacePoint {
                lambda,
                mu0: Some(mu0),
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Surface {
        labels: model.labels().to_vec(),
        long_only,
        lambda_grid: lambda_grid.to_vec(),
        mu0_grid: Some(mu0_grid.to_vec()),
        points,
        model_fingerprint: model_fingerprint(model),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffDiagnostics {
    pub lambda: f64,
    /// `dσ²/dλ` by central differences.
    pub dsigma2: f64,
    /// `dκ/dλ` by central differences.
    pub dkappa: f64,
    /// `λ·dσ²/dλ + (1 − λ)·dκ/dλ`; zero in exact arithmetic.
    pub identity_residual: f64,
    /// `dσ²/dκ`; equals `−(1 − λ)/λ` in exact arithmetic.
    pub slope: f64,
}

impl TradeoffDiagnostics {
    pub fn expected_slope(&self) -> f64 {
        -(1.0 - self.lambda) / self.lambda
    }

    /// Residual scaled by `|σ²'| + |κ'|`.
    pub fn relative_residual(&self) -> f64 {
        let scale = self.dsigma2.abs() + self.dkappa.abs();
        if scale == 0.0 { 0.0 } else { self.identity_residual.abs() / scale }
    }

    pub fn relative_slope_error(&self) -> f64 {
        let expected = self.expected_slope();
        (self.slope - expected).abs() / expected.abs()
    }
}

/// Central-difference check of the short-sale trade-off identity at `λ`.
pub fn tradeoff_check(model: &RiskModel, lambda: f64, h: f64) -> Result<TradeoffDiagnostics> {
    if !(h > 0.0) || lambda - h <= 0.0 || lambda + h >= 1.0 {
        return Err(Error::StencilOutOfRange { lambda, h });
    }
    let risks_at = |l: f64| -> Result<(f64, f64)> {
        let report = solve_at(model, l, false).map_err(|e| e.at_lambda(l))?;
        let r = portfolio_risks(model, &report.weights)?;
        Ok((r.variance, r.connectedness))
    };
    let (s_hi, k_hi) = risks_at(lambda + h)?;
    let (s_lo, k_lo) = risks_at(lambda - h)?;
    let dsigma2 = (s_hi - s_lo) / (2.0 * h);
    let dkappa = (k_hi - k_lo) / (2.0 * h);
    Ok(TradeoffDiagnostics {
        lambda,
        dsigma2,
        dkappa,
        identity_residual: lambda * dsigma2 + (1.0 - lambda) * dkappa,
        slope: dsigma2 / dkappa,
    })
}

/// Σ and C expressed in a shared orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonEigenbasis {
    /// Columns are the common eigenvectors.
    pub basis: DMatrix<f64>,
    pub sigma_eigenvalues: DVector<f64>,
    pub conn_eigenvalues: DVector<f64>,
    /// `η = Uᵀ1`
    pub eta: DVector<f64>,
}

/// Finds `U` with `Σ = UΛ_ΣUᵀ`, `C = UΛ_CUᵀ`.
///
/// Commuting symmetric matrices share eigenvectors; they are taken from
/// `Σ + t·C` for an irrational-ish `t`, which separates eigenspaces that
/// are degenerate for Σ alone.
pub fn common_eigenbasis(model: &RiskModel) -> Result<CommonEigenbasis> {
    let (sigma, conn) = (model.sigma(), model.conn());
    let scale = sigma.norm() * conn.norm();
    let residual = if scale == 0.0 {
        0.0
    } else {
        (sigma * conn - conn * sigma).norm() / scale
    };
    if residual > COMMUTATION_TOL {
        return Err(Error::NotCommuting { residual });
    }
    let t = if conn.norm() > 0.0 {
        0.618_033_988_749_894_9 * sigma.norm() / conn.norm()
    } else {
        0.0
    };
    let eig = SymmetricEigen::new(sigma + conn * t);
    let u = eig.eigenvectors;
    let n = model.n();
    let sigma_eigenvalues = DVector::from_fn(n, |i, _| linalg::quad_form(sigma, &u.column(i).into_owned()));
    let conn_eigenvalues = DVector::from_fn(n, |i, _| linalg::quad_form(conn, &u.column(i).into_owned()));
    if let Some(bad) = sigma_eigenvalues.iter().chain(conn_eigenvalues.iter()).find(|v| **v <= 0.0) {
        return Err(Error::NonPositiveEigenvalue(*bad));
    }
    let eta = u.transpose() * DVector::from_element(n, 1.0);
    Ok(CommonEigenbasis {
        basis: u,
        sigma_eigenvalues,
        conn_eigenvalues,
        eta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenbasisSolution {
    pub weights: DVector<f64>,
    pub sigma2: f64,
    pub kappa: f64,
}

/// Spectral terms at λ: `D_i`, `Z`, and the sums `Σ η²σ²/D²`, `Σ η²c/D²`.
struct SpectralTerms {
    d: DVector<f64>,
    z: f64,
}

fn spectral_terms(basis: &CommonEigenbasis, lambda: f64) -> SpectralTerms {
    let d = basis
        .sigma_eigenvalues
        .zip_map(&basis.conn_eigenvalues, |s, c| lambda * s + (1.0 - lambda) * c);
    let z = basis.eta.iter().zip(d.iter()).map(|(e, di)| e * e / di).sum();
    SpectralTerms { d, z }
}

/// Optimal short-sale weights in the common eigenbasis:
/// `x_i = η_i / (Z·D_i)` with `D_i = λσ_i² + (1 − λ)c_i` and
/// `Z = Σ η_k²/D_k`; then `w = Ux`.
pub fn eigenbasis_weights(model: &RiskModel, lambda: f64) -> Result<EigenbasisSolution> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let basis = common_eigenbasis(model)?;
    Ok(eigenbasis_solution(&basis, lambda))
}

fn eigenbasis_solution(basis: &CommonEigenbasis, lambda: f64) -> EigenbasisSolution {
    let SpectralTerms { d, z } = spectral_terms(basis, lambda);
    let x = DVector::from_fn(d.len(), |i, _| basis.eta[i] / (z * d[i]));
    let mut sigma2 = 0.0;
    let mut kappa = 0.0;
    for i in 0..d.len() {
        let share = basis.eta[i] * basis.eta[i] / (d[i] * d[i]);
        sigma2 += share * basis.sigma_eigenvalues[i];
        kappa += share * basis.conn_eigenvalues[i];
    }
    EigenbasisSolution {
        weights: &basis.basis * x,
        sigma2: sigma2 / (z * z),
        kappa: kappa / (z * z),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCurvePoint {
    pub lambda: f64,
    pub sigma2: f64,
    pub kappa: f64,
    pub dsigma2: f64,
    pub dkappa: f64,
}

impl RiskCurvePoint {
    pub fn identity_residual(&self) -> f64 {
        self.lambda * self.dsigma2 + (1.0 - self.lambda) * self.dkappa
    }
}

/// `σ²(λ)`, `κ(λ)` and their exact λ-derivatives in the eigenbasis.
///
/// With `S_a = Σ η_i² a_i / D_i²`, `σ² = S_σ / Z²`, `κ = S_c / Z²`, and
/// `D_i' = σ_i² − c_i`:
///
/// ```text
/// Z'   = −Σ η_i² D_i' / D_i²
/// S_a' = −2 Σ η_i² a_i D_i' / D_i³
/// (S_a / Z²)' = S_a' / Z² − 2 S_a Z' / Z³
/// ```
pub fn analytic_risk_curves(model: &RiskModel, lambda_grid: &[f64]) -> Result<Vec<RiskCurvePoint>> {
    let basis = common_eigenbasis(model)?;
    let dd = &basis.sigma_eigenvalues - &basis.conn_eigenvalues;
    lambda_grid
        .iter()
        .map(|&lambda| {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::LambdaOutOfRange(lambda));
            }
            let SpectralTerms { d, z } = spectral_terms(&basis, lambda);
            let (mut s_sig, mut s_con, mut ds_sig, mut ds_con, mut dz) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..d.len() {
                let e2 = basis.eta[i] * basis.eta[i];
                let (sig, con) = (basis.sigma_eigenvalues[i], basis.conn_eigenvalues[i]);
                let d2 = d[i] * d[i];
                let d3 = d2 * d[i];
                dz -= e2 * dd[i] / d2;
                s_sig += e2 * sig / d2;
                s_con += e2 * con / d2;
                ds_sig -= 2.0 * e2 * sig * dd[i] / d3;
                ds_con -= 2.0 * e2 * con * dd[i] / d3;
            }
            let (z2, z3) = (z * z, z * z * z);
            Ok(RiskCurvePoint {
                lambda,
                sigma2: s_sig / z2,
                kappa: s_con / z2,
                dsigma2: ds_sig / z2 - 2.0 * s_sig * dz / z3,
                dkappa: ds_con / z2 - 2.0 * s_con * dz / z3,
            })
        })
        .collect()
}
