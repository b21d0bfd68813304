//! Estimating a [`RiskModel`] from a panel of returns.
//!
//! For one window of `T` observations on `N` assets:
//!
//! 1. Σ̂ is the sample covariance shrunk towards `(tr S / N)·I`;
//! 2. a VAR(1) `r_t = a₀ + A r_{t−1} + ε_t` is fitted by least squares;
//! 3. the generalized (order-invariant) forecast-error variance
//!    decomposition of that VAR at horizon `H` gives a row-stochastic
//!    spillover table `D`;
//! 4. `C` is the symmetrized off-diagonal part of `D`, projected onto the
//!    PSD cone.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::riskmodel::RiskModel;

/// Dated `T × N` matrix of simple returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    returns: DMatrix<f64>,
    labels: Vec<String>,
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, returns: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if returns.nrows() != dates.len() {
            return Err(Error::DimensionMismatch {
                context: "panel rows",
                expected: dates.len(),
                actual: returns.nrows(),
            });
        }
        if returns.ncols() != labels.len() {
            return Err(Error::DimensionMismatch {
                context: "panel columns",
                expected: labels.len(),
                actual: returns.ncols(),
            });
        }
        if labels.is_empty() {
            return Err(Error::InvalidInput("panel has no assets".into()));
        }
        if let Some(i) = dates.windows(2).position(|d| d[1] <= d[0]) {
            return Err(Error::InvalidInput(format!(
                "dates must be strictly increasing ({} followed by {})",
                dates[i],
                dates[i + 1]
            )));
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("panel contains non-finite returns".into()));
        }
        Ok(Self {
            dates,
            returns,
            labels,
        })
    }

    /// Reads `date,<label1>,...,<labelN>` CSV with ISO-8601 dates. Any empty
    /// or non-numeric cell is rejected with its line number.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
            return Err(Error::Parse {
                line: 1,
                message: "header must be `date,<label1>,...,<labelN>`".into(),
            });
        }
        let labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let n = labels.len();

        let mut dates = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::Parse {
                    line,
                    message: e.to_string(),
                }
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != n + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", n + 1, record.len()),
                });
            }
            let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| Error::Parse {
                line,
                message: format!("bad date `{}`: {e}", &record[0]),
            })?;
            for (j, cell) in record.iter().skip(1).enumerate() {
                if cell.is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: format!("empty cell in column `{}`", labels[j]),
                    });
                }
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column `{}`: `{cell}` is not a number", labels[j]),
                })?;
                values.push(v);
            }
            dates.push(date);
        }
        let returns = DMatrix::from_row_slice(dates.len(), n, &values);
        Self::new(dates, returns, labels)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    /// Writes the panel in the same CSV layout `from_csv` reads, with
    /// shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_owned()];
        header.extend(self.labels.iter().cloned());
        wtr.write_record(&header)?;
        for (t, date) in self.dates.iter().enumerate() {
            let mut row = vec![date.format("%Y-%m-%d").to_string()];
            row.extend(self.returns.row(t).iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_assets(&self) -> usize {
        self.labels.len()
    }

    pub fn n_periods(&self) -> usize {
        self.dates.len()
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> ReturnPanel {
        ReturnPanel {
            dates: self.dates[start..end].to_vec(),
            returns: self.returns.rows(start, end - start).into_owned(),
            labels: self.labels.clone(),
        }
    }

    fn require_rows(&self) -> Result<()> {
        let required = self.n_assets() + 2;
        if self.n_periods() < required {
            return Err(Error::InsufficientObservations {
                required,
                actual: self.n_periods(),
            });
        }
        Ok(())
    }
}

/// Shrinkage intensity towards the scaled identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shrinkage {
    Fixed(f64),
    /// Ledoit–Wolf optimal intensity.
    Auto,
}

impl FromStr for Shrinkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Shrinkage::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidInput(format!("shrinkage must be `auto` or a number, got `{s}`")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("shrinkage intensity {v} outside [0, 1]")));
        }
        Ok(Shrinkage::Fixed(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Rolling window length in periods.
    pub window: usize,
    /// Forecast horizon `H` of the variance decomposition.
    pub fevd_horizon: usize,
    pub shrinkage: Shrinkage,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            window: 252,
            fevd_horizon: 10,
            shrinkage: Shrinkage::Auto,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self, n_assets: usize) -> Result<()> {
        if self.window < n_assets + 2 {
            return Err(Error::InvalidInput(format!(
                "window {} is shorter than N + 2 = {}",
                self.window,
                n_assets + 2
            )));
        }
        if self.fevd_horizon == 0 {
            return Err(Error::InvalidInput("FEVD horizon must be at least 1".into()));
        }
        if let Shrinkage::Fixed(d) = self.shrinkage {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidInput(format!("shrinkage intensity {d} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShrunkCovariance {
    pub matrix: DMatrix<f64>,
    pub intensity: f64,
}

fn demeaned(returns: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let t = returns.nrows() as f64;
    let means = DVector::from_fn(returns.ncols(), |j, _| returns.column(j).sum() / t);
    let mut x = returns.clone();
    for (j, mut col) in x.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    (means, x)
}

/// `(1 − δ)S + δ·(tr S / N)·I`, with `S` the unbiased sample covariance.
pub fn shrink_covariance(panel: &ReturnPanel, config: &EstimationConfig) -> Result<ShrunkCovariance> {
    panel.require_rows()?;
    let returns = panel.returns();
    for (j, col) in returns.column_iter().enumerate() {
        if col.max() == col.min() {
            return Err(Error::ZeroVariance {
                label: panel.labels()[j].clone(),
            });
        }
    }
    let (t, n) = returns.shape();
    let (_, x) = demeaned(returns);
    let cross = x.transpose() * &x;
    let sample = linalg::symmetrize(&(&cross / (t as f64 - 1.0)));

    let intensity = match config.shrinkage {
        Shrinkage::Fixed(d) => d,
        Shrinkage::Auto => ledoit_wolf_intensity(&x, &linalg::symmetrize(&(&cross / t as f64))),
    };
    let target = sample.trace() / n as f64;
    let mut matrix = &sample * (1.0 - intensity);
    for i in 0..n {
        matrix[(i, i)] += intensity * target;
    }
    Ok(ShrunkCovariance { matrix, intensity })
}

/// Ledoit–Wolf (2004) intensity for the target `m·I`, `m = tr(S_T)/N`:
///
/// ```text
/// d² = ‖S_T − mI‖²_F / N
/// b̄² = (1/T²) Σ_t ‖x_t x_tᵀ − S_T‖²_F / N
/// δ  = min(b̄², d²) / d²
/// ```
///
/// where `x_t` are demeaned rows and `S_T = XᵀX / T`.
fn ledoit_wolf_intensity(x: &DMatrix<f64>, s_t: &DMatrix<f64>) -> f64 {
    let (t, n) = x.shape();
    let m = s_t.trace() / n as f64;
    let mut d2 = s_t.norm_squared();
    d2 += -2.0 * m * s_t.trace() + m * m * n as f64;
    d2 /= n as f64;
    if d2 <= 0.0 {
        return 0.0;
    }
    let s_norm2 = s_t.norm_squared();
    let mut b_bar2 = 0.0;
    for row in x.row_iter() {
        let xt = row.transpose();
        let sq = xt.norm_squared();
        // ‖x xᵀ − S‖² = ‖x‖⁴ − 2 xᵀSx + ‖S‖²
        b_bar2 += sq * sq - 2.0 * linalg::quad_form(s_t, &xt) + s_norm2;
    }
    b_bar2 /= (t * t) as f64 * n as f64;
    b_bar2.min(d2) / d2
}

#[derive(Debug, Clone, PartialEq)]
pub struct Var1Fit {
    /// `A[i][j]`: effect of asset `j` at `t − 1` on asset `i` at `t`.
    pub coefficients: DMatrix<f64>,
    pub intercept: DVector<f64>,
    /// Residual covariance Ω (divisor `T − 1`, the number of fitted rows).
    pub residual_cov: DMatrix<f64>,
}

/// Equation-by-equation OLS of `r_t` on `(1, r_{t−1})`.
pub fn fit_var1(panel: &ReturnPanel) -> Result<Var1Fit> {
    panel.require_rows()?;
    let returns = panel.returns();
    let (t, n) = returns.shape();
    let rows = t - 1;
    let x = DMatrix::from_fn(rows, n + 1, |r, c| if c == 0 { 1.0 } else { returns[(r, c - 1)] });
    let y = returns.rows(1, rows).into_owned();

    let xtx = linalg::symmetrize(&(x.transpose() * &x));
    let eig = nalgebra::SymmetricEigen::new(xtx.clone());
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(lo > 1e-12 * hi) {
        return Err(Error::SingularRegressors);
    }
    let chol = nalgebra::Cholesky::new(xtx).ok_or(Error::SingularRegressors)?;
    let beta = chol.solve(&(x.transpose() * &y));

    let residuals = &y - &x * &beta;
    let residual_cov = linalg::symmetrize(&(residuals.transpose() * &residuals / rows as f64));
    Ok(Var1Fit {
        coefficients: beta.rows(1, n).transpose(),
        intercept: beta.row(0).transpose(),
        residual_cov,
    })
}

pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Generalized FEVD at horizon `H`, row-normalized.
///
/// With `Φ_h = A^h`,
///
/// ```text
/// θ_ij = Ω_jj⁻¹ Σ_{h<H} (e_iᵀ Φ_h Ω e_j)² / Σ_{h<H} e_iᵀ Φ_h Ω Φ_hᵀ e_i
/// ```
///
/// and each row of the result is `θ_i· / Σ_j θ_ij`.
pub fn generalized_fevd(a: &DMatrix<f64>, omega: &DMatrix<f64>, horizon: usize) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || omega.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "VAR matrices",
            expected: n,
            actual: omega.nrows().max(a.ncols()),
        });
    }
    if horizon == 0 {
        return Err(Error::InvalidInput("FEVD horizon must be at least 1".into()));
    }
    let rho = spectral_radius(a);
    if rho >= 1.0 {
        return Err(Error::NonStationary { spectral_radius: rho });
    }
    if let Some(index) = (0..n).find(|&i| omega[(i, i)] <= 0.0) {
        return Err(Error::ZeroShockVariance { index });
    }

    let mut numer = DMatrix::<f64>::zeros(n, n);
    let mut denom = DVector::<f64>::zeros(n);
    let mut phi = DMatrix::<f64>::identity(n, n);
    for h in 0..horizon {
        if h > 0 {
            phi = &phi * a;
        }
        let phi_omega = &phi * omega;
        numer += phi_omega.map(|v| v * v);
        let fcast = &phi_omega * phi.transpose();
        for i in 0..n {
            denom[i] += fcast[(i, i)];
        }
    }

    let mut d = DMatrix::from_fn(n, n, |i, j| numer[(i, j)] / (omega[(j, j)] * denom[i]));
    for mut row in d.row_iter_mut() {
        let total = row.sum();
        row /= total;
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connectedness {
    pub matrix: DMatrix<f64>,
    /// Total connectedness index, `100/N · Σ_{i≠j} D_ij`.
    pub tci: f64,
}

/// Symmetrized off-diagonal spillovers, projected onto the PSD cone.
pub fn connectedness_matrix(d: &DMatrix<f64>) -> Result<Connectedness> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "spillover table",
            expected: n,
            actual: d.ncols(),
        });
    }
    if d.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return Err(Error::InvalidInput("spillover table must be finite and nonnegative".into()));
    }
    for (i, row) in d.row_iter().enumerate() {
        if (row.sum() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("spillover row {i} sums to {}", row.sum())));
        }
    }
    let mut off = d.clone();
    off.fill_diagonal(0.0);
    let tci = 100.0 * off.sum() / n as f64;
    let matrix = linalg::project_psd(&linalg::symmetrize(&off));
    Ok(Connectedness { matrix, tci })
}

/// Everything produced for one estimation window.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedModel {
    pub model: RiskModel,
    pub tci: f64,
    pub window_end: NaiveDate,
    pub fevd: DMatrix<f64>,
    pub shrinkage_intensity: f64,
    pub config: EstimationConfig,
}

/// Estimates the model on the `config.window` observations ending at the
/// last date `≤ at`.
pub fn estimate_model(panel: &ReturnPanel, at: NaiveDate, config: &EstimationConfig) -> Result<EstimatedModel> {
    config.validate(panel.n_assets())?;
    let available = panel.dates().partition_point(|d| *d <= at);
    if available < config.window {
        return Err(Error::InsufficientObservations {
            required: config.window,
            actual: available,
        });
    }
    estimate_window(&panel.slice(available - config.window, available), config)
}

fn estimate_window(window: &ReturnPanel, config: &EstimationConfig) -> Result<EstimatedModel> {
    let window_end = *window.dates().last().expect("validated non-empty window");
    let wrap = |e: Error| Error::InWindow {
        window_end: window_end.to_string(),
        source: Box::new(e),
    };
    let shrunk = shrink_covariance(window, config).map_err(wrap)?;
    let var = fit_var1(window).map_err(wrap)?;
    let fevd = generalized_fevd(&var.coefficients, &var.residual_cov, config.fevd_horizon).map_err(wrap)?;
    let conn = connectedness_matrix(&fevd).map_err(wrap)?;
    let (mu, _) = demeaned(window.returns());
    let model = RiskModel::new(window.labels().to_vec(), mu, shrunk.matrix, conn.matrix).map_err(wrap)?;
    Ok(EstimatedModel {
        model,
        tci: conn.tci,
        window_end,
        fevd,
        shrinkage_intensity: shrunk.intensity,
        config: *config,
    })
}

/// One model per window end, every `step` periods from the first full
/// window. Windows are estimated in parallel; output order is by date.
pub fn estimate_rolling(panel: &ReturnPanel, config: &EstimationConfig, step: usize) -> Result<Vec<EstimatedModel>> {
    config.validate(panel.n_assets())?;
    if step == 0 {
        return Err(Error::InvalidInput("rolling step must be positive".into()));
    }
    if panel.n_periods() < config.window {
        return Err(Error::InsufficientObservations {
            required: config.window,
            actual: panel.n_periods(),
        });
    }
    let ends: Vec<usize> = (config.window..=panel.n_periods()).step_by(step).collect();
    ends.par_iter()
        .map(|&end| estimate_window(&panel.slice(end - config.window, end), config))
        .collect()
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// How a model document was estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationMeta {
    pub window: usize,
    pub fevd_horizon: usize,
    pub shrinkage_intensity: f64,
    /// Row-stochastic spillover table the connectedness matrix came from.
    pub fevd: Vec<Vec<f64>>,
}

/// On-disk JSON form of a [`RiskModel`]. Matrices are row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema: u32,
    pub n: usize,
    pub labels: Vec<String>,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub conn: Vec<Vec<f64>>,
    #[serde(default)]
    pub tci: Option<f64>,
    #[serde(default)]
    pub window_end: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation: Option<EstimationMeta>,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(name: &'static str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("`{name}` must be {n}×{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ModelDocument {
    pub fn from_model(model: &RiskModel) -> Self {
        Self {
            schema: MODEL_SCHEMA_VERSION,
            n: model.n(),
            labels: model.labels().to_vec(),
            mu: model.mu().iter().copied().collect(),
            sigma: to_rows(model.sigma()),
            conn: to_rows(model.conn()),
            tci: None,
            window_end: None,
            estimation: None,
        }
    }

    pub fn from_estimate(est: &EstimatedModel) -> Self {
        Self {
            tci: Some(est.tci),
            window_end: Some(est.window_end),
            estimation: Some(EstimationMeta {
                window: est.config.window,
                fevd_horizon: est.config.fevd_horizon,
                shrinkage_intensity: est.shrinkage_intensity,
                fevd: to_rows(&est.fevd),
            }),
            ..Self::from_model(&est.model)
        }
    }

    /// Stored matrices must already be symmetric; a document is the output
    /// of a validated model, so asymmetry means corruption.
    pub fn to_model(&self) -> Result<RiskModel> {
        if self.schema != MODEL_SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!("unsupported model schema {}", self.schema)));
        }
        let n = self.n;
        if self.mu.len() != n || self.labels.len() != n {
            return Err(Error::InvalidInput(format!("`mu` and `labels` must have length n = {n}")));
        }
        let sigma = from_rows("sigma", &self.sigma, n)?;
        let conn = from_rows("conn", &self.conn, n)?;
        for (name, m) in [("sigma", &sigma), ("conn", &conn)] {
            let asymmetry = linalg::max_asymmetry(m);
            if asymmetry > 1e-8 {
                return Err(Error::NotSymmetric { name, asymmetry });
            }
        }
        RiskModel::new(self.labels.clone(), DVector::from_vec(self.mu.clone()), sigma, conn)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
