//! Risk-model domain types: the covariance matrix Σ, the connectedness
//! matrix C, expected returns μ, and their convex blend
//! `M(λ) = λΣ + (1 − λ)C`.
//!
//! Throughout the crate `λ = 1` means "variance only" and `λ = 0` means
//! "connectedness only".

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Numerical tolerances applied when validating models and portfolios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Asymmetry above this is reported with a warning before symmetrizing.
    pub symmetry_warn: f64,
    /// Eigenvalues of C in `[-psd_clip, 0)` are clipped to zero.
    pub psd_clip: f64,
    /// Allowed deviation of `1ᵀw` from one.
    pub budget: f64,
    /// Allowed negative weight under a long-only flag.
    pub nonnegativity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry_warn: 1e-8,
            psd_clip: 1e-10,
            budget: 1e-8,
            nonnegativity: 1e-10,
        }
    }
}

/// Default relative Frobenius tolerance for [`detect_degenerate`].
pub const DEFAULT_DEGENERATE_TOL: f64 = 1e-6;

/// Paired risk matrices and expected returns for `n` assets.
///
/// Construction symmetrizes both matrices, requires Σ ≻ 0, and clips
/// round-off negative eigenvalues of C. The value is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskModel {
    labels: Vec<String>,
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    conn: DMatrix<f64>,
}

impl RiskModel {
    pub fn new(
        labels: Vec<String>,
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        conn: DMatrix<f64>,
    ) -> Result<Self> {
        Self::with_tolerances(labels, mu, sigma, conn, &Tolerances::default())
    }

    /// Builds a model with generated labels `asset_1..asset_n`.
    pub fn unlabeled(mu: DVector<f64>, sigma: DMatrix<f64>, conn: DMatrix<f64>) -> Result<Self> {
        let labels = default_labels(mu.len());
        Self::new(labels, mu, sigma, conn)
    }

    pub fn with_tolerances(
        labels: Vec<String>,
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        conn: DMatrix<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::InvalidInput("a risk model needs at least one asset".into()));
        }
        for (context, actual) in [
            ("labels", labels.len()),
            ("sigma rows", sigma.nrows()),
            ("sigma cols", sigma.ncols()),
            ("conn rows", conn.nrows()),
            ("conn cols", conn.ncols()),
        ] {
            if actual != n {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: n,
                    actual,
                });
            }
        }
        if mu.iter().chain(sigma.iter()).chain(conn.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("risk model contains non-finite entries".into()));
        }

        let sigma = symmetrize_checked("sigma", &sigma, tol.symmetry_warn);
        let conn = symmetrize_checked("conn", &conn, tol.symmetry_warn);

        let sigma_min = linalg::min_eigenvalue(&sigma);
        if sigma_min <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                name: "sigma",
                min_eigenvalue: sigma_min,
            });
        }
        let conn = clip_psd("conn", &conn, tol.psd_clip)?;

        Ok(Self {
            labels,
            mu,
            sigma,
            conn,
        })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn conn(&self) -> &DMatrix<f64> {
        &self.conn
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("asset_{i}")).collect()
}

fn symmetrize_checked(name: &'static str, m: &DMatrix<f64>, warn_tol: f64) -> DMatrix<f64> {
    let asym = linalg::max_asymmetry(m);
    if asym > warn_tol {
        log::warn!("{name} asymmetric by {asym:e}; using (A + Aᵀ)/2");
    }
    linalg::symmetrize(m)
}

/// Clips eigenvalues in `[-tol, 0)` to zero; anything more negative is an error.
pub fn clip_psd(name: &'static str, m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let min = linalg::min_eigenvalue(m);
    if min < -tol {
        return Err(Error::NotPositiveSemidefinite {
            name,
            min_eigenvalue: min,
        });
    }
    if min < 0.0 {
        Ok(linalg::project_psd(m))
    } else {
        Ok(m.clone())
    }
}

/// A weight vector on the budget hyperplane `1ᵀw = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PortfolioRepr", try_from = "PortfolioRepr")]
pub struct Portfolio {
    weights: DVector<f64>,
    long_only: bool,
}

#[derive(Serialize, Deserialize)]
struct PortfolioRepr {
    weights: Vec<f64>,
    long_only: bool,
}

impl From<Portfolio> for PortfolioRepr {
    fn from(p: Portfolio) -> Self {
        Self {
            weights: p.weights.iter().copied().collect(),
            long_only: p.long_only,
        }
    }
}

impl TryFrom<PortfolioRepr> for Portfolio {
    type Error = Error;

    fn try_from(r: PortfolioRepr) -> Result<Self> {
        Portfolio::new(DVector::from_vec(r.weights), r.long_only)
    }
}

impl Portfolio {
    pub fn new(weights: DVector<f64>, long_only: bool) -> Result<Self> {
        Self::with_tolerances(weights, long_only, &Tolerances::default())
    }

    pub fn with_tolerances(weights: DVector<f64>, long_only: bool, tol: &Tolerances) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPortfolio("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidPortfolio("non-finite weight".into()));
        }
        let total = weights.sum();
        if (total - 1.0).abs() > tol.budget {
            return Err(Error::InvalidPortfolio(format!("weights sum to {total}, not 1")));
        }
        if long_only {
            if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| **w < -tol.nonnegativity) {
                return Err(Error::InvalidPortfolio(format!(
                    "long-only portfolio has weight {w} at index {i}"
                )));
            }
        }
        Ok(Self { weights, long_only })
    }

    pub fn equal_weight(n: usize) -> Self {
        Self {
            weights: DVector::from_element(n, 1.0 / n as f64),
            long_only: true,
        }
    }

    /// All wealth in asset `k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut weights = DVector::zeros(n);
        weights[k] = 1.0;
        Self {
            weights,
            long_only: true,
        }
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn long_only(&self) -> bool {
        self.long_only
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `M(λ) = λΣ + (1 − λ)C`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridMatrix {
    lambda: f64,
    matrix: DMatrix<f64>,
}

impl HybridMatrix {
    /// Wraps an arbitrary symmetric matrix, e.g. to feed the solvers directly.
    pub fn from_matrix(lambda: f64, matrix: DMatrix<f64>) -> Result<Self> {
        check_lambda(lambda)?;
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                context: "hybrid matrix columns",
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let asym = linalg::max_asymmetry(&matrix);
        if asym > Tolerances::default().symmetry_warn {
            return Err(Error::NotSymmetric {
                name: "hybrid matrix",
                asymmetry: asym,
            });
        }
        Ok(Self {
            lambda,
            matrix: linalg::symmetrize(&matrix),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

pub fn hybrid_matrix(model: &RiskModel, lambda: f64) -> Result<HybridMatrix> {
    check_lambda(lambda)?;
    let (sigma, conn) = (model.sigma(), model.conn());
    let matrix = sigma.zip_map(conn, |s, c| lambda * s + (1.0 - lambda) * c);
    Ok(HybridMatrix { lambda, matrix })
}

/// `L(λ, w) = wᵀ M(λ) w`.
pub fn evaluate_loss(m: &HybridMatrix, p: &Portfolio) -> Result<f64> {
    check_dim("portfolio", m.n(), p.len())?;
    Ok(linalg::quad_form(m.matrix(), p.weights()))
}

/// Expected return, variance and connectedness risk of one portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortfolioRisks {
    pub expected_return: f64,
    pub variance: f64,
    pub connectedness: f64,
}

pub fn portfolio_risks(model: &RiskModel, p: &Portfolio) -> Result<PortfolioRisks> {
    check_dim("portfolio", model.n(), p.len())?;
    let w = p.weights();
    Ok(PortfolioRisks {
        expected_return: w.dot(model.mu()),
        variance: linalg::quad_form(model.sigma(), w).max(0.0),
        connectedness: linalg::quad_form(model.conn(), w).max(0.0),
    })
}

/// Returns `c` when `C ≈ cΣ`.
///
/// `c = ⟨C, Σ⟩_F / ⟨Σ, Σ⟩_F` is the least-squares proportionality factor; the
/// model counts as degenerate when `‖C − cΣ‖_F ≤ rel_tol · ‖C‖_F` and `c > 0`.
pub fn detect_degenerate(model: &RiskModel, rel_tol: f64) -> Option<f64> {
    let (sigma, conn) = (model.sigma(), model.conn());
    let conn_norm = conn.norm();
    if conn_norm == 0.0 {
        return None;
    }
    let c = linalg::frobenius_inner(conn, sigma) / linalg::frobenius_inner(sigma, sigma);
    if c <= 0.0 {
        return None;
    }
    let residual = (conn - sigma * c).norm();
    (residual <= rel_tol * conn_norm).then_some(c)
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
