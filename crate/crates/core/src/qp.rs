//! Solvers for `min wᵀM(λ)w` subject to `1ᵀw = 1`, optionally `w ≥ 0`, and
//! optionally `μᵀw ≥ μ₀`.
//!
//! Every solver returns a [`SolveReport`] carrying the KKT multipliers for
//!
//! ```text
//! 2Mw − ν1 − θμ − γ = 0,   γ ≥ 0, γᵢwᵢ = 0,   θ ≥ 0, θ(μᵀw − μ₀) = 0
//! ```
//!
//! so callers can certify optimality with [`SolveReport::kkt_residuals`].

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::riskmodel::{hybrid_matrix, HybridMatrix, Portfolio, RiskModel, Tolerances};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack allowed on `μᵀw ≥ μ₀` before the target is treated as binding.
const TARGET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub weights: Portfolio,
    /// Budget multiplier ν.
    pub nu: f64,
    /// Nonnegativity multipliers γ; zero for free assets.
    pub gamma: Vec<f64>,
    /// Return-target multiplier θ; zero when the target is slack or absent.
    pub theta: f64,
    /// Assets pinned at zero.
    pub active_set: Vec<usize>,
    pub iterations: usize,
    /// Number of assets released from the active set.
    pub releases: usize,
    pub objective: f64,
    /// A small ridge was added because `M(λ)` was singular.
    pub regularized: bool,
    pub return_target: Option<f64>,
}

/// Worst-case violations of the KKT system at a reported solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `‖2Mw − ν1 − θμ − γ‖_∞`
    pub stationarity: f64,
    /// `max(|γᵢwᵢ|, |θ(μᵀw − μ₀)|)`
    pub complementarity: f64,
    /// `min(γᵢ, θ)`; negative values are violations.
    pub dual_feasibility: f64,
    /// `|1ᵀw − 1|`
    pub budget: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktTolerances {
    pub stationarity: f64,
    pub complementarity: f64,
    pub dual_feasibility: f64,
}

impl Default for KktTolerances {
    fn default() -> Self {
        Self {
            stationarity: 1e-7,
            complementarity: 1e-9,
            dual_feasibility: -1e-9,
        }
    }
}

impl KktResiduals {
    pub fn passes(&self, tol: &KktTolerances) -> bool {
        self.stationarity <= tol.stationarity
            && self.complementarity <= tol.complementarity
            && self.dual_feasibility >= tol.dual_feasibility
            && self.budget <= Tolerances::default().budget
    }
}

impl SolveReport {
    /// Evaluates the KKT system against `m`. `mu` is required when the
    /// report carries a return target.
    pub fn kkt_residuals(&self, m: &HybridMatrix, mu: Option<&DVector<f64>>) -> KktResiduals {
        let w = self.weights.weights();
        let gamma = DVector::from_column_slice(&self.gamma);
        let mut grad = m.matrix() * w * 2.0 - DVector::from_element(w.len(), self.nu) - &gamma;
        let mut complementarity = gamma
            .iter()
            .zip(w.iter())
            .fold(0.0_f64, |acc, (g, x)| acc.max((g * x).abs()));
        if let Some(mu) = mu {
            grad -= mu * self.theta;
            if let Some(mu0) = self.return_target {
                complementarity = complementarity.max((self.theta * (w.dot(mu) - mu0)).abs());
            }
        }
        let dual_feasibility = gamma.iter().copied().fold(self.theta, f64::min);
        KktResiduals {
            stationarity: linalg::max_abs(&grad),
            complementarity,
            dual_feasibility,
            budget: (w.sum() - 1.0).abs(),
        }
    }
}

/// `w = M⁻¹1 / (1ᵀM⁻¹1)`, `ν = 2/(1ᵀM⁻¹1)`; short sales allowed.
pub fn solve_closed_form(m: &HybridMatrix) -> Result<SolveReport> {
    let n = m.n();
    let not_pd = || Error::NotPositiveDefinite {
        name: "hybrid matrix",
        min_eigenvalue: linalg::min_eigenvalue(m.matrix()),
    };
    let chol = Cholesky::new(m.matrix().clone()).ok_or_else(not_pd)?;
    let inv_ones = chol.solve(&DVector::from_element(n, 1.0));
    let s = inv_ones.sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(not_pd());
    }
    Ok(SolveReport {
        weights: Portfolio::new(inv_ones / s, false)?,
        nu: 2.0 / s,
        gamma: vec![0.0; n],
        theta: 0.0,
        active_set: Vec::new(),
        iterations: 1,
        releases: 0,
        objective: 1.0 / s,
        regularized: false,
        return_target: None,
    })
}

/// Adds `ε·I` with `ε = 1e-12·tr(M)/N` when `M` is numerically singular.
pub fn regularize(m: &HybridMatrix) -> (HybridMatrix, bool) {
    let n = m.n();
    let eig = nalgebra::SymmetricEigen::new(m.matrix().clone());
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if lo > 1e-12 * hi.max(0.0) && hi > 0.0 {
        return (m.clone(), false);
    }
    let trace = m.matrix().trace();
    let ridge = if trace > 0.0 { 1e-12 * trace / n as f64 } else { 1e-12 };
    let matrix = m.matrix() + DMatrix::identity(n, n) * ridge;
    log::debug!("singular hybrid matrix at lambda={}; ridge {ridge:e}", m.lambda());
    (
        HybridMatrix::from_matrix(m.lambda(), matrix).expect("ridge keeps the matrix symmetric"),
        true,
    )
}

/// Closed form with the same ridge fallback as the long-only solver, for
/// hybrid matrices that are only semidefinite (e.g. `λ = 0` with an
/// estimated, rank-deficient C). The objective is evaluated on the
/// original matrix.
pub fn solve_short_sale(m: &HybridMatrix) -> Result<SolveReport> {
    let (work, regularized) = regularize(m);
    let mut report = solve_closed_form(&work)?;
    if regularized {
        report.regularized = true;
        report.objective = linalg::quad_form(m.matrix(), report.weights.weights());
    }
    Ok(report)
}

/// Long-only active-set solve, starting from the equal-weight portfolio.
pub fn solve_long_only(m: &HybridMatrix, tol: f64) -> Result<SolveReport> {
    let n = m.n();
    let (work, regularized) = regularize(m);
    let outcome = active_set(work.matrix(), DVector::from_element(n, 1.0 / n as f64), None, tol)?;
    outcome.into_report(m, regularized, None)
}

/// Minimizes `wᵀM(λ)w` s.t. `1ᵀw = 1`, `μᵀw ≥ μ₀` and, if `long_only`,
/// `w ≥ 0`.
///
/// The target is first ignored; if the unconstrained optimum misses it, the
/// problem is re-solved with `μᵀw = μ₀` as a second equality, which by
/// convexity gives the inequality-constrained optimum with `θ ≥ 0`.
pub fn solve_with_return_target(
    model: &RiskModel,
    lambda: f64,
    mu0: f64,
    long_only: bool,
    tol: f64,
) -> Result<SolveReport> {
    let m = hybrid_matrix(model, lambda)?;
    let mu = model.mu();
    let max_return = max_attainable_return(mu, long_only);
    if mu0 > max_return + TARGET_SLACK {
        return Err(Error::InfeasibleTarget {
            target: mu0,
            max_return,
        });
    }

    let mut base = if long_only {
        solve_long_only(&m, tol)?
    } else {
        solve_short_sale(&m)?
    };
    if base.weights.weights().dot(mu) >= mu0 - TARGET_SLACK {
        base.return_target = Some(mu0);
        return Ok(base);
    }

    let (work, regularized) = regularize(&m);
    if long_only {
        let start = target_feasible_start(mu, mu0);
        let outcome = active_set(work.matrix(), start, Some((mu, mu0)), tol)?;
        outcome.into_report(&m, regularized, Some(mu0))
    } else {
        let all: Vec<usize> = (0..model.n()).collect();
        let sub = solve_equality(work.matrix(), &all, Some((mu, mu0))).map_err(|_| Error::NotPositiveDefinite {
            name: "hybrid matrix",
            min_eigenvalue: linalg::min_eigenvalue(m.matrix()),
        })?;
        let objective = linalg::quad_form(m.matrix(), &sub.weights);
        Ok(SolveReport {
            weights: Portfolio::new(sub.weights, false)?,
            nu: sub.nu,
            gamma: vec![0.0; model.n()],
            theta: sub.theta,
            active_set: Vec::new(),
            iterations: 1,
            releases: 0,
            objective,
            regularized,
            return_target: Some(mu0),
        })
    }
}

/// Max of `μᵀw` over the feasible set: `max μᵢ` long-only; unbounded with
/// short sales unless all means coincide.
pub fn max_attainable_return(mu: &DVector<f64>, long_only: bool) -> f64 {
    let max = mu.max();
    if long_only || max == mu.min() {
        max
    } else {
        f64::INFINITY
    }
}

/// A strictly feasible (where possible) long-only point with `μᵀw = μ₀`:
/// the equal-weight portfolio mixed with the highest- or lowest-mean asset.
fn target_feasible_start(mu: &DVector<f64>, mu0: f64) -> DVector<f64> {
    let n = mu.len();
    let mean = mu.mean();
    let equal = DVector::from_element(n, 1.0 / n as f64);
    let (corner, corner_mu) = if mu0 >= mean {
        let k = linalg::argmax(mu);
        (k, mu[k])
    } else {
        let k = linalg::argmin(mu);
        (k, mu[k])
    };
    if corner_mu == mean {
        return equal;
    }
    let t = ((mu0 - mean) / (corner_mu - mean)).clamp(0.0, 1.0);
    let mut w = equal * (1.0 - t);
    w[corner] += t;
    w
}

struct EqualitySolution {
    weights: DVector<f64>,
    nu: f64,
    theta: f64,
    /// `Some(c)` when a return target was given but `μ_F ≡ c`, so its row
    /// was dropped: then only `ν + θc` is determined.
    dependent_level: Option<f64>,
}

/// Minimizes `wᵀMw` over the free coordinates with `1ᵀw = 1` (and
/// `μᵀw = μ₀` if given); fixed coordinates stay at zero.
///
/// Solves the bordered KKT system
///
/// ```text
/// [ 2M_FF  1  μ̃ ] [  w ]   [ 0  ]
/// [ 1ᵀ     0  0 ] [ −ν̃ ] = [ 1  ]
/// [ μ̃ᵀ     0  0 ] [ −θ̃ ]   [ μ̃₀ ]
/// ```
///
/// by pivoted LU plus one refinement step. Its conditioning depends on M
/// only through the constraint null space, so a nearly singular `M_FF`
/// (e.g. a ridged low-rank C) does not spoil stationarity the way `M⁻¹1`
/// would. The return row uses `μ̃ = (μ_F − c)/s`, centered and scaled so
/// that it is orthogonal to `1`; if `μ_F` is constant the row is dropped.
fn solve_equality(
    m: &DMatrix<f64>,
    free: &[usize],
    target: Option<(&DVector<f64>, f64)>,
) -> Result<EqualitySolution> {
    let n = m.nrows();
    let k = free.len();

    let mut dependent_level = None;
    let mut return_row = None;
    if let Some((mu, mu0)) = target {
        let mu_f = DVector::from_fn(k, |a, _| mu[free[a]]);
        let c = mu_f.mean();
        let centered = mu_f.add_scalar(-c);
        let scale = linalg::max_abs(&centered);
        if scale > 0.0 {
            return_row = Some((centered / scale, (mu0 - c) / scale, c, scale));
        } else {
            dependent_level = Some(c);
        }
    }

    let rows = k + 1 + usize::from(return_row.is_some());
    let mut kkt = DMatrix::zeros(rows, rows);
    let mut rhs = DVector::zeros(rows);
    for a in 0..k {
        for b in 0..k {
            kkt[(a, b)] = 2.0 * m[(free[a], free[b])];
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    rhs[k] = 1.0;
    if let Some((mu_t, target_t, _, _)) = &return_row {
        for a in 0..k {
            kkt[(a, k + 1)] = mu_t[a];
            kkt[(k + 1, a)] = mu_t[a];
        }
        rhs[k + 1] = *target_t;
    }

    let lu = kkt.clone().full_piv_lu();
    let mut x = lu.solve(&rhs).ok_or(Error::IndefiniteSubproblem)?;
    let residual = &rhs - &kkt * &x;
    if let Some(dx) = lu.solve(&residual) {
        x += dx;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::IndefiniteSubproblem);
    }

    let (mut nu, mut theta) = (-x[k], 0.0);
    if let Some((_, _, c, scale)) = return_row {
        // ν̃1 + θ̃μ̃ = (ν̃ − θ̃c/s)1 + (θ̃/s)μ_F
        let theta_t = -x[k + 1];
        theta = theta_t / scale;
        nu -= theta_t * c / scale;
    }

    let mut weights = DVector::zeros(n);
    for (a, &i) in free.iter().enumerate() {
        weights[i] = x[a];
    }
    Ok(EqualitySolution {
        weights,
        nu,
        theta,
        dependent_level,
    })
}

/// Picks `θ ≥ 0` for the lines `γ_i(θ) = g_i + θ·s_i`: the smallest θ
/// making every `γ_i ≥ −tol` if one exists, otherwise the maximizer of
/// `min_i γ_i(θ)`. The optimum of a concave piecewise-linear function lies
/// at zero or at a breakpoint, so only those are examined.
fn best_return_multiplier(lines: &[(f64, f64)], tol: f64) -> f64 {
    let floor = |theta: f64| lines.iter().map(|(g, s)| g + theta * s).fold(f64::INFINITY, f64::min);
    let mut candidates = vec![0.0];
    for (i, &(gi, si)) in lines.iter().enumerate() {
        if si > 0.0 {
            candidates.push(-gi / si);
        }
        for &(gj, sj) in &lines[i + 1..] {
            if si != sj {
                candidates.push((gj - gi) / (si - sj));
            }
        }
    }
    candidates.retain(|t| t.is_finite() && *t >= 0.0);
    candidates.sort_by(f64::total_cmp);
    if let Some(t) = candidates.iter().find(|&&t| floor(t) >= -tol) {
        return *t;
    }
    candidates
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |best, t| {
            let f = floor(t);
            if f > best.1 { (t, f) } else { best }
        })
        .0
}

struct ActiveSetOutcome {
    weights: DVector<f64>,
    nu: f64,
    theta: f64,
    gamma: DVector<f64>,
    active: Vec<bool>,
    iterations: usize,
    releases: usize,
}

impl ActiveSetOutcome {
    fn into_report(self, m: &HybridMatrix, regularized: bool, return_target: Option<f64>) -> Result<SolveReport> {
        let objective = linalg::quad_form(m.matrix(), &self.weights);
        Ok(SolveReport {
            weights: Portfolio::new(self.weights, true)?,
            nu: self.nu,
            gamma: self.gamma.iter().copied().collect(),
            theta: self.theta,
            active_set: self
                .active
                .iter()
                .enumerate()
                .filter_map(|(i, &a)| a.then_some(i))
                .collect(),
            iterations: self.iterations,
            releases: self.releases,
            objective,
            regularized,
            return_target,
        })
    }
}

/// Primal active-set iteration over the simplex.
///
/// Each pass solves the equality-constrained problem on the free set `F`
/// and takes the step `p` towards its solution. A vanishing step is a
/// stationary point on the current face: either every active multiplier
/// `γᵢ = (2Mw − ν1 − θμ)ᵢ` is ≥ −tol (optimal) or the most negative one is
/// released (lowest index on ties). Otherwise the step is clipped at the
/// first weight to hit zero, which then joins the active set; a zero-length
/// clip just moves the blocking index.
fn active_set(
    m: &DMatrix<f64>,
    start: DVector<f64>,
    target: Option<(&DVector<f64>, f64)>,
    tol: f64,
) -> Result<ActiveSetOutcome> {
    let n = m.nrows();
    let limit = 10 * n;
    let mut w = start;
    let mut active: Vec<bool> = w.iter().map(|&x| x <= 0.0).collect();
    let mut iterations = 0;
    let mut releases = 0;

    loop {
        iterations += 1;
        if iterations > limit {
            return Err(Error::IterationLimit { limit });
        }
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let sub = solve_equality(m, &free, target)?;
        let step = &sub.weights - &w;

        if linalg::max_abs(&step) <= tol {
            w = sub.weights;
            let (mut nu, mut theta) = (sub.nu, sub.theta);
            if let (Some((mu, _)), Some(c)) = (target, sub.dependent_level) {
                // γ_i = 2(Mw)_i − ν₀ + θ(c − μ_i) for any θ ≥ 0
                let base = m * &w * 2.0 - DVector::from_element(n, sub.nu);
                let lines: Vec<(f64, f64)> = (0..n).filter(|&i| active[i]).map(|i| (base[i], c - mu[i])).collect();
                theta = best_return_multiplier(&lines, tol);
                nu = sub.nu - theta * c;
            }
            let mut grad = m * &w * 2.0 - DVector::from_element(n, nu);
            if let Some((mu, _)) = target {
                grad -= mu * theta;
            }
            let mut gamma = DVector::zeros(n);
            let mut release: Option<usize> = None;
            for i in (0..n).filter(|&i| active[i]) {
                gamma[i] = grad[i];
                if gamma[i] < -tol && release.is_none_or(|j| gamma[i] < gamma[j]) {
                    release = Some(i);
                }
            }
            match release {
                None => {
                    for (i, x) in w.iter_mut().enumerate() {
                        if active[i] || *x < 0.0 {
                            *x = 0.0;
                        }
                    }
                    return Ok(ActiveSetOutcome {
                        weights: w,
                        nu,
                        theta,
                        gamma,
                        active,
                        iterations,
                        releases,
                    });
                }
                Some(j) => {
                    active[j] = false;
                    releases += 1;
                }
            }
        } else {
            let mut alpha = 1.0;
            let mut blocking = None;
            for &i in &free {
                if step[i] < 0.0 {
                    let ratio = (-w[i] / step[i]).max(0.0);
                    if ratio < alpha {
                        alpha = ratio;
                        blocking = Some(i);
                    }
                }
            }
            w.axpy(alpha, &step, 1.0);
            if let Some(b) = blocking {
                w[b] = 0.0;
                active[b] = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskmodel::RiskModel;

    fn shorting_example() -> HybridMatrix {
        let sigma = DMatrix::from_row_slice(
            3,
            3,
            &[4.8435, -1.9906, -0.9228, -1.9906, 2.5743, 2.7723, -0.9228, 2.7723, 6.9938],
        ) * 0.05;
        HybridMatrix::from_matrix(1.0, sigma).unwrap()
    }

    fn assert_kkt(report: &SolveReport, m: &HybridMatrix, mu: Option<&DVector<f64>>) {
        let r = report.kkt_residuals(m, mu);
        assert!(r.passes(&KktTolerances::default()), "{r:?}");
    }

    #[test]
    fn closed_form_identity() {
        let m = HybridMatrix::from_matrix(1.0, DMatrix::identity(4, 4)).unwrap();
        let r = solve_closed_form(&m).unwrap();
        for w in r.weights.weights().iter() {
            assert!((w - 0.25).abs() < 1e-15);
        }
        assert!((r.objective - 0.25).abs() < 1e-15);
        assert_kkt(&r, &m, None);
    }

    #[test]
    fn closed_form_two_asset_diagonal() {
        // w ∝ (1, 1/2) → (2/3, 1/3)
        let m = HybridMatrix::from_matrix(1.0, DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).unwrap();
        let r = solve_closed_form(&m).unwrap();
        assert!((r.weights.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.weights.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rejects_singular() {
        let m = HybridMatrix::from_matrix(0.0, DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(matches!(solve_closed_form(&m), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn shorting_example_both_regimes() {
        let m = shorting_example();
        let cf = solve_closed_form(&m).unwrap();
        let expected = [0.4110, 0.7271, -0.1381];
        for (w, e) in cf.weights.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-3);
        }
        assert!((cf.objective - 0.03354).abs() < 5e-4);

        let lo = solve_long_only(&m, DEFAULT_TOL).unwrap();
        for (w, e) in lo.weights.weights().iter().zip([0.4005, 0.5995, 0.0]) {
            assert!((w - e).abs() < 1e-3);
        }
        assert!((lo.objective - 0.03731).abs() < 5e-4);
        assert_eq!(lo.active_set, vec![2]);
        assert_kkt(&lo, &m, None);
        assert!(lo.gamma[2] > 0.0);
    }

    #[test]
    fn long_only_matches_closed_form_when_interior() {
        let m = HybridMatrix::from_matrix(1.0, DMatrix::identity(3, 3)).unwrap();
        let lo = solve_long_only(&m, DEFAULT_TOL).unwrap();
        let cf = solve_closed_form(&m).unwrap();
        assert_eq!(lo.releases, 0);
        assert!(lo.active_set.is_empty());
        assert!((lo.weights.weights() - cf.weights.weights()).amax() < 1e-14);
    }

    #[test]
    fn long_only_zero_matrix_is_regularized() {
        let m = HybridMatrix::from_matrix(0.0, DMatrix::zeros(3, 3)).unwrap();
        let r = solve_long_only(&m, DEFAULT_TOL).unwrap();
        assert!(r.regularized);
        for w in r.weights.weights().iter() {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn release_happens_when_start_face_is_wrong() {
        // Asset 2 is very attractive; start at 1/N, the optimum is interior
        // but the path may clip. Check only optimality.
        let m = HybridMatrix::from_matrix(
            1.0,
            DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.0, 0.9, 1.0, 0.0, 0.0, 0.0, 0.05]),
        )
        .unwrap();
        let r = solve_long_only(&m, DEFAULT_TOL).unwrap();
        assert_kkt(&r, &m, None);
    }

    fn two_asset_model() -> RiskModel {
        RiskModel::unlabeled(
            DVector::from_vec(vec![0.1, 0.2]),
            DMatrix::from_row_slice(2, 2, &[0.04, 0.0, 0.0, 0.09]),
            DMatrix::from_row_slice(2, 2, &[0.02, 0.0, 0.0, 0.01]),
        )
        .unwrap()
    }

    #[test]
    fn target_at_max_mean_gives_vertex() {
        let model = two_asset_model();
        let r = solve_with_return_target(&model, 0.5, 0.2, true, DEFAULT_TOL).unwrap();
        assert!((r.weights.weights() - DVector::from_vec(vec![0.0, 1.0])).amax() < 1e-12);
        let m = hybrid_matrix(&model, 0.5).unwrap();
        assert_kkt(&r, &m, Some(model.mu()));
    }

    #[test]
    fn infeasible_target() {
        let model = two_asset_model();
        let err = solve_with_return_target(&model, 0.5, 0.25, true, DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, Error::InfeasibleTarget { .. }));
        // short sales make any target attainable
        let r = solve_with_return_target(&model, 0.5, 0.25, false, DEFAULT_TOL).unwrap();
        assert!((r.weights.weights().dot(model.mu()) - 0.25).abs() < 1e-12);
        assert!(r.theta > 0.0);
        let m = hybrid_matrix(&model, 0.5).unwrap();
        assert_kkt(&r, &m, Some(model.mu()));
    }

    #[test]
    fn slack_target_matches_plain_solve() {
        let model = two_asset_model();
        let m = hybrid_matrix(&model, 0.3).unwrap();
        let plain = solve_long_only(&m, DEFAULT_TOL).unwrap();
        let r = solve_with_return_target(&model, 0.3, f64::NEG_INFINITY, true, DEFAULT_TOL).unwrap();
        assert_eq!(plain.weights, r.weights);
        assert_eq!(r.theta, 0.0);
    }

    #[test]
    fn binding_target_long_only_interior() {
        let model = RiskModel::unlabeled(
            DVector::from_vec(vec![0.05, 0.08, 0.12]),
            DMatrix::from_row_slice(3, 3, &[0.04, 0.01, 0.0, 0.01, 0.06, 0.02, 0.0, 0.02, 0.10]),
            DMatrix::from_row_slice(3, 3, &[0.03, 0.0, 0.0, 0.0, 0.02, 0.0, 0.0, 0.0, 0.05]),
        )
        .unwrap();
        let r = solve_with_return_target(&model, 0.6, 0.10, true, DEFAULT_TOL).unwrap();
        let m = hybrid_matrix(&model, 0.6).unwrap();
        assert!((r.weights.weights().dot(model.mu()) - 0.10).abs() < 1e-12);
        assert!(r.theta > 0.0);
        assert_kkt(&r, &m, Some(model.mu()));
    }
}
