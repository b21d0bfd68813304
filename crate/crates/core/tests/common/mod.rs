//! Random instances and independent reference solvers shared by the
//! integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use hybrid_risk::estimation::ModelDocument;
use hybrid_risk::riskmodel::RiskModel;
use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    pub fn matrix(&mut self, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| self.normal())
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize
    }
}

/// `B Bᵀ / N + 0.1 I`, well conditioned.
pub fn random_pd(rng: &mut Rng, n: usize) -> DMatrix<f64> {
    let b = rng.matrix(n, n);
    &b * b.transpose() / n as f64 + DMatrix::identity(n, n) * 0.1
}

pub fn random_mu(rng: &mut Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| 0.05 + 0.05 * rng.normal())
}

/// Independent Σ and C; almost surely not proportional.
pub fn random_model(rng: &mut Rng, n: usize) -> RiskModel {
    let sigma = random_pd(rng, n);
    let conn = random_pd(rng, n);
    let mu = random_mu(rng, n);
    RiskModel::unlabeled(mu, sigma, conn).unwrap()
}

/// Random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut Rng, n: usize) -> DMatrix<f64> {
    rng.matrix(n, n).qr().q()
}

/// `Σ = U diag(s) Uᵀ`, `C = U diag(c) Uᵀ` with positive, non-proportional
/// spectra.
pub fn random_commuting(rng: &mut Rng, n: usize) -> RiskModel {
    let u = random_orthogonal(rng, n);
    let s = DVector::from_fn(n, |_, _| 0.5 + 2.0 * rng.uniform());
    let c = DVector::from_fn(n, |_, _| 0.5 + 2.0 * rng.uniform());
    let build = |d: &DVector<f64>| {
        let m = &u * DMatrix::from_diagonal(d) * u.transpose();
        (&m + m.transpose()) / 2.0
    };
    RiskModel::unlabeled(random_mu(rng, n), build(&s), build(&c)).unwrap()
}

/// Short-sale optimum from the bordered KKT system solved by LU.
pub fn kkt_oracle(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut k = DMatrix::zeros(n + 1, n + 1);
    k.view_mut((0, 0), (n, n)).copy_from(&(m * 2.0));
    for i in 0..n {
        k[(i, n)] = -1.0;
        k[(n, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let sol = k.lu().solve(&rhs).expect("nonsingular KKT matrix");
    sol.rows(0, n).into_owned()
}

/// Minimum of `wᵀMw` over a grid on the 3-simplex with spacing `step`,
/// optionally restricted to `μᵀw ≥ μ₀`. `None` if no grid point is feasible.
pub fn simplex_grid_min(m: &DMatrix<f64>, step: f64, target: Option<(&DVector<f64>, f64)>) -> Option<f64> {
    assert_eq!(m.nrows(), 3);
    let k = (1.0 / step).round() as usize;
    let mut best: Option<f64> = None;
    for i in 0..=k {
        for j in 0..=(k - i) {
            let w = DVector::from_vec(vec![
                i as f64 / k as f64,
                j as f64 / k as f64,
                (k - i - j) as f64 / k as f64,
            ]);
            if let Some((mu, mu0)) = target {
                if w.dot(mu) < mu0 {
                    continue;
                }
            }
            let v = w.dot(&(m * &w));
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    best
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_model(name: &str) -> RiskModel {
    ModelDocument::read(fixture(name)).unwrap().to_model().unwrap()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.amax()
}
