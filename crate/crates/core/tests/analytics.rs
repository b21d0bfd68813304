mod common;

use common::{fixture_model, random_model, Rng};
use hybrid_risk::analytics::{connectedness_betas, corner_funds, separation_scan, three_fund_decompose, CornerFunds};
use hybrid_risk::riskmodel::{portfolio_risks, Portfolio, RiskModel};
use hybrid_risk::surface::{linear_grid, solve_at};
use nalgebra::{DMatrix, DVector, Vector2};

/// Same-side test on the plane `Σw = 1`, projected to the first two
/// coordinates (valid because that projection is injective on the plane).
fn inside_triangle(funds: &CornerFunds, w: &DVector<f64>) -> bool {
    let p = |v: &DVector<f64>| Vector2::new(v[0], v[1]);
    let [a, b, c] = funds.as_array().map(|f| p(f.weights()));
    let x = p(w);
    let cross = |o: Vector2<f64>, u: Vector2<f64>, v: Vector2<f64>| (u - o).perp(&(v - o));
    let s = [cross(a, b, x), cross(b, c, x), cross(c, a, x)];
    let eps = 1e-12;
    s.iter().all(|v| *v >= -eps) || s.iter().all(|v| *v <= eps)
}

#[test]
fn beta_identity_on_random_pairs() {
    let mut rng = Rng::new(41);
    for trial in 0..100 {
        let n = 2 + trial % 10;
        let model = random_model(&mut rng, n);
        let p = solve_at(&model, rng.uniform(), trial % 2 == 0).unwrap().weights;
        let beta = connectedness_betas(&model, &p).unwrap();
        let kappa = portfolio_risks(&model, &p).unwrap().connectedness;
        assert!((p.weights().dot(&beta) - 2.0 * kappa).abs() < 1e-10);
    }
}

#[test]
fn convexity_agrees_with_point_in_triangle() {
    let mut rng = Rng::new(42);
    let mut seen = [0usize; 2];
    for _ in 0..200 {
        let model = random_model(&mut rng, 3);
        let funds = corner_funds(&model, false).unwrap();
        let alphas = [rng.normal(), rng.normal()];
        let alphas = [alphas[0].abs() * 0.6, alphas[1], 1.0 - alphas[0].abs() * 0.6 - alphas[1]];
        let [f1, f2, f3] = funds.as_array().map(|f| f.weights().clone());
        let target = f1 * alphas[0] + f2 * alphas[1] + f3 * alphas[2];
        let d = three_fund_decompose(&funds, &Portfolio::new(target.clone(), false).unwrap()).unwrap();
        for (got, want) in d.alphas.iter().zip(alphas) {
            assert!((got - want).abs() < 1e-8);
        }
        assert!(d.representable);
        if alphas.iter().all(|a| a.abs() > 1e-6) {
            assert_eq!(d.convex, inside_triangle(&funds, &target));
            seen[d.convex as usize] += 1;
        }
    }
    assert!(seen[0] > 0 && seen[1] > 0);
}

#[test]
fn off_span_targets_are_flagged() {
    let mut rng = Rng::new(43);
    let model = random_model(&mut rng, 5);
    let funds = corner_funds(&model, false).unwrap();
    let d = three_fund_decompose(&funds, &Portfolio::equal_weight(5)).unwrap();
    assert!(!d.representable);
    assert!((d.alphas.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn aligned_spectra_stay_in_the_triangle() {
    // Σ = diag(1, 2, 4), C = diag(4, 2, 1) and the middle asset has the
    // highest mean: w*(λ) ∝ (1/(4 − 3λ), 1/2, 1/(1 + 3λ)) never leaves the
    // hull of MV, MC and e₂.
    let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_row_slice(v));
    let model = RiskModel::unlabeled(
        DVector::from_vec(vec![0.05, 0.08, 0.06]),
        diag(&[1.0, 2.0, 4.0]),
        diag(&[4.0, 2.0, 1.0]),
    )
    .unwrap();
    let scan = separation_scan(&model, &linear_grid(0.0, 1.0, 0.05).unwrap()).unwrap();
    assert!(scan.all_convex, "{:?}", scan.violations);
    assert!(scan.max_residual < 1e-12);
}

#[test]
fn misaligned_fixture_leaves_the_triangle() {
    let scan = separation_scan(&fixture_model("misaligned_3.json"), &[0.4]).unwrap();
    assert!(!scan.all_convex);
    assert!(scan.min_alpha < -0.6);
}
