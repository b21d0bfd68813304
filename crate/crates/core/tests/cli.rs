mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use common::{fixture, random_model, Rng};
use hybrid_risk::estimation::ModelDocument;
use hybrid_risk::qp::{self, KktTolerances};
use hybrid_risk::riskmodel::{hybrid_matrix, RiskModel};
use hybrid_risk::surface::Surface;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybrid-risk")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_model(dir: &TempDir, name: &str, model: &RiskModel) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, ModelDocument::from_model(model).to_json().unwrap()).unwrap();
    path_str(&path).to_owned()
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["synth", "--seed", "42", "--n", "5", "--t", "300", "--regime", "var1", "--output", path_str(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let stdout_run = run(&["synth", "--seed", "42", "--n", "5", "--t", "300", "--regime", "var1"]);
    assert_eq!(stdout_run.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn estimate_is_byte_identical_and_carries_provenance() {
    let dir = TempDir::new().unwrap();
    let input = fixture("synth_factor_5.csv");
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let out = dir.path().join(format!("m{k}.json"));
            let o = run(&["estimate", "--input", path_str(&input), "--output", path_str(&out)]);
            assert!(o.status.success(), "{}", stderr(&o));
            assert!(stdout(&o).contains("TCI"));
            std::fs::read(&out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let doc: ModelDocument = serde_json::from_slice(&outs[0]).unwrap();
    assert_eq!(doc.schema, 1);
    assert!(doc.tci.unwrap() > 60.0);
    let meta = doc.estimation.unwrap();
    for row in &meta.fevd {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn blank_cell_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("blank.csv");
    std::fs::write(&path, "date,a,b\n2020-01-01,0.1,0.2\n2020-01-02,,0.1\n").unwrap();
    let o = run(&["estimate", "--input", path_str(&path), "--window", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn short_panel_is_a_computation_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("short.csv");
    let o = run(&["synth", "--seed", "1", "--n", "3", "--t", "100", "--output", path_str(&path)]);
    assert!(o.status.success());
    let o = run(&["estimate", "--input", path_str(&path), "--window", "252"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("insufficient observations"));
}

#[test]
fn asymmetric_model_is_rejected_at_load() {
    let dir = TempDir::new().unwrap();
    let mut doc = ModelDocument::read(fixture("misaligned_3.json")).unwrap();
    doc.sigma[0][1] += 0.01;
    let path = dir.path().join("bad.json");
    std::fs::write(&path, doc.to_json().unwrap()).unwrap();
    let o = run(&["check", "--input", path_str(&path)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not symmetric"));
}

#[test]
fn minimum_variance_row_per_regime() {
    let dir = TempDir::new().unwrap();
    for (flag, expected) in [(None, 0.03354), (Some("--long-only"), 0.03731)] {
        let out = dir.path().join("a3.csv");
        let input = fixture("shorting_3.json");
        let mut all = vec!["surface", "--input", path_str(&input), "--lambda-grid", "1:1:1", "--output", path_str(&out)];
        all.extend(flag);
        let o = run(&all);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert!(lines.next().is_none());
        let col = header.iter().position(|h| *h == "variance").unwrap();
        let variance: f64 = row[col].parse().unwrap();
        assert!((variance - expected).abs() < 5e-4);
        assert!(out.with_extension("json").exists());
    }
}

#[test]
fn proportional_model_summary_notes_degeneracy() {
    let o = run(&[
        "surface",
        "--input",
        path_str(&fixture("shorting_3.json")),
        "--output",
        path_str(&TempDir::new().unwrap().path().join("s.csv")),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("proportional"), "{}", stdout(&o));
}

#[test]
fn full_grid_on_ten_assets() {
    let dir = TempDir::new().unwrap();
    let model = random_model(&mut Rng::new(51), 10);
    let input = write_model(&dir, "m.json", &model);
    let out = dir.path().join("s.csv");
    let start = Instant::now();
    let o = run(&["surface", "--input", &input, "--mu0-grid", "auto", "--long-only", "--output", path_str(&out)]);
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("21 x 21 (441 cells)"));

    let surface = Surface::from_json(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(surface.points.len(), 441);
    for p in &surface.points {
        let m = hybrid_matrix(&model, p.lambda).unwrap();
        let r = qp::solve_with_return_target(&model, p.lambda, p.mu0.unwrap(), true, qp::DEFAULT_TOL).unwrap();
        assert!(r.kkt_residuals(&m, Some(model.mu())).passes(&KktTolerances::default()));
        assert_eq!(&r.weights, &p.solved().unwrap().weights);
    }
}

#[test]
fn check_reports_non_convexity_without_failing() {
    let o = run(&["check", "--input", path_str(&fixture("misaligned_3.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("lambda 0.4    alpha (0.06271769199, 1.565377594, -0.6280952861) NOT convex"), "{text}");
    assert!(text.contains("verdict: all identities hold"));
}

#[test]
fn check_passes_on_random_models() {
    let dir = TempDir::new().unwrap();
    let mut rng = Rng::new(52);
    for k in 0..3 {
        let input = write_model(&dir, &format!("m{k}.json"), &random_model(&mut rng, 6));
        let o = run(&["check", "--input", &input]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
}

#[test]
fn betas_are_sorted_and_truncated() {
    let o = run(&["betas", "--input", path_str(&fixture("misaligned_3.json")), "--lambda", "0.4", "--top", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0] >= rows[1]);
}

#[test]
fn decompose_and_scan_write_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("scan.csv");
    let input = fixture("misaligned_3.json");
    let o = run(&["scan", "--input", path_str(&input), "--lambda-grid", "0:1:0.1", "--output", path_str(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("lambda,alpha_mv,alpha_mc,alpha_max,convex,residual\n"));
    assert_eq!(text.lines().count(), 12);
    assert!(stdout(&o).contains("negative alpha"));

    let o = run(&["decompose", "--input", path_str(&input), "--lambda", "0.4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.4,0.06271769199,1.565377594,-0.6280952861,false"));
}

#[test]
fn bad_lambda_is_an_input_error() {
    let o = run(&["solve", "--input", path_str(&fixture("misaligned_3.json")), "--lambda", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frontier", "--input", path_str(&fixture("misaligned_3.json")), "--lambda-grid", "0:2:0.5", "--output", "/tmp/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}
