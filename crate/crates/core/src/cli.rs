//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input error (unreadable or malformed files,
//! bad flags), 3 computation error, 4 violated invariant in `check`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use crate::analytics::{self, CornerFunds};
use crate::error::Error;
use crate::estimation::{self, EstimationConfig, ModelDocument, ReturnPanel, Shrinkage};
use crate::qp::{self, KktTolerances};
use crate::riskmodel::{self, Portfolio, RiskModel, DEFAULT_DEGENERATE_TOL};
use crate::surface::{self, fmt_sig, Surface};
use crate::synth::{self, RegimeKind};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// Finite-difference step used by `check`.
const CHECK_STEP: f64 = 1e-5;
const CHECK_RESIDUAL_TOL: f64 = 1e-4;
const CHECK_SLOPE_TOL: f64 = 1e-3;
const CHECK_ANALYTIC_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "hybrid-risk", version, about = "Variance/connectedness efficient surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a risk model from a return panel.
    Estimate(EstimateArgs),
    /// Solve for the optimal portfolio at one λ.
    Solve(SolveArgs),
    /// Sweep λ without a return target.
    Frontier(FrontierArgs),
    /// Sweep the (μ₀, λ) grid.
    Surface(SurfaceArgs),
    /// Connectedness betas of the optimal portfolio.
    Betas(BetasArgs),
    /// Decompose the optimal portfolio into the three corner funds.
    Decompose(DecomposeArgs),
    /// Three-fund decomposition along a λ grid.
    Scan(ScanArgs),
    /// Trade-off identity, eigenbasis and convexity diagnostics.
    Check(CheckArgs),
    /// Generate a deterministic synthetic return panel.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Return CSV (`date,<label>,...`).
    #[arg(long)]
    pub input: PathBuf,
    /// Model JSON; stdout if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 252)]
    pub window: usize,
    /// FEVD horizon.
    #[arg(long, default_value_t = 10)]
    pub horizon: usize,
    /// Ledoit–Wolf intensity in [0, 1], or `auto`.
    #[arg(long, default_value = "auto")]
    pub shrinkage: Shrinkage,
    /// Last date of the window; defaults to the last row.
    #[arg(long)]
    pub at: Option<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct ModelInput {
    /// Model JSON.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub lambda: f64,
    /// Minimum expected return.
    #[arg(long)]
    pub mu0: Option<f64>,
    #[arg(long)]
    pub long_only: bool,
    /// Active-set tolerance.
    #[arg(long, default_value_t = qp::DEFAULT_TOL)]
    pub tol: f64,
    /// Solver report JSON.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub model: ModelInput,
    /// `a:b:step`; defaults to 0:1:0.05.
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
    #[arg(long)]
    pub long_only: bool,
    /// CSV path; the JSON goes next to it with a `.json` extension.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
    /// `a:b:step` or `auto` (21 points over [min μ, max μ]). Without it the
    /// sweep has no return target.
    #[arg(long)]
    pub mu0_grid: Option<Mu0Grid>,
    #[arg(long)]
    pub long_only: bool,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BetasArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub long_only: bool,
    /// Number of rows to report; 0 for all.
    #[arg(long, default_value_t = 15)]
    pub top: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub model: ModelInput,
    /// Interior grid; defaults to 0.1:0.9:0.1.
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    /// iid, factor or var1.
    #[arg(long, default_value = "iid")]
    pub regime: RegimeKind,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// `a:b:step`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> crate::Result<Vec<f64>> {
        surface::linear_grid(self.start, self.end, self.step)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(format!("expected a:b:step, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        let spec = GridSpec {
            start: num(a)?,
            end: num(b)?,
            step: num(step)?,
        };
        spec.points().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mu0Grid {
    Auto,
    Range(GridSpec),
}

impl FromStr for Mu0Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            Ok(Mu0Grid::Auto)
        } else {
            s.parse().map(Mu0Grid::Range)
        }
    }
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Input(Error),
    Compute(Error),
    Invariant(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Compute(_) => EXIT_COMPUTE,
            Failure::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "input error: {e}"),
            Failure::Compute(e) => write!(f, "computation failed: {e}"),
            Failure::Invariant(msg) => write!(f, "invariant violated: {msg}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn input<T>(r: crate::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Input)
}

fn compute<T>(r: crate::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Compute)
}

fn load_model(args: &ModelInput) -> Result<RiskModel, Failure> {
    input(ModelDocument::read(&args.input).and_then(|doc| doc.to_model()))
}

fn check_lambda(lambda: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Failure::Input(Error::LambdaOutOfRange(lambda)))
    }
}

fn lambda_grid_or(spec: Option<GridSpec>, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>, Failure> {
    let grid = match spec {
        Some(s) => input(s.points())?,
        None => default(),
    };
    for &lambda in &grid {
        check_lambda(lambda)?;
    }
    Ok(grid)
}

/// Writes `data` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, data: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => input(std::fs::write(p, data).map_err(Error::from)),
        None => input(io::stdout().write_all(data).map_err(Error::from)),
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> crate::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    compute(f(&mut buf))?;
    Ok(buf)
}

/// Human-readable summary: stdout when data went to a file, stderr when
/// the data itself is on stdout.
fn summary(data_on_stdout: bool, text: &str) {
    if data_on_stdout {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Frontier(a) => cmd_frontier(a),
        Command::Surface(a) => cmd_surface(a),
        Command::Betas(a) => cmd_betas(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Check(a) => cmd_check(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

pub fn cmd_estimate(a: EstimateArgs) -> Outcome {
    let panel = input(ReturnPanel::from_csv_path(&a.input))?;
    let config = EstimationConfig {
        window: a.window,
        fevd_horizon: a.horizon,
        shrinkage: a.shrinkage,
    };
    let at = match a.at {
        Some(d) => d,
        None => *panel
            .dates()
            .last()
            .ok_or_else(|| Failure::Input(Error::InvalidInput("return panel is empty".into())))?,
    };
    let est = compute(estimation::estimate_model(&panel, at, &config))?;
    let json = compute(ModelDocument::from_estimate(&est).to_json())?;
    emit(a.output.as_deref(), json.as_bytes())?;
    summary(
        a.output.is_none(),
        &format!(
            "estimated {} assets on {} observations ending {}\nTCI {}\nshrinkage intensity {}\n",
            est.model.n(),
            config.window,
            est.window_end,
            fmt_sig(est.tci),
            fmt_sig(est.shrinkage_intensity)
        ),
    );
    Ok(())
}

pub fn cmd_solve(a: SolveArgs) -> Outcome {
    let model = load_model(&a.model)?;
    check_lambda(a.lambda)?;
    let m = input(riskmodel::hybrid_matrix(&model, a.lambda))?;
    let report = compute(match a.mu0 {
        Some(mu0) => qp::solve_with_return_target(&model, a.lambda, mu0, a.long_only, a.tol),
        None if a.long_only => qp::solve_long_only(&m, a.tol),
        None => qp::solve_short_sale(&m),
    })?;
    let risks = compute(riskmodel::portfolio_risks(&model, &report.weights))?;
    let kkt = report.kkt_residuals(&m, a.mu0.map(|_| model.mu()));

    let mut out = String::new();
    let _ = writeln!(out, "lambda {}  long_only {}", fmt_sig(a.lambda), a.long_only);
    for (label, w) in model.labels().iter().zip(report.weights.weights().iter()) {
        let _ = writeln!(out, "  {label:<12} {}", fmt_sig(*w));
    }
    let _ = writeln!(out, "expected return {}", fmt_sig(risks.expected_return));
    let _ = writeln!(out, "variance        {}", fmt_sig(risks.variance));
    let _ = writeln!(out, "connectedness   {}", fmt_sig(risks.connectedness));
    let _ = writeln!(out, "objective       {}", fmt_sig(report.objective));
    if !report.active_set.is_empty() {
        let _ = writeln!(out, "active set      {:?}", report.active_set);
    }
    if report.regularized {
        let _ = writeln!(out, "note: hybrid matrix was singular and has been ridged");
    }
    let _ = writeln!(
        out,
        "KKT stationarity {:e}  complementarity {:e}  dual {:e}",
        kkt.stationarity, kkt.complementarity, kkt.dual_feasibility
    );
    print!("{out}");
    if let Some(path) = &a.output {
        let json = compute(serde_json::to_string_pretty(&report).map_err(Error::from))?;
        emit(Some(path), format!("{json}\n").as_bytes())?;
    }
    Ok(())
}

fn json_sibling(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_sweep(surface: &Surface, csv_path: &Path) -> Result<PathBuf, Failure> {
    let json_path = json_sibling(csv_path);
    if json_path == csv_path {
        return Err(Failure::Input(Error::InvalidInput(
            "output must not already have a .json extension".into(),
        )));
    }
    input(surface.write_files(csv_path, &json_path))?;
    Ok(json_path)
}

fn sweep_summary(model: &RiskModel, surface: &Surface, json_path: &Path) -> String {
    let mut out = String::new();
    let rows = surface.mu0_grid.as_ref().map_or(1, Vec::len);
    let _ = writeln!(
        out,
        "grid {} x {} ({} cells), {} infeasible",
        rows,
        surface.lambda_grid.len(),
        surface.points.len(),
        surface.infeasible_count()
    );
    let first_mu0 = surface.mu0_grid.as_ref().and_then(|g| g.first().copied());
    for (name, lambda) in [("lambda=0", 0.0), ("lambda=1", 1.0)] {
        let hit = surface.points.iter().find(|p| p.lambda == lambda && p.mu0 == first_mu0);
        if let Some(p) = hit {
            if let Some(cell) = p.solved() {
                let target = p.mu0.map(|m| format!(" mu0={}", fmt_sig(m))).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{name}{target}: variance {} connectedness {}",
                    fmt_sig(cell.variance),
                    fmt_sig(cell.connectedness)
                );
            }
        }
    }
    if let Some(c) = riskmodel::detect_degenerate(model, DEFAULT_DEGENERATE_TOL) {
        let _ = writeln!(
            out,
            "note: connectedness is proportional to covariance (C = {} * Sigma); optimal weights do not depend on lambda",
            fmt_sig(c)
        );
    }
    let _ = writeln!(out, "wrote {}", json_path.display());
    out
}

pub fn cmd_frontier(a: FrontierArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let grid = lambda_grid_or(a.lambda_grid, surface::default_lambda_grid)?;
    let s = compute(surface::risk_risk_frontier(&model, &grid, a.long_only))?;
    let json_path = write_sweep(&s, &a.output)?;
    print!("{}", sweep_summary(&model, &s, &json_path));
    Ok(())
}

pub fn cmd_surface(a: SurfaceArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let grid = lambda_grid_or(a.lambda_grid, surface::default_lambda_grid)?;
    let s = match a.mu0_grid {
        None => compute(surface::risk_risk_frontier(&model, &grid, a.long_only))?,
        Some(spec) => {
            let mu0 = match spec {
                Mu0Grid::Auto => surface::default_mu0_grid(&model),
                Mu0Grid::Range(r) => input(r.points())?,
            };
            compute(surface::full_surface(&model, &mu0, &grid, a.long_only))?
        }
    };
    let json_path = write_sweep(&s, &a.output)?;
    print!("{}", sweep_summary(&model, &s, &json_path));
    Ok(())
}

pub fn cmd_betas(a: BetasArgs) -> Outcome {
    let model = load_model(&a.model)?;
    check_lambda(a.lambda)?;
    let report = compute(surface::solve_at(&model, a.lambda, a.long_only))?;
    let mut ranked = compute(analytics::ranked_betas(&model, &report.weights))?;
    if a.top > 0 {
        ranked.truncate(a.top);
    }
    let csv = csv_bytes(|buf| analytics::write_betas_csv(&ranked, buf))?;
    emit(a.output.as_deref(), &csv)?;
    let risks = compute(riskmodel::portfolio_risks(&model, &report.weights))?;
    summary(
        a.output.is_none(),
        &format!(
            "betas at lambda {} (connectedness {}, sum w*beta = 2*connectedness)\n",
            fmt_sig(a.lambda),
            fmt_sig(risks.connectedness)
        ),
    );
    Ok(())
}

fn funds_text(model: &RiskModel, funds: &CornerFunds) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>14} {:>14} {:>14}", "asset", "min_var", "min_conn", "max_return");
    for (i, label) in model.labels().iter().enumerate() {
        let [a, b, c] = funds.as_array().map(|p: &Portfolio| p.weights()[i]);
        let _ = writeln!(out, "{label:<12} {:>14} {:>14} {:>14}", fmt_sig(a), fmt_sig(b), fmt_sig(c));
    }
    out
}

pub fn cmd_decompose(a: DecomposeArgs) -> Outcome {
    let model = load_model(&a.model)?;
    check_lambda(a.lambda)?;
    let scan = compute(analytics::separation_scan(&model, &[a.lambda]))?;
    let csv = csv_bytes(|buf| scan.write_csv(buf))?;
    emit(a.output.as_deref(), &csv)?;
    let d = scan.rows[0].decomposition;
    let mut out = funds_text(&model, &scan.funds);
    let _ = writeln!(
        out,
        "alpha = ({}, {}, {})  convex {}  residual {:e}",
        fmt_sig(d.alphas[0]),
        fmt_sig(d.alphas[1]),
        fmt_sig(d.alphas[2]),
        d.convex,
        d.residual
    );
    if !d.representable {
        let _ = writeln!(out, "note: portfolio lies outside the corner funds' affine span");
    }
    summary(a.output.is_none(), &out);
    Ok(())
}

fn scan_verdict(scan: &analytics::SeparationScan) -> String {
    if scan.all_convex {
        format!(
            "convex at every lambda (min alpha {})\n",
            fmt_sig(scan.min_alpha)
        )
    } else {
        let at: Vec<String> = scan.violations.iter().map(|l| fmt_sig(*l)).collect();
        format!(
            "negative alpha at lambda = {} (min alpha {}); the efficient curve leaves the corner-fund triangle\n",
            at.join(", "),
            fmt_sig(scan.min_alpha)
        )
    }
}

pub fn cmd_scan(a: ScanArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let grid = lambda_grid_or(a.lambda_grid, surface::default_lambda_grid)?;
    let scan = compute(analytics::separation_scan(&model, &grid))?;
    let csv = csv_bytes(|buf| scan.write_csv(buf))?;
    emit(a.output.as_deref(), &csv)?;
    summary(a.output.is_none(), &scan_verdict(&scan));
    Ok(())
}

pub fn cmd_check(a: CheckArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let grid = lambda_grid_or(a.lambda_grid, || {
        surface::linear_grid(0.1, 0.9, 0.1).expect("constant grid")
    })?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut violations = Vec::new();

    let _ = writeln!(out, "model: {} assets, fingerprint {}", model.n(), surface::model_fingerprint(&model));

    let _ = writeln!(out, "\n[kkt] long-only certificates");
    let kkt_tol = KktTolerances::default();
    for &lambda in &grid {
        let m = compute(riskmodel::hybrid_matrix(&model, lambda))?;
        let report = compute(qp::solve_long_only(&m, qp::DEFAULT_TOL))?;
        let r = report.kkt_residuals(&m, None);
        let ok = r.passes(&kkt_tol);
        let _ = writeln!(
            out,
            "lambda {:<6} stationarity {:.3e} complementarity {:.3e} dual {:.3e} {}",
            fmt_sig(lambda),
            r.stationarity,
            r.complementarity,
            r.dual_feasibility,
            if ok { "ok" } else { "FAIL" }
        );
        if !ok {
            violations.push(format!("KKT certificate fails at lambda {}", fmt_sig(lambda)));
        }
    }

    let _ = writeln!(out, "\n[tradeoff] finite differences, h = {CHECK_STEP:e}");
    if let Some(c) = riskmodel::detect_degenerate(&model, DEFAULT_DEGENERATE_TOL) {
        let _ = writeln!(
            out,
            "skipped: C = {} * Sigma, so both risks are constant in lambda",
            fmt_sig(c)
        );
    } else {
        let _ = writeln!(
            out,
            "{:<8} {:>14} {:>14} {:>12} {:>14} {:>12}",
            "lambda", "dsigma2", "dkappa", "rel_resid", "slope", "slope_err"
        );
        for &lambda in &grid {
            let d = compute(surface::tradeoff_check(&model, lambda, CHECK_STEP))?;
            let (res, err) = (d.relative_residual(), d.relative_slope_error());
            let _ = writeln!(
                out,
                "{:<8} {:>14} {:>14} {:>12.3e} {:>14} {:>12.3e}",
                fmt_sig(lambda),
                fmt_sig(d.dsigma2),
                fmt_sig(d.dkappa),
                res,
                fmt_sig(d.slope),
                err
            );
            if !(res <= CHECK_RESIDUAL_TOL) {
                violations.push(format!("trade-off residual {res:e} at lambda {}", fmt_sig(lambda)));
            }
            if !(err <= CHECK_SLOPE_TOL) {
                violations.push(format!("slope error {err:e} at lambda {}", fmt_sig(lambda)));
            }
        }
    }

    let _ = writeln!(out, "\n[eigenbasis] analytic risk curves");
    match surface::analytic_risk_curves(&model, &grid) {
        Ok(curves) => {
            for p in &curves {
                let scale = (p.dsigma2.abs() + p.dkappa.abs()).max(1.0);
                let resid = p.identity_residual().abs();
                let _ = writeln!(
                    out,
                    "lambda {:<6} sigma2 {} kappa {} identity residual {:.3e}",
                    fmt_sig(p.lambda),
                    fmt_sig(p.sigma2),
                    fmt_sig(p.kappa),
                    resid
                );
                if resid > CHECK_ANALYTIC_TOL * scale {
                    violations.push(format!("analytic identity residual {resid:e} at lambda {}", fmt_sig(p.lambda)));
                }
            }
        }
        Err(e) => {
            let _ = writeln!(out, "skipped: {e}");
        }
    }

    let _ = writeln!(out, "\n[scan] three-fund decomposition");
    match analytics::separation_scan(&model, &grid) {
        Ok(scan) => {
            for row in &scan.rows {
                let d = row.decomposition;
                let _ = writeln!(
                    out,
                    "lambda {:<6} alpha ({}, {}, {}) {}",
                    fmt_sig(row.lambda),
                    fmt_sig(d.alphas[0]),
                    fmt_sig(d.alphas[1]),
                    fmt_sig(d.alphas[2]),
                    if d.convex { "convex" } else { "NOT convex" }
                );
            }
            let _ = write!(out, "{}", scan_verdict(&scan));
        }
        Err(e) => {
            let _ = writeln!(out, "skipped: {e}");
        }
    }

    let _ = writeln!(out);
    if violations.is_empty() {
        let _ = writeln!(out, "verdict: all identities hold");
        let _ = out.flush();
        Ok(())
    } else {
        let _ = writeln!(out, "verdict: {} violation(s)", violations.len());
        let _ = out.flush();
        Err(Failure::Invariant(violations.join("; ")))
    }
}

pub fn cmd_synth(a: SynthArgs) -> Outcome {
    let panel = input(synth::generate(a.seed, a.n, a.t, &a.regime.regime(a.n)))?;
    match &a.output {
        Some(path) => {
            let file = input(File::create(path).map_err(Error::from))?;
            input(panel.write_csv(BufWriter::new(file)))
        }
        None => input(panel.write_csv(io::stdout().lock())),
    }
}
