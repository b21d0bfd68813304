//! Deterministic synthetic return panels.
//!
//! The generator is portable by construction so fixtures can be reproduced
//! in other languages:
//!
//! * PRNG: ChaCha20 (RFC 8439 block function, 20 rounds) keyed with the
//!   seed as 8 little-endian bytes followed by 24 zero bytes, nonce and
//!   counter zero, consumed as little-endian `u64` words;
//! * uniforms: `(u >> 11) · 2⁻⁵³`;
//! * normals: Box–Muller on consecutive uniform pairs `(u₁, u₂)`,
//!   `√(−2 ln(1 − u₁))·cos(2πu₂)` then `…·sin(2πu₂)`;
//! * dates: consecutive weekdays starting 2000-01-03.

use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::estimation::ReturnPanel;
use crate::riskmodel::default_labels;

/// Per-period return scale.
const SCALE: f64 = 0.01;
/// Idiosyncratic noise relative to the common factor.
const FACTOR_NOISE: f64 = 0.3;
const BURN_IN: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// Independent standard normals.
    Iid,
    /// One common factor plus small idiosyncratic noise.
    Factor,
    /// VAR(1) `r_t = A r_{t−1} + ε_t` with i.i.d. standard-normal shocks.
    Var1(DMatrix<f64>),
}

impl Regime {
    /// Default stable VAR matrix: 0.5 on the diagonal, 0.2 on the
    /// subdiagonal (spectral radius 0.5).
    pub fn default_var1(n: usize) -> Self {
        Regime::Var1(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.5
            } else if i == j + 1 {
                0.2
            } else {
                0.0
            }
        }))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Iid => "iid",
            Regime::Factor => "factor",
            Regime::Var1(_) => "var1",
        }
    }
}

/// Regime name as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    Iid,
    Factor,
    Var1,
}

impl FromStr for RegimeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(RegimeKind::Iid),
            "factor" => Ok(RegimeKind::Factor),
            "var1" => Ok(RegimeKind::Var1),
            other => Err(Error::InvalidInput(format!(
                "unknown regime `{other}` (expected iid, factor or var1)"
            ))),
        }
    }
}

impl RegimeKind {
    pub fn regime(self, n: usize) -> Regime {
        match self {
            RegimeKind::Iid => Regime::Iid,
            RegimeKind::Factor => Regime::Factor,
            RegimeKind::Var1 => Regime::default_var1(n),
        }
    }
}

/// Standard normals from ChaCha20 via Box–Muller.
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self {
            rng: ChaCha20Rng::from_seed(key),
            spare: None,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * (1.0 - u1).ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    fn vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.next_normal())
    }
}

pub fn weekdays(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// A `t × n` panel drawn from `regime`.
pub fn generate(seed: u64, n: usize, t: usize, regime: &Regime) -> Result<ReturnPanel> {
    if n == 0 || t == 0 {
        return Err(Error::InvalidInput("synthetic panel needs n > 0 and t > 0".into()));
    }
    let mut rng = GaussianStream::new(seed);
    let mut returns = DMatrix::zeros(t, n);
    match regime {
        Regime::Iid => {
            for r in 0..t {
                for c in 0..n {
                    returns[(r, c)] = SCALE * rng.next_normal();
                }
            }
        }
        Regime::Factor => {
            for r in 0..t {
                let f = rng.next_normal();
                for c in 0..n {
                    returns[(r, c)] = SCALE * (f + FACTOR_NOISE * rng.next_normal());
                }
            }
        }
        Regime::Var1(a) => {
            if a.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    context: "VAR(1) coefficients",
                    expected: n,
                    actual: a.nrows(),
                });
            }
            let mut state = DVector::zeros(n);
            for step in 0..(BURN_IN + t) {
                state = a * &state + rng.vector(n);
                if step >= BURN_IN {
                    returns.set_row(step - BURN_IN, &(&state * SCALE).transpose());
                }
            }
        }
    }
    let start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    ReturnPanel::new(weekdays(start, t), returns, default_labels(n))
}
