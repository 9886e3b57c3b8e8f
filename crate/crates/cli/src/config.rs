//! Scenario configuration files (TOML).
//!
//! Complex entries are written either as plain numbers or as `[re, im]` pairs.
//!
//! ```toml
//! objective = "wsr_region"
//! channels = [ [[1.0, 0.0], [0.2, 0.6]], [[0.5, 0.0], [0.2, 1.0]] ]
//!
//! [[constraints]]
//! kind = "sum_power"
//! budget = 10.0
//!
//! [sweep]
//! resolution = 20
//! ```

use std::path::{Path, PathBuf};

use bcmac::hermitian::HermitianMatrix;
use bcmac::orchestrator::QuadraticBall;
use bcmac::{CMatrix, ChannelSet, Complex, LinearConstraint, OuterSettings, SinrTargets, SolverSettings};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    WsrRegion,
    SinrBalance,
    PowerBalance,
    NonlinearWsr,
}

impl Objective {
    pub fn subcommand(self) -> &'static str {
        match self {
            Objective::WsrRegion => "region",
            Objective::SinrBalance => "balance",
            Objective::PowerBalance => "powermin",
            Objective::NonlinearWsr => "nonlinear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex<f64> {
        match self {
            Entry::Real(x) => Complex::new(x, 0.0),
            Entry::Complex([re, im]) => Complex::new(re, im),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    SumPower {
        budget: f64,
    },
    /// Zero-based antenna index.
    PerAntenna {
        antenna: usize,
        budget: f64,
    },
    /// `tr(Q h hᴴ) <= budget`.
    Interference {
        h: Vec<Entry>,
        budget: f64,
    },
    Matrix {
        a: MatrixSpec,
        budget: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearSpec {
    /// `sum_l tr(Q A_l)^2 <= p`.
    QuadraticBall { matrices: Vec<MatrixSpec>, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Number of weight intervals; weights are `(i/n, 1 - i/n)` for `i = 0..=n`.
    pub resolution: usize,
    /// Sum-power budget for the normalized sum-power comparison region.
    pub heuristic_sum_power: Option<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { resolution: 20, heuristic_sum_power: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub restarts: usize,
    pub initial_step: f64,
    pub stall_window: usize,
    pub max_cuts: usize,
    /// Termination threshold of the cutting-plane loop on `phi`.
    pub eps: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = OuterSettings::default();
        Self {
            seed: 0,
            tol: o.tol,
            max_iters: o.max_iters,
            inner_tol: o.inner.tol,
            inner_max_iters: o.inner.max_iters,
            restarts: o.inner.restarts,
            initial_step: o.initial_step,
            stall_window: o.stall_window,
            max_cuts: o.max_cuts,
            eps: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the subcommand name.
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub objective: Objective,
    /// One `Nr x Nt` matrix per user.
    pub channels: Vec<MatrixSpec>,
    #[serde(default)]
    pub noise: Option<Vec<f64>>,
    /// Zero-based user indices, first encoded first.
    #[serde(default)]
    pub encoding_order: Option<Vec<usize>>,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
    #[serde(default)]
    pub nonlinear: Option<NonlinearSpec>,
    /// Rate weights for `nonlinear_wsr`.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Per-user SINR targets for the beamforming modes.
    #[serde(default)]
    pub targets: Option<Vec<f64>>,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn matrix(spec: &MatrixSpec, what: &str) -> Result<CMatrix, CliError> {
    let rows = spec.len();
    let cols = spec.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || spec.iter().any(|r| r.len() != cols) {
        return Err(invalid(format!("{what}: matrix rows must be nonempty and of equal length")));
    }
    let m = CMatrix::from_fn(rows, cols, |i, j| spec[i][j].value());
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid(format!("{what}: entries must be finite")));
    }
    Ok(m)
}

fn square(spec: &MatrixSpec, nt: usize, what: &str) -> Result<HermitianMatrix<f64>, CliError> {
    let m = matrix(spec, what)?;
    if m.nrows() != nt || m.ncols() != nt {
        return Err(invalid(format!("{what}: expected a {nt}x{nt} matrix")));
    }
    HermitianMatrix::new(m).map_err(|e| invalid(format!("{what}: {e}")))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.solver.seed = s;
        }
        if let Some(t) = o.tol {
            self.solver.tol = t;
            self.solver.inner_tol = t;
        }
        if let Some(n) = o.max_iters {
            self.solver.max_iters = n;
        }
        if let Some(d) = &o.out {
            self.output.dir = Some(d.clone());
        }
    }

    pub fn channel_set(&self) -> Result<ChannelSet, CliError> {
        let h = self
            .channels
            .iter()
            .enumerate()
            .map(|(k, m)| matrix(m, &format!("channel {}", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if h.is_empty() {
            return Err(invalid("at least one channel is required"));
        }
        let noise = self.noise.clone().unwrap_or_else(|| vec![1.0; h.len()]);
        let ch = ChannelSet::new(h, noise).map_err(|e| invalid(e.to_string()))?;
        match &self.encoding_order {
            Some(o) => ch.with_encoding_order(o.clone()).map_err(|e| invalid(e.to_string())),
            None => Ok(ch),
        }
    }

    pub fn linear_constraints(&self, nt: usize) -> Result<Vec<LinearConstraint>, CliError> {
        self.constraints
            .iter()
            .enumerate()
            .map(|(l, c)| {
                let what = format!("constraint {}", l + 1);
                let r = match c {
                    ConstraintSpec::SumPower { budget } => LinearConstraint::sum_power(nt, *budget),
                    ConstraintSpec::PerAntenna { antenna, budget } => {
                        LinearConstraint::per_antenna(nt, *antenna, *budget)
                    }
                    ConstraintSpec::Interference { h, budget } => {
                        if h.len() != nt {
                            return Err(invalid(format!("{what}: expected {nt} entries")));
                        }
                        let v = bcmac::CVector::from_iterator(nt, h.iter().map(|e| e.value()));
                        LinearConstraint::interference(&v, *budget)
                    }
                    ConstraintSpec::Matrix { a, budget } => LinearConstraint::new(square(a, nt, &what)?, *budget),
                };
                r.map_err(|e| invalid(format!("{what}: {e}")))
            })
            .collect()
    }

    pub fn quadratic_ball(&self, nt: usize) -> Result<QuadraticBall<f64>, CliError> {
        match &self.nonlinear {
            Some(NonlinearSpec::QuadraticBall { matrices, p }) => {
                let a = matrices
                    .iter()
                    .enumerate()
                    .map(|(l, m)| square(m, nt, &format!("nonlinear matrix {}", l + 1)))
                    .collect::<Result<Vec<_>, _>>()?;
                QuadraticBall::new(a, *p).map_err(|e| invalid(e.to_string()))
            }
            None => Err(invalid("nonlinear_wsr needs a [nonlinear] table")),
        }
    }

    pub fn sinr_targets(&self, users: usize) -> Result<SinrTargets, CliError> {
        let t = self.targets.clone().ok_or_else(|| invalid("beamforming modes need `targets`"))?;
        if t.len() != users {
            return Err(invalid(format!("expected {users} SINR targets")));
        }
        SinrTargets::new(t).map_err(|e| invalid(e.to_string()))
    }

    pub fn rate_weights(&self, users: usize) -> Result<Vec<f64>, CliError> {
        let w = self.weights.clone().unwrap_or_else(|| vec![1.0; users]);
        if w.len() != users || w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().all(|&x| x == 0.0) {
            return Err(invalid("weights must be one nonnegative value per user, not all zero"));
        }
        Ok(w)
    }

    pub fn outer_settings(&self) -> Result<OuterSettings, CliError> {
        let s = &self.solver;
        let d = OuterSettings::default();
        let o = OuterSettings {
            tol: s.tol,
            max_iters: s.max_iters,
            initial_step: s.initial_step,
            stall_window: s.stall_window,
            max_cuts: s.max_cuts,
            inner: SolverSettings {
                tol: s.inner_tol,
                max_iters: s.inner_max_iters,
                restarts: s.restarts,
                seed: s.seed,
                ..d.inner
            },
            ..d
        };
        o.validate().map_err(|e| invalid(e.to_string()))?;
        if s.eps.is_nan() || s.eps <= 0.0 {
            return Err(invalid("solver.eps must be positive"));
        }
        Ok(o)
    }

    /// Checks everything the selected objective needs.
    pub fn validate(&self) -> Result<(), CliError> {
        let ch = self.channel_set()?;
        self.outer_settings()?;
        let linear = self.linear_constraints(ch.nt())?;
        match self.objective {
            Objective::WsrRegion => {
                if ch.users() != 2 {
                    return Err(invalid("region sweeps need exactly two users"));
                }
                if linear.is_empty() {
                    return Err(invalid("wsr_region needs at least one constraint"));
                }
                if self.sweep.resolution == 0 {
                    return Err(invalid("sweep.resolution must be at least 1"));
                }
                if let Some(p) = self.sweep.heuristic_sum_power {
                    if !(p > 0.0 && p.is_finite()) {
                        return Err(invalid("sweep.heuristic_sum_power must be positive"));
                    }
                }
            }
            Objective::SinrBalance | Objective::PowerBalance => {
                if linear.is_empty() {
                    return Err(invalid("beamforming modes need at least one constraint"));
                }
                if ch.nr() != 1 {
                    return Err(invalid("beamforming modes need single-antenna receivers"));
                }
                self.sinr_targets(ch.users())?;
            }
            Objective::NonlinearWsr => {
                self.quadratic_ball(ch.nt())?;
                self.rate_weights(ch.users())?;
            }
        }
        Ok(())
    }

    pub fn stem(&self) -> String {
        self.output.stem.clone().unwrap_or_else(|| self.objective.subcommand().to_string())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
