//! JSON run configuration.
//!
//! Matrices are nested arrays of `[re, im]` pairs, row major:
//!
//! ```json
//! {
//!   "instance": { "blocks": {
//!     "omega":    [[[0.0, 0.0]]],
//!     "coupling": [[[0.5, 0.0]]],
//!     "delta":    [[[10.0, 0.0]]]
//!   } },
//!   "method": "fixed-point",
//!   "tol": 1e-12,
//!   "time_window": { "t_max": 30.0, "n_points": 301 },
//!   "outputs": ["populations_csv", "report_json", "spectra_csv"]
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::embedding::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::linalg::{CMatrix, HermMatrix, C64};
use crate::models::{lambda_hamiltonian, random_separated, LambdaParams};
use crate::partition::PartitionedHamiltonian;

/// Row-major complex matrix as written in config files.
pub type MatrixRows = Vec<Vec<C64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockInstance {
    pub omega: MatrixRows,
    /// `q × p`.
    pub coupling: MatrixRows,
    pub delta: MatrixRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInstance {
    pub p: usize,
    pub q: usize,
    pub eps: f64,
    pub eps_prime: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Exactly one instance source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Lambda(LambdaParams),
    Blocks(BlockInstance),
    Random(RandomInstance),
    /// Path to a JSON file holding one of the other variants, relative to
    /// the config file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    #[default]
    FixedPoint,
    Perturbative,
    Sylvester,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    PopulationsCsv,
    ReportJson,
    SpectraCsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub method: MethodArg,
    /// Iterate index for `fixed-point` (converge to `tol` when absent),
    /// highest term for the series methods.
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Defaults to `[0, 300/‖Δ‖]` with 3000 points.
    #[serde(default)]
    pub time_window: Option<TimeWindow>,
    /// Slow initial state; defaults to the first slow basis vector.
    #[serde(default)]
    pub initial_state: Option<Vec<C64>>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_outputs() -> Vec<OutputKind> {
    vec![
        OutputKind::PopulationsCsv,
        OutputKind::ReportJson,
        OutputKind::SpectraCsv,
    ]
}

/// Default window length in units of `1/‖Δ‖`.
pub const DEFAULT_WINDOW_PERIODS: f64 = 300.0;
pub const DEFAULT_N_POINTS: usize = 3000;

impl RunConfig {
    pub fn new(instance: InstanceSpec) -> Self {
        Self {
            instance,
            method: MethodArg::default(),
            order: None,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            time_window: None,
            initial_state: None,
            outputs: default_outputs(),
        }
    }

    pub fn lambda_reference() -> Self {
        Self::new(InstanceSpec::Lambda(LambdaParams::reference(1.0)))
    }

    /// Parses a config document; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and inlines a `file` instance.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let InstanceSpec::File(rel) = &cfg.instance {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.instance = load_instance(&base.join(rel))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Config(format!(
                "field `tol`: must be positive, got {}",
                self.tol
            )));
        }
        if let Some(w) = self.time_window {
            if w.n_points < 2 {
                return Err(CliError::Config(format!(
                    "field `time_window.n_points`: must be at least 2, got {}",
                    w.n_points
                )));
            }
            if !(w.t_max > 0.0 && w.t_max.is_finite()) {
                return Err(CliError::Config(format!(
                    "field `time_window.t_max`: must be positive, got {}",
                    w.t_max
                )));
            }
        }
        if self.method == MethodArg::Perturbative && self.order == Some(0) {
            return Err(CliError::Config(
                "field `order`: perturbative series starts at order 1".into(),
            ));
        }
        Ok(())
    }

    /// Builds the partitioned Hamiltonian named by the instance.
    pub fn hamiltonian(&self) -> Result<PartitionedHamiltonian, CliError> {
        build_instance(&self.instance)
    }

    pub fn window_for(&self, h: &PartitionedHamiltonian) -> TimeWindow {
        self.time_window.unwrap_or(TimeWindow {
            t_max: DEFAULT_WINDOW_PERIODS / h.delta_norm(),
            n_points: DEFAULT_N_POINTS,
        })
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }
}

fn load_instance(path: &Path) -> Result<InstanceSpec, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let spec: InstanceSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: invalid instance: {e}", path.display())))?;
    if let InstanceSpec::File(_) = spec {
        return Err(CliError::Config(format!(
            "{}: nested file instances are not supported",
            path.display()
        )));
    }
    Ok(spec)
}

fn to_matrix(
    field: &str,
    rows: &MatrixRows,
    expected_cols: Option<usize>,
) -> Result<CMatrix, CliError> {
    let n_cols = expected_cols.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
        return Err(CliError::Config(format!(
            "field `{field}`: row {i} has {} entries, expected {n_cols}",
            row.len()
        )));
    }
    Ok(CMatrix::from_fn(rows.len(), n_cols, |i, j| rows[i][j]))
}

fn hermitian_block(field: &str, rows: &MatrixRows) -> Result<HermMatrix, CliError> {
    let m = to_matrix(field, rows, None)?;
    if !m.is_square() {
        return Err(CliError::Config(format!(
            "field `{field}`: block is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    HermMatrix::new(m).map_err(|e| CliError::Config(format!("field `{field}`: {e}")))
}

pub fn build_instance(spec: &InstanceSpec) -> Result<PartitionedHamiltonian, CliError> {
    match spec {
        InstanceSpec::Lambda(params) => {
            let params = LambdaParams::new(
                params.delta,
                params.omega_a,
                params.omega_b,
                params.big_delta,
            )
            .map_err(|e| CliError::Config(format!("field `instance.lambda`: {e}")))?;
            lambda_hamiltonian(&params).map_err(|e| CliError::numerical("lambda_hamiltonian", e))
        }
        InstanceSpec::Blocks(blocks) => {
            let omega = hermitian_block("instance.blocks.omega", &blocks.omega)?;
            let delta = hermitian_block("instance.blocks.delta", &blocks.delta)?;
            if blocks.coupling.len() != delta.dim() {
                return Err(CliError::Config(format!(
                    "field `instance.blocks.coupling`: {} rows, expected {}",
                    blocks.coupling.len(),
                    delta.dim()
                )));
            }
            let coupling = to_matrix(
                "instance.blocks.coupling",
                &blocks.coupling,
                Some(omega.dim()),
            )?;
            PartitionedHamiltonian::new(omega, coupling, delta)
                .map_err(|e| CliError::numerical("PartitionedHamiltonian::new", e))
        }
        InstanceSpec::Random(r) => random_separated(r.p, r.q, r.eps, r.eps_prime, r.seed)
            .map_err(|e| CliError::Config(format!("field `instance.random`: {e}"))),
        InstanceSpec::File(path) => build_instance(&load_instance(path)?),
    }
}

/// Row-major nested arrays for JSON output.
pub fn matrix_rows(m: &CMatrix) -> MatrixRows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
