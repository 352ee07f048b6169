//! Batch front end behind the `adelim` binary.
//!
//! Exit codes: 0 on success, 1 for configuration or I/O errors, 2 for a
//! numerical failure (the message names the failing operation).

pub mod config;
pub mod output;
pub mod validate;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dynamics::{
    compare, default_envelope_window, propagate_effective, propagate_exact, time_grid,
    ComparisonReport, Trajectory,
};
use crate::effective::{bloch_hamiltonian, hermitized_hamiltonian, EffectiveModel};
use crate::embedding::{
    fixed_point, leading_order, perturbative_series, residual, sylvester_series, t_map,
    FixedPointOptions, Method, WaveOperator,
};
use crate::linalg::{eigenvalues, herm_eigenvalues, real, CMatrix, CVector};
use crate::models::LambdaParams;
use crate::partition::{PartitionedHamiltonian, ScaleDiagnostics};

use config::{matrix_rows, InstanceSpec, MatrixRows, MethodArg, OutputKind, RunConfig};
use output::{ensure_dir, populations_csv, spectra_csv, write_json, write_text, SpectrumRow};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{op} failed: {source}")]
    Numerical {
        op: &'static str,
        source: crate::Error,
    },
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn numerical(op: &'static str, source: crate::Error) -> Self {
        Self::Numerical { op, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numerical { .. } | Self::Validation(_) => 2,
        }
    }
}

trait Op<T> {
    fn op(self, name: &'static str) -> Result<T, CliError>;
}

impl<T> Op<T> for crate::Result<T> {
    fn op(self, name: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::numerical(name, e))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "adelim",
    version,
    about = "Slow-sector reduction of two-block Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Λ system: exact dynamics against the order-0, B⁽⁴⁾ and hermitized B⁽¹⁰⁾ reductions.
    LambdaDemo(CommonArgs),
    /// Solve for the wave operator and write a residual/diagnostics report.
    Reduce(CommonArgs),
    /// Propagate exact and reduced dynamics and write population CSVs.
    Simulate(CommonArgs),
    /// Compare the block-diagonalized spectrum with the dense spectrum.
    Spectrum(CommonArgs),
    /// Run the randomized property suites.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; the Λ reference instance when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for a `random` instance.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl CommonArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::lambda_reference(),
        };
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if self.order.is_some() {
            cfg.order = self.order;
        }
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if let (Some(seed), InstanceSpec::Random(r)) = (self.seed, &mut cfg.instance) {
            r.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first), runs, reports errors on stderr and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::LambdaDemo(args) => lambda_demo(&args.config()?, &args.out),
        Command::Reduce(args) => reduce_cmd(&args.config()?, &args.out),
        Command::Simulate(args) => simulate(&args.config()?, &args.out),
        Command::Spectrum(args) => spectrum(&args.config()?, &args.out),
        Command::Validate(args) => {
            ensure_dir(&args.out)?;
            let report = validate::run_suites(args.seed);
            write_json(&args.out.join("validation.json"), &report)?;
            for s in &report.suites {
                log::info!(
                    "{}: {} ({} cases, worst {:.3e})",
                    s.name,
                    if s.passed { "pass" } else { "FAIL" },
                    s.cases,
                    s.worst
                );
            }
            if report.all_passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .suites
                    .iter()
                    .filter(|s| !s.passed)
                    .map(|s| s.name)
                    .collect();
                Err(CliError::Validation(failed.join(", ")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderResidual {
    pub order: usize,
    pub residual: f64,
    /// `residual / ‖Δ‖`.
    pub relative: f64,
}

/// Wave operator for the configured method plus the residual of every
/// lower order.
pub fn solve(
    h: &PartitionedHamiltonian,
    cfg: &RunConfig,
) -> Result<(WaveOperator, Vec<OrderResidual>), CliError> {
    let scale = h.delta_norm();
    let entry = |order, residual: f64| OrderResidual {
        order,
        residual,
        relative: residual / scale,
    };
    match cfg.method {
        MethodArg::FixedPoint => {
            let last = match cfg.order {
                Some(k) => k,
                None => fixed_point(
                    h,
                    FixedPointOptions {
                        max_iter: cfg.max_iter,
                        tol: cfg.tol,
                    },
                )
                .op("fixed_point")?
                .order(),
            };
            let mut b = leading_order(h);
            let mut history = vec![entry(0, residual(&b, h).op("residual")?)];
            for k in 1..=last {
                b = t_map(&b, h).op("t_map")?;
                history.push(entry(k, residual(&b, h).op("residual")?));
            }
            let wave = WaveOperator::new(b, Method::FixedPoint, last, h).op("fixed_point")?;
            Ok((wave, history))
        }
        MethodArg::Perturbative => {
            let series =
                perturbative_series(h, cfg.order.unwrap_or(4)).op("perturbative_series")?;
            let history = series.partial_residuals(h).op("residual")?;
            let history = history
                .into_iter()
                .enumerate()
                .map(|(i, r)| entry(i + 1, r))
                .collect();
            Ok((
                series
                    .wave_operator(series.len(), h)
                    .op("perturbative_series")?,
                history,
            ))
        }
        MethodArg::Sylvester => {
            let series = sylvester_series(h, cfg.order.unwrap_or(3)).op("sylvester_series")?;
            let history = series.partial_residuals(h).op("residual")?;
            let history = history
                .into_iter()
                .enumerate()
                .map(|(i, r)| entry(i, r))
                .collect();
            let wave = series
                .wave_operator(series.len(), h)
                .op("sylvester_series")?;
            // Report the highest term index, matching the other schemes.
            let order = wave.order() - 1;
            let wave = WaveOperator::new(wave.into_matrix(), Method::SylvesterExpansion, order, h)
                .op("sylvester_series")?;
            Ok((wave, history))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralErrors {
    /// Max gap between σ(H) and σ(h_α) ∪ σ(h_γ), sorted.
    pub completeness: f64,
    /// Max distance from an eigenvalue of `ω + Ω†B` to σ(H).
    pub bloch: f64,
}

fn spectral_rows(
    model: &EffectiveModel,
    h: &PartitionedHamiltonian,
) -> Result<(Vec<SpectrumRow>, SpectralErrors), CliError> {
    let exact = herm_eigenvalues(&h.assemble()).op("herm_eig")?;
    let mut reduced: Vec<(f64, &'static str)> = herm_eigenvalues(&model.h_alpha)
        .op("herm_eig")?
        .into_iter()
        .map(|l| (l, "slow"))
        .chain(
            herm_eigenvalues(&model.h_gamma)
                .op("herm_eig")?
                .into_iter()
                .map(|l| (l, "fast")),
        )
        .collect();
    reduced.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rows: Vec<SpectrumRow> = exact
        .iter()
        .zip(&reduced)
        .enumerate()
        .map(|(index, (&e, &(r, sector)))| SpectrumRow {
            index,
            exact: e,
            reduced: r,
            sector,
        })
        .collect();
    let completeness = rows
        .iter()
        .map(|r| (r.exact - r.reduced).abs())
        .fold(0.0, f64::max);
    let bloch = eigenvalues(&model.h_bloch)
        .op("eigenvalues")?
        .iter()
        .map(|z| {
            exact
                .iter()
                .map(|&l| (z - real(l)).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok((
        rows,
        SpectralErrors {
            completeness,
            bloch,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReduceReport {
    pub p: usize,
    pub q: usize,
    pub method: Method,
    pub order: usize,
    pub diagnostics: ScaleDiagnostics,
    pub residual: f64,
    pub residual_relative: f64,
    pub residuals_per_order: Vec<OrderResidual>,
    pub spectral_errors: SpectralErrors,
    pub b: MatrixRows,
    pub h_bloch: MatrixRows,
    pub h_hermitized: MatrixRows,
}

fn reduce_report(
    h: &PartitionedHamiltonian,
    cfg: &RunConfig,
) -> Result<(ReduceReport, EffectiveModel, Vec<SpectrumRow>), CliError> {
    let (wave, history) = solve(h, cfg)?;
    let model = EffectiveModel::build(wave.clone(), h).op("EffectiveModel::build")?;
    let (rows, spectral_errors) = spectral_rows(&model, h)?;
    let report = ReduceReport {
        p: h.p(),
        q: h.q(),
        method: wave.method(),
        order: wave.order(),
        diagnostics: h.diagnostics(),
        residual: wave.residual(),
        residual_relative: wave.residual() / h.delta_norm(),
        residuals_per_order: history,
        spectral_errors,
        b: matrix_rows(wave.matrix()),
        h_bloch: matrix_rows(&model.h_bloch),
        h_hermitized: matrix_rows(model.h_alpha.matrix()),
    };
    Ok((report, model, rows))
}

fn reduce_cmd(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let h = cfg.hamiltonian()?;
    let (report, _, rows) = reduce_report(&h, cfg)?;
    ensure_dir(out)?;
    if cfg.wants(OutputKind::ReportJson) {
        write_json(&out.join("report.json"), &report)?;
    }
    if cfg.wants(OutputKind::SpectraCsv) {
        write_text(&out.join("spectra.csv"), &spectra_csv(&rows))?;
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let h = cfg.hamiltonian()?;
    let (report, _, rows) = reduce_report(&h, cfg)?;
    ensure_dir(out)?;
    write_text(&out.join("spectra.csv"), &spectra_csv(&rows))?;
    if cfg.wants(OutputKind::ReportJson) {
        write_json(&out.join("report.json"), &report)?;
    }
    Ok(())
}

fn initial_slow_state(cfg: &RunConfig, p: usize) -> Result<CVector, CliError> {
    match &cfg.initial_state {
        Some(v) if v.len() != p => Err(CliError::Config(format!(
            "field `initial_state`: {} entries, expected {p}",
            v.len()
        ))),
        Some(v) => {
            let v = CVector::from_column_slice(v);
            let norm = v.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(CliError::Config(
                    "field `initial_state`: must be a nonzero vector".into(),
                ));
            }
            Ok(v / real(norm))
        }
        None => Ok(CVector::from_fn(p, |i, _| {
            if i == 0 {
                real(1.0)
            } else {
                real(0.0)
            }
        })),
    }
}

fn full_state(alpha: &CVector, q: usize) -> CVector {
    let mut psi = CVector::zeros(alpha.len() + q);
    psi.rows_mut(0, alpha.len()).copy_from(alpha);
    psi
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub comparison: ComparisonReport,
}

struct Dynamics {
    exact: Trajectory,
    runs: Vec<(String, Trajectory)>,
    summaries: Vec<RunSummary>,
}

fn run_dynamics(
    h: &PartitionedHamiltonian,
    cfg: &RunConfig,
    reduced: &[(String, CMatrix)],
) -> Result<Dynamics, CliError> {
    let window = cfg.window_for(h);
    let times = time_grid(window.t_max, window.n_points);
    let alpha0 = initial_slow_state(cfg, h.p())?;
    let exact = propagate_exact(&h.assemble(), &full_state(&alpha0, h.q()), &times)
        .op("propagate_exact")?;
    let slow: Vec<usize> = (0..h.p()).collect();
    let envelope = default_envelope_window(h.delta_norm());
    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    for (name, h_eff) in reduced {
        let traj = propagate_effective(h_eff, &alpha0, &times).op("propagate_effective")?;
        let comparison = compare(&exact, &traj, &slow, envelope).op("compare")?;
        summaries.push(RunSummary {
            name: name.clone(),
            comparison,
        });
        runs.push((name.clone(), traj));
    }
    Ok(Dynamics {
        exact,
        runs,
        summaries,
    })
}

fn write_dynamics(cfg: &RunConfig, out: &Path, dynamics: &Dynamics) -> Result<(), CliError> {
    if cfg.wants(OutputKind::PopulationsCsv) {
        write_text(
            &out.join("exact.csv"),
            &populations_csv("exact", &dynamics.exact),
        )?;
        for (name, traj) in &dynamics.runs {
            write_text(
                &out.join(format!("{name}.csv")),
                &populations_csv(name, traj),
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    #[serde(flatten)]
    pub reduction: ReduceReport,
    pub t_max: f64,
    pub n_points: usize,
    pub runs: Vec<RunSummary>,
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let h = cfg.hamiltonian()?;
    let (reduction, model, rows) = reduce_report(&h, cfg)?;
    let reduced = vec![
        ("bloch".to_string(), model.h_bloch.clone()),
        ("hermitized".to_string(), model.h_alpha.matrix().clone()),
    ];
    let dynamics = run_dynamics(&h, cfg, &reduced)?;
    ensure_dir(out)?;
    write_dynamics(cfg, out, &dynamics)?;
    if cfg.wants(OutputKind::SpectraCsv) {
        write_text(&out.join("spectra.csv"), &spectra_csv(&rows))?;
    }
    if cfg.wants(OutputKind::ReportJson) {
        let window = cfg.window_for(&h);
        let report = SimulateReport {
            reduction,
            t_max: window.t_max,
            n_points: window.n_points,
            runs: dynamics.summaries,
        };
        write_json(&out.join("report.json"), &report)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaDemoReport {
    pub params: LambdaParams,
    pub diagnostics: ScaleDiagnostics,
    pub t_max: f64,
    pub n_points: usize,
    pub residuals: Vec<OrderResidual>,
    pub runs: Vec<RunSummary>,
}

/// Iterate index and output name of each reduced run.
const DEMO_ORDERS: [(usize, &str); 3] = [(0, "order0"), (4, "bloch_b4"), (10, "hermitized_b10")];

fn lambda_demo(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let params = match &cfg.instance {
        InstanceSpec::Lambda(p) => *p,
        _ => {
            return Err(CliError::Config(
                "lambda-demo needs a `lambda` instance".into(),
            ))
        }
    };
    let h = cfg.hamiltonian()?;
    let mut iterate_cfg = cfg.clone();
    iterate_cfg.method = MethodArg::FixedPoint;
    iterate_cfg.order = Some(10);
    let (b10, residuals) = solve(&h, &iterate_cfg)?;

    let mut b = leading_order(&h);
    let mut reduced = Vec::new();
    let mut k = 0;
    for (order, name) in DEMO_ORDERS {
        while k < order {
            b = t_map(&b, &h).op("t_map")?;
            k += 1;
        }
        let h_eff = if name.starts_with("hermitized") {
            hermitized_hamiltonian(&b, &h)
                .op("hermitized_hamiltonian")?
                .into_matrix()
        } else {
            bloch_hamiltonian(&b, &h).op("bloch_hamiltonian")?
        };
        reduced.push((name.to_string(), h_eff));
    }
    debug_assert_eq!(&b, b10.matrix());

    let dynamics = run_dynamics(&h, cfg, &reduced)?;
    ensure_dir(out)?;
    write_dynamics(cfg, out, &dynamics)?;
    if cfg.wants(OutputKind::ReportJson) {
        let window = cfg.window_for(&h);
        let report = LambdaDemoReport {
            params,
            diagnostics: h.diagnostics(),
            t_max: window.t_max,
            n_points: window.n_points,
            residuals,
            runs: dynamics.summaries,
        };
        write_json(&out.join("report.json"), &report)?;
    }
    Ok(())
}
