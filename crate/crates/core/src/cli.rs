//! Command-line front end: `simulate`, `construct`, `scan` and `verify-lemma1`.
//!
//! Data goes to files or standard output; diagnostics go to the error stream.
//! Exit codes: 0 on success, 1 on configuration or parameter errors, 2 when
//! the integration hits a singular configuration.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, State};
use crate::equilibria::{
    elliptic_elliptic_lagrangian, elliptic_lagrangian, EEREParams, EllipticREParams,
    EquilibriumError,
};
use crate::geometry::{Curvature, Vec4};
use crate::integrator::{integrate, IntegrationError, IntegratorConfig, Trajectory};
use crate::verification::scan::{linspace, square_grid};
use crate::verification::{mass_scan_elliptic, verify_lemma1, MassScanResult, ScanSettings};

pub const TRAJECTORY_HEADER: [&str; 10] = ["t", "body", "w", "x", "y", "z", "vw", "vx", "vy", "vz"];
pub const INVARIANTS_HEADER: [&str; 8] = ["t", "h", "c_wx", "c_wy", "c_wz", "c_xy", "c_xz", "c_yz"];
pub const SCAN_HEADER: [&str; 6] = ["m1", "m2", "min_residual", "restarts", "best_r", "best_y"];

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;

const DEFAULT_TILT: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error("integration failed: {0}")]
    Integration(IntegrationError),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Integration(IntegrationError::Dynamics {
                source: DynamicsError::Singularity { .. },
                ..
            }) => EXIT_SINGULAR,
            _ => EXIT_CONFIG,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Elliptic,
    EllipticElliptic,
}

/// Initial condition of a run: explicit vectors or a closed-form family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Explicit {
        positions: [Vec4; 3],
        velocities: [Vec4; 3],
    },
    Constructor {
        family: Family,
        #[serde(default)]
        r: Option<f64>,
        #[serde(default)]
        y: Option<f64>,
        #[serde(default)]
        omega: Option<f64>,
        #[serde(default)]
        tilt: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_trajectory")]
    pub trajectory: String,
    #[serde(default = "default_invariants")]
    pub invariants: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}
fn default_trajectory() -> String {
    "trajectory.csv".into()
}
fn default_invariants() -> String {
    "invariants.csv".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            trajectory: default_trajectory(),
            invariants: default_invariants(),
        }
    }
}

/// A simulation run read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sigma: Curvature,
    pub masses: [f64; 3],
    pub initial: InitialSpec,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.into(),
            source,
        })
    }

    /// Checks field consistency and builds the initial state.
    pub fn initial_state(&self) -> Result<State, CliError> {
        for (i, &m) in self.masses.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(CliError::Config(format!(
                    "masses[{i}]: must be positive, got {m}"
                )));
            }
        }
        self.integrator
            .validate()
            .map_err(|e| CliError::Config(format!("integrator: {e}")))?;
        match &self.initial {
            InitialSpec::Explicit {
                positions,
                velocities,
            } => State::new(self.sigma, self.masses, *positions, *velocities)
                .map_err(|e| CliError::Config(format!("initial: {e}"))),
            InitialSpec::Constructor {
                family,
                r,
                y,
                omega,
                tilt,
            } => {
                let m = self.masses[0];
                if self.masses.iter().any(|&mi| mi != m) {
                    return Err(CliError::Config(
                        "masses: closed-form initial conditions need three equal masses".into(),
                    ));
                }
                match family {
                    Family::Elliptic => {
                        if tilt.is_some() {
                            return Err(CliError::Config(
                                "initial.tilt: only used by family elliptic-elliptic".into(),
                            ));
                        }
                        let r = r.ok_or_else(|| {
                            CliError::Config("initial.r: required for family elliptic".into())
                        })?;
                        Ok(elliptic_lagrangian(self.sigma, m, r, y.unwrap_or(0.0), *omega)?.1)
                    }
                    Family::EllipticElliptic => {
                        if self.sigma != Curvature::Positive {
                            return Err(CliError::Config(
                                "sigma: elliptic-elliptic equilibria need sigma = 1".into(),
                            ));
                        }
                        if r.is_some() || y.is_some() {
                            return Err(CliError::Config(
                                "initial: r and y are not used by family elliptic-elliptic".into(),
                            ));
                        }
                        let omega = omega.ok_or_else(|| {
                            CliError::Config("initial.omega: required for elliptic-elliptic".into())
                        })?;
                        Ok(elliptic_elliptic_lagrangian(m, omega, tilt.unwrap_or(DEFAULT_TILT))?.1)
                    }
                }
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "curved3",
    about = "Curved 3-body problem on S3 and H3",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a run configuration and write trajectory.csv and invariants.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a closed-form relative equilibrium as JSON.
    Construct {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        sigma: i32,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        omega: Option<f64>,
        #[arg(long)]
        tilt: Option<f64>,
    },
    /// Scan mass ratios (m₀ = 1) for elliptic Lagrangian relative equilibria; writes scan.csv.
    Scan {
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        sigma: i32,
        /// min:max:steps for m1 (and for m2 unless --grid-m2 is given).
        #[arg(long, default_value = "0.5:1.5:11")]
        grid: String,
        #[arg(long)]
        grid_m2: Option<String>,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Integrate a run configuration and report max |c_wy|, |c_wz| as JSON.
    #[command(name = "verify-lemma1")]
    VerifyLemma1 {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `min:max:steps`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad =
        |why: &str| CliError::Config(format!("grid '{spec}': {why} (expected min:max:steps)"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad("wrong number of fields"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad("min is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad("max is not a number"))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| bad("steps is not a non-negative integer"))?;
    if n == 0 {
        return Err(bad("steps must be at least 1"));
    }
    if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(bad("need 0 < min <= max"));
    }
    Ok(linspace(lo, hi, n))
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        for i in 0..3 {
            let (q, v) = (s.positions[i], s.velocities[i]);
            let mut row = vec![fmt_f64(s.time), i.to_string()];
            row.extend(q.to_array().into_iter().chain(v.to_array()).map(fmt_f64));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_invariants_csv(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(INVARIANTS_HEADER)?;
    for rec in &traj.invariants_log {
        let row: Vec<String> = [rec.time, rec.h]
            .into_iter()
            .chain(rec.c)
            .map(fmt_f64)
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scan_csv(result: &MassScanResult, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SCAN_HEADER)?;
    for p in &result.points {
        w.write_record([
            fmt_f64(p.m1),
            fmt_f64(p.m2),
            fmt_f64(p.min_residual),
            p.restarts.to_string(),
            fmt_f64(p.best.r0()),
            fmt_f64(p.best.y0()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run_config(config: &RunConfig) -> Result<Trajectory, CliError> {
    let state = config.initial_state()?;
    integrate(&state, &config.integrator).map_err(CliError::Integration)
}

fn simulate(config_path: &Path, out: Option<&Path>, err: &mut dyn Write) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output.dir.clone());
    let traj = run_config(&config)?;
    fs::create_dir_all(&dir)?;
    write_trajectory_csv(&traj, &dir.join(&config.output.trajectory))?;
    write_invariants_csv(&traj, &dir.join(&config.output.invariants))?;
    let d = traj.drift;
    writeln!(
        err,
        "simulated {} samples; drift: energy {:.3e}, momentum {:.3e}, constraint {:.3e}",
        traj.samples.len(),
        d.energy,
        d.momentum.iter().fold(0.0_f64, |a, &b| a.max(b)),
        d.constraint
    )?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct EllipticOutput<'a> {
    family: Family,
    sigma: Curvature,
    masses: [f64; 3],
    omega: f64,
    omega_squared: f64,
    shape_constant: f64,
    params: &'a EllipticREParams,
    initial: InitialSpec,
}

#[derive(Debug, Serialize)]
struct EllipticEllipticOutput<'a> {
    family: Family,
    sigma: Curvature,
    masses: [f64; 3],
    alpha: f64,
    beta: f64,
    params: &'a EEREParams,
    initial: InitialSpec,
}

#[allow(clippy::too_many_arguments)]
fn construct(
    family: Family,
    sigma: i32,
    m: f64,
    r: Option<f64>,
    y: Option<f64>,
    omega: Option<f64>,
    tilt: Option<f64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let sigma =
        Curvature::try_from(sigma).map_err(|e| CliError::Config(format!("--sigma: {e}")))?;
    let json = match family {
        Family::Elliptic => {
            let r =
                r.ok_or_else(|| CliError::Config("--r is required for family elliptic".into()))?;
            let (params, st) = elliptic_lagrangian(sigma, m, r, y.unwrap_or(0.0), omega)?;
            serde_json::to_string_pretty(&EllipticOutput {
                family,
                sigma,
                masses: st.masses,
                omega: params.omega,
                omega_squared: params.omega * params.omega,
                shape_constant: params.shape_constant(),
                params: &params,
                initial: InitialSpec::Explicit {
                    positions: st.positions,
                    velocities: st.velocities,
                },
            })
        }
        Family::EllipticElliptic => {
            if sigma != Curvature::Positive {
                return Err(CliError::Config(
                    "elliptic-elliptic equilibria need --sigma 1".into(),
                ));
            }
            let omega = omega.ok_or_else(|| {
                CliError::Config("--omega is required for elliptic-elliptic".into())
            })?;
            let (params, st) =
                elliptic_elliptic_lagrangian(m, omega, tilt.unwrap_or(DEFAULT_TILT))?;
            serde_json::to_string_pretty(&EllipticEllipticOutput {
                family,
                sigma,
                masses: st.masses,
                alpha: params.alpha,
                beta: params.beta,
                params: &params,
                initial: InitialSpec::Explicit {
                    positions: st.positions,
                    velocities: st.velocities,
                },
            })
        }
    }
    .map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out, "{json}")?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn scan(
    sigma: i32,
    grid: &str,
    grid_m2: Option<&str>,
    restarts: usize,
    seed: u64,
    out: &Path,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let sigma =
        Curvature::try_from(sigma).map_err(|e| CliError::Config(format!("--sigma: {e}")))?;
    if restarts == 0 {
        return Err(CliError::Config("--restarts must be at least 1".into()));
    }
    let axis1 = parse_grid(grid)?;
    let axis2 = match grid_m2 {
        Some(g) => parse_grid(g)?,
        None => axis1.clone(),
    };
    let points: Vec<(f64, f64)> = if grid_m2.is_none() {
        square_grid(&axis1)
    } else {
        axis1
            .iter()
            .flat_map(|&a| axis2.iter().map(move |&b| (a, b)))
            .collect()
    };
    let settings = ScanSettings {
        restarts,
        seed,
        ..ScanSettings::default()
    };
    let result = mass_scan_elliptic(sigma, &points, &settings);
    fs::create_dir_all(out)?;
    write_scan_csv(&result, &out.join("scan.csv"))?;
    if let Some(best) = result.argmin() {
        writeln!(
            err,
            "scanned {} points (sigma = {sigma}); smallest residual {:.3e} at m1 = {}, m2 = {}",
            result.points.len(),
            best.min_residual,
            best.m1,
            best.m2
        )?;
    }
    Ok(())
}

fn verify_momentum(config_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let report = verify_lemma1(&run_config(&config)?);
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out, "{json}")?;
    Ok(())
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out: dir } => simulate(&config, dir.as_deref(), err),
        Command::Construct {
            family,
            sigma,
            m,
            r,
            y,
            omega,
            tilt,
        } => construct(family, sigma, m, r, y, omega, tilt, out),
        Command::Scan {
            sigma,
            grid,
            grid_m2,
            restarts,
            seed,
            out: dir,
        } => scan(sigma, &grid, grid_m2.as_deref(), restarts, seed, &dir, err),
        Command::VerifyLemma1 { config } => verify_momentum(&config, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
