//! Reproducible batch runs: JSON config in, CSV data plus JSON summary and
//! manifest out. One process per scenario; every output is written
//! atomically (temp file + rename) into the chosen output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fock::Statistics;
use crate::ramsey::{
    self, dephasing_audit, fringe_scan, NoiseChannel, PhaseSettings, ThermalOccupation, Variant,
};
use crate::rotor::{
    self, aharonov_bohm_phase, build_ramp, gamma_profile, lowest_eigenpairs, stray_phase,
    AngularBasis, BasisKind, Method, PropagateOpts, RotorProblem, Sector, TrapConfig,
};
use crate::util::linspace;
use crate::zeeman;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// Process exit code contract: 2 config error, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::ConfigInvalid(_) => 2,
            _ => 3,
        }
    }
}

macro_rules! numerical {
    ($e:expr) => {
        $e.map_err(|err| ScenarioError::Numerical(err.to_string()))
    };
}

/// Scenario commands exposed by the batch runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Ideal-protocol fringe scan.
    Fringe,
    /// Noise-channel fringe-invariance audit.
    Dephase,
    /// Thermal-occupation visibility.
    Thermal,
    /// Gradient-pulse error and phase-correction sweep.
    ZeemanScan,
    /// Rotor spectrum and adiabaticity along the control sweep.
    RotorSpectrum,
    /// Adiabatic exchange ramp with parity-transfer verdicts.
    RotorRamp,
    /// Geometric and stray dynamical phases.
    Phases,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fringe => "fringe",
            Command::Dephase => "dephase",
            Command::Thermal => "thermal",
            Command::ZeemanScan => "zeeman-scan",
            Command::RotorSpectrum => "rotor-spectrum",
            Command::RotorRamp => "rotor-ramp",
            Command::Phases => "phases",
        }
    }
}

/// Outcome of a scenario run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub artifacts: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Execute a command with the given JSON config (or its defaults when
/// `config_json` is `None`), writing artifacts under `out_dir`.
pub fn run(
    command: Command,
    config_json: Option<&str>,
    out_dir: &Path,
    seed: u64,
) -> Result<RunReport, ScenarioError> {
    fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let (config_echo, artifacts) = match command {
        Command::Fringe => run_fringe(parse(config_json)?, out_dir)?,
        Command::Dephase => run_dephase(parse(config_json)?, out_dir, seed)?,
        Command::Thermal => run_thermal(parse(config_json)?, out_dir)?,
        Command::ZeemanScan => run_zeeman_scan(parse(config_json)?, out_dir)?,
        Command::RotorSpectrum => run_rotor_spectrum(parse(config_json)?, out_dir)?,
        Command::RotorRamp => run_rotor_ramp(parse(config_json)?, out_dir)?,
        Command::Phases => run_phases(parse(config_json)?, out_dir)?,
    };
    let wall_time_s = started.elapsed().as_secs_f64();
    let manifest = serde_json::json!({
        "command": command.name(),
        "config": config_echo,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": wall_time_s,
        "artifacts": artifacts,
    });
    let manifest_path = out_dir.join("manifest.json");
    write_atomic(&manifest_path, &serde_json::to_string_pretty(&manifest).unwrap())?;
    let mut all = artifacts;
    all.push(manifest_path);
    Ok(RunReport { command: command.name().into(), artifacts: all, wall_time_s })
}

fn parse<C: for<'de> Deserialize<'de> + Default + Serialize>(
    config_json: Option<&str>,
) -> Result<C, ScenarioError> {
    match config_json {
        None => Ok(C::default()),
        Some(text) => serde_json::from_str(text)
            .map_err(|e| ScenarioError::ConfigInvalid(e.to_string())),
    }
}

fn echo<C: Serialize>(cfg: &C) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap()
}

fn write_atomic(path: &Path, content: &str) -> Result<(), ScenarioError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn phase_grid(points: usize) -> Vec<f64> {
    linspace(
        0.0,
        2.0 * std::f64::consts::PI * (points as f64 - 1.0) / points as f64,
        points,
    )
}

// ---------------------------------------------------------------- fringe

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FringeConfig {
    pub n: u32,
    pub variant: Variant,
    pub statistics: Vec<Statistics>,
    pub grid_points: usize,
    pub dphi1: f64,
    pub dphi2: f64,
}

impl Default for FringeConfig {
    fn default() -> Self {
        FringeConfig {
            n: 10,
            variant: Variant::OneDim,
            statistics: vec![Statistics::Boson, Statistics::Fermion],
            grid_points: 32,
            dphi1: 0.0,
            dphi2: 0.0,
        }
    }
}

fn run_fringe(
    cfg: FringeConfig,
    out: &Path,
) -> Result<(serde_json::Value, Vec<PathBuf>), ScenarioError> {
    let plan = numerical!(ramsey::build_sequence(cfg.n, cfg.variant))?;
    let grid = phase_grid(cfg.grid_points);
    let base = PhaseSettings { dphi1: cfg.dphi1, dphi2: cfg.dphi2, dphi3: 0.0 };
    let mut artifacts = Vec::new();
    let mut fits = serde_json::Map::new();
    for &stats in &cfg.statistics {
        let scan = numerical!(fringe_scan(&plan, stats, base, &grid, None))?;
        let tag = match stats {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        };
        let mut csv = String::from("phi,parity,postselect_prob\n");
        for p in &scan.points {
            csv.push_str(&format!(
                "{:.12e},{:.12e},{:.12e}\n",
                p.phi,
                p.parity.unwrap_or(f64::NAN),
                p.postselect_prob
            ));
        }
        let path = out.join(format!("fringe_{tag}.csv"));
        write_atomic(&path, &csv)?;
        artifacts.push(path);
        fits.insert(
            tag.to_string(),
            serde_json::json!({
                "phase": scan.fit.phase,
                "visibility": scan.fit.visibility,
                "offset": scan.fit.offset,
            }),
        );
    }
    let summary = out.join("fringe_summary.json");
    write_atomic(
        &summary,
        &serde_json::to_string_pretty(&serde_json::Value::Object(fits)).unwrap(),
    )?;
    artifacts.push(summary);
    Ok((echo(&cfg), artifacts))
}

// --------------------------------------------------------------- dephase

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DephaseConfig {
    pub n: u32,
    pub variants: Vec<Variant>,
    pub statistics: Statistics,
    pub channels: Vec<NoiseChannel>,
    pub trials: usize,
}

impl Default for DephaseConfig {
    fn default() -> Self {
        DephaseConfig {
            n: 10,
            variants: vec![Variant::OneDim, Variant::TwoDim],
            statistics: Statistics::Fermion,
            channels: NoiseChannel::ALL.to_vec(),
            trials: 100,
        }
    }
}

fn run_dephase(
    cfg: DephaseConfig,
    out: &Path,
    seed: u64,
) -> Result<(serde_json::Value, Vec<PathBuf>), ScenarioError> {
    let mut jobs = Vec::new();
    for &variant in &cfg.variants {
        for &channel in &cfg.channels {
            jobs.push((variant, channel));
        }
    }
    let reports: Result<Vec<_>, ScenarioError> = jobs
        .par_iter()
        .map(|&(variant, channel)| {
            let plan = numerical!(ramsey::build_sequence(cfg.n, variant))?;
            let report = numerical!(dephasing_audit(
                &plan,
                cfg.statistics,
                channel,
                cfg.trials,
                seed ^ (channel as u64) << 8 ^ (variant as u64),
            ))?;
            Ok((variant, report))
        })
        .collect();
    let reports = reports?;
    let mut csv = String::from("variant,channel,trials,max_phase_deviation,max_visibility_loss\n");
    let mut rows = Vec::new();
    for (variant, r) in &reports {
        let vtag = match variant {
            Variant::OneDim => "one_dim",
            Variant::TwoDim => "two_dim",
        };
        csv.push_str(&format!(
            "{vtag},{},{},{:.6e},{:.6e}\n",
            r.channel.name(),
            r.trials,
            r.max_phase_deviation,
            r.max_visibility_loss
        ));
        rows.push(serde_json::json!({
            "variant": vtag,
            "channel": r.channel.name(),
            "max_phase_deviation": r.max_phase_deviation,
            "max_visibility_loss": r.max_visibility_loss,
        }));
    }
    let csv_path = out.join("dephase.csv");
    write_atomic(&csv_path, &csv)?;
    let summary = out.join("dephase_summary.json");
    write_atomic(&summary, &serde_json::to_string_pretty(&rows).unwrap())?;
    Ok((echo(&cfg), vec![csv_path, summary]))
}

// --------------------------------------------------------------- thermal

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalConfig {
    pub p0_grid: Vec<f64>,
    /// Separation used for the engine cross-check fringe.
    pub n: u32,
    pub engine_check: bool,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig { p0_grid: vec![0.7, 0.8, 0.9, 0.95, 1.0], n: 4, engine_check: true }
    }
}

fn run_thermal(
    cfg: ThermalConfig,
    out: &Path,
) -> Result<(serde_json::Value, Vec<PathBuf>), ScenarioError> {
    let plan = numerical!(ramsey::build_sequence(cfg.n, Variant::OneDim))?;
    let mut csv = String::from("p0,visibility_closed,visibility_truncated,visibility_engine\n");
    for &p0 in &cfg.p0_grid {
        let occ = ThermalOccupation::isotropic(p0);
        let closed = numerical!(ramsey::thermal_visibility(&occ))?;
        let engine = if cfg.engine_check {
            numerical!(ramsey::thermal_fringe_visibility(&plan, Statistics::Boson, &occ))?
                .visibility
        } else {
            f64::NAN
        };
        csv.push_str(&format!(
            "{:.6},{:.9},{:.9},{:.9}\n",
            p0, closed.visibility, closed.truncated_visibility, engine
        ));
    }
    let path = out.join("thermal.csv");
    write_atomic(&path, &csv)?;
    Ok((echo(&cfg), vec![path]))
}

// ----------------------------------------------------------- zeeman-scan

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeemanScanConfig {
    pub n: u32,
    /// Bare Rabi frequency, rad/s.
    pub rabi_freq: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_step: f64,
}

impl Default for ZeemanScanConfig {
    fn default() -> Self {
        ZeemanScanConfig {
            n: 10,
            rabi_freq: 2.0 * std::f64::consts::PI * 60e3,
            rho_min: 1.0,
            rho_max: 4.0,
            rho_step: 0.01,
        }
    }
}

fn run_zeeman_scan(
    cfg: ZeemanScanConfig,
    out: &Path,
) -> Result<(serde_json::Value, Vec<PathBuf>), ScenarioError> {
    if !(cfg.rho_step > 0.0 && cfg.rho_max > cfg.rho_min) {
        return Err(ScenarioError::ConfigInvalid("bad rho grid".into()));
    }
    let count = ((cfg.rho_max - cfg.rho_min) / cfg.rho_step).round() as usize + 1;
    let rhos: Vec<f64> = (0..count).map(|i| cfg.rho_min + i as f64 * cfg.rho_step).collect();
    let rows = numerical!(zeeman::ratio_scan(cfg.rabi_freq, cfg.n, &rhos))?;
    let mut csv = String::from("rho,p_err,residual_phase,closed_form\n");
    for r in &rows {
        csv.push_str(&format!(
            "{:.6},{:.9e},{:.9e},{:.9e}\n",
            r.rho, r.p_err, r.residual_phase, r.closed_form
        ));
    }
    let path = out.join("zeeman_scan.csv");
    write_atomic(&path, &csv)?;
    Ok((echo(&cfg), vec![path]))
}

// -------------------------------------------------------- rotor-spectrum

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotorSpectrumConfig {
    pub trap: Option<TrapConfig>,
    pub a_min: f64,
    pub a_max: f64,
    pub points: usize,
    pub levels: usize,
    pub basis_len: usize,
    /// Also diagonalize the opposite-reflection block to expose the
    /// double-well degeneracy of the level pairs.
    pub include_sine_block: bool,
    pub gamma_excited: usize,
}

impl Default for RotorSpectrumConfig {
    fn default() -> Self {
        RotorSpectrumConfig {
            trap: None,
            a_min: -4e-4,
            a_max: 4e-4,
            points: 161,
            levels: 8,
            basis_len: rotor::DEFAULT_BASIS_LEN,
            include_sine_block: true,
            gamma_excited: 16,
        }
    }
}

fn run_rotor_spectrum(
    cfg: RotorSpectrumConfig,
    out: &Path,
) -> Result<(serde_json::Value, Vec<PathBuf>), ScenarioError> {
    let trap = cfg.trap.unwrap_or_else(TrapConfig::calcium40);
    let problem = numerical!(RotorProblem::new(trap))?;
    let grid = linspace(cfg.a_min, cfg.a_max, cfg.points);
    let mut blocks = vec![("cos_odd", BasisKind::CosOdd)];
    if cfg.include_sine_block {
        blocks.push(("sin_odd", BasisKind::SinOdd));
    }
    let mut csv = String::from("a,block,level,excitation_rad_s\n");
    for (tag, kind) in blocks {
        let basis = AngularBasis::new(kind, cfg.basis_len);
        let rows: Result<Vec<_>, ScenarioError> = grid
            .par_iter()
            .map(|&a| {
                let pairs =
                    numerical!(lowest_eigenpairs(&problem.hamiltonian(a, &basis), cfg.levels))?;
                Ok((a, pairs.values))
            })
            .collect();
        for (a, values) in rows? {
            for (level, &e) in values.iter().enumerate() {
                csv.push_str(&format!(
                    "{:.8e},{tag},{level},{:.9e}\n",
                    a,
                    e - values[0]
                ));
            }
        }
    }
    let spectrum_path = out.join("rotor_spectrum.csv");
    write_atomic(&spectrum_path, &csv)?;

    let basis = Sector::FermionOdd.basis(cfg.basis_len);
    let gamma = numerical!(gamma_profile(&problem, &basis, &grid, cfg.gamma_excited))?;
    let mut gamma_csv = String::from("a,gamma\n");
    for (a, g) in &gamma {
        gamma_csv.push_str(&format!("{:.8e},{:.9e}\n", a, g));
    }
    let gamma_path = out.join("rotor_gamma.csv");
    write_atomic(&gamma_path, &gamma_csv)?;
    Ok((echo(&cfg), vec![spectrum_path, gamma_path]))
}

// ------------------------------------------------------------ rotor-ramp

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotorRampConfig {
    pub trap: Option<TrapConfig>,
    pub a_start: f64,
    pub a_end: f64,
    pub duration: f64,
    pub basis_len: usize,
    /// Basis used for the adiabaticity profile; the low spectrum is fully
    /// converged well below the propagation basis, so this can be smaller.
    pub gamma_basis_len: usize,
    pub gamma_points: usize,
    pub gamma_excited: usize,
    pub sectors: Vec<Sector>,
    pub method: Method,
    /// Cross-check the chosen backend against the other one.
    pub cross_check: bool,
    pub steps: usize,
    pub track_states: usize,
    pub output_samples: usize,
}

impl Default for RotorRampConfig {
    fn default() -> Self {
        RotorRampConfig {
            trap: None,
            a_start: -4e-4,
            a_end: 4e-4,
            duration: 2e-3,
            basis_len: 2048,
            gamma_basis_len: 768,
            gamma_points: 2001,
            gamma_excited: 16,
            sectors: vec![Sector::FermionOdd, Sector::BosonEven],
            method: Method::EigenframeK,
            cross_check: true,
            steps: 0,
            track_states: 16,
            output_samples: 512,
        }
    }
}

fn run_rotor_ramp(
    cfg: RotorRampConfig,
    out: &Path,
) -> Result<(serde_json::Value, Vec<PathBuf>), ScenarioError> {
    let trap = cfg.trap.unwrap_or_else(TrapConfig::calcium40);
    let problem = numerical!(RotorProblem::new(trap))?;
    let gamma_basis = Sector::FermionOdd.basis(cfg.gamma_basis_len);
    let grid = linspace(cfg.a_start, cfg.a_end, cfg.gamma_points.max(201));
    let gamma = numerical!(gamma_profile(&problem, &gamma_basis, &grid, cfg.gamma_excited))?;
    let schedule = numerical!(build_ramp(cfg.a_start, cfg.a_end, cfg.duration, &gamma))?;

    let mut ramp_csv = String::from("t,a\n");
    for (t, a) in schedule.samples() {
        ramp_csv.push_str(&format!("{:.9e},{:.9e}\n", t, a));
    }
    let ramp_path = out.join("ramp_schedule.csv");
    write_atomic(&ramp_path, &ramp_csv)?;
    let mut artifacts = vec![ramp_path];

    let mut summary = serde_json::Map::new();
    for &sector in &cfg.sectors {
        let basis = sector.basis(cfg.basis_len);
        let initial = numerical!(rotor::ground_state(&problem, cfg.a_start, &basis))?;
        let opts = PropagateOpts {
            method: cfg.method,
            steps: cfg.steps,
            track_states: cfg.track_states,
            output_samples: cfg.output_samples,
        };
        let (traj, agreement) = if cfg.cross_check {
            let (eigen, full) = numerical!(rotor::propagate_cross_checked(
                &problem, &schedule, &basis, &initial, &opts
            ))?;
            let agreement = (eigen.final_populations[0] - full.final_populations[0]).abs();
            let chosen = match cfg.method {
                Method::EigenframeK => eigen,
                Method::FullBanded => full,
            };
            (chosen, Some(agreement))
        } else {
            (numerical!(rotor::propagate(&problem, &schedule, &basis, &initial, &opts))?, None)
        };
        let tag = match sector {
            Sector::FermionOdd => "fermion",
            Sector::BosonEven => "boson",
        };
        let mut csv = String::from("t,a,overlap_sq,populations\n");
        for p in &traj.points {
            let pops: Vec<String> = p.populations.iter().map(|x| format!("{x:.6e}")).collect();
            csv.push_str(&format!(
                "{:.9e},{:.9e},{:.9},{}\n",
                p.t,
                p.a,
                p.overlap_sq,
                pops.join(";")
            ));
        }
        let path = out.join(format!("trajectory_{tag}.csv"));
        write_atomic(&path, &csv)?;
        artifacts.push(path);
        let target_label = match sector {
            Sector::FermionOdd => "first excited state of the final well",
            Sector::BosonEven => "ground state of the final well",
        };
        summary.insert(
            tag.into(),
            serde_json::json!({
                "min_overlap_sq": traj.min_overlap_sq,
                "final_target_population": traj.final_populations[0],
                "final_populations": traj.final_populations,
                "norm_drift": traj.norm_drift,
                "backend_agreement": agreement,
                "target": target_label,
            }),
        );
    }
    let summary_path = out.join("rotor_ramp_summary.json");
    write_atomic(
        &summary_path,
        &serde_json::to_string_pretty(&serde_json::Value::Object(summary)).unwrap(),
    )?;
    artifacts.push(summary_path);
    Ok((echo(&cfg), artifacts))
}

// ---------------------------------------------------------------- phases

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhasesConfig {
    pub trap: Option<TrapConfig>,
    /// Magnetic field normal to the rotor circle, T.
    pub b_field: f64,
    /// Rotor radius for the geometric phase, m.
    pub r0: f64,
    /// Stray quadrupole curvature, s^-2.
    pub a_prime: f64,
    pub a_start: f64,
    pub a_end: f64,
    pub duration: f64,
    pub basis_len: usize,
    pub gamma_points: usize,
    pub gamma_excited: usize,
}

impl Default for PhasesConfig {
    fn default() -> Self {
        PhasesConfig {
            trap: None,
            b_field: 4e-4,
            r0: 2.5e-6,
            a_prime: 8e8,
            a_start: -4e-4,
            a_end: 4e-4,
            duration: 2e-3,
            basis_len: 768,
            gamma_points: 2001,
            gamma_excited: 16,
        }
    }
}

fn run_phases(
    cfg: PhasesConfig,
    out: &Path,
) -> Result<(serde_json::Value, Vec<PathBuf>), ScenarioError> {
    let trap = cfg.trap.unwrap_or_else(TrapConfig::calcium40);
    let problem = numerical!(RotorProblem::new(trap))?;
    let basis = Sector::FermionOdd.basis(cfg.basis_len);
    let grid = linspace(cfg.a_start, cfg.a_end, cfg.gamma_points.max(201));
    let gamma = numerical!(gamma_profile(&problem, &basis, &grid, cfg.gamma_excited))?;
    let schedule = numerical!(build_ramp(cfg.a_start, cfg.a_end, cfg.duration, &gamma))?;

    let phi_ab = aharonov_bohm_phase(cfg.b_field, cfg.r0, trap.charge, trap.hbar);
    let phi_s = numerical!(stray_phase(&problem, cfg.a_prime, &schedule))?;
    let phi_s_retrace = numerical!(stray_phase(&problem, cfg.a_prime, &schedule.then_reversed()))?;

    let mut csv = String::from("t,a,theta_min\n");
    let samples = 512;
    for k in 0..=samples {
        let t = schedule.duration() * k as f64 / samples as f64;
        let a = schedule.value_at(t);
        csv.push_str(&format!("{:.9e},{:.9e},{:.9}\n", t, a, problem.theta_min(a)));
    }
    let csv_path = out.join("theta_min.csv");
    write_atomic(&csv_path, &csv)?;

    let summary = serde_json::json!({
        "phi_aharonov_bohm": phi_ab,
        "phi_aharonov_bohm_over_2pi": phi_ab / (2.0 * std::f64::consts::PI),
        "phi_stray_forward": phi_s,
        "phi_stray_forward_over_pi": phi_s / std::f64::consts::PI,
        "phi_stray_retrace": phi_s_retrace,
        "retrace_minus_twice_forward": phi_s_retrace - 2.0 * phi_s,
    });
    let summary_path = out.join("phases_summary.json");
    write_atomic(&summary_path, &serde_json::to_string_pretty(&summary).unwrap())?;
    Ok((echo(&cfg), vec![csv_path, summary_path]))
}
