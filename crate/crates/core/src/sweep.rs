//! Figure presets and transmission sweeps over (cavity, probe) detuning grids.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridError};
use crate::lindblad::{self, CollapseMode, CptpReport, SolveOptions};
use crate::model::{self, AtomicState, Basis, Drive, Manifold, ModelError, ModelScope, SystemParams};
use crate::spectra::{EigenConfig, EigenModel, EigenOptions, BAND_GAP_FRACTION, DEFAULT_CLUSTER_TOL};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{0}` is not a {1} preset")]
    WrongPresetKind(String, &'static str),
    #[error("invalid {field}: {source}")]
    Grid { field: &'static str, source: GridError },
    #[error("config: {0}")]
    Config(String),
    #[error("feature scan: {0}")]
    FeatureScan(String),
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Hamiltonian and reservoir structure of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepModel {
    /// `H1` with per-ground-manifold reservoirs.
    Toroid,
    /// `H3` with a common reservoir per polarization.
    Pbg,
}

impl SweepModel {
    pub fn default_collapse(self) -> CollapseMode {
        match self {
            SweepModel::Toroid => CollapseMode::PerGroundManifold,
            SweepModel::Pbg => CollapseMode::GlobalCommon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: SweepModel,
    pub params: SystemParams,
    pub cavity_grid: Grid,
    pub probe_grid: Grid,
    pub scope: ModelScope,
    pub n_max: u32,
    /// Overrides the model's reservoir structure.
    #[serde(default)]
    pub collapse: Option<CollapseMode>,
    #[serde(default)]
    pub m_sector: bool,
    #[serde(default)]
    pub worker_count: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        self.cavity_grid.validate().map_err(|source| SweepError::Grid { field: "cavity_grid", source })?;
        self.probe_grid.validate().map_err(|source| SweepError::Grid { field: "probe_grid", source })?;
        self.params.validate()?;
        if self.n_max < 1 {
            return Err(ModelError::PhotonCutoff(self.n_max).into());
        }
        if self.worker_count == Some(0) {
            return Err(SweepError::Config("worker_count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn collapse_mode(&self) -> CollapseMode {
        self.collapse.unwrap_or_else(|| self.model.default_collapse())
    }

    pub fn point_count(&self) -> usize {
        self.cavity_grid.len() * self.probe_grid.len()
    }
}

/// Versioned JSON wrapper for config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub config: T,
}

pub fn parse_config<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, SweepError> {
    let file: ConfigFile<T> = serde_json::from_str(text).map_err(|e| SweepError::Config(e.to_string()))?;
    if file.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(SweepError::Config(format!(
            "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    Ok(file.config)
}

pub fn config_to_json<T: Serialize + Clone>(config: &T) -> String {
    let file = ConfigFile { schema_version: CONFIG_SCHEMA_VERSION, config: config.clone() };
    serde_json::to_string_pretty(&file).expect("config serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Fig1,
    Fig2,
    Fig3,
    #[value(name = "fig_toroid_4_5")]
    #[serde(rename = "fig_toroid_4_5")]
    FigToroid45,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl PresetName {
    pub const ALL: [PresetName; 9] = [
        PresetName::Fig1,
        PresetName::Fig2,
        PresetName::Fig3,
        PresetName::FigToroid45,
        PresetName::Fig4,
        PresetName::Fig5,
        PresetName::Fig6,
        PresetName::Fig7,
        PresetName::Fig8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig1 => "fig1",
            PresetName::Fig2 => "fig2",
            PresetName::Fig3 => "fig3",
            PresetName::FigToroid45 => "fig_toroid_4_5",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5 => "fig5",
            PresetName::Fig6 => "fig6",
            PresetName::Fig7 => "fig7",
            PresetName::Fig8 => "fig8",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            PresetName::Fig1 => "eigen: toroid N=1 eigenfrequencies vs cavity detuning",
            PresetName::Fig2 => "spectrum: toroid transmission map",
            PresetName::Fig3 => "slice: toroid slice at cavity detuning -100 MHz",
            PresetName::FigToroid45 => "slice: toroid slice at cavity detuning 0",
            PresetName::Fig4 => "eigen: PBG N=1 eigenfrequencies vs cavity detuning",
            PresetName::Fig5 => "spectrum: PBG transmission map",
            PresetName::Fig6 => "slice: PBG slice at cavity detuning -13 GHz",
            PresetName::Fig7 => "slice: PBG slice at cavity detuning +20 GHz",
            PresetName::Fig8 => "slice: PBG slice at cavity detuning +4 GHz",
        }
    }
}

impl std::str::FromStr for PresetName {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| SweepError::UnknownPreset(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Eigen(EigenConfig),
    Sweep(SweepConfig),
}

impl Preset {
    pub fn into_eigen(self, name: PresetName) -> Result<EigenConfig, SweepError> {
        match self {
            Preset::Eigen(c) => Ok(c),
            Preset::Sweep(_) => Err(SweepError::WrongPresetKind(name.as_str().into(), "eigen")),
        }
    }

    pub fn into_sweep(self, name: PresetName) -> Result<SweepConfig, SweepError> {
        match self {
            Preset::Sweep(c) => Ok(c),
            Preset::Eigen(_) => Err(SweepError::WrongPresetKind(name.as_str().into(), "sweep")),
        }
    }
}

/// Toroid rates in MHz: `(g, kappa, gamma) = (450, 1.75, 2.6)`.
pub fn toroid_params() -> SystemParams {
    let (g, kappa, gamma) = (450.0, 1.75, 2.6);
    let mut p = SystemParams {
        g,
        kappa,
        gamma,
        epsilon: Drive::real(kappa * gamma / g),
        repump_rabi: gamma,
        ..SystemParams::default()
    };
    // Repump resonant with F=3 -> F'=4.
    p.repump_offset = p.excited_offsets.f4;
    p
}

/// PBG rates in MHz: `(g, kappa, gamma) = (17, 4.4, 0.0026)` GHz.
pub fn pbg_params() -> SystemParams {
    let (g, kappa, gamma) = (17_000.0, 4_400.0, 2.6);
    SystemParams { g, kappa, gamma, epsilon: Drive::real(100.0 * kappa * gamma / g), ..SystemParams::default() }
}

fn grid(start: f64, stop: f64, step: f64) -> Grid {
    Grid::new(start, stop, step).expect("preset grids are valid")
}

fn toroid_sweep(cavity_grid: Grid, probe_grid: Grid, scope: ModelScope) -> SweepConfig {
    let mut params = toroid_params();
    params.cavity_detuning = cavity_grid.start;
    SweepConfig {
        model: SweepModel::Toroid,
        params,
        cavity_grid,
        probe_grid,
        scope,
        n_max: 1,
        collapse: None,
        m_sector: false,
        worker_count: None,
        output: None,
    }
}

fn pbg_sweep(cavity_grid: Grid, probe_grid: Grid) -> SweepConfig {
    let mut params = pbg_params();
    params.cavity_detuning = cavity_grid.start;
    SweepConfig {
        model: SweepModel::Pbg,
        params,
        cavity_grid,
        probe_grid,
        scope: ModelScope::Full,
        n_max: 1,
        collapse: None,
        m_sector: false,
        worker_count: None,
        output: None,
    }
}

pub fn preset(name: PresetName) -> Preset {
    let toroid_probe = grid(-1_000.0, 1_000.0, 0.5);
    let pbg_probe = grid(-30_000.0, 30_000.0, 50.0);
    match name {
        PresetName::Fig1 => Preset::Eigen(EigenConfig {
            model: EigenModel::Toroid,
            scope: ModelScope::ToroidCoupled,
            n_max: 1,
            params: toroid_params(),
            cavity_grid: grid(-1_000.0, 1_000.0, 10.0),
            excitation: 1,
            options: EigenOptions::default(),
        }),
        PresetName::Fig2 => Preset::Sweep(toroid_sweep(grid(-1_000.0, 1_000.0, 50.0), toroid_probe, ModelScope::Full)),
        PresetName::Fig3 => Preset::Sweep(toroid_sweep(Grid::single(-100.0), toroid_probe, ModelScope::Full)),
        PresetName::FigToroid45 => {
            Preset::Sweep(toroid_sweep(Grid::single(0.0), grid(-800.0, 800.0, 0.5), ModelScope::ToroidCoupled))
        }
        PresetName::Fig4 => {
            let params = pbg_params();
            Preset::Eigen(EigenConfig {
                model: EigenModel::Pbg,
                scope: ModelScope::Full,
                n_max: 1,
                params,
                cavity_grid: grid(-40_000.0, 40_000.0, 250.0),
                excitation: 1,
                options: EigenOptions { cluster_tol: DEFAULT_CLUSTER_TOL, band_gap: Some(params.g * BAND_GAP_FRACTION) },
            })
        }
        PresetName::Fig5 => Preset::Sweep(pbg_sweep(grid(-40_000.0, 40_000.0, 1_000.0), pbg_probe)),
        PresetName::Fig6 => Preset::Sweep(pbg_sweep(Grid::single(-13_000.0), pbg_probe)),
        PresetName::Fig7 => Preset::Sweep(pbg_sweep(Grid::single(20_000.0), pbg_probe)),
        PresetName::Fig8 => Preset::Sweep(pbg_sweep(Grid::single(4_000.0), pbg_probe)),
    }
}

/// F=4 Zeeman levels in CSV column order.
pub const ZEEMAN_COLUMNS: [i32; 9] = [0, 1, -1, 2, -2, 3, -3, 4, -4];

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cavity_detuning: f64,
    pub probe_detuning: f64,
    pub transmission: f64,
    pub pop_f3: f64,
    pub pop_f4: f64,
    /// F=4 populations in [`ZEEMAN_COLUMNS`] order.
    pub zeeman_f4: [f64; 9],
    pub residual: f64,
    pub error: Option<String>,
    /// Full sanity report of the steady state; not written to the CSV.
    pub cptp: Option<CptpReport>,
}

impl SweepRow {
    fn failed(cavity_detuning: f64, probe_detuning: f64, error: String) -> Self {
        SweepRow {
            cavity_detuning,
            probe_detuning,
            transmission: f64::NAN,
            pop_f3: f64::NAN,
            pop_f4: f64::NAN,
            zeeman_f4: [f64::NAN; 9],
            residual: f64::NAN,
            error: Some(error),
            cptp: None,
        }
    }

    /// Every float in column order.
    fn floats(&self) -> Vec<f64> {
        let mut v = vec![self.cavity_detuning, self.probe_detuning, self.transmission, self.pop_f3, self.pop_f4];
        v.extend_from_slice(&self.zeeman_f4);
        v.push(self.residual);
        v
    }

    fn from_floats(v: &[f64], error: Option<String>, cptp: Option<CptpReport>) -> Option<Self> {
        if v.len() != 15 {
            return None;
        }
        let mut zeeman_f4 = [0.0; 9];
        zeeman_f4.copy_from_slice(&v[5..14]);
        Some(SweepRow {
            cavity_detuning: v[0],
            probe_detuning: v[1],
            transmission: v[2],
            pop_f3: v[3],
            pop_f4: v[4],
            zeeman_f4,
            residual: v[14],
            error,
            cptp,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    /// Row-major over (cavity, probe).
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed_points(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Rows at one cavity detuning, in probe order.
    pub fn slice(&self, cavity_index: usize) -> &[SweepRow] {
        let n = self.config.probe_grid.len();
        &self.rows[cavity_index * n..(cavity_index + 1) * n]
    }
}

/// Solves one grid point. Failures are recorded in the row.
///
/// At `g = 0` the atom decouples and its steady state is not unique, so only
/// the bare cavity is solved, in a Fock space of at least
/// [`DECOUPLED_FOCK_CUTOFF`] photons; the atomic columns are then `NaN`.
pub fn solve_grid_point(config: &SweepConfig, basis: &Basis, cavity: f64, probe: f64) -> SweepRow {
    let params = SystemParams { cavity_detuning: cavity, probe_detuning: probe, ..config.params };
    if params.g == 0.0 {
        return decoupled_cavity_point(config, &params);
    }
    let h = match config.model {
        SweepModel::Toroid => model::hamiltonian_h1(&params, basis),
        SweepModel::Pbg => model::hamiltonian_h3(&params, basis),
    };
    let options = SolveOptions { m_sector: config.m_sector };
    let solved = h
        .map_err(lindblad::LindbladError::from)
        .and_then(|h| lindblad::solve_point(&h, basis, &params, config.collapse_mode(), &options));
    match solved {
        Ok(sol) => {
            let o = &sol.observables;
            let mut zeeman_f4 = [0.0; 9];
            for (slot, m) in zeeman_f4.iter_mut().zip(ZEEMAN_COLUMNS) {
                *slot = o.zeeman(4, m);
            }
            SweepRow {
                cavity_detuning: cavity,
                probe_detuning: probe,
                transmission: o.transmission,
                pop_f3: o.manifold(Manifold::Ground(3)),
                pop_f4: o.manifold(Manifold::Ground(4)),
                zeeman_f4,
                residual: sol.state.cptp.residual,
                error: None,
                cptp: Some(sol.state.cptp),
            }
        }
        Err(e) => SweepRow::failed(cavity, probe, e.to_string()),
    }
}

/// Photon cutoff for the bare cavity; a driven cavity truncated at one photon
/// saturates like a two-level system.
pub const DECOUPLED_FOCK_CUTOFF: u32 = 16;

fn decoupled_cavity_point(config: &SweepConfig, params: &SystemParams) -> SweepRow {
    let (cavity, probe) = (params.cavity_detuning, params.probe_detuning);
    let ground = AtomicState::new(Manifold::Ground(4), 0).expect("valid ground state");
    let basis = Basis::from_states(config.scope, vec![ground], config.n_max.max(DECOUPLED_FOCK_CUTOFF));
    let solved = model::hamiltonian_h1(params, &basis)
        .map_err(lindblad::LindbladError::from)
        .and_then(|h| lindblad::solve_point(&h, &basis, params, config.collapse_mode(), &SolveOptions::default()));
    match solved {
        Ok(sol) => SweepRow {
            transmission: sol.observables.transmission,
            residual: sol.state.cptp.residual,
            error: None,
            cptp: Some(sol.state.cptp),
            ..SweepRow::failed(cavity, probe, String::new())
        },
        Err(e) => SweepRow::failed(cavity, probe, e.to_string()),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the config value, then the pool default.
    pub workers: Option<usize>,
    /// Sidecar recording completed cavity rows; an existing file is resumed.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct CheckpointRecord {
    cavity_index: usize,
    /// `f64::to_bits` of every float, row by row.
    bits: Vec<Vec<u64>>,
    errors: Vec<Option<String>>,
    cptp: Vec<Option<CptpReport>>,
}

/// Config identity for checkpoints; worker count and output path do not
/// change results and are excluded.
fn fingerprint(config: &SweepConfig) -> String {
    let mut c = config.clone();
    c.worker_count = None;
    c.output = None;
    serde_json::to_string(&c).expect("config serializes")
}

fn load_checkpoint(path: &Path, config: &SweepConfig, rows_per_cavity: usize) -> Result<BTreeMap<usize, Vec<SweepRow>>, SweepError> {
    let fail = |message: String| SweepError::Checkpoint { path: path.to_owned(), message };
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let mut lines = BufReader::new(File::open(path)?).lines();
    let Some(first) = lines.next().transpose()? else { return Ok(done) };
    let header: CheckpointHeader = match serde_json::from_str(&first) {
        Ok(h) => h,
        // An interrupted write of the header line leaves nothing to resume.
        Err(_) => return Ok(done),
    };
    if header.fingerprint != fingerprint(config) {
        return Err(fail("written for a different configuration".into()));
    }
    for line in lines {
        let line = line?;
        // A truncated trailing record is recomputed.
        let Ok(record) = serde_json::from_str::<CheckpointRecord>(&line) else { continue };
        if [record.bits.len(), record.errors.len(), record.cptp.len()] != [rows_per_cavity; 3] {
            continue;
        }
        let rows: Option<Vec<SweepRow>> = record
            .bits
            .iter()
            .zip(record.errors)
            .zip(record.cptp)
            .map(|((b, e), c)| SweepRow::from_floats(&b.iter().map(|&x| f64::from_bits(x)).collect::<Vec<_>>(), e, c))
            .collect();
        if let Some(rows) = rows {
            done.insert(record.cavity_index, rows);
        }
    }
    Ok(done)
}

fn append_checkpoint(file: &mut File, cavity_index: usize, rows: &[SweepRow]) -> io::Result<()> {
    let record = CheckpointRecord {
        cavity_index,
        bits: rows.iter().map(|r| r.floats().iter().map(|x| x.to_bits()).collect()).collect(),
        errors: rows.iter().map(|r| r.error.clone()).collect(),
        cptp: rows.iter().map(|r| r.cptp).collect(),
    };
    writeln!(file, "{}", serde_json::to_string(&record).expect("record serializes"))?;
    file.flush()
}

#[cfg(feature = "parallel")]
fn map_points<F>(workers: Option<usize>, tasks: &[(f64, f64)], f: F) -> Vec<SweepRow>
where
    F: Fn(f64, f64) -> SweepRow + Sync,
{
    use rayon::prelude::*;
    let run = || tasks.par_iter().map(|&(c, p)| f(c, p)).collect();
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| tasks.iter().map(|&(c, p)| f(c, p)).collect()),
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_points<F>(_workers: Option<usize>, tasks: &[(f64, f64)], f: F) -> Vec<SweepRow>
where
    F: Fn(f64, f64) -> SweepRow + Sync,
{
    tasks.iter().map(|&(c, p)| f(c, p)).collect()
}

/// Runs every grid point. Output order is row-major and does not depend on
/// the worker count or on resuming from a checkpoint.
pub fn run_spectrum_sweep(config: &SweepConfig, options: &RunOptions) -> Result<SweepResult, SweepError> {
    config.validate()?;
    let basis = Basis::new(config.scope, config.n_max)?;
    let cavities = config.cavity_grid.points();
    let probes = config.probe_grid.points();
    let workers = options.workers.or(config.worker_count);

    let mut done = match &options.checkpoint {
        Some(path) => load_checkpoint(path, config, probes.len())?,
        None => BTreeMap::new(),
    };
    let mut checkpoint = match &options.checkpoint {
        Some(path) => {
            let fresh = done.is_empty();
            let mut file = if fresh {
                File::create(path)?
            } else {
                OpenOptions::new().append(true).open(path)?
            };
            if fresh {
                let header = CheckpointHeader { fingerprint: fingerprint(config) };
                writeln!(file, "{}", serde_json::to_string(&header).expect("header serializes"))?;
            }
            Some(file)
        }
        None => None,
    };

    let pending: Vec<usize> = (0..cavities.len()).filter(|i| !done.contains_key(i)).collect();
    // Enough rows per batch to keep every worker busy.
    let target = 4 * workers.unwrap_or(8).max(1);
    let batch = target.div_ceil(probes.len()).max(1);
    for chunk in pending.chunks(batch) {
        let tasks: Vec<(f64, f64)> =
            chunk.iter().flat_map(|&i| probes.iter().map(|&p| (cavities[i], p)).collect::<Vec<_>>()).collect();
        let solved = map_points(workers, &tasks, |c, p| solve_grid_point(config, &basis, c, p));
        for (&i, rows) in chunk.iter().zip(solved.chunks(probes.len())) {
            if let Some(file) = checkpoint.as_mut() {
                append_checkpoint(file, i, rows)?;
            }
            done.insert(i, rows.to_vec());
        }
    }
    let rows = done.into_values().flatten().collect();
    Ok(SweepResult { config: config.clone(), rows })
}

/// A sweep over a single cavity detuning.
pub fn run_slice(config: &SweepConfig, options: &RunOptions) -> Result<SweepResult, SweepError> {
    if config.cavity_grid.len() != 1 {
        return Err(SweepError::Config(format!(
            "a slice needs a single cavity detuning, the grid has {} points",
            config.cavity_grid.len()
        )));
    }
    run_spectrum_sweep(config, options)
}

pub fn csv_header() -> String {
    let mut cols = vec!["cavity_detuning_MHz", "probe_detuning_MHz", "transmission", "pop_F3", "pop_F4"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    cols.extend(ZEEMAN_COLUMNS.iter().map(|m| format!("pop_m{m}")));
    cols.push("residual".into());
    cols.push("error".into());
    cols.join(",")
}

/// Shortest round-trip representation, in exponent form outside
/// `[1e-4, 1e16)`; NaN is spelled `nan`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".into()
    } else if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn escape_field(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_owned()
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", csv_header())?;
    for row in &result.rows {
        let mut fields: Vec<String> = row.floats().into_iter().map(format_float).collect();
        fields.push(row.error.as_deref().map(escape_field).unwrap_or_default());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata<T> {
    pub schema_version: u32,
    pub code_version: String,
    pub command: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config: T,
    pub rows: usize,
    pub failed_points: usize,
}

impl<T: Serialize> Metadata<T> {
    pub fn new(command: &str, config: T, rows: usize, failed_points: usize) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Metadata {
            schema_version: CONFIG_SCHEMA_VERSION,
            code_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            timestamp,
            config,
            rows,
            failed_points,
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}

/// `out.csv` -> `out.meta.json`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// A local maximum of the transmission along the probe axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub probe_detuning: f64,
    pub transmission: f64,
    /// Height above the higher of the two minima within `window` on either side.
    pub prominence: f64,
    /// Full width at half prominence, interpolated on the grid; `NaN` when a
    /// side does not fall to that level within the window.
    pub width: f64,
}

/// Local transmission maxima of a single-cavity slice.
pub fn feature_scan(result: &SweepResult, window: f64) -> Result<Vec<Feature>, SweepError> {
    if result.config.cavity_grid.len() != 1 {
        return Err(SweepError::FeatureScan("input is not a slice".into()));
    }
    let step = result.config.probe_grid.step;
    if !(window > 0.0) || step >= window {
        return Err(SweepError::FeatureScan(format!("probe step {step} MHz is not finer than the window {window} MHz")));
    }
    let x: Vec<f64> = result.rows.iter().map(|r| r.probe_detuning).collect();
    let t: Vec<f64> = result.rows.iter().map(|r| r.transmission).collect();
    let reach = (window / step + 1e-9).floor() as usize;
    let mut features = Vec::new();
    for i in 1..t.len().saturating_sub(1) {
        if !(t[i] > t[i - 1] && t[i] >= t[i + 1]) || !t[i].is_finite() {
            continue;
        }
        // Skip the trailing edge of a plateau.
        if t[i] == t[i - 1] {
            continue;
        }
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(t.len() - 1);
        let left_min = t[lo..=i].iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
        let right_min = t[i..=hi].iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
        let prominence = t[i] - left_min.max(right_min);
        if !(prominence > 0.0) {
            continue;
        }
        let half = t[i] - 0.5 * prominence;
        let cross = |range: &mut dyn Iterator<Item = usize>, toward: isize| -> Option<f64> {
            for j in range {
                if t[j] < half {
                    let k = (j as isize - toward) as usize;
                    let frac = (t[k] - half) / (t[k] - t[j]);
                    return Some(x[k] + frac * (x[j] - x[k]));
                }
            }
            None
        };
        let left = cross(&mut (lo..i).rev(), -1);
        let right = cross(&mut (i + 1..=hi), 1);
        let width = match (left, right) {
            (Some(l), Some(r)) => r - l,
            _ => f64::NAN,
        };
        features.push(Feature { probe_detuning: x[i], transmission: t[i], prominence, width });
    }
    Ok(features)
}
