//! `hfcavity` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
//! numerical failures (including sweeps that finished with failed points).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::grid::{parse_mhz, Grid};
use crate::lindblad::CollapseMode;
use crate::model::{ConstantsTable, ModelScope, SystemParams};
use crate::spectra::{self, CrossingOptions, EigenConfig, EigenModel};
use crate::sweep::{self, Metadata, PresetName, RunOptions, SweepConfig, SweepModel};

#[derive(Debug, Parser)]
#[command(name = "hfcavity", version, about = "Cesium D2 atom in a single-mode cavity: eigenstructure and transmission spectra")]
pub struct Cli {
    /// Progress messages on stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenfrequencies and cavity-likeness of an excitation manifold vs cavity detuning.
    Eigen(EigenArgs),
    /// Ground-to-first-manifold difference frequencies of the full D2 Hamiltonian.
    Levels(LevelsArgs),
    /// Dual-resonance crossings of F=3 and F=4 transition lines.
    Crossings(CrossingsArgs),
    /// Steady-state transmission over a cavity x probe detuning grid.
    Spectrum(SweepArgs),
    /// Steady-state transmission and populations vs probe detuning at one cavity detuning.
    Slice(SweepArgs),
    /// Built-in configurations.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    /// List preset names.
    List,
    /// Print a preset as a JSON config file.
    Show {
        #[arg(value_enum)]
        name: PresetName,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Built-in configuration.
    #[arg(long, value_enum, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<PresetName>,
    /// JSON config file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// JSON table of hyperfine frequency constants.
    #[arg(long, value_name = "PATH")]
    pub constants: Option<PathBuf>,
}

/// Frequencies accept an optional `MHz` or `GHz` suffix; plain numbers are MHz.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamOverrides {
    /// Atom-cavity coupling g.
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Cavity field decay rate.
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Atomic dipole decay rate.
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Cavity drive amplitude |epsilon|.
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Drive phase in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon_phase: Option<f64>,
    /// Repump Rabi frequency Omega_r.
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true)]
    pub repump_rabi: Option<f64>,
    /// Repump frequency minus the ground splitting, relative to F=4 -> F'=5.
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true)]
    pub repump_offset: Option<f64>,
    /// Fixed cavity detuning from F=4 -> F'=5 (replaces the cavity grid).
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true, conflicts_with = "cavity_grid")]
    pub cavity_detuning: Option<f64>,
    /// Ground-state hyperfine splitting.
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true)]
    pub ground_splitting: Option<f64>,
    /// Cavity detuning grid start:stop:step.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub cavity_grid: Option<Grid>,
}

impl ParamOverrides {
    fn apply(&self, p: &mut SystemParams) {
        let set = |target: &mut f64, value: Option<f64>| {
            if let Some(v) = value {
                *target = v;
            }
        };
        set(&mut p.g, self.g);
        set(&mut p.kappa, self.kappa);
        set(&mut p.gamma, self.gamma);
        set(&mut p.epsilon.modulus, self.epsilon);
        set(&mut p.epsilon.phase, self.epsilon_phase);
        set(&mut p.repump_rabi, self.repump_rabi);
        set(&mut p.repump_offset, self.repump_offset);
        set(&mut p.cavity_detuning, self.cavity_detuning);
        set(&mut p.ground_splitting, self.ground_splitting);
    }

    fn cavity_grid(&self) -> Option<Grid> {
        self.cavity_detuning.map(Grid::single).or(self.cavity_grid)
    }
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub params: ParamOverrides,
    /// Undriven Hamiltonian.
    #[arg(long, value_enum)]
    pub model: Option<EigenModel>,
    /// Hyperfine manifolds kept in the basis.
    #[arg(long, value_enum)]
    pub scope: Option<ModelScope>,
    /// Photon-number cutoff.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Excitation manifold N.
    #[arg(long)]
    pub excitation: Option<u32>,
    /// Eigenvalues closer than this (MHz) form one cluster.
    #[arg(long, value_parser = parse_mhz)]
    pub cluster_tol: Option<f64>,
    /// Cluster gap (MHz) that starts a new band.
    #[arg(long, value_parser = parse_mhz)]
    pub band_gap: Option<f64>,
    /// Output CSV (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LevelsArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub params: ParamOverrides,
    /// Output CSV (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossingsArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub params: ParamOverrides,
    /// Crossings closer than this in cavity detuning (MHz) are grouped.
    #[arg(long, value_parser = parse_mhz, default_value = "2GHz")]
    pub group_window: f64,
    /// At least one line of a crossing must reach this photon amplitude.
    #[arg(long, default_value_t = CrossingOptions::default().bright_threshold)]
    pub bright_threshold: f64,
    /// Bisection resolution in cavity detuning (MHz).
    #[arg(long, value_parser = parse_mhz, default_value = "1")]
    pub resolution: f64,
    /// Output JSON (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub params: ParamOverrides,
    /// Fixed probe detuning (replaces the probe grid).
    #[arg(long, value_parser = parse_mhz, allow_hyphen_values = true, conflicts_with = "probe_grid")]
    pub probe_detuning: Option<f64>,
    /// Probe detuning grid start:stop:step.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub probe_grid: Option<Grid>,
    /// Driven Hamiltonian and reservoir structure.
    #[arg(long, value_enum)]
    pub model: Option<SweepModel>,
    /// Hyperfine manifolds kept in the basis.
    #[arg(long, value_enum)]
    pub scope: Option<ModelScope>,
    /// Reservoir structure (defaults to the model's).
    #[arg(long, value_enum)]
    pub collapse: Option<CollapseMode>,
    /// Photon-number cutoff.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Solve only the equal-m coherence sector.
    #[arg(long)]
    pub m_sector: bool,
    /// Worker threads.
    #[arg(long, env = "HFCAVITY_WORKERS", hide_env_values = true)]
    pub workers: Option<usize>,
    /// Resume from and record progress in this file.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
    /// Output CSV; a `.meta.json` sidecar is written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<sweep::SweepError> for CliError {
    fn from(e: sweep::SweepError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<crate::model::ModelError> for CliError {
    fn from(e: crate::model::ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<spectra::SpectraError> for CliError {
    fn from(e: spectra::SpectraError) -> Self {
        match e {
            spectra::SpectraError::Model(m) => CliError::Config(m.to_string()),
            spectra::SpectraError::EmptyGrid | spectra::SpectraError::ManifoldAboveCutoff { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numeric(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    sweep::parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn apply_constants(source: &Source, params: &mut SystemParams) -> Result<(), CliError> {
    if let Some(path) = &source.constants {
        ConstantsTable::load(path)?.apply(params);
    }
    Ok(())
}

fn load_eigen(source: &Source, overrides: &ParamOverrides) -> Result<EigenConfig, CliError> {
    let mut config = match (&source.preset, &source.config) {
        (Some(name), _) => sweep::preset(*name).into_eigen(*name)?,
        (None, Some(path)) => read_config(path)?,
        (None, None) => return Err(CliError::Config("one of --preset or --config is required".into())),
    };
    apply_constants(source, &mut config.params)?;
    overrides.apply(&mut config.params);
    if let Some(g) = overrides.cavity_grid() {
        config.cavity_grid = g;
    }
    config.params.validate()?;
    config.cavity_grid.validate().map_err(|e| CliError::Config(format!("invalid cavity_grid: {e}")))?;
    Ok(config)
}

fn load_sweep(args: &SweepArgs) -> Result<SweepConfig, CliError> {
    let source = &args.source;
    let mut config = match (&source.preset, &source.config) {
        (Some(name), _) => sweep::preset(*name).into_sweep(*name)?,
        (None, Some(path)) => read_config(path)?,
        (None, None) => return Err(CliError::Config("one of --preset or --config is required".into())),
    };
    apply_constants(source, &mut config.params)?;
    args.params.apply(&mut config.params);
    if let Some(g) = args.params.cavity_grid() {
        config.cavity_grid = g;
    }
    if let Some(p) = args.probe_detuning {
        config.probe_grid = Grid::single(p);
        config.params.probe_detuning = p;
    }
    if let Some(g) = args.probe_grid {
        config.probe_grid = g;
    }
    if let Some(m) = args.model {
        config.model = m;
    }
    if let Some(s) = args.scope {
        config.scope = s;
    }
    if let Some(c) = args.collapse {
        config.collapse = Some(c);
    }
    if let Some(n) = args.n_max {
        config.n_max = n;
    }
    if args.m_sector {
        config.m_sector = true;
    }
    if let Some(w) = args.workers {
        config.worker_count = Some(w);
    }
    if let Some(out) = &args.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

/// Writes through `f` to the file, or to stdout when no path is given.
fn emit(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
            let mut w = io::BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| CliError::Config(format!("stdout: {e}")))
        }
    }
}

fn write_metadata<T: Serialize>(out: Option<&Path>, command: &str, config: T, rows: usize, failed: usize) -> Result<(), CliError> {
    if let Some(path) = out {
        let meta_path = sweep::metadata_path(path);
        Metadata::new(command, config, rows, failed).write(&meta_path).map_err(|e| io_error(&meta_path, e))?;
    }
    Ok(())
}

struct Progress {
    verbose: u8,
    start: Instant,
}

impl Progress {
    fn note(&self, message: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("[{:>8.2}s] {}", self.start.elapsed().as_secs_f64(), message.as_ref());
        }
    }
}

fn run_eigen(args: &EigenArgs, progress: &Progress) -> Result<(), CliError> {
    let mut config = load_eigen(&args.source, &args.params)?;
    if let Some(m) = args.model {
        config.model = m;
    }
    if let Some(s) = args.scope {
        config.scope = s;
    }
    if let Some(n) = args.n_max {
        config.n_max = n;
    }
    if let Some(n) = args.excitation {
        config.excitation = n;
    }
    if let Some(t) = args.cluster_tol {
        config.options.cluster_tol = t;
    }
    if let Some(b) = args.band_gap {
        config.options.band_gap = Some(b);
    }
    progress.note(format!("eigen scan over {} cavity detunings", config.cavity_grid.len()));
    let reports = spectra::eigen_scan(&config)?;
    let rows: usize = reports.iter().map(|r| r.clusters.len()).sum();
    emit(args.out.as_deref(), |w| spectra::write_eigen_csv(&reports, w))?;
    write_metadata(args.out.as_deref(), "eigen", &config, rows, 0)?;
    progress.note(format!("{rows} clusters written"));
    Ok(())
}

fn run_levels(args: &LevelsArgs, progress: &Progress) -> Result<(), CliError> {
    let config = load_eigen(&args.source, &args.params)?;
    progress.note(format!("transition diagram over {} cavity detunings", config.cavity_grid.len()));
    let diagram = spectra::transition_diagram(&config.params, &config.cavity_grid.points())?;
    let rows: usize = diagram.points.iter().map(|p| p.lines.len()).sum();
    emit(args.out.as_deref(), |w| spectra::write_levels_csv(&diagram, w))?;
    write_metadata(args.out.as_deref(), "levels", &config, rows, 0)?;
    Ok(())
}

#[derive(Serialize)]
struct CrossingsOutput {
    groups: Vec<spectra::DualResonance>,
}

fn run_crossings(args: &CrossingsArgs, progress: &Progress) -> Result<(), CliError> {
    let config = load_eigen(&args.source, &args.params)?;
    let options = CrossingOptions { bright_threshold: args.bright_threshold, resolution: args.resolution, ..Default::default() };
    progress.note(format!("crossing search over {} cavity detunings", config.cavity_grid.len()));
    let crossings = spectra::find_dual_resonances(&config.params, &config.cavity_grid.points(), &options)?;
    let groups = spectra::group_dual_resonances(&crossings, args.group_window);
    for g in &groups {
        progress.note(format!(
            "dual resonance near cavity {:.0} MHz, probe {:.0} MHz ({} crossings)",
            g.cavity_detuning,
            g.probe_detuning,
            g.crossings.len()
        ));
    }
    let text = serde_json::to_string_pretty(&CrossingsOutput { groups }).expect("crossings serialize");
    emit(args.out.as_deref(), |w| writeln!(w, "{text}"))
}

fn run_sweep(args: &SweepArgs, slice: bool, progress: &Progress) -> Result<(), CliError> {
    let config = load_sweep(args)?;
    let options = RunOptions { workers: config.worker_count, checkpoint: args.checkpoint.clone() };
    progress.note(format!("{} grid points", config.point_count()));
    let result = if slice {
        sweep::run_slice(&config, &options)?
    } else {
        sweep::run_spectrum_sweep(&config, &options)?
    };
    let failed = result.failed_points();
    emit(args.out.as_deref(), |w| sweep::write_csv(&result, w))?;
    let command = if slice { "slice" } else { "spectrum" };
    write_metadata(args.out.as_deref(), command, &config, result.rows.len(), failed)?;
    progress.note(format!("{} rows written, {failed} failed", result.rows.len()));
    if failed > 0 {
        let first = result.rows.iter().find_map(|r| r.error.as_deref()).unwrap_or_default();
        return Err(CliError::Numeric(format!("{failed} grid points failed; first error: {first}")));
    }
    Ok(())
}

fn run_preset(action: &PresetAction) -> Result<(), CliError> {
    match action {
        PresetAction::List => emit(None, |w| {
            for name in PresetName::ALL {
                writeln!(w, "{:<16}{}", name.as_str(), name.description())?;
            }
            Ok(())
        }),
        PresetAction::Show { name } => {
            let text = match sweep::preset(*name) {
                sweep::Preset::Eigen(c) => sweep::config_to_json(&c),
                sweep::Preset::Sweep(c) => sweep::config_to_json(&c),
            };
            emit(None, |w| writeln!(w, "{text}"))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let progress = Progress { verbose: cli.verbose, start: Instant::now() };
    match &cli.command {
        Command::Eigen(a) => run_eigen(a, &progress),
        Command::Levels(a) => run_levels(a, &progress),
        Command::Crossings(a) => run_crossings(a, &progress),
        Command::Spectrum(a) => run_sweep(a, false, &progress),
        Command::Slice(a) => run_sweep(a, true, &progress),
        Command::Preset { action } => run_preset(action),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
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
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
