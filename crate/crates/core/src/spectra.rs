//! Eigenstructure of the undriven Hamiltonians.
//!
//! The undriven Hamiltonians conserve the excitation number and the total
//! `m_F`, so every manifold is diagonalized block by block in `m`. Inside a
//! block the eigenvalues are sorted and indexed; that index is the branch
//! label used when following eigenvalues across cavity detunings.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::linalg::{self, EigenFailure};
use crate::model::{
    self, excitation_number, hamiltonian_h0, hamiltonian_h2, Basis, BasisState, Manifold, ModelError, ModelScope,
    Operator, SystemParams,
};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("Hamiltonian does not conserve the excitation number (|[H,N]| = {0:e})")]
    NotConserving(f64),
    #[error("excitation manifold N={n} exceeds the photon cutoff {n_max}")]
    ManifoldAboveCutoff { n: u32, n_max: u32 },
    #[error("empty cavity grid")]
    EmptyGrid,
    #[error(transparent)]
    Eigen(#[from] EigenFailure),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Default cluster tolerance for degenerate eigenvalues, MHz.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-4;
/// Eigenvectors with a ground-state photon amplitude above this are excitable.
pub const EXCITABLE_THRESHOLD: f64 = 1e-6;
/// Band gap threshold as a fraction of `g`.
pub const BAND_GAP_FRACTION: f64 = 1.0 / 50.0;

/// Basis indices of one excitation manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    pub excitation: u32,
    pub indices: Vec<usize>,
}

impl Subspace {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// States of excitation number `n` in the hyperfine manifolds that `h` couples.
///
/// A manifold counts as coupled when some off-diagonal element of `h` touches
/// it; all of its Zeeman states are kept, including uncoupled stretched states.
/// With no off-diagonal elements at all the whole sector is returned.
pub fn excitation_manifold(h: &Operator, basis: &Basis, n: u32) -> Result<Subspace, SpectraError> {
    if n > basis.n_max() {
        return Err(SpectraError::ManifoldAboveCutoff { n, n_max: basis.n_max() });
    }
    let scale = h.max_abs().max(1.0);
    let leak = h.commutator(&excitation_number(basis)).max_abs();
    if leak > 1e-12 * scale {
        return Err(SpectraError::NotConserving(leak));
    }
    let mut coupled = BTreeSet::new();
    for (r, c, _) in h.iter().filter(|(r, c, _)| r != c) {
        coupled.insert(basis.state(r).atom.manifold);
        coupled.insert(basis.state(c).atom.manifold);
    }
    let indices = basis
        .states()
        .enumerate()
        .filter(|(_, s)| s.excitation() == n && (coupled.is_empty() || coupled.contains(&s.atom.manifold)))
        .map(|(i, _)| i)
        .collect();
    Ok(Subspace { excitation: n, indices })
}

/// Eigenpairs of one total-`m` block of a manifold.
#[derive(Debug, Clone)]
pub struct Block {
    pub m: i32,
    /// Basis indices spanned by the block.
    pub indices: Vec<usize>,
    pub energies: Vec<f64>,
    /// `vectors[k][i]` is the amplitude of `indices[i]` in eigenvector `k`.
    pub vectors: Vec<Vec<C64>>,
}

pub fn diagonalize_blocks(h: &Operator, basis: &Basis, subspace: &Subspace) -> Result<Vec<Block>, SpectraError> {
    let mut by_m: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for &i in &subspace.indices {
        by_m.entry(basis.state(i).atom.m).or_default().push(i);
    }
    by_m.into_iter()
        .map(|(m, indices)| {
            let eig = linalg::hermitian_eigen(&h.restrict(&indices))?;
            Ok(Block { m, indices, energies: eig.values, vectors: eig.vectors })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenState {
    pub energy: f64,
    /// `<psi| a† a |psi>`.
    pub cavity_likeness: f64,
    pub m: i32,
    pub branch: usize,
}

/// Eigenvalues equal to within the cluster tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub energy: f64,
    /// Trace average of `a† a` over the degenerate subspace.
    pub cavity_likeness: f64,
    pub degeneracy: usize,
    pub band: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub cluster_tol: f64,
    /// Gap that separates bands; `None` puts everything in band 0.
    pub band_gap: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { cluster_tol: DEFAULT_CLUSTER_TOL, band_gap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub cavity_detuning: Option<f64>,
    pub states: Vec<EigenState>,
    pub clusters: Vec<Cluster>,
    pub band_count: usize,
}

impl EigenReport {
    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn unique_count(&self) -> usize {
        self.clusters.len()
    }
}

pub fn eigen_report(
    h: &Operator,
    basis: &Basis,
    subspace: &Subspace,
    options: &EigenOptions,
) -> Result<EigenReport, SpectraError> {
    let blocks = diagonalize_blocks(h, basis, subspace)?;
    let mut states: Vec<EigenState> = blocks
        .iter()
        .flat_map(|block| {
            let photons: Vec<f64> = block.indices.iter().map(|&i| f64::from(basis.state(i).photons)).collect();
            block.energies.iter().zip(&block.vectors).enumerate().map(move |(branch, (&energy, v))| {
                let cavity_likeness = v.iter().zip(&photons).map(|(c, n)| c.norm_sqr() * n).sum();
                EigenState { energy, cavity_likeness, m: block.m, branch }
            })
        })
        .collect();
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.m.cmp(&b.m)));

    let mut clusters: Vec<Cluster> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for s in &states {
        match clusters.last_mut() {
            Some(c) if s.energy - last <= options.cluster_tol => {
                let n = c.degeneracy as f64;
                c.energy = (c.energy * n + s.energy) / (n + 1.0);
                c.cavity_likeness = (c.cavity_likeness * n + s.cavity_likeness) / (n + 1.0);
                c.degeneracy += 1;
            }
            _ => clusters.push(Cluster { energy: s.energy, cavity_likeness: s.cavity_likeness, degeneracy: 1, band: 0 }),
        }
        last = s.energy;
    }

    let mut band = 0;
    if let Some(gap) = options.band_gap {
        for k in 1..clusters.len() {
            if clusters[k].energy - clusters[k - 1].energy > gap {
                band += 1;
            }
            clusters[k].band = band;
        }
    }
    let band_count = if clusters.is_empty() { 0 } else { band + 1 };
    Ok(EigenReport { cavity_detuning: None, states, clusters, band_count })
}

/// Which undriven Hamiltonian an eigen scan uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EigenModel {
    /// `H0`: cavity on F=4 -> F'=3,4,5.
    Toroid,
    /// `H2`: cavity on the whole D2 line.
    Pbg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    pub model: EigenModel,
    pub scope: ModelScope,
    pub n_max: u32,
    pub params: SystemParams,
    pub cavity_grid: Grid,
    pub excitation: u32,
    pub options: EigenOptions,
}

fn undriven(model: EigenModel, params: &SystemParams, basis: &Basis) -> Result<Operator, ModelError> {
    match model {
        EigenModel::Toroid => hamiltonian_h0(params, basis),
        EigenModel::Pbg => hamiltonian_h2(params, basis),
    }
}

/// One [`EigenReport`] per cavity detuning, in grid order.
pub fn eigen_scan(config: &EigenConfig) -> Result<Vec<EigenReport>, SpectraError> {
    let basis = Basis::new(config.scope, config.n_max)?;
    config.cavity_grid.validate().map_err(|_| SpectraError::EmptyGrid)?;
    config
        .cavity_grid
        .points()
        .into_iter()
        .map(|detuning| {
            let params = SystemParams { cavity_detuning: detuning, ..config.params };
            let h = undriven(config.model, &params, &basis)?;
            let subspace = excitation_manifold(&h, &basis, config.excitation)?;
            let mut report = eigen_report(&h, &basis, &subspace, &config.options)?;
            report.cavity_detuning = Some(detuning);
            Ok(report)
        })
        .collect()
}

pub const EIGEN_CSV_HEADER: &str = "cavity_detuning_MHz,eigenfrequency_MHz,cavity_likeness,degeneracy,band_id";

/// One row per eigenvalue cluster.
pub fn write_eigen_csv<W: Write>(reports: &[EigenReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{EIGEN_CSV_HEADER}")?;
    for report in reports {
        let detuning = report.cavity_detuning.unwrap_or(f64::NAN);
        for c in &report.clusters {
            writeln!(out, "{detuning},{},{},{},{}", c.energy, c.cavity_likeness, c.degeneracy, c.band)?;
        }
    }
    Ok(())
}

/// A probe-excitable (or not) line from a ground manifold into the N=1 manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    /// Ground hyperfine level the transition starts from.
    pub ground: u8,
    pub m: i32,
    pub branch: usize,
    /// `eta_k^(1) - eta_j^(0)`, MHz from the F=4 -> F'=5 line.
    pub difference_frequency: f64,
    /// `|<phi_k| a† |F, m, 0>|`.
    pub amplitude: f64,
    pub excitable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSet {
    pub cavity_detuning: f64,
    pub lines: Vec<TransitionLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDiagram {
    pub points: Vec<TransitionSet>,
}

/// Ground energy of an F manifold under `H2`.
fn ground_energy(params: &SystemParams, f: u8) -> f64 {
    if f == 3 {
        -params.ground_splitting
    } else {
        0.0
    }
}

fn pbg_blocks(params: &SystemParams, basis: &Basis) -> Result<Vec<Block>, SpectraError> {
    let h = hamiltonian_h2(params, basis)?;
    let subspace = excitation_manifold(&h, basis, 1)?;
    diagonalize_blocks(&h, basis, &subspace)
}

/// Photon amplitude `|<phi| a† |F, m, 0>|` of one block eigenvector.
fn ground_amplitude(basis: &Basis, block: &Block, k: usize, f: u8) -> Option<f64> {
    let target = BasisState {
        atom: model::AtomicState { manifold: Manifold::Ground(f), m: block.m },
        photons: 1,
    };
    let idx = basis.index(&target)?;
    let pos = block.indices.iter().position(|&i| i == idx)?;
    Some(block.vectors[k][pos].norm())
}

fn transition_lines(params: &SystemParams, basis: &Basis, blocks: &[Block]) -> Vec<TransitionLine> {
    let mut lines = Vec::new();
    for block in blocks {
        for (k, &energy) in block.energies.iter().enumerate() {
            for f in [3u8, 4] {
                let Some(amplitude) = ground_amplitude(basis, block, k, f) else { continue };
                lines.push(TransitionLine {
                    ground: f,
                    m: block.m,
                    branch: k,
                    difference_frequency: energy - ground_energy(params, f),
                    amplitude,
                    excitable: amplitude > EXCITABLE_THRESHOLD,
                });
            }
        }
    }
    lines
}

/// Difference frequencies between both ground manifolds and the N=1
/// manifold of `H2`, per cavity detuning.
pub fn transition_diagram(params: &SystemParams, cavity_points: &[f64]) -> Result<TransitionDiagram, SpectraError> {
    if cavity_points.is_empty() {
        return Err(SpectraError::EmptyGrid);
    }
    let basis = Basis::new(ModelScope::Full, 1)?;
    let points = cavity_points
        .iter()
        .map(|&detuning| {
            let p = SystemParams { cavity_detuning: detuning, ..*params };
            let blocks = pbg_blocks(&p, &basis)?;
            Ok(TransitionSet { cavity_detuning: detuning, lines: transition_lines(&p, &basis, &blocks) })
        })
        .collect::<Result<Vec<_>, SpectraError>>()?;
    Ok(TransitionDiagram { points })
}

pub const LEVELS_CSV_HEADER: &str =
    "cavity_detuning_MHz,ground_F,m,branch,difference_frequency_MHz,amplitude,excitable";

pub fn write_levels_csv<W: Write>(diagram: &TransitionDiagram, mut out: W) -> io::Result<()> {
    writeln!(out, "{LEVELS_CSV_HEADER}")?;
    for set in &diagram.points {
        for l in &set.lines {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                set.cavity_detuning, l.ground, l.m, l.branch, l.difference_frequency, l.amplitude, l.excitable
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    /// Both transitions must exceed this amplitude.
    pub excitable_threshold: f64,
    /// At least one of the two transitions must exceed this amplitude.
    pub bright_threshold: f64,
    /// Bisection stops once the bracket is narrower than this, MHz.
    pub resolution: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        CrossingOptions { excitable_threshold: EXCITABLE_THRESHOLD, bright_threshold: 0.1, resolution: 1.0 }
    }
}

/// A cavity detuning where an F=3 line and an F=4 line share a probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub cavity_detuning: f64,
    pub probe_detuning: f64,
    pub m: i32,
    pub f3_branch: usize,
    pub f4_branch: usize,
    pub f3_amplitude: f64,
    pub f4_amplitude: f64,
}

struct BranchSample {
    energy: f64,
    f3: f64,
    f4: f64,
}

/// Per `m >= 0`, per branch: energy and ground amplitudes at one detuning.
/// Negative `m` blocks mirror the positive ones.
fn sample_branches(params: &SystemParams, basis: &Basis) -> Result<BTreeMap<i32, Vec<BranchSample>>, SpectraError> {
    let blocks = pbg_blocks(params, basis)?;
    Ok(blocks
        .iter()
        .filter(|b| b.m >= 0)
        .map(|block| {
            let samples = (0..block.energies.len())
                .map(|k| BranchSample {
                    energy: block.energies[k],
                    f3: ground_amplitude(basis, block, k, 3).unwrap_or(0.0),
                    f4: ground_amplitude(basis, block, k, 4).unwrap_or(0.0),
                })
                .collect();
            (block.m, samples)
        })
        .collect())
}

/// Locates dual resonances of `H2` along a cavity-detuning grid: sign changes
/// of `(F=3 difference) - (F=4 difference)` between excitable branches of the
/// same `m` block, refined by bisection.
pub fn find_dual_resonances(
    params: &SystemParams,
    cavity_points: &[f64],
    options: &CrossingOptions,
) -> Result<Vec<Crossing>, SpectraError> {
    if cavity_points.is_empty() {
        return Err(SpectraError::EmptyGrid);
    }
    let basis = Basis::new(ModelScope::Full, 1)?;
    let gss = params.ground_splitting;
    let at = |x: f64| sample_branches(&SystemParams { cavity_detuning: x, ..*params }, &basis);
    let samples = cavity_points.iter().map(|&x| at(x)).collect::<Result<Vec<_>, _>>()?;
    // Differences below this are treated as exact degeneracies, not crossings.
    let zero_tol = 1e-9 * (params.g + gss + params.cavity_detuning.abs()).max(1.0);

    let mut crossings = Vec::new();
    for w in 0..cavity_points.len().saturating_sub(1) {
        let (left, right) = (&samples[w], &samples[w + 1]);
        for (&m, branches) in left {
            let n = branches.len();
            for k3 in 0..n {
                for k4 in 0..n {
                    let (l3, l4) = (&branches[k3], &branches[k4]);
                    let (r3, r4) = (&right[&m][k3], &right[&m][k4]);
                    let excitable = [l3.f3, l4.f4, r3.f3, r4.f4].iter().all(|&a| a > options.excitable_threshold);
                    let bright = l3.f3.max(l4.f4).max(r3.f3.max(r4.f4)) >= options.bright_threshold;
                    if !(excitable && bright) {
                        continue;
                    }
                    let d_left = l3.energy + gss - l4.energy;
                    let d_right = r3.energy + gss - r4.energy;
                    if d_left.abs() <= zero_tol || d_right.abs() <= zero_tol || d_left.signum() == d_right.signum() {
                        continue;
                    }
                    let (mut lo, mut hi) = (cavity_points[w], cavity_points[w + 1]);
                    let mut d_lo = d_left;
                    while hi - lo > options.resolution {
                        let mid = 0.5 * (lo + hi);
                        let s = at(mid)?;
                        let d_mid = s[&m][k3].energy + gss - s[&m][k4].energy;
                        if d_mid.signum() == d_lo.signum() {
                            lo = mid;
                            d_lo = d_mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let x = 0.5 * (lo + hi);
                    let s = at(x)?;
                    let (b3, b4) = (&s[&m][k3], &s[&m][k4]);
                    crossings.push(Crossing {
                        cavity_detuning: x,
                        probe_detuning: 0.5 * (b3.energy + gss + b4.energy),
                        m,
                        f3_branch: k3,
                        f4_branch: k4,
                        f3_amplitude: b3.f3,
                        f4_amplitude: b4.f4,
                    });
                }
            }
        }
    }
    crossings.sort_by(|a, b| a.cavity_detuning.total_cmp(&b.cavity_detuning));
    Ok(crossings)
}

/// Crossings grouped by cavity detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualResonance {
    pub cavity_detuning: f64,
    pub probe_detuning: f64,
    pub probe_min: f64,
    pub probe_max: f64,
    pub crossings: Vec<Crossing>,
}

/// Merges crossings whose cavity detunings chain together within `window` MHz.
pub fn group_dual_resonances(crossings: &[Crossing], window: f64) -> Vec<DualResonance> {
    let mut sorted = crossings.to_vec();
    sorted.sort_by(|a, b| a.cavity_detuning.total_cmp(&b.cavity_detuning));
    let mut groups: Vec<Vec<Crossing>> = Vec::new();
    for c in sorted {
        match groups.last_mut() {
            Some(g) if c.cavity_detuning - g.last().expect("non-empty").cavity_detuning <= window => g.push(c),
            _ => groups.push(vec![c]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len() as f64;
            DualResonance {
                cavity_detuning: g.iter().map(|c| c.cavity_detuning).sum::<f64>() / n,
                probe_detuning: g.iter().map(|c| c.probe_detuning).sum::<f64>() / n,
                probe_min: g.iter().map(|c| c.probe_detuning).fold(f64::INFINITY, f64::min),
                probe_max: g.iter().map(|c| c.probe_detuning).fold(f64::NEG_INFINITY, f64::max),
                crossings: g,
            }
        })
        .collect()
}
