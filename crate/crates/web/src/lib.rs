//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string. The plain Rust
//! functions behind them return typed values and run natively in tests.

use hfcavity::grid::Grid;
use hfcavity::lindblad::{self, CollapseMode, SolveOptions};
use hfcavity::model::{self, Basis, Manifold, ModelScope, SystemParams};
use hfcavity::spectra::{self, EigenConfig, EigenModel, EigenOptions, BAND_GAP_FRACTION, DEFAULT_CLUSTER_TOL};
use hfcavity::sweep::{pbg_params, toroid_params};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Most grid points a single call will compute.
pub const MAX_POINTS: usize = 4_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Toroid,
    Pbg,
}

impl Regime {
    pub fn parse(name: &str) -> Result<Self, String> {
        match name {
            "toroid" => Ok(Regime::Toroid),
            "pbg" => Ok(Regime::Pbg),
            other => Err(format!("unknown model '{other}', expected 'toroid' or 'pbg'")),
        }
    }

    fn params(self, g: f64) -> SystemParams {
        let mut p = match self {
            Regime::Toroid => toroid_params(),
            Regime::Pbg => pbg_params(),
        };
        // Keep the drive at its preset ratio to g.
        p.epsilon.modulus *= p.g / g;
        p.g = g;
        p
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Result<Grid, String> {
    let g = Grid::new(start, stop, step).map_err(|e| e.to_string())?;
    if g.len() > MAX_POINTS {
        return Err(format!("{} grid points requested, the demo allows {MAX_POINTS}", g.len()));
    }
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct FanLevel {
    pub energy: f64,
    pub cavity_likeness: f64,
    pub degeneracy: usize,
    pub band: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FanColumn {
    pub cavity_detuning: f64,
    pub levels: Vec<FanLevel>,
}

/// N=1 eigenvalue clusters vs cavity detuning.
pub fn eigen_fan(model: &str, g: f64, start: f64, stop: f64, step: f64) -> Result<Vec<FanColumn>, String> {
    let regime = Regime::parse(model)?;
    let cavity_grid = grid(start, stop, step)?;
    let (model, scope) = match regime {
        Regime::Toroid => (EigenModel::Toroid, ModelScope::ToroidCoupled),
        Regime::Pbg => (EigenModel::Pbg, ModelScope::Full),
    };
    let config = EigenConfig {
        model,
        scope,
        n_max: 1,
        params: regime.params(g),
        cavity_grid,
        excitation: 1,
        options: EigenOptions {
            cluster_tol: DEFAULT_CLUSTER_TOL,
            band_gap: (regime == Regime::Pbg).then_some(g * BAND_GAP_FRACTION),
        },
    };
    let reports = spectra::eigen_scan(&config).map_err(|e| e.to_string())?;
    Ok(reports
        .into_iter()
        .map(|r| FanColumn {
            cavity_detuning: r.cavity_detuning.unwrap_or(f64::NAN),
            levels: r
                .clusters
                .iter()
                .map(|c| FanLevel { energy: c.energy, cavity_likeness: c.cavity_likeness, degeneracy: c.degeneracy, band: c.band })
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SlicePoint {
    pub probe_detuning: f64,
    pub transmission: f64,
    pub pop_f3: f64,
    pub pop_f4: f64,
    pub error: Option<String>,
}

/// Steady-state transmission and ground populations vs probe detuning.
///
/// Uses the full D2 basis with the equal-m sector solve.
pub fn transmission_slice(
    model: &str,
    g: f64,
    cavity_detuning: f64,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<Vec<SlicePoint>, String> {
    let regime = Regime::parse(model)?;
    let basis = Basis::new(ModelScope::Full, 1).map_err(|e| e.to_string())?;
    let base = SystemParams { cavity_detuning, ..regime.params(g) };
    let options = SolveOptions { m_sector: true };
    let points = grid(start, stop, step)?
        .points()
        .into_iter()
        .map(|probe| {
            let p = SystemParams { probe_detuning: probe, ..base };
            let solved = match regime {
                Regime::Toroid => model::hamiltonian_h1(&p, &basis)
                    .map_err(lindblad::LindbladError::from)
                    .and_then(|h| lindblad::solve_point(&h, &basis, &p, CollapseMode::PerGroundManifold, &options)),
                Regime::Pbg => model::hamiltonian_h3(&p, &basis)
                    .map_err(lindblad::LindbladError::from)
                    .and_then(|h| lindblad::solve_point(&h, &basis, &p, CollapseMode::GlobalCommon, &options)),
            };
            match solved {
                Ok(sol) => SlicePoint {
                    probe_detuning: probe,
                    transmission: sol.observables.transmission,
                    pop_f3: sol.observables.manifold(Manifold::Ground(3)),
                    pop_f4: sol.observables.manifold(Manifold::Ground(4)),
                    error: None,
                },
                Err(e) => SlicePoint {
                    probe_detuning: probe,
                    transmission: f64::NAN,
                    pop_f3: f64::NAN,
                    pop_f4: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(points)
}

#[derive(Debug, Clone, Serialize)]
pub struct LineColumn {
    pub cavity_detuning: f64,
    /// `(difference frequency, amplitude)` of excitable lines from F=3.
    pub f3: Vec<(f64, f64)>,
    /// The same from F=4.
    pub f4: Vec<(f64, f64)>,
}

/// Probe-excitable difference frequencies of the full D2 Hamiltonian.
pub fn transition_lines(g: f64, start: f64, stop: f64, step: f64) -> Result<Vec<LineColumn>, String> {
    let params = Regime::Pbg.params(g);
    let diagram = spectra::transition_diagram(&params, &grid(start, stop, step)?.points()).map_err(|e| e.to_string())?;
    Ok(diagram
        .points
        .into_iter()
        .map(|set| {
            let pick = |f: u8| {
                set.lines
                    .iter()
                    .filter(|l| l.ground == f && l.excitable)
                    .map(|l| (l.difference_frequency, l.amplitude))
                    .collect()
            };
            LineColumn { cavity_detuning: set.cavity_detuning, f3: pick(3), f4: pick(4) }
        })
        .collect())
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = eigenFan)]
pub fn eigen_fan_json(model: &str, g: f64, start: f64, stop: f64, step: f64) -> Result<String, JsError> {
    to_js(eigen_fan(model, g, start, stop, step))
}

#[wasm_bindgen(js_name = transmissionSlice)]
pub fn transmission_slice_json(
    model: &str,
    g: f64,
    cavity_detuning: f64,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<String, JsError> {
    to_js(transmission_slice(model, g, cavity_detuning, start, stop, step))
}

#[wasm_bindgen(js_name = transitionLines)]
pub fn transition_lines_json(g: f64, start: f64, stop: f64, step: f64) -> Result<String, JsError> {
    to_js(transition_lines(g, start, stop, step))
}
