//! Master equation: collapse operators, the Liouvillian superoperator,
//! steady states and the observables read off them.
//!
//! Density matrices are vectorized column by column, `vec(rho)[i + j n] =
//! rho[i][j]`, so `A rho B` becomes `(B^T ⊗ A) vec(rho)`.

use std::collections::BTreeMap;

use faer::linalg::solvers::Solve;
use faer::sparse::{linalg::LuError, SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, EigenFailure};
use crate::model::{self, annihilation, photon_number, Basis, Manifold, ModelError, Operator, SystemParams};

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error("operator dimension {found} does not match basis dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Hamiltonian is not Hermitian (relative error {0:e})")]
    NotHermitian(f64),
    #[error("steady state is not unique: {0}")]
    DegenerateNullSpace(String),
    #[error("steady-state solve failed: {0}")]
    Numeric(String),
    #[error("transmission is undefined for a zero drive amplitude")]
    ZeroDrive,
    #[error(transparent)]
    Eigen(#[from] EigenFailure),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How spontaneous emission is split into reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CollapseMode {
    /// One reservoir per polarization and ground manifold.
    PerGroundManifold,
    /// One reservoir per polarization shared by both ground manifolds.
    GlobalCommon,
}

#[derive(Debug, Clone)]
pub struct CollapseSet {
    pub mode: CollapseMode,
    /// Cavity decay operator `a`, rate `kappa`.
    pub cavity: Operator,
    /// Atomic operators, each with rate `gamma`.
    pub atomic: Vec<Operator>,
}

const EXCITED: [u8; 4] = [2, 3, 4, 5];

pub fn collapse_operators(basis: &Basis, mode: CollapseMode) -> Result<CollapseSet, ModelError> {
    let mut atomic = Vec::new();
    for q in -1..=1 {
        match mode {
            CollapseMode::PerGroundManifold => {
                for f in [3u8, 4] {
                    let ops = EXCITED.iter().map(|&fp| model::dipole_operator(basis, q, f, fp));
                    atomic.push(ops.collect::<Result<Vec<_>, _>>()?.into_iter().sum());
                }
            }
            CollapseMode::GlobalCommon => {
                let mut ops = Vec::new();
                for f in [3u8, 4] {
                    for fp in EXCITED {
                        ops.push(model::dipole_operator(basis, q, f, fp)?);
                    }
                }
                atomic.push(ops.into_iter().sum());
            }
        }
    }
    Ok(CollapseSet { mode, cavity: annihilation(basis), atomic })
}

/// Sparse Liouvillian acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n: usize,
    matrix: Operator,
}

impl Liouvillian {
    /// `L rho = -i[H, rho] + kappa D[a] rho + gamma sum_C D[C] rho` with
    /// `D[c] rho = 2 c rho c† - c†c rho - rho c†c`.
    pub fn new(h: &Operator, collapses: &CollapseSet, kappa: f64, gamma: f64) -> Result<Self, LindbladError> {
        let n = h.dim();
        for op in std::iter::once(&collapses.cavity).chain(&collapses.atomic) {
            if op.dim() != n {
                return Err(LindbladError::DimensionMismatch { expected: n, found: op.dim() });
            }
        }
        let herm = h.hermiticity_error();
        if herm > 1e-12 {
            return Err(LindbladError::NotHermitian(herm));
        }
        let mut triplets = Vec::new();
        let minus_i = C64::new(0.0, -1.0);
        // Effective non-Hermitian part: K = -iH - sum rate c†c, L rho = K rho + rho K† + ...
        let mut k = h.scale(minus_i);
        let rated = std::iter::once((kappa, &collapses.cavity)).chain(collapses.atomic.iter().map(|c| (gamma, c)));
        for (rate, c) in rated.clone() {
            if rate != 0.0 {
                k = &k - &c.adjoint().matmul(c).scale_real(rate);
            }
        }
        let kd = k.adjoint();
        for j in 0..n {
            for (i, kk, v) in k.iter() {
                triplets.push((i + j * n, kk + j * n, v));
            }
            // rho K†: (K†)^T = conj(K), entry (j, l) of conj(K) is conj(K†[l][j]).
            for (l, jj, v) in kd.iter() {
                triplets.push((j + jj * n, j + l * n, v));
            }
        }
        for (rate, c) in rated {
            if rate == 0.0 {
                continue;
            }
            let entries: Vec<_> = c.iter().collect();
            for &(i, kk, a) in &entries {
                for &(j, l, b) in &entries {
                    triplets.push((i + j * n, kk + l * n, a * b.conj() * (2.0 * rate)));
                }
            }
        }
        Ok(Liouvillian { n, matrix: Operator::from_triplets(n * n, triplets) })
    }

    /// Hilbert-space dimension.
    pub fn hilbert_dim(&self) -> usize {
        self.n
    }

    /// Superoperator dimension, `hilbert_dim²`.
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn apply(&self, rho: &[Vec<C64>]) -> Vec<Vec<C64>> {
        unvec(&self.matrix.apply(&vec(rho)), self.n)
    }

    /// Adjoint superoperator applied to an operator.
    pub fn apply_adjoint(&self, x: &[Vec<C64>]) -> Vec<Vec<C64>> {
        unvec(&self.matrix.adjoint().apply(&vec(x)), self.n)
    }
}

pub fn vec(rho: &[Vec<C64>]) -> Vec<C64> {
    let n = rho.len();
    (0..n * n).map(|k| rho[k % n][k / n]).collect()
}

pub fn unvec(v: &[C64], n: usize) -> Vec<Vec<C64>> {
    (0..n).map(|i| (0..n).map(|j| v[i + j * n]).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SolveOptions {
    /// Solve only in the sector of coherences with equal total `m`. The
    /// Liouvillian never leaves that sector and the steady state lies in it.
    pub m_sector: bool,
}

/// Density-matrix sanity measures of a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    /// `|tr(rho) - 1|`.
    pub trace_error: f64,
    /// `max |rho - rho†| / max |rho|` of the raw solution, before Hermitizing.
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// `‖L rho‖₂ / ‖L‖_F`.
    pub residual: f64,
}

impl CptpReport {
    pub fn is_physical(&self) -> bool {
        self.trace_error <= 1e-10 && self.hermiticity_error <= 1e-12 && self.min_eigenvalue >= -1e-8 && self.residual <= 1e-9
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Hermitized density matrix.
    pub rho: Vec<Vec<C64>>,
    pub cptp: CptpReport,
}

/// Solves `L rho = 0` with `tr(rho) = 1` replacing the `rho_00` equation.
///
/// `m_labels` gives the total `m` of every basis state and is required when
/// `options.m_sector` is set.
pub fn steady_state(l: &Liouvillian, m_labels: Option<&[i32]>, options: &SolveOptions) -> Result<SteadyState, LindbladError> {
    let n = l.n;
    let unknowns: Vec<usize> = match (options.m_sector, m_labels) {
        (true, Some(m)) => {
            if m.len() != n {
                return Err(LindbladError::DimensionMismatch { expected: n, found: m.len() });
            }
            (0..n * n).filter(|&k| m[k % n] == m[k / n]).collect()
        }
        (true, None) => return Err(LindbladError::Numeric("m-sector solve needs m labels".into())),
        (false, _) => (0..n * n).collect(),
    };
    let mut position = vec![usize::MAX; n * n];
    for (r, &k) in unknowns.iter().enumerate() {
        position[k] = r;
    }
    let size = unknowns.len();
    let trace_row = position[0];
    let diagonal: Vec<usize> = (0..n).map(|i| position[i + i * n]).collect();

    let mut triplets = Vec::with_capacity(l.matrix.nnz());
    let mut column_rows = vec![0usize; size];
    for (r, &k) in unknowns.iter().enumerate() {
        if r == trace_row {
            continue;
        }
        for (c, v) in l.matrix.row(k) {
            let cc = position[c];
            if cc == usize::MAX {
                return Err(LindbladError::Numeric("Liouvillian leaves the equal-m sector".into()));
            }
            triplets.push(Triplet::new(r, cc, v));
            column_rows[cc] += 1;
        }
    }
    for &d in &diagonal {
        triplets.push(Triplet::new(trace_row, d, C64::new(1.0, 0.0)));
    }
    let empty = (0..size).filter(|&c| column_rows[c] == 0).count();
    let empty_offdiag = (0..size).filter(|&c| column_rows[c] == 0 && !diagonal.contains(&c)).count();
    if empty_offdiag > 0 || empty > 1 {
        return Err(LindbladError::DegenerateNullSpace(format!("{empty} undetermined density-matrix elements")));
    }

    let a = SparseColMat::<usize, C64>::try_new_from_triplets(size, size, &triplets)
        .map_err(|e| LindbladError::Numeric(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { .. } => LindbladError::DegenerateNullSpace("structurally singular system".into()),
        other => LindbladError::Numeric(format!("{other:?}")),
    })?;
    let mut b = Mat::<C64>::zeros(size, 1);
    b[(trace_row, 0)] = C64::new(1.0, 0.0);
    let mut x = lu.solve(&b);
    // Refinement with residuals accumulated in doubled precision; the slow
    // optical-pumping modes make the system too ill-conditioned for plain
    // working-precision refinement.
    for _ in 0..REFINEMENT_PASSES {
        let r = compensated_residual(&triplets, &x, &b);
        let dx = lu.solve(&r);
        x += &dx;
        let step = (0..size).map(|i| dx[(i, 0)].norm()).fold(0.0, f64::max);
        let scale = (0..size).map(|i| x[(i, 0)].norm()).fold(0.0, f64::max);
        if step <= f64::EPSILON * scale {
            break;
        }
    }

    let mut raw = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (idx, &k) in unknowns.iter().enumerate() {
        let v = x[(idx, 0)];
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LindbladError::DegenerateNullSpace("solution is not finite".into()));
        }
        raw[k % n][k / n] = v;
    }
    let max_abs = raw.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if max_abs > 1.0 + 1e-6 {
        return Err(LindbladError::DegenerateNullSpace(format!("density-matrix element of size {max_abs:e}")));
    }
    let mut herm = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            herm = herm.max((raw[i][j] - raw[j][i].conj()).norm());
        }
    }
    let rho: Vec<Vec<C64>> =
        (0..n).map(|i| (0..n).map(|j| (raw[i][j] + raw[j][i].conj()) * 0.5).collect()).collect();
    let cptp = cptp_report(l, &rho, herm / max_abs)?;
    Ok(SteadyState { rho, cptp })
}

const REFINEMENT_PASSES: usize = 6;

/// Error-free `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Sum with a running compensation term.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let (s, e) = two_sum(self.sum, p);
        self.sum = s;
        self.err += e + a.mul_add(b, -p);
    }
}

/// `b - A x` with every row sum carried in doubled precision.
fn compensated_residual(triplets: &[Triplet<usize, usize, C64>], x: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let n = b.nrows();
    let mut re = vec![Compensated::default(); n];
    let mut im = vec![Compensated::default(); n];
    for t in triplets {
        let (v, xc) = (t.val, x[(t.col, 0)]);
        re[t.row].add_product(v.re, xc.re);
        re[t.row].add_product(-v.im, xc.im);
        im[t.row].add_product(v.re, xc.im);
        im[t.row].add_product(v.im, xc.re);
    }
    Mat::from_fn(n, 1, |i, _| {
        let bi = b[(i, 0)];
        let (sr, si) = (re[i], im[i]);
        C64::new((bi.re - sr.sum) - sr.err, (bi.im - si.sum) - si.err)
    })
}

fn cptp_report(l: &Liouvillian, rho: &[Vec<C64>], hermiticity_error: f64) -> Result<CptpReport, LindbladError> {
    let trace: C64 = (0..rho.len()).map(|i| rho[i][i]).sum();
    let lr = l.matrix.apply(&vec(rho));
    let residual = lr.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / l.matrix.frobenius_norm();
    let min_eigenvalue = linalg::hermitian_eigenvalues(rho)?.first().copied().unwrap_or(0.0);
    Ok(CptpReport { trace_error: (trace - 1.0).norm(), hermiticity_error, min_eigenvalue, residual })
}

/// Steady-state observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// `tr(rho a†a) kappa² / |epsilon|²`.
    pub transmission: f64,
    pub photon_number: f64,
    /// Ground Zeeman populations keyed by `(F, m)`, summed over photon number.
    pub zeeman_populations: BTreeMap<(u8, i32), f64>,
    /// Population of every hyperfine manifold in the basis.
    pub manifold_populations: BTreeMap<Manifold, f64>,
}

impl Observables {
    pub fn manifold(&self, manifold: Manifold) -> f64 {
        self.manifold_populations.get(&manifold).copied().unwrap_or(0.0)
    }

    pub fn zeeman(&self, f: u8, m: i32) -> f64 {
        self.zeeman_populations.get(&(f, m)).copied().unwrap_or(0.0)
    }

    pub fn excited_population(&self) -> f64 {
        self.manifold_populations.iter().filter(|(k, _)| k.is_excited()).map(|(_, v)| v).sum()
    }
}

pub fn observables(rho: &[Vec<C64>], basis: &Basis, params: &SystemParams) -> Result<Observables, LindbladError> {
    if rho.len() != basis.dim() {
        return Err(LindbladError::DimensionMismatch { expected: basis.dim(), found: rho.len() });
    }
    if params.epsilon.modulus == 0.0 {
        return Err(LindbladError::ZeroDrive);
    }
    let n_op = photon_number(basis);
    let photon_number: f64 = n_op.iter().map(|(i, _, v)| (v * rho[i][i]).re).sum();
    let mut zeeman_populations = BTreeMap::new();
    let mut manifold_populations = BTreeMap::new();
    for (i, s) in basis.states().enumerate() {
        let p = rho[i][i].re;
        *manifold_populations.entry(s.atom.manifold).or_insert(0.0) += p;
        if let Manifold::Ground(f) = s.atom.manifold {
            *zeeman_populations.entry((f, s.atom.m)).or_insert(0.0) += p;
        }
    }
    let transmission = photon_number * params.kappa.powi(2) / params.epsilon.modulus.powi(2);
    Ok(Observables { transmission, photon_number, zeeman_populations, manifold_populations })
}

/// Steady state of one driven Hamiltonian together with its observables.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub state: SteadyState,
    pub observables: Observables,
}

pub fn solve_point(
    h: &Operator,
    basis: &Basis,
    params: &SystemParams,
    mode: CollapseMode,
    options: &SolveOptions,
) -> Result<PointSolution, LindbladError> {
    if h.dim() != basis.dim() {
        return Err(LindbladError::DimensionMismatch { expected: basis.dim(), found: h.dim() });
    }
    let collapses = collapse_operators(basis, mode)?;
    let l = Liouvillian::new(h, &collapses, params.kappa, params.gamma)?;
    let m: Vec<i32> = basis.states().map(|s| s.atom.m).collect();
    let state = steady_state(&l, Some(&m), options)?;
    let observables = observables(&state.rho, basis, params)?;
    Ok(PointSolution { state, observables })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AtomicState, Drive, ModelScope};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn single_ground() -> Basis {
        Basis::from_states(ModelScope::Full, vec![AtomicState::new(Manifold::Ground(4), 0).unwrap()], 1)
    }

    #[test]
    fn collapse_counts() {
        let basis = Basis::new(ModelScope::Full, 1).unwrap();
        assert_eq!(collapse_operators(&basis, CollapseMode::PerGroundManifold).unwrap().atomic.len(), 6);
        assert_eq!(collapse_operators(&basis, CollapseMode::GlobalCommon).unwrap().atomic.len(), 3);
    }

    #[test]
    fn vectorization_round_trip() {
        let rho = vec![vec![c(1.0), C64::new(2.0, 1.0)], vec![c(3.0), c(4.0)]];
        let v = vec(&rho);
        assert_eq!(v[1], c(3.0));
        assert_eq!(unvec(&v, 2), rho);
    }

    #[test]
    fn superoperator_matches_direct_action() {
        let basis = Basis::new(ModelScope::Toroid45Only, 1).unwrap();
        let p = SystemParams {
            g: 5.0,
            kappa: 1.5,
            gamma: 0.7,
            epsilon: Drive { modulus: 0.3, phase: 0.4 },
            cavity_detuning: 2.0,
            probe_detuning: 1.0,
            ..SystemParams::default()
        };
        let h = model::hamiltonian_h1(&p, &basis).unwrap();
        let cs = collapse_operators(&basis, CollapseMode::PerGroundManifold).unwrap();
        let l = Liouvillian::new(&h, &cs, p.kappa, p.gamma).unwrap();
        let n = basis.dim();
        let rho: Vec<Vec<C64>> =
            (0..n).map(|i| (0..n).map(|j| C64::new((i * 7 + j) as f64 % 5.0, (i as f64 - j as f64) * 0.1)).collect()).collect();
        let dense = |op: &Operator| op.to_dense();
        let mul = |a: &[Vec<C64>], b: &[Vec<C64>]| -> Vec<Vec<C64>> {
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
        };
        let hd = dense(&h);
        let hr = mul(&hd, &rho);
        let rh = mul(&rho, &hd);
        let mut expected: Vec<Vec<C64>> =
            (0..n).map(|i| (0..n).map(|j| C64::new(0.0, -1.0) * (hr[i][j] - rh[i][j])).collect()).collect();
        let mut add_d = |op: &Operator, rate: f64| {
            let cd = dense(op);
            let cdag = dense(&op.adjoint());
            let cdc = mul(&cdag, &cd);
            let t1 = mul(&mul(&cd, &rho), &cdag);
            let t2 = mul(&cdc, &rho);
            let t3 = mul(&rho, &cdc);
            for i in 0..n {
                for j in 0..n {
                    expected[i][j] += (t1[i][j] * 2.0 - t2[i][j] - t3[i][j]) * rate;
                }
            }
        };
        add_d(&cs.cavity, p.kappa);
        for op in &cs.atomic {
            add_d(op, p.gamma);
        }
        let got = l.apply(&rho);
        for i in 0..n {
            for j in 0..n {
                assert!((got[i][j] - expected[i][j]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn adjoint_annihilates_identity() {
        let basis = Basis::new(ModelScope::Full, 1).unwrap();
        let p = SystemParams {
            g: 17_000.0,
            kappa: 4_400.0,
            gamma: 2.6,
            epsilon: Drive::real(67.3),
            cavity_detuning: 4_000.0,
            ..SystemParams::default()
        };
        let h = model::hamiltonian_h3(&p, &basis).unwrap();
        let l = Liouvillian::new(&h, &collapse_operators(&basis, CollapseMode::GlobalCommon).unwrap(), p.kappa, p.gamma)
            .unwrap();
        let n = basis.dim();
        let id: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect()).collect();
        let out = l.apply_adjoint(&id);
        assert!(out.iter().flatten().all(|v| v.norm() < 1e-12 * p.g));
        let mixed: Vec<Vec<C64>> = id.iter().map(|r| r.iter().map(|v| v / n as f64).collect()).collect();
        let lm = l.apply(&mixed);
        let tr: C64 = (0..n).map(|i| lm[i][i]).sum();
        assert!(tr.norm() < 1e-12 * p.g);
    }

    #[test]
    fn excited_population_decays_at_two_gamma() {
        let basis = Basis::new(ModelScope::Full, 1).unwrap();
        let n = basis.dim();
        for mode in [CollapseMode::PerGroundManifold, CollapseMode::GlobalCommon] {
            let cs = collapse_operators(&basis, mode).unwrap();
            let l = Liouvillian::new(&Operator::zero(n), &cs, 1.0, 0.5).unwrap();
            for (i, s) in basis.states().enumerate().filter(|(_, s)| s.atom.manifold.is_excited()) {
                let k = i + i * n;
                let photon_loss = f64::from(s.photons) * 2.0;
                assert!((l.matrix().get(k, k).re + 2.0 * 0.5 + photon_loss).abs() < 1e-12, "{s:?}");
            }
        }
    }

    #[test]
    fn empty_cavity_population() {
        let basis = single_ground();
        for delta in [0.0, 0.5, -2.0] {
            let eps = 1e-5;
            let p = SystemParams { kappa: 1.0, epsilon: Drive::real(eps), cavity_detuning: delta, ..SystemParams::default() };
            let h = model::hamiltonian_h1(&p, &basis).unwrap();
            let sol = solve_point(&h, &basis, &p, CollapseMode::PerGroundManifold, &SolveOptions::default()).unwrap();
            let expected = 1.0 / (1.0 + delta * delta);
            assert!((sol.observables.transmission - expected).abs() < 1e-8, "{}", sol.observables.transmission);
            assert!(sol.state.cptp.is_physical(), "{:?}", sol.state.cptp);
        }
    }

    #[test]
    fn decoupled_atom_is_degenerate() {
        let basis = Basis::new(ModelScope::Toroid45Only, 1).unwrap();
        let n = basis.dim();
        let l = Liouvillian::new(&Operator::zero(n), &collapse_operators(&basis, CollapseMode::PerGroundManifold).unwrap(), 1.0, 0.0)
            .unwrap();
        assert!(matches!(steady_state(&l, None, &SolveOptions::default()), Err(LindbladError::DegenerateNullSpace(_))));
    }

    #[test]
    fn zero_drive_has_no_transmission() {
        let basis = single_ground();
        let rho = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]];
        let p = SystemParams::default();
        assert!(matches!(observables(&rho, &basis, &p), Err(LindbladError::ZeroDrive)));
    }

    #[test]
    fn sector_solve_matches_full_solve() {
        let basis = Basis::new(ModelScope::ToroidCoupled, 1).unwrap();
        let p = SystemParams {
            g: 450.0,
            kappa: 1.75,
            gamma: 2.6,
            epsilon: Drive::real(1.75 * 2.6 / 450.0),
            cavity_detuning: -100.0,
            probe_detuning: -240.0,
            ..SystemParams::default()
        };
        let h = model::hamiltonian_h1(&p, &basis).unwrap();
        let full = solve_point(&h, &basis, &p, CollapseMode::PerGroundManifold, &SolveOptions::default()).unwrap();
        let sector = solve_point(&h, &basis, &p, CollapseMode::PerGroundManifold, &SolveOptions { m_sector: true }).unwrap();
        for (a, b) in full.state.rho.iter().flatten().zip(sector.state.rho.iter().flatten()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_mismatched_operators() {
        let basis = single_ground();
        let cs = collapse_operators(&basis, CollapseMode::GlobalCommon).unwrap();
        assert!(matches!(
            Liouvillian::new(&Operator::zero(3), &cs, 1.0, 1.0),
            Err(LindbladError::DimensionMismatch { .. })
        ));
    }
}
