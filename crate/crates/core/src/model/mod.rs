//! Composite atom ⊗ cavity basis, operator builders and the four
//! rotating-wave Hamiltonians.
//!
//! `H0` and `H2` are the undriven Hamiltonians in a frame rotating at the
//! F=4 -> F'=5 frequency; `H1` and `H3` are the driven versions in the frame
//! rotating with the probe.

mod basis;
mod operator;
mod params;

pub use basis::{AtomicState, Basis, BasisState, Manifold, ModelScope};
pub use operator::Operator;
pub use params::{Constant, ConstantsTable, Drive, ExcitedOffsets, SystemParams, CONSTANTS_SCHEMA_VERSION};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::angular::{self, AngularError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("photon cutoff n_max must be at least 1, got {0}")]
    PhotonCutoff(u32),
    #[error("invalid atomic state {manifold} m={m}")]
    InvalidState { manifold: Manifold, m: i32 },
    #[error("invalid parameter {field} = {value}")]
    InvalidParameter { field: &'static str, value: f64 },
    #[error("constants file: {0}")]
    Constants(String),
    #[error(transparent)]
    Angular(#[from] AngularError),
}

const EXCITED: [u8; 4] = [2, 3, 4, 5];

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Truncated cavity lowering operator.
pub fn annihilation(basis: &Basis) -> Operator {
    let triplets = basis.states().enumerate().filter(|(_, s)| s.photons > 0).map(|(i, s)| {
        let lower = BasisState { atom: s.atom, photons: s.photons - 1 };
        let j = basis.index(&lower).expect("lower Fock state present");
        (j, i, real(f64::from(s.photons).sqrt()))
    });
    Operator::from_triplets(basis.dim(), triplets.collect::<Vec<_>>())
}

/// `a† a`.
pub fn photon_number(basis: &Basis) -> Operator {
    diagonal_from(basis, |s| f64::from(s.photons))
}

/// Photons plus atomic excitation.
pub fn excitation_number(basis: &Basis) -> Operator {
    diagonal_from(basis, |s| f64::from(s.excitation()))
}

/// Total magnetic quantum number `m_F` (the cavity photon is pi-polarized).
pub fn total_m(basis: &Basis) -> Operator {
    diagonal_from(basis, |s| f64::from(s.atom.m))
}

/// Projector onto one hyperfine manifold, identity on the Fock factor.
pub fn projector(basis: &Basis, manifold: Manifold) -> Operator {
    diagonal_from(basis, |s| if s.atom.manifold == manifold { 1.0 } else { 0.0 })
}

fn diagonal_from(basis: &Basis, f: impl Fn(&BasisState) -> f64) -> Operator {
    let diag: Vec<C64> = basis.states().map(|s| real(f(&s))).collect();
    Operator::diagonal(&diag)
}

/// `D_q(F, F') = sum_m |F,m><F,m| mu_q |F',m+q><F',m+q|`, a lowering operator
/// acting as the identity on the cavity. States missing from the basis
/// contribute nothing.
pub fn dipole_operator(basis: &Basis, q: i32, f: u8, fp: u8) -> Result<Operator, ModelError> {
    if !(-1..=1).contains(&q) {
        return Err(AngularError::InvalidPolarization(q).into());
    }
    if !(f == 3 || f == 4) || !EXCITED.contains(&fp) {
        return Err(AngularError::LevelOutOfRange { f: i32::from(f), fp: i32::from(fp) }.into());
    }
    let mut triplets = Vec::new();
    for (i, s) in basis.states().enumerate() {
        if s.atom.manifold != Manifold::Excited(fp) {
            continue;
        }
        let m = s.atom.m - q;
        if m.abs() > i32::from(f) {
            continue;
        }
        let lower = BasisState { atom: AtomicState { manifold: Manifold::Ground(f), m }, photons: s.photons };
        let Some(j) = basis.index(&lower) else { continue };
        let value = angular::dipole_matrix_element(i32::from(f), m, q, i32::from(fp), s.atom.m)?;
        triplets.push((j, i, real(value)));
    }
    Ok(Operator::from_triplets(basis.dim(), triplets))
}

/// `sum_{F,F'} (a† D_0(F,F') + h.c.)` over the given manifolds.
fn cavity_coupling(basis: &Basis, grounds: &[u8], excited: &[u8]) -> Result<Operator, ModelError> {
    let a = annihilation(basis);
    let ad = a.adjoint();
    let mut total = Operator::zero(basis.dim());
    for &f in grounds {
        for &fp in excited {
            let term = ad.matmul(&dipole_operator(basis, 0, f, fp)?);
            total = &(&total + &term) + &term.adjoint();
        }
    }
    Ok(total)
}

/// `epsilon a† + epsilon* a`.
fn cavity_drive(basis: &Basis, params: &SystemParams) -> Operator {
    let a = annihilation(basis);
    let eps = params.epsilon.amplitude();
    &a.adjoint().scale(eps) + &a.scale(eps.conj())
}

/// Undriven toroid-regime Hamiltonian: cavity coupled to F=4 -> F'=3,4,5.
pub fn hamiltonian_h0(params: &SystemParams, basis: &Basis) -> Result<Operator, ModelError> {
    params.validate()?;
    let mut h = photon_number(basis).scale_real(params.cavity_detuning);
    for fp in EXCITED {
        h = &h + &projector(basis, Manifold::Excited(fp)).scale_real(params.excited_offsets.get(fp));
    }
    Ok(&h + &cavity_coupling(basis, &[4], &[3, 4, 5])?.scale_real(params.g))
}

/// Driven toroid-regime Hamiltonian with a classical pi-polarized repump on
/// F=3 -> F', in the frame rotating with the probe.
pub fn hamiltonian_h1(params: &SystemParams, basis: &Basis) -> Result<Operator, ModelError> {
    params.validate()?;
    let mut h = photon_number(basis).scale_real(params.delta_cavity());
    for fp in EXCITED {
        h = &h + &projector(basis, Manifold::Excited(fp)).scale_real(params.delta_excited(fp));
    }
    h = &h + &projector(basis, Manifold::Ground(3)).scale_real(params.delta_repump());
    // D_0(4,2') vanishes by the selection rule; kept so the sum runs over all F'.
    h = &h + &cavity_coupling(basis, &[4], &EXCITED)?.scale_real(params.g);
    for fp in EXCITED {
        let d = dipole_operator(basis, 0, 3, fp)?;
        h = &h + &(&d + &d.adjoint()).scale_real(params.repump_rabi);
    }
    Ok(&h + &cavity_drive(basis, params))
}

/// Undriven Hamiltonian with the cavity coupled to both ground manifolds.
pub fn hamiltonian_h2(params: &SystemParams, basis: &Basis) -> Result<Operator, ModelError> {
    params.validate()?;
    let mut h = photon_number(basis).scale_real(params.cavity_detuning);
    for fp in EXCITED {
        h = &h + &projector(basis, Manifold::Excited(fp)).scale_real(params.excited_offsets.get(fp));
    }
    h = &h + &projector(basis, Manifold::Ground(3)).scale_real(-params.ground_splitting);
    Ok(&h + &cavity_coupling(basis, &[3, 4], &EXCITED)?.scale_real(params.g))
}

/// Driven version of [`hamiltonian_h2`] in the frame rotating with the probe.
pub fn hamiltonian_h3(params: &SystemParams, basis: &Basis) -> Result<Operator, ModelError> {
    params.validate()?;
    let mut h = photon_number(basis).scale_real(params.delta_cavity());
    for fp in EXCITED {
        h = &h + &projector(basis, Manifold::Excited(fp)).scale_real(params.delta_excited(fp));
    }
    h = &h + &projector(basis, Manifold::Ground(3)).scale_real(-params.ground_splitting);
    h = &h + &cavity_coupling(basis, &[3, 4], &EXCITED)?.scale_real(params.g);
    Ok(&h + &cavity_drive(basis, params))
}
