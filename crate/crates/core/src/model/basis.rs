use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// A hyperfine manifold of the D2 line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Manifold {
    /// 6S_{1/2}, F = 3 or 4.
    Ground(u8),
    /// 6P_{3/2}, F' = 2..=5.
    Excited(u8),
}

impl Manifold {
    pub const ALL: [Manifold; 6] = [
        Manifold::Ground(3),
        Manifold::Ground(4),
        Manifold::Excited(2),
        Manifold::Excited(3),
        Manifold::Excited(4),
        Manifold::Excited(5),
    ];

    pub fn f(self) -> i32 {
        match self {
            Manifold::Ground(f) | Manifold::Excited(f) => i32::from(f),
        }
    }

    pub fn is_excited(self) -> bool {
        matches!(self, Manifold::Excited(_))
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Manifold::Ground(v) => write!(f, "F={v}"),
            Manifold::Excited(v) => write!(f, "F'={v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomicState {
    pub manifold: Manifold,
    pub m: i32,
}

impl AtomicState {
    pub fn new(manifold: Manifold, m: i32) -> Result<Self, ModelError> {
        let valid = match manifold {
            Manifold::Ground(f) => f == 3 || f == 4,
            Manifold::Excited(f) => (2..=5).contains(&f),
        };
        if !valid || m.abs() > manifold.f() {
            return Err(ModelError::InvalidState { manifold, m });
        }
        Ok(AtomicState { manifold, m })
    }

    /// All 48 D2 states: F=3, F=4, then F'=2..5, each with ascending m.
    pub fn all() -> Vec<AtomicState> {
        Manifold::ALL
            .iter()
            .flat_map(|&manifold| {
                let f = manifold.f();
                (-f..=f).map(move |m| AtomicState { manifold, m })
            })
            .collect()
    }
}

impl fmt::Display for AtomicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},m={}>", self.manifold, self.m)
    }
}

/// Which atomic manifolds a basis keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelScope {
    /// All 48 D2 states.
    Full,
    /// F=4 and F'=5 only.
    Toroid45Only,
    /// F=4 and F'=3,4,5.
    ToroidCoupled,
}

impl ModelScope {
    pub fn contains(self, manifold: Manifold) -> bool {
        match self {
            ModelScope::Full => true,
            ModelScope::Toroid45Only => matches!(manifold, Manifold::Ground(4) | Manifold::Excited(5)),
            ModelScope::ToroidCoupled => {
                matches!(manifold, Manifold::Ground(4) | Manifold::Excited(3..=5))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub atom: AtomicState,
    pub photons: u32,
}

impl BasisState {
    /// Photons plus atomic excitation.
    pub fn excitation(&self) -> u32 {
        self.photons + u32::from(self.atom.manifold.is_excited())
    }
}

/// Product basis of atomic states and cavity Fock states `0..=n_max`.
///
/// Canonical order is atom-major with the photon number running fastest:
/// `index = atom_index * (n_max + 1) + n`.
#[derive(Debug, Clone)]
pub struct Basis {
    scope: ModelScope,
    atomic: Vec<AtomicState>,
    n_max: u32,
    index: HashMap<BasisState, usize>,
}

impl Basis {
    pub fn new(scope: ModelScope, n_max: u32) -> Result<Self, ModelError> {
        if n_max < 1 {
            return Err(ModelError::PhotonCutoff(n_max));
        }
        let atomic: Vec<AtomicState> =
            AtomicState::all().into_iter().filter(|s| scope.contains(s.manifold)).collect();
        Ok(Self::from_states(scope, atomic, n_max))
    }

    /// Arbitrary atomic subset, e.g. a two-level reduction.
    pub fn from_states(scope: ModelScope, atomic: Vec<AtomicState>, n_max: u32) -> Self {
        let mut basis = Basis { scope, atomic, n_max, index: HashMap::new() };
        basis.index = (0..basis.dim()).map(|i| (basis.state(i), i)).collect();
        basis
    }

    pub fn scope(&self) -> ModelScope {
        self.scope
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn atomic_states(&self) -> &[AtomicState] {
        &self.atomic
    }

    pub fn dim(&self) -> usize {
        self.atomic.len() * (self.n_max as usize + 1)
    }

    pub fn state(&self, i: usize) -> BasisState {
        let per_atom = self.n_max as usize + 1;
        BasisState { atom: self.atomic[i / per_atom], photons: (i % per_atom) as u32 }
    }

    pub fn index(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dim()).map(|i| self.state(i))
    }

    pub fn contains_manifold(&self, manifold: Manifold) -> bool {
        self.atomic.iter().any(|s| s.manifold == manifold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_per_scope() {
        assert_eq!(Basis::new(ModelScope::Full, 1).unwrap().dim(), 96);
        assert_eq!(Basis::new(ModelScope::ToroidCoupled, 1).unwrap().dim(), 72);
        assert_eq!(Basis::new(ModelScope::Toroid45Only, 1).unwrap().dim(), 40);
        assert_eq!(Basis::new(ModelScope::Full, 3).unwrap().dim(), 192);
    }

    #[test]
    fn sixteen_ground_and_thirty_two_excited() {
        let all = AtomicState::all();
        assert_eq!(all.iter().filter(|s| !s.manifold.is_excited()).count(), 16);
        assert_eq!(all.iter().filter(|s| s.manifold.is_excited()).count(), 32);
    }

    #[test]
    fn toroid_coupled_one_excitation_sector() {
        let b = Basis::new(ModelScope::ToroidCoupled, 1).unwrap();
        assert_eq!(b.states().filter(|s| s.excitation() == 1).count(), 36);
    }

    #[test]
    fn photon_cutoff_rejected() {
        assert!(matches!(Basis::new(ModelScope::Full, 0), Err(ModelError::PhotonCutoff(0))));
    }

    #[test]
    fn invalid_atomic_state() {
        assert!(AtomicState::new(Manifold::Excited(2), 3).is_err());
        assert!(AtomicState::new(Manifold::Ground(5), 0).is_err());
        assert!(AtomicState::new(Manifold::Excited(5), -5).is_ok());
    }

    #[test]
    fn index_round_trip() {
        let b = Basis::new(ModelScope::Full, 2).unwrap();
        for i in 0..b.dim() {
            assert_eq!(b.index(&b.state(i)), Some(i));
        }
    }
}
