//! Single cesium atom with its full D2 hyperfine structure coupled to a
//! linearly polarized single-mode cavity.
//!
//! * [`angular`]: Wigner symbols and normalized hyperfine dipole elements.
//! * [`model`]: basis, operators and the rotating-wave Hamiltonians.
//! * [`spectra`]: excitation-manifold eigenstructure, transition diagrams and
//!   dual-resonance crossings.
//! * [`lindblad`]: collapse operators, Liouvillian and steady states.
//! * [`sweep`]: presets and parallel transmission sweeps with CSV output.
//! * [`cli`]: the `hfcavity` command-line front end.

pub mod angular;
pub mod cli;
pub mod grid;
pub mod lindblad;
pub mod linalg;
pub mod model;
pub mod spectra;
pub mod sweep;
