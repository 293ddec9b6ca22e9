//! Physical parameters. Every frequency is in MHz and every absolute
//! frequency is an offset from the F=4 -> F'=5 transition.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ModelError;

/// Cavity drive amplitude `epsilon`, stored as modulus and phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub modulus: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Drive {
    pub fn real(modulus: f64) -> Self {
        Drive { modulus, phase: 0.0 }
    }

    pub fn amplitude(&self) -> C64 {
        C64::from_polar(self.modulus, self.phase)
    }
}

/// Excited hyperfine offsets `omega_{4->F'} - omega_{4->5'}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitedOffsets {
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
}

impl ExcitedOffsets {
    pub fn get(&self, fp: u8) -> f64 {
        match fp {
            2 => self.f2,
            3 => self.f3,
            4 => self.f4,
            5 => self.f5,
            _ => panic!("no excited level F'={fp}"),
        }
    }
}

impl Default for ExcitedOffsets {
    fn default() -> Self {
        ConstantsTable::cesium_d2().excited_offsets()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Single-photon coupling `g`.
    pub g: f64,
    /// Cavity field decay rate.
    pub kappa: f64,
    /// Atomic dipole decay rate.
    pub gamma: f64,
    pub epsilon: Drive,
    /// Repump Rabi frequency `Omega_r` (the field's Rabi frequency is `2 Omega_r`).
    #[serde(default)]
    pub repump_rabi: f64,
    /// Repump frequency minus the ground splitting, relative to `omega_{4->5'}`.
    #[serde(default)]
    pub repump_offset: f64,
    /// `omega_c - omega_{4->5'}`.
    pub cavity_detuning: f64,
    /// `omega_p - omega_{4->5'}`.
    #[serde(default)]
    pub probe_detuning: f64,
    #[serde(default)]
    pub excited_offsets: ExcitedOffsets,
    #[serde(default = "default_ground_splitting")]
    pub ground_splitting: f64,
}

fn default_ground_splitting() -> f64 {
    ConstantsTable::cesium_d2().ground_splitting.mhz
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            g: 0.0,
            kappa: 1.0,
            gamma: 0.0,
            epsilon: Drive::real(0.0),
            repump_rabi: 0.0,
            repump_offset: 0.0,
            cavity_detuning: 0.0,
            probe_detuning: 0.0,
            excited_offsets: ExcitedOffsets::default(),
            ground_splitting: default_ground_splitting(),
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |ok: bool, field: &'static str, value: f64| {
            if ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { field, value })
            }
        };
        check(self.kappa > 0.0 && self.kappa.is_finite(), "kappa", self.kappa)?;
        check(self.gamma >= 0.0 && self.gamma.is_finite(), "gamma", self.gamma)?;
        check(self.g >= 0.0 && self.g.is_finite(), "g", self.g)?;
        check(self.epsilon.modulus >= 0.0, "epsilon", self.epsilon.modulus)?;
        check(self.excited_offsets.f5 == 0.0, "excited_offsets.f5", self.excited_offsets.f5)?;
        Ok(())
    }

    /// `Delta_c = omega_c - omega_p`.
    pub fn delta_cavity(&self) -> f64 {
        self.cavity_detuning - self.probe_detuning
    }

    /// `Delta_{F'} = omega_{4->F'} - omega_p`.
    pub fn delta_excited(&self, fp: u8) -> f64 {
        self.excited_offsets.get(fp) - self.probe_detuning
    }

    /// `Delta_r = omega_r - omega_GSS - omega_p`.
    pub fn delta_repump(&self) -> f64 {
        self.repump_offset - self.probe_detuning
    }

    /// Multiplies every rate and frequency by `s`.
    pub fn scaled(&self, s: f64) -> SystemParams {
        SystemParams {
            g: self.g * s,
            kappa: self.kappa * s,
            gamma: self.gamma * s,
            epsilon: Drive { modulus: self.epsilon.modulus * s, phase: self.epsilon.phase },
            repump_rabi: self.repump_rabi * s,
            repump_offset: self.repump_offset * s,
            cavity_detuning: self.cavity_detuning * s,
            probe_detuning: self.probe_detuning * s,
            excited_offsets: ExcitedOffsets {
                f2: self.excited_offsets.f2 * s,
                f3: self.excited_offsets.f3 * s,
                f4: self.excited_offsets.f4 * s,
                f5: self.excited_offsets.f5 * s,
            },
            ground_splitting: self.ground_splitting * s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub mhz: f64,
    pub provenance: String,
}

/// Named frequency constants, loadable from JSON.
///
/// ```json
/// {
///   "schema_version": 1,
///   "excited_offsets": {
///     "2": { "mhz": -603.0, "provenance": "..." },
///     "3": { "mhz": -452.0, "provenance": "..." },
///     "4": { "mhz": -251.0, "provenance": "..." },
///     "5": { "mhz": 0.0, "provenance": "..." }
///   },
///   "ground_splitting": { "mhz": 9193.0, "provenance": "..." }
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub schema_version: u32,
    pub excited_offsets: BTreeMap<u8, Constant>,
    pub ground_splitting: Constant,
}

pub const CONSTANTS_SCHEMA_VERSION: u32 = 1;

impl ConstantsTable {
    pub fn cesium_d2() -> Self {
        let c = |mhz: f64, provenance: &str| Constant { mhz, provenance: provenance.to_owned() };
        let excited_offsets = BTreeMap::from([
            (2, c(-603.0, "F'=3 offset minus the 151 MHz F'=2-F'=3 interval of the Cs D2 line")),
            (3, c(-452.0, "omega(4->3') - omega(4->5'), Cs D2 hyperfine data")),
            (4, c(-251.0, "omega(4->4') - omega(4->5'), Cs D2 hyperfine data")),
            (5, c(0.0, "reference transition")),
        ]);
        ConstantsTable {
            schema_version: CONSTANTS_SCHEMA_VERSION,
            excited_offsets,
            ground_splitting: c(9193.0, "Cs 6S1/2 ground-state hyperfine splitting, rounded to 1 MHz"),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let table: ConstantsTable =
            serde_json::from_str(text).map_err(|e| ModelError::Constants(e.to_string()))?;
        if table.schema_version != CONSTANTS_SCHEMA_VERSION {
            return Err(ModelError::Constants(format!(
                "unsupported schema_version {}",
                table.schema_version
            )));
        }
        for fp in 2..=5u8 {
            if !table.excited_offsets.contains_key(&fp) {
                return Err(ModelError::Constants(format!("missing excited_offsets.{fp}")));
            }
        }
        if table.excited_offsets[&5].mhz != 0.0 {
            return Err(ModelError::Constants("excited_offsets.5 must be 0 (reference transition)".into()));
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Constants(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn excited_offsets(&self) -> ExcitedOffsets {
        let get = |k: u8| self.excited_offsets.get(&k).map_or(0.0, |c| c.mhz);
        ExcitedOffsets { f2: get(2), f3: get(3), f4: get(4), f5: get(5) }
    }

    /// Copies the table's frequencies into `params`.
    pub fn apply(&self, params: &mut SystemParams) {
        params.excited_offsets = self.excited_offsets();
        params.ground_splitting = self.ground_splitting.mhz;
    }
}
