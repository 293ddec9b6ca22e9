use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid step must be positive and finite, got {0}")]
    Step(f64),
    #[error("grid stop {stop} lies below start {start}")]
    Reversed { start: f64, stop: f64 },
    #[error("grid bounds must be finite")]
    NonFinite,
    #[error("cannot parse grid `{0}`; expected start:stop:step")]
    Parse(String),
}

/// Inclusive uniform grid in MHz. `start == stop` is a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, GridError> {
        let grid = Grid { start, stop, step };
        grid.validate()?;
        Ok(grid)
    }

    pub fn single(value: f64) -> Self {
        Grid { start: value, stop: value, step: 1.0 }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(GridError::NonFinite);
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(GridError::Step(self.step));
        }
        if self.stop < self.start {
            return Err(GridError::Reversed { start: self.start, stop: self.stop });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points are `start + i * step`, never accumulated.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for Grid {
    type Err = GridError;

    /// `start:stop:step`; each field accepts an optional `MHz`/`GHz` suffix.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(GridError::Parse(s.to_owned()));
        };
        let parse = |t: &str| parse_mhz(t).map_err(|_| GridError::Parse(s.to_owned()));
        Grid::new(parse(start)?, parse(stop)?, parse(step)?)
    }
}

/// Parses a frequency in MHz; a `GHz` suffix multiplies by 1000.
pub fn parse_mhz(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (number, scale) = if let Some(v) = t.strip_suffix("GHz") {
        (v, 1000.0)
    } else if let Some(v) = t.strip_suffix("MHz") {
        (v, 1.0)
    } else {
        (t, 1.0)
    };
    number
        .trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| format!("`{text}` is not a frequency (use a number with optional MHz/GHz suffix)"))
}
