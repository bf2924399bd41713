//! `start:step:stop` grids.

use std::str::FromStr;

/// Inclusive arithmetic grid. A single number is a one-point grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl Grid {
    /// Points `start + k step`, keeping `stop` when it lies within half a
    /// step of the last point.
    pub fn points(&self) -> Vec<f64> {
        if self.step == 0.0 {
            return vec![self.start];
        }
        let span = (self.stop - self.start) / self.step;
        let count = (span + 0.5).floor() as usize + 1;
        (0..count).map(|k| self.start + self.step * k as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number"));
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Grid { start: v, step: 0.0, stop: v }
            }
            [a, h, b] => Grid { start: num(a)?, step: num(h)?, stop: num(b)? },
            _ => return Err(format!("grid {s:?} is neither a number nor start:step:stop")),
        };
        if ![grid.start, grid.step, grid.stop].iter().all(|v| v.is_finite()) {
            return Err(format!("grid {s:?} has non-finite entries"));
        }
        if grid.step == 0.0 && grid.start != grid.stop {
            return Err(format!("grid {s:?} has zero step"));
        }
        if grid.step != 0.0 && (grid.stop - grid.start) / grid.step < -0.5 {
            return Err(format!("grid {s:?} steps away from its stop value"));
        }
        Ok(grid)
    }
}
