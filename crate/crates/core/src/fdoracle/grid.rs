use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closure condition on the artificial ends `x = ±L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for Closure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Closure::Dirichlet),
            "neumann" => Ok(Closure::Neumann),
            _ => Err(Error::InvalidParameter(format!("unknown closure {s:?}"))),
        }
    }
}

/// Finite-difference grid on `[-L, L] × [0, d]`.
///
/// In `x` there are `nx` interior nodes `x_i = -L + (i+1) hx`,
/// `hx = 2L/(nx+1)`. In `y` the Robin walls carry unknowns, so the `ny` nodes
/// are `y_j = j hy` with `hy = d/(ny-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    pub l: f64,
    pub d: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub closure: Closure,
}

impl FdGrid {
    pub fn new(l: f64, d: f64, nx: usize, ny: usize, closure: Closure) -> Result<Self> {
        if !(l > 0.0 && d > 0.0 && l.is_finite() && d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid extents must be positive, got L = {l}, d = {d}"
            )));
        }
        if nx < 16 || ny < 16 {
            return Err(Error::GridTooCoarse { nx, ny });
        }
        Ok(FdGrid {
            l,
            d,
            nx,
            ny,
            hx: 2.0 * l / (nx + 1) as f64,
            hy: d / (ny - 1) as f64,
            closure,
        })
    }

    /// Grid with both spacings as close to `h` as the extents allow.
    pub fn with_spacing(l: f64, d: f64, h: f64, closure: Closure) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {h}")));
        }
        let nx = ((2.0 * l / h).round() as usize).saturating_sub(1);
        let ny = (d / h).round() as usize + 1;
        FdGrid::new(l, d, nx, ny, closure)
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.l + (i + 1) as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index of node `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }
}
