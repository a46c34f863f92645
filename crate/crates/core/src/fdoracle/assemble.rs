//! Five-point discretization of `-Δ` with symmetric ghost-point Robin rows.
//!
//! The ghost value at a Robin wall is eliminated with the centred difference
//! of the boundary condition, e.g. `u_{-1} = u_1 - 2 hy α u_0` at `y = 0`. The
//! resulting wall row is half-weighted; the similarity transform with
//! `diag(1/√2)` at wall nodes then gives a symmetric matrix
//! (diagonal `2(1 + hy α)/hy²`, wall coupling `-√2/hy²`) with the same
//! eigenvalues.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::fdoracle::grid::{Closure, FdGrid};
use crate::modematch::WellConfig;

/// Symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Builds the matrix from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.max(c) + 1,
            });
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseOperator {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored `(row, col, value)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// Largest `|A_ij − A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.dim) {
            *out = (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(|k| self.values[k] * x[self.col_idx[k]])
                .sum();
        }
    }

    /// Maximum absolute row sum, an upper bound on `‖A‖₂`.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin lower bound on the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                let mut diag = 0.0;
                let mut off = 0.0;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    if self.col_idx[k] == r {
                        diag += self.values[k];
                    } else {
                        off += self.values[k].abs();
                    }
                }
                diag - off
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Coupling averaged over the dual cell `[x - hx/2, x + hx/2]`.
fn cell_alpha(config: &WellConfig, x: f64, hx: f64) -> f64 {
    let lo = x - 0.5 * hx;
    let hi = x + 0.5 * hx;
    let inside = (hi.min(config.a) - lo.max(-config.a)).max(0.0);
    config.alpha0 + (config.alpha1 - config.alpha0) * inside / hx
}

/// Symmetric cross-section block for coupling `alpha` on `ny` nodes.
fn push_cross_section(entries: &mut Vec<(usize, usize, f64)>, offset: usize, ny: usize, hy: f64, alpha: f64) {
    let inv = 1.0 / (hy * hy);
    let wall = 2.0 * (1.0 + hy * alpha) * inv;
    for j in 0..ny {
        let p = offset + j;
        let diag = if j == 0 || j == ny - 1 { wall } else { 2.0 * inv };
        entries.push((p, p, diag));
        if j + 1 < ny {
            let w = if j == 0 || j + 1 == ny - 1 { -SQRT_2 * inv } else { -inv };
            entries.push((p, p + 1, w));
            entries.push((p + 1, p, w));
        }
    }
}

/// One-dimensional Robin operator on `ny` nodes across `(0, d)`.
pub fn assemble_cross_section(alpha: f64, d: f64, ny: usize) -> Result<SparseOperator> {
    if ny < 16 {
        return Err(Error::GridTooCoarse { nx: 1, ny });
    }
    let hy = d / (ny - 1) as f64;
    let mut entries = Vec::with_capacity(3 * ny);
    push_cross_section(&mut entries, 0, ny, hy, alpha);
    SparseOperator::from_triplets(ny, entries)
}

/// Discrete `-Δ` on the truncated strip for the rectangular-well coupling.
pub fn assemble(config: &WellConfig, grid: &FdGrid) -> Result<SparseOperator> {
    config.validate()?;
    if grid.nx < 16 || grid.ny < 16 {
        return Err(Error::GridTooCoarse {
            nx: grid.nx,
            ny: grid.ny,
        });
    }
    if (grid.d - config.d).abs() > 1e-12 * config.d {
        return Err(Error::WidthMismatch(grid.d, config.d));
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let inv_x = 1.0 / (grid.hx * grid.hx);
    let mut entries = Vec::with_capacity(grid.len() * 5);
    for i in 0..nx {
        let alpha = cell_alpha(config, grid.x(i), grid.hx);
        let offset = grid.index(i, 0);
        push_cross_section(&mut entries, offset, ny, grid.hy, alpha);
        let end = i == 0 || i == nx - 1;
        let diag_x = match grid.closure {
            Closure::Neumann if end => inv_x,
            _ => 2.0 * inv_x,
        };
        for j in 0..ny {
            let p = offset + j;
            entries.push((p, p, diag_x));
            if i + 1 < nx {
                entries.push((p, p + ny, -inv_x));
                entries.push((p + ny, p, -inv_x));
            }
        }
    }
    SparseOperator::from_triplets(grid.len(), entries)
}
