//! Finite-difference reference solver for the rectangular well.
//!
//! The strip is truncated to `[-L, L] × [0, d]` and discretized on a uniform
//! grid. Eigenvalues below the discrete continuum threshold are computed on a
//! sequence of halved spacings, tracked by ordinal and Richardson-extrapolated
//! assuming `O(h²)` convergence.

mod assemble;
mod eigen;
mod grid;

pub use assemble::{assemble, assemble_cross_section, SparseOperator};
pub use eigen::{lowest_eigenpairs, EigenPairs};
pub use grid::{Closure, FdGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modematch::{ParitySector, WellConfig};

const EIGEN_TOL: f64 = 1e-10;
const MAX_COUNT: usize = 64;
// Values this close to the threshold belong to the continuum edge; the
// threshold itself comes from a separate solve and differs at roundoff.
const EDGE_SLACK: f64 = 1e-9;

/// Settings for [`oracle_bound_states`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Half-length of the truncated strip.
    pub l: f64,
    /// Number of halvings after the coarsest spacing.
    pub refinements: usize,
    /// Coarsest spacing.
    pub h0: f64,
    pub closure: Closure,
}

impl OracleSettings {
    /// Spacings `d/64, d/128, ...` down to `d/256` on a strip with `L = 8 max(a, d)`.
    pub fn for_config(config: &WellConfig) -> Self {
        OracleSettings {
            l: 8.0 * config.a.max(config.d),
            refinements: 2,
            h0: config.d / 64.0,
            closure: Closure::Dirichlet,
        }
    }

    pub fn spacing(&self, level: usize) -> f64 {
        self.h0 / (1u64 << level) as f64
    }
}

/// Lowest discrete eigenvalue of the cross-section with coupling `alpha`.
pub fn discrete_threshold(alpha: f64, d: f64, ny: usize) -> Result<f64> {
    let op = assemble_cross_section(alpha, d, ny)?;
    let e = lowest_eigenpairs(&op, 1, alpha.min(0.0) - 1.0, 1e-13)?;
    Ok(e.values[0])
}

/// Eigenvalues below the discrete threshold on a single grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleLevel {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Lowest eigenvalue of the outer cross-section on this grid.
    pub threshold: f64,
    pub shift: f64,
    pub eigenvalues: Vec<f64>,
    pub parities: Vec<ParitySector>,
    /// First eigenvalue at or above the threshold, if computed.
    pub first_above: Option<f64>,
    pub lanczos_steps: usize,
}

/// Parity of a grid function under `x → −x`.
fn parity_of(grid: &FdGrid, v: &[f64]) -> ParitySector {
    let (mut even, mut odd) = (0.0, 0.0);
    for i in 0..grid.nx {
        let m = grid.nx - 1 - i;
        for j in 0..grid.ny {
            let (p, q) = (v[grid.index(i, j)], v[grid.index(m, j)]);
            even += (p + q) * (p + q);
            odd += (p - q) * (p - q);
        }
    }
    if even >= odd {
        ParitySector::Symmetric
    } else {
        ParitySector::Antisymmetric
    }
}

/// Eigenvalues below the outer threshold on one grid.
pub fn solve_level(config: &WellConfig, grid: &FdGrid) -> Result<OracleLevel> {
    let op = assemble(config, grid)?;
    let threshold = discrete_threshold(config.alpha0, config.d, grid.ny)?;
    let bottom = discrete_threshold(config.alpha0.min(config.alpha1), config.d, grid.ny)?;
    // The x part is positive semidefinite and the cell couplings never drop
    // below min(α0, α1), so `bottom` bounds the spectrum from below.
    let shift = bottom - 1e-2 * config.energy_unit();
    let mut count = 4.min(op.dim());
    loop {
        let pairs = lowest_eigenpairs(&op, count, shift, EIGEN_TOL)?;
        let edge = threshold - EDGE_SLACK * threshold.abs();
        let last = *pairs.values.last().expect("count > 0");
        if last >= edge || count >= MAX_COUNT.min(op.dim()) {
            if last < edge {
                return Err(Error::InvalidParameter(format!(
                    "more than {count} eigenvalues below the threshold; enlarge h or shorten L"
                )));
            }
            let below = pairs.values.iter().take_while(|&&v| v < edge).count();
            return Ok(OracleLevel {
                h: grid.hx.max(grid.hy),
                nx: grid.nx,
                ny: grid.ny,
                threshold,
                shift,
                eigenvalues: pairs.values[..below].to_vec(),
                parities: pairs.vectors[..below].iter().map(|v| parity_of(grid, v)).collect(),
                first_above: pairs.values.get(below).copied(),
                lanczos_steps: pairs.steps,
            });
        }
        count = (2 * count).min(MAX_COUNT).min(op.dim());
    }
}

/// An extrapolated eigenvalue of the truncated strip.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleState {
    pub ordinal: usize,
    pub parity: ParitySector,
    pub lambda: f64,
    /// Raw values from coarsest to finest grid among the levels that found it.
    pub raw: Vec<f64>,
    pub error_estimate: f64,
    /// Combined discretization and truncation margin.
    pub margin: f64,
    /// Whether `lambda` is below the continuum threshold by more than `margin`.
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub config: WellConfig,
    pub settings: OracleSettings,
    pub levels: Vec<OracleLevel>,
    /// Every ordinal found on the finest grid, accepted or not.
    pub candidates: Vec<OracleState>,
    /// Continuum threshold of the outer cross-section.
    pub threshold: f64,
}

impl OracleResult {
    pub fn bound_states(&self) -> impl Iterator<Item = &OracleState> {
        self.candidates.iter().filter(|s| s.accepted)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.bound_states().map(|s| s.lambda).collect()
    }
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    fine + (fine - coarse) / 3.0
}

/// Bound states of the well from a refinement sequence of FD grids.
pub fn oracle_bound_states(config: &WellConfig, settings: &OracleSettings) -> Result<OracleResult> {
    config.validate()?;
    if settings.refinements < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least 2 refinements are needed for an error estimate, got {}",
            settings.refinements
        )));
    }
    if !(settings.l >= 4.0 * config.a.max(config.d)) {
        return Err(Error::InvalidParameter(format!(
            "L = {} is shorter than 4 max(a, d) = {}",
            settings.l,
            4.0 * config.a.max(config.d)
        )));
    }
    let threshold = config.threshold()?;
    let mut levels = Vec::with_capacity(settings.refinements + 1);
    for r in 0..=settings.refinements {
        let grid = FdGrid::with_spacing(settings.l, config.d, settings.spacing(r), settings.closure)?;
        levels.push(solve_level(config, &grid)?);
    }

    let finest = levels.last().expect("nonempty");
    let mut candidates = Vec::with_capacity(finest.eigenvalues.len());
    for (k, &fine) in finest.eigenvalues.iter().enumerate() {
        let raw: Vec<f64> = levels.iter().filter_map(|lv| lv.eigenvalues.get(k).copied()).collect();
        let n = raw.len();
        // Ordinals that appear only on the finer grids sit at the threshold;
        // fall back to the raw spread as the error.
        let complete = n == levels.len();
        let (lambda, error_estimate) = if complete && n >= 3 {
            let e1 = richardson(raw[n - 2], raw[n - 1]);
            let e0 = richardson(raw[n - 3], raw[n - 2]);
            (e1, (e1 - e0).abs())
        } else if n >= 2 {
            (richardson(raw[n - 2], raw[n - 1]), (raw[n - 1] - raw[n - 2]).abs())
        } else {
            (
                fine,
                (fine - finest.threshold)
                    .abs()
                    .max(finest.h * finest.h * config.energy_unit()),
            )
        };
        let kappa = (threshold - lambda).max(0.0).sqrt();
        let truncation = config.energy_unit() * (-2.0 * kappa * (settings.l - config.a)).exp();
        let margin = 3.0 * (error_estimate + truncation);
        candidates.push(OracleState {
            ordinal: k,
            parity: finest.parities[k],
            lambda,
            raw,
            error_estimate,
            margin,
            accepted: lambda < threshold - margin,
        });
    }
    Ok(OracleResult {
        config: *config,
        settings: *settings,
        levels,
        candidates,
        threshold,
    })
}
