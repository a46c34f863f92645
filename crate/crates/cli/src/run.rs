use std::f64::consts::PI;

use rayon::prelude::*;
use robinwave::{
    existence_test, minimax_brackets, oracle_bound_states, wavefunction, BoundState, BumpProfile, ModeMatcher,
    OracleResult, ParitySector, QReport, WavefunctionGrid, WellConfig,
};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SweepParameter};
use crate::CliError;

/// One bound state at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub sweep_value: f64,
    pub sector: ParitySector,
    /// Ordinal by energy across both sectors, starting at 1.
    pub n: usize,
    pub lambda: f64,
    /// `λ (d/π)²`.
    pub lambda_pi2: f64,
    pub sigma_min: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// Gap to the second state, or to `E₁(α₀)` when there is only one; set
    /// on the `n = 1` row.
    pub gap1: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SpectrumRow>,
}

impl SweepResult {
    fn sort(&mut self) {
        self.rows.sort_by(|x, y| {
            x.sweep_value
                .total_cmp(&y.sweep_value)
                .then(x.lambda.total_cmp(&y.lambda))
        });
    }
}

fn bound_states(cfg: &RunConfig, well: &WellConfig) -> Result<Vec<BoundState>, CliError> {
    let m = &cfg.matching;
    ModeMatcher::new(well, m.n)
        .and_then(|mm| mm.all_bound_states(m.scan_points, m.tol))
        .map_err(CliError::numerical(format!(
            "mode matching at alpha0={}, alpha1={}, a={}",
            well.alpha0, well.alpha1, well.a
        )))
}

fn spectrum_rows(cfg: &RunConfig, well: &WellConfig, sweep_value: f64) -> Result<Vec<SpectrumRow>, CliError> {
    let states = bound_states(cfg, well)?;
    let unit = (well.d / PI).powi(2);
    let threshold = well.threshold().map_err(CliError::numerical("threshold"))?;
    let gap1 = match states.as_slice() {
        [] => None,
        [one] => Some(threshold - one.lambda),
        [first, second, ..] => Some(second.lambda - first.lambda),
    };
    states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let bracket = minimax_brackets(well, k + 1).map_err(CliError::numerical("minimax brackets"))?;
            Ok(SpectrumRow {
                sweep_value,
                sector: s.parity,
                n: k + 1,
                lambda: s.lambda,
                lambda_pi2: s.lambda * unit,
                sigma_min: s.sigma_min,
                bracket_lo: bracket.lower,
                bracket_hi: bracket.upper,
                gap1: if k == 0 { gap1 } else { None },
            })
        })
        .collect()
}

/// Bound states of the configured well; the sweep value column holds `a/d`.
pub fn run_spectrum(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    let well = cfg.well_config()?;
    let mut result = SweepResult {
        rows: spectrum_rows(cfg, &well, well.a / well.d)?,
    };
    result.sort();
    Ok(result)
}

/// A sweep over one family of couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSweep {
    pub label: String,
    pub parameter: SweepParameter,
    pub alpha0: f64,
    pub alpha1: f64,
    pub result: SweepResult,
}

fn with_value(base: &WellConfig, parameter: SweepParameter, value: f64) -> Result<WellConfig, CliError> {
    let mut w = *base;
    match parameter {
        SweepParameter::AOverD => w.a = value * w.d,
        SweepParameter::Alpha0 => w.alpha0 = value,
        SweepParameter::Alpha1 => w.alpha1 = value,
    }
    w.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(w)
}

fn sweep_one(
    cfg: &RunConfig,
    base: &WellConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<SweepResult, CliError> {
    let chunks = values
        .par_iter()
        .map(|&v| spectrum_rows(cfg, &with_value(base, parameter, v)?, v))
        .collect::<Result<Vec<_>, _>>()?;
    let mut result = SweepResult {
        rows: chunks.into_iter().flatten().collect(),
    };
    result.sort();
    Ok(result)
}

/// Spectra over the configured sweep, one entry per coupling family (or a
/// single entry for the configured well).
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<NamedSweep>, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the sweep command needs a [sweep] section".into()))?;
    let base = cfg.well_config()?;
    let families: Vec<(f64, f64)> = if sweep.families.is_empty() {
        vec![(base.alpha0, base.alpha1)]
    } else {
        sweep.families.iter().map(|&[a0, a1]| (a0, a1)).collect()
    };
    families
        .into_iter()
        .map(|(alpha0, alpha1)| {
            let well = WellConfig { alpha0, alpha1, ..base };
            Ok(NamedSweep {
                label: format!("alpha0={alpha0}_alpha1={alpha1}"),
                parameter: sweep.parameter,
                alpha0,
                alpha1,
                result: sweep_one(cfg, &well, sweep.parameter, &sweep.values)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct WavefunctionExport {
    pub label: String,
    pub state: BoundState,
    pub grid: WavefunctionGrid,
    pub second_moment: f64,
}

fn export_wavefunction(cfg: &RunConfig, well: &WellConfig, label: String) -> Result<WavefunctionExport, CliError> {
    let w = &cfg.wavefunction;
    let states = bound_states(cfg, well)?;
    let Some(state) = states.into_iter().nth(w.state - 1) else {
        return Err(CliError::Numerical {
            context: format!("wavefunction for {label}"),
            source: robinwave::Error::InvalidParameter(format!("no bound state with ordinal {}", w.state)),
        });
    };
    let threshold = well.threshold().map_err(CliError::numerical("threshold"))?;
    let kappa = (threshold - state.lambda).sqrt();
    let extent = w.x_extent.unwrap_or(well.a + 12.0 / kappa);
    // Mirror pairs are exact negatives, so symmetric states export symmetric.
    let last = (w.nx - 1) as f64;
    let xs: Vec<f64> = (0..w.nx).map(|i| extent * (2.0 * i as f64 - last) / last).collect();
    let ys: Vec<f64> = (0..w.ny).map(|j| well.d * j as f64 / (w.ny - 1) as f64).collect();
    let grid =
        wavefunction(well, &state, &xs, &ys).map_err(CliError::numerical(format!("wavefunction for {label}")))?;
    Ok(WavefunctionExport {
        label,
        second_moment: grid.x_second_moment(),
        state,
        grid,
    })
}

/// Sampled wavefunctions: one per `alpha1` sweep value, or a single one.
pub fn run_wavefunction(cfg: &RunConfig) -> Result<Vec<WavefunctionExport>, CliError> {
    let base = cfg.well_config()?;
    match &cfg.sweep {
        Some(s) if s.parameter == SweepParameter::Alpha1 => s
            .values
            .par_iter()
            .map(|&v| {
                export_wavefunction(
                    cfg,
                    &with_value(&base, SweepParameter::Alpha1, v)?,
                    format!("alpha1={v}"),
                )
            })
            .collect(),
        _ => Ok(vec![export_wavefunction(cfg, &base, "wavefunction".into())?]),
    }
}

/// Mode-matching states paired by ordinal with oracle states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub sector_mm: Option<ParitySector>,
    pub lambda_mm: Option<f64>,
    pub sector_fd: Option<ParitySector>,
    pub lambda_fd: Option<f64>,
    pub fd_error: Option<f64>,
    pub fd_margin: Option<f64>,
    pub diff: Option<f64>,
}

pub fn run_oracle_compare(cfg: &RunConfig) -> Result<(Vec<ComparisonRow>, OracleResult), CliError> {
    let well = cfg.well_config()?;
    let mm = bound_states(cfg, &well)?;
    let oracle = oracle_bound_states(&well, &cfg.oracle_settings(&well))
        .map_err(CliError::numerical("finite-difference oracle"))?;
    let fd: Vec<_> = oracle.bound_states().collect();
    let rows = (0..mm.len().max(fd.len()))
        .map(|k| {
            let m = mm.get(k);
            let f = fd.get(k);
            ComparisonRow {
                n: k + 1,
                sector_mm: m.map(|s| s.parity),
                lambda_mm: m.map(|s| s.lambda),
                sector_fd: f.map(|s| s.parity),
                lambda_fd: f.map(|s| s.lambda),
                fd_error: f.map(|s| s.error_estimate),
                fd_margin: f.map(|s| s.margin),
                diff: m.zip(f).map(|(m, f)| m.lambda - f.lambda),
            }
        })
        .collect();
    Ok((rows, oracle))
}

pub fn run_existence(cfg: &RunConfig) -> Result<QReport, CliError> {
    let well = cfg.well_config()?;
    let e = &cfg.existence;
    let bump = BumpProfile::new(e.plateau, e.support).map_err(|err| CliError::Config(err.to_string()))?;
    existence_test(&well, &bump, e.n_max).map_err(CliError::numerical("existence test"))
}
