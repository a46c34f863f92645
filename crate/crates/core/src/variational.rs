//! Variational test for a bound state below `E₁(α₀)`.
//!
//! The trial functions are `ψ_n(x, y) = φ_n(x) χ₁(y; α₀)` with the stretched
//! bump `φ_n(x) = n^{-1/2} φ(x/n)`. Because `χ₁` satisfies
//! `∫|χ₁'|² + α₀(χ₁(0)² + χ₁(d)²) = E₁(α₀)`, the form separates into
//!
//! ```text
//! Q[ψ_n] = n⁻² ‖φ'‖² + (χ₁(0)² + χ₁(d)²) ∫ (α(x) − α₀) φ_n(x)² dx
//! ```
//!
//! and any `n` with `Q < 0` proves `inf σ(H) < E₁(α₀)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modematch::WellConfig;
use crate::quad::{gauss64, simpson_doubling};
use crate::transverse::TransversalMode;

/// Levels in the well integral may differ by at most this much (relative).
const WELL_INTEGRAL_REL_TOL: f64 = 1e-8;

/// Smooth even bump: `1` on `[-p, p]`, `0` outside `(-s, s)`, joined by the
/// `exp(-1/t)` transition and then scaled to unit `L²` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    plateau: f64,
    support: f64,
    scale: f64,
    derivative_norm_sq: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile::new(0.125, 0.25).expect("valid default bump")
    }
}

impl BumpProfile {
    pub fn new(plateau: f64, support: f64) -> Result<Self> {
        if !(plateau >= 0.0 && support > plateau && support.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bump needs 0 <= plateau < support, got plateau = {plateau}, support = {support}"
            )));
        }
        let mut bump = BumpProfile {
            plateau,
            support,
            scale: 1.0,
            derivative_norm_sq: 0.0,
        };
        let ramp_sq = simpson_doubling(|t| bump.shape(t).powi(2), plateau, support, 64, 1e-14, 16)?;
        let mass = 2.0 * (plateau + ramp_sq);
        bump.scale = 1.0 / mass.sqrt();
        let slope_sq = simpson_doubling(|t| bump.shape_derivative(t).powi(2), plateau, support, 64, 1e-14, 16)?;
        bump.derivative_norm_sq = 2.0 * bump.scale * bump.scale * slope_sq;
        Ok(bump)
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    /// `‖φ'‖²_{L²(R)}`.
    pub fn derivative_norm_sq(&self) -> f64 {
        self.derivative_norm_sq
    }

    /// Unscaled profile as a function of `t = |x|`.
    fn shape(&self, t: f64) -> f64 {
        let t = t.abs();
        if t <= self.plateau {
            return 1.0;
        }
        if t >= self.support {
            return 0.0;
        }
        let w = self.support - self.plateau;
        let (gu, gv) = (
            smooth_step_seed((self.support - t) / w),
            smooth_step_seed((t - self.plateau) / w),
        );
        gu / (gu + gv)
    }

    fn shape_derivative(&self, t: f64) -> f64 {
        let at = t.abs();
        if at <= self.plateau || at >= self.support {
            return 0.0;
        }
        let w = self.support - self.plateau;
        let (u, v) = ((self.support - at) / w, (at - self.plateau) / w);
        let (gu, gv) = (smooth_step_seed(u), smooth_step_seed(v));
        let (du, dv) = (gu / (u * u), gv / (v * v));
        let s = gu + gv;
        let d = -(du * gv + gu * dv) / (w * s * s);
        if t < 0.0 {
            -d
        } else {
            d
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.shape(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.scale * self.shape_derivative(x)
    }
}

fn smooth_step_seed(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        (-1.0 / z).exp()
    }
}

/// `φ_n(x) = n^{-1/2} φ(x/n)`.
pub fn trial_scale(bump: &BumpProfile, n: usize, x: f64) -> f64 {
    let nf = n as f64;
    bump.eval(x / nf) / nf.sqrt()
}

/// `φ_n'(x) = n^{-3/2} φ'(x/n)`.
pub fn trial_scale_derivative(bump: &BumpProfile, n: usize, x: f64) -> f64 {
    let nf = n as f64;
    bump.derivative(x / nf) / (nf * nf.sqrt())
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("trial index starts at 1".into()))
    } else {
        Ok(())
    }
}

/// `Q[ψ_n]` by the separable reduction. The well integral
/// `∫_{-a}^{a} φ_n²` is computed by Simpson doubling from `quad_points` panels.
pub fn q_form(config: &WellConfig, bump: &BumpProfile, n: usize, quad_points: usize) -> Result<f64> {
    check_order(n)?;
    if quad_points < 64 {
        return Err(Error::InvalidParameter(format!(
            "quad_points must be at least 64, got {quad_points}"
        )));
    }
    config.validate()?;
    let chi = TransversalMode::new(&config.outer_cross_section(), 1)?;
    let trace_sq = chi.eval(0.0).powi(2) + chi.eval(config.d).powi(2);
    let nf = n as f64;
    // ∫_{-a}^{a} φ_n² = ∫_{-a/n}^{a/n} φ², and φ vanishes beyond the support.
    let half = (config.a / nf).min(bump.support);
    let well = match simpson_doubling(|t| bump.eval(t).powi(2), -half, half, quad_points, 1e-13, 10) {
        Ok(v) => v,
        Err(Error::QuadratureNonConvergence { prev, last })
            if (last - prev).abs() <= WELL_INTEGRAL_REL_TOL * last.abs().max(prev.abs()) =>
        {
            last
        }
        Err(e) => return Err(e),
    };
    Ok(bump.derivative_norm_sq() / (nf * nf) + trace_sq * (config.alpha1 - config.alpha0) * well)
}

/// `Q[ψ_n]` from its definition, `h[ψ_n] − E₁(α₀) ‖ψ_n‖²`, by tensor
/// Gauss–Legendre quadrature over `supp φ_n × (0, d)`. Used to check the
/// separable reduction.
pub fn q_form_direct(config: &WellConfig, bump: &BumpProfile, n: usize) -> Result<f64> {
    check_order(n)?;
    config.validate()?;
    let chi = TransversalMode::new(&config.outer_cross_section(), 1)?;
    let e1 = chi.energy();
    let nf = n as f64;
    let reach = bump.support * nf;
    let mut cuts = vec![-reach, reach, -bump.plateau * nf, bump.plateau * nf];
    if config.a < reach {
        cuts.extend([-config.a, config.a]);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let rule = gauss64();
    let y_nodes: Vec<(f64, f64)> = rule.mapped(0.0, config.d).collect();
    let (c0, cd) = (chi.eval(0.0), chi.eval(config.d));
    let mut volume = 0.0;
    let mut boundary = 0.0;
    for w in cuts.windows(2) {
        let panels = 16;
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let lo = w[0] + p as f64 * h;
            for (x, wx) in rule.mapped(lo, lo + h) {
                let f = trial_scale(bump, n, x);
                let df = trial_scale_derivative(bump, n, x);
                for &(y, wy) in &y_nodes {
                    let (g, dg) = (chi.eval(y), chi.derivative(y));
                    let grad_sq = (df * g).powi(2) + (f * dg).powi(2);
                    volume += wx * wy * (grad_sq - e1 * (f * g).powi(2));
                }
                boundary += wx * config.alpha_at(x) * f * f * (c0 * c0 + cd * cd);
            }
        }
    }
    Ok(volume + boundary)
}

/// Outcome of [`existence_test`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    /// Some trial function has `Q < 0`.
    BoundStateExists,
    /// Hypothesis holds but no `n ≤ n_max` gave `Q < 0`.
    Inconclusive,
    /// `∫(α − α₀) ≥ 0`; the test makes no claim.
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub n_values: Vec<usize>,
    pub q_values: Vec<f64>,
    pub first_negative_n: Option<usize>,
    /// `∫_R (α(x) − α₀) dx = 2a(α₁ − α₀)`.
    pub coupling_integral: f64,
    pub hypothesis_holds: bool,
    pub conclusion: Conclusion,
    pub config: WellConfig,
}

/// Evaluates `Q[ψ_n]` for `n = 1..=n_max`.
pub fn existence_test(config: &WellConfig, bump: &BumpProfile, n_max: usize) -> Result<QReport> {
    existence_test_with(config, bump, n_max, 64)
}

pub fn existence_test_with(
    config: &WellConfig,
    bump: &BumpProfile,
    n_max: usize,
    quad_points: usize,
) -> Result<QReport> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let n_values: Vec<usize> = (1..=n_max).collect();
    let q_values = n_values
        .iter()
        .map(|&n| q_form(config, bump, n, quad_points))
        .collect::<Result<Vec<_>>>()?;
    let coupling_integral = 2.0 * config.a * (config.alpha1 - config.alpha0);
    let hypothesis_holds = coupling_integral < 0.0;
    let first_negative_n = n_values.iter().zip(&q_values).find(|(_, q)| **q < 0.0).map(|(n, _)| *n);
    let conclusion = match (hypothesis_holds, first_negative_n) {
        (false, _) => Conclusion::HypothesisViolated,
        (true, Some(_)) => Conclusion::BoundStateExists,
        (true, None) => Conclusion::Inconclusive,
    };
    Ok(QReport {
        n_values,
        q_values,
        first_negative_n,
        coupling_integral,
        hypothesis_holds,
        conclusion,
        config: *config,
    })
}
