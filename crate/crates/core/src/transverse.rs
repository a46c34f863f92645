//! The one-dimensional Robin eigenproblem on the cross-section `(0, d)`.
//!
//! `-χ'' = E χ` with `-χ'(0) + α χ(0) = 0` and `χ'(d) + α χ(d) = 0`.
//! Eigenvalues are located by bisection in the wavenumber `k = √E`, where the
//! n-th root is confined to `((n-1)π/d, nπ/d)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss64;

/// Relative bisection tolerance on `k`.
const K_REL_TOL: f64 = 1e-13;
/// Above this value of `α d` the dispersion function is divided by `1 + α²`.
const RESCALE_ALPHA_D: f64 = 1e8;
/// Below this value of `|k_a - k_b| d` overlaps fall back to quadrature.
const NEAR_DEGENERATE: f64 = 1e-6;

/// Uniform Robin coupling `alpha` on both walls of a strip of width `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinCrossSection {
    alpha: f64,
    d: f64,
}

impl RobinCrossSection {
    pub fn new(alpha: f64, d: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Robin coupling must be positive and finite, got {alpha}"
            )));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "strip width must be positive and finite, got {d}"
            )));
        }
        Ok(RobinCrossSection { alpha, d })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// `f(E; α) = 2α√E cos(√E d) + (α² − E) sin(√E d)`.
///
/// For `α d > 1e8` the value is returned divided by `1 + α²` so that it stays
/// representable; only its sign and zeros matter to callers. `E = 0` is always
/// a (spurious) zero.
pub fn dispersion(energy: f64, cs: &RobinCrossSection) -> f64 {
    debug_assert!(energy >= 0.0);
    dispersion_k(energy.max(0.0).sqrt(), cs)
}

fn dispersion_k(k: f64, cs: &RobinCrossSection) -> f64 {
    let (s, c) = (k * cs.d).sin_cos();
    let a = cs.alpha;
    if a * cs.d > RESCALE_ALPHA_D {
        // (2αk c + (α² − k²) s) / (1 + α²), written to avoid forming α².
        let inv = 1.0 / a;
        let denom = 1.0 + inv * inv;
        (2.0 * k * inv * c + (1.0 - (k * inv) * (k * inv)) * s) / denom
    } else {
        2.0 * a * k * c + (a * a - k * k) * s
    }
}

/// Wavenumber `k_n = √E_n(α)` of the n-th transversal mode (`n ≥ 1`).
pub fn transversal_wavenumber(cs: &RobinCrossSection, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("mode index starts at 1".into()));
    }
    let d = cs.d;
    let mut lo = ((n - 1) as f64 * PI / d).max(1e-12 / d);
    let mut hi = n as f64 * PI / d;
    let (bracket_lo, bracket_hi) = (lo, hi);
    let mut f_lo = dispersion_k(lo, cs);
    let f_hi = dispersion_k(hi, cs);
    if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketViolation {
            n,
            lo: bracket_lo * bracket_lo,
            hi: bracket_hi * bracket_hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= K_REL_TOL * mid {
            break;
        }
        let f_mid = dispersion_k(mid, cs);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The first `n_max` transversal eigenvalues `E_1 < … < E_{n_max}`.
pub fn transversal_eigenvalues(cs: &RobinCrossSection, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    (1..=n_max)
        .map(|n| transversal_wavenumber(cs, n).map(|k| k * k))
        .collect()
}

/// Normalized transversal eigenfunction
/// `χ_n(y) = N ((α/k) sin(ky) + cos(ky))` with `N > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransversalMode {
    n: usize,
    energy: f64,
    k: f64,
    norm: f64,
    cross_section: RobinCrossSection,
}

impl TransversalMode {
    pub fn new(cs: &RobinCrossSection, n: usize) -> Result<Self> {
        let k = transversal_wavenumber(cs, n)?;
        let norm = 1.0 / unnormalized_square_integral(cs.alpha / k, k, cs.d).sqrt();
        Ok(TransversalMode {
            n,
            energy: k * k,
            k,
            norm,
            cross_section: *cs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Normalization constant, equal to `χ_n(0)`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn cross_section(&self) -> &RobinCrossSection {
        &self.cross_section
    }

    pub fn alpha(&self) -> f64 {
        self.cross_section.alpha
    }

    pub fn d(&self) -> f64 {
        self.cross_section.d
    }

    /// `+1` for modes even about `y = d/2` (odd `n`), `-1` otherwise.
    pub fn reflection_sign(&self) -> f64 {
        if self.n % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        debug_assert!(
            (-1e-12 * self.d()..=self.d() * (1.0 + 1e-12)).contains(&y),
            "y = {y} outside [0, {}]",
            self.d()
        );
        let (s, c) = (self.k * y).sin_cos();
        self.norm * (self.alpha() / self.k * s + c)
    }

    pub fn derivative(&self, y: f64) -> f64 {
        let (s, c) = (self.k * y).sin_cos();
        self.norm * (self.alpha() * c - self.k * s)
    }

    /// Upper bound on `max |χ_n|` over `[0, d]`, from `|A sin + cos| ≤ √(1 + A²)`.
    pub fn sup_norm(&self) -> f64 {
        let a = self.alpha() / self.k;
        self.norm * (1.0 + a * a).sqrt()
    }
}

/// Closed-form `∫₀^d (A sin ky + cos ky)² dy`.
fn unnormalized_square_integral(a: f64, k: f64, d: f64) -> f64 {
    let s2 = (2.0 * k * d).sin() / (4.0 * k);
    let skd = (k * d).sin();
    a * a * (0.5 * d - s2) + 0.5 * d + s2 + a * skd * skd / k
}

pub fn transversal_mode(cs: &RobinCrossSection, n: usize) -> Result<TransversalMode> {
    TransversalMode::new(cs, n)
}

/// Pointwise value `χ_n(y; α)` for `y ∈ [0, d]`.
pub fn mode_eval(mode: &TransversalMode, y: f64) -> f64 {
    mode.eval(y)
}

/// `∫₀^d χ_a(y) χ_b(y) dy`.
///
/// Closed form by product-to-sum, except for `|k_a − k_b| d ≤ 1e-6` where
/// composite 64-point Gauss–Legendre quadrature is used.
pub fn overlap(ma: &TransversalMode, mb: &TransversalMode) -> Result<f64> {
    let d = ma.d();
    if (d - mb.d()).abs() > 1e-14 * d.max(mb.d()) {
        return Err(Error::WidthMismatch(d, mb.d()));
    }
    let (ka, kb) = (ma.k, mb.k);
    if (ka - kb).abs() * d <= NEAR_DEGENERATE {
        let panels = 1 + (ka.max(kb) * d / 16.0) as usize;
        let v = gauss64().integrate_composite(0.0, d, panels, |y| ma.eval(y) * mb.eval(y));
        return Ok(v);
    }
    let (a, b) = (ma.alpha() / ka, mb.alpha() / kb);
    let (p, q) = (ka + kb, ka - kb);
    let (cp, cq) = (cos_integral(p, d), cos_integral(q, d));
    let (sp, sq) = (sin_integral(p, d), sin_integral(q, d));
    let ss = 0.5 * (cq - cp);
    let cc = 0.5 * (cq + cp);
    let sc = 0.5 * (sp + sq);
    let cs = 0.5 * (sp - sq);
    Ok(ma.norm * mb.norm * (a * b * ss + cc + a * sc + b * cs))
}

/// `∫₀^d cos(r y) dy`.
fn cos_integral(r: f64, d: f64) -> f64 {
    d * sinc(r * d)
}

/// `∫₀^d sin(r y) dy = 2 sin²(rd/2)/r`, evaluated without cancellation.
fn sin_integral(r: f64, d: f64) -> f64 {
    let s = sinc(0.5 * r * d);
    0.5 * r * d * d * s * s
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
