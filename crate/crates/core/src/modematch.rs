//! Mode matching for the rectangular well `α(x) = α₁` for `|x| < a`,
//! `α(x) = α₀` otherwise.
//!
//! On each side of `x = a` the solution is expanded in transversal modes: the
//! inner modes carry `cosh`/`sinh` profiles (symmetric/antisymmetric sector),
//! the outer modes decay like `exp(-k_m (x - a))`. Continuity of `ψ` and
//! `∂ₓψ` at `x = a`, projected on the outer modes, gives `C(λ) a = 0`:
//!
//! ```text
//! C_mn = (L_n(λ) + k_m) O_mn,   O_mn = ∫ χ_n(y; α₁) χ_m(y; α₀) dy
//! ```
//!
//! with `L_n` from [`axial_stiffness`]. Bound states are the `λ` in
//! `(E₁(α₁), E₁(α₀))` where the truncated `N × N` matrix is singular. They are
//! located by scanning the smallest singular value, separately on the two
//! checkerboard blocks of `C` (modes even/odd about the strip centre line).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussRule;
use crate::transverse::{overlap, RobinCrossSection, TransversalMode};

/// Relative distance to a stiffness pole treated as "at the pole".
const POLE_REL_TOL: f64 = 1e-12;
/// Relative margin by which the scan keeps away from stiffness poles.
const POLE_MARGIN: f64 = 1e-9;
/// Accept a minimizer when `σ_min < ACCEPT_RATIO · ‖C‖`.
pub const ACCEPT_RATIO: f64 = 1e-8;
/// [`null_vector`] requires `σ_min < NULL_RATIO · ‖C‖`.
pub const NULL_RATIO: f64 = 1e-6;
/// Quadrature order used for the residual recorded on every bound state.
const RESIDUAL_QUAD: usize = 256;

/// Rectangular-well coupling profile on a strip of width `d`.
///
/// Construction only checks positivity; `alpha1 >= alpha0` is representable
/// (it simply has no bound states) so that degenerate and inverted profiles can
/// be fed through the same pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellConfig {
    pub alpha0: f64,
    pub alpha1: f64,
    pub a: f64,
    pub d: f64,
}

impl WellConfig {
    pub fn new(alpha0: f64, alpha1: f64, a: f64, d: f64) -> Result<Self> {
        let cfg = WellConfig { alpha0, alpha1, a, d };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha0", self.alpha0),
            ("alpha1", self.alpha1),
            ("a", self.a),
            ("d", self.d),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// True for a genuine well, `α₁ < α₀`.
    pub fn is_well(&self) -> bool {
        self.alpha1 < self.alpha0
    }

    pub fn outer_cross_section(&self) -> RobinCrossSection {
        RobinCrossSection::new(self.alpha0, self.d).expect("validated config")
    }

    pub fn inner_cross_section(&self) -> RobinCrossSection {
        RobinCrossSection::new(self.alpha1, self.d).expect("validated config")
    }

    /// Coupling at position `x`.
    pub fn alpha_at(&self, x: f64) -> f64 {
        if x.abs() < self.a {
            self.alpha1
        } else {
            self.alpha0
        }
    }

    /// Bottom of the essential spectrum, `E₁(α₀)`.
    pub fn threshold(&self) -> Result<f64> {
        TransversalMode::new(&self.outer_cross_section(), 1).map(|m| m.energy())
    }

    /// Neumann lower bound of the spectrum, `E₁(α₁)`.
    pub fn floor(&self) -> Result<f64> {
        TransversalMode::new(&self.inner_cross_section(), 1).map(|m| m.energy())
    }

    /// `(π/d)²`, the energy unit used in reports.
    pub fn energy_unit(&self) -> f64 {
        (PI / self.d).powi(2)
    }
}

/// Reflection parity about `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParitySector {
    /// Even in `x`; Neumann condition on the segment `x = 0`.
    Symmetric,
    /// Odd in `x`; Dirichlet condition on the segment `x = 0`.
    Antisymmetric,
}

impl ParitySector {
    pub const BOTH: [ParitySector; 2] = [ParitySector::Symmetric, ParitySector::Antisymmetric];

    pub fn as_str(&self) -> &'static str {
        match self {
            ParitySector::Symmetric => "symmetric",
            ParitySector::Antisymmetric => "antisymmetric",
        }
    }

    /// Sign picked up by `ψ` under `x ↦ -x`.
    pub fn sign(&self) -> f64 {
        match self {
            ParitySector::Symmetric => 1.0,
            ParitySector::Antisymmetric => -1.0,
        }
    }
}

impl std::fmt::Display for ParitySector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ParitySector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" | "s" => Ok(ParitySector::Symmetric),
            "antisymmetric" | "a" => Ok(ParitySector::Antisymmetric),
            _ => Err(Error::InvalidParameter(format!("unknown parity sector {s:?}"))),
        }
    }
}

/// Logarithmic derivative `∂ₓ φ_n / φ_n` at `x = a` of the inner profile.
///
/// With `l² = E_inner − λ`: `l tanh(la)` / `l coth(la)` below `E_inner`, the
/// analytic continuation `−κ tan(κa)` / `κ cot(κa)` above it (`κ² = λ − E_inner`),
/// and `0` / `1/a` at `λ = E_inner`.
pub fn axial_stiffness(lambda: f64, e_inner: f64, a: f64, parity: ParitySector) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "well half-width must be positive, got {a}"
        )));
    }
    let gap = e_inner - lambda;
    if gap > 0.0 {
        let l = gap.sqrt();
        let x = l * a;
        Ok(match parity {
            ParitySector::Symmetric => l * x.tanh(),
            ParitySector::Antisymmetric if x < 1e-6 => (1.0 + x * x / 3.0) / a,
            ParitySector::Antisymmetric => l / x.tanh(),
        })
    } else if gap < 0.0 {
        let kappa = (-gap).sqrt();
        let x = kappa * a;
        check_pole(lambda, e_inner, a, x, parity)?;
        Ok(match parity {
            ParitySector::Symmetric => -kappa * x.tan(),
            ParitySector::Antisymmetric if x < 1e-6 => (1.0 - x * x / 3.0) / a,
            ParitySector::Antisymmetric => kappa / x.tan(),
        })
    } else {
        Ok(match parity {
            ParitySector::Symmetric => 0.0,
            ParitySector::Antisymmetric => 1.0 / a,
        })
    }
}

fn check_pole(lambda: f64, e_inner: f64, a: f64, kappa_a: f64, parity: ParitySector) -> Result<()> {
    let pole = match parity {
        ParitySector::Symmetric => {
            let j = (kappa_a / PI - 0.5).round().max(0.0);
            e_inner + ((j + 0.5) * PI / a).powi(2)
        }
        ParitySector::Antisymmetric => {
            let j = (kappa_a / PI).round().max(1.0);
            e_inner + (j * PI / a).powi(2)
        }
    };
    if (lambda - pole).abs() <= POLE_REL_TOL * pole.abs() {
        Err(Error::Pole {
            lambda,
            pole,
            rel_tol: POLE_REL_TOL,
        })
    } else {
        Ok(())
    }
}

/// Stiffness poles of one sector lying strictly inside `(lo, hi)`, sorted.
pub fn stiffness_poles(inner_energies: &[f64], a: f64, parity: ParitySector, lo: f64, hi: f64) -> Vec<f64> {
    let mut poles = Vec::new();
    for &e in inner_energies {
        let mut j = 0usize;
        loop {
            let q = match parity {
                ParitySector::Symmetric => j as f64 + 0.5,
                ParitySector::Antisymmetric => (j + 1) as f64,
            };
            let p = e + (q * PI / a).powi(2);
            if p >= hi {
                break;
            }
            if p > lo {
                poles.push(p);
            }
            j += 1;
        }
    }
    poles.sort_by(f64::total_cmp);
    poles
}

/// Transversal modes and overlap matrix of one configuration at one
/// truncation order. Independent of `λ` and shared by every trial energy.
#[derive(Debug, Clone)]
pub struct ModeTables {
    config: WellConfig,
    inner: Vec<TransversalMode>,
    outer: Vec<TransversalMode>,
    /// `O[(m, n)] = ∫ χ_n(α₁) χ_m(α₀)`; exactly zero for odd `m + n`.
    overlaps: DMatrix<f64>,
}

impl ModeTables {
    pub fn new(config: &WellConfig, n: usize) -> Result<Self> {
        config.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter("truncation order must be positive".into()));
        }
        let inner_cs = config.inner_cross_section();
        let outer_cs = config.outer_cross_section();
        let inner = (1..=n)
            .map(|i| TransversalMode::new(&inner_cs, i))
            .collect::<Result<Vec<_>>>()?;
        let outer = (1..=n)
            .map(|i| TransversalMode::new(&outer_cs, i))
            .collect::<Result<Vec<_>>>()?;
        let mut overlaps = DMatrix::zeros(n, n);
        for (m, om) in outer.iter().enumerate() {
            for (j, inn) in inner.iter().enumerate() {
                if (m + j) % 2 == 0 {
                    overlaps[(m, j)] = overlap(inn, om)?;
                }
            }
        }
        Ok(ModeTables {
            config: *config,
            inner,
            outer,
            overlaps,
        })
    }

    pub fn config(&self) -> &WellConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.inner.len()
    }

    pub fn inner_modes(&self) -> &[TransversalMode] {
        &self.inner
    }

    pub fn outer_modes(&self) -> &[TransversalMode] {
        &self.outer
    }

    pub fn overlaps(&self) -> &DMatrix<f64> {
        &self.overlaps
    }

    pub fn inner_energies(&self) -> Vec<f64> {
        self.inner.iter().map(|m| m.energy()).collect()
    }

    pub fn outer_energies(&self) -> Vec<f64> {
        self.outer.iter().map(|m| m.energy()).collect()
    }

    /// Row-scaled matching matrix at trial energy `lambda`.
    pub fn system(self: &Arc<Self>, parity: ParitySector, lambda: f64) -> Result<MatchingSystem> {
        let n = self.order();
        let stiffness = self
            .inner
            .iter()
            .map(|m| axial_stiffness(lambda, m.energy(), self.config.a, parity))
            .collect::<Result<Vec<_>>>()?;
        let k_outer: Vec<f64> = self
            .outer
            .iter()
            .map(|m| (m.energy() - lambda).max(0.0).sqrt())
            .collect();
        let mut c = DMatrix::zeros(n, n);
        for m in 0..n {
            let scale = 1.0 / (1.0 + k_outer[m]);
            for j in 0..n {
                let o = self.overlaps[(m, j)];
                if o != 0.0 {
                    c[(m, j)] = (stiffness[j] + k_outer[m]) * o * scale;
                }
            }
        }
        Ok(MatchingSystem {
            tables: Arc::clone(self),
            parity,
            lambda,
            c,
            stiffness,
            k_outer,
        })
    }
}

/// The truncated matching matrix at one trial energy.
#[derive(Debug, Clone)]
pub struct MatchingSystem {
    tables: Arc<ModeTables>,
    parity: ParitySector,
    lambda: f64,
    /// `C_mn / (1 + k_m)`; the scaling leaves the null space unchanged.
    c: DMatrix<f64>,
    stiffness: Vec<f64>,
    k_outer: Vec<f64>,
}

impl MatchingSystem {
    pub fn config(&self) -> &WellConfig {
        &self.tables.config
    }

    pub fn parity(&self) -> ParitySector {
        self.parity
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn overlaps(&self) -> &DMatrix<f64> {
        &self.tables.overlaps
    }

    pub fn tables(&self) -> &Arc<ModeTables> {
        &self.tables
    }

    /// `L_n(λ)` for each inner mode.
    pub fn stiffness(&self) -> &[f64] {
        &self.stiffness
    }

    /// `k_m = √(E_m(α₀) − λ)` for each outer mode.
    pub fn outer_momenta(&self) -> &[f64] {
        &self.k_outer
    }

    pub fn inner_energies(&self) -> Vec<f64> {
        self.tables.inner_energies()
    }

    pub fn outer_energies(&self) -> Vec<f64> {
        self.tables.outer_energies()
    }

    /// Smallest singular value of each checkerboard block: index 0 holds the
    /// modes even about `y = d/2` (odd `n`), index 1 the odd ones.
    pub fn block_sigma_min(&self) -> [f64; 2] {
        [0, 1].map(|class| {
            let idx = class_indices(self.order(), class);
            if idx.is_empty() {
                f64::INFINITY
            } else {
                let s = self.block(&idx).singular_values();
                s.iter().copied().fold(f64::INFINITY, f64::min)
            }
        })
    }

    pub fn sigma_min(&self) -> f64 {
        let [a, b] = self.block_sigma_min();
        a.min(b)
    }

    /// Spectral norm `‖C‖₂`.
    pub fn norm(&self) -> f64 {
        [0, 1]
            .iter()
            .map(|&class| {
                let idx = class_indices(self.order(), class);
                if idx.is_empty() {
                    0.0
                } else {
                    self.block(&idx).singular_values().max()
                }
            })
            .fold(0.0, f64::max)
    }

    fn block(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.c[(idx[r], idx[c])])
    }

    /// Smallest singular value of one block and its right singular vector,
    /// embedded back into a length-`N` vector.
    fn block_null_pair(&self, class: usize) -> (f64, DVector<f64>) {
        let idx = class_indices(self.order(), class);
        let svd = self.block(&idx).svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let (imin, smin) = min_index(svd.singular_values.as_slice());
        let mut v = DVector::zeros(self.order());
        for (r, &i) in idx.iter().enumerate() {
            v[i] = v_t[(imin, r)];
        }
        (smin, v)
    }
}

fn class_indices(n: usize, class: usize) -> Vec<usize> {
    (0..n).filter(|i| i % 2 == class).collect()
}

fn min_index(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
}

/// Builds the matching system at `lambda` with truncation order `n`.
///
/// `lambda` should lie in `(E₁(α₁), E₁(α₀))`; values at or above the threshold
/// are rejected because the outer momenta stop being real.
pub fn matching_matrix(config: &WellConfig, parity: ParitySector, lambda: f64, n: usize) -> Result<MatchingSystem> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "truncation order must be at least 2, got {n}"
        )));
    }
    let tables = Arc::new(ModeTables::new(config, n)?);
    let threshold = tables.outer[0].energy();
    if !(lambda < threshold) {
        return Err(Error::InvalidParameter(format!(
            "trial energy {lambda} is not below the threshold {threshold}"
        )));
    }
    tables.system(parity, lambda)
}

/// Right singular vector of `C` for its smallest singular value, normalized
/// to unit length with its largest-magnitude entry positive.
pub fn null_vector(system: &MatchingSystem) -> Result<Vec<f64>> {
    let svd = system.c.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let s = svd.singular_values.as_slice();
    let norm = s.iter().copied().fold(0.0, f64::max);
    let (imin, smin) = min_index(s);
    let ratio = if norm > 0.0 { smin / norm } else { f64::INFINITY };
    if !(ratio < NULL_RATIO) {
        return Err(Error::NotAtRoot {
            lambda: system.lambda,
            ratio,
        });
    }
    let v: Vec<f64> = v_t.row(imin).iter().copied().collect();
    Ok(normalize_sign(v))
}

fn normalize_sign(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let big = v
        .iter()
        .copied()
        .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    let s = if big < 0.0 { -1.0 } else { 1.0 } / norm;
    v.iter_mut().for_each(|x| *x *= s);
    v
}

/// Outer coefficients `b_m = Σ_n O_mn a_n` from continuity of `ψ` at `x = a`.
pub fn b_coefficients(a_coeffs: &[f64], overlaps: &DMatrix<f64>) -> Result<Vec<f64>> {
    if overlaps.ncols() != a_coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: overlaps.ncols(),
            got: a_coeffs.len(),
        });
    }
    Ok((0..overlaps.nrows())
        .map(|m| a_coeffs.iter().enumerate().map(|(n, a)| overlaps[(m, n)] * a).sum())
        .collect())
}

/// A bound state of one parity sector at truncation order `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub lambda: f64,
    pub parity: ParitySector,
    pub a_coeffs: Vec<f64>,
    pub b_coeffs: Vec<f64>,
    /// Smallest singular value of the (row-scaled) matching matrix at `lambda`.
    pub sigma_min: f64,
    /// Spectral norm of the same matrix.
    pub matrix_norm: f64,
    /// `(c0, c1)` from [`matching_residual`].
    pub residual: (f64, f64),
    /// `|λ(N) − λ(N/2)|`, when `N/2 ≥ 2`.
    pub truncation_error: Option<f64>,
    pub n: usize,
}

impl BoundState {
    /// Assembles a state from a coefficient vector at `lambda`.
    pub fn from_coefficients(
        tables: &Arc<ModeTables>,
        parity: ParitySector,
        lambda: f64,
        a_coeffs: Vec<f64>,
    ) -> Result<Self> {
        let system = tables.system(parity, lambda)?;
        let b_coeffs = b_coefficients(&a_coeffs, tables.overlaps())?;
        let mut state = BoundState {
            lambda,
            parity,
            a_coeffs,
            b_coeffs,
            sigma_min: system.sigma_min(),
            matrix_norm: system.norm(),
            residual: (f64::NAN, f64::NAN),
            truncation_error: None,
            n: tables.order(),
        };
        state.residual = matching_residual(tables.config(), &state, RESIDUAL_QUAD)?;
        Ok(state)
    }
}

/// Reusable solver for one configuration and truncation order.
#[derive(Debug, Clone)]
pub struct ModeMatcher {
    tables: Arc<ModeTables>,
    half: Option<Arc<ModeTables>>,
}

impl ModeMatcher {
    pub fn new(config: &WellConfig, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "truncation order must be at least 2, got {n}"
            )));
        }
        let tables = Arc::new(ModeTables::new(config, n)?);
        let half = if n / 2 >= 2 {
            Some(Arc::new(ModeTables::new(config, n / 2)?))
        } else {
            None
        };
        Ok(ModeMatcher { tables, half })
    }

    pub fn tables(&self) -> &Arc<ModeTables> {
        &self.tables
    }

    pub fn config(&self) -> &WellConfig {
        &self.tables.config
    }

    /// Open search window `(E₁(α₁), E₁(α₀))`, or `None` when it is empty.
    pub fn window(&self) -> Option<(f64, f64)> {
        let lo = self.tables.inner[0].energy();
        let hi = self.tables.outer[0].energy();
        (self.config().is_well() && lo < hi).then_some((lo, hi))
    }

    /// Bound states of one sector, sorted by energy.
    pub fn bound_states(&self, parity: ParitySector, scan_points: usize, tol: f64) -> Result<Vec<BoundState>> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let Some((lo, hi)) = self.window() else {
            return Ok(Vec::new());
        };
        let scan_points = scan_points.max(3);
        let eps = 1e-9 * (hi - lo);
        let (lo, hi) = (lo + eps, hi - eps);
        let poles = stiffness_poles(&self.tables.inner_energies(), self.config().a, parity, lo, hi);

        // Sub-intervals between poles; `true` marks an end that is a window
        // edge rather than a pole.
        let mut edges = vec![(lo, true)];
        edges.extend(poles.iter().map(|&p| (p, false)));
        edges.push((hi, true));

        let mut roots: Vec<(f64, usize)> = Vec::new();
        for w in edges.windows(2) {
            let ((p0, open0), (p1, open1)) = (w[0], w[1]);
            let s0 = if open0 { p0 } else { p0 + POLE_MARGIN * p0.abs() };
            let s1 = if open1 { p1 } else { p1 - POLE_MARGIN * p1.abs() };
            if !(s1 > s0) {
                continue;
            }
            for (lam, class) in self.scan_interval(parity, s0, s1, open0, open1, scan_points, tol)? {
                if !roots.iter().any(|&(r, c)| c == class && (r - lam).abs() <= 10.0 * tol) {
                    roots.push((lam, class));
                }
            }
        }
        roots.sort_by(|x, y| x.0.total_cmp(&y.0));

        roots
            .into_iter()
            .map(|(lambda, class)| {
                let system = self.tables.system(parity, lambda)?;
                let (_, v) = system.block_null_pair(class);
                let a = normalize_sign(v.iter().copied().collect());
                let mut state = BoundState::from_coefficients(&self.tables, parity, lambda, a)?;
                state.truncation_error = self.half_order_estimate(parity, lambda, class, lo, hi, tol);
                Ok(state)
            })
            .collect()
    }

    /// Bound states of both sectors merged and sorted by energy.
    pub fn all_bound_states(&self, scan_points: usize, tol: f64) -> Result<Vec<BoundState>> {
        let mut all = Vec::new();
        for parity in ParitySector::BOTH {
            all.extend(self.bound_states(parity, scan_points, tol)?);
        }
        all.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
        Ok(all)
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_interval(
        &self,
        parity: ParitySector,
        s0: f64,
        s1: f64,
        open0: bool,
        open1: bool,
        points: usize,
        tol: f64,
    ) -> Result<Vec<(f64, usize)>> {
        let grid: Vec<f64> = (0..points)
            .map(|i| s0 + (s1 - s0) * i as f64 / (points - 1) as f64)
            .collect();
        let sigmas = grid
            .iter()
            .map(|&l| self.tables.system(parity, l).map(|s| s.block_sigma_min()))
            .collect::<Result<Vec<_>>>()?;

        let mut found = Vec::new();
        for class in 0..2 {
            let s: Vec<f64> = sigmas.iter().map(|b| b[class]).collect();
            if !s[0].is_finite() {
                continue;
            }
            let last = points - 1;
            let mut brackets = Vec::new();
            if open0 && s[0] < s[1] {
                brackets.push((grid[0], grid[1]));
            }
            for i in 1..last {
                if s[i] < s[i - 1] && s[i] <= s[i + 1] {
                    brackets.push((grid[i - 1], grid[i + 1]));
                }
            }
            if open1 && s[last] < s[last - 1] {
                brackets.push((grid[last - 1], grid[last]));
            }
            for (b0, b1) in brackets {
                let f = |l: f64| {
                    self.tables
                        .system(parity, l)
                        .map(|sys| sys.block_sigma_min()[class])
                        .unwrap_or(f64::INFINITY)
                };
                let lam = golden_section(f, b0, b1, tol);
                let sys = self.tables.system(parity, lam)?;
                if sys.block_sigma_min()[class] < ACCEPT_RATIO * sys.norm() {
                    found.push((lam, class));
                }
            }
        }
        Ok(found)
    }

    fn half_order_estimate(
        &self,
        parity: ParitySector,
        lambda: f64,
        class: usize,
        lo: f64,
        hi: f64,
        tol: f64,
    ) -> Option<f64> {
        let half = self.half.as_ref()?;
        let width = 0.05 * (hi - lo);
        let mut b0 = (lambda - width).max(lo);
        let mut b1 = (lambda + width).min(hi);
        for p in stiffness_poles(&half.inner_energies(), half.config.a, parity, b0, b1) {
            if p < lambda {
                b0 = p + POLE_MARGIN * p;
            } else {
                b1 = p - POLE_MARGIN * p;
            }
        }
        let f = |l: f64| {
            half.system(parity, l)
                .map(|s| s.block_sigma_min()[class])
                .unwrap_or(f64::INFINITY)
        };
        let lam = golden_section(f, b0, b1, tol);
        Some((lam - lambda).abs())
    }
}

/// Golden-section minimization of `f` on `[a, b]` down to bracket width `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Bound states of one sector at truncation order `n`.
///
/// The window `(E₁(α₁), E₁(α₀))` is split at the stiffness poles; each piece
/// is sampled at `scan_points` energies, sampled minima of the smallest
/// singular value are refined by golden section to `tol`, and a minimizer is
/// accepted when `σ_min < 1e-8 ‖C‖`.
pub fn bound_state_energies(
    config: &WellConfig,
    parity: ParitySector,
    n: usize,
    scan_points: usize,
    tol: f64,
) -> Result<Vec<BoundState>> {
    ModeMatcher::new(config, n)?.bound_states(parity, scan_points, tol)
}

/// Mode expansion of a bound state, evaluable anywhere on the strip.
#[derive(Debug, Clone)]
pub struct ModeExpansion {
    config: WellConfig,
    parity: ParitySector,
    inner: Vec<TransversalMode>,
    outer: Vec<TransversalMode>,
    a_coeffs: Vec<f64>,
    b_coeffs: Vec<f64>,
    profiles: Vec<InnerProfile>,
    stiffness: Vec<f64>,
    k_outer: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum InnerProfile {
    /// `λ < E_n`, decay/growth rate `l`.
    Hyperbolic(f64),
    /// `λ > E_n`, oscillation wavenumber `κ`.
    Trigonometric(f64),
    Flat,
}

impl ModeExpansion {
    pub fn new(config: &WellConfig, state: &BoundState) -> Result<Self> {
        config.validate()?;
        let n = state.n;
        if state.a_coeffs.len() != n || state.b_coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: state.a_coeffs.len().min(state.b_coeffs.len()),
            });
        }
        let inner_cs = config.inner_cross_section();
        let outer_cs = config.outer_cross_section();
        let inner = (1..=n)
            .map(|i| TransversalMode::new(&inner_cs, i))
            .collect::<Result<Vec<_>>>()?;
        let outer = (1..=n)
            .map(|i| TransversalMode::new(&outer_cs, i))
            .collect::<Result<Vec<_>>>()?;
        let lambda = state.lambda;
        let profiles = inner
            .iter()
            .map(|m| {
                let gap = m.energy() - lambda;
                if gap > 0.0 {
                    InnerProfile::Hyperbolic(gap.sqrt())
                } else if gap < 0.0 {
                    InnerProfile::Trigonometric((-gap).sqrt())
                } else {
                    InnerProfile::Flat
                }
            })
            .collect();
        let stiffness = inner
            .iter()
            .map(|m| axial_stiffness(lambda, m.energy(), config.a, state.parity))
            .collect::<Result<Vec<_>>>()?;
        let k_outer = outer.iter().map(|m| (m.energy() - lambda).max(0.0).sqrt()).collect();
        Ok(ModeExpansion {
            config: *config,
            parity: state.parity,
            inner,
            outer,
            a_coeffs: state.a_coeffs.clone(),
            b_coeffs: state.b_coeffs.clone(),
            profiles,
            stiffness,
            k_outer,
        })
    }

    /// Inner profile of mode `n`, normalized to 1 at `x = a`; `0 ≤ x ≤ a`.
    fn profile(&self, idx: usize, x: f64) -> f64 {
        let a = self.config.a;
        match (self.profiles[idx], self.parity) {
            (InnerProfile::Hyperbolic(l), ParitySector::Symmetric) => {
                // cosh(lx)/cosh(la) without overflow.
                (l * (x - a)).exp() * (1.0 + (-2.0 * l * x).exp()) / (1.0 + (-2.0 * l * a).exp())
            }
            (InnerProfile::Hyperbolic(l), ParitySector::Antisymmetric) => {
                if l * a < 1e-8 {
                    x / a
                } else {
                    (l * (x - a)).exp() * (-2.0 * l * x).exp_m1() / (-2.0 * l * a).exp_m1()
                }
            }
            (InnerProfile::Trigonometric(k), ParitySector::Symmetric) => (k * x).cos() / (k * a).cos(),
            (InnerProfile::Trigonometric(k), ParitySector::Antisymmetric) => {
                if k * a < 1e-8 {
                    x / a
                } else {
                    (k * x).sin() / (k * a).sin()
                }
            }
            (InnerProfile::Flat, ParitySector::Symmetric) => 1.0,
            (InnerProfile::Flat, ParitySector::Antisymmetric) => x / a,
        }
    }

    /// Unnormalized `ψ(x, y)`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let sign = if x < 0.0 { self.parity.sign() } else { 1.0 };
        let x = x.abs();
        if x < self.config.a {
            sign * self.inner_trace(y, |i| self.profile(i, x))
        } else {
            let dx = x - self.config.a;
            sign * self
                .outer
                .iter()
                .zip(&self.b_coeffs)
                .zip(&self.k_outer)
                .map(|((m, b), k)| b * (-k * dx).exp() * m.eval(y))
                .sum::<f64>()
        }
    }

    fn inner_trace<F: Fn(usize) -> f64>(&self, y: f64, weight: F) -> f64 {
        self.inner
            .iter()
            .zip(&self.a_coeffs)
            .enumerate()
            .map(|(i, (m, a))| a * weight(i) * m.eval(y))
            .sum()
    }

    /// `ψ(a⁻, y)`.
    pub fn inner_value_at_interface(&self, y: f64) -> f64 {
        self.inner_trace(y, |_| 1.0)
    }

    /// `ψ(a⁺, y)`.
    pub fn outer_value_at_interface(&self, y: f64) -> f64 {
        self.outer.iter().zip(&self.b_coeffs).map(|(m, b)| b * m.eval(y)).sum()
    }

    /// `∂ₓψ(a⁻, y)`.
    pub fn inner_slope_at_interface(&self, y: f64) -> f64 {
        self.inner_trace(y, |i| self.stiffness[i])
    }

    /// `∂ₓψ(a⁺, y)`.
    pub fn outer_slope_at_interface(&self, y: f64) -> f64 {
        self.outer
            .iter()
            .zip(&self.b_coeffs)
            .zip(&self.k_outer)
            .map(|((m, b), k)| -k * b * m.eval(y))
            .sum()
    }

    /// Projections of the value and slope jumps at `x = a` onto the retained
    /// outer modes.
    pub fn jump_projections(&self, overlaps: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
        let n = self.outer.len();
        let mut p0 = vec![0.0; n];
        let mut p1 = vec![0.0; n];
        for m in 0..n {
            let mut v = 0.0;
            let mut s = 0.0;
            for j in 0..n {
                v += self.a_coeffs[j] * overlaps[(m, j)];
                s += self.a_coeffs[j] * self.stiffness[j] * overlaps[(m, j)];
            }
            p0[m] = v - self.b_coeffs[m];
            p1[m] = s + self.k_outer[m] * self.b_coeffs[m];
        }
        (p0, p1)
    }

    /// Smallest outer decay rate `k_1`.
    pub fn slowest_decay(&self) -> f64 {
        self.k_outer[0]
    }
}

/// `L²(0, d)` norms of the jumps of `ψ` and `∂ₓψ` across `x = a`.
pub fn matching_residual(config: &WellConfig, state: &BoundState, n_quad: usize) -> Result<(f64, f64)> {
    let exp = ModeExpansion::new(config, state)?;
    let rule = GaussRule::new(n_quad.max(2));
    let mut c0 = 0.0;
    let mut c1 = 0.0;
    for (y, w) in rule.mapped(0.0, config.d) {
        let j0 = exp.inner_value_at_interface(y) - exp.outer_value_at_interface(y);
        let j1 = exp.inner_slope_at_interface(y) - exp.outer_slope_at_interface(y);
        c0 += w * j0 * j0;
        c1 += w * j1 * j1;
    }
    Ok((c0.sqrt(), c1.sqrt()))
}

/// `ψ` sampled on a rectangular grid, normalized in `L²` by the trapezoid rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WavefunctionGrid {
    pub x_samples: Vec<f64>,
    pub y_samples: Vec<f64>,
    /// Row-major: `values[i * ny + j] = ψ(x_i, y_j)`.
    pub values: Vec<f64>,
    pub state: BoundState,
    pub config: WellConfig,
}

impl WavefunctionGrid {
    pub fn nx(&self) -> usize {
        self.x_samples.len()
    }

    pub fn ny(&self) -> usize {
        self.y_samples.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny() + j]
    }

    /// Trapezoid-rule `∫∫ w(x, y) ψ² dx dy` over the grid.
    pub fn integrate_weighted<F: Fn(f64, f64) -> f64>(&self, w: F) -> f64 {
        let tx = trapezoid_weights(&self.x_samples);
        let ty = trapezoid_weights(&self.y_samples);
        let mut sum = 0.0;
        for (i, (&x, wx)) in self.x_samples.iter().zip(&tx).enumerate() {
            for (j, (&y, wy)) in self.y_samples.iter().zip(&ty).enumerate() {
                let v = self.values[i * self.ny() + j];
                sum += wx * wy * w(x, y) * v * v;
            }
        }
        sum
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate_weighted(|_, _| 1.0).sqrt()
    }

    /// `∫∫ x² |ψ|²`, the spread along the strip.
    pub fn x_second_moment(&self) -> f64 {
        self.integrate_weighted(|x, _| x * x)
    }
}

fn trapezoid_weights(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = samples[i + 1] - samples[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

fn check_monotone(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 || v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be strictly increasing with at least two points"
        )));
    }
    Ok(())
}

/// Evaluates the Ansatz of `state` on `x_grid × y_grid` and normalizes it.
pub fn wavefunction(
    config: &WellConfig,
    state: &BoundState,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<WavefunctionGrid> {
    check_monotone("x", x_grid)?;
    check_monotone("y", y_grid)?;
    if y_grid[0] < 0.0 || *y_grid.last().unwrap() > config.d * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("y grid must lie in [0, {}]", config.d)));
    }
    let exp = ModeExpansion::new(config, state)?;
    let mut values = Vec::with_capacity(x_grid.len() * y_grid.len());
    for &x in x_grid {
        for &y in y_grid {
            values.push(exp.value(x, y));
        }
    }
    let mut grid = WavefunctionGrid {
        x_samples: x_grid.to_vec(),
        y_samples: y_grid.to_vec(),
        values,
        state: state.clone(),
        config: *config,
    };
    let norm = grid.l2_norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(format!("wavefunction norm on grid is {norm}")));
    }
    grid.values.iter_mut().for_each(|v| *v /= norm);
    Ok(grid)
}

/// Two-sided minimax estimate of the n-th eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    /// An empty bracket gives no guarantee that an n-th state exists.
    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    pub fn contains(&self, lambda: f64) -> bool {
        !self.is_empty() && self.lower <= lambda && lambda <= self.upper
    }
}

/// `E₁(α₁) + ((n−1)π/2a)² ≤ E_n ≤ E₁(α₁) + (nπ/2a)²`, upper end clipped at
/// `E₁(α₀)`.
pub fn minimax_brackets(config: &WellConfig, n: usize) -> Result<Bracket> {
    if n == 0 {
        return Err(Error::InvalidParameter("ordinal starts at 1".into()));
    }
    let floor = config.floor()?;
    let threshold = config.threshold()?;
    let step = PI / (2.0 * config.a);
    Ok(Bracket {
        lower: floor + ((n - 1) as f64 * step).powi(2),
        upper: (floor + (n as f64 * step).powi(2)).min(threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> WellConfig {
        WellConfig::new(20.0, 5.0, 0.3, 1.0).unwrap()
    }

    #[test]
    fn stiffness_limits_at_channel_energy() {
        assert_eq!(axial_stiffness(4.0, 4.0, 0.3, ParitySector::Symmetric).unwrap(), 0.0);
        let v = axial_stiffness(4.0, 4.0, 0.3, ParitySector::Antisymmetric).unwrap();
        assert!((v - 1.0 / 0.3).abs() < 1e-14);
        // Continuity through the channel energy from both sides.
        for parity in ParitySector::BOTH {
            let at = axial_stiffness(4.0, 4.0, 0.3, parity).unwrap();
            let below = axial_stiffness(4.0 - 1e-9, 4.0, 0.3, parity).unwrap();
            let above = axial_stiffness(4.0 + 1e-9, 4.0, 0.3, parity).unwrap();
            assert!((below - at).abs() < 1e-8 && (above - at).abs() < 1e-8);
        }
    }

    #[test]
    fn stiffness_hyperbolic_branch() {
        // l a = 1 with l = 2: E − λ = 4.
        let v = axial_stiffness(1.0, 5.0, 0.5, ParitySector::Symmetric).unwrap();
        assert!((v - 2.0 * 1f64.tanh()).abs() < 1e-14);
        assert!((v / 2.0 - 0.761_594_155_955_764_9).abs() < 1e-15);
        let v = axial_stiffness(1.0, 5.0, 0.5, ParitySector::Antisymmetric).unwrap();
        assert!((v - 2.0 / 1f64.tanh()).abs() < 1e-14);
    }

    #[test]
    fn stiffness_trigonometric_branch_and_poles() {
        let a = 0.5;
        let kappa = 1.0;
        let v = axial_stiffness(2.0, 1.0, a, ParitySector::Symmetric).unwrap();
        assert!((v + kappa * (kappa * a).tan()).abs() < 1e-14);
        let pole = 1.0 + (0.5 * PI / a).powi(2);
        assert!(matches!(
            axial_stiffness(pole, 1.0, a, ParitySector::Symmetric),
            Err(Error::Pole { .. })
        ));
        let pole = 1.0 + (PI / a).powi(2);
        assert!(matches!(
            axial_stiffness(pole * (1.0 + 1e-13), 1.0, a, ParitySector::Antisymmetric),
            Err(Error::Pole { .. })
        ));
        assert!(axial_stiffness(pole * (1.0 + 1e-6), 1.0, a, ParitySector::Antisymmetric).is_ok());
    }

    #[test]
    fn degenerate_profile_gives_diagonal_matrix() {
        let cfg = WellConfig::new(20.0, 20.0, 0.3, 1.0).unwrap();
        let sys = matching_matrix(&cfg, ParitySector::Symmetric, 5.0, 6).unwrap();
        let o = sys.overlaps();
        for m in 0..6 {
            for n in 0..6 {
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((o[(m, n)] - expected).abs() < 1e-12);
                if m != n {
                    assert!(sys.matrix()[(m, n)].abs() < 1e-11);
                }
            }
            let k = sys.outer_momenta()[m];
            let want = (sys.stiffness()[m] + k) / (1.0 + k);
            assert!((sys.matrix()[(m, m)] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn checkerboard_pattern_is_exact() {
        let sys = matching_matrix(&baseline(), ParitySector::Antisymmetric, 7.0, 9).unwrap();
        for m in 0..9 {
            for n in 0..9 {
                if (m + n) % 2 == 1 {
                    assert_eq!(sys.matrix()[(m, n)], 0.0);
                }
            }
        }
    }

    #[test]
    fn null_vector_of_diagonal_matrix() {
        // α₁ = α₀ makes C diagonal; zero one entry by hand.
        let cfg = WellConfig::new(20.0, 20.0, 0.3, 1.0).unwrap();
        let mut sys = matching_matrix(&cfg, ParitySector::Symmetric, 5.0, 5).unwrap();
        sys.c[(2, 2)] = 1e-14;
        let v = null_vector(&sys).unwrap();
        for (i, x) in v.iter().enumerate() {
            let e = if i == 2 { 1.0 } else { 0.0 };
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn null_vector_rejects_regular_matrix() {
        let sys = matching_matrix(&baseline(), ParitySector::Symmetric, 6.0, 8).unwrap();
        assert!(matches!(null_vector(&sys), Err(Error::NotAtRoot { .. })));
    }

    #[test]
    fn b_coefficients_basic() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(b_coefficients(&[0.1, 0.2, 0.3], &id).unwrap(), vec![0.1, 0.2, 0.3]);
        let o = DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.1, 0.8]);
        assert_eq!(b_coefficients(&[1.0, 0.0], &o).unwrap(), vec![0.9, 0.1]);
        assert!(matches!(
            b_coefficients(&[1.0], &o),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn collapsed_window_has_no_states() {
        let cfg = WellConfig::new(20.0, 20.0 - 1e-12, 0.3, 1.0).unwrap();
        for parity in ParitySector::BOTH {
            assert!(bound_state_energies(&cfg, parity, 8, 100, 1e-12).unwrap().is_empty());
        }
        let cfg = WellConfig::new(20.0, 20.0, 0.3, 1.0).unwrap();
        assert!(ModeMatcher::new(&cfg, 8)
            .unwrap()
            .all_bound_states(100, 1e-12)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn minimax_bracket_formula() {
        let cfg = WellConfig::new(1e5, 1e-5, 2.0, 1.0).unwrap();
        let b = minimax_brackets(&cfg, 1).unwrap();
        let floor = cfg.floor().unwrap();
        assert_eq!(b.lower, floor);
        assert!((b.upper - (floor + (PI / 4.0).powi(2))).abs() < 1e-14);
        let wide = WellConfig::new(20.0, 5.0, 1e6, 1.0).unwrap();
        for n in 1..5 {
            let b = minimax_brackets(&wide, n).unwrap();
            assert!((b.lower - wide.floor().unwrap()).abs() < 1e-9);
            assert!((b.upper - wide.floor().unwrap()).abs() < 1e-9);
        }
        // Empty once the lower end passes the threshold.
        assert!(minimax_brackets(&baseline(), 2).unwrap().is_empty());
    }

    #[test]
    fn golden_section_finds_v_shaped_minimum() {
        let x = golden_section(|x| (x - 0.123_456_789).abs(), 0.0, 1.0, 1e-13);
        assert!((x - 0.123_456_789).abs() < 1e-12);
    }
}
