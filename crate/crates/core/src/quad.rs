//! Quadrature helpers shared by the mode tables and the trial-function code.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Node/weight pairs of a Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(points: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(points.max(1)).unwrap());
        let (nodes, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mapped nodes and weights for `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule with `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// The shared 64-point rule.
pub fn gauss64() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(64))
}

/// Composite Simpson with interval doubling, starting from `base` panels.
///
/// Stops once two consecutive levels agree to `rel_tol` (relative to the
/// larger magnitude, with an absolute floor of `rel_tol * 1e-3`).
pub fn simpson_doubling<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    base: usize,
    rel_tol: f64,
    max_levels: usize,
) -> Result<f64> {
    let mut panels = base.max(2);
    if panels % 2 == 1 {
        panels += 1;
    }
    let mut prev = simpson(&f, a, b, panels);
    for _ in 0..max_levels {
        panels *= 2;
        let next = simpson(&f, a, b, panels);
        let scale = prev.abs().max(next.abs());
        if (next - prev).abs() <= rel_tol * scale.max(1e-3) {
            return Ok(next);
        }
        prev = next;
    }
    let last = simpson(&f, a, b, panels * 2);
    let scale = prev.abs().max(last.abs());
    if (last - prev).abs() <= rel_tol * scale.max(1e-3) {
        Ok(last)
    } else {
        Err(Error::QuadratureNonConvergence { prev, last })
    }
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let x = a + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}
