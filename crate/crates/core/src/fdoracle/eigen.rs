//! Lowest eigenpairs of a sparse symmetric matrix by shift-invert Lanczos.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fdoracle::assemble::SparseOperator;

const DENSE_LIMIT: usize = 256;
// About 1.2 GB of Krylov basis.
const BASIS_BUDGET: usize = 150_000_000;
const CHECK_EVERY: usize = 5;
const SEED: u64 = 0x5eed_1a2c;

/// Eigenvalues in ascending order with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Explicit residuals `‖Av − λv‖`.
    pub residuals: Vec<f64>,
    /// Lanczos steps taken (0 for the dense path).
    pub steps: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn residual(op: &SparseOperator, lambda: f64, v: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    op.matvec(v, &mut av);
    axpy(-lambda, v, &mut av);
    norm(&av)
}

fn dense_eigenpairs(op: &SparseOperator, count: usize) -> EigenPairs {
    let n = op.dim();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (r, c, v) in op.entries() {
        m[(r, c)] = v;
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out = EigenPairs {
        values: Vec::with_capacity(count),
        vectors: Vec::with_capacity(count),
        residuals: Vec::with_capacity(count),
        steps: 0,
    };
    for &k in order.iter().take(count) {
        let lambda = eig.eigenvalues[k];
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        out.residuals.push(residual(op, lambda, &v));
        out.values.push(lambda);
        out.vectors.push(v);
    }
    out
}

/// Random unit vector orthogonal to `basis`.
fn fresh_direction(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for q in basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// The `count` smallest eigenpairs of the symmetric matrix `op`.
///
/// `shift` must lie strictly below the spectrum so that `op − shift·I` admits
/// a Cholesky factorization; its inverse drives the Lanczos iteration. Each
/// returned pair satisfies `‖Av − λv‖ ≤ tol·(‖A‖ + |shift|)` with `‖A‖` taken
/// as the max row sum. Small matrices are solved densely.
pub fn lowest_eigenpairs(op: &SparseOperator, count: usize, shift: f64, tol: f64) -> Result<EigenPairs> {
    let n = op.dim();
    if count == 0 || count > n {
        return Err(Error::InvalidParameter(format!(
            "cannot request {count} eigenpairs of a {n}×{n} matrix"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if n <= DENSE_LIMIT {
        return Ok(dense_eigenpairs(op, count));
    }
    shift_invert_lanczos(op, count, shift, tol)
}

pub(crate) fn shift_invert_lanczos(op: &SparseOperator, count: usize, shift: f64, tol: f64) -> Result<EigenPairs> {
    let n = op.dim();
    let triplets: Vec<Triplet<usize, usize, f64>> = op
        .entries()
        .filter(|&(r, c, _)| r >= c)
        .map(|(r, c, v)| Triplet::new(r, c, if r == c { v - shift } else { v }))
        .collect();
    let shifted = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::InvalidParameter(format!("sparse assembly failed: {e:?}")))?;
    let llt = shifted
        .sp_cholesky(Side::Lower)
        .map_err(|_| Error::ShiftNotBelowSpectrum { shift })?;
    let apply = |v: &[f64]| -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| v[i]);
        let x = llt.solve(&rhs);
        (0..n).map(|i| x[(i, 0)]).collect()
    };

    let scale = op.norm_bound() + shift.abs();
    let max_steps = n.min((40 + 20 * count).max(BASIS_BUDGET / n).min(300)).max(count + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alphas: Vec<f64> = Vec::with_capacity(max_steps);
    let mut betas: Vec<f64> = Vec::with_capacity(max_steps);
    let mut q = fresh_direction(&mut rng, n, &basis).expect("nonempty space");
    let mut worst = f64::INFINITY;

    for step in 0..max_steps {
        let mut w = apply(&q);
        let a = dot(&w, &q);
        axpy(-a, &q, &mut w);
        if let (Some(&b), Some(prev)) = (betas.last(), basis.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q);
        alphas.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        let m = basis.len();
        let breakdown = b <= 1e-13 * alphas.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let last = step + 1 == max_steps;

        if m >= count && (m.is_multiple_of(CHECK_EVERY) || breakdown || last) {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
            let wanted = &order[..count];
            let estimates_ok = wanted.iter().all(|&k| {
                let theta = eig.eigenvalues[k];
                theta > 0.0 && (b * eig.eigenvectors[(m - 1, k)]).abs() <= tol * theta
            });
            if estimates_ok || last {
                let mut pairs: Vec<(f64, Vec<f64>)> = wanted
                    .iter()
                    .map(|&k| {
                        let mut v = vec![0.0; n];
                        for (i, qi) in basis.iter().enumerate() {
                            axpy(eig.eigenvectors[(i, k)], qi, &mut v);
                        }
                        let nv = norm(&v);
                        v.iter_mut().for_each(|x| *x /= nv);
                        (shift + 1.0 / eig.eigenvalues[k], v)
                    })
                    .collect();
                pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
                let residuals: Vec<f64> = pairs.iter().map(|(l, v)| residual(op, *l, v)).collect();
                worst = residuals.iter().copied().fold(0.0, f64::max);
                if worst <= tol * scale {
                    let (values, vectors) = pairs.into_iter().unzip();
                    return Ok(EigenPairs {
                        values,
                        vectors,
                        residuals,
                        steps: m,
                    });
                }
            }
        }
        if last {
            break;
        }
        if breakdown {
            // Invariant subspace found; continue in its complement.
            match fresh_direction(&mut rng, n, &basis) {
                Some(v) => {
                    betas.push(0.0);
                    q = v;
                }
                None => break,
            }
        } else {
            betas.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            q = w;
        }
    }
    Err(Error::EigenNonConvergence {
        iterations: basis.len(),
        residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdoracle::assemble::assemble_cross_section;

    #[test]
    fn diagonal_matrix() {
        let op = SparseOperator::from_triplets(3, vec![(0, 0, 3.0), (1, 1, 1.0), (2, 2, 2.0)]).unwrap();
        let e = lowest_eigenpairs(&op, 2, 0.0, 1e-12).unwrap();
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
    }

    fn laplacian_1d(n: usize) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseOperator::from_triplets(n, t).unwrap()
    }

    #[test]
    fn lanczos_matches_closed_form() {
        let n = 2000;
        let op = laplacian_1d(n);
        let e = shift_invert_lanczos(&op, 4, -1e-3, 1e-10).unwrap();
        for (k, lam) in e.values.iter().enumerate() {
            let s = ((k + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64)).sin();
            assert!((lam - 4.0 * s * s).abs() < 1e-9 * 4.0, "{k}: {lam}");
        }
        for i in 0..4 {
            for j in 0..4 {
                let g = dot(&e.vectors[i], &e.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let op = assemble_cross_section(7.0, 1.0, 200).unwrap();
        let dense = dense_eigenpairs(&op, 3);
        let lz = shift_invert_lanczos(&op, 3, 0.0, 1e-11).unwrap();
        for k in 0..3 {
            assert!((dense.values[k] - lz.values[k]).abs() < 1e-8 * dense.values[k].abs().max(1.0));
        }
    }

    #[test]
    fn shift_above_spectrum_is_rejected() {
        let op = laplacian_1d(500);
        assert!(matches!(
            shift_invert_lanczos(&op, 2, 0.5, 1e-10),
            Err(Error::ShiftNotBelowSpectrum { .. })
        ));
    }

    #[test]
    fn bad_requests() {
        let op = laplacian_1d(10);
        assert!(lowest_eigenpairs(&op, 0, 0.0, 1e-10).is_err());
        assert!(lowest_eigenpairs(&op, 11, 0.0, 1e-10).is_err());
    }
}
