//! Jacobi-preconditioned BiCGSTAB for the stage-implicit diffusion systems.

use serde::{Deserialize, Serialize};

use crate::sparse::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    Breakdown,
    MaxIterations,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual `||b - A x|| / ||b||`.
    pub residual_norm: f64,
    pub status: SolveStatus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500 }
    }
}

const BREAKDOWN: f64 = 1e-30;

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &SparseOperator, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solves `A x = b` from the initial guess `x0`.
///
/// Jacobi preconditioning is used when every diagonal entry is nonzero. On a
/// breakdown (`rho` or `omega` numerically zero) the iteration restarts once
/// with the shadow residual reset to the current true residual.
pub fn bicgstab(a: &SparseOperator, b: &[f64], x0: &[f64], opts: SolverOptions) -> (Vec<f64>, SolveReport) {
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side dimension");
    assert_eq!(x0.len(), n, "initial guess dimension");

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return (vec![0.0; n], SolveReport { iterations: 0, residual_norm: 0.0, status: SolveStatus::Converged });
    }
    let diag = a.diagonal();
    let inv_diag: Vec<f64> = if diag.iter().all(|&d| d != 0.0) {
        diag.iter().map(|d| 1.0 / d).collect()
    } else {
        vec![1.0; n]
    };
    let precondition = |src: &[f64], dst: &mut [f64]| {
        for ((d, s), w) in dst.iter_mut().zip(src).zip(&inv_diag) {
            *d = s * w;
        }
    };

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    residual(a, b, &x, &mut r);
    let mut rel = norm(&r) / b_norm;
    if rel <= opts.tol {
        return (x, SolveReport { iterations: 0, residual_norm: rel, status: SolveStatus::Converged });
    }

    let mut r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho_prev, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut restarted = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let rho = dot(&r_hat, &r);
        let mut broke = rho.abs() < BREAKDOWN * norm(&r_hat) * norm(&r);
        if !broke {
            let beta = (rho / rho_prev) * (alpha / omega);
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
            precondition(&p, &mut y);
            a.apply(&y, &mut v);
            let denom = dot(&r_hat, &v);
            broke = denom.abs() < BREAKDOWN * norm(&r_hat) * norm(&v);
            if !broke {
                alpha = rho / denom;
                for k in 0..n {
                    s[k] = r[k] - alpha * v[k];
                }
                if norm(&s) / b_norm <= opts.tol {
                    for k in 0..n {
                        x[k] += alpha * y[k];
                    }
                    residual(a, b, &x, &mut r);
                    rel = norm(&r) / b_norm;
                    if rel <= opts.tol {
                        return (x, SolveReport { iterations, residual_norm: rel, status: SolveStatus::Converged });
                    }
                    // running residual drifted; continue from the true one
                    r_hat.copy_from_slice(&r);
                    p.fill(0.0);
                    v.fill(0.0);
                    (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
                    continue;
                }
                precondition(&s, &mut z);
                a.apply(&z, &mut t);
                let tt = dot(&t, &t);
                omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
                for k in 0..n {
                    x[k] += alpha * y[k] + omega * z[k];
                    r[k] = s[k] - omega * t[k];
                }
                rho_prev = rho;
                rel = norm(&r) / b_norm;
                if rel <= opts.tol {
                    residual(a, b, &x, &mut r);
                    rel = norm(&r) / b_norm;
                    if rel <= opts.tol {
                        return (x, SolveReport { iterations, residual_norm: rel, status: SolveStatus::Converged });
                    }
                    r_hat.copy_from_slice(&r);
                    p.fill(0.0);
                    v.fill(0.0);
                    (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
                    continue;
                }
                broke = omega.abs() < BREAKDOWN;
            }
        }
        if broke {
            residual(a, b, &x, &mut r);
            rel = norm(&r) / b_norm;
            if rel <= opts.tol {
                return (x, SolveReport { iterations, residual_norm: rel, status: SolveStatus::Converged });
            }
            if restarted {
                return (x, SolveReport { iterations, residual_norm: rel, status: SolveStatus::Breakdown });
            }
            restarted = true;
            r_hat.copy_from_slice(&r);
            p.fill(0.0);
            v.fill(0.0);
            (rho_prev, alpha, omega) = (1.0, 1.0, 1.0);
        }
    }
    residual(a, b, &x, &mut r);
    rel = norm(&r) / b_norm;
    let status = if rel <= opts.tol { SolveStatus::Converged } else { SolveStatus::MaxIterations };
    (x, SolveReport { iterations, residual_norm: rel, status })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_iteration() {
        let a = SparseOperator::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        let (x, rep) = bicgstab(&a, &b, &[0.0; 5], SolverOptions::default());
        assert_eq!(rep.status, SolveStatus::Converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn diagonal_system() {
        let a = SparseOperator::from_rows(vec![vec![(0, 2.0)], vec![(1, 4.0)]]).unwrap();
        let (x, rep) = bicgstab(&a, &[2.0, 4.0], &[0.0, 0.0], SolverOptions::default());
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = SparseOperator::identity(3);
        let (x, rep) = bicgstab(&a, &[0.0; 3], &[1.0, 2.0, 3.0], SolverOptions::default());
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn nonsymmetric_system() {
        let a = SparseOperator::from_rows(vec![
            vec![(0, 4.0), (1, 1.0)],
            vec![(0, -2.0), (1, 5.0), (2, 1.0)],
            vec![(1, 3.0), (2, 6.0)],
        ])
        .unwrap();
        let want = [1.0, -1.0, 2.0];
        let b = a.mul_vec(&want);
        let (x, rep) = bicgstab(&a, &b, &[0.0; 3], SolverOptions::default());
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(x.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn zero_diagonal_uses_identity_preconditioner() {
        let a = SparseOperator::from_rows(vec![vec![(1, 1.0)], vec![(0, 1.0)]]).unwrap();
        let (x, rep) = bicgstab(&a, &[3.0, 5.0], &[0.0, 0.0], SolverOptions::default());
        assert_eq!(rep.status, SolveStatus::Converged, "{rep:?}");
        assert!((x[0] - 5.0).abs() < 1e-9 && (x[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn max_iterations_reported() {
        let n = 50;
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0 + i as f64)];
                if i > 0 {
                    r.insert(0, (i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.5));
                }
                r
            })
            .collect();
        let a = SparseOperator::from_rows(rows).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (_, rep) = bicgstab(&a, &b, &vec![0.0; n], SolverOptions { tol: 1e-14, max_iter: 2 });
        assert_eq!(rep.status, SolveStatus::MaxIterations);
        assert_eq!(rep.iterations, 2);
    }
}
