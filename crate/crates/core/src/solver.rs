//! Linear solves for the seeded Laplacian systems.
//!
//! The default method is conjugate gradients with a Jacobi (diagonal)
//! preconditioner. Boundary-penalized systems can be indefinite even inside
//! the admissible penalty range; when CG meets a direction of nonpositive
//! curvature it hands over to MINRES with the same preconditioner, which
//! still finds the stationary point. A dense Cholesky path and a dense Gaussian-elimination
//! oracle exist for small systems and for cross-checking.

use crate::error::{Error, Result};
use crate::graph::SparseLaplacian;
use crate::sparse::CsrMatrix;

/// Largest system the dense paths will densify.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    #[default]
    PreconditionedCg,
    DenseDirect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Bound on `|A x - b| / max(|b|, 1)`.
    pub tolerance: f64,
    /// Iteration cap; `None` means ten times the system size.
    pub max_iterations: Option<usize>,
    pub method: SolveMethod,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-8,
            max_iterations: None,
            method: SolveMethod::PreconditionedCg,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        Ok(())
    }

    fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(10 * n).max(1)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `|A x - b| / max(|b|, 1)`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    norm(&r) / norm(b).max(1.0)
}

/// Solves `lap.lu() * x = rhs`.
pub fn solve_system(lap: &SparseLaplacian, rhs: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    solve_matrix(lap.lu(), rhs, opts)
}

/// Solves a symmetric system given directly as a sparse matrix.
pub fn solve_matrix(a: &CsrMatrix, rhs: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    opts.validate()?;
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("system matrix is not square"));
    }
    if rhs.len() != n {
        return Err(Error::invalid(format!(
            "right-hand side has {} entries for a system of size {n}",
            rhs.len()
        )));
    }
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; n]);
    }
    match opts.method {
        SolveMethod::PreconditionedCg => {
            let inv_diag = inverse_diagonal(a)?;
            let cap = opts.iteration_cap(n);
            match pcg(a, rhs, &inv_diag, opts.tolerance, cap) {
                Err(Error::NotPositiveDefinite) => minres(a, rhs, &inv_diag, opts.tolerance, cap),
                other => other,
            }
        }
        SolveMethod::DenseDirect => {
            if n > DENSE_LIMIT {
                return Err(Error::OracleTooLarge { size: n, limit: DENSE_LIMIT });
            }
            cholesky_solve(a.to_dense(), rhs)
        }
    }
}

/// Jacobi-preconditioned conjugate gradients.
///
/// Converged when the relative residual is within `tol` and, in addition,
/// every residual component divided by its diagonal entry is within `tol`.
/// The second test bounds the per-vertex harmonic defect directly, which the
/// norm alone does not do on weakly coupled pixels.
fn pcg(a: &CsrMatrix, b: &[f64], inv_diag: &[f64], tol: f64, cap: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let b_scale = norm(b).max(1.0);

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];

    let converged = |r: &[f64], z: &[f64]| converged(r, z, b_scale, tol);

    for _ in 0..cap {
        if converged(&r, &z) {
            // Recursive residuals drift; confirm against the true residual and
            // restart from it if needed.
            a.mul_vec_into(&x, &mut q);
            for i in 0..n {
                r[i] = b[i] - q[i];
                z[i] = r[i] * inv_diag[i];
            }
            if converged(&r, &z) {
                return Ok(x);
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }

        a.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    a.mul_vec_into(&x, &mut q);
    for i in 0..n {
        r[i] = b[i] - q[i];
        z[i] = r[i] * inv_diag[i];
    }
    if converged(&r, &z) {
        return Ok(x);
    }
    Err(Error::SolverFailure {
        iterations: cap,
        residual: norm(&r) / b_scale,
    })
}

fn inverse_diagonal(a: &CsrMatrix) -> Result<Vec<f64>> {
    (0..a.nrows())
        .map(|i| {
            let d = a.get(i, i);
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::NotPositiveDefinite)
            }
        })
        .collect()
}

fn converged(r: &[f64], z: &[f64], b_scale: f64, tol: f64) -> bool {
    norm(r) / b_scale <= tol && z.iter().all(|zi| zi.abs() <= tol)
}

/// Jacobi-preconditioned MINRES for symmetric indefinite systems, restarted
/// from the true residual until the same test as [`pcg`] passes.
fn minres(a: &CsrMatrix, b: &[f64], inv_diag: &[f64], tol: f64, cap: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let b_scale = norm(b).max(1.0);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut ax = vec![0.0; n];
    let mut used = 0;
    loop {
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        if converged(&r, &z, b_scale, tol) {
            return Ok(x);
        }
        if used >= cap {
            return Err(Error::SolverFailure {
                iterations: used,
                residual: norm(&r) / b_scale,
            });
        }
        let (d, steps) = minres_cycle(a, &r, inv_diag, 0.1 * tol, cap - used);
        if steps == 0 {
            return Err(Error::SingularSystem);
        }
        used += steps;
        for i in 0..n {
            x[i] += d[i];
        }
        a.mul_vec_into(&x, &mut ax);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
    }
}

/// One MINRES run on `A d = b` from zero. Returns the iterate and the number
/// of steps taken.
fn minres_cycle(a: &CsrMatrix, b: &[f64], inv_diag: &[f64], rtol: f64, cap: usize) -> (Vec<f64>, usize) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y: Vec<f64> = r1.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let beta1 = dot(&r1, &y).sqrt();
    if !(beta1 > 0.0) {
        return (x, 0);
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];

    for k in 0..cap {
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        a.mul_vec_into(&v, &mut y);
        if k > 0 {
            let f = beta / oldb;
            for i in 0..n {
                y[i] -= f * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for i in 0..n {
            y[i] -= f * r2[i];
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        for i in 0..n {
            y[i] = r2[i] * inv_diag[i];
        }
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        for i in 0..n {
            let w1 = w2[i];
            w2[i] = w[i];
            w[i] = (v[i] - oldeps * w1 - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        if phibar <= rtol * beta1 || beta == 0.0 {
            return (x, k + 1);
        }
    }
    (x, cap)
}

fn cholesky_solve(mut m: Vec<Vec<f64>>, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let mut d = m[j][j];
        for k in 0..j {
            d -= m[j][k] * m[j][k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        m[j][j] = d;
        for i in j + 1..n {
            let mut s = m[i][j];
            for k in 0..j {
                s -= m[i][k] * m[j][k];
            }
            m[i][j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= m[i][k] * y[k];
        }
        y[i] /= m[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= m[k][i] * y[k];
        }
        y[i] /= m[i][i];
    }
    Ok(y)
}

/// Reference solve of `lap.lu() * x = rhs` by dense Gaussian elimination with
/// partial pivoting.
pub fn dense_oracle_solve(lap: &SparseLaplacian, rhs: &[f64]) -> Result<Vec<f64>> {
    dense_oracle_matrix(lap.lu(), rhs)
}

pub fn dense_oracle_matrix(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::OracleTooLarge { size: n, limit: DENSE_LIMIT });
    }
    if rhs.len() != n || a.ncols() != n {
        return Err(Error::invalid("oracle system dimensions do not match"));
    }
    let mut m = a.to_dense();
    let mut b = rhs.to_vec();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let eps = scale * 1e-14;

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if !(m[pivot][col].abs() > eps) {
            return Err(Error::SingularSystem);
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        let (top, rest) = m.split_at_mut(col + 1);
        let prow = &top[col];
        for (k, row) in rest.iter_mut().enumerate() {
            let factor = row[col] / prow[col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                row[c] -= factor * prow[c];
            }
            b[col + 1 + k] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|c| m[i][c] * x[c]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{assemble_laplacian, EdgeWeights};
    use crate::seeds::SeedState;
    use crate::sparse::CsrBuilder;

    fn dense_to_csr(rows: &[&[f64]]) -> CsrMatrix {
        let mut b = CsrBuilder::with_capacity(rows.len(), rows.len(), 0);
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.push(j, v);
                }
            }
            b.finish_row();
        }
        b.build()
    }

    #[test]
    fn scalar_system() {
        let a = dense_to_csr(&[&[2.0]]);
        let x = solve_matrix(&a, &[2.0], &SolveOptions::default()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert_eq!(dense_oracle_matrix(&a, &[2.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn strip_midpoint() {
        let w = EdgeWeights::uniform(3, 1, 1.0).unwrap();
        let seeds = SeedState::from_sets(3, 1, [2], [0]).unwrap();
        let lap = assemble_laplacian(&w, &seeds).unwrap();
        let b = lap.rhs();
        for method in [SolveMethod::PreconditionedCg, SolveMethod::DenseDirect] {
            let opts = SolveOptions { method, ..Default::default() };
            let x = solve_system(&lap, &b, &opts).unwrap();
            assert!((x[0] - 0.5).abs() < 1e-12);
        }
        assert_eq!(dense_oracle_solve(&lap, &b).unwrap(), vec![0.5]);
    }

    #[test]
    fn identity_oracle_returns_rhs() {
        let a = dense_to_csr(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let b = [3.0, -1.5, 0.25];
        assert_eq!(dense_oracle_matrix(&a, &b).unwrap(), b.to_vec());
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let a = dense_to_csr(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let x = solve_matrix(&a, &[0.0, 0.0], &SolveOptions::default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn indefinite_matrix_is_rejected_by_cholesky() {
        let a = dense_to_csr(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let opts = SolveOptions { method: SolveMethod::DenseDirect, ..Default::default() };
        assert!(matches!(solve_matrix(&a, &[1.0, 0.0], &opts), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn indefinite_matrix_falls_back_to_minres() {
        // Eigenvalues 3 and -1; the solution of [1, 0] is [-1/3, 2/3].
        let a = dense_to_csr(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let x = solve_matrix(&a, &[1.0, 0.0], &SolveOptions::default()).unwrap();
        assert!((x[0] + 1.0 / 3.0).abs() < 1e-9 && (x[1] - 2.0 / 3.0).abs() < 1e-9, "{x:?}");

        let a = dense_to_csr(&[
            &[2.0, -1.0, 0.0, 0.0],
            &[-1.0, 0.5, -1.0, 0.0],
            &[0.0, -1.0, 0.5, -1.0],
            &[0.0, 0.0, -1.0, 2.0],
        ]);
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = solve_matrix(&a, &b, &SolveOptions::default()).unwrap();
        let oracle = dense_oracle_matrix(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&oracle) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn nonpositive_diagonal_is_rejected() {
        let a = dense_to_csr(&[&[0.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            solve_matrix(&a, &[1.0, 0.0], &SolveOptions::default()),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn singular_oracle_system() {
        let a = dense_to_csr(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(dense_oracle_matrix(&a, &[1.0, 1.0]), Err(Error::SingularSystem)));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let n = 30;
        let mut b = CsrBuilder::with_capacity(n, n, 3 * n);
        for i in 0..n {
            if i > 0 {
                b.push(i - 1, -1.0);
            }
            b.push(i, 2.0);
            if i + 1 < n {
                b.push(i + 1, -1.0);
            }
            b.finish_row();
        }
        let a = b.build();
        let rhs = vec![1.0; n];
        let opts = SolveOptions { max_iterations: Some(2), ..Default::default() };
        match solve_matrix(&a, &rhs, &opts) {
            Err(Error::SolverFailure { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-8);
            }
            other => panic!("expected failure, got {other:?}"),
        }
        let x = solve_matrix(&a, &rhs, &SolveOptions::default()).unwrap();
        assert!(relative_residual(&a, &x, &rhs) <= 1e-8);
    }

    #[test]
    fn oracle_size_guard() {
        let n = DENSE_LIMIT + 1;
        let a = CsrMatrix::zeros(n, n);
        assert!(matches!(
            dense_oracle_matrix(&a, &vec![0.0; n]),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn rejects_bad_options_and_lengths() {
        let a = dense_to_csr(&[&[2.0]]);
        let bad = SolveOptions { tolerance: 0.0, ..Default::default() };
        assert!(solve_matrix(&a, &[1.0], &bad).is_err());
        assert!(solve_matrix(&a, &[1.0, 2.0], &SolveOptions::default()).is_err());
    }
}
