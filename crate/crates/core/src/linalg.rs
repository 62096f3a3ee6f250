//! Small dense-vector kernels for the implicit diffusion step.
//!
//! All reductions run sequentially in index order so results are bit-for-bit
//! reproducible.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final `‖b − A x‖ / ‖b‖`.
    pub relative_residual: f64,
    pub converged: bool,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive-definite
/// operator given as `apply(x, y)` computing `y = A x`.
///
/// `x` holds the initial guess on entry and the solution on exit.
pub fn pcg<F>(
    apply: F,
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
) -> CgOutcome
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    let mut it = 0;

    while res > tolerance && it < max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        it += 1;
    }

    CgOutcome {
        iterations: it,
        relative_residual: res,
        converged: res <= tolerance,
    }
}

/// Thomas algorithm for `sub[i]·x[i-1] + diag[i]·x[i] + sup[i]·x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored. Stable for diagonally dominant systems.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if n == 0 {
        return d;
    }
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> impl Fn(&[f64], &mut [f64]) {
        move |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = (2.0 + shift) * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        }
    }

    #[test]
    fn cg_matches_tridiagonal() {
        let n = 50;
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let mut x = vec![0.0; n];
        let inv = vec![1.0 / 2.1; n];
        let out = pcg(laplacian_1d(n, 0.1), &inv, &b, &mut x, 1e-13, 1000);
        assert!(out.converged);
        let sub = vec![-1.0; n];
        let sup = vec![-1.0; n];
        let diag = vec![2.1; n];
        let direct = solve_tridiagonal(&sub, &diag, &sup, &b);
        for (a, d) in x.iter().zip(&direct) {
            assert!((a - d).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![3.0; 4];
        let out = pcg(laplacian_1d(4, 1.0), &[1.0; 4], &[0.0; 4], &mut x, 1e-12, 10);
        assert!(out.converged);
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn iteration_budget_reported() {
        let n = 200;
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let out = pcg(laplacian_1d(n, 0.0), &vec![0.5; n], &b, &mut x, 1e-14, 3);
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }
}
