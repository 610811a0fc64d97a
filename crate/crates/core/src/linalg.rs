//! Dense complex linear algebra helpers and a Hermitian Lanczos solver.

use faer::{Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GapError, Result};

pub use faer::c64;

/// Dense complex matrix used throughout the crate.
pub type CMat = Mat<c64>;

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}

/// `z · a`.
pub fn scaled(a: &CMat, z: c64) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * z)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

/// `(A + A†) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

/// Frobenius norm of `U†U - I`; an upper bound on the operator-norm residual.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let mut g = u.adjoint() * u;
    for i in 0..g.nrows() {
        g[(i, i)] -= c64::new(1.0, 0.0);
    }
    g.norm_l2()
}

/// Frobenius norm of `A - A†`.
pub fn hermiticity_residual(a: &CMat) -> f64 {
    let mut r = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let z = a[(i, j)] - a[(j, i)].conj();
            r += z.norm_sqr();
        }
    }
    r.sqrt()
}

/// Largest singular value by dense SVD.
pub fn op_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a
        .singular_values()
        .map_err(|e| GapError::Numerical(format!("singular value decomposition failed: {e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| GapError::Numerical(format!("Hermitian eigensolver failed: {e:?}")))?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let h = hermitian_part(a);
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| GapError::Numerical(format!("Hermitian eigensolver failed: {e:?}")))
}

/// `exp(iH)` for Hermitian `H`, via diagonalisation.
pub fn expi_hermitian(h: &CMat) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(h)?;
    Ok(conjugate_diagonal(&vectors, values.iter().map(|&x| c64::cis(x))))
}

/// `V diag(w) V†`.
pub fn conjugate_diagonal(v: &CMat, w: impl IntoIterator<Item = c64>) -> CMat {
    let w: Vec<c64> = w.into_iter().collect();
    let scaled = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * w[j]);
    scaled * v.adjoint()
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = theta.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

// Irrational mixing coefficients for the commuting pair (Re U, Im U).
const MIXING: [f64; 5] = [0.618_033_988_749_895, 0.471_404_520_791_031_7, 1.324_717_957_244_746, 0.301_029_995_663_981_2, 2.236_067_977_499_79];

/// Spectral decomposition of a unitary matrix: eigenphases in `(-π, π]` and an
/// orthonormal eigenbasis (columns).
///
/// `U` is normal, so `(U + U†)/2` and `(U - U†)/2i` commute; a generic real
/// combination of the two is Hermitian with the same eigenvectors.
pub fn unitary_eigen(u: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = u.nrows();
    let scale = 1e-9 * (n as f64).sqrt().max(1.0);
    for gamma in MIXING {
        let k = Mat::from_fn(n, n, |i, j| {
            let re = (u[(i, j)] + u[(j, i)].conj()) * 0.5;
            let im = (u[(i, j)] - u[(j, i)].conj()) * c64::new(0.0, -0.5);
            re + im * gamma
        });
        let (_, v) = hermitian_eigen(&k)?;
        let uv = u * &v;
        let mut phases = Vec::with_capacity(n);
        let mut residual = 0.0f64;
        for j in 0..n {
            let mut z = c64::new(0.0, 0.0);
            for i in 0..n {
                z += v[(i, j)].conj() * uv[(i, j)];
            }
            for i in 0..n {
                residual = residual.max((uv[(i, j)] - v[(i, j)] * z).norm());
            }
            phases.push(wrap_phase(z.arg()));
        }
        if residual <= scale {
            return Ok((phases, v));
        }
    }
    Err(GapError::Numerical("unitary eigendecomposition did not separate eigenspaces".into()))
}

/// Result of a Lanczos run for the spectral radius of a Hermitian operator.
#[derive(Debug, Clone, Copy)]
pub struct LanczosOutcome {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest |eigenvalue| of a Hermitian operator given by `apply` (`y = A x`),
/// using Lanczos with full reorthogonalisation.
///
/// Converged when both extremal Ritz pairs have residual `≤ tol·max|θ|`, or on an
/// invariant-subspace breakdown.
pub fn lanczos_max_abs<F>(n: usize, apply: F, seed: u64, tol: f64, max_iter: usize) -> LanczosOutcome
where
    F: Fn(&[c64], &mut [c64]),
{
    if n == 0 {
        return LanczosOutcome { value: 0.0, iterations: 0, converged: true };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<c64> = (0..n)
        .map(|_| c64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    normalize(&mut q);

    let mut basis: Vec<Vec<c64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![c64::new(0.0, 0.0); n];
    let mut best = 0.0;
    let max_iter = max_iter.max(1);

    for j in 0..max_iter.min(n) {
        apply(&q, &mut w);
        let alpha = dot(&q, &w).re;
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= *qi * alpha;
        }
        if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= *pi * beta;
            }
        }
        basis.push(std::mem::take(&mut q));
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= *bi * c;
                }
            }
        }
        let beta = norm(&w);
        let m = j + 1;
        let breakdown = beta <= 1e-13 * alphas.iter().fold(1e-300f64, |a, x| a.max(x.abs()));
        if breakdown || m == n || m % 4 == 0 || m == max_iter {
            let (theta, resid) = ritz_extremes(&alphas, &betas, beta);
            let (lo, hi) = (theta.0, theta.1);
            best = lo.abs().max(hi.abs());
            let thresh = tol * best.max(1e-300);
            if breakdown || m == n || (resid.0 <= thresh && resid.1 <= thresh) {
                return LanczosOutcome { value: best, iterations: m, converged: true };
            }
        }
        betas.push(beta);
        q = w.iter().map(|z| z / beta).collect();
        w.iter_mut().for_each(|z| *z = c64::new(0.0, 0.0));
    }
    LanczosOutcome { value: best, iterations: basis.len(), converged: false }
}

/// Extremal Ritz values (min, max) and their residual estimates.
fn ritz_extremes(alphas: &[f64], betas: &[f64], next_beta: f64) -> ((f64, f64), (f64, f64)) {
    let m = alphas.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i == j + 1 {
            betas[j]
        } else if j == i + 1 {
            betas[i]
        } else {
            0.0
        }
    });
    let evd = t.self_adjoint_eigen(Side::Lower).expect("tridiagonal eigensolve");
    let s = evd.S().column_vector();
    let u = evd.U();
    let lo = s[0];
    let hi = s[m - 1];
    let r_lo = (next_beta * u[(m - 1, 0)]).abs();
    let r_hi = (next_beta * u[(m - 1, m - 1)]).abs();
    ((lo, hi), (r_lo, r_hi))
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).fold(c64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

fn norm(a: &[c64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [c64]) {
    let s = norm(a);
    a.iter_mut().for_each(|z| *z /= s);
}

/// Dense matrix-vector product `y = A x`.
pub fn matvec(a: &CMat, x: &[c64], y: &mut [c64]) {
    let n = a.ncols();
    y.iter_mut().for_each(|z| *z = c64::new(0.0, 0.0));
    for j in 0..n {
        let xj = x[j];
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        let col = a.col(j);
        for (yi, aij) in y.iter_mut().zip(col.iter()) {
            *yi += aij * xj;
        }
    }
}
