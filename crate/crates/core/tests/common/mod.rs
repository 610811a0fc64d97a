//! Reference computations that share no code with the library's representation
//! machinery: spin-j matrices for PU(2), brute-force weight lists and plain
//! dense eigensolves.

#![allow(dead_code)]

use faer::{c64, Mat, Side};

pub type M = Mat<c64>;

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

/// Spin-j angular momentum matrices `(J_x, J_y, J_z)` in the basis `m = j, j−1, …, −j`.
pub fn spin_matrices(spin: usize) -> (M, M, M) {
    let j = spin as f64;
    let n = 2 * spin + 1;
    let m = |i: usize| j - i as f64;
    // J_+ |m⟩ = sqrt(j(j+1) − m(m+1)) |m+1⟩, and |m+1⟩ sits one index above |m⟩
    let jp = Mat::from_fn(n, n, |r, c| {
        if c >= 1 && r == c - 1 {
            c64::new((j * (j + 1.0) - m(c) * (m(c) + 1.0)).sqrt(), 0.0)
        } else {
            zero()
        }
    });
    let jm = jp.adjoint().to_owned();
    let jx = Mat::from_fn(n, n, |r, c| (jp[(r, c)] + jm[(r, c)]) * 0.5);
    let jy = Mat::from_fn(n, n, |r, c| (jp[(r, c)] - jm[(r, c)]) * c64::new(0.0, -0.5));
    let jz = Mat::from_fn(n, n, |r, c| if r == c { c64::new(m(r), 0.0) } else { zero() });
    (jx, jy, jz)
}

/// Rotation angle and unit axis of `u ∈ SU(2)` written as `exp(−iθ n·σ/2)`.
pub fn axis_angle(u: &M) -> (f64, [f64; 3]) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let root = det.sqrt();
    let a = u[(0, 0)] / root;
    let b = u[(0, 1)] / root;
    let v = [-b.im, -b.re, -a.im];
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if s < 1e-300 {
        return (0.0, [0.0, 0.0, 1.0]);
    }
    (2.0 * s.atan2(a.re), [v[0] / s, v[1] / s, v[2] / s])
}

/// The spin-j image `exp(−iθ n·J)` of `u ∈ SU(2)`.
pub fn spin_rep(u: &M, spin: usize) -> M {
    let (theta, axis) = axis_angle(u);
    let (jx, jy, jz) = spin_matrices(spin);
    let n = 2 * spin + 1;
    let h = Mat::from_fn(n, n, |r, c| jx[(r, c)] * axis[0] + jy[(r, c)] * axis[1] + jz[(r, c)] * axis[2]);
    let evd = h.self_adjoint_eigen(Side::Lower).unwrap();
    let vals: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let v = evd.U();
    let scaled = Mat::from_fn(n, n, |r, c| v[(r, c)] * c64::cis(-theta * vals[c]));
    &scaled * v.adjoint()
}

pub fn max_abs_eigenvalue(h: &M) -> f64 {
    let n = h.nrows();
    let sym = Mat::from_fn(n, n, |r, c| (h[(r, c)] + h[(c, r)].conj()) * 0.5);
    sym.self_adjoint_eigenvalues(Side::Lower).unwrap().into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Norms of the symmetric averaging blocks for spins `1..=t`.
pub fn su2_block_norms(gens: &[M], t: usize) -> Vec<f64> {
    (1..=t)
        .map(|spin| {
            let n = 2 * spin + 1;
            let mut acc = Mat::<c64>::zeros(n, n);
            for u in gens {
                let d = spin_rep(u, spin);
                acc += &d + d.adjoint();
            }
            let acc = Mat::from_fn(n, n, |r, c| acc[(r, c)] / (2 * gens.len()) as f64);
            max_abs_eigenvalue(&acc)
        })
        .collect()
}

/// `gap_t` of `{U_i, U_i⁻¹}` for d = 2.
pub fn su2_gap(gens: &[M], t: usize) -> f64 {
    1.0 - su2_block_norms(gens, t).into_iter().fold(0.0, f64::max)
}

/// `g` at scale `t`: squared generators, every removal set, minimum per size.
pub fn su2_g(gens: &[M], t: usize) -> f64 {
    let k = gens.len();
    let squares: Vec<M> = gens.iter().map(|u| u * u).collect();
    let mut total = 0.0;
    for m in 0..=k - 2 {
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let kept: Vec<M> = (0..k).filter(|i| mask & (1 << i) == 0).map(|i| squares[i].clone()).collect();
            best = best.min(su2_gap(&kept, t).max(0.0));
        }
        total += best * best;
    }
    total / (2 * k) as f64
}

/// Every nonincreasing zero-sum integer vector of length `d` with positive part ≤ t,
/// found by scanning the box `[−t, t]^d`; sorted in descending lexicographic order.
pub fn brute_force_weights(d: usize, t: i64) -> Vec<Vec<i64>> {
    let side = (2 * t + 1) as usize;
    let mut out = Vec::new();
    let total = side.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let mut w = Vec::with_capacity(d);
        for _ in 0..d {
            w.push((c % side) as i64 - t);
            c /= side;
        }
        if w.windows(2).any(|p| p[0] < p[1]) || w.iter().sum::<i64>() != 0 {
            continue;
        }
        if w.iter().filter(|&&x| x > 0).sum::<i64>() <= t {
            out.push(w);
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    out
}
