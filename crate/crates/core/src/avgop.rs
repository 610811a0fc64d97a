//! Averaging operators `T_{ν_S,t}` over the blocks `λ ∈ Λ̃_t`, and spectral gaps at scale `t`.
//!
//! The operator is block diagonal with block `π_λ(ν_S) = (1/|S|) Σ_{U∈S} π_λ(U)`.
//! The trivial block is the 1×1 identity and is left out, so
//! `gap_t(S) = 1 − max_{λ∈Λ̃_t} ‖π_λ(ν_S)‖_op`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, GapError, Result};
use crate::gates::GateSet;
use crate::irrep::{irrep_matrix, BasisCache, DEFAULT_DIM_CAP};
use crate::linalg::{self, c64, CMat};
use crate::weightlat::{enumerate_nontrivial_weights, Weight};

/// Numerical settings for block norms and gap computations.
#[derive(Debug, Clone, Serialize)]
pub struct GapOptions {
    /// Treat a non-symmetric set as `S ∪ S⁻¹` instead of rejecting it.
    pub auto_symmetrize: bool,
    /// Blocks below this dimension use a dense eigensolver.
    pub dense_threshold: usize,
    /// Relative tolerance of the Lanczos solver.
    pub lanczos_tol: f64,
    /// Lanczos iteration cap as a multiple of the block dimension.
    pub max_iter_factor: usize,
    /// Cap on `d_λ`.
    pub dim_cap: u128,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            auto_symmetrize: false,
            dense_threshold: 512,
            lanczos_tol: 1e-10,
            max_iter_factor: 10,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Dense,
    Lanczos,
    DenseFallback,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockNorm {
    pub norm: f64,
    pub iterations: usize,
    pub method: NormMethod,
}

/// Operator norm of one block; Hermitian blocks use the spectral radius.
pub fn block_operator_norm(a: &CMat, hermitian: bool) -> Result<BlockNorm> {
    block_operator_norm_with(a, hermitian, 0, &GapOptions::default())
}

pub fn block_operator_norm_with(a: &CMat, hermitian: bool, seed: u64, opts: &GapOptions) -> Result<BlockNorm> {
    let n = a.nrows();
    if n == 0 {
        return Ok(BlockNorm { norm: 0.0, iterations: 0, method: NormMethod::Dense });
    }
    if n < opts.dense_threshold {
        return Ok(BlockNorm { norm: dense_norm(a, hermitian)?, iterations: 0, method: NormMethod::Dense });
    }
    let max_iter = opts.max_iter_factor.saturating_mul(n).max(1);
    let out = if hermitian {
        linalg::lanczos_max_abs(n, |x, y| linalg::matvec(a, x, y), seed, opts.lanczos_tol, max_iter)
    } else {
        let mut tmp = vec![c64::new(0.0, 0.0); n];
        let adj = linalg::adjoint(a);
        let tmp_cell = std::cell::RefCell::new(&mut tmp);
        let mut out = linalg::lanczos_max_abs(
            n,
            |x, y| {
                let mut t = tmp_cell.borrow_mut();
                linalg::matvec(a, x, &mut t);
                linalg::matvec(&adj, &t, y);
            },
            seed,
            opts.lanczos_tol,
            max_iter,
        );
        out.value = out.value.sqrt();
        out
    };
    if out.converged {
        Ok(BlockNorm { norm: out.value, iterations: out.iterations, method: NormMethod::Lanczos })
    } else {
        log::warn!("Lanczos did not converge after {} iterations (n = {n}); using dense eigensolver", out.iterations);
        Ok(BlockNorm { norm: dense_norm(a, hermitian)?, iterations: out.iterations, method: NormMethod::DenseFallback })
    }
}

fn dense_norm(a: &CMat, hermitian: bool) -> Result<f64> {
    if hermitian {
        let ev = linalg::hermitian_eigenvalues(a)?;
        Ok(ev.iter().fold(0.0f64, |m, x| m.max(x.abs())))
    } else {
        linalg::op_norm(a)
    }
}

/// Deterministic Lanczos seed for a block.
pub fn block_seed(weight: &Weight, set_size: usize) -> u64 {
    let mut h = DefaultHasher::new();
    weight.entries().hash(&mut h);
    set_size.hash(&mut h);
    h.finish()
}

fn effective_set(set: &GateSet, opts: &GapOptions) -> Result<GateSet> {
    if set.symmetric() {
        Ok(set.clone())
    } else if opts.auto_symmetrize {
        Ok(set.symmetrized())
    } else {
        invalid("gate set is not symmetric; pass the auto-symmetrize option to use S ∪ S⁻¹")
    }
}

/// `(1/|S|) Σ_{U∈S} π_λ(U)`.
pub fn averaging_block(weight: &Weight, set: &GateSet) -> Result<CMat> {
    averaging_block_cached(weight, set, &BasisCache::new())
}

pub fn averaging_block_cached(weight: &Weight, set: &GateSet, cache: &BasisCache) -> Result<CMat> {
    if weight.dim_group() != set.d() {
        return invalid(format!("weight {weight} does not match gate dimension {}", set.d()));
    }
    let basis = cache.get(weight)?;
    let n = basis.dim();
    let mut acc = CMat::zeros(n, n);
    for gate in set.gates() {
        let p = irrep_matrix(&basis, &gate.matrix)?;
        if set.symmetric() {
            acc += &p + p.adjoint();
        } else {
            acc += &p;
        }
    }
    let scale = 1.0 / set.len() as f64;
    let mut out = linalg::scaled(&acc, c64::new(scale, 0.0));
    if set.symmetric() {
        out = linalg::hermitian_part(&out);
    }
    Ok(out)
}

/// The averaging operator restricted to `Λ̃_t`, one dense block per weight.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub t: usize,
    pub hermitian: bool,
    pub blocks: Vec<(Weight, CMat)>,
}

pub fn block_operator(set: &GateSet, t: usize, opts: &GapOptions) -> Result<BlockOperator> {
    let cache = BasisCache::with_dim_cap(opts.dim_cap);
    let weights = enumerate_nontrivial_weights(set.d(), t)?;
    let blocks = weights
        .into_par_iter()
        .map(|w| averaging_block_cached(&w, set, &cache).map(|b| (w, b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockOperator { t, hermitian: set.symmetric(), blocks })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightNorm {
    pub weight: Weight,
    pub dim: usize,
    pub norm: f64,
    pub iterations: usize,
    pub method: NormMethod,
}

/// Spectral gap at scale `t` with the per-weight breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub t: usize,
    pub gap: f64,
    pub worst_weight: Weight,
    pub per_weight_norms: Vec<WeightNorm>,
}

impl GapReport {
    pub fn max_norm(&self) -> f64 {
        1.0 - self.gap
    }

    pub fn norm_of(&self, weight: &Weight) -> Option<f64> {
        self.per_weight_norms.iter().find(|w| &w.weight == weight).map(|w| w.norm)
    }
}

/// Per-block progress callback.
pub type Progress<'a> = &'a (dyn Fn(&WeightNorm) + Sync);

pub fn gap_at_scale(set: &GateSet, t: usize) -> Result<GapReport> {
    gap_at_scale_with(set, t, &GapOptions::default(), None)
}

pub fn gap_at_scale_with(set: &GateSet, t: usize, opts: &GapOptions, progress: Option<Progress>) -> Result<GapReport> {
    if t == 0 {
        return invalid("gap_t needs t >= 1 (Λ̃_0 is empty)");
    }
    let set = effective_set(set, opts)?;
    let cache = BasisCache::with_dim_cap(opts.dim_cap);
    let weights = enumerate_nontrivial_weights(set.d(), t)?;
    let norms = weights
        .into_par_iter()
        .map(|w| {
            let block = averaging_block_cached(&w, &set, &cache)?;
            let bn = block_operator_norm_with(&block, true, block_seed(&w, set.len()), opts)?;
            let wn = WeightNorm { dim: block.nrows(), weight: w, norm: bn.norm, iterations: bn.iterations, method: bn.method };
            if let Some(p) = progress {
                p(&wn);
            }
            Ok(wn)
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_report(t, norms)
}

fn assemble_report(t: usize, norms: Vec<WeightNorm>) -> Result<GapReport> {
    let mut worst: Option<&WeightNorm> = None;
    for wn in &norms {
        if !wn.norm.is_finite() {
            return Err(GapError::Numerical(format!("non-finite norm for block {}", wn.weight)));
        }
        if worst.map_or(true, |w| wn.norm > w.norm) {
            worst = Some(wn);
        }
    }
    let worst = worst.expect("Λ̃_t is nonempty for t >= 1");
    let (gap, worst_weight) = (1.0 - worst.norm, worst.weight.clone());
    Ok(GapReport { t, gap, worst_weight, per_weight_norms: norms })
}

/// Gap of `ν̃_S * ν_S` together with the check `gap(ν̃*ν) ≥ gap(ν) ≥ gap(ν̃*ν)/2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvolutionSquare {
    pub gap: f64,
    pub gap_convolution_square: f64,
    /// Largest violation of the sandwich inequality (0 when it holds).
    pub violation: f64,
}

/// Works for symmetric and non-symmetric sets alike (non-symmetric blocks use
/// the largest singular value).
pub fn convolution_square_gap(set: &GateSet, t: usize) -> Result<ConvolutionSquare> {
    if t == 0 {
        return invalid("gap_t needs t >= 1");
    }
    let opts = GapOptions::default();
    let cache = BasisCache::new();
    let weights = enumerate_nontrivial_weights(set.d(), t)?;
    let pairs = weights
        .into_par_iter()
        .map(|w| {
            let block = averaging_block_cached(&w, set, &cache)?;
            let seed = block_seed(&w, set.len());
            let single = block_operator_norm_with(&block, set.symmetric(), seed, &opts)?.norm;
            let square = linalg::hermitian_part(&(block.adjoint() * &block));
            let double = block_operator_norm_with(&square, true, seed, &opts)?.norm;
            Ok((single, double))
        })
        .collect::<Result<Vec<_>>>()?;
    let max1 = pairs.iter().fold(0.0f64, |m, p| m.max(p.0));
    let max2 = pairs.iter().fold(0.0f64, |m, p| m.max(p.1));
    let gap = 1.0 - max1;
    let gap2 = 1.0 - max2;
    let violation = 0.0f64.max(gap - gap2).max(gap2 / 2.0 - gap);
    Ok(ConvolutionSquare { gap, gap_convolution_square: gap2, violation })
}

/// `max_λ ‖π_λ(ν_S)^ℓ‖` for `ℓ = 1..=max_len`.
pub fn convergence_profile(set: &GateSet, t: usize, max_len: usize) -> Result<Vec<f64>> {
    let op = block_operator(set, t, &GapOptions::default())?;
    let per_block = op
        .blocks
        .par_iter()
        .map(|(_, b)| {
            let mut out = Vec::with_capacity(max_len);
            let mut power = b.clone();
            for l in 1..=max_len {
                if l > 1 {
                    power = &power * b;
                }
                out.push(dense_norm(&power, op.hermitian)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..max_len).map(|l| per_block.iter().fold(0.0f64, |m, v| m.max(v[l]))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{haar_random_gateset, Gate};
    use crate::linalg::identity;
    use faer::Mat;

    fn diag_gate(label: &str, phases: &[f64]) -> Gate {
        let n = phases.len();
        Gate::new(label, Mat::from_fn(n, n, |i, j| if i == j { c64::cis(phases[i]) } else { c64::new(0.0, 0.0) }))
    }

    fn w(v: &[i64]) -> Weight {
        Weight::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_pair_has_zero_gap() {
        let s = GateSet::new(2, vec![Gate::new("I", identity(2))], true).unwrap();
        assert_eq!(s.len(), 2);
        let b = averaging_block(&w(&[2, -2]), &s).unwrap();
        assert!(linalg::frobenius(&(b - identity(5))) < 1e-12);
        for t in 1..4 {
            assert!(gap_at_scale(&s, t).unwrap().gap.abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_pair_block_is_hermitian() {
        let s = haar_random_gateset(3, 1, 4);
        let b = averaging_block(&w(&[1, 0, -1]), &s).unwrap();
        assert!(linalg::hermiticity_residual(&b) < 1e-12);
    }

    #[test]
    fn quarter_turn_adjoint_block() {
        use std::f64::consts::FRAC_PI_2;
        let s = GateSet::new(2, vec![diag_gate("Z4", &[FRAC_PI_2, -FRAC_PI_2])], true).unwrap();
        let b = averaging_block(&w(&[1, -1]), &s).unwrap();
        let mut diag: Vec<f64> = (0..3).map(|i| b[(i, i)].re).collect();
        diag.sort_by(f64::total_cmp);
        for (g, e) in diag.iter().zip([-1.0, -1.0, 1.0]) {
            assert!((g - e).abs() < 1e-12);
        }
        assert!(linalg::frobenius(&(b.clone() - Mat::from_fn(3, 3, |i, j| if i == j { b[(i, i)] } else { c64::new(0.0, 0.0) }))) < 1e-12);
    }

    #[test]
    fn diagonal_pair_has_zero_gap() {
        let s = GateSet::new(2, vec![diag_gate("Z", &[0.4, -0.4])], true).unwrap();
        for t in 1..4 {
            let r = gap_at_scale(&s, t).unwrap();
            assert!(r.gap.abs() < 1e-12, "t={t} gap={}", r.gap);
        }
    }

    #[test]
    fn norms_of_trivial_blocks() {
        assert_eq!(block_operator_norm(&identity(4), true).unwrap().norm, 1.0);
        assert_eq!(block_operator_norm(&CMat::zeros(4, 4), true).unwrap().norm, 0.0);
        assert_eq!(block_operator_norm(&CMat::zeros(4, 4), false).unwrap().norm, 0.0);
    }

    #[test]
    fn lanczos_path_matches_dense() {
        let s = haar_random_gateset(2, 2, 21);
        let b = averaging_block(&w(&[300, -300]), &s).unwrap();
        assert_eq!(b.nrows(), 601);
        let lz = block_operator_norm_with(&b, true, 9, &GapOptions::default()).unwrap();
        assert_eq!(lz.method, NormMethod::Lanczos);
        let dense = dense_norm(&b, true).unwrap();
        assert!((lz.norm - dense).abs() < 1e-9, "{} vs {}", lz.norm, dense);
        let ns = haar_random_gateset(2, 2, 21).with_symmetric(false);
        let b = averaging_block(&w(&[300, -300]), &ns).unwrap();
        let lz = block_operator_norm_with(&b, false, 9, &GapOptions::default()).unwrap();
        let dense = dense_norm(&b, false).unwrap();
        assert!((lz.norm - dense).abs() < 1e-9, "{} vs {}", lz.norm, dense);
    }

    #[test]
    fn rejects_non_symmetric_unless_asked() {
        let s = haar_random_gateset(2, 2, 1).with_symmetric(false);
        assert!(gap_at_scale(&s, 2).is_err());
        let opts = GapOptions { auto_symmetrize: true, ..Default::default() };
        let a = gap_at_scale_with(&s, 3, &opts, None).unwrap();
        let b = gap_at_scale(&haar_random_gateset(2, 2, 1), 3).unwrap();
        assert!((a.gap - b.gap).abs() < 1e-12);
        assert!(gap_at_scale(&b_set(), 0).is_err());
    }

    fn b_set() -> GateSet {
        haar_random_gateset(2, 2, 1)
    }

    #[test]
    fn report_is_consistent() {
        let s = haar_random_gateset(3, 2, 8);
        let r = gap_at_scale(&s, 2).unwrap();
        assert_eq!(r.per_weight_norms.len(), 4);
        let max = r.per_weight_norms.iter().map(|x| x.norm).fold(0.0, f64::max);
        assert_eq!(r.gap, 1.0 - max);
        assert_eq!(r.norm_of(&r.worst_weight), Some(max));
        assert!(r.gap > 0.0 && r.gap <= 1.0);
    }

    #[test]
    fn convolution_square_identity() {
        let s = haar_random_gateset(2, 2, 3);
        let c = convolution_square_gap(&s, 4).unwrap();
        let expect = 1.0 - (1.0 - c.gap).powi(2);
        assert!((c.gap_convolution_square - expect).abs() < 1e-10);
        assert!(c.violation <= 1e-8);
        let id = GateSet::new(2, vec![Gate::new("I", identity(2))], true).unwrap();
        let c = convolution_square_gap(&id, 2).unwrap();
        assert!(c.gap_convolution_square.abs() < 1e-12 && c.violation <= 1e-8);
    }

    #[test]
    fn profile_starts_at_one_minus_gap() {
        let s = haar_random_gateset(2, 2, 17);
        let g = gap_at_scale(&s, 4).unwrap().gap;
        let p = convergence_profile(&s, 4, 6).unwrap();
        assert!((p[0] - (1.0 - g)).abs() < 1e-12);
        for (l, v) in p.iter().enumerate() {
            assert!(*v <= (1.0 - g).powi(l as i32 + 1) + 1e-8);
        }
        let z = GateSet::new(2, vec![diag_gate("Z", &[0.4, -0.4])], true).unwrap();
        assert!(convergence_profile(&z, 2, 5).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}
