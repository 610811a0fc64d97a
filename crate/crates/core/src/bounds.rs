//! Lower bounds on `gap_t(S)` and ε-net word-length bounds.
//!
//! The main pipeline measures gaps of squared-generator subsets at the scale
//! `t₀` and combines them as
//! `gap_t(S) ≥ α · g_{t₀}(S) · ln(βt)^{−2c}`,
//! where `g_{t₀}(S) = (1/|S|) Σ_{m=0}^{k−2} min_{|R|=m} gap²_{t₀}(S² ∖ R)`.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::avgop::{gap_at_scale_with, GapOptions, Progress};
use crate::constants::{self, BoundParams, C_LIP};
use crate::error::{invalid, GapError, Result};
use crate::gates::{squared_set, universality_heuristic, GateSet, UniversalityVerdict, DEFAULT_T_PROBE};
use crate::weightlat::IrrepMeta;

/// `S²` with the listed generator pairs removed.
pub fn subset_squares(set: &GateSet, removed: &[usize]) -> Result<GateSet> {
    let k = set.pair_count();
    if !set.symmetric() {
        return invalid("subset_squares needs a symmetric gate set");
    }
    if k < 2 {
        return invalid("subset_squares needs at least two generator pairs");
    }
    if removed.len() > k - 2 {
        return invalid(format!("can remove at most k-2 = {} pairs, got {}", k - 2, removed.len()));
    }
    if removed.iter().any(|&i| i >= k) || removed.iter().duplicates().next().is_some() {
        return invalid(format!("removed indices {removed:?} must be distinct and below {k}"));
    }
    let keep: Vec<usize> = (0..k).filter(|i| !removed.contains(i)).collect();
    Ok(squared_set(&set.select(&keep)?))
}

/// Smallest gap over all removal sets of one size.
#[derive(Debug, Clone, Serialize)]
pub struct SubsetGap {
    pub m: usize,
    pub min_gap: f64,
    pub worst_subset: Vec<usize>,
    pub subsets: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetGapTable {
    /// Scale at which the subset gaps were computed.
    pub t0: u64,
    pub k: usize,
    pub per_m: Vec<SubsetGap>,
}

impl SubsetGapTable {
    pub fn min_gaps(&self) -> Vec<f64> {
        self.per_m.iter().map(|s| s.min_gap).collect()
    }
}

/// Heuristic verdict for one two-pair squared subset.
#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    pub pair: [usize; 2],
    pub verdict: UniversalityVerdict,
}

/// `g_{t₀}(S)` at the scale `scale` (normally `t₀`).
pub fn g_t0_at_scale(set: &GateSet, scale: u64, opts: &GapOptions, progress: Option<Progress>) -> Result<(f64, SubsetGapTable)> {
    let k = set.pair_count();
    if !set.symmetric() {
        return invalid("g_t0 needs a symmetric gate set");
    }
    if k < 2 {
        return invalid("g_t0 needs at least two generator pairs");
    }
    if scale == 0 {
        return invalid("scale must be at least 1");
    }
    let mut per_m = Vec::with_capacity(k - 1);
    for m in 0..=(k - 2) {
        let subsets: Vec<Vec<usize>> = (0..k).combinations(m).collect();
        let gaps = subsets
            .par_iter()
            .map(|removed| {
                let sub = subset_squares(set, removed)?;
                let r = gap_at_scale_with(&sub, scale as usize, opts, progress).map_err(|e| match e {
                    GapError::ResourceCap(msg) => {
                        GapError::ResourceCap(format!("{msg}; consider a smaller t_override for desk-scale runs"))
                    }
                    other => other,
                })?;
                Ok(r.gap.max(0.0))
            })
            .collect::<Result<Vec<f64>>>()?;
        let (idx, &min_gap) = gaps
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, &f64)>, (i, g)| match best {
                Some((_, b)) if b <= g => best,
                _ => Some((i, g)),
            })
            .expect("at least one subset");
        per_m.push(SubsetGap { m, min_gap, worst_subset: subsets[idx].clone(), subsets: subsets.len() });
    }
    let g = per_m.iter().map(|s| s.min_gap * s.min_gap).sum::<f64>() / set.len() as f64;
    Ok((g, SubsetGapTable { t0: scale, k, per_m }))
}

/// `g_{t₀}(S)` at `t₀ = scale_t0(ε₀, d)`, or at `t_override` for desk-scale runs.
pub fn g_t0(set: &GateSet, eps0: f64, t_override: Option<u64>) -> Result<(f64, SubsetGapTable)> {
    let scale = match t_override {
        Some(t) => t,
        None => constants::scale_t0(eps0, set.d())?,
    };
    g_t0_at_scale(set, scale, &GapOptions::default(), None)
}

/// Heuristic universality check of every two-pair squared subset.
pub fn check_pair_universality(set: &GateSet) -> Result<Vec<PairCheck>> {
    let k = set.pair_count();
    let mut out = Vec::new();
    for pair in (0..k).combinations(2) {
        let sub = squared_set(&set.select(&pair)?);
        let verdict = universality_heuristic(&sub, DEFAULT_T_PROBE)?.verdict;
        if verdict != UniversalityVerdict::UniversalLikely {
            log::warn!("squared pair {pair:?} is {verdict:?}; the bound assumes every such pair is universal");
        }
        out.push(PairCheck { pair: [pair[0], pair[1]], verdict });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub params: BoundParams,
    pub g_t0: f64,
    pub t: u64,
    pub lower_bound: f64,
    /// True when the subset gaps were computed below `t₀`, or `t < t₀`; the
    /// number is then a desk-scale estimate, not a certified bound.
    pub below_theorem_scale: bool,
    pub subset_gaps: SubsetGapTable,
    pub pair_universality: Vec<PairCheck>,
}

/// `α · g · ln(βt)^{−2c}`.
pub fn bound_from_g(params: &BoundParams, g: f64, t: u64) -> Result<f64> {
    let bt = params.beta * t as f64;
    if bt <= std::f64::consts::E {
        return invalid(format!("beta*t = {bt} must exceed e for the bound to apply"));
    }
    Ok(params.alpha * g * bt.ln().powf(-2.0 * params.c))
}

/// The same bound assembled from its ingredients: word lengths `ℓ_{0,m}` set by
/// equality in the length bound, the Solovay-Kitaev diameter estimate with
/// `ε_m = 1/(4Ct)`, and the diameter form of the gap bound.
pub fn bound_via_word_lengths(params: &BoundParams, gaps: &[f64], k: usize, t: u64) -> Result<f64> {
    if gaps.len() + 1 != k {
        return invalid(format!("expected k-1 = {} subset gaps, got {}", k.saturating_sub(1), gaps.len()));
    }
    let t = t as f64;
    let c = params.c;
    let eps_m = 1.0 / (4.0 * C_LIP * t);
    let numerator = constants::net_length_numerator(params.d, params.eps0);
    let sk_scale = (2.0 * (1.0 / (params.c_s * params.eps0)).ln()).powf(c);
    let mut sum = 0.0;
    for &gap in gaps {
        if gap <= 0.0 {
            continue;
        }
        let ell0 = numerator / gap;
        let a_m = ell0 / sk_scale;
        let diam = a_m * (1.0 / (params.c_s * params.c_s * eps_m)).ln().powf(c);
        sum += (1.0 - 2.0 * C_LIP * t * eps_m).powi(2) / (diam * diam);
    }
    Ok(sum / (8.0 * k as f64))
}

pub fn main_lower_bound(set: &GateSet, eps0: f64, t: u64, t_override: Option<u64>) -> Result<BoundReport> {
    main_lower_bound_with(set, eps0, t, t_override, &GapOptions::default(), None)
}

pub fn main_lower_bound_with(
    set: &GateSet,
    eps0: f64,
    t: u64,
    t_override: Option<u64>,
    opts: &GapOptions,
    progress: Option<Progress>,
) -> Result<BoundReport> {
    let params = BoundParams::new(set.d(), eps0)?;
    if t < params.t0 {
        if t_override.is_none() {
            return invalid(format!("t = {t} is below t0 = {}; pass t_override for desk-scale runs", params.t0));
        }
        log::warn!("t = {t} is below t0 = {}; the result is not a certified bound", params.t0);
    }
    let scale = t_override.unwrap_or(params.t0);
    let pair_universality = check_pair_universality(set)?;
    let (g, table) = g_t0_at_scale(set, scale, opts, progress)?;
    let lower_bound = bound_from_g(&params, g, t)?;
    Ok(BoundReport {
        params,
        g_t0: g,
        t,
        lower_bound,
        below_theorem_scale: scale < params.t0 || t < params.t0,
        subset_gaps: table,
        pair_universality,
    })
}

/// `b(λ) = (sqrt(2(1 − ı_λ/d_λ)) − C‖λ‖₁ε) / ℓ`.
pub fn b_coefficient(meta: &IrrepMeta, eps: f64, ell: u64) -> Result<f64> {
    if meta.weight.is_trivial() {
        return invalid("b coefficients are defined for nontrivial irreps only");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    if ell == 0 {
        return invalid("word length must be positive");
    }
    let head = (2.0 * (1.0 - meta.fs_indicator as f64 / meta.dim as f64)).sqrt();
    let window = head / (C_LIP * meta.one_norm as f64);
    if eps > window * (1.0 + 1e-12) {
        return invalid(format!("eps = {eps} exceeds the validity window {window}"));
    }
    Ok(((head - C_LIP * meta.one_norm as f64 * eps) / ell as f64).max(0.0))
}

/// `(strong, weak) = ((1/8k) Σ b_m², ((k−1)/8k) b_{k−2}²)` for a nonincreasing list `b_0, …, b_{k−2}`.
pub fn gap_bound_from_b(b: &[f64], k: usize) -> Result<(f64, f64)> {
    if k < 2 || b.len() + 1 != k {
        return invalid(format!("expected k-1 coefficients with k >= 2, got {} for k = {k}", b.len()));
    }
    if b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return invalid("b coefficients must be finite and nonnegative");
    }
    if b.windows(2).any(|w| w[1] > w[0]) {
        return invalid("b coefficients must be nonincreasing in m");
    }
    let k = k as f64;
    let strong = b.iter().map(|x| x * x).sum::<f64>() / (8.0 * k);
    let last = *b.last().expect("k >= 2");
    let weak = (k - 1.0) / (8.0 * k) * last * last;
    debug_assert!(strong >= weak * (1.0 - 1e-12));
    Ok((strong, weak))
}

/// `(1/8k) Σ_m (1 − 2Ctε_m)² / diam_m²`.
pub fn gap_bound_from_diameter(d: usize, t: u64, k: usize, per_m: &[(f64, f64)]) -> Result<f64> {
    if d < 2 {
        return invalid("d must be at least 2");
    }
    if k < 2 || per_m.len() + 1 != k {
        return invalid(format!("expected k-1 (eps, diam) pairs with k >= 2, got {} for k = {k}", per_m.len()));
    }
    if t == 0 {
        return invalid("t must be positive");
    }
    let t = t as f64;
    let limit = 1.0 / (2.0 * C_LIP * t);
    let mut sum = 0.0;
    for &(eps, diam) in per_m {
        if !(eps > 0.0 && eps < 1.0 && eps <= limit * (1.0 + 1e-12)) {
            return invalid(format!("eps_m = {eps} must lie in (0, min(1, 1/(2Ct) = {limit})]"));
        }
        if !(diam > 0.0) {
            return invalid("diameters must be positive");
        }
        sum += (1.0 - 2.0 * C_LIP * t * eps).max(0.0).powi(2) / (diam * diam);
    }
    Ok(sum / (8.0 * k as f64))
}

/// `ℓ ≥ (d²−1)/gap · ln(1/ε) + B`.
pub fn net_length_thm2(d: usize, gap: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    let c = constants::theorem2_constants(d, gap)?;
    Ok(c.slope * (1.0 / eps).ln() + c.b)
}

/// Word-length bound at finite scale and the scale it requires:
/// `(N / gap_t, ⌈5 d^{5/2}/ε · τ(ε, d)⌉)`.
pub fn net_length_scale_bound(d: usize, gap_t: f64, eps: f64) -> Result<(f64, u64)> {
    if !(gap_t > 0.0 && gap_t <= 1.0) {
        return invalid(format!("gap_t must lie in (0, 1], got {gap_t}"));
    }
    let required = constants::scale_t0(eps, d)?;
    Ok((constants::net_length_numerator(d, eps) / gap_t, required))
}
