//! Gate sets: data model, JSON I/O, Haar sampling, the projective distance on
//! PU(d), squared sets, a universality heuristic and empirical ε-net estimates.

use std::f64::consts::PI;
use std::path::Path;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::avgop::averaging_block_cached;
use crate::error::{invalid, GapError, Result};
use crate::irrep::{irrep_matrix, BasisCache, UNITARY_TOL};
use crate::linalg::{self, c64, CMat};
use crate::weightlat::{enumerate_nontrivial_weights, Weight};

/// Inputs within this unitarity residual may be repaired by polar projection.
pub const REPAIR_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Gate {
    pub label: String,
    pub matrix: CMat,
}

impl Gate {
    pub fn new(label: impl Into<String>, matrix: CMat) -> Self {
        Gate { label: label.into(), matrix }
    }
}

/// A finite gate set. Symmetric sets list one representative per pair; the
/// inverses are implicit, so `|S| = 2k`.
#[derive(Debug, Clone)]
pub struct GateSet {
    d: usize,
    gates: Vec<Gate>,
    symmetric: bool,
}

impl GateSet {
    /// Validates unitarity and normalises every determinant to 1.
    pub fn new(d: usize, gates: Vec<Gate>, symmetric: bool) -> Result<Self> {
        Self::build(d, gates, symmetric, false)
    }

    /// As [`GateSet::new`], projecting nearly-unitary matrices onto the unitary group.
    pub fn new_repaired(d: usize, gates: Vec<Gate>, symmetric: bool) -> Result<Self> {
        Self::build(d, gates, symmetric, true)
    }

    fn build(d: usize, gates: Vec<Gate>, symmetric: bool, repair: bool) -> Result<Self> {
        if d < 2 {
            return invalid(format!("gate dimension must be at least 2, got {d}"));
        }
        if gates.is_empty() {
            return invalid("gate set is empty");
        }
        let mut out = Vec::with_capacity(gates.len());
        for g in gates {
            let m = &g.matrix;
            if m.nrows() != d || m.ncols() != d {
                return Err(GapError::Format(format!(
                    "gate {:?} is {}x{}, expected {d}x{d}",
                    g.label,
                    m.nrows(),
                    m.ncols()
                )));
            }
            let residual = linalg::unitarity_residual(m);
            let matrix = if residual <= UNITARY_TOL {
                g.matrix
            } else if repair && residual <= REPAIR_TOL {
                polar_projection(m)?
            } else {
                return Err(GapError::NotUnitary { residual, tolerance: if repair { REPAIR_TOL } else { UNITARY_TOL } });
            };
            out.push(Gate { label: g.label, matrix: normalize_determinant(&matrix) });
        }
        Ok(GateSet { d, gates: out, symmetric })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Listed gates (one per pair for symmetric sets).
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    /// Number of listed gates, `k` for symmetric sets.
    pub fn pair_count(&self) -> usize {
        self.gates.len()
    }

    /// `|S|` counting implicit inverses.
    pub fn len(&self) -> usize {
        if self.symmetric {
            2 * self.gates.len()
        } else {
            self.gates.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// All members of `S`: the listed gates followed by their inverses.
    pub fn members(&self) -> Vec<CMat> {
        let mut out: Vec<CMat> = self.gates.iter().map(|g| g.matrix.clone()).collect();
        if self.symmetric {
            out.extend(self.gates.iter().map(|g| linalg::adjoint(&g.matrix)));
        }
        out
    }

    /// `S ∪ S⁻¹` with the counting measure.
    pub fn symmetrized(&self) -> GateSet {
        GateSet { symmetric: true, ..self.clone() }
    }

    pub fn with_symmetric(mut self, symmetric: bool) -> GateSet {
        self.symmetric = symmetric;
        self
    }

    /// Keeps the listed gates at the given indices.
    pub fn select(&self, indices: &[usize]) -> Result<GateSet> {
        let mut gates = Vec::with_capacity(indices.len());
        for &i in indices {
            let g = self.gates.get(i).ok_or_else(|| GapError::InvalidArgument(format!("gate index {i} out of range")))?;
            gates.push(g.clone());
        }
        Ok(GateSet { d: self.d, gates, symmetric: self.symmetric })
    }

    /// Applies `U ↦ V U V†` to every gate.
    pub fn conjugated_by(&self, v: &CMat) -> GateSet {
        let gates = self
            .gates
            .iter()
            .map(|g| Gate { label: g.label.clone(), matrix: normalize_determinant(&(v * &g.matrix * v.adjoint())) })
            .collect();
        GateSet { d: self.d, gates, symmetric: self.symmetric }
    }
}

/// Multiplies by `e^{-iφ/d}` where `φ = arg det U`, giving determinant 1.
pub fn normalize_determinant(u: &CMat) -> CMat {
    let d = u.nrows();
    let phi = u.determinant().arg();
    if phi.abs() <= 1e-13 {
        return u.clone();
    }
    linalg::scaled(u, c64::cis(-phi / d as f64))
}

/// Closest unitary in Frobenius norm, `W V†` from `U = W Σ V†`.
pub fn polar_projection(u: &CMat) -> Result<CMat> {
    let svd = u.svd().map_err(|e| GapError::Numerical(format!("SVD failed: {e:?}")))?;
    Ok(svd.U() * svd.V().adjoint())
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    label: String,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct GateSetDoc {
    d: usize,
    gates: Vec<GateDoc>,
    symmetric: bool,
}

impl GateSet {
    pub fn to_json(&self) -> String {
        let doc = GateSetDoc {
            d: self.d,
            symmetric: self.symmetric,
            gates: self
                .gates
                .iter()
                .map(|g| GateDoc {
                    label: g.label.clone(),
                    matrix: (0..self.d)
                        .map(|i| (0..self.d).map(|j| [g.matrix[(i, j)].re, g.matrix[(i, j)].im]).collect())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("gate set serialises")
    }

    pub fn from_json(text: &str, repair: bool) -> Result<GateSet> {
        let doc: GateSetDoc = serde_json::from_str(text).map_err(|e| GapError::Format(e.to_string()))?;
        let mut gates = Vec::with_capacity(doc.gates.len());
        for g in doc.gates {
            if g.matrix.len() != doc.d || g.matrix.iter().any(|r| r.len() != doc.d) {
                return Err(GapError::Format(format!("gate {:?} is not a {}x{} matrix", g.label, doc.d, doc.d)));
            }
            let m = Mat::from_fn(doc.d, doc.d, |i, j| c64::new(g.matrix[i][j][0], g.matrix[i][j][1]));
            gates.push(Gate::new(g.label, m));
        }
        GateSet::build(doc.d, gates, doc.symmetric, repair)
    }
}

pub fn load_gateset(path: impl AsRef<Path>, repair: bool) -> Result<GateSet> {
    let text = std::fs::read_to_string(path)?;
    GateSet::from_json(&text, repair)
}

pub fn save_gateset(set: &GateSet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, set.to_json() + "\n")?;
    Ok(())
}

/// Haar-distributed element of U(d): QR of a complex Ginibre matrix with the
/// diagonal phases of `R` moved into `Q`.
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let z = Mat::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    Mat::from_fn(d, d, |i, j| {
        let rjj = r[(j, j)];
        q[(i, j)] * (rjj / rjj.norm())
    })
}

/// `k` independent Haar gates (normalised to SU(d)) with implicit inverses.
pub fn haar_random_gateset(d: usize, k: usize, seed: u64) -> GateSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = (0..k).map(|i| Gate::new(format!("U{}", i + 1), haar_unitary(d, &mut rng))).collect();
    GateSet::new(d, gates, true).expect("Haar samples are unitary")
}

/// `D(g,h) = min_θ ‖e^{iθ} g − h‖_op`.
pub fn pu_distance(g: &CMat, h: &CMat) -> Result<f64> {
    for m in [g, h] {
        let residual = linalg::unitarity_residual(m);
        if residual > 1e-8 {
            return Err(GapError::NotUnitary { residual, tolerance: 1e-8 });
        }
    }
    if g.nrows() != h.nrows() || g.ncols() != h.ncols() {
        return invalid("pu_distance needs matrices of equal size");
    }
    let w = g.adjoint() * h;
    let phases = eigenphases(&w)?;
    Ok(distance_from_phases(&phases))
}

fn eigenphases(w: &CMat) -> Result<Vec<f64>> {
    if w.nrows() == 2 {
        let (a, b, c, d) = (w[(0, 0)], w[(0, 1)], w[(1, 0)], w[(1, 1)]);
        // eigenvalues of the traceless part, which stays accurate when w is near-scalar
        let mean = (a + d) * 0.5;
        let half = (a - d) * 0.5;
        let disc = (half * half + b * c).sqrt();
        return Ok(vec![(mean + disc).arg(), (mean - disc).arg()]);
    }
    let ev = w.eigenvalues().map_err(|e| GapError::Numerical(format!("eigenvalue solver failed: {e:?}")))?;
    Ok(ev.into_iter().map(|z| z.arg()).collect())
}

/// `min_θ max_j |e^{iθ} − e^{iφ_j}|`.
///
/// The objective is a maximum of circular distances, so its minimiser sits at the
/// centre of a covering arc; candidates are the antipodes of every gap midpoint
/// and every pairwise midpoint, followed by a short ternary refinement.
pub fn distance_from_phases(phases: &[f64]) -> f64 {
    let objective = |theta: f64| -> f64 {
        phases.iter().fold(0.0f64, |m, &p| m.max(2.0 * ((theta - p) / 2.0).sin().abs()))
    };
    let mut sorted: Vec<f64> = phases.iter().map(|&p| linalg::wrap_phase(p)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut candidates = Vec::with_capacity(n * n + n);
    for i in 0..n {
        let a = sorted[i];
        let b = if i + 1 < n { sorted[i + 1] } else { sorted[0] + 2.0 * PI };
        candidates.push((a + b) / 2.0 + PI);
        for &c in &sorted[i..] {
            candidates.push((a + c) / 2.0);
            candidates.push((a + c) / 2.0 + PI);
        }
    }
    let (mut best_theta, mut best) = (0.0, f64::INFINITY);
    for c in candidates {
        let v = objective(c);
        if v < best {
            best = v;
            best_theta = c;
        }
    }
    let (mut lo, mut hi) = (best_theta - 1e-3, best_theta + 1e-3);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) < objective(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(objective((lo + hi) / 2.0))
}

/// `S² = {U_1², …, U_k², U_1⁻², …, U_k⁻²}`.
pub fn squared_set(set: &GateSet) -> GateSet {
    let gates = set
        .gates
        .iter()
        .map(|g| Gate { label: format!("{}^2", g.label), matrix: normalize_determinant(&(&g.matrix * &g.matrix)) })
        .collect();
    GateSet { d: set.d, gates, symmetric: set.symmetric }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniversalityVerdict {
    UniversalLikely,
    NotUniversal,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniversalityDiagnostic {
    pub verdict: UniversalityVerdict,
    pub t_probe: usize,
    pub max_norm: f64,
    /// Block carrying an invariant vector, when one was found.
    pub witness: Option<Weight>,
}

pub const DEFAULT_T_PROBE: usize = 3;

/// Heuristic, not a certificate: a norm-1 block with a vector fixed by every gate
/// proves non-universality; all norms below `1 − 1e-6` at the probe scale only
/// make universality likely.
pub fn universality_heuristic(set: &GateSet, t_probe: usize) -> Result<UniversalityDiagnostic> {
    if t_probe == 0 {
        return invalid("t_probe must be at least 1");
    }
    let set = if set.symmetric() { set.clone() } else { set.symmetrized() };
    let cache = BasisCache::new();
    let weights = enumerate_nontrivial_weights(set.d(), t_probe)?;
    let results = weights
        .into_par_iter()
        .map(|w| -> Result<(Weight, f64, bool)> {
            let block = averaging_block_cached(&w, &set, &cache)?;
            let (values, vectors) = linalg::hermitian_eigen(&block)?;
            let norm = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let mut invariant = false;
            let top = *values.last().expect("nonempty block");
            if top >= 1.0 - 1e-8 {
                let basis = cache.get(&w)?;
                let v = vectors.col(values.len() - 1).to_owned();
                invariant = true;
                for g in set.gates() {
                    let p = irrep_matrix(&basis, &g.matrix)?;
                    let moved = &p * &v - &v;
                    if moved.norm_l2() > 1e-6 {
                        invariant = false;
                        break;
                    }
                }
            }
            Ok((w, norm, invariant))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_norm = results.iter().fold(0.0f64, |m, r| m.max(r.1));
    if let Some((w, _, _)) = results.iter().find(|r| r.2) {
        return Ok(UniversalityDiagnostic { verdict: UniversalityVerdict::NotUniversal, t_probe, max_norm, witness: Some(w.clone()) });
    }
    let verdict = if max_norm <= 1.0 - 1e-6 { UniversalityVerdict::UniversalLikely } else { UniversalityVerdict::Inconclusive };
    Ok(UniversalityDiagnostic { verdict, t_probe, max_norm, witness: None })
}

/// Outcome of an empirical ε-net experiment.
#[derive(Debug, Clone, Serialize)]
pub struct NetEstimate {
    pub length: usize,
    pub eps: f64,
    pub samples: usize,
    pub words: usize,
    pub covered_fraction: f64,
    pub max_observed_distance: f64,
}

pub const DEFAULT_WORD_CAP: usize = 10_000_000;

/// Number of words of length `≤ len` after pruning immediate `U U⁻¹` pairs.
pub fn word_count(set: &GateSet, len: usize) -> u128 {
    let a = set.len() as u128;
    let branch = if set.symmetric() { a - 1 } else { a };
    let mut total = 1u128;
    let mut level = 1u128;
    for l in 1..=len {
        level = if l == 1 { a } else { level.saturating_mul(branch) };
        total = total.saturating_add(level);
    }
    total
}

fn flatten(m: &CMat) -> Vec<c64> {
    let d = m.nrows();
    (0..d * d).map(|k| m[(k / d, k % d)]).collect()
}

fn mul_flat(a: &[c64], b: &[c64], d: usize) -> Vec<c64> {
    let mut out = vec![c64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// All words of length `≤ len`, as flattened matrices.
fn enumerate_words(set: &GateSet, len: usize, cap: usize) -> Result<Vec<Vec<c64>>> {
    let count = word_count(set, len);
    if count > cap as u128 {
        return Err(GapError::ResourceCap(format!("{count} words of length <= {len} exceed the cap {cap}")));
    }
    let d = set.d();
    let letters: Vec<Vec<c64>> = set.members().iter().map(flatten).collect();
    let k = set.pair_count();
    let inverse = |a: usize| -> Option<usize> {
        if !set.symmetric() {
            None
        } else if a < k {
            Some(a + k)
        } else {
            Some(a - k)
        }
    };
    let mut words = vec![flatten(&linalg::identity(d))];
    let mut frontier: Vec<(usize, Option<usize>)> = vec![(0, None)];
    for _ in 0..len {
        let mut next = Vec::with_capacity(frontier.len() * letters.len());
        for &(idx, last) in &frontier {
            for (a, letter) in letters.iter().enumerate() {
                if last.is_some() && inverse(a) == last {
                    continue;
                }
                words.push(mul_flat(&words[idx], letter, d));
                next.push((words.len() - 1, Some(a)));
            }
        }
        frontier = next;
    }
    Ok(words)
}

/// Fraction of Haar samples within `eps` of some word of length `≤ len`.
pub fn empirical_net(set: &GateSet, len: usize, eps: f64, samples: usize, seed: u64) -> Result<NetEstimate> {
    empirical_net_capped(set, len, eps, samples, seed, DEFAULT_WORD_CAP)
}

pub fn empirical_net_capped(set: &GateSet, len: usize, eps: f64, samples: usize, seed: u64, cap: usize) -> Result<NetEstimate> {
    if !(eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let words = enumerate_words(set, len, cap)?;
    let d = set.d();
    if samples == 0 {
        log::warn!("empirical_net called with zero samples; coverage is vacuous");
        return Ok(NetEstimate { length: len, eps, samples, words: words.len(), covered_fraction: 1.0, max_observed_distance: 0.0 });
    }
    let nearest: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let h = flatten(&haar_unitary(d, &mut rng));
            nearest_word_distance(&words, &h, d)
        })
        .collect::<Result<Vec<_>>>()?;
    let covered = nearest.iter().filter(|&&x| x <= eps).count();
    Ok(NetEstimate {
        length: len,
        eps,
        samples,
        words: words.len(),
        covered_fraction: covered as f64 / samples as f64,
        max_observed_distance: nearest.iter().fold(0.0, |m, &x| m.max(x)),
    })
}

fn nearest_word_distance(words: &[Vec<c64>], h: &[c64], d: usize) -> Result<f64> {
    let df = d as f64;
    let mut best = f64::INFINITY;
    for g in words {
        // D(g,h) ≥ min_θ ‖e^{iθ}g − h‖_F / √d = sqrt((2d − 2|tr g†h|)/d)
        let tr = g.iter().zip(h).fold(c64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
        let lower = ((2.0 * df - 2.0 * tr.norm()).max(0.0) / df).sqrt();
        if lower >= best {
            continue;
        }
        let mut w = Mat::<c64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut z = c64::new(0.0, 0.0);
                for k in 0..d {
                    z += g[k * d + i].conj() * h[k * d + j];
                }
                w[(i, j)] = z;
            }
        }
        let dist = distance_from_phases(&eigenphases(&w)?);
        best = best.min(dist);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, identity};
    use proptest::prelude::*;

    fn pauli_x() -> CMat {
        Mat::from_fn(2, 2, |i, j| if i != j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
    }

    #[test]
    fn distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = haar_unitary(3, &mut rng);
        assert!(pu_distance(&g, &g).unwrap() < 1e-12);
        assert!(pu_distance(&g, &linalg::scaled(&g, c64::cis(1.234))).unwrap() < 1e-9);
        let x = pu_distance(&identity(2), &pauli_x()).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-12, "{x}");
    }

    /// Independent check of the phase minimisation by a dense scan over θ.
    #[test]
    fn distance_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [2, 3, 4] {
            for _ in 0..5 {
                let g = haar_unitary(d, &mut rng);
                let h = haar_unitary(d, &mut rng);
                let got = pu_distance(&g, &h).unwrap();
                let f = |th: f64| linalg::op_norm(&(linalg::scaled(&g, c64::cis(th)) - &h)).unwrap();
                let step = 2.0 * PI / 4000.0;
                let (mut best, mut scan) = (0.0, f64::INFINITY);
                for s in 0..4000 {
                    let v = f(s as f64 * step);
                    if v < scan {
                        (best, scan) = (s as f64 * step, v);
                    }
                }
                // golden-section polish around the best grid point
                let (mut a, mut b) = (best - step, best + step);
                let r = (5f64.sqrt() - 1.0) / 2.0;
                for _ in 0..80 {
                    let (x1, x2) = (b - r * (b - a), a + r * (b - a));
                    if f(x1) < f(x2) {
                        b = x2;
                    } else {
                        a = x1;
                    }
                }
                scan = scan.min(f(0.5 * (a + b)));
                assert!(got <= scan + 1e-12 && scan - got < 1e-6, "d={d}: {got} vs {scan}");
            }
        }
    }

    #[test]
    fn haar_sets_are_deterministic_and_unitary() {
        let a = haar_random_gateset(3, 2, 42);
        let b = haar_random_gateset(3, 2, 42);
        for (x, y) in a.gates().iter().zip(b.gates()) {
            assert_eq!(x.matrix, y.matrix);
            for j in 0..3 {
                let n: f64 = (0..3).map(|i| x.matrix[(i, j)].norm_sqr()).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
            assert!((x.matrix.determinant() - c64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn haar_first_moment_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 10_000;
        let mut sum = c64::new(0.0, 0.0);
        for _ in 0..n {
            sum += haar_unitary(2, &mut rng)[(0, 1)];
        }
        // each entry has E|u|² = 1/2, so the mean has σ = sqrt(1/(2n))
        let sigma = (0.5 / n as f64).sqrt();
        assert!((sum / n as f64).norm() < 3.0 * sigma * 2f64.sqrt());
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let s = haar_random_gateset(3, 2, 5);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.json");
        save_gateset(&s, &p).unwrap();
        let back = load_gateset(&p, false).unwrap();
        assert_eq!(back.d(), 3);
        assert!(back.symmetric());
        for (x, y) in s.gates().iter().zip(back.gates()) {
            assert_eq!(x.label, y.label);
            assert_eq!(x.matrix, y.matrix);
        }
    }

    #[test]
    fn load_rejects_and_repairs() {
        let bad = r#"{"d":2,"gates":[{"label":"A","matrix":[[[1.1,0],[0,0]],[[0,0],[1,0]]]}],"symmetric":true}"#;
        assert!(matches!(GateSet::from_json(bad, false), Err(GapError::NotUnitary { .. })));
        assert!(GateSet::from_json(bad, true).is_err());
        let near = r#"{"d":2,"gates":[{"label":"A","matrix":[[[1.0000001,0],[0,0]],[[0,0],[1,0]]]}],"symmetric":true}"#;
        assert!(GateSet::from_json(near, false).is_err());
        let fixed = GateSet::from_json(near, true).unwrap();
        assert!(linalg::unitarity_residual(&fixed.gates()[0].matrix) < 1e-12);
        assert!(matches!(GateSet::from_json("{", false), Err(GapError::Format(_))));
        let ragged = r#"{"d":2,"gates":[{"label":"A","matrix":[[[1,0]],[[0,0],[1,0]]]}],"symmetric":true}"#;
        assert!(matches!(GateSet::from_json(ragged, false), Err(GapError::Format(_))));
    }

    #[test]
    fn determinant_phase_is_removed() {
        let phase = c64::cis(PI / 3.0);
        let m = Mat::from_fn(2, 2, |i, j| if i == j { if i == 0 { phase } else { c64::new(1.0, 0.0) } } else { c64::new(0.0, 0.0) });
        let s = GateSet::new(2, vec![Gate::new("P", m)], true).unwrap();
        assert!((s.gates()[0].matrix.determinant() - c64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn squared_sets() {
        let id = GateSet::new(2, vec![Gate::new("I", identity(2))], true).unwrap();
        assert!(frobenius(&(squared_set(&id).gates()[0].matrix.clone() - identity(2))) < 1e-14);
        let s = haar_random_gateset(2, 2, 3);
        let sq = squared_set(&s);
        assert!(sq.symmetric());
        assert_eq!(sq.len(), 4);
        let u = &s.gates()[1].matrix;
        assert!(frobenius(&(sq.gates()[1].matrix.clone() - normalize_determinant(&(u * u)))) < 1e-14);
        let fourth = squared_set(&sq);
        for (g, f) in s.gates().iter().zip(fourth.gates()) {
            let u4 = &g.matrix * &g.matrix * &g.matrix * &g.matrix;
            assert!(pu_distance(&u4, &f.matrix).unwrap() < 1e-9);
        }
    }

    #[test]
    fn universality_examples() {
        let id = GateSet::new(2, vec![Gate::new("I", identity(2))], true).unwrap();
        assert_eq!(universality_heuristic(&id, 3).unwrap().verdict, UniversalityVerdict::NotUniversal);
        let diag = |p: f64| Mat::from_fn(3, 3, |i, j| if i == j { c64::cis([p, 0.3 * p, -1.3 * p][i]) } else { c64::new(0.0, 0.0) });
        let commuting = GateSet::new(3, vec![Gate::new("A", diag(0.7)), Gate::new("B", diag(1.9))], true).unwrap();
        let r = universality_heuristic(&commuting, 2).unwrap();
        assert_eq!(r.verdict, UniversalityVerdict::NotUniversal);
        assert!(r.witness.is_some());
        let haar = haar_random_gateset(2, 2, 11);
        assert_eq!(universality_heuristic(&haar, DEFAULT_T_PROBE).unwrap().verdict, UniversalityVerdict::UniversalLikely);
    }

    #[test]
    fn net_edge_cases() {
        let s = haar_random_gateset(2, 2, 4);
        let all = empirical_net(&s, 1, 2.0, 50, 1).unwrap();
        assert_eq!(all.covered_fraction, 1.0);
        assert_eq!(all.words, 5);
        let none = empirical_net(&s, 1, 0.5, 0, 1).unwrap();
        assert_eq!(none.covered_fraction, 1.0);
        assert!(matches!(empirical_net_capped(&s, 10, 0.5, 10, 1, 1000), Err(GapError::ResourceCap(_))));
        assert_eq!(word_count(&s, 3), 1 + 4 + 12 + 36);
        let again = empirical_net(&s, 3, 0.5, 40, 7).unwrap();
        let twice = empirical_net(&s, 3, 0.5, 40, 7).unwrap();
        assert_eq!(again.covered_fraction, twice.covered_fraction);
        assert_eq!(again.max_observed_distance, twice.max_observed_distance);
        assert_eq!(again.words as u128, word_count(&s, 3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn distance_is_a_metric(seed in 0u64..10_000, d in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c, w) = (haar_unitary(d, &mut rng), haar_unitary(d, &mut rng), haar_unitary(d, &mut rng), haar_unitary(d, &mut rng));
            let ab = pu_distance(&a, &b).unwrap();
            let ba = pu_distance(&b, &a).unwrap();
            let bc = pu_distance(&b, &c).unwrap();
            let ac = pu_distance(&a, &c).unwrap();
            prop_assert!((ab - ba).abs() < 1e-8);
            prop_assert!(ac <= ab + bc + 1e-8);
            let wab = pu_distance(&(&w * &a), &(&w * &b)).unwrap();
            prop_assert!((wab - ab).abs() < 1e-8);
        }
    }
}
