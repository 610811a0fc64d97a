//! Explicit matrices `π_λ(U)` for PU(d) irreps.
//!
//! The irrep with canonical weight `λ` is shifted to the gl(d) signature
//! `m = λ − λ_d` (nonnegative, last entry zero) and realised on the orthonormal
//! Gelfand-Tsetlin basis. Generator images are exact real rational square roots.
//! Group elements are reached through the Lie algebra: `U = e^{iφ} exp(iA)` with
//! `A` Hermitian and traceless, and `π_λ(U) = exp(i dπ_λ(A))`. Since `|λ| = 0`
//! the phase `e^{iφ}` acts trivially and the signature shift cancels.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use faer::Mat;

use crate::error::{invalid, GapError, Result};
use crate::linalg::{self, c64, CMat};
use crate::weightlat::{weyl_dimension, Weight};

/// Default cap on `d_λ` for basis construction.
pub const DEFAULT_DIM_CAP: u128 = 2_000_000;

/// Input unitarity tolerance for group elements.
pub const UNITARY_TOL: f64 = 1e-10;

/// Real sparse matrix stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseReal {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseReal {
    fn zeros(n: usize) -> Self {
        SparseReal { n, rows: vec![Vec::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Iterates `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> Self {
        let mut out = SparseReal::zeros(self.n);
        for (i, j, v) in self.entries() {
            out.rows[j].push((i, v));
        }
        out
    }

    fn mul(&self, other: &SparseReal) -> SparseReal {
        let mut out = SparseReal::zeros(self.n);
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            acc.clear();
            for &(k, a) in row {
                for &(j, b) in &other.rows[k] {
                    *acc.entry(j).or_insert(0.0) += a * b;
                }
            }
            let mut r: Vec<(usize, f64)> = acc.iter().filter(|(_, v)| **v != 0.0).map(|(&j, &v)| (j, v)).collect();
            r.sort_by_key(|e| e.0);
            out.rows[i] = r;
        }
        out
    }

    fn commutator(&self, other: &SparseReal) -> SparseReal {
        let ab = self.mul(other);
        let ba = other.mul(self);
        let mut out = SparseReal::zeros(self.n);
        for i in 0..self.n {
            let mut acc: HashMap<usize, f64> = HashMap::new();
            for &(j, v) in &ab.rows[i] {
                *acc.entry(j).or_insert(0.0) += v;
            }
            for &(j, v) in &ba.rows[i] {
                *acc.entry(j).or_insert(0.0) -= v;
            }
            let mut r: Vec<(usize, f64)> = acc.into_iter().filter(|(_, v)| v.abs() > 1e-14).collect();
            r.sort_by_key(|e| e.0);
            out.rows[i] = r;
        }
        out
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = Mat::<c64>::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] += c64::new(v, 0.0);
        }
        m
    }
}

/// Gelfand-Tsetlin realisation of one irrep.
#[derive(Debug, Clone)]
pub struct GtBasis {
    weight: Weight,
    d: usize,
    shift: i64,
    /// Each pattern is its rows concatenated from the top (length d) down to length 1.
    patterns: Vec<Vec<i64>>,
    /// Diagonal of `E_kk` minus the signature shift, for `k = 0..d`.
    cartan: Vec<Vec<f64>>,
    /// `raising[i][j]` holds `E_ij` for `i < j` (entries with `j <= i` are empty).
    raising: Vec<Vec<SparseReal>>,
    /// For each adjacent pair `(a, a+1)`: patterns grouped by every row except the
    /// one of length `a + 1`. The gl(2) spanned by `E_{a,a+1}`, `E_{a+1,a}` and the two
    /// Cartan elements acts within each group.
    pair_blocks: Vec<PairBlocks>,
}

#[derive(Debug, Clone)]
struct PairBlocks {
    blocks: Vec<Vec<usize>>,
    /// Position of each pattern inside its block.
    slot: Vec<usize>,
}

fn pair_blocks(patterns: &[Vec<i64>], d: usize) -> Vec<PairBlocks> {
    (0..d.saturating_sub(1))
        .map(|a| {
            let o = row_offset(d, a + 1);
            let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
            let mut blocks: Vec<Vec<usize>> = Vec::new();
            let mut slot = vec![0; patterns.len()];
            for (p, pat) in patterns.iter().enumerate() {
                let mut key = pat.clone();
                key.drain(o..o + a + 1);
                let b = *index.entry(key).or_insert_with(|| {
                    blocks.push(Vec::new());
                    blocks.len() - 1
                });
                slot[p] = blocks[b].len();
                blocks[b].push(p);
            }
            PairBlocks { blocks, slot }
        })
        .collect()
}

fn row_offset(d: usize, len: usize) -> usize {
    (d * (d + 1) - len * (len + 1)) / 2
}

fn row(p: &[i64], d: usize, len: usize) -> &[i64] {
    let o = row_offset(d, len);
    &p[o..o + len]
}

fn enumerate_patterns(top: &[i64]) -> Vec<Vec<i64>> {
    fn rec(prefix: &mut Vec<i64>, last: Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if last.len() == 1 {
            out.push(prefix.clone());
            return;
        }
        let len = last.len() - 1;
        let mut next = vec![0i64; len];
        fn fill(i: usize, last: &[i64], next: &mut Vec<i64>, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if i == next.len() {
                let l = prefix.len();
                prefix.extend_from_slice(next);
                rec(prefix, next.clone(), out);
                prefix.truncate(l);
                return;
            }
            for x in (last[i + 1]..=last[i]).rev() {
                next[i] = x;
                fill(i + 1, last, next, prefix, out);
            }
        }
        fill(0, &last, &mut next, prefix, out);
    }
    let mut out = Vec::new();
    let mut prefix = top.to_vec();
    rec(&mut prefix, top.to_vec(), &mut out);
    out
}

impl GtBasis {
    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn group_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.patterns.len()
    }

    /// Constant added to `λ` to obtain a nonnegative gl(d) signature.
    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn patterns(&self) -> &[Vec<i64>] {
        &self.patterns
    }

    /// Diagonal of the Cartan image `E_kk` (shift removed).
    pub fn cartan(&self, k: usize) -> &[f64] {
        &self.cartan[k]
    }

    /// Image of `E_ij` for `i < j`.
    pub fn raising(&self, i: usize, j: usize) -> &SparseReal {
        assert!(i < j && j < self.d, "raising operator needs i < j < d");
        &self.raising[i][j]
    }

    /// Image of `E_ji = E_ij†` for `i < j`.
    pub fn lowering(&self, i: usize, j: usize) -> SparseReal {
        self.raising(i, j).transpose()
    }

    /// Dense image of a gl(d) element `X = Σ x_ij e_ij`.
    pub fn algebra_image(&self, x: &CMat) -> CMat {
        let n = self.dim();
        let mut h = Mat::<c64>::zeros(n, n);
        for k in 0..self.d {
            let xk = x[(k, k)];
            if xk != c64::new(0.0, 0.0) {
                for (p, v) in self.cartan[k].iter().enumerate() {
                    h[(p, p)] += xk * *v;
                }
            }
        }
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                let (up, down) = (x[(i, j)], x[(j, i)]);
                for (r, c, v) in self.raising[i][j].entries() {
                    h[(r, c)] += up * v;
                    h[(c, r)] += down * v;
                }
            }
        }
        h
    }
}

/// Builds the Gelfand-Tsetlin realisation of the irrep with weight `λ`.
pub fn build_basis(weight: &Weight, d: usize) -> Result<GtBasis> {
    build_basis_capped(weight, d, DEFAULT_DIM_CAP)
}

pub fn build_basis_capped(weight: &Weight, d: usize, dim_cap: u128) -> Result<GtBasis> {
    if weight.dim_group() != d {
        return invalid(format!("weight {weight} has length {}, expected {d}", weight.dim_group()));
    }
    let dim = weyl_dimension(weight)?;
    if dim > dim_cap {
        return Err(GapError::ResourceCap(format!(
            "irrep {weight} has dimension {dim}, above the cap {dim_cap}"
        )));
    }
    let shift = -weight.entries()[d - 1];
    let top: Vec<i64> = weight.entries().iter().map(|x| x + shift).collect();
    let patterns = enumerate_patterns(&top);
    debug_assert_eq!(patterns.len() as u128, dim);
    let index: HashMap<&[i64], usize> = patterns.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let n = patterns.len();

    let row_sum = |p: &[i64], len: usize| -> i64 { if len == 0 { 0 } else { row(p, d, len).iter().sum() } };
    let cartan: Vec<Vec<f64>> = (0..d)
        .map(|k| patterns.iter().map(|p| (row_sum(p, k + 1) - row_sum(p, k) - shift) as f64).collect())
        .collect();

    let mut raising: Vec<Vec<SparseReal>> = vec![vec![SparseReal::zeros(n); d]; d];
    // Simple raising operators E_{k,k+1} act on the row of length k.
    for k in 1..d {
        let mut op = SparseReal::zeros(n);
        let mut shifted = vec![0i64; patterns[0].len()];
        for (src, p) in patterns.iter().enumerate() {
            let l = |len: usize, j: usize| row(p, d, len)[j] - j as i64;
            for i in 0..k {
                shifted.copy_from_slice(p);
                shifted[row_offset(d, k) + i] += 1;
                let Some(&dst) = index.get(shifted.as_slice()) else { continue };
                let lki = l(k, i);
                let mut num: i128 = 1;
                for j in 0..=k {
                    num *= (lki - l(k + 1, j)) as i128;
                }
                for j in 0..k.saturating_sub(1) {
                    num *= (lki - l(k - 1, j) + 1) as i128;
                }
                let mut den: i128 = 1;
                for j in 0..k {
                    if j != i {
                        let diff = (lki - l(k, j)) as i128;
                        den *= diff * (diff + 1);
                    }
                }
                let sq = -(num as f64) / den as f64;
                if sq < -1e-9 {
                    return Err(GapError::Numerical(format!("negative Gelfand-Tsetlin coefficient for {weight}")));
                }
                if sq > 0.0 {
                    op.rows[dst].push((src, sq.sqrt()));
                }
            }
        }
        for r in &mut op.rows {
            r.sort_by_key(|e| e.0);
        }
        raising[k - 1][k] = op;
    }
    // E_ij = [E_{i,j-1}, E_{j-1,j}] for j > i + 1.
    for gap in 2..d {
        for i in 0..(d - gap) {
            let j = i + gap;
            raising[i][j] = raising[i][j - 1].commutator(&raising[j - 1][j]);
        }
    }
    let pair_blocks = pair_blocks(&patterns, d);
    Ok(GtBasis { weight: weight.clone(), d, shift, patterns, cartan, raising, pair_blocks })
}

/// Traceless Hermitian `A` with `U = e^{iφ} exp(iA)`, from the spectral decomposition of `U`.
pub fn traceless_log(u: &CMat) -> Result<CMat> {
    let (phases, vecs) = linalg::unitary_eigen(u)?;
    let mean = phases.iter().sum::<f64>() / phases.len() as f64;
    Ok(linalg::conjugate_diagonal(&vecs, phases.iter().map(|p| c64::new(p - mean, 0.0))))
}

fn check_group_element(basis: &GtBasis, u: &CMat) -> Result<()> {
    let d = basis.group_dim();
    if u.nrows() != d || u.ncols() != d {
        return invalid(format!("expected a {d}x{d} matrix, got {}x{}", u.nrows(), u.ncols()));
    }
    let residual = linalg::unitarity_residual(u);
    if residual > UNITARY_TOL {
        return Err(GapError::NotUnitary { residual, tolerance: UNITARY_TOL });
    }
    Ok(())
}

/// `π_λ([U])` for the PU(d) class of the unitary `U`.
///
/// For `d ≥ 3` this factors `U` into adjacent two-level rotations and a diagonal,
/// whose images are block-diagonal and diagonal in the Gelfand-Tsetlin basis; for
/// `d = 2` the single rotation block is the whole space, so the logarithm route
/// is used directly.
pub fn irrep_matrix(basis: &GtBasis, u: &CMat) -> Result<CMat> {
    check_group_element(basis, u)?;
    if basis.dim() == 1 {
        return Ok(linalg::identity(1));
    }
    if basis.d == 2 {
        return log_route(basis, u);
    }
    rotation_route(basis, u)
}

/// `π_λ([U]) = exp(i dπ_λ(A))` with `A` the traceless logarithm of `U`.
pub fn irrep_matrix_via_log(basis: &GtBasis, u: &CMat) -> Result<CMat> {
    check_group_element(basis, u)?;
    if basis.dim() == 1 {
        return Ok(linalg::identity(1));
    }
    log_route(basis, u)
}

fn log_route(basis: &GtBasis, u: &CMat) -> Result<CMat> {
    let a = traceless_log(u)?;
    let h = basis.algebra_image(&a);
    linalg::expi_hermitian(&h)
}

type Rot = [[c64; 2]; 2];

fn rotation_route(basis: &GtBasis, u: &CMat) -> Result<CMat> {
    let d = basis.d;
    // Givens elimination G_m ⋯ G_1 U = D, so U = G_1† ⋯ G_m† D.
    let mut r = u.clone();
    let mut rots: Vec<(usize, Rot)> = Vec::new();
    for j in 0..d - 1 {
        for i in (j + 1..d).rev() {
            let (x, y) = (r[(i - 1, j)], r[(i, j)]);
            let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if y.norm() == 0.0 || norm == 0.0 {
                continue;
            }
            let g = [[x.conj() / norm, y.conj() / norm], [-y / norm, x / norm]];
            for c in 0..d {
                let (p, q) = (r[(i - 1, c)], r[(i, c)]);
                r[(i - 1, c)] = g[0][0] * p + g[0][1] * q;
                r[(i, c)] = g[1][0] * p + g[1][1] * q;
            }
            rots.push((i - 1, g));
        }
    }
    let phases: Vec<f64> = (0..d).map(|k| r[(k, k)].arg()).collect();
    let n = basis.dim();
    let mut m = CMat::zeros(n, n);
    for p in 0..n {
        let ph: f64 = (0..d).map(|k| phases[k] * basis.cartan[k][p]).sum();
        m[(p, p)] = c64::cis(ph);
    }
    for (a, g) in rots.iter().rev() {
        let adj = [[g[0][0].conj(), g[1][0].conj()], [g[0][1].conj(), g[1][1].conj()]];
        apply_pair_rotation(basis, *a, &adj, &mut m)?;
    }
    Ok(m)
}

/// `m ← π(R) m` for a unitary `R` acting on coordinates `(a, a+1)`.
fn apply_pair_rotation(basis: &GtBasis, a: usize, rot: &Rot, m: &mut CMat) -> Result<()> {
    let g = Mat::from_fn(2, 2, |i, j| rot[i][j]);
    let (phases, v) = linalg::unitary_eigen(&g)?;
    let log = linalg::conjugate_diagonal(&v, phases.iter().map(|&p| c64::new(p, 0.0)));
    let pb = &basis.pair_blocks[a];
    let raise = &basis.raising[a][a + 1];
    let n = m.ncols();
    let mut gathered = Vec::new();
    for block in &pb.blocks {
        let b = block.len();
        let mut h = CMat::zeros(b, b);
        for (li, &p) in block.iter().enumerate() {
            h[(li, li)] += log[(0, 0)] * basis.cartan[a][p] + log[(1, 1)] * basis.cartan[a + 1][p];
            for &(src, val) in &raise.rows[p] {
                let lj = pb.slot[src];
                debug_assert_eq!(block[lj], src);
                h[(li, lj)] += log[(0, 1)] * val;
                h[(lj, li)] += log[(1, 0)] * val;
            }
        }
        if b == 1 {
            let z = c64::cis(h[(0, 0)].re);
            let p = block[0];
            for c in 0..n {
                m[(p, c)] *= z;
            }
            continue;
        }
        let e = linalg::expi_hermitian(&h)?;
        if b >= 8 {
            let rows = Mat::from_fn(b, n, |li, c| m[(block[li], c)]);
            let out = &e * &rows;
            for (li, &p) in block.iter().enumerate() {
                for c in 0..n {
                    m[(p, c)] = out[(li, c)];
                }
            }
            continue;
        }
        gathered.resize(b, c64::new(0.0, 0.0));
        for c in 0..n {
            for (lj, &q) in block.iter().enumerate() {
                gathered[lj] = m[(q, c)];
            }
            for (li, &p) in block.iter().enumerate() {
                let mut acc = c64::new(0.0, 0.0);
                for lj in 0..b {
                    acc += e[(li, lj)] * gathered[lj];
                }
                m[(p, c)] = acc;
            }
        }
    }
    Ok(())
}

/// Minimal circular distance between phases below which the determinant ratio is
/// replaced by the weight-sum evaluation.
pub const CHARACTER_SINGULAR_GAP: f64 = 1e-8;

/// `χ_λ(diag(e^{iθ_1}, …, e^{iθ_d}))` by the Weyl character formula.
///
/// Near-coincident phases make the ratio of alternants singular; there the
/// character is evaluated as the sum of `e^{i⟨w,θ⟩}` over the weights `w` of
/// all Gelfand-Tsetlin patterns, which is its exact limit.
pub fn weyl_character(weight: &Weight, phases: &[f64]) -> Result<c64> {
    let d = weight.dim_group();
    if phases.len() != d {
        return invalid(format!("expected {d} phases, got {}", phases.len()));
    }
    if weight.is_trivial() {
        return Ok(c64::new(1.0, 0.0));
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..d {
        for j in (i + 1)..d {
            min_gap = min_gap.min(linalg::wrap_phase(phases[i] - phases[j]).abs());
        }
    }
    if min_gap < CHARACTER_SINGULAR_GAP {
        return Ok(character_by_patterns(weight, phases));
    }
    let lam = weight.entries();
    let num = Mat::from_fn(d, d, |i, j| c64::cis(phases[j] * (lam[i] + (d - 1 - i) as i64) as f64));
    let den = Mat::from_fn(d, d, |i, j| c64::cis(phases[j] * (d - 1 - i) as f64));
    Ok(num.determinant() / den.determinant())
}

fn character_by_patterns(weight: &Weight, phases: &[f64]) -> c64 {
    let d = weight.dim_group();
    let shift = -weight.entries()[d - 1];
    let top: Vec<i64> = weight.entries().iter().map(|x| x + shift).collect();
    let mut total = c64::new(0.0, 0.0);
    for p in enumerate_patterns(&top) {
        let mut angle = 0.0;
        let mut prev = 0i64;
        for k in 1..=d {
            let s: i64 = row(&p, d, k).iter().sum();
            angle += phases[k - 1] * (s - prev - shift) as f64;
            prev = s;
        }
        total += c64::cis(angle);
    }
    total
}

/// Eigenphases of `U` shifted to sum to zero (the PU(d) class of `U` in the torus).
pub fn normalized_eigenphases(u: &CMat) -> Result<Vec<f64>> {
    let (phases, _) = linalg::unitary_eigen(u)?;
    let mean = phases.iter().sum::<f64>() / phases.len() as f64;
    Ok(phases.into_iter().map(|p| p - mean).collect())
}

/// Shared cache of bases keyed by weight.
#[derive(Debug, Default)]
pub struct BasisCache {
    dim_cap: Option<u128>,
    inner: RwLock<HashMap<Weight, Arc<GtBasis>>>,
}

impl BasisCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dim_cap(dim_cap: u128) -> Self {
        BasisCache { dim_cap: Some(dim_cap), inner: RwLock::default() }
    }

    pub fn get(&self, weight: &Weight) -> Result<Arc<GtBasis>> {
        if let Some(b) = self.inner.read().expect("basis cache poisoned").get(weight) {
            return Ok(Arc::clone(b));
        }
        let basis = Arc::new(build_basis_capped(weight, weight.dim_group(), self.dim_cap.unwrap_or(DEFAULT_DIM_CAP))?);
        let mut w = self.inner.write().expect("basis cache poisoned");
        Ok(Arc::clone(w.entry(weight.clone()).or_insert(basis)))
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("basis cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
