//! Highest weights of the PU(d) irreps occurring in `(U ⊗ Ū)^{⊗t}`.
//!
//! An irrep is labelled by a nonincreasing integer sequence of length `d`; two
//! sequences differing by a constant label the same PU(d) irrep. We store the
//! sum-zero representative, which is also the one with the smallest `ℓ¹` norm.
//! The set `Λ_t` consists of all such weights whose positive part sums to at
//! most `t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, GapError, Result};

/// Canonical (sum-zero, nonincreasing) highest weight of a PU(d) irrep.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Weight(Vec<i64>);

impl Weight {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.len() < 2 {
            return invalid(format!("a weight needs at least 2 entries, got {}", entries.len()));
        }
        if entries.windows(2).any(|w| w[0] < w[1]) {
            return invalid(format!("weight {entries:?} is not nonincreasing"));
        }
        if entries.iter().sum::<i64>() != 0 {
            return invalid(format!("weight {entries:?} does not sum to zero"));
        }
        Ok(Weight(entries))
    }

    /// Reduces any nonincreasing sequence whose sum is divisible by its length
    /// to the sum-zero representative.
    pub fn canonicalize(entries: &[i64]) -> Result<Self> {
        let d = entries.len() as i64;
        let s: i64 = entries.iter().sum();
        if d == 0 || s % d != 0 {
            return invalid(format!("{entries:?} has no integral sum-zero representative"));
        }
        Weight::new(entries.iter().map(|x| x - s / d).collect())
    }

    pub fn trivial(d: usize) -> Self {
        Weight(vec![0; d])
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn dim_group(&self) -> usize {
        self.0.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// `|λ₊|`, the sum of the positive entries.
    pub fn positive_part(&self) -> i64 {
        self.0.iter().filter(|&&x| x > 0).sum()
    }

    /// The weight of the dual irrep, `(−λ_d, …, −λ_1)`.
    pub fn conjugate(&self) -> Weight {
        Weight(self.0.iter().rev().map(|x| -x).collect())
    }

    pub fn one_norm(&self) -> u64 {
        weight_one_norm(self)
    }
}

impl TryFrom<Vec<i64>> for Weight {
    type Error = GapError;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for Vec<i64> {
    fn from(w: Weight) -> Self {
        w.0
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic *descending* order, so `(2,0,-2)` precedes `(0,0,0)`.
impl Ord for Weight {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.cmp(&self.0)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Weight together with the data the gap bounds consume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrrepMeta {
    pub weight: Weight,
    pub dim: u128,
    pub fs_indicator: u8,
    pub one_norm: u64,
}

impl IrrepMeta {
    pub fn new(weight: Weight) -> Result<Self> {
        let dim = weyl_dimension(&weight)?;
        let fs_indicator = frobenius_schur(&weight);
        let one_norm = weight_one_norm(&weight);
        Ok(IrrepMeta { weight, dim, fs_indicator, one_norm })
    }
}

fn check_dims(d: usize) -> Result<()> {
    if d < 2 {
        return invalid(format!("dimension d must be at least 2, got {d}"));
    }
    Ok(())
}

/// `Λ_t` for PU(d), in lexicographic descending order.
pub fn enumerate_weights(d: usize, t: usize) -> Result<Vec<Weight>> {
    check_dims(d)?;
    let mut out = vec![Weight::trivial(d)];
    for n in 1..=t {
        for p in 1..d {
            for pos in partitions(n, p) {
                for q in 1..=(d - p) {
                    for neg in partitions(n, q) {
                        let mut e = Vec::with_capacity(d);
                        e.extend(pos.iter().map(|&x| x as i64));
                        e.extend(std::iter::repeat(0).take(d - p - q));
                        e.extend(neg.iter().rev().map(|&x| -(x as i64)));
                        out.push(Weight(e));
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// `Λ̃_t`: `Λ_t` without the trivial weight.
pub fn enumerate_nontrivial_weights(d: usize, t: usize) -> Result<Vec<Weight>> {
    Ok(enumerate_weights(d, t)?.into_iter().filter(|w| !w.is_trivial()).collect())
}

/// Partitions of `n` into exactly `parts` positive parts, each nonincreasing.
fn partitions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, parts: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // each remaining part is at least 1
        if rem < parts {
            return;
        }
        let hi = max.min(rem - (parts - 1));
        for x in (1..=hi).rev() {
            if x * parts < rem {
                break;
            }
            cur.push(x);
            rec(rem - x, parts - 1, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, parts, n, &mut Vec::new(), &mut out);
    out
}

pub fn weight_one_norm(w: &Weight) -> u64 {
    w.0.iter().map(|x| x.unsigned_abs()).sum()
}

/// Weyl dimension formula `∏_{i<j} (λ_i − λ_j + j − i)/(j − i)`, exact.
pub fn weyl_dimension(w: &Weight) -> Result<u128> {
    let e = &w.0;
    let d = e.len();
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..d {
        for j in (i + 1)..d {
            let a = (e[i] - e[j]) as u128 + (j - i) as u128;
            let b = (j - i) as u128;
            num = num
                .checked_mul(a)
                .ok_or_else(|| GapError::ResourceCap(format!("dimension of {w} overflows u128")))?;
            den *= b;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
    }
    debug_assert_eq!(den, 1);
    Ok(num)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// 1 for self-conjugate (real) irreps, 0 for complex ones. Quaternionic irreps do
/// not occur in `Λ_t`.
pub fn frobenius_schur(w: &Weight) -> u8 {
    u8::from(w.conjugate() == *w)
}
