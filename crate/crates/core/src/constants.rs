//! Explicit constants of the calculable gap bound and the reference tables.
//!
//! All logarithms are natural. `c_s` is taken as exactly `d + 2`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};

/// `C_b = 9π`.
pub const C_B: f64 = 9.0 * PI;
/// `C = π/2`.
pub const C_LIP: f64 = PI / 2.0;

/// Solovay-Kitaev exponent `c = ln 5 / ln(3/2)`.
pub fn sk_exponent() -> f64 {
    5f64.ln() / 1.5f64.ln()
}

/// `c_s = d + 2`.
pub fn c_s(d: usize) -> f64 {
    (d + 2) as f64
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return invalid(format!("d must be at least 2, got {d}"));
    }
    Ok(())
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return invalid(format!("{name} must lie in (0, 1), got {x}"));
    }
    Ok(())
}

/// `τ(ε, d) = L · sqrt(L/32 + ln(d L / ε))` with `L = ln^{1/2}(6 C_b / ε)`.
pub fn tau(eps: f64, d: usize) -> Result<f64> {
    check_unit_interval("eps", eps)?;
    check_d(d)?;
    let l = (6.0 * C_B / eps).ln().sqrt();
    Ok(l * (l / 32.0 + (d as f64 / eps * l).ln()).sqrt())
}

/// `5 d^{5/2} / ε · τ(ε, d)` before rounding.
pub fn scale_t0_real(eps: f64, d: usize) -> Result<f64> {
    Ok(5.0 * (d as f64).powf(2.5) / eps * tau(eps, d)?)
}

/// `t₀ = ⌈5 d^{5/2} / ε₀ · τ(ε₀, d)⌉`.
pub fn scale_t0(eps0: f64, d: usize) -> Result<u64> {
    Ok(scale_t0_real(eps0, d)?.ceil() as u64)
}

/// `ε₀,min = 1/(d+2)`.
pub fn eps0_min(d: usize) -> f64 {
    1.0 / c_s(d)
}

/// Numerator of the word-length bound:
/// `(d²−1)(2 ln(1/ε) + ln(4 C_b^{3/2} d)) + ln 32`.
pub fn net_length_numerator(d: usize, eps: f64) -> f64 {
    let dim = (d * d - 1) as f64;
    dim * (2.0 * (1.0 / eps).ln() + (4.0 * C_B.powf(1.5) * d as f64).ln()) + 32f64.ln()
}

/// `α(d, ε₀) = [2 ln(1/(c_s ε₀))]^{2c} / (16 N²)` with `N` the word-length numerator.
pub fn alpha(d: usize, eps0: f64) -> Result<f64> {
    check_d(d)?;
    let limit = eps0_min(d);
    if !(eps0 > 0.0) || eps0 > limit * (1.0 + 1e-12) {
        return invalid(format!("eps0 must lie in (0, 1/(d+2)] = (0, {limit}], got {eps0}"));
    }
    let x = c_s(d) * eps0;
    if (x - 1.0).abs() <= 1e-12 {
        log::warn!("alpha evaluated at eps0 = 1/(d+2); the bound degenerates to 0");
        return Ok(0.0);
    }
    let c = sk_exponent();
    let num = (2.0 * (1.0 / x).ln()).powf(2.0 * c);
    let den = 16.0 * net_length_numerator(d, eps0).powi(2);
    Ok(num / den)
}

/// `β(d) = 4C / c_s² = 2π/(d+2)²`.
pub fn beta(d: usize) -> f64 {
    4.0 * C_LIP / c_s(d).powi(2)
}

/// Constants of the ε-net word-length theorem at infinite scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2Constants {
    /// `(d²−1)/gap`, the coefficient of `ln(1/ε)`.
    pub slope: f64,
    /// `B = −(d²−1) ln(4.75)/gap`.
    pub b: f64,
    /// `C_V = 9.5^{d²−1}`.
    pub c_v: f64,
}

pub fn theorem2_constants(d: usize, gap: f64) -> Result<Theorem2Constants> {
    check_d(d)?;
    if !(gap > 0.0 && gap <= 1.0) {
        return invalid(format!("gap must lie in (0, 1], got {gap}"));
    }
    let dim = (d * d - 1) as f64;
    Ok(Theorem2Constants { slope: dim / gap, b: -dim * 4.75f64.ln() / gap, c_v: 9.5f64.powf(dim) })
}

/// Every constant of the main bound for one `(d, ε₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub d: usize,
    pub eps0: f64,
    pub c: f64,
    pub c_s: f64,
    #[serde(rename = "C")]
    pub c_lip: f64,
    #[serde(rename = "C_b")]
    pub c_b: f64,
    pub t0: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl BoundParams {
    pub fn new(d: usize, eps0: f64) -> Result<Self> {
        let alpha = alpha(d, eps0)?;
        Ok(BoundParams {
            d,
            eps0,
            c: sk_exponent(),
            c_s: c_s(d),
            c_lip: C_LIP,
            c_b: C_B,
            t0: scale_t0(eps0, d)?,
            alpha,
            beta: beta(d),
        })
    }
}

/// One row of the `(ε₀, t₀, α, β)` tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub d: usize,
    pub eps0: f64,
    pub t0: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl TableRow {
    /// `α` in the three-significant-digit scientific form used by the tables, e.g. `5.15e-03`.
    pub fn alpha_sci(&self) -> String {
        format_sci3(self.alpha)
    }

    pub fn beta_fixed(&self) -> String {
        format!("{:.3}", self.beta)
    }
}

/// `x` as `m.mme±XX`.
pub fn format_sci3(x: f64) -> String {
    if x == 0.0 {
        return "0.00e+00".to_string();
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let e: i32 = exp.parse().expect("exponent");
    format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

/// The `ε₀` grid printed for `d = 2, 3, 4`; the last entry is `ε₀,min`.
pub fn reference_grid(d: usize) -> Vec<f64> {
    let (start, count) = match d {
        2 => (4, 14),
        3 => (2, 14),
        4 => (1, 14),
        _ => return Vec::new(),
    };
    let mut out: Vec<f64> = (start..start + count).map(|k| k as f64 / 100.0).collect();
    out.push(eps0_min(d));
    out
}

pub fn emit_tables(ds: &[usize], grid: Option<&[f64]>) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for &d in ds {
        let eps_list = match grid {
            Some(g) => g.to_vec(),
            None => reference_grid(d),
        };
        for eps0 in eps_list {
            let p = BoundParams::new(d, eps0)?;
            rows.push(TableRow { d, eps0, t0: p.t0, alpha: p.alpha, beta: p.beta });
        }
    }
    Ok(rows)
}

pub fn tables_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("d,eps0,t0,alpha,beta\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.d, r.eps0, r.t0, r.alpha_sci(), r.beta_fixed()));
    }
    out
}
