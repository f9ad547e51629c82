//! Exact norm values for structured matrix classes.
//!
//! For these classes the γ-, Γ- and G-norms do not depend on the rank d.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::matrix::{Field, SymMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormResult {
    pub gamma: f64,
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub applicable_d: &'static str,
}

/// Norms of diag(a): γ = |Σa|, Γ = max(Σa⁺, Σa⁻), G = Σ|a|.
pub fn diag_norms(a: &[f64]) -> ClosedFormResult {
    let pos: f64 = a.iter().map(|&x| x.max(0.0)).sum();
    let neg: f64 = a.iter().map(|&x| (-x).max(0.0)).sum();
    ClosedFormResult {
        gamma: (pos - neg).abs(),
        big_gamma: pos.max(neg),
        g: Some(pos + neg),
        applicable_d: "all d >= 1",
    }
}

/// γ-norm of a tridiagonal symmetric matrix: |tr A| + 2Σ|a_{i,i+1}|.
pub fn tridiag_gamma(a: &SymMatrix) -> Result<f64> {
    let n = a.n();
    for i in 0..n {
        for j in i + 2..n {
            if a.get(i, j).norm() != 0.0 {
                return domain(format!("entry ({i},{j}) lies outside the tridiagonal band"));
            }
        }
    }
    let off: f64 = (0..n.saturating_sub(1)).map(|i| a.get(i, i + 1).norm()).sum();
    Ok(a.trace().abs() + 2.0 * off)
}

/// For an entrywise nonnegative real matrix all three norms equal the
/// entry sum, for every d and both fields.
pub fn nonneg_norms(a: &SymMatrix) -> Result<ClosedFormResult> {
    if a.field() == Field::Complex && !a.is_real_valued() {
        return domain("nonneg_norms needs real entries");
    }
    if let Some(k) = a.entries().iter().position(|v| v.re < 0.0) {
        return domain(format!("entry {k} is negative"));
    }
    let s = a.entry_sum();
    Ok(ClosedFormResult { gamma: s, big_gamma: s, g: Some(s), applicable_d: "all d >= 1" })
}

/// Assemble [[A1, −B], [−Bᵀ, A2]] from nonnegative blocks.
pub fn bipartite_block_matrix(a1: &SymMatrix, a2: &SymMatrix, b: &[Vec<f64>]) -> Result<SymMatrix> {
    let (m, n) = (a1.n(), a2.n());
    if b.len() != m || b.iter().any(|row| row.len() != n) {
        return domain(format!("B must be {m}x{n}"));
    }
    let neg = |x: f64| x < 0.0;
    if a1.entries().iter().any(|v| neg(v.re) || v.im != 0.0)
        || a2.entries().iter().any(|v| neg(v.re) || v.im != 0.0)
        || b.iter().flatten().any(|&x| neg(x))
    {
        return domain("all blocks must be entrywise nonnegative");
    }
    Ok(SymMatrix::real_from_fn(m + n, |i, j| match (i < m, j < m) {
        (true, true) => a1.re(i, j),
        (false, false) => a2.re(i - m, j - m),
        (true, false) => -b[i][j - m],
        (false, true) => -b[j][i - m],
    }))
}

/// Common value of γ = Γ = G for [[A1, −B], [−Bᵀ, A2]]: the sum of absolute
/// entries, attained at x = (𝟙, −𝟙).
pub fn bipartite_block_norms(a1: &SymMatrix, a2: &SymMatrix, b: &[Vec<f64>]) -> Result<f64> {
    Ok(bipartite_block_matrix(a1, a2, b)?.entry_abs_sum())
}
