//! The two inequality families behind ladder and passivity preservation.
//!
//! `Δ_n^{(i,K)} = Σ_{k≤K} Σ_{m≤n} [B^{(i,k)}_m − B^{(i+1,k)}_m]` and
//! `Γ_n^{(I,K)} = Σ_{i≤I} Σ_{k≤K} [B^{(i,k)}_n − B^{(i,k)}_{n+1}]`, both non-negative.
//! Each is evaluated directly from the table and, separately, through its recursion in
//! `K` (and `I`), and the two evaluations are compared.

use std::time::Instant;

use serde_json::json;

use super::report::{CheckResult, VerificationReport};
use crate::amplitudes::{check_eta, AmplitudeCache, CoefficientTable};
use crate::error::Result;

/// Tolerance for the ladder and passivity inequalities and their recursion checks.
pub const LADDER_TOL: f64 = 1e-10;

/// `Δ_n^{(i,K)}` by direct summation. The table must cover `(i + 1, K)`.
pub fn delta_direct(table: &CoefficientTable, i: usize, k_cap: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..=k_cap {
        for m in 0..=n {
            acc += table.get(i, k, m) - table.get(i + 1, k, m);
        }
    }
    acc
}

/// `Γ_n^{(I,K)}` by direct summation. The table must cover `(I, K)`.
pub fn gamma_direct(table: &CoefficientTable, i_cap: usize, k_cap: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..=i_cap {
        for k in 0..=k_cap {
            acc += table.get(i, k, n) - table.get(i, k, n + 1);
        }
    }
    acc
}

pub fn delta_ladder(
    eta: f64,
    max_i: usize,
    max_k: usize,
    max_n: usize,
) -> Result<VerificationReport> {
    let start = Instant::now();
    check_eta(eta)?;
    let table = AmplitudeCache::global().table(eta, max_i + 1, max_k)?;
    let mut nonneg = CheckResult::new("delta_nonnegative", LADDER_TOL);
    let mut recursion = CheckResult::new("delta_recursion", LADDER_TOL);
    for i in 0..=max_i {
        // Δ^{(i,K−1)}_n from the recursion, starting from Δ^{(i,−1)} = 0.
        let mut prev = vec![0.0; max_n + 1];
        for k in 0..=max_k {
            let mut cur = vec![0.0; max_n + 1];
            for n in 0..=max_n {
                let lower = if n > 0 { prev[n - 1] } else { 0.0 };
                cur[n] = eta * table.get(i, k, n) + eta * prev[n] + (1.0 - eta) * lower;
                let direct = delta_direct(&table, i, k, n);
                let at = || format!("i={i},K={k},n={n}");
                nonneg.observe(direct, at);
                recursion.observe(-(direct - cur[n]).abs(), at);
            }
            prev = cur;
        }
    }
    Ok(VerificationReport::finish(
        "delta_ladder",
        json!({"eta": eta, "max_i": max_i, "max_k": max_k, "max_n": max_n}),
        vec![nonneg, recursion],
        0.0,
        start,
    ))
}

/// Γ positivity, its recursion and the mode-swap symmetry
/// `Γ_n^{(0,K)}(η) = Γ_n^{(K,0)}(1 − η)`. The symmetry check is skipped at `η = 1`.
pub fn gamma_passivity(
    eta: f64,
    max_i: usize,
    max_k: usize,
    max_n: usize,
) -> Result<VerificationReport> {
    let start = Instant::now();
    check_eta(eta)?;
    let cache = AmplitudeCache::global();
    let side = max_i.max(max_k);
    let table = cache.table(eta, side, side)?;
    let mut nonneg = CheckResult::new("gamma_nonnegative", LADDER_TOL);
    let mut recursion = CheckResult::new("gamma_recursion", LADDER_TOL);
    let mut swap = CheckResult::new("gamma_mode_swap", LADDER_TOL);

    // rec[i][k][n] = Γ_n^{(i,k)} via Γ = B + η Γ^{(I,K−1)} + (1−η) Γ^{(I−1,K)}.
    let mut rec = vec![vec![vec![0.0; max_n + 1]; max_k + 1]; max_i + 1];
    for i in 0..=max_i {
        for k in 0..=max_k {
            for n in 0..=max_n {
                let left = if k > 0 { rec[i][k - 1][n] } else { 0.0 };
                let up = if i > 0 { rec[i - 1][k][n] } else { 0.0 };
                rec[i][k][n] = table.get(i, k, n) + eta * left + (1.0 - eta) * up;
                let direct = gamma_direct(&table, i, k, n);
                let at = || format!("I={i},K={k},n={n}");
                nonneg.observe(direct, at);
                recursion.observe(-(direct - rec[i][k][n]).abs(), at);
            }
        }
    }

    if eta < 1.0 {
        let mirror = cache.table(1.0 - eta, side, side)?;
        for k in 0..=max_k {
            for n in 0..=max_n {
                let a = gamma_direct(&table, 0, k, n);
                let b = gamma_direct(&mirror, k, 0, n);
                swap.observe(-(a - b).abs(), || format!("K={k},n={n}"));
            }
        }
    }

    Ok(VerificationReport::finish(
        "gamma_passivity",
        json!({"eta": eta, "max_i": max_i, "max_k": max_k, "max_n": max_n}),
        vec![nonneg, recursion, swap],
        0.0,
        start,
    ))
}
