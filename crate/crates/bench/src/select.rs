//! Choosing the number of blocks from the problem size.
//!
//! The cost model `c₁ N²/K² + c₂ K²` is minimized at `K ∝ N^{1/2}`; measured
//! optima grow more slowly, roughly as `N^{0.4}`. Either law is rounded to
//! the nearest power of two (in log scale) among the divisors of `N` in
//! `[1, N/4]`.

use serde::{Deserialize, Serialize};

/// Constant for the empirical law `K ≈ c · N^0.4`.
pub const DEFAULT_EMPIRICAL_C: f64 = 0.5;

/// Reference `(N, K, speedup)` rows for the auto-K table, measured on a
/// 4-core 3.2 GHz machine with a truncated WF base solver.
pub const REFERENCE_TABLE: [(usize, usize, f64); 7] = [
    (1 << 8, 4, 1.2),
    (1 << 9, 4, 27.0),
    (1 << 10, 8, 103.0),
    (1 << 11, 16, 343.0),
    (1 << 12, 32, 558.0),
    (1 << 13, 64, 3398.0),
    (1 << 14, 64, 9295.0),
];

/// Reference row for `n`, if listed.
pub fn reference_row(n: usize) -> Option<(usize, f64)> {
    REFERENCE_TABLE.iter().find(|r| r.0 == n).map(|&(_, k, s)| (k, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KMode {
    /// `c · N^0.4`
    Empirical,
    /// `c · N^0.5`
    Theoretical,
}

impl std::str::FromStr for KMode {
    type Err = crate::error::BenchError;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "empirical" => Ok(KMode::Empirical),
            "theoretical" => Ok(KMode::Theoretical),
            other => Err(crate::error::BenchError::Config(format!("unknown K mode `{other}`"))),
        }
    }
}

impl KMode {
    pub fn exponent(self) -> f64 {
        match self {
            KMode::Empirical => 0.4,
            KMode::Theoretical => 0.5,
        }
    }
}

/// Block count for a signal of length `n` (`n ≥ 4`).
pub fn select_k(n: usize, mode: KMode, c: f64) -> usize {
    let target = (c * (n as f64).powf(mode.exponent())).log2();
    let cap = (n / 4).max(1);
    let mut best = 1;
    let mut best_dist = f64::INFINITY;
    let mut k = 1usize;
    while k <= cap {
        if n.is_multiple_of(k) {
            let dist = ((k as f64).log2() - target).abs();
            if dist < best_dist {
                best = k;
                best_dist = dist;
            }
        }
        k *= 2;
    }
    best
}
