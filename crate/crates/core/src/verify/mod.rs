//! Verification suites with margin reports.
//!
//! Every suite records, per inequality family, the most negative slack observed and
//! passes iff that slack is at least `−tolerance`. Sampled suites are seeded per sample,
//! so reports are reproducible regardless of thread count.

mod counterexample;
mod duality;
mod ladder;
mod preservation;
mod report;
pub mod sampling;

pub use counterexample::{
    confirm_counterexample, counterexample_search, Counterexample, CounterexampleConfig,
};
pub use duality::{duality_suite, DualityConfig, VACUUM_TOL};
pub use ladder::{delta_direct, delta_ladder, gamma_direct, gamma_passivity, LADDER_TOL};
pub use preservation::{preservation_suite, PreservationConfig};
pub use report::{CheckResult, VerificationReport};

/// `min_n (v_n − v_{n+1})` and the `n` where it occurs; `+∞` for fewer than two entries.
pub fn passivity_margin(v: &[f64]) -> (f64, usize) {
    v.windows(2)
        .enumerate()
        .map(|(n, w)| (w[0] - w[1], n))
        .fold(
            (f64::INFINITY, 0),
            |acc, x| if x.0 < acc.0 { x } else { acc },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passivity_margin_examples() {
        assert_eq!(passivity_margin(&[0.5, 0.3, 0.2]), (0.3 - 0.2, 1));
        let (m, n) = passivity_margin(&[0.2, 0.5, 0.3]);
        assert!((m + 0.3).abs() < 1e-15);
        assert_eq!(n, 0);
        assert_eq!(passivity_margin(&[1.0]).0, f64::INFINITY);
    }
}
