use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::report::{CheckResult, VerificationReport};
use super::sampling::{random_density_matrix, random_distribution, sample_rng};
use crate::amplitudes::check_eta;
use crate::channels::{duality_gap, DualityGap};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, EnvironmentSpec, FockDistribution};

const STREAM_DUALITY: u64 = 0xD;

/// Tolerance of the vacuum closed-form case.
pub const VACUUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityConfig {
    pub samples: usize,
    pub seed: u64,
    pub dim: usize,
    pub tol: f64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        DualityConfig {
            samples: 100,
            seed: 0,
            dim: 6,
            tol: 1e-9,
        }
    }
}

/// Duality gaps on seeded `(ρ, γ)` pairs. Even samples use general density matrices,
/// odd samples Fock-diagonal ones. A sample passes iff `gap ≤ tol + tail`.
pub fn duality_suite(
    eta: f64,
    env: &EnvironmentSpec,
    cfg: &DualityConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    check_eta(eta)?;
    env.validate()?;
    if cfg.dim == 0 {
        return Err(Error::InvalidParameter("dim must be positive".into()));
    }
    let gaps: Vec<DualityGap> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = sample_rng(cfg.seed, STREAM_DUALITY, idx);
            let (rho, gamma) = if idx % 2 == 0 {
                (
                    random_density_matrix(&mut rng, cfg.dim)?,
                    random_density_matrix(&mut rng, cfg.dim)?,
                )
            } else {
                let a = FockDistribution::new(random_distribution(&mut rng, cfg.dim))?;
                let b = FockDistribution::new(random_distribution(&mut rng, cfg.dim))?;
                (
                    DensityMatrix::from_distribution(&a)?,
                    DensityMatrix::from_distribution(&b)?,
                )
            };
            duality_gap(eta, env, &rho, &gamma)
        })
        .collect::<Result<_>>()?;

    let mut check = CheckResult::new("duality_gap", cfg.tol);
    let mut tail_bound: f64 = 0.0;
    for (idx, g) in gaps.iter().enumerate() {
        check.observe(g.tail_mass - g.gap, || format!("sample {idx}"));
        tail_bound = tail_bound.max(g.tail_mass);
    }

    let vac = DensityMatrix::pure(&[Complex64::new(1.0, 0.0)])?;
    let closed = duality_gap(eta, &EnvironmentSpec::vacuum(), &vac, &vac)?;
    let mut vacuum = CheckResult::new("vacuum_closed_form", VACUUM_TOL);
    vacuum.observe(-closed.gap, || "rho = gamma = |0><0|".into());

    Ok(VerificationReport::finish(
        "duality",
        json!({
            "eta": eta,
            "env": env,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "dim": cfg.dim,
        }),
        vec![check, vacuum],
        tail_bound,
        start,
    ))
}
