use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use super::passivity_margin;
use super::report::{CheckResult, VerificationReport};
use super::sampling::{
    random_distribution, random_levelling, random_passive, random_transfer_matrix, sample_rng,
};
use crate::channels::{ChannelResponse, ChannelSpec};
use crate::error::{Error, Result};
use crate::majorization::{fock_margin, majorization_margin};

const STREAM_FOCK: u64 = 0xA;
const STREAM_PASSIVE_PAIR: u64 = 0xB;
const STREAM_PASSIVE: u64 = 0xC;

/// Tolerance for the generated input relations, which hold up to rounding only.
const INPUT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreservationConfig {
    pub samples: usize,
    pub seed: u64,
    pub dim: usize,
    pub tol: f64,
}

impl Default for PreservationConfig {
    fn default() -> Self {
        PreservationConfig {
            samples: 1000,
            seed: 0,
            dim: 12,
            tol: 1e-9,
        }
    }
}

struct Sample {
    input: f64,
    output: f64,
    tail: f64,
}

/// Samples three regimes and checks that the channel preserves the relevant order:
///
/// - (a) `r ≻_F s` built as `s = L r` with a random transfer matrix; outputs must satisfy `≻_F`;
/// - (b) passive `r ≻ s` built by random order-preserving levellings; outputs must satisfy `≻`;
/// - (c) random passive inputs; outputs must be passive.
///
/// Output margins include the truncation tail of both outputs, so a sample passes iff
/// `slack ≥ −(tol + tails)`.
pub fn preservation_suite(
    ch: &ChannelSpec,
    cfg: &PreservationConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    ch.validate()?;
    if cfg.dim == 0 {
        return Err(Error::InvalidParameter("dim must be positive".into()));
    }
    let resp = ChannelResponse::new(ch, cfg.dim)?;
    let d = cfg.dim;

    let fock = run(cfg, STREAM_FOCK, |rng| {
        let r = random_distribution(rng, d);
        let s = random_transfer_matrix(rng, d)?.apply(&r)?;
        let (or, tr) = resp.apply(&r);
        let (os, ts) = resp.apply(&s);
        Ok(Sample {
            input: fock_margin(&r, &s).0,
            output: fock_margin(&or, &os).0 + tr + ts,
            tail: tr + ts,
        })
    })?;

    let pairs = run(cfg, STREAM_PASSIVE_PAIR, |rng| {
        let r = random_passive(rng, d);
        let steps = 1 + (d / 2);
        let s = random_levelling(rng, &r, steps);
        let (or, tr) = resp.apply(&r);
        let (os, ts) = resp.apply(&s);
        Ok(Sample {
            input: majorization_margin(&r, &s).0.min(passivity_margin(&s).0),
            output: majorization_margin(&or, &os).0 + tr + ts,
            tail: tr + ts,
        })
    })?;

    let passive = run(cfg, STREAM_PASSIVE, |rng| {
        let r = random_passive(rng, d);
        let (or, tr) = resp.apply(&r);
        Ok(Sample {
            input: passivity_margin(&r).0,
            output: passivity_margin(&or).0 + tr,
            tail: tr,
        })
    })?;

    let mut checks = Vec::new();
    let mut tail_bound: f64 = 0.0;
    for (regime, name, samples) in [
        ("a", "fock_majorization", &fock),
        ("b", "majorization_passive", &pairs),
        ("c", "passivity", &passive),
    ] {
        let mut input = CheckResult::new(format!("regime_{regime}_input"), INPUT_TOL);
        let mut output = CheckResult::new(format!("regime_{regime}_{name}"), cfg.tol);
        for (idx, s) in samples.iter().enumerate() {
            input.observe(s.input, || format!("sample {idx}"));
            output.observe(s.output, || format!("sample {idx}"));
            tail_bound = tail_bound.max(s.tail);
        }
        checks.push(input);
        checks.push(output);
    }

    Ok(VerificationReport::finish(
        "preservation",
        json!({
            "channel": ch,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "dim": cfg.dim,
        }),
        checks,
        tail_bound,
        start,
    ))
}

fn run<F>(cfg: &PreservationConfig, stream: u64, f: F) -> Result<Vec<Sample>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Sample> + Sync,
{
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|idx| f(&mut sample_rng(cfg.seed, stream, idx)))
        .collect()
}
