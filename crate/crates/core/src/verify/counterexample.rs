//! Search for pairs `r ≻ s` whose channel outputs are no longer ordered.

use serde::{Deserialize, Serialize};

use super::sampling::{
    random_distribution, random_doubly_stochastic_image, random_levelling, random_passive,
    sample_rng,
};
use crate::channels::{apply_diag, ChannelResponse, ChannelSpec};
use crate::error::{Error, Result};
use crate::fock::{is_passive, FockDistribution};
use crate::majorization::majorization_margin;

const STREAM_PROBE: u64 = 0xE;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CounterexampleConfig {
    /// Largest input dimension searched.
    pub grid_dim: usize,
    /// Random probes after the deterministic sweep.
    pub random_probes: usize,
    pub seed: u64,
    /// Restrict both inputs to passive distributions.
    pub passive_only: bool,
    pub tol: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            grid_dim: 6,
            random_probes: 2000,
            seed: 0,
            passive_only: false,
            tol: 1e-10,
        }
    }
}

/// Inputs with `r ≻ s` whose outputs violate `C[r] ≻ C[s]`.
///
/// `violated_index` is `k` such that the sum of the `k + 1` largest entries of
/// `output_r` falls short of that of `output_s` by `−output_margin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub output_r: Vec<f64>,
    pub output_s: Vec<f64>,
    pub input_margin: f64,
    pub output_margin: f64,
    pub violated_index: usize,
}

fn fock(n: usize, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[n] = 1.0;
    v
}

fn uniform(len: usize, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[..len].iter_mut().for_each(|x| *x = 1.0 / len as f64);
    v
}

/// The deterministic sweep, in order of increasing dimension.
fn sweep(grid_dim: usize, passive_only: bool) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for d in 2..=grid_dim {
        if passive_only {
            for a in 1..=d {
                for b in a..=d {
                    out.push((uniform(a, d), uniform(b, d)));
                }
            }
            continue;
        }
        for n in 0..d {
            for m in 0..d {
                if m != n {
                    out.push((fock(n, d), fock(m, d)));
                }
            }
            out.push((fock(n, d), uniform(d, d)));
            for a in 0..d {
                for b in a + 1..d {
                    let mut s = vec![0.0; d];
                    s[a] = 0.5;
                    s[b] = 0.5;
                    out.push((fock(n, d), s));
                }
            }
        }
    }
    out
}

/// Returns the first violating pair: the deterministic sweep over Fock states against
/// other Fock states, the uniform state and two-level spreads, then seeded random
/// probes with `s` a doubly stochastic image of `r` (order-preserving levellings of a
/// passive `r` when `passive_only`).
pub fn counterexample_search(
    ch: &ChannelSpec,
    cfg: &CounterexampleConfig,
) -> Result<Option<Counterexample>> {
    ch.validate()?;
    if cfg.grid_dim < 1 {
        return Err(Error::InvalidParameter(
            "grid dimension must be positive".into(),
        ));
    }
    let resp = ChannelResponse::new(ch, cfg.grid_dim)?;
    let violates = |r: &[f64], s: &[f64]| -> bool {
        if !cfg.passive_only && is_passive_vec(r) && is_passive_vec(s) {
            return false;
        }
        if majorization_margin(r, s).0 < -cfg.tol {
            return false;
        }
        let (or, tr) = resp.apply(r);
        let (os, ts) = resp.apply(s);
        majorization_margin(&or, &os).0 + tr + ts < -cfg.tol
    };
    for (r, s) in sweep(cfg.grid_dim, cfg.passive_only) {
        if violates(&r, &s) {
            return describe(ch, r, s).map(Some);
        }
    }
    for idx in 0..cfg.random_probes as u64 {
        let mut rng = sample_rng(cfg.seed, STREAM_PROBE, idx);
        let d = 2 + (idx as usize) % (cfg.grid_dim.max(2) - 1);
        let d = d.min(cfg.grid_dim);
        let (r, s) = if cfg.passive_only {
            let r = random_passive(&mut rng, d);
            let s = random_levelling(&mut rng, &r, 3);
            (r, s)
        } else {
            let r = random_distribution(&mut rng, d);
            let s = random_doubly_stochastic_image(&mut rng, &r, 2);
            (r, s)
        };
        if violates(&r, &s) {
            return describe(ch, r, s).map(Some);
        }
    }
    Ok(None)
}

fn is_passive_vec(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn describe(ch: &ChannelSpec, r: Vec<f64>, s: Vec<f64>) -> Result<Counterexample> {
    let out_r = apply_diag(ch, &FockDistribution::new(r.clone())?)?;
    let out_s = apply_diag(ch, &FockDistribution::new(s.clone())?)?;
    let output_r = out_r.dist.into_probs();
    let output_s = out_s.dist.into_probs();
    let (output_margin, violated_index) = majorization_margin(&output_r, &output_s);
    Ok(Counterexample {
        input_margin: majorization_margin(&r, &s).0,
        r,
        s,
        output_r,
        output_s,
        output_margin,
        violated_index,
    })
}

/// Recomputes a stored instance: `r ≻ s` within `tol`, at least one input non-passive,
/// and the recomputed outputs violate `≻` by more than `tol` plus their tails.
pub fn confirm_counterexample(ch: &ChannelSpec, cx: &Counterexample, tol: f64) -> Result<bool> {
    let r = FockDistribution::new(cx.r.clone())?;
    let s = FockDistribution::new(cx.s.clone())?;
    if majorization_margin(r.probs(), s.probs()).0 < -tol {
        return Ok(false);
    }
    if is_passive(&r, 0.0) && is_passive(&s, 0.0) {
        return Ok(false);
    }
    let out_r = apply_diag(ch, &r)?;
    let out_s = apply_diag(ch, &s)?;
    let margin = majorization_margin(out_r.dist.probs(), out_s.dist.probs()).0;
    Ok(margin + out_r.tail_mass + out_s.tail_mass < -tol)
}
