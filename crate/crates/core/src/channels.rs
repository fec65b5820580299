//! Single-mode channels with a passive environment.
//!
//! Both channels are `ρ ↦ Tr_E[U (ρ ⊗ σ_E) U†]` with `σ_E` passive. For the beam
//! splitter `U = U^BS_η`; for the two-mode squeezer of gain `G` the dilation uses the
//! amplitudes of [`tms_amplitude`](crate::amplitudes::tms_amplitude) at
//! `λ = (G − 1)/G`, i.e. the beam-splitter tables at `η = 1/G`.
//!
//! Beam-splitter outputs are exact up to the environment tail: the output dimension is
//! `d_in + d_E − 1` because total photon number is conserved. Two-mode-squeezer outputs
//! have unbounded support and are cut once the missing probability drops below
//! `Truncation::tail_tol`, or rejected if `Truncation::max_photons` is reached first.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitudes::{check_eta, tms_amplitude_unchecked, AmplitudeCache};
use crate::error::{Error, Result};
use crate::fock::{
    DensityMatrix, EnvironmentSpec, FockDistribution, RealizedEnvironment, Tolerances, ENV_TAIL_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    BeamSplitter { eta: f64 },
    TwoModeSqueezer { gain: f64 },
}

impl ChannelKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelKind::BeamSplitter { eta } => check_eta(eta),
            ChannelKind::TwoModeSqueezer { gain } => {
                if gain.is_finite() && gain >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "gain must be >= 1, got {gain}"
                    )))
                }
            }
        }
    }

    /// Transmittance of the beam-splitter tables that drive this channel
    /// (`η` itself, or `1/G` for the squeezer).
    pub fn table_eta(&self) -> f64 {
        match *self {
            ChannelKind::BeamSplitter { eta } => eta,
            ChannelKind::TwoModeSqueezer { gain } => 1.0 / gain,
        }
    }

    /// Squeezing parameter `λ = (G − 1)/G`; `None` for the beam splitter.
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            ChannelKind::BeamSplitter { .. } => None,
            ChannelKind::TwoModeSqueezer { gain } => Some((gain - 1.0) / gain),
        }
    }
}

/// Cut-offs for the unbounded directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Output photon cap for the squeezer; `None` picks one from the input and environment
    /// dimensions and the geometric decay rate `λ`, see [`Truncation::output_cap`].
    pub max_photons: Option<usize>,
    /// Relative probability allowed to fall outside a squeezer output.
    pub tail_tol: f64,
    /// Thermal environments are realized until their tail is below this.
    pub env_tail_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            max_photons: None,
            tail_tol: 1e-12,
            env_tail_tol: ENV_TAIL_TOL,
        }
    }
}

impl Truncation {
    /// `max_photons`, or `4 (d_in + d_E) + 2 ⌈ln(tail_tol) / ln λ⌉` when unset.
    pub fn output_cap(&self, input_dim: usize, env_dim: usize, lambda: f64) -> usize {
        if let Some(cap) = self.max_photons {
            return cap.max(1);
        }
        let decay = if lambda > 0.0 {
            (self.tail_tol.ln() / lambda.ln()).ceil() as usize
        } else {
            0
        };
        4 * (input_dim + env_dim) + 2 * decay
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub env: EnvironmentSpec,
    pub truncation: Truncation,
}

impl ChannelSpec {
    pub fn beam_splitter(eta: f64, env: EnvironmentSpec) -> Result<Self> {
        Self::new(ChannelKind::BeamSplitter { eta }, env)
    }

    pub fn two_mode_squeezer(gain: f64, env: EnvironmentSpec) -> Result<Self> {
        Self::new(ChannelKind::TwoModeSqueezer { gain }, env)
    }

    pub fn new(kind: ChannelKind, env: EnvironmentSpec) -> Result<Self> {
        let spec = ChannelSpec {
            kind,
            env,
            truncation: Truncation::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_max_photons(mut self, max_photons: usize) -> Self {
        self.truncation.max_photons = Some(max_photons);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        self.env.validate()?;
        let t = &self.truncation;
        for (name, v) in [("tail_tol", t.tail_tol), ("env_tail_tol", t.env_tail_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn realized_env(&self) -> Result<RealizedEnvironment> {
        self.env.realize(self.truncation.env_tail_tol)
    }
}

/// Output populations plus the probability the truncation could not account for.
///
/// `dist.total_mass() + tail_mass == expected_trace` up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelOutput {
    pub dist: FockDistribution,
    pub tail_mass: f64,
    pub expected_trace: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOutput {
    pub state: DensityMatrix,
    pub tail_mass: f64,
}

fn output_distribution(probs: Vec<f64>, normalized: bool) -> Result<FockDistribution> {
    let sum: f64 = probs.iter().sum();
    if normalized && (sum - 1.0).abs() <= Tolerances::default().norm {
        FockDistribution::new(probs)
    } else {
        FockDistribution::unnormalized(probs)
    }
}

/// Action on the Fock diagonal: `out[m] = Σ_i p_i Σ_k λ_k B^{(i,k)}_m` for the beam
/// splitter, `out[m] = (1/G) Σ_i p_i Σ_e λ_e B^{(i, m+e−i)}_m` at `η = 1/G` for the squeezer.
pub fn apply_diag(ch: &ChannelSpec, dist: &FockDistribution) -> Result<ChannelOutput> {
    ch.validate()?;
    let env = ch.realized_env()?;
    let mass = dist.total_mass();
    let expected_trace = mass * env.trace;
    let normalized = dist.is_normalized() && ch.env.is_normalized();
    let cache = AmplitudeCache::global();
    match ch.kind {
        ChannelKind::BeamSplitter { eta } => {
            let d_in = dist.dim();
            let table = cache.table(eta, d_in - 1, env.dim() - 1)?;
            let mut out = vec![0.0; d_in + env.dim() - 1];
            for (i, &p) in dist.probs().iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (k, &w) in env.weights.iter().enumerate() {
                    for (o, b) in out.iter_mut().zip(table.row(i, k)) {
                        *o += p * w * b;
                    }
                }
            }
            Ok(ChannelOutput {
                dist: output_distribution(out, normalized)?,
                tail_mass: mass * env.tail_mass,
                expected_trace,
            })
        }
        ChannelKind::TwoModeSqueezer { .. } => tms_diag(ch, &env, dist, normalized),
    }
}

fn tms_diag(
    ch: &ChannelSpec,
    env: &RealizedEnvironment,
    dist: &FockDistribution,
    normalized: bool,
) -> Result<ChannelOutput> {
    let eta = ch.kind.table_eta();
    let d_in = dist.dim();
    let d_e = env.dim();
    let cap = ch
        .truncation
        .output_cap(d_in, d_e, ch.kind.lambda().unwrap_or(0.0));
    let mass = dist.total_mass();
    let realized: f64 = mass * env.weights.iter().sum::<f64>();
    let table = AmplitudeCache::global().table(eta, d_in - 1, cap + d_e)?;

    let mut out = Vec::new();
    let mut cumulative = 0.0;
    let target = realized * ch.truncation.tail_tol;
    while out.len() < cap {
        let m = out.len();
        let mut v = 0.0;
        for (i, &p) in dist.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (e, &w) in env.weights.iter().enumerate() {
                if m + e >= i {
                    v += p * w * table.get(i, m + e - i, m);
                }
            }
        }
        let v = eta * v;
        out.push(v);
        cumulative += v;
        if realized - cumulative <= target {
            break;
        }
    }
    let residual = realized - cumulative;
    if residual > target {
        return Err(Error::TruncationBudget {
            residual,
            tol: ch.truncation.tail_tol,
            max_photons: cap,
        });
    }
    Ok(ChannelOutput {
        dist: output_distribution(out, normalized)?,
        tail_mass: residual.max(0.0) + mass * env.tail_mass,
        expected_trace: mass * env.trace,
    })
}

/// Full density-matrix action.
///
/// For the beam splitter, `⟨n| out |n+j−i⟩` collects
/// `ρ_{ij} Σ_k λ_k ξ_n^{(i,k)} ξ*_{n+j−i}^{(j,k)}`, so input coherences never reach the
/// output diagonal. The squeezer output is cut at `Truncation::output_cap` photons.
pub fn apply_full(ch: &ChannelSpec, rho: &DensityMatrix) -> Result<MatrixOutput> {
    ch.validate()?;
    if !ch.env.is_normalized() {
        return Err(Error::UnnormalizedEnvironment);
    }
    let env = ch.realized_env()?;
    let cache = AmplitudeCache::global();
    match ch.kind {
        ChannelKind::BeamSplitter { eta } => {
            let d_in = rho.dim();
            let d_out = d_in + env.dim() - 1;
            let mut out = DMatrix::<Complex64>::zeros(d_out, d_out);
            for i in 0..d_in {
                for j in 0..d_in {
                    let r = rho.get(i, j);
                    if r == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (k, &w) in env.weights.iter().enumerate() {
                        let bi = cache.block(i + k, eta)?;
                        let bj = cache.block(j + k, eta)?;
                        for n in 0..=i + k {
                            let Some(n2) = (n + j).checked_sub(i) else {
                                continue;
                            };
                            if n2 > j + k {
                                continue;
                            }
                            out[(n, n2)] += r * w * bi.xi(n, i) * bj.xi(n2, j).conj();
                        }
                    }
                }
            }
            Ok(MatrixOutput {
                state: DensityMatrix::from_matrix_unchecked(out),
                tail_mass: env.tail_mass,
            })
        }
        ChannelKind::TwoModeSqueezer { .. } => {
            let cap =
                ch.truncation
                    .output_cap(rho.dim(), env.dim(), ch.kind.lambda().unwrap_or(0.0));
            let out = tms_full_block(
                cache,
                ch.kind.table_eta(),
                &env.weights,
                rho.elements(),
                cap,
            )?;
            let trace: f64 = (0..cap).map(|m| out[(m, m)].re).sum();
            let realized: f64 = env.weights.iter().sum();
            let residual = realized - trace;
            if residual > realized * ch.truncation.tail_tol {
                return Err(Error::TruncationBudget {
                    residual,
                    tol: ch.truncation.tail_tol,
                    max_photons: cap,
                });
            }
            Ok(MatrixOutput {
                state: DensityMatrix::from_matrix_unchecked(out),
                tail_mass: residual.max(0.0) + env.tail_mass,
            })
        }
    }
}

/// Squeezer output restricted to photon numbers `< out_dim`:
/// `⟨m| out |n⟩ = Σ_{ij} γ_{ij} Σ_e λ_e Σ_k T(m,k;i,e) T*(n,k;j,e)`.
fn tms_full_block(
    cache: &AmplitudeCache,
    eta: f64,
    env_weights: &[f64],
    gamma: &DMatrix<Complex64>,
    out_dim: usize,
) -> Result<DMatrix<Complex64>> {
    let d_in = gamma.nrows();
    let mut out = DMatrix::<Complex64>::zeros(out_dim, out_dim);
    for i in 0..d_in {
        for j in 0..d_in {
            let g = gamma[(i, j)];
            if g == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (e, &w) in env_weights.iter().enumerate() {
                for m in i.saturating_sub(e)..out_dim {
                    let k = m + e - i;
                    let Some(n) = (m + j).checked_sub(i) else {
                        continue;
                    };
                    if n >= out_dim {
                        continue;
                    }
                    let a = tms_amplitude_unchecked(cache, m, k, i, e, eta)?;
                    let b = tms_amplitude_unchecked(cache, n, k, j, e, eta)?;
                    out[(m, n)] += g * w * a * b.conj();
                }
            }
        }
    }
    Ok(out)
}

/// `out[m] = Σ_i p_i Σ_{k≤K} B^{(i,k)}_m`: the beam splitter with the raw projector
/// `P_K` as environment. Not trace preserving; the output trace is `(K+1)` times the input's.
pub fn apply_projector_channel(
    eta: f64,
    cutoff: usize,
    dist: &FockDistribution,
) -> Result<FockDistribution> {
    check_eta(eta)?;
    let d_in = dist.dim();
    let table = AmplitudeCache::global().table(eta, d_in - 1, cutoff)?;
    let mut out = vec![0.0; d_in + cutoff];
    for (i, &p) in dist.probs().iter().enumerate() {
        for k in 0..=cutoff {
            for (o, b) in out.iter_mut().zip(table.row(i, k)) {
                *o += p * b;
            }
        }
    }
    FockDistribution::unnormalized(out)
}

/// The adjoint of a beam-splitter channel: `(1/η)` times the squeezer with `λ = 1 − η`
/// (gain `1/η`) and the transposed environment.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointChannel {
    pub channel: ChannelSpec,
    pub prefactor: f64,
    pub lambda: f64,
}

pub fn adjoint(ch: &ChannelSpec) -> Result<AdjointChannel> {
    ch.validate()?;
    let ChannelKind::BeamSplitter { eta } = ch.kind else {
        return Err(Error::InvalidParameter(
            "adjoint is defined here for beam-splitter channels".into(),
        ));
    };
    let channel = ChannelSpec {
        kind: ChannelKind::TwoModeSqueezer { gain: 1.0 / eta },
        env: ch.env.transpose(),
        truncation: ch.truncation,
    };
    Ok(AdjointChannel {
        channel,
        prefactor: 1.0 / eta,
        lambda: 1.0 - eta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualityGap {
    /// `Tr(γ C^BS_η[ρ])`.
    pub lhs: f64,
    /// `(1/η) Tr(ρ C^TMS_{1−η}[γ])`.
    pub rhs: f64,
    pub gap: f64,
    pub tail_mass: f64,
}

/// `|Tr(γ C^BS_η[ρ]) − (1/η) Tr(ρ C^TMS_{1−η}[γ])|`.
///
/// Only squeezer output entries inside `ρ`'s dimension enter the right-hand side, and
/// those are exact; the only truncation is the environment tail.
pub fn duality_gap(
    eta: f64,
    env: &EnvironmentSpec,
    rho: &DensityMatrix,
    gamma: &DensityMatrix,
) -> Result<DualityGap> {
    let bs = ChannelSpec::beam_splitter(eta, env.clone())?;
    if !env.is_normalized() {
        return Err(Error::UnnormalizedEnvironment);
    }
    let forward = apply_full(&bs, rho)?;
    let lhs = trace_product(gamma.elements(), forward.state.elements());

    let adj = adjoint(&bs)?;
    let env2 = adj.channel.realized_env()?;
    let backward = tms_full_block(
        AmplitudeCache::global(),
        adj.channel.kind.table_eta(),
        &env2.weights,
        gamma.elements(),
        rho.dim(),
    )?;
    let rhs = adj.prefactor * trace_product(rho.elements(), &backward);
    Ok(DualityGap {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        tail_mass: forward.tail_mass.max(env2.tail_mass),
    })
}

/// `Re Tr(A B)` over the overlapping leading block.
fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let d = a.nrows().min(b.nrows());
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..d {
        for y in 0..d {
            acc += a[(x, y)] * b[(y, x)];
        }
    }
    acc.re
}

/// The channel's outputs for each Fock input `|i⟩`, `i < dim`, zero-padded to a
/// common length. Linear combinations of its columns give the output of any diagonal input.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelResponse {
    columns: Vec<Vec<f64>>,
    tails: Vec<f64>,
    len: usize,
}

impl ChannelResponse {
    pub fn new(ch: &ChannelSpec, dim: usize) -> Result<Self> {
        let mut columns = Vec::with_capacity(dim);
        let mut tails = Vec::with_capacity(dim);
        for i in 0..dim {
            let out = apply_diag(ch, &FockDistribution::fock(i, dim)?)?;
            tails.push(out.tail_mass);
            columns.push(out.dist.into_probs());
        }
        let len = columns.iter().map(Vec::len).max().unwrap_or(0);
        for c in &mut columns {
            c.resize(len, 0.0);
        }
        Ok(ChannelResponse {
            columns,
            tails,
            len,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.columns.len()
    }

    pub fn output_len(&self) -> usize {
        self.len
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    /// Output populations and tail mass for input populations `p`.
    pub fn apply(&self, p: &[f64]) -> (Vec<f64>, f64) {
        let mut out = vec![0.0; self.len];
        let mut tail = 0.0;
        for ((col, t), &pi) in self.columns.iter().zip(&self.tails).zip(p) {
            if pi == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(col) {
                *o += pi * c;
            }
            tail += pi * t;
        }
        (out, tail)
    }
}
