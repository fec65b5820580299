//! Majorization, Fock majorization and their certificates.
//!
//! `r ≻ s` compares partial sums of the descending rearrangements; `r ≻_F s` compares
//! partial sums in photon-number order, `Tr(P_n ρ) ≥ Tr(P_n σ)` for every `n`. Vectors of
//! different length are zero-padded to a common dimension, which leaves every partial
//! sum unchanged.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{is_passive, FockDistribution};

/// Default one-sided slack for dominance checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tolerance on column sums and signs of a [`TransferMatrix`].
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Step denominators below this are treated as zero intermediate mass.
pub const DEGENERATE_STEP: f64 = 1e-14;

fn padded_pair(r: &[f64], s: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = r.len().max(s.len());
    let mut a = r.to_vec();
    let mut b = s.to_vec();
    a.resize(d, 0.0);
    b.resize(d, 0.0);
    (a, b)
}

/// Worst slack `min_n [Σ_{i≤n} r_i − Σ_{i≤n} s_i]` and the cutoff where it occurs.
pub fn fock_margin(r: &[f64], s: &[f64]) -> (f64, usize) {
    let (r, s) = padded_pair(r, s);
    let mut acc_r = 0.0;
    let mut acc_s = 0.0;
    let mut worst = (f64::INFINITY, 0);
    for n in 0..r.len() {
        acc_r += r[n];
        acc_s += s[n];
        let slack = acc_r - acc_s;
        if slack < worst.0 {
            worst = (slack, n);
        }
    }
    worst
}

/// Worst slack of the sorted partial sums, `min_k [Σ_{i<k} r↓_i − Σ_{i<k} s↓_i]`, and the
/// prefix length `k − 1` where it occurs.
pub fn majorization_margin(r: &[f64], s: &[f64]) -> (f64, usize) {
    let (mut r, mut s) = padded_pair(r, s);
    r.sort_by(|a, b| b.total_cmp(a));
    s.sort_by(|a, b| b.total_cmp(a));
    fock_margin(&r, &s)
}

/// `r ≻ s`. Fails when the total masses differ by more than `tol`.
pub fn majorizes(r: &FockDistribution, s: &FockDistribution, tol: f64) -> Result<bool> {
    let (mr, ms) = (r.total_mass(), s.total_mass());
    if (mr - ms).abs() > tol {
        return Err(Error::MassMismatch {
            left: mr,
            right: ms,
        });
    }
    Ok(majorization_margin(r.probs(), s.probs()).0 >= -tol)
}

/// `r ≻_F s`: every photon-number partial sum of `r` dominates that of `s` within `tol`.
pub fn fock_majorizes(r: &FockDistribution, s: &FockDistribution, tol: f64) -> bool {
    fock_margin(r.probs(), s.probs()).0 >= -tol
}

/// Evaluates both relations on passive inputs, where they coincide.
pub fn equivalence_on_passive(
    r: &FockDistribution,
    s: &FockDistribution,
    tol: f64,
) -> Result<(bool, bool)> {
    for d in [r, s] {
        if !is_passive(d, tol) {
            let index = d
                .probs()
                .windows(2)
                .position(|w| w[1] > w[0] + tol)
                .map_or(0, |i| i + 1);
            return Err(Error::NotPassive {
                index,
                prev: d.probs()[index - 1],
                next: d.probs()[index],
            });
        }
    }
    Ok((majorizes(r, s, tol)?, fock_majorizes(r, s, tol)))
}

/// Column-stochastic, lower-triangular, entrywise non-negative matrix `L`.
///
/// `s = L r` moves population only towards higher photon numbers ("heating"), which is
/// exactly what `r ≻_F s` permits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransferMatrixJson", into = "TransferMatrixJson")]
pub struct TransferMatrix {
    entries: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct TransferMatrixJson {
    dim: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<TransferMatrixJson> for TransferMatrix {
    type Error = Error;

    fn try_from(raw: TransferMatrixJson) -> Result<Self> {
        let d = raw.dim;
        if raw.entries.len() != d || raw.entries.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidState(format!("entries must be {d}x{d}")));
        }
        TransferMatrix::new(DMatrix::from_fn(d, d, |i, j| raw.entries[i][j]))
    }
}

impl From<TransferMatrix> for TransferMatrixJson {
    fn from(l: TransferMatrix) -> Self {
        let d = l.dim();
        TransferMatrixJson {
            dim: d,
            entries: (0..d)
                .map(|i| (0..d).map(|j| l.entries[(i, j)]).collect())
                .collect(),
        }
    }
}

impl TransferMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let l = TransferMatrix { entries };
        l.validate()?;
        Ok(l)
    }

    pub fn identity(dim: usize) -> Self {
        TransferMatrix {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.entries.nrows();
        if d == 0 || self.entries.ncols() != d {
            return Err(Error::InvalidState("transfer matrix must be square".into()));
        }
        for j in 0..d {
            let mut col = 0.0;
            for i in 0..d {
                let x = self.entries[(i, j)];
                if !x.is_finite() {
                    return Err(Error::InvalidState(format!("L[{i},{j}] is not finite")));
                }
                if i < j && x != 0.0 {
                    return Err(Error::InvalidState(format!(
                        "L[{i},{j}] = {x} above the diagonal"
                    )));
                }
                if x < -STOCHASTIC_TOL {
                    return Err(Error::InvalidState(format!("L[{i},{j}] = {x} is negative")));
                }
                col += x;
            }
            if (col - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidState(format!("column {j} sums to {col}")));
            }
        }
        Ok(())
    }

    /// `L r`, with `r` zero-padded or rejected if longer than `L`.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if r.len() > d {
            return Err(Error::InvalidParameter(format!(
                "vector of length {} exceeds matrix dimension {d}",
                r.len()
            )));
        }
        Ok((0..d)
            .map(|i| {
                (0..=i)
                    .filter(|&j| j < r.len())
                    .map(|j| self.entries[(i, j)] * r[j])
                    .sum()
            })
            .collect())
    }

    pub fn apply_dist(&self, r: &FockDistribution) -> Result<FockDistribution> {
        let s = self.apply(r.probs())?;
        if r.is_normalized() {
            FockDistribution::new(s)
        } else {
            FockDistribution::unnormalized(s)
        }
    }
}

/// One elementary factor of the construction: identity except on `column`, which keeps
/// a fraction `keep` on the diagonal and moves `1 − keep` one level up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferStep {
    pub column: usize,
    pub keep: f64,
}

impl TransferStep {
    pub fn shift(&self) -> f64 {
        1.0 - self.keep
    }

    /// The factor as a dense `dim × dim` matrix.
    pub fn to_matrix(&self, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::identity(dim, dim);
        m[(self.column, self.column)] = self.keep;
        m[(self.column + 1, self.column)] = self.shift();
        m
    }
}

/// The elementary factors whose product (last factor leftmost) maps `r` to `s`.
///
/// Step `k` sets entry `k` to `s_k` and pushes the surplus
/// `Σ_{j≤k} r_j − Σ_{j≤k} s_j` into entry `k + 1`.
pub fn transfer_steps(
    r: &FockDistribution,
    s: &FockDistribution,
    tol: f64,
) -> Result<Vec<TransferStep>> {
    let (mr, ms) = (r.total_mass(), s.total_mass());
    if (mr - ms).abs() > tol {
        return Err(Error::MassMismatch {
            left: mr,
            right: ms,
        });
    }
    let (margin, at) = fock_margin(r.probs(), s.probs());
    if margin < -tol {
        return Err(Error::Precondition(format!(
            "first vector does not Fock-majorize the second (slack {margin:e} at n = {at})"
        )));
    }
    let (r, s) = padded_pair(r.probs(), s.probs());
    let d = r.len();
    let mut steps = Vec::with_capacity(d.saturating_sub(1));
    let mut sum_r = 0.0;
    let mut sum_s = 0.0;
    for k in 0..d.saturating_sub(1) {
        sum_r += r[k];
        // Mass currently sitting at position k.
        let held = sum_r - sum_s;
        let keep = if held < DEGENERATE_STEP {
            1.0
        } else {
            (s[k] / held).clamp(0.0, 1.0)
        };
        steps.push(TransferStep { column: k, keep });
        sum_s += s[k];
    }
    Ok(steps)
}

/// Builds `L` with `L r = s` from `r ≻_F s`, as the ordered product of the
/// elementary factors from [`transfer_steps`].
pub fn construct_transfer_matrix(
    r: &FockDistribution,
    s: &FockDistribution,
) -> Result<TransferMatrix> {
    let steps = transfer_steps(r, s, DEFAULT_TOL)?;
    let d = r.dim().max(s.dim());
    let mut l = DMatrix::<f64>::identity(d, d);
    // Left-multiplying by a factor touches only rows k and k+1.
    for step in &steps {
        let k = step.column;
        for j in 0..=k {
            let moved = l[(k, j)];
            l[(k, j)] = step.keep * moved;
            l[(k + 1, j)] += step.shift() * moved;
        }
    }
    TransferMatrix::new(l)
}

/// Continuous increasing test functions, evaluated at photon numbers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneFunction {
    Linear,
    Exponential {
        alpha: f64,
    },
    /// `−1 + σ((x − k − ½)/width) + 10⁻⁶ x`: close to −1 at `x ≤ k`, close to 0 at
    /// `x ≥ k+1`. The small slope keeps it strictly increasing in floating point.
    SmoothedStep {
        k: usize,
        width: f64,
    },
    Logistic {
        center: f64,
        scale: f64,
    },
    /// Exact step `−1` for `x ≤ k`, `0` otherwise. Only integer points are ever
    /// evaluated, and a continuous strictly increasing interpolant with the same integer
    /// values always exists.
    Step {
        k: usize,
    },
}

const SMOOTH_STEP_SLOPE: f64 = 1e-6;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl MonotoneFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MonotoneFunction::Linear => x,
            MonotoneFunction::Exponential { alpha } => (alpha * x).exp(),
            MonotoneFunction::SmoothedStep { k, width } => {
                -1.0 + sigmoid((x - k as f64 - 0.5) / width) + SMOOTH_STEP_SLOPE * x
            }
            MonotoneFunction::Logistic { center, scale } => sigmoid((x - center) / scale),
            MonotoneFunction::Step { k } => {
                if x <= k as f64 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MonotoneFunction::Linear => "linear".into(),
            MonotoneFunction::Exponential { alpha } => format!("exp({alpha}x)"),
            MonotoneFunction::SmoothedStep { k, width } => format!("smooth_step(k={k},w={width})"),
            MonotoneFunction::Logistic { center, scale } => {
                format!("logistic(c={center},s={scale})")
            }
            MonotoneFunction::Step { k } => format!("step(k={k})"),
        }
    }
}

/// Named finite set of increasing functions used for Theorem-style functional checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneFunctionFamily {
    pub name: String,
    pub members: Vec<MonotoneFunction>,
}

impl MonotoneFunctionFamily {
    /// Linear, `e^{0.1x}`, `e^{x}`, smoothed steps at every `k < dim` and two logistics.
    pub fn standard(dim: usize) -> Self {
        let dim = dim.max(1);
        let mut members = vec![
            MonotoneFunction::Linear,
            MonotoneFunction::Exponential { alpha: 0.1 },
            MonotoneFunction::Exponential { alpha: 1.0 },
        ];
        members.extend((0..dim).map(|k| MonotoneFunction::SmoothedStep { k, width: 0.05 }));
        let center = (dim as f64 - 1.0) / 2.0;
        members.push(MonotoneFunction::Logistic { center, scale: 1.0 });
        members.push(MonotoneFunction::Logistic {
            center,
            scale: (dim as f64 / 4.0).max(0.5),
        });
        MonotoneFunctionFamily {
            name: "standard".into(),
            members,
        }
    }

    /// Exact steps `f_k` for `k = 0 … dim−1`.
    pub fn steps(dim: usize) -> Self {
        MonotoneFunctionFamily {
            name: "steps".into(),
            members: (0..dim).map(|k| MonotoneFunction::Step { k }).collect(),
        }
    }
}

/// `Σ_i f(i) s_i − Σ_i f(i) r_i`; non-negative whenever `r ≻_F s`.
pub fn monotone_functional_gap(
    r: &FockDistribution,
    s: &FockDistribution,
    f: &MonotoneFunction,
) -> f64 {
    let (r, s) = padded_pair(r.probs(), s.probs());
    r.iter()
        .zip(&s)
        .enumerate()
        .map(|(i, (ri, si))| f.eval(i as f64) * (si - ri))
        .sum()
}

/// Checks every exact step function; agrees with [`fock_majorizes`] at the default slack.
pub fn step_function_test(r: &FockDistribution, s: &FockDistribution) -> bool {
    let d = r.dim().max(s.dim());
    MonotoneFunctionFamily::steps(d)
        .members
        .iter()
        .all(|f| monotone_functional_gap(r, s, f) >= -DEFAULT_TOL)
}
