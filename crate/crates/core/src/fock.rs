//! Fock-basis states and passive environments.
//!
//! Photon numbers are 0-based throughout: entry `n` of a [`FockDistribution`] is the
//! population of `|n⟩`. Operations never silently lose probability; anything cut off
//! by truncation is carried as an explicit tail mass by the callers that truncate.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerances for state validation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed negativity of probabilities and eigenvalues.
    pub pos: f64,
    /// Allowed deviation from Hermiticity, elementwise.
    pub herm: f64,
    /// Allowed deviation of the trace from 1.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pos: 1e-10,
            herm: 1e-10,
            norm: 1e-9,
        }
    }
}

/// Diagonal of a single-mode state in the Fock basis.
///
/// A normalized distribution sums to one within `Tolerances::norm`. Unnormalized
/// distributions only need non-negative entries; they arise as outputs of the
/// projector-environment channel, whose trace is `K + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FockDistributionJson", into = "FockDistributionJson")]
pub struct FockDistribution {
    probs: Vec<f64>,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct FockDistributionJson {
    dim: usize,
    probs: Vec<f64>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    normalized: bool,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl TryFrom<FockDistributionJson> for FockDistribution {
    type Error = Error;

    fn try_from(raw: FockDistributionJson) -> Result<Self> {
        if raw.dim != raw.probs.len() {
            return Err(Error::InvalidState(format!(
                "dim {} does not match {} probabilities",
                raw.dim,
                raw.probs.len()
            )));
        }
        if raw.normalized {
            FockDistribution::new(raw.probs)
        } else {
            FockDistribution::unnormalized(raw.probs)
        }
    }
}

impl From<FockDistribution> for FockDistributionJson {
    fn from(d: FockDistribution) -> Self {
        FockDistributionJson {
            dim: d.probs.len(),
            probs: d.probs,
            normalized: d.normalized,
        }
    }
}

impl FockDistribution {
    /// Normalized distribution, validated against the default tolerances.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(probs, &Tolerances::default())
    }

    pub fn with_tolerances(probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        check_entries(&probs, tol.pos)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol.norm {
            return Err(Error::InvalidState(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(FockDistribution {
            probs,
            normalized: true,
        })
    }

    /// Distribution without a unit-trace requirement.
    pub fn unnormalized(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs, Tolerances::default().pos)?;
        Ok(FockDistribution {
            probs,
            normalized: false,
        })
    }

    /// The Fock state `|n⟩⟨n|` embedded in dimension `dim`.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter(format!(
                "photon number {n} outside dimension {dim}"
            )));
        }
        let mut probs = vec![0.0; dim];
        probs[n] = 1.0;
        Ok(FockDistribution {
            probs,
            normalized: true,
        })
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::fock(0, dim.max(1)).expect("vacuum fits in any dimension")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Population of `|n⟩`; zero beyond the truncation.
    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Copy of the probabilities zero-padded (never truncated) to at least `dim` entries.
    pub fn padded(&self, dim: usize) -> Vec<f64> {
        let mut v = self.probs.clone();
        if v.len() < dim {
            v.resize(dim, 0.0);
        }
        v
    }
}

fn check_entries(probs: &[f64], pos_tol: f64) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidState("empty distribution".into()));
    }
    for (n, &p) in probs.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidState(format!("entry {n} is not finite")));
        }
        if p < -pos_tol {
            return Err(Error::InvalidState(format!("entry {n} is negative: {p}")));
        }
    }
    Ok(())
}

/// `Tr(P_n ρ)`: sum of the populations of `|0⟩ … |n⟩`.
pub fn partial_sum(dist: &FockDistribution, n: usize) -> f64 {
    let end = (n + 1).min(dist.dim());
    dist.probs[..end].iter().sum()
}

/// True iff populations are non-increasing in photon number, up to `tol`.
pub fn is_passive(dist: &FockDistribution, tol: f64) -> bool {
    dist.probs.windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Writes a passive distribution as a non-negative combination of normalized
/// projectors `P_K / (K + 1)`.
///
/// Returns `(K, c_K)` pairs with `c_K = (K + 1)(λ_K − λ_{K+1})` and `λ_d = 0`.
/// Zero weights are omitted. The weights sum to the total mass of `dist`.
pub fn passive_decompose(dist: &FockDistribution) -> Result<Vec<(usize, f64)>> {
    let tol = Tolerances::default().pos;
    if let Some(index) = dist.probs.windows(2).position(|w| w[1] > w[0] + tol) {
        return Err(Error::NotPassive {
            index: index + 1,
            prev: dist.probs[index],
            next: dist.probs[index + 1],
        });
    }
    let d = dist.dim();
    let weights = (0..d)
        .filter_map(|k| {
            let next = if k + 1 < d { dist.probs[k + 1] } else { 0.0 };
            let c = ((k + 1) as f64 * (dist.probs[k] - next)).max(0.0);
            (c > 0.0).then_some((k, c))
        })
        .collect();
    Ok(weights)
}

/// Mean photon number `Σ_n n p_n`.
pub fn mean_energy(dist: &FockDistribution) -> f64 {
    dist.probs
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

/// Projector `P_n` onto the first `n + 1` Fock states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Projector {
    pub cutoff: usize,
}

impl Projector {
    pub fn new(cutoff: usize) -> Self {
        Projector { cutoff }
    }

    pub fn rank(&self) -> usize {
        self.cutoff + 1
    }

    /// `Tr(P_n ρ)` for a Fock-diagonal state.
    pub fn expectation(&self, dist: &FockDistribution) -> f64 {
        partial_sum(dist, self.cutoff)
    }

    pub fn expectation_matrix(&self, rho: &DensityMatrix) -> f64 {
        let end = self.rank().min(rho.dim());
        (0..end).map(|i| rho.elements[(i, i)].re).sum()
    }
}

/// Truncated density matrix in the Fock basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    elements: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: DensityMatrixJson) -> Result<Self> {
        let d = raw.dim;
        let shape_ok = raw.re.len() == d
            && raw.im.len() == d
            && raw.re.iter().chain(raw.im.iter()).all(|row| row.len() == d);
        if !shape_ok {
            return Err(Error::InvalidState(format!(
                "re/im must both be {d}x{d} row-major arrays"
            )));
        }
        let elements = DMatrix::from_fn(d, d, |i, j| Complex64::new(raw.re[i][j], raw.im[i][j]));
        DensityMatrix::new(elements)
    }
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(rho: DensityMatrix) -> Self {
        let d = rho.dim();
        let re = (0..d)
            .map(|i| (0..d).map(|j| rho.elements[(i, j)].re).collect())
            .collect();
        let im = (0..d)
            .map(|i| (0..d).map(|j| rho.elements[(i, j)].im).collect())
            .collect();
        DensityMatrixJson { dim: d, re, im }
    }
}

impl DensityMatrix {
    pub fn new(elements: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerances(elements, &Tolerances::default())
    }

    pub fn with_tolerances(elements: DMatrix<Complex64>, tol: &Tolerances) -> Result<Self> {
        if elements.nrows() != elements.ncols() || elements.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        if elements
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite matrix element".into()));
        }
        let rho = DensityMatrix { elements };
        let herm = rho.hermiticity_defect();
        if herm > tol.herm {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > tol.norm {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -tol.pos {
            return Err(Error::InvalidState(format!(
                "not positive semi-definite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(rho)
    }

    /// Wraps a matrix produced by a channel without re-validating it.
    pub(crate) fn from_matrix_unchecked(elements: DMatrix<Complex64>) -> Self {
        DensityMatrix { elements }
    }

    /// Fock-diagonal state with the given populations.
    pub fn from_distribution(dist: &FockDistribution) -> Result<Self> {
        let d = dist.dim();
        let elements = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(dist.probs[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(elements)
    }

    /// Pure state `|ψ⟩⟨ψ|`; the amplitudes are normalized here.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState(
                "pure state needs a non-zero vector".into(),
            ));
        }
        let d = amplitudes.len();
        let psi: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        Self::new(DMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    /// `⟨i|ρ|j⟩`, zero outside the truncation.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i < self.dim() && j < self.dim() {
            self.elements[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.elements[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.elements[(i, i)].re).collect()
    }

    /// Populations as an unnormalized distribution (channel outputs may carry a tail).
    pub fn populations(&self) -> Result<FockDistribution> {
        FockDistribution::unnormalized(self.diagonal())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let diff = self.elements[(i, j)] - self.elements[(j, i)].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Hermitian part only; the anti-Hermitian residue is bounded by the validation above.
        let h = (&self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// A passive environment state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    /// Thermal state with mean photon number `n̄`; populations `(1−q) q^k`, `q = n̄/(1+n̄)`.
    Thermal { mean_photons: f64 },
    /// Projector onto `|0⟩ … |K⟩`, either as the normalized state `P_K/(K+1)` or raw.
    Projector { cutoff: usize, normalized: bool },
    /// Any non-increasing population vector.
    Explicit { dist: FockDistribution },
}

/// Environment populations actually used by a channel.
///
/// `weights.iter().sum() + tail_mass == trace`, where `trace` is 1 for states and
/// `K + 1` for a raw projector.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedEnvironment {
    pub weights: Vec<f64>,
    pub tail_mass: f64,
    pub trace: f64,
}

impl RealizedEnvironment {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Default target for the thermal-environment tail.
pub const ENV_TAIL_TOL: f64 = 1e-12;

impl EnvironmentSpec {
    pub fn vacuum() -> Self {
        EnvironmentSpec::Thermal { mean_photons: 0.0 }
    }

    pub fn thermal(mean_photons: f64) -> Result<Self> {
        let env = EnvironmentSpec::Thermal { mean_photons };
        env.validate()?;
        Ok(env)
    }

    pub fn projector(cutoff: usize) -> Self {
        EnvironmentSpec::Projector {
            cutoff,
            normalized: true,
        }
    }

    pub fn projector_unnormalized(cutoff: usize) -> Self {
        EnvironmentSpec::Projector {
            cutoff,
            normalized: false,
        }
    }

    pub fn explicit(dist: FockDistribution) -> Result<Self> {
        let env = EnvironmentSpec::Explicit { dist };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentSpec::Thermal { mean_photons } => {
                if !(mean_photons.is_finite() && *mean_photons >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "thermal mean photon number must be finite and >= 0, got {mean_photons}"
                    )));
                }
            }
            EnvironmentSpec::Projector { .. } => {}
            EnvironmentSpec::Explicit { dist } => {
                passive_decompose(dist)?;
            }
        }
        Ok(())
    }

    /// Whether the environment is a unit-trace state.
    pub fn is_normalized(&self) -> bool {
        match self {
            EnvironmentSpec::Thermal { .. } => true,
            EnvironmentSpec::Projector { normalized, .. } => *normalized,
            EnvironmentSpec::Explicit { dist } => dist.is_normalized(),
        }
    }

    /// Populations with a thermal tail below `tail_tol`.
    pub fn realize(&self, tail_tol: f64) -> Result<RealizedEnvironment> {
        self.validate()?;
        match self {
            EnvironmentSpec::Thermal { mean_photons } => {
                let q = mean_photons / (1.0 + mean_photons);
                if q == 0.0 {
                    return Ok(RealizedEnvironment {
                        weights: vec![1.0],
                        tail_mass: 0.0,
                        trace: 1.0,
                    });
                }
                if !(tail_tol > 0.0 && tail_tol < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "tail tolerance must lie in (0, 1), got {tail_tol}"
                    )));
                }
                let dim = (tail_tol.ln() / q.ln()).floor() as usize + 1;
                self.realize_with_dim(dim)
            }
            _ => self.realize_with_dim(0),
        }
    }

    /// Populations truncated to `dim` levels (thermal only; other kinds keep their support).
    pub fn realize_with_dim(&self, dim: usize) -> Result<RealizedEnvironment> {
        self.validate()?;
        let realized = match self {
            EnvironmentSpec::Thermal { mean_photons } => {
                let dim = dim.max(1);
                let q = mean_photons / (1.0 + mean_photons);
                let weights: Vec<f64> = (0..dim).map(|k| (1.0 - q) * q.powi(k as i32)).collect();
                RealizedEnvironment {
                    weights,
                    tail_mass: q.powi(dim as i32),
                    trace: 1.0,
                }
            }
            EnvironmentSpec::Projector { cutoff, normalized } => {
                let rank = cutoff + 1;
                let w = if *normalized { 1.0 / rank as f64 } else { 1.0 };
                RealizedEnvironment {
                    weights: vec![w; rank],
                    tail_mass: 0.0,
                    trace: if *normalized { 1.0 } else { rank as f64 },
                }
            }
            EnvironmentSpec::Explicit { dist } => RealizedEnvironment {
                weights: dist.probs().to_vec(),
                tail_mass: 0.0,
                trace: dist.total_mass(),
            },
        };
        Ok(realized)
    }

    /// Transpose of the environment state in the Fock basis. Passive environments are
    /// diagonal, so this is the identity.
    pub fn transpose(&self) -> Self {
        self.clone()
    }
}

impl fmt::Display for EnvironmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvironmentSpec::Thermal { mean_photons } => write!(f, "thermal:{mean_photons}"),
            EnvironmentSpec::Projector {
                cutoff,
                normalized: true,
            } => write!(f, "projector:{cutoff}"),
            EnvironmentSpec::Projector {
                cutoff,
                normalized: false,
            } => write!(f, "projector-raw:{cutoff}"),
            EnvironmentSpec::Explicit { dist } => write!(f, "explicit(dim={})", dist.dim()),
        }
    }
}

impl FromStr for EnvironmentSpec {
    type Err = Error;

    /// Parses `vacuum`, `thermal:<n̄>`, `projector:<K>` (normalized) and
    /// `projector-raw:<K>`. File-backed environments are resolved by the CLI.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised environment '{s}'"));
        if s == "vacuum" {
            return Ok(EnvironmentSpec::vacuum());
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "thermal" => EnvironmentSpec::thermal(arg.parse().map_err(|_| bad())?),
            "projector" => Ok(EnvironmentSpec::projector(arg.parse().map_err(|_| bad())?)),
            "projector-raw" => Ok(EnvironmentSpec::projector_unnormalized(
                arg.parse().map_err(|_| bad())?,
            )),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dist(p: &[f64]) -> FockDistribution {
        FockDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn partial_sums() {
        assert_eq!(partial_sum(&dist(&[1.0, 0.0, 0.0]), 0), 1.0);
        assert_abs_diff_eq!(
            partial_sum(&dist(&[0.7, 0.2, 0.1]), 1),
            0.9,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            partial_sum(&dist(&[0.5, 0.3, 0.2]), 5),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn passivity() {
        assert!(is_passive(&dist(&[0.5, 0.3, 0.2]), 1e-10));
        assert!(!is_passive(&dist(&[0.3, 0.5, 0.2]), 1e-10));
        let third = 1.0 / 3.0;
        assert!(is_passive(&dist(&[third, third, third]), 1e-10));
    }

    #[test]
    fn decomposition_examples() {
        let w = passive_decompose(&dist(&[0.5, 0.3, 0.2])).unwrap();
        let expected = [(0, 0.2), (1, 0.2), (2, 0.6)];
        assert_eq!(w.len(), 3);
        for ((k, c), (ek, ec)) in w.iter().zip(expected) {
            assert_eq!(*k, ek);
            assert_abs_diff_eq!(*c, ec, epsilon = 1e-12);
        }
        assert_eq!(
            passive_decompose(&dist(&[1.0, 0.0, 0.0])).unwrap(),
            vec![(0, 1.0)]
        );
        let third = 1.0 / 3.0;
        let w = passive_decompose(&dist(&[third, third, third])).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].0, 2);
        assert_abs_diff_eq!(w[0].1, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decomposition_rejects_non_passive() {
        let err = passive_decompose(&dist(&[0.3, 0.5, 0.2])).unwrap_err();
        assert!(matches!(err, Error::NotPassive { index: 1, .. }));
    }

    #[test]
    fn energies() {
        assert_eq!(mean_energy(&dist(&[1.0, 0.0, 0.0])), 0.0);
        assert_abs_diff_eq!(mean_energy(&dist(&[0.5, 0.3, 0.2])), 0.7, epsilon = 1e-15);
        assert_eq!(mean_energy(&dist(&[0.0, 1.0])), 1.0);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(FockDistribution::new(vec![]).is_err());
        assert!(FockDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(FockDistribution::new(vec![1.1, -0.1]).is_err());
        assert!(FockDistribution::unnormalized(vec![1.5, 0.5]).is_ok());
        assert!(FockDistribution::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn thermal_tail_is_geometric() {
        for nbar in [0.1, 0.5, 1.0, 3.0] {
            let env = EnvironmentSpec::thermal(nbar).unwrap();
            let r = env.realize(1e-12).unwrap();
            let q: f64 = nbar / (1.0 + nbar);
            assert!(r.tail_mass < 1e-12);
            assert!(r.weights.windows(2).all(|w| w[1] <= w[0]));
            let head: f64 = r.weights.iter().sum();
            assert_abs_diff_eq!(1.0 - head, r.tail_mass, epsilon = 1e-12);
            assert_abs_diff_eq!(r.tail_mass, q.powi(r.dim() as i32), epsilon = 1e-15);
        }
        let vac = EnvironmentSpec::vacuum().realize(1e-12).unwrap();
        assert_eq!(vac.weights, vec![1.0]);
        assert_eq!(vac.tail_mass, 0.0);
    }

    #[test]
    fn projector_environment_traces() {
        let raw = EnvironmentSpec::projector_unnormalized(2)
            .realize(1e-12)
            .unwrap();
        assert_eq!(raw.weights, vec![1.0; 3]);
        assert_eq!(raw.trace, 3.0);
        let norm = EnvironmentSpec::projector(2).realize(1e-12).unwrap();
        assert_abs_diff_eq!(norm.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn explicit_environment_must_be_passive() {
        assert!(EnvironmentSpec::explicit(dist(&[0.2, 0.8])).is_err());
        assert!(EnvironmentSpec::explicit(dist(&[0.8, 0.2])).is_ok());
    }

    #[test]
    fn environment_parsing() {
        assert_eq!(
            "thermal:0.5".parse::<EnvironmentSpec>().unwrap(),
            EnvironmentSpec::Thermal { mean_photons: 0.5 }
        );
        assert_eq!(
            "projector:3".parse::<EnvironmentSpec>().unwrap(),
            EnvironmentSpec::projector(3)
        );
        assert_eq!(
            "projector-raw:1".parse::<EnvironmentSpec>().unwrap(),
            EnvironmentSpec::projector_unnormalized(1)
        );
        assert!("thermal:-1".parse::<EnvironmentSpec>().is_err());
        assert!("squeezed:1".parse::<EnvironmentSpec>().is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let plus =
            DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(plus.trace(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(plus.get(0, 1).re, 0.5, epsilon = 1e-15);

        let not_psd = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.9, 0.0),
                Complex64::new(0.9, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(DensityMatrix::new(not_psd).is_err());

        let not_herm = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.1, 0.1),
                Complex64::new(0.1, 0.1),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(DensityMatrix::new(not_herm).is_err());
    }

    #[test]
    fn json_schema() {
        let d = dist(&[0.5, 0.5]);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"dim":2,"probs":[0.5,0.5]}"#);
        let back: FockDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(
            serde_json::from_str::<FockDistribution>(r#"{"dim":3,"probs":[0.5,0.5]}"#).is_err()
        );

        let raw = FockDistribution::unnormalized(vec![1.5, 0.5]).unwrap();
        let s = serde_json::to_string(&raw).unwrap();
        assert!(s.contains(r#""normalized":false"#));
        assert_eq!(serde_json::from_str::<FockDistribution>(&s).unwrap(), raw);

        let rho =
            DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let s = serde_json::to_string(&rho).unwrap();
        assert!(s.starts_with(r#"{"dim":2,"re":"#));
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rho);
    }
}
