//! Beam-splitter Fock amplitudes and transition-probability tables.
//!
//! The beam splitter `U = exp[θ(a_S† a_E − a_S a_E†)]`, `cos θ = √η`, conserves the total
//! photon number `N`, so it is block diagonal and each `(N+1) × (N+1)` block can be
//! exponentiated exactly. In the Heisenberg picture `U† a_S U = √η a_S + √(1−η) a_E`,
//! and all amplitudes are real in this phase convention.
//!
//! `B^{(i,k)}_m` is the probability that `|i⟩_S |k⟩_E` leaves `m` photons in the system.
//! [`b_table_recurrence`] computes it from the five-term recurrence seeded by
//! `B^{(0,0)}_0 = 1`; [`b_table_oracle`] squares the exact block amplitudes instead.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "transmittance must lie in (0, 1], got {eta}"
        )))
    }
}

/// Matrix of `a_S† a_E − a_S a_E†` on the block spanned by `|n, N−n⟩`, `n = 0 … N`.
pub fn bs_generator_block(total: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(total + 1, total + 1);
    for n in 0..total {
        let v = (((n + 1) * (total - n)) as f64).sqrt();
        a[(n + 1, n)] = v;
        a[(n, n + 1)] = -v;
    }
    a
}

/// Beam-splitter unitary restricted to total photon number `N`.
///
/// Entry `(n, i)` is `ξ_n^{(i, N−i)} = ⟨n, N−n| U |i, N−i⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeBlock {
    total: usize,
    eta: f64,
    entries: DMatrix<Complex64>,
}

impl AmplitudeBlock {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `ξ_n^{(i, N−i)}`; zero when either index leaves the block.
    pub fn xi(&self, n: usize, i: usize) -> Complex64 {
        if n <= self.total && i <= self.total {
            self.entries[(n, i)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `max |U†U − 1|` over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.total + 1;
        let gram = self.entries.adjoint() * &self.entries;
        (gram - DMatrix::<Complex64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn bs_amplitude_block(total: usize, eta: f64) -> Result<AmplitudeBlock> {
    check_eta(eta)?;
    let theta = eta.sqrt().acos();
    let u = (bs_generator_block(total) * theta).exp();
    Ok(AmplitudeBlock {
        total,
        eta,
        entries: u.map(|x| Complex64::new(x, 0.0)),
    })
}

/// `B^{(i,k)}_m` for `i ≤ max_i`, `k ≤ max_k`, `m ≤ i + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    eta: f64,
    max_i: usize,
    max_k: usize,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl CoefficientTable {
    fn zeroed(eta: f64, max_i: usize, max_k: usize) -> Self {
        let mut offsets = Vec::with_capacity((max_i + 1) * (max_k + 1));
        let mut len = 0;
        for i in 0..=max_i {
            for k in 0..=max_k {
                offsets.push(len);
                len += i + k + 1;
            }
        }
        CoefficientTable {
            eta,
            max_i,
            max_k,
            offsets,
            values: vec![0.0; len],
        }
    }

    fn slot(&self, i: usize, k: usize) -> usize {
        assert!(
            i <= self.max_i && k <= self.max_k,
            "({i},{k}) outside table extents ({},{})",
            self.max_i,
            self.max_k
        );
        i * (self.max_k + 1) + k
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn max_i(&self) -> usize {
        self.max_i
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn covers(&self, max_i: usize, max_k: usize) -> bool {
        max_i <= self.max_i && max_k <= self.max_k
    }

    /// `B^{(i,k)}_0 … B^{(i,k)}_{i+k}`.
    pub fn row(&self, i: usize, k: usize) -> &[f64] {
        let start = self.offsets[self.slot(i, k)];
        &self.values[start..start + i + k + 1]
    }

    fn row_mut(&mut self, i: usize, k: usize) -> &mut [f64] {
        let start = self.offsets[self.slot(i, k)];
        &mut self.values[start..start + i + k + 1]
    }

    /// `B^{(i,k)}_m`, zero for `m > i + k`. Panics outside the table extents.
    pub fn get(&self, i: usize, k: usize, m: usize) -> f64 {
        self.row(i, k).get(m).copied().unwrap_or(0.0)
    }

    /// Like [`get`](Self::get) but zero for any negative index.
    pub fn get_signed(&self, i: isize, k: isize, m: isize) -> f64 {
        if i < 0 || k < 0 || m < 0 {
            0.0
        } else {
            self.get(i as usize, k as usize, m as usize)
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |Σ_m B^{(i,k)}_m − 1|`.
    pub fn max_row_sum_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=self.max_i {
            for k in 0..=self.max_k {
                let s: f64 = self.row(i, k).iter().sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }

    /// Largest elementwise difference to another table over the common extents.
    pub fn max_abs_diff(&self, other: &CoefficientTable) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=self.max_i.min(other.max_i) {
            for k in 0..=self.max_k.min(other.max_k) {
                for (a, b) in self.row(i, k).iter().zip(other.row(i, k)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }
}

/// Fills the table from the five-term recurrence in order of increasing `i + k`.
/// Terms with a negative index are dropped.
pub fn b_table_recurrence(eta: f64, max_i: usize, max_k: usize) -> Result<CoefficientTable> {
    check_eta(eta)?;
    let mut t = CoefficientTable::zeroed(eta, max_i, max_k);
    t.row_mut(0, 0)[0] = 1.0;
    let mu = 1.0 - eta;
    for total in 1..=max_i + max_k {
        for i in total.saturating_sub(max_k)..=total.min(max_i) {
            let k = total - i;
            let mut row = vec![0.0; total + 1];
            for (m, out) in row.iter_mut().enumerate() {
                let (i, k, m) = (i as isize, k as isize, m as isize);
                *out = eta * t.get_signed(i - 1, k, m - 1)
                    + mu * t.get_signed(i - 1, k, m)
                    + eta * t.get_signed(i, k - 1, m)
                    + mu * t.get_signed(i, k - 1, m - 1)
                    - t.get_signed(i - 1, k - 1, m - 1);
            }
            t.row_mut(i, k).copy_from_slice(&row);
        }
    }
    Ok(t)
}

/// Same table from `|ξ_m^{(i,k)}|²` of the exact block unitaries.
pub fn b_table_oracle(eta: f64, max_i: usize, max_k: usize) -> Result<CoefficientTable> {
    check_eta(eta)?;
    let mut t = CoefficientTable::zeroed(eta, max_i, max_k);
    for total in 0..=max_i + max_k {
        let block = bs_amplitude_block(total, eta)?;
        for i in total.saturating_sub(max_k)..=total.min(max_i) {
            let k = total - i;
            for (m, out) in t.row_mut(i, k).iter_mut().enumerate() {
                *out = block.xi(m, i).norm_sqr();
            }
        }
    }
    Ok(t)
}

/// `⟨m, k| U^TMS_λ |i, e⟩`, obtained from the beam splitter at `η = 1 − λ` by
/// exchanging the second-mode bra and ket: `√η ⟨m, e| U^BS_η |i, k⟩`.
///
/// Zero unless `m − k = i − e`.
pub fn tms_amplitude(m: usize, k: usize, i: usize, e: usize, lambda: f64) -> Result<Complex64> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "squeezing parameter must lie in (0, 1), got {lambda}"
        )));
    }
    tms_amplitude_unchecked(AmplitudeCache::global(), m, k, i, e, 1.0 - lambda)
}

pub(crate) fn tms_amplitude_unchecked(
    cache: &AmplitudeCache,
    m: usize,
    k: usize,
    i: usize,
    e: usize,
    eta: f64,
) -> Result<Complex64> {
    if m + e != i + k {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let block = cache.block(i + k, eta)?;
    Ok(block.xi(m, i) * eta.sqrt())
}

/// Shared, immutable-once-built tables and blocks keyed by transmittance.
///
/// Readers take a shared lock; a missing entry is built outside the lock and inserted
/// under the write lock. A table request is served by any cached table for the same
/// `η` with at least the requested extents.
#[derive(Debug, Default)]
pub struct AmplitudeCache {
    tables: RwLock<HashMap<u64, Arc<CoefficientTable>>>,
    blocks: RwLock<HashMap<(u64, usize), Arc<AmplitudeBlock>>>,
}

impl AmplitudeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static AmplitudeCache {
        static CACHE: OnceLock<AmplitudeCache> = OnceLock::new();
        CACHE.get_or_init(AmplitudeCache::new)
    }

    pub fn table(&self, eta: f64, max_i: usize, max_k: usize) -> Result<Arc<CoefficientTable>> {
        check_eta(eta)?;
        let key = eta.to_bits();
        let existing = {
            let tables = self.tables.read().expect("table cache poisoned");
            match tables.get(&key) {
                Some(t) if t.covers(max_i, max_k) => return Ok(Arc::clone(t)),
                Some(t) => Some((t.max_i(), t.max_k())),
                None => None,
            }
        };
        let (max_i, max_k) = match existing {
            Some((ei, ek)) => (max_i.max(ei), max_k.max(ek)),
            None => (max_i, max_k),
        };
        let built = Arc::new(b_table_recurrence(eta, max_i, max_k)?);
        let mut tables = self.tables.write().expect("table cache poisoned");
        let entry = tables.entry(key).or_insert_with(|| Arc::clone(&built));
        if !entry.covers(max_i, max_k) {
            *entry = Arc::clone(&built);
        }
        Ok(Arc::clone(entry))
    }

    pub fn block(&self, total: usize, eta: f64) -> Result<Arc<AmplitudeBlock>> {
        check_eta(eta)?;
        let key = (eta.to_bits(), total);
        if let Some(b) = self.blocks.read().expect("block cache poisoned").get(&key) {
            return Ok(Arc::clone(b));
        }
        let built = Arc::new(bs_amplitude_block(total, eta)?);
        let mut blocks = self.blocks.write().expect("block cache poisoned");
        Ok(Arc::clone(blocks.entry(key).or_insert(built)))
    }
}
