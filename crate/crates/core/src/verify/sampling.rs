//! Seeded random states and maps for the sampling suites.
//!
//! Every sample draws from its own ChaCha stream, so results do not depend on how
//! samples are scheduled across threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::Result;
use crate::fock::DensityMatrix;
use crate::majorization::TransferMatrix;

/// The generator for sample `index` of stream family `stream` under `seed`.
pub fn sample_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

fn exp_variates<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| Exp1.sample(rng)).collect()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    v
}

/// A probability vector of length `dim`, uniform on the simplex, with a random
/// subset of entries zeroed (at least one survives).
pub fn random_distribution<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let mut v = exp_variates(rng, dim);
    if dim > 1 && rng.random_bool(0.5) {
        let keep = rng.random_range(0..dim);
        for (i, x) in v.iter_mut().enumerate() {
            if i != keep && rng.random_bool(0.3) {
                *x = 0.0;
            }
        }
    }
    normalize(v)
}

/// Exponential variates sorted in non-increasing order and normalized.
pub fn random_passive<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let mut v = exp_variates(rng, dim);
    v.sort_by(|a, b| b.total_cmp(a));
    normalize(v)
}

/// A random lower-triangular column-stochastic matrix. Each column spreads its mass
/// over the diagonal and the rows below it, with random sparsity.
pub fn random_transfer_matrix<R: Rng>(rng: &mut R, dim: usize) -> Result<TransferMatrix> {
    let mut l = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..dim {
        let mut col: Vec<f64> = (j..dim)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    Exp1.sample(rng)
                }
            })
            .collect();
        if rng.random_bool(0.5) {
            col[0] += 2.0 * <Exp1 as Distribution<f64>>::sample(&Exp1, rng);
        }
        if col.iter().all(|&x| x == 0.0) {
            col[0] = 1.0;
        }
        let col = normalize(col);
        for (offset, x) in col.into_iter().enumerate() {
            l[(j + offset, j)] = x;
        }
    }
    TransferMatrix::new(l)
}

/// Applies `steps` random partial levellings to a passive vector: a random window is
/// pulled towards its mean. Each step is doubly stochastic and keeps the order, so the
/// result is passive and majorized by the input.
pub fn random_levelling<R: Rng>(rng: &mut R, r: &[f64], steps: usize) -> Vec<f64> {
    let mut s = r.to_vec();
    let d = s.len();
    if d < 2 {
        return s;
    }
    for _ in 0..steps {
        let a = rng.random_range(0..d - 1);
        let b = rng.random_range(a + 1..d);
        let t: f64 = rng.random();
        let mean = s[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
        for x in &mut s[a..=b] {
            *x = t * *x + (1.0 - t) * mean;
        }
    }
    s
}

/// A doubly stochastic image of `r`: a random convex combination of permutations.
pub fn random_doubly_stochastic_image<R: Rng>(rng: &mut R, r: &[f64], terms: usize) -> Vec<f64> {
    let d = r.len();
    let weights = normalize(exp_variates(rng, terms.max(1)));
    let mut s = vec![0.0; d];
    for w in weights {
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        for (i, &p) in perm.iter().enumerate() {
            s[i] += w * r[p];
        }
    }
    s
}

/// A random density matrix `G G† / Tr(G G†)` with complex Gaussian `G` of random rank.
pub fn random_density_matrix<R: Rng>(rng: &mut R, dim: usize) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=dim);
    let g = DMatrix::<Complex64>::from_fn(dim, rank, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let m = &g * g.adjoint();
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    DensityMatrix::new(m / Complex64::new(tr, 0.0))
}

/// Conjugates by a random diagonal unitary: populations stay, coherence phases are scrambled.
pub fn randomize_phases<R: Rng>(rng: &mut R, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = rho.dim();
    let phases: Vec<Complex64> = (0..d)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let m = DMatrix::from_fn(d, d, |i, j| phases[i] * rho.get(i, j) * phases[j].conj());
    DensityMatrix::new(m)
}
