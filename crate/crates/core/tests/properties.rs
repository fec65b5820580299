use proptest::prelude::*;

use fockmaj::majorization::{fock_margin, majorization_margin};
use fockmaj::verify::passivity_margin;
use fockmaj::{
    apply_diag, apply_projector_channel, b_table_oracle, b_table_recurrence, bs_amplitude_block,
    construct_transfer_matrix, equivalence_on_passive, fock_majorizes, mean_energy,
    monotone_functional_gap, passive_decompose, step_function_test, tms_amplitude, ChannelSpec,
    EnvironmentSpec, FockDistribution, MonotoneFunctionFamily, TransferMatrix,
};
use nalgebra::DMatrix;

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn distribution(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..=max_dim)
        .prop_filter("non-zero", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(normalize)
}

fn passive(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    distribution(max_dim).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    })
}

/// A lower-triangular column-stochastic matrix of the given size.
fn transfer(dim: usize) -> impl Strategy<Value = TransferMatrix> {
    prop::collection::vec(0.0f64..1.0, dim * dim).prop_map(move |raw| {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let col: Vec<f64> = (j..dim).map(|i| raw[i * dim + j]).collect();
            let sum: f64 = col.iter().sum();
            for (off, x) in col.iter().enumerate() {
                m[(j + off, j)] = if sum > 0.0 {
                    x / sum
                } else if off == 0 {
                    1.0
                } else {
                    0.0
                };
            }
        }
        TransferMatrix::new(m).unwrap()
    })
}

fn pair_with_transfer(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, TransferMatrix)> {
    (1..=max_dim).prop_flat_map(|d| {
        (
            distribution(d).prop_map(move |mut v| {
                v.resize(d, 0.0);
                v
            }),
            transfer(d),
        )
    })
}

fn dist(v: &[f64]) -> FockDistribution {
    FockDistribution::new(v.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn passive_decomposition_reassembles(p in passive(12)) {
        let d = dist(&p);
        let mut back = vec![0.0; p.len()];
        for (k, w) in passive_decompose(&d).unwrap() {
            for x in back.iter_mut().take(k + 1) {
                *x += w / (k + 1) as f64;
            }
        }
        for (a, b) in back.iter().zip(&p) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn thermal_realization_is_passive_with_exact_tail(nbar in 0.0f64..5.0) {
        let env = EnvironmentSpec::thermal(nbar).unwrap().realize(1e-12).unwrap();
        prop_assert!(env.weights.windows(2).all(|w| w[1] <= w[0]));
        let q = nbar / (1.0 + nbar);
        prop_assert!((env.tail_mass - q.powi(env.dim() as i32)).abs() <= 1e-12);
        prop_assert!(env.tail_mass < 1e-12 || nbar == 0.0);
    }

    #[test]
    fn transfer_images_are_dominated((r, l) in pair_with_transfer(12)) {
        let s = l.apply(&r).unwrap();
        prop_assert!(fock_margin(&r, &s).0 >= -1e-12);
        let (rd, sd) = (dist(&r), dist(&s));
        prop_assert!(mean_energy(&rd) <= mean_energy(&sd) + 1e-10);
        for f in &MonotoneFunctionFamily::standard(r.len()).members {
            prop_assert!(monotone_functional_gap(&rd, &sd, f) >= -1e-10);
        }
    }

    #[test]
    fn construction_reproduces_target((r, l) in pair_with_transfer(12)) {
        let s = l.apply(&r).unwrap();
        let built = construct_transfer_matrix(&dist(&r), &dist(&s)).unwrap();
        let image = built.apply(&r).unwrap();
        for (a, b) in image.iter().zip(&s) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn step_test_matches_predicate(r in distribution(10), s in distribution(10)) {
        let (rd, sd) = (dist(&r), dist(&s));
        prop_assert_eq!(step_function_test(&rd, &sd), fock_majorizes(&rd, &sd, 1e-10));
    }

    #[test]
    fn fock_majorization_is_a_preorder((r, l1) in pair_with_transfer(8), seed in 0usize..1000) {
        let rd = dist(&r);
        prop_assert!(fock_majorizes(&rd, &rd, 0.0));
        let s = l1.apply(&r).unwrap();
        // Reuse the matrix shifted by one column as a second heating step.
        let d = r.len();
        let shift = seed % d;
        let mut m = DMatrix::identity(d, d);
        for j in 0..d {
            for i in 0..d {
                m[(i, j)] = if j >= shift { l1.get(i, j) } else if i == j { 1.0 } else { 0.0 };
            }
        }
        let t = TransferMatrix::new(m).unwrap().apply(&s).unwrap();
        let (sd, td) = (dist(&s), dist(&t));
        prop_assert!(fock_majorizes(&rd, &sd, 1e-12));
        prop_assert!(fock_majorizes(&sd, &td, 1e-12));
        prop_assert!(fock_majorizes(&rd, &td, 1e-12));
    }

    #[test]
    fn relations_agree_on_passive_pairs(r in passive(10), s in passive(10)) {
        let (a, b) = equivalence_on_passive(&dist(&r), &dist(&s), 1e-10).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn amplitude_blocks_are_unitary(total in 0usize..24, eta in 0.01f64..=1.0) {
        prop_assert!(bs_amplitude_block(total, eta).unwrap().unitarity_defect() <= 1e-12);
    }

    #[test]
    fn table_rows_sum_to_one_and_match_oracle(eta in 0.01f64..=1.0, mi in 0usize..8, mk in 0usize..8) {
        let rec = b_table_recurrence(eta, mi, mk).unwrap();
        prop_assert!(rec.max_row_sum_defect() <= 1e-12);
        prop_assert!(rec.max_abs_diff(&b_table_oracle(eta, mi, mk).unwrap()) <= 1e-10);
    }

    #[test]
    fn mode_swap_symmetry(eta in 0.01f64..0.99, i in 0usize..8, k in 0usize..8) {
        let a = b_table_oracle(eta, 8, 8).unwrap();
        let b = b_table_oracle(1.0 - eta, 8, 8).unwrap();
        for m in 0..=i + k {
            prop_assert!((a.get(i, k, m) - b.get(k, i, m)).abs() <= 1e-10);
        }
    }

    #[test]
    fn squeezer_amplitudes_normalize(
        lambda in prop::sample::select(vec![0.05, 0.3, 0.5, 0.7]),
        i in 0usize..4,
        e in 0usize..4,
    ) {
        // A few fixed λ keep the shared amplitude cache small.
        let mut total = 0.0;
        for m in 0..120 {
            if let Some(k) = (m + e).checked_sub(i) {
                total += tms_amplitude(m, k, i, e, lambda).unwrap().norm_sqr();
            }
        }
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn channel_trace_bookkeeping(p in distribution(8), eta in 0.05f64..=1.0, k in 0usize..4, nbar in 0.0f64..2.0) {
        let input = dist(&p);
        for env in [EnvironmentSpec::thermal(nbar).unwrap(), EnvironmentSpec::projector(k), EnvironmentSpec::projector_unnormalized(k)] {
            let out = apply_diag(&ChannelSpec::beam_splitter(eta, env).unwrap(), &input).unwrap();
            prop_assert!((out.dist.total_mass() + out.tail_mass - out.expected_trace).abs() <= 1e-10);
        }
        let raw = apply_projector_channel(eta, k, &input).unwrap();
        prop_assert!((raw.total_mass() - (k + 1) as f64).abs() <= 1e-10);
    }

    #[test]
    fn channels_preserve_order(
        (r, l) in pair_with_transfer(8),
        p in passive(8),
        eta in 0.05f64..=1.0,
        gain in 1.0f64..3.0,
        nbar in 0.0f64..1.5,
    ) {
        let env = EnvironmentSpec::thermal(nbar).unwrap();
        let s = l.apply(&r).unwrap();
        for ch in [
            ChannelSpec::beam_splitter(eta, env.clone()).unwrap(),
            ChannelSpec::two_mode_squeezer(gain, env.clone()).unwrap(),
        ] {
            let or = apply_diag(&ch, &dist(&r)).unwrap();
            let os = apply_diag(&ch, &dist(&s)).unwrap();
            let tails = or.tail_mass + os.tail_mass;
            prop_assert!(fock_margin(or.dist.probs(), os.dist.probs()).0 + tails >= -1e-9);
            let op = apply_diag(&ch, &dist(&p)).unwrap();
            prop_assert!(passivity_margin(op.dist.probs()).0 + op.tail_mass >= -1e-9);
            let mut q = p.clone();
            let mean = q.iter().sum::<f64>() / q.len() as f64;
            q.iter_mut().for_each(|x| *x = 0.5 * *x + 0.5 * mean);
            let oq = apply_diag(&ch, &dist(&q)).unwrap();
            prop_assert!(majorization_margin(op.dist.probs(), oq.dist.probs()).0 + op.tail_mass + oq.tail_mass >= -1e-9);
        }
    }
}
