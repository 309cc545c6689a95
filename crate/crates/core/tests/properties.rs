use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use retroalign::channel::{generate_channel, scalar, MagnitudeBounds, Signal, SignalBasis};
use retroalign::eval::{check_future_independence, run_trial, SchemeId, TrialConfig, NoiseConfig};
use retroalign::numerics::{
    left_null_basis, null_vector, numerical_rank, sample_complex_gaussian, solve_square, CMatrix, Tolerance,
};
use retroalign::retro_csit_ic3::{self as ic3, AlphaVectors};
use retroalign::retro_csit_x::{self as xch, XPhase1Precoders};

fn matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    CMatrix::from_vec(rows, cols, sample_complex_gaussian(&mut ChaCha8Rng::seed_from_u64(seed), rows * cols))
}

fn scheme() -> impl Strategy<Value = SchemeId> {
    prop::sample::select(SchemeId::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn null_vector_is_unit_canonical_and_annihilating(seed in any::<u64>(), wide in 1usize..5) {
        let a = matrix(wide + 1, wide + 2, seed);
        let v = null_vector(&a, &Tolerance::default()).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        prop_assert!((&a * &v).norm() <= 1e-10 * a.norm());
        let lead = v.iter().find(|z| z.norm() > 1e-8).unwrap();
        prop_assert!(lead.im.abs() < 1e-12 && lead.re > 0.0);
    }

    #[test]
    fn null_vector_ignores_row_scaling(seed in any::<u64>(), k in 0.1f64..10.0, phase in 0.0f64..6.28) {
        let a = matrix(3, 4, seed);
        let b = &a * Complex64::from_polar(k, phase);
        let tol = Tolerance::default();
        let (u, w) = (null_vector(&a, &tol).unwrap(), null_vector(&b, &tol).unwrap());
        prop_assert!((u - w).norm() < 1e-9);
    }

    #[test]
    fn rank_of_product_is_inner_dimension(seed in any::<u64>(), r in 1usize..6) {
        let a = matrix(8, r, seed) * matrix(r, 6, seed.wrapping_add(1));
        prop_assert_eq!(numerical_rank(&a, &Tolerance::default()), r.min(6));
    }

    #[test]
    fn left_null_basis_is_orthonormal_complement(seed in any::<u64>(), r in 1usize..6) {
        let a = matrix(8, r, seed) * matrix(r, 6, seed.wrapping_add(1));
        let n = left_null_basis(&a, &Tolerance::default()).unwrap();
        prop_assert_eq!(n.ncols(), 8 - r);
        prop_assert!((n.adjoint() * &n - CMatrix::identity(8 - r, 8 - r)).norm() < 1e-10);
        prop_assert!((n.adjoint() * &a).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn solve_round_trips(seed in any::<u64>(), n in 1usize..9) {
        let a = matrix(n, n, seed);
        let x = matrix(n, 2, seed ^ 1);
        let b = &a * &x;
        match solve_square(&a, &b, &Tolerance::default()) {
            Ok(y) => prop_assert!((&y - &x).norm() <= 1e-8 * x.norm()),
            // Ill-conditioned draws are refused rather than answered.
            Err(e) => {
                let singular = matches!(e, retroalign::numerics::NumericsError::Singular { .. });
                prop_assert!(singular, "unexpected error {}", e);
            }
        }
    }

    #[test]
    fn channel_draws_respect_bounds(seed in any::<u64>()) {
        let b = MagnitudeBounds::default();
        let h = generate_channel(3, 3, 8, &mut ChaCha8Rng::seed_from_u64(seed), b).unwrap();
        prop_assert!(h.iter().all(|z| b.contains(z)));
    }

    #[test]
    fn x_constants_annihilate_both_receivers(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = XPhase1Precoders::draw(&mut rng);
        let h = generate_channel(2, 2, 3, &mut rng, MagnitudeBounds::default()).unwrap();
        let c = xch::compute_alignment_constants(&h, &pre, &Tolerance::default()).unwrap();
        for rx in 0..2 {
            let a = xch::interference_matrix(rx, &h, &pre);
            let v = DVector::from_row_slice(&c.alignment_vector(1 - rx));
            prop_assert!((&a * &v).norm() <= 1e-8 * a.norm() * v.norm());
        }
    }

    #[test]
    fn ic3_coefficients_satisfy_both_constraints(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = ic3::ICPhase1Precoders::draw(&mut rng);
        let h = generate_channel(3, 3, 5, &mut rng, MagnitudeBounds::default()).unwrap();
        let tol = Tolerance::default();
        let alpha: AlphaVectors = ic3::compute_alpha_vectors(&h, &pre, &tol).unwrap();
        for k in 0..3 {
            let c = ic3::phase2_coefficients(k, &alpha, &tol).unwrap();
            for sub in alpha.constraints(k) {
                let dot: Complex64 = (0..3).map(|i| c[i] * sub[i]).sum();
                prop_assert!(dot.norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn ic3_effective_symbol_is_linear(seed in any::<u64>(), k in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = ic3::ICPhase1Precoders::draw(&mut rng);
        let h = generate_channel(3, 3, 5, &mut rng, MagnitudeBounds::default()).unwrap();
        let tol = Tolerance::default();
        let alpha = ic3::compute_alpha_vectors(&h, &pre, &tol).unwrap();
        let a: Vec<Signal> = sample_complex_gaussian(&mut rng, 9).into_iter().map(scalar).collect();
        let b: Vec<Signal> = sample_complex_gaussian(&mut rng, 9).into_iter().map(scalar).collect();
        let sum: Vec<Signal> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let s = |v: &[Signal]| ic3::effective_symbol(k, &ic3::ICMessageSet::from_signals(v), &alpha, &tol).unwrap().1[0];
        prop_assert!((s(&sum) - s(&a) - s(&b)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_scheme_decodes_noiselessly(id in scheme(), seed in any::<u64>(), trial in 0usize..1000) {
        let r = run_trial(id, trial, seed, &TrialConfig::default()).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
        prop_assert!(r.max_rel_symbol_error <= 1e-6);
    }

    #[test]
    fn transfer_rows_leak_nothing(id in scheme(), seed in any::<u64>(), db in 20.0f64..70.0) {
        let cfg = TrialConfig::default().with_noise(NoiseConfig::SnrDb(db));
        let r = run_trial(id, 0, seed, &cfg).unwrap();
        prop_assert!(r.max_leakage < 1e-12, "{}", r.max_leakage);
        prop_assert!(r.per_symbol_sinr.iter().all(|s| s.is_finite() && *s > 0.0));
    }

    #[test]
    fn past_transmissions_ignore_future_channels(id in scheme(), seed in any::<u64>(), trial in 0usize..100) {
        let rep = check_future_independence(id, trial, seed, &TrialConfig::default()).unwrap();
        prop_assert!(rep.violations.is_empty());
    }

    #[test]
    fn trials_are_reproducible(id in scheme(), seed in any::<u64>(), trial in 0usize..100) {
        let cfg = TrialConfig::default().with_noise(NoiseConfig::SnrDb(40.0));
        prop_assert_eq!(run_trial(id, trial, seed, &cfg).unwrap(), run_trial(id, trial, seed, &cfg).unwrap());
    }

    #[test]
    fn transfer_and_sampled_paths_agree(seed in any::<u64>()) {
        use retroalign::scheme::{RunParams, Scheme};
        use retroalign::retro_csit_x::XRetroCsit;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let off = XRetroCsit::draw_offline(&mut rng);
        let h = generate_channel(2, 2, 7, &mut rng, MagnitudeBounds::default()).unwrap();
        let vals = sample_complex_gaussian(&mut rng, 8);
        let noise = CMatrix::from_vec(2, 7, sample_complex_gaussian(&mut rng, 14));
        let params = RunParams::from_snr_db(30.0, Tolerance::default());

        let tb = SignalBasis::transfer(8, 2, 7);
        let tt = XRetroCsit::encode(&h, &off, &tb.symbols(), &params, &tb).unwrap();
        let td = XRetroCsit::decode(&h, &off, &tt, &params).unwrap();
        let lanes = retroalign::channel::Realization { symbols: vals.clone(), noise: noise.clone() }.lane_values();

        let syms: Vec<Signal> = vals.iter().map(|&v| scalar(v)).collect();
        let st = XRetroCsit::encode(&h, &off, &syms, &params, &SignalBasis::sampled(noise)).unwrap();
        let sd = XRetroCsit::decode(&h, &off, &st, &params).unwrap();
        for (t, s) in td.receivers.iter().zip(&sd.receivers) {
            for row in 0..t.symbols.len() {
                let via_transfer = retroalign::channel::evaluate(&t.estimates.row(row).into_owned(), &lanes);
                prop_assert!((via_transfer - s.estimates[(row, 0)]).norm() < 1e-8 * (1.0 + via_transfer.norm()));
            }
        }
    }
}
