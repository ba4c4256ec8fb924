//! Property tests over the structural invariants.

use bicmb_core::sim::output::{csv_string, parse_csv};
use bicmb_core::sim::sweep::{SweepResult, SweepRow};
use bicmb_core::sphere::DecodeMode;
use bicmb_core::tx::constellation::PamAlphabet;
use bicmb_core::tx::interleave::InterleaverSpec;
use bicmb_core::{realify, realify_vec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    /// The paired real form preserves residual norms for arbitrary complex
    /// systems and inputs.
    #[test]
    fn realify_preserves_residual_norms(
        p in 1usize..4,
        seed in 0u64..u64::MAX,
    ) {
        let mut rng = rand::SeedableRng::seed_from_u64(seed);
        let rng: &mut rand_chacha::ChaCha8Rng = &mut rng;
        let mut draw = || {
            use rand::Rng;
            Complex64::new(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0)
        };
        let g_tilde = DMatrix::from_fn(p, p, |_, _| draw());
        let x_tilde: Vec<Complex64> = (0..p).map(|_| draw()).collect();
        let r_tilde: Vec<Complex64> = (0..p).map(|_| draw()).collect();

        let gx = &g_tilde * DVector::from_column_slice(&x_tilde);
        let complex_norm: f64 = (0..p).map(|i| (r_tilde[i] - gx[i]).norm_sqr()).sum();

        let g = realify(&g_tilde);
        let x = realify_vec(&x_tilde);
        let r = realify_vec(&r_tilde);
        let gx_real = &g * DVector::from_column_slice(&x);
        let real_norm: f64 = (0..2 * p).map(|i| (r[i] - gx_real[i]).powi(2)).sum();

        prop_assert!((complex_norm - real_norm).abs() <= 1e-12 * complex_norm.max(1.0));
    }

    #[test]
    fn interleaver_roundtrip(
        s in 1usize..5,
        stream_len in 1usize..64,
        seed in 0u64..u64::MAX,
        raw in proptest::collection::vec(0u8..2, 0..320),
    ) {
        let il = InterleaverSpec::new(s, stream_len, seed).unwrap();
        let mut codeword = raw;
        codeword.resize(s * stream_len, 0);
        let streams = il.interleave(&codeword).unwrap();
        prop_assert_eq!(il.deinterleave(&streams).unwrap(), codeword);
    }

    /// The slicer really does return the nearest alphabet element, matching a
    /// linear scan exactly, for the full alphabet and every label subset.
    #[test]
    fn slicer_matches_linear_scan(
        bits in 1usize..4,
        x in -2.0f64..2.0,
        bit_pos_raw in 0usize..8,
        value in 0u8..2,
    ) {
        let pam = PamAlphabet::new(bits).unwrap();
        let j = pam.nearest_index(x);
        for k in 0..pam.len() {
            prop_assert!((x - pam.value(j)).abs() <= (x - pam.value(k)).abs() + 1e-15);
        }
        let bit_pos = bit_pos_raw % bits;
        let c = pam.nearest_in_subset(x, bit_pos, value);
        prop_assert_eq!(pam.label_bit(c, bit_pos), value);
        for &k in pam.subset(bit_pos, value) {
            prop_assert!((x - pam.value(c)).abs() <= (x - pam.value(k)).abs() + 1e-15);
        }
    }

    #[test]
    fn pam_labels_are_a_bijection(bits in 1usize..5) {
        let pam = PamAlphabet::new(bits).unwrap();
        let mut seen = vec![false; pam.len()];
        for j in 0..pam.len() {
            let lab = pam.label(j) as usize;
            prop_assert!(!seen[lab]);
            seen[lab] = true;
            prop_assert_eq!(pam.index_of_label(pam.label(j)), j);
        }
    }

    /// CSV serialization is lossless for arbitrary finite values.
    #[test]
    fn csv_round_trip_is_lossless(
        mults in proptest::num::f64::POSITIVE,
        ber in 0.0f64..1.0,
        snr in -50.0f64..50.0,
        nodes in proptest::num::f64::POSITIVE,
        restarts in 0u64..1000,
    ) {
        let result = SweepResult {
            rows: vec![SweepRow {
                n_t: 2,
                n_r: 2,
                s: 2,
                p: 2,
                m_bits: 4,
                rate: "2/3".into(),
                mode: DecodeMode::Psi,
                snr_db: snr,
                avg_mults_per_precoded_metric: mults,
                ber,
                sd_execs_per_instant: 13.0,
                nodes_per_exec: nodes,
                restarts,
                ber_ci95: 0.0,
                frames: 0,
            }],
        };
        let text = csv_string(&result);
        let back = parse_csv(&text).unwrap();
        prop_assert_eq!(back.rows[0].snr_db.to_bits(), snr.to_bits());
        prop_assert_eq!(back.rows[0].avg_mults_per_precoded_metric.to_bits(), mults.to_bits());
        prop_assert_eq!(back.rows[0].ber.to_bits(), ber.to_bits());
        prop_assert_eq!(back.rows[0].nodes_per_exec.to_bits(), nodes.to_bits());
        prop_assert_eq!(back.rows[0].restarts, restarts);
    }
}
