//! End-to-end checks over the full transmit/receive chain: noiseless
//! loopback in every mode, metric-location consistency and power accounting.

use bicmb_core::sim::config::SimConfig;
use bicmb_core::sim::frame::{build_frame_data, decode_frame, FrameContext};
use bicmb_core::sphere::DecodeMode;
use bicmb_core::tx::code::CodeRate;
use bicmb_core::{
    decompose, generate_channel, subchannel_system, PrecoderConfig, QamConstellation,
    SubchannelAssignment,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn configs() -> Vec<SimConfig> {
    let mut out = Vec::new();
    let mut push = |nt: usize, s: usize, p: usize, m: usize, rate: CodeRate, instants: usize| {
        let mut cfg = SimConfig::new(nt, nt, s, p, m, rate);
        cfg.instants = instants;
        cfg.exh_leaf_budget = u64::MAX;
        out.push(cfg);
    };
    push(2, 2, 2, 2, CodeRate::Half, 16);
    push(2, 2, 2, 4, CodeRate::TwoThirds, 12);
    push(2, 2, 2, 6, CodeRate::FourFifths, 10);
    push(3, 3, 2, 2, CodeRate::Half, 12); // partial precoding, b_p = (1, 2)
    push(4, 4, 4, 2, CodeRate::TwoThirds, 8);
    push(4, 4, 4, 6, CodeRate::FourFifths, 5);
    // partial precoding with the precoded stream on the weaker subchannel
    let mut cfg = SimConfig::new(2, 2, 2, 1, 2, CodeRate::Half);
    cfg.b_p = vec![2];
    cfg.instants = 12;
    cfg.exh_leaf_budget = u64::MAX;
    out.push(cfg);
    out
}

#[test]
fn noiseless_loopback_recovers_information_in_every_mode() {
    for cfg in configs() {
        let ctx = FrameContext::new(&cfg).unwrap();
        for frame in 0..2 {
            let data = build_frame_data(&ctx, frame, 0.0).unwrap();
            let mut decoded_all = Vec::new();
            for mode in [DecodeMode::Exh, DecodeMode::Csd, DecodeMode::Psi] {
                let out = decode_frame(&ctx, &data, mode).unwrap();
                assert_eq!(
                    out.bit_errors,
                    0,
                    "cfg {}x{} S={} P={} M={} {} mode {}",
                    cfg.n_t,
                    cfg.n_r,
                    cfg.s,
                    cfg.p,
                    cfg.m_bits,
                    cfg.rate.as_str(),
                    mode.as_str()
                );
                assert_eq!(out.decoded, data.info);
                decoded_all.push(out.decoded);
            }
            assert!(decoded_all.windows(2).all(|w| w[0] == w[1]));
        }
    }
}

#[test]
fn noisy_frames_decode_identically_across_modes() {
    for cfg in configs() {
        let ctx = FrameContext::new(&cfg).unwrap();
        for frame in 0..3 {
            // moderate noise so errors are plausible but metrics exercise
            // real searches
            let noise_var = cfg.s as f64 / 10f64.powf(1.0);
            let data = build_frame_data(&ctx, frame, noise_var).unwrap();
            let exh = decode_frame(&ctx, &data, DecodeMode::Exh).unwrap();
            let csd = decode_frame(&ctx, &data, DecodeMode::Csd).unwrap();
            let psi = decode_frame(&ctx, &data, DecodeMode::Psi).unwrap();
            assert_eq!(csd.decoded, psi.decoded, "CSD vs PSI divergence");
            assert_eq!(exh.decoded, psi.decoded, "EXH vs PSI divergence");
            assert_eq!(csd.counters.restarts, 0);
            assert_eq!(psi.counters.restarts, 0);
        }
    }
}

/// Every transmitted codeword bit must, under noiseless reception, carry a
/// metric no worse for the transmitted hypothesis than for its complement,
/// and the transmitted hypothesis of every precoded bit must sit at the joint
/// minimum. This exercises the whole position map end to end.
#[test]
fn noiseless_metrics_prefer_the_transmitted_bit_at_every_position() {
    let mut cfg = SimConfig::new(3, 3, 2, 2, 4, CodeRate::TwoThirds);
    cfg.instants = 9;
    cfg.exh_leaf_budget = u64::MAX;
    let ctx = FrameContext::new(&cfg).unwrap();
    let data = build_frame_data(&ctx, 0, 0.0).unwrap();

    // rebuild the transmitted codeword to know each position's bit
    let coded = ctx.code.encode_terminated(&data.info).unwrap();
    use bicmb_core::sphere::{decode_instant, OpCounters, SearchOptions};
    let mut scratch = OpCounters::default();
    let metric_sets: Vec<_> = data
        .r_p
        .iter()
        .enumerate()
        .map(|(k, r_p)| {
            let mut ms = decode_instant(
                r_p,
                &data.sys,
                DecodeMode::Psi,
                &SearchOptions::psi(),
                &mut scratch,
            );
            ms.set_nonprecoded(data.nonprec[k].clone());
            ms
        })
        .collect();

    for (k_prime, &bit) in coded.iter().enumerate() {
        let loc = data.map.locate(k_prime).unwrap();
        let ms = &metric_sets[loc.instant];
        let (m_tx, m_other) = if loc.symbol < cfg.p {
            (
                ms.precoded_complex(loc.symbol, loc.bit, bit),
                ms.precoded_complex(loc.symbol, loc.bit, 1 - bit),
            )
        } else {
            (
                ms.nonprecoded(loc.symbol - cfg.p, loc.bit, bit),
                ms.nonprecoded(loc.symbol - cfg.p, loc.bit, 1 - bit),
            )
        };
        assert!(
            m_tx <= m_other,
            "position {k_prime}: transmitted-bit metric {m_tx} > complement {m_other}"
        );
        assert!(m_tx < 1e-15, "position {k_prime}: noiseless metric {m_tx}");
        if loc.symbol < cfg.p {
            assert_eq!(m_tx, ms.joint_min());
        }
    }
}

/// With unit-energy constellations the transmitted power over the antennas
/// averages to S.
#[test]
fn transmit_power_averages_to_stream_count() {
    let s = 3;
    let h = generate_channel(3, 3, 5).unwrap();
    let bf = decompose(&h, s).unwrap();
    let assign = SubchannelAssignment::new(s, vec![1, 3]).unwrap();
    let _gamma = subchannel_system(&bf, &assign).unwrap();
    let precoder = PrecoderConfig::default_rotation(2, s, assign).unwrap();
    let qam = QamConstellation::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let trials = 100_000;
    let mut total = 0.0;
    for _ in 0..trials {
        let x: Vec<Complex64> = (0..s)
            .map(|_| qam.point_of_label(rng.gen_range(0..qam.len())))
            .collect();
        let routed = precoder.apply_with_permutation(&x).unwrap();
        let tx = bf.v_s() * routed;
        total += tx.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let mean = total / trials as f64;
    let rel = (mean - s as f64).abs() / s as f64;
    assert!(rel < 0.01, "mean transmit power {mean}, S = {s}");
}
