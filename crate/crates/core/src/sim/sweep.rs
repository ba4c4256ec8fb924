//! The Monte-Carlo sweep driver: per-(SNR, mode) aggregation of counters and
//! BER over frames decoded in parallel.

use crate::error::Result;
use crate::sim::config::SimConfig;
use crate::sim::frame::{build_frame_data, decode_frame, noise_variance, FrameContext, FrameOutput};
use crate::sphere::DecodeMode;
use rayon::prelude::*;

/// One aggregated `(config, SNR, mode)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_t: usize,
    pub n_r: usize,
    pub s: usize,
    pub p: usize,
    pub m_bits: usize,
    pub rate: String,
    pub mode: DecodeMode,
    pub snr_db: f64,
    /// Metric-path multiplications (plus amortized preprocessing when
    /// enabled) per acquired precoded bit metric.
    pub avg_mults_per_precoded_metric: f64,
    pub ber: f64,
    pub sd_execs_per_instant: f64,
    pub nodes_per_exec: f64,
    pub restarts: u64,
    /// 95% normal-approximation half-width of the BER estimate (not part of
    /// the CSV schema).
    pub ber_ci95: f64,
    /// Frames aggregated into this row.
    pub frames: usize,
}

/// All rows of one sweep, ordered by (SNR point, mode list order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, mode: DecodeMode, snr_db: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.mode == mode && r.snr_db == snr_db)
    }
}

/// Runs the whole sweep. Deterministic for a fixed config: frames partition
/// the seed space, run in parallel, and merge in frame order.
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let ctx = FrameContext::new(cfg)?;
    let mut rows = Vec::new();
    for &snr_db in &cfg.snr_db {
        if cfg.frames == 0 {
            continue;
        }
        let noise_var = noise_variance(cfg.s, snr_db);
        let per_frame: Result<Vec<Vec<FrameOutput>>> = (0..cfg.frames)
            .into_par_iter()
            .map(|f| {
                let data = build_frame_data(&ctx, f as u64, noise_var)?;
                cfg.modes
                    .iter()
                    .map(|&mode| decode_frame(&ctx, &data, mode))
                    .collect()
            })
            .collect();
        let per_frame = per_frame?;
        for (mode_idx, &mode) in cfg.modes.iter().enumerate() {
            rows.push(aggregate(
                cfg,
                mode,
                snr_db,
                per_frame.iter().map(|outputs| &outputs[mode_idx]),
            ));
        }
    }
    Ok(SweepResult { rows })
}

fn aggregate<'a>(
    cfg: &SimConfig,
    mode: DecodeMode,
    snr_db: f64,
    outputs: impl Iterator<Item = &'a FrameOutput>,
) -> SweepRow {
    let mut mults = 0u64;
    let mut preprocessing = 0u64;
    let mut nodes = 0u64;
    let mut execs = 0u64;
    let mut restarts = 0u64;
    let mut errors = 0u64;
    let mut info_bits = 0u64;
    let mut instants = 0u64;
    let mut metrics = 0u64;
    let mut frames = 0usize;
    for out in outputs {
        mults += out.counters.real_multiplications;
        preprocessing += out.counters.preprocessing_multiplications;
        nodes += out.counters.nodes_visited;
        execs += out.counters.sd_executions;
        restarts += out.counters.restarts;
        errors += out.bit_errors;
        info_bits += out.info_bits;
        instants += out.instants;
        metrics += out.precoded_metrics;
        frames += 1;
    }
    let counted = if cfg.count_preprocessing {
        mults + preprocessing
    } else {
        mults
    };
    let ber = if info_bits > 0 {
        errors as f64 / info_bits as f64
    } else {
        0.0
    };
    let ber_ci95 = if info_bits > 0 {
        1.96 * (ber * (1.0 - ber) / info_bits as f64).sqrt()
    } else {
        0.0
    };
    SweepRow {
        n_t: cfg.n_t,
        n_r: cfg.n_r,
        s: cfg.s,
        p: cfg.p,
        m_bits: cfg.m_bits,
        rate: cfg.rate.as_str().to_string(),
        mode,
        snr_db,
        avg_mults_per_precoded_metric: counted as f64 / metrics.max(1) as f64,
        ber,
        sd_execs_per_instant: execs as f64 / instants.max(1) as f64,
        nodes_per_exec: if execs > 0 {
            nodes as f64 / execs as f64
        } else {
            0.0
        },
        restarts,
        ber_ci95,
        frames,
    }
}
