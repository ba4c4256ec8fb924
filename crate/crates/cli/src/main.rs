//! `simulate`: Monte-Carlo SNR sweeps over a BICMB-CP configuration,
//! reporting decoding complexity (real multiplications per precoded bit
//! metric) and BER per mode, with CSV and SVG outputs.

use bicmb_core::sim::{emit_csv, emit_plot, run_sweep, SimConfig};
use bicmb_core::sphere::DecodeMode;
use bicmb_core::Error;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "simulate",
    about = "Monte-Carlo SNR sweep for BICMB-CP bit-metric engines",
    long_about = "Runs the configured sweep with every requested bit-metric engine \
                  (exh, csd, psi) on identical received data, aggregating real-multiplication \
                  counts and BER per (SNR, mode). Flags override config-file fields."
)]
struct Args {
    /// Flat key=value config file (see README for the schema).
    #[arg(long)]
    config: PathBuf,

    /// Override the SNR grid (dB), comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    snr_db: Option<Vec<f64>>,

    /// Override the engines to run, e.g. `exh,csd,psi`.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,

    /// Override the number of frames per SNR point.
    #[arg(long)]
    frames: Option<usize>,

    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the sweep table as CSV.
    #[arg(long)]
    out_csv: Option<PathBuf>,

    /// Write the complexity-vs-SNR plot as SVG.
    #[arg(long)]
    out_plot: Option<PathBuf>,

    /// Include amortized preprocessing (QR, check-table) in the reported
    /// multiplication averages.
    #[arg(long)]
    count_preprocessing: bool,
}

fn build_config(args: &Args) -> Result<SimConfig, Error> {
    let mut cfg = SimConfig::from_file(&args.config)?;
    if let Some(snr) = &args.snr_db {
        cfg.snr_db = snr.clone();
    }
    if let Some(modes) = &args.modes {
        cfg.modes = modes
            .iter()
            .map(|m| DecodeMode::parse(m).map_err(|e| Error::config("modes", e.to_string())))
            .collect::<Result<_, _>>()?;
    }
    if let Some(frames) = args.frames {
        cfg.frames = frames;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.count_preprocessing {
        cfg.count_preprocessing = true;
    }
    cfg.validate()?;
    // surface precoder-file problems as config errors before the sweep starts
    cfg.build_precoder()
        .map_err(|e| Error::config("precoder", e.to_string()))?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<(), Error> {
    let cfg = build_config(args)?;
    let result = run_sweep(&cfg)?;

    println!(
        "{}x{} S={} P={} {}-QAM R={} seed={} frames={} instants>={}",
        cfg.n_t,
        cfg.n_r,
        cfg.s,
        cfg.p,
        1usize << cfg.m_bits,
        cfg.rate.as_str(),
        cfg.seed,
        cfg.frames,
        cfg.instants
    );
    println!(
        "{:>8} {:>6} {:>16} {:>12} {:>10} {:>12} {:>9}",
        "snr_db", "mode", "mults/metric", "ber", "execs/inst", "nodes/exec", "restarts"
    );
    for row in &result.rows {
        println!(
            "{:>8.2} {:>6} {:>16.3} {:>12.3e} {:>10.2} {:>12.2} {:>9}",
            row.snr_db,
            row.mode.as_str(),
            row.avg_mults_per_precoded_metric,
            row.ber,
            row.sd_execs_per_instant,
            row.nodes_per_exec,
            row.restarts
        );
    }

    if let Some(path) = &args.out_csv {
        emit_csv(&result, path)?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.out_plot {
        emit_plot(&result, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config { .. } | Error::Parse { .. } | Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
