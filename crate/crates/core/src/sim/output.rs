//! Sweep outputs: a stable CSV schema and a deterministic SVG plot.

use crate::error::{Error, Result};
use crate::sim::sweep::{SweepResult, SweepRow};
use crate::sphere::DecodeMode;
use std::path::Path;

pub const CSV_HEADER: &str = "nt,nr,S,P,M,rate,mode,snr_db,avg_mults_per_precoded_metric,ber,sd_execs_per_instant,nodes_per_exec,restarts";

/// Lossless float field: 17 significant digits round-trip `f64` exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes one row per `(config, SNR, mode)` cell under [`CSV_HEADER`].
pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::with_capacity(128 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n_t,
            r.n_r,
            r.s,
            r.p,
            r.m_bits,
            r.rate,
            r.mode.as_str(),
            fmt_f64(r.snr_db),
            fmt_f64(r.avg_mults_per_precoded_metric),
            fmt_f64(r.ber),
            fmt_f64(r.sd_execs_per_instant),
            fmt_f64(r.nodes_per_exec),
            r.restarts,
        ));
    }
    out
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(result)).map_err(|e| Error::io(path, e))
}

/// Parses a CSV produced by [`emit_csv`]. Fields outside the schema
/// (confidence half-widths, frame counts) are not part of the file and come
/// back zeroed.
pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        context: "csv".into(),
        message: "empty file".into(),
    })?;
    if header != CSV_HEADER {
        return Err(Error::Parse {
            context: "csv".into(),
            message: format!("unexpected header `{header}`"),
        });
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(Error::Parse {
                context: "csv".into(),
                message: format!("line {}: expected 13 fields, got {}", lineno + 2, fields.len()),
            });
        }
        let bad = |what: &str| Error::Parse {
            context: "csv".into(),
            message: format!("line {}: bad {what}", lineno + 2),
        };
        rows.push(SweepRow {
            n_t: fields[0].parse().map_err(|_| bad("nt"))?,
            n_r: fields[1].parse().map_err(|_| bad("nr"))?,
            s: fields[2].parse().map_err(|_| bad("S"))?,
            p: fields[3].parse().map_err(|_| bad("P"))?,
            m_bits: fields[4].parse().map_err(|_| bad("M"))?,
            rate: fields[5].to_string(),
            mode: DecodeMode::parse(fields[6])?,
            snr_db: fields[7].parse().map_err(|_| bad("snr_db"))?,
            avg_mults_per_precoded_metric: fields[8]
                .parse()
                .map_err(|_| bad("avg_mults_per_precoded_metric"))?,
            ber: fields[9].parse().map_err(|_| bad("ber"))?,
            sd_execs_per_instant: fields[10]
                .parse()
                .map_err(|_| bad("sd_execs_per_instant"))?,
            nodes_per_exec: fields[11].parse().map_err(|_| bad("nodes_per_exec"))?,
            restarts: fields[12].parse().map_err(|_| bad("restarts"))?,
            ber_ci95: 0.0,
            frames: 0,
        });
    }
    Ok(SweepResult { rows })
}

pub fn load_csv(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

const PLOT_W: f64 = 720.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

fn mode_color(mode: DecodeMode) -> &'static str {
    match mode {
        DecodeMode::Exh => "#000000",
        DecodeMode::Csd => "#d62728",
        DecodeMode::Psi => "#1f77b4",
    }
}

fn mode_label(mode: DecodeMode) -> &'static str {
    match mode {
        DecodeMode::Exh => "EXH",
        DecodeMode::Csd => "CSD",
        DecodeMode::Psi => "PSI",
    }
}

/// Renders average multiplications per precoded bit metric against SNR on a
/// log y-axis, one series per mode, legend ordered EXH, CSD, PSI. Identical
/// inputs produce byte-identical output.
pub fn plot_svg(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(Error::Dimension("cannot plot an empty sweep".into()));
    }
    let mut modes: Vec<DecodeMode> = Vec::new();
    for m in [DecodeMode::Exh, DecodeMode::Csd, DecodeMode::Psi] {
        if result.rows.iter().any(|r| r.mode == m) {
            modes.push(m);
        }
    }
    let xs: Vec<f64> = {
        let mut v: Vec<f64> = result.rows.iter().map(|r| r.snr_db).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    };
    let (x_min, x_max) = (xs[0], xs[xs.len() - 1]);
    let x_span = (x_max - x_min).max(1e-9);
    let logs: Vec<f64> = result
        .rows
        .iter()
        .map(|r| r.avg_mults_per_precoded_metric.max(1.0).log10())
        .collect();
    let y_min = logs.iter().cloned().fold(f64::INFINITY, f64::min).floor();
    let y_max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil();
    let y_span = (y_max - y_min).max(1.0);

    let inner_w = PLOT_W - MARGIN_L - MARGIN_R;
    let inner_h = PLOT_H - MARGIN_T - MARGIN_B;
    let x_of = |snr: f64| MARGIN_L + (snr - x_min) / x_span * inner_w;
    let y_of = |log: f64| MARGIN_T + (y_max - log) / y_span * inner_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" viewBox=\"0 0 {PLOT_W} {PLOT_H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">Average real multiplications per precoded bit metric</text>\n",
        MARGIN_L + inner_w / 2.0
    ));

    // frame
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L:.2}\" y=\"{MARGIN_T:.2}\" width=\"{inner_w:.2}\" height=\"{inner_h:.2}\" fill=\"none\" stroke=\"black\"/>\n"
    ));

    // y decades
    let mut decade = y_min as i64;
    while decade as f64 <= y_max {
        let y = y_of(decade as f64);
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_L:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
            MARGIN_L + inner_w
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">1e{decade}</text>\n",
            MARGIN_L - 8.0,
            y + 4.0
        ));
        decade += 1;
    }

    // x ticks at the measured SNR points
    for &snr in &xs {
        let x = x_of(snr);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            MARGIN_T + inner_h,
            MARGIN_T + inner_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{snr}</text>\n",
            MARGIN_T + inner_h + 20.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">SNR (dB)</text>\n",
        MARGIN_L + inner_w / 2.0,
        PLOT_H - 12.0
    ));

    // series
    for &mode in &modes {
        let mut pts: Vec<(f64, f64)> = result
            .rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| (r.snr_db, r.avg_mults_per_precoded_metric.max(1.0).log10()))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let path: Vec<String> = pts
            .iter()
            .map(|(snr, log)| format!("{:.2},{:.2}", x_of(*snr), y_of(*log)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            path.join(" "),
            mode_color(mode)
        ));
        for (snr, log) in &pts {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\"/>\n",
                x_of(*snr),
                y_of(*log),
                mode_color(mode)
            ));
        }
    }

    // legend (fixed order)
    for (i, &mode) in modes.iter().enumerate() {
        let y = MARGIN_T + 16.0 + 20.0 * i as f64;
        let x = MARGIN_L + inner_w + 12.0;
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            x + 22.0,
            mode_color(mode)
        ));
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{}\"/>\n",
            x + 11.0,
            mode_color(mode)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            x + 28.0,
            y + 4.0,
            mode_label(mode)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(result: &SweepResult, path: &Path) -> Result<()> {
    let svg = plot_svg(result)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
