//! Sweep configuration: validation, flat key-value config files.

use crate::channel::SubchannelAssignment;
use crate::error::{Error, Result};
use crate::sphere::DecodeMode;
use crate::tx::code::CodeRate;
use crate::tx::precoder::PrecoderConfig;
use std::path::{Path, PathBuf};

/// Where the precoder matrix comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrecoderSpec {
    /// The built-in rotation for P in {1, 2, 4}.
    Default,
    /// A plain-text matrix file.
    File(PathBuf),
}

/// Everything a sweep needs. A sweep is a pure function of this struct.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub s: usize,
    pub p: usize,
    pub m_bits: usize,
    pub rate: CodeRate,
    pub precoder: PrecoderSpec,
    /// 1-based precoded subchannel indices, strictly increasing.
    pub b_p: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub frames: usize,
    /// Burst length target: symbol vectors per channel realization. Rounded
    /// up to the nearest frame shape that aligns code, puncturing and
    /// interleaving.
    pub instants: usize,
    pub modes: Vec<DecodeMode>,
    pub seed: u64,
    /// Include QR + check-table construction (amortized over the burst) in
    /// the reported multiplication averages.
    pub count_preprocessing: bool,
    /// Largest candidate-set size `|chi|^(2P)` the exhaustive engine still
    /// executes per instant inside sweeps; above it, EXH rows carry the
    /// closed-form count and reuse the (equal) sphere-decoder metric values.
    pub exh_leaf_budget: u64,
}

impl SimConfig {
    /// A config with required fields set and everything else defaulted.
    pub fn new(n_t: usize, n_r: usize, s: usize, p: usize, m_bits: usize, rate: CodeRate) -> Self {
        Self {
            n_t,
            n_r,
            s,
            p,
            m_bits,
            rate,
            precoder: PrecoderSpec::Default,
            b_p: (1..=p).collect(),
            snr_db: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            frames: 200,
            instants: 1000,
            modes: vec![DecodeMode::Exh, DecodeMode::Csd, DecodeMode::Psi],
            seed: 1,
            count_preprocessing: false,
            exh_leaf_budget: 1 << 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::config("nt", "antenna counts must be at least 1"));
        }
        let max_s = self.n_t.min(self.n_r);
        if self.s == 0 || self.s > max_s {
            return Err(Error::config("s", format!("S must be in 1..={max_s}")));
        }
        if self.p == 0 || self.p > self.s {
            return Err(Error::config("p", format!("P must be in 1..={}", self.s)));
        }
        if self.m_bits == 0 || self.m_bits % 2 != 0 || self.m_bits > 8 {
            return Err(Error::config("m", "M must be even and in 2..=8"));
        }
        if self.b_p.len() != self.p {
            return Err(Error::config(
                "b_p",
                format!("expected {} precoded subchannel indices", self.p),
            ));
        }
        SubchannelAssignment::new(self.s, self.b_p.clone())
            .map_err(|e| Error::config("b_p", e.to_string()))?;
        if self.snr_db.is_empty() {
            return Err(Error::config("snr_db", "need at least one SNR point"));
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("snr_db", "SNR grid must be strictly increasing"));
        }
        if self.instants == 0 {
            return Err(Error::config("instants", "burst length must be at least 1"));
        }
        if self.modes.is_empty() {
            return Err(Error::config("modes", "need at least one mode"));
        }
        if let PrecoderSpec::Default = self.precoder {
            if ![1, 2, 4].contains(&self.p) {
                return Err(Error::config(
                    "precoder",
                    format!("no built-in precoder for P={}; supply a matrix file", self.p),
                ));
            }
        }
        Ok(())
    }

    pub fn assignment(&self) -> Result<SubchannelAssignment> {
        SubchannelAssignment::new(self.s, self.b_p.clone())
    }

    pub fn build_precoder(&self) -> Result<PrecoderConfig> {
        let assignment = self.assignment()?;
        match &self.precoder {
            PrecoderSpec::Default => PrecoderConfig::default_rotation(self.p, self.s, assignment),
            PrecoderSpec::File(path) => PrecoderConfig::from_matrix_file(path, self.s, assignment),
        }
    }

    /// Parses a flat `key = value` config file (`#` comments). Unknown keys
    /// are rejected so typos surface as errors.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_str_content(&text)
    }

    pub fn from_str_content(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                context: "config".into(),
                message: format!("line {}: expected `key = value`", lineno + 1),
            })?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }

        let take = |fields: &mut std::collections::HashMap<String, String>, key: &str| {
            fields.remove(key)
        };
        let required = |fields: &mut std::collections::HashMap<String, String>,
                        key: &str|
         -> Result<String> {
            take(fields, key).ok_or_else(|| Error::config(key, "missing required field"))
        };

        let mut f = fields;
        let n_t = parse_usize("nt", &required(&mut f, "nt")?)?;
        let n_r = parse_usize("nr", &required(&mut f, "nr")?)?;
        let s = parse_usize("s", &required(&mut f, "s")?)?;
        let p = parse_usize("p", &required(&mut f, "p")?)?;
        let m_bits = parse_usize("m", &required(&mut f, "m")?)?;
        let rate = CodeRate::parse(&required(&mut f, "rate")?)
            .map_err(|e| Error::config("rate", e.to_string()))?;

        let mut cfg = SimConfig::new(n_t, n_r, s, p, m_bits, rate);
        if let Some(v) = take(&mut f, "b_p") {
            cfg.b_p = parse_usize_list("b_p", &v)?;
        }
        if let Some(v) = take(&mut f, "precoder") {
            cfg.precoder = if v == "default" {
                PrecoderSpec::Default
            } else {
                PrecoderSpec::File(PathBuf::from(v))
            };
        }
        if let Some(v) = take(&mut f, "snr_db") {
            cfg.snr_db = parse_f64_list("snr_db", &v)?;
        }
        if let Some(v) = take(&mut f, "frames") {
            cfg.frames = parse_usize("frames", &v)?;
        }
        if let Some(v) = take(&mut f, "instants") {
            cfg.instants = parse_usize("instants", &v)?;
        }
        if let Some(v) = take(&mut f, "modes") {
            cfg.modes = parse_modes("modes", &v)?;
        }
        if let Some(v) = take(&mut f, "seed") {
            cfg.seed = v
                .parse::<u64>()
                .map_err(|_| Error::config("seed", format!("bad integer `{v}`")))?;
        }
        if let Some(v) = take(&mut f, "count_preprocessing") {
            cfg.count_preprocessing = parse_bool("count_preprocessing", &v)?;
        }
        if let Some(key) = f.keys().next() {
            return Err(Error::config(key, "unknown config key"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_usize(field: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::config(field, format!("bad integer `{value}`")))
}

fn parse_usize_list(field: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|t| parse_usize(field, t.trim()))
        .collect()
}

fn parse_f64_list(field: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(field, format!("bad number `{t}`")))
        })
        .collect()
}

fn parse_modes(field: &str, value: &str) -> Result<Vec<DecodeMode>> {
    value
        .split(',')
        .map(|t| DecodeMode::parse(t).map_err(|e| Error::config(field, e.to_string())))
        .collect()
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::config(field, format!("bad boolean `{other}`"))),
    }
}
