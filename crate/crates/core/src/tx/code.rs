//! Convolutional encoding with optional puncturing.
//!
//! The mother code is the 64-state rate-1/2 feedforward code with octal
//! generators (133, 171). Higher rates come from periodic puncturing:
//! 2/3 uses the pattern `[1 1; 1 0]`, 4/5 uses `[1 1 1 1; 1 0 0 0]`
//! (rows are the two generator output streams, columns are steps).
//!
//! Generator convention: with input window `w = [u(t), u(t-1), ..., u(t-6)]`
//! packed most-recent-first, output `j` is `parity(w & g_j)`.

use crate::error::{Error, Result};

/// Supported code rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeRate {
    Half,
    TwoThirds,
    FourFifths,
}

impl CodeRate {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "1/2" => Ok(CodeRate::Half),
            "2/3" => Ok(CodeRate::TwoThirds),
            "4/5" => Ok(CodeRate::FourFifths),
            other => Err(Error::Parse {
                context: "code rate".into(),
                message: format!("unsupported rate `{other}` (use 1/2, 2/3 or 4/5)"),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CodeRate::Half => "1/2",
            CodeRate::TwoThirds => "2/3",
            CodeRate::FourFifths => "4/5",
        }
    }

    /// (numerator, denominator) of the effective information rate.
    pub fn fraction(&self) -> (usize, usize) {
        match self {
            CodeRate::Half => (1, 2),
            CodeRate::TwoThirds => (2, 3),
            CodeRate::FourFifths => (4, 5),
        }
    }
}

/// Periodic puncturing pattern over the two mother output streams.
#[derive(Debug, Clone)]
pub struct PuncturePattern {
    /// `keep[j][t]`: keep output stream `j` at step `t mod period`.
    keep: [Vec<bool>; 2],
}

impl PuncturePattern {
    pub fn new(keep: [Vec<bool>; 2]) -> Result<Self> {
        if keep[0].len() != keep[1].len() || keep[0].is_empty() {
            return Err(Error::Dimension(
                "puncture pattern rows must be nonempty and equally long".into(),
            ));
        }
        Ok(Self { keep })
    }

    pub fn period(&self) -> usize {
        self.keep[0].len()
    }

    pub fn keeps(&self, stream: usize, step: usize) -> bool {
        self.keep[stream][step % self.period()]
    }

    /// Kept output bits per period of `period()` input steps.
    pub fn kept_per_period(&self) -> usize {
        self.keep[0].iter().chain(self.keep[1].iter()).filter(|&&k| k).count()
    }
}

/// The convolutional code configuration.
#[derive(Debug, Clone)]
pub struct ConvCode {
    generators: [u32; 2],
    memory: usize,
    rate: CodeRate,
    puncture: Option<PuncturePattern>,
    /// `transitions[state][input] = (next_state, output0, output1)`
    transitions: Vec<[(usize, u8, u8); 2]>,
}

impl ConvCode {
    /// The (133, 171) code at the requested rate.
    pub fn standard(rate: CodeRate) -> Self {
        let puncture = match rate {
            CodeRate::Half => None,
            CodeRate::TwoThirds => Some(
                PuncturePattern::new([vec![true, true], vec![true, false]]).unwrap(),
            ),
            CodeRate::FourFifths => Some(
                PuncturePattern::new([
                    vec![true, true, true, true],
                    vec![true, false, false, false],
                ])
                .unwrap(),
            ),
        };
        Self::new([0o133, 0o171], 6, rate, puncture)
    }

    fn new(
        generators: [u32; 2],
        memory: usize,
        rate: CodeRate,
        puncture: Option<PuncturePattern>,
    ) -> Self {
        let states = 1usize << memory;
        let mut transitions = vec![[(0usize, 0u8, 0u8); 2]; states];
        for (state, entry) in transitions.iter_mut().enumerate() {
            for input in 0..2usize {
                let window = (input << memory) | state;
                let c0 = ((window as u32 & generators[0]).count_ones() & 1) as u8;
                let c1 = ((window as u32 & generators[1]).count_ones() & 1) as u8;
                entry[input] = (window >> 1, c0, c1);
            }
        }
        Self {
            generators,
            memory,
            rate,
            puncture,
            transitions,
        }
    }

    pub fn rate(&self) -> CodeRate {
        self.rate
    }

    pub fn generators(&self) -> [u32; 2] {
        self.generators
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn state_count(&self) -> usize {
        1 << self.memory
    }

    pub fn puncture_pattern(&self) -> Option<&PuncturePattern> {
        self.puncture.as_ref()
    }

    /// Trellis step: `(next_state, output0, output1)`.
    pub fn transition(&self, state: usize, input: u8) -> (usize, u8, u8) {
        self.transitions[state][input as usize]
    }

    /// Input steps per puncture period (1 when unpunctured).
    pub fn step_period(&self) -> usize {
        self.puncture.as_ref().map_or(1, |p| p.period())
    }

    /// Codeword bits produced by `steps` trellis steps (requires alignment to
    /// the puncture period).
    pub fn coded_len(&self, steps: usize) -> usize {
        match &self.puncture {
            None => 2 * steps,
            Some(p) => {
                debug_assert_eq!(steps % p.period(), 0);
                steps / p.period() * p.kept_per_period()
            }
        }
    }

    /// Encodes `info` from the zero state without termination and punctures.
    ///
    /// For punctured rates, `info.len()` must align with the puncture period
    /// so the output length is exactly `info.len() / R_c`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() % self.step_period() != 0 {
            return Err(Error::Dimension(format!(
                "input length {} not a multiple of the puncture period {}",
                info.len(),
                self.step_period()
            )));
        }
        Ok(self.encode_steps(info))
    }

    /// Appends `memory()` zero tail bits (flushing the encoder to state 0)
    /// and encodes; `info.len() + memory()` must align with the puncture
    /// period.
    pub fn encode_terminated(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut bits = Vec::with_capacity(info.len() + self.memory);
        bits.extend_from_slice(info);
        bits.extend(std::iter::repeat(0u8).take(self.memory));
        self.encode(&bits)
    }

    fn encode_steps(&self, bits: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * bits.len());
        let mut state = 0usize;
        for (step, &b) in bits.iter().enumerate() {
            debug_assert!(b <= 1);
            let (next, c0, c1) = self.transition(state, b);
            match &self.puncture {
                None => {
                    out.push(c0);
                    out.push(c1);
                }
                Some(p) => {
                    if p.keeps(0, step) {
                        out.push(c0);
                    }
                    if p.keeps(1, step) {
                        out.push(c1);
                    }
                }
            }
            state = next;
        }
        out
    }

    /// Re-expands a punctured bit stream to mother-codeword positions,
    /// `None` marking erased positions.
    pub fn depuncture_bits(&self, kept: &[u8], steps: usize) -> Vec<Option<u8>> {
        let mut out = Vec::with_capacity(2 * steps);
        let mut it = kept.iter();
        for step in 0..steps {
            for stream in 0..2 {
                let keep = self.puncture.as_ref().map_or(true, |p| p.keeps(stream, step));
                out.push(if keep { it.next().copied() } else { None });
            }
        }
        debug_assert!(it.next().is_none());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct convolution-sum encoder used as an independent reference:
    /// c_j[t] = sum_i g_j[i] u[t-i] mod 2 with g_j[i] read from the octal
    /// generator digits.
    fn reference_convolution(info: &[u8], generators: [u32; 2]) -> Vec<u8> {
        let mut out = Vec::with_capacity(info.len() * 2);
        for t in 0..info.len() {
            for g in generators {
                let mut acc = 0u8;
                for i in 0..7 {
                    let tap = ((g >> (6 - i)) & 1) as u8;
                    let u = if t >= i { info[t - i] } else { 0 };
                    acc ^= tap & u;
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn all_zero_input_gives_all_zero_codeword() {
        let code = ConvCode::standard(CodeRate::Half);
        let out = code.encode(&vec![0u8; 64]).unwrap();
        assert!(out.iter().all(|&b| b == 0));
    }

    #[test]
    fn matches_reference_trellis_trace() {
        let code = ConvCode::standard(CodeRate::Half);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let info: Vec<u8> = (0..1000).map(|_| rng.gen_range(0..2u8)).collect();
        let ours = code.encode(&info).unwrap();
        let reference = reference_convolution(&info, code.generators());
        assert_eq!(ours, reference);
    }

    #[test]
    fn punctured_two_thirds_length() {
        let code = ConvCode::standard(CodeRate::TwoThirds);
        let info: Vec<u8> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let out = code.encode(&info).unwrap();
        assert_eq!(out.len(), info.len() * 3 / 2);
    }

    #[test]
    fn punctured_four_fifths_length() {
        let code = ConvCode::standard(CodeRate::FourFifths);
        let info: Vec<u8> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let out = code.encode(&info).unwrap();
        assert_eq!(out.len(), info.len() * 5 / 4);
    }

    #[test]
    fn misaligned_input_rejected() {
        let code = ConvCode::standard(CodeRate::FourFifths);
        assert!(code.encode(&[1, 0, 1]).is_err());
    }

    #[test]
    fn puncture_is_subsequence_of_mother() {
        let half = ConvCode::standard(CodeRate::Half);
        let code = ConvCode::standard(CodeRate::TwoThirds);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let info: Vec<u8> = (0..100).map(|_| rng.gen_range(0..2u8)).collect();
        let mother = half.encode(&info).unwrap();
        let punctured = code.encode(&info).unwrap();
        let pattern = code.puncture_pattern().unwrap();
        let mut expect = Vec::new();
        for step in 0..info.len() {
            if pattern.keeps(0, step) {
                expect.push(mother[2 * step]);
            }
            if pattern.keeps(1, step) {
                expect.push(mother[2 * step + 1]);
            }
        }
        assert_eq!(punctured, expect);
    }

    #[test]
    fn depuncture_restores_positions_without_changing_values() {
        let code = ConvCode::standard(CodeRate::TwoThirds);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info: Vec<u8> = (0..50 * 2).map(|_| rng.gen_range(0..2u8)).collect();
        let punctured = code.encode(&info).unwrap();
        let expanded = code.depuncture_bits(&punctured, info.len());
        assert_eq!(expanded.len(), 2 * info.len());
        let mother = ConvCode::standard(CodeRate::Half).encode(&info).unwrap();
        for (pos, e) in expanded.iter().enumerate() {
            if let Some(bit) = e {
                assert_eq!(*bit, mother[pos]);
            }
        }
        let erased = expanded.iter().filter(|e| e.is_none()).count();
        assert_eq!(erased, info.len() / 2);
    }

    #[test]
    fn termination_returns_to_zero_state() {
        let code = ConvCode::standard(CodeRate::Half);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let info: Vec<u8> = (0..40).map(|_| rng.gen_range(0..2u8)).collect();
        let mut bits = info.clone();
        bits.extend(std::iter::repeat(0u8).take(code.memory()));
        let mut state = 0usize;
        for &b in &bits {
            state = code.transition(state, b).0;
        }
        assert_eq!(state, 0);
        let coded = code.encode_terminated(&info).unwrap();
        assert_eq!(coded.len(), 2 * (info.len() + code.memory()));
    }
}
