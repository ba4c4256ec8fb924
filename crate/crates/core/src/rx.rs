//! Receiver chain: metric routing through the inverse interleaver map,
//! depuncturing, and Viterbi decoding over the bit-metric pairs.

use crate::error::{Error, Result};
use crate::sphere::MetricSet;
use crate::tx::code::ConvCode;
use crate::tx::interleave::FrameMap;

/// Per-mother-codeword-position metric pairs `(cost of bit 0, cost of bit 1)`.
/// Punctured positions carry the neutral pair `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFrame {
    pairs: Vec<[f64; 2]>,
    steps: usize,
}

impl MetricFrame {
    pub fn new(pairs: Vec<[f64; 2]>, steps: usize) -> Result<Self> {
        if pairs.len() != 2 * steps {
            return Err(Error::Dimension(format!(
                "{} metric pairs do not fill {steps} trellis steps",
                pairs.len()
            )));
        }
        Ok(Self { pairs, steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn pair(&self, position: usize) -> [f64; 2] {
        self.pairs[position]
    }
}

/// Routes every transmitted codeword bit's metric pair out of the per-instant
/// metric sets and re-expands punctured positions with neutral pairs.
pub fn route_metrics(
    metric_sets: &[MetricSet],
    map: &FrameMap,
    code: &ConvCode,
) -> Result<MetricFrame> {
    if metric_sets.len() < map.instants() {
        return Err(Error::Dimension(format!(
            "{} metric sets for {} instants",
            metric_sets.len(),
            map.instants()
        )));
    }
    let p = map.p();
    let mut kept = Vec::with_capacity(map.len());
    for k_prime in 0..map.len() {
        let loc = map.locate(k_prime)?;
        let ms = &metric_sets[loc.instant];
        let pair = if loc.symbol < p {
            [
                ms.precoded_complex(loc.symbol, loc.bit, 0),
                ms.precoded_complex(loc.symbol, loc.bit, 1),
            ]
        } else {
            [
                ms.nonprecoded(loc.symbol - p, loc.bit, 0),
                ms.nonprecoded(loc.symbol - p, loc.bit, 1),
            ]
        };
        kept.push(pair);
    }

    let steps = steps_for_coded_len(code, kept.len())?;
    let mut pairs = Vec::with_capacity(2 * steps);
    let mut it = kept.into_iter();
    for step in 0..steps {
        for stream in 0..2 {
            let keep = code
                .puncture_pattern()
                .map_or(true, |pat| pat.keeps(stream, step));
            pairs.push(if keep {
                it.next().ok_or_else(|| {
                    Error::Dimension("codeword shorter than the puncture schedule".into())
                })?
            } else {
                [0.0, 0.0]
            });
        }
    }
    if it.next().is_some() {
        return Err(Error::Dimension(
            "codeword longer than the puncture schedule".into(),
        ));
    }
    MetricFrame::new(pairs, steps)
}

/// Trellis steps that produce `coded` transmitted bits.
pub fn steps_for_coded_len(code: &ConvCode, coded: usize) -> Result<usize> {
    match code.puncture_pattern() {
        None => {
            if coded % 2 != 0 {
                return Err(Error::Dimension(format!("odd codeword length {coded}")));
            }
            Ok(coded / 2)
        }
        Some(p) => {
            let per = p.kept_per_period();
            if coded % per != 0 {
                return Err(Error::Dimension(format!(
                    "codeword length {coded} not a multiple of {per} kept bits per period"
                )));
            }
            Ok(coded / per * p.period())
        }
    }
}

/// Viterbi decoding of a terminated frame: finds the trellis path from state
/// zero back to state zero minimizing the summed bit metrics, exact traceback
/// over the whole frame, and strips the tail bits.
///
/// Path-metric ties keep the earlier survivor (lowest predecessor state,
/// hypothesis bit 0 reached first), so an all-neutral frame decodes to the
/// all-zero sequence.
pub fn viterbi_decode(frame: &MetricFrame, code: &ConvCode) -> Result<Vec<u8>> {
    let steps = frame.steps();
    if steps <= code.memory() {
        return Err(Error::Dimension(format!(
            "frame of {steps} steps cannot carry a terminated codeword (tail is {})",
            code.memory()
        )));
    }
    let states = code.state_count();
    let mask = states - 1;
    let top = code.memory() - 1;

    let mut metric = vec![f64::INFINITY; states];
    metric[0] = 0.0;
    let mut next_metric = vec![0.0f64; states];
    // survivor[step][state]: which predecessor (0 or 1, the low bit added to
    // `state << 1`) the best path used
    let mut survivor = vec![0u8; steps * states];

    for step in 0..steps {
        let pair0 = frame.pair(2 * step);
        let pair1 = frame.pair(2 * step + 1);
        for next in 0..states {
            let input = (next >> top) as u8;
            let base = (next << 1) & mask;
            let mut best = f64::INFINITY;
            let mut best_low = 0u8;
            for low in 0..2usize {
                let prev = base | low;
                let pm = metric[prev];
                if pm.is_infinite() {
                    continue;
                }
                let (_, c0, c1) = code.transition(prev, input);
                let cand = pm + pair0[c0 as usize] + pair1[c1 as usize];
                if cand < best {
                    best = cand;
                    best_low = low as u8;
                }
            }
            next_metric[next] = best;
            survivor[step * states + next] = best_low;
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }

    // Terminated frame: trace back from state zero.
    let mut state = 0usize;
    let mut bits = vec![0u8; steps];
    for step in (0..steps).rev() {
        bits[step] = (state >> top) as u8;
        let low = survivor[step * states + state];
        state = ((state << 1) & mask) | low as usize;
    }
    bits.truncate(steps - code.memory());
    Ok(bits)
}
