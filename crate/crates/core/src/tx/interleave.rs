//! Spatial and per-stream bit interleaving, plus the codeword-position map.
//!
//! Codeword bits are distributed round-robin across the `S` streams, then each
//! stream is permuted by an independent seeded pseudo-random interleaver. The
//! inverse map (codeword index -> time instant, symbol position, label bit) is
//! recorded so metrics can be routed back to the decoder.
//!
//! All indices here are 0-based.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-stream interleaving permutations for one frame shape.
#[derive(Debug, Clone)]
pub struct InterleaverSpec {
    stream_len: usize,
    /// `perm[s][t]` = interleaved position of in-stream bit `t`.
    perm: Vec<Vec<usize>>,
}

impl InterleaverSpec {
    pub fn new(streams: usize, stream_len: usize, seed: u64) -> Result<Self> {
        if streams == 0 || stream_len == 0 {
            return Err(Error::Dimension(
                "interleaver needs at least one stream and one bit".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perm = (0..streams)
            .map(|_| {
                let mut p: Vec<usize> = (0..stream_len).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        Ok(Self { stream_len, perm })
    }

    pub fn streams(&self) -> usize {
        self.perm.len()
    }

    pub fn stream_len(&self) -> usize {
        self.stream_len
    }

    pub fn permutation(&self, stream: usize) -> &[usize] {
        &self.perm[stream]
    }

    /// Round-robin spatial split followed by the per-stream permutations.
    pub fn interleave(&self, codeword: &[u8]) -> Result<Vec<Vec<u8>>> {
        let s = self.streams();
        if codeword.len() != s * self.stream_len {
            return Err(Error::Dimension(format!(
                "codeword length {} does not fill {s} streams of {}",
                codeword.len(),
                self.stream_len
            )));
        }
        let mut out = vec![vec![0u8; self.stream_len]; s];
        for (k, &bit) in codeword.iter().enumerate() {
            let stream = k % s;
            let t = k / s;
            out[stream][self.perm[stream][t]] = bit;
        }
        Ok(out)
    }

    /// Exact inverse of [`interleave`].
    pub fn deinterleave(&self, streams: &[Vec<u8>]) -> Result<Vec<u8>> {
        let s = self.streams();
        if streams.len() != s || streams.iter().any(|st| st.len() != self.stream_len) {
            return Err(Error::Dimension("stream shape mismatch".into()));
        }
        let mut out = vec![0u8; s * self.stream_len];
        for (k, slot) in out.iter_mut().enumerate() {
            let stream = k % s;
            let t = k / s;
            *slot = streams[stream][self.perm[stream][t]];
        }
        Ok(out)
    }
}

/// Where one codeword bit lives inside the symbol sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitLocation {
    /// Time instant `k`.
    pub instant: usize,
    /// Symbol position `l` in `x'_k` (0..S); positions below `P` are precoded.
    pub symbol: usize,
    /// Bit position `i` in the complex label (0 = most significant of `M`).
    pub bit: usize,
    /// For precoded bits: the real-lattice component index `l_hat` (0..2P),
    /// even for the real axis of a symbol, odd for the imaginary axis.
    pub component: Option<usize>,
    /// For precoded bits: the bit position `i_hat` within the PAM label
    /// (0..M/2).
    pub pam_bit: Option<usize>,
}

impl BitLocation {
    pub fn is_precoded(&self) -> bool {
        self.component.is_some()
    }
}

/// Full codeword-index -> location map for one frame shape.
#[derive(Debug, Clone)]
pub struct FrameMap {
    s: usize,
    p: usize,
    m_bits: usize,
    instants: usize,
    locations: Vec<BitLocation>,
}

impl FrameMap {
    /// Builds the map for `2^m_bits`-QAM with `p` precoded streams.
    pub fn new(interleaver: &InterleaverSpec, m_bits: usize, p: usize) -> Result<Self> {
        let s = interleaver.streams();
        if p == 0 || p > s {
            return Err(Error::Dimension(format!("P={p} outside 1..={s}")));
        }
        if interleaver.stream_len() % m_bits != 0 {
            return Err(Error::Dimension(format!(
                "stream length {} not a multiple of M={m_bits}",
                interleaver.stream_len()
            )));
        }
        let instants = interleaver.stream_len() / m_bits;
        let half = m_bits / 2;
        let total = s * interleaver.stream_len();
        let mut locations = Vec::with_capacity(total);
        for k_prime in 0..total {
            let stream = k_prime % s;
            let t = k_prime / s;
            let pos = interleaver.permutation(stream)[t];
            let instant = pos / m_bits;
            let bit = pos % m_bits;
            let (component, pam_bit) = if stream < p {
                if bit < half {
                    (Some(2 * stream), Some(bit))
                } else {
                    (Some(2 * stream + 1), Some(bit - half))
                }
            } else {
                (None, None)
            };
            locations.push(BitLocation {
                instant,
                symbol: stream,
                bit,
                component,
                pam_bit,
            });
        }
        Ok(Self {
            s,
            p,
            m_bits,
            instants,
            locations,
        })
    }

    pub fn locate(&self, k_prime: usize) -> Result<&BitLocation> {
        self.locations.get(k_prime).ok_or_else(|| {
            Error::IndexOutOfRange(format!(
                "codeword index {k_prime} outside frame of {} bits",
                self.locations.len()
            ))
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn instants(&self) -> usize {
        self.instants
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m_bits(&self) -> usize {
        self.m_bits
    }
}
