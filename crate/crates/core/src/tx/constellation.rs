//! Gray-mapped square-QAM constellations and their per-axis PAM decomposition.
//!
//! A `2^M`-QAM symbol (M even) is the pair of two independent `2^(M/2)`-PAM
//! coordinates. The complex label is the concatenation of the real-axis label
//! (first M/2 bits) and the imaginary-axis label (last M/2 bits), both using
//! the same reflected-Gray PAM map. Bit positions are counted from 0 starting
//! at the most significant bit of the label.
//!
//! The PAM map is pinned so that label examples are deterministic: index `j`
//! (0-based) carries amplitude `(L - 1 - 2j) * scale` with label `gray(j) =
//! j ^ (j >> 1)`, where `L = 2^(M/2)`. The most significant label bit is 0 on
//! the positive half of the axis, so the all-zero label lands on the largest
//! positive amplitude; for 4-QAM, bits (0,0) map to `(1 + i)/sqrt(2)`.
//! `scale` normalizes the complex constellation to unit average energy.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// One real PAM axis of a square QAM constellation.
#[derive(Debug, Clone)]
pub struct PamAlphabet {
    bits: usize,
    scale: f64,
    points: Vec<f64>,
    labels: Vec<u16>,
    /// label value -> alphabet index
    index_of_label: Vec<usize>,
    /// `[bit_pos * 2 + bit_value]` -> ascending list of alphabet indices whose
    /// label carries `bit_value` at `bit_pos`
    subsets: Vec<Vec<usize>>,
}

impl PamAlphabet {
    /// Builds the `2^bits`-PAM half-axis of a `2^(2*bits)`-QAM constellation
    /// with unit average complex-symbol energy.
    pub fn new(bits: usize) -> Result<Self> {
        if bits == 0 || bits > 8 {
            return Err(Error::Dimension(format!(
                "PAM bits per axis must be in 1..=8, got {bits}"
            )));
        }
        let len = 1usize << bits;
        // Complex average energy of the square grid with odd amplitudes
        // +/-1, +/-3, ... is 2 (L^2 - 1) / 3; normalize it to one.
        let lf = len as f64;
        let scale = 1.0 / (2.0 * (lf * lf - 1.0) / 3.0).sqrt();
        let mut points = Vec::with_capacity(len);
        let mut labels = Vec::with_capacity(len);
        let mut index_of_label = vec![0usize; len];
        for j in 0..len {
            points.push((len as f64 - 1.0 - 2.0 * j as f64) * scale);
            let gray = (j ^ (j >> 1)) as u16;
            labels.push(gray);
            index_of_label[gray as usize] = j;
        }
        let mut subsets = vec![Vec::with_capacity(len / 2); bits * 2];
        for j in 0..len {
            for pos in 0..bits {
                let b = Self::label_bit_of(labels[j], bits, pos);
                subsets[pos * 2 + b as usize].push(j);
            }
        }
        Ok(Self {
            bits,
            scale,
            points,
            labels,
            index_of_label,
            subsets,
        })
    }

    fn label_bit_of(label: u16, bits: usize, pos: usize) -> u8 {
        ((label >> (bits - 1 - pos)) & 1) as u8
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Amplitude spacing between adjacent levels is `2 * scale()`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn value(&self, index: usize) -> f64 {
        self.points[index]
    }

    pub fn values(&self) -> &[f64] {
        &self.points
    }

    pub fn label(&self, index: usize) -> u16 {
        self.labels[index]
    }

    pub fn index_of_label(&self, label: u16) -> usize {
        self.index_of_label[label as usize]
    }

    /// Bit `pos` (0 = most significant) of the label at `index`.
    pub fn label_bit(&self, index: usize, pos: usize) -> u8 {
        Self::label_bit_of(self.labels[index], self.bits, pos)
    }

    /// Alphabet indices whose label has `bit_value` at `bit_pos`, ascending.
    pub fn subset(&self, bit_pos: usize, bit_value: u8) -> &[usize] {
        &self.subsets[bit_pos * 2 + bit_value as usize]
    }

    /// Index of the alphabet element nearest to `x` (ties round toward the
    /// smaller amplitude, i.e. the larger index).
    pub fn nearest_index(&self, x: f64) -> usize {
        // points[j] = (L - 1 - 2j) * scale  =>  j = ((L - 1) - x / scale) / 2
        let f = ((self.points.len() as f64 - 1.0) - x / self.scale) / 2.0;
        self.nearest_index_fractional(f)
    }

    /// Nearest alphabet index to a fractional index `f` (the amplitude axis
    /// mapped affinely onto 0..L-1). Ties round up, i.e. toward the smaller
    /// amplitude.
    #[inline]
    pub fn nearest_index_fractional(&self, f: f64) -> usize {
        let j = (f + 0.5).floor() as isize;
        j.clamp(0, self.points.len() as isize - 1) as usize
    }

    /// Nearest admissible index to a fractional index, scanning the subset
    /// `chi_b^i`. Amplitudes are affine in the index, so index distance and
    /// amplitude distance agree.
    #[inline]
    pub fn nearest_in_subset_fractional(&self, f: f64, bit_pos: usize, bit_value: u8) -> usize {
        let subset = self.subset(bit_pos, bit_value);
        let mut best = subset[0];
        let mut best_d = (f - best as f64).abs();
        for &j in &subset[1..] {
            let d = (f - j as f64).abs();
            if d < best_d || (d == best_d && j > best) {
                best = j;
                best_d = d;
            }
        }
        best
    }

    /// Nearest element of the subset `chi_b^i` to `x`, by linear scan over the
    /// at most `L/2` admissible indices.
    pub fn nearest_in_subset(&self, x: f64, bit_pos: usize, bit_value: u8) -> usize {
        let subset = self.subset(bit_pos, bit_value);
        let mut best = subset[0];
        let mut best_d = (x - self.points[best]).abs();
        for &j in &subset[1..] {
            let d = (x - self.points[j]).abs();
            // Strict comparison keeps the smaller amplitude (larger index) on ties.
            if d < best_d || (d == best_d && self.points[j] < self.points[best]) {
                best = j;
                best_d = d;
            }
        }
        best
    }
}

/// Gray-mapped square QAM built from two copies of the same PAM axis.
#[derive(Debug, Clone)]
pub struct QamConstellation {
    bits_per_symbol: usize,
    pam: PamAlphabet,
    /// complex point indexed by label value
    point_of_label: Vec<Complex64>,
}

impl QamConstellation {
    pub fn new(bits_per_symbol: usize) -> Result<Self> {
        if bits_per_symbol == 0 || bits_per_symbol % 2 != 0 {
            return Err(Error::Dimension(format!(
                "square QAM needs an even number of bits per symbol, got {bits_per_symbol}"
            )));
        }
        let pam = PamAlphabet::new(bits_per_symbol / 2)?;
        let m = pam.bits();
        let mut point_of_label = vec![Complex64::new(0.0, 0.0); 1 << bits_per_symbol];
        for re_idx in 0..pam.len() {
            for im_idx in 0..pam.len() {
                let label = ((pam.label(re_idx) as usize) << m) | pam.label(im_idx) as usize;
                point_of_label[label] = Complex64::new(pam.value(re_idx), pam.value(im_idx));
            }
        }
        Ok(Self {
            bits_per_symbol,
            pam,
            point_of_label,
        })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn len(&self) -> usize {
        self.point_of_label.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pam(&self) -> &PamAlphabet {
        &self.pam
    }

    pub fn point_of_label(&self, label: usize) -> Complex64 {
        self.point_of_label[label]
    }

    /// Maps `bits_per_symbol` bits (most significant first) onto a symbol.
    pub fn map_bits(&self, bits: &[u8]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        let mut label = 0usize;
        for &b in bits {
            label = (label << 1) | b as usize;
        }
        self.point_of_label[label]
    }

    /// Splits a complex label into its (real-axis, imaginary-axis) PAM labels.
    pub fn split_label(&self, label: usize) -> (u16, u16) {
        let m = self.pam.bits();
        (((label >> m) & ((1 << m) - 1)) as u16, (label & ((1 << m) - 1)) as u16)
    }

    /// Bit `pos` (0 = most significant of the complex label) of `label`.
    pub fn label_bit(&self, label: usize, pos: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - pos)) & 1) as u8
    }
}
