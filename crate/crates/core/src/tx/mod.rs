//! Transmitter chain: convolutional coding, interleaving, QAM mapping and
//! constellation precoding.

pub mod code;
pub mod constellation;
pub mod interleave;
pub mod precoder;

use crate::error::{Error, Result};
use constellation::QamConstellation;
use num_complex::Complex64;

/// Maps `S` interleaved bit streams onto the per-instant symbol vectors
/// `x'_k`: symbol `l` of instant `k` consumes bits `k*M..(k+1)*M` of stream
/// `l`, most significant label bit first.
pub fn modulate(
    streams: &[Vec<u8>],
    constellation: &QamConstellation,
) -> Result<Vec<Vec<Complex64>>> {
    let m = constellation.bits_per_symbol();
    let len = streams.first().map_or(0, |s| s.len());
    if streams.iter().any(|s| s.len() != len) || len % m != 0 {
        return Err(Error::Dimension(format!(
            "stream lengths must be equal and a multiple of M={m}"
        )));
    }
    let instants = len / m;
    let mut out = Vec::with_capacity(instants);
    for k in 0..instants {
        let symbols = streams
            .iter()
            .map(|stream| constellation.map_bits(&stream[k * m..(k + 1) * m]))
            .collect();
        out.push(symbols);
    }
    Ok(out)
}

/// The per-instant symbol labels corresponding to [`modulate`].
pub fn symbol_labels(streams: &[Vec<u8>], m_bits: usize) -> Vec<Vec<usize>> {
    let instants = streams.first().map_or(0, |s| s.len()) / m_bits;
    (0..instants)
        .map(|k| {
            streams
                .iter()
                .map(|stream| {
                    stream[k * m_bits..(k + 1) * m_bits]
                        .iter()
                        .fold(0usize, |acc, &b| (acc << 1) | b as usize)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulate_consumes_bits_msb_first() {
        let qam = QamConstellation::new(2).unwrap();
        let streams = vec![vec![0, 0, 1, 1], vec![0, 1, 1, 0]];
        let instants = modulate(&streams, &qam).unwrap();
        assert_eq!(instants.len(), 2);
        let e = 1.0 / 2f64.sqrt();
        assert!((instants[0][0] - Complex64::new(e, e)).norm() < 1e-15);
        assert!((instants[0][1] - Complex64::new(e, -e)).norm() < 1e-15);
        assert!((instants[1][0] - Complex64::new(-e, -e)).norm() < 1e-15);
        assert!((instants[1][1] - Complex64::new(-e, e)).norm() < 1e-15);
    }

    #[test]
    fn labels_match_modulated_points() {
        let qam = QamConstellation::new(4).unwrap();
        let streams = vec![vec![0, 1, 1, 0, 1, 1, 0, 0]];
        let instants = modulate(&streams, &qam).unwrap();
        let labels = symbol_labels(&streams, 4);
        for k in 0..2 {
            let p = qam.point_of_label(labels[k][0]);
            assert!((instants[k][0] - p).norm() < 1e-15);
        }
    }

    #[test]
    fn ragged_streams_rejected() {
        let qam = QamConstellation::new(2).unwrap();
        assert!(modulate(&[vec![0, 1], vec![0, 1, 1, 0]], &qam).is_err());
        assert!(modulate(&[vec![0, 1, 1]], &qam).is_err());
    }
}
