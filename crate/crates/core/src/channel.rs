//! Rayleigh MIMO channel generation and SVD-based multiple beamforming.
//!
//! The channel `H` (N_r x N_t, i.i.d. CN(0,1) entries) is decomposed as
//! `H = U L V^H`; the first `S` columns of `U` and `V` beamform `S` parallel
//! streams over the top-`S` singular-value subchannels. A subchannel
//! assignment splits `{1..S}` into precoded (`b_p`) and non-precoded (`b_n`)
//! positions; the per-block diagonal gains form the Gamma matrix of the
//! equivalent system `r = Gamma Theta x' + n`.

use crate::error::{Error, Result};
use crate::tx::precoder::PrecoderConfig;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A quasi-static flat-fading MIMO channel realization.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
    seed: u64,
}

impl ChannelMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.ncols()
    }
}

/// Truncated SVD beamforming matrices with singular values in decreasing order.
///
/// The sign/phase ambiguity of the decomposition is fixed by rotating each
/// right singular vector so its first entry of magnitude above 1e-12 is real
/// and positive, which keeps seeded tests deterministic across linear-algebra
/// backends.
#[derive(Debug, Clone)]
pub struct SvdBeamformer {
    u_s: DMatrix<Complex64>,
    v_s: DMatrix<Complex64>,
    singular_values: DVector<f64>,
}

impl SvdBeamformer {
    pub fn u_s(&self) -> &DMatrix<Complex64> {
        &self.u_s
    }

    pub fn v_s(&self) -> &DMatrix<Complex64> {
        &self.v_s
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    pub fn stream_count(&self) -> usize {
        self.singular_values.len()
    }

    /// Smallest retained singular value; zero-adjacent values flag a
    /// degenerate realization the caller should resample.
    pub fn min_singular_value(&self) -> f64 {
        self.singular_values[self.singular_values.len() - 1]
    }
}

/// Partition of the `S` subchannels into precoded and non-precoded sets.
///
/// Indices are 1-based subchannel numbers, matching the usual notation for
/// beamforming systems; both lists must be strictly increasing and together
/// cover `{1..S}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubchannelAssignment {
    b_p: Vec<usize>,
    b_n: Vec<usize>,
    s: usize,
}

impl SubchannelAssignment {
    pub fn new(s: usize, b_p: Vec<usize>) -> Result<Self> {
        if b_p.is_empty() || b_p.len() > s {
            return Err(Error::Dimension(format!(
                "precoded set size {} must be in 1..={s}",
                b_p.len()
            )));
        }
        let mut seen = vec![false; s + 1];
        for window in b_p.windows(2) {
            if window[0] >= window[1] {
                return Err(Error::IndexOutOfRange(
                    "b_p must be strictly increasing".into(),
                ));
            }
        }
        for &i in &b_p {
            if i == 0 || i > s {
                return Err(Error::IndexOutOfRange(format!(
                    "subchannel index {i} outside 1..={s}"
                )));
            }
            seen[i] = true;
        }
        let b_n: Vec<usize> = (1..=s).filter(|i| !seen[*i]).collect();
        Ok(Self { b_p, b_n, s })
    }

    /// Full precoding: `b_p = (1..=s)`.
    pub fn full(s: usize) -> Result<Self> {
        Self::new(s, (1..=s).collect())
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn p(&self) -> usize {
        self.b_p.len()
    }

    /// 1-based precoded subchannel indices, strictly increasing.
    pub fn b_p(&self) -> &[usize] {
        &self.b_p
    }

    /// 1-based non-precoded subchannel indices, strictly increasing.
    pub fn b_n(&self) -> &[usize] {
        &self.b_n
    }

    /// The S x S permutation `T` that routes entry `u` of `Theta x'` onto
    /// subchannel `b_p(u)` (resp. `b_n(u - P)` for the non-precoded tail).
    pub fn permutation(&self) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.s, self.s);
        for (u, &row) in self.b_p.iter().enumerate() {
            t[(row - 1, u)] = 1.0;
        }
        for (v, &row) in self.b_n.iter().enumerate() {
            t[(row - 1, self.p() + v)] = 1.0;
        }
        t
    }
}

/// Diagonal subchannel gains split into precoded and non-precoded blocks.
#[derive(Debug, Clone)]
pub struct GammaMatrix {
    gamma_p: Vec<f64>,
    gamma_n: Vec<f64>,
}

impl GammaMatrix {
    pub fn gamma_p(&self) -> &[f64] {
        &self.gamma_p
    }

    pub fn gamma_n(&self) -> &[f64] {
        &self.gamma_n
    }

    pub fn s(&self) -> usize {
        self.gamma_p.len() + self.gamma_n.len()
    }
}

/// Draws an `n_r x n_t` matrix of i.i.d. CN(0,1) entries, deterministic in the
/// seed.
pub fn generate_channel(n_r: usize, n_t: usize, seed: u64) -> Result<ChannelMatrix> {
    if n_r == 0 || n_t == 0 {
        return Err(Error::Dimension(format!(
            "channel dimensions must be nonzero, got {n_r}x{n_t}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = DMatrix::from_fn(n_r, n_t, |_, _| complex_gaussian(&mut rng, 1.0));
    Ok(ChannelMatrix { entries, seed })
}

/// One CN(0, variance) sample.
pub fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (variance * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sigma, im * sigma)
}

/// Computes the rank-`s` beamforming decomposition of `h`.
pub fn decompose(h: &ChannelMatrix, s: usize) -> Result<SvdBeamformer> {
    let max_s = h.n_rx().min(h.n_tx());
    if s == 0 || s > max_s {
        return Err(Error::Dimension(format!(
            "stream count {s} outside 1..={max_s}"
        )));
    }
    let svd = h.entries.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Degenerate("SVD returned no U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("SVD returned no V".into()))?;
    let sigma = svd.singular_values;

    // Decreasing order of singular values.
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());

    let mut u_s = DMatrix::zeros(h.n_rx(), s);
    let mut v_s = DMatrix::zeros(h.n_tx(), s);
    let mut vals = DVector::zeros(s);
    for (col, &src) in order.iter().take(s).enumerate() {
        let mut u_col: DVector<Complex64> = u.column(src).into();
        let mut v_col: DVector<Complex64> = v_t.row(src).adjoint();
        // Phase convention: first non-negligible entry of the right singular
        // vector made real positive; the same rotation applies to U so that
        // u_s v_s^H is unchanged.
        if let Some(k) = (0..v_col.len()).find(|&k| v_col[k].norm() > 1e-12) {
            let phase = v_col[k] / v_col[k].norm();
            let rot = phase.conj();
            for x in v_col.iter_mut() {
                *x *= rot;
            }
            for x in u_col.iter_mut() {
                *x *= rot;
            }
        }
        u_s.set_column(col, &u_col);
        v_s.set_column(col, &v_col);
        vals[col] = sigma[src];
    }
    Ok(SvdBeamformer {
        u_s,
        v_s,
        singular_values: vals,
    })
}

/// Selects the subchannel gains named by the assignment.
pub fn subchannel_system(
    bf: &SvdBeamformer,
    assign: &SubchannelAssignment,
) -> Result<GammaMatrix> {
    let s = bf.stream_count();
    if assign.s() != s {
        return Err(Error::Dimension(format!(
            "assignment covers {} subchannels, beamformer has {s}",
            assign.s()
        )));
    }
    let pick = |idx: &[usize]| -> Result<Vec<f64>> {
        idx.iter()
            .map(|&i| {
                if i == 0 || i > s {
                    Err(Error::IndexOutOfRange(format!(
                        "subchannel index {i} outside 1..={s}"
                    )))
                } else {
                    Ok(bf.singular_values[i - 1])
                }
            })
            .collect()
    };
    Ok(GammaMatrix {
        gamma_p: pick(assign.b_p())?,
        gamma_n: pick(assign.b_n())?,
    })
}

/// Received symbol vector in the diagonalized (subchannel-collected) ordering:
/// the first `P` entries are the precoded part, the tail the non-precoded one.
#[derive(Debug, Clone)]
pub struct ReceivedVector {
    r: DVector<Complex64>,
    p: usize,
}

impl ReceivedVector {
    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.r
    }

    pub fn precoded(&self) -> &[Complex64] {
        &self.r.as_slice()[..self.p]
    }

    pub fn nonprecoded(&self) -> &[Complex64] {
        &self.r.as_slice()[self.p..]
    }
}

/// One noisy pass through the diagonalized system `r = Gamma Theta x' + n`
/// with noise variance `noise_var` per complex entry.
pub fn transmit_and_receive(
    gamma: &GammaMatrix,
    precoder: &PrecoderConfig,
    x_prime: &[Complex64],
    noise_var: f64,
    seed: u64,
) -> Result<ReceivedVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    transmit_and_receive_with(gamma, precoder, x_prime, noise_var, &mut rng)
}

/// As [`transmit_and_receive`], drawing noise from a caller-owned stream so a
/// whole frame can share one stream.
pub fn transmit_and_receive_with<R: Rng>(
    gamma: &GammaMatrix,
    precoder: &PrecoderConfig,
    x_prime: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<ReceivedVector> {
    let s = gamma.s();
    if x_prime.len() != s {
        return Err(Error::Dimension(format!(
            "symbol vector length {} does not match S={s}",
            x_prime.len()
        )));
    }
    let precoded = precoder.apply(x_prime)?;
    let mut r = DVector::zeros(s);
    let p = gamma.gamma_p.len();
    for u in 0..p {
        r[u] = gamma.gamma_p[u] * precoded[u];
    }
    for v in 0..gamma.gamma_n.len() {
        r[p + v] = gamma.gamma_n[v] * precoded[p + v];
    }
    if noise_var > 0.0 {
        for u in 0..s {
            r[u] += complex_gaussian(rng, noise_var);
        }
    }
    Ok(ReceivedVector { r, p })
}

/// The full physical path `T^T U_S^H H (V_S T Theta x')`, used to cross-check
/// the diagonalized model.
pub fn receive_through_physical_path(
    h: &ChannelMatrix,
    bf: &SvdBeamformer,
    precoder: &PrecoderConfig,
    x_prime: &[Complex64],
) -> Result<DVector<Complex64>> {
    let routed = precoder.apply_with_permutation(x_prime)?;
    let tx = &bf.v_s * routed;
    let rx = bf.u_s.adjoint() * (h.entries() * tx);
    let t = precoder.assignment().permutation();
    let t_c = t.map(|x| Complex64::new(x, 0.0));
    Ok(t_c.transpose() * rx)
}
