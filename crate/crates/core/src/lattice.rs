//! The 2P-dimensional real lattice behind the precoded subsystem.
//!
//! The complex system `r = G~ x~ + n` over `P` symbols becomes a real system
//! of dimension `2P` with components interleaved per symbol:
//! `(Re x_0, Im x_0, Re x_1, Im x_1, ...)`. Each complex entry `a + bi` of
//! `G~` turns into the 2x2 block `[[a, -b], [b, a]]`, so consecutive column
//! pairs of the real `G` are exactly orthogonal with equal norms. After QR
//! factorization this forces `R[u, u+1] = 0` for every even `u` (0-based),
//! the structural zeros the reduced-complexity search exploits. The
//! factorization asserts those zeros numerically on every call rather than
//! assuming them, then snaps them to exact zeros.
//!
//! A check-table caches every product `R[u,v] * x` over the PAM alphabet.
//! Only products for the negative half of the alphabet are stored; the
//! positive half is recovered by sign flip, which is exact in floating point.
//!
//! ZF-DFE successive detection over the triangular system yields the Babai
//! point; its residual is a feasible squared search radius, so a sphere
//! search seeded with it can never come up empty.

use crate::error::{Error, Result};
use crate::sphere::OpCounters;
use crate::tx::constellation::PamAlphabet;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Tolerance on the structural zeros of `R`; exceeding it means the paired
/// component ordering was violated upstream.
pub const STRUCTURAL_ZERO_TOL: f64 = 1e-10;

/// Expands a complex matrix into its paired real form.
pub fn realify(g_tilde: &DMatrix<Complex64>) -> DMatrix<f64> {
    let p = g_tilde.nrows();
    let q = g_tilde.ncols();
    let mut g = DMatrix::zeros(2 * p, 2 * q);
    for u in 0..p {
        for v in 0..q {
            let e = g_tilde[(u, v)];
            g[(2 * u, 2 * v)] = e.re;
            g[(2 * u, 2 * v + 1)] = -e.im;
            g[(2 * u + 1, 2 * v)] = e.im;
            g[(2 * u + 1, 2 * v + 1)] = e.re;
        }
    }
    g
}

/// Interleaves a complex vector as `(Re r_0, Im r_0, Re r_1, ...)`.
pub fn realify_vec(r: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * r.len());
    for z in r {
        out.push(z.re);
        out.push(z.im);
    }
    out
}

/// QR factorization annotated with the measured structural residual and the
/// multiplication count of the factorization itself.
#[derive(Debug, Clone)]
pub struct QrPaired {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Largest `|R[u, u+1]|` over even `u` before snapping to zero.
    pub max_structural_residual: f64,
    /// Real multiplications spent by the factorization (preprocessing cost).
    pub multiplications: u64,
}

/// Householder QR with positive diagonal; fails on rank deficiency.
pub fn qr_paired(g: &DMatrix<f64>) -> Result<QrPaired> {
    let n = g.nrows();
    if n != g.ncols() || n == 0 || n % 2 != 0 {
        return Err(Error::Dimension(format!(
            "paired QR expects a nonempty square even-dimension matrix, got {}x{}",
            n,
            g.ncols()
        )));
    }
    let mut mults = 0u64;
    let mut r = g.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    let scale_ref = g.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

    let mut v = vec![0.0f64; n];
    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut norm_sq = 0.0;
        for i in k..n {
            let x = r[(i, k)];
            norm_sq += x * x;
            mults += 1;
        }
        let norm = norm_sq.sqrt();
        if norm <= scale_ref * 1e-13 {
            return Err(Error::Degenerate(format!(
                "rank-deficient real lattice matrix (pivot {k})"
            )));
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        let mut v_norm_sq = 0.0;
        for i in k..n {
            let vi = if i == k { r[(i, k)] - alpha } else { r[(i, k)] };
            v[i] = vi;
            v_norm_sq += vi * vi;
            mults += 1;
        }
        if v_norm_sq > 0.0 {
            let beta = 2.0 / v_norm_sq;
            // R <- (I - beta v v^T) R
            for j in k..n {
                let mut dot = 0.0;
                for i in k..n {
                    dot += v[i] * r[(i, j)];
                    mults += 1;
                }
                let f = beta * dot;
                mults += 1;
                for i in k..n {
                    r[(i, j)] -= f * v[i];
                    mults += 1;
                }
            }
            // Q <- Q (I - beta v v^T)
            for i in 0..n {
                let mut dot = 0.0;
                for j in k..n {
                    dot += q[(i, j)] * v[j];
                    mults += 1;
                }
                let f = beta * dot;
                mults += 1;
                for j in k..n {
                    q[(i, j)] -= f * v[j];
                    mults += 1;
                }
            }
        }
        for i in k + 1..n {
            r[(i, k)] = 0.0;
        }
    }

    // Positive diagonal convention.
    for u in 0..n {
        if r[(u, u)] < 0.0 {
            for j in u..n {
                r[(u, j)] = -r[(u, j)];
            }
            for i in 0..n {
                q[(i, u)] = -q[(i, u)];
            }
        }
    }

    // Assert, then snap, the structural zeros.
    let mut max_resid = 0.0f64;
    for u in (0..n - 1).step_by(2) {
        max_resid = max_resid.max(r[(u, u + 1)].abs());
    }
    let rel = if scale_ref > 0.0 { max_resid / scale_ref } else { max_resid };
    if rel > STRUCTURAL_ZERO_TOL {
        return Err(Error::Degenerate(format!(
            "structural zeros violated: max |R[u,u+1]| = {max_resid:.3e} (relative {rel:.3e}); \
             component ordering is not paired"
        )));
    }
    for u in (0..n - 1).step_by(2) {
        r[(u, u + 1)] = 0.0;
    }

    Ok(QrPaired {
        q,
        r,
        max_structural_residual: max_resid,
        multiplications: mults,
    })
}

/// Cached products `R[u,v] * x` for the negative half of the PAM alphabet.
///
/// Lookups for the positive half negate the mirrored entry, so every lookup
/// is bit-identical to the direct multiplication.
#[derive(Debug, Clone)]
pub struct CheckTable {
    dim: usize,
    half: usize,
    /// `entries[(u * dim + v) * half + (j - half)]`, populated only where
    /// `R[u,v] != 0` and `j` indexes the negative alphabet half.
    entries: Vec<f64>,
    stored: usize,
    /// Real multiplications spent building the table (preprocessing cost).
    multiplications: u64,
}

impl CheckTable {
    pub fn stored_entries(&self) -> usize {
        self.stored
    }

    pub fn multiplications(&self) -> u64 {
        self.multiplications
    }

    /// `R[u,v] * pam[j]`, exact for every alphabet index.
    #[inline]
    pub fn product(&self, u: usize, v: usize, j: usize) -> f64 {
        let base = (u * self.dim + v) * self.half;
        if j >= self.half {
            self.entries[base + (j - self.half)]
        } else {
            // mirror index has the same magnitude with opposite sign
            -self.entries[base + (self.dim_mirror(j) - self.half)]
        }
    }

    #[inline]
    fn dim_mirror(&self, j: usize) -> usize {
        2 * self.half - 1 - j
    }
}

/// Precomputes the check-table for the upper-triangular `r`.
pub fn build_check_table(r: &DMatrix<f64>, pam: &PamAlphabet) -> CheckTable {
    let dim = r.nrows();
    let half = pam.len() / 2;
    let mut entries = vec![0.0f64; dim * dim * half];
    let mut stored = 0usize;
    let mut mults = 0u64;
    for u in 0..dim {
        for v in u..dim {
            if r[(u, v)] == 0.0 {
                continue;
            }
            let base = (u * dim + v) * half;
            for j in half..pam.len() {
                entries[base + (j - half)] = r[(u, v)] * pam.value(j);
                mults += 1;
                stored += 1;
            }
        }
    }
    CheckTable {
        dim,
        half,
        entries,
        stored,
        multiplications: mults,
    }
}

/// The immutable per-realization decoding context: real system, QR factors,
/// PAM alphabet, slicer constants and (optionally) the check-table.
#[derive(Debug, Clone)]
pub struct RealLatticeSystem {
    dim: usize,
    g: DMatrix<f64>,
    q: DMatrix<f64>,
    /// Row-major flat `R` for the hot loops.
    r_flat: Vec<f64>,
    r: DMatrix<f64>,
    pam: PamAlphabet,
    /// `0.5 / (R[u,u] * scale)`: one multiplication turns a row residual into
    /// the fractional slicer index.
    slicer_gain: Vec<f64>,
    max_structural_residual: f64,
    qr_multiplications: u64,
    table: Option<CheckTable>,
}

impl RealLatticeSystem {
    /// Builds the real system for the precoded complex matrix
    /// `G~ = Gamma_p Theta_p`.
    pub fn from_complex(g_tilde: &DMatrix<Complex64>, pam: PamAlphabet) -> Result<Self> {
        let g = realify(g_tilde);
        Self::from_real(g, pam)
    }

    pub fn from_real(g: DMatrix<f64>, pam: PamAlphabet) -> Result<Self> {
        let qr = qr_paired(&g)?;
        let dim = g.nrows();
        let mut r_flat = vec![0.0; dim * dim];
        for u in 0..dim {
            for v in 0..dim {
                r_flat[u * dim + v] = qr.r[(u, v)];
            }
        }
        let slicer_gain = (0..dim)
            .map(|u| 0.5 / (qr.r[(u, u)] * pam.scale()))
            .collect();
        Ok(Self {
            dim,
            g,
            q: qr.q,
            r_flat,
            r: qr.r,
            pam,
            slicer_gain,
            max_structural_residual: qr.max_structural_residual,
            qr_multiplications: qr.multiplications,
            table: None,
        })
    }

    /// Builds and attaches the check-table.
    pub fn with_table(mut self) -> Self {
        self.table = Some(build_check_table(&self.r, &self.pam));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    #[inline]
    pub fn r_entry(&self, u: usize, v: usize) -> f64 {
        self.r_flat[u * self.dim + v]
    }

    pub fn pam(&self) -> &PamAlphabet {
        &self.pam
    }

    pub fn table(&self) -> Option<&CheckTable> {
        self.table.as_ref()
    }

    pub fn max_structural_residual(&self) -> f64 {
        self.max_structural_residual
    }

    pub fn qr_multiplications(&self) -> u64 {
        self.qr_multiplications
    }

    pub fn table_multiplications(&self) -> u64 {
        self.table.as_ref().map_or(0, |t| t.multiplications())
    }

    /// `Q^T r`, the triangular-domain received vector.
    pub fn apply_q_transpose(&self, r_p: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r_p.len(), self.dim);
        (0..self.dim)
            .map(|u| (0..self.dim).map(|i| self.q[(i, u)] * r_p[i]).sum())
            .collect()
    }

    /// Fractional slicer index for row `u` from the row residual `c`; costs
    /// one real multiplication.
    #[inline]
    pub fn slicer_fraction(&self, u: usize, c: f64) -> f64 {
        (self.pam.len() as f64 - 1.0) / 2.0 - c * self.slicer_gain[u]
    }

    /// `R[u,v] * pam[j]` through the table when attached and requested.
    #[inline]
    pub fn product(&self, use_table: bool, u: usize, v: usize, j: usize) -> f64 {
        match (&self.table, use_table) {
            (Some(t), true) => t.product(u, v, j),
            _ => self.r_flat[u * self.dim + v] * self.pam.value(j),
        }
    }
}

/// One bit constraint on the real lattice: component `l_hat`, PAM label bit
/// `i_hat`, hypothesized value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitConstraint {
    pub component: usize,
    pub pam_bit: usize,
    pub value: u8,
}

/// ZF-DFE output: the Babai point (as PAM indices) and its exact residual.
#[derive(Debug, Clone, PartialEq)]
pub struct BabaiResult {
    pub point: Vec<usize>,
    pub radius_sq: f64,
}

impl BabaiResult {
    pub fn point_values(&self, pam: &PamAlphabet) -> Vec<f64> {
        self.point.iter().map(|&j| pam.value(j)).collect()
    }
}

/// Successive detection from the top layer down, slicing against the full
/// alphabet except at the constrained component, which slices against
/// `chi_b^i`. Returns the detected point and `||r_breve - R x||^2` accumulated
/// top layer first (the same association order the tree search uses, so the
/// Babai leaf reproduces this radius bit for bit).
///
/// Multiplication accounting: with `use_table` the feedback and diagonal
/// products are table lookups, leaving one slicer multiplication and one
/// residual squaring per layer; without it every product is a counted
/// multiplication.
pub fn zf_dfe(
    r_breve: &[f64],
    sys: &RealLatticeSystem,
    constraint: BitConstraint,
    use_table: bool,
    counters: &mut OpCounters,
) -> BabaiResult {
    let n = sys.dim();
    debug_assert_eq!(r_breve.len(), n);
    let direct_products = !(use_table && sys.table().is_some());
    let mut point = vec![0usize; n];
    let mut radius_sq = 0.0;
    for u in (0..n).rev() {
        let mut acc = 0.0;
        for v in u + 1..n {
            acc += sys.product(!direct_products, u, v, point[v]);
        }
        if direct_products {
            counters.real_multiplications += (n - 1 - u) as u64;
        }
        let c = r_breve[u] - acc;
        let f = sys.slicer_fraction(u, c);
        counters.real_multiplications += 1;
        let j = if u == constraint.component {
            sys.pam()
                .nearest_in_subset_fractional(f, constraint.pam_bit, constraint.value)
        } else {
            sys.pam().nearest_index_fractional(f)
        };
        point[u] = j;
        let e = c - sys.product(!direct_products, u, u, j);
        if direct_products {
            counters.real_multiplications += 1;
        }
        radius_sq += e * e;
        counters.real_multiplications += 1;
    }
    BabaiResult { point, radius_sq }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{decompose, generate_channel, subchannel_system, SubchannelAssignment};
    use crate::sphere::OpCounters;
    use crate::tx::precoder::default_theta;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_g_tilde(p: usize, seed: u64) -> DMatrix<Complex64> {
        let h = generate_channel(p, p, seed).unwrap();
        let bf = decompose(&h, p).unwrap();
        let assign = SubchannelAssignment::full(p).unwrap();
        let gamma = subchannel_system(&bf, &assign).unwrap();
        let theta = default_theta(p).unwrap();
        let mut g = theta;
        for u in 0..p {
            for v in 0..p {
                g[(u, v)] *= gamma.gamma_p()[u];
            }
        }
        g
    }

    #[test]
    fn scalar_identity_realifies_to_i2() {
        let g_tilde = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let g = realify(&g_tilde);
        assert_eq!(g, DMatrix::identity(2, 2));
        let r = realify_vec(&[Complex64::new(1.0, 2.0)]);
        assert_eq!(r, vec![1.0, 2.0]);
    }

    #[test]
    fn purely_real_matrix_has_no_cross_coupling() {
        let g_tilde = DMatrix::from_fn(2, 2, |i, j| Complex64::new((i + 2 * j) as f64 + 1.0, 0.0));
        let g = realify(&g_tilde);
        for u in 0..2 {
            for v in 0..2 {
                assert_eq!(g[(2 * u, 2 * v + 1)], 0.0);
                assert_eq!(g[(2 * u + 1, 2 * v)], 0.0);
            }
        }
    }

    #[test]
    fn realify_preserves_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..100 {
            let g_tilde = random_g_tilde(2, seed);
            let g = realify(&g_tilde);
            let x_tilde: Vec<Complex64> = (0..2)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let r_tilde = &g_tilde * DVector::from_column_slice(&x_tilde);
            let x = realify_vec(&x_tilde);
            let gx = &g * DVector::from_column_slice(&x);
            let direct = realify_vec(r_tilde.as_slice());
            let mut err = 0.0f64;
            for i in 0..4 {
                err = err.max((gx[i] - direct[i]).abs());
            }
            assert!(err < 1e-12, "seed {seed}: component mismatch {err}");
        }
    }

    #[test]
    fn qr_of_scalar_gain_is_diagonal() {
        let g_tilde = DMatrix::from_element(1, 1, Complex64::new(3.0, 0.0));
        let g = realify(&g_tilde);
        let qr = qr_paired(&g).unwrap();
        assert_abs_diff_eq!(qr.r[(0, 0)], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(qr.r[(1, 1)], 3.0, epsilon = 1e-12);
        assert_eq!(qr.r[(0, 1)], 0.0);
    }

    #[test]
    fn qr_structural_zeros_and_reconstruction_over_random_instances() {
        for seed in 0..1000 {
            let g_tilde = random_g_tilde(2, seed);
            let g = realify(&g_tilde);
            let qr = qr_paired(&g).unwrap();
            assert!(
                qr.max_structural_residual < 1e-10,
                "seed {seed}: residual {}",
                qr.max_structural_residual
            );
            let recon = &qr.q * &qr.r;
            let mut err = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    err = err.max((recon[(i, j)] - g[(i, j)]).abs());
                }
            }
            assert!(err < 1e-10, "seed {seed}: reconstruction error {err}");
            // orthogonality
            let qtq = qr.q.transpose() * &qr.q;
            for i in 0..4 {
                for j in 0..4 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq[(i, j)] - expect).abs() < 1e-10);
                }
            }
            // positive diagonal
            for u in 0..4 {
                assert!(qr.r[(u, u)] > 0.0);
            }
        }
    }

    #[test]
    fn qr_rejects_rank_deficiency() {
        let g = DMatrix::zeros(4, 4);
        assert!(qr_paired(&g).is_err());
    }

    #[test]
    fn check_table_counts_and_exactness() {
        let pam = PamAlphabet::new(1).unwrap(); // 4-QAM axis, |chi| = 2
        let g_tilde = random_g_tilde(2, 3);
        let sys = RealLatticeSystem::from_complex(&g_tilde, pam.clone())
            .unwrap()
            .with_table();
        let table = sys.table().unwrap();
        // 2P(2P+1)/2 = 10 upper-triangular entries minus P = 2 structural zeros
        assert_eq!(table.stored_entries(), 8);
        for u in 0..4 {
            for v in u..4 {
                for j in 0..pam.len() {
                    let direct = sys.r()[(u, v)] * pam.value(j);
                    assert_eq!(
                        table.product(u, v, j),
                        direct,
                        "entry ({u},{v}) index {j} not bit-identical"
                    );
                }
            }
        }
    }

    #[test]
    fn check_table_sign_symmetry() {
        let pam = PamAlphabet::new(2).unwrap();
        let g_tilde = random_g_tilde(2, 9);
        let sys = RealLatticeSystem::from_complex(&g_tilde, pam.clone())
            .unwrap()
            .with_table();
        let table = sys.table().unwrap();
        for u in 0..4 {
            for v in u..4 {
                for j in 0..2 {
                    // mirror of index j is 3 - j
                    assert_eq!(table.product(u, v, j), -table.product(u, v, 3 - j));
                }
            }
        }
    }

    #[test]
    fn q_transpose_preserves_residual_norms() {
        let pam = PamAlphabet::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..50 {
            let g_tilde = random_g_tilde(2, 100 + seed);
            let sys = RealLatticeSystem::from_complex(&g_tilde, pam.clone()).unwrap();
            let r_p: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let r_breve = sys.apply_q_transpose(&r_p);
            for _ in 0..20 {
                let x: Vec<usize> = (0..4).map(|_| rng.gen_range(0..pam.len())).collect();
                let mut direct = 0.0;
                let mut triangular = 0.0;
                for u in 0..4 {
                    let gx: f64 = (0..4).map(|v| sys.g()[(u, v)] * pam.value(x[v])).sum();
                    direct += (r_p[u] - gx) * (r_p[u] - gx);
                    let rx: f64 = (u..4).map(|v| sys.r_entry(u, v) * pam.value(x[v])).sum();
                    triangular += (r_breve[u] - rx) * (r_breve[u] - rx);
                }
                assert!((direct - triangular).abs() < 1e-10 * direct.max(1.0));
            }
        }
    }

    /// The canonical residual: feedback sum first, diagonal term last, layers
    /// accumulated top down — the association order shared by ZF-DFE and the
    /// tree search.
    fn residual_for(sys: &RealLatticeSystem, r_breve: &[f64], point: &[usize]) -> f64 {
        let n = sys.dim();
        let mut total = 0.0;
        for u in (0..n).rev() {
            let mut acc = 0.0;
            for v in u + 1..n {
                acc += sys.r_entry(u, v) * sys.pam().value(point[v]);
            }
            let e = (r_breve[u] - acc) - sys.r_entry(u, u) * sys.pam().value(point[u]);
            total += e * e;
        }
        total
    }

    #[test]
    fn zf_dfe_recovers_noiseless_point_with_matching_constraint() {
        let pam = PamAlphabet::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for seed in 0..50 {
            let g_tilde = random_g_tilde(2, 200 + seed);
            let sys = RealLatticeSystem::from_complex(&g_tilde, pam.clone()).unwrap();
            let truth: Vec<usize> = (0..4).map(|_| rng.gen_range(0..pam.len())).collect();
            let n = sys.dim();
            let mut r_breve = vec![0.0; n];
            for u in 0..n {
                r_breve[u] = (u..n).map(|v| sys.r_entry(u, v) * pam.value(truth[v])).sum();
            }
            let component = rng.gen_range(0..n);
            let pam_bit = rng.gen_range(0..pam.bits());
            let matching = sys.pam().label_bit(truth[component], pam_bit);
            let mut counters = OpCounters::default();
            let res = zf_dfe(
                &r_breve,
                &sys,
                BitConstraint {
                    component,
                    pam_bit,
                    value: matching,
                },
                false,
                &mut counters,
            );
            assert_eq!(res.point, truth, "seed {seed}");
            // association order of the construction differs from the
            // detector's, so "zero" means a few squared epsilons
            assert!(res.radius_sq < 1e-24, "seed {seed}: {}", res.radius_sq);

            // with the opposite constraint the detected point must differ at
            // the constrained component and leave a positive residual
            let res_bad = zf_dfe(
                &r_breve,
                &sys,
                BitConstraint {
                    component,
                    pam_bit,
                    value: 1 - matching,
                },
                false,
                &mut counters,
            );
            assert_ne!(res_bad.point[component], truth[component]);
            assert!(res_bad.radius_sq > 0.0);
        }
    }

    #[test]
    fn zf_dfe_residual_matches_direct_recomputation_and_table_is_transparent() {
        let pam = PamAlphabet::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for seed in 0..30 {
            let g_tilde = random_g_tilde(2, 300 + seed);
            let sys = RealLatticeSystem::from_complex(&g_tilde, pam.clone())
                .unwrap()
                .with_table();
            let r_breve: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
            let constraint = BitConstraint {
                component: rng.gen_range(0..4),
                pam_bit: rng.gen_range(0..3),
                value: rng.gen_range(0..2),
            };
            let mut c1 = OpCounters::default();
            let direct = zf_dfe(&r_breve, &sys, constraint, false, &mut c1);
            let mut c2 = OpCounters::default();
            let tabled = zf_dfe(&r_breve, &sys, constraint, true, &mut c2);
            assert_eq!(direct.point, tabled.point);
            assert_eq!(direct.radius_sq, tabled.radius_sq, "bit-identical residual");
            assert!(c2.real_multiplications < c1.real_multiplications);
            // residual is exactly ||r - R x||^2 in the shared association order
            assert_eq!(direct.radius_sq, residual_for(&sys, &r_breve, &direct.point));
        }
    }

    #[test]
    fn zf_dfe_multiplication_tally() {
        let pam = PamAlphabet::new(2).unwrap();
        let g_tilde = random_g_tilde(2, 77);
        let sys = RealLatticeSystem::from_complex(&g_tilde, pam.clone())
            .unwrap()
            .with_table();
        let r_breve = vec![0.1, -0.2, 0.3, -0.4];
        let constraint = BitConstraint {
            component: 0,
            pam_bit: 0,
            value: 0,
        };
        let n = 4u64;
        let mut c = OpCounters::default();
        zf_dfe(&r_breve, &sys, constraint, false, &mut c);
        // per layer u (0-based): (n-1-u) feedback + 1 slicer + 1 diagonal + 1 squaring
        let direct_expect: u64 = (0..n).map(|u| (n - 1 - u) + 3).sum();
        assert_eq!(c.real_multiplications, direct_expect);

        let mut c = OpCounters::default();
        zf_dfe(&r_breve, &sys, constraint, true, &mut c);
        // per layer: 1 slicer + 1 squaring
        assert_eq!(c.real_multiplications, 2 * n);
    }

    #[test]
    fn babai_radius_is_feasible_but_not_better_than_brute_force() {
        let pam = PamAlphabet::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for seed in 0..100 {
            let g_tilde = random_g_tilde(2, 400 + seed);
            let sys = RealLatticeSystem::from_complex(&g_tilde, pam.clone()).unwrap();
            let r_breve: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let constraint = BitConstraint {
                component: rng.gen_range(0..4),
                pam_bit: 0,
                value: rng.gen_range(0..2),
            };
            let mut c = OpCounters::default();
            let babai = zf_dfe(&r_breve, &sys, constraint, false, &mut c);
            // brute force over the constrained set
            let mut best = f64::INFINITY;
            for cand in 0..(1usize << 4) {
                let point: Vec<usize> = (0..4).map(|u| (cand >> u) & 1).collect();
                if sys.pam().label_bit(point[constraint.component], constraint.pam_bit)
                    != constraint.value
                {
                    continue;
                }
                best = best.min(residual_for(&sys, &r_breve, &point));
            }
            assert!(
                babai.radius_sq >= best - 1e-12,
                "seed {seed}: babai {} < brute {best}",
                babai.radius_sq
            );
            // feasibility: the Babai point satisfies its own constraint
            assert_eq!(
                sys.pam()
                    .label_bit(babai.point[constraint.component], constraint.pam_bit),
                constraint.value
            );
        }
    }
}
