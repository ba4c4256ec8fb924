//! Unitary constellation precoding.
//!
//! The precoder `Theta` is block diagonal: a `P x P` unitary `Theta_p` acting
//! on the first `P` modulated symbols and the identity on the remaining
//! `S - P`. A permutation `T` then routes the precoded entries onto their
//! assigned subchannels.
//!
//! Built-in rotations (all unitary by construction, asserted at build):
//! - `P = 1`: the scalar identity.
//! - `P = 2`: `(1/sqrt(2)) [[1, e^{j pi/4}], [1, -e^{j pi/4}]]`.
//! - `P = 4`: the Vandermonde unitary `(1/2) [alpha_v^u]` over the odd 8th
//!   roots of unity `alpha_v = e^{j pi (2v+1)/4}`.
//!
//! Arbitrary matrices load from a plain-text file: one row per line,
//! whitespace-separated `re+imj` tokens (for example `0.7071-0.7071j`).

use crate::channel::SubchannelAssignment;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::path::Path;

const UNITARITY_TOL: f64 = 1e-12;

/// The unitary precoder together with its subchannel assignment.
#[derive(Debug, Clone)]
pub struct PrecoderConfig {
    theta_p: DMatrix<Complex64>,
    s: usize,
    assignment: SubchannelAssignment,
}

impl PrecoderConfig {
    /// Wraps an explicit `Theta_p`; fails unless it is square, sized to the
    /// assignment's precoded set, and unitary within 1e-12.
    pub fn new(
        theta_p: DMatrix<Complex64>,
        s: usize,
        assignment: SubchannelAssignment,
    ) -> Result<Self> {
        let p = assignment.p();
        if assignment.s() != s {
            return Err(Error::Dimension(format!(
                "assignment covers {} subchannels, expected {s}",
                assignment.s()
            )));
        }
        if theta_p.nrows() != p || theta_p.ncols() != p {
            return Err(Error::Dimension(format!(
                "precoder is {}x{}, expected {p}x{p}",
                theta_p.nrows(),
                theta_p.ncols()
            )));
        }
        let gram = theta_p.adjoint() * &theta_p;
        for i in 0..p {
            for j in 0..p {
                let expect = if i == j { 1.0 } else { 0.0 };
                let err = (gram[(i, j)] - Complex64::new(expect, 0.0)).norm();
                if err > UNITARITY_TOL {
                    return Err(Error::Degenerate(format!(
                        "precoder is not unitary: |(Theta^H Theta - I)[{i},{j}]| = {err:.3e}"
                    )));
                }
            }
        }
        Ok(Self {
            theta_p,
            s,
            assignment,
        })
    }

    /// The identity precoder (`Theta_p = I_P`).
    pub fn identity(s: usize, assignment: SubchannelAssignment) -> Result<Self> {
        let p = assignment.p();
        Self::new(DMatrix::identity(p, p), s, assignment)
    }

    /// The built-in rotation for `p` in {1, 2, 4}.
    pub fn default_rotation(p: usize, s: usize, assignment: SubchannelAssignment) -> Result<Self> {
        if assignment.p() != p {
            return Err(Error::Dimension(format!(
                "assignment has {} precoded subchannels, expected {p}",
                assignment.p()
            )));
        }
        let theta_p = default_theta(p)?;
        Self::new(theta_p, s, assignment)
    }

    /// Loads `Theta_p` from a plain-text matrix file.
    pub fn from_matrix_file(
        path: &Path,
        s: usize,
        assignment: SubchannelAssignment,
    ) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let theta_p = parse_complex_matrix(&text, &path.display().to_string())?;
        Self::new(theta_p, s, assignment)
    }

    pub fn theta_p(&self) -> &DMatrix<Complex64> {
        &self.theta_p
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn p(&self) -> usize {
        self.assignment.p()
    }

    pub fn assignment(&self) -> &SubchannelAssignment {
        &self.assignment
    }

    /// The full `S x S` block-diagonal `Theta`.
    pub fn full_theta(&self) -> DMatrix<Complex64> {
        let p = self.p();
        let mut theta = DMatrix::identity(self.s, self.s);
        theta.view_mut((0, 0), (p, p)).copy_from(&self.theta_p);
        theta
    }

    /// `Theta x'`: precodes the first `P` entries, passes the rest through.
    pub fn apply(&self, x_prime: &[Complex64]) -> Result<Vec<Complex64>> {
        let p = self.p();
        if x_prime.len() != self.s {
            return Err(Error::Dimension(format!(
                "symbol vector length {} does not match S={}",
                x_prime.len(),
                self.s
            )));
        }
        let head = DVector::from_column_slice(&x_prime[..p]);
        let precoded = &self.theta_p * head;
        let mut out = Vec::with_capacity(self.s);
        out.extend_from_slice(precoded.as_slice());
        out.extend_from_slice(&x_prime[p..]);
        Ok(out)
    }

    /// `T Theta x'`: the transmitted vector in physical subchannel order.
    pub fn apply_with_permutation(&self, x_prime: &[Complex64]) -> Result<DVector<Complex64>> {
        let precoded = self.apply(x_prime)?;
        let mut out = DVector::zeros(self.s);
        for (u, &sub) in self.assignment.b_p().iter().enumerate() {
            out[sub - 1] = precoded[u];
        }
        for (v, &sub) in self.assignment.b_n().iter().enumerate() {
            out[sub - 1] = precoded[self.p() + v];
        }
        Ok(out)
    }
}

/// The built-in `P x P` rotation matrix.
pub fn default_theta(p: usize) -> Result<DMatrix<Complex64>> {
    match p {
        1 => Ok(DMatrix::identity(1, 1)),
        2 => {
            let inv_sqrt2 = 1.0 / 2f64.sqrt();
            let e = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(inv_sqrt2, 0.0),
                    e * inv_sqrt2,
                    Complex64::new(inv_sqrt2, 0.0),
                    -e * inv_sqrt2,
                ],
            ))
        }
        4 => {
            let mut theta = DMatrix::zeros(4, 4);
            for u in 0..4 {
                for v in 0..4 {
                    let alpha = Complex64::from_polar(
                        1.0,
                        std::f64::consts::PI * (2.0 * v as f64 + 1.0) / 4.0,
                    );
                    theta[(u, v)] = alpha.powu(u as u32) * 0.5;
                }
            }
            Ok(theta)
        }
        _ => Err(Error::Dimension(format!(
            "no built-in precoder for P={p}; supply a matrix file"
        ))),
    }
}

/// Parses rows of whitespace-separated `re+imj` tokens into a square matrix.
pub fn parse_complex_matrix(text: &str, context: &str) -> Result<DMatrix<Complex64>> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for token in line.split_whitespace() {
            row.push(parse_complex_token(token).ok_or_else(|| Error::Parse {
                context: context.to_string(),
                message: format!("line {}: bad complex token `{token}`", lineno + 1),
            })?);
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse {
            context: context.to_string(),
            message: format!("expected a nonempty square matrix, got {n} rows"),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Accepts `a+bj`, `a-bj`, bare reals `a`, and pure imaginaries `bj`.
fn parse_complex_token(token: &str) -> Option<Complex64> {
    let t = token.trim();
    if let Some(imag_part) = t.strip_suffix('j') {
        // Split at the last +/- that is not an exponent sign and not leading.
        let bytes = imag_part.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = imag_part[..i].parse().ok()?;
                let im_str = &imag_part[i..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().ok()?
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im: f64 = imag_part.parse().ok()?;
                Some(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().ok()?;
        Some(Complex64::new(re, 0.0))
    }
}
