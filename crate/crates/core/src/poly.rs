//! Real polynomial helpers used by the transfer-function layer.
//!
//! Polynomials are stored as coefficient vectors in descending powers,
//! `[c_n, ..., c_1, c_0]` for `c_n s^n + ... + c_1 s + c_0`. A vector is
//! always non-empty; the zero polynomial is `[0.0]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative tolerance used when stripping leading coefficients that are
/// numerically zero after arithmetic.
const LEADING_ZERO_REL_TOL: f64 = 1e-12;

pub(crate) fn trim_leading(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return vec![0.0];
    }
    let tol = scale * LEADING_ZERO_REL_TOL;
    let start = coeffs
        .iter()
        .position(|c| c.abs() > tol)
        .unwrap_or(coeffs.len() - 1);
    coeffs[start..].to_vec()
}

pub(crate) fn degree(coeffs: &[f64]) -> usize {
    coeffs.len() - 1
}

pub(crate) fn is_zero(coeffs: &[f64]) -> bool {
    coeffs.iter().all(|c| *c == 0.0)
}

pub(crate) fn scale(coeffs: &[f64], factor: f64) -> Vec<f64> {
    coeffs.iter().map(|c| c * factor).collect()
}

pub(crate) fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim_leading(&out)
}

/// `a - b`, aligning the constant terms.
pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, ai) in a.iter().rev().enumerate() {
        out[n - 1 - i] += ai;
    }
    for (i, bi) in b.iter().rev().enumerate() {
        out[n - 1 - i] -= bi;
    }
    trim_leading(&out)
}

/// Horner evaluation at a complex point.
pub(crate) fn eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
}

/// Roots via companion-matrix eigenvalues. Intended for the bounded degrees
/// (<= 10) that appear in plant catalogs and their compositions.
pub(crate) fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>, RootFindingError> {
    let c = trim_leading(coeffs);
    if is_zero(&c) {
        return Err(RootFindingError::ZeroPolynomial);
    }
    let n = degree(&c);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[0];
    // Companion matrix of the monic polynomial, first row holds the
    // negated coefficients.
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j + 1] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-14, 10_000)
        .ok_or(RootFindingError::SchurFailed { degree: n })?;
    let eigs = schur
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect::<Vec<Complex64>>();
    Ok(eigs)
}

/// Rebuild real coefficients from a conjugate-closed root multiset, scaled
/// by `lead`. Tiny imaginary residue from eigenvalue pairing is dropped.
pub(crate) fn from_roots(roots: &[Complex64], lead: f64) -> Vec<f64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs.iter().map(|c| c.re * lead).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RootFindingError {
    #[error("cannot take roots of the zero polynomial")]
    ZeroPolynomial,
    #[error("Schur iteration failed to converge for degree-{degree} polynomial")]
    SchurFailed { degree: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mul_and_sub_match_hand_algebra() {
        // (s + 1)(s + 2) = s^2 + 3s + 2
        assert_eq!(mul(&[1.0, 1.0], &[1.0, 2.0]), vec![1.0, 3.0, 2.0]);
        // (s^2 + 3s + 2) - (s + 2) = s^2 + 2s
        assert_eq!(sub(&[1.0, 3.0, 2.0], &[1.0, 2.0]), vec![1.0, 2.0, 0.0]);
        // exact cancellation collapses to the zero polynomial
        assert_eq!(sub(&[1.0, 1.0], &[1.0, 1.0]), vec![0.0]);
    }

    #[test]
    fn eval_horner() {
        // s^2 + 1 at s = j is 0
        let v = eval(&[1.0, 0.0, 1.0], Complex64::new(0.0, 1.0));
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn quadratic_roots() {
        // s^2 + 3s + 2 has roots -1, -2
        let mut rs = roots(&[1.0, 3.0, 2.0]).unwrap();
        rs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_relative_eq!(rs[0].re, -2.0, max_relative = 1e-10);
        assert_relative_eq!(rs[1].re, -1.0, max_relative = 1e-10);
        assert!(rs[0].im.abs() < 1e-10 && rs[1].im.abs() < 1e-10);

        // s^2 + 1 has roots +/- j
        let rs = roots(&[1.0, 0.0, 1.0]).unwrap();
        for r in rs {
            assert!(r.re.abs() < 1e-10);
            assert_relative_eq!(r.im.abs(), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn from_roots_round_trip() {
        let original = [2.0, 3.0, 4.0, 5.0];
        let rs = roots(&original).unwrap();
        let rebuilt = from_roots(&rs, original[0]);
        for (a, b) in original.iter().zip(rebuilt.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }
}
