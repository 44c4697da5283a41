//! Small dense complex linear algebra helpers.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64;

pub type CMat<const N: usize> = SMatrix<Complex64, N, N>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigenvalues of a complex square matrix via the Schur decomposition.
pub fn eigenvalues<const N: usize>(m: &CMat<N>) -> Result<Vec<Complex64>> {
    eigenvalues_dyn(&to_dyn(m))
}

pub fn to_dyn<const N: usize>(m: &CMat<N>) -> DMatrix<Complex64> {
    DMatrix::from_iterator(N, N, m.iter().copied())
}

pub fn eigenvalues_dyn(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Integrator("Schur decomposition did not converge".into()))
}

/// Unit right singular vector for the smallest singular value, together
/// with that singular value relative to the largest.
pub fn null_vector<const N: usize>(m: &CMat<N>) -> (SVector<Complex64, N>, f64) {
    let svd = to_dyn(m).svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let (mut j, mut smin) = (0, f64::INFINITY);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < smin {
            smin = *s;
            j = i;
        }
    }
    let smax = svd.singular_values.max();
    let v = SVector::<Complex64, N>::from_iterator(vt.row(j).iter().map(|z| z.conj()));
    (v, if smax > 0.0 { smin / smax } else { 0.0 })
}

/// Right eigenvector of `m` for eigenvalue `mu`.
pub fn right_eigenvector<const N: usize>(m: &CMat<N>, mu: Complex64) -> SVector<Complex64, N> {
    let shifted = m - CMat::<N>::identity() * mu;
    null_vector(&shifted).0
}

/// Left eigenvector `l` with `l^T m = mu l^T` (plain transpose).
pub fn left_eigenvector<const N: usize>(m: &CMat<N>, mu: Complex64) -> SVector<Complex64, N> {
    let shifted = m.transpose() - CMat::<N>::identity() * mu;
    null_vector(&shifted).0
}

pub fn inverse<const N: usize>(m: &CMat<N>) -> Result<CMat<N>> {
    let d = to_dyn(m)
        .try_inverse()
        .ok_or_else(|| Error::SingularJacobian("matrix inversion failed".into()))?;
    Ok(CMat::<N>::from_iterator(d.iter().copied()))
}

/// Solves `a x - x b = rhs` for `x` (shapes p x p, q x q, p x q) through the
/// Kronecker formulation. Fails when the spectra of `a` and `b` touch.
pub fn solve_sylvester(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    rhs: &DMatrix<Complex64>,
) -> Option<DMatrix<Complex64>> {
    let p = a.nrows();
    let q = b.nrows();
    let n = p * q;
    // Column-major vec: vec(a x) = (I_q kron a) vec x, vec(x b) = (b^T kron I_p) vec x.
    let mut k = DMatrix::<Complex64>::zeros(n, n);
    for col in 0..q {
        for i in 0..p {
            for j in 0..p {
                k[(col * p + i, col * p + j)] += a[(i, j)];
            }
        }
    }
    for r in 0..q {
        for s in 0..q {
            let bsr = b[(s, r)];
            if bsr == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..p {
                k[(r * p + i, s * p + i)] -= bsr;
            }
        }
    }
    let v = DVector::from_iterator(n, rhs.iter().copied());
    let lu = k.lu();
    let x = lu.solve(&v)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(DMatrix::from_iterator(p, q, x.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_and_null_vectors() {
        let m = CMat::<3>::new(
            c(2.0, 0.0),
            c(1.0, 1.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(-1.0, 0.5),
            c(3.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.5, -2.0),
        );
        let ev = eigenvalues(&m).unwrap();
        for mu in [c(2.0, 0.0), c(-1.0, 0.5), c(0.5, -2.0)] {
            assert!(ev.iter().any(|e| (e - mu).norm() < 1e-12));
            let r = right_eigenvector(&m, mu);
            assert!((m * r - r * mu).norm() < 1e-12);
            let l = left_eigenvector(&m, mu);
            assert!((l.transpose() * m - l.transpose() * mu).norm() < 1e-12);
        }
    }

    #[test]
    fn sylvester_residual() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(3.0, 1.0)]);
        let b = DMatrix::from_row_slice(1, 1, &[c(-1.0, 0.0)]);
        let rhs = DMatrix::from_row_slice(2, 1, &[c(1.0, 2.0), c(-0.5, 0.0)]);
        let x = solve_sylvester(&a, &b, &rhs).unwrap();
        assert!((&a * &x - &x * &b - rhs).norm() < 1e-13);
    }
}
