//! Small shared linear-algebra helpers on dense complex matrices.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMat, CVec};

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.norm().max(1.0);
    (m - m.adjoint()).norm() <= tol * scale
}

/// Cholesky of a Hermitian positive-definite matrix.
pub fn herm_cholesky(e: &CMat) -> Result<Cholesky<Complex64, Dyn>> {
    Cholesky::new(e.clone())
        .ok_or_else(|| Error::Numerical("Cholesky failed: matrix not positive definite".into()))
}

/// log2 det of a Hermitian positive-definite matrix via Cholesky.
pub fn log2_det_hermitian_pd(k: &CMat) -> Result<f64> {
    let chol = herm_cholesky(k)?;
    let l = chol.l();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        acc += l[(i, i)].re.log2();
    }
    Ok(2.0 * acc)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Hermitian PSD square root via eigendecomposition. Small negative
/// eigenvalues (roundoff) are clamped to zero.
pub fn hermitian_sqrt(m: &CMat) -> Result<CMat> {
    if !is_hermitian(m, 1e-10) {
        return Err(Error::Domain("matrix is not Hermitian".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut d = CMat::zeros(m.nrows(), m.ncols());
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -1e-10 * scale.max(1e-300) {
            return Err(Error::Domain(format!(
                "matrix is not PSD: eigenvalue {lam}"
            )));
        }
        d[(i, i)] = Complex64::new(lam.max(0.0).sqrt(), 0.0);
    }
    let v = &eig.eigenvectors;
    Ok(v * d * v.adjoint())
}

/// Extends the orthonormal columns of `w1` to a full orthonormal basis and
/// returns the added columns. Deterministic (seeds from identity columns,
/// two Gram-Schmidt passes).
pub fn orthonormal_completion(w1: &CMat) -> CMat {
    let m = w1.nrows();
    let r = w1.ncols();
    let mut basis: Vec<CVec> = (0..r).map(|j| w1.column(j).into_owned()).collect();
    let mut extra: Vec<CVec> = Vec::with_capacity(m - r);
    let mut cand = 0usize;
    while basis.len() < m {
        assert!(cand < m, "orthonormal completion ran out of candidates");
        let mut v = CVec::zeros(m);
        v[cand] = Complex64::new(1.0, 0.0);
        cand += 1;
        for _pass in 0..2 {
            for b in &basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            v /= Complex64::new(n, 0.0);
            basis.push(v.clone());
            extra.push(v);
        }
    }
    CMat::from_columns(&extra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_identity_is_identity() {
        let i = CMat::identity(3, 3);
        let s = hermitian_sqrt(&i).unwrap();
        assert!((s - i).norm() < 1e-12);
    }

    #[test]
    fn completion_is_unitary() {
        let w1 = CMat::from_columns(&[CVec::from_vec(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
        ])]);
        let w2 = orthonormal_completion(&w1);
        let mut cols: Vec<CVec> = (0..1).map(|j| w1.column(j).into_owned()).collect();
        cols.extend((0..w2.ncols()).map(|j| w2.column(j).into_owned()));
        let q = CMat::from_columns(&cols);
        assert!((q.adjoint() * &q - CMat::identity(3, 3)).norm() < 1e-10);
    }
}
