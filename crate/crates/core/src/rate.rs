//! Achievable rates, the gamma scalars, and the rank-1 determinant
//! expansion det(I + BB^H) = det(I + AA^H)(1 + Delta).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm_cholesky, hermitian_sqrt, log2_det_hermitian_pd};
use crate::txopt::TxCovariance;
use crate::{CMat, CVec};

/// The scalars of the determinant expansion for B = A + alpha e^{j theta} f g^H.
#[derive(Debug, Clone, Copy)]
pub struct GammaTriple {
    /// f^H (I + A A^H)^{-1} f, nonnegative.
    pub gamma1: f64,
    /// g^H A^H (I + A A^H)^{-1} A g, in [0, ||g||^2].
    pub gamma2: f64,
    /// g^H A^H (I + A A^H)^{-1} f.
    pub gamma3: Complex64,
    pub g_norm_sq: f64,
}

impl GammaTriple {
    /// Z = |gamma3|^2 + gamma1 (||g||^2 - gamma2), strictly positive whenever
    /// f and g are nonzero.
    pub fn z(&self) -> f64 {
        self.gamma3.norm_sqr() + self.gamma1 * (self.g_norm_sq - self.gamma2)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RateReport {
    pub rate_bits: f64,
    pub delta: f64,
    pub base_rate_bits: f64,
}

/// log2 det(I + H R H^H / sigma^2) for a raw covariance matrix.
pub(crate) fn rate_raw(h: &CMat, r_xx: &CMat, sigma_sq: f64) -> Result<f64> {
    assert!(sigma_sq > 0.0, "noise power must be > 0");
    if h.ncols() != r_xx.nrows() {
        return Err(Error::Dimension(format!(
            "channel is {}x{} but covariance is {}x{}",
            h.nrows(),
            h.ncols(),
            r_xx.nrows(),
            r_xx.ncols()
        )));
    }
    let n_r = h.nrows();
    let k = CMat::identity(n_r, n_r) + h * r_xx * h.adjoint() / Complex64::new(sigma_sq, 0.0);
    log2_det_hermitian_pd(&k)
}

/// Achievable rate log2 det(I + H R_xx H^H / sigma^2) in bits/s/Hz.
pub fn achievable_rate(h: &CMat, r_xx: &TxCovariance, sigma_sq: f64) -> Result<f64> {
    rate_raw(h, r_xx.matrix(), sigma_sq)
}

/// The gamma scalars of the expansion, via a Hermitian positive-definite
/// solve with E = I + A A^H (no explicit inverse).
pub fn gammas(a: &CMat, f: &CVec, g: &CVec) -> Result<GammaTriple> {
    let (n, m) = (a.nrows(), a.ncols());
    if f.len() != n || g.len() != m {
        return Err(Error::Dimension(format!(
            "gammas: A is {n}x{m}, f has length {}, g has length {}",
            f.len(),
            g.len()
        )));
    }
    let e = CMat::identity(n, n) + a * a.adjoint();
    let chol = herm_cholesky(&e)?;
    let ef = chol.solve(f);
    let ag: CVec = a * g;
    let eag = chol.solve(&ag);
    let gamma1 = f.dotc(&ef).re;
    let gamma2 = ag.dotc(&eag).re;
    let gamma3 = ag.dotc(&ef);
    Ok(GammaTriple {
        gamma1,
        gamma2,
        gamma3,
        g_norm_sq: g.norm_squared(),
    })
}

/// gammas under the covariance-absorbing substitution of the rate problem:
/// A = H_d R^{1/2}/sigma, g = R^{1/2} g_d / sigma, f = f_a.
pub fn prop2_gammas(
    h_d: &CMat,
    r_xx: &TxCovariance,
    sigma_sq: f64,
    f_a: &CVec,
    g_d: &CVec,
) -> Result<GammaTriple> {
    let sigma = sigma_sq.sqrt();
    let rs = hermitian_sqrt(r_xx.matrix())?;
    let a = h_d * &rs / Complex64::new(sigma, 0.0);
    let g = &rs * g_d / Complex64::new(sigma, 0.0);
    gammas(&a, f_a, &g)
}

/// Delta = Z alpha^2 + 2 alpha Re(e^{j theta} gamma3); returns (Delta, Z).
pub fn delta_expansion(gt: &GammaTriple, alpha: f64, theta: f64) -> (f64, f64) {
    let z = gt.z();
    let delta = z * alpha * alpha
        + 2.0 * alpha * (Complex64::from_polar(1.0, theta) * gt.gamma3).re;
    (delta, z)
}

/// Rate of the perturbed channel H_d + alpha e^{j theta} f_a g_d^H computed
/// through the determinant expansion rather than the assembled channel.
pub fn rate_via_expansion(
    h_d: &CMat,
    r_xx: &TxCovariance,
    sigma_sq: f64,
    f_a: &CVec,
    g_d: &CVec,
    alpha: f64,
    theta: f64,
) -> Result<RateReport> {
    let gt = prop2_gammas(h_d, r_xx, sigma_sq, f_a, g_d)?;
    let (delta, _z) = delta_expansion(&gt, alpha, theta);
    let base_rate_bits = achievable_rate(h_d, r_xx, sigma_sq)?;
    Ok(RateReport {
        rate_bits: base_rate_bits + (1.0 + delta).log2(),
        delta,
        base_rate_bits,
    })
}

/// Rate improvement of the optimal BD-RIS over the no-RIS link:
/// log2(1 + ||f_d||^2 ||g_a||^2 Z + 2 ||f_d|| ||g_a|| |gamma3|).
pub fn bdris_rate_gain(f_d_norm: f64, g_a_norm: f64, gt: &GammaTriple) -> f64 {
    let a = f_d_norm * g_a_norm;
    (1.0 + a * a * gt.z() + 2.0 * a * gt.gamma3.norm()).log2()
}
