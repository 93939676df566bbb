//! Scattering-matrix construction: closed-form optimal fully-connected
//! BD-RIS via a rank-2 Takagi factorization, diagonal RIS, group-connected
//! BD-RIS, the lossy rank-2 variant, and random feasible baselines.

use nalgebra::{SymmetricEigen, QR};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::linalg::orthonormal_completion;
use crate::txopt::TxCovariance;
use crate::{CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    FullyConnected,
    GroupConnected(usize),
    Diagonal,
    LossyRank2,
    Random,
}

#[derive(Debug, Clone)]
pub struct ScatteringMatrix {
    pub entries: CMat,
    pub architecture: Architecture,
}

impl ScatteringMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Frobenius asymmetry ||Theta - Theta^T||_F.
    pub fn asymmetry(&self) -> f64 {
        (&self.entries - self.entries.transpose()).norm()
    }

    /// Frobenius distance of Theta^H Theta from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let m = self.dim();
        (self.entries.adjoint() * &self.entries - CMat::identity(m, m)).norm()
    }
}

/// Choice of the arbitrary unitary on the null subspace in the optimal
/// BD-RIS. `Zero` yields the lossy rank-2 matrix.
#[derive(Debug, Clone, Copy)]
pub enum QrotMode {
    Identity,
    Random(u64),
    Zero,
}

#[derive(Debug, Clone, Copy)]
pub struct CouplingResult {
    pub alpha: f64,
    pub theta: f64,
}

/// Modulus and phase of f_d^H Theta g_a.
pub fn coupling_of(theta_m: &ScatteringMatrix, f_d: &CVec, g_a: &CVec) -> Result<CouplingResult> {
    let m = theta_m.dim();
    if f_d.len() != m || g_a.len() != m {
        return Err(Error::Dimension(format!(
            "coupling_of: vectors of length {}/{} against {m}x{m} matrix",
            f_d.len(),
            g_a.len()
        )));
    }
    let c = (f_d.adjoint() * &theta_m.entries * g_a)[(0, 0)];
    Ok(CouplingResult {
        alpha: c.norm(),
        theta: if c.norm() > 0.0 { c.arg() } else { 0.0 },
    })
}

/// Optimal common phase: -angle of g_d^H R_xx H_d^H (I + H_d R_xx H_d^H / s2)^{-1} f_a,
/// i.e. -angle(gamma3) under the covariance-absorbing substitution. Returns 0
/// when gamma3 vanishes (any phase is then optimal).
pub fn optimal_phase(
    h_d: &CMat,
    r_xx: &TxCovariance,
    sigma_sq: f64,
    f_a: &CVec,
    g_d: &CVec,
) -> Result<f64> {
    let gt = crate::rate::prop2_gammas(h_d, r_xx, sigma_sq, f_a, g_d)?;
    let g3 = gt.gamma3;
    // threshold scaled by the other gammas: a truly zero gamma3 means H_d
    // (or the covariance) is degenerate and the phase is immaterial
    if g3.norm() < 1e-300 {
        return Ok(0.0);
    }
    Ok(-g3.arg())
}

/// Takagi factorization of T = f g^H + (f g^H)^T restricted to its rank <= 2
/// signal subspace. Returns (W1, sigma) with T = W1 diag(sigma) W1^T, the
/// columns of W1 orthonormal, sigma > 0 descending.
///
/// Works in the 2-dimensional span of {f, conj(g)}, where degenerate singular
/// values (generic here whenever f^T conj(g) = 0) are handled by an explicit
/// Takagi-vector construction rather than a raw SVD pairing.
fn takagi_rank2(f: &CVec, g: &CVec) -> Result<(CMat, Vec<f64>)> {
    let m = f.len();
    if g.len() != m {
        return Err(Error::Dimension("takagi: f and g lengths differ".into()));
    }
    let fn2 = f.norm();
    let gn2 = g.norm();
    if fn2 == 0.0 || gn2 == 0.0 {
        return Err(Error::Domain("takagi: zero input vector".into()));
    }
    // basis of span{f, conj(g)}
    let c: CVec = g.map(|z| z.conj());
    let e1 = f / Complex64::new(fn2, 0.0);
    let mut w = &c - &e1 * e1.dotc(&c);
    let spanning = w.norm() > 1e-12 * gn2;
    let qs: CMat = if spanning {
        let n = w.norm();
        w /= Complex64::new(n, 0.0);
        CMat::from_columns(&[e1.clone(), w])
    } else {
        CMat::from_columns(&[e1.clone()])
    };
    let r = qs.ncols();
    // T in the subspace basis: Ts = Qs^H T conj(Qs), r x r complex symmetric
    let t_full = f * g.adjoint() + c.clone() * f.transpose();
    let ts = qs.adjoint() * &t_full * qs.map(|z| z.conj());

    let (w1s, sigmas): (CMat, Vec<f64>) = if r == 1 {
        let mu = ts[(0, 0)];
        let t1 = CVec::from_vec(vec![Complex64::from_polar(1.0, mu.arg() / 2.0)]);
        (CMat::from_columns(&[t1]), vec![mu.norm()])
    } else {
        // leading left singular pair of the 2x2 symmetric Ts from the
        // Hermitian eigenproblem of Ts Ts^H
        let h = &ts * ts.adjoint();
        let eig = SymmetricEigen::new(h);
        let idx_max = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
        let s1 = eig.eigenvalues[idx_max].max(0.0).sqrt();
        if s1 == 0.0 {
            return Err(Error::Numerical("takagi: zero matrix in subspace".into()));
        }
        let u1: CVec = eig.eigenvectors.column(idx_max).into_owned();
        // Takagi vector for sigma1: t = u + Ts conj(u)/sigma satisfies
        // Ts conj(t) = sigma t; fall back to the j-rotated variant if it
        // cancels
        let mut t1 = &u1 + &ts * u1.map(|z| z.conj()) / Complex64::new(s1, 0.0);
        if t1.norm() < 0.5 {
            t1 = (&u1 - &ts * u1.map(|z| z.conj()) / Complex64::new(s1, 0.0))
                * Complex64::new(0.0, 1.0);
        }
        let n1 = t1.norm();
        t1 /= Complex64::new(n1, 0.0);
        // deflate and read off the second Takagi pair on the orthogonal
        // complement of t1
        let deflated = &ts - (&t1 * t1.transpose()) * Complex64::new(s1, 0.0);
        let u2 = CVec::from_vec(vec![-t1[1].conj(), t1[0].conj()]);
        let mu = (u2.adjoint() * &deflated * u2.map(|z| z.conj()))[(0, 0)];
        let s2 = mu.norm();
        if s2 > 1e-12 * s1 {
            let t2 = &u2 * Complex64::from_polar(1.0, mu.arg() / 2.0);
            (CMat::from_columns(&[t1, t2]), vec![s1, s2])
        } else {
            (CMat::from_columns(&[t1]), vec![s1])
        }
    };
    let w1 = qs * w1s;
    // loud check: the lifted factor must reproduce T
    let mut recon = CMat::zeros(m, m);
    for (k, &s) in sigmas.iter().enumerate() {
        let col = w1.column(k).into_owned();
        recon += (&col * col.transpose()) * Complex64::new(s, 0.0);
    }
    let defect = (&recon - &t_full).norm() / t_full.norm();
    if defect > 1e-8 {
        return Err(Error::Numerical(format!(
            "takagi factorization defect {defect}"
        )));
    }
    Ok((w1, sigmas))
}

fn haar_columns<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMat {
    let gin = CMat::from_fn(m, m, |_, _| crate::rng::complex_gaussian(rng));
    let qr = QR::new(gin);
    let r = qr.r();
    let mut q = qr.q();
    // normalize column phases by R's diagonal for the Haar measure
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / Complex64::new(d.norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed random unitary via QR of a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMat {
    haar_columns(m, rng)
}

/// Phase-free optimal BD-RIS factor: symmetric unitary Theta~ with
/// f_d^H Theta~ g_a = ||f_d|| ||g_a|| (real, positive). With
/// `QrotMode::Zero` the null-subspace term is dropped and the result is the
/// lossy rank-2 matrix U1 V1^H.
pub fn optimal_bdris_tilde(f_d: &CVec, g_a: &CVec, qrot_mode: QrotMode) -> Result<CMat> {
    let m = f_d.len();
    if g_a.len() != m {
        return Err(Error::Dimension("optimal_bdris: length mismatch".into()));
    }
    if f_d.norm() == 0.0 || g_a.norm() == 0.0 {
        return Err(Error::Domain("optimal_bdris: zero input vector".into()));
    }
    if m < 2 {
        // scalar fallback: align the single-element coupling phase to zero
        let phase = -(f_d[0].conj() * g_a[0]).arg();
        return Ok(CMat::from_element(1, 1, Complex64::from_polar(1.0, phase)));
    }
    let (w1, _sigmas) = takagi_rank2(f_d, g_a)?;
    let rank = w1.ncols();
    let mut tilde = &w1 * w1.transpose();
    match qrot_mode {
        QrotMode::Zero => {}
        QrotMode::Identity => {
            if rank < m {
                let w2 = orthonormal_completion(&w1);
                tilde += &w2 * w2.transpose();
            }
        }
        QrotMode::Random(seed) => {
            if rank < m {
                let w2 = orthonormal_completion(&w1);
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let q = haar_unitary(m - rank, &mut rng);
                // V2* Qrot* Qrot^H V2^H = (W2 Q*)(W2 Q*)^T
                let y = &w2 * q.map(|z| z.conj());
                tilde += &y * y.transpose();
            }
        }
    }
    let asym = (&tilde - tilde.transpose()).norm();
    if asym > 1e-8 {
        return Err(Error::Numerical(format!(
            "optimal BD-RIS factor asymmetry {asym}"
        )));
    }
    Ok(tilde)
}

/// Optimal fully-connected BD-RIS: Theta = e^{j theta_opt} Theta~.
pub fn optimal_bdris(
    f_d: &CVec,
    g_a: &CVec,
    theta_opt: f64,
    qrot_mode: QrotMode,
) -> Result<ScatteringMatrix> {
    let tilde = optimal_bdris_tilde(f_d, g_a, qrot_mode)?;
    let entries = tilde * Complex64::from_polar(1.0, theta_opt);
    let architecture = match qrot_mode {
        QrotMode::Zero if f_d.len() >= 2 => Architecture::LossyRank2,
        _ => Architecture::FullyConnected,
    };
    Ok(ScatteringMatrix { entries, architecture })
}

/// Optimal diagonal RIS: per-element phases -angle(f_d(m)* g_a(m)) under the
/// common phase theta_opt. Achieves alpha = ||conj(f_d) o g_a||_1.
pub fn optimal_diagonal_ris(f_d: &CVec, g_a: &CVec, theta_opt: f64) -> Result<ScatteringMatrix> {
    let m = f_d.len();
    if g_a.len() != m {
        return Err(Error::Dimension("optimal_diagonal_ris: length mismatch".into()));
    }
    let common = Complex64::from_polar(1.0, theta_opt);
    let mut entries = CMat::zeros(m, m);
    for i in 0..m {
        let prod = f_d[i].conj() * g_a[i];
        let phase = if prod.norm() > 0.0 { -prod.arg() } else { 0.0 };
        entries[(i, i)] = common * Complex64::from_polar(1.0, phase);
    }
    Ok(ScatteringMatrix {
        entries,
        architecture: Architecture::Diagonal,
    })
}

/// Group-connected BD-RIS: block-diagonal with per-group Takagi blocks,
/// every group's coupling phase 0, common phase theta_opt. Achieves
/// alpha = sum_g ||f_{d,g}|| ||g_{a,g}||.
pub fn group_connected_bdris(
    f_d: &CVec,
    g_a: &CVec,
    theta_opt: f64,
    groups: usize,
) -> Result<ScatteringMatrix> {
    let m = f_d.len();
    if g_a.len() != m {
        return Err(Error::Dimension("group_connected_bdris: length mismatch".into()));
    }
    if groups == 0 || m % groups != 0 {
        return Err(Error::Config(format!(
            "group count {groups} does not divide M = {m}"
        )));
    }
    let mg = m / groups;
    let common = Complex64::from_polar(1.0, theta_opt);
    let mut entries = CMat::zeros(m, m);
    for g in 0..groups {
        let lo = g * mg;
        let f_g: CVec = f_d.rows(lo, mg).into_owned();
        let g_g: CVec = g_a.rows(lo, mg).into_owned();
        let block = if f_g.norm() == 0.0 || g_g.norm() == 0.0 {
            // zero coupling for any feasible block
            CMat::identity(mg, mg)
        } else {
            optimal_bdris_tilde(&f_g, &g_g, QrotMode::Identity)?
        };
        entries.view_mut((lo, lo), (mg, mg)).copy_from(&(block * common));
    }
    Ok(ScatteringMatrix {
        entries,
        architecture: Architecture::GroupConnected(groups),
    })
}

/// Random symmetric-unitary BD-RIS: Theta = Q Q^T with Haar-random Q.
pub fn random_feasible_bdris<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ScatteringMatrix {
    let q = haar_unitary(m, rng);
    ScatteringMatrix {
        entries: &q * q.transpose(),
        architecture: Architecture::Random,
    }
}

/// Random diagonal RIS: i.i.d. uniform phases on [0, 2 pi).
pub fn random_diagonal_ris<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ScatteringMatrix {
    let mut entries = CMat::zeros(m, m);
    for i in 0..m {
        let phi = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        entries[(i, i)] = Complex64::from_polar(1.0, phi);
    }
    ScatteringMatrix {
        entries,
        architecture: Architecture::Diagonal,
    }
}
