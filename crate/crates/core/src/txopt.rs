//! Transmit-covariance optimization: exact waterfilling over channel
//! eigenmodes and the alternating loop that re-estimates the common BD-RIS
//! phase and waterfills the equivalent channel until the rate settles.

use nalgebra::SVD;
use num_complex::Complex64;

use crate::channel::{assemble_equivalent, ChannelSet, RisLinks};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, is_hermitian};
use crate::rate::achievable_rate;
use crate::scatter::{optimal_bdris_tilde, optimal_phase, Architecture, QrotMode, ScatteringMatrix};
use crate::CMat;

pub const AO_REL_TOLERANCE: f64 = 1e-8;
pub const AO_MAX_ITERATIONS: usize = 100;

/// Positive semidefinite transmit covariance with a trace budget.
#[derive(Debug, Clone)]
pub struct TxCovariance {
    matrix: CMat,
    power_budget: f64,
}

impl TxCovariance {
    pub fn new(matrix: CMat, power_budget: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension("covariance must be square".into()));
        }
        let scale = matrix.trace().re.abs().max(1.0);
        if !is_hermitian(&matrix, 1e-12) {
            return Err(Error::Domain("covariance is not Hermitian".into()));
        }
        let min_eig = hermitian_eigenvalues(&matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -1e-12 * scale {
            return Err(Error::Domain(format!(
                "covariance is not PSD: min eigenvalue {min_eig}"
            )));
        }
        let trace = matrix.trace().re;
        if trace > power_budget * (1.0 + 1e-10) {
            return Err(Error::Domain(format!(
                "covariance trace {trace} exceeds power budget {power_budget}"
            )));
        }
        Ok(Self { matrix, power_budget })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// R_xx = (P_t / N_T) I.
pub fn isotropic_covariance(n_t: usize, p_t: f64) -> TxCovariance {
    assert!(n_t >= 1 && p_t > 0.0);
    TxCovariance {
        matrix: CMat::identity(n_t, n_t) * Complex64::new(p_t / n_t as f64, 0.0),
        power_budget: p_t,
    }
}

/// Waterfilling over the eigenmodes of H: R_xx = V diag(p) V^H where p_i =
/// max(0, mu - sigma^2 / lambda_i^2) and the water level mu is found exactly
/// by the sorted active-set closed form. A zero channel yields the isotropic
/// covariance (any allocation achieves rate 0).
pub fn waterfilling(h: &CMat, sigma_sq: f64, p_t: f64) -> Result<TxCovariance> {
    if p_t <= 0.0 {
        return Err(Error::Domain("power budget must be > 0".into()));
    }
    if sigma_sq <= 0.0 {
        return Err(Error::Domain("noise power must be > 0".into()));
    }
    let n_t = h.ncols();
    let svd = SVD::new(h.clone(), false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD failed to produce V".into()))?;
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    if smax <= 0.0 || !smax.is_finite() {
        return Ok(isotropic_covariance(n_t, p_t));
    }
    // inverse gains sigma^2 / lambda_i^2, ascending (singular values are
    // descending from the SVD); discard numerically-zero modes
    let inv_gains: Vec<f64> = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-14 * smax)
        .map(|&s| sigma_sq / (s * s))
        .collect();
    let mut active = inv_gains.len();
    let mut mu = 0.0;
    while active > 0 {
        let sum: f64 = inv_gains[..active].iter().sum();
        mu = (p_t + sum) / active as f64;
        if mu > inv_gains[active - 1] {
            break;
        }
        active -= 1;
    }
    let mut r = CMat::zeros(n_t, n_t);
    for i in 0..active {
        let p_i = mu - inv_gains[i];
        let v_i = v_t.row(i).adjoint(); // column i of V
        r += (&v_i * v_i.adjoint()) * Complex64::new(p_i, 0.0);
    }
    TxCovariance::new(r, p_t)
}

/// Per-iteration rate trace of the alternating loop.
#[derive(Debug, Clone)]
pub struct AlternatingTrace {
    pub rates: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternating optimization of the BD-RIS common phase and the transmit
/// covariance. The Takagi factor is loop-invariant and built once; each
/// iteration re-estimates theta_opt for the current covariance and
/// waterfills the resulting equivalent channel.
pub fn alternating_optimize(
    ch: &ChannelSet,
    sigma_sq: f64,
    p_t: f64,
    qrot_mode: QrotMode,
) -> Result<(ScatteringMatrix, TxCovariance, AlternatingTrace)> {
    let los = match &ch.ris {
        RisLinks::Los(l) => l,
        RisLinks::Ricean { .. } => {
            return Err(Error::Contract(
                "alternating_optimize requires pure-LoS RIS links".into(),
            ))
        }
    };
    let (n_t, _, _) = ch.dims();
    let tilde = optimal_bdris_tilde(&los.f_d, &los.g_a, qrot_mode)?;
    let architecture = match qrot_mode {
        QrotMode::Zero if los.f_d.len() >= 2 => Architecture::LossyRank2,
        _ => Architecture::FullyConnected,
    };

    let mut r_xx = isotropic_covariance(n_t, p_t);
    let mut rates = Vec::new();
    let mut theta = ScatteringMatrix {
        entries: tilde.clone(),
        architecture,
    };
    let mut converged = false;
    let mut iterations = 0;
    while iterations < AO_MAX_ITERATIONS {
        iterations += 1;
        let theta_opt = optimal_phase(&ch.h_d, &r_xx, sigma_sq, &los.f_a, &los.g_d)?;
        theta = ScatteringMatrix {
            entries: &tilde * Complex64::from_polar(1.0, theta_opt),
            architecture,
        };
        let h_eq = assemble_equivalent(ch, &theta)?;
        r_xx = waterfilling(&h_eq, sigma_sq, p_t)?;
        let rate = achievable_rate(&h_eq, &r_xx, sigma_sq)?;
        let done = rates
            .last()
            .map(|&prev: &f64| (rate - prev).abs() <= AO_REL_TOLERANCE * prev.abs().max(1e-300))
            .unwrap_or(false);
        rates.push(rate);
        if done {
            converged = true;
            break;
        }
    }
    Ok((
        theta,
        r_xx,
        AlternatingTrace {
            rates,
            iterations,
            converged,
        },
    ))
}
