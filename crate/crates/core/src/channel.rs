//! Channel synthesis: ULA steering vectors, path loss, Rayleigh/Ricean
//! draws, rank-1 LoS RIS links, and assembly of the equivalent channel
//! H = H_d + F Theta G^H.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::complex_gaussian;
use crate::scatter::ScatteringMatrix;
use crate::{CMat, CVec};

/// Half-wavelength ULA response. Unit norm, constant entry modulus 1/sqrt(M).
#[derive(Debug, Clone)]
pub struct SteeringVector {
    pub entries: CVec,
    pub angle: f64,
}

/// The four rank-1 LoS channel vectors. Stored unnormalized: each carries
/// half of its link's amplitude so that F = f_a f_d^H and G^H = g_a g_d^H
/// reproduce the link gains.
#[derive(Debug, Clone)]
pub struct LosFactors {
    /// Arrival vector at the Rx array, length N_R.
    pub f_a: CVec,
    /// Departure vector at the RIS toward the Rx, length M.
    pub f_d: CVec,
    /// Arrival vector at the RIS from the Tx, length M.
    pub g_a: CVec,
    /// Departure vector at the Tx array, length N_T.
    pub g_d: CVec,
}

impl LosFactors {
    /// Backward channel F = f_a f_d^H, size N_R x M.
    pub fn backward_matrix(&self) -> CMat {
        &self.f_a * self.f_d.adjoint()
    }

    /// Forward channel G = g_d g_a^H, size N_T x M (so G^H = g_a g_d^H).
    pub fn forward_matrix(&self) -> CMat {
        &self.g_d * self.g_a.adjoint()
    }
}

/// RIS links: pure LoS factors, or full Ricean matrices. The Ricean variant
/// keeps the LoS component's factors so closed-form designs can still be
/// built from them.
#[derive(Debug, Clone)]
pub enum RisLinks {
    Los(LosFactors),
    Ricean {
        /// RIS -> Rx channel, N_R x M.
        f: CMat,
        /// Tx -> RIS channel (stored as G, N_T x M).
        g: CMat,
        los: LosFactors,
    },
}

#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub h_d: CMat,
    pub ris: RisLinks,
}

impl ChannelSet {
    pub fn dims(&self) -> (usize, usize, usize) {
        let (n_r, n_t) = (self.h_d.nrows(), self.h_d.ncols());
        let m = match &self.ris {
            RisLinks::Los(l) => l.f_d.len(),
            RisLinks::Ricean { f, .. } => f.ncols(),
        };
        (n_t, n_r, m)
    }

    pub fn los_factors(&self) -> &LosFactors {
        match &self.ris {
            RisLinks::Los(l) => l,
            RisLinks::Ricean { los, .. } => los,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub tx_pos: [f64; 3],
    pub rx_pos: [f64; 3],
    pub ris_pos: [f64; 3],
    /// Path loss at the 1 m reference distance, dB.
    pub pl0_db: f64,
    pub beta_direct: f64,
    pub beta_ris: f64,
    pub pt_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    /// Linear Ricean K factor for the RIS links. `None` means pure LoS.
    pub ricean_k: Option<f64>,
    pub n_t: usize,
    pub n_r: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// Transmit-power grid for `--sweep pt`, dBm.
    #[serde(default = "default_pt_sweep")]
    pub pt_sweep_dbm: Vec<f64>,
    /// Ricean-factor grid for `--sweep k`.
    #[serde(default = "default_k_sweep")]
    pub k_sweep: Vec<f64>,
}

fn default_pt_sweep() -> Vec<f64> {
    vec![0.0, 10.0, 20.0, 30.0]
}

fn default_k_sweep() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 5.0, 10.0]
}

impl ScenarioConfig {
    /// The simulation scenario shipped as the default: 4x4 MIMO, 64-element
    /// RIS at (20, 20, 20) m, weak Rayleigh direct link.
    pub fn default_scenario() -> Self {
        Self {
            tx_pos: [0.0, 0.0, 3.0],
            rx_pos: [200.0, 200.0, 1.5],
            ris_pos: [20.0, 20.0, 20.0],
            pl0_db: -28.0,
            beta_direct: 3.75,
            beta_ris: 2.0,
            pt_dbm: 30.0,
            bandwidth_hz: 20e6,
            noise_figure_db: 10.0,
            ricean_k: None,
            n_t: 4,
            n_r: 4,
            m: 64,
            trials: 200,
            seed: 7,
            pt_sweep_dbm: default_pt_sweep(),
            k_sweep: default_k_sweep(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 || self.m == 0 {
            return Err(Error::Config("dimensions must be >= 1".into()));
        }
        if self.bandwidth_hz <= 0.0 {
            return Err(Error::Config("bandwidth must be > 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if let Some(k) = self.ricean_k {
            if k < 0.0 {
                return Err(Error::Config("ricean_k must be >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn pt_watts(&self) -> f64 {
        dbm_to_watts(self.pt_dbm)
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(noise_power_dbm(self.bandwidth_hz, self.noise_figure_db))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Steering vector of a half-wavelength ULA: entry k is
/// (1/sqrt(m)) exp(-j pi sin(phi) k).
pub fn ula_steering(phi: f64, m: usize) -> Result<SteeringVector> {
    if m == 0 {
        return Err(Error::Dimension("steering vector needs m >= 1".into()));
    }
    if !phi.is_finite() {
        return Err(Error::Domain("angle must be finite".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let step = -std::f64::consts::PI * phi.sin();
    let entries = CVec::from_fn(m, |k, _| Complex64::from_polar(scale, step * k as f64));
    Ok(SteeringVector { entries, angle: phi })
}

/// PL(d) = PL0 - beta * 10 log10(d), valid for d >= 1 m.
pub fn path_loss_db(d: f64, beta: f64, pl0_db: f64) -> Result<f64> {
    if d < 1.0 {
        return Err(Error::Domain(format!(
            "path-loss model undefined below the 1 m reference distance (d = {d})"
        )));
    }
    Ok(pl0_db - beta * 10.0 * d.log10())
}

/// Thermal noise power: -174 dBm/Hz + 10 log10(B) + F.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    assert!(bandwidth_hz > 0.0, "bandwidth must be > 0");
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// i.i.d. CN(0, gain) entries where gain is the linear path-loss gain.
pub fn rayleigh_channel<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    pathloss_db: f64,
    rng: &mut R,
) -> CMat {
    let amp = db_to_linear(pathloss_db).sqrt();
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng) * amp)
}

/// sqrt(K/(1+K)) * los + sqrt(1/(1+K)) * nlos.
pub fn ricean_mix(los: &CMat, nlos: &CMat, k: f64) -> Result<CMat> {
    if los.shape() != nlos.shape() {
        return Err(Error::Dimension(format!(
            "ricean_mix shapes differ: {:?} vs {:?}",
            los.shape(),
            nlos.shape()
        )));
    }
    if k < 0.0 {
        return Err(Error::Domain("Ricean K must be >= 0".into()));
    }
    let w_los = (k / (1.0 + k)).sqrt();
    let w_nlos = (1.0 / (1.0 + k)).sqrt();
    Ok(los * Complex64::new(w_los, 0.0) + nlos * Complex64::new(w_nlos, 0.0))
}

/// Equivalent channel H = H_d + F Theta G^H. With pure-LoS links this is
/// H_d + (f_d^H Theta g_a) f_a g_d^H.
pub fn assemble_equivalent(ch: &ChannelSet, theta: &ScatteringMatrix) -> Result<CMat> {
    let (_, _, m) = ch.dims();
    if theta.entries.nrows() != m || theta.entries.ncols() != m {
        return Err(Error::Dimension(format!(
            "scattering matrix is {}x{}, expected {m}x{m}",
            theta.entries.nrows(),
            theta.entries.ncols()
        )));
    }
    match &ch.ris {
        RisLinks::Los(l) => {
            let coupling = (l.f_d.adjoint() * &theta.entries * &l.g_a)[(0, 0)];
            Ok(&ch.h_d + (&l.f_a * l.g_d.adjoint()) * coupling)
        }
        RisLinks::Ricean { f, g, .. } => Ok(&ch.h_d + f * &theta.entries * g.adjoint()),
    }
}

fn azimuth(from: &[f64; 3], to: &[f64; 3]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Builds the deterministic LoS factors from the scenario geometry. Link
/// amplitudes are normalized so the rank-1 LoS matrices carry the same
/// average per-entry power as a Rayleigh draw at the same path loss, split
/// evenly between the arrival and departure vectors.
pub fn los_factors_from_geometry(cfg: &ScenarioConfig) -> Result<LosFactors> {
    let d_tx_ris = distance(&cfg.tx_pos, &cfg.ris_pos);
    let d_ris_rx = distance(&cfg.ris_pos, &cfg.rx_pos);
    if d_tx_ris < 1e-9 || d_ris_rx < 1e-9 || distance(&cfg.tx_pos, &cfg.rx_pos) < 1e-9 {
        return Err(Error::Geometry("coincident node positions".into()));
    }
    let gain_f = db_to_linear(path_loss_db(d_ris_rx, cfg.beta_ris, cfg.pl0_db)?);
    let gain_g = db_to_linear(path_loss_db(d_tx_ris, cfg.beta_ris, cfg.pl0_db)?);
    // amplitude of each link: ||f_a|| ||f_d|| = sqrt(gain * N_R * M)
    let beta_f = (gain_f * (cfg.n_r * cfg.m) as f64).sqrt();
    let beta_g = (gain_g * (cfg.n_t * cfg.m) as f64).sqrt();

    let scale = |v: &SteeringVector, amp: f64| -> CVec {
        &v.entries * Complex64::new(amp, 0.0)
    };
    let f_a = scale(&ula_steering(azimuth(&cfg.rx_pos, &cfg.ris_pos), cfg.n_r)?, beta_f.sqrt());
    let f_d = scale(&ula_steering(azimuth(&cfg.ris_pos, &cfg.rx_pos), cfg.m)?, beta_f.sqrt());
    let g_a = scale(&ula_steering(azimuth(&cfg.ris_pos, &cfg.tx_pos), cfg.m)?, beta_g.sqrt());
    let g_d = scale(&ula_steering(azimuth(&cfg.tx_pos, &cfg.ris_pos), cfg.n_t)?, beta_g.sqrt());
    Ok(LosFactors { f_a, f_d, g_a, g_d })
}

/// Draws one channel realization for the scenario: Rayleigh direct link,
/// pure-LoS or Ricean RIS links. Deterministic given the RNG state; the
/// draw order is H_d, then F's NLoS part, then G's NLoS part.
pub fn build_scenario_channels<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<ChannelSet> {
    cfg.validate()?;
    let d_tx_rx = distance(&cfg.tx_pos, &cfg.rx_pos);
    if d_tx_rx < 1e-9 {
        return Err(Error::Geometry("coincident Tx and Rx".into()));
    }
    let pl_direct = path_loss_db(d_tx_rx, cfg.beta_direct, cfg.pl0_db)?;
    let h_d = rayleigh_channel(cfg.n_r, cfg.n_t, pl_direct, rng);
    let los = los_factors_from_geometry(cfg)?;

    let ris = match cfg.ricean_k {
        None => RisLinks::Los(los),
        Some(k) => {
            let d_tx_ris = distance(&cfg.tx_pos, &cfg.ris_pos);
            let d_ris_rx = distance(&cfg.ris_pos, &cfg.rx_pos);
            let pl_f = path_loss_db(d_ris_rx, cfg.beta_ris, cfg.pl0_db)?;
            let pl_g = path_loss_db(d_tx_ris, cfg.beta_ris, cfg.pl0_db)?;
            let f_nlos = rayleigh_channel(cfg.n_r, cfg.m, pl_f, rng);
            let g_nlos = rayleigh_channel(cfg.n_t, cfg.m, pl_g, rng);
            let f = ricean_mix(&los.backward_matrix(), &f_nlos, k)?;
            let g = ricean_mix(&los.forward_matrix(), &g_nlos, k)?;
            RisLinks::Ricean { f, g, los }
        }
    };
    Ok(ChannelSet { h_d, ris })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreams;
    use crate::scatter::{Architecture, ScatteringMatrix};
    use nalgebra::SVD;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ula_broadside_is_constant() {
        let v = ula_steering(0.0, 4).unwrap();
        for e in v.entries.iter() {
            assert!((e - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn ula_pi_over_six() {
        // sin(pi/6) = 1/2 -> entries (1, -j, -1, j)/2
        let v = ula_steering(std::f64::consts::PI / 6.0, 4).unwrap();
        let expect = [c(0.5, 0.0), c(0.0, -0.5), c(-0.5, 0.0), c(0.0, 0.5)];
        for (e, x) in v.entries.iter().zip(expect.iter()) {
            assert!((e - x).norm() < 1e-12, "{e} vs {x}");
        }
    }

    #[test]
    fn ula_single_element() {
        let v = ula_steering(1.234, 1).unwrap();
        assert_eq!(v.entries.len(), 1);
        assert!((v.entries[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ula_norm_and_modulus() {
        for &m in &[1usize, 3, 16, 64] {
            let v = ula_steering(0.7, m).unwrap();
            assert!((v.entries.norm() - 1.0).abs() < 1e-12);
            let target = 1.0 / (m as f64).sqrt();
            for e in v.entries.iter() {
                assert!((e.norm() - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ula_zero_elements_errors() {
        assert!(ula_steering(0.0, 0).is_err());
    }

    #[test]
    fn path_loss_values() {
        assert!((path_loss_db(1.0, 2.0, -28.0).unwrap() + 28.0).abs() < 1e-12);
        assert!((path_loss_db(10.0, 2.0, -28.0).unwrap() + 48.0).abs() < 1e-12);
        assert!((path_loss_db(100.0, 3.75, -28.0).unwrap() + 103.0).abs() < 1e-12);
        assert!(path_loss_db(0.5, 2.0, -28.0).is_err());
    }

    #[test]
    fn noise_power_values() {
        assert!((noise_power_dbm(1.0, 0.0) + 174.0).abs() < 1e-12);
        assert!((noise_power_dbm(20e6, 10.0) + 90.98970004336019).abs() < 1e-9);
        assert!((noise_power_dbm(10e6, 0.0) + 104.0).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_deterministic_and_scaled() {
        let streams = RngStreams::new(5);
        let a = rayleigh_channel(2, 2, 0.0, &mut streams.stream(3));
        let b = rayleigh_channel(2, 2, 0.0, &mut streams.stream(3));
        assert_eq!(a, b);

        let mut rng = streams.stream(0);
        let n = 100_000;
        let h = rayleigh_channel(n, 1, 0.0, &mut rng);
        let mean: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean = {mean}");

        let h = rayleigh_channel(n, 1, -20.0, &mut rng);
        let mean: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 0.01).abs() < 0.0005, "mean = {mean}");
    }

    #[test]
    fn ricean_limits() {
        let mut rng = RngStreams::new(9).stream(0);
        let los = rayleigh_channel(3, 2, 0.0, &mut rng);
        let nlos = rayleigh_channel(3, 2, 0.0, &mut rng);
        assert!((ricean_mix(&los, &nlos, 0.0).unwrap() - &nlos).norm() < 1e-15);
        let hi = ricean_mix(&los, &nlos, 1e12).unwrap();
        assert!((&hi - &los).norm() / los.norm() < 1e-5);
        let mid = ricean_mix(&los, &nlos, 1.0).unwrap();
        let expect = (&los + &nlos) / Complex64::new(2f64.sqrt(), 0.0);
        assert!((mid - expect).norm() < 1e-12);
        assert!(ricean_mix(&los, &rayleigh_channel(2, 2, 0.0, &mut rng), 1.0).is_err());
    }

    #[test]
    fn ricean_preserves_power_when_scales_match() {
        let mut rng = RngStreams::new(11).stream(0);
        let trials = 10_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let los = rayleigh_channel(2, 2, 0.0, &mut rng);
            let nlos = rayleigh_channel(2, 2, 0.0, &mut rng);
            acc += ricean_mix(&los, &nlos, 3.0).unwrap().norm_squared();
        }
        let mean = acc / (trials as f64 * 4.0);
        assert!((mean - 1.0).abs() < 0.02, "mean = {mean}");
    }

    fn tiny_los_channelset() -> ChannelSet {
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.n_t = 3;
        cfg.n_r = 2;
        cfg.m = 4;
        let mut rng = RngStreams::new(21).stream(0);
        build_scenario_channels(&cfg, &mut rng).unwrap()
    }

    #[test]
    fn assemble_zero_scattering_gives_direct() {
        let ch = tiny_los_channelset();
        let theta = ScatteringMatrix {
            entries: CMat::zeros(4, 4),
            architecture: Architecture::Random,
        };
        let h = assemble_equivalent(&ch, &theta).unwrap();
        assert!((h - &ch.h_d).norm() < 1e-15);
    }

    #[test]
    fn assemble_los_rank_one_and_route_agreement() {
        let ch = tiny_los_channelset();
        let mut rng = RngStreams::new(22).stream(0);
        let theta = crate::scatter::random_feasible_bdris(4, &mut rng);
        let h = assemble_equivalent(&ch, &theta).unwrap();
        let diff = &h - &ch.h_d;
        let svd = SVD::new(diff.clone(), false, false);
        let smax = svd.singular_values[0];
        for s in svd.singular_values.iter().skip(1) {
            assert!(*s < 1e-12 * smax.max(1e-300), "rank > 1");
        }
        // full-matrix route
        let l = ch.los_factors();
        let full = &ch.h_d + l.backward_matrix() * &theta.entries * l.forward_matrix().adjoint();
        assert!((&h - &full).norm() / h.norm() < 1e-12);
    }

    #[test]
    fn assemble_linear_in_theta() {
        let ch = tiny_los_channelset();
        let mut rng = RngStreams::new(23).stream(0);
        let t1 = crate::scatter::random_feasible_bdris(4, &mut rng);
        let t2 = crate::scatter::random_feasible_bdris(4, &mut rng);
        let sum = ScatteringMatrix {
            entries: &t1.entries + &t2.entries,
            architecture: Architecture::Random,
        };
        let h1 = assemble_equivalent(&ch, &t1).unwrap() - &ch.h_d;
        let h2 = assemble_equivalent(&ch, &t2).unwrap() - &ch.h_d;
        let hs = assemble_equivalent(&ch, &sum).unwrap() - &ch.h_d;
        assert!((hs - (h1 + h2)).norm() < 1e-12);
    }

    #[test]
    fn default_geometry_distances() {
        let cfg = ScenarioConfig::default_scenario();
        let d = distance(&cfg.tx_pos, &cfg.ris_pos);
        assert!((d - 33.0).abs() < 1e-12, "Tx-RIS distance = {d}");
    }

    #[test]
    fn scenario_determinism_and_ricean_rank() {
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.n_t = 2;
        cfg.n_r = 2;
        cfg.m = 8;
        let streams = RngStreams::new(77);
        let a = build_scenario_channels(&cfg, &mut streams.stream(1)).unwrap();
        let b = build_scenario_channels(&cfg, &mut streams.stream(1)).unwrap();
        assert_eq!(a.h_d, b.h_d);

        cfg.ricean_k = Some(0.0);
        let ch = build_scenario_channels(&cfg, &mut streams.stream(2)).unwrap();
        if let RisLinks::Ricean { f, .. } = &ch.ris {
            let svd = SVD::new(f.clone(), false, false);
            let smin = svd.singular_values[svd.singular_values.len() - 1];
            assert!(smin > 1e-12 * svd.singular_values[0], "Rayleigh F lost rank");
        } else {
            panic!("expected Ricean links");
        }

        cfg.ricean_k = Some(1e15);
        let ch = build_scenario_channels(&cfg, &mut streams.stream(3)).unwrap();
        if let RisLinks::Ricean { f, los, .. } = &ch.ris {
            let rank1 = los.backward_matrix();
            assert!((f - &rank1).norm() / rank1.norm() < 1e-6);
        }
    }

    #[test]
    fn coincident_positions_error() {
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.ris_pos = cfg.tx_pos;
        let mut rng = RngStreams::new(1).stream(0);
        assert!(matches!(
            build_scenario_channels(&cfg, &mut rng),
            Err(Error::Geometry(_))
        ));
    }
}
