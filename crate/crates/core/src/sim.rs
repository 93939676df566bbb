//! Monte Carlo harness: seeded sweeps over transmit power or Ricean factor
//! across the competing schemes, CSV emission, and the invariant audit.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{
    assemble_equivalent, build_scenario_channels, ChannelSet, RisLinks, ScenarioConfig,
};
use crate::error::{Error, Result};
use crate::rate::{achievable_rate, delta_expansion, gammas};
use crate::rng::RngStreams;
use crate::scatter::{
    coupling_of, optimal_bdris, optimal_diagonal_ris, optimal_phase, random_diagonal_ris,
    random_feasible_bdris, QrotMode,
};
use crate::txopt::{alternating_optimize, isotropic_covariance, waterfilling};
use crate::{CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    BdrisOptRxx,
    BdrisIsoRxx,
    RisLos,
    RandomBdris,
    RandomRis,
    NoRis,
}

impl SchemeId {
    pub fn all() -> [SchemeId; 6] {
        [
            SchemeId::BdrisOptRxx,
            SchemeId::BdrisIsoRxx,
            SchemeId::RisLos,
            SchemeId::RandomBdris,
            SchemeId::RandomRis,
            SchemeId::NoRis,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::BdrisOptRxx => "bdris-opt-rxx",
            SchemeId::BdrisIsoRxx => "bdris-iso-rxx",
            SchemeId::RisLos => "ris-los",
            SchemeId::RandomBdris => "random-bdris",
            SchemeId::RandomRis => "random-ris",
            SchemeId::NoRis => "no-ris",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::all()
            .into_iter()
            .find(|sch| sch.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    PtDbm,
    RiceanK,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::PtDbm => "pt_dbm",
            SweepVar::RiceanK => "ricean_k",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub scheme: SchemeId,
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub rate_bits: f64,
}

/// Evaluates one scheme on a fixed channel realization.
pub fn evaluate_scheme(
    scheme: SchemeId,
    ch: &ChannelSet,
    sigma_sq: f64,
    p_t: f64,
    scheme_rng: &mut impl Rng,
) -> Result<f64> {
    let (n_t, _, m) = ch.dims();
    let los = ch.los_factors();
    match scheme {
        SchemeId::NoRis => {
            let r = waterfilling(&ch.h_d, sigma_sq, p_t)?;
            achievable_rate(&ch.h_d, &r, sigma_sq)
        }
        SchemeId::RandomBdris => {
            let theta = random_feasible_bdris(m, scheme_rng);
            let h = assemble_equivalent(ch, &theta)?;
            achievable_rate(&h, &isotropic_covariance(n_t, p_t), sigma_sq)
        }
        SchemeId::RandomRis => {
            let theta = random_diagonal_ris(m, scheme_rng);
            let h = assemble_equivalent(ch, &theta)?;
            achievable_rate(&h, &isotropic_covariance(n_t, p_t), sigma_sq)
        }
        SchemeId::BdrisIsoRxx => {
            let iso = isotropic_covariance(n_t, p_t);
            let phase = optimal_phase(&ch.h_d, &iso, sigma_sq, &los.f_a, &los.g_d)?;
            let theta = optimal_bdris(&los.f_d, &los.g_a, phase, QrotMode::Identity)?;
            let h = assemble_equivalent(ch, &theta)?;
            achievable_rate(&h, &iso, sigma_sq)
        }
        SchemeId::BdrisOptRxx => {
            // design on the LoS model, evaluate on the true channel
            let model = ChannelSet {
                h_d: ch.h_d.clone(),
                ris: RisLinks::Los(los.clone()),
            };
            let (theta, _, _) = alternating_optimize(&model, sigma_sq, p_t, QrotMode::Identity)?;
            let h = assemble_equivalent(ch, &theta)?;
            let r = waterfilling(&h, sigma_sq, p_t)?;
            achievable_rate(&h, &r, sigma_sq)
        }
        SchemeId::RisLos => {
            let iso = isotropic_covariance(n_t, p_t);
            let phase = optimal_phase(&ch.h_d, &iso, sigma_sq, &los.f_a, &los.g_d)?;
            let theta = optimal_diagonal_ris(&los.f_d, &los.g_a, phase)?;
            let h = assemble_equivalent(ch, &theta)?;
            let r = waterfilling(&h, sigma_sq, p_t)?;
            achievable_rate(&h, &r, sigma_sq)
        }
    }
}

/// Runs the sweep with common random numbers: at each (sweep point, trial)
/// every scheme sees the identical channel realization. Deterministic given
/// the config seed; rows come out sorted by (sweep point, trial, scheme).
pub fn run_sweep(
    cfg: &ScenarioConfig,
    sweep: &SweepSpec,
    schemes: &[SchemeId],
) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    if sweep.values.is_empty() {
        return Err(Error::Config("empty sweep grid".into()));
    }
    if schemes.is_empty() {
        return Err(Error::Config("no schemes selected".into()));
    }
    let streams = RngStreams::new(cfg.seed);
    let mut out = Vec::with_capacity(sweep.values.len() * cfg.trials * schemes.len());
    for &value in sweep.values.iter() {
        let mut point_cfg = cfg.clone();
        match sweep.var {
            SweepVar::PtDbm => point_cfg.pt_dbm = value,
            SweepVar::RiceanK => point_cfg.ricean_k = Some(value),
        }
        let sigma_sq = point_cfg.noise_watts();
        let p_t = point_cfg.pt_watts();
        for trial in 0..cfg.trials {
            // one channel stream and one scheme-randomness stream per trial,
            // shared across sweep points and schemes (common random numbers)
            let id = trial as u64;
            let mut channel_rng = streams.stream(id);
            let ch = build_scenario_channels(&point_cfg, &mut channel_rng)?;
            let mut scheme_rng = streams.stream(id | 1 << 63);
            for &scheme in schemes {
                let rate_bits = evaluate_scheme(scheme, &ch, sigma_sq, p_t, &mut scheme_rng)?;
                out.push(SweepResult {
                    scheme,
                    sweep_var: sweep.var,
                    sweep_value: value,
                    trial,
                    seed: cfg.seed,
                    rate_bits,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub scheme: SchemeId,
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Per-(scheme, sweep point) mean and standard error, in first-seen order.
pub fn summarize(results: &[SweepResult]) -> Result<Vec<SummaryRow>> {
    if results.is_empty() {
        return Err(Error::Config("summarize: empty results".into()));
    }
    let mut keys: Vec<(SchemeId, u64)> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut meta: Vec<(SweepVar, f64)> = Vec::new();
    for r in results {
        let key = (r.scheme, r.sweep_value.to_bits());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r.rate_bits),
            None => {
                keys.push(key);
                groups.push(vec![r.rate_bits]);
                meta.push((r.sweep_var, r.sweep_value));
            }
        }
    }
    Ok(keys
        .iter()
        .zip(groups.iter())
        .zip(meta.iter())
        .map(|((&(scheme, _), rates), &(sweep_var, sweep_value))| {
            let n = rates.len();
            let mean = rates.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var =
                    rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                scheme,
                sweep_var,
                sweep_value,
                mean,
                stderr,
                trials: n,
            }
        })
        .collect())
}

fn fmt_sig12(x: f64) -> String {
    // 12 significant digits
    format!("{x:.11e}")
}

/// CSV with header `scheme,sweep_var,sweep_value,trial,seed,rate_bits`,
/// UTF-8, LF endings, 12 significant digits.
pub fn write_csv<W: std::io::Write>(results: &[SweepResult], mut w: W) -> std::io::Result<()> {
    w.write_all(b"scheme,sweep_var,sweep_value,trial,seed,rate_bits\n")?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.scheme,
            r.sweep_var.name(),
            fmt_sig12(r.sweep_value),
            r.trial,
            r.seed,
            fmt_sig12(r.rate_bits)
        )?;
    }
    Ok(())
}

pub fn csv_string(results: &[SweepResult]) -> String {
    let mut buf = Vec::new();
    write_csv(results, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

#[derive(Debug, Clone)]
pub struct AuditCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        writeln!(
            f,
            "audit: {}",
            if self.passed() { "all checks passed" } else { "FAILED" }
        )
    }
}

fn random_cvec(n: usize, rng: &mut impl Rng) -> CVec {
    CVec::from_fn(n, |_, _| crate::rng::complex_gaussian(rng))
}

fn random_cmat(n: usize, m: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(n, m, |_, _| crate::rng::complex_gaussian(rng))
}

/// Reduced-count bundle of the determinant-identity, feasibility,
/// optimality-dominance, and monotonicity suites, for CI and field
/// diagnostics.
pub fn audit_invariants(cfg: &ScenarioConfig, quick: bool) -> Result<AuditReport> {
    cfg.validate()?;
    let streams = RngStreams::new(cfg.seed ^ 0xa0d1_7bad);
    let mut checks = Vec::new();

    // determinant identity
    {
        let n_inst = if quick { 50 } else { 200 };
        let mut rng = streams.stream(1);
        let mut worst = 0.0f64;
        for _ in 0..n_inst {
            let n = rng.gen_range(1..9);
            let m = rng.gen_range(1..9);
            let a = random_cmat(n, m, &mut rng);
            let f = random_cvec(n, &mut rng);
            let g = random_cvec(m, &mut rng);
            let alpha = rng.gen::<f64>() * 3.0;
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let gt = gammas(&a, &f, &g)?;
            let (delta, _) = delta_expansion(&gt, alpha, th);
            let b = &a + (&f * g.adjoint()) * Complex64::from_polar(alpha, th);
            let lhs = nalgebra::LU::new(CMat::identity(n, n) + &b * b.adjoint())
                .determinant()
                .re;
            let rhs = nalgebra::LU::new(CMat::identity(n, n) + &a * a.adjoint())
                .determinant()
                .re
                * (1.0 + delta);
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        }
        checks.push(AuditCheck {
            name: "determinant-identity",
            passed: worst <= 1e-10,
            detail: format!("worst relative error {worst:.2e} over {n_inst} instances"),
        });
    }

    // feasibility of every constructor
    {
        let mut rng = streams.stream(2);
        let mut worst = 0.0f64;
        let n_inst = if quick { 10 } else { 40 };
        for i in 0..n_inst {
            let m = [2usize, 3, 4, 8][i % 4];
            let f = random_cvec(m, &mut rng);
            let g = random_cvec(m, &mut rng);
            let mats = [
                optimal_bdris(&f, &g, 0.3, QrotMode::Identity)?,
                optimal_bdris(&f, &g, 0.3, QrotMode::Random(i as u64))?,
                optimal_diagonal_ris(&f, &g, 0.3)?,
                crate::scatter::group_connected_bdris(&f, &g, 0.3, if m % 2 == 0 { 2 } else { 1 })?,
                random_feasible_bdris(m, &mut rng),
                random_diagonal_ris(m, &mut rng),
            ];
            for th in &mats {
                worst = worst.max(th.asymmetry()).max(th.unitarity_defect());
            }
        }
        checks.push(AuditCheck {
            name: "feasibility",
            passed: worst <= 1e-10,
            detail: format!("worst symmetry/unitarity defect {worst:.2e}"),
        });
    }

    // optimality dominance: random feasible draws never beat the closed form
    {
        let mut rng = streams.stream(3);
        let n_inst = if quick { 5 } else { 20 };
        let draws = if quick { 200 } else { 1000 };
        let mut ok = true;
        let mut detail = String::new();
        'outer: for _ in 0..n_inst {
            let m = rng.gen_range(2..9);
            let f = random_cvec(m, &mut rng);
            let g = random_cvec(m, &mut rng);
            let best = coupling_of(&optimal_bdris(&f, &g, 0.0, QrotMode::Identity)?, &f, &g)?
                .alpha;
            let bound = f.norm() * g.norm();
            if (best - bound).abs() > 1e-10 * bound {
                ok = false;
                detail = format!("closed form missed the bound: {best} vs {bound}");
                break;
            }
            for _ in 0..draws {
                let th = random_feasible_bdris(m, &mut rng);
                let a = coupling_of(&th, &f, &g)?.alpha;
                if a > best * (1.0 + 1e-12) {
                    ok = false;
                    detail = format!("random draw beat the closed form: {a} vs {best}");
                    break 'outer;
                }
            }
        }
        if ok {
            detail = format!("{n_inst} instances x {draws} random draws dominated");
        }
        checks.push(AuditCheck {
            name: "optimality-dominance",
            passed: ok,
            detail,
        });
    }

    // alternating monotonicity on the configured scenario
    {
        let n_inst = if quick { 5 } else { 20 };
        let mut los_cfg = cfg.clone();
        los_cfg.ricean_k = None;
        let sigma_sq = los_cfg.noise_watts();
        let p_t = los_cfg.pt_watts();
        let mut ok = true;
        let mut detail = String::new();
        for t in 0..n_inst {
            let mut rng = streams.stream(4 + t as u64);
            let ch = build_scenario_channels(&los_cfg, &mut rng)?;
            let (_, _, trace) = alternating_optimize(&ch, sigma_sq, p_t, QrotMode::Identity)?;
            if !trace.converged {
                ok = false;
                detail = format!("no convergence on instance {t}");
                break;
            }
            if trace.rates.windows(2).any(|w| w[1] < w[0] - 1e-12) {
                ok = false;
                detail = format!("rate trace decreased on instance {t}: {:?}", trace.rates);
                break;
            }
        }
        if ok {
            detail = format!("{n_inst} traces monotone and converged");
        }
        checks.push(AuditCheck {
            name: "alternating-monotonicity",
            passed: ok,
            detail,
        });
    }

    Ok(AuditReport { checks })
}
