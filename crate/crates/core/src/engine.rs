//! Monte Carlo driver: per-trial pipeline, aggregation and γ₀ calibration.
//!
//! Each trial owns independent random streams derived from
//! `(master_seed, trial_index)`: one for the UE position, one for the control
//! packets and one for the paradigm's pilot noise. Results therefore do not
//! depend on thread count or evaluation order, and every paradigm and γ₀ sees
//! the same positions and control draws for a given trial index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bsw::{Bsw, BswOutcome, FrameKind};
use crate::codebook::{dft_codebook, subsample, Codebook, CodebookKind};
use crate::control::{
    correct_control_prob, packet_budgets, sample_control_success, BitFields, PacketBudget,
};
use crate::error::{Error, Result};
use crate::oce::{AeMode, Oce, OceOutcome};
use crate::scenario::{Geometry, RadioParams, Scenario};
use crate::timing::{CcKind, FrameParams, FrameTiming, Paradigm};
use crate::units::db_to_linear;

const STREAM_POSITION: u64 = 0;
const STREAM_CONTROL: u64 = 1;
const STREAM_PARADIGM: u64 = 2;
const STREAMS_PER_TRIAL: u64 = 4;

/// Everything a trial needs; validated once by [`Experiment::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    pub radio: RadioParams,
    /// Mean UE control-channel SNR (linear, may be `+inf`).
    pub lambda_u: f64,
    /// Mean RIS control-channel SNR (linear, may be `+inf`); ignored out of band.
    pub lambda_r: f64,
    pub paradigm: Paradigm,
    pub cc: CcKind,
    pub frame: FrameParams,
    /// Cardinality of the common DFT codebook, also used for estimation.
    pub ce_cardinality: usize,
    /// Subsampling stride of the fixed-frame sweeping codebook.
    pub fixed_stride: usize,
    /// Target SNR of beam sweeping (linear).
    pub gamma0: f64,
    pub ae_mode: AeMode,
    pub bits: BitFields,
    /// Pilot noise on; turning it off gives genie estimates.
    pub pilot_noise: bool,
}

impl ExperimentConfig {
    /// Default system with the given paradigm and control architecture.
    pub fn new(paradigm: Paradigm, cc: CcKind) -> Result<Self> {
        let geometry = Geometry::square_surface(
            100,
            3e9,
            [25.0, 5.0, 5.0],
            crate::scenario::UeRegion::from_side(20.0)?,
        )?;
        let gamma0_db = match paradigm {
            Paradigm::BswFlexible => 13.0,
            _ => 10.9,
        };
        Ok(Self {
            geometry,
            radio: RadioParams::default(),
            lambda_u: f64::INFINITY,
            lambda_r: f64::INFINITY,
            paradigm,
            cc,
            frame: FrameParams::default(),
            ce_cardinality: 100,
            fixed_stride: 3,
            gamma0: db_to_linear(gamma0_db),
            ae_mode: AeMode::default(),
            bits: BitFields::default(),
            pilot_noise: true,
        })
    }
}

/// Result of the paradigm's algorithmic phase.
#[derive(Debug, Clone, PartialEq)]
pub enum ParadigmOutcome {
    Oce(OceOutcome),
    Bsw(BswOutcome),
}

impl ParadigmOutcome {
    pub fn algorithmic_error(&self) -> bool {
        match self {
            ParadigmOutcome::Oce(o) => o.algorithmic_error,
            ParadigmOutcome::Bsw(b) => b.algorithmic_error,
        }
    }

    pub fn spectral_efficiency(&self) -> f64 {
        match self {
            ParadigmOutcome::Oce(o) => o.spectral_efficiency,
            ParadigmOutcome::Bsw(b) => b.spectral_efficiency,
        }
    }

    /// SNR the paradigm believes it has; `None` when no sweep entry qualified.
    pub fn estimated_snr(&self) -> Option<f64> {
        match self {
            ParadigmOutcome::Oce(o) => Some(o.estimated_snr),
            ParadigmOutcome::Bsw(b) => b.estimated_snr,
        }
    }

    /// True SNR of the chosen configuration; `None` when nothing was chosen.
    pub fn actual_snr(&self) -> Option<f64> {
        match self {
            ParadigmOutcome::Oce(o) => Some(o.actual_snr),
            ParadigmOutcome::Bsw(b) => b.actual_snr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub paradigm_outcome: ParadigmOutcome,
    pub timing: FrameTiming,
    pub control_success: bool,
    pub goodput_bps: f64,
}

/// Per-trial goodput: `(τ_pay/τ)·B_d·η`, or 0 on any failure.
pub fn trial_goodput(
    control_success: bool,
    algorithmic_error: bool,
    timing: &FrameTiming,
    bandwidth_data_hz: f64,
    spectral_efficiency: f64,
) -> f64 {
    if !control_success || algorithmic_error || timing.tau_pay.is_zero() {
        0.0
    } else {
        timing.payload_fraction() * bandwidth_data_hz * spectral_efficiency
    }
}

/// Aggregate over `n_trials` trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub mean_goodput_bps: f64,
    pub empirical_p_ae: f64,
    pub empirical_p_cc: f64,
    /// Mean of `(τ_pay/τ)·B_d·η` over trials without algorithmic error (0 if none).
    pub mean_error_free_rate_bps: f64,
    pub goodput_cdf_samples: Vec<f64>,
    /// True SNRs of the chosen configurations (linear), sorted.
    pub actual_snr_samples: Vec<f64>,
    /// Estimated SNRs of the chosen configurations (linear), sorted.
    pub estimated_snr_samples: Vec<f64>,
    pub n_trials: u64,
    pub master_seed: u64,
}

/// Compact per-trial record kept for aggregation.
#[derive(Debug, Clone, Copy)]
struct TrialRecord {
    goodput: f64,
    error_free_rate: Option<f64>,
    control_success: bool,
    actual_snr: Option<f64>,
    estimated_snr: Option<f64>,
}

/// A validated configuration with its codebooks and packet budgets precomputed.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    scenario: Scenario,
    codebook: Codebook,
    pilot_len: u32,
    budgets: [PacketBudget; 4],
    conf_warning: Option<String>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.frame.validate(config.paradigm)?;
        config.radio.validate(config.cc == CcKind::Ibcc)?;
        if !(config.gamma0 >= 0.0) || config.gamma0.is_infinite() {
            return Err(Error::Config("gamma0 must be finite and >= 0".into()));
        }
        if let AeMode::Margin(m) = config.ae_mode {
            if !(m >= 0.0) || m.is_infinite() {
                return Err(Error::Config("ae margin must be finite and >= 0 dB".into()));
            }
        }
        let n = config.geometry.n_elements();
        let common = dft_codebook(n, config.ce_cardinality)?;
        let codebook = match config.paradigm {
            Paradigm::Oce => common.clone(),
            Paradigm::BswFixed => {
                subsample(&common, config.fixed_stride)?.with_kind(CodebookKind::BeamSweepingFixed)
            }
            Paradigm::BswFlexible => common.clone().with_kind(CodebookKind::BeamSweepingFlexible),
        };
        let conf_warning = config.bits.check_conf_width(common.cardinality())?;
        let pilot_len = config.frame.pilot_length()?;
        let budgets = packet_budgets(
            config.paradigm,
            &config.bits,
            n,
            codebook.cardinality(),
            &config.frame,
            &config.radio,
        )?;
        let scenario = Scenario::new(config.geometry.clone(), config.lambda_u, config.lambda_r)?;
        let exp = Self {
            config,
            scenario,
            codebook,
            pilot_len,
            budgets,
            conf_warning,
        };
        // surface estimator and timing problems before any trial runs
        if exp.config.paradigm == Paradigm::Oce {
            exp.oce()?;
        } else {
            exp.bsw()?;
        }
        let c_star = (exp.config.paradigm == Paradigm::BswFlexible).then_some(1);
        FrameTiming::new(
            &exp.config.frame,
            exp.config.paradigm,
            exp.config.cc,
            exp.codebook.cardinality(),
            c_star,
        )?;
        Ok(exp)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Codebook the paradigm operates on.
    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn budgets(&self) -> &[PacketBudget; 4] {
        &self.budgets
    }

    pub fn pilot_length(&self) -> u32 {
        self.pilot_len
    }

    /// Warning raised when `b_conf` only meets the floor width.
    pub fn conf_warning(&self) -> Option<&str> {
        self.conf_warning.as_deref()
    }

    /// Closed-form probability of correct control for this configuration.
    pub fn correct_control_prob(&self) -> Result<f64> {
        correct_control_prob(
            self.config.cc,
            &self.budgets,
            self.config.lambda_u,
            self.config.lambda_r,
        )
    }

    fn oce(&self) -> Result<Oce<'_>> {
        let oce = Oce::new(
            &self.codebook,
            &self.config.radio,
            self.pilot_len,
            self.config.ae_mode,
        )?;
        Ok(if self.config.pilot_noise {
            oce
        } else {
            oce.noiseless()
        })
    }

    fn bsw(&self) -> Result<Bsw<'_>> {
        let frame = match self.config.paradigm {
            Paradigm::BswFlexible => FrameKind::Flexible,
            _ => FrameKind::Fixed,
        };
        let bsw = Bsw::new(
            &self.codebook,
            &self.config.radio,
            self.pilot_len,
            self.config.gamma0,
            frame,
        )?;
        Ok(if self.config.pilot_noise {
            bsw
        } else {
            bsw.noiseless()
        })
    }

    /// Control-packet outcome of a trial; identical to the one [`Experiment::run_trial`] draws.
    pub fn sample_control(&self, trial_index: u64, master_seed: u64) -> Result<bool> {
        let mut rng = trial_rng(master_seed, trial_index, STREAM_CONTROL);
        sample_control_success(
            &mut rng,
            self.config.cc,
            &self.budgets,
            self.config.lambda_u,
            self.config.lambda_r,
        )
    }

    pub fn run_trial(&self, trial_index: u64, master_seed: u64) -> Result<TrialResult> {
        let mut pos_rng = trial_rng(master_seed, trial_index, STREAM_POSITION);
        let mut alg_rng = trial_rng(master_seed, trial_index, STREAM_PARADIGM);
        let channel = self.scenario.realize(&mut pos_rng)?;
        let cardinality = self.codebook.cardinality();
        let (outcome, c_star) = match self.config.paradigm {
            Paradigm::Oce => (
                ParadigmOutcome::Oce(self.oce()?.run(&channel.z, &mut alg_rng)?),
                None,
            ),
            _ => {
                let b = self.bsw()?.run(&channel.z, &mut alg_rng)?;
                // without a qualifying entry the whole flexible sweep is spent
                let c_star = b.c_star().or(Some(cardinality));
                (ParadigmOutcome::Bsw(b), c_star)
            }
        };
        let timing = FrameTiming::new(
            &self.config.frame,
            self.config.paradigm,
            self.config.cc,
            cardinality,
            c_star,
        )?;
        let control_success = self.sample_control(trial_index, master_seed)?;
        let goodput_bps = trial_goodput(
            control_success,
            outcome.algorithmic_error(),
            &timing,
            self.config.radio.bandwidth_data_hz,
            outcome.spectral_efficiency(),
        );
        Ok(TrialResult {
            paradigm_outcome: outcome,
            timing,
            control_success,
            goodput_bps,
        })
    }

    fn record(&self, trial_index: u64, master_seed: u64) -> Result<TrialRecord> {
        let t = self.run_trial(trial_index, master_seed)?;
        let error_free_rate = (!t.paradigm_outcome.algorithmic_error()).then(|| {
            trial_goodput(
                true,
                false,
                &t.timing,
                self.config.radio.bandwidth_data_hz,
                t.paradigm_outcome.spectral_efficiency(),
            )
        });
        Ok(TrialRecord {
            goodput: t.goodput_bps,
            error_free_rate,
            control_success: t.control_success,
            actual_snr: t.paradigm_outcome.actual_snr(),
            estimated_snr: t.paradigm_outcome.estimated_snr(),
        })
    }

    pub fn run(&self, n_trials: u64, master_seed: u64) -> Result<ExperimentSummary> {
        if n_trials == 0 {
            return Err(Error::Config("n_trials must be >= 1".into()));
        }
        let records = (0..n_trials)
            .into_par_iter()
            .map(|i| self.record(i, master_seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(summarize(&records, master_seed))
    }
}

fn trial_rng(master_seed: u64, trial_index: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(
        trial_index
            .wrapping_mul(STREAMS_PER_TRIAL)
            .wrapping_add(stream),
    );
    rng
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn summarize(records: &[TrialRecord], master_seed: u64) -> ExperimentSummary {
    let n = records.len() as f64;
    let mean_goodput_bps = records.iter().map(|r| r.goodput).sum::<f64>() / n;
    let error_free: Vec<f64> = records.iter().filter_map(|r| r.error_free_rate).collect();
    let empirical_p_ae = 1.0 - error_free.len() as f64 / n;
    let mean_error_free_rate_bps = if error_free.is_empty() {
        0.0
    } else {
        error_free.iter().sum::<f64>() / error_free.len() as f64
    };
    let empirical_p_cc = records.iter().filter(|r| r.control_success).count() as f64 / n;
    ExperimentSummary {
        mean_goodput_bps,
        empirical_p_ae,
        empirical_p_cc,
        mean_error_free_rate_bps,
        goodput_cdf_samples: sorted(records.iter().map(|r| r.goodput).collect()),
        actual_snr_samples: sorted(records.iter().filter_map(|r| r.actual_snr).collect()),
        estimated_snr_samples: sorted(records.iter().filter_map(|r| r.estimated_snr).collect()),
        n_trials: records.len() as u64,
        master_seed,
    }
}

pub fn run_trial(
    config: &ExperimentConfig,
    trial_index: u64,
    master_seed: u64,
) -> Result<TrialResult> {
    Experiment::new(config.clone())?.run_trial(trial_index, master_seed)
}

pub fn run_experiment(
    config: &ExperimentConfig,
    n_trials: u64,
    master_seed: u64,
) -> Result<ExperimentSummary> {
    Experiment::new(config.clone())?.run(n_trials, master_seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub best_gamma0_db: f64,
    /// `(γ₀ dB, mean goodput)` per grid point, in grid order.
    pub table: Vec<(f64, f64)>,
}

/// Mean goodput per target SNR with common random numbers; ties go to the lower γ₀.
pub fn calibrate_gamma0(
    config: &ExperimentConfig,
    gamma0_grid_db: &[f64],
    n_trials: u64,
    master_seed: u64,
) -> Result<Calibration> {
    if gamma0_grid_db.is_empty() {
        return Err(Error::Config("empty gamma0 grid".into()));
    }
    if !config.paradigm.is_bsw() {
        return Err(Error::Config(
            "gamma0 calibration applies to beam sweeping only".into(),
        ));
    }
    let table = gamma0_grid_db
        .iter()
        .map(|&db| {
            let cfg = ExperimentConfig {
                gamma0: db_to_linear(db),
                ..config.clone()
            };
            Ok((
                db,
                run_experiment(&cfg, n_trials, master_seed)?.mean_goodput_bps,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = table
        .iter()
        .copied()
        .fold(None::<(f64, f64)>, |best, (db, g)| match best {
            Some((bdb, bg)) if bg > g || (bg == g && bdb <= db) => Some((bdb, bg)),
            _ => Some((db, g)),
        });
    Ok(Calibration {
        best_gamma0_db: best.expect("nonempty grid").0,
        table,
    })
}

/// `p_cc·(1 − p_ae)·(1 − overhead/τ)·B_d·η`, floored at 0.
pub fn utility_closed_form(
    p_cc: f64,
    p_ae: f64,
    timing: &FrameTiming,
    bandwidth_data_hz: f64,
    eta: f64,
) -> Result<f64> {
    for (name, p) in [("p_cc", p_cc), ("p_ae", p_ae)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    let overhead = timing.overhead().as_nanos() as f64 / timing.tau.as_nanos() as f64;
    Ok((p_cc * (1.0 - p_ae) * (1.0 - overhead) * bandwidth_data_hz * eta).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn cfg(paradigm: Paradigm, cc: CcKind) -> ExperimentConfig {
        ExperimentConfig::new(paradigm, cc).unwrap()
    }

    #[test]
    fn forced_control_failure_gives_zero() {
        let mut c = cfg(Paradigm::Oce, CcKind::Obcc);
        c.lambda_u = 1e-12;
        let exp = Experiment::new(c).unwrap();
        for i in 0..20 {
            let t = exp.run_trial(i, 3).unwrap();
            assert!(!t.control_success);
            assert_eq!(t.goodput_bps, 0.0);
        }
    }

    #[test]
    fn noiseless_oce_goodput() {
        let mut c = cfg(Paradigm::Oce, CcKind::Obcc);
        c.pilot_noise = false;
        let exp = Experiment::new(c.clone()).unwrap();
        let t = exp.run_trial(7, 11).unwrap();
        assert_eq!(t.timing.tau_pay, Duration::from_micros(6450));
        let mut rng = trial_rng(11, 7, STREAM_POSITION);
        let z = exp.scenario.realize(&mut rng).unwrap().z;
        let sum_abs: f64 = z.iter().map(|v| v.norm()).sum();
        let gamma = c.radio.snr_scale() * sum_abs * sum_abs;
        let expected = 6.45 / 60.0 * 180e3 * (1.0 + gamma).log2();
        assert!(
            (t.goodput_bps - expected).abs() <= 1e-9 * expected,
            "{} vs {expected}",
            t.goodput_bps
        );
        assert!(t.control_success);
        assert!(!t.paradigm_outcome.algorithmic_error());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let exp = Experiment::new(cfg(Paradigm::BswFlexible, CcKind::Ibcc)).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| exp.run(64, 99).unwrap())
        };
        assert_eq!(run(1), run(4));
        assert_eq!(exp.run_trial(5, 99).unwrap(), exp.run_trial(5, 99).unwrap());
    }

    #[test]
    fn single_trial_summary() {
        let exp = Experiment::new(cfg(Paradigm::BswFixed, CcKind::Obcc)).unwrap();
        let s = exp.run(1, 4).unwrap();
        let t = exp.run_trial(0, 4).unwrap();
        assert_eq!(s.n_trials, 1);
        assert_eq!(s.mean_goodput_bps, t.goodput_bps);
        assert_eq!(s.goodput_cdf_samples, vec![t.goodput_bps]);
        assert_eq!(s.empirical_p_cc, 1.0);
        assert_eq!(
            s.empirical_p_ae,
            if t.paradigm_outcome.algorithmic_error() {
                1.0
            } else {
                0.0
            }
        );
    }

    #[test]
    fn control_draw_matches_trial() {
        let mut c = cfg(Paradigm::Oce, CcKind::Ibcc);
        c.lambda_u = 4.0;
        c.lambda_r = 30.0;
        let exp = Experiment::new(c).unwrap();
        for i in 0..30 {
            assert_eq!(
                exp.run_trial(i, 12).unwrap().control_success,
                exp.sample_control(i, 12).unwrap()
            );
        }
    }

    #[test]
    fn paradigms_share_positions() {
        let a = Experiment::new(cfg(Paradigm::Oce, CcKind::Obcc)).unwrap();
        let b = Experiment::new(cfg(Paradigm::BswFixed, CcKind::Obcc)).unwrap();
        let pos = |e: &Experiment| {
            e.scenario
                .realize(&mut trial_rng(1, 9, STREAM_POSITION))
                .unwrap()
        };
        assert_eq!(pos(&a), pos(&b));
    }

    #[test]
    fn zero_trials_rejected() {
        let exp = Experiment::new(cfg(Paradigm::BswFixed, CcKind::Obcc)).unwrap();
        assert!(exp.run(0, 0).is_err());
    }

    #[test]
    fn invalid_config_rejected_up_front() {
        let mut c = cfg(Paradigm::Oce, CcKind::Obcc);
        c.frame.guard = Duration::from_micros(600);
        assert!(matches!(Experiment::new(c), Err(Error::Config(_))));
        let mut c = cfg(Paradigm::Oce, CcKind::Obcc);
        c.ce_cardinality = 50;
        assert!(Experiment::new(c).is_err());
        let mut c = cfg(Paradigm::Oce, CcKind::Obcc);
        c.bits.b_conf = 3;
        assert!(Experiment::new(c).is_err());
    }

    #[test]
    fn flexible_no_config_spends_full_sweep() {
        let mut c = cfg(Paradigm::BswFlexible, CcKind::Obcc);
        c.gamma0 = 1e30;
        let exp = Experiment::new(c).unwrap();
        let t = exp.run_trial(0, 1).unwrap();
        assert_eq!(t.timing.tau_alg, Duration::from_micros(500) * 199);
        assert_eq!(t.goodput_bps, 0.0);
    }

    #[test]
    fn empirical_pcc_matches_closed_form() {
        let mut c = cfg(Paradigm::BswFixed, CcKind::Ibcc);
        c.lambda_u = 5.0;
        c.lambda_r = 8.0;
        let exp = Experiment::new(c).unwrap();
        let n = 20_000;
        let hits = (0..n)
            .filter(|&i| exp.sample_control(i, 21).unwrap())
            .count();
        let p = exp.correct_control_prob().unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn mean_goodput_matches_utility_decomposition() {
        let mut c = cfg(Paradigm::BswFixed, CcKind::Obcc);
        c.lambda_u = 20.0;
        let exp = Experiment::new(c).unwrap();
        let s = exp.run(4000, 2).unwrap();
        // control draws are independent of the algorithmic outcome
        let predicted = s.empirical_p_cc * (1.0 - s.empirical_p_ae) * s.mean_error_free_rate_bps;
        assert!((s.mean_goodput_bps - predicted).abs() <= 0.05 * predicted);
    }

    #[test]
    fn calibration_basics() {
        let c = cfg(Paradigm::BswFixed, CcKind::Obcc);
        let one = calibrate_gamma0(&c, &[7.0], 10, 0).unwrap();
        assert_eq!(one.best_gamma0_db, 7.0);
        assert!(calibrate_gamma0(&c, &[], 10, 0).is_err());
        // identical columns tie to the lower target
        let mut c0 = c.clone();
        c0.lambda_u = 1e-12;
        assert_eq!(
            calibrate_gamma0(&c0, &[5.0, 3.0, 4.0], 5, 0)
                .unwrap()
                .best_gamma0_db,
            3.0
        );
    }

    #[test]
    fn utility_examples() {
        let frame = FrameParams::default();
        let t = FrameTiming::new(&frame, Paradigm::Oce, CcKind::Obcc, 100, None).unwrap();
        let u = utility_closed_form(1.0, 0.0, &t, 180e3, 5.0).unwrap();
        assert!((u - 96_750.0).abs() < 1e-6);
        assert_eq!(utility_closed_form(0.0, 0.0, &t, 180e3, 5.0).unwrap(), 0.0);
        let free = FrameTiming {
            tau: frame.tau,
            tau_set: Duration::ZERO,
            tau_alg: Duration::ZERO,
            tau_ack: Duration::ZERO,
            tau_pay: frame.tau,
        };
        assert_eq!(
            utility_closed_form(1.0, 0.0, &free, 180e3, 5.0).unwrap(),
            900e3
        );
        assert!(utility_closed_form(1.5, 0.0, &t, 180e3, 5.0).is_err());
        let short = FrameParams {
            tau: Duration::from_millis(50),
            ..frame
        };
        let t = FrameTiming::new(&short, Paradigm::Oce, CcKind::Obcc, 100, None).unwrap();
        assert_eq!(utility_closed_form(1.0, 0.0, &t, 180e3, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn utility_nonincreasing_in_control_error() {
        let t = FrameTiming::new(
            &FrameParams::default(),
            Paradigm::Oce,
            CcKind::Obcc,
            100,
            None,
        )
        .unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=20 {
            let u = utility_closed_form(1.0 - k as f64 / 20.0, 0.1, &t, 180e3, 5.0).unwrap();
            assert!(u <= last);
            last = u;
        }
    }
}
