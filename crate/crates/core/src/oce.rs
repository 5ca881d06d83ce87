//! Optimal-configuration-estimation paradigm.
//!
//! The UE sends one pilot per entry of the estimation codebook, the BS
//! recovers the equivalent channel by least squares, aligns every element to
//! the estimated phase and adapts the spectral efficiency to the SNR it
//! predicts for that configuration.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::codebook::{Codebook, CodebookKind, Configuration};
use crate::error::{Error, Result};
use crate::noise::complex_gaussian;
use crate::scenario::{ChannelRealization, RadioParams};
use crate::units::db_to_linear;

/// Gram tolerance used when admitting an estimation codebook.
pub const GRAM_TOL: f64 = 1e-9;

/// Relative slack below which strict mode treats two SNRs as equal (rounding only).
pub const STRICT_RTOL: f64 = 1e-12;

/// How an SNR overestimate is scored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AeMode {
    /// Any overestimate `γ̂ > γ` is an error.
    Strict,
    /// Estimation noise never causes an error.
    #[default]
    Negligible,
    /// Error when `γ̂` exceeds `γ` by more than the margin (dB).
    Margin(f64),
}

impl AeMode {
    pub fn is_error(&self, estimated_snr: f64, actual_snr: f64) -> bool {
        match *self {
            AeMode::Strict => estimated_snr > actual_snr * (1.0 + STRICT_RTOL),
            AeMode::Negligible => false,
            AeMode::Margin(db) => estimated_snr > actual_snr * db_to_linear(db),
        }
    }
}

impl FromStr for AeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "strict" => Ok(AeMode::Strict),
            "negligible" => Ok(AeMode::Negligible),
            _ => {
                let db = s
                    .strip_prefix("margin:")
                    .ok_or_else(|| Error::Config(format!("unknown ae_mode '{s}'")))?;
                let db: f64 = db
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad margin in ae_mode '{s}'")))?;
                if !db.is_finite() {
                    return Err(Error::Config("ae_mode margin must be finite".into()));
                }
                Ok(AeMode::Margin(db))
            }
        }
    }
}

impl fmt::Display for AeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AeMode::Strict => f.write_str("strict"),
            AeMode::Negligible => f.write_str("negligible"),
            AeMode::Margin(db) => write!(f, "margin:{db}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OceOutcome {
    pub estimated_channel: Vec<Complex64>,
    pub optimal_config: Configuration,
    pub estimated_snr: f64,
    pub actual_snr: f64,
    pub spectral_efficiency: f64,
    pub algorithmic_error: bool,
}

/// Matched-filter output of one pilot: `φᵀz + w`, `w ~ CN(0, σ_b²/(p ρ_u))`.
///
/// The pilot sequence itself is not generated; only its correlator statistic is.
pub fn pilot_observation<R: Rng + ?Sized>(
    z: &[Complex64],
    config: &Configuration,
    rho_u: f64,
    sigma_b2: f64,
    p: u32,
    rng: &mut R,
) -> Result<Complex64> {
    if p == 0 {
        return Err(Error::Config("pilot length must be >= 1".into()));
    }
    if !(rho_u > 0.0) || sigma_b2 < 0.0 {
        return Err(Error::Config(
            "transmit power must be positive, noise nonnegative".into(),
        ));
    }
    let signal = config.apply(z)?;
    if sigma_b2 == 0.0 {
        return Ok(signal);
    }
    Ok(signal + complex_gaussian(rng, sigma_b2 / (p as f64 * rho_u)))
}

/// Least-squares estimator `ẑ = Θ* y / C` for a codebook with `Θ*Θᵀ = C·I`.
#[derive(Debug, Clone)]
pub struct LsEstimator<'a> {
    codebook: &'a Codebook,
}

impl<'a> LsEstimator<'a> {
    /// Checks the Gram property once so per-trial estimates skip it.
    pub fn new(codebook: &'a Codebook) -> Result<Self> {
        let dev = codebook.gram_deviation();
        if !(dev <= GRAM_TOL * codebook.cardinality() as f64) {
            return Err(Error::Estimation(format!(
                "codebook is not orthogonal: Gram deviation {dev:e}"
            )));
        }
        Ok(Self { codebook })
    }

    pub fn estimate(&self, observations: &[Complex64]) -> Result<Vec<Complex64>> {
        let c = self.codebook.cardinality();
        if observations.len() != c {
            return Err(Error::Shape {
                expected: c,
                got: observations.len(),
            });
        }
        let n = self.codebook.n_elements();
        let mut z_hat = vec![Complex64::new(0.0, 0.0); n];
        for (cfg, y) in self.codebook.configs().iter().zip(observations) {
            for (acc, phi) in z_hat.iter_mut().zip(cfg.phases()) {
                *acc += phi.conj() * y;
            }
        }
        let scale = 1.0 / c as f64;
        z_hat.iter_mut().for_each(|v| *v *= scale);
        Ok(z_hat)
    }
}

/// One-shot least-squares estimate; validates the codebook on every call.
pub fn ls_estimate(observations: &[Complex64], codebook: &Codebook) -> Result<Vec<Complex64>> {
    LsEstimator::new(codebook)?.estimate(observations)
}

/// Phase-conjugate configuration `φ_n = e^{−j∠ẑ_n}`; a zero entry gets phase 0.
pub fn optimal_config(z_hat: &[Complex64]) -> Configuration {
    let phases = z_hat
        .iter()
        .map(|v| {
            let r = v.norm();
            if r == 0.0 || !r.is_finite() {
                Complex64::new(1.0, 0.0)
            } else {
                v.conj() / r
            }
        })
        .collect();
    Configuration::new(phases).expect("normalized phases are unit modulus")
}

/// Channel-estimation pipeline bound to a codebook and radio parameters.
#[derive(Debug, Clone)]
pub struct Oce<'a> {
    estimator: LsEstimator<'a>,
    rho_u: f64,
    sigma_b2: f64,
    pilot_len: u32,
    ae_mode: AeMode,
    pilot_noise: bool,
}

impl<'a> Oce<'a> {
    pub fn new(
        codebook: &'a Codebook,
        radio: &RadioParams,
        pilot_len: u32,
        ae_mode: AeMode,
    ) -> Result<Self> {
        Self::with_powers(
            codebook,
            radio.rho_u_w(),
            radio.sigma_b2_w(),
            pilot_len,
            ae_mode,
        )
    }

    /// Same as [`Oce::new`] with linear powers in watts.
    pub fn with_powers(
        codebook: &'a Codebook,
        rho_u: f64,
        sigma_b2: f64,
        pilot_len: u32,
        ae_mode: AeMode,
    ) -> Result<Self> {
        if codebook.kind() != CodebookKind::ChannelEstimation {
            return Err(Error::Config(
                "OCE needs a channel-estimation codebook".into(),
            ));
        }
        if codebook.cardinality() < codebook.n_elements() {
            return Err(Error::Config(
                "estimation codebook smaller than the surface".into(),
            ));
        }
        if pilot_len == 0 {
            return Err(Error::Config("pilot length must be >= 1".into()));
        }
        if !(rho_u > 0.0) || sigma_b2 < 0.0 {
            return Err(Error::Config(
                "transmit power must be positive, noise nonnegative".into(),
            ));
        }
        Ok(Self {
            estimator: LsEstimator::new(codebook)?,
            rho_u,
            sigma_b2,
            pilot_len,
            ae_mode,
            pilot_noise: true,
        })
    }

    /// Disables pilot noise while keeping `ρ_u/σ_b²` as the SNR scale.
    pub fn noiseless(mut self) -> Self {
        self.pilot_noise = false;
        self
    }

    pub fn run<R: Rng + ?Sized>(&self, z: &[Complex64], rng: &mut R) -> Result<OceOutcome> {
        let observations = self
            .estimator
            .codebook
            .configs()
            .iter()
            .map(|cfg| {
                let noise = if self.pilot_noise { self.sigma_b2 } else { 0.0 };
                pilot_observation(z, cfg, self.rho_u, noise, self.pilot_len, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let estimated_channel = self.estimator.estimate(&observations)?;
        let optimal_config = optimal_config(&estimated_channel);
        let scale = if self.sigma_b2 == 0.0 {
            f64::INFINITY
        } else {
            self.rho_u / self.sigma_b2
        };
        let estimated_snr = scale * optimal_config.apply(&estimated_channel)?.norm_sqr();
        let actual_snr = scale * optimal_config.apply(z)?.norm_sqr();
        Ok(OceOutcome {
            algorithmic_error: self.ae_mode.is_error(estimated_snr, actual_snr),
            spectral_efficiency: (1.0 + estimated_snr).log2(),
            estimated_channel,
            optimal_config,
            estimated_snr,
            actual_snr,
        })
    }
}

pub fn run_oce<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    codebook: &Codebook,
    radio: &RadioParams,
    pilot_len: u32,
    rng: &mut R,
    ae_mode: AeMode,
) -> Result<OceOutcome> {
    Oce::new(codebook, radio, pilot_len, ae_mode)?.run(&channel.z, rng)
}
