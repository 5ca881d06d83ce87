//! Beam-sweeping paradigm.
//!
//! The surface steps through a predefined codebook while the UE repeats its
//! pilot. The BS estimates the SNR of every configuration it observes and
//! picks one meeting a fixed target `γ₀`, which also fixes the rate
//! `log₂(1 + γ₀)`. Two selection rules are supported: the fixed frame sweeps
//! the whole codebook and takes the best candidate, the flexible frame stops
//! at the first configuration reaching the target.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::codebook::{Codebook, Configuration};
use crate::error::{Error, Result};
use crate::noise::complex_gaussian;
use crate::scenario::{ChannelRealization, RadioParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Fixed,
    Flexible,
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameKind::Fixed => "fixed",
            FrameKind::Flexible => "flexible",
        })
    }
}

impl FromStr for FrameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed" => Ok(FrameKind::Fixed),
            "flexible" => Ok(FrameKind::Flexible),
            other => Err(Error::Config(format!("unknown frame kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BswErrorKind {
    None,
    /// No configuration reached the target.
    NoConfig,
    /// The chosen configuration's true SNR is below the target.
    Overestimation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BswOutcome {
    /// Zero-based position in the sweeping codebook.
    pub selected_index: Option<usize>,
    pub sweep_count: usize,
    pub estimated_snr: Option<f64>,
    pub actual_snr: Option<f64>,
    pub target_snr: f64,
    pub spectral_efficiency: f64,
    pub algorithmic_error: bool,
    pub error_kind: BswErrorKind,
}

impl BswOutcome {
    /// One-based `c★` as used by the flexible-frame TTI count.
    pub fn c_star(&self) -> Option<usize> {
        self.selected_index.map(|i| i + 1)
    }
}

/// Matched-filter sample `y = √ρ_u φᵀz + w`, `w ~ CN(0, σ_b²/p)`, and `|y|²/σ_b²`.
pub fn sweep_observation<R: Rng + ?Sized>(
    z: &[Complex64],
    config: &Configuration,
    rho_u: f64,
    sigma_b2: f64,
    p: u32,
    rng: &mut R,
) -> Result<(Complex64, f64)> {
    if p == 0 {
        return Err(Error::Config("pilot length must be >= 1".into()));
    }
    if !(rho_u > 0.0 && sigma_b2 > 0.0) {
        return Err(Error::Config(
            "transmit and noise powers must be positive".into(),
        ));
    }
    observe(z, config, rho_u, sigma_b2, Some(p), rng)
}

fn observe<R: Rng + ?Sized>(
    z: &[Complex64],
    config: &Configuration,
    rho_u: f64,
    sigma_b2: f64,
    p: Option<u32>,
    rng: &mut R,
) -> Result<(Complex64, f64)> {
    let mut y = rho_u.sqrt() * config.apply(z)?;
    if let Some(p) = p {
        y += complex_gaussian(rng, sigma_b2 / p as f64);
    }
    Ok((y, y.norm_sqr() / sigma_b2))
}

/// Highest estimate among those reaching `gamma0`; ties go to the lowest index.
pub fn select_fixed(estimates: &[f64], gamma0: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &g) in estimates.iter().enumerate() {
        if g >= gamma0 && best.is_none_or(|(_, b)| g > b) {
            best = Some((i, g));
        }
    }
    best.map(|(i, _)| i)
}

/// First estimate reaching `gamma0`, pulling at most `max_count` values.
///
/// Returns the zero-based index and the number of values consumed.
pub fn select_flexible<I>(estimates: I, gamma0: f64, max_count: usize) -> (Option<usize>, usize)
where
    I: IntoIterator<Item = f64>,
{
    let mut consumed = 0;
    for g in estimates.into_iter().take(max_count) {
        consumed += 1;
        if g >= gamma0 {
            return (Some(consumed - 1), consumed);
        }
    }
    (None, consumed)
}

/// Upper bound `min(1, p⁻¹ / (γ̂ − γ₀))` on the overestimation probability.
pub fn chebyshev_bound(estimated_snr: f64, gamma0: f64, p: u32) -> Result<f64> {
    if !(estimated_snr > gamma0) {
        return Err(Error::Domain(format!(
            "estimate {estimated_snr} does not exceed the target {gamma0}"
        )));
    }
    if p == 0 {
        return Err(Error::Config("pilot length must be >= 1".into()));
    }
    Ok((1.0 / p as f64 / (estimated_snr - gamma0)).min(1.0))
}

/// Beam-sweeping pipeline bound to a codebook and radio parameters.
#[derive(Debug, Clone)]
pub struct Bsw<'a> {
    codebook: &'a Codebook,
    rho_u: f64,
    sigma_b2: f64,
    pilot_len: u32,
    gamma0: f64,
    frame: FrameKind,
    pilot_noise: bool,
}

impl<'a> Bsw<'a> {
    pub fn new(
        codebook: &'a Codebook,
        radio: &RadioParams,
        pilot_len: u32,
        gamma0: f64,
        frame: FrameKind,
    ) -> Result<Self> {
        Self::with_powers(
            codebook,
            radio.rho_u_w(),
            radio.sigma_b2_w(),
            pilot_len,
            gamma0,
            frame,
        )
    }

    pub fn with_powers(
        codebook: &'a Codebook,
        rho_u: f64,
        sigma_b2: f64,
        pilot_len: u32,
        gamma0: f64,
        frame: FrameKind,
    ) -> Result<Self> {
        if pilot_len == 0 {
            return Err(Error::Config("pilot length must be >= 1".into()));
        }
        if !(rho_u > 0.0 && sigma_b2 > 0.0) {
            return Err(Error::Config(
                "transmit and noise powers must be positive".into(),
            ));
        }
        if !(gamma0 >= 0.0) || gamma0.is_infinite() {
            return Err(Error::Config(format!(
                "target SNR must be finite and >= 0, got {gamma0}"
            )));
        }
        Ok(Self {
            codebook,
            rho_u,
            sigma_b2,
            pilot_len,
            gamma0,
            frame,
            pilot_noise: true,
        })
    }

    /// Disables pilot noise; estimates then equal the true per-configuration SNRs.
    pub fn noiseless(mut self) -> Self {
        self.pilot_noise = false;
        self
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// True SNR `ρ_u/σ_b² |φ_cᵀz|²` of configuration `c`.
    pub fn actual_snr(&self, z: &[Complex64], c: usize) -> Result<f64> {
        let cfg = self
            .codebook
            .get(c)
            .ok_or_else(|| Error::Contract(format!("codebook index {c} out of range")))?;
        Ok(self.rho_u / self.sigma_b2 * cfg.apply(z)?.norm_sqr())
    }

    fn estimate<R: Rng + ?Sized>(&self, z: &[Complex64], c: usize, rng: &mut R) -> Result<f64> {
        let p = self.pilot_noise.then_some(self.pilot_len);
        Ok(observe(
            z,
            &self.codebook.configs()[c],
            self.rho_u,
            self.sigma_b2,
            p,
            rng,
        )?
        .1)
    }

    pub fn run<R: Rng + ?Sized>(&self, z: &[Complex64], rng: &mut R) -> Result<BswOutcome> {
        let count = self.codebook.cardinality();
        let (selected, sweep_count, estimated) = match self.frame {
            FrameKind::Fixed => {
                let estimates = (0..count)
                    .map(|c| self.estimate(z, c, rng))
                    .collect::<Result<Vec<_>>>()?;
                let sel = select_fixed(&estimates, self.gamma0);
                (sel, count, sel.map(|i| estimates[i]))
            }
            FrameKind::Flexible => {
                let mut failure = None;
                let mut last = f64::NAN;
                let stream = (0..count).map_while(|c| match self.estimate(z, c, rng) {
                    Ok(g) => {
                        last = g;
                        Some(g)
                    }
                    Err(e) => {
                        failure = Some(e);
                        None
                    }
                });
                let (sel, consumed) = select_flexible(stream, self.gamma0, count);
                if let Some(e) = failure {
                    return Err(e);
                }
                (sel, consumed, sel.map(|_| last))
            }
        };
        let actual = selected.map(|c| self.actual_snr(z, c)).transpose()?;
        let error_kind = match actual {
            None => BswErrorKind::NoConfig,
            Some(a) if a < self.gamma0 => BswErrorKind::Overestimation,
            Some(_) => BswErrorKind::None,
        };
        Ok(BswOutcome {
            selected_index: selected,
            sweep_count,
            estimated_snr: estimated,
            actual_snr: actual,
            target_snr: self.gamma0,
            spectral_efficiency: (1.0 + self.gamma0).log2(),
            algorithmic_error: error_kind != BswErrorKind::None,
            error_kind,
        })
    }
}

pub fn run_bsw<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    codebook: &Codebook,
    radio: &RadioParams,
    pilot_len: u32,
    gamma0: f64,
    frame: FrameKind,
    rng: &mut R,
) -> Result<BswOutcome> {
    Bsw::new(codebook, radio, pilot_len, gamma0, frame)?.run(&channel.z, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{dft_codebook, subsample};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::cell::Cell;

    fn random_channel(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
    }

    #[test]
    fn noiseless_estimate_equals_true_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cb = dft_codebook(8, 8).unwrap();
        let z = random_channel(&mut rng, 8);
        let bsw = Bsw::with_powers(&cb, 2.0, 0.5, 1, 1.0, FrameKind::Fixed)
            .unwrap()
            .noiseless();
        for c in 0..8 {
            let est = bsw.estimate(&z, c, &mut rng).unwrap();
            let truth = 4.0 * cb.configs()[c].apply(&z).unwrap().norm_sqr();
            assert!((est / truth - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_noise_estimate_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = Configuration::from_angles([0.0; 4]).unwrap();
        let z = vec![Complex64::new(0.0, 0.0); 4];
        for p in [1u32, 4] {
            let n = 100_000;
            let mean = (0..n)
                .map(|_| {
                    sweep_observation(&z, &cfg, 1.0, 0.3, p, &mut rng)
                        .unwrap()
                        .1
                })
                .sum::<f64>()
                / n as f64;
            assert!((mean * p as f64 - 1.0).abs() < 0.03, "p={p}: {mean}");
        }
    }

    #[test]
    fn estimate_bias_is_inverse_pilot_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = random_channel(&mut rng, 6);
        let cfg = Configuration::from_angles([0.3, 1.0, 2.0, -1.0, 0.0, 0.7]).unwrap();
        let (rho, sigma2, p) = (1.0, 1.0, 2u32);
        let truth = cfg.apply(&z).unwrap().norm_sqr();
        let n = 100_000;
        let mean_err = (0..n)
            .map(|_| {
                sweep_observation(&z, &cfg, rho, sigma2, p, &mut rng)
                    .unwrap()
                    .1
                    - truth
            })
            .sum::<f64>()
            / n as f64;
        // the cross term has std ≈ sqrt(2·truth/p); tolerance is 3 standard errors
        let se = ((2.0 * truth / p as f64 + 1.0 / (p * p) as f64) / n as f64).sqrt();
        assert!((mean_err - 0.5).abs() < 3.0 * se, "{mean_err} (se {se})");
    }

    #[test]
    fn fixed_selection_examples() {
        assert_eq!(select_fixed(&[5.0, 12.0, 9.0], 8.0), Some(1));
        assert_eq!(select_fixed(&[5.0, 6.0], 8.0), None);
        assert_eq!(select_fixed(&[9.0, 9.0], 8.0), Some(0));
        assert_eq!(select_fixed(&[8.0], 8.0), Some(0));
    }

    #[test]
    fn flexible_selection_examples() {
        assert_eq!(select_flexible([5.0, 9.0, 20.0], 8.0, 3), (Some(1), 2));
        assert_eq!(select_flexible([8.5, 1.0], 8.0, 2), (Some(0), 1));
        assert_eq!(select_flexible([1.0, 2.0, 3.0], 8.0, 3), (None, 3));
    }

    #[test]
    fn flexible_selection_is_lazy() {
        let pulled = Cell::new(0usize);
        let values = [1.0, 2.0, 9.0, 10.0, 11.0];
        let stream = values.iter().map(|v| {
            pulled.set(pulled.get() + 1);
            *v
        });
        let (sel, count) = select_flexible(stream, 8.0, values.len());
        assert_eq!((sel, count), (Some(2), 3));
        assert_eq!(pulled.get(), count);
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_bound(3.0, 1.0, 1).unwrap(), 0.5);
        assert_eq!(chebyshev_bound(1.5, 1.0, 1).unwrap(), 1.0);
        assert!((chebyshev_bound(2.0, 1.0, 100).unwrap() - 0.01).abs() < 1e-15);
        assert!(matches!(
            chebyshev_bound(1.0, 1.0, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn noiseless_run_meets_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cb = dft_codebook(16, 16).unwrap();
        for frame in [FrameKind::Fixed, FrameKind::Flexible] {
            for _ in 0..50 {
                let z = random_channel(&mut rng, 16);
                let bsw = Bsw::with_powers(&cb, 1.0, 1.0, 1, 0.0, frame)
                    .unwrap()
                    .noiseless();
                let snrs: Vec<f64> = (0..16).map(|c| bsw.actual_snr(&z, c).unwrap()).collect();
                let gamma0 = snrs.iter().cloned().fold(0.0, f64::max) * 0.7;
                let bsw = Bsw::with_powers(&cb, 1.0, 1.0, 1, gamma0, frame)
                    .unwrap()
                    .noiseless();
                let out = bsw.run(&z, &mut rng).unwrap();
                assert_eq!(out.error_kind, BswErrorKind::None);
                assert!(out.actual_snr.unwrap() >= gamma0);
                assert_eq!(out.estimated_snr, out.actual_snr);
                if frame == FrameKind::Fixed {
                    assert_eq!(out.sweep_count, 16);
                    assert_eq!(
                        out.actual_snr.unwrap(),
                        snrs.iter().cloned().fold(0.0, f64::max)
                    );
                } else {
                    let first = snrs.iter().position(|&s| s >= gamma0).unwrap();
                    assert_eq!(out.c_star(), Some(first + 1));
                    assert_eq!(out.sweep_count, first + 1);
                }
            }
        }
    }

    #[test]
    fn unreachable_target_ends_in_no_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cb = subsample(&dft_codebook(16, 16).unwrap(), 3).unwrap();
        let z = random_channel(&mut rng, 16);
        let probe = Bsw::with_powers(&cb, 1.0, 1.0, 1000, 0.0, FrameKind::Fixed).unwrap();
        let best = (0..cb.cardinality())
            .map(|c| probe.actual_snr(&z, c).unwrap())
            .fold(0.0, f64::max);
        for frame in [FrameKind::Fixed, FrameKind::Flexible] {
            let bsw = Bsw::with_powers(&cb, 1.0, 1.0, 1000, 1.5 * best + 1.0, frame).unwrap();
            let trials = 2000;
            let no_config = (0..trials)
                .filter(|_| bsw.run(&z, &mut rng).unwrap().error_kind == BswErrorKind::NoConfig)
                .count();
            assert_eq!(no_config, trials);
            let out = bsw.run(&z, &mut rng).unwrap();
            assert_eq!(out.sweep_count, cb.cardinality());
            assert!(out.selected_index.is_none() && out.algorithmic_error);
        }
    }

    #[test]
    fn spectral_efficiency_ignores_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cb = dft_codebook(8, 8).unwrap();
        let bsw = Bsw::with_powers(&cb, 1.0, 0.1, 1, 7.0, FrameKind::Fixed).unwrap();
        for _ in 0..20 {
            let z = random_channel(&mut rng, 8);
            assert_eq!(bsw.run(&z, &mut rng).unwrap().spectral_efficiency, 3.0);
        }
    }

    proptest! {
        #[test]
        fn fixed_dominates_flexible(est in prop::collection::vec(0.0f64..20.0, 1..40), g0 in 0.0f64..20.0) {
            let fixed = select_fixed(&est, g0);
            let (flex, count) = select_flexible(est.iter().copied(), g0, est.len());
            prop_assert_eq!(fixed.is_some(), flex.is_some());
            if let (Some(a), Some(b)) = (fixed, flex) {
                prop_assert!(est[a] >= est[b]);
                prop_assert_eq!(count, b + 1);
            } else {
                prop_assert_eq!(count, est.len());
            }
        }

        #[test]
        fn outcome_invariants(seed in 0u64..500, g0_db in -5.0f64..15.0, flexible in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cb = dft_codebook(9, 9).unwrap();
            let z = random_channel(&mut rng, 9);
            let frame = if flexible { FrameKind::Flexible } else { FrameKind::Fixed };
            let g0 = 10f64.powf(g0_db / 10.0);
            let out = Bsw::with_powers(&cb, 1.0, 1.0, 1, g0, frame).unwrap().run(&z, &mut rng).unwrap();
            prop_assert!(out.sweep_count <= cb.cardinality());
            prop_assert_eq!(out.selected_index.is_some(), out.error_kind != BswErrorKind::NoConfig);
            prop_assert_eq!(out.algorithmic_error, out.error_kind != BswErrorKind::None);
            prop_assert_eq!(out.spectral_efficiency, (1.0 + g0).log2());
            if let Some(e) = out.estimated_snr {
                prop_assert!(e >= g0);
            }
        }
    }
}
