//! Frame-phase durations.
//!
//! Durations are kept as [`Duration`] (integer nanoseconds) so the four phases
//! add up to the frame length exactly.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};

/// Transmission paradigm together with the beam-sweeping frame structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Paradigm {
    Oce,
    BswFixed,
    BswFlexible,
}

impl Paradigm {
    pub const ALL: [Paradigm; 3] = [Paradigm::Oce, Paradigm::BswFixed, Paradigm::BswFlexible];

    pub fn is_bsw(self) -> bool {
        !matches!(self, Paradigm::Oce)
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Paradigm::Oce => "oce",
            Paradigm::BswFixed => "bsw-fixed",
            Paradigm::BswFlexible => "bsw-flexible",
        })
    }
}

impl FromStr for Paradigm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "oce" => Ok(Paradigm::Oce),
            "bsw-fixed" => Ok(Paradigm::BswFixed),
            "bsw-flexible" => Ok(Paradigm::BswFlexible),
            other => Err(Error::Config(format!(
                "unknown paradigm '{other}' (expected oce, bsw-fixed or bsw-flexible)"
            ))),
        }
    }
}

/// Out-of-band (error-free, parallel) or in-band RIS control channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CcKind {
    Obcc,
    Ibcc,
}

impl CcKind {
    pub const ALL: [CcKind; 2] = [CcKind::Obcc, CcKind::Ibcc];
}

impl fmt::Display for CcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CcKind::Obcc => "obcc",
            CcKind::Ibcc => "ibcc",
        })
    }
}

impl FromStr for CcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "obcc" => Ok(CcKind::Obcc),
            "ibcc" => Ok(CcKind::Ibcc),
            other => Err(Error::Config(format!(
                "unknown cc_kind '{other}' (expected obcc or ibcc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameParams {
    /// Frame length τ.
    pub tau: Duration,
    /// TTI length T.
    pub tti: Duration,
    /// Switching guard τ_s.
    pub guard: Duration,
    /// Optimization time in TTIs (A).
    pub opt_ttis: u32,
    /// Symbol period T_n, used when no explicit pilot length is set.
    pub symbol_period: Option<Duration>,
    pub pilot_override: Option<u32>,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self {
            tau: Duration::from_millis(60),
            tti: Duration::from_micros(500),
            guard: Duration::from_micros(50),
            opt_ttis: 5,
            symbol_period: None,
            pilot_override: Some(1),
        }
    }
}

impl FrameParams {
    pub fn validate(&self, paradigm: Paradigm) -> Result<()> {
        if self.guard.is_zero() || self.guard >= self.tti {
            return Err(Error::Config("tau_s must be > 0 and < T".into()));
        }
        if self.tau < self.tti {
            return Err(Error::Config("tau must be >= T".into()));
        }
        if paradigm == Paradigm::Oce && self.opt_ttis == 0 {
            return Err(Error::Config("A must be >= 1 for OCE".into()));
        }
        self.pilot_length().map(|_| ())
    }

    pub fn pilot_length(&self) -> Result<u32> {
        pilot_length(
            self.tti,
            self.guard,
            self.symbol_period,
            self.pilot_override,
        )
    }

    /// Number of TTIs in the frame, `⌈τ/T⌉`.
    pub fn frame_ttis(&self) -> u64 {
        (self.tau.as_nanos() as u64).div_ceil(self.tti.as_nanos() as u64)
    }
}

/// Durations of the three overhead phases and the resulting payload time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameTiming {
    pub tau: Duration,
    pub tau_set: Duration,
    pub tau_alg: Duration,
    pub tau_ack: Duration,
    pub tau_pay: Duration,
}

impl FrameTiming {
    pub fn new(
        params: &FrameParams,
        paradigm: Paradigm,
        cc: CcKind,
        cardinality: usize,
        c_star: Option<usize>,
    ) -> Result<Self> {
        let tau_set = setup_duration(cc, params.tti);
        let tau_ack = ack_duration(cc, params.tti, params.guard);
        let tau_alg =
            algorithmic_duration(paradigm, params.tti, cardinality, params.opt_ttis, c_star)?;
        let tau_pay = payload_time(params.tau, tau_set, tau_alg, tau_ack);
        Ok(Self {
            tau: params.tau,
            tau_set,
            tau_alg,
            tau_ack,
            tau_pay,
        })
    }

    pub fn overhead(&self) -> Duration {
        self.tau_set + self.tau_alg + self.tau_ack
    }

    /// `τ_pay / τ`.
    pub fn payload_fraction(&self) -> f64 {
        self.tau_pay.as_nanos() as f64 / self.tau.as_nanos() as f64
    }
}

/// T under out-of-band control, 3T in band (SET-R plus its feedback TTI).
pub fn setup_duration(cc: CcKind, tti: Duration) -> Duration {
    match cc {
        CcKind::Obcc => tti,
        CcKind::Ibcc => 3 * tti,
    }
}

/// Setup duration plus the switching guard before payload.
pub fn ack_duration(cc: CcKind, tti: Duration, guard: Duration) -> Duration {
    setup_duration(cc, tti) + guard
}

/// `(C + A)T` for OCE, `C·T` for the fixed sweep, `(2c★ − 1)T` for the flexible sweep.
pub fn algorithmic_duration(
    paradigm: Paradigm,
    tti: Duration,
    cardinality: usize,
    opt_ttis: u32,
    c_star: Option<usize>,
) -> Result<Duration> {
    let ttis = match paradigm {
        Paradigm::Oce => cardinality as u64 + opt_ttis as u64,
        Paradigm::BswFixed => cardinality as u64,
        Paradigm::BswFlexible => {
            let c = c_star.ok_or_else(|| {
                Error::Contract("flexible sweep timing needs the selected index".into())
            })?;
            if c == 0 || c > cardinality {
                return Err(Error::Contract(format!(
                    "selected index {c} outside 1..={cardinality}"
                )));
            }
            2 * c as u64 - 1
        }
    };
    let ttis = u32::try_from(ttis)
        .map_err(|_| Error::Config(format!("{ttis} TTIs overflow the duration type")))?;
    Ok(tti * ttis)
}

/// `⌊(T − τ_s)/T_n⌋`, or the explicit override.
pub fn pilot_length(
    tti: Duration,
    guard: Duration,
    symbol_period: Option<Duration>,
    pilot_override: Option<u32>,
) -> Result<u32> {
    if let Some(p) = pilot_override {
        return if p == 0 {
            Err(Error::Config("pilot length must be >= 1".into()))
        } else {
            Ok(p)
        };
    }
    let tn =
        symbol_period.ok_or_else(|| Error::Config("either p or T_n must be configured".into()))?;
    if tn.is_zero() {
        return Err(Error::Config("T_n must be positive".into()));
    }
    if guard >= tti {
        return Err(Error::Config("tau_s must be < T".into()));
    }
    let p = (tti - guard).as_nanos() / tn.as_nanos();
    match u32::try_from(p) {
        Ok(0) => Err(Error::Config(
            "T_n exceeds the usable TTI time: pilot length 0".into(),
        )),
        Ok(p) => Ok(p),
        Err(_) => Err(Error::Config("pilot length overflow".into())),
    }
}

/// `max(0, τ − τ_set − τ_alg − τ_ack)`.
pub fn payload_time(
    tau: Duration,
    tau_set: Duration,
    tau_alg: Duration,
    tau_ack: Duration,
) -> Duration {
    tau.saturating_sub(tau_set)
        .saturating_sub(tau_alg)
        .saturating_sub(tau_ack)
}
