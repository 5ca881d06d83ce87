//! Flat `key = value` configuration.
//!
//! Lines may carry `#` comments and `[section]` headers; sections are
//! cosmetic and every key lives in one namespace. Keys ending in `_db` are
//! converted to linear scale, `_dbm` keys stay in dBm, durations are stored
//! as integer nanoseconds.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use risctl_core::units::db_to_linear;
use risctl_core::{
    AeMode, BitFields, CcKind, Experiment, ExperimentConfig, FrameParams, Geometry, Paradigm,
    RadioParams, UeRegion, Vec3,
};

use crate::error::{CliError, CliResult};

/// One documented configuration key.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

macro_rules! keys {
    ($($name:literal = $default:literal : $doc:literal;)*) => {
        pub const KEYS: &[KeySpec] = &[$(KeySpec { name: $name, default: $default, doc: $doc }),*];
    };
}

keys! {
    "paradigm" = "oce" : "oce | bsw-fixed | bsw-flexible";
    "cc_kind" = "obcc" : "obcc (out-of-band, error-free RIS link) | ibcc (in-band)";
    "n_trials" = "10000" : "Monte Carlo trials per experiment point";
    "master_seed" = "0" : "seed of all random streams";
    "output_path" = "" : "CSV destination; empty writes to stdout";
    "scenario_side_m" = "20" : "side L of the UE box x in [-L/2, L/2], y in [0, L], z in [-L, 0]";
    "bs_position_m" = "25,5,5" : "BS position x,y,z";
    "ue_region_lo_m" = "" : "explicit UE box corner x,y,z (overrides scenario_side_m)";
    "ue_region_hi_m" = "" : "explicit opposite UE box corner x,y,z";
    "carrier_frequency_hz" = "3e9" : "carrier frequency; elements are spaced half a wavelength";
    "n_elements" = "100" : "RIS elements N, a perfect square";
    "rho_u_dbm" = "24" : "UE transmit power";
    "rho_b_dbm" = "24" : "BS transmit power";
    "sigma_b2_dbm" = "-94" : "noise power at the BS";
    "sigma_u2_dbm" = "-94" : "noise power at the UE";
    "sigma_r2_dbm" = "-94" : "noise power at the RIS controller";
    "bandwidth_data_hz" = "180e3" : "data bandwidth B_d";
    "bandwidth_cc_ue_hz" = "900e3" : "UE control-channel bandwidth";
    "bandwidth_cc_ris_hz" = "900e3" : "RIS control-channel bandwidth";
    "lambda_u_db" = "inf" : "mean UE control-channel SNR; inf means error free";
    "lambda_r_db" = "inf" : "mean RIS control-channel SNR (in band only); inf means error free";
    "c_ce" = "100" : "cardinality of the common DFT codebook, used for estimation";
    "bsw_fixed_stride" = "3" : "subsampling stride of the fixed-frame sweep codebook";
    "tau_ms" = "60" : "frame length tau";
    "T_ms" = "0.5" : "TTI length T";
    "tau_s_us" = "50" : "switching guard tau_s";
    "A" = "5" : "optimization TTIs of the estimation paradigm";
    "T_n_us" = "" : "symbol period; used when p = auto";
    "p" = "1" : "pilot length, or auto for floor((T - tau_s)/T_n)";
    "gamma0_fixed_db" = "10.9" : "target SNR of the fixed-frame sweep";
    "gamma0_flexible_db" = "13" : "target SNR of the flexible-frame sweep";
    "ae_mode" = "negligible" : "estimation error rule: strict | negligible | margin:<dB>";
    "b_id" = "8" : "identifier field bits";
    "b_frame" = "16" : "frame-length field bits";
    "b_guard" = "16" : "guard-length field bits";
    "b_conf" = "8" : "configuration-index field bits";
    "b_se" = "6" : "spectral-efficiency field bits";
    "b_quant" = "2" : "phase quantization bits per element";
    "target_pcc" = "0.99" : "target correct-control probability";
}

/// Parsed, typed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub paradigm: Paradigm,
    pub cc_kind: CcKind,
    pub n_trials: u64,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub scenario_side_m: f64,
    pub bs_position_m: Vec3,
    pub ue_region_lo_m: Option<Vec3>,
    pub ue_region_hi_m: Option<Vec3>,
    pub carrier_frequency_hz: f64,
    pub n_elements: usize,
    pub radio: RadioParams,
    /// Linear.
    pub lambda_u: f64,
    /// Linear.
    pub lambda_r: f64,
    pub c_ce: usize,
    pub bsw_fixed_stride: usize,
    pub frame: FrameParams,
    /// Linear.
    pub gamma0_fixed: f64,
    /// Linear.
    pub gamma0_flexible: f64,
    pub ae_mode: AeMode,
    pub bits: BitFields,
    pub target_pcc: f64,
    /// Non-fatal diagnostics gathered while validating.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key '{key}': ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    match v.to_ascii_lowercase().as_str() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => v
            .parse::<f64>()
            .map_err(|_| format!("'{v}' is not a number")),
    }
}

fn parse_finite(v: &str) -> Result<f64, String> {
    let x = parse_f64(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{v}' must be finite"))
    }
}

fn parse_int<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>()
        .map_err(|_| format!("'{v}' is not a valid nonnegative integer"))
}

fn parse_vec3(v: &str) -> Result<Vec3, String> {
    let parts = v
        .split(',')
        .map(|s| parse_finite(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("'{v}' must be three comma-separated numbers"))
}

fn optional<T>(v: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, String> {
    if v.is_empty() {
        Ok(None)
    } else {
        f(v).map(Some)
    }
}

/// Duration from a decimal count of `unit_ns` nanoseconds, rounded to 1 ns.
fn parse_duration(v: &str, unit_ns: f64) -> Result<Duration, String> {
    let x = parse_finite(v)?;
    if x < 0.0 {
        return Err(format!("'{v}' must be nonnegative"));
    }
    let ns = (x * unit_ns).round();
    if ns > u64::MAX as f64 {
        return Err(format!("'{v}' is too large"));
    }
    Ok(Duration::from_nanos(ns as u64))
}

fn parse_db(v: &str) -> Result<f64, String> {
    let db = parse_f64(v)?;
    if db.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(db_to_linear(db))
}

impl Settings {
    fn blank() -> Self {
        Self {
            paradigm: Paradigm::Oce,
            cc_kind: CcKind::Obcc,
            n_trials: 0,
            master_seed: 0,
            output_path: None,
            scenario_side_m: 0.0,
            bs_position_m: [0.0; 3],
            ue_region_lo_m: None,
            ue_region_hi_m: None,
            carrier_frequency_hz: 0.0,
            n_elements: 0,
            radio: RadioParams::default(),
            lambda_u: 0.0,
            lambda_r: 0.0,
            c_ce: 0,
            bsw_fixed_stride: 0,
            frame: FrameParams::default(),
            gamma0_fixed: 0.0,
            gamma0_flexible: 0.0,
            ae_mode: AeMode::default(),
            bits: BitFields::default(),
            target_pcc: 0.0,
            warnings: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let core = |e: risctl_core::Error| match e {
            risctl_core::Error::Config(m) => m,
            other => other.to_string(),
        };
        match key {
            "paradigm" => self.paradigm = v.parse().map_err(core)?,
            "cc_kind" => self.cc_kind = v.parse().map_err(core)?,
            "n_trials" => self.n_trials = parse_int(v)?,
            "master_seed" => self.master_seed = parse_int(v)?,
            "output_path" => self.output_path = (!v.is_empty()).then(|| PathBuf::from(v)),
            "scenario_side_m" => self.scenario_side_m = parse_finite(v)?,
            "bs_position_m" => self.bs_position_m = parse_vec3(v)?,
            "ue_region_lo_m" => self.ue_region_lo_m = optional(v, parse_vec3)?,
            "ue_region_hi_m" => self.ue_region_hi_m = optional(v, parse_vec3)?,
            "carrier_frequency_hz" => self.carrier_frequency_hz = parse_finite(v)?,
            "n_elements" => self.n_elements = parse_int(v)?,
            "rho_u_dbm" => self.radio.rho_u_dbm = parse_finite(v)?,
            "rho_b_dbm" => self.radio.rho_b_dbm = parse_finite(v)?,
            "sigma_b2_dbm" => self.radio.sigma_b2_dbm = parse_finite(v)?,
            "sigma_u2_dbm" => self.radio.sigma_u2_dbm = parse_finite(v)?,
            "sigma_r2_dbm" => self.radio.sigma_r2_dbm = parse_finite(v)?,
            "bandwidth_data_hz" => self.radio.bandwidth_data_hz = parse_finite(v)?,
            "bandwidth_cc_ue_hz" => self.radio.bandwidth_cc_ue_hz = parse_finite(v)?,
            "bandwidth_cc_ris_hz" => self.radio.bandwidth_cc_ris_hz = parse_finite(v)?,
            "lambda_u_db" => self.lambda_u = parse_db(v)?,
            "lambda_r_db" => self.lambda_r = parse_db(v)?,
            "c_ce" => self.c_ce = parse_int(v)?,
            "bsw_fixed_stride" => self.bsw_fixed_stride = parse_int(v)?,
            "tau_ms" => self.frame.tau = parse_duration(v, 1e6)?,
            "T_ms" => self.frame.tti = parse_duration(v, 1e6)?,
            "tau_s_us" => self.frame.guard = parse_duration(v, 1e3)?,
            "A" => self.frame.opt_ttis = parse_int(v)?,
            "T_n_us" => self.frame.symbol_period = optional(v, |s| parse_duration(s, 1e3))?,
            "p" => {
                self.frame.pilot_override = if v == "auto" {
                    None
                } else {
                    Some(parse_int(v)?)
                }
            }
            "gamma0_fixed_db" => self.gamma0_fixed = parse_db(v)?,
            "gamma0_flexible_db" => self.gamma0_flexible = parse_db(v)?,
            "ae_mode" => self.ae_mode = v.parse().map_err(core)?,
            "b_id" => self.bits.b_id = parse_int(v)?,
            "b_frame" => self.bits.b_frame = parse_int(v)?,
            "b_guard" => self.bits.b_guard = parse_int(v)?,
            "b_conf" => self.bits.b_conf = parse_int(v)?,
            "b_se" => self.bits.b_se = parse_int(v)?,
            "b_quant" => self.bits.b_quant = parse_int(v)?,
            "target_pcc" => self.target_pcc = parse_finite(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Target SNR for a sweeping paradigm (unused by estimation).
    pub fn gamma0_for(&self, paradigm: Paradigm) -> f64 {
        match paradigm {
            Paradigm::BswFlexible => self.gamma0_flexible,
            _ => self.gamma0_fixed,
        }
    }

    pub fn ue_region(&self) -> risctl_core::Result<UeRegion> {
        match (self.ue_region_lo_m, self.ue_region_hi_m) {
            (Some(lo), Some(hi)) => UeRegion::new(lo, hi),
            _ => UeRegion::from_side(self.scenario_side_m),
        }
    }

    /// Engine configuration for one paradigm and control architecture.
    pub fn experiment(
        &self,
        paradigm: Paradigm,
        cc: CcKind,
    ) -> risctl_core::Result<ExperimentConfig> {
        let geometry = Geometry::square_surface(
            self.n_elements,
            self.carrier_frequency_hz,
            self.bs_position_m,
            self.ue_region()?,
        )?;
        Ok(ExperimentConfig {
            geometry,
            radio: self.radio,
            lambda_u: self.lambda_u,
            lambda_r: self.lambda_r,
            paradigm,
            cc,
            frame: self.frame,
            ce_cardinality: self.c_ce,
            fixed_stride: self.bsw_fixed_stride,
            gamma0: self.gamma0_for(paradigm),
            ae_mode: self.ae_mode,
            bits: self.bits,
            pilot_noise: true,
        })
    }

    /// Engine configuration for the configured paradigm and control architecture.
    pub fn default_experiment(&self) -> risctl_core::Result<ExperimentConfig> {
        self.experiment(self.paradigm, self.cc_kind)
    }
}

impl Default for Settings {
    fn default() -> Self {
        parse_config("").expect("built-in defaults are valid")
    }
}

/// Parses configuration text; an empty text yields every default.
pub fn parse_config(text: &str) -> Result<Settings, ConfigError> {
    let mut settings = Settings::blank();
    for spec in KEYS {
        settings
            .set(spec.name, spec.default)
            .map_err(|m| ConfigError {
                key: Some(spec.name.into()),
                line: None,
                message: format!("bad built-in default: {m}"),
            })?;
    }
    let mut lines: HashMap<&str, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let err = |key: Option<&str>, message: String| ConfigError {
            key: key.map(str::to_string),
            line: Some(line_no),
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(None, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let spec = KEYS
            .iter()
            .find(|k| k.name == key)
            .ok_or_else(|| err(Some(key), "unknown key".into()))?;
        if let Some(prev) = lines.insert(spec.name, line_no) {
            return Err(err(
                Some(key),
                format!("duplicate key (first set on line {prev})"),
            ));
        }
        settings
            .set(spec.name, value)
            .map_err(|m| err(Some(key), m))?;
    }
    validate(&mut settings, &lines)?;
    Ok(settings)
}

fn validate(s: &mut Settings, lines: &HashMap<&str, usize>) -> Result<(), ConfigError> {
    let fail = |key: &str, message: &str| ConfigError {
        key: Some(key.into()),
        line: lines.get(key).copied(),
        message: message.into(),
    };
    let frame = &s.frame;
    if frame.tti.is_zero() {
        return Err(fail("T_ms", "T must be positive"));
    }
    if frame.guard.is_zero() {
        return Err(fail("tau_s_us", "tau_s must be > 0"));
    }
    if frame.guard >= frame.tti {
        return Err(fail("tau_s_us", "tau_s must be < T"));
    }
    if frame.tau < frame.tti {
        return Err(fail("tau_ms", "tau must be >= T"));
    }
    if s.paradigm == Paradigm::Oce && frame.opt_ttis == 0 {
        return Err(fail("A", "A must be >= 1 for the estimation paradigm"));
    }
    match (frame.pilot_override, frame.symbol_period) {
        (Some(0), _) => return Err(fail("p", "pilot length must be >= 1")),
        (None, None) => return Err(fail("p", "p = auto needs T_n_us")),
        (None, Some(_)) => {
            frame
                .pilot_length()
                .map_err(|e| fail("T_n_us", &core_message(e)))?;
        }
        _ => {}
    }
    if s.n_trials == 0 {
        return Err(fail("n_trials", "n_trials must be >= 1"));
    }
    let side = (s.n_elements as f64).sqrt().round() as usize;
    if s.n_elements == 0 || side * side != s.n_elements {
        return Err(fail(
            "n_elements",
            "n_elements must be a nonzero perfect square",
        ));
    }
    if s.c_ce < s.n_elements {
        return Err(fail("c_ce", "c_ce must be >= n_elements"));
    }
    if s.bsw_fixed_stride == 0 {
        return Err(fail("bsw_fixed_stride", "stride must be >= 1"));
    }
    if !(s.carrier_frequency_hz > 0.0) {
        return Err(fail(
            "carrier_frequency_hz",
            "carrier frequency must be positive",
        ));
    }
    if s.ue_region_lo_m.is_some() != s.ue_region_hi_m.is_some() {
        let key = if s.ue_region_lo_m.is_some() {
            "ue_region_hi_m"
        } else {
            "ue_region_lo_m"
        };
        return Err(fail(
            key,
            "ue_region_lo_m and ue_region_hi_m must be given together",
        ));
    }
    if s.ue_region_lo_m.is_none() && !(s.scenario_side_m > 0.0) {
        return Err(fail("scenario_side_m", "scenario side must be positive"));
    }
    s.ue_region()
        .map_err(|e| fail("ue_region_lo_m", &core_message(e)))?;
    for (key, lambda) in [("lambda_u_db", s.lambda_u), ("lambda_r_db", s.lambda_r)] {
        if !(lambda > 0.0) {
            return Err(fail(key, "mean SNR must be > -inf dB"));
        }
    }
    if !(s.target_pcc > 0.0 && s.target_pcc < 1.0) {
        return Err(fail("target_pcc", "target_pcc must lie in (0, 1)"));
    }
    if let AeMode::Margin(m) = s.ae_mode {
        if m < 0.0 {
            return Err(fail("ae_mode", "margin must be >= 0 dB"));
        }
    }
    s.radio
        .validate(s.cc_kind == CcKind::Ibcc)
        .map_err(|e| fail("bandwidth_cc_ris_hz", &core_message(e)))?;
    match s.bits.check_conf_width(s.c_ce) {
        Ok(Some(w)) => s.warnings.push(w),
        Ok(None) => {}
        Err(e) => return Err(fail("b_conf", &core_message(e))),
    }
    // final consistency check across modules for every paradigm
    for paradigm in Paradigm::ALL {
        if paradigm == Paradigm::Oce && s.frame.opt_ttis == 0 {
            continue;
        }
        let cfg = s
            .experiment(paradigm, s.cc_kind)
            .map_err(|e| fail("paradigm", &core_message(e)))?;
        Experiment::new(cfg).map_err(|e| ConfigError {
            key: None,
            line: None,
            message: format!("{paradigm}: {}", core_message(e)),
        })?;
    }
    Ok(())
}

fn core_message(e: risctl_core::Error) -> String {
    match e {
        risctl_core::Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Documented defaults in config-file syntax.
pub fn defaults_text() -> String {
    let width = KEYS
        .iter()
        .map(|k| k.name.len() + k.default.len() + 3)
        .max()
        .unwrap_or(0);
    let mut out = String::from("# risctl configuration defaults\n");
    for k in KEYS {
        let assignment = format!("{} = {}", k.name, k.default);
        out.push_str(&format!("{assignment:<width$}  # {}\n", k.doc));
    }
    out
}

/// Reads and parses a configuration file.
pub fn load_config(path: &std::path::Path) -> CliResult<Settings> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
