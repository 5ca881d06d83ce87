//! Deployment geometry, line-of-sight data channels and control-channel SNR draws.
//!
//! The RIS lies on the x–z plane (surface normal +y) centered at the origin.
//! Per-element channels use the exact spherical-wave phase of every element
//! together with a common far-field amplitude evaluated at the surface center:
//!
//! ```text
//! [h]_n = λ / (4π r_c) · exp(−j 2π r_n / λ)
//! ```
//!
//! Elements are isotropic; there is no element gain or polarization term.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::units::dbm_to_watts;

/// Cartesian position in meters.
pub type Vec3 = [f64; 3];

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub(crate) fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Axis-aligned box the UE is drawn from. Bounds are sorted per axis at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeRegion {
    lo: Vec3,
    hi: Vec3,
}

impl UeRegion {
    /// Builds the box spanned by two opposite corners. Corners may be given in
    /// any order per axis; a zero-width axis is rejected.
    pub fn new(a: Vec3, b: Vec3) -> Result<Self> {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for axis in 0..3 {
            if !(a[axis].is_finite() && b[axis].is_finite()) {
                return Err(Error::Config(format!(
                    "UE region bound on axis {axis} is not finite"
                )));
            }
            lo[axis] = a[axis].min(b[axis]);
            hi[axis] = a[axis].max(b[axis]);
            if lo[axis] >= hi[axis] {
                return Err(Error::Config(format!(
                    "UE region is degenerate on axis {axis} ({} .. {})",
                    lo[axis], hi[axis]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Square-footprint region of side `side`: corners (−D/2, 0, 0) and (D/2, D, −D).
    pub fn from_side(side: f64) -> Result<Self> {
        Self::new([-side / 2.0, 0.0, 0.0], [side / 2.0, side, -side])
    }

    pub fn lo(&self) -> Vec3 {
        self.lo
    }

    pub fn hi(&self) -> Vec3 {
        self.hi
    }

    pub fn center(&self) -> Vec3 {
        [0, 1, 2].map(|a| 0.5 * (self.lo[a] + self.hi[a]))
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }
}

/// Fixed positions of BS and RIS elements plus the UE sampling region.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs_position: Vec3,
    pub ris_center: Vec3,
    pub element_positions: Vec<Vec3>,
    pub ue_region: UeRegion,
    pub carrier_frequency_hz: f64,
    pub element_spacing_m: f64,
}

impl Geometry {
    /// Square `√N × √N` surface with half-wavelength spacing, centered at the origin.
    pub fn square_surface(
        n_elements: usize,
        carrier_frequency_hz: f64,
        bs_position: Vec3,
        ue_region: UeRegion,
    ) -> Result<Self> {
        if !(carrier_frequency_hz > 0.0 && carrier_frequency_hz.is_finite()) {
            return Err(Error::Config("carrier frequency must be positive".into()));
        }
        let side = (n_elements as f64).sqrt().round() as usize;
        if n_elements == 0 || side * side != n_elements {
            return Err(Error::Config(format!(
                "number of RIS elements must be a nonzero perfect square, got {n_elements}"
            )));
        }
        let spacing = SPEED_OF_LIGHT / carrier_frequency_hz / 2.0;
        let offset = (side as f64 - 1.0) / 2.0;
        let mut element_positions = Vec::with_capacity(n_elements);
        for row in 0..side {
            for col in 0..side {
                element_positions.push([
                    (col as f64 - offset) * spacing,
                    0.0,
                    (row as f64 - offset) * spacing,
                ]);
            }
        }
        let ris_center = [0.0; 3];
        if element_positions
            .iter()
            .any(|e| distance(e, &bs_position) == 0.0)
        {
            return Err(Error::Config("BS coincides with a RIS element".into()));
        }
        Ok(Self {
            bs_position,
            ris_center,
            element_positions,
            ue_region,
            carrier_frequency_hz,
            element_spacing_m: spacing,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.element_positions.len()
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }
}

/// Transmit and noise powers plus channel bandwidths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub rho_u_dbm: f64,
    pub rho_b_dbm: f64,
    pub sigma_b2_dbm: f64,
    pub sigma_u2_dbm: f64,
    pub sigma_r2_dbm: f64,
    pub bandwidth_data_hz: f64,
    pub bandwidth_cc_ue_hz: f64,
    pub bandwidth_cc_ris_hz: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            rho_u_dbm: 24.0,
            rho_b_dbm: 24.0,
            sigma_b2_dbm: -94.0,
            sigma_u2_dbm: -94.0,
            sigma_r2_dbm: -94.0,
            bandwidth_data_hz: 180e3,
            bandwidth_cc_ue_hz: 900e3,
            bandwidth_cc_ris_hz: 900e3,
        }
    }
}

impl RadioParams {
    pub fn rho_u_w(&self) -> f64 {
        dbm_to_watts(self.rho_u_dbm)
    }

    pub fn sigma_b2_w(&self) -> f64 {
        dbm_to_watts(self.sigma_b2_dbm)
    }

    /// Data-channel SNR scale ρ_u / σ_b².
    pub fn snr_scale(&self) -> f64 {
        self.rho_u_w() / self.sigma_b2_w()
    }

    /// Checks bandwidth positivity and, for in-band control, that control
    /// bandwidths are at least the data bandwidth.
    pub fn validate(&self, in_band: bool) -> Result<()> {
        for (name, b) in [
            ("bandwidth_data_hz", self.bandwidth_data_hz),
            ("bandwidth_cc_ue_hz", self.bandwidth_cc_ue_hz),
            ("bandwidth_cc_ris_hz", self.bandwidth_cc_ris_hz),
        ] {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.bandwidth_cc_ue_hz < self.bandwidth_data_hz {
            return Err(Error::Config(
                "UE control bandwidth must be >= data bandwidth".into(),
            ));
        }
        if in_band && self.bandwidth_cc_ris_hz < self.bandwidth_data_hz {
            return Err(Error::Config(
                "in-band RIS control bandwidth must be >= data bandwidth".into(),
            ));
        }
        for (name, p) in [
            ("rho_u_dbm", self.rho_u_dbm),
            ("rho_b_dbm", self.rho_b_dbm),
            ("sigma_b2_dbm", self.sigma_b2_dbm),
            ("sigma_u2_dbm", self.sigma_u2_dbm),
            ("sigma_r2_dbm", self.sigma_r2_dbm),
        ] {
            if !p.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Per-trial channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Equivalent UE→RIS→BS per-element channel.
    pub z: Vec<Complex64>,
    pub lambda_u: f64,
    /// `+inf` encodes the error-free out-of-band RIS link.
    pub lambda_r: f64,
    pub ue_position: Vec3,
}

/// Uniform draw inside the UE region.
pub fn sample_ue_position<R: Rng + ?Sized>(rng: &mut R, geometry: &Geometry) -> Vec3 {
    let lo = geometry.ue_region.lo();
    let hi = geometry.ue_region.hi();
    [0, 1, 2].map(|a| lo[a] + (hi[a] - lo[a]) * rng.random::<f64>())
}

/// Line-of-sight channel from `tx` to every element.
///
/// Common amplitude `wavelength / (4π r_c)` with `r_c` the distance to the
/// element centroid, exact per-element phase `−2π r_n / wavelength`.
pub fn los_channel(tx: &Vec3, elements: &[Vec3], wavelength: f64) -> Result<Vec<Complex64>> {
    if elements.is_empty() {
        return Err(Error::Domain("no elements".into()));
    }
    if !(wavelength > 0.0) {
        return Err(Error::Domain("wavelength must be positive".into()));
    }
    let n = elements.len() as f64;
    let mut centroid = [0.0; 3];
    for e in elements {
        for a in 0..3 {
            centroid[a] += e[a] / n;
        }
    }
    let r_center = distance(tx, &centroid);
    if r_center == 0.0 {
        return Err(Error::Domain("transmitter at the surface center".into()));
    }
    let amplitude = wavelength / (4.0 * std::f64::consts::PI * r_center);
    let k = 2.0 * std::f64::consts::PI / wavelength;
    elements
        .iter()
        .map(|e| {
            let r = distance(tx, e);
            if r == 0.0 {
                Err(Error::Domain(
                    "transmitter coincides with an element".into(),
                ))
            } else {
                Ok(Complex64::from_polar(amplitude, -k * r))
            }
        })
        .collect()
}

/// Element-wise product `h ⊙ g`.
pub fn equivalent_channel(h: &[Complex64], g: &[Complex64]) -> Result<Vec<Complex64>> {
    if h.len() != g.len() {
        return Err(Error::Shape {
            expected: h.len(),
            got: g.len(),
        });
    }
    Ok(h.iter().zip(g).map(|(a, b)| a * b).collect())
}

/// Exponential SNR draw with mean `lambda`; an infinite mean returns `+inf`.
pub fn sample_cc_snr<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::Config(format!(
            "mean control SNR must be positive, got {lambda}"
        )));
    }
    if lambda.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let e: f64 = Exp1.sample(rng);
    Ok(lambda * e)
}

/// Geometry and control-channel means needed to draw trial channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: Geometry,
    pub lambda_u: f64,
    pub lambda_r: f64,
    bs_channel: Vec<Complex64>,
}

impl Scenario {
    pub fn new(geometry: Geometry, lambda_u: f64, lambda_r: f64) -> Result<Self> {
        for (name, l) in [("lambda_u", lambda_u), ("lambda_r", lambda_r)] {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be positive or infinite"
                )));
            }
        }
        let bs_channel = los_channel(
            &geometry.bs_position,
            &geometry.element_positions,
            geometry.wavelength_m(),
        )?;
        Ok(Self {
            geometry,
            lambda_u,
            lambda_r,
            bs_channel,
        })
    }

    /// RIS→BS channel; fixed for the whole experiment.
    pub fn bs_channel(&self) -> &[Complex64] {
        &self.bs_channel
    }

    /// Draws a UE position and builds the equivalent channel for it.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelRealization> {
        let ue_position = sample_ue_position(rng, &self.geometry);
        self.realize_at(ue_position)
    }

    pub fn realize_at(&self, ue_position: Vec3) -> Result<ChannelRealization> {
        let h = los_channel(
            &ue_position,
            &self.geometry.element_positions,
            self.geometry.wavelength_m(),
        )?;
        let z = equivalent_channel(&h, &self.bs_channel)?;
        Ok(ChannelRealization {
            z,
            lambda_u: self.lambda_u,
            lambda_r: self.lambda_r,
            ue_position,
        })
    }
}
