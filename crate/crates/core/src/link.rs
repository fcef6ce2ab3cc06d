//! Underground-to-HAP link budget.
//!
//! Total loss is the sum of three deterministic terms: the modified Friis
//! underground loss between the buried device and the soil surface, a
//! normal-incidence soil-air refraction loss, and a log-distance air loss from
//! the surface to the high-altitude platform. There is no fading term.

use crate::error::{Error, Result};
use crate::soil::{self, PropagationConstants, SoilProfile};
use crate::units::{C0, NEPER_TO_DB};

use std::f64::consts::PI;

/// Constant of the modified Friis underground term, dB.
pub const UNDERGROUND_FRIIS_CONSTANT_DB: f64 = 6.4;
/// Reference distance of the log-distance air model, m.
pub const AIR_REFERENCE_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub burial_depth_m: f64,
    pub hap_altitude_m: f64,
    /// Horizontal distance from the device to the HAP nadir.
    pub ground_distance_m: f64,
    pub slant_distance_m: f64,
    pub elevation_deg: f64,
}

impl LinkGeometry {
    pub fn new(burial_depth_m: f64, hap_altitude_m: f64, ground_distance_m: f64) -> Self {
        LinkGeometry {
            burial_depth_m,
            hap_altitude_m,
            ground_distance_m,
            slant_distance_m: hap_altitude_m.hypot(ground_distance_m),
            elevation_deg: hap_altitude_m.atan2(ground_distance_m).to_degrees(),
        }
    }
}

/// Radio and HAP coverage parameters. `Default` is the reference deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_power_dbm: f64,
    pub path_loss_exponent: f64,
    pub coverage_radius_m: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            tx_power_dbm: 14.0,
            tx_gain_dbi: 2.15,
            rx_gain_dbi: 25.0,
            noise_power_dbm: -117.0,
            path_loss_exponent: 2.0,
            coverage_radius_m: 35_000.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.tx_power_dbm,
            self.tx_gain_dbi,
            self.rx_gain_dbi,
            self.noise_power_dbm,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("radio powers and gains must be finite".into()));
        }
        if !(self.path_loss_exponent >= 1.0) {
            return Err(Error::OutOfRange {
                quantity: "path_loss_exponent",
                value: self.path_loss_exponent,
                range: ">= 1",
            });
        }
        if !(self.coverage_radius_m >= 0.0) || !self.coverage_radius_m.is_finite() {
            return Err(Error::OutOfRange {
                quantity: "coverage_radius_m",
                value: self.coverage_radius_m,
                range: ">= 0",
            });
        }
        Ok(())
    }
}

/// L_ug = 6.4 + 20 log10(d) + 20 log10(β) + 8.69 α d.
pub fn underground_path_loss(burial_depth_m: f64, pc: PropagationConstants) -> Result<f64> {
    if !(burial_depth_m > 0.0) {
        return Err(Error::Domain(format!(
            "burial depth {burial_depth_m} m must be positive"
        )));
    }
    if !(pc.beta > 0.0) {
        return Err(Error::Domain(format!("phase constant {} must be positive", pc.beta)));
    }
    Ok(UNDERGROUND_FRIIS_CONSTANT_DB
        + 20.0 * burial_depth_m.log10()
        + 20.0 * pc.beta.log10()
        + NEPER_TO_DB * pc.alpha * burial_depth_m)
}

/// Soil-air interface loss from normal-incidence power transmission,
/// −10 log10(4n / (n + 1)²) with n = √ε′.
pub fn refraction_loss(eps_real: f64) -> Result<f64> {
    if !(eps_real >= 1.0) {
        return Err(Error::OutOfRange {
            quantity: "eps_real",
            value: eps_real,
            range: ">= 1",
        });
    }
    let n = eps_real.sqrt();
    Ok(-10.0 * (4.0 * n / ((n + 1.0) * (n + 1.0))).log10())
}

/// Log-distance air loss with a 1 m reference; free-space loss when the
/// exponent is 2.
pub fn air_path_loss(slant_distance_m: f64, frequency_hz: f64, exponent: f64) -> Result<f64> {
    if !(slant_distance_m >= AIR_REFERENCE_DISTANCE_M) {
        return Err(Error::Domain(format!(
            "slant distance {slant_distance_m} m is below the 1 m reference distance"
        )));
    }
    if !(frequency_hz > 0.0) {
        return Err(Error::Domain(format!("frequency {frequency_hz} Hz must be positive")));
    }
    let d0 = AIR_REFERENCE_DISTANCE_M;
    Ok(20.0 * (4.0 * PI * d0 * frequency_hz / C0).log10() + 10.0 * exponent * (slant_distance_m / d0).log10())
}

/// The three loss terms of one link, dB.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms {
    pub underground_db: f64,
    pub refraction_db: f64,
    pub air_db: f64,
}

impl LossTerms {
    pub fn total_db(&self) -> f64 {
        self.underground_db + self.refraction_db + self.air_db
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub p_rx_dbm: f64,
    pub snr_db: f64,
}

/// Received power and SNR for already-computed losses.
pub fn budget_from_losses(radio: &RadioConfig, losses: &LossTerms) -> LinkBudget {
    let p_rx_dbm = radio.tx_power_dbm + radio.tx_gain_dbi + radio.rx_gain_dbi - losses.total_db();
    LinkBudget {
        p_rx_dbm,
        snr_db: p_rx_dbm - radio.noise_power_dbm,
    }
}

/// Soil-dependent part of the loss, shared by every device buried in the same
/// soil at the same depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilLoss {
    pub underground_db: f64,
    pub refraction_db: f64,
}

impl SoilLoss {
    pub fn new(soil: &SoilProfile, burial_depth_m: f64) -> Result<Self> {
        let eps = soil::complex_permittivity(soil)?;
        let pc = soil::propagation_constants(eps, soil.frequency_hz)?;
        Ok(SoilLoss {
            underground_db: underground_path_loss(burial_depth_m, pc)?,
            refraction_db: refraction_loss(eps.eps_real)?,
        })
    }

    pub fn with_air(self, air_db: f64) -> LossTerms {
        LossTerms {
            underground_db: self.underground_db,
            refraction_db: self.refraction_db,
            air_db,
        }
    }
}

pub fn received_snr(radio: &RadioConfig, geometry: &LinkGeometry, soil: &SoilProfile) -> Result<LinkBudget> {
    radio.validate()?;
    let soil_loss = SoilLoss::new(soil, geometry.burial_depth_m)?;
    let air = air_path_loss(geometry.slant_distance_m, soil.frequency_hz, radio.path_loss_exponent)?;
    Ok(budget_from_losses(radio, &soil_loss.with_air(air)))
}
