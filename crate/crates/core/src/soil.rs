//! Soil dielectric model.
//!
//! Maps clay fraction, volumetric water content (VWC) and frequency to the
//! complex relative permittivity of moist soil using the mineralogy-based soil
//! dielectric model (MBSDM), then to the attenuation and phase constants used
//! by the underground path-loss term.
//!
//! The MBSDM splits soil water into bound water (up to a clay-dependent
//! maximum fraction) and free water, gives each a Debye relaxation, and mixes
//! the refractive indices of dry soil, bound water and free water linearly in
//! VWC. Bulk density is not an explicit input: it is folded into the dry-soil
//! regressions of the published model, so the defaults below carry whatever
//! density the regression soils had.

use crate::error::{Error, Result};
use crate::units::{C0, EPS0, MU0};

use std::f64::consts::PI;

/// Frequency band in which the MBSDM regressions are accepted.
pub const MBSDM_BAND_HZ: (f64, f64) = (3.0e8, 3.0e9);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilProfile {
    /// Clay mass fraction, 0..=1.
    pub clay_fraction: f64,
    /// Volumetric water content, 0..1.
    pub vwc: f64,
    pub frequency_hz: f64,
}

impl SoilProfile {
    /// In-situ soil of the reference pipeline deployment at 868 MHz.
    pub const IN_SITU: SoilProfile = SoilProfile {
        clay_fraction: 0.1686,
        vwc: 0.119,
        frequency_hz: 868.0e6,
    };

    pub fn with_vwc(self, vwc: f64) -> Self {
        SoilProfile { vwc, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.clay_fraction) {
            return Err(Error::OutOfRange {
                quantity: "clay_fraction",
                value: self.clay_fraction,
                range: "[0, 1]",
            });
        }
        if !(self.vwc >= 0.0) {
            return Err(Error::OutOfRange {
                quantity: "vwc",
                value: self.vwc,
                range: "[0, 1)",
            });
        }
        if self.vwc >= 1.0 {
            return Err(Error::Domain(format!(
                "volumetric water content {} must be below 1",
                self.vwc
            )));
        }
        if !(self.frequency_hz > 0.0) || !self.frequency_hz.is_finite() {
            return Err(Error::Domain(format!(
                "frequency {} Hz must be positive",
                self.frequency_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPermittivity {
    /// Relative permittivity ε′.
    pub eps_real: f64,
    /// Loss factor ε″.
    pub eps_imag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConstants {
    /// Attenuation constant, Np/m.
    pub alpha: f64,
    /// Phase constant, rad/m.
    pub beta: f64,
}

/// Regression constants of the MBSDM, clay fraction `C` in 0..=1.
///
/// Each polynomial is stored lowest order first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbsdmConstants {
    /// Refractive index of dry soil: 1.634 − 0.539 C + 0.2748 C².
    pub dry_index: [f64; 3],
    /// Normalized attenuation of dry soil: 0.03952 − 0.04038 C.
    pub dry_attenuation: [f64; 2],
    /// Maximum bound-water fraction: 0.02863 + 0.30673 C.
    pub max_bound_water: [f64; 2],
    /// Bound water static permittivity: 79.8 − 85.4 C + 32.7 C².
    pub bound_static: [f64; 3],
    /// Bound water relaxation time (s): 1.062e-11 + 3.450e-12 C.
    pub bound_relaxation_s: [f64; 2],
    /// Bound water conductivity (S/m): 0.3112 + 0.467 C.
    pub bound_conductivity: [f64; 2],
    /// Free water static permittivity: 100.
    pub free_static: f64,
    /// Free water relaxation time (s): 8.5e-12.
    pub free_relaxation_s: f64,
    /// Free water conductivity (S/m): 0.3631 + 1.217 C.
    pub free_conductivity: [f64; 2],
    /// High-frequency permittivity shared by both water classes: 4.9.
    pub high_frequency: f64,
}

/// Constants table, version 1.
///
/// Source: Mironov, Kosolapova and Fomin, "Physically and mineralogically
/// based spectroscopic dielectric model for moist soils", IEEE TGRS 47(7),
/// 2009, regressions (14)-(19) fitted over soils with 0-76% clay.
pub const MBSDM_V1: MbsdmConstants = MbsdmConstants {
    dry_index: [1.634, -0.539, 0.2748],
    dry_attenuation: [0.03952, -0.04038],
    max_bound_water: [0.02863, 0.30673],
    bound_static: [79.8, -85.4, 32.7],
    bound_relaxation_s: [1.062e-11, 3.450e-12],
    bound_conductivity: [0.3112, 0.467],
    free_static: 100.0,
    free_relaxation_s: 8.5e-12,
    free_conductivity: [0.3631, 1.217],
    high_frequency: 4.9,
};

/// Selectable dielectric model. Only the MBSDM ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DielectricModel {
    #[default]
    Mbsdm,
}

impl DielectricModel {
    pub fn name(self) -> &'static str {
        match self {
            DielectricModel::Mbsdm => "mbsdm",
        }
    }

    pub fn permittivity(self, profile: &SoilProfile) -> Result<ComplexPermittivity> {
        match self {
            DielectricModel::Mbsdm => mbsdm_permittivity(&MBSDM_V1, profile),
        }
    }
}

impl std::str::FromStr for DielectricModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mbsdm" => Ok(DielectricModel::Mbsdm),
            other => Err(Error::Config(format!("unknown dielectric model '{other}'"))),
        }
    }
}

/// Complex relative permittivity of moist soil under the default model.
pub fn complex_permittivity(profile: &SoilProfile) -> Result<ComplexPermittivity> {
    DielectricModel::Mbsdm.permittivity(profile)
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Debye relaxation plus ionic conduction term, returned as (ε′, ε″).
fn debye(eps_static: f64, eps_inf: f64, tau: f64, sigma: f64, freq: f64) -> (f64, f64) {
    let omega = 2.0 * PI * freq;
    let wt = omega * tau;
    let denom = 1.0 + wt * wt;
    let re = eps_inf + (eps_static - eps_inf) / denom;
    let im = (eps_static - eps_inf) * wt / denom + sigma / (omega * EPS0);
    (re, im)
}

/// Complex refractive index n + jκ = √(ε′ + jε″).
fn refractive(eps: (f64, f64)) -> (f64, f64) {
    let modulus = eps.0.hypot(eps.1);
    (
        ((modulus + eps.0) / 2.0).sqrt(),
        ((modulus - eps.0) / 2.0).max(0.0).sqrt(),
    )
}

pub fn mbsdm_permittivity(k: &MbsdmConstants, profile: &SoilProfile) -> Result<ComplexPermittivity> {
    profile.validate()?;
    let f = profile.frequency_hz;
    if f < MBSDM_BAND_HZ.0 || f > MBSDM_BAND_HZ.1 {
        return Err(Error::OutOfRange {
            quantity: "frequency_hz",
            value: f,
            range: "[3e8, 3e9] Hz",
        });
    }
    let clay = profile.clay_fraction;
    let mv = profile.vwc;

    let n_dry = poly(&k.dry_index, clay);
    let k_dry = poly(&k.dry_attenuation, clay);
    let mv_bound_max = poly(&k.max_bound_water, clay);

    let (n_b, k_b) = refractive(debye(
        poly(&k.bound_static, clay),
        k.high_frequency,
        poly(&k.bound_relaxation_s, clay),
        poly(&k.bound_conductivity, clay),
        f,
    ));
    let (n_u, k_u) = refractive(debye(
        k.free_static,
        k.high_frequency,
        k.free_relaxation_s,
        poly(&k.free_conductivity, clay),
        f,
    ));

    let (n, kappa) = if mv <= mv_bound_max {
        (n_dry + (n_b - 1.0) * mv, k_dry + k_b * mv)
    } else {
        let free = mv - mv_bound_max;
        (
            n_dry + (n_b - 1.0) * mv_bound_max + (n_u - 1.0) * free,
            k_dry + k_b * mv_bound_max + k_u * free,
        )
    };

    Ok(ComplexPermittivity {
        eps_real: n * n - kappa * kappa,
        eps_imag: 2.0 * n * kappa,
    })
}

/// Attenuation and phase constants of a plane wave in a non-magnetic medium.
pub fn propagation_constants(eps: ComplexPermittivity, frequency_hz: f64) -> Result<PropagationConstants> {
    if !(eps.eps_real > 0.0) {
        return Err(Error::Domain(format!(
            "relative permittivity {} must be positive",
            eps.eps_real
        )));
    }
    if eps.eps_imag < 0.0 {
        return Err(Error::Domain(format!(
            "loss factor {} must be non-negative",
            eps.eps_imag
        )));
    }
    if !(frequency_hz > 0.0) {
        return Err(Error::Domain(format!("frequency {frequency_hz} Hz must be positive")));
    }
    let omega = 2.0 * PI * frequency_hz;
    let mu_eps = MU0 * EPS0 * eps.eps_real;
    let loss_tangent = eps.eps_imag / eps.eps_real;
    let root = (1.0 + loss_tangent * loss_tangent).sqrt();
    // sqrt(1 + x²) − 1 loses every digit for small x; use x² / (sqrt(1 + x²) + 1).
    let minus = loss_tangent * loss_tangent / (root + 1.0);
    Ok(PropagationConstants {
        alpha: omega * (mu_eps / 2.0 * minus).sqrt(),
        beta: omega * (mu_eps / 2.0 * (root + 1.0)).sqrt(),
    })
}

/// Vacuum phase constant 2πf/c.
pub fn free_space_wavenumber(frequency_hz: f64) -> f64 {
    2.0 * PI * frequency_hz / C0
}
