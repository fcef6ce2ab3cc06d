//! Class-A energy accounting, energy per delivered packet, WET harvest and
//! battery lifetime.
//!
//! A device wakes once per reporting period, transmits one unconfirmed uplink,
//! opens its two receive windows and sleeps for the rest of the period. The
//! state table below describes everything except the transmission itself,
//! whose duration is the time on air of the configured SF.
//!
//! Lifetime is counted in delivered reports: a device that only gets a
//! fraction `p_s` of its uplinks through spends `C / p_s` per delivered report,
//! and the battery drains by that amount minus the energy harvested during the
//! WET phase of each period.

use std::fmt;

use crate::error::{Error, Result};
use crate::kv::{parse_value, KvDocument};
use crate::units::SECONDS_PER_YEAR;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyState {
    pub name: String,
    pub duration_s: f64,
    pub current_a: f64,
}

impl EnergyState {
    pub fn new(name: &str, duration_s: f64, current_a: f64) -> Self {
        EnergyState {
            name: name.to_string(),
            duration_s,
            current_a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassAProfile {
    pub name: String,
    pub supply_voltage_v: f64,
    pub tx_current_a: f64,
    /// Non-TX active states in execution order.
    pub states: Vec<EnergyState>,
    pub sleep_current_a: f64,
    /// Extra energy per period not captured by the state table.
    pub overhead_energy_j: f64,
}

const CALIBRATED_PROFILE: &str = include_str!("../profiles/calibrated.profile");

impl ClassAProfile {
    /// Placeholder Class-A state table. The durations and currents are
    /// representative of an SX1272-class module with a low-power MCU; they are
    /// not normative.
    pub fn placeholder() -> Self {
        ClassAProfile {
            name: "default".into(),
            supply_voltage_v: 3.3,
            tx_current_a: 0.114,
            states: vec![
                EnergyState::new("wake_up", 0.1682, 0.0221),
                EnergyState::new("radio_prep", 0.0838, 0.0133),
                EnergyState::new("post_tx_wait", 1.0, 0.0270),
                EnergyState::new("rx1", 0.0328, 0.0381),
                EnergyState::new("rx2", 0.1638, 0.0381),
            ],
            sleep_current_a: 1.5e-6,
            overhead_energy_j: 0.0,
        }
    }

    /// Transmission only: no other states, no sleep current, no overhead.
    pub fn tx_only() -> Self {
        ClassAProfile {
            name: "tx_only".into(),
            states: Vec::new(),
            sleep_current_a: 0.0,
            ..Self::placeholder()
        }
    }

    /// `default`, `tx_only` or `calibrated`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::placeholder()),
            "tx_only" => Some(Self::tx_only()),
            "calibrated" => Some(Self::parse(CALIBRATED_PROFILE).expect("bundled calibrated profile parses")),
            _ => None,
        }
    }

    /// A built-in name, or else a path to a profile file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(p) = Self::builtin(name_or_path) {
            return Ok(p);
        }
        let text = std::fs::read_to_string(name_or_path)
            .map_err(|e| Error::Config(format!("energy profile '{name_or_path}': {e}")))?;
        Self::parse(&text)
    }

    pub fn with_overhead(&self, overhead_energy_j: f64) -> Self {
        ClassAProfile {
            overhead_energy_j,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Domain(what));
        if !(self.supply_voltage_v > 0.0) {
            return bad(format!("supply voltage {} V must be positive", self.supply_voltage_v));
        }
        if !(self.tx_current_a >= 0.0) || !(self.sleep_current_a >= 0.0) {
            return bad("currents must be non-negative".into());
        }
        for s in &self.states {
            if !(s.duration_s >= 0.0) || !(s.current_a >= 0.0) {
                return bad(format!("state '{}' has a negative duration or current", s.name));
            }
        }
        if !self.overhead_energy_j.is_finite() {
            return bad("overhead energy must be finite".into());
        }
        Ok(())
    }

    /// Time spent outside sleep for one uplink.
    pub fn active_time_s(&self, toa_s: f64) -> f64 {
        toa_s + self.states.iter().map(|s| s.duration_s).sum::<f64>()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc = KvDocument::parse(text)?;
        let mut profile = ClassAProfile {
            name: "custom".into(),
            states: Vec::new(),
            overhead_energy_j: 0.0,
            ..Self::placeholder()
        };
        for (key, value) in doc.entries() {
            match key.as_str() {
                "name" => profile.name = value.clone(),
                "supply_voltage_v" => profile.supply_voltage_v = parse_value(key, value)?,
                "tx_current_a" => profile.tx_current_a = parse_value(key, value)?,
                "sleep_current_a" => profile.sleep_current_a = parse_value(key, value)?,
                "overhead_energy_j" => profile.overhead_energy_j = parse_value(key, value)?,
                _ => {
                    let (state, field) = key
                        .rsplit_once('.')
                        .ok_or_else(|| Error::Config(format!("unknown energy profile key '{key}'")))?;
                    let idx = match profile.states.iter().position(|s| s.name == state) {
                        Some(i) => i,
                        None => {
                            profile.states.push(EnergyState::new(state, 0.0, 0.0));
                            profile.states.len() - 1
                        }
                    };
                    match field {
                        "duration_s" => profile.states[idx].duration_s = parse_value(key, value)?,
                        "current_a" => profile.states[idx].current_a = parse_value(key, value)?,
                        _ => return Err(Error::Config(format!("unknown energy profile key '{key}'"))),
                    }
                }
            }
        }
        profile.validate()?;
        Ok(profile)
    }

    pub fn render(&self) -> String {
        let mut doc = KvDocument::default();
        doc.insert("name", self.name.clone());
        doc.insert("supply_voltage_v", self.supply_voltage_v.to_string());
        doc.insert("tx_current_a", self.tx_current_a.to_string());
        doc.insert("sleep_current_a", self.sleep_current_a.to_string());
        doc.insert("overhead_energy_j", self.overhead_energy_j.to_string());
        for s in &self.states {
            doc.insert(format!("{}.duration_s", s.name), s.duration_s.to_string());
            doc.insert(format!("{}.current_a", s.name), s.current_a.to_string());
        }
        doc.render()
    }
}

/// TX energy plus the non-sleep states, J.
pub fn energy_per_attempt(profile: &ClassAProfile, toa_s: f64) -> Result<f64> {
    if !(toa_s > 0.0) {
        return Err(Error::Domain(format!("time on air {toa_s} s must be positive")));
    }
    profile.validate()?;
    let v = profile.supply_voltage_v;
    let states: f64 = profile.states.iter().map(|s| v * s.current_a * s.duration_s).sum();
    Ok(v * profile.tx_current_a * toa_s + states)
}

/// One attempt, sleep for the rest of the period, plus overhead, J.
pub fn consumption_per_period(profile: &ClassAProfile, toa_s: f64, report_period_s: f64) -> Result<f64> {
    let per_attempt = energy_per_attempt(profile, toa_s)?;
    let active = profile.active_time_s(toa_s);
    if active > report_period_s {
        return Err(Error::Contract(format!(
            "active time {active} s exceeds the reporting period {report_period_s} s"
        )));
    }
    let sleep = profile.supply_voltage_v * profile.sleep_current_a * (report_period_s - active);
    Ok(per_attempt + sleep + profile.overhead_energy_j)
}

/// Energy per delivered packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epp {
    Joules(f64),
    /// Nothing is ever delivered.
    Unbounded,
}

impl Epp {
    pub fn joules(self) -> Option<f64> {
        match self {
            Epp::Joules(j) => Some(j),
            Epp::Unbounded => None,
        }
    }
}

impl fmt::Display for Epp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epp::Joules(j) => write!(f, "{j}"),
            Epp::Unbounded => f.write_str("UNBOUNDED"),
        }
    }
}

pub fn epp(energy_per_attempt_j: f64, p_s: f64) -> Epp {
    if p_s > 0.0 {
        Epp::Joules(energy_per_attempt_j / p_s)
    } else {
        Epp::Unbounded
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestConfig {
    pub received_power_w: f64,
    pub conversion_efficiency: f64,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        HarvestConfig {
            received_power_w: 0.02,
            conversion_efficiency: 0.6,
        }
    }
}

impl HarvestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.received_power_w >= 0.0) {
            return Err(Error::Domain(format!(
                "received power {} W must be non-negative",
                self.received_power_w
            )));
        }
        if !(0.0..=1.0).contains(&self.conversion_efficiency) {
            return Err(Error::OutOfRange {
                quantity: "conversion_efficiency",
                value: self.conversion_efficiency,
                range: "[0, 1]",
            });
        }
        Ok(())
    }
}

pub fn harvested_per_period(cfg: &HarvestConfig, wet_duration_s: f64) -> Result<f64> {
    cfg.validate()?;
    if !(wet_duration_s >= 0.0) {
        return Err(Error::Domain(format!(
            "WET duration {wet_duration_s} s must be non-negative"
        )));
    }
    Ok(cfg.received_power_w * cfg.conversion_efficiency * wet_duration_s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Battery {
    pub capacity_mah: f64,
    pub voltage_v: f64,
}

impl Default for Battery {
    fn default() -> Self {
        Battery {
            capacity_mah: 3000.0,
            voltage_v: 3.3,
        }
    }
}

impl Battery {
    pub fn energy_j(&self) -> f64 {
        self.capacity_mah * 3.6 * self.voltage_v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifetime {
    Years(f64),
    /// Harvest covers consumption; the battery never drains.
    EnergyNeutral,
}

impl Lifetime {
    /// Total order used by searches: energy neutrality beats any finite value.
    pub fn objective(self) -> f64 {
        match self {
            Lifetime::Years(y) => y,
            Lifetime::EnergyNeutral => f64::INFINITY,
        }
    }

    pub fn years(self) -> Option<f64> {
        match self {
            Lifetime::Years(y) => Some(y),
            Lifetime::EnergyNeutral => None,
        }
    }

    pub fn is_neutral(self) -> bool {
        matches!(self, Lifetime::EnergyNeutral)
    }
}

impl fmt::Display for Lifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifetime::Years(y) => write!(f, "{y}"),
            Lifetime::EnergyNeutral => f.write_str("ENERGY_NEUTRAL"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeResult {
    pub consumption_per_period_j: f64,
    pub harvest_per_period_j: f64,
    /// Drain per delivered report after harvest, J.
    pub net_drain_j: f64,
    pub lifetime: Lifetime,
    /// Period consumption per delivered report.
    pub epp: Epp,
}

/// Battery lifetime for a per-period consumption and harvest.
pub fn lifetime(battery: &Battery, consumption_j: f64, harvest_j: f64, report_period_s: f64) -> Result<LifetimeResult> {
    if !(consumption_j > 0.0) {
        return Err(Error::Domain(format!("consumption {consumption_j} J must be positive")));
    }
    let net = consumption_j - harvest_j;
    let lifetime = if net <= 0.0 {
        Lifetime::EnergyNeutral
    } else {
        Lifetime::Years(battery.energy_j() / net * report_period_s / SECONDS_PER_YEAR)
    };
    Ok(LifetimeResult {
        consumption_per_period_j: consumption_j,
        harvest_per_period_j: harvest_j,
        net_drain_j: net,
        lifetime,
        epp: Epp::Joules(consumption_j),
    })
}

/// Energy profile, harvester and battery of one device type.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    pub profile: ClassAProfile,
    pub harvest: HarvestConfig,
    pub battery: Battery,
}

impl EnergyModel {
    pub fn new(profile: ClassAProfile) -> Self {
        EnergyModel {
            profile,
            harvest: HarvestConfig::default(),
            battery: Battery::default(),
        }
    }

    /// Lifetime at success probability `p_s`. A device that never gets a
    /// report through has zero useful lifetime.
    pub fn assess(&self, toa_s: f64, report_period_s: f64, wet_duration_s: f64, p_s: f64) -> Result<LifetimeResult> {
        let consumption = consumption_per_period(&self.profile, toa_s, report_period_s)?;
        let harvest = harvested_per_period(&self.harvest, wet_duration_s)?;
        match epp(consumption, p_s) {
            Epp::Joules(per_delivered) => {
                let mut r = lifetime(&self.battery, per_delivered, harvest, report_period_s)?;
                r.consumption_per_period_j = consumption;
                Ok(r)
            }
            Epp::Unbounded => Ok(LifetimeResult {
                consumption_per_period_j: consumption,
                harvest_per_period_j: harvest,
                net_drain_j: f64::INFINITY,
                lifetime: Lifetime::Years(0.0),
                epp: Epp::Unbounded,
            }),
        }
    }
}

/// Solves `lifetime_of(overhead) = anchor_years` for the per-period overhead
/// by bisection to 1e-6 J. `lifetime_of` must be nonincreasing in overhead.
pub fn calibrate_overhead<F>(anchor_years: f64, mut lifetime_of: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<Lifetime>,
{
    const TOL_J: f64 = 1e-6;
    const MAX_OVERHEAD_J: f64 = 1e6;

    let at_zero = lifetime_of(0.0)?;
    if at_zero.objective() == anchor_years {
        return Ok(0.0);
    }
    let infeasible = |upper: f64, at_upper: Lifetime| Error::CalibrationInfeasible {
        target_years: anchor_years,
        at_zero: at_zero.to_string(),
        upper_j: upper,
        at_upper: at_upper.to_string(),
    };
    if at_zero.objective() < anchor_years {
        return Err(infeasible(0.0, at_zero));
    }

    let mut hi = 1.0;
    loop {
        let at_hi = lifetime_of(hi)?;
        if at_hi.objective() <= anchor_years {
            break;
        }
        if hi >= MAX_OVERHEAD_J {
            return Err(infeasible(hi, at_hi));
        }
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > TOL_J {
        let mid = 0.5 * (lo + hi);
        if lifetime_of(mid)?.objective() > anchor_years {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
