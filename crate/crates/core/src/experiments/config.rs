//! Experiment configuration: a [`Scenario`] plus energy settings and sweep
//! axes, read from flat `section.key = value` text.

use std::fmt;
use std::str::FromStr;

use crate::energy::{Battery, ClassAProfile, EnergyModel, HarvestConfig};
use crate::error::{Error, Result};
use crate::kv::{parse_bool, parse_list, parse_value, KvDocument};
use crate::phy::SPREADING_FACTORS;
use crate::sim::Scenario;
use crate::soil::DielectricModel;

/// Key under which CSV headers record the crate version; ignored on input.
pub const VERSION_KEY: &str = "subterra_version";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Single,
    Fig3,
    Fig4,
    Fig5,
    Optimize,
    Calibrate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Single => "run",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Fig5 => "fig5",
            ExperimentKind::Optimize => "optimize",
            ExperimentKind::Calibrate => "calibrate",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "run" => ExperimentKind::Single,
            "fig3" => ExperimentKind::Fig3,
            "fig4" => ExperimentKind::Fig4,
            "fig5" => ExperimentKind::Fig5,
            "optimize" => ExperimentKind::Optimize,
            "calibrate" => ExperimentKind::Calibrate,
            other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
        })
    }
}

/// Sweep axes. Empty axes fall back to the base scenario value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepAxes {
    /// Paired element-wise with `vwc`.
    pub depths_m: Vec<f64>,
    pub vwc: Vec<f64>,
    pub sfs: Vec<u8>,
    pub wet_durations_s: Vec<f64>,
    pub n_devices: Vec<usize>,
    pub report_periods_s: Vec<f64>,
    pub received_powers_w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub scenario: Scenario,
    pub dielectric: DielectricModel,
    /// Built-in profile name or path.
    pub energy_profile: String,
    pub harvest: HarvestConfig,
    pub battery: Battery,
    pub sweep: SweepAxes,
    /// Lifetime the calibration solves for.
    pub anchor_years: f64,
    pub output: Option<String>,
}

impl ExperimentConfig {
    /// Defaults of each preset. Every preset starts from the reference
    /// deployment with 200 trials per point.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            kind,
            scenario: Scenario::reference(),
            dielectric: DielectricModel::Mbsdm,
            energy_profile: "calibrated".into(),
            harvest: HarvestConfig::default(),
            battery: Battery::default(),
            sweep: SweepAxes::default(),
            anchor_years: 30.5,
            output: None,
        };
        match kind {
            ExperimentKind::Single => {}
            ExperimentKind::Fig3 => {
                c.sweep.depths_m = vec![0.4, 0.6];
                c.sweep.vwc = vec![0.05, 0.119];
                c.sweep.sfs = SPREADING_FACTORS.to_vec();
            }
            ExperimentKind::Fig4 => {
                c.sweep.sfs = SPREADING_FACTORS.to_vec();
                c.sweep.wet_durations_s = (1..=35).map(|i| 50.0 * i as f64).collect();
            }
            ExperimentKind::Fig5 => {
                // 1800 s is a reporting period here, not a WET duration: a WET
                // phase covering the whole period leaves no transmission window.
                c.sweep.sfs = SPREADING_FACTORS.to_vec();
                c.sweep.n_devices = vec![1_000, 5_000, 10_000, 20_000];
                c.sweep.report_periods_s = vec![900.0, 1800.0];
                c.sweep.received_powers_w = vec![0.0, 0.02];
            }
            ExperimentKind::Optimize => {
                c.sweep.sfs = SPREADING_FACTORS.to_vec();
            }
            ExperimentKind::Calibrate => {
                c.energy_profile = "default".into();
            }
        }
        c
    }

    /// Preset for `kind` with `text` applied on top.
    pub fn parse(kind: ExperimentKind, text: &str) -> Result<Self> {
        let mut c = Self::preset(kind);
        c.apply_text(text)?;
        Ok(c)
    }

    /// Rebuilds a configuration from the comment header of a CSV written by
    /// an experiment run.
    pub fn from_csv_header(csv: &str) -> Result<Self> {
        let header: String = csv
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter(|l| !l.starts_with("# reject:"))
            .map(|l| format!("{}\n", l.trim_start_matches('#')))
            .collect();
        let doc = KvDocument::parse(&header)?;
        let kind: ExperimentKind = doc
            .get("experiment")
            .ok_or_else(|| Error::Config("CSV header has no 'experiment' key".into()))?
            .parse()?;
        let mut c = Self::preset(kind);
        c.apply(&doc)?;
        Ok(c)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        self.apply(&KvDocument::parse(text)?)
    }

    pub fn apply(&mut self, doc: &KvDocument) -> Result<()> {
        for (k, v) in doc.entries() {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Sets one key. Unknown keys are configuration errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.scenario;
        match key {
            VERSION_KEY => {}
            "experiment" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.kind {
                    return Err(Error::Config(format!(
                        "configuration is for '{kind}', not '{}'",
                        self.kind
                    )));
                }
            }
            "scenario.n_devices" => s.n_devices = parse_value(key, value)?,
            "scenario.report_period_s" => s.report_period_s = parse_value(key, value)?,
            "scenario.wet_duration_s" => s.wet_duration_s = parse_value(key, value)?,
            "scenario.n_channels" => s.n_channels = parse_value(key, value)?,
            "scenario.placement" => s.placement = value.parse()?,
            "scenario.strict_table2" => s.strict_table2 = parse_bool(key, value)?,
            "scenario.hap_altitude_m" => s.hap_altitude_m = parse_value(key, value)?,
            "scenario.burial_depth_m" => s.burial_depth_m = parse_value(key, value)?,
            "scenario.interference" => s.interference = value.parse()?,
            "scenario.freeze_geometry" => s.freeze_geometry = parse_bool(key, value)?,
            "soil.model" => self.dielectric = value.parse()?,
            "soil.clay_fraction" => s.soil.clay_fraction = parse_value(key, value)?,
            "soil.vwc" => s.soil.vwc = parse_value(key, value)?,
            "soil.frequency_hz" => s.soil.frequency_hz = parse_value(key, value)?,
            "radio.tx_power_dbm" => s.radio.tx_power_dbm = parse_value(key, value)?,
            "radio.tx_gain_dbi" => s.radio.tx_gain_dbi = parse_value(key, value)?,
            "radio.rx_gain_dbi" => s.radio.rx_gain_dbi = parse_value(key, value)?,
            "radio.noise_power_dbm" => s.radio.noise_power_dbm = parse_value(key, value)?,
            "radio.path_loss_exponent" => s.radio.path_loss_exponent = parse_value(key, value)?,
            "radio.coverage_radius_m" => s.radio.coverage_radius_m = parse_value(key, value)?,
            "lora.sf" => s.lora.sf = parse_value(key, value)?,
            "lora.bandwidth_hz" => s.lora.bandwidth_hz = parse_value(key, value)?,
            "lora.coding_rate_extra" => s.lora.coding_rate_extra = parse_value(key, value)?,
            "lora.app_payload_bytes" => s.lora.app_payload_bytes = parse_value(key, value)?,
            "lora.mac_overhead_bytes" => s.lora.mac_overhead_bytes = parse_value(key, value)?,
            "lora.preamble_symbols" => s.lora.preamble_symbols = parse_value(key, value)?,
            "lora.explicit_header" => s.lora.explicit_header = parse_bool(key, value)?,
            "lora.crc" => s.lora.crc = parse_bool(key, value)?,
            "lora.ldro" => s.lora.ldro = parse_bool(key, value)?,
            "lora.toa_source" => s.toa_source = value.parse()?,
            "lora.snr_thresholds_db" => {
                let v: Vec<f64> = parse_list(key, value)?;
                s.thresholds.snr_threshold_db = v
                    .try_into()
                    .map_err(|_| Error::Config(format!("'{key}' needs six values, SF7 to SF12")))?;
            }
            "lora.capture_threshold_db" => s.thresholds.sir_capture_db = parse_value(key, value)?,
            "energy.profile" => self.energy_profile = value.trim().to_string(),
            "harvest.received_power_w" => self.harvest.received_power_w = parse_value(key, value)?,
            "harvest.conversion_efficiency" => self.harvest.conversion_efficiency = parse_value(key, value)?,
            "battery.capacity_mah" => self.battery.capacity_mah = parse_value(key, value)?,
            "battery.voltage_v" => self.battery.voltage_v = parse_value(key, value)?,
            "seed.master" => *s = s.with_seed(parse_value(key, value)?),
            "seed.geometry" => s.geometry_seed = parse_value(key, value)?,
            "seed.traffic" => s.traffic_seed = parse_value(key, value)?,
            "run.trials" => s.trials = parse_value(key, value)?,
            "run.output" => self.output = Some(value.trim().to_string()).filter(|v| !v.is_empty()),
            "calibrate.anchor_years" => self.anchor_years = parse_value(key, value)?,
            "sweep.depth_m" => self.sweep.depths_m = parse_list(key, value)?,
            "sweep.vwc" => self.sweep.vwc = parse_list(key, value)?,
            "sweep.sf" => self.sweep.sfs = parse_list(key, value)?,
            "sweep.wet_duration_s" => self.sweep.wet_durations_s = parse_list(key, value)?,
            "sweep.n_devices" => self.sweep.n_devices = parse_list(key, value)?,
            "sweep.report_period_s" => self.sweep.report_periods_s = parse_list(key, value)?,
            "sweep.received_power_w" => self.sweep.received_powers_w = parse_list(key, value)?,
            _ => return Err(Error::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order. The output path
    /// is left out so results do not depend on where they are written.
    pub fn resolved(&self) -> KvDocument {
        fn list<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
        }
        let s = &self.scenario;
        let mut d = KvDocument::default();
        d.insert("experiment", self.kind.name());
        d.insert("scenario.n_devices", s.n_devices.to_string());
        d.insert("scenario.report_period_s", s.report_period_s.to_string());
        d.insert("scenario.wet_duration_s", s.wet_duration_s.to_string());
        d.insert("scenario.n_channels", s.n_channels.to_string());
        d.insert("scenario.placement", s.placement.name());
        d.insert("scenario.strict_table2", s.strict_table2.to_string());
        d.insert("scenario.hap_altitude_m", s.hap_altitude_m.to_string());
        d.insert("scenario.burial_depth_m", s.burial_depth_m.to_string());
        d.insert("scenario.interference", s.interference.name());
        d.insert("scenario.freeze_geometry", s.freeze_geometry.to_string());
        d.insert("soil.model", self.dielectric.name());
        d.insert("soil.clay_fraction", s.soil.clay_fraction.to_string());
        d.insert("soil.vwc", s.soil.vwc.to_string());
        d.insert("soil.frequency_hz", s.soil.frequency_hz.to_string());
        d.insert("radio.tx_power_dbm", s.radio.tx_power_dbm.to_string());
        d.insert("radio.tx_gain_dbi", s.radio.tx_gain_dbi.to_string());
        d.insert("radio.rx_gain_dbi", s.radio.rx_gain_dbi.to_string());
        d.insert("radio.noise_power_dbm", s.radio.noise_power_dbm.to_string());
        d.insert("radio.path_loss_exponent", s.radio.path_loss_exponent.to_string());
        d.insert("radio.coverage_radius_m", s.radio.coverage_radius_m.to_string());
        d.insert("lora.sf", s.lora.sf.to_string());
        d.insert("lora.bandwidth_hz", s.lora.bandwidth_hz.to_string());
        d.insert("lora.coding_rate_extra", s.lora.coding_rate_extra.to_string());
        d.insert("lora.app_payload_bytes", s.lora.app_payload_bytes.to_string());
        d.insert("lora.mac_overhead_bytes", s.lora.mac_overhead_bytes.to_string());
        d.insert("lora.preamble_symbols", s.lora.preamble_symbols.to_string());
        d.insert("lora.explicit_header", s.lora.explicit_header.to_string());
        d.insert("lora.crc", s.lora.crc.to_string());
        d.insert("lora.ldro", s.lora.ldro.to_string());
        d.insert("lora.toa_source", s.toa_source.name());
        d.insert("lora.snr_thresholds_db", list(&s.thresholds.snr_threshold_db));
        d.insert("lora.capture_threshold_db", s.thresholds.sir_capture_db.to_string());
        d.insert("energy.profile", self.energy_profile.clone());
        d.insert("harvest.received_power_w", self.harvest.received_power_w.to_string());
        d.insert(
            "harvest.conversion_efficiency",
            self.harvest.conversion_efficiency.to_string(),
        );
        d.insert("battery.capacity_mah", self.battery.capacity_mah.to_string());
        d.insert("battery.voltage_v", self.battery.voltage_v.to_string());
        d.insert("seed.geometry", s.geometry_seed.to_string());
        d.insert("seed.traffic", s.traffic_seed.to_string());
        d.insert("run.trials", s.trials.to_string());
        d.insert("calibrate.anchor_years", self.anchor_years.to_string());
        d.insert("sweep.depth_m", list(&self.sweep.depths_m));
        d.insert("sweep.vwc", list(&self.sweep.vwc));
        d.insert("sweep.sf", list(&self.sweep.sfs));
        d.insert("sweep.wet_duration_s", list(&self.sweep.wet_durations_s));
        d.insert("sweep.n_devices", list(&self.sweep.n_devices));
        d.insert("sweep.report_period_s", list(&self.sweep.report_periods_s));
        d.insert("sweep.received_power_w", list(&self.sweep.received_powers_w));
        d
    }

    pub fn energy_model(&self) -> Result<EnergyModel> {
        self.harvest.validate()?;
        if !(self.battery.capacity_mah > 0.0) || !(self.battery.voltage_v > 0.0) {
            return Err(Error::Config("battery capacity and voltage must be positive".into()));
        }
        Ok(EnergyModel {
            profile: ClassAProfile::load(&self.energy_profile)?,
            harvest: self.harvest,
            battery: self.battery,
        })
    }

    /// SF axis, defaulting to the base scenario's SF.
    pub fn sfs(&self) -> Vec<u8> {
        if self.sweep.sfs.is_empty() {
            vec![self.scenario.sf()]
        } else {
            self.sweep.sfs.clone()
        }
    }

    /// (depth, vwc) pairs, defaulting to the base scenario's.
    pub fn soil_points(&self) -> Result<Vec<(f64, f64)>> {
        let (d, v) = (&self.sweep.depths_m, &self.sweep.vwc);
        match (d.is_empty(), v.is_empty()) {
            (true, true) => Ok(vec![(self.scenario.burial_depth_m, self.scenario.soil.vwc)]),
            _ if d.len() == v.len() => Ok(d.iter().copied().zip(v.iter().copied()).collect()),
            _ => Err(Error::Config(format!(
                "sweep.depth_m has {} values but sweep.vwc has {}; they are paired",
                d.len(),
                v.len()
            ))),
        }
    }

    fn axis<T: Copy>(axis: &[T], base: T) -> Vec<T> {
        if axis.is_empty() {
            vec![base]
        } else {
            axis.to_vec()
        }
    }

    pub fn wet_durations(&self) -> Vec<f64> {
        Self::axis(&self.sweep.wet_durations_s, self.scenario.wet_duration_s)
    }

    pub fn n_devices(&self) -> Vec<usize> {
        Self::axis(&self.sweep.n_devices, self.scenario.n_devices)
    }

    pub fn report_periods(&self) -> Vec<f64> {
        Self::axis(&self.sweep.report_periods_s, self.scenario.report_period_s)
    }

    pub fn received_powers(&self) -> Vec<f64> {
        Self::axis(&self.sweep.received_powers_w, self.harvest.received_power_w)
    }
}
