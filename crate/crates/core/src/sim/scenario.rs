use crate::error::{Error, Result};
use crate::link::RadioConfig;
use crate::phy::{DemodThresholds, LoRaParams, ToaSource};
use crate::soil::SoilProfile;

/// How device ground positions are drawn around the HAP nadir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Area-uniform on the coverage disk.
    #[default]
    DiskUniform,
    /// Uniform on a straight segment of length 2R through the nadir.
    PipelineLine,
}

impl Placement {
    pub fn name(self) -> &'static str {
        match self {
            Placement::DiskUniform => "disk_uniform",
            Placement::PipelineLine => "pipeline_line",
        }
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "disk_uniform" => Ok(Placement::DiskUniform),
            "pipeline_line" => Ok(Placement::PipelineLine),
            other => Err(Error::Config(format!(
                "unknown placement '{other}' (expected disk_uniform | pipeline_line)"
            ))),
        }
    }
}

/// Denominator of the SIR test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceMode {
    /// Sum of all overlapping co-channel interferers.
    #[default]
    Aggregate,
    /// Strongest overlapping co-channel interferer only.
    Strongest,
}

impl InterferenceMode {
    pub fn name(self) -> &'static str {
        match self {
            InterferenceMode::Aggregate => "aggregate",
            InterferenceMode::Strongest => "strongest",
        }
    }
}

impl std::str::FromStr for InterferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "aggregate" => Ok(InterferenceMode::Aggregate),
            "strongest" => Ok(InterferenceMode::Strongest),
            other => Err(Error::Config(format!(
                "unknown interference mode '{other}' (expected aggregate | strongest)"
            ))),
        }
    }
}

/// Lowest elevation angle a device may see the HAP at when
/// `strict_table2` is set.
pub const MIN_ELEVATION_DEG: f64 = 30.0;

const WINDOW_SLACK_S: f64 = 1e-9;

/// Full description of one Monte Carlo experiment point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n_devices: usize,
    pub report_period_s: f64,
    pub wet_duration_s: f64,
    /// Framing and SF shared by every device.
    pub lora: LoRaParams,
    pub toa_source: ToaSource,
    pub thresholds: DemodThresholds,
    pub n_channels: u32,
    pub placement: Placement,
    /// Truncate placement so every device sees the HAP at ≥ 30° elevation.
    pub strict_table2: bool,
    pub hap_altitude_m: f64,
    pub soil: SoilProfile,
    pub burial_depth_m: f64,
    pub radio: RadioConfig,
    pub interference: InterferenceMode,
    pub geometry_seed: u64,
    pub traffic_seed: u64,
    pub trials: usize,
    /// Reuse trial 0's device positions in every trial.
    pub freeze_geometry: bool,
}

impl Scenario {
    /// Reference deployment: 10k devices at 0.6 m in in-situ soil, T = 1800 s,
    /// T_w = 1200 s, SF9, 64 channels, HAP at 20 km.
    pub fn reference() -> Self {
        Scenario {
            n_devices: 10_000,
            report_period_s: 1800.0,
            wet_duration_s: 1200.0,
            lora: LoRaParams::reference(9),
            toa_source: ToaSource::Computed,
            thresholds: DemodThresholds::default(),
            n_channels: 64,
            placement: Placement::DiskUniform,
            strict_table2: true,
            hap_altitude_m: 20_000.0,
            soil: SoilProfile::IN_SITU,
            burial_depth_m: 0.6,
            radio: RadioConfig::default(),
            interference: InterferenceMode::Aggregate,
            geometry_seed: 2024,
            traffic_seed: 2024 ^ 0x9E37_79B9_7F4A_7C15,
            trials: 200,
            freeze_geometry: false,
        }
    }

    pub fn sf(&self) -> u8 {
        self.lora.sf
    }

    pub fn with_sf(&self, sf: u8) -> Self {
        Scenario {
            lora: self.lora.with_sf(sf),
            ..self.clone()
        }
    }

    pub fn with_wet_duration(&self, wet_duration_s: f64) -> Self {
        Scenario {
            wet_duration_s,
            ..self.clone()
        }
    }

    /// Sets both seeds from one master seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Scenario {
            geometry_seed: seed,
            traffic_seed: seed ^ 0x9E37_79B9_7F4A_7C15,
            ..self.clone()
        }
    }

    pub fn toa_s(&self) -> Result<f64> {
        self.toa_source.time_on_air(&self.lora)
    }

    /// T_t = T − T_w.
    pub fn tx_window_s(&self) -> f64 {
        self.report_period_s - self.wet_duration_s
    }

    /// Largest ground distance a device may be placed at.
    pub fn max_ground_distance_m(&self) -> f64 {
        let r = self.radio.coverage_radius_m;
        if self.strict_table2 {
            r.min(self.hap_altitude_m / MIN_ELEVATION_DEG.to_radians().tan())
        } else {
            r
        }
    }

    /// Everything except the WET/transmission split.
    pub fn validate_static(&self) -> Result<()> {
        self.lora.validate()?;
        self.soil.validate()?;
        self.radio.validate()?;
        if self.n_devices == 0 {
            return Err(Error::InvalidScenario("at least one device is required".into()));
        }
        if self.n_channels == 0 {
            return Err(Error::InvalidScenario("at least one channel is required".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidScenario("at least one trial is required".into()));
        }
        if !(self.report_period_s > 0.0) || !self.report_period_s.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "reporting period {} s must be positive",
                self.report_period_s
            )));
        }
        if !(self.burial_depth_m > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "burial depth {} m must be positive",
                self.burial_depth_m
            )));
        }
        if !(self.hap_altitude_m >= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "HAP altitude {} m must be at least 1 m",
                self.hap_altitude_m
            )));
        }
        let toa = self.toa_s()?;
        if self.report_period_s < toa {
            return Err(Error::InvalidScenario(format!(
                "reporting period {} s is shorter than the time on air {toa} s",
                self.report_period_s
            )));
        }
        Ok(())
    }

    pub fn check_wet_duration(&self, wet_duration_s: f64) -> Result<()> {
        if !(wet_duration_s >= 0.0 && wet_duration_s < self.report_period_s) {
            return Err(Error::InvalidScenario(format!(
                "WET duration {wet_duration_s} s must lie in [0, {})",
                self.report_period_s
            )));
        }
        let toa = self.toa_s()?;
        let window = self.report_period_s - wet_duration_s;
        // Absorbs the rounding of T − (T − ToA).
        if window + WINDOW_SLACK_S < toa {
            return Err(Error::InvalidScenario(format!(
                "transmission window {window} s is shorter than the time on air {toa} s"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_static()?;
        self.check_wet_duration(self.wet_duration_s)
    }
}
