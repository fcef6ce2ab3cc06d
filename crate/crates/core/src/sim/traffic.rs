use rand::Rng;

use super::rng::TrialStreams;
use super::scenario::Scenario;
use crate::error::Result;
use crate::link::{self, LinkBudget, LinkGeometry, RadioConfig, SoilLoss};
use crate::phy::DemodThresholds;
use crate::units::dbm_to_mw;

/// One uplink transmission inside the transmission window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketAttempt {
    pub device_id: u32,
    pub sf: u8,
    pub start_s: f64,
    pub duration_s: f64,
    pub channel: u32,
    pub rx_power_mw: f64,
    pub snr_ok: bool,
}

/// Per-scenario link model: the soil terms are shared by every device.
#[derive(Debug, Clone, Copy)]
pub struct LinkModel {
    soil_loss: SoilLoss,
    radio: RadioConfig,
    frequency_hz: f64,
    sf: u8,
    thresholds: DemodThresholds,
}

impl LinkModel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.radio.validate()?;
        Ok(LinkModel {
            soil_loss: SoilLoss::new(&scenario.soil, scenario.burial_depth_m)?,
            radio: scenario.radio,
            frequency_hz: scenario.soil.frequency_hz,
            sf: scenario.sf(),
            thresholds: scenario.thresholds,
        })
    }

    pub fn budget(&self, geometry: &LinkGeometry) -> Result<LinkBudget> {
        let air = link::air_path_loss(
            geometry.slant_distance_m,
            self.frequency_hz,
            self.radio.path_loss_exponent,
        )?;
        Ok(link::budget_from_losses(&self.radio, &self.soil_loss.with_air(air)))
    }

    pub fn snr_ok(&self, budget: &LinkBudget) -> bool {
        self.thresholds.demod_ok(budget.snr_db, self.sf)
    }
}

/// Window-independent part of a device's traffic: the start time as a
/// fraction of the feasible start interval, and the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficDraw {
    pub unit_start: f64,
    pub channel: u32,
}

pub fn traffic_draw(streams: &TrialStreams, device: usize, n_channels: u32) -> TrafficDraw {
    let mut rng = streams.device(device);
    let unit_start: f64 = rng.gen();
    let u: f64 = rng.gen();
    let channel = ((u * n_channels as f64) as u32).min(n_channels - 1);
    TrafficDraw { unit_start, channel }
}

/// One attempt per device, start ~ U[0, T_t − ToA], channel ~ U{0..N_c−1}.
pub fn generate_traffic(
    scenario: &Scenario,
    geometries: &[LinkGeometry],
    streams: &TrialStreams,
) -> Result<Vec<PacketAttempt>> {
    scenario.validate()?;
    let model = LinkModel::new(scenario)?;
    let toa = scenario.toa_s()?;
    let span = (scenario.tx_window_s() - toa).max(0.0);
    geometries
        .iter()
        .enumerate()
        .map(|(device, geometry)| {
            let budget = model.budget(geometry)?;
            let draw = traffic_draw(streams, device, scenario.n_channels);
            Ok(PacketAttempt {
                device_id: device as u32,
                sf: scenario.sf(),
                start_s: draw.unit_start * span,
                duration_s: toa,
                channel: draw.channel,
                rx_power_mw: dbm_to_mw(budget.p_rx_dbm),
                snr_ok: model.snr_ok(&budget),
            })
        })
        .collect()
}
