//! Monte Carlo estimation of P_SNR, P_SIR and P_S.
//!
//! A [`PreparedSim`] draws, once per trial, every quantity that does not
//! depend on the WET/transmission split: device positions, received powers,
//! SNR verdicts, channels and unit start offsets. Evaluating a WET duration
//! only rescales the start offsets into the new window and resolves
//! collisions, so all evaluations of one prepared scenario share their random
//! numbers.

use rayon::prelude::*;

use super::collision::resolve_sorted;
use super::placement::device_geometry;
use super::rng::TrialStreams;
use super::scenario::{InterferenceMode, Scenario};
use super::traffic::{traffic_draw, LinkModel, PacketAttempt};
use crate::error::Result;
use crate::units::dbm_to_mw;

/// 95% two-sided normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub p_snr: f64,
    /// Success against interference, conditional on passing the SNR test.
    pub p_sir: f64,
    /// Joint success, measured per attempt.
    pub p_s: f64,
    /// `p_snr * p_sir`, reported next to the joint estimate as a diagnostic.
    pub p_s_product: f64,
    /// 95% half-width of `p_s` across trials.
    pub ci_halfwidth: f64,
    /// Mean received power over all attempts, averaged in dBm.
    pub mean_rx_power_dbm: f64,
    pub trials_run: usize,
}

#[derive(Debug, Clone)]
struct TrialDraws {
    rx_power_mw: Vec<f64>,
    snr_ok: Vec<bool>,
    unit_start: Vec<f64>,
    channel: Vec<u32>,
    /// Attempt indices sorted by (channel, unit start). Scaling every start by
    /// the same positive span preserves this order.
    order: Vec<u32>,
    rx_dbm_sum: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialCounts {
    snr_ok: usize,
    sir_ok: usize,
    both_ok: usize,
}

#[derive(Debug, Clone)]
pub struct PreparedSim {
    scenario: Scenario,
    toa_s: f64,
    trials: Vec<TrialDraws>,
}

impl PreparedSim {
    /// Draws every trial of `scenario`; the scenario's own WET duration is not
    /// checked here.
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate_static()?;
        let model = LinkModel::new(scenario)?;
        let toa_s = scenario.toa_s()?;

        let frozen = if scenario.freeze_geometry {
            Some(Self::draw_links(scenario, &model, 0)?)
        } else {
            None
        };

        let trials = (0..scenario.trials)
            .into_par_iter()
            .map(|trial| -> Result<TrialDraws> {
                let links = match &frozen {
                    Some(links) => links.clone(),
                    None => Self::draw_links(scenario, &model, trial as u64)?,
                };
                let streams = TrialStreams::new(scenario.traffic_seed, trial as u64);
                let n = scenario.n_devices;
                let mut unit_start = Vec::with_capacity(n);
                let mut channel = Vec::with_capacity(n);
                for d in 0..n {
                    let draw = traffic_draw(&streams, d, scenario.n_channels);
                    unit_start.push(draw.unit_start);
                    channel.push(draw.channel);
                }
                let mut order: Vec<u32> = (0..n as u32).collect();
                order.sort_unstable_by(|&a, &b| {
                    channel[a as usize]
                        .cmp(&channel[b as usize])
                        .then(unit_start[a as usize].total_cmp(&unit_start[b as usize]))
                });
                let (rx_dbm, snr_ok): (Vec<f64>, Vec<bool>) = links.into_iter().unzip();
                Ok(TrialDraws {
                    rx_power_mw: rx_dbm.iter().map(|&p| dbm_to_mw(p)).collect(),
                    rx_dbm_sum: rx_dbm.iter().sum(),
                    snr_ok,
                    unit_start,
                    channel,
                    order,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(PreparedSim {
            scenario: scenario.clone(),
            toa_s,
            trials,
        })
    }

    fn draw_links(scenario: &Scenario, model: &LinkModel, trial: u64) -> Result<Vec<(f64, bool)>> {
        let streams = TrialStreams::new(scenario.geometry_seed, trial);
        (0..scenario.n_devices)
            .map(|d| {
                let budget = model.budget(&device_geometry(scenario, &streams, d))?;
                Ok((budget.p_rx_dbm, model.snr_ok(&budget)))
            })
            .collect()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn toa_s(&self) -> f64 {
        self.toa_s
    }

    /// Packet attempts of one trial for a given WET duration.
    pub fn attempts(&self, trial: usize, wet_duration_s: f64) -> Result<Vec<PacketAttempt>> {
        self.scenario.check_wet_duration(wet_duration_s)?;
        let span = (self.scenario.report_period_s - wet_duration_s - self.toa_s).max(0.0);
        Ok(self.build_attempts(&self.trials[trial], span))
    }

    fn build_attempts(&self, draws: &TrialDraws, span: f64) -> Vec<PacketAttempt> {
        let sf = self.scenario.sf();
        (0..draws.unit_start.len())
            .map(|d| PacketAttempt {
                device_id: d as u32,
                sf,
                start_s: draws.unit_start[d] * span,
                duration_s: self.toa_s,
                channel: draws.channel[d],
                rx_power_mw: draws.rx_power_mw[d],
                snr_ok: draws.snr_ok[d],
            })
            .collect()
    }

    /// Per-attempt SIR verdicts of one trial, as the engine computes them.
    pub fn trial_sir_ok(&self, trial: usize, wet_duration_s: f64) -> Result<Vec<bool>> {
        let attempts = self.attempts(trial, wet_duration_s)?;
        let mut sir_ok = vec![true; attempts.len()];
        resolve_sorted(
            &attempts,
            &self.trials[trial].order,
            self.scenario.thresholds.sir_capture_db,
            self.scenario.interference,
            &mut sir_ok,
        );
        Ok(sir_ok)
    }

    pub fn evaluate(&self, wet_duration_s: f64) -> Result<SimResult> {
        self.evaluate_with(wet_duration_s, self.scenario.interference)
    }

    pub fn evaluate_with(&self, wet_duration_s: f64, mode: InterferenceMode) -> Result<SimResult> {
        self.scenario.check_wet_duration(wet_duration_s)?;
        let span = (self.scenario.report_period_s - wet_duration_s - self.toa_s).max(0.0);
        let gamma = self.scenario.thresholds.sir_capture_db;

        let counts: Vec<TrialCounts> = self
            .trials
            .par_iter()
            .map(|draws| {
                let attempts = self.build_attempts(draws, span);
                let mut sir_ok = vec![true; attempts.len()];
                resolve_sorted(&attempts, &draws.order, gamma, mode, &mut sir_ok);
                let mut c = TrialCounts::default();
                for (snr, sir) in draws.snr_ok.iter().zip(&sir_ok) {
                    c.snr_ok += *snr as usize;
                    c.sir_ok += *sir as usize;
                    c.both_ok += (*snr && *sir) as usize;
                }
                c
            })
            .collect();

        Ok(self.reduce(&counts))
    }

    /// Sequential reduction in trial order.
    fn reduce(&self, counts: &[TrialCounts]) -> SimResult {
        let n = self.scenario.n_devices as f64;
        let t = counts.len() as f64;

        let p_snr = counts.iter().map(|c| c.snr_ok as f64 / n).sum::<f64>() / t;
        let p_s_trials: Vec<f64> = counts.iter().map(|c| c.both_ok as f64 / n).collect();
        let p_s = p_s_trials.iter().sum::<f64>() / t;

        let conditional: Vec<f64> = counts
            .iter()
            .filter(|c| c.snr_ok > 0)
            .map(|c| c.both_ok as f64 / c.snr_ok as f64)
            .collect();
        // No attempt passed the SNR test anywhere: fall back to the
        // unconditional interference-only success rate.
        let p_sir = if conditional.is_empty() {
            counts.iter().map(|c| c.sir_ok as f64 / n).sum::<f64>() / t
        } else {
            conditional.iter().sum::<f64>() / conditional.len() as f64
        };

        let ci_halfwidth = if counts.len() >= 2 {
            let var = p_s_trials.iter().map(|p| (p - p_s).powi(2)).sum::<f64>() / (t - 1.0);
            Z95 * (var / t).sqrt()
        } else {
            Z95 * (p_s * (1.0 - p_s) / n).sqrt()
        };

        let mean_rx_power_dbm = self.trials.iter().map(|d| d.rx_dbm_sum).sum::<f64>() / (n * t);

        SimResult {
            p_snr,
            p_sir,
            p_s,
            p_s_product: p_snr * p_sir,
            ci_halfwidth,
            mean_rx_power_dbm,
            trials_run: counts.len(),
        }
    }
}

/// Runs every trial of `scenario` at its own WET duration.
pub fn simulate(scenario: &Scenario) -> Result<SimResult> {
    scenario.validate()?;
    PreparedSim::new(scenario)?.evaluate(scenario.wet_duration_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::collision::brute_force_oracle;
    use crate::sim::placement::place_devices;
    use crate::sim::traffic::generate_traffic;

    fn small(n: usize) -> Scenario {
        Scenario {
            n_devices: n,
            trials: 20,
            ..Scenario::reference()
        }
    }

    #[test]
    fn single_device_in_range_always_succeeds() {
        let s = Scenario {
            n_devices: 1,
            trials: 50,
            ..Scenario::reference().with_sf(10)
        };
        let r = simulate(&s).unwrap();
        assert_eq!((r.p_snr, r.p_sir, r.p_s), (1.0, 1.0, 1.0));
        assert_eq!(r.trials_run, 50);
    }

    #[test]
    fn engine_matches_public_generators() {
        let s = small(300);
        let prepared = PreparedSim::new(&s).unwrap();
        for trial in [0usize, 7] {
            let geos = place_devices(&s, &TrialStreams::new(s.geometry_seed, trial as u64));
            let expected = generate_traffic(&s, &geos, &TrialStreams::new(s.traffic_seed, trial as u64)).unwrap();
            let got = prepared.attempts(trial, s.wet_duration_s).unwrap();
            assert_eq!(got.len(), expected.len());
            for (g, e) in got.iter().zip(&expected) {
                assert_eq!(g.start_s, e.start_s);
                assert_eq!(g.channel, e.channel);
                assert_eq!(g.snr_ok, e.snr_ok);
                assert!((g.rx_power_mw / e.rx_power_mw - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn engine_sir_matches_oracle() {
        let s = Scenario {
            n_channels: 2,
            ..small(50)
        };
        let prepared = PreparedSim::new(&s).unwrap();
        for trial in 0..s.trials {
            let attempts = prepared.attempts(trial, 1700.0).unwrap();
            let oracle = brute_force_oracle(&attempts, &s.thresholds, s.interference).unwrap();
            assert_eq!(prepared.trial_sir_ok(trial, 1700.0).unwrap(), oracle);
        }
    }

    #[test]
    fn deterministic() {
        let s = small(500);
        assert_eq!(simulate(&s).unwrap(), simulate(&s).unwrap());
    }

    #[test]
    fn joint_never_exceeds_marginals() {
        let r = simulate(&Scenario {
            wet_duration_s: 1750.0,
            ..small(2000)
        })
        .unwrap();
        assert!(r.p_s <= r.p_snr);
        assert!(r.p_s <= r.p_sir + r.ci_halfwidth);
    }

    #[test]
    fn frozen_geometry_repeats_positions() {
        let s = Scenario {
            freeze_geometry: true,
            ..small(50)
        };
        let prepared = PreparedSim::new(&s).unwrap();
        let a = prepared.attempts(0, 1200.0).unwrap();
        let b = prepared.attempts(5, 1200.0).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.rx_power_mw == y.rx_power_mw));
        assert!(a.iter().zip(&b).any(|(x, y)| x.start_s != y.start_s));
    }
}
