//! Experiment runners. Each returns its CSV as a string; sweep points run in
//! parallel and rows are emitted in sweep order.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, VERSION_KEY};
use crate::energy::{calibrate_overhead, energy_per_attempt, epp, EnergyModel};
use crate::error::{Error, Result};
use crate::optimize::optimize_sfs;
use crate::sim::{PreparedSim, Scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// CSV text, or profile text for calibration.
    pub body: String,
    /// One line per rejected sweep point.
    pub rejects: Vec<String>,
    /// Human-readable digest for standard output.
    pub summary: String,
}

impl ExperimentOutput {
    pub fn is_partial(&self) -> bool {
        !self.rejects.is_empty()
    }
}

fn header(config: &ExperimentConfig) -> String {
    let mut out = format!("# {VERSION_KEY} = {VERSION}\n");
    for line in config.resolved().render().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn f(v: f64) -> String {
    v.to_string()
}

/// Header block, column row, data rows, then trailing reject comments.
fn write_csv(config: &ExperimentConfig, columns: &[&str], rows: &[Vec<String>], rejects: &[String]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(columns).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let mut out = header(config);
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?);
    for r in rejects {
        out.push_str("# reject: ");
        out.push_str(r);
        out.push('\n');
    }
    Ok(out)
}

/// Rows of one sweep point, or the reason it was rejected.
type PointResult = Result<Vec<Vec<String>>>;

fn split(results: Vec<(String, PointResult)>) -> Result<(Vec<Vec<String>>, Vec<String>)> {
    let mut rows = Vec::new();
    let mut rejects = Vec::new();
    for (label, r) in results {
        match r {
            Ok(mut r) => rows.append(&mut r),
            Err(e @ (Error::InvalidScenario(_) | Error::OutOfRange { .. } | Error::Domain(_))) => {
                rejects.push(format!("{label}: {e}"))
            }
            Err(e) => return Err(e),
        }
    }
    Ok((rows, rejects))
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.kind {
        ExperimentKind::Single => run_single(config),
        ExperimentKind::Fig3 => run_fig3(config),
        ExperimentKind::Fig4 => run_fig4(config),
        ExperimentKind::Fig5 => run_fig5(config),
        ExperimentKind::Optimize => run_optimize(config),
        ExperimentKind::Calibrate => run_calibrate(config),
    }
}

/// One scenario: simulation estimates and the lifetime they imply.
pub fn run_single(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = &config.scenario;
    s.validate()?;
    let energy = config.energy_model()?;
    let toa = s.toa_s()?;
    let sim = PreparedSim::new(s)?.evaluate(s.wet_duration_s)?;
    let life = energy.assess(toa, s.report_period_s, s.wet_duration_s, sim.p_s)?;
    let attempt_epp = epp(energy_per_attempt(&energy.profile, toa)?, sim.p_s);

    let columns = [
        "sf",
        "n",
        "t_s",
        "t_w_s",
        "p_snr",
        "p_sir",
        "p_s",
        "p_s_product",
        "ci",
        "mean_rx_power_dbm",
        "epp_j",
        "consumption_j",
        "harvest_j",
        "net_drain_j",
        "lifetime_years",
    ];
    let row = vec![
        s.sf().to_string(),
        s.n_devices.to_string(),
        f(s.report_period_s),
        f(s.wet_duration_s),
        f(sim.p_snr),
        f(sim.p_sir),
        f(sim.p_s),
        f(sim.p_s_product),
        f(sim.ci_halfwidth),
        f(sim.mean_rx_power_dbm),
        attempt_epp.to_string(),
        f(life.consumption_per_period_j),
        f(life.harvest_per_period_j),
        f(life.net_drain_j),
        life.lifetime.to_string(),
    ];
    let summary = format!(
        "SF{} N={} T={} s T_w={} s\n  P_SNR={:.4} P_SIR={:.4} P_S={:.4} (±{:.4})\n  EPP={} J  consumption={:.6} J/period  harvest={:.4} J/period\n  lifetime={} years\n",
        s.sf(),
        s.n_devices,
        s.report_period_s,
        s.wet_duration_s,
        sim.p_snr,
        sim.p_sir,
        sim.p_s,
        sim.ci_halfwidth,
        attempt_epp,
        life.consumption_per_period_j,
        life.harvest_per_period_j,
        life.lifetime,
    );
    Ok(ExperimentOutput {
        body: write_csv(config, &columns, &[row], &[])?,
        rejects: Vec::new(),
        summary,
    })
}

/// Success probabilities and EPP per soil point and SF at the fixed WET
/// duration of the base scenario.
pub fn run_fig3(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let energy = config.energy_model()?;
    let points: Vec<(f64, f64, u8)> = config
        .soil_points()?
        .into_iter()
        .flat_map(|(d, v)| config.sfs().into_iter().map(move |sf| (d, v, sf)))
        .collect();

    let results: Vec<(String, PointResult)> = points
        .par_iter()
        .map(|&(depth, vwc, sf)| {
            let label = format!("depth_m={depth} vwc={vwc} sf={sf}");
            let r = (|| {
                let s = Scenario {
                    burial_depth_m: depth,
                    soil: config.scenario.soil.with_vwc(vwc),
                    ..config.scenario.with_sf(sf)
                };
                s.validate()?;
                let sim = PreparedSim::new(&s)?.evaluate(s.wet_duration_s)?;
                let e = epp(energy_per_attempt(&energy.profile, s.toa_s()?)?, sim.p_s);
                Ok(vec![vec![
                    f(depth),
                    f(vwc),
                    sf.to_string(),
                    f(sim.p_snr),
                    f(sim.p_sir),
                    f(sim.p_s),
                    f(sim.ci_halfwidth),
                    e.to_string(),
                    f(sim.p_s_product),
                ]])
            })();
            (label, r)
        })
        .collect();

    let (rows, rejects) = split(results)?;
    let columns = [
        "depth_m",
        "vwc",
        "sf",
        "p_snr",
        "p_sir",
        "p_s",
        "ci",
        "epp_j",
        "p_s_product",
    ];
    Ok(ExperimentOutput {
        body: write_csv(config, &columns, &rows, &rejects)?,
        summary: format!("fig3: {} rows, {} rejected\n", rows.len(), rejects.len()),
        rejects,
    })
}

/// Lifetime against WET duration, one curve per SF.
pub fn run_fig4(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let energy = config.energy_model()?;
    let wet = config.wet_durations();
    let results: Vec<Vec<(String, PointResult)>> = config
        .sfs()
        .par_iter()
        .map(|&sf| {
            let s = config.scenario.with_sf(sf);
            let prepared = match PreparedSim::new(&s) {
                Ok(p) => p,
                Err(e) => return vec![(format!("sf={sf}"), Err(e))],
            };
            wet.iter()
                .map(|&tw| {
                    let r = (|| {
                        let p_s = prepared.evaluate(tw)?.p_s;
                        let life = energy.assess(prepared.toa_s(), s.report_period_s, tw, p_s)?;
                        Ok(vec![vec![
                            sf.to_string(),
                            f(tw),
                            life.lifetime.to_string(),
                            f(p_s),
                            f(life.harvest_per_period_j),
                            f(life.consumption_per_period_j),
                        ]])
                    })();
                    (format!("sf={sf} t_w_s={tw}"), r)
                })
                .collect()
        })
        .collect();

    let (rows, rejects) = split(results.into_iter().flatten().collect())?;
    let columns = ["sf", "t_w_s", "lifetime_years", "p_s", "harvest_j", "consumption_j"];
    Ok(ExperimentOutput {
        body: write_csv(config, &columns, &rows, &rejects)?,
        summary: format!("fig4: {} rows, {} rejected\n", rows.len(), rejects.len()),
        rejects,
    })
}

/// Optimized lifetime against network size for each reporting period and
/// harvest level. Every point is re-optimized over SF and WET duration.
pub fn run_fig5(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let base_energy = config.energy_model()?;
    let sfs = config.sfs();
    let mut points = Vec::new();
    for t in config.report_periods() {
        for p_r in config.received_powers() {
            for n in config.n_devices() {
                points.push((n, t, p_r));
            }
        }
    }

    let results: Vec<(String, PointResult)> = points
        .par_iter()
        .map(|&(n, t, p_r)| {
            let label = format!("n={n} t_s={t} p_r_w={p_r}");
            let r = (|| {
                let s = Scenario {
                    n_devices: n,
                    report_period_s: t,
                    ..config.scenario.clone()
                };
                let mut energy: EnergyModel = base_energy.clone();
                energy.harvest.received_power_w = p_r;
                let best = optimize_sfs(&s, &sfs, &energy)?;
                Ok(vec![vec![
                    n.to_string(),
                    f(t),
                    f(p_r),
                    best.sf.to_string(),
                    f(best.t_w_opt_s),
                    best.lifetime.to_string(),
                    f(best.p_s_at_opt),
                ]])
            })();
            (label, r)
        })
        .collect();

    let (rows, rejects) = split(results)?;
    let columns = ["n", "t_s", "p_r_w", "sf_opt", "t_w_opt", "lifetime_years", "p_s_at_opt"];
    Ok(ExperimentOutput {
        body: write_csv(config, &columns, &rows, &rejects)?,
        summary: format!("fig5: {} rows, {} rejected\n", rows.len(), rejects.len()),
        rejects,
    })
}

/// Per-SF optimal WET duration for the base scenario and the winning SF.
pub fn run_optimize(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let energy = config.energy_model()?;
    let best = optimize_sfs(&config.scenario, &config.sfs(), &energy)?;
    let rows: Vec<Vec<String>> = best
        .per_sf_table
        .iter()
        .map(|r| {
            vec![
                r.sf.to_string(),
                f(r.optimum.t_w_opt_s),
                r.optimum.lifetime.to_string(),
                f(r.optimum.p_s_at_opt),
                r.optimum.evaluations.to_string(),
                r.optimum.exhaustive_fallback.to_string(),
                (r.sf == best.sf).to_string(),
            ]
        })
        .collect();
    let columns = [
        "sf",
        "t_w_opt_s",
        "lifetime_years",
        "p_s_at_opt",
        "evaluations",
        "exhaustive_fallback",
        "winner",
    ];
    let summary = format!(
        "best: SF{} T_w={:.1} s lifetime={} years P_S={:.4} ({} evaluations)\n",
        best.sf, best.t_w_opt_s, best.lifetime, best.p_s_at_opt, best.evaluations
    );
    Ok(ExperimentOutput {
        body: write_csv(config, &columns, &rows, &[])?,
        rejects: Vec::new(),
        summary,
    })
}

/// Fits the per-period overhead of the configured profile so the base
/// scenario lives `anchor_years`, and returns the fitted profile text.
pub fn run_calibrate(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = &config.scenario;
    s.validate()?;
    let energy = config.energy_model()?;
    let prepared = PreparedSim::new(s)?;
    let p_s = prepared.evaluate(s.wet_duration_s)?.p_s;
    let toa = prepared.toa_s();
    let overhead = calibrate_overhead(config.anchor_years, |ov| {
        let m = EnergyModel {
            profile: energy.profile.with_overhead(ov),
            ..energy.clone()
        };
        Ok(m.assess(toa, s.report_period_s, s.wet_duration_s, p_s)?.lifetime)
    })?;

    let mut profile = energy.profile.with_overhead(overhead);
    profile.name = "calibrated".into();
    let mut body = header(config);
    body.push_str(&format!(
        "# fitted: {} years at SF{}, T_w = {} s, P_S = {}\n",
        config.anchor_years,
        s.sf(),
        s.wet_duration_s,
        p_s
    ));
    body.push_str(&profile.render());
    let summary = format!(
        "overhead_energy_j = {overhead} (P_S = {p_s:.4}, anchor {} years)\n",
        config.anchor_years
    );
    Ok(ExperimentOutput {
        body,
        rejects: Vec::new(),
        summary,
    })
}
