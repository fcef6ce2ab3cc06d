//! WET duration and SF search.
//!
//! The lifetime objective is a Monte Carlo estimate, so every evaluation of
//! one SF reuses the same prepared draws. The search evaluates a coarse grid
//! over [0, T − ToA], checks that the grid curve is unimodal, then refines the
//! bracketing interval by golden-section search. A non-unimodal grid falls
//! back to an exhaustive 1 s scan and flags the result.

use rayon::prelude::*;

use crate::energy::{EnergyModel, Lifetime};
use crate::error::{Error, Result};
use crate::phy::SPREADING_FACTORS;
use crate::sim::{PreparedSim, Scenario};

pub const GRID_POINTS: usize = 64;
pub const TOLERANCE_S: f64 = 1.0;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// One objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub lifetime: Lifetime,
    /// Success probability behind the lifetime; NaN for synthetic objectives.
    pub p_s: f64,
}

impl Evaluation {
    pub fn synthetic(lifetime: Lifetime) -> Self {
        Evaluation {
            lifetime,
            p_s: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwOptimum {
    pub t_w_opt_s: f64,
    pub lifetime: Lifetime,
    pub p_s_at_opt: f64,
    pub evaluations: usize,
    /// The coarse grid was not unimodal and an exhaustive scan was used.
    pub exhaustive_fallback: bool,
    pub grid: Vec<(f64, Evaluation)>,
}

/// Coarse grid points over [0, upper].
pub fn coarse_grid(upper_s: f64) -> Vec<f64> {
    (0..GRID_POINTS)
        .map(|i| upper_s * i as f64 / (GRID_POINTS - 1) as f64)
        .collect()
}

/// True when the sequence never rises after it has fallen. Flat steps are
/// ignored.
pub fn is_unimodal(values: &[f64]) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        if w[1] < w[0] {
            falling = true;
        } else if w[1] > w[0] && falling {
            return false;
        }
    }
    true
}

/// `a` beats `b`: higher lifetime, ties to the shorter WET phase.
fn better(a: (f64, Evaluation), b: (f64, Evaluation)) -> bool {
    let (la, lb) = (a.1.lifetime.objective(), b.1.lifetime.objective());
    la > lb || (la == lb && a.0 < b.0)
}

fn best_of(points: &[(f64, Evaluation)]) -> (f64, Evaluation) {
    let mut best = points[0];
    for &p in &points[1..] {
        if better(p, best) {
            best = p;
        }
    }
    best
}

/// Exhaustive scan at `step_s` over [0, upper], upper included.
pub fn exhaustive_optimum<F>(upper_s: f64, step_s: f64, mut objective: F) -> Result<(f64, Evaluation, usize)>
where
    F: FnMut(f64) -> Result<Evaluation>,
{
    let steps = (upper_s / step_s).floor() as usize;
    let mut points = Vec::with_capacity(steps + 2);
    for i in 0..=steps {
        let t = i as f64 * step_s;
        points.push((t, objective(t)?));
    }
    if (steps as f64) * step_s < upper_s {
        points.push((upper_s, objective(upper_s)?));
    }
    let (t, e) = best_of(&points);
    Ok((t, e, points.len()))
}

/// Maximizes `objective` over [0, upper_s].
///
/// If any grid point is energy neutral, the largest such WET duration is
/// returned: it maximizes the harvest margin among equally unbounded
/// lifetimes.
pub fn optimize_tw_with<F>(upper_s: f64, mut objective: F) -> Result<TwOptimum>
where
    F: FnMut(f64) -> Result<Evaluation>,
{
    if !(upper_s > 0.0) || !upper_s.is_finite() {
        return Err(Error::InvalidScenario(format!(
            "WET search interval [0, {upper_s}] s is empty"
        )));
    }
    let mut grid = Vec::with_capacity(GRID_POINTS);
    for t in coarse_grid(upper_s) {
        grid.push((t, objective(t)?));
    }
    let mut evaluations = grid.len();

    if let Some(&(t, e)) = grid.iter().rev().find(|(_, e)| e.lifetime.is_neutral()) {
        return Ok(TwOptimum {
            t_w_opt_s: t,
            lifetime: e.lifetime,
            p_s_at_opt: e.p_s,
            evaluations,
            exhaustive_fallback: false,
            grid,
        });
    }

    let values: Vec<f64> = grid.iter().map(|(_, e)| e.lifetime.objective()).collect();
    if !is_unimodal(&values) {
        let (t, e, n) = exhaustive_optimum(upper_s, TOLERANCE_S, &mut objective)?;
        evaluations += n;
        let (t, e) = best_of(&[(t, e), best_of(&grid)]);
        return Ok(TwOptimum {
            t_w_opt_s: t,
            lifetime: e.lifetime,
            p_s_at_opt: e.p_s,
            evaluations,
            exhaustive_fallback: true,
            grid,
        });
    }

    let k = grid
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if better(p, grid[best]) { i } else { best });
    let mut a = grid[k.saturating_sub(1)].0;
    let mut b = grid[(k + 1).min(grid.len() - 1)].0;

    let mut visited = vec![grid[k]];
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    evaluations += 2;
    visited.push((x1, f1));
    visited.push((x2, f2));
    while b - a > TOLERANCE_S {
        if f1.lifetime.objective() >= f2.lifetime.objective() {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = objective(x1)?;
            visited.push((x1, f1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = objective(x2)?;
            visited.push((x2, f2));
        }
        evaluations += 1;
    }

    let (t, e) = best_of(&visited);
    Ok(TwOptimum {
        t_w_opt_s: t,
        lifetime: e.lifetime,
        p_s_at_opt: e.p_s,
        evaluations,
        exhaustive_fallback: false,
        grid,
    })
}

/// Lifetime objective of a prepared scenario.
pub fn lifetime_objective<'a>(
    prepared: &'a PreparedSim,
    energy: &'a EnergyModel,
) -> impl FnMut(f64) -> Result<Evaluation> + 'a {
    let scenario = prepared.scenario();
    let period = scenario.report_period_s;
    let toa = prepared.toa_s();
    move |t_w| {
        let p_s = prepared.evaluate(t_w)?.p_s;
        let r = energy.assess(toa, period, t_w, p_s)?;
        Ok(Evaluation {
            lifetime: r.lifetime,
            p_s,
        })
    }
}

/// Optimal WET duration for one SF under `scenario`'s load.
pub fn optimize_tw(scenario: &Scenario, sf: u8, energy: &EnergyModel) -> Result<TwOptimum> {
    let s = scenario.with_sf(sf);
    let prepared = PreparedSim::new(&s)?;
    let upper = s.report_period_s - prepared.toa_s();
    optimize_tw_with(upper, lifetime_objective(&prepared, energy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfOptimum {
    pub sf: u8,
    pub optimum: TwOptimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub sf: u8,
    pub t_w_opt_s: f64,
    pub lifetime: Lifetime,
    pub p_s_at_opt: f64,
    /// Objective evaluations summed over all SFs.
    pub evaluations: usize,
    pub per_sf_table: Vec<SfOptimum>,
}

/// Picks the best SF from per-SF optima; ties go to the lower SF.
pub fn select_sf(per_sf_table: Vec<SfOptimum>) -> Result<OptimizationResult> {
    let winner = per_sf_table
        .iter()
        .fold(None::<&SfOptimum>, |best, cand| match best {
            Some(b) if b.optimum.lifetime.objective() >= cand.optimum.lifetime.objective() => Some(b),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::InvalidScenario("no spreading factor to optimize".into()))?;
    Ok(OptimizationResult {
        sf: winner.sf,
        t_w_opt_s: winner.optimum.t_w_opt_s,
        lifetime: winner.optimum.lifetime,
        p_s_at_opt: winner.optimum.p_s_at_opt,
        evaluations: per_sf_table.iter().map(|r| r.optimum.evaluations).sum(),
        per_sf_table,
    })
}

/// Runs [`optimize_tw`] for every SF in `sfs` and keeps the best.
pub fn optimize_sfs(scenario: &Scenario, sfs: &[u8], energy: &EnergyModel) -> Result<OptimizationResult> {
    scenario.validate_static()?;
    let table = sfs
        .par_iter()
        .map(|&sf| {
            Ok(SfOptimum {
                sf,
                optimum: optimize_tw(scenario, sf, energy)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    select_sf(table)
}

/// Best (SF, T_w) over SF7..=SF12.
pub fn optimize_sf_tw(scenario: &Scenario, energy: &EnergyModel) -> Result<OptimizationResult> {
    optimize_sfs(scenario, &SPREADING_FACTORS, energy)
}
