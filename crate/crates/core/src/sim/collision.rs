//! Co-channel collision resolution under the capture effect.
//!
//! Two attempts interfere when they share a channel and their open time
//! intervals intersect; touching endpoints do not count. A target survives
//! when its power over the interference power is at least γ dB.

use super::scenario::InterferenceMode;
use super::traffic::PacketAttempt;
use crate::error::{Error, Result};
use crate::phy::DemodThresholds;

fn check_single_sf(attempts: &[PacketAttempt]) -> Result<()> {
    if let Some(first) = attempts.first() {
        if let Some(other) = attempts.iter().find(|a| a.sf != first.sf) {
            return Err(Error::Contract(format!(
                "attempts mix SF{} and SF{}; inter-SF interference is not modeled",
                first.sf, other.sf
            )));
        }
    }
    Ok(())
}

/// Sort-and-sweep resolver. Returns `sir_ok` per attempt, in input order.
pub fn resolve_collisions(
    attempts: &[PacketAttempt],
    thresholds: &DemodThresholds,
    mode: InterferenceMode,
) -> Result<Vec<bool>> {
    check_single_sf(attempts)?;
    let mut order: Vec<u32> = (0..attempts.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (a, b) = (&attempts[a as usize], &attempts[b as usize]);
        a.channel.cmp(&b.channel).then(a.start_s.total_cmp(&b.start_s))
    });
    let mut sir_ok = vec![true; attempts.len()];
    resolve_sorted(attempts, &order, thresholds.sir_capture_db, mode, &mut sir_ok);
    Ok(sir_ok)
}

/// Sweep over `order`, which must sort attempts by (channel, start).
///
/// Interferer powers are accumulated in ascending attempt index so the
/// aggregate sum is bit-identical to a plain index-order scan.
pub(crate) fn resolve_sorted(
    attempts: &[PacketAttempt],
    order: &[u32],
    gamma_db: f64,
    mode: InterferenceMode,
    sir_ok: &mut [bool],
) {
    let max_duration = attempts.iter().map(|a| a.duration_s).fold(0.0, f64::max);
    let mut neighbors: Vec<u32> = Vec::new();

    for (pos, &ia) in order.iter().enumerate() {
        let a = &attempts[ia as usize];
        let overlaps = |b: &PacketAttempt| b.start_s < a.start_s + a.duration_s && a.start_s < b.start_s + b.duration_s;
        neighbors.clear();

        for &ib in order[..pos].iter().rev() {
            let b = &attempts[ib as usize];
            if b.channel != a.channel || b.start_s + max_duration <= a.start_s {
                break;
            }
            if overlaps(b) {
                neighbors.push(ib);
            }
        }
        for &ib in &order[pos + 1..] {
            let b = &attempts[ib as usize];
            if b.channel != a.channel || b.start_s >= a.start_s + a.duration_s {
                break;
            }
            if overlaps(b) {
                neighbors.push(ib);
            }
        }

        sir_ok[ia as usize] = if neighbors.is_empty() {
            true
        } else {
            let interference = match mode {
                InterferenceMode::Aggregate => {
                    neighbors.sort_unstable();
                    let mut sum = 0.0;
                    for &ib in &neighbors {
                        sum += attempts[ib as usize].rx_power_mw;
                    }
                    sum
                }
                InterferenceMode::Strongest => neighbors
                    .iter()
                    .map(|&ib| attempts[ib as usize].rx_power_mw)
                    .fold(0.0, f64::max),
            };
            10.0 * (a.rx_power_mw / interference).log10() >= gamma_db
        };
    }
}

/// Quadratic reference resolver with the same contract as
/// [`resolve_collisions`]; used as a test oracle.
pub fn brute_force_oracle(
    attempts: &[PacketAttempt],
    thresholds: &DemodThresholds,
    mode: InterferenceMode,
) -> Result<Vec<bool>> {
    check_single_sf(attempts)?;
    let mut out = Vec::with_capacity(attempts.len());
    for (i, target) in attempts.iter().enumerate() {
        let target_end = target.start_s + target.duration_s;
        let mut sum = 0.0;
        let mut strongest = 0.0f64;
        let mut any = false;
        for (j, other) in attempts.iter().enumerate() {
            if i == j || other.channel != target.channel {
                continue;
            }
            let other_end = other.start_s + other.duration_s;
            if other.start_s < target_end && target.start_s < other_end {
                any = true;
                sum += other.rx_power_mw;
                strongest = strongest.max(other.rx_power_mw);
            }
        }
        let ok = if !any {
            true
        } else {
            let denominator = match mode {
                InterferenceMode::Aggregate => sum,
                InterferenceMode::Strongest => strongest,
            };
            10.0 * (target.rx_power_mw / denominator).log10() >= thresholds.sir_capture_db
        };
        out.push(ok);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attempt(id: u32, start: f64, power_mw: f64) -> PacketAttempt {
        PacketAttempt {
            device_id: id,
            sf: 9,
            start_s: start,
            duration_s: 1.0,
            channel: 0,
            rx_power_mw: power_mw,
            snr_ok: true,
        }
    }

    fn both(attempts: &[PacketAttempt], mode: InterferenceMode) -> Vec<bool> {
        let t = DemodThresholds::default();
        let fast = resolve_collisions(attempts, &t, mode).unwrap();
        assert_eq!(fast, brute_force_oracle(attempts, &t, mode).unwrap());
        fast
    }

    #[test]
    fn lone_attempt_survives() {
        for mode in [InterferenceMode::Aggregate, InterferenceMode::Strongest] {
            assert_eq!(both(&[attempt(0, 0.0, 1.0)], mode), vec![true]);
        }
    }

    #[test]
    fn equal_power_overlap_kills_both() {
        let a = [attempt(0, 0.0, 1.0), attempt(1, 0.0, 1.0)];
        assert_eq!(both(&a, InterferenceMode::Aggregate), vec![false, false]);
    }

    #[test]
    fn ten_db_capture() {
        let a = [attempt(0, 0.0, 10.0), attempt(1, 0.5, 1.0)];
        for mode in [InterferenceMode::Aggregate, InterferenceMode::Strongest] {
            assert_eq!(both(&a, mode), vec![true, false]);
        }
    }

    #[test]
    fn touching_intervals_do_not_collide() {
        let a = [attempt(0, 0.0, 1.0), attempt(1, 1.0, 1.0)];
        assert_eq!(both(&a, InterferenceMode::Aggregate), vec![true, true]);
    }

    #[test]
    fn other_channel_does_not_interfere() {
        let mut b = attempt(1, 0.2, 1.0);
        b.channel = 3;
        assert_eq!(
            both(&[attempt(0, 0.0, 1.0), b], InterferenceMode::Aggregate),
            vec![true, true]
        );
    }

    #[test]
    fn aggregate_is_stricter_than_strongest() {
        // 7 dB above each of two interferers, but only 4 dB above their sum.
        let p = 10f64.powf(0.7);
        let a = [attempt(0, 0.0, p), attempt(1, 0.1, 1.0), attempt(2, 0.3, 1.0)];
        assert!(!both(&a, InterferenceMode::Aggregate)[0]);
        assert!(both(&a, InterferenceMode::Strongest)[0]);
    }

    #[test]
    fn mixed_sf_is_a_contract_violation() {
        let mut b = attempt(1, 5.0, 1.0);
        b.sf = 10;
        let t = DemodThresholds::default();
        assert!(matches!(
            resolve_collisions(&[attempt(0, 0.0, 1.0), b], &t, InterferenceMode::Aggregate),
            Err(Error::Contract(_))
        ));
        assert!(brute_force_oracle(&[attempt(0, 0.0, 1.0), b], &t, InterferenceMode::Aggregate).is_err());
    }
}
