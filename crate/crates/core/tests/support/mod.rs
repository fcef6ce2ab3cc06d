//! Invariant checks shared by the property and acceptance suites. Each check
//! panics with a description on the first violation.

#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subterra::energy::{epp, lifetime, Battery, ClassAProfile, EnergyModel, HarvestConfig, Lifetime};
use subterra::link::{air_path_loss, received_snr, underground_path_loss, LinkGeometry, RadioConfig};
use subterra::optimize::{exhaustive_optimum, is_unimodal, optimize_tw, optimize_tw_with, Evaluation};
use subterra::phy::{time_on_air, DemodThresholds, LoRaParams, PUBLISHED_TOA_S};
use subterra::sim::{brute_force_oracle, resolve_collisions, simulate, InterferenceMode, PacketAttempt, Scenario};
use subterra::soil::{complex_permittivity, propagation_constants, ComplexPermittivity, SoilProfile};
use subterra::units::{C0, EPS0, MU0, SECONDS_PER_YEAR};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>)
where
    S::Value: std::fmt::Debug,
{
    if let Err(e) = runner(cases).run(&strategy, test) {
        panic!("{e}");
    }
}

// ---- soil_dielectric ----

pub fn eps_real_nondecreasing_in_vwc() {
    for clay in [0.0, 0.1686, 0.4, 0.6] {
        for f in [433e6, 868e6, 2.4e9] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=7 {
                let vwc = 0.05 * i as f64;
                let e = complex_permittivity(&SoilProfile {
                    clay_fraction: clay,
                    vwc,
                    frequency_hz: f,
                })
                .unwrap();
                assert!(e.eps_real >= prev, "ε′ fell at clay={clay} f={f} vwc={vwc}");
                prev = e.eps_real;
            }
        }
    }
}

pub fn alpha_zero_iff_lossless_and_monotone_in_frequency() {
    check(
        256,
        (1.0f64..60.0, 0.0f64..20.0, 3e8f64..3e9, 1.001f64..3.0),
        |(er, ei, f, scale)| {
            let lossless = propagation_constants(
                ComplexPermittivity {
                    eps_real: er,
                    eps_imag: 0.0,
                },
                f,
            )
            .unwrap();
            prop_assert_eq!(lossless.alpha, 0.0);
            let eps = ComplexPermittivity {
                eps_real: er,
                eps_imag: ei.max(1e-6),
            };
            let lo = propagation_constants(eps, f).unwrap();
            let hi = propagation_constants(eps, f * scale).unwrap();
            prop_assert!(lo.alpha > 0.0);
            prop_assert!(hi.alpha > lo.alpha);
            prop_assert!(hi.beta > lo.beta);
            Ok(())
        },
    );
}

pub fn low_loss_alpha_approximation() {
    for er in [2.0, 6.1, 16.8, 40.0] {
        for f in [433e6, 868e6, 2.4e9] {
            let ei = 0.01 * er;
            let pc = propagation_constants(
                ComplexPermittivity {
                    eps_real: er,
                    eps_imag: ei,
                },
                f,
            )
            .unwrap();
            let omega = 2.0 * PI * f;
            let approx = omega / 2.0 * (MU0 * EPS0 * er).sqrt() * (ei / er);
            assert!((pc.alpha / approx - 1.0).abs() < 0.01, "ε′={er} f={f}");
        }
    }
}

// ---- link_budget ----

pub fn snr_strictly_decreasing_in_depth_vwc_and_distance() {
    let radio = RadioConfig::default();
    let snr = |depth: f64, vwc: f64, ground: f64| {
        received_snr(
            &radio,
            &LinkGeometry::new(depth, 20_000.0, ground),
            &SoilProfile::IN_SITU.with_vwc(vwc),
        )
        .unwrap()
        .snr_db
    };
    let depths = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];
    let vwcs = [0.02, 0.05, 0.1, 0.119, 0.2, 0.3];
    let grounds = [0.0, 5e3, 10e3, 20e3, 30e3, 35e3];
    for w in depths.windows(2) {
        assert!(snr(w[1], 0.119, 10e3) < snr(w[0], 0.119, 10e3), "depth {w:?}");
    }
    for w in vwcs.windows(2) {
        assert!(snr(0.6, w[1], 10e3) < snr(0.6, w[0], 10e3), "vwc {w:?}");
    }
    for w in grounds.windows(2) {
        assert!(snr(0.6, 0.119, w[1]) < snr(0.6, 0.119, w[0]), "ground distance {w:?}");
    }
}

pub fn underground_loss_halving_identity() {
    check(256, (0.02f64..2.0, 0.0f64..10.0, 1.0f64..200.0), |(d, alpha, beta)| {
        let pc = subterra::soil::PropagationConstants { alpha, beta };
        let diff = underground_path_loss(d, pc).unwrap() - underground_path_loss(d / 2.0, pc).unwrap();
        let expected = 20.0 * 2f64.log10() + 8.69 * alpha * d / 2.0;
        prop_assert!((diff - expected).abs() < 1e-9, "{} vs {}", diff, expected);
        Ok(())
    });
}

pub fn air_loss_matches_free_space() {
    let f = 868e6;
    for d in [1.0, 1e3, 20e3, 40e3] {
        let textbook = 20.0 * (4.0 * PI * d * f / C0).log10();
        assert!((air_path_loss(d, f, 2.0).unwrap() - textbook).abs() < 1e-9, "d = {d}");
    }
}

// ---- lora_phy ----

pub fn toa_roughly_doubles_per_sf() {
    for sf in 7..=11u8 {
        let r = time_on_air(&LoRaParams::reference(sf + 1)).unwrap() / time_on_air(&LoRaParams::reference(sf)).unwrap();
        assert!(r > 1.6 && r < 2.4, "SF{sf}→SF{}: ratio {r}", sf + 1);
    }
}

pub fn toa_matches_published_outside_sf9() {
    for sf in [7u8, 8, 10, 11, 12] {
        let t = time_on_air(&LoRaParams::reference(sf)).unwrap();
        let published = PUBLISHED_TOA_S[(sf - 7) as usize];
        assert!((t - published).abs() <= 1e-6, "SF{sf}: {t} vs {published}");
    }
}

pub fn toa_strictly_increasing_in_payload() {
    // One symbol carries at least SF−2 bits, so compare payloads a codeword
    // apart; single bytes can share a symbol count.
    check(256, (7u8..=12, 1u32..200), |(sf, payload)| {
        let p = LoRaParams {
            app_payload_bytes: payload,
            ..LoRaParams::reference(sf)
        };
        let bigger = LoRaParams {
            app_payload_bytes: payload + sf as u32,
            ..p
        };
        prop_assert!(time_on_air(&bigger).unwrap() > time_on_air(&p).unwrap());
        let one_more = LoRaParams {
            app_payload_bytes: payload + 1,
            ..p
        };
        prop_assert!(time_on_air(&one_more).unwrap() >= time_on_air(&p).unwrap());
        Ok(())
    });
}

// ---- network_sim ----

fn small(n: usize, trials: usize) -> Scenario {
    Scenario {
        n_devices: n,
        trials,
        ..Scenario::reference()
    }
}

pub fn joint_success_bounded_by_marginals() {
    for (sf, tw, n) in [
        (7u8, 1200.0, 2000usize),
        (8, 1700.0, 3000),
        (9, 1750.0, 2000),
        (12, 1790.0, 500),
    ] {
        let r = simulate(&small(n, 10).with_sf(sf).with_wet_duration(tw)).unwrap();
        assert!(r.p_s <= r.p_snr, "SF{sf}: {r:?}");
        assert!(r.p_s <= r.p_sir + r.ci_halfwidth, "SF{sf}: {r:?}");
    }
}

pub fn p_sir_monotone_in_load() {
    let base = Scenario {
        n_channels: 8,
        ..small(0, 20)
    }
    .with_sf(10);
    // T_t grid at fixed N: shared seeds shrink every interferer set, so the
    // ordering is exact.
    let mut prev = 0.0;
    for tw in [1790.0, 1750.0, 1600.0, 1200.0, 0.0] {
        let r = simulate(&Scenario {
            n_devices: 1000,
            ..base.with_wet_duration(tw)
        })
        .unwrap();
        assert!(r.p_sir >= prev, "T_w={tw}: {} < {prev}", r.p_sir);
        prev = r.p_sir;
    }
    // N grid at fixed T_t: new devices change the average, so allow the CI.
    let mut prev: Option<(f64, f64)> = None;
    for n in [250usize, 500, 1000, 2000, 4000] {
        let r = simulate(&Scenario {
            n_devices: n,
            ..base.with_wet_duration(1750.0)
        })
        .unwrap();
        if let Some((p, ci)) = prev {
            assert!(
                r.p_sir <= p + (ci * ci + r.ci_halfwidth * r.ci_halfwidth).sqrt(),
                "N={n}"
            );
        }
        prev = Some((r.p_sir, r.ci_halfwidth));
    }
}

pub fn channel_thinning() {
    for n in [641usize, 1281] {
        let multi = Scenario {
            n_devices: n,
            n_channels: 64,
            trials: 200,
            ..Scenario::reference()
        }
        .with_sf(12)
        .with_wet_duration(0.0);
        let single = Scenario {
            n_devices: n.div_ceil(64),
            n_channels: 1,
            trials: 20_000,
            ..multi.clone()
        };
        let (a, b) = (simulate(&multi).unwrap(), simulate(&single).unwrap());
        assert_eq!(a.p_snr, 1.0);
        let tol = (a.ci_halfwidth.powi(2) + b.ci_halfwidth.powi(2)).sqrt();
        assert!(
            (a.p_sir - b.p_sir).abs() <= tol,
            "N={n}: {} vs {} (±{tol})",
            a.p_sir,
            b.p_sir
        );
    }
}

/// Random small instances; many share a channel and overlap in time.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Vec<PacketAttempt> {
    let n = rng.gen_range(0..=50);
    let channels = rng.gen_range(1..=4);
    let window = rng.gen_range(0.5..20.0);
    let duration = rng.gen_range(0.05..2.0);
    (0..n)
        .map(|i| {
            let start: f64 = rng.gen_range(0.0..window);
            // Quantized starts force exact touches and identical starts.
            let start_s = if rng.gen_bool(0.3) {
                (start / duration).floor() * duration
            } else {
                start
            };
            PacketAttempt {
                device_id: i,
                sf: 9,
                start_s,
                duration_s: duration,
                channel: rng.gen_range(0..channels),
                rx_power_mw: 10f64.powf(rng.gen_range(-14.0..-9.0)),
                snr_ok: rng.gen_bool(0.8),
            }
        })
        .collect()
}

pub fn collision_oracle_equivalence(instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let t = DemodThresholds::default();
    for i in 0..instances {
        let attempts = random_instance(&mut rng);
        for mode in [InterferenceMode::Aggregate, InterferenceMode::Strongest] {
            let fast = resolve_collisions(&attempts, &t, mode).unwrap();
            let oracle = brute_force_oracle(&attempts, &t, mode).unwrap();
            assert_eq!(fast, oracle, "instance {i}, {mode:?}");
        }
    }
}

pub fn simulation_deterministic() {
    let s = Scenario {
        n_channels: 4,
        ..small(1500, 8)
    }
    .with_seed(99);
    let (a, b) = (simulate(&s).unwrap(), simulate(&s).unwrap());
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_eq!(a.p_s.to_bits(), b.p_s.to_bits());
}

// ---- energy_lifetime ----

pub fn lifetime_monotone_in_harvest_and_consumption() {
    let b = Battery::default();
    check(256, (0.01f64..50.0, 0.0f64..1.0, 1.001f64..2.0), |(c, frac, k)| {
        let h = c * frac * 0.99;
        let base = lifetime(&b, c, h, 1800.0).unwrap().lifetime.years().unwrap();
        let more_harvest = lifetime(&b, c, h + (c - h) * (1.0 - 1.0 / k), 1800.0)
            .unwrap()
            .lifetime
            .years()
            .unwrap();
        let more_use = lifetime(&b, c * k, h, 1800.0).unwrap().lifetime.years().unwrap();
        prop_assert!(more_harvest > base);
        prop_assert!(more_use < base);
        Ok(())
    });
}

/// `epp(E, p) · p` recovers E to within one rounding of the product; IEEE
/// division and multiplication do not invert each other bit-exactly.
pub fn epp_homogeneity() {
    check(512, (1e-4f64..10.0, 1e-3f64..=1.0), |(e, p)| {
        let j = epp(e, p).joules().unwrap();
        prop_assert!((j * p - e).abs() <= e * f64::EPSILON, "{} · {} = {}", j, p, j * p);
        prop_assert_eq!(epp(e, p / 2.0).joules().unwrap(), 2.0 * j);
        Ok(())
    });
}

pub fn lifetime_without_harvest_is_battery_over_consumption() {
    let b = Battery::default();
    assert_eq!(b.energy_j(), 35_640.0);
    check(256, (0.001f64..100.0, 60.0f64..7200.0), |(c, t)| {
        let y = lifetime(&b, c, 0.0, t).unwrap().lifetime.years().unwrap();
        prop_assert_eq!(y, b.energy_j() / c * t / SECONDS_PER_YEAR);
        Ok(())
    });
}

pub fn lifetime_scaling_homogeneity() {
    let b = Battery::default();
    check(256, (0.1f64..10.0, 0.0f64..0.9, 0.1f64..10.0), |(c, frac, k)| {
        let y = lifetime(&b, c, c * frac, 1800.0).unwrap().lifetime.years().unwrap();
        let yk = lifetime(&b, c * k, c * frac * k, 1800.0)
            .unwrap()
            .lifetime
            .years()
            .unwrap();
        prop_assert!((yk * k / y - 1.0).abs() < 1e-12);
        prop_assert_eq!(lifetime(&b, c, c, 1800.0).unwrap().lifetime, Lifetime::EnergyNeutral);
        Ok(())
    });
}

// ---- optimizer ----

pub fn optimum_dominates_grid() {
    check(
        128,
        (0.0f64..1800.0, 0.1f64..100.0, 200.0f64..1800.0, any::<bool>()),
        |(peak, width, upper, cusp)| {
            let f = move |t: f64| {
                let y = if cusp {
                    10.0 - (t - peak).abs() / width
                } else {
                    10.0 - ((t - peak) / width).powi(2)
                };
                Ok(Evaluation::synthetic(Lifetime::Years(y)))
            };
            let r = optimize_tw_with(upper, f).unwrap();
            for (_, e) in &r.grid {
                prop_assert!(r.lifetime.objective() >= e.lifetime.objective());
            }
            prop_assert!(r.t_w_opt_s >= 0.0 && r.t_w_opt_s <= upper);
            Ok(())
        },
    );
}

fn oracle_scenario(rng: &mut ChaCha8Rng) -> (Scenario, EnergyModel) {
    let s = Scenario {
        n_devices: rng.gen_range(200..2000),
        n_channels: rng.gen_range(1..=8),
        trials: 4,
        ..Scenario::reference()
    }
    .with_seed(rng.gen())
    .with_sf(rng.gen_range(9..=12));
    let energy = EnergyModel {
        harvest: HarvestConfig {
            received_power_w: rng.gen_range(0.002..0.012),
            ..HarvestConfig::default()
        },
        ..EnergyModel::new(ClassAProfile::builtin("calibrated").unwrap())
    };
    (s, energy)
}

/// Golden-section result against an exhaustive 1 s scan of the same
/// objective. Returns (t_golden, t_grid, lifetime_golden, lifetime_grid).
pub fn golden_vs_exhaustive(seed: u64) -> (f64, f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, energy) = oracle_scenario(&mut rng);
    let prepared = subterra::sim::PreparedSim::new(&s).unwrap();
    let upper = s.report_period_s - prepared.toa_s();
    let golden = optimize_tw_with(upper, subterra::optimize::lifetime_objective(&prepared, &energy)).unwrap();
    let (t, e, _) = exhaustive_optimum(upper, 1.0, subterra::optimize::lifetime_objective(&prepared, &energy)).unwrap();
    (golden.t_w_opt_s, t, golden.lifetime.objective(), e.lifetime.objective())
}

pub fn optimizer_deterministic() {
    let s = Scenario {
        n_channels: 4,
        ..small(800, 4)
    };
    let energy = EnergyModel::new(ClassAProfile::builtin("calibrated").unwrap());
    assert_eq!(
        optimize_tw(&s, 10, &energy).unwrap(),
        optimize_tw(&s, 10, &energy).unwrap()
    );
}

pub fn unimodality_helper_agrees_with_definition() {
    check(256, proptest::collection::vec(0.0f64..10.0, 2..20), |v| {
        let sign_changes_up_after_down = v
            .windows(2)
            .map(|w| (w[1] - w[0]).partial_cmp(&0.0).unwrap())
            .filter(|o| o.is_ne())
            .collect::<Vec<_>>()
            .windows(2)
            .any(|w| w[0].is_lt() && w[1].is_gt());
        prop_assert_eq!(is_unimodal(&v), !sign_changes_up_after_down);
        Ok(())
    });
}
