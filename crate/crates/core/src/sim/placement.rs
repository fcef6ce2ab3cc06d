use rand::Rng;

use super::rng::TrialStreams;
use super::scenario::{Placement, Scenario};
use crate::link::LinkGeometry;

/// Ground distance from a unit uniform draw.
///
/// Truncating at `r_max` is sampled directly: the area-uniform law restricted
/// to a smaller disk is area-uniform on that disk, and a uniform segment
/// restricted to a shorter segment stays uniform.
pub fn ground_distance(placement: Placement, r_max: f64, u: f64) -> f64 {
    match placement {
        Placement::DiskUniform => r_max * u.sqrt(),
        // Position x ~ U[-r_max, r_max]; only |x| matters.
        Placement::PipelineLine => (r_max * (2.0 * u - 1.0)).abs(),
    }
}

pub fn device_geometry(scenario: &Scenario, streams: &TrialStreams, device: usize) -> LinkGeometry {
    let u: f64 = streams.device(device).gen();
    let r = ground_distance(scenario.placement, scenario.max_ground_distance_m(), u);
    LinkGeometry::new(scenario.burial_depth_m, scenario.hap_altitude_m, r)
}

/// One geometry per device for the trial the streams belong to.
pub fn place_devices(scenario: &Scenario, streams: &TrialStreams) -> Vec<LinkGeometry> {
    (0..scenario.n_devices)
        .map(|d| device_geometry(scenario, streams, d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nadir_and_edge() {
        let s = Scenario::reference();
        let g = LinkGeometry::new(
            0.6,
            s.hap_altitude_m,
            ground_distance(Placement::DiskUniform, 34_641.016, 0.0),
        );
        assert_eq!(g.elevation_deg, 90.0);
        assert_eq!(g.slant_distance_m, 20_000.0);
        let g = LinkGeometry::new(0.6, s.hap_altitude_m, 34_641.016);
        assert!((g.elevation_deg - 30.0).abs() < 1e-5);
        assert!((g.slant_distance_m - 40_000.0).abs() < 0.01);
    }

    #[test]
    fn strict_geometries_stay_above_thirty_degrees() {
        let s = Scenario {
            n_devices: 2000,
            ..Scenario::reference()
        };
        for placement in [Placement::DiskUniform, Placement::PipelineLine] {
            let s = Scenario { placement, ..s.clone() };
            for g in place_devices(&s, &TrialStreams::new(s.geometry_seed, 0)) {
                assert!(g.elevation_deg >= 30.0 - 1e-9 && g.elevation_deg <= 90.0);
                assert!(g.slant_distance_m <= 40_000.0 + 1e-6);
            }
        }
    }

    #[test]
    fn disk_second_moment() {
        let s = Scenario {
            n_devices: 100_000,
            strict_table2: false,
            ..Scenario::reference()
        };
        let geos = place_devices(&s, &TrialStreams::new(11, 0));
        let mean_r2 = geos.iter().map(|g| g.ground_distance_m.powi(2)).sum::<f64>() / geos.len() as f64;
        let expect = 35_000f64.powi(2) / 2.0;
        assert!((mean_r2 / expect - 1.0).abs() < 0.01, "{mean_r2} vs {expect}");
    }

    #[test]
    fn line_mean_distance() {
        let s = Scenario {
            n_devices: 100_000,
            strict_table2: false,
            placement: Placement::PipelineLine,
            ..Scenario::reference()
        };
        let geos = place_devices(&s, &TrialStreams::new(5, 0));
        let mean_r = geos.iter().map(|g| g.ground_distance_m).sum::<f64>() / geos.len() as f64;
        assert!((mean_r / 17_500.0 - 1.0).abs() < 0.01);
    }
}
