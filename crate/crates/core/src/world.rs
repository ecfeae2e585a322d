//! Vehicle/UAV/BS geometry, mobility, and coverage queries.
//!
//! The street is a 1-D segment with wrap-around on x. Vehicles keep a
//! fixed lane offset y; UAVs loiter at fixed altitude over y = 0.

use alloc::vec::Vec;

use rand::Rng;

use crate::config::GeometryConfig;
use crate::error::SimError;
use crate::util::wrap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleKinematics {
    pub x: f64,
    pub y: f64,
    /// Signed speed in m/s; positive is rightward.
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavKinematics {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub vehicles: Vec<VehicleKinematics>,
    pub uavs: Vec<UavKinematics>,
    pub geometry: GeometryConfig,
}

impl WorldState {
    /// Draws initial positions and speeds from the mobility stream.
    pub fn build<R: Rng>(
        geometry: GeometryConfig,
        n_vehicles: usize,
        n_uavs: usize,
        rng: &mut R,
    ) -> Self {
        let l = geometry.street_length;
        let [v_lo, v_hi] = geometry.vehicle_speed_range;
        let vehicles = (0..n_vehicles)
            .map(|_| {
                let speed_mag = rng.gen_range(v_lo..=v_hi);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                VehicleKinematics {
                    x: rng.gen_range(0.0..l),
                    y: rng.gen_range(-geometry.lane_half_width..=geometry.lane_half_width),
                    speed: sign * speed_mag,
                }
            })
            .collect();
        let uavs = (0..n_uavs)
            .map(|_| UavKinematics {
                x: rng.gen_range(0.0..l),
                y: 0.0,
                speed: geometry.uav_speed,
            })
            .collect();
        Self { vehicles, uavs, geometry }
    }

    /// Advances every x-coordinate by speed * slot, modulo street length.
    pub fn advance(&mut self) {
        let l = self.geometry.street_length;
        let tau = self.geometry.slot_seconds;
        for v in &mut self.vehicles {
            v.x = wrap(v.x + v.speed * tau, l);
        }
        for u in &mut self.uavs {
            u.x = wrap(u.x + u.speed * tau, l);
        }
    }

    /// 3-D distance between vehicle i and the BS position.
    pub fn bs_distance(&self, vehicle: usize) -> f64 {
        let v = &self.vehicles[vehicle];
        let [bx, by, bz] = self.geometry.bs_position;
        let dx = v.x - bx;
        let dy = v.y - by;
        libm::sqrt(dx * dx + dy * dy + bz * bz)
    }
}

/// Slant distance between a vehicle and a UAV at altitude H.
///
/// With `at_next_slot` set, both x positions are advanced by one slot
/// before measuring; y positions stay put.
pub fn slant_distance(
    vehicle: &VehicleKinematics,
    uav: &UavKinematics,
    geometry: &GeometryConfig,
    at_next_slot: bool,
) -> f64 {
    let tau = if at_next_slot { geometry.slot_seconds } else { 0.0 };
    let dx = (vehicle.x + vehicle.speed * tau) - (uav.x + uav.speed * tau);
    let dy = vehicle.y - uav.y;
    let h = geometry.uav_height;
    libm::sqrt(dx * dx + dy * dy + h * h)
}

/// Offloading feasibility: next-slot slant distance within sqrt(R^2 + H^2).
pub fn in_coverage(
    vehicle: &VehicleKinematics,
    uav: &UavKinematics,
    geometry: &GeometryConfig,
) -> bool {
    let bound = libm::sqrt(
        geometry.coverage_radius * geometry.coverage_radius
            + geometry.uav_height * geometry.uav_height,
    );
    slant_distance(vehicle, uav, geometry, true) <= bound
}

/// Elevation angle in degrees, (180/pi) * asin(H / d).
pub fn elevation_angle(height: f64, distance: f64) -> Result<f64, SimError> {
    if distance < height {
        return Err(SimError::Domain("slant distance below UAV altitude"));
    }
    Ok(180.0 / core::f64::consts::PI * libm::asin(height / distance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom() -> GeometryConfig {
        GeometryConfig::default()
    }

    fn veh(x: f64, y: f64, speed: f64) -> VehicleKinematics {
        VehicleKinematics { x, y, speed }
    }

    fn uav(x: f64, y: f64, speed: f64) -> UavKinematics {
        UavKinematics { x, y, speed }
    }

    fn world_with(vehicles: Vec<VehicleKinematics>) -> WorldState {
        WorldState { vehicles, uavs: Vec::new(), geometry: geom() }
    }

    #[test]
    fn advance_moves_by_speed_times_slot() {
        let mut w = world_with(vec![veh(100.0, 0.0, 15.0)]);
        w.advance();
        assert!((w.vehicles[0].x - 101.5).abs() < 1e-12);
    }

    #[test]
    fn advance_wraps_around() {
        let mut w = world_with(vec![veh(499.5, 0.0, 10.0)]);
        w.advance();
        assert!((w.vehicles[0].x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn advance_zero_speed_is_identity() {
        let mut w = world_with(vec![veh(42.0, 3.0, 0.0)]);
        w.advance();
        assert_eq!(w.vehicles[0].x, 42.0);
        assert_eq!(w.vehicles[0].y, 3.0);
    }

    #[test]
    fn slant_distance_overhead_is_height() {
        let d = slant_distance(&veh(10.0, 5.0, 0.0), &uav(10.0, 5.0, 0.0), &geom(), false);
        assert!((d - 40.0).abs() < 1e-12);
    }

    #[test]
    fn slant_distance_345_triangle() {
        let mut g = geom();
        g.uav_height = 0.0;
        let d = slant_distance(&veh(0.0, 0.0, 0.0), &uav(30.0, 40.0, 0.0), &g, false);
        assert!((d - 50.0).abs() < 1e-12);
    }

    #[test]
    fn slant_distance_next_slot() {
        // vehicle x=0 v=15, UAV x=10 v=10, dy=0, tau=0.1, H=40
        let d = slant_distance(&veh(0.0, 0.0, 15.0), &uav(10.0, 0.0, 10.0), &geom(), true);
        let expected = libm::sqrt((1.5f64 - 11.0).powi(2) + 1600.0);
        assert!((d - expected).abs() < 1e-12);
        assert!((d - 41.11).abs() < 0.01);
    }

    #[test]
    fn coverage_bound_inclusive() {
        // Overhead vehicle: d(t+1) = 40, bound = sqrt(100^2+40^2) = 107.703...
        assert!(in_coverage(&veh(50.0, 0.0, 0.0), &uav(50.0, 0.0, 0.0), &geom()));
        // Place vehicle so next-slot distance slightly exceeds the bound.
        let bound = libm::sqrt(100.0f64 * 100.0 + 40.0 * 40.0);
        let dx_over = libm::sqrt(bound * bound - 1600.0) + 0.01;
        assert!(!in_coverage(&veh(50.0 + dx_over, 0.0, 0.0), &uav(50.0, 0.0, 0.0), &geom()));
        // Exactly at the bound: inclusive.
        let dx_at = libm::sqrt(bound * bound - 1600.0);
        assert!(in_coverage(&veh(50.0 + dx_at, 0.0, 0.0), &uav(50.0, 0.0, 0.0), &geom()));
    }

    #[test]
    fn elevation_angle_known_values() {
        assert!((elevation_angle(40.0, 40.0).unwrap() - 90.0).abs() < 1e-12);
        assert!((elevation_angle(40.0, 80.0).unwrap() - 30.0).abs() < 1e-12);
        assert!((elevation_angle(40.0, 80.5).unwrap() - 29.79).abs() < 0.01);
    }

    #[test]
    fn elevation_angle_below_height_is_error() {
        assert!(elevation_angle(40.0, 39.9).is_err());
    }

    proptest! {
        #[test]
        fn slant_distance_at_least_height(
            vx in 0.0..500.0f64, vy in -10.0..10.0f64,
            ux in 0.0..500.0f64, sv in -20.0..20.0f64, su in -20.0..20.0f64,
        ) {
            let d = slant_distance(&veh(vx, vy, sv), &uav(ux, 0.0, su), &geom(), false);
            prop_assert!(d >= 40.0);
        }

        #[test]
        fn elevation_decreasing_in_distance(d1 in 40.0..500.0f64, extra in 0.1..100.0f64) {
            let a1 = elevation_angle(40.0, d1).unwrap();
            let a2 = elevation_angle(40.0, d1 + extra).unwrap();
            prop_assert!(a2 < a1);
        }

        #[test]
        fn advance_stays_on_street(x in 0.0..500.0f64, v in -60.0..60.0f64) {
            let mut w = world_with(vec![veh(x, 0.0, v)]);
            w.advance();
            prop_assert!(w.vehicles[0].x >= 0.0 && w.vehicles[0].x < 500.0);
        }
    }
}
