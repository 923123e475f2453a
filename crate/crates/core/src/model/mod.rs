//! Domain types for the integrated satellite / HAP / terrestrial downlink.
//!
//! Distances are in kilometres, powers in watts, bandwidths in hertz and
//! rates in bit/s throughout the crate.

mod scenario;
mod utility;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::{BatteryState, EnergyConfig};
use crate::error::{Error, Result};

pub use scenario::generate_scenario;
pub use utility::utility;
pub use validate::{validate_scenario, Violation};

/// Admissible HAP altitude band, km.
pub const HAP_ALTITUDE_RANGE: (f64, f64) = (17.0, 20.0);

/// A point above the ground plane. `z` is the altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn ground(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Euclidean distance in km.
    pub fn distance(&self, other: &Position3D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Position3D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn with_z(self, z: f64) -> Self {
        Self { z, ..self }
    }
}

/// Axis-aligned rectangle on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    fn is_well_formed(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }
}

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(UserId, "user ");
id_type!(StationId, "station ");
id_type!(GatewayId, "gateway ");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub pos: Position3D,
    /// Minimum rate the user must receive to count as served, bit/s.
    pub qos_min_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StationKind {
    Terrestrial,
    Relay,
    Hap,
    Satellite,
}

impl StationKind {
    /// Whether the station may serve ground users directly.
    pub fn serves_access(self) -> bool {
        !matches!(self, StationKind::Satellite)
    }
}

impl fmt::Display for StationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StationKind::Terrestrial => "terrestrial",
            StationKind::Relay => "relay",
            StationKind::Hap => "hap",
            StationKind::Satellite => "satellite",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: StationId,
    pub kind: StationKind,
    pub pos: Position3D,
    /// Peak transmit power, W. For the satellite this is its backhaul transmitter.
    pub peak_power: f64,
    /// Access bandwidth shared by the station's users, Hz.
    pub access_bandwidth: f64,
    /// Battery state; present for relays only.
    pub battery: Option<BatteryState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gateway {
    pub id: GatewayId,
    pub pos: Position3D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UtilityMetric {
    SumRate,
    MinRate,
    ProportionalFair,
}

impl UtilityMetric {
    pub fn name(self) -> &'static str {
        match self {
            UtilityMetric::SumRate => "sum",
            UtilityMetric::MinRate => "min",
            UtilityMetric::ProportionalFair => "pf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sum" | "sumrate" | "sum_rate" => Ok(UtilityMetric::SumRate),
            "min" | "minrate" | "min_rate" => Ok(UtilityMetric::MinRate),
            "pf" | "proportionalfair" | "proportional_fair" => {
                Ok(UtilityMetric::ProportionalFair)
            }
            other => Err(Error::InvalidConfig(format!("unknown utility metric {other:?}"))),
        }
    }
}

/// Everything needed to lay out a scenario. All fields are overridable from
/// the `scenario.*` and `energy.*` config sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub area_side: f64,
    /// Terrestrial coverage box.
    pub subarea1: Rect,
    /// Relay box, no terrestrial stations.
    pub subarea2: Rect,
    pub user_count: usize,
    /// Fractions of users in subareas 1, 2 and 3.
    pub user_split: [f64; 3],
    pub terrestrial_count: usize,
    pub relay_count: usize,
    pub hap_count: usize,
    pub gateway_count: usize,
    pub hap_altitude: f64,
    pub hap_peak_power: f64,
    pub hap_bandwidth: f64,
    pub terrestrial_peak_power: f64,
    pub terrestrial_bandwidth: f64,
    pub relay_peak_power: f64,
    pub relay_bandwidth: f64,
    pub satellite_altitude: f64,
    pub satellite_peak_power: f64,
    /// Backhaul bandwidth B0, Hz.
    pub backhaul_bandwidth: f64,
    pub qos_min_rate: f64,
    /// Smallest bandwidth slice a station hands to one user, Hz. Bounds the
    /// number of users a station can admit.
    pub min_user_bandwidth: f64,
    pub metric: UtilityMetric,
    pub seed: u64,
    pub time_slots: u32,
    pub energy: EnergyConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_side: 180.0,
            subarea1: Rect::new(75.0, 105.0, 0.0, 30.0),
            subarea2: Rect::new(75.0, 105.0, 150.0, 180.0),
            user_count: 400,
            user_split: [0.4, 0.3, 0.3],
            terrestrial_count: 9,
            relay_count: 3,
            hap_count: 4,
            gateway_count: 2,
            hap_altitude: 18.0,
            hap_peak_power: 20.0,
            hap_bandwidth: 20e6,
            terrestrial_peak_power: 20.0,
            terrestrial_bandwidth: 10e6,
            relay_peak_power: 4.0,
            relay_bandwidth: 10e6,
            satellite_altitude: 35_786.0,
            satellite_peak_power: 100.0,
            backhaul_bandwidth: 20e6,
            qos_min_rate: 100e3,
            min_user_bandwidth: 180e3,
            metric: UtilityMetric::SumRate,
            seed: 1,
            time_slots: 24,
            energy: EnergyConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Checks the config invariants, returning the first violation.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.area_side.is_finite() && self.area_side > 0.0) {
            return bad(format!("area_side must be positive, got {}", self.area_side));
        }
        let split_sum: f64 = self.user_split.iter().sum();
        if self.user_split.iter().any(|f| !(0.0..=1.0).contains(f))
            || (split_sum - 1.0).abs() > 1e-9
        {
            return bad(format!("user_split must be fractions summing to 1, got {:?}", self.user_split));
        }
        let area = Rect::new(0.0, self.area_side, 0.0, self.area_side);
        for (name, rect) in [("subarea1", &self.subarea1), ("subarea2", &self.subarea2)] {
            let inside = rect.is_well_formed()
                && area.contains(rect.x_min, rect.y_min)
                && area.contains(rect.x_max, rect.y_max);
            if !inside {
                return bad(format!("{name} box {rect:?} is not inside the area"));
            }
        }
        let (lo, hi) = HAP_ALTITUDE_RANGE;
        if !(lo..=hi).contains(&self.hap_altitude) {
            return bad(format!("hap_altitude {} out of [17,20]", self.hap_altitude));
        }
        if self.time_slots < 1 {
            return bad("time_slots must be at least 1".into());
        }
        if self.terrestrial_count > 0 && self.user_split[0] > 0.0 && self.subarea1.width() <= 0.0 {
            return bad("subarea1 is empty".into());
        }
        let positive = [
            ("hap_peak_power", self.hap_peak_power),
            ("terrestrial_peak_power", self.terrestrial_peak_power),
            ("relay_peak_power", self.relay_peak_power),
            ("satellite_peak_power", self.satellite_peak_power),
            ("satellite_altitude", self.satellite_altitude),
            ("min_user_bandwidth", self.min_user_bandwidth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("hap_bandwidth", self.hap_bandwidth),
            ("terrestrial_bandwidth", self.terrestrial_bandwidth),
            ("relay_bandwidth", self.relay_bandwidth),
            ("backhaul_bandwidth", self.backhaul_bandwidth),
            ("qos_min_rate", self.qos_min_rate),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        self.energy.check()
    }

    pub fn area(&self) -> Rect {
        Rect::new(0.0, self.area_side, 0.0, self.area_side)
    }

    /// Users per subarea under the round-half-up rule, remainder to subarea 3.
    pub fn subarea_user_counts(&self) -> [usize; 3] {
        let u = self.user_count;
        let round = |f: f64| (f * u as f64 + 0.5).floor() as usize;
        let n1 = round(self.user_split[0]).min(u);
        let n2 = round(self.user_split[1]).min(u - n1);
        [n1, n2, u - n1 - n2]
    }

    /// Whether a ground point lies in subarea 3 (the area minus both boxes).
    pub fn in_subarea3(&self, x: f64, y: f64) -> bool {
        self.area().contains(x, y) && !self.subarea1.contains(x, y) && !self.subarea2.contains(x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub users: Vec<User>,
    pub stations: Vec<Station>,
    pub gateways: Vec<Gateway>,
    pub config: ScenarioConfig,
}

impl Scenario {
    pub fn station(&self, id: StationId) -> Option<&Station> {
        self.stations.iter().find(|s| s.id == id)
    }

    pub fn gateway(&self, id: GatewayId) -> Option<&Gateway> {
        self.gateways.iter().find(|g| g.id == id)
    }

    pub fn user(&self, id: UserId) -> Option<&User> {
        self.users.iter().find(|u| u.id == id)
    }

    pub fn stations_of(&self, kind: StationKind) -> impl Iterator<Item = &Station> {
        self.stations.iter().filter(move |s| s.kind == kind)
    }

    pub fn haps(&self) -> impl Iterator<Item = &Station> {
        self.stations_of(StationKind::Hap)
    }

    pub fn satellite(&self) -> Option<&Station> {
        self.stations_of(StationKind::Satellite).next()
    }

    /// Current HAP positions in station order.
    pub fn hap_positions(&self) -> Vec<Position3D> {
        self.haps().map(|h| h.pos).collect()
    }

    /// Copy of the scenario with HAPs moved to `positions` (station order).
    pub fn with_hap_positions(&self, positions: &[Position3D]) -> Scenario {
        let mut out = self.clone();
        for (station, pos) in out.stations.iter_mut().filter(|s| s.kind == StationKind::Hap).zip(positions) {
            station.pos = *pos;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_counts_follow_rounding_rule() {
        let mut cfg = ScenarioConfig { user_count: 10, ..Default::default() };
        assert_eq!(cfg.subarea_user_counts(), [4, 3, 3]);
        cfg.user_count = 0;
        assert_eq!(cfg.subarea_user_counts(), [0, 0, 0]);
        cfg.user_count = 5;
        cfg.user_split = [0.5, 0.5, 0.0];
        // 2.5 rounds up to 3, leaving 2 for subarea 2
        assert_eq!(cfg.subarea_user_counts(), [3, 2, 0]);
    }

    #[test]
    fn config_rejects_bad_split_and_altitude() {
        let cfg = ScenarioConfig { user_split: [0.5, 0.3, 0.3], ..Default::default() };
        assert!(matches!(cfg.check(), Err(Error::InvalidConfig(_))));
        let cfg = ScenarioConfig { hap_altitude: 25.0, ..Default::default() };
        assert!(cfg.check().unwrap_err().to_string().contains("hap_altitude"));
        let cfg = ScenarioConfig { subarea1: Rect::new(170.0, 200.0, 0.0, 30.0), ..Default::default() };
        assert!(cfg.check().is_err());
        assert!(ScenarioConfig::default().check().is_ok());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in [UtilityMetric::SumRate, UtilityMetric::MinRate, UtilityMetric::ProportionalFair] {
            assert_eq!(UtilityMetric::parse(m.name()).unwrap(), m);
        }
        assert!(UtilityMetric::parse("median").is_err());
    }
}
