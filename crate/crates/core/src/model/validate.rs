use std::collections::HashSet;
use std::fmt;

use super::{Scenario, StationKind, HAP_ALTITUDE_RANGE};

/// One broken invariant, tagged with the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

/// Collects every invariant violation in `s`. An empty list means valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |entity: String, message: String| out.push(Violation { entity, message });
    let cfg = &s.config;

    if let Err(e) = cfg.check() {
        flag("config".into(), e.to_string());
    }

    let area = cfg.area();
    let mut seen = HashSet::new();
    for u in &s.users {
        if !seen.insert(u.id) {
            flag(u.id.to_string(), format!("duplicate user id {}", u.id.0));
        }
        if !u.pos.is_finite() || u.pos.z != 0.0 {
            flag(u.id.to_string(), "user must be on the ground with finite coordinates".into());
        }
        if !area.contains(u.pos.x, u.pos.y) {
            flag(u.id.to_string(), "user outside the area".into());
        }
        if u.qos_min_rate.is_nan() || u.qos_min_rate < 0.0 {
            flag(u.id.to_string(), "negative qos_min_rate".into());
        }
    }
    if s.users.len() != cfg.user_count {
        flag("scenario".into(), format!("{} users, config says {}", s.users.len(), cfg.user_count));
    } else if seen.len() == s.users.len() {
        let mut counts = [0usize; 3];
        for u in &s.users {
            let (x, y) = (u.pos.x, u.pos.y);
            let k = if cfg.subarea1.contains(x, y) {
                0
            } else if cfg.subarea2.contains(x, y) {
                1
            } else {
                2
            };
            counts[k] += 1;
        }
        if counts != cfg.subarea_user_counts() {
            flag(
                "scenario".into(),
                format!("subarea user counts {counts:?} differ from {:?}", cfg.subarea_user_counts()),
            );
        }
    }

    let mut seen = HashSet::new();
    let mut per_kind = [0usize; 4];
    for st in &s.stations {
        let name = st.id.to_string();
        if !seen.insert(st.id) {
            flag(name.clone(), format!("duplicate station id {}", st.id.0));
        }
        if !st.pos.is_finite() || st.pos.z < 0.0 {
            flag(name.clone(), "non-finite position or negative altitude".into());
        }
        if !(st.peak_power > 0.0 && st.peak_power.is_finite()) {
            flag(name.clone(), format!("peak_power must be positive, got {}", st.peak_power));
        }
        if st.access_bandwidth.is_nan() || st.access_bandwidth < 0.0 {
            flag(name.clone(), "negative access_bandwidth".into());
        }
        let (kind_idx, altitude_ok, msg) = match st.kind {
            StationKind::Terrestrial => (0, st.pos.z == 0.0, "terrestrial station must be at z = 0"),
            StationKind::Relay => (1, st.pos.z == 0.0, "relay must be at z = 0"),
            StationKind::Hap => (
                2,
                (HAP_ALTITUDE_RANGE.0..=HAP_ALTITUDE_RANGE.1).contains(&st.pos.z),
                "hap_altitude out of [17,20]",
            ),
            StationKind::Satellite => {
                (3, st.pos.z == cfg.satellite_altitude, "satellite not at the configured orbital altitude")
            }
        };
        per_kind[kind_idx] += 1;
        if !altitude_ok {
            flag(name.clone(), msg.into());
        }
        match (&st.battery, st.kind) {
            (Some(b), StationKind::Relay) => {
                if !(b.stored >= 0.0 && b.stored <= b.capacity) {
                    flag(name.clone(), format!("battery {} J outside [0, {}]", b.stored, b.capacity));
                }
            }
            (None, StationKind::Relay) => flag(name.clone(), "relay without battery".into()),
            (Some(_), _) => flag(name.clone(), format!("{} station must not carry a battery", st.kind)),
            (None, _) => {}
        }
    }
    let expected = [cfg.terrestrial_count, cfg.relay_count, cfg.hap_count, 1];
    for ((kind, have), want) in ["terrestrial", "relay", "hap", "satellite"].iter().zip(per_kind).zip(expected) {
        if have != want {
            flag("scenario".into(), format!("{have} {kind} stations, expected {want}"));
        }
    }

    let mut seen = HashSet::new();
    for g in &s.gateways {
        if !seen.insert(g.id) {
            flag(g.id.to_string(), format!("duplicate gateway id {}", g.id.0));
        }
        if !g.pos.is_finite() || g.pos.z != 0.0 {
            flag(g.id.to_string(), "gateway must be on the ground".into());
        }
    }
    if s.gateways.len() != cfg.gateway_count {
        flag("scenario".into(), format!("{} gateways, expected {}", s.gateways.len(), cfg.gateway_count));
    }
    out
}
