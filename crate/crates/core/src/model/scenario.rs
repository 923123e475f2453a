use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Gateway, GatewayId, Position3D, Rect, Scenario, ScenarioConfig, Station, StationId,
    StationKind, User, UserId,
};
use crate::energy::BatteryState;
use crate::error::Result;

/// Lays out users, stations and gateways for `config`.
///
/// Users are drawn uniformly inside their subarea; subarea 3 is the area
/// minus both boxes and is sampled by rejection. Terrestrial stations sit on
/// a grid over subarea 1, relays are uniform in subarea 2, HAPs start evenly
/// spaced along the area's centre row and gateways sit on the outer edge.
/// The result depends only on `config` (including its seed).
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let area = config.area();
    let [n1, n2, n3] = config.subarea_user_counts();

    let mut users = Vec::with_capacity(config.user_count);
    let mut push_user = |x: f64, y: f64| {
        let id = UserId(users.len() as u32);
        users.push(User { id, pos: Position3D::ground(x, y), qos_min_rate: config.qos_min_rate });
    };
    for _ in 0..n1 {
        let (x, y) = sample_in(&mut rng, &config.subarea1);
        push_user(x, y);
    }
    for _ in 0..n2 {
        let (x, y) = sample_in(&mut rng, &config.subarea2);
        push_user(x, y);
    }
    for _ in 0..n3 {
        let (x, y) = loop {
            let (x, y) = sample_in(&mut rng, &area);
            if config.in_subarea3(x, y) {
                break (x, y);
            }
        };
        push_user(x, y);
    }

    let mut stations = Vec::new();
    let mut next_id = 0u32;
    let mut push_station = |kind, pos, peak_power, access_bandwidth, battery| {
        stations.push(Station { id: StationId(next_id), kind, pos, peak_power, access_bandwidth, battery });
        next_id += 1;
    };

    for (x, y) in grid_points(&config.subarea1, config.terrestrial_count) {
        push_station(
            StationKind::Terrestrial,
            Position3D::ground(x, y),
            config.terrestrial_peak_power,
            config.terrestrial_bandwidth,
            None,
        );
    }
    for _ in 0..config.relay_count {
        let (x, y) = sample_in(&mut rng, &config.subarea2);
        let battery = BatteryState::new(
            config.energy.capacity_j,
            config.energy.capacity_j * config.energy.initial_fraction,
        );
        push_station(
            StationKind::Relay,
            Position3D::ground(x, y),
            config.relay_peak_power,
            config.relay_bandwidth,
            Some(battery),
        );
    }
    let row_y = config.area_side / 2.0;
    for i in 0..config.hap_count {
        let x = config.area_side * (i as f64 + 0.5) / config.hap_count as f64;
        push_station(
            StationKind::Hap,
            Position3D::new(x, row_y, config.hap_altitude),
            config.hap_peak_power,
            config.hap_bandwidth,
            None,
        );
    }
    let (cx, cy) = area.center();
    push_station(
        StationKind::Satellite,
        Position3D::new(cx, cy, config.satellite_altitude),
        config.satellite_peak_power,
        0.0,
        None,
    );

    let gateways = edge_points(config.area_side, config.gateway_count)
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| Gateway { id: GatewayId(i as u32), pos: Position3D::ground(x, y) })
        .collect();

    Ok(Scenario { users, stations, gateways, config: config.clone() })
}

fn sample_in(rng: &mut ChaCha8Rng, rect: &Rect) -> (f64, f64) {
    let x = rect.x_min + rng.random::<f64>() * rect.width();
    let y = rect.y_min + rng.random::<f64>() * rect.height();
    (x, y)
}

/// Cell centres of a near-square grid with `n` points covering `rect`.
fn grid_points(rect: &Rect, n: usize) -> Vec<(f64, f64)> {
    if n == 0 {
        return Vec::new();
    }
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    (0..n)
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            let x = rect.x_min + rect.width() * (c as f64 + 0.5) / cols as f64;
            let y = rect.y_min + rect.height() * (r as f64 + 0.5) / rows as f64;
            (x, y)
        })
        .collect()
}

/// Gateways alternate between the west and east edges, evenly spread in y.
fn edge_points(side: f64, n: usize) -> Vec<(f64, f64)> {
    let west = n.div_ceil(2);
    let east = n / 2;
    (0..n)
        .map(|i| {
            let (x, k, m) = if i % 2 == 0 { (0.0, i / 2, west) } else { (side, i / 2, east) };
            (x, side * (k as f64 + 1.0) / (m as f64 + 1.0))
        })
        .collect()
}
