use rand::Rng;

use super::network::{AccessNetwork, Allocation};

/// Random access association: in user order, each user joins a uniformly
/// chosen in-range station that still has room. Users that end up below
/// their QoS target under equal sharing are then dropped.
///
/// Dropping a user only raises the rates of those left on its station, so a
/// single pass leaves every remaining user at or above target.
pub fn random_associate(net: &AccessNetwork, rng: &mut impl Rng) -> Vec<Option<usize>> {
    let stations = net.stations();
    let mut count = vec![0usize; stations.len()];
    let mut station = vec![None; net.users().len()];
    for (u, slot) in station.iter_mut().enumerate() {
        let open: Vec<usize> =
            (0..stations.len()).filter(|&s| net.in_range(s, u) && count[s] < stations[s].max_users).collect();
        if open.is_empty() {
            continue;
        }
        let s = open[rng.random_range(0..open.len())];
        count[s] += 1;
        *slot = Some(s);
    }
    let rates = Allocation::uniform(net, station.clone()).rates(net);
    for (u, r) in rates.iter().enumerate() {
        if let Some(r) = r {
            if *r < net.users()[u].qos_min_rate * (1.0 - 1e-12) {
                station[u] = None;
            }
        }
    }
    station
}
