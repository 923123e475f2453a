use std::collections::BTreeMap;

use rand::Rng;

use super::{BackhaulAssignment, BackhaulParent, Uplink};
use crate::channel::{hop_rate, ChannelParams, LinkClass};
use crate::error::{Error, Result};
use crate::model::{Position3D, Scenario, StationId, StationKind};

fn parents(scenario: &Scenario) -> Vec<(BackhaulParent, Position3D, LinkClass, f64)> {
    let mut out: Vec<_> = scenario
        .gateways
        .iter()
        .map(|g| (BackhaulParent::Gateway(g.id), g.pos, LinkClass::GatewayToHap, f64::NAN))
        .collect();
    if let Some(sat) = scenario.satellite() {
        out.push((BackhaulParent::Satellite(sat.id), sat.pos, LinkClass::SatelliteToHap, sat.peak_power));
    }
    out
}

/// Greedy backhaul association for HAPs at `hap_positions` (station order).
///
/// HAPs are served in descending order of their best unshared hop rate. Each
/// takes the parent (gateway or satellite) offering the highest rate once it
/// joins, among parents still below `n_max` HAPs. Terrestrial stations and
/// relays then attach to whichever HAP or gateway gives them the best chain.
pub fn backhaul_associate(
    scenario: &Scenario,
    hap_positions: &[Position3D],
    n_max: usize,
    params: &ChannelParams,
) -> Result<BackhaulAssignment> {
    let haps: Vec<(StationId, Position3D)> = scenario.haps().map(|h| h.id).zip(hap_positions.iter().copied()).collect();
    if haps.len() != scenario.haps().count() {
        return Err(Error::domain(format!(
            "expected {} HAP positions, got {}",
            scenario.haps().count(),
            hap_positions.len()
        )));
    }
    let parents = parents(scenario);
    let b0 = scenario.config.backhaul_bandwidth;
    let rate = |p: &(BackhaulParent, Position3D, LinkClass, f64), hap: &Position3D, share: usize| -> Result<f64> {
        let power = if p.3.is_nan() { params.gateway_tx_power } else { p.3 };
        Ok(hop_rate(p.2, &p.1, hap, power, share, b0, 0.0, params)?.2)
    };

    let mut order = Vec::with_capacity(haps.len());
    for (i, (_, pos)) in haps.iter().enumerate() {
        let mut best = 0.0f64;
        for p in &parents {
            best = best.max(rate(p, pos, 1)?);
        }
        order.push((best, i));
    }
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut out = BackhaulAssignment::default();
    let mut load: BTreeMap<BackhaulParent, usize> = BTreeMap::new();
    let mut hap_rate: BTreeMap<StationId, f64> = BTreeMap::new();
    for (_, i) in order {
        let (id, pos) = haps[i];
        let mut best: Option<(f64, usize)> = None;
        for (k, p) in parents.iter().enumerate() {
            let used = load.get(&p.0).copied().unwrap_or(0);
            if used >= n_max {
                continue;
            }
            let r = rate(p, &pos, used + 1)?;
            if best.is_none_or(|(b, _)| r > b) {
                best = Some((r, k));
            }
        }
        let (r, k) = best.ok_or_else(|| {
            Error::Infeasible(format!("no backhaul parent has room for {id} (cap {n_max} per parent)"))
        })?;
        *load.entry(parents[k].0).or_default() += 1;
        out.hap_parent.insert(id, parents[k].0);
        hap_rate.insert(id, r);
    }

    attach_ground(scenario, &haps, &hap_rate, params, &mut out)?;
    Ok(out)
}

/// Best-chain uplinks for every terrestrial station and relay.
fn attach_ground(
    scenario: &Scenario,
    haps: &[(StationId, Position3D)],
    hap_rate: &BTreeMap<StationId, f64>,
    params: &ChannelParams,
    out: &mut BackhaulAssignment,
) -> Result<()> {
    let b0 = scenario.config.backhaul_bandwidth;
    let mut children: BTreeMap<Uplink, usize> = BTreeMap::new();
    let ground = scenario
        .stations
        .iter()
        .filter(|s| matches!(s.kind, StationKind::Terrestrial | StationKind::Relay));
    for st in ground {
        let mut best: Option<(f64, Uplink)> = None;
        for (hap, pos) in haps {
            let up = Uplink::Hap(*hap);
            let share = children.get(&up).copied().unwrap_or(0) + 1;
            let hop = hop_rate(LinkClass::HapToGround, pos, &st.pos, params.hap_backhaul_tx_power, share, b0, 0.0, params)?.2;
            let chain = hop.min(hap_rate[hap]);
            if best.is_none_or(|(b, _)| chain > b) {
                best = Some((chain, up));
            }
        }
        for g in &scenario.gateways {
            let up = Uplink::Gateway(g.id);
            let share = children.get(&up).copied().unwrap_or(0) + 1;
            let hop = hop_rate(LinkClass::GatewayToGround, &g.pos, &st.pos, params.gateway_tx_power, share, b0, 0.0, params)?.2;
            if best.is_none_or(|(b, _)| hop > b) {
                best = Some((hop, up));
            }
        }
        let (_, up) = best.ok_or_else(|| Error::Infeasible(format!("no uplink available for {}", st.id)))?;
        *children.entry(up).or_default() += 1;
        out.ground_uplink.insert(st.id, up);
    }
    Ok(())
}

/// Uniformly random HAP parents among those with room under `n_max`, in HAP
/// order. Ground uplinks follow the best-chain rule.
pub fn random_backhaul(
    scenario: &Scenario,
    n_max: usize,
    params: &ChannelParams,
    rng: &mut impl Rng,
) -> Result<BackhaulAssignment> {
    let parents = parents(scenario);
    let mut load: BTreeMap<BackhaulParent, usize> = BTreeMap::new();
    let mut out = BackhaulAssignment::default();
    let mut hap_rate = BTreeMap::new();
    let haps: Vec<(StationId, Position3D)> = scenario.haps().map(|h| (h.id, h.pos)).collect();
    let b0 = scenario.config.backhaul_bandwidth;
    for (id, pos) in &haps {
        let open: Vec<usize> =
            (0..parents.len()).filter(|&k| load.get(&parents[k].0).copied().unwrap_or(0) < n_max).collect();
        if open.is_empty() {
            return Err(Error::Infeasible(format!("no backhaul parent has room for {id} (cap {n_max} per parent)")));
        }
        let k = open[rng.random_range(0..open.len())];
        *load.entry(parents[k].0).or_default() += 1;
        out.hap_parent.insert(*id, parents[k].0);
        let power = if parents[k].3.is_nan() { params.gateway_tx_power } else { parents[k].3 };
        hap_rate.insert(*id, hop_rate(parents[k].2, &parents[k].1, pos, power, 1, b0, 0.0, params)?.2);
    }
    attach_ground(scenario, &haps, &hap_rate, params, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BackhaulNetwork;
    use crate::model::{generate_scenario, ScenarioConfig};

    fn scenario() -> Scenario {
        generate_scenario(&ScenarioConfig { user_count: 0, ..Default::default() }).unwrap()
    }

    #[test]
    fn respects_cap_and_covers_everyone() {
        let s = scenario();
        let params = ChannelParams::default();
        for n_max in 2..=4 {
            let bh = backhaul_associate(&s, &s.hap_positions(), n_max, &params).unwrap();
            bh.check(&s, n_max).unwrap();
            assert_eq!(bh.ground_uplink.len(), 12);
            BackhaulNetwork::build(&s, &bh, &params, |_, _| 0.0).unwrap();
        }
    }

    #[test]
    fn too_few_parent_slots_is_infeasible() {
        let cfg = ScenarioConfig { user_count: 0, hap_count: 7, gateway_count: 1, ..Default::default() };
        let s = generate_scenario(&cfg).unwrap();
        let err = backhaul_associate(&s, &s.hap_positions(), 3, &ChannelParams::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn wrong_position_count_is_rejected() {
        let s = scenario();
        assert!(backhaul_associate(&s, &s.hap_positions()[..2], 3, &ChannelParams::default()).is_err());
    }

    #[test]
    fn random_backhaul_is_valid() {
        use rand::SeedableRng;
        let s = scenario();
        let params = ChannelParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let bh = random_backhaul(&s, 3, &params, &mut rng).unwrap();
            bh.check(&s, 3).unwrap();
        }
    }
}
