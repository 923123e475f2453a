//! Access association (users to stations) and backhaul association (HAPs to
//! gateways or the satellite, ground stations to HAPs or gateways).

mod access;
mod backhaul;
mod network;
mod random;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{backhaul_chain_rate, rf_pathloss_db, rf_rate, ChannelParams, LinkClass};
use crate::error::{Error, Result};
use crate::model::{GatewayId, Scenario, StationId, StationKind, UserId};

pub use access::access_associate_greedy;
pub(crate) use access::{greedy_indices, polished_indices};
pub use backhaul::backhaul_associate;
pub use backhaul::random_backhaul;
pub use network::{proportional_share, AccessNetwork, Allocation, ServingStation};
pub use random::random_associate;

/// User to serving station. Users without an entry are unserved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessAssignment {
    pub map: BTreeMap<UserId, StationId>,
}

impl AccessAssignment {
    pub fn station_of(&self, user: UserId) -> Option<StationId> {
        self.map.get(&user).copied()
    }

    pub fn users_of(&self, station: StationId) -> impl Iterator<Item = UserId> + '_ {
        self.map.iter().filter(move |(_, s)| **s == station).map(|(u, _)| *u)
    }

    pub fn served(&self) -> usize {
        self.map.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BackhaulParent {
    Gateway(GatewayId),
    Satellite(StationId),
}

/// Where a terrestrial station or relay takes its backhaul from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Uplink {
    Hap(StationId),
    Gateway(GatewayId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackhaulAssignment {
    pub hap_parent: BTreeMap<StationId, BackhaulParent>,
    pub ground_uplink: BTreeMap<StationId, Uplink>,
}

impl BackhaulAssignment {
    /// HAPs attached to each parent.
    pub fn parent_loads(&self) -> BTreeMap<BackhaulParent, usize> {
        let mut loads = BTreeMap::new();
        for p in self.hap_parent.values() {
            *loads.entry(*p).or_default() += 1;
        }
        loads
    }

    /// Every HAP has a parent, no parent exceeds `n_max`, and every ground
    /// station's uplink HAP is itself attached (which rules out cycles).
    pub fn check(&self, scenario: &Scenario, n_max: usize) -> Result<()> {
        for hap in scenario.haps() {
            if !self.hap_parent.contains_key(&hap.id) {
                return Err(Error::Unassigned(format!("{} has no backhaul parent", hap.id)));
            }
        }
        for (parent, load) in self.parent_loads() {
            if load > n_max {
                return Err(Error::Infeasible(format!("{parent:?} carries {load} HAPs, cap is {n_max}")));
            }
        }
        for (station, up) in &self.ground_uplink {
            if let Uplink::Hap(h) = up {
                if !self.hap_parent.contains_key(h) {
                    return Err(Error::Unassigned(format!("{h} (uplink of {station}) has no backhaul parent")));
                }
            }
        }
        Ok(())
    }
}

/// Per-user transmit power and bandwidth, keyed by (station, user).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResourceMap {
    pub powers: BTreeMap<(StationId, UserId), f64>,
    pub bandwidths: BTreeMap<(StationId, UserId), f64>,
}

pub(crate) fn access_class(kind: StationKind) -> Result<LinkClass> {
    match kind {
        StationKind::Terrestrial => Ok(LinkClass::TerrestrialAccess),
        StationKind::Relay => Ok(LinkClass::RelayAccess),
        StationKind::Hap => Ok(LinkClass::HapAccess),
        StationKind::Satellite => Err(Error::domain("the satellite does not serve users directly")),
    }
}

/// Rate `user` actually receives from `station`: the smaller of its access
/// rate and its share of the station's backhaul chain. The chain is split in
/// proportion to the access rates of everyone the station serves.
///
/// Evaluated from the link-budget primitives, independent of the solver's
/// cached tables.
pub fn effective_user_rate(
    user: UserId,
    station: StationId,
    resources: &ResourceMap,
    backhaul: &BackhaulAssignment,
    scenario: &Scenario,
    params: &ChannelParams,
) -> Result<f64> {
    let st = scenario.station(station).ok_or_else(|| Error::domain(format!("unknown {station}")))?;
    let class = access_class(st.kind)?;
    let access_rate = |u: UserId| -> Result<f64> {
        let pos = scenario.user(u).ok_or_else(|| Error::domain(format!("unknown {u}")))?.pos;
        let p = resources.powers.get(&(station, u)).copied().unwrap_or(0.0);
        let b = resources.bandwidths.get(&(station, u)).copied().unwrap_or(0.0);
        let pl = rf_pathloss_db(class, &st.pos, &pos, &params.rf)?;
        rf_rate(b, p, pl, &params.rf)
    };
    if !resources.bandwidths.contains_key(&(station, user)) {
        return Err(Error::domain(format!("{user} is not served by {station}")));
    }
    let own = access_rate(user)?;
    let mut demand = 0.0;
    for (s, u) in resources.bandwidths.keys() {
        if *s == station {
            demand += access_rate(*u)?;
        }
    }
    let chain = backhaul_chain_rate(station, backhaul, scenario, params)?;
    Ok(own.min(proportional_share(own, demand, chain)))
}
