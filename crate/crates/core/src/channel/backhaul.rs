use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{fso_rate, rf_pathloss_db, rf_rate, ChannelParams, LinkClass};
use crate::assoc::{BackhaulAssignment, BackhaulParent, Uplink};
use crate::error::{Error, Result};
use crate::model::{GatewayId, Position3D, Scenario, StationId, StationKind};

/// Endpoint of a backhaul hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    Station(StationId),
    Gateway(GatewayId),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Station(id) => id.fmt(f),
            Node::Gateway(id) => id.fmt(f),
        }
    }
}

impl From<BackhaulParent> for Node {
    fn from(p: BackhaulParent) -> Self {
        match p {
            BackhaulParent::Gateway(g) => Node::Gateway(g),
            BackhaulParent::Satellite(s) => Node::Station(s),
        }
    }
}

impl From<Uplink> for Node {
    fn from(u: Uplink) -> Self {
        match u {
            Uplink::Hap(s) => Node::Station(s),
            Uplink::Gateway(g) => Node::Gateway(g),
        }
    }
}

/// One downlink backhaul hop, parent to child.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub from: Node,
    pub to: Node,
    pub class: LinkClass,
    pub distance_km: f64,
    /// Number of children sharing the parent's backhaul resources.
    pub share: usize,
    pub misalignment: f64,
    pub rf_rate: f64,
    pub fso_rate: f64,
    /// max(rf, fso) after sharing.
    pub rate: f64,
}

/// Rate of one hybrid hop whose parent splits its backhaul bandwidth (RF and
/// optical) equally over `share` children. Returns `(rf, fso, max)`.
#[allow(clippy::too_many_arguments)]
pub fn hop_rate(
    class: LinkClass,
    tx: &Position3D,
    rx: &Position3D,
    tx_power: f64,
    share: usize,
    backhaul_bandwidth: f64,
    misalignment: f64,
    params: &ChannelParams,
) -> Result<(f64, f64, f64)> {
    let k = share.max(1) as f64;
    let pl = rf_pathloss_db(class, tx, rx, &params.rf)? - params.rf.backhaul_antenna_gain_db;
    let rf = rf_rate(backhaul_bandwidth / k, tx_power, pl, &params.rf)?;
    let fso = if params.fso_enabled { fso_rate(tx, rx, misalignment, &params.fso)? / k } else { 0.0 };
    Ok((rf, fso, rf.max(fso)))
}

/// All hops implied by a backhaul assignment, with per-station chain rates.
#[derive(Debug, Clone, PartialEq)]
pub struct BackhaulNetwork {
    hops: BTreeMap<StationId, Hop>,
    kinds: BTreeMap<StationId, StationKind>,
}

impl BackhaulNetwork {
    /// Evaluates every assigned hop. `misalignment` gives the pointing error
    /// of an FSO hop; pass `|_, _| 0.0` for ideal alignment.
    pub fn build(
        scenario: &Scenario,
        backhaul: &BackhaulAssignment,
        params: &ChannelParams,
        misalignment: impl Fn(Node, Node) -> f64,
    ) -> Result<Self> {
        let mut children: BTreeMap<Node, usize> = BTreeMap::new();
        for p in backhaul.hap_parent.values() {
            *children.entry(Node::from(*p)).or_default() += 1;
        }
        for u in backhaul.ground_uplink.values() {
            *children.entry(Node::from(*u)).or_default() += 1;
        }
        let b0 = scenario.config.backhaul_bandwidth;

        let position = |node: Node| -> Result<(Position3D, StationKind)> {
            match node {
                Node::Station(id) => scenario
                    .station(id)
                    .map(|s| (s.pos, s.kind))
                    .ok_or_else(|| Error::domain(format!("unknown {id}"))),
                Node::Gateway(id) => scenario
                    .gateway(id)
                    .map(|g| (g.pos, StationKind::Terrestrial))
                    .ok_or_else(|| Error::domain(format!("unknown {id}"))),
            }
        };

        let mut hops = BTreeMap::new();
        let mut kinds = BTreeMap::new();
        let links = backhaul
            .hap_parent
            .iter()
            .map(|(h, p)| (*h, Node::from(*p)))
            .chain(backhaul.ground_uplink.iter().map(|(s, u)| (*s, Node::from(*u))));
        for (child, parent) in links {
            let (rx, child_kind) = position(Node::Station(child))?;
            let (tx, parent_kind) = position(parent)?;
            let (class, tx_power) = match (parent, child_kind) {
                (Node::Gateway(_), StationKind::Hap) => (LinkClass::GatewayToHap, params.gateway_tx_power),
                (Node::Gateway(_), _) => (LinkClass::GatewayToGround, params.gateway_tx_power),
                (Node::Station(sat), StationKind::Hap) if parent_kind == StationKind::Satellite => {
                    let power = scenario.station(sat).map(|s| s.peak_power).unwrap_or(0.0);
                    (LinkClass::SatelliteToHap, power)
                }
                (Node::Station(_), _) if parent_kind == StationKind::Hap => {
                    (LinkClass::HapToGround, params.hap_backhaul_tx_power)
                }
                _ => {
                    return Err(Error::domain(format!(
                        "{parent} ({parent_kind}) cannot feed {child_kind} {child}"
                    )))
                }
            };
            let share = children[&parent];
            let mis = misalignment(parent, Node::Station(child));
            let (rf, fso, rate) = hop_rate(class, &tx, &rx, tx_power, share, b0, mis, params)?;
            hops.insert(
                child,
                Hop {
                    from: parent,
                    to: Node::Station(child),
                    class,
                    distance_km: tx.distance(&rx),
                    share,
                    misalignment: mis,
                    rf_rate: rf,
                    fso_rate: fso,
                    rate,
                },
            );
            kinds.insert(child, child_kind);
        }
        Ok(Self { hops, kinds })
    }

    pub fn hops(&self) -> impl Iterator<Item = &Hop> {
        self.hops.values()
    }

    /// Hop feeding `station`, if assigned.
    pub fn hop(&self, station: StationId) -> Option<&Hop> {
        self.hops.get(&station)
    }

    /// Minimum hop rate from `station` up to a gateway or the satellite.
    pub fn chain_rate(&self, station: StationId) -> Result<f64> {
        let hop = self
            .hops
            .get(&station)
            .ok_or_else(|| Error::Unassigned(format!("{station} has no backhaul parent")))?;
        match (self.kinds[&station], hop.from) {
            (StationKind::Hap, _) | (_, Node::Gateway(_)) => Ok(hop.rate),
            (_, Node::Station(hap)) => {
                let upstream = self
                    .hops
                    .get(&hap)
                    .ok_or_else(|| Error::Unassigned(format!("{hap} has no backhaul parent")))?;
                Ok(hop.rate.min(upstream.rate))
            }
        }
    }
}

/// Chain rate of one station under ideal FSO alignment.
pub fn backhaul_chain_rate(
    station: StationId,
    backhaul: &BackhaulAssignment,
    scenario: &Scenario,
    params: &ChannelParams,
) -> Result<f64> {
    let st = scenario.station(station).ok_or_else(|| Error::domain(format!("unknown {station}")))?;
    if st.kind == StationKind::Satellite {
        return Err(Error::domain("the satellite has no backhaul chain"));
    }
    BackhaulNetwork::build(scenario, backhaul, params, |_, _| 0.0)?.chain_rate(station)
}
