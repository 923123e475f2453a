use crate::channel::{db_to_linear, pathloss_at, shannon, BackhaulNetwork, ChannelParams};
use crate::energy::sustainable_power;
use crate::error::{Error, Result};
use crate::model::{Position3D, Scenario, Station, StationId, StationKind, User, UserId};

use super::{access_class, AccessAssignment, ResourceMap};

/// Share of a backhaul chain that a user with access rate `own` gets when the
/// station's users together demand `demand`.
pub fn proportional_share(own: f64, demand: f64, chain: f64) -> f64 {
    if demand <= chain {
        own
    } else {
        own * chain / demand
    }
}

/// An access-capable station as the association and power steps see it.
#[derive(Debug, Clone, PartialEq)]
pub struct ServingStation {
    pub id: StationId,
    pub kind: StationKind,
    pub pos: Position3D,
    /// Usable transmit power. For relays this is the level the battery can
    /// sustain over the planning horizon.
    pub power: f64,
    pub bandwidth: f64,
    pub chain_rate: f64,
    pub max_users: usize,
}

/// Channel gains and full-power spectral efficiencies for every
/// (access station, user) pair, plus each station's backhaul chain rate.
///
/// Users and stations are addressed by their index in scenario order.
#[derive(Debug, Clone)]
pub struct AccessNetwork {
    stations: Vec<ServingStation>,
    users: Vec<User>,
    gain: Vec<f64>,
    se: Vec<f64>,
    noise_density: f64,
    snr_floor: f64,
    params: ChannelParams,
}

fn usable_power(station: &Station, scenario: &Scenario) -> f64 {
    match (&station.battery, station.kind) {
        (Some(b), StationKind::Relay) => {
            let cfg = &scenario.config;
            sustainable_power(b, &cfg.energy, cfg.time_slots, station.peak_power)
        }
        _ => station.peak_power,
    }
}

impl AccessNetwork {
    pub fn build(scenario: &Scenario, backhaul: &BackhaulNetwork, params: &ChannelParams) -> Result<Self> {
        let min_b = scenario.config.min_user_bandwidth;
        let mut stations = Vec::new();
        for st in scenario.stations.iter().filter(|s| s.kind.serves_access()) {
            stations.push(ServingStation {
                id: st.id,
                kind: st.kind,
                pos: st.pos,
                power: usable_power(st, scenario),
                bandwidth: st.access_bandwidth,
                chain_rate: backhaul.chain_rate(st.id)?,
                max_users: (st.access_bandwidth / min_b).floor() as usize,
            });
        }
        let n = stations.len() * scenario.users.len();
        let mut net = Self {
            stations,
            users: scenario.users.clone(),
            gain: vec![0.0; n],
            se: vec![0.0; n],
            noise_density: params.rf.noise_density,
            snr_floor: db_to_linear(params.access_snr_floor_db),
            params: *params,
        };
        for s in 0..net.stations.len() {
            net.fill_row(s)?;
        }
        Ok(net)
    }

    /// Re-evaluates HAP rows and all chain rates after HAPs moved or the
    /// backhaul changed. Terrestrial and relay rows are position-invariant.
    pub fn refresh(&mut self, scenario: &Scenario, backhaul: &BackhaulNetwork) -> Result<()> {
        for s in 0..self.stations.len() {
            let id = self.stations[s].id;
            self.stations[s].chain_rate = backhaul.chain_rate(id)?;
            if self.stations[s].kind == StationKind::Hap {
                let pos = scenario.station(id).ok_or_else(|| Error::domain(format!("unknown {id}")))?.pos;
                if pos != self.stations[s].pos {
                    self.stations[s].pos = pos;
                    self.fill_row(s)?;
                }
            }
        }
        Ok(())
    }

    fn fill_row(&mut self, s: usize) -> Result<()> {
        let st = &self.stations[s];
        let class = access_class(st.kind)?;
        let n_users = self.users.len();
        let noise = self.noise_density * st.bandwidth;
        for (u, user) in self.users.iter().enumerate() {
            // clamp so a user standing on a mast still gets a finite budget
            let d_m = (st.pos.distance(&user.pos) * 1000.0).max(1.0);
            let g = db_to_linear(-pathloss_at(class, d_m, &self.params.rf));
            let snr = if noise > 0.0 { st.power * g / noise } else { 0.0 };
            self.gain[s * n_users + u] = g;
            self.se[s * n_users + u] = if snr > 0.0 && snr >= self.snr_floor { snr.log2_1p() } else { 0.0 };
        }
        Ok(())
    }

    pub fn stations(&self) -> &[ServingStation] {
        &self.stations
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn station_index(&self, id: StationId) -> Option<usize> {
        self.stations.iter().position(|s| s.id == id)
    }

    pub fn user_index(&self, id: UserId) -> Option<usize> {
        self.users.binary_search_by_key(&id, |u| u.id).ok().or_else(|| self.users.iter().position(|u| u.id == id))
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    /// Linear channel gain (inverse path loss).
    pub fn gain(&self, s: usize, u: usize) -> f64 {
        self.gain[s * self.users.len() + u]
    }

    /// Spectral efficiency at full power over the full bandwidth; 0 if the
    /// user is out of range.
    pub fn se(&self, s: usize, u: usize) -> f64 {
        self.se[s * self.users.len() + u]
    }

    pub fn in_range(&self, s: usize, u: usize) -> bool {
        self.se(s, u) > 0.0
    }

    /// Noise power over `bandwidth` divided by the channel gain: the power a
    /// user needs for unit SNR.
    pub fn effective_noise(&self, s: usize, u: usize, bandwidth: f64) -> f64 {
        self.noise_density * bandwidth / self.gain(s, u)
    }

    pub fn access_rate(&self, s: usize, u: usize, power: f64, bandwidth: f64) -> f64 {
        if bandwidth <= 0.0 {
            return 0.0;
        }
        shannon(bandwidth, power / self.effective_noise(s, u, bandwidth))
    }

    /// Effective rates of one station's users given their powers and
    /// bandwidths, in the order given.
    pub fn station_rates(&self, s: usize, users: &[usize], power: &[f64], bandwidth: &[f64]) -> Vec<f64> {
        let access: Vec<f64> = users
            .iter()
            .zip(power.iter().zip(bandwidth))
            .map(|(&u, (&p, &b))| self.access_rate(s, u, p, b))
            .collect();
        let demand: f64 = access.iter().sum();
        let chain = self.stations[s].chain_rate;
        access.iter().map(|&a| proportional_share(a, demand, chain)).collect()
    }
}

/// Per-user station, power and bandwidth, indexed like
/// [`AccessNetwork::users`].
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub station: Vec<Option<usize>>,
    pub power: Vec<f64>,
    pub bandwidth: Vec<f64>,
}

impl Allocation {
    /// Equal power and bandwidth split among each station's users.
    pub fn uniform(net: &AccessNetwork, station: Vec<Option<usize>>) -> Self {
        let mut counts = vec![0usize; net.stations().len()];
        for s in station.iter().flatten() {
            counts[*s] += 1;
        }
        let mut power = vec![0.0; station.len()];
        let mut bandwidth = vec![0.0; station.len()];
        for (u, s) in station.iter().enumerate() {
            if let Some(s) = *s {
                let st = &net.stations()[s];
                power[u] = st.power / counts[s] as f64;
                bandwidth[u] = st.bandwidth / counts[s] as f64;
            }
        }
        Self { station, power, bandwidth }
    }

    pub fn from_assignment(net: &AccessNetwork, assignment: &AccessAssignment) -> Result<Vec<Option<usize>>> {
        let mut out = vec![None; net.users().len()];
        for (user, station) in &assignment.map {
            let u = net.user_index(*user).ok_or_else(|| Error::domain(format!("unknown {user}")))?;
            let s = net
                .station_index(*station)
                .ok_or_else(|| Error::domain(format!("{station} does not serve users")))?;
            out[u] = Some(s);
        }
        Ok(out)
    }

    pub fn assignment(&self, net: &AccessNetwork) -> AccessAssignment {
        let mut a = AccessAssignment::default();
        for (u, s) in self.station.iter().enumerate() {
            if let Some(s) = s {
                a.map.insert(net.users()[u].id, net.stations()[*s].id);
            }
        }
        a
    }

    /// User indices grouped by station.
    pub fn groups(&self, n_stations: usize) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); n_stations];
        for (u, s) in self.station.iter().enumerate() {
            if let Some(s) = s {
                g[*s].push(u);
            }
        }
        g
    }

    /// Effective rate of every user; unserved users get `None`.
    pub fn rates(&self, net: &AccessNetwork) -> Vec<Option<f64>> {
        let mut out = vec![None; self.station.len()];
        for (s, users) in self.groups(net.stations().len()).iter().enumerate() {
            if users.is_empty() {
                continue;
            }
            let p: Vec<f64> = users.iter().map(|&u| self.power[u]).collect();
            let b: Vec<f64> = users.iter().map(|&u| self.bandwidth[u]).collect();
            for (&u, r) in users.iter().zip(net.station_rates(s, users, &p, &b)) {
                out[u] = Some(r);
            }
        }
        out
    }

    pub fn resources(&self, net: &AccessNetwork) -> ResourceMap {
        let mut m = ResourceMap::default();
        for (u, s) in self.station.iter().enumerate() {
            if let Some(s) = s {
                let key = (net.stations()[*s].id, net.users()[u].id);
                m.powers.insert(key, self.power[u]);
                m.bandwidths.insert(key, self.bandwidth[u]);
            }
        }
        m
    }
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}
