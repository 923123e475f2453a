//! Renewable-energy relay batteries.
//!
//! A relay may only spend, in slot `t`, energy it had stored at the end of
//! slot `t - 1`. Harvest follows a half-sine daylight profile.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    pub capacity: f64,
    pub stored: f64,
    pub slot_index: u32,
}

impl BatteryState {
    pub fn new(capacity: f64, stored: f64) -> Self {
        Self { capacity, stored: stored.clamp(0.0, capacity), slot_index: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvestProfile {
    /// Energy harvested in the sunniest slot, J.
    pub peak_harvest: f64,
    pub sunrise_slot: u32,
    pub sunset_slot: u32,
    pub slots_per_day: u32,
}

impl Default for HarvestProfile {
    fn default() -> Self {
        Self { peak_harvest: 60_000.0, sunrise_slot: 6, sunset_slot: 18, slots_per_day: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub capacity_j: f64,
    /// Initial charge as a fraction of capacity.
    pub initial_fraction: f64,
    /// Fixed per-slot consumption of an active relay, J.
    pub operating_energy_j: f64,
    pub slot_duration_s: f64,
    pub profile: HarvestProfile,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            capacity_j: 200_000.0,
            initial_fraction: 0.8,
            operating_energy_j: 1_800.0,
            slot_duration_s: 3_600.0,
            profile: HarvestProfile::default(),
        }
    }
}

impl EnergyConfig {
    pub fn check(&self) -> Result<()> {
        let p = &self.profile;
        let ok = self.capacity_j > 0.0
            && (0.0..=1.0).contains(&self.initial_fraction)
            && self.operating_energy_j >= 0.0
            && self.slot_duration_s > 0.0
            && p.peak_harvest >= 0.0
            && p.sunrise_slot < p.sunset_slot
            && p.sunset_slot <= p.slots_per_day;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid energy config {self:?}")))
        }
    }
}

/// Energy harvested during `slot`: a half sine between sunrise and sunset.
pub fn harvest(profile: &HarvestProfile, slot: u32) -> f64 {
    let t = slot % profile.slots_per_day.max(1);
    if t < profile.sunrise_slot || t > profile.sunset_slot {
        return 0.0;
    }
    let span = (profile.sunset_slot - profile.sunrise_slot) as f64;
    let phase = PI * (t - profile.sunrise_slot) as f64 / span;
    profile.peak_harvest * phase.sin().max(0.0)
}

/// Advances one slot. Consuming more than is stored is an error, not a clip.
pub fn step_battery(state: &BatteryState, harvested: f64, consumed: f64) -> Result<BatteryState> {
    if !(harvested >= 0.0 && consumed >= 0.0) {
        return Err(Error::domain(format!(
            "harvested ({harvested}) and consumed ({consumed}) must be non-negative"
        )));
    }
    if consumed > state.stored {
        return Err(Error::BatteryInfeasible { slot: state.slot_index, consumed, stored: state.stored });
    }
    Ok(BatteryState {
        capacity: state.capacity,
        stored: (state.stored - consumed + harvested).min(state.capacity),
        slot_index: state.slot_index + 1,
    })
}

/// Transmission-energy budget left after paying the operating cost.
pub fn max_feasible_energy(state: &BatteryState, operating_energy: f64) -> f64 {
    (state.stored - operating_energy).max(0.0)
}

/// Per-slot record of one relay over the planning horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayTrace {
    /// `slots + 1` states; `states[t]` is the charge available to slot `t`.
    pub states: Vec<BatteryState>,
    pub harvested: Vec<f64>,
    pub consumed: Vec<f64>,
    pub transmit_power: f64,
}

/// Runs a relay for `slots` slots at constant transmit power.
///
/// A relay with nothing to transmit that cannot cover its operating energy
/// stays off for the slot. A transmitting relay that runs short is an error.
pub fn simulate_relay(
    initial: &BatteryState,
    cfg: &EnergyConfig,
    slots: u32,
    transmit_power: f64,
) -> Result<RelayTrace> {
    let tx_energy = transmit_power * cfg.slot_duration_s;
    let mut states = Vec::with_capacity(slots as usize + 1);
    let mut harvested = Vec::with_capacity(slots as usize);
    let mut consumed = Vec::with_capacity(slots as usize);
    let mut state = *initial;
    states.push(state);
    for slot in 0..slots {
        let gained = harvest(&cfg.profile, slot);
        let use_now = if transmit_power == 0.0 && state.stored < cfg.operating_energy_j {
            0.0
        } else {
            if tx_energy > max_feasible_energy(&state, cfg.operating_energy_j) {
                return Err(Error::BatteryInfeasible {
                    slot: state.slot_index,
                    consumed: cfg.operating_energy_j + tx_energy,
                    stored: state.stored,
                });
            }
            cfg.operating_energy_j + tx_energy
        };
        state = step_battery(&state, gained, use_now)?;
        harvested.push(gained);
        consumed.push(use_now);
        states.push(state);
    }
    Ok(RelayTrace { states, harvested, consumed, transmit_power })
}

/// Largest constant transmit power in `[0, peak]` the battery sustains over
/// the horizon, found by bisection. Returns 0 if the relay cannot even pay
/// its operating energy throughout.
pub fn sustainable_power(initial: &BatteryState, cfg: &EnergyConfig, slots: u32, peak: f64) -> f64 {
    let feasible = |p: f64| simulate_relay(initial, cfg, slots, p).is_ok();
    if feasible(peak) {
        return peak;
    }
    // p = 0 may still be "feasible" via the off rule; require real headroom
    let tiny = peak * 1e-9;
    if !feasible(tiny) {
        return 0.0;
    }
    let (mut lo, mut hi) = (tiny, peak);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-9 * peak {
            break;
        }
    }
    lo
}
