//! RF and FSO link budgets and Shannon rates.
//!
//! Access links are RF only. Backhaul hops are hybrid: a hop carries the
//! better of its RF and FSO rates.

mod backhaul;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Position3D;

pub use backhaul::{backhaul_chain_rate, hop_rate, BackhaulNetwork, Hop, Node};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts dBm/Hz to W/Hz.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkClass {
    TerrestrialAccess,
    RelayAccess,
    HapAccess,
    SatelliteToHap,
    GatewayToHap,
    HapToGround,
    GatewayToGround,
}

impl LinkClass {
    pub fn is_access(self) -> bool {
        matches!(self, LinkClass::TerrestrialAccess | LinkClass::RelayAccess | LinkClass::HapAccess)
    }

    /// Ground-to-ground links use the log-distance NLOS model.
    pub fn is_nlos(self) -> bool {
        matches!(self, LinkClass::TerrestrialAccess | LinkClass::RelayAccess | LinkClass::GatewayToGround)
    }
}

/// Extra per-class loss on top of the distance law, dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessLoss {
    pub terrestrial_access: f64,
    pub relay_access: f64,
    pub hap_access: f64,
    pub satellite_hap: f64,
    pub gateway_hap: f64,
    pub hap_ground: f64,
    pub gateway_ground: f64,
}

impl ExcessLoss {
    pub fn of(&self, class: LinkClass) -> f64 {
        match class {
            LinkClass::TerrestrialAccess => self.terrestrial_access,
            LinkClass::RelayAccess => self.relay_access,
            LinkClass::HapAccess => self.hap_access,
            LinkClass::SatelliteToHap => self.satellite_hap,
            LinkClass::GatewayToHap => self.gateway_hap,
            LinkClass::HapToGround => self.hap_ground,
            LinkClass::GatewayToGround => self.gateway_ground,
        }
    }
}

impl Default for ExcessLoss {
    fn default() -> Self {
        Self {
            terrestrial_access: 0.0,
            relay_access: 0.0,
            hap_access: 10.0,
            satellite_hap: 3.0,
            gateway_hap: 3.0,
            hap_ground: 3.0,
            gateway_ground: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfLinkParams {
    /// Access carrier, Hz.
    pub carrier_frequency: f64,
    /// RF backhaul carrier, Hz.
    pub backhaul_frequency: f64,
    pub pathloss_exponent_nlos: f64,
    /// Reference distance of the NLOS law, m.
    pub reference_distance: f64,
    /// Thermal noise density, W/Hz.
    pub noise_density: f64,
    pub excess_loss_db: ExcessLoss,
    /// Combined transmit + receive dish gain on RF backhaul hops, dB.
    pub backhaul_antenna_gain_db: f64,
}

impl Default for RfLinkParams {
    fn default() -> Self {
        Self {
            carrier_frequency: 2e9,
            backhaul_frequency: 31e9,
            pathloss_exponent_nlos: 3.5,
            reference_distance: 100.0,
            noise_density: dbm_to_watts(-174.0),
            excess_loss_db: ExcessLoss::default(),
            backhaul_antenna_gain_db: 50.0,
        }
    }
}

impl RfLinkParams {
    pub fn frequency(&self, class: LinkClass) -> f64 {
        if class.is_access() {
            self.carrier_frequency
        } else {
            self.backhaul_frequency
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.carrier_frequency > 0.0
            && self.backhaul_frequency > 0.0
            && self.pathloss_exponent_nlos >= 2.0
            && self.reference_distance > 0.0
            && self.noise_density > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid RF parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsoLinkParams {
    pub optical_bandwidth: f64,
    /// Atmospheric extinction, 1/km.
    pub atmospheric_attenuation: f64,
    /// Full beam divergence, rad.
    pub beam_divergence: f64,
    /// Aggregate transceiver gain (power, responsivity, aperture) referred to SNR.
    pub responsivity_gain: f64,
    /// Pointing-jitter scale of the Gaussian pointing loss, rad.
    pub pointing_jitter: f64,
}

impl Default for FsoLinkParams {
    fn default() -> Self {
        Self {
            optical_bandwidth: 1e9,
            atmospheric_attenuation: 0.43,
            beam_divergence: 1e-3,
            responsivity_gain: 1e9,
            pointing_jitter: 1e-4,
        }
    }
}

impl FsoLinkParams {
    pub fn check(&self) -> Result<()> {
        let all_positive = [
            self.optical_bandwidth,
            self.atmospheric_attenuation,
            self.beam_divergence,
            self.responsivity_gain,
            self.pointing_jitter,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
        if all_positive {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("FSO parameters must be positive: {self:?}")))
        }
    }
}

/// Link-level parameters shared by every solver (`channel.*` config keys).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub rf: RfLinkParams,
    pub fso: FsoLinkParams,
    /// When false, backhaul hops are RF only.
    pub fso_enabled: bool,
    pub gateway_tx_power: f64,
    /// HAP transmitter feeding terrestrial stations and relays, W.
    pub hap_backhaul_tx_power: f64,
    /// A station can serve a user iff its full-power access SNR exceeds this, dB.
    pub access_snr_floor_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            rf: RfLinkParams::default(),
            fso: FsoLinkParams::default(),
            fso_enabled: true,
            gateway_tx_power: 10.0,
            hap_backhaul_tx_power: 10.0,
            access_snr_floor_db: -5.0,
        }
    }
}

impl ChannelParams {
    pub fn check(&self) -> Result<()> {
        self.rf.check()?;
        self.fso.check()?;
        if !(self.gateway_tx_power > 0.0 && self.hap_backhaul_tx_power > 0.0) {
            return Err(Error::InvalidConfig("backhaul transmit powers must be positive".into()));
        }
        Ok(())
    }
}

fn free_space_db(distance_m: f64, frequency: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m * frequency / SPEED_OF_LIGHT).log10()
}

/// Path loss in dB between two points for a link class.
pub fn rf_pathloss_db(class: LinkClass, tx: &Position3D, rx: &Position3D, params: &RfLinkParams) -> Result<f64> {
    if !(tx.is_finite() && rx.is_finite()) {
        return Err(Error::domain("non-finite link geometry"));
    }
    let d_m = tx.distance(rx) * 1000.0;
    if d_m <= 0.0 {
        return Err(Error::domain("transmitter and receiver coincide"));
    }
    Ok(pathloss_at(class, d_m, params))
}

/// Path loss for a known distance in metres. Callers guarantee `d_m > 0`.
pub(crate) fn pathloss_at(class: LinkClass, d_m: f64, params: &RfLinkParams) -> f64 {
    let f = params.frequency(class);
    let excess = params.excess_loss_db.of(class);
    if class.is_nlos() {
        let d0 = params.reference_distance;
        free_space_db(d0, f) + 10.0 * params.pathloss_exponent_nlos * (d_m / d0).log10() + excess
    } else {
        free_space_db(d_m, f) + excess
    }
}

/// Shannon rate of a bandwidth with a linear SNR.
pub fn shannon(bandwidth: f64, snr: f64) -> f64 {
    if bandwidth <= 0.0 || snr <= 0.0 {
        return 0.0;
    }
    bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

/// Shannon rate of an RF link, bit/s.
pub fn rf_rate(bandwidth: f64, tx_power: f64, pathloss_db: f64, params: &RfLinkParams) -> Result<f64> {
    if !(bandwidth >= 0.0 && tx_power >= 0.0) || !pathloss_db.is_finite() {
        return Err(Error::domain(format!(
            "rf_rate needs non-negative bandwidth/power, got B={bandwidth} P={tx_power}"
        )));
    }
    if bandwidth == 0.0 {
        return Ok(0.0);
    }
    let snr = tx_power * db_to_linear(-pathloss_db) / (params.noise_density * bandwidth);
    Ok(shannon(bandwidth, snr))
}

/// FSO receive SNR: extinction, geometric spreading and Gaussian pointing loss.
pub fn fso_snr(distance_km: f64, misalignment: f64, params: &FsoLinkParams) -> f64 {
    let spot_m = params.beam_divergence * distance_km * 1000.0;
    let pointing = (-misalignment * misalignment / (2.0 * params.pointing_jitter * params.pointing_jitter)).exp();
    params.responsivity_gain * (-params.atmospheric_attenuation * distance_km).exp() / (spot_m * spot_m) * pointing
}

/// Rate of an FSO hop, bit/s.
pub fn fso_rate(tx: &Position3D, rx: &Position3D, misalignment: f64, params: &FsoLinkParams) -> Result<f64> {
    if !(0.0..=PI).contains(&misalignment) {
        return Err(Error::domain(format!("misalignment {misalignment} outside [0, pi]")));
    }
    if !(tx.is_finite() && rx.is_finite()) {
        return Err(Error::domain("non-finite link geometry"));
    }
    let d = tx.distance(rx);
    if d <= 0.0 {
        return Err(Error::domain("transmitter and receiver coincide"));
    }
    Ok(shannon(params.optical_bandwidth, fso_snr(d, misalignment, params)))
}
