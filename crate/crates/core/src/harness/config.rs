//! Plain-text config files.
//!
//! One `section.key = value` assignment per line. `#` starts a comment, lists
//! are comma separated and every key is optional; missing keys keep their
//! defaults. Sections are `scenario`, `channel`, `energy`, `solver` and
//! `experiment`.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use crate::channel::{dbm_to_watts, ChannelParams};
use crate::error::{Error, Result};
use crate::model::{Rect, ScenarioConfig, UtilityMetric};
use crate::optimize::{SolverConfig, SolverKind};

use super::{ExperimentKind, ExperimentSpec};

/// Sweep axes and bookkeeping from the `experiment.*` section.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub users_values: Vec<f64>,
    pub hap_power_values: Vec<f64>,
    pub b0_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            users_values: (1..=8).map(|k| 50.0 * k as f64).collect(),
            hap_power_values: vec![40.0, 80.0, 160.0, 320.0, 640.0, 1280.0],
            b0_values: vec![2e6, 4e6, 8e6],
            seeds: (1..=20).collect(),
            solvers: SolverKind::ALL.to_vec(),
            record_wall_time: false,
        }
    }
}

/// A fully parsed config file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub scenario: ScenarioConfig,
    pub channel: ChannelParams,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses config text and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line, message };
            let (key, value) = body.split_once('=').ok_or_else(|| err(format!("expected `section.key = value`, got {body:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(err(format!("{key} already set on line {first}")));
            }
            let (section, name) = key.split_once('.').ok_or_else(|| err(format!("key {key:?} has no section")))?;
            let applied = match section {
                "scenario" => cfg.set_scenario(name, value),
                "channel" => cfg.set_channel(name, value),
                "energy" => cfg.set_energy(name, value),
                "solver" => cfg.set_solver(name, value),
                "experiment" => cfg.set_experiment(name, value),
                _ => return Err(err(format!("unknown section {section:?}"))),
            };
            match applied {
                Ok(true) => {}
                Ok(false) => return Err(err(format!("unknown key {key:?}"))),
                Err(message) => return Err(err(format!("{key}: {message}"))),
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        self.scenario.check()?;
        self.channel.check()?;
        self.solver.check()?;
        self.spec(ExperimentKind::UsersSweep).check()?;
        self.spec(ExperimentKind::HapPowerSweep).check()
    }

    /// The experiment of `kind` described by this config.
    pub fn spec(&self, kind: ExperimentKind) -> ExperimentSpec {
        let e = &self.experiment;
        let (sweep_values, b0_values) = match kind {
            ExperimentKind::UsersSweep => (e.users_values.clone(), vec![self.scenario.backhaul_bandwidth]),
            ExperimentKind::HapPowerSweep => (e.hap_power_values.clone(), e.b0_values.clone()),
        };
        ExperimentSpec {
            kind,
            sweep_values,
            b0_values,
            seeds: e.seeds.clone(),
            solvers: e.solvers.clone(),
            record_wall_time: e.record_wall_time,
            scenario: self.scenario.clone(),
            channel: self.channel,
            solver: self.solver.clone(),
        }
    }

    fn set_scenario(&mut self, name: &str, v: &str) -> std::result::Result<bool, String> {
        let s = &mut self.scenario;
        match name {
            "area_side" => s.area_side = num(v)?,
            "subarea1" => s.subarea1 = rect(v)?,
            "subarea2" => s.subarea2 = rect(v)?,
            "user_count" => s.user_count = num(v)?,
            "user_split" => s.user_split = fixed::<3>(v)?,
            "terrestrial_count" => s.terrestrial_count = num(v)?,
            "relay_count" => s.relay_count = num(v)?,
            "hap_count" => s.hap_count = num(v)?,
            "gateway_count" => s.gateway_count = num(v)?,
            "hap_altitude" => s.hap_altitude = num(v)?,
            "hap_peak_power" => s.hap_peak_power = num(v)?,
            "hap_bandwidth" => s.hap_bandwidth = num(v)?,
            "terrestrial_peak_power" => s.terrestrial_peak_power = num(v)?,
            "terrestrial_bandwidth" => s.terrestrial_bandwidth = num(v)?,
            "relay_peak_power" => s.relay_peak_power = num(v)?,
            "relay_bandwidth" => s.relay_bandwidth = num(v)?,
            "satellite_altitude" => s.satellite_altitude = num(v)?,
            "satellite_peak_power" => s.satellite_peak_power = num(v)?,
            "backhaul_bandwidth" => s.backhaul_bandwidth = num(v)?,
            "qos_min_rate" => s.qos_min_rate = num(v)?,
            "min_user_bandwidth" => s.min_user_bandwidth = num(v)?,
            "metric" => s.metric = UtilityMetric::parse(v).map_err(|e| e.to_string())?,
            "seed" => s.seed = num(v)?,
            "time_slots" => s.time_slots = num(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn set_channel(&mut self, name: &str, v: &str) -> std::result::Result<bool, String> {
        let c = &mut self.channel;
        let loss = &mut c.rf.excess_loss_db;
        match name {
            "carrier_frequency" => c.rf.carrier_frequency = num(v)?,
            "backhaul_frequency" => c.rf.backhaul_frequency = num(v)?,
            "pathloss_exponent_nlos" => c.rf.pathloss_exponent_nlos = num(v)?,
            "reference_distance" => c.rf.reference_distance = num(v)?,
            "noise_density_dbm_hz" => c.rf.noise_density = dbm_to_watts(num(v)?),
            "backhaul_antenna_gain_db" => c.rf.backhaul_antenna_gain_db = num(v)?,
            "excess_loss_terrestrial_access" => loss.terrestrial_access = num(v)?,
            "excess_loss_relay_access" => loss.relay_access = num(v)?,
            "excess_loss_hap_access" => loss.hap_access = num(v)?,
            "excess_loss_satellite_hap" => loss.satellite_hap = num(v)?,
            "excess_loss_gateway_hap" => loss.gateway_hap = num(v)?,
            "excess_loss_hap_ground" => loss.hap_ground = num(v)?,
            "excess_loss_gateway_ground" => loss.gateway_ground = num(v)?,
            "fso_enabled" => c.fso_enabled = flag(v)?,
            "optical_bandwidth" => c.fso.optical_bandwidth = num(v)?,
            "atmospheric_attenuation" => c.fso.atmospheric_attenuation = num(v)?,
            "beam_divergence" => c.fso.beam_divergence = num(v)?,
            "responsivity_gain" => c.fso.responsivity_gain = num(v)?,
            "pointing_jitter" => c.fso.pointing_jitter = num(v)?,
            "gateway_tx_power" => c.gateway_tx_power = num(v)?,
            "hap_backhaul_tx_power" => c.hap_backhaul_tx_power = num(v)?,
            "access_snr_floor_db" => c.access_snr_floor_db = num(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn set_energy(&mut self, name: &str, v: &str) -> std::result::Result<bool, String> {
        let e = &mut self.scenario.energy;
        match name {
            "capacity_j" => e.capacity_j = num(v)?,
            "initial_fraction" => e.initial_fraction = num(v)?,
            "operating_energy_j" => e.operating_energy_j = num(v)?,
            "slot_duration_s" => e.slot_duration_s = num(v)?,
            "peak_harvest_j" => e.profile.peak_harvest = num(v)?,
            "sunrise_slot" => e.profile.sunrise_slot = num(v)?,
            "sunset_slot" => e.profile.sunset_slot = num(v)?,
            "slots_per_day" => e.profile.slots_per_day = num(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn set_solver(&mut self, name: &str, v: &str) -> std::result::Result<bool, String> {
        let s = &mut self.solver;
        match name {
            "max_outer_iterations" => s.max_outer_iterations = num(v)?,
            "convergence_epsilon" => s.convergence_epsilon = num(v)?,
            "placement_step_schedule" => s.placement_step_schedule = list(v)?,
            "placement_max_sweeps" => s.placement_max_sweeps = num(v)?,
            "power_bisection_tolerance" => s.power_bisection_tolerance = num(v)?,
            "n_max" => s.n_max = num(v)?,
            "kmeans_iterations" => s.kmeans_iterations = num(v)?,
            "covered_user_weight" => s.covered_user_weight = num(v)?,
            "pin_users_per_station" => s.pin_users_per_station = num(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn set_experiment(&mut self, name: &str, v: &str) -> std::result::Result<bool, String> {
        let e = &mut self.experiment;
        match name {
            "users_values" => e.users_values = list(v)?,
            "hap_power_values" => e.hap_power_values = list(v)?,
            "b0_values" => e.b0_values = list(v)?,
            "seeds" => e.seeds = seeds(v)?,
            "solvers" => e.solvers = solvers(v).map_err(|e| e.to_string())?,
            "record_wall_time" => e.record_wall_time = flag(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?}"))
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(|x| num(x.trim())).collect()
}

fn fixed<const N: usize>(v: &str) -> std::result::Result<[f64; N], String> {
    let xs: Vec<f64> = list(v)?;
    xs.try_into().map_err(|xs: Vec<f64>| format!("expected {N} values, got {}", xs.len()))
}

fn rect(v: &str) -> std::result::Result<Rect, String> {
    let [x0, x1, y0, y1] = fixed::<4>(v)?;
    Ok(Rect::new(x0, x1, y0, y1))
}

/// Seeds as a list whose items are single seeds or inclusive ranges `a..b`.
pub fn seeds(v: &str) -> std::result::Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (num(a.trim())?, num(b.trim())?);
                if a > b {
                    return Err(format!("empty seed range {item:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(item)?),
        }
    }
    Ok(out)
}

/// Comma-separated solver names.
pub fn solvers(v: &str) -> Result<Vec<SolverKind>> {
    v.split(',').map(SolverKind::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(Config::parse("# nothing\n\n").unwrap(), Config::default());
    }

    #[test]
    fn sets_keys_from_every_section() {
        let text = "\
scenario.user_count = 120   # fewer users
scenario.subarea1 = 70, 110, 0, 40
scenario.metric = pf
channel.fso_enabled = false
channel.noise_density_dbm_hz = -170
energy.capacity_j = 1e5
solver.placement_step_schedule = 8, 4, 1
experiment.seeds = 3, 7..9
experiment.solvers = approx, lc
";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.scenario.user_count, 120);
        assert_eq!(c.scenario.subarea1, Rect::new(70.0, 110.0, 0.0, 40.0));
        assert_eq!(c.scenario.metric, UtilityMetric::ProportionalFair);
        assert!(!c.channel.fso_enabled);
        assert!((c.channel.rf.noise_density - 1e-20).abs() < 1e-30);
        assert_eq!(c.scenario.energy.capacity_j, 1e5);
        assert_eq!(c.solver.placement_step_schedule, vec![8.0, 4.0, 1.0]);
        assert_eq!(c.experiment.seeds, vec![3, 7, 8, 9]);
        assert_eq!(c.experiment.solvers, vec![SolverKind::Approx, SolverKind::LowComplexity]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("scenario.user_count = 5\nbogus line\n", 2),
            ("\n\nscenario.nope = 1\n", 3),
            ("weather.rain = 1\n", 1),
            ("scenario.user_count = many\n", 1),
            ("scenario.seed = 1\nscenario.seed = 2\n", 2),
            ("scenario.user_split = 0.5, 0.5\n", 1),
            ("experiment.seeds = 5..2\n", 1),
        ];
        for (text, want) in cases {
            match Config::parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_values_fail_validation() {
        for text in [
            "scenario.user_split = 0.5, 0.5, 0.5",
            "experiment.users_values = 100, 50",
            "experiment.seeds = 1, 1",
            "solver.n_max = 0",
            "experiment.b0_values = 0",
        ] {
            assert!(matches!(Config::parse(text), Err(Error::InvalidConfig(_))), "{text}");
        }
    }
}
