//! Experiment sweeps, CSV output, summary reports and the command line.

mod cli;
mod config;
mod csv;
mod report;

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::model::{generate_scenario, Scenario, ScenarioConfig, StationKind};
use crate::optimize::{solve, Solution, SolverConfig, SolverKind};

pub use cli::cli_main;
pub use config::{solvers as parse_solvers, Config, ExperimentConfig};
pub use csv::{emit_csv, parse_csv, read_csv, write_csv, CSV_HEADER};
pub use report::{gains, render_report, summarize, Gain, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    /// Vary the user count.
    UsersSweep,
    /// Vary HAP peak power at several backhaul bandwidths.
    HapPowerSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::UsersSweep => "users",
            ExperimentKind::HapPowerSweep => "happower",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "users" => Ok(ExperimentKind::UsersSweep),
            "happower" => Ok(ExperimentKind::HapPowerSweep),
            other => Err(Error::InvalidConfig(format!("unknown experiment {other:?}"))),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One experiment: a base setup plus the axes to sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// User counts or HAP peak powers (W), strictly increasing.
    pub sweep_values: Vec<f64>,
    /// Backhaul bandwidths for the HAP power sweep; the users sweep uses the
    /// base scenario's bandwidth.
    pub b0_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    /// Fill `wall_ms`; off by default because timings break byte-identical output.
    pub record_wall_time: bool,
    pub scenario: ScenarioConfig,
    pub channel: ChannelParams,
    pub solver: SolverConfig,
}

impl ExperimentSpec {
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let increasing = |xs: &[f64]| !xs.is_empty() && xs.iter().all(|x| x.is_finite()) && xs.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.sweep_values) {
            return bad(format!("{} sweep values must be non-empty and strictly increasing", self.kind));
        }
        match self.kind {
            ExperimentKind::UsersSweep => {
                if self.sweep_values.iter().any(|u| *u < 0.0 || u.fract() != 0.0) {
                    return bad("user counts must be non-negative integers".into());
                }
            }
            ExperimentKind::HapPowerSweep => {
                if self.sweep_values.iter().any(|p| *p <= 0.0) {
                    return bad("HAP peak powers must be positive".into());
                }
            }
        }
        if !increasing(&self.b0_values) || self.b0_values.iter().any(|b| *b <= 0.0) {
            return bad("b0 values must be positive and strictly increasing".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if self.seeds.is_empty() || seeds.len() != self.seeds.len() {
            return bad("seeds must be non-empty and distinct".into());
        }
        let mut solvers = self.solvers.clone();
        solvers.sort_unstable();
        solvers.dedup();
        if self.solvers.is_empty() || solvers.len() != self.solvers.len() {
            return bad("solvers must be non-empty and distinct".into());
        }
        Ok(())
    }

    /// Scenario config of one sweep point.
    pub fn point_config(&self, sweep_value: f64, b0: f64, seed: u64) -> ScenarioConfig {
        let mut cfg = self.scenario.clone();
        match self.kind {
            ExperimentKind::UsersSweep => cfg.user_count = sweep_value as usize,
            ExperimentKind::HapPowerSweep => cfg.hap_peak_power = sweep_value,
        }
        cfg.backhaul_bandwidth = b0;
        cfg.seed = seed;
        cfg
    }
}

/// One CSV row: one solver on one sweep point.
///
/// A row whose solver failed keeps its keys, reports `NaN` utility and rate,
/// counts every user as unserved and takes zero iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub sweep_value: f64,
    pub b0_hz: f64,
    pub seed: u64,
    pub solver: SolverKind,
    pub utility: f64,
    /// Users sweep: total rate divided by the user count. HAP power sweep: mean over
    /// HAP-served users, 0 when there are none.
    pub avg_rate_bps: f64,
    pub unserved: usize,
    pub iterations: usize,
    pub wall_ms: f64,
}

impl ResultRow {
    pub fn is_error(&self) -> bool {
        self.utility.is_nan()
    }
}

/// Mean rate of the users a HAP serves; 0 when no HAP serves anyone.
pub fn hap_user_avg_rate(solution: &Solution, scenario: &Scenario) -> f64 {
    let rates: Vec<f64> = solution
        .allocations
        .iter()
        .filter(|a| scenario.station(a.station).is_some_and(|s| s.kind == StationKind::Hap))
        .map(|a| a.rate)
        .collect();
    if rates.is_empty() {
        0.0
    } else {
        rates.iter().sum::<f64>() / rates.len() as f64
    }
}

/// Runs `spec` and returns its rows ordered by (sweep value, b0, seed, solver).
/// Points run in parallel; a failing solver yields an error row and the
/// sweep carries on.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.check()?;
    let mut points = Vec::new();
    for &v in &spec.sweep_values {
        for &b0 in &spec.b0_values {
            for &seed in &spec.seeds {
                points.push((v, b0, seed));
            }
        }
    }
    let rows: Vec<Vec<ResultRow>> = points.par_iter().map(|&(v, b0, seed)| run_point(spec, v, b0, seed)).collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn run_users_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    if spec.kind != ExperimentKind::UsersSweep {
        return Err(Error::InvalidConfig("run_users_sweep needs a users experiment".into()));
    }
    run_experiment(spec)
}

/// HAP power sweep repeated for every backhaul bandwidth in `b0_values`.
pub fn run_hap_power_sweep(spec: &ExperimentSpec, b0_values: &[f64]) -> Result<Vec<ResultRow>> {
    if spec.kind != ExperimentKind::HapPowerSweep {
        return Err(Error::InvalidConfig("run_hap_power_sweep needs a happower experiment".into()));
    }
    run_experiment(&ExperimentSpec { b0_values: b0_values.to_vec(), ..spec.clone() })
}

fn run_point(spec: &ExperimentSpec, sweep_value: f64, b0: f64, seed: u64) -> Vec<ResultRow> {
    let cfg = spec.point_config(sweep_value, b0, seed);
    let scenario = generate_scenario(&cfg);
    spec.solvers
        .iter()
        .map(|&solver| {
            let mut row = ResultRow {
                experiment: spec.kind,
                sweep_value,
                b0_hz: b0,
                seed,
                solver,
                utility: f64::NAN,
                avg_rate_bps: f64::NAN,
                unserved: cfg.user_count,
                iterations: 0,
                wall_ms: 0.0,
            };
            let Ok(scenario) = &scenario else { return row };
            let start = Instant::now();
            let solved = solve(solver, scenario, &spec.channel, &spec.solver, cfg.metric);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            if let Ok(sol) = solved {
                row.utility = sol.utility;
                row.avg_rate_bps = match spec.kind {
                    ExperimentKind::UsersSweep => sol.avg_rate_per_user(),
                    ExperimentKind::HapPowerSweep => hap_user_avg_rate(&sol, scenario),
                };
                row.unserved = sol.unserved.len();
                row.iterations = sol.iterations;
            }
            if spec.record_wall_time {
                row.wall_ms = elapsed;
            }
            row
        })
        .collect()
}
