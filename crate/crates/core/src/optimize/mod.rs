//! Power allocation, HAP placement, FSO alignment and the end-to-end solvers.

mod align;
mod placement;
mod power;
mod solver;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assoc::{AccessAssignment, BackhaulAssignment};
use crate::energy::RelayTrace;
use crate::error::{Error, Result};
use crate::model::{Position3D, StationId, UserId, UtilityMetric};

pub use align::{align_fso, misalignment};
pub use placement::{place_haps_localsearch, place_haps_weighted_centroid, weighted_kmeans, SearchResult};
pub use power::{allocate_power_maxmin, allocate_power_uniform, allocate_power_waterfill};
pub use solver::{solve, solve_approx, solve_benchmark1, solve_benchmark2, solve_lowcomplexity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    Approx,
    LowComplexity,
    Bench1,
    Bench2,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Approx, SolverKind::LowComplexity, SolverKind::Bench1, SolverKind::Bench2];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Approx => "approx",
            SolverKind::LowComplexity => "lowcomplexity",
            SolverKind::Bench1 => "bench1",
            SolverKind::Bench2 => "bench2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "approx" => Ok(SolverKind::Approx),
            "lowcomplexity" | "low_complexity" | "lc" => Ok(SolverKind::LowComplexity),
            "bench1" => Ok(SolverKind::Bench1),
            "bench2" => Ok(SolverKind::Bench2),
            other => Err(Error::InvalidConfig(format!("unknown solver {other:?}"))),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tuning knobs shared by the solvers (`solver.*` config keys).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_outer_iterations: usize,
    /// Stop once an outer iteration improves the utility by less than this
    /// fraction.
    pub convergence_epsilon: f64,
    /// Pattern-search step sizes, km, strictly decreasing.
    pub placement_step_schedule: Vec<f64>,
    /// Sweeps allowed per step size.
    pub placement_max_sweeps: usize,
    pub power_bisection_tolerance: f64,
    /// Most HAPs one gateway or the satellite may feed.
    pub n_max: usize,
    pub kmeans_iterations: usize,
    /// k-means weight of a user already covered by a terrestrial station or
    /// relay; uncovered users weigh 1.
    pub covered_user_weight: f64,
    /// The low-complexity solver pins a HAP over the terrestrial box once
    /// the box holds more than this many users per terrestrial station.
    pub pin_users_per_station: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer_iterations: 4,
            convergence_epsilon: 1e-3,
            placement_step_schedule: vec![10.0, 5.0, 2.0, 1.0, 0.5],
            placement_max_sweeps: 8,
            power_bisection_tolerance: 1e-9,
            n_max: 3,
            kmeans_iterations: 25,
            covered_user_weight: 0.5,
            pin_users_per_station: 12.0,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.max_outer_iterations == 0 || self.placement_max_sweeps == 0 || self.n_max == 0 {
            return bad("max_outer_iterations, placement_max_sweeps and n_max must be at least 1".into());
        }
        if !(self.convergence_epsilon > 0.0 && self.power_bisection_tolerance > 0.0) {
            return bad("convergence_epsilon and power_bisection_tolerance must be positive".into());
        }
        let s = &self.placement_step_schedule;
        if s.is_empty() || s.iter().any(|x| !(*x > 0.0 && x.is_finite())) || s.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("placement_step_schedule must be positive and strictly decreasing, got {s:?}"));
        }
        if !(0.0..=1.0).contains(&self.covered_user_weight) || self.pin_users_per_station < 0.0 {
            return bad("covered_user_weight must be in [0,1] and pin_users_per_station non-negative".into());
        }
        Ok(())
    }
}

/// Solver objective: utility, with the served-user count breaking ties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub served: usize,
    pub utility: f64,
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.utility.partial_cmp(&other.utility)? {
            Ordering::Equal => Some(self.served.cmp(&other.served)),
            o => Some(o),
        }
    }
}

/// Resources and achieved rate of one served user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserAllocation {
    pub user: UserId,
    pub station: StationId,
    pub power: f64,
    pub bandwidth: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub solver: SolverKind,
    pub metric: UtilityMetric,
    pub access: AccessAssignment,
    pub backhaul: BackhaulAssignment,
    pub hap_positions: Vec<Position3D>,
    /// FSO pointing of the hop feeding each station, as a unit vector.
    pub pointing: BTreeMap<StationId, [f64; 3]>,
    /// Served users in id order.
    pub allocations: Vec<UserAllocation>,
    pub unserved: Vec<UserId>,
    /// Backhaul chain rate of every access station.
    pub chain_rates: BTreeMap<StationId, f64>,
    pub relay_traces: BTreeMap<StationId, RelayTrace>,
    pub utility: f64,
    pub iterations: usize,
    /// Utility after each outer iteration, starting point first.
    pub utility_trace: Vec<f64>,
}

impl Solution {
    pub fn powers(&self) -> BTreeMap<(StationId, UserId), f64> {
        self.allocations.iter().map(|a| ((a.station, a.user), a.power)).collect()
    }

    pub fn bandwidths(&self) -> BTreeMap<(StationId, UserId), f64> {
        self.allocations.iter().map(|a| ((a.station, a.user), a.bandwidth)).collect()
    }

    pub fn per_user_rate(&self) -> BTreeMap<UserId, f64> {
        self.allocations.iter().map(|a| (a.user, a.rate)).collect()
    }

    pub fn served(&self) -> usize {
        self.allocations.len()
    }

    /// Total rate over all users divided by the user count.
    pub fn avg_rate_per_user(&self) -> f64 {
        let total = self.allocations.len() + self.unserved.len();
        if total == 0 {
            return 0.0;
        }
        self.allocations.iter().map(|a| a.rate).sum::<f64>() / total as f64
    }

    pub fn score(&self) -> Score {
        Score { served: self.served(), utility: self.utility }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solutions always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
    }
}
