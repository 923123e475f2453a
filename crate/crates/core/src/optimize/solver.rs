use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::placement::{place_haps_localsearch, weighted_kmeans};
use super::power::optimize_station;
use super::{align_fso, misalignment, Score, Solution, SolverConfig, SolverKind, UserAllocation};
use crate::assoc::{
    backhaul_associate, greedy_indices, polished_indices, random_associate, random_backhaul, AccessNetwork,
    Allocation, BackhaulAssignment,
};
use crate::channel::{BackhaulNetwork, ChannelParams, Node};
use crate::energy::simulate_relay;
use crate::error::{Error, Result};
use crate::model::{utility, Position3D, Scenario, StationKind, UtilityMetric};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PowerRule {
    Uniform,
    Optimized,
}

#[derive(Debug, Clone, Copy)]
enum AccessRule<'a> {
    /// Admission, single moves.
    Greedy,
    /// Greedy plus two-step moves.
    Polished,
    /// A fixed association; users that fall out of range or below QoS are
    /// dropped.
    Fixed(&'a [Option<usize>]),
}

struct Eval {
    score: Score,
    alloc: Allocation,
}

struct Problem<'a> {
    scenario: &'a Scenario,
    params: &'a ChannelParams,
    cfg: &'a SolverConfig,
    metric: UtilityMetric,
    net: AccessNetwork,
}

fn node_pos(scenario: &Scenario, node: Node) -> Result<Position3D> {
    match node {
        Node::Station(id) => scenario.station(id).map(|s| s.pos),
        Node::Gateway(id) => scenario.gateway(id).map(|g| g.pos),
    }
    .ok_or_else(|| Error::domain(format!("unknown {node}")))
}

impl<'a> Problem<'a> {
    fn new(
        scenario: &'a Scenario,
        params: &'a ChannelParams,
        cfg: &'a SolverConfig,
        metric: UtilityMetric,
        backhaul: &BackhaulAssignment,
    ) -> Result<Self> {
        scenario.config.check()?;
        params.check()?;
        cfg.check()?;
        let bn = BackhaulNetwork::build(scenario, backhaul, params, |_, _| 0.0)?;
        let net = AccessNetwork::build(scenario, &bn, params)?;
        Ok(Self { scenario, params, cfg, metric, net })
    }

    fn prepare(&mut self, pos: &[Position3D], backhaul: &BackhaulAssignment) -> Result<Scenario> {
        let sc = self.scenario.with_hap_positions(pos);
        // beams are re-aligned after every move, so hops see no pointing loss
        let bn = BackhaulNetwork::build(&sc, backhaul, self.params, |_, _| 0.0)?;
        self.net.refresh(&sc, &bn)?;
        Ok(sc)
    }

    fn evaluate(
        &mut self,
        pos: &[Position3D],
        backhaul: &BackhaulAssignment,
        access: AccessRule,
        power: PowerRule,
    ) -> Result<Eval> {
        self.prepare(pos, backhaul)?;
        let net = &self.net;
        let station = match access {
            AccessRule::Greedy => greedy_indices(net, self.metric),
            AccessRule::Polished => polished_indices(net, self.metric),
            AccessRule::Fixed(fixed) => {
                let mut st: Vec<Option<usize>> =
                    fixed.iter().enumerate().map(|(u, s)| s.filter(|&s| net.in_range(s, u))).collect();
                let rates = Allocation::uniform(net, st.clone()).rates(net);
                for (u, r) in rates.iter().enumerate() {
                    if r.is_some_and(|r| r < net.users()[u].qos_min_rate * (1.0 - 1e-12)) {
                        st[u] = None;
                    }
                }
                st
            }
        };
        let mut alloc = Allocation::uniform(net, station);
        if power == PowerRule::Optimized {
            for (s, users) in alloc.groups(net.stations().len()).iter().enumerate() {
                if users.len() > 1 {
                    let p = optimize_station(net, s, users, self.metric, self.cfg.power_bisection_tolerance);
                    for (&u, pw) in users.iter().zip(p) {
                        alloc.power[u] = pw;
                    }
                }
            }
        }
        let rates: Vec<f64> = alloc.rates(net).into_iter().flatten().collect();
        let score = Score { served: rates.len(), utility: utility(&rates, self.metric)? };
        Ok(Eval { score, alloc })
    }

    fn local_search(
        &mut self,
        start: &[Position3D],
        backhaul: &BackhaulAssignment,
        access: AccessRule,
        power: PowerRule,
    ) -> Result<(Vec<Position3D>, Score)> {
        let mut failure = None;
        let bounds = self.scenario.config.area();
        let schedule = self.cfg.placement_step_schedule.clone();
        let sweeps = self.cfg.placement_max_sweeps;
        let worst = Score { served: 0, utility: f64::NEG_INFINITY };
        let result = place_haps_localsearch(
            start,
            |p| match self.evaluate(p, backhaul, access, power) {
                Ok(e) => e.score,
                Err(e) => {
                    failure.get_or_insert(e);
                    worst
                }
            },
            &schedule,
            bounds,
            sweeps,
        );
        match failure {
            Some(e) => Err(e),
            None => Ok((result.positions, result.value)),
        }
    }

    /// Alternates backhaul association and placement (with greedy access and
    /// the power rule inside every evaluation), accepting only improvements.
    fn block_coordinate(
        &mut self,
        mut pos: Vec<Position3D>,
        mut backhaul: BackhaulAssignment,
        power: PowerRule,
    ) -> Result<Outcome> {
        let mut current = self.evaluate(&pos, &backhaul, AccessRule::Greedy, power)?;
        let mut trace = vec![current.score.utility];
        let mut iterations = 0;
        for it in 1..=self.cfg.max_outer_iterations {
            iterations = it;
            let before = current.score;

            let candidate = backhaul_associate(self.scenario, &pos, self.cfg.n_max, self.params)?;
            if candidate != backhaul {
                let e = self.evaluate(&pos, &candidate, AccessRule::Greedy, power)?;
                if e.score > current.score {
                    backhaul = candidate;
                    current = e;
                }
            }

            let (moved, value) = self.local_search(&pos, &backhaul, AccessRule::Greedy, power)?;
            if value > current.score {
                pos = moved;
                current = self.evaluate(&pos, &backhaul, AccessRule::Greedy, power)?;
            }
            trace.push(current.score.utility);

            let gain = current.score.utility - before.utility;
            if current.score.served == before.served && gain <= self.cfg.convergence_epsilon * before.utility.abs() {
                break;
            }
        }
        Ok(Outcome { pos, backhaul, eval: current, iterations, trace, polish: Some(power) })
    }

    fn finish(&mut self, kind: SolverKind, mut out: Outcome) -> Result<Solution> {
        if let Some(power) = out.polish {
            let e = self.evaluate(&out.pos, &out.backhaul, AccessRule::Polished, power)?;
            if e.score > out.eval.score {
                out.eval = e;
                if let Some(last) = out.trace.last_mut() {
                    *last = out.eval.score.utility;
                }
            }
        }
        let sc = self.prepare(&out.pos, &out.backhaul)?;
        let net = &self.net;

        let mut pointing = BTreeMap::new();
        let plain = BackhaulNetwork::build(&sc, &out.backhaul, self.params, |_, _| 0.0)?;
        for hop in plain.hops() {
            let Node::Station(child) = hop.to else { continue };
            pointing.insert(child, align_fso(&node_pos(&sc, hop.from)?, &node_pos(&sc, hop.to)?)?);
        }
        // chain rates under the stored pointing (zero misalignment by construction)
        let aligned = BackhaulNetwork::build(&sc, &out.backhaul, self.params, |from, to| {
            let Node::Station(child) = to else { return 0.0 };
            match (pointing.get(&child), node_pos(&sc, from), node_pos(&sc, to)) {
                (Some(v), Ok(a), Ok(b)) => misalignment(*v, &a, &b).unwrap_or(0.0),
                _ => 0.0,
            }
        })?;
        let mut chain_rates = BTreeMap::new();
        for st in net.stations() {
            chain_rates.insert(st.id, aligned.chain_rate(st.id)?);
        }

        let alloc = &out.eval.alloc;
        let rates = alloc.rates(net);
        let mut allocations = Vec::new();
        let mut unserved = Vec::new();
        for (u, user) in net.users().iter().enumerate() {
            match (alloc.station[u], rates[u]) {
                (Some(s), Some(rate)) => allocations.push(UserAllocation {
                    user: user.id,
                    station: net.stations()[s].id,
                    power: alloc.power[u],
                    bandwidth: alloc.bandwidth[u],
                    rate,
                }),
                _ => unserved.push(user.id),
            }
        }

        let mut relay_traces = BTreeMap::new();
        for relay in sc.stations_of(StationKind::Relay) {
            let Some(battery) = relay.battery else { continue };
            let tx: f64 = allocations.iter().filter(|a| a.station == relay.id).map(|a| a.power).sum();
            let cfg = &sc.config;
            relay_traces.insert(relay.id, simulate_relay(&battery, &cfg.energy, cfg.time_slots, tx)?);
        }

        let served_rates: Vec<f64> = allocations.iter().map(|a| a.rate).collect();
        Ok(Solution {
            solver: kind,
            metric: self.metric,
            access: alloc.assignment(net),
            backhaul: out.backhaul,
            hap_positions: out.pos,
            pointing,
            allocations,
            unserved,
            chain_rates,
            relay_traces,
            utility: utility(&served_rates, self.metric)?,
            iterations: out.iterations,
            utility_trace: out.trace,
        })
    }
}

struct Outcome {
    pos: Vec<Position3D>,
    backhaul: BackhaulAssignment,
    eval: Eval,
    iterations: usize,
    trace: Vec<f64>,
    /// Re-associate with the polished greedy under this power rule at the end.
    polish: Option<PowerRule>,
}

fn initial_backhaul(scenario: &Scenario, params: &ChannelParams, cfg: &SolverConfig) -> Result<BackhaulAssignment> {
    backhaul_associate(scenario, &scenario.hap_positions(), cfg.n_max, params)
}

fn bench1_outcome(problem: &mut Problem, scenario: &Scenario, params: &ChannelParams, cfg: &SolverConfig) -> Result<Outcome> {
    problem.block_coordinate(scenario.hap_positions(), initial_backhaul(scenario, params, cfg)?, PowerRule::Uniform)
}

/// Associations and placement optimised by block-coordinate ascent with an
/// equal power split at every station.
pub fn solve_benchmark1(
    scenario: &Scenario,
    params: &ChannelParams,
    cfg: &SolverConfig,
    metric: UtilityMetric,
) -> Result<Solution> {
    let bh = initial_backhaul(scenario, params, cfg)?;
    let mut problem = Problem::new(scenario, params, cfg, metric, &bh)?;
    let out = bench1_outcome(&mut problem, scenario, params, cfg)?;
    problem.finish(SolverKind::Bench1, out)
}

/// Block-coordinate ascent over backhaul association, HAP placement, greedy
/// access association and per-station power allocation.
///
/// Runs twice, once warm-started from the equal-power solver's outcome and
/// once from the low-complexity placement, and keeps the better result.
/// Only improving moves are accepted, so its utility never falls below
/// either of those solvers'.
pub fn solve_approx(
    scenario: &Scenario,
    params: &ChannelParams,
    cfg: &SolverConfig,
    metric: UtilityMetric,
) -> Result<Solution> {
    let bh = initial_backhaul(scenario, params, cfg)?;
    let mut problem = Problem::new(scenario, params, cfg, metric, &bh)?;
    let warm = bench1_outcome(&mut problem, scenario, params, cfg)?;
    let warm_iterations = warm.iterations;
    let mut out = problem.block_coordinate(warm.pos, warm.backhaul, PowerRule::Optimized)?;
    out.iterations += warm_iterations;
    // second start from the clustered placement, so the result also
    // dominates the low-complexity solver
    let pos = clustered_placement(&problem, scenario, cfg);
    let bh = backhaul_associate(scenario, &pos, cfg.n_max, params)?;
    let alt = problem.block_coordinate(pos, bh, PowerRule::Optimized)?;
    if alt.eval.score > out.eval.score {
        let total = out.iterations + alt.iterations;
        out = alt;
        out.iterations = total;
    } else {
        out.iterations += alt.iterations;
    }
    problem.finish(SolverKind::Approx, out)
}

/// One pass: weighted k-means HAP placement (optionally pinning a HAP over
/// the terrestrial box when it is crowded), then backhaul association,
/// greedy access and power allocation.
pub fn solve_lowcomplexity(
    scenario: &Scenario,
    params: &ChannelParams,
    cfg: &SolverConfig,
    metric: UtilityMetric,
) -> Result<Solution> {
    let bh = initial_backhaul(scenario, params, cfg)?;
    let mut problem = Problem::new(scenario, params, cfg, metric, &bh)?;
    let pos = clustered_placement(&problem, scenario, cfg);
    let bh = backhaul_associate(scenario, &pos, cfg.n_max, params)?;
    let eval = problem.evaluate(&pos, &bh, AccessRule::Greedy, PowerRule::Optimized)?;
    let trace = vec![eval.score.utility];
    let polish = Some(PowerRule::Optimized);
    problem.finish(SolverKind::LowComplexity, Outcome { pos, backhaul: bh, eval, iterations: 1, trace, polish })
}

/// Weighted k-means HAP positions: users already covered by a ground
/// station weigh less, and a crowded terrestrial box gets a pinned HAP.
fn clustered_placement(problem: &Problem, scenario: &Scenario, cfg: &SolverConfig) -> Vec<Position3D> {
    let net = &problem.net;
    let ground: Vec<usize> =
        (0..net.stations().len()).filter(|&s| net.stations()[s].kind != StationKind::Hap).collect();
    let points: Vec<(Position3D, f64)> = net
        .users()
        .iter()
        .enumerate()
        .map(|(u, user)| {
            let covered = ground.iter().any(|&s| net.in_range(s, u));
            (user.pos, if covered { cfg.covered_user_weight } else { 1.0 })
        })
        .collect();

    let mut initial = scenario.hap_positions();
    let mut pinned = vec![false; initial.len()];
    if let Some(k) = pin_index(scenario, cfg) {
        let (cx, cy) = scenario.config.subarea1.center();
        initial[k] = Position3D::new(cx, cy, initial[k].z);
        pinned[k] = true;
    }
    if points.iter().any(|(_, w)| *w > 0.0) {
        weighted_kmeans(&points, &initial, &pinned, cfg.kmeans_iterations)
    } else {
        initial
    }
}

/// HAP to pin over the terrestrial box, if the box is crowded: the one
/// initially closest to the box centre.
pub(crate) fn pin_index(scenario: &Scenario, cfg: &SolverConfig) -> Option<usize> {
    let terrestrial = scenario.stations_of(StationKind::Terrestrial).count();
    let box1 = scenario.config.subarea1;
    let crowd = scenario.users.iter().filter(|u| box1.contains(u.pos.x, u.pos.y)).count();
    if terrestrial == 0 || (crowd as f64) / (terrestrial as f64) <= cfg.pin_users_per_station {
        return None;
    }
    let (cx, cy) = box1.center();
    let centre = Position3D::ground(cx, cy);
    scenario
        .haps()
        .enumerate()
        .min_by(|(a, x), (b, y)| x.pos.horizontal_distance(&centre).total_cmp(&y.pos.horizontal_distance(&centre)).then(a.cmp(b)))
        .map(|(k, _)| k)
}

/// Random access and backhaul associations (seeded from the scenario seed),
/// HAP placement optimised against them, equal power split.
pub fn solve_benchmark2(
    scenario: &Scenario,
    params: &ChannelParams,
    cfg: &SolverConfig,
    metric: UtilityMetric,
) -> Result<Solution> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.config.seed ^ 0x5eed_b2b2_0000_0002);
    let bh = random_backhaul(scenario, cfg.n_max, params, &mut rng)?;
    let mut problem = Problem::new(scenario, params, cfg, metric, &bh)?;
    let fixed = random_associate(&problem.net, &mut rng);
    let start = scenario.hap_positions();
    let before = problem.evaluate(&start, &bh, AccessRule::Fixed(&fixed), PowerRule::Uniform)?;
    let (pos, value) = problem.local_search(&start, &bh, AccessRule::Fixed(&fixed), PowerRule::Uniform)?;
    let pos = if value > before.score { pos } else { start };
    let eval = problem.evaluate(&pos, &bh, AccessRule::Fixed(&fixed), PowerRule::Uniform)?;
    let trace = vec![before.score.utility, eval.score.utility];
    problem.finish(SolverKind::Bench2, Outcome { pos, backhaul: bh, eval, iterations: 1, trace, polish: None })
}

/// Runs the named solver.
pub fn solve(
    kind: SolverKind,
    scenario: &Scenario,
    params: &ChannelParams,
    cfg: &SolverConfig,
    metric: UtilityMetric,
) -> Result<Solution> {
    match kind {
        SolverKind::Approx => solve_approx(scenario, params, cfg, metric),
        SolverKind::LowComplexity => solve_lowcomplexity(scenario, params, cfg, metric),
        SolverKind::Bench1 => solve_benchmark1(scenario, params, cfg, metric),
        SolverKind::Bench2 => solve_benchmark2(scenario, params, cfg, metric),
    }
}
