use std::cmp::Ordering;

use crate::model::UtilityMetric;

use super::network::{AccessNetwork, Allocation};
use super::AccessAssignment;

/// Running totals of one station under equal power and bandwidth sharing.
///
/// With `n` users each gets `P/n` over `B/n`, so every user keeps its
/// full-power SNR and an access rate of `se * B/n`. The backhaul cap then
/// scales all of them by the same factor, so each effective rate is
/// `se * k` with `k = min(B/n, C/sum_se)`.
#[derive(Debug, Clone, Copy)]
struct Load {
    n: usize,
    sum_se: f64,
    sum_ln_se: f64,
    min_se: f64,
    /// Smallest se/qos among users with a positive QoS target.
    min_ratio: f64,
}

impl Load {
    const EMPTY: Load = Load { n: 0, sum_se: 0.0, sum_ln_se: 0.0, min_se: f64::INFINITY, min_ratio: f64::INFINITY };

    fn with(self, se: f64, qos: f64) -> Load {
        Load {
            n: self.n + 1,
            sum_se: self.sum_se + se,
            sum_ln_se: self.sum_ln_se + se.ln(),
            min_se: self.min_se.min(se),
            min_ratio: if qos > 0.0 { self.min_ratio.min(se / qos) } else { self.min_ratio },
        }
    }

    fn scale(&self, bandwidth: f64, chain: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (bandwidth / self.n as f64).min(chain / self.sum_se)
    }

    fn feasible(&self, bandwidth: f64, chain: f64) -> bool {
        let k = self.scale(bandwidth, chain);
        k > 0.0 && (self.min_ratio.is_infinite() || k * self.min_ratio >= 1.0 - 1e-12)
    }

    /// Contribution to the metric's additive form: sum of rates, sum of log
    /// rates, or the station minimum.
    fn value(&self, metric: UtilityMetric, bandwidth: f64, chain: f64) -> f64 {
        if self.n == 0 {
            return match metric {
                UtilityMetric::MinRate => f64::INFINITY,
                _ => 0.0,
            };
        }
        let k = self.scale(bandwidth, chain);
        match metric {
            UtilityMetric::SumRate => (bandwidth / self.n as f64 * self.sum_se).min(chain),
            UtilityMetric::ProportionalFair => self.sum_ln_se + self.n as f64 * k.ln(),
            UtilityMetric::MinRate => self.min_se * k,
        }
    }
}

/// Best admissible candidate of one station.
#[derive(Debug, Clone, Copy)]
struct Pick {
    user: usize,
    se: f64,
    /// Gain in the station's additive value (sum, log-sum), or the station's
    /// new minimum rate for max-min.
    score: f64,
}

fn better(a: (f64, f64, usize), b: (f64, f64, usize)) -> bool {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(b.2.cmp(&a.2)) == Ordering::Greater
}

/// Admission-first greedy association under equal power and bandwidth sharing.
///
/// Each step admits the (user, station) pair that keeps every admitted user
/// at or above its QoS target, fits the station's user cap, and most improves
/// the utility. Ties go to the higher spectral efficiency, then the lower user
/// index. When no admissible pair is left, two kinds of moves run while
/// they raise the utility: a served user changes station, or a user takes
/// a place at a station while one of its users moves on to a third.
/// Admission resumes after every round of moves.
pub fn access_associate_greedy(net: &AccessNetwork, metric: UtilityMetric) -> AccessAssignment {
    Allocation { station: polished_indices(net, metric), power: Vec::new(), bandwidth: Vec::new() }.assignment(net)
}

/// Admission only, without the move passes; cheap enough for placement search.
pub(crate) fn greedy_indices(net: &AccessNetwork, metric: UtilityMetric) -> Vec<Option<usize>> {
    greedy_with(net, metric, metric != UtilityMetric::SumRate, false)
}

pub(crate) fn polished_indices(net: &AccessNetwork, metric: UtilityMetric) -> Vec<Option<usize>> {
    greedy_with(net, metric, metric != UtilityMetric::SumRate, true)
}

/// `full_scan` disables the early exit that is valid for sum-rate only.
fn greedy_with(net: &AccessNetwork, metric: UtilityMetric, full_scan: bool, moves: bool) -> Vec<Option<usize>> {
    let mut assigned: Vec<Option<usize>> = vec![None; net.users().len()];
    admit(net, metric, full_scan, &mut assigned);
    if !moves {
        return assigned;
    }
    for _ in 0..MAX_ROUNDS {
        let moved = relocate(net, metric, &mut assigned) || eject(net, metric, &mut assigned);
        if !moved {
            break;
        }
        admit(net, metric, full_scan, &mut assigned);
    }
    assigned
}

/// Station loads plus member lists, with O(1) removal unless the removed
/// user holds one of the station minima.
struct Stations<'a> {
    net: &'a AccessNetwork,
    metric: UtilityMetric,
    loads: Vec<Load>,
    members: Vec<Vec<usize>>,
}

impl<'a> Stations<'a> {
    fn new(net: &'a AccessNetwork, metric: UtilityMetric, assigned: &[Option<usize>]) -> Self {
        let mut members = vec![Vec::new(); net.stations().len()];
        for (u, s) in assigned.iter().enumerate() {
            if let Some(s) = *s {
                members[s].push(u);
            }
        }
        Self { net, metric, loads: loads_of(net, assigned), members }
    }

    fn value(&self, l: &Load, s: usize) -> f64 {
        let st = &self.net.stations()[s];
        l.value(self.metric, st.bandwidth, st.chain_rate)
    }

    fn plus(&self, l: Load, s: usize, u: usize) -> Option<Load> {
        let st = &self.net.stations()[s];
        if !self.net.in_range(s, u) || l.n >= st.max_users {
            return None;
        }
        let grown = l.with(self.net.se(s, u), self.net.users()[u].qos_min_rate);
        grown.feasible(st.bandwidth, st.chain_rate).then_some(grown)
    }

    fn minus(&self, s: usize, v: usize) -> Load {
        let l = self.loads[s];
        let se = self.net.se(s, v);
        let qos = self.net.users()[v].qos_min_rate;
        let holds_min = se <= l.min_se || (qos > 0.0 && se / qos <= l.min_ratio);
        if !holds_min {
            return Load { n: l.n - 1, sum_se: l.sum_se - se, sum_ln_se: l.sum_ln_se - se.ln(), ..l };
        }
        let mut rest = Load::EMPTY;
        for &w in self.members[s].iter().filter(|&&w| w != v) {
            rest = rest.with(self.net.se(s, w), self.net.users()[w].qos_min_rate);
        }
        rest
    }

    /// Metric change when the listed stations take the listed new loads;
    /// with `strict`, anything short of an improvement is `-inf`.
    fn delta(&self, changes: &[(usize, Load)], strict: bool) -> f64 {
        if self.metric == UtilityMetric::MinRate {
            let at = |t: usize| changes.iter().rev().find(|(s, _)| *s == t).map(|(_, l)| *l).unwrap_or(self.loads[t]);
            let (mut before, mut after) = (f64::INFINITY, f64::INFINITY);
            for t in 0..self.loads.len() {
                before = before.min(self.value(&self.loads[t], t));
                after = after.min(self.value(&at(t), t));
            }
            return if !strict || improves(after, before) { after - before } else { f64::NEG_INFINITY };
        }
        let before: f64 = changes.iter().map(|(s, _)| self.value(&self.loads[*s], *s)).sum();
        let after: f64 = changes.iter().map(|(s, l)| self.value(l, *s)).sum();
        if !strict || improves(after, before) {
            after - before
        } else {
            f64::NEG_INFINITY
        }
    }

    fn apply(&mut self, assigned: &mut [Option<usize>], moves: &[(usize, usize)]) {
        for &(u, to) in moves {
            if let Some(from) = assigned[u] {
                self.loads[from] = self.minus(from, u);
                self.members[from].retain(|&w| w != u);
            }
            self.loads[to] = self.loads[to].with(self.net.se(to, u), self.net.users()[u].qos_min_rate);
            self.members[to].push(u);
            assigned[u] = Some(to);
        }
    }
}

/// Two-step moves: user `u` (served or not) joins station `t` and one of
/// `t`'s users moves to another station. Served users stay served, so an
/// unserved `u` raises the served count. Returns whether anything moved.
fn eject(net: &AccessNetwork, metric: UtilityMetric, assigned: &mut [Option<usize>]) -> bool {
    let n_st = net.stations().len();
    let mut st = Stations::new(net, metric, assigned);
    let mut moved = false;
    for _ in 0..MAX_SWEEPS {
        let mut any = false;
        for u in 0..assigned.len() {
            let from = assigned[u];
            let rest = from.map(|f| st.minus(f, u));
            // best (gain, t, v, t2) for u; any admission beats every move
            let mut best: Option<(f64, usize, usize, usize)> = None;
            for t in (0..n_st).filter(|&t| Some(t) != from && net.in_range(t, u)) {
                for &v in &st.members[t] {
                    let Some(into_t) = st.plus(st.minus(t, v), t, u) else { continue };
                    for t2 in (0..n_st).filter(|&t2| t2 != t) {
                        let base = if Some(t2) == from { rest.unwrap() } else { st.loads[t2] };
                        let Some(into_t2) = st.plus(base, t2, v) else { continue };
                        let mut changes = vec![(t, into_t), (t2, into_t2)];
                        if let (Some(f), Some(r)) = (from, rest) {
                            if f != t2 {
                                changes.push((f, r));
                            }
                        }
                        let gain = st.delta(&changes, from.is_some());
                        if (from.is_none() || gain > 0.0) && best.is_none_or(|b| gain > b.0) {
                            best = Some((gain, t, v, t2));
                        }
                    }
                }
            }
            if let Some((_, t, v, t2)) = best {
                st.apply(assigned, &[(v, t2), (u, t)]);
                any = true;
            }
        }
        if !any {
            break;
        }
        moved = true;
    }
    moved
}

const MAX_ROUNDS: usize = 8;
const MAX_SWEEPS: usize = 20;

fn loads_of(net: &AccessNetwork, assigned: &[Option<usize>]) -> Vec<Load> {
    let mut loads = vec![Load::EMPTY; net.stations().len()];
    for (u, s) in assigned.iter().enumerate() {
        if let Some(s) = *s {
            loads[s] = loads[s].with(net.se(s, u), net.users()[u].qos_min_rate);
        }
    }
    loads
}

/// Moves single served users to other in-range stations while the utility
/// strictly improves. Returns whether anything moved.
fn relocate(net: &AccessNetwork, metric: UtilityMetric, assigned: &mut [Option<usize>]) -> bool {
    let mut st = Stations::new(net, metric, assigned);
    let mut moved = false;
    for _ in 0..MAX_SWEEPS {
        let mut any = false;
        for u in 0..assigned.len() {
            let Some(from) = assigned[u] else { continue };
            let rest = st.minus(from, u);
            let mut best: Option<(f64, usize)> = None;
            for to in (0..st.loads.len()).filter(|&t| t != from) {
                let Some(grown) = st.plus(st.loads[to], to, u) else { continue };
                let gain = st.delta(&[(from, rest), (to, grown)], true);
                if gain > 0.0 && best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, to));
                }
            }
            if let Some((_, to)) = best {
                st.apply(assigned, &[(u, to)]);
                any = true;
            }
        }
        if !any {
            break;
        }
        moved = true;
    }
    moved
}

fn improves(new: f64, old: f64) -> bool {
    new > old + old.abs() * 1e-12
}

/// Greedy admission on top of an existing assignment.
fn admit(net: &AccessNetwork, metric: UtilityMetric, full_scan: bool, assigned: &mut [Option<usize>]) {
    let stations = net.stations();
    let users = net.users();
    let mut loads = loads_of(net, assigned);

    // candidates per station, best spectral efficiency first
    let mut cands: Vec<Vec<usize>> = (0..stations.len())
        .map(|s| {
            let mut c: Vec<usize> = (0..users.len()).filter(|&u| net.in_range(s, u)).collect();
            c.sort_by(|&a, &b| net.se(s, b).total_cmp(&net.se(s, a)).then(a.cmp(&b)));
            c
        })
        .collect();
    let mut head = vec![0usize; stations.len()];

    let rescan = |s: usize, loads: &[Load], assigned: &[Option<usize>], cands: &mut Vec<usize>, head: &mut usize| {
        let st = &stations[s];
        let load = loads[s];
        if load.n >= st.max_users {
            cands.clear();
            *head = 0;
            return None;
        }
        let before = load.value(metric, st.bandwidth, st.chain_rate);
        let evaluate = |u: usize| -> Option<Pick> {
            let se = net.se(s, u);
            let next = load.with(se, users[u].qos_min_rate);
            if !next.feasible(st.bandwidth, st.chain_rate) {
                return None;
            }
            let after = next.value(metric, st.bandwidth, st.chain_rate);
            let score = if metric == UtilityMetric::MinRate { after } else { after - before };
            Some(Pick { user: u, se, score })
        };
        if !full_scan {
            // Feasibility only tightens as a station fills and the sum-rate
            // gain is monotone in se, so the first live candidate wins and
            // anything skipped on the way is dead for good.
            while *head < cands.len() {
                let u = cands[*head];
                if assigned[u].is_none() {
                    if let Some(p) = evaluate(u) {
                        return Some(p);
                    }
                }
                *head += 1;
            }
            return None;
        }
        let mut best: Option<Pick> = None;
        cands.retain(|&u| {
            if assigned[u].is_some() {
                return false;
            }
            match evaluate(u) {
                None => false,
                Some(p) => {
                    if best.is_none_or(|b| better((p.score, p.se, p.user), (b.score, b.se, b.user))) {
                        best = Some(p);
                    }
                    true
                }
            }
        });
        best
    };

    let mut picks: Vec<Option<Pick>> = (0..stations.len())
        .map(|s| rescan(s, &loads, assigned, &mut cands[s], &mut head[s]))
        .collect();

    loop {
        // the two smallest station minima, for max-min comparisons
        let (mut m1, mut m1_at, mut m2) = (f64::INFINITY, usize::MAX, f64::INFINITY);
        if metric == UtilityMetric::MinRate {
            for (s, l) in loads.iter().enumerate() {
                let v = l.value(metric, stations[s].bandwidth, stations[s].chain_rate);
                if v < m1 {
                    m2 = m1;
                    m1 = v;
                    m1_at = s;
                } else if v < m2 {
                    m2 = v;
                }
            }
        }
        let mut chosen: Option<(usize, Pick, f64)> = None;
        for (s, pick) in picks.iter().enumerate() {
            let Some(p) = pick else { continue };
            let primary = if metric == UtilityMetric::MinRate {
                let others = if s == m1_at { m2 } else { m1 };
                others.min(p.score)
            } else {
                p.score
            };
            let take = match &chosen {
                None => true,
                Some((_, c, cp)) => {
                    let a = (primary, p.score, p.se, p.user);
                    let b = (*cp, c.score, c.se, c.user);
                    a.0.total_cmp(&b.0)
                        .then(a.1.total_cmp(&b.1))
                        .then(a.2.total_cmp(&b.2))
                        .then(b.3.cmp(&a.3))
                        == Ordering::Greater
                }
            };
            if take {
                chosen = Some((s, *p, primary));
            }
        }
        let Some((s, p, _)) = chosen else { break };
        assigned[p.user] = Some(s);
        loads[s] = loads[s].with(p.se, users[p.user].qos_min_rate);
        for t in 0..stations.len() {
            if t == s || picks[t].is_some_and(|q| q.user == p.user) {
                picks[t] = rescan(t, &loads, assigned, &mut cands[t], &mut head[t]);
            }
        }
    }
}
