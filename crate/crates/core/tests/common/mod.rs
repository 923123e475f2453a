//! Reference computations for the integration tests. Nothing here calls the
//! solver, association or power code it is used to check.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;
use std::path::PathBuf;

use sagin::assoc::{AccessNetwork, BackhaulAssignment, BackhaulParent};
use sagin::channel::{backhaul_chain_rate, db_to_linear, rf_pathloss_db, ChannelParams, LinkClass};
use sagin::model::{Position3D, Scenario, StationKind};

pub fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

/// Sum of per-user rates of an equal-share association, recomputed from the
/// channel gains: a station with `n` users gives each `P/n` over `B/n`, then
/// scales everyone down proportionally if the backhaul chain is short.
///
/// `None` if the association breaks a station's user cap, serves a user
/// below the SNR floor, or leaves a served user under its QoS target.
pub fn equal_share_sum_rate(net: &AccessNetwork, assign: &[Option<usize>]) -> Option<f64> {
    let params = net.params();
    let floor = db_to_linear(params.access_snr_floor_db);
    let n0 = params.rf.noise_density;
    let mut total = 0.0;
    for (s, st) in net.stations().iter().enumerate() {
        let users: Vec<usize> = (0..assign.len()).filter(|&u| assign[u] == Some(s)).collect();
        if users.is_empty() {
            continue;
        }
        if users.len() > st.max_users {
            return None;
        }
        let n = users.len() as f64;
        let mut access = Vec::with_capacity(users.len());
        for &u in &users {
            let full_snr = st.power * net.gain(s, u) / (n0 * st.bandwidth);
            if !(full_snr > 0.0 && full_snr >= floor) {
                return None;
            }
            let (p, b) = (st.power / n, st.bandwidth / n);
            access.push(b * (1.0 + p * net.gain(s, u) / (n0 * b)).log2());
        }
        let demand: f64 = access.iter().sum();
        let scale = if demand > st.chain_rate { st.chain_rate / demand } else { 1.0 };
        for (&u, a) in users.iter().zip(&access) {
            let r = a * scale;
            if r < net.users()[u].qos_min_rate * (1.0 - 1e-12) {
                return None;
            }
            total += r;
        }
    }
    Some(total)
}

/// Exhaustive search over every user-to-station map (unserved allowed).
/// Returns the best sum rate among maps serving the most users, and the
/// best sum rate overall.
pub fn brute_force_association(net: &AccessNetwork) -> (f64, f64) {
    let n_users = net.users().len();
    let choices = net.stations().len() + 1;
    let mut assign = vec![None; n_users];
    // (served, utility) lexicographic, and utility alone
    let mut best = (0usize, 0.0f64);
    let mut best_any = 0.0f64;
    let total = choices.pow(n_users as u32);
    for code in 0..total {
        let mut c = code;
        for a in assign.iter_mut() {
            let k = c % choices;
            c /= choices;
            *a = if k == 0 { None } else { Some(k - 1) };
        }
        if let Some(v) = equal_share_sum_rate(net, &assign) {
            let served = assign.iter().flatten().count();
            if served > best.0 || (served == best.0 && v > best.1) {
                best = (served, v);
            }
            best_any = best_any.max(v);
        }
    }
    (best.1, best_any)
}

/// `sum b_i log2(1 + p_i / n_i)`.
pub fn parallel_sum_rate(p: &[f64], noise: &[f64], bw: &[f64]) -> f64 {
    p.iter().zip(noise).zip(bw).map(|((p, n), b)| b * (1.0 + p / n).log2()).sum()
}

/// Largest relative spread of the KKT conditions of the sum-rate split:
/// every active user has the same marginal `b_i / (n_i + p_i)` and no
/// inactive user's marginal at zero power exceeds it. Also folds in the
/// budget mismatch.
pub fn kkt_violation(p: &[f64], noise: &[f64], bw: &[f64], budget: f64) -> f64 {
    let active: Vec<usize> = (0..p.len()).filter(|&i| p[i] > budget * 1e-12).collect();
    let marg = |i: usize| bw[i] / (noise[i] + p[i]);
    let hi = active.iter().map(|&i| marg(i)).fold(f64::NEG_INFINITY, f64::max);
    let lo = active.iter().map(|&i| marg(i)).fold(f64::INFINITY, f64::min);
    let mut worst = if active.is_empty() { 1.0 } else { (hi - lo) / hi };
    for i in (0..p.len()).filter(|i| !active.contains(i)) {
        if p[i] < 0.0 {
            return f64::INFINITY;
        }
        worst = worst.max((bw[i] / noise[i] - hi) / hi);
    }
    let spent: f64 = p.iter().sum();
    worst.max((spent - budget).abs() / budget)
}

/// Best sum rate with every power a multiple of `budget / levels`, found by
/// handing out quanta one at a time to the largest marginal gain. The
/// objective is separable and concave, so this greedy is exact on the grid.
pub fn grid_sum_rate(budget: f64, noise: &[f64], bw: &[f64], levels: usize) -> f64 {
    let q = budget / levels as f64;
    let mut p = vec![0.0; noise.len()];
    let gain = |i: usize, p: f64| bw[i] * ((1.0 + (p + q) / noise[i]).log2() - (1.0 + p / noise[i]).log2());
    for _ in 0..levels {
        let mut best = 0;
        for i in 1..p.len() {
            if gain(i, p[i]) > gain(best, p[best]) {
                best = i;
            }
        }
        p[best] += q;
    }
    parallel_sum_rate(&p, noise, bw)
}

/// Every way to hand `levels` power quanta to `n` users with at least one
/// each and at most `levels` in total.
pub fn compositions(n: usize, levels: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let still = n - cur.len() - 1;
        for k in 1..=left.saturating_sub(still) {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n <= levels {
        rec(n, levels, &mut Vec::new(), &mut out);
    }
    out
}

/// Exhaustive joint optimum of a scenario whose only access stations are
/// HAPs: every HAP on every point of `grid`, every backhaul parent choice
/// within `n_max`, every user-to-HAP map and every power split on a
/// `levels`-step grid, with equal bandwidth sharing. Sum-rate utility.
///
/// Returns the best utility among configurations serving the most users,
/// and the best utility overall.
pub fn enumerate_joint(
    scenario: &Scenario,
    params: &ChannelParams,
    n_max: usize,
    grid: &[(f64, f64)],
    levels: usize,
) -> (f64, f64) {
    assert!(scenario.stations.iter().all(|s| matches!(s.kind, StationKind::Hap | StationKind::Satellite)));
    let haps: Vec<_> = scenario.haps().map(|h| h.id).collect();
    let alt = scenario.config.hap_altitude;
    let users = &scenario.users;
    let n_users = users.len();
    let mut parents: Vec<BackhaulParent> = scenario.gateways.iter().map(|g| BackhaulParent::Gateway(g.id)).collect();
    if let Some(sat) = scenario.satellite() {
        parents.push(BackhaulParent::Satellite(sat.id));
    }
    let floor = db_to_linear(params.access_snr_floor_db);
    let n0 = params.rf.noise_density;
    let splits: Vec<Vec<Vec<usize>>> = (0..=n_users).map(|n| compositions(n, levels)).collect();

    // best sum rate of one HAP serving the subset `mask` from `pos`
    let station_table = |h: usize, pos: Position3D, chain: f64| -> Vec<f64> {
        let st = scenario.station(haps[h]).unwrap();
        let (power, bw) = (st.peak_power, st.access_bandwidth);
        let gains: Vec<f64> = users
            .iter()
            .map(|u| db_to_linear(-rf_pathloss_db(LinkClass::HapAccess, &pos, &u.pos, &params.rf).unwrap()))
            .collect();
        let max_users = (bw / scenario.config.min_user_bandwidth).floor() as usize;
        let mut table = vec![f64::NEG_INFINITY; 1 << n_users];
        table[0] = 0.0;
        for mask in 1usize..(1 << n_users) {
            let members: Vec<usize> = (0..n_users).filter(|u| mask >> u & 1 == 1).collect();
            if members.len() > max_users || members.iter().any(|&u| power * gains[u] / (n0 * bw) < floor) {
                continue;
            }
            let b = bw / members.len() as f64;
            for split in &splits[members.len()] {
                let access: Vec<f64> = members
                    .iter()
                    .zip(split)
                    .map(|(&u, &k)| b * (1.0 + power * k as f64 / levels as f64 * gains[u] / (n0 * b)).log2())
                    .collect();
                let demand: f64 = access.iter().sum();
                let scale = if demand > chain { chain / demand } else { 1.0 };
                if members.iter().zip(&access).any(|(&u, a)| a * scale < users[u].qos_min_rate * (1.0 - 1e-12)) {
                    continue;
                }
                table[mask] = table[mask].max(demand * scale);
            }
        }
        table
    };

    let mut cache: HashMap<(usize, usize, u64), Vec<f64>> = HashMap::new();
    let mut best = (0u32, 0.0f64);
    let mut best_any = 0.0f64;
    let n_haps = haps.len();
    for place_code in 0..grid.len().pow(n_haps as u32) {
        let place: Vec<usize> = (0..n_haps).map(|h| place_code / grid.len().pow(h as u32) % grid.len()).collect();
        let positions: Vec<Position3D> = place.iter().map(|&g| Position3D::new(grid[g].0, grid[g].1, alt)).collect();
        let moved = scenario.with_hap_positions(&positions);
        for bh_code in 0..parents.len().pow(n_haps as u32) {
            let mut bh = BackhaulAssignment::default();
            for (h, id) in haps.iter().enumerate() {
                bh.hap_parent.insert(*id, parents[bh_code / parents.len().pow(h as u32) % parents.len()]);
            }
            if bh.parent_loads().values().any(|&l| l > n_max) {
                continue;
            }
            let tables: Vec<&Vec<f64>> = {
                for (h, id) in haps.iter().enumerate() {
                    let chain = backhaul_chain_rate(*id, &bh, &moved, params).unwrap();
                    cache.entry((h, place[h], chain.to_bits())).or_insert_with(|| station_table(h, positions[h], chain));
                }
                haps.iter()
                    .enumerate()
                    .map(|(h, id)| {
                        let chain = backhaul_chain_rate(*id, &bh, &moved, params).unwrap();
                        &cache[&(h, place[h], chain.to_bits())]
                    })
                    .collect()
            };
            // every user goes to one HAP or none
            for code in 0..(n_haps + 1).pow(n_users as u32) {
                let mut masks = vec![0usize; n_haps];
                let mut c = code;
                for u in 0..n_users {
                    let k = c % (n_haps + 1);
                    c /= n_haps + 1;
                    if k > 0 {
                        masks[k - 1] |= 1 << u;
                    }
                }
                let v: f64 = masks.iter().enumerate().map(|(h, m)| tables[h][*m]).sum();
                if v == f64::NEG_INFINITY {
                    continue;
                }
                let served = masks.iter().map(|m| m.count_ones()).sum::<u32>();
                if served > best.0 || (served == best.0 && v > best.1) {
                    best = (served, v);
                }
                best_any = best_any.max(v);
            }
        }
    }
    (best.1, best_any)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
