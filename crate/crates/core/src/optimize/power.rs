//! Per-station transmit power splits.

use crate::assoc::AccessNetwork;
use crate::error::{Error, Result};
use crate::model::UtilityMetric;

/// Equal split of `budget` over `n` users.
pub fn allocate_power_uniform(budget: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    vec![budget / n as f64; n]
}

fn check_inputs(budget: f64, noise: &[f64]) -> Result<()> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::domain(format!("power budget must be positive, got {budget}")));
    }
    if let Some(n) = noise.iter().find(|n| !(n.is_finite() && **n > 0.0)) {
        return Err(Error::domain(format!("effective noise must be positive, got {n}")));
    }
    Ok(())
}

/// Sum-rate optimal split of `budget` over parallel channels.
///
/// Maximises `sum b_i log2(1 + p_i / noise_i)`. The optimum is
/// `p_i = max(0, mu * b_i / mean(b) - noise_i)`; the water level `mu` is found
/// by bisection until the allocation sums to `budget` within `tolerance` W.
pub fn allocate_power_waterfill(budget: f64, effective_noise: &[f64], bandwidths: &[f64], tolerance: f64) -> Result<Vec<f64>> {
    if effective_noise.len() != bandwidths.len() {
        return Err(Error::domain("one bandwidth per user is required"));
    }
    if bandwidths.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::domain("bandwidths must be positive"));
    }
    let mean = bandwidths.iter().sum::<f64>() / bandwidths.len().max(1) as f64;
    let weights: Vec<f64> = bandwidths.iter().map(|b| b / mean).collect();
    waterfill_floored(budget, effective_noise, &weights, &vec![0.0; weights.len()], tolerance)
}

/// Weighted water-filling with per-user power floors:
/// `p_i = max(floor_i, mu * w_i - noise_i)` with `sum p_i = budget`.
pub(crate) fn waterfill_floored(
    budget: f64,
    noise: &[f64],
    weights: &[f64],
    floors: &[f64],
    tolerance: f64,
) -> Result<Vec<f64>> {
    check_inputs(budget, noise)?;
    if noise.is_empty() {
        return Ok(Vec::new());
    }
    let floor_sum: f64 = floors.iter().sum();
    if floor_sum > budget * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("power floors need {floor_sum} W, budget is {budget} W")));
    }
    let alloc = |mu: f64| -> Vec<f64> {
        noise.iter().zip(weights).zip(floors).map(|((n, w), f)| (mu * w - n).max(*f)).collect()
    };
    let total = |mu: f64| -> f64 { alloc(mu).iter().sum() };

    // at mu_hi every user is above its floor and the total exceeds the budget
    let mut lo = 0.0;
    let mut hi = noise
        .iter()
        .zip(weights)
        .zip(floors)
        .map(|((n, w), f)| (n + f + budget) / w)
        .fold(0.0, f64::max);
    let tol = tolerance.max(budget * 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
        if (total(hi) - total(lo)).abs() <= tol * 1e-3 || hi - lo <= hi * 1e-16 {
            break;
        }
    }
    let mut p = alloc(lo);
    // hand the residual (below tolerance) to the active users so the budget is met
    let active: Vec<usize> = (0..p.len()).filter(|&i| p[i] > floors[i]).collect();
    let residual = budget - p.iter().sum::<f64>();
    if !active.is_empty() && residual > 0.0 {
        let wsum: f64 = active.iter().map(|&i| weights[i]).sum();
        for &i in &active {
            p[i] += residual * weights[i] / wsum;
        }
    }
    Ok(p)
}

/// Max-min split: the largest common rate `r` such that the powers needed
/// to reach it fit in `budget`, found by bisection on `r`. Each rate
/// function must be continuous, increasing and zero at zero power.
pub fn allocate_power_maxmin(budget: f64, rate_fns: &[&dyn Fn(f64) -> f64], tolerance: f64) -> Result<Vec<f64>> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::domain(format!("power budget must be positive, got {budget}")));
    }
    if rate_fns.is_empty() {
        return Ok(Vec::new());
    }
    let tol = tolerance.max(budget * 1e-15);
    // smallest power reaching rate r, by bisection; None if beyond budget
    let needed = |f: &dyn Fn(f64) -> f64, r: f64| -> Option<f64> {
        if f(budget) < r {
            return None;
        }
        let (mut lo, mut hi) = (0.0, budget);
        while hi - lo > tol * 1e-3 {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= r {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    };
    let powers_for = |r: f64| -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(rate_fns.len());
        let mut sum = 0.0;
        for f in rate_fns {
            let p = needed(*f, r)?;
            sum += p;
            if sum > budget {
                return None;
            }
            out.push(p);
        }
        Some(out)
    };
    let mut lo = 0.0;
    let mut hi = rate_fns.iter().map(|f| f(budget)).fold(f64::INFINITY, f64::min);
    let mut best = vec![0.0; rate_fns.len()];
    for _ in 0..200 {
        if hi - lo <= hi * 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match powers_for(mid) {
            Some(p) => {
                lo = mid;
                best = p;
            }
            None => hi = mid,
        }
    }
    Ok(best)
}

/// Metric value of one station's users, in the additive form the greedy
/// uses: sum of rates, sum of log rates, or the minimum.
fn station_value(rates: &[f64], metric: UtilityMetric) -> f64 {
    match metric {
        UtilityMetric::SumRate => rates.iter().sum(),
        UtilityMetric::ProportionalFair => rates.iter().map(|r| r.ln()).sum(),
        UtilityMetric::MinRate => rates.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

fn improves(new: f64, old: f64) -> bool {
    new > old + old.abs() * 1e-12
}

/// Optimised powers for one station's users at an equal bandwidth split.
///
/// Starts from the uniform split and only moves away from it when the
/// station's contribution to the metric improves and every user stays at or
/// above its QoS target after the backhaul share is applied.
pub(crate) fn optimize_station(
    net: &AccessNetwork,
    s: usize,
    users: &[usize],
    metric: UtilityMetric,
    tolerance: f64,
) -> Vec<f64> {
    let st = &net.stations()[s];
    let n = users.len();
    let uniform = allocate_power_uniform(st.power, n);
    if n <= 1 || st.power <= 0.0 {
        return uniform;
    }
    let b = st.bandwidth / n as f64;
    let bw = vec![b; n];
    let noise: Vec<f64> = users.iter().map(|&u| net.effective_noise(s, u, b)).collect();
    let qos: Vec<f64> = users.iter().map(|&u| net.users()[u].qos_min_rate).collect();
    let eval = |p: &[f64]| -> Option<f64> {
        let rates = net.station_rates(s, users, p, &bw);
        if rates.iter().zip(&qos).any(|(r, q)| *r < q * (1.0 - 1e-9)) {
            return None;
        }
        Some(station_value(&rates, metric))
    };
    let Some(base) = eval(&uniform) else { return uniform };
    let access_sum = |p: &[f64]| -> f64 { users.iter().zip(p).map(|(&u, &pw)| net.access_rate(s, u, pw, b)).sum() };
    let floors: Vec<f64> = noise.iter().zip(&qos).map(|(nz, q)| nz * ((q / b).exp2() - 1.0)).collect();

    let mut best = uniform;
    let mut best_value = base;
    let consider = |cand: Vec<f64>, best: &mut Vec<f64>, best_value: &mut f64| {
        if let Some(v) = eval(&cand) {
            if improves(v, *best_value) {
                *best = cand;
                *best_value = v;
            }
        }
    };
    match metric {
        UtilityMetric::SumRate => {
            // a saturated backhaul caps the sum whatever the split
            if access_sum(&best) >= st.chain_rate {
                return best;
            }
            if let Ok(p) = waterfill_floored(st.power, &noise, &vec![1.0; n], &floors, tolerance) {
                consider(p, &mut best, &mut best_value);
            }
        }
        UtilityMetric::MinRate => {
            let fns: Vec<Box<dyn Fn(f64) -> f64 + '_>> = users
                .iter()
                .map(|&u| Box::new(move |p: f64| net.access_rate(s, u, p, b)) as Box<dyn Fn(f64) -> f64>)
                .collect();
            let refs: Vec<&dyn Fn(f64) -> f64> = fns.iter().map(|f| f.as_ref()).collect();
            if let Ok(p) = allocate_power_maxmin(st.power, &refs, tolerance) {
                consider(p, &mut best, &mut best_value);
            }
        }
        UtilityMetric::ProportionalFair => {
            // reweighted water-filling on the log-rate surrogate
            let mut current = best.clone();
            for _ in 0..8 {
                let weights: Vec<f64> = users
                    .iter()
                    .zip(&current)
                    .map(|(&u, &p)| 1.0 / net.access_rate(s, u, p, b).max(1e-9))
                    .collect();
                let mean = weights.iter().sum::<f64>() / n as f64;
                let w: Vec<f64> = weights.iter().map(|x| x / mean).collect();
                match waterfill_floored(st.power, &noise, &w, &floors, tolerance) {
                    Ok(p) => {
                        current = p.clone();
                        consider(p, &mut best, &mut best_value);
                    }
                    Err(_) => break,
                }
            }
        }
    }
    best
}
