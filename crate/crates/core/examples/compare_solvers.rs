//! Runs all four solvers on one generated scenario and prints a summary.
//!
//! cargo run --release --example compare_solvers -- [users] [seed] [b0_hz]

use std::time::Instant;

use sagin::channel::ChannelParams;
use sagin::model::{generate_scenario, ScenarioConfig, UtilityMetric};
use sagin::optimize::{solve, SolverConfig, SolverKind};

fn main() -> sagin::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(default);
    let cfg = ScenarioConfig {
        user_count: arg(0, 200.0) as usize,
        seed: arg(1, 1.0) as u64,
        backhaul_bandwidth: arg(2, 20e6),
        ..Default::default()
    };
    let scenario = generate_scenario(&cfg)?;
    let params = ChannelParams::default();
    let solver = SolverConfig::default();

    println!("{:<14} {:>14} {:>14} {:>7} {:>6} {:>9}", "solver", "utility", "avg_rate", "served", "iters", "ms");
    for kind in SolverKind::ALL {
        let start = Instant::now();
        let sol = solve(kind, &scenario, &params, &solver, UtilityMetric::SumRate)?;
        println!(
            "{:<14} {:>14.4e} {:>14.4e} {:>7} {:>6} {:>9.1}",
            kind.name(),
            sol.utility,
            sol.avg_rate_per_user(),
            sol.served(),
            sol.iterations,
            start.elapsed().as_secs_f64() * 1e3
        );
    }
    Ok(())
}
