//! Solves one scenario, writes the solution as JSON and reads it back.
//!
//! cargo run --release --example solution_json -- [out.json]

use sagin::channel::ChannelParams;
use sagin::model::{generate_scenario, ScenarioConfig, UtilityMetric};
use sagin::optimize::{solve, Solution, SolverConfig, SolverKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "solution.json".into());
    let sc = generate_scenario(&ScenarioConfig { user_count: 60, seed: 4, ..Default::default() })?;
    let sol = solve(SolverKind::LowComplexity, &sc, &ChannelParams::default(), &SolverConfig::default(), UtilityMetric::SumRate)?;
    let text = sol.to_json();
    std::fs::write(&out, &text)?;

    let back = Solution::from_json(&std::fs::read_to_string(&out)?)?;
    assert_eq!(back, sol);
    println!("wrote {} bytes to {out}; round trip exact", text.len());
    println!("served {} of {}, utility {:.4e}", back.served(), sc.users.len(), back.utility);
    for (h, p) in back.hap_positions.iter().enumerate() {
        println!("  HAP {h} at ({:.1}, {:.1}) km", p.x, p.y);
    }
    for (st, parent) in &back.backhaul.hap_parent {
        println!("  {st} fed by {parent:?}, chain {:.4e} bit/s", back.chain_rates.get(st).copied().unwrap_or(0.0));
    }
    Ok(())
}
