//! HAP transmit power against achieved HAP-user rate for a few backhaul
//! bandwidths, showing where the backhaul caps the gain.
//!
//! cargo run --release --example hap_power_sweep -- [seeds]

use sagin::harness::{run_hap_power_sweep, summarize, Config, ExperimentKind};
use sagin::optimize::SolverKind;

fn main() -> sagin::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/happower.conf");
    let mut spec = Config::load(path)?.spec(ExperimentKind::HapPowerSweep);
    spec.seeds = (1..=seeds).collect();
    spec.solvers = vec![SolverKind::Approx];
    let b0 = spec.b0_values.clone();
    let rows = run_hap_power_sweep(&spec, &b0)?;

    print!("{:>10}", "power_w");
    for b in &b0 {
        print!(" {:>14}", format!("b0={:.0}MHz", b / 1e6));
    }
    println!();
    let summaries = summarize(&rows);
    for &p in &spec.sweep_values {
        print!("{p:>10}");
        for &b in &b0 {
            let s = summaries.iter().find(|s| s.sweep_value == p && s.b0_hz == b).unwrap();
            print!(" {:>14.4e}", s.mean);
        }
        println!();
    }
    Ok(())
}
