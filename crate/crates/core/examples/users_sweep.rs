//! A reduced users sweep through the experiment harness, with its report.
//!
//! cargo run --release --example users_sweep -- [seeds]

use sagin::harness::{render_report, run_users_sweep, Config, ExperimentKind};

fn main() -> sagin::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.conf");
    let mut spec = Config::load(path)?.spec(ExperimentKind::UsersSweep);
    spec.sweep_values = vec![50.0, 200.0, 400.0];
    spec.seeds = (1..=seeds).collect();
    let rows = run_users_sweep(&spec)?;
    print!("{}", render_report(&rows));
    Ok(())
}
