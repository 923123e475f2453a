//! A day of relay battery operation under the half-sine harvest profile.
//!
//! cargo run --example relay_battery -- [transmit_power_w] [initial_fraction]

use sagin::energy::{harvest, simulate_relay, sustainable_power, BatteryState, EnergyConfig};

fn main() -> sagin::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = EnergyConfig { initial_fraction: args.get(1).copied().unwrap_or(0.8), ..Default::default() };
    let start = BatteryState::new(cfg.capacity_j, cfg.capacity_j * cfg.initial_fraction);
    let slots = 24;

    let best = sustainable_power(&start, &cfg, slots, 4.0);
    println!("largest constant transmit power over {slots} slots: {best:.4} W");
    let power = args.first().copied().unwrap_or(best);

    match simulate_relay(&start, &cfg, slots, power) {
        Ok(trace) => {
            println!("{:>4} {:>10} {:>10} {:>12}", "slot", "harvest_j", "used_j", "stored_j");
            for t in 0..slots as usize {
                println!("{t:>4} {:>10.0} {:>10.0} {:>12.0}", trace.harvested[t], trace.consumed[t], trace.states[t + 1].stored);
            }
        }
        Err(e) => println!("{power} W is not sustainable: {e}"),
    }
    let daily: f64 = (0..slots).map(|t| harvest(&cfg.profile, t)).sum();
    println!("harvest per day {daily:.0} J");
    Ok(())
}
