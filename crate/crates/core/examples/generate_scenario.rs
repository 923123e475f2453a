//! Generates a scenario, validates it and prints an inventory.
//!
//! cargo run --example generate_scenario -- [users] [seed]

use std::collections::BTreeMap;

use sagin::model::{generate_scenario, validate_scenario, ScenarioConfig};

fn main() -> sagin::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = ScenarioConfig {
        user_count: args.first().copied().unwrap_or(200) as usize,
        seed: args.get(1).copied().unwrap_or(1),
        ..Default::default()
    };
    let sc = generate_scenario(&cfg)?;

    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for st in &sc.stations {
        *kinds.entry(st.kind.to_string()).or_default() += 1;
    }
    println!("{} users, {} gateways, stations {kinds:?}", sc.users.len(), sc.gateways.len());

    let mut per_box = [0usize; 3];
    for u in &sc.users {
        let i = if cfg.subarea1.contains(u.pos.x, u.pos.y) {
            0
        } else if cfg.subarea2.contains(u.pos.x, u.pos.y) {
            1
        } else {
            2
        };
        per_box[i] += 1;
    }
    println!("users per subarea (terrestrial, relay, rest): {per_box:?}, expected {:?}", cfg.subarea_user_counts());
    for st in &sc.stations {
        println!("  {} {:<11} at ({:6.1}, {:6.1}, {:5.1}) km", st.id, st.kind.to_string(), st.pos.x, st.pos.y, st.pos.z);
    }

    let violations = validate_scenario(&sc);
    println!("validation: {}", if violations.is_empty() { "ok".to_string() } else { format!("{violations:?}") });
    Ok(())
}
