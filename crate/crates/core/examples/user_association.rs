//! Greedy user association on a fixed HAP layout versus a random one.
//!
//! cargo run --release --example user_association -- [users] [seed]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sagin::assoc::{access_associate_greedy, backhaul_associate, random_associate, AccessNetwork, Allocation};
use sagin::channel::{BackhaulNetwork, ChannelParams};
use sagin::model::{generate_scenario, utility, ScenarioConfig, UtilityMetric};

fn main() -> sagin::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = ScenarioConfig {
        user_count: args.first().copied().unwrap_or(150) as usize,
        seed: args.get(1).copied().unwrap_or(1),
        ..Default::default()
    };
    let sc = generate_scenario(&cfg)?;
    let params = ChannelParams::default();
    let bh = backhaul_associate(&sc, &sc.hap_positions(), 3, &params)?;
    let net = AccessNetwork::build(&sc, &BackhaulNetwork::build(&sc, &bh, &params, |_, _| 0.0)?, &params)?;

    let report = |name: &str, station: Vec<Option<usize>>| -> sagin::Result<()> {
        let alloc = Allocation::uniform(&net, station);
        let rates: Vec<f64> = alloc.rates(&net).into_iter().flatten().collect();
        let mut load = vec![0usize; net.stations().len()];
        for s in alloc.station.iter().flatten() {
            load[*s] += 1;
        }
        println!("{name:<7} served {:>4}/{}  sum rate {:.4e}  load per station {load:?}", rates.len(), net.users().len(), utility(&rates, UtilityMetric::SumRate)?);
        Ok(())
    };

    let greedy = access_associate_greedy(&net, UtilityMetric::SumRate);
    report("greedy", Allocation::from_assignment(&net, &greedy)?)?;
    report("random", random_associate(&net, &mut ChaCha8Rng::seed_from_u64(cfg.seed)))?;
    Ok(())
}
