//! Uniform, water-filling and max-min power splits over the same channels.
//!
//! cargo run --example power_allocation

use sagin::channel::shannon;
use sagin::optimize::{allocate_power_maxmin, allocate_power_uniform, allocate_power_waterfill};

fn main() -> sagin::Result<()> {
    let budget = 20.0;
    let bw = [2e6, 2e6, 2e6, 2e6];
    // noise-to-gain ratio per user, W: strong to weak channels
    let noise = [0.5, 2.0, 8.0, 40.0];
    let rates = |p: &[f64]| -> Vec<f64> { p.iter().zip(&noise).zip(&bw).map(|((p, n), b)| shannon(*b, p / n)).collect() };
    let show = |name: &str, p: &[f64]| {
        let r = rates(p);
        let sum: f64 = r.iter().sum();
        let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("{name:<10} power {:?}", p.iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>());
        println!("{:<10} sum {sum:.4e}  min {min:.4e}", "");
    };

    show("uniform", &allocate_power_uniform(budget, noise.len()));
    show("waterfill", &allocate_power_waterfill(budget, &noise, &bw, 1e-12)?);
    let fns: Vec<Box<dyn Fn(f64) -> f64>> =
        noise.iter().zip(&bw).map(|(&n, &b)| Box::new(move |p: f64| shannon(b, p / n)) as Box<dyn Fn(f64) -> f64>).collect();
    let refs: Vec<&dyn Fn(f64) -> f64> = fns.iter().map(|f| f.as_ref()).collect();
    show("max-min", &allocate_power_maxmin(budget, &refs, 1e-9)?);
    Ok(())
}
