//! RF and FSO link budgets over distance, and the effect of FSO pointing error.
//!
//! cargo run --example link_budget

use sagin::channel::{fso_rate, rf_pathloss_db, rf_rate, ChannelParams, LinkClass};
use sagin::model::Position3D;

fn main() -> sagin::Result<()> {
    let params = ChannelParams::default();
    let ground = Position3D::new(0.0, 0.0, 0.0);

    println!("{:>8} {:>12} {:>14} {:>14}", "dx_km", "hap_pl_db", "hap_rate_bps", "fso_rate_bps");
    for dx in [0.0, 5.0, 10.0, 20.0, 40.0, 80.0] {
        let hap = Position3D::new(dx, 0.0, 18.0);
        let pl = rf_pathloss_db(LinkClass::HapAccess, &hap, &ground, &params.rf)?;
        let rate = rf_rate(1e6, 1.0, pl, &params.rf)?;
        let gw = Position3D::new(dx, 0.0, 0.0);
        let fso = fso_rate(&gw, &Position3D::new(0.0, 0.0, 18.0), 0.0, &params.fso)?;
        println!("{dx:>8.1} {pl:>12.2} {rate:>14.4e} {fso:>14.4e}");
    }

    println!("\nterrestrial access, 1 W over 1 MHz");
    let bs = Position3D::new(0.0, 0.0, 0.03);
    for d in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let pl = rf_pathloss_db(LinkClass::TerrestrialAccess, &bs, &Position3D::new(d, 0.0, 0.0), &params.rf)?;
        println!("  {d:>5.1} km: {pl:7.2} dB, {:.4e} bit/s", rf_rate(1e6, 1.0, pl, &params.rf)?);
    }

    println!("\nFSO gateway to HAP at 30 km slant, by pointing error");
    let (tx, rx) = (Position3D::new(0.0, 0.0, 0.0), Position3D::new(24.0, 0.0, 18.0));
    for err in [0.0, 1e-6, 5e-6, 1e-5, 2e-5] {
        println!("  {err:>8.1e} rad: {:.4e} bit/s", fso_rate(&tx, &rx, err, &params.fso)?);
    }
    Ok(())
}
