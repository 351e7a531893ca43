//! Fuel, efficiency and turbine curves of the campus plant.
//!
//! ```bash
//! cargo run --example component_models
//! ```

use chp_morl::grid::{boiler_fuel, chp_efficiency, chp_power_fuel, chp_steam_fuel, steam_turbine_power, MicrogridConfig};

fn main() -> chp_morl::Result<()> {
    let plant = MicrogridConfig::campus_winter();

    for (i, chp) in plant.chp.iter().enumerate() {
        println!("CHP{}", i + 1);
        println!("{:>8} {:>10} {:>12}", "kW", "eta", "dth/h");
        for p in [12000.0, 13000.0, 14000.0, 15000.0, 16000.0] {
            println!("{p:>8.0} {:>10.6} {:>12.4}", chp_efficiency(p, chp)?, chp_power_fuel(p, chp)?);
        }
        // Steam below this level rides on exhaust heat and burns no extra gas.
        println!("  free steam up to {:.2} klb/h", chp.b_q / chp.a_q);
        println!("  extra gas at q_max: {:.3} dth/h", chp_steam_fuel(chp.q_max, chp)?);
    }

    println!("boiler");
    for q in [0.0, 100.0, 300.0, 540.0] {
        println!("  {q:>5.0} klb/h -> {:.4} dth/h", boiler_fuel(q, &plant.boiler, true)?);
    }

    println!("steam turbine");
    for q in [100.0, 200.0, 215.0, 215.5, 300.0] {
        println!("  {q:>5.1} klb/h -> {:.3} kW", steam_turbine_power(q, &plant.steam_turbine)?);
    }
    Ok(())
}
