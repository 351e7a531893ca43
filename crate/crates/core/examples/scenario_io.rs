//! Generate a mixed-season scenario file, read it back and split it by
//! season.
//!
//! ```bash
//! cargo run --example scenario_io -- /tmp/scenarios.csv
//! ```

use std::path::PathBuf;

use chp_morl::data::{generate_synthetic, load_scenarios, save_scenarios, split_by_season, SyntheticSpec};

fn main() -> chp_morl::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("chp_morl_scenarios.csv"));

    let mut days = generate_synthetic(&SyntheticSpec::winter(1, 4))?;
    days.extend(generate_synthetic(&SyntheticSpec::summer(2, 3))?);
    save_scenarios(&path, &days)?;

    let back = load_scenarios(&path)?;
    let (winter, summer) = split_by_season(&back)?;
    println!("{} days written to {}", back.len(), path.display());
    println!("winter: {:?}", winter.iter().map(|s| s.date.as_str()).collect::<Vec<_>>());
    println!("summer: {:?}", summer.iter().map(|s| s.date.as_str()).collect::<Vec<_>>());

    // Prices are stored per MWh and held per kWh in memory.
    let h = &back[0].hours[18];
    println!(
        "{} 18:00  load {:.0} kW  heat {:.1} klb/h  price {:.4} $/kWh",
        back[0].date, h.hidden.electric_load, h.hidden.heat_load, h.hidden.rt_price
    );
    Ok(())
}
