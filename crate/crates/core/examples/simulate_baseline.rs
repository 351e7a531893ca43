//! Run the all-0.5 policy through one synthetic winter day and print the
//! hourly dispatch.
//!
//! ```bash
//! cargo run --example simulate_baseline
//! ```

use chp_morl::data::{generate_synthetic, SyntheticSpec};
use chp_morl::environment::simulate_day;
use chp_morl::grid::MicrogridConfig;
use chp_morl::policy::{Architecture, InputNormalization, PolicyNetwork};

fn main() -> chp_morl::Result<()> {
    let day = generate_synthetic(&SyntheticSpec::winter(11, 1))?.remove(0);
    let plant = MicrogridConfig::campus_winter();
    let norm = InputNormalization::fit(day.hours.iter().map(|h| &h.observable));
    let policy = PolicyNetwork::zeros(Architecture::new(15, plant.decision_dim()), norm);

    let out = simulate_day(&policy, &day, &plant)?;
    println!("{}", day.date);
    println!(
        "{:>4} {:>8} {:>8} {:>7} {:>7} {:>7} {:>8} {:>8} {:>6}",
        "hour", "chp1_kw", "chp2_kw", "q1", "q2", "qb", "st_kw", "grid_kw", "ratio"
    );
    for h in &out.trace {
        let a = &h.action;
        println!(
            "{:>4} {:>8.0} {:>8.0} {:>7.1} {:>7.1} {:>7.1} {:>8.0} {:>8.0} {:>6.2}",
            h.hour, a.chp_power[0], a.chp_power[1], a.chp_steam[0], a.chp_steam[1], a.boiler_steam,
            h.st_power, h.exchange, h.heat_satisfaction
        );
    }
    let o = out.objectives;
    println!(
        "cost {:.1} $  emission {:.2} t  heat waste {} h  reliable {:.1}%  violation {:.4}",
        o.cost,
        o.emission,
        o.heat_waste,
        100.0 * out.reliability_fraction,
        out.violation
    );
    Ok(())
}
