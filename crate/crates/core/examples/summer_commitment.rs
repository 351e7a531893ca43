//! Summer operation, where both CHPs and the boiler can be switched off.
//! Trains briefly and prints the hourly on/off pattern of the cheapest
//! feasible policy on the first day.
//!
//! ```bash
//! cargo run --release --example summer_commitment -- 6000
//! ```

use chp_morl::data::{generate_synthetic, SyntheticSpec};
use chp_morl::environment::simulate_day;
use chp_morl::grid::Season;
use chp_morl::training::{merge, prepare, train, TrainConfig};

fn main() -> chp_morl::Result<()> {
    let nfe: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4000);
    let scenarios = generate_synthetic(&SyntheticSpec::summer(2019, 5))?;
    let mut config = TrainConfig {
        season: Season::Summer,
        ..Default::default()
    };
    config.moea.max_nfe = nfe;
    let plant = config.microgrid();
    println!("decisions: {}", plant.decision_dim());

    let joint = merge(&train(&config, &scenarios, &[1, 2])?)?;
    let Some(best) = (0..joint.archive.len())
        .filter(|&i| joint.archive.members()[i].is_feasible())
        .min_by(|&a, &b| joint.archive.members()[a].objectives[0].total_cmp(&joint.archive.members()[b].objectives[0]))
    else {
        println!("no feasible policy after {nfe} evaluations; try more");
        return Ok(());
    };
    let s = &joint.archive.members()[best];
    println!(
        "cheapest feasible: {:.1} $/day, {:.2} t/day, {:.2} h/day heat waste",
        s.objectives[0], s.objectives[1], s.objectives[2]
    );

    let (days, _) = prepare(&config, &scenarios)?;
    let out = simulate_day(&joint.policy(best)?, &days[0], &plant)?;
    println!("{}  (# on, . off)", days[0].date);
    let row = |name: &str, on: &dyn Fn(usize) -> bool| {
        let marks: String = (0..24).map(|t| if on(t) { '#' } else { '.' }).collect();
        println!("{name:<7} {marks}");
    };
    row("chp1", &|t| out.trace[t].action.chp_on[0]);
    row("chp2", &|t| out.trace[t].action.chp_on[1]);
    row("boiler", &|t| out.trace[t].action.boiler_on);
    Ok(())
}
