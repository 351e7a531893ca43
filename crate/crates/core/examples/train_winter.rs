//! Train winter dispatch policies on a week of synthetic days, merge the
//! per-seed archives and compare the joint front with the all-0.5 baseline.
//!
//! ```bash
//! cargo run --release --example train_winter -- 20000
//! ```

use chp_morl::data::{generate_synthetic, SyntheticSpec};
use chp_morl::environment::Objectives;
use chp_morl::training::{evaluate_baseline, merge, train, TrainConfig};

fn main() -> chp_morl::Result<()> {
    let nfe: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let scenarios = generate_synthetic(&SyntheticSpec::winter(2019, 7))?;
    let mut config = TrainConfig::default();
    config.moea.max_nfe = nfe;

    let started = std::time::Instant::now();
    let runs = train(&config, &scenarios, &[1, 2, 3])?;
    let joint = merge(&runs)?;
    let baseline = evaluate_baseline(&config, &scenarios)?;
    println!(
        "{} seeds x {nfe} evaluations in {:.1?}",
        runs.len(),
        started.elapsed()
    );
    for r in &runs {
        println!("  seed {:?}: {} archived", r.meta.seeds, r.archive.len());
    }
    println!(
        "baseline: cost {:.1} $/day, emission {:.2} t/day, heat waste {:.2} h/day, violation {}",
        baseline.objectives.cost, baseline.objectives.emission, baseline.objectives.heat_waste, baseline.violation
    );
    println!("joint archive: {} solutions, {} feasible", joint.archive.len(), joint.archive.feasible_count());
    let mut better = 0;
    for s in joint.archive.members() {
        let o = Objectives::from_slice(&s.objectives);
        if s.is_feasible() && o.weakly_dominates(&baseline.objectives) {
            better += 1;
        }
    }
    println!("{better} feasible solutions match or beat the baseline on every objective");
    let mut rows: Vec<_> = joint.archive.members().iter().collect();
    rows.sort_by(|a, b| a.objectives[0].total_cmp(&b.objectives[0]));
    println!("{:>10} {:>10} {:>8} {:>9}", "cost", "emission", "waste", "violation");
    for s in rows.iter().take(15) {
        println!(
            "{:>10.1} {:>10.2} {:>8.2} {:>9.4}",
            s.objectives[0], s.objectives[1], s.objectives[2], s.violation
        );
    }
    Ok(())
}
