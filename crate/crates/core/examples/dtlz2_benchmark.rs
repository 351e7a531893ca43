//! The optimizer against uniform random sampling on three-objective DTLZ2.
//!
//! ```bash
//! cargo run --release --example dtlz2_benchmark
//! ```

use chp_morl::moea::dtlz::{generational_distance, Dtlz2};
use chp_morl::moea::{random_search, run, MoeaConfig};

fn main() -> chp_morl::Result<()> {
    let problem = Dtlz2::new(3, 10);
    let config = MoeaConfig {
        max_nfe: 10_000,
        epsilons: vec![0.05; 3],
        ..Default::default()
    };
    println!("{:>4} {:>10} {:>8} {:>10} {:>8}", "seed", "borg_gd", "size", "random_gd", "size");
    for seed in 1..=5 {
        let r = run(&problem, &config, seed)?;
        let rs = random_search(&problem, &config.epsilons, config.max_nfe, seed)?;
        println!(
            "{seed:>4} {:>10.5} {:>8} {:>10.5} {:>8}",
            generational_distance(&r.archive),
            r.archive.len(),
            generational_distance(&rs),
            rs.len()
        );
    }
    Ok(())
}
