//! Train a small winter archive, save it, and write the Pareto plot and
//! summary table with the baseline policy as the reference point.
//!
//! ```bash
//! cargo run --release --example pareto_report -- /tmp/report
//! ```

use std::path::PathBuf;

use chp_morl::data::{generate_synthetic, SyntheticSpec};
use chp_morl::report::{render_pareto_svg, summarize, write_summary_csv};
use chp_morl::training::{evaluate_baseline, merge, train, PolicyArchive, TrainConfig};

fn main() -> chp_morl::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("chp_morl_report"));
    let scenarios = generate_synthetic(&SyntheticSpec::winter(5, 3))?;
    let mut config = TrainConfig::default();
    config.moea.max_nfe = 3000;

    let joint = merge(&train(&config, &scenarios, &[1, 2, 3])?)?;
    joint.save(&out.join("archive.csv"))?;
    let again = PolicyArchive::load(&out.join("archive.csv"))?;
    assert_eq!(again.archive, joint.archive);

    let base = evaluate_baseline(&config, &scenarios)?;
    let reference = base.objectives.to_vec();
    let names: Vec<&str> = joint.meta.objective_names.iter().map(String::as_str).collect();
    let rows = summarize(&joint.archive, &names)?;
    std::fs::write(out.join("pareto.svg"), render_pareto_svg(&joint.archive, &names, Some(&reference))?)?;
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &rows, &names, Some((&reference, base.violation)))?;
    std::fs::write(out.join("summary.csv"), buf)?;

    for r in &rows {
        println!("{:>3} {:>10.1} {:>8.2} {:>6.2}  {}", r.row, r.objectives[0], r.objectives[1], r.objectives[2], r.tags.join(" "));
    }
    println!("baseline {:>7.1} {:>8.2} {:>6.2}", reference[0], reference[1], reference[2]);
    println!("written to {}", out.display());
    Ok(())
}
