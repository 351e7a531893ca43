//! Which inputs drive a policy's decisions, hour by hour.
//!
//! Uses a small random policy on 200 synthetic winter days and writes the
//! decomposition plus one SVG per decision.
//!
//! ```bash
//! cargo run --release --example tvsa_analysis -- /tmp/tvsa
//! ```

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chp_morl::data::{generate_synthetic, SyntheticSpec};
use chp_morl::grid::MicrogridConfig;
use chp_morl::policy::{Architecture, InputNormalization, PolicyNetwork, INPUT_NAMES};
use chp_morl::tvsa::{analyze, render_svg, write_csv, GradientPoint};

fn main() -> chp_morl::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("chp_morl_tvsa"));
    let scenarios = generate_synthetic(&SyntheticSpec::winter(7, 200))?;
    let plant = MicrogridConfig::campus_winter();
    let arch = Architecture::new(15, plant.decision_dim());
    let norm = InputNormalization::fit(scenarios.iter().flat_map(|s| s.hours.iter().map(|h| &h.observable)));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let weights = (0..arch.weight_count()).map(|_| rng.random_range(-2.0..2.0)).collect();
    let policy = PolicyNetwork::new(arch, norm, weights)?;

    let report = analyze(&policy, &scenarios, &plant, GradientPoint::EnsembleMean)?;
    for (d, name) in report.decisions.iter().enumerate() {
        let noon = report.cell(d, 12);
        let (i, share) = noon
            .first
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("five inputs");
        println!(
            "{name:<12} at 12:00: variance {:.3e}, largest first-order share {} ({:.0}%)",
            noon.empirical_variance,
            INPUT_NAMES[i],
            100.0 * share
        );
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &report)?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("tvsa.csv"), buf)?;
    for (d, name) in report.decisions.iter().enumerate() {
        std::fs::write(out.join(format!("{name}.svg")), render_svg(&report, d))?;
    }
    println!("written to {}", out.display());
    Ok(())
}
