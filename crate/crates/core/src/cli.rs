//! The `chp-morl` command line.
//!
//! Every subcommand writes a run manifest next to its outputs: archives carry
//! it in their JSON sidecar, other outputs get `<name>.manifest.json` or a
//! `manifest.json` in the output directory.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{self, generate_synthetic, SyntheticSpec};
use crate::environment::{evaluate_policy, Objectives};
use crate::error::{Error, Result};
use crate::grid::{MicrogridConfig, Season};
use crate::io;
use crate::manifest::{self, ManifestBuilder};
use crate::policy::PolicyNetwork;
use crate::report;
use crate::training::{self, PolicyArchive, TrainConfig};
use crate::tvsa::{self, GradientPoint};

/// Environment variable that sets the worker thread count.
pub const WORKERS_ENV: &str = "CHP_MORL_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "chp-morl", version, about = "Multi-objective dispatch policy search for CHP microgrids")]
pub struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for dispatch policies and write the ε-archive.
    Train(TrainArgs),
    /// Join archives from several runs into one.
    Merge(MergeArgs),
    /// Simulate one policy and print its objectives.
    Evaluate(EvaluateArgs),
    /// Time-varying sensitivity of a policy's decisions to its inputs.
    Tvsa(TvsaArgs),
    /// Pareto plots and a summary table for an archive.
    Report(ReportArgs),
    /// Write seeded synthetic scenarios as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training configuration (JSON); defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario CSV.
    #[arg(long)]
    pub scenarios: PathBuf,
    /// Seeds, one run each; runs are merged into one archive.
    #[arg(long = "seed", value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    /// Evaluations per seed, overriding the configuration.
    #[arg(long)]
    pub nfe: Option<usize>,
    /// Archive CSV to write; the sidecar goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[arg(required = true)]
    pub archives: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Where a policy comes from: a policy JSON file or a row of an archive.
#[derive(Debug, Args)]
pub struct PolicySource {
    /// Policy network JSON.
    #[arg(long, conflicts_with_all = ["archive", "row"], required_unless_present = "archive")]
    pub policy: Option<PathBuf>,
    /// Archive CSV (with its sidecar).
    #[arg(long, requires = "row")]
    pub archive: Option<PathBuf>,
    /// Zero-based archive row.
    #[arg(long)]
    pub row: Option<usize>,
    /// Microgrid configuration JSON for a policy file.
    #[arg(long, conflicts_with = "archive")]
    pub microgrid: Option<PathBuf>,
    /// Campus preset for a policy file when no microgrid is given.
    #[arg(long, default_value = "winter", conflicts_with = "archive")]
    pub season: Season,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub source: PolicySource,
    #[arg(long)]
    pub scenarios: PathBuf,
    /// Hourly trace CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the selected policy as JSON.
    #[arg(long)]
    pub save_policy: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PointArg {
    Mean,
    ScenarioAverage,
}

impl From<PointArg> for GradientPoint {
    fn from(p: PointArg) -> Self {
        match p {
            PointArg::Mean => GradientPoint::EnsembleMean,
            PointArg::ScenarioAverage => GradientPoint::ScenarioAverage,
        }
    }
}

#[derive(Debug, Args)]
pub struct TvsaArgs {
    #[command(flatten)]
    pub source: PolicySource,
    #[arg(long)]
    pub scenarios: PathBuf,
    /// Output directory for `tvsa.csv` and one SVG per decision.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "mean")]
    pub gradient_point: PointArg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub archive: PathBuf,
    /// Output directory for `pareto.svg` and `summary.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Reference objectives `cost,emission,heat_waste` to overlay.
    #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with = "baseline")]
    pub reference: Option<Vec<f64>>,
    /// Overlay the all-0.5 baseline policy evaluated on these scenarios.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Full generator specification (JSON); overrides the preset flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value = "winter")]
    pub season: Season,
    #[arg(long, default_value_t = 7)]
    pub days: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 1 on a runtime failure, 2 on bad usage or input.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() { 2 } else { 1 }
        }
    }
}

pub fn run(cli: Cli, command: Vec<String>) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("worker count must be positive".into()));
        }
        // A second call in the same process keeps the first pool, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let m = ManifestBuilder::start(command);
    match cli.command {
        Command::Train(a) => train(a, m),
        Command::Merge(a) => merge(a, m),
        Command::Evaluate(a) => evaluate(a, m),
        Command::Tvsa(a) => run_tvsa(a, m),
        Command::Report(a) => run_report(a, m),
        Command::Synth(a) => synth(a, m),
    }
}

/// `trace.csv` gets `trace.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

fn train(a: TrainArgs, mut m: ManifestBuilder) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => {
            m.input(p)?;
            TrainConfig::from_json_file(p)?
        }
        None => TrainConfig::default(),
    };
    if let Some(nfe) = a.nfe {
        config.moea.max_nfe = nfe;
    }
    config.validate()?;
    let scenarios = data::load_scenarios(&a.scenarios)?;
    m.input(&a.scenarios)?.config(&config)?.seeds(&a.seeds);
    let runs = training::train(&config, &scenarios, &a.seeds)?;
    let mut joint = training::merge(&runs)?;
    m.nfe(joint.meta.nfe);
    joint.meta.manifest = Some(m.finish());
    joint.save(&a.out)?;
    println!(
        "{} solutions ({} feasible) from {} evaluations -> {}",
        joint.archive.len(),
        joint.archive.feasible_count(),
        joint.meta.nfe,
        a.out.display()
    );
    Ok(())
}

fn merge(a: MergeArgs, mut m: ManifestBuilder) -> Result<()> {
    let mut loaded = Vec::with_capacity(a.archives.len());
    for p in &a.archives {
        m.input(p)?;
        loaded.push(PolicyArchive::load(p)?);
    }
    let mut joint = training::merge(&loaded)?;
    m.seeds(&joint.meta.seeds).nfe(joint.meta.nfe).config(&joint.meta.train)?;
    joint.meta.manifest = Some(m.finish());
    joint.save(&a.out)?;
    println!("{} solutions -> {}", joint.archive.len(), a.out.display());
    Ok(())
}

/// Loads the policy and the microgrid it runs on.
fn load_policy(src: &PolicySource, m: &mut ManifestBuilder) -> Result<(PolicyNetwork, MicrogridConfig)> {
    if let Some(path) = &src.archive {
        m.input(path)?;
        let archive = PolicyArchive::load(path)?;
        let row = src.row.expect("clap requires --row with --archive");
        return Ok((archive.policy(row)?, archive.meta.microgrid));
    }
    let path = src.policy.as_ref().expect("clap requires --policy or --archive");
    m.input(path)?;
    let policy = PolicyNetwork::from_json(&io::read_to_string(path)?)?;
    let microgrid = match &src.microgrid {
        Some(p) => {
            m.input(p)?;
            MicrogridConfig::from_json_file(p)?
        }
        None => MicrogridConfig::campus(src.season),
    };
    if policy.output_dim() != microgrid.decision_dim() {
        return Err(Error::Architecture(format!(
            "policy emits {} decisions, the {} microgrid needs {}",
            policy.output_dim(),
            microgrid.season,
            microgrid.decision_dim()
        )));
    }
    Ok((policy, microgrid))
}

/// Scenarios of the microgrid's season.
fn load_season(path: &Path, season: Season, m: &mut ManifestBuilder) -> Result<Vec<data::Scenario>> {
    m.input(path)?;
    let all = data::load_scenarios(path)?;
    let (winter, summer) = data::split_by_season(&all)?;
    let chosen = match season {
        Season::Winter => winter,
        Season::Summer => summer,
    };
    if chosen.is_empty() {
        return Err(Error::Config(format!(
            "{} holds no {season} days",
            path.display()
        )));
    }
    Ok(chosen)
}

fn evaluate(a: EvaluateArgs, mut m: ManifestBuilder) -> Result<()> {
    let (policy, microgrid) = load_policy(&a.source, &mut m)?;
    let scenarios = load_season(&a.scenarios, microgrid.season, &mut m)?;
    m.config(&microgrid)?;
    let r = evaluate_policy(&policy, &scenarios, &microgrid, a.out.is_some())?;
    let o = r.objectives;
    println!("scenarios   {}", scenarios.len());
    println!("{:<11} {}", Objectives::NAMES[0], o.cost);
    println!("{:<11} {}", Objectives::NAMES[1], o.emission);
    println!("{:<11} {}", Objectives::NAMES[2], o.heat_waste);
    println!("violation   {}", r.violation);
    if let Some(out) = &a.out {
        let days: Vec<(String, Vec<_>)> = scenarios
            .iter()
            .map(|s| s.date.clone())
            .zip(r.traces.unwrap_or_default())
            .collect();
        let mut buf = Vec::new();
        crate::environment::write_trace_csv(&mut buf, &days)?;
        io::write(out, buf)?;
        manifest::save(&manifest_path(out), &m.finish())?;
    }
    if let Some(p) = &a.save_policy {
        io::write(p, policy.to_json()? + "\n")?;
    }
    Ok(())
}

fn run_tvsa(a: TvsaArgs, mut m: ManifestBuilder) -> Result<()> {
    let (policy, microgrid) = load_policy(&a.source, &mut m)?;
    let scenarios = load_season(&a.scenarios, microgrid.season, &mut m)?;
    let point = GradientPoint::from(a.gradient_point);
    m.config(&(&microgrid, point))?;
    let report = tvsa::analyze(&policy, &scenarios, &microgrid, point)?;
    let mut buf = Vec::new();
    tvsa::write_csv(&mut buf, &report)?;
    io::write(&a.out.join("tvsa.csv"), buf)?;
    for (d, name) in report.decisions.iter().enumerate() {
        io::write(&a.out.join(format!("tvsa_{name}.svg")), tvsa::render_svg(&report, d))?;
    }
    manifest::save(&a.out.join("manifest.json"), &m.finish())?;
    println!(
        "{} decisions x 24 hours over {} scenarios -> {}",
        report.decisions.len(),
        scenarios.len(),
        a.out.display()
    );
    Ok(())
}

fn run_report(a: ReportArgs, mut m: ManifestBuilder) -> Result<()> {
    m.input(&a.archive)?;
    let archive = PolicyArchive::load(&a.archive)?;
    let names: Vec<&str> = archive.meta.objective_names.iter().map(String::as_str).collect();
    let reference: Option<(Vec<f64>, f64)> = match (&a.reference, &a.baseline) {
        (Some(r), _) => Some((r.clone(), 0.0)),
        (None, Some(path)) => {
            let scenarios = load_season(path, archive.meta.microgrid.season, &mut m)?;
            let mg = &archive.meta.microgrid;
            let base = training::baseline_policy(mg, archive.meta.architecture.hidden_dim, archive.meta.normalization.clone());
            let r = evaluate_policy(&base, &scenarios, mg, false)?;
            Some((r.objectives.to_vec(), r.violation))
        }
        (None, None) => None,
    };
    if let Some((r, _)) = &reference {
        if r.len() != names.len() {
            return Err(Error::Config(format!(
                "reference needs {} values, got {}",
                names.len(),
                r.len()
            )));
        }
    }
    let rows = report::summarize(&archive.archive, &names)?;
    let svg = report::render_pareto_svg(&archive.archive, &names, reference.as_ref().map(|(r, _)| r.as_slice()))?;
    let mut buf = Vec::new();
    report::write_summary_csv(&mut buf, &rows, &names, reference.as_ref().map(|(r, v)| (r.as_slice(), *v)))?;
    io::write(&a.out.join("summary.csv"), buf)?;
    io::write(&a.out.join("pareto.svg"), svg)?;
    m.config(&reference)?;
    manifest::save(&a.out.join("manifest.json"), &m.finish())?;
    for r in rows.iter().filter(|r| !r.tags.is_empty()) {
        println!("row {:>3}  {:?}  {}", r.row, r.objectives, r.tags.join(", "));
    }
    Ok(())
}

fn synth(a: SynthArgs, mut m: ManifestBuilder) -> Result<()> {
    let spec = match &a.spec {
        Some(p) => {
            m.input(p)?;
            serde_json::from_str(&io::read_to_string(p)?)?
        }
        None => match a.season {
            Season::Winter => SyntheticSpec::winter(a.seed, a.days),
            Season::Summer => SyntheticSpec::summer(a.seed, a.days),
        },
    };
    m.config(&spec)?.seeds(&[spec.seed]);
    let scenarios = generate_synthetic(&spec)?;
    data::save_scenarios(&a.out, &scenarios)?;
    manifest::save(&manifest_path(&a.out), &m.finish())?;
    println!("{} days -> {}", scenarios.len(), a.out.display());
    Ok(())
}
