//! Policy search: wires the simulator into the optimizer and keeps track of
//! what a stored archive means.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{split_by_season, Scenario};
use crate::environment::{evaluate_policy, EvaluationResult, Objectives};
use crate::error::{Error, Result};
use crate::grid::{MicrogridConfig, Season};
use crate::io;
use crate::manifest::RunManifest;
use crate::moea::{self, store, Archive, Bounds, Evaluation, MoeaConfig, Problem};
use crate::policy::{Architecture, InputNormalization, PolicyNetwork, DEFAULT_HIDDEN, DEFAULT_WEIGHT_BOUND};

/// Training settings, loadable from JSON. Missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub season: Season,
    /// Overrides the campus preset for `season`.
    pub microgrid: Option<MicrogridConfig>,
    pub hidden_units: usize,
    pub weight_bound: f64,
    pub moea: MoeaConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            season: Season::Winter,
            microgrid: None,
            hidden_units: DEFAULT_HIDDEN,
            weight_bound: DEFAULT_WEIGHT_BOUND,
            moea: MoeaConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let cfg: TrainConfig = serde_json::from_str(&io::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn microgrid(&self) -> MicrogridConfig {
        self.microgrid.clone().unwrap_or_else(|| MicrogridConfig::campus(self.season))
    }

    pub fn validate(&self) -> Result<()> {
        let mg = self.microgrid();
        mg.validate()?;
        if mg.season != self.season {
            return Err(Error::Config("microgrid season differs from training season".into()));
        }
        if self.hidden_units == 0 {
            return Err(Error::Config("hidden_units must be positive".into()));
        }
        Bounds::symmetric(self.weight_bound)?;
        if self.moea.epsilons.len() != 3 {
            return Err(Error::Config("three epsilons required (cost, emission, heat waste)".into()));
        }
        self.moea.validate()
    }
}

/// Policy weights evaluated on a fixed scenario set.
pub struct PolicyProblem<'a> {
    pub microgrid: &'a MicrogridConfig,
    pub scenarios: &'a [Scenario],
    pub architecture: Architecture,
    pub normalization: InputNormalization,
    pub bounds: Bounds,
}

impl PolicyProblem<'_> {
    pub fn policy(&self, genome: &[f64]) -> Result<PolicyNetwork> {
        PolicyNetwork::new(self.architecture, self.normalization.clone(), genome.to_vec())
    }
}

impl Problem for PolicyProblem<'_> {
    fn num_variables(&self) -> usize {
        self.architecture.weight_count()
    }

    fn num_objectives(&self) -> usize {
        3
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn evaluate(&self, genome: &[f64]) -> Result<Evaluation> {
        let r = evaluate_policy(&self.policy(genome)?, self.scenarios, self.microgrid, false)?;
        Ok(Evaluation {
            objectives: r.objectives.to_vec(),
            violation: r.violation,
        })
    }
}

/// Everything needed to turn an archive row back into a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveMeta {
    pub epsilons: Vec<f64>,
    pub objective_names: Vec<String>,
    pub seeds: Vec<u64>,
    /// Evaluations summed over seeds.
    pub nfe: usize,
    pub train: TrainConfig,
    pub microgrid: MicrogridConfig,
    pub architecture: Architecture,
    pub normalization: InputNormalization,
    pub manifest: Option<RunManifest>,
}

#[derive(Debug, Clone)]
pub struct PolicyArchive {
    pub archive: Archive,
    pub meta: ArchiveMeta,
}

/// The sidecar of `archive.csv` is `archive.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

impl PolicyArchive {
    pub fn policy(&self, row: usize) -> Result<PolicyNetwork> {
        let s = self.archive.members().get(row).ok_or_else(|| {
            Error::Config(format!("archive has {} rows, asked for {row}", self.archive.len()))
        })?;
        PolicyNetwork::new(self.meta.architecture, self.meta.normalization.clone(), s.genome.clone())
    }

    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let names: Vec<&str> = self.meta.objective_names.iter().map(String::as_str).collect();
        store::save_archive(csv_path, &self.archive, &names)?;
        io::write(&sidecar_path(csv_path), serde_json::to_string_pretty(&self.meta)? + "\n")
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let meta: ArchiveMeta = serde_json::from_str(&io::read_to_string(&sidecar_path(csv_path))?)?;
        let archive = store::load_archive(csv_path, meta.epsilons.clone())?;
        if let Some(bad) = archive
            .members()
            .iter()
            .find(|s| s.genome.len() != meta.architecture.weight_count())
        {
            return Err(Error::Architecture(format!(
                "archive genome has {} weights, architecture needs {}",
                bad.genome.len(),
                meta.architecture.weight_count()
            )));
        }
        Ok(PolicyArchive { archive, meta })
    }
}

/// Joins archives from compatible runs.
pub fn merge(archives: &[PolicyArchive]) -> Result<PolicyArchive> {
    let first = archives.first().ok_or_else(|| Error::Config("nothing to merge".into()))?;
    for a in &archives[1..] {
        if a.meta.architecture != first.meta.architecture
            || a.meta.normalization != first.meta.normalization
            || a.meta.microgrid != first.meta.microgrid
        {
            return Err(Error::Config(
                "archives come from different policies or microgrids".into(),
            ));
        }
        if a.meta.epsilons != first.meta.epsilons {
            return Err(Error::Config(format!(
                "epsilon mismatch: {:?} vs {:?}",
                a.meta.epsilons, first.meta.epsilons
            )));
        }
    }
    let archive = moea::merge_archives(archives.iter().map(|a| &a.archive))?;
    let mut meta = first.meta.clone();
    meta.seeds = archives.iter().flat_map(|a| a.meta.seeds.iter().copied()).collect();
    meta.nfe = archives.iter().map(|a| a.meta.nfe).sum();
    meta.manifest = None;
    Ok(PolicyArchive { archive, meta })
}

/// Scenarios of the configured season, with the input scaling fitted on them.
pub fn prepare(config: &TrainConfig, scenarios: &[Scenario]) -> Result<(Vec<Scenario>, InputNormalization)> {
    let (winter, summer) = split_by_season(scenarios)?;
    let chosen = match config.season {
        Season::Winter => winter,
        Season::Summer => summer,
    };
    if chosen.is_empty() {
        return Err(Error::Config(format!(
            "no {:?} scenarios among {} days",
            config.season,
            scenarios.len()
        )));
    }
    let norm = InputNormalization::fit(chosen.iter().flat_map(|s| s.hours.iter().map(|h| &h.observable)));
    Ok((chosen, norm))
}

/// Runs one optimization per seed (in parallel) and returns each run's
/// archive.
pub fn train(config: &TrainConfig, scenarios: &[Scenario], seeds: &[u64]) -> Result<Vec<PolicyArchive>> {
    config.validate()?;
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed required".into()));
    }
    let (chosen, normalization) = prepare(config, scenarios)?;
    let microgrid = config.microgrid();
    let architecture = Architecture::new(config.hidden_units, microgrid.decision_dim());
    let problem = PolicyProblem {
        microgrid: &microgrid,
        scenarios: &chosen,
        architecture,
        normalization: normalization.clone(),
        bounds: Bounds::symmetric(config.weight_bound)?,
    };
    seeds
        .par_iter()
        .map(|&seed| {
            let r = moea::run(&problem, &config.moea, seed)?;
            Ok(PolicyArchive {
                archive: r.archive,
                meta: ArchiveMeta {
                    epsilons: config.moea.epsilons.clone(),
                    objective_names: Objectives::NAMES.iter().map(|s| s.to_string()).collect(),
                    seeds: vec![seed],
                    nfe: r.nfe,
                    train: config.clone(),
                    microgrid: microgrid.clone(),
                    architecture,
                    normalization: normalization.clone(),
                    manifest: None,
                },
            })
        })
        .collect()
}

/// The all-0.5 policy: every weight zero.
pub fn baseline_policy(microgrid: &MicrogridConfig, hidden: usize, normalization: InputNormalization) -> PolicyNetwork {
    PolicyNetwork::zeros(Architecture::new(hidden, microgrid.decision_dim()), normalization)
}

pub fn evaluate_baseline(config: &TrainConfig, scenarios: &[Scenario]) -> Result<EvaluationResult> {
    let (chosen, norm) = prepare(config, scenarios)?;
    let mg = config.microgrid();
    evaluate_policy(&baseline_policy(&mg, config.hidden_units, norm), &chosen, &mg, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};

    fn quick() -> TrainConfig {
        TrainConfig {
            moea: MoeaConfig {
                population_size: 20,
                min_population_size: 20,
                max_nfe: 200,
                ..TrainConfig::default().moea
            },
            ..Default::default()
        }
    }

    #[test]
    fn default_config_round_trips_and_accepts_empty_json() {
        let c: TrainConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, TrainConfig::default());
        assert_eq!(c.moea.epsilons, vec![10.0, 1.0, 0.01]);
        c.validate().unwrap();
    }

    #[test]
    fn stored_objectives_reproduce() {
        let sc = generate_synthetic(&SyntheticSpec::winter(3, 2)).unwrap();
        let runs = train(&quick(), &sc, &[1, 2]).unwrap();
        let merged = merge(&runs).unwrap();
        assert_eq!(merged.meta.seeds, vec![1, 2]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        merged.save(&path).unwrap();
        let back = PolicyArchive::load(&path).unwrap();
        assert_eq!(back.archive, merged.archive);
        for (i, s) in back.archive.members().iter().enumerate() {
            let r = evaluate_policy(&back.policy(i).unwrap(), &sc, &back.meta.microgrid, false).unwrap();
            assert_eq!(r.objectives.to_vec(), s.objectives);
            assert_eq!(r.violation, s.violation);
        }
    }

    #[test]
    fn wrong_season_is_rejected() {
        let sc = generate_synthetic(&SyntheticSpec::summer(3, 2)).unwrap();
        assert!(matches!(train(&quick(), &sc, &[1]), Err(Error::Config(_))));
    }
}
