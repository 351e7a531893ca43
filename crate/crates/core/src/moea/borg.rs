use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::{eps_dominates, pareto_dominates, Archive, Dominance, Solution};
use super::operators::{select_operator, vary, Bounds, Operator, OperatorParams};
use crate::error::{Error, Result};

/// Objectives and constraint violation of one genome.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    pub violation: f64,
}

/// A minimization problem over a box of real variables.
pub trait Problem: Sync {
    fn num_variables(&self) -> usize;
    fn num_objectives(&self) -> usize;
    fn bounds(&self) -> Bounds;
    fn evaluate(&self, genome: &[f64]) -> Result<Evaluation>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MoeaConfig {
    pub population_size: usize,
    /// Smallest population a restart may shrink to.
    pub min_population_size: usize,
    pub max_nfe: usize,
    pub epsilons: Vec<f64>,
    pub operators: OperatorParams,
    pub tournament_size: usize,
    /// Evaluations without ε-progress before a restart; `None` uses the
    /// current population size.
    pub restart_window: Option<usize>,
    /// Archive share of the population after a restart.
    pub injection_ratio: f64,
    /// Offspring per synchronous generation. Generations are bred serially and
    /// evaluated in parallel, so results do not depend on the worker count.
    /// `None` breeds one offspring at a time.
    pub generation_size: Option<usize>,
    /// Draw the first parent uniformly from the archive instead of by
    /// tournament, as the reference Borg does. Off by default: all parents
    /// come from the population.
    pub archive_parent: bool,
}

impl Default for MoeaConfig {
    fn default() -> Self {
        MoeaConfig {
            population_size: 100,
            min_population_size: 100,
            max_nfe: 500_000,
            epsilons: vec![10.0, 1.0, 0.01],
            operators: OperatorParams::default(),
            tournament_size: 2,
            restart_window: None,
            injection_ratio: 0.25,
            generation_size: None,
            archive_parent: false,
        }
    }
}

impl MoeaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.population_size < 4 {
            return bad(format!("population size {} too small", self.population_size));
        }
        if self.max_nfe < self.population_size {
            return bad(format!(
                "max NFE {} below population size {}",
                self.max_nfe, self.population_size
            ));
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be positive".into());
        }
        if !(self.injection_ratio > 0.0 && self.injection_ratio <= 1.0) {
            return bad(format!("injection ratio {} outside (0, 1]", self.injection_ratio));
        }
        if self.restart_window == Some(0) || self.generation_size == Some(0) {
            return bad("restart window and generation size must be positive".into());
        }
        Archive::new(self.epsilons.clone()).map(|_| ())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub archive: Archive,
    pub nfe: usize,
    pub restarts: usize,
}

struct Search<'a, P: Problem> {
    problem: &'a P,
    config: &'a MoeaConfig,
    bounds: Bounds,
    rng: ChaCha8Rng,
    population: Vec<Solution>,
    archive: Archive,
    nfe: usize,
    last_progress: usize,
    restarts: usize,
}

impl<P: Problem> Search<'_, P> {
    fn evaluate_all(&mut self, genomes: Vec<(Vec<f64>, Option<Operator>)>) -> Result<Vec<Solution>> {
        let problem = self.problem;
        let m = problem.num_objectives();
        let out: Result<Vec<Solution>> = genomes
            .into_par_iter()
            .map(|(genome, operator)| {
                let e = problem.evaluate(&genome)?;
                if e.objectives.len() != m {
                    return Err(Error::domain(format!(
                        "problem returned {} objectives, declared {m}",
                        e.objectives.len()
                    )));
                }
                Ok(Solution {
                    genome,
                    objectives: e.objectives,
                    violation: e.violation,
                    operator,
                })
            })
            .collect();
        let out = out?;
        self.nfe += out.len();
        Ok(out)
    }

    fn record(&mut self, s: &Solution) -> Result<()> {
        if self.archive.insert(s.clone())?.eps_progress {
            self.last_progress = self.nfe;
        }
        Ok(())
    }

    fn tournament(&mut self) -> usize {
        let n = self.population.len();
        let mut best = self.rng.random_range(0..n);
        for _ in 1..self.config.tournament_size {
            let c = self.rng.random_range(0..n);
            match eps_dominates(&self.population[c], &self.population[best], &self.config.epsilons) {
                Dominance::ADominates => best = c,
                Dominance::BDominates => {}
                _ => {
                    if self.rng.random::<bool>() {
                        best = c;
                    }
                }
            }
        }
        best
    }

    fn breed(&mut self) -> Result<(Vec<f64>, Operator)> {
        let op = select_operator(&self.archive.operator_counts(), &mut self.rng);
        let from_archive = self.config.archive_parent && !self.archive.is_empty();
        let first = if from_archive {
            Some(self.rng.random_range(0..self.archive.len()))
        } else {
            None
        };
        let rest: Vec<usize> = (first.is_some() as usize..op.arity()).map(|_| self.tournament()).collect();
        let mut parents: Vec<&[f64]> = Vec::with_capacity(op.arity());
        if let Some(a) = first {
            parents.push(&self.archive.members()[a].genome);
        }
        parents.extend(rest.iter().map(|&i| self.population[i].genome.as_slice()));
        let child = vary(op, &parents, self.bounds, &self.config.operators, &mut self.rng)?;
        Ok((child, op))
    }

    fn add_to_population(&mut self, child: Solution) {
        let mut dominated = Vec::new();
        for (i, m) in self.population.iter().enumerate() {
            match pareto_dominates(&child, m) {
                Dominance::BDominates => return,
                Dominance::ADominates => dominated.push(i),
                _ => {}
            }
        }
        let slot = match dominated.choose(&mut self.rng) {
            Some(&i) => i,
            None => self.rng.random_range(0..self.population.len()),
        };
        self.population[slot] = child;
    }

    fn restart_window(&self) -> usize {
        self.config.restart_window.unwrap_or(self.population.len())
    }

    fn restart(&mut self) -> Result<()> {
        self.restarts += 1;
        let members = self.archive.members().to_vec();
        let target = ((members.len() as f64 / self.config.injection_ratio).ceil() as usize)
            .max(self.config.min_population_size);
        let needed = (target - members.len().min(target)).min(self.config.max_nfe - self.nfe);
        let um_rate = self
            .config
            .operators
            .um_rate
            .unwrap_or(1.0 / self.problem.num_variables() as f64);
        let mut genomes = Vec::with_capacity(needed);
        for _ in 0..needed {
            let src = &members[self.rng.random_range(0..members.len())].genome;
            let mut g = src.clone();
            for x in g.iter_mut() {
                if self.rng.random::<f64>() < um_rate {
                    *x = self.bounds.sample(&mut self.rng);
                }
            }
            genomes.push((g, Some(Operator::Um)));
        }
        let fresh = self.evaluate_all(genomes)?;
        for s in &fresh {
            self.record(s)?;
        }
        let mut pop: Vec<Solution> = members;
        pop.truncate(target);
        pop.extend(fresh);
        self.population = pop;
        self.last_progress = self.nfe;
        Ok(())
    }
}

/// Runs the optimizer until `config.max_nfe` evaluations. Deterministic for a
/// given seed.
pub fn run<P: Problem>(problem: &P, config: &MoeaConfig, seed: u64) -> Result<RunResult> {
    config.validate()?;
    if config.epsilons.len() != problem.num_objectives() {
        return Err(Error::Config(format!(
            "{} epsilons for {} objectives",
            config.epsilons.len(),
            problem.num_objectives()
        )));
    }
    let bounds = problem.bounds();
    let mut s = Search {
        problem,
        config,
        bounds,
        rng: ChaCha8Rng::seed_from_u64(seed),
        population: Vec::new(),
        archive: Archive::new(config.epsilons.clone())?,
        nfe: 0,
        last_progress: 0,
        restarts: 0,
    };

    let n = problem.num_variables();
    let init: Vec<(Vec<f64>, Option<Operator>)> = (0..config.population_size)
        .map(|_| ((0..n).map(|_| bounds.sample(&mut s.rng)).collect(), None))
        .collect();
    s.population = s.evaluate_all(init)?;
    for i in 0..s.population.len() {
        let sol = s.population[i].clone();
        s.record(&sol)?;
    }

    while s.nfe < config.max_nfe {
        let batch = config.generation_size.unwrap_or(1).min(config.max_nfe - s.nfe);
        let mut genomes = Vec::with_capacity(batch);
        for _ in 0..batch {
            let (g, op) = s.breed()?;
            genomes.push((g, Some(op)));
        }
        for child in s.evaluate_all(genomes)? {
            s.record(&child)?;
            s.add_to_population(child);
        }
        if s.nfe < config.max_nfe && s.nfe - s.last_progress >= s.restart_window() {
            s.restart()?;
        }
    }
    Ok(RunResult {
        archive: s.archive,
        nfe: s.nfe,
        restarts: s.restarts,
    })
}

/// Uniform random sampling with the same archive, for baselines.
pub fn random_search<P: Problem>(problem: &P, epsilons: &[f64], nfe: usize, seed: u64) -> Result<Archive> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = problem.bounds();
    let mut archive = Archive::new(epsilons.to_vec())?;
    for _ in 0..nfe {
        let g: Vec<f64> = (0..problem.num_variables()).map(|_| bounds.sample(&mut rng)).collect();
        let e = problem.evaluate(&g)?;
        archive.insert(Solution {
            genome: g,
            objectives: e.objectives,
            violation: e.violation,
            operator: None,
        })?;
    }
    Ok(archive)
}
