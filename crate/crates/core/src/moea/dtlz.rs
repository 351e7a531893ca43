use std::f64::consts::FRAC_PI_2;

use super::archive::Archive;
use super::borg::{Evaluation, Problem};
use super::operators::Bounds;
use crate::error::{Error, Result};

/// DTLZ2 with `m` objectives and `k` distance variables. The Pareto front is
/// the positive orthant of the unit sphere.
#[derive(Debug, Clone, Copy)]
pub struct Dtlz2 {
    pub objectives: usize,
    pub k: usize,
}

impl Dtlz2 {
    pub fn new(objectives: usize, k: usize) -> Self {
        Dtlz2 { objectives, k }
    }
}

impl Problem for Dtlz2 {
    fn num_variables(&self) -> usize {
        self.objectives - 1 + self.k
    }

    fn num_objectives(&self) -> usize {
        self.objectives
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            lower: 0.0,
            upper: 1.0,
        }
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let m = self.objectives;
        if x.len() != self.num_variables() {
            return Err(Error::domain("wrong DTLZ2 genome length"));
        }
        let g: f64 = x[m - 1..].iter().map(|v| (v - 0.5).powi(2)).sum();
        let mut f = vec![1.0 + g; m];
        for i in 0..m {
            for xj in &x[..m - 1 - i] {
                f[i] *= (xj * FRAC_PI_2).cos();
            }
            if i > 0 {
                f[i] *= (x[m - 1 - i] * FRAC_PI_2).sin();
            }
        }
        Ok(Evaluation {
            objectives: f,
            violation: 0.0,
        })
    }
}

/// Root-mean-square distance of archive members to the unit-sphere front.
pub fn generational_distance(archive: &Archive) -> f64 {
    let m = archive.members();
    if m.is_empty() {
        return f64::INFINITY;
    }
    let sum: f64 = m
        .iter()
        .map(|s| {
            let r = s.objectives.iter().map(|v| v * v).sum::<f64>().sqrt();
            (r - 1.0).powi(2)
        })
        .sum();
    (sum / m.len() as f64).sqrt()
}
