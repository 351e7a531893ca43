use serde::{Deserialize, Serialize};

use super::operators::Operator;
use crate::error::{Error, Result};

/// An evaluated genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub genome: Vec<f64>,
    pub objectives: Vec<f64>,
    /// Zero when feasible.
    pub violation: f64,
    /// Operator that produced the genome; `None` for random initial samples.
    pub operator: Option<Operator>,
}

impl Solution {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

/// Outcome of comparing `a` against `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    ADominates,
    BDominates,
    SameBox,
    Neither,
}

pub fn box_index(objectives: &[f64], eps: &[f64]) -> Vec<f64> {
    objectives.iter().zip(eps).map(|(o, e)| (o / e).floor()).collect()
}

/// Squared distance to the lower corner of the solution's box, in ε units.
pub fn corner_distance(objectives: &[f64], eps: &[f64]) -> f64 {
    objectives
        .iter()
        .zip(eps)
        .map(|(o, e)| {
            let x = o / e;
            (x - x.floor()).powi(2)
        })
        .sum()
}

fn feasibility_order(a: &Solution, b: &Solution) -> Option<Dominance> {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => Some(Dominance::ADominates),
        (false, true) => Some(Dominance::BDominates),
        (false, false) if a.violation < b.violation => Some(Dominance::ADominates),
        (false, false) if a.violation > b.violation => Some(Dominance::BDominates),
        _ => None,
    }
}

fn pareto_order<T: PartialOrd>(a: impl Iterator<Item = (T, T)>) -> Dominance {
    let (mut a_better, mut b_better) = (false, false);
    for (x, y) in a {
        if x < y {
            a_better = true;
        } else if y < x {
            b_better = true;
        }
    }
    match (a_better, b_better) {
        (true, false) => Dominance::ADominates,
        (false, true) => Dominance::BDominates,
        (false, false) => Dominance::SameBox,
        (true, true) => Dominance::Neither,
    }
}

/// Feasibility-first ε-box dominance. Equal boxes report [`Dominance::SameBox`];
/// use [`corner_distance`] to break the tie.
pub fn eps_dominates(a: &Solution, b: &Solution, eps: &[f64]) -> Dominance {
    if let Some(d) = feasibility_order(a, b) {
        return d;
    }
    let ba = box_index(&a.objectives, eps);
    let bb = box_index(&b.objectives, eps);
    pareto_order(ba.into_iter().zip(bb))
}

/// Feasibility-first Pareto dominance on raw objectives. Identical
/// objective vectors report [`Dominance::Neither`].
pub fn pareto_dominates(a: &Solution, b: &Solution) -> Dominance {
    if let Some(d) = feasibility_order(a, b) {
        return d;
    }
    match pareto_order(a.objectives.iter().zip(&b.objectives)) {
        Dominance::SameBox => Dominance::Neither,
        d => d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertOutcome {
    pub accepted: bool,
    /// The candidate landed in a box no member occupied.
    pub eps_progress: bool,
}

/// ε-box archive of mutually non-dominated solutions, at most one per box.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    eps: Vec<f64>,
    members: Vec<Solution>,
}

impl Archive {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::Config(format!("epsilons must be positive, got {eps:?}")));
        }
        Ok(Archive {
            eps,
            members: Vec::new(),
        })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.eps
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<Solution> {
        self.members
    }

    pub fn insert(&mut self, candidate: Solution) -> Result<InsertOutcome> {
        if candidate.objectives.len() != self.eps.len() {
            return Err(Error::domain(format!(
                "candidate has {} objectives, archive expects {}",
                candidate.objectives.len(),
                self.eps.len()
            )));
        }
        if candidate.objectives.iter().any(|o| !o.is_finite())
            || !(candidate.violation >= 0.0 && candidate.violation.is_finite())
        {
            return Err(Error::domain("candidate objectives and violation must be finite"));
        }
        let cand_box = box_index(&candidate.objectives, &self.eps);
        let box_taken = self
            .members
            .iter()
            .any(|m| box_index(&m.objectives, &self.eps) == cand_box);
        let rejected = InsertOutcome {
            accepted: false,
            eps_progress: false,
        };

        let mut dominated = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            match eps_dominates(&candidate, m, &self.eps) {
                Dominance::BDominates => return Ok(rejected),
                Dominance::SameBox => {
                    let closer = corner_distance(&candidate.objectives, &self.eps)
                        < corner_distance(&m.objectives, &self.eps);
                    if !closer {
                        return Ok(rejected);
                    }
                    dominated.push(i);
                }
                Dominance::ADominates => dominated.push(i),
                Dominance::Neither => {}
            }
        }
        let mut k = 0;
        self.members.retain(|_| {
            let keep = !dominated.contains(&k);
            k += 1;
            keep
        });
        self.members.push(candidate);
        Ok(InsertOutcome {
            accepted: true,
            eps_progress: !box_taken,
        })
    }

    /// Number of members produced by each operator, in [`Operator::ALL`] order.
    pub fn operator_counts(&self) -> [usize; Operator::COUNT] {
        let mut counts = [0; Operator::COUNT];
        for op in self.members.iter().filter_map(|m| m.operator) {
            counts[op.index()] += 1;
        }
        counts
    }

    pub fn feasible_count(&self) -> usize {
        self.members.iter().filter(|m| m.is_feasible()).count()
    }
}

/// Joint archive of several runs. All archives must share ε.
pub fn merge_archives<'a>(archives: impl IntoIterator<Item = &'a Archive>) -> Result<Archive> {
    let mut it = archives.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::domain("nothing to merge"))?;
    let mut merged = Archive::new(first.eps.clone())?;
    for a in std::iter::once(first).chain(it) {
        if a.eps != merged.eps {
            return Err(Error::domain(format!(
                "epsilon mismatch: {:?} vs {:?}",
                a.eps, merged.eps
            )));
        }
        for m in &a.members {
            merged.insert(m.clone())?;
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: [f64; 3] = [10.0, 1.0, 0.01];

    fn sol(o: [f64; 3], v: f64) -> Solution {
        Solution {
            genome: vec![o[0]],
            objectives: o.to_vec(),
            violation: v,
            operator: None,
        }
    }

    #[test]
    fn box_comparison_example() {
        let a = sol([100.0, 10.0, 0.10], 0.0);
        let b = sol([115.0, 11.0, 0.12], 0.0);
        assert_eq!(box_index(&b.objectives, &EPS), vec![11.0, 11.0, 12.0]);
        assert_eq!(eps_dominates(&a, &b, &EPS), Dominance::ADominates);
        assert_eq!(eps_dominates(&b, &a, &EPS), Dominance::BDominates);
    }

    #[test]
    fn identical_solutions_share_box_and_incumbent_stays() {
        let a = sol([100.0, 10.0, 0.10], 0.0);
        assert_eq!(eps_dominates(&a, &a, &EPS), Dominance::SameBox);
        let mut ar = Archive::new(EPS.to_vec()).unwrap();
        assert!(ar.insert(a.clone()).unwrap().eps_progress);
        let again = ar.insert(a).unwrap();
        assert!(!again.accepted && !again.eps_progress);
        assert_eq!(ar.len(), 1);
    }

    #[test]
    fn feasibility_first() {
        let good = sol([1e6, 1e6, 1e6], 0.0);
        let bad = sol([0.0, 0.0, 0.0], 0.1);
        assert_eq!(eps_dominates(&good, &bad, &EPS), Dominance::ADominates);
        let worse = sol([0.0, 0.0, 0.0], 0.2);
        assert_eq!(eps_dominates(&bad, &worse, &EPS), Dominance::ADominates);
    }

    #[test]
    fn dominating_insert_removes_two() {
        let mut ar = Archive::new(EPS.to_vec()).unwrap();
        ar.insert(sol([200.0, 5.0, 0.5], 0.0)).unwrap();
        ar.insert(sol([100.0, 20.0, 0.5], 0.0)).unwrap();
        ar.insert(sol([300.0, 1.0, 0.05], 0.0)).unwrap();
        assert_eq!(ar.len(), 3);
        let out = ar.insert(sol([90.0, 4.0, 0.4], 0.0)).unwrap();
        assert!(out.accepted && out.eps_progress);
        assert_eq!(ar.len(), 2);
    }

    #[test]
    fn same_box_keeps_corner_nearer() {
        let mut ar = Archive::new(EPS.to_vec()).unwrap();
        ar.insert(sol([105.0, 10.5, 0.105], 0.0)).unwrap();
        let out = ar.insert(sol([101.0, 10.1, 0.101], 0.0)).unwrap();
        assert!(out.accepted && !out.eps_progress);
        assert_eq!(ar.members()[0].objectives[0], 101.0);
        let out = ar.insert(sol([109.0, 10.9, 0.109], 0.0)).unwrap();
        assert!(!out.accepted);
    }

    #[test]
    fn merge_examples() {
        let mut a = Archive::new(EPS.to_vec()).unwrap();
        a.insert(sol([200.0, 5.0, 0.5], 0.0)).unwrap();
        a.insert(sol([100.0, 20.0, 0.5], 0.0)).unwrap();
        assert_eq!(merge_archives([&a, &a]).unwrap(), a);
        let empty = Archive::new(EPS.to_vec()).unwrap();
        assert_eq!(merge_archives([&empty, &a]).unwrap().members(), a.members());

        let mut x = Archive::new(EPS.to_vec()).unwrap();
        x.insert(sol([50.0, 1.0, 0.1], 0.0)).unwrap();
        let mut y = Archive::new(EPS.to_vec()).unwrap();
        y.insert(sol([80.0, 3.0, 0.3], 0.0)).unwrap();
        let m = merge_archives([&y, &x]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.members()[0].objectives[0], 50.0);

        let other = Archive::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(merge_archives([&a, &other]).is_err());
    }

    fn check_sound(ar: &Archive, saw_feasible: bool) {
        let m = ar.members();
        for i in 0..m.len() {
            if saw_feasible {
                assert!(m[i].is_feasible());
            }
            for j in 0..m.len() {
                if i != j {
                    assert_eq!(eps_dominates(&m[i], &m[j], &EPS), Dominance::Neither);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn random_insertions_keep_archive_sound(
            pts in prop::collection::vec(
                ((0.0..100.0f64, 0.0..10.0f64, 0.0..0.1f64), prop_oneof![Just(0.0), 0.0..0.5f64]),
                1..120,
            )
        ) {
            let mut ar = Archive::new(EPS.to_vec()).unwrap();
            let mut saw_feasible = false;
            let mut ever: Vec<Vec<f64>> = Vec::new();
            for ((a, b, c), v) in pts {
                let s = sol([a, b, c], v);
                saw_feasible |= v == 0.0;
                let before: Vec<Vec<f64>> =
                    ar.members().iter().map(|m| box_index(&m.objectives, &EPS)).collect();
                let out = ar.insert(s.clone()).unwrap();
                let bx = box_index(&s.objectives, &EPS);
                prop_assert_eq!(out.eps_progress, out.accepted && !before.contains(&bx));
                if out.accepted && v == 0.0 {
                    ever.push(bx);
                }
                check_sound(&ar, saw_feasible);
            }
            // Feasible boxes once occupied stay covered by a member at or
            // below them.
            for bx in ever {
                let covered = ar.members().iter().any(|m| {
                    box_index(&m.objectives, &EPS).iter().zip(&bx).all(|(x, y)| x <= y)
                });
                prop_assert!(covered);
            }
        }
    }
}
