//! Real-coded variation operators. Every operator returns one child clipped to
//! the search box.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    /// Simulated binary crossover followed by polynomial mutation.
    Sbx,
    /// Differential evolution.
    De,
    /// Parent-centric crossover.
    Pcx,
    /// Simplex crossover.
    Spx,
    /// Unimodal normal distribution crossover.
    Undx,
    /// Uniform mutation.
    Um,
}

impl Operator {
    pub const COUNT: usize = 6;
    pub const ALL: [Operator; Self::COUNT] = [
        Operator::Sbx,
        Operator::De,
        Operator::Pcx,
        Operator::Spx,
        Operator::Undx,
        Operator::Um,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn arity(self) -> usize {
        match self {
            Operator::Sbx => 2,
            Operator::De => 4,
            Operator::Pcx | Operator::Spx | Operator::Undx => 3,
            Operator::Um => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Sbx => "sbx",
            Operator::De => "de",
            Operator::Pcx => "pcx",
            Operator::Spx => "spx",
            Operator::Undx => "undx",
            Operator::Um => "um",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Operator::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown operator '{s}'")))
    }
}

/// Operator hyperparameters. `None` rates resolve to 1/L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorParams {
    pub sbx_distribution_index: f64,
    pub pm_distribution_index: f64,
    pub pm_rate: Option<f64>,
    pub de_step: f64,
    pub de_crossover_rate: f64,
    pub pcx_eta: f64,
    pub pcx_zeta: f64,
    /// `None` uses sqrt(parents + 1).
    pub spx_expansion: Option<f64>,
    pub undx_zeta: f64,
    /// `None` uses 0.35 / sqrt(L).
    pub undx_eta: Option<f64>,
    pub um_rate: Option<f64>,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams {
            sbx_distribution_index: 15.0,
            pm_distribution_index: 20.0,
            pm_rate: None,
            de_step: 0.5,
            de_crossover_rate: 0.1,
            pcx_eta: 0.1,
            pcx_zeta: 0.1,
            spx_expansion: None,
            undx_zeta: 0.5,
            undx_eta: None,
            um_rate: None,
        }
    }
}

/// Closed search box applied to every variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::Config(format!("invalid bounds [{lower}, {upper}]")));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn symmetric(b: f64) -> Result<Self> {
        Self::new(-b, b)
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.lower..=self.upper)
    }
}

/// Draws an operator with probability proportional to `counts[i] + 1`.
pub fn select_operator<R: Rng + ?Sized>(counts: &[usize; Operator::COUNT], rng: &mut R) -> Operator {
    let total: usize = counts.iter().map(|c| c + 1).sum();
    let mut pick = rng.random_range(0..total);
    for op in Operator::ALL {
        let w = counts[op.index()] + 1;
        if pick < w {
            return op;
        }
        pick -= w;
    }
    unreachable!("weights cover the draw")
}

pub fn selection_probabilities(counts: &[usize; Operator::COUNT]) -> [f64; Operator::COUNT] {
    let total: usize = counts.iter().map(|c| c + 1).sum();
    counts.map(|c| (c + 1) as f64 / total as f64)
}

/// Produces one child from `parents`.
pub fn vary<R: Rng + ?Sized>(
    op: Operator,
    parents: &[&[f64]],
    bounds: Bounds,
    params: &OperatorParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if parents.len() != op.arity() {
        return Err(Error::domain(format!(
            "{op} needs {} parents, got {}",
            op.arity(),
            parents.len()
        )));
    }
    let n = parents[0].len();
    if n == 0 || parents.iter().any(|p| p.len() != n) {
        return Err(Error::domain("parents must be non-empty and equally long"));
    }
    let rate_or_default = |r: Option<f64>| r.unwrap_or(1.0 / n as f64);
    let mut child = match op {
        Operator::Sbx => {
            let mut c = sbx(parents[0], parents[1], bounds, params.sbx_distribution_index, rng);
            polynomial_mutation(
                &mut c,
                bounds,
                params.pm_distribution_index,
                rate_or_default(params.pm_rate),
                rng,
            );
            c
        }
        Operator::De => de(parents, params.de_step, params.de_crossover_rate, rng),
        Operator::Pcx => pcx(parents, params.pcx_eta, params.pcx_zeta, rng),
        Operator::Spx => {
            let e = params
                .spx_expansion
                .unwrap_or(((parents.len() + 1) as f64).sqrt());
            spx(parents, e, rng)
        }
        Operator::Undx => {
            let eta = params.undx_eta.unwrap_or(0.35 / (n as f64).sqrt());
            undx(parents, params.undx_zeta, eta, rng)
        }
        Operator::Um => {
            let mut c = parents[0].to_vec();
            uniform_mutation(&mut c, bounds, rate_or_default(params.um_rate), rng);
            c
        }
    };
    for x in &mut child {
        *x = bounds.clip(*x);
    }
    Ok(child)
}

fn sbx<R: Rng + ?Sized>(p1: &[f64], p2: &[f64], bounds: Bounds, di: f64, rng: &mut R) -> Vec<f64> {
    let (lb, ub) = (bounds.lower, bounds.upper);
    let mut child = p1.to_vec();
    for j in 0..p1.len() {
        if rng.random::<f64>() > 0.5 || (p1[j] - p2[j]).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = if p1[j] < p2[j] { (p1[j], p2[j]) } else { (p2[j], p1[j]) };
        let u: f64 = rng.random();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(di + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (di + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (di + 1.0))
            }
        };
        let beta_lo = 1.0 + 2.0 * (y1 - lb) / (y2 - y1);
        let c1 = 0.5 * (y1 + y2 - spread(beta_lo) * (y2 - y1));
        let beta_hi = 1.0 + 2.0 * (ub - y2) / (y2 - y1);
        let c2 = 0.5 * (y1 + y2 + spread(beta_hi) * (y2 - y1));
        let (c1, c2) = (bounds.clip(c1), bounds.clip(c2));
        child[j] = if rng.random::<bool>() { c2 } else { c1 };
    }
    child
}

fn polynomial_mutation<R: Rng + ?Sized>(x: &mut [f64], bounds: Bounds, di: f64, rate: f64, rng: &mut R) {
    let (lb, ub) = (bounds.lower, bounds.upper);
    let width = ub - lb;
    for v in x.iter_mut() {
        if rng.random::<f64>() >= rate {
            continue;
        }
        let d1 = (*v - lb) / width;
        let d2 = (ub - *v) / width;
        let u: f64 = rng.random();
        let pow = 1.0 / (di + 1.0);
        let dq = if u < 0.5 {
            let b = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(di + 1.0);
            b.powf(pow) - 1.0
        } else {
            let b = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(di + 1.0);
            1.0 - b.powf(pow)
        };
        *v = bounds.clip(*v + dq * width);
    }
}

fn uniform_mutation<R: Rng + ?Sized>(x: &mut [f64], bounds: Bounds, rate: f64, rng: &mut R) {
    for v in x.iter_mut() {
        if rng.random::<f64>() < rate {
            *v = bounds.sample(rng);
        }
    }
}

/// parents = [target, base, donor1, donor2]
fn de<R: Rng + ?Sized>(parents: &[&[f64]], step: f64, cr: f64, rng: &mut R) -> Vec<f64> {
    let n = parents[0].len();
    let forced = rng.random_range(0..n);
    (0..n)
        .map(|j| {
            if j == forced || rng.random::<f64>() < cr {
                parents[1][j] + step * (parents[2][j] - parents[3][j])
            } else {
                parents[0][j]
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn centroid(parents: &[&[f64]]) -> Vec<f64> {
    let n = parents[0].len();
    let k = parents.len() as f64;
    (0..n)
        .map(|j| parents.iter().map(|p| p[j]).sum::<f64>() / k)
        .collect()
}

/// Removes from `v` its components along the orthonormal `basis`.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for e in basis {
        let c = dot(v, e);
        for (x, y) in v.iter_mut().zip(e) {
            *x -= c * y;
        }
    }
}

/// Appends the normalized part of `v` orthogonal to `basis`, if any.
fn extend_basis(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> Option<f64> {
    project_out(&mut v, basis);
    let norm = dot(&v, &v).sqrt();
    if norm <= 1e-12 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    basis.push(v);
    Some(norm)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// The last parent is the one the child is centered on.
fn pcx<R: Rng + ?Sized>(parents: &[&[f64]], eta: f64, zeta: f64, rng: &mut R) -> Vec<f64> {
    let n = parents[0].len();
    let k = parents.len();
    let g = centroid(parents);
    let xp = parents[k - 1];
    let d: Vec<f64> = xp.iter().zip(&g).map(|(x, c)| x - c).collect();
    let d_norm = dot(&d, &d).sqrt();

    let mut basis = Vec::new();
    if d_norm > 1e-12 {
        basis.push(d.iter().map(|x| x / d_norm).collect::<Vec<_>>());
    }
    let mut perp = Vec::new();
    for p in &parents[..k - 1] {
        let diff: Vec<f64> = p.iter().zip(&g).map(|(x, c)| x - c).collect();
        if let Some(dist) = extend_basis(&mut basis, diff) {
            perp.push(dist);
        }
    }
    let mean_perp = if perp.is_empty() {
        0.0
    } else {
        perp.iter().sum::<f64>() / perp.len() as f64
    };

    let mut child = xp.to_vec();
    let wz = zeta * normal(rng);
    for j in 0..n {
        child[j] += wz * d[j];
    }
    let skip = usize::from(d_norm > 1e-12);
    for e in &basis[skip..] {
        let w = eta * normal(rng) * mean_perp;
        for j in 0..n {
            child[j] += w * e[j];
        }
    }
    child
}

fn spx<R: Rng + ?Sized>(parents: &[&[f64]], expansion: f64, rng: &mut R) -> Vec<f64> {
    let n = parents[0].len();
    let k = parents.len();
    let g = centroid(parents);
    let y: Vec<Vec<f64>> = parents
        .iter()
        .map(|p| p.iter().zip(&g).map(|(x, c)| c + expansion * (x - c)).collect())
        .collect();
    let mut c = vec![0.0; n];
    for i in 1..k {
        let r = rng.random::<f64>().powf(1.0 / i as f64);
        for j in 0..n {
            c[j] = r * (y[i - 1][j] - y[i][j] + c[j]);
        }
    }
    (0..n).map(|j| y[k - 1][j] + c[j]).collect()
}

/// The first k-1 parents span the primary search space; the last sets the
/// spread of the orthogonal complement.
fn undx<R: Rng + ?Sized>(parents: &[&[f64]], zeta: f64, eta: f64, rng: &mut R) -> Vec<f64> {
    let n = parents[0].len();
    let k = parents.len();
    let primary = &parents[..k - 1];
    let g = centroid(primary);

    let mut basis = Vec::new();
    let diffs: Vec<Vec<f64>> = primary
        .iter()
        .map(|p| p.iter().zip(&g).map(|(x, c)| x - c).collect())
        .collect();
    for d in &diffs {
        extend_basis(&mut basis, d.clone());
    }
    let mut off: Vec<f64> = parents[k - 1].iter().zip(&g).map(|(x, c)| x - c).collect();
    project_out(&mut off, &basis);
    let spread = dot(&off, &off).sqrt();

    let mut child = g.clone();
    for d in &diffs {
        let w = zeta * normal(rng);
        for j in 0..n {
            child[j] += w * d[j];
        }
    }
    let mut z: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    project_out(&mut z, &basis);
    for j in 0..n {
        child[j] += spread * eta * z[j];
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn b10() -> Bounds {
        Bounds::symmetric(10.0).unwrap()
    }

    fn random_vec(r: &mut ChaCha8Rng, n: usize, s: f64) -> Vec<f64> {
        (0..n).map(|_| r.random_range(-s..s)).collect()
    }

    #[test]
    fn um_with_zero_rate_is_identity() {
        let p = vec![1.0, -2.0, 3.5];
        let params = OperatorParams {
            um_rate: Some(0.0),
            ..Default::default()
        };
        let c = vary(Operator::Um, &[&p], b10(), &params, &mut rng()).unwrap();
        assert_eq!(c, p);
    }

    #[test]
    fn sbx_fixed_point_without_mutation() {
        let p = vec![1.0, -2.0, 3.5, 9.0];
        let params = OperatorParams {
            pm_rate: Some(0.0),
            ..Default::default()
        };
        let mut r = rng();
        for _ in 0..100 {
            let c = vary(Operator::Sbx, &[&p, &p], b10(), &params, &mut r).unwrap();
            assert_eq!(c, p);
        }
    }

    #[test]
    fn arity_is_checked() {
        let p = vec![0.0; 3];
        let params = OperatorParams::default();
        assert!(vary(Operator::De, &[&p, &p], b10(), &params, &mut rng()).is_err());
        assert!(vary(Operator::Um, &[&p, &p], b10(), &params, &mut rng()).is_err());
    }

    #[test]
    fn de_children_center_on_base() {
        let mut r = rng();
        let n = 4;
        let base = vec![1.0, -1.0, 0.5, 2.0];
        let params = OperatorParams::default();
        let draws = 10_000;
        let mut sum = vec![0.0; n];
        let mut sq = vec![0.0; n];
        for _ in 0..draws {
            let d1 = random_vec(&mut r, n, 2.0);
            let d2 = random_vec(&mut r, n, 2.0);
            let c = vary(Operator::De, &[&base, &base, &d1, &d2], b10(), &params, &mut r).unwrap();
            for j in 0..n {
                sum[j] += c[j];
                sq[j] += c[j] * c[j];
            }
        }
        for j in 0..n {
            let m = sum[j] / draws as f64;
            let var = sq[j] / draws as f64 - m * m;
            let se = (var / draws as f64).sqrt().max(1e-12);
            assert!((m - base[j]).abs() < 3.0 * se + 1e-12, "{j}: {m} vs {}", base[j]);
        }
    }

    #[test]
    fn selection_probabilities_follow_counts() {
        assert_eq!(selection_probabilities(&[0; 6]), [1.0 / 6.0; 6]);
        let p = selection_probabilities(&[9, 1, 1, 1, 1, 1]);
        assert_eq!(p[0], 0.5);
        assert_eq!(p[1], 0.1);
    }

    #[test]
    fn selection_frequencies_within_three_sigma() {
        let counts = [9, 1, 0, 3, 1, 5];
        let p = selection_probabilities(&counts);
        let mut r = rng();
        let draws = 100_000;
        let mut hits = [0usize; 6];
        for _ in 0..draws {
            hits[select_operator(&counts, &mut r).index()] += 1;
        }
        for i in 0..6 {
            let f = hits[i] as f64 / draws as f64;
            let sigma = (p[i] * (1.0 - p[i]) / draws as f64).sqrt();
            assert!((f - p[i]).abs() < 3.0 * sigma, "{i}: {f} vs {}", p[i]);
        }
    }

    #[test]
    fn children_stay_in_bounds() {
        let mut r = rng();
        let params = OperatorParams::default();
        let bounds = Bounds::new(-1.0, 1.0).unwrap();
        for op in Operator::ALL {
            for _ in 0..500 {
                let ps: Vec<Vec<f64>> = (0..op.arity()).map(|_| random_vec(&mut r, 8, 1.0)).collect();
                let refs: Vec<&[f64]> = ps.iter().map(|p| p.as_slice()).collect();
                let c = vary(op, &refs, bounds, &params, &mut r).unwrap();
                assert_eq!(c.len(), 8);
                assert!(c.iter().all(|x| (-1.0..=1.0).contains(x)), "{op}");
            }
        }
    }

    #[test]
    fn spx_children_lie_in_expanded_simplex_hull() {
        // With three parents on a line the child stays on that line.
        let p0 = vec![0.0, 0.0];
        let p1 = vec![1.0, 1.0];
        let p2 = vec![2.0, 2.0];
        let mut r = rng();
        for _ in 0..100 {
            let c = vary(Operator::Spx, &[&p0, &p1, &p2], b10(), &OperatorParams::default(), &mut r).unwrap();
            assert!((c[0] - c[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn undx_mean_is_primary_midpoint() {
        let p0 = vec![0.0, 0.0, 0.0];
        let p1 = vec![2.0, 0.0, 0.0];
        let p2 = vec![1.0, 3.0, 0.0];
        let mut r = rng();
        let draws = 20_000;
        let mut sum = [0.0; 3];
        for _ in 0..draws {
            let c = vary(Operator::Undx, &[&p0, &p1, &p2], b10(), &OperatorParams::default(), &mut r).unwrap();
            for j in 0..3 {
                sum[j] += c[j];
            }
        }
        assert!((sum[0] / draws as f64 - 1.0).abs() < 0.02);
        assert!((sum[1] / draws as f64).abs() < 0.02);
    }

    #[test]
    fn pcx_centers_on_last_parent() {
        let p0 = vec![0.0, 0.0];
        let p1 = vec![2.0, 0.0];
        let p2 = vec![1.0, 2.0];
        let mut r = rng();
        let draws = 20_000;
        let mut sum = [0.0; 2];
        for _ in 0..draws {
            let c = vary(Operator::Pcx, &[&p0, &p1, &p2], b10(), &OperatorParams::default(), &mut r).unwrap();
            sum[0] += c[0];
            sum[1] += c[1];
        }
        assert!((sum[0] / draws as f64 - 1.0).abs() < 0.01);
        assert!((sum[1] / draws as f64 - 2.0).abs() < 0.01);
    }

    #[test]
    fn operator_names_round_trip() {
        for op in Operator::ALL {
            assert_eq!(op.name().parse::<Operator>().unwrap(), op);
        }
        assert!("nope".parse::<Operator>().is_err());
    }
}
