//! Time-varying sensitivity analysis.
//!
//! For every decision and hour, the ensemble variance of the policy output is
//! split with a first-order Taylor expansion around the hour's inputs:
//! `Var(u) ≈ Σ_a g_a² Var(W_a) + Σ_{a≠b} g_a g_b Cov(W_a, W_b)`.
//! First-order terms are always non-negative; interaction terms keep their
//! sign and are reported once per unordered pair.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{Scenario, HOURS_PER_DAY};
use crate::environment::{DecisionLayout, COMMIT_THRESHOLD};
use crate::error::{Error, Result};
use crate::grid::MicrogridConfig;
use crate::policy::{PolicyNetwork, EXOGENOUS_INPUTS, INPUT_NAMES};

const N: usize = EXOGENOUS_INPUTS;

/// Where input gradients are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientPoint {
    /// At the ensemble-mean input of the hour.
    #[default]
    EnsembleMean,
    /// Gradients at each scenario's input, averaged.
    ScenarioAverage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: [f64; N],
    /// Unbiased sample covariance.
    pub covariance: [[f64; N]; N],
}

pub fn ensemble_moments(scenarios: &[Scenario], hour: usize) -> Result<Moments> {
    if scenarios.len() < 2 {
        return Err(Error::domain(format!(
            "covariance needs at least 2 scenarios, got {}",
            scenarios.len()
        )));
    }
    if hour >= HOURS_PER_DAY {
        return Err(Error::domain(format!("hour {hour} out of range")));
    }
    let samples: Vec<[f64; N]> = scenarios
        .iter()
        .map(|s| {
            s.hours
                .get(hour)
                .map(|h| h.observable.exogenous())
                .ok_or_else(|| Error::domain(format!("scenario {} lacks hour {hour}", s.date)))
        })
        .collect::<Result<_>>()?;
    Ok(moments_of(&samples))
}

pub fn moments_of(samples: &[[f64; N]]) -> Moments {
    let n = samples.len() as f64;
    let mut mean = [0.0; N];
    for s in samples {
        for a in 0..N {
            mean[a] += s[a];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut covariance = [[0.0; N]; N];
    for s in samples {
        for a in 0..N {
            for b in 0..N {
                covariance[a][b] += (s[a] - mean[a]) * (s[b] - mean[b]);
            }
        }
    }
    for row in covariance.iter_mut() {
        row.iter_mut().for_each(|c| *c /= n - 1.0);
    }
    Moments { mean, covariance }
}

/// Unnormalized contributions for one (decision, hour) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Terms {
    pub first: [f64; N],
    /// `g_a g_b Cov(a, b)`, symmetric with a zero diagonal.
    pub second: [[f64; N]; N],
}

impl Terms {
    /// Sum of all terms; equals `gᵀ Σ g`.
    pub fn total(&self) -> f64 {
        self.first.iter().sum::<f64>() + self.second.iter().flatten().sum::<f64>()
    }
}

pub fn decompose_terms(gradient: &[f64; N], covariance: &[[f64; N]; N]) -> Terms {
    let mut first = [0.0; N];
    let mut second = [[0.0; N]; N];
    for a in 0..N {
        first[a] = gradient[a] * gradient[a] * covariance[a][a];
        for b in 0..N {
            if a != b {
                second[a][b] = gradient[a] * gradient[b] * covariance[a][b];
            }
        }
    }
    Terms { first, second }
}

fn exogenous_gradient(policy: &PolicyNetwork, raw: &[f64]) -> Vec<[f64; N]> {
    policy
        .input_gradient_raw(raw)
        .into_iter()
        .map(|row| std::array::from_fn(|a| row[a]))
        .collect()
}

fn raw_input(w: &[f64; N], hour: usize) -> Vec<f64> {
    let mut v = w.to_vec();
    v.push(hour as f64);
    v
}

/// Per-decision gradients at hour `hour`, and whether each decision is live
/// (its unit committed on) at the evaluation point.
fn gradients(
    policy: &PolicyNetwork,
    scenarios: &[Scenario],
    hour: usize,
    moments: &Moments,
    layout: &DecisionLayout,
    point: GradientPoint,
) -> (Vec<[f64; N]>, Vec<bool>) {
    let k = policy.output_dim();
    let live_at = |u: &[f64]| -> Vec<bool> {
        (0..k)
            .map(|o| layout.commitment_of[o].is_none_or(|c| u[c] >= COMMIT_THRESHOLD))
            .collect()
    };
    match point {
        GradientPoint::EnsembleMean => {
            let raw = raw_input(&moments.mean, hour);
            let live = live_at(&policy.forward_raw(&raw));
            let g = exogenous_gradient(policy, &raw)
                .into_iter()
                .zip(&live)
                .map(|(g, &on)| if on { g } else { [0.0; N] })
                .collect();
            (g, live)
        }
        GradientPoint::ScenarioAverage => {
            let mut sum = vec![[0.0; N]; k];
            let mut any_live = vec![false; k];
            for s in scenarios {
                let raw = s.hours[hour].observable.raw_inputs();
                let live = live_at(&policy.forward_raw(&raw));
                for (o, g) in exogenous_gradient(policy, &raw).into_iter().enumerate() {
                    if live[o] {
                        any_live[o] = true;
                        for a in 0..N {
                            sum[o][a] += g[a];
                        }
                    }
                }
            }
            let n = scenarios.len() as f64;
            for g in sum.iter_mut() {
                g.iter_mut().for_each(|x| *x /= n);
            }
            (sum, any_live)
        }
    }
}

/// Raw decomposition of decision `decision` at hour `hour`.
pub fn decompose(
    policy: &PolicyNetwork,
    scenarios: &[Scenario],
    config: &MicrogridConfig,
    hour: usize,
    decision: usize,
    point: GradientPoint,
) -> Result<Terms> {
    if decision >= policy.output_dim() {
        return Err(Error::domain(format!("decision {decision} out of range")));
    }
    let moments = ensemble_moments(scenarios, hour)?;
    let layout = DecisionLayout::new(config);
    let (g, _) = gradients(policy, scenarios, hour, &moments, &layout, point);
    Ok(decompose_terms(&g[decision], &moments.covariance))
}

/// An interaction contribution for an unordered input pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairShare {
    pub a: usize,
    pub b: usize,
    /// `2 g_a g_b Cov(a, b)`
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub decision: usize,
    pub hour: usize,
    pub first_raw: [f64; N],
    pub first: [f64; N],
    pub second_pos: Vec<PairShare>,
    pub second_neg: Vec<PairShare>,
    /// Σ |terms| used as the normalizer.
    pub total_abs: f64,
    /// Unbiased variance of the decision over the ensemble.
    pub empirical_variance: f64,
    /// The decision is forced to zero by its commitment, or has no
    /// variance to split. All shares are zero.
    pub empty: bool,
}

impl Cell {
    /// Sum of absolute normalized shares: 1 for non-empty cells.
    pub fn share_sum(&self) -> f64 {
        self.first.iter().map(|x| x.abs()).sum::<f64>()
            + self
                .second_pos
                .iter()
                .chain(&self.second_neg)
                .map(|p| p.normalized.abs())
                .sum::<f64>()
    }
}

/// Divides every term by the cell's total absolute contribution and splits
/// interactions by sign.
pub fn normalize_cell(terms: &Terms, decision: usize, hour: usize, live: bool, empirical_variance: f64) -> Cell {
    let mut pairs = Vec::new();
    for a in 0..N {
        for b in a + 1..N {
            pairs.push((a, b, terms.second[a][b] + terms.second[b][a]));
        }
    }
    let total_abs = terms.first.iter().map(|x| x.abs()).sum::<f64>()
        + pairs.iter().map(|p| p.2.abs()).sum::<f64>();
    let empty = !live || !(total_abs > 0.0);
    let scale = if empty { 0.0 } else { 1.0 / total_abs };
    let mut cell = Cell {
        decision,
        hour,
        first_raw: terms.first,
        first: terms.first.map(|x| x * scale),
        second_pos: Vec::new(),
        second_neg: Vec::new(),
        total_abs,
        empirical_variance,
        empty,
    };
    for (a, b, raw) in pairs {
        let share = PairShare {
            a,
            b,
            raw,
            normalized: raw * scale,
        };
        if raw > 0.0 {
            cell.second_pos.push(share);
        } else if raw < 0.0 {
            cell.second_neg.push(share);
        }
    }
    cell
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvsaReport {
    pub decisions: Vec<String>,
    pub point: GradientPoint,
    /// Row-major by decision, then hour.
    pub cells: Vec<Cell>,
}

impl TvsaReport {
    pub fn cell(&self, decision: usize, hour: usize) -> &Cell {
        &self.cells[decision * HOURS_PER_DAY + hour]
    }
}

fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Decomposes every decision at every hour.
pub fn analyze(
    policy: &PolicyNetwork,
    scenarios: &[Scenario],
    config: &MicrogridConfig,
    point: GradientPoint,
) -> Result<TvsaReport> {
    if policy.output_dim() != config.decision_dim() {
        return Err(Error::Architecture(format!(
            "policy has {} outputs, configuration needs {}",
            policy.output_dim(),
            config.decision_dim()
        )));
    }
    for s in scenarios {
        s.validate()?;
    }
    let layout = DecisionLayout::new(config);
    let k = policy.output_dim();
    let mut by_hour = Vec::with_capacity(HOURS_PER_DAY);
    for t in 0..HOURS_PER_DAY {
        let moments = ensemble_moments(scenarios, t)?;
        let (grads, live) = gradients(policy, scenarios, t, &moments, &layout, point);
        let outputs: Vec<Vec<f64>> = scenarios.iter().map(|s| policy.forward(&s.hours[t].observable)).collect();
        let cells: Vec<Cell> = (0..k)
            .map(|o| {
                let terms = decompose_terms(&grads[o], &moments.covariance);
                let u: Vec<f64> = outputs.iter().map(|v| v[o]).collect();
                normalize_cell(&terms, o, t, live[o], sample_variance(&u))
            })
            .collect();
        by_hour.push(cells);
    }
    let mut cells = Vec::with_capacity(k * HOURS_PER_DAY);
    for o in 0..k {
        for hour_cells in &by_hour {
            cells.push(hour_cells[o].clone());
        }
    }
    Ok(TvsaReport {
        decisions: layout.names,
        point,
        cells,
    })
}

pub fn write_csv<W: Write>(writer: W, report: &TvsaReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "decision",
        "hour",
        "term",
        "input",
        "partner",
        "raw",
        "normalized",
        "empirical_variance",
    ])?;
    for c in &report.cells {
        let name = &report.decisions[c.decision];
        let hour = c.hour.to_string();
        let var = c.empirical_variance.to_string();
        if c.empty {
            w.write_record([name.as_str(), &hour, "empty", "", "", "", "", &var])?;
            continue;
        }
        for a in 0..N {
            w.write_record([
                name.as_str(),
                &hour,
                "first",
                INPUT_NAMES[a],
                "",
                &c.first_raw[a].to_string(),
                &c.first[a].to_string(),
                &var,
            ])?;
        }
        for (term, pairs) in [("second_pos", &c.second_pos), ("second_neg", &c.second_neg)] {
            for p in pairs {
                w.write_record([
                    name.as_str(),
                    &hour,
                    term,
                    INPUT_NAMES[p.a],
                    INPUT_NAMES[p.b],
                    &p.raw.to_string(),
                    &p.normalized.to_string(),
                    &var,
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

const INPUT_COLORS: [&str; N] = ["#d62728", "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd"];
const PAIR_COLORS: [&str; 10] = [
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31",
    "#843c39", "#7b4173",
];

fn pair_index(a: usize, b: usize) -> usize {
    // Position of (a, b), a < b, in row-major upper-triangle order.
    (0..a).map(|i| N - 1 - i).sum::<usize>() + (b - a - 1)
}

fn pair_label(a: usize, b: usize) -> String {
    format!("{} × {}", INPUT_NAMES[a], INPUT_NAMES[b])
}

/// Stacked hourly bars for one decision: first-order shares, positive
/// interactions and negative interactions in three panels.
pub fn render_svg(report: &TvsaReport, decision: usize) -> String {
    let (w, panel_h, left, top, gap) = (760.0, 150.0, 60.0, 40.0, 45.0);
    let plot_w = 24.0 * 24.0;
    let bar_w = 18.0;
    let height = top + 3.0 * (panel_h + gap) + 40.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{height}" viewBox="0 0 {w} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="20" font-size="14">{}</text>"#,
        report.decisions[decision]
    );
    let panels = ["first order", "positive interactions", "negative interactions"];
    for (p, title) in panels.iter().enumerate() {
        let y0 = top + p as f64 * (panel_h + gap);
        let base = y0 + panel_h;
        let _ = writeln!(s, r#"<text x="{left}" y="{:.1}">{title}</text>"#, y0 - 6.0);
        let _ = writeln!(
            s,
            r#"<line x1="{left}" y1="{base:.1}" x2="{:.1}" y2="{base:.1}" stroke="black"/>"#,
            left + plot_w
        );
        let _ = writeln!(
            s,
            r#"<line x1="{left}" y1="{y0:.1}" x2="{left}" y2="{base:.1}" stroke="black"/>"#
        );
        for tick in [0.0, 0.5, 1.0] {
            let y = base - tick * panel_h;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{tick:.1}</text>"#,
                left - 4.0,
                y + 4.0
            );
        }
        for t in 0..HOURS_PER_DAY {
            let c = report.cell(decision, t);
            let x = left + t as f64 * 24.0 + 3.0;
            if p == 2 && t % 3 == 0 {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#,
                    x + bar_w / 2.0,
                    base + 14.0
                );
            }
            if c.empty {
                continue;
            }
            let segments: Vec<(f64, &str)> = match p {
                0 => c.first.iter().zip(INPUT_COLORS).map(|(v, col)| (*v, col)).collect(),
                1 => c.second_pos.iter().map(|q| (q.normalized, PAIR_COLORS[pair_index(q.a, q.b)])).collect(),
                _ => c.second_neg.iter().map(|q| (-q.normalized, PAIR_COLORS[pair_index(q.a, q.b)])).collect(),
            };
            let mut acc = 0.0;
            for (v, col) in segments {
                if v <= 0.0 {
                    continue;
                }
                let h = v * panel_h;
                let y = base - acc - h;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.1}" y="{y:.2}" width="{bar_w}" height="{h:.2}" fill="{col}"/>"#
                );
                acc += h;
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">hour of day</text>"#,
        left + plot_w / 2.0,
        height - 12.0
    );
    // Legend
    let lx = left + plot_w + 12.0;
    let mut ly = top;
    for (a, col) in INPUT_COLORS.iter().enumerate() {
        let _ = writeln!(s, r#"<rect x="{lx}" y="{ly}" width="10" height="10" fill="{col}"/>"#);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 14.0, ly + 9.0, INPUT_NAMES[a]);
        ly += 14.0;
    }
    ly = top + panel_h + gap;
    for a in 0..N {
        for b in a + 1..N {
            let col = PAIR_COLORS[pair_index(a, b)];
            let _ = writeln!(s, r#"<rect x="{lx}" y="{ly}" width="10" height="10" fill="{col}"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="8">{}</text>"#,
                lx + 14.0,
                ly + 9.0,
                pair_label(a, b)
            );
            ly += 13.0;
        }
    }
    s.push_str("</svg>\n");
    s
}
