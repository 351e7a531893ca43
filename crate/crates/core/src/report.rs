//! Archive reports: a scatter of every objective pair and a summary table
//! with the representative policies tagged.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::moea::Archive;

/// One archived solution in the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Position in the archive, as accepted by `evaluate --row`.
    pub row: usize,
    pub objectives: Vec<f64>,
    pub violation: f64,
    pub tags: Vec<String>,
}

/// Component-wise minimum over the feasible members, or over all members if
/// none is feasible.
pub fn ideal_point(archive: &Archive) -> Result<Vec<f64>> {
    let members = archive.members();
    if members.is_empty() {
        return Err(Error::domain("archive is empty"));
    }
    let any_feasible = members.iter().any(|s| s.is_feasible());
    let m = archive.epsilons().len();
    let mut ideal = vec![f64::INFINITY; m];
    for s in members.iter().filter(|s| s.is_feasible() || !any_feasible) {
        for (lo, v) in ideal.iter_mut().zip(&s.objectives) {
            *lo = lo.min(*v);
        }
    }
    Ok(ideal)
}

/// Rows in archive order. The best feasible member on each objective is
/// tagged `min_<name>`; the feasible member closest to the ideal point after
/// scaling every objective to [0, 1] is tagged `compromise`.
pub fn summarize(archive: &Archive, names: &[&str]) -> Result<Vec<SummaryRow>> {
    let members = archive.members();
    if members.is_empty() {
        return Err(Error::domain("archive is empty"));
    }
    let m = archive.epsilons().len();
    if names.len() != m {
        return Err(Error::domain("one name per objective required"));
    }
    let mut rows: Vec<SummaryRow> = members
        .iter()
        .enumerate()
        .map(|(row, s)| SummaryRow {
            row,
            objectives: s.objectives.clone(),
            violation: s.violation,
            tags: Vec::new(),
        })
        .collect();
    let feasible: Vec<usize> = (0..rows.len()).filter(|&i| members[i].is_feasible()).collect();
    if feasible.is_empty() {
        return Ok(rows);
    }
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for &i in &feasible {
        for j in 0..m {
            lo[j] = lo[j].min(rows[i].objectives[j]);
            hi[j] = hi[j].max(rows[i].objectives[j]);
        }
    }
    for j in 0..m {
        // First index wins ties, which keeps tagging deterministic.
        let best = feasible
            .iter()
            .copied()
            .min_by(|&a, &b| rows[a].objectives[j].total_cmp(&rows[b].objectives[j]))
            .expect("nonempty");
        rows[best].tags.push(format!("min_{}", names[j]));
    }
    let distance = |o: &[f64]| -> f64 {
        (0..m)
            .map(|j| {
                let span = hi[j] - lo[j];
                if span > 0.0 { ((o[j] - lo[j]) / span).powi(2) } else { 0.0 }
            })
            .sum()
    };
    let compromise = feasible
        .iter()
        .copied()
        .min_by(|&a, &b| distance(&rows[a].objectives).total_cmp(&distance(&rows[b].objectives)))
        .expect("nonempty");
    rows[compromise].tags.push("compromise".into());
    Ok(rows)
}

/// Writes the summary as CSV: `row`, the objectives, `violation`, `tags`
/// (separated by `;`). A reference point, when given, is appended as a row
/// labelled `reference`.
pub fn write_summary_csv<W: Write>(
    writer: W,
    rows: &[SummaryRow],
    names: &[&str],
    reference: Option<(&[f64], f64)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["row".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    header.push("violation".into());
    header.push("tags".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.row.to_string()];
        rec.extend(r.objectives.iter().map(f64::to_string));
        rec.push(r.violation.to_string());
        rec.push(r.tags.join(";"));
        w.write_record(&rec)?;
    }
    if let Some((objectives, violation)) = reference {
        if objectives.len() != names.len() {
            return Err(Error::domain("reference point has the wrong number of objectives"));
        }
        let mut rec = vec!["reference".to_string()];
        rec.extend(objectives.iter().map(f64::to_string));
        rec.push(violation.to_string());
        rec.push(String::new());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

const PANEL: f64 = 260.0;
const MARGIN: f64 = 60.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn covering(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn label(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else if v.abs() >= 10.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

/// Draws one scatter panel per objective pair. Feasible members are filled
/// circles, infeasible ones hollow; the ideal point is a cross and the
/// optional reference point a red diamond.
pub fn render_pareto_svg(archive: &Archive, names: &[&str], reference: Option<&[f64]>) -> Result<String> {
    let members = archive.members();
    if members.is_empty() {
        return Err(Error::domain("archive is empty"));
    }
    let m = archive.epsilons().len();
    if names.len() != m || m < 2 {
        return Err(Error::domain("need at least two named objectives"));
    }
    if reference.is_some_and(|r| r.len() != m) {
        return Err(Error::domain("reference point has the wrong number of objectives"));
    }
    let ideal = ideal_point(archive)?;
    let axes: Vec<Axis> = (0..m)
        .map(|j| {
            let pts = members.iter().map(|s| s.objectives[j]);
            let extra = reference.map(|r| r[j]).into_iter().chain([ideal[j]]);
            Axis::covering(pts.chain(extra))
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let width = pairs.len() as f64 * (PANEL + MARGIN) + MARGIN;
    let height = PANEL + 2.0 * MARGIN + 30.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="22" font-size="14">Approximate Pareto front ({} solutions)</text>"#,
        members.len()
    );
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let x0 = MARGIN + p as f64 * (PANEL + MARGIN);
        let y0 = MARGIN;
        let px = |v: f64| x0 + axes[a].frac(v) * PANEL;
        let py = |v: f64| y0 + PANEL - axes[b].frac(v) * PANEL;
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#
        );
        for (v, anchor, x) in [(axes[a].lo, "start", x0), (axes[a].hi, "end", x0 + PANEL)] {
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#,
                y0 + PANEL + 14.0,
                label(v)
            );
        }
        for (v, y) in [(axes[b].lo, y0 + PANEL), (axes[b].hi, y0 + 10.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                label(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x0 + PANEL / 2.0,
            y0 + PANEL + 30.0,
            names[a]
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            x0 - 40.0,
            y0 + PANEL / 2.0,
            names[b]
        );
        for sol in members {
            let (cx, cy) = (px(sol.objectives[a]), py(sol.objectives[b]));
            let fill = if sol.is_feasible() { "steelblue" } else { "none" };
            let _ = writeln!(
                s,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{fill}" stroke="steelblue" class="point"/>"#
            );
        }
        let (ix, iy) = (px(ideal[a]), py(ideal[b]));
        let _ = writeln!(
            s,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="darkgreen" stroke-width="2" class="ideal"/>"#,
            ix - 5.0, iy - 5.0, ix + 5.0, iy + 5.0, ix - 5.0, iy + 5.0, ix + 5.0, iy - 5.0
        );
        if let Some(r) = reference {
            let (rx, ry) = (px(r[a]), py(r[b]));
            let _ = writeln!(
                s,
                r#"<path d="M{rx:.2},{:.2}L{:.2},{ry:.2}L{rx:.2},{:.2}L{:.2},{ry:.2}Z" fill="crimson" class="reference"/>"#,
                ry - 6.0, rx + 6.0, ry + 6.0, rx - 6.0
            );
        }
    }
    let ly = MARGIN + PANEL + 48.0;
    let _ = writeln!(s, r#"<circle cx="{MARGIN}" cy="{:.1}" r="3" fill="steelblue"/>"#, ly - 4.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">feasible</text>"#, MARGIN + 8.0);
    let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="none" stroke="steelblue"/>"#, MARGIN + 80.0, ly - 4.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">infeasible</text>"#, MARGIN + 88.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" fill="darkgreen">x ideal</text>"#, MARGIN + 170.0);
    if reference.is_some() {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" fill="crimson">reference</text>"#, MARGIN + 240.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moea::Solution;

    fn archive(points: &[[f64; 3]]) -> Archive {
        let mut a = Archive::new(vec![10.0, 1.0, 0.01]).unwrap();
        for p in points {
            a.insert(Solution {
                genome: vec![0.0],
                objectives: p.to_vec(),
                violation: 0.0,
                operator: None,
            })
            .unwrap();
        }
        a
    }

    const NAMES: [&str; 3] = ["cost", "emission", "waste"];

    #[test]
    fn empty_archive_is_an_error() {
        let a = Archive::new(vec![1.0; 3]).unwrap();
        assert!(summarize(&a, &NAMES).is_err());
        assert!(render_pareto_svg(&a, &NAMES, None).is_err());
    }

    #[test]
    fn single_solution_gets_every_tag() {
        let a = archive(&[[100.0, 5.0, 2.0]]);
        let rows = summarize(&a, &NAMES).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].tags, ["min_cost", "min_emission", "min_waste", "compromise"]);
        let svg = render_pareto_svg(&a, &NAMES, None).unwrap();
        assert_eq!(svg.matches("class=\"point\"").count(), 3);
    }

    #[test]
    fn five_points_give_five_rows_and_stable_bytes() {
        let pts = [
            [100.0, 50.0, 5.0],
            [200.0, 40.0, 4.0],
            [300.0, 30.0, 3.0],
            [400.0, 20.0, 2.0],
            [500.0, 10.0, 1.0],
        ];
        let a = archive(&pts);
        let rows = summarize(&a, &NAMES).unwrap();
        assert_eq!(rows.len(), 5);
        // Scaled distances to the ideal: 2, 1.1875, 0.75, 0.6875, 1.
        let best = rows.iter().find(|r| r.objectives == pts[3]).unwrap();
        assert_eq!(best.tags, ["compromise"]);
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows, &NAMES, None).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
        assert_eq!(
            render_pareto_svg(&a, &NAMES, None).unwrap(),
            render_pareto_svg(&archive(&pts), &NAMES, None).unwrap()
        );
    }

    #[test]
    fn reference_overlay_only_when_given() {
        let a = archive(&[[100.0, 5.0, 2.0], [50.0, 9.0, 3.0]]);
        let without = render_pareto_svg(&a, &NAMES, None).unwrap();
        let with = render_pareto_svg(&a, &NAMES, Some(&[120.0, 8.0, 4.0])).unwrap();
        assert!(!without.contains("class=\"reference\""));
        assert_eq!(with.matches("class=\"reference\"").count(), 3);
        let rows = summarize(&a, &NAMES).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows, &NAMES, Some((&[120.0, 8.0, 4.0], 0.0))).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().last().unwrap().starts_with("reference,120,8,4"));
    }

    #[test]
    fn ideal_point_ignores_infeasible_members() {
        let mut a = archive(&[[100.0, 5.0, 2.0]]);
        a.insert(Solution {
            genome: vec![0.0],
            objectives: vec![1.0, 1.0, 1.0],
            violation: 0.5,
            operator: None,
        })
        .unwrap();
        assert_eq!(ideal_point(&a).unwrap(), vec![100.0, 5.0, 2.0]);
    }
}
