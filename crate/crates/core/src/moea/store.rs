//! Archive files: one CSV row per solution with objectives, violation,
//! operator and genome.

use std::io::{Read, Write};
use std::path::Path;

use super::archive::{Archive, Solution};
use crate::error::{Error, Result};
use crate::io;

pub fn write_archive_csv<W: Write>(writer: W, archive: &Archive, objective_names: &[&str]) -> Result<()> {
    let m = archive.epsilons().len();
    if objective_names.len() != m {
        return Err(Error::domain("one name per objective required"));
    }
    let genes = archive.members().first().map_or(0, |s| s.genome.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = objective_names.iter().map(|s| s.to_string()).collect();
    header.push("violation".into());
    header.push("operator".into());
    header.extend((0..genes).map(|i| format!("w{i}")));
    w.write_record(&header)?;
    for s in archive.members() {
        let mut row: Vec<String> = s.objectives.iter().map(f64::to_string).collect();
        row.push(s.violation.to_string());
        row.push(s.operator.map_or(String::new(), |op| op.to_string()));
        row.extend(s.genome.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads solutions back. Rows are re-inserted through the archive, so a file
/// that was written by [`write_archive_csv`] yields the same archive.
pub fn read_archive_csv<R: Read>(reader: R, epsilons: Vec<f64>, source: &str) -> Result<Archive> {
    let m = epsilons.len();
    let mut archive = Archive::new(epsilons)?;
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.len() < m + 2 || &headers[m] != "violation" || &headers[m + 1] != "operator" {
        return Err(Error::Load {
            path: source.into(),
            row: 1,
            message: format!("expected {m} objective columns, then violation and operator"),
        });
    }
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        let load = |message: String| Error::Load {
            path: source.into(),
            row,
            message,
        };
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| load(format!("column {}: bad number '{}'", &headers[j], &rec[j])))
        };
        let objectives = (0..m).map(num).collect::<Result<Vec<_>>>()?;
        let violation = num(m)?;
        let operator = match &rec[m + 1] {
            "" => None,
            s => Some(s.parse().map_err(|_| load(format!("unknown operator '{s}'")))?),
        };
        let genome = (m + 2..rec.len()).map(num).collect::<Result<Vec<_>>>()?;
        archive.insert(Solution {
            genome,
            objectives,
            violation,
            operator,
        })?;
    }
    Ok(archive)
}

pub fn save_archive(path: &Path, archive: &Archive, objective_names: &[&str]) -> Result<()> {
    let mut buf = Vec::new();
    write_archive_csv(&mut buf, archive, objective_names)?;
    io::write(path, buf)
}

pub fn load_archive(path: &Path, epsilons: Vec<f64>) -> Result<Archive> {
    read_archive_csv(io::open(path)?, epsilons, &path.display().to_string())
}
