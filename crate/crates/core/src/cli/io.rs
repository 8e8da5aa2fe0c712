//! CSV input: long format `level,value`, summary format `level,n,mean,var`
//! (divisor-`n` variances), and per-cell records `cell,count,value` for the
//! `group` command.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::{Deserialize, Serialize};

use crate::data::{summarize, GroupedSample, SufficientStats};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Long,
    Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputData {
    Long(GroupedSample),
    Summary(SufficientStats),
}

impl InputData {
    pub fn format(&self) -> InputFormat {
        match self {
            InputData::Long(_) => InputFormat::Long,
            InputData::Summary(_) => InputFormat::Summary,
        }
    }

    pub fn stats(&self) -> Result<SufficientStats> {
        match self {
            InputData::Long(s) => summarize(s),
            InputData::Summary(s) => Ok(s.clone()),
        }
    }

    pub fn sample(&self) -> Option<&GroupedSample> {
        match self {
            InputData::Long(s) => Some(s),
            InputData::Summary(_) => None,
        }
    }
}

/// Reads either input format, chosen by the header row.
pub fn read_input<R: Read>(reader: R) -> Result<InputData> {
    let (header, rows) = records(reader)?;
    match header.as_slice() {
        [a, b] if a == "level" && b == "value" => read_long(&rows).map(InputData::Long),
        [a, b, c, d] if a == "level" && b == "n" && c == "mean" && d == "var" => {
            read_summary(&rows).map(InputData::Summary)
        }
        _ => Err(Error::InvalidInput(format!(
            "unrecognised header `{}`; expected `level,value` or `level,n,mean,var`",
            header.join(",")
        ))),
    }
}

/// One per-cell record of the `group` input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub count: u64,
    pub value: f64,
}

/// Reads `cell,count,value` rows. Cell ids are carried for error messages
/// only.
pub fn read_cells<R: Read>(reader: R) -> Result<Vec<CellRecord>> {
    let (header, rows) = records(reader)?;
    if header != ["cell", "count", "value"] {
        return Err(Error::InvalidInput(format!(
            "unrecognised header `{}`; expected `cell,count,value`",
            header.join(",")
        )));
    }
    let mut bad = Malformed::default();
    let mut cells = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        if rec.len() != 3 {
            bad.push(*line, format!("expected 3 fields, found {}", rec.len()));
            continue;
        }
        match (rec[1].parse::<u64>(), parse_finite(&rec[2])) {
            (Ok(count), Ok(value)) => cells.push(CellRecord { count, value }),
            (Err(_), _) => bad.push(*line, format!("count `{}` is not a non-negative integer", &rec[1])),
            (_, Err(e)) => bad.push(*line, e),
        }
    }
    bad.finish()?;
    Ok(cells)
}

/// Groups cells by count, with counts above `cap` merged into level `cap`.
/// Returns `(level, value)` pairs sorted by level, input order kept within a
/// level.
pub fn group_cells(cells: &[CellRecord], cap: Option<u64>) -> Vec<(u64, f64)> {
    let mut out: Vec<(u64, f64)> = cells
        .iter()
        .map(|c| (cap.map_or(c.count, |m| c.count.min(m)), c.value))
        .collect();
    out.sort_by_key(|&(level, _)| level);
    out
}

/// Writes `level,value` rows.
pub fn write_long<W: Write>(out: W, rows: &[(u64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "value"]).map_err(csv_error)?;
    for (level, value) in rows {
        w.write_record([level.to_string(), value.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `-` reads standard input.
pub fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdin()));
    }
    File::open(path)
        .map(|f| Box::new(f) as Box<dyn Read>)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_long(rows: &[(usize, StringRecord)]) -> Result<GroupedSample> {
    let mut bad = Malformed::default();
    let mut pairs = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        if rec.len() != 2 {
            bad.push(*line, format!("expected 2 fields, found {}", rec.len()));
            continue;
        }
        match (parse_finite(&rec[0]), parse_finite(&rec[1])) {
            (Ok(level), Ok(value)) => pairs.push((level, value)),
            (Err(e), _) | (_, Err(e)) => bad.push(*line, e),
        }
    }
    bad.finish()?;
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<f64> = Vec::new();
    let mut observations: Vec<Vec<f64>> = Vec::new();
    for (level, value) in pairs {
        if levels.last() == Some(&level) {
            observations.last_mut().expect("level has a group").push(value);
        } else {
            levels.push(level);
            observations.push(vec![value]);
        }
    }
    GroupedSample::new(levels, observations)
}

fn read_summary(rows: &[(usize, StringRecord)]) -> Result<SufficientStats> {
    let mut bad = Malformed::default();
    let mut parsed: Vec<(usize, f64, usize, f64, f64)> = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        if rec.len() != 4 {
            bad.push(*line, format!("expected 4 fields, found {}", rec.len()));
            continue;
        }
        let n = match rec[1].parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("n `{}` is not a positive integer", &rec[1])),
        };
        match (parse_finite(&rec[0]), n, parse_finite(&rec[2]), parse_finite(&rec[3])) {
            (Ok(_), Ok(_), Ok(_), Ok(v)) if v < 0.0 => bad.push(*line, format!("negative variance {v}")),
            (Ok(level), Ok(n), Ok(mean), Ok(var)) => parsed.push((*line, level, n, mean, var)),
            (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (.., Err(e)) => bad.push(*line, e),
        }
    }
    bad.finish()?;
    if parsed.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }
    parsed.sort_by(|a, b| a.1.total_cmp(&b.1));
    for w in parsed.windows(2) {
        if w[0].1 == w[1].1 {
            bad.push(w[1].0, format!("level {} appears more than once", w[1].1));
        }
    }
    bad.finish()?;
    SufficientStats::from_summary(
        parsed.iter().map(|r| r.1).collect(),
        parsed.iter().map(|r| r.2).collect(),
        parsed.iter().map(|r| r.3).collect(),
        parsed.iter().map(|r| r.4).collect(),
    )
}

type Rows = Vec<(usize, StringRecord)>;

fn records<R: Read>(reader: R) -> Result<(Vec<String>, Rows)> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::InvalidInput("missing header row".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec));
    }
    Ok((header, rows))
}

fn parse_finite(field: &str) -> std::result::Result<f64, String> {
    match field.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("`{field}` is not a finite number")),
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Malformed {
            lines: vec![p.line() as usize],
            message: e.to_string(),
        },
        None => Error::Io(e.to_string()),
    }
}

/// Collects bad rows so that one error lists all of them.
#[derive(Default)]
struct Malformed {
    lines: Vec<usize>,
    first: Option<String>,
}

impl Malformed {
    fn push(&mut self, line: usize, message: String) {
        self.lines.push(line);
        self.first.get_or_insert(message);
    }

    fn finish(&mut self) -> Result<()> {
        if self.lines.is_empty() {
            return Ok(());
        }
        let mut lines = std::mem::take(&mut self.lines);
        lines.sort_unstable();
        let message = self.first.take().unwrap_or_default();
        let message = if lines.len() > 1 {
            format!("{message} (first of {} bad rows)", lines.len())
        } else {
            message
        };
        Err(Error::Malformed { lines, message })
    }
}
