//! CSV datasets: `t, delta, <covariates...>[, label]` with a mandatory header.
//!
//! Lines starting with `#` are comments (the metadata header). Parsing is
//! locale independent: `.` is the only decimal separator. Categorical
//! columns expand to one dummy per level except the last, which is the
//! reference.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use zicure_core::{Dataset, Observation, Simulation};

use crate::error::{CliError, Result};
use crate::meta::sha256_hex;

const MAX_REPORTED: usize = 50;

/// How one source column becomes covariate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnEncoding {
    Numeric { name: String },
    /// `levels` in order; the last one is the reference and gets no dummy.
    Categorical { name: String, levels: Vec<String> },
}

impl ColumnEncoding {
    pub fn name(&self) -> &str {
        match self {
            ColumnEncoding::Numeric { name } | ColumnEncoding::Categorical { name, .. } => name,
        }
    }
}

/// Maps source columns to the covariate row seen by the model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Encoding {
    pub columns: Vec<ColumnEncoding>,
}

impl Encoding {
    /// Names of the expanded covariates, e.g. `dx1, dx2` for a 3-level `dx`.
    pub fn expanded_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.columns {
            match c {
                ColumnEncoding::Numeric { name } => out.push(name.clone()),
                ColumnEncoding::Categorical { name, levels } => {
                    let (_, dummies) = levels.split_last().expect("categorical has levels");
                    out.extend(dummies.iter().map(|l| format!("{name}{l}")));
                }
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.expanded_names().len()
    }

    /// Encodes raw cell values given in column order.
    pub fn encode(&self, cells: &[&str]) -> std::result::Result<Vec<f64>, String> {
        let mut out = Vec::with_capacity(self.width());
        for (c, cell) in self.columns.iter().zip(cells) {
            match c {
                ColumnEncoding::Numeric { name } => out.push(parse_number(name, cell)?),
                ColumnEncoding::Categorical { name, levels } => {
                    let level = normalise_level(cell);
                    let pos = levels
                        .iter()
                        .position(|l| *l == level)
                        .ok_or_else(|| format!("{name} = {cell:?} is not a known level ({})", levels.join(", ")))?;
                    out.extend((0..levels.len() - 1).map(|i| if i == pos { 1.0 } else { 0.0 }));
                }
            }
        }
        Ok(out)
    }

    /// Human-readable label of an encoded row, e.g. `dx=3` or `x=0.5`.
    pub fn describe(&self, x: &[f64]) -> String {
        let mut parts = Vec::new();
        let mut i = 0;
        for c in &self.columns {
            match c {
                ColumnEncoding::Numeric { name } => {
                    parts.push(format!("{name}={}", x[i]));
                    i += 1;
                }
                ColumnEncoding::Categorical { name, levels } => {
                    let k = levels.len() - 1;
                    let level = x[i..i + k].iter().position(|v| *v == 1.0).map_or(&levels[k], |p| &levels[p]);
                    parts.push(format!("{name}={level}"));
                    i += k;
                }
            }
        }
        if parts.is_empty() {
            "all".to_string()
        } else {
            parts.join(";")
        }
    }
}

/// Which columns of the file are covariates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnSelection {
    /// Covariate columns in model order; `None` takes every column except
    /// `t`, `delta` and `label`.
    pub covariates: Option<Vec<String>>,
    /// Subset of the covariates to treat as categorical.
    #[serde(default)]
    pub categorical: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub encoding: Encoding,
    pub labels: Option<Vec<String>>,
    pub sha256: String,
}

fn normalise_level(cell: &str) -> String {
    let cell = cell.trim();
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => format!("{v}"),
        _ => cell.to_string(),
    }
}

fn parse_number(name: &str, cell: &str) -> std::result::Result<f64, String> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{name} = {cell:?} is not a finite number")),
    }
}

fn level_order(levels: BTreeSet<String>) -> Vec<String> {
    let mut levels: Vec<String> = levels.into_iter().collect();
    if levels.iter().all(|l| l.parse::<f64>().is_ok()) {
        levels.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    }
    levels
}

struct Table {
    header: Vec<String>,
    /// `(line number, cells)`.
    rows: Vec<(u64, Vec<String>)>,
    sha256: String,
}

fn read_table(path: &Path) -> Result<Table> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::format(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(CliError::format(path, "missing header row"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::format(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table {
        header,
        rows,
        sha256: sha256_hex(&bytes),
    })
}

fn column(table: &Table, path: &Path, name: &str) -> Result<usize> {
    table
        .header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Usage(format!("{}: no column named {name:?}", path.display())))
}

fn build_encoding(table: &Table, path: &Path, sel: &ColumnSelection, idx: &[usize]) -> Result<Encoding> {
    let names: Vec<String> = idx.iter().map(|&i| table.header[i].clone()).collect();
    for c in &sel.categorical {
        if !names.contains(c) {
            return Err(CliError::Usage(format!(
                "{}: categorical column {c:?} is not among the covariates",
                path.display()
            )));
        }
    }
    let columns = idx
        .iter()
        .zip(names)
        .map(|(&i, name)| {
            if sel.categorical.contains(&name) {
                let levels: BTreeSet<String> = table.rows.iter().map(|(_, r)| normalise_level(&r[i])).collect();
                ColumnEncoding::Categorical { name, levels: level_order(levels) }
            } else {
                ColumnEncoding::Numeric { name }
            }
        })
        .collect();
    Ok(Encoding { columns })
}

fn covariate_indices(table: &Table, path: &Path, names: Option<&[String]>) -> Result<Vec<usize>> {
    match names {
        Some(names) => names.iter().map(|n| column(table, path, n)).collect(),
        None => Ok((0..table.header.len())
            .filter(|&i| !matches!(table.header[i].as_str(), "t" | "delta" | "label"))
            .collect()),
    }
}

fn finish_problems(path: &Path, mut problems: Vec<String>) -> Result<()> {
    if problems.is_empty() {
        return Ok(());
    }
    if problems.len() > MAX_REPORTED {
        let extra = problems.len() - MAX_REPORTED;
        problems.truncate(MAX_REPORTED);
        problems.push(format!("... and {extra} more"));
    }
    Err(CliError::Validation {
        path: path.to_path_buf(),
        problems,
    })
}

/// Reads and validates a lifetime dataset. With `fixed` the covariate
/// encoding (including categorical levels) is taken from a fitted model
/// instead of being discovered from the file.
pub fn read_dataset(path: &Path, sel: &ColumnSelection, fixed: Option<&Encoding>) -> Result<LoadedData> {
    let table = read_table(path)?;
    let t_col = column(&table, path, "t")?;
    let d_col = column(&table, path, "delta")?;
    let label_col = table.header.iter().position(|h| h == "label");
    let (encoding, idx) = match fixed {
        Some(enc) => {
            let names: Vec<String> = enc.columns.iter().map(|c| c.name().to_string()).collect();
            (enc.clone(), covariate_indices(&table, path, Some(&names))?)
        }
        None => {
            let idx = covariate_indices(&table, path, sel.covariates.as_deref())?;
            (build_encoding(&table, path, sel, &idx)?, idx)
        }
    };

    let mut problems = Vec::new();
    let mut observations = Vec::with_capacity(table.rows.len());
    for (row_no, (line, cells)) in table.rows.iter().enumerate() {
        let at = format!("row {} (line {line})", row_no + 1);
        let t = match parse_number("t", &cells[t_col]) {
            Ok(t) if t < 0.0 => {
                problems.push(format!("{at}: t = {t} is negative"));
                continue;
            }
            Ok(t) => t,
            Err(e) => {
                problems.push(format!("{at}: {e}"));
                continue;
            }
        };
        let event = match cells[d_col].trim().parse::<f64>() {
            Ok(v) if v == 1.0 => true,
            Ok(v) if v == 0.0 => false,
            _ => {
                problems.push(format!("{at}: delta = {:?} must be 0 or 1", cells[d_col]));
                continue;
            }
        };
        if t == 0.0 && !event {
            problems.push(format!("{at}: t = 0 must be an observed event (delta = 1)"));
            continue;
        }
        let raw: Vec<&str> = idx.iter().map(|&i| cells[i].as_str()).collect();
        match encoding.encode(&raw) {
            Ok(x) => observations.push(Observation::new(t, event, x)?),
            Err(e) => problems.push(format!("{at}: {e}")),
        }
    }
    finish_problems(path, problems)?;
    if observations.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    let labels = label_col.map(|c| table.rows.iter().map(|(_, r)| r[c].clone()).collect());
    Ok(LoadedData {
        dataset: Dataset::new(observations, encoding.expanded_names())?,
        encoding,
        labels,
        sha256: table.sha256,
    })
}

/// Reads covariate rows only (applicant files need no outcome columns).
pub fn read_covariates(path: &Path, encoding: &Encoding) -> Result<(Vec<Vec<f64>>, String)> {
    let table = read_table(path)?;
    let names: Vec<String> = encoding.columns.iter().map(|c| c.name().to_string()).collect();
    let idx = covariate_indices(&table, path, Some(&names))?;
    let mut problems = Vec::new();
    let mut rows = Vec::with_capacity(table.rows.len());
    for (row_no, (line, cells)) in table.rows.iter().enumerate() {
        let raw: Vec<&str> = idx.iter().map(|&i| cells[i].as_str()).collect();
        match encoding.encode(&raw) {
            Ok(x) => rows.push(x),
            Err(e) => problems.push(format!("row {} (line {line}): {e}", row_no + 1)),
        }
    }
    finish_problems(path, problems)?;
    Ok((rows, table.sha256))
}

/// CSV text of a simulated dataset, labels included.
pub fn simulation_csv(header: &str, sim: &Simulation) -> String {
    let data = &sim.dataset;
    let mut s = String::from(header);
    s.push_str("t,delta");
    for name in data.covariate_names() {
        s.push(',');
        s.push_str(name);
    }
    s.push_str(",label\n");
    for (o, label) in data.observations().iter().zip(&sim.labels) {
        let _ = write!(s, "{},{}", o.time, o.event as u8);
        for x in &o.covariates {
            let _ = write!(s, ",{x}");
        }
        let _ = writeln!(s, ",{}", label.as_str());
    }
    s
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    std::fs::write(path, contents).map_err(CliError::io(path))
}
