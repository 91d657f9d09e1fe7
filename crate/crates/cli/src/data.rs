//! CSV input: one value per line, or a response followed by design columns.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Response with design rows (intercept first).
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
}

fn records(text: &str) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.context("malformed CSV")?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    if out.is_empty() {
        bail!("empty data file");
    }
    Ok(out)
}

fn parse_row(line: u64, fields: &[String]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            let v: f64 = f.parse().map_err(|_| anyhow::anyhow!("line {line}: '{f}' is not a number"))?;
            if !v.is_finite() {
                bail!("line {line}: non-finite value '{f}'");
            }
            Ok(v)
        })
        .collect()
}

/// Drops a first row that does not parse as numbers.
fn numeric_rows(text: &str) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut recs = records(text)?;
    if recs[0].1.iter().all(|f| f.parse::<f64>().is_err()) {
        recs.remove(0);
    }
    let rows: Vec<(u64, Vec<f64>)> = recs.iter().map(|(l, f)| parse_row(*l, f).map(|v| (*l, v))).collect::<Result<_>>()?;
    if rows.is_empty() {
        bail!("empty data file");
    }
    Ok(rows)
}

pub fn parse_column(text: &str) -> Result<Vec<f64>> {
    let rows = numeric_rows(text)?;
    rows.into_iter()
        .map(|(line, v)| {
            if v.len() != 1 {
                bail!("line {line}: expected one column, found {}", v.len());
            }
            Ok(v[0])
        })
        .collect()
}

/// Rows `y,x1,...,xk`; an intercept column is prepended to the design.
pub fn parse_table(text: &str) -> Result<Table> {
    let rows = numeric_rows(text)?;
    let width = rows[0].1.len();
    if width < 2 {
        bail!("line {}: expected a response and at least one design column", rows[0].0);
    }
    let mut y = Vec::with_capacity(rows.len());
    let mut x = Vec::with_capacity(rows.len());
    for (line, v) in rows {
        if v.len() != width {
            bail!("line {line}: expected {width} columns, found {}", v.len());
        }
        y.push(v[0]);
        x.push(std::iter::once(1.0).chain(v[1..].iter().copied()).collect());
    }
    Ok(Table { y, x })
}

pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_column(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_table(&text).with_context(|| format!("parsing {}", path.display()))
}
