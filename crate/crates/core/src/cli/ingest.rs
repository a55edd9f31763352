//! CSV loading for the three models.
//!
//! Every row holds the feature columns, followed by the target (regression)
//! or the +1/-1 label (SVM). A first row that does not parse as numbers is
//! treated as a header. SVM labels given as 0/1 are remapped to -1/+1.

use std::fs::File;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Parsed numeric table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
    /// 1-based file line of each row.
    pub lines: Vec<usize>,
}

impl Table {
    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

fn ingestion(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.display().to_string(),
        row,
        message: message.into(),
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| ingestion(path, 0, format!("cannot open: {e}")))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);

    let mut table = Table {
        header: None,
        rows: Vec::new(),
        lines: Vec::new(),
    };
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ingestion(path, line, e.to_string())
        })?;
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if index == 0 && parsed.iter().any(Option::is_none) {
            table.header = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, value) in parsed.into_iter().enumerate() {
            match value {
                Some(v) if v.is_finite() => row.push(v),
                Some(_) => return Err(ingestion(path, line, format!("column {} is not finite", col + 1))),
                None => {
                    return Err(ingestion(
                        path,
                        line,
                        format!("column {} is not a number: {:?}", col + 1, &record[col]),
                    ))
                }
            }
        }
        table.rows.push(row);
        table.lines.push(line);
    }
    if table.rows.is_empty() {
        return Err(ingestion(path, 0, "no data rows"));
    }
    Ok(table)
}

/// Features and the trailing column.
fn split_last(path: &Path, table: &Table, what: &str) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let cols = table.columns();
    if cols < 2 {
        return Err(ingestion(
            path,
            table.lines[0],
            format!("expected at least one feature column and a {what} column, got {cols} column(s)"),
        ));
    }
    let n = table.rows.len();
    let x = DMatrix::from_fn(n, cols - 1, |i, j| table.rows[i][j]);
    let y = DVector::from_fn(n, |i, _| table.rows[i][cols - 1]);
    Ok((x, y))
}

pub fn regression_data(path: &Path) -> Result<(DMatrix<f64>, DVector<f64>)> {
    split_last(path, &read_table(path)?, "target")
}

/// Features and +1/-1 labels, plus a notice when 0/1 labels were remapped.
pub fn svm_data(path: &Path) -> Result<(DMatrix<f64>, DVector<f64>, Option<String>)> {
    let table = read_table(path)?;
    let (x, mut y) = split_last(path, &table, "label")?;
    let has_zero = y.iter().any(|&v| v == 0.0);
    let has_minus = y.iter().any(|&v| v == -1.0);
    for (i, &v) in y.iter().enumerate() {
        let ok = v == 1.0 || v == -1.0 || (v == 0.0 && !has_minus);
        if !ok {
            return Err(ingestion(
                path,
                table.lines[i],
                format!("label {v} is not +1/-1 (or 0/1)"),
            ));
        }
    }
    let mut notice = None;
    if has_zero {
        let count = y.iter().filter(|&&v| v == 0.0).count();
        y.iter_mut().filter(|v| **v == 0.0).for_each(|v| *v = -1.0);
        let msg = format!("remapped {count} label(s) from 0 to -1");
        log::info!("{}: {msg}", path.display());
        notice = Some(msg);
    }
    Ok((x, y, notice))
}

pub fn kmeans_data(path: &Path) -> Result<DMatrix<f64>> {
    let table = read_table(path)?;
    let n = table.rows.len();
    Ok(DMatrix::from_fn(n, table.columns(), |i, j| table.rows[i][j]))
}
