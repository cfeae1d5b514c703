//! CSV ingestion.
use std::path::Path;

use kmo_core::{CenterSet, Dataset};

use crate::error::DataError;

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    /// Column holding a class label, dropped from the coordinates.
    pub label_column: Option<usize>,
    /// Forces header handling; by default a first row with any non-numeric cell is a header.
    pub has_header: Option<bool>,
}

fn parse_row(cells: &[&str]) -> Option<Vec<f64>> {
    cells.iter().map(|c| c.trim().parse::<f64>().ok()).collect()
}

/// Reads numeric rows. Every row must have as many cells as the first data row.
pub fn load_rows(path: &Path, opts: &CsvOptions) -> Result<Vec<Vec<f64>>, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| DataError::Csv {
            path: path.to_owned(),
            source,
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let mut cells: Vec<&str> = record.iter().collect();
        if i == 0 {
            let header = match opts.has_header {
                Some(h) => h,
                None => parse_row(&cells).is_none(),
            };
            if header {
                continue;
            }
        }
        if let Some(l) = opts.label_column {
            if l < cells.len() {
                cells.remove(l);
            }
        }
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(DataError::RaggedRow {
                path: path.to_owned(),
                line,
                expected,
                found: cells.len(),
            });
        }
        let mut row = Vec::with_capacity(cells.len());
        for (column, cell) in cells.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(DataError::NonNumeric {
                        path: path.to_owned(),
                        line,
                        column: column + 1,
                        cell: (*cell).to_owned(),
                    })
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::Empty(path.to_owned()));
    }
    Ok(rows)
}

/// Loads a dataset with unit weights.
pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Dataset, DataError> {
    Ok(Dataset::from_rows(load_rows(path, opts)?)?)
}

pub fn load_centers(path: &Path) -> Result<CenterSet, DataError> {
    let rows = load_rows(path, &CsvOptions::default())?;
    Ok(CenterSet::from_rows(rows[0].len(), &rows)?)
}

/// Writes rows as plain CSV without a header.
pub fn write_rows<W: std::io::Write>(out: W, rows: impl Iterator<Item = Vec<f64>>) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
