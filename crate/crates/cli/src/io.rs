//! CSV input and output for prediction matrices and label files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use spectral_ensemble::{LabelVector, PredictionMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}, column {col}: cannot parse {value:?} as a label")]
    ParseError { row: usize, col: usize, value: String },
    #[error("row {row}, column {col}: {value:?} is not -1 or +1")]
    MalformedLabel { row: usize, col: usize, value: String },
    #[error("row {row} has {actual} cells, expected {expected}")]
    RaggedRows { row: usize, expected: usize, actual: usize },
    #[error("{0}")]
    Csv(String),
    #[error(transparent)]
    Model(#[from] spectral_ensemble::Error),
}

enum Cell {
    Label(i8),
    Numeric,
    Text,
}

fn classify(cell: &str) -> Cell {
    match cell.trim() {
        "1" | "+1" => Cell::Label(1),
        "-1" => Cell::Label(-1),
        other if other.parse::<f64>().is_ok() => Cell::Numeric,
        _ => Cell::Text,
    }
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<i8, LoadError> {
    match classify(cell) {
        Cell::Label(l) => Ok(l),
        Cell::Numeric => Err(LoadError::MalformedLabel {
            row,
            col,
            value: cell.trim().to_string(),
        }),
        Cell::Text => Err(LoadError::ParseError {
            row,
            col,
            value: cell.trim().to_string(),
        }),
    }
}

fn read_records(path: &Path) -> Result<Vec<Vec<String>>, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_string).collect::<Vec<String>>())
                .map_err(|e| LoadError::Csv(e.to_string()))
        })
        .filter(|r| !matches!(r, Ok(cells) if cells.iter().all(|c: &String| c.is_empty())))
        .collect()
}

/// Reads a CSV with one row per instance and one column per classifier.
/// A first row containing any non-numeric cell is taken as a header of
/// classifier names. Rows and columns in errors are 1-based file positions.
pub fn load_predictions(path: &Path) -> Result<PredictionMatrix, LoadError> {
    let records = read_records(path)?;
    let Some(first) = records.first() else {
        return Err(spectral_ensemble::Error::EmptyInput.into());
    };
    let has_header = first.iter().any(|c| matches!(classify(c), Cell::Text));
    let width = first.len();
    let body_start = usize::from(has_header);
    let mut entries = Vec::with_capacity(records.len() * width);
    for (k, rec) in records.iter().enumerate().skip(body_start) {
        let row = k + 1;
        if rec.len() != width {
            return Err(LoadError::RaggedRows {
                row,
                expected: width,
                actual: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            entries.push(parse_cell(cell, row, c + 1)?);
        }
    }
    let instances = records.len() - body_start;
    let matrix = PredictionMatrix::from_row_major(entries, instances, width)?;
    Ok(if has_header {
        matrix.with_names(first.clone())?
    } else {
        matrix
    })
}

/// Reads one +/-1 label per line.
pub fn load_labels(path: &Path) -> Result<LabelVector, LoadError> {
    let records = read_records(path)?;
    let mut labels = Vec::with_capacity(records.len());
    for (k, rec) in records.iter().enumerate() {
        if rec.len() != 1 {
            return Err(LoadError::RaggedRows {
                row: k + 1,
                expected: 1,
                actual: rec.len(),
            });
        }
        labels.push(parse_cell(&rec[0], k + 1, 1)?);
    }
    Ok(LabelVector::new(labels)?)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes a prediction matrix with a header row of classifier names.
pub fn write_predictions(path: &Path, matrix: &PredictionMatrix) -> anyhow::Result<()> {
    let mut w = create(path)?;
    let names: Vec<String> = match matrix.names() {
        Some(n) => n.to_vec(),
        None => (0..matrix.classifiers()).map(|i| format!("c{i}")).collect(),
    };
    writeln!(w, "{}", names.join(","))?;
    for row in matrix.rows() {
        let cells: Vec<String> = row.iter().map(i8::to_string).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labels(path: &Path, labels: &LabelVector) -> anyhow::Result<()> {
    let mut w = create(path)?;
    for l in labels.as_slice() {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one label column per method under a header of method names.
pub fn write_label_columns(path: &Path, columns: &[(String, &LabelVector)]) -> anyhow::Result<()> {
    let mut w = create(path)?;
    let header: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
    writeln!(w, "{}", header.join(","))?;
    let len = columns.first().map_or(0, |(_, l)| l.len());
    for k in 0..len {
        let cells: Vec<String> = columns.iter().map(|(_, l)| l.as_slice()[k].to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(body: &str) -> Result<PredictionMatrix, LoadError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, body).unwrap();
        load_predictions(&path)
    }

    #[test]
    fn plain_body() {
        let m = load_str("-1,1\n1,1\n").unwrap();
        assert_eq!(m.as_row_major(), &[-1, 1, 1, 1]);
        assert!(m.names().is_none());
    }

    #[test]
    fn header_names() {
        let m = load_str("clfA,clfB\n+1,-1\n-1,-1\n").unwrap();
        assert_eq!(m.names().unwrap(), &["clfA".to_string(), "clfB".to_string()]);
        assert_eq!(m.instances(), 2);
    }

    #[test]
    fn zero_is_malformed() {
        assert!(matches!(
            load_str("1,0\n1,1\n"),
            Err(LoadError::MalformedLabel { row: 1, col: 2, .. })
        ));
    }

    #[test]
    fn text_in_body_is_a_parse_error() {
        assert!(matches!(
            load_str("a,b\n1,x\n1,1\n"),
            Err(LoadError::ParseError { row: 2, col: 2, .. })
        ));
    }

    #[test]
    fn ragged() {
        assert!(matches!(
            load_str("1,1\n1\n"),
            Err(LoadError::RaggedRows { row: 2, expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let m = PredictionMatrix::from_row_major(vec![1, -1, -1, 1, 1, 1], 3, 2).unwrap();
        write_predictions(&path, &m).unwrap();
        let back = load_predictions(&path).unwrap();
        assert_eq!(back.as_row_major(), m.as_row_major());
    }
}
