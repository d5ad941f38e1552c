//! CSV ingestion and emission for data matrices and label vectors.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use adr_core::dataset::{DataMatrix, LabelVector};
use adr_core::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    NotNumeric { path: String, row: usize, column: usize, value: String },
    #[error("{path}: row {row} has {found} cells, expected {expected}")]
    Ragged { path: String, row: usize, found: usize, expected: usize },
    #[error("{path}: no data rows")]
    Empty { path: String },
    #[error("label column {column} is outside the {columns} columns")]
    LabelColumn { column: usize, columns: usize },
    #[error("modalities: {0}")]
    Modalities(String),
    #[error(transparent)]
    Core(#[from] adr_core::Error),
}

/// Parses `a..b,c..d` (1-based, inclusive) into 0-based half-open ranges.
pub fn parse_modalities(spec: &str) -> Result<Vec<Range<usize>>, CsvError> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) =
            part.split_once("..").ok_or_else(|| CsvError::Modalities(format!("{part:?} is not of the form a..b")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CsvError::Modalities(format!("{s:?} in {part:?} is not a column number")))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == 0 || b < a {
            return Err(CsvError::Modalities(format!("{part:?} must satisfy 1 <= a <= b")));
        }
        out.push(a - 1..b);
    }
    if out.is_empty() {
        return Err(CsvError::Modalities("no ranges given".into()));
    }
    Ok(out)
}

/// Inverse of [`parse_modalities`].
pub fn format_modalities(ranges: &[Range<usize>]) -> String {
    ranges.iter().map(|r| format!("{}..{}", r.start + 1, r.end)).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub header: bool,
    /// 1-based column holding class labels, excluded from the features.
    pub label_column: Option<usize>,
    /// Feature-column ranges; `None` means one modality.
    pub modalities: Option<Vec<Range<usize>>>,
}

#[derive(Debug, Clone)]
pub struct LoadedData {
    pub data: DataMatrix,
    pub labels: Option<LabelVector>,
    /// Original label text of each class id.
    pub class_names: Vec<String>,
    /// Feature column names when the file has a header.
    pub feature_names: Option<Vec<String>>,
}

/// Class ids follow numeric order when every label is an integer and
/// lexicographic order otherwise.
fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = raw.to_vec();
    names.sort();
    names.dedup();
    if names.iter().all(|n| n.parse::<i64>().is_ok()) {
        names.sort_by_key(|n| n.parse::<i64>().expect("checked above"));
    }
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    (raw.iter().map(|r| index[r.as_str()]).collect(), names)
}

pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<LoadedData, CsvError> {
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|source| CsvError::Io { path: shown.clone(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(options.header).flexible(true).from_reader(file);
    let header: Option<Vec<String>> = if options.header {
        let h = reader.headers().map_err(|source| CsvError::Csv { path: shown.clone(), source })?;
        Some(h.iter().map(|s| s.trim().to_string()).collect())
    } else {
        None
    };
    let first_row = if options.header { 2 } else { 1 };
    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut n_rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|source| CsvError::Csv { path: shown.clone(), source })?;
        let row = first_row + r;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CsvError::Ragged { path: shown, row, found: record.len(), expected });
        }
        if let Some(lc) = options.label_column {
            if lc == 0 || lc > expected {
                return Err(CsvError::LabelColumn { column: lc, columns: expected });
            }
        }
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if options.label_column == Some(c + 1) {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| CsvError::NotNumeric {
                path: shown.clone(),
                row,
                column: c + 1,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(CsvError::NotNumeric { path: shown, row, column: c + 1, value: cell.to_string() });
            }
            values.push(v);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(CsvError::Empty { path: shown });
    }
    let n_features = values.len() / n_rows;
    let matrix = Matrix::from_vec(n_rows, n_features, values)?;
    let modalities = options.modalities.clone().unwrap_or_else(|| vec![0..n_features]);
    let data = DataMatrix::new(matrix, modalities)?;
    let (labels, class_names) = if options.label_column.is_some() {
        let (ids, names) = encode_labels(&raw_labels);
        let n_classes = names.len();
        (Some(LabelVector::new(ids, n_classes)?), names)
    } else {
        (None, Vec::new())
    };
    let feature_names = header.map(|h| {
        h.into_iter().enumerate().filter(|(c, _)| options.label_column != Some(c + 1)).map(|(_, n)| n).collect()
    });
    Ok(LoadedData { data, labels, class_names, feature_names })
}

/// Writes features (and labels as the last column) with shortest
/// round-trip float formatting, so reloading is bit-exact.
pub fn write_csv(path: &Path, data: &Matrix, labels: Option<&[usize]>, header: bool) -> Result<(), CsvError> {
    let shown = path.display().to_string();
    let io = |source| CsvError::Io { path: shown.clone(), source };
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
    let mut text = String::new();
    if header {
        let mut names: Vec<String> = (1..=data.ncols()).map(|j| format!("f{j}")).collect();
        if labels.is_some() {
            names.push("label".into());
        }
        text.push_str(&names.join(","));
        text.push('\n');
    }
    for i in 0..data.nrows() {
        let mut cells: Vec<String> = data.row(i).iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = labels {
            cells.push(l[i].to_string());
        }
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(io)?;
    out.flush().map_err(|source| CsvError::Io { path: shown.clone(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modality_spec_round_trip() {
        assert_eq!(parse_modalities("1..2,3..4").unwrap(), vec![0..2, 2..4]);
        assert_eq!(format_modalities(&[0..2, 2..4]), "1..2,3..4");
        assert!(parse_modalities("0..2").is_err());
        assert!(parse_modalities("3..2").is_err());
        assert!(parse_modalities("1-2").is_err());
        assert!(parse_modalities("").is_err());
    }

    #[test]
    fn integer_labels_sort_numerically() {
        let raw: Vec<String> = ["10", "2", "2", "-1"].iter().map(|s| s.to_string()).collect();
        let (ids, names) = encode_labels(&raw);
        assert_eq!(names, vec!["-1", "2", "10"]);
        assert_eq!(ids, vec![2, 1, 1, 0]);
    }
}
