//! Dataset CSV files with header `x0,...,xn,y`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use mosr_core::scalar::format_exact;
use mosr_core::Dataset;

use crate::error::{CliError, DatasetError, Result};

pub fn load_dataset(path: &Path) -> Result<Dataset<f64>, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Open { path: path.to_path_buf(), source })?;
    read_dataset(file)
}

pub fn read_dataset(input: impl std::io::Read) -> Result<Dataset<f64>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| DatasetError::Header(e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let n_inputs = validate_header(&names)?;

    let (mut inputs, mut targets) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DatasetError::Csv { row, msg: e.to_string() })?;
        if record.len() != n_inputs + 1 {
            return Err(DatasetError::Width { row, expected: n_inputs + 1, got: record.len() });
        }
        let mut values = Vec::with_capacity(n_inputs + 1);
        for (cell, column) in record.iter().zip(&names) {
            let v = cell.parse::<f64>().map_err(|_| DatasetError::Cell {
                row,
                column: column.to_string(),
                cell: cell.to_string(),
            })?;
            values.push(v);
        }
        targets.push(values.pop().expect("width checked"));
        inputs.push(values);
    }
    if inputs.is_empty() {
        return Err(DatasetError::NoRows);
    }
    Ok(Dataset::new(inputs, targets).expect("rows are rectangular and nonempty"))
}

fn validate_header(names: &[&str]) -> Result<usize, DatasetError> {
    let Some((&last, inputs)) = names.split_last() else {
        return Err(DatasetError::Header("empty header".into()));
    };
    if last != "y" {
        return Err(DatasetError::Header(format!("last column must be `y`, found `{last}`")));
    }
    if inputs.is_empty() {
        return Err(DatasetError::Header("no input columns".into()));
    }
    for (d, &name) in inputs.iter().enumerate() {
        if name != format!("x{d}") {
            return Err(DatasetError::Header(format!("column {} must be `x{d}`, found `{name}`", d + 1)));
        }
    }
    Ok(inputs.len())
}

/// Writes `data` with every value printed so that it parses back to the same bits.
pub fn write_dataset(data: &Dataset<f64>, path: &Path) -> Result<()> {
    let mut text = String::new();
    for d in 0..data.n_inputs() {
        text.push_str(&format!("x{d},"));
    }
    text.push_str("y\n");
    for (x, y) in data.inputs().iter().zip(data.targets()) {
        for v in x {
            text.push_str(&format_exact(*v));
            text.push(',');
        }
        text.push_str(&format_exact(*y));
        text.push('\n');
    }
    write_file(path, text.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}
