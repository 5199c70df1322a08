use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{invalid, Error, Result};
use crate::Scalar;

pub const MISSING_TOKEN: &str = "NA";
pub const RESPONSE_COLUMN: &str = "y";

/// Read a dataset from CSV. The header names every column; the response
/// column is `y`, every other column is a feature, and `NA` marks a missing cell.
pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let y_col = header
        .iter()
        .position(|h| h == RESPONSE_COLUMN)
        .ok_or_else(|| Error::Parse { line: 1, message: format!("no '{RESPONSE_COLUMN}' column in header") })?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != y_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let p = names.len();

    let mut features = Vec::new();
    let mut mask = Vec::new();
    let mut response = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let parsed = if field == MISSING_TOKEN {
                None
            } else {
                let v: T = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column '{}': '{}' is not a number", &header[j], field),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("column '{}': non-finite value '{}'", &header[j], field),
                    });
                }
                Some(v)
            };
            if j == y_col {
                response.push(parsed.ok_or_else(|| Error::Parse {
                    line,
                    message: format!("row {} has a missing response", k + 1),
                })?);
            } else {
                features.push(parsed.unwrap_or_else(T::zero));
                mask.push(parsed.is_none());
            }
        }
    }
    Dataset::new(p, features, mask, response, names)
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file)
}

/// Write features then `y`. Values use the shortest representation that
/// parses back to the same float.
pub fn write_csv<T: Scalar, W: Write>(dataset: &Dataset<T>, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = dataset.column_names().iter().map(String::as_str).collect();
    header.push(RESPONSE_COLUMN);
    wtr.write_record(&header)?;
    let mut fields = Vec::with_capacity(dataset.n_cols() + 1);
    for i in 0..dataset.n_rows() {
        fields.clear();
        for h in 0..dataset.n_cols() {
            fields.push(match dataset.get(i, h) {
                Some(v) => v.to_string(),
                None => MISSING_TOKEN.to_string(),
            });
        }
        fields.push(dataset.y(i).to_string());
        wtr.write_record(&fields)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv<T: Scalar>(dataset: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_csv(dataset, std::io::BufWriter::new(file))
}
