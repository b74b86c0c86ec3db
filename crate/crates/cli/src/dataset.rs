//! Dataset CSV files.
//!
//! UTF-8, header `id,machine,domain,label,e0,...,e{D-1}`, domain is `source`
//! or `target`, label is `0` (normal) or `1` (anomalous). Train and test live
//! in separate files; one file may hold many machines.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use asdal_core::{Domain, Embedding, Label, Sample};

use crate::error::{CliError, Result};

const FIXED_COLUMNS: [&str; 4] = ["id", "machine", "domain", "label"];

pub fn header(dim: usize) -> Vec<String> {
    FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((0..dim).map(|i| format!("e{i}")))
        .collect()
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset(file, path)
}

pub fn read_dataset<R: Read>(reader: R, path: &Path) -> Result<Vec<Sample>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::data(path, format!("cannot read header: {e}")))?
        .clone();
    if headers.len() <= FIXED_COLUMNS.len() {
        return Err(CliError::data(path, "header has no embedding columns"));
    }
    let dim = headers.len() - FIXED_COLUMNS.len();
    let expected = header(dim);
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::data(
            path,
            format!("bad header, expected `{}`", expected.join(",")),
        ));
    }

    let mut samples = Vec::new();
    let mut ids = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::DataRow {
                path: path.into(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |message: String| CliError::DataRow {
            path: path.into(),
            line,
            message,
        };
        if record.len() != headers.len() {
            return Err(row_err(format!(
                "expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(row_err("empty id".into()));
        }
        let domain =
            Domain::parse(&record[2]).ok_or_else(|| row_err(format!("bad domain `{}`", &record[2])))?;
        let label = match &record[3] {
            "0" => Label::Normal,
            "1" => Label::Anomalous,
            other => return Err(row_err(format!("bad label `{other}`"))),
        };
        let values = record
            .iter()
            .skip(FIXED_COLUMNS.len())
            .enumerate()
            .map(|(i, v)| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| row_err(format!("bad value `{v}` in column e{i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let embedding = Embedding::new(values).map_err(|e| row_err(e.to_string()))?;
        if !ids.insert(id.clone()) {
            return Err(row_err(format!("duplicate id `{id}`")));
        }
        samples.push(Sample {
            id,
            machine: record[1].to_string(),
            domain,
            label,
            embedding,
        });
    }
    if samples.is_empty() {
        return Err(CliError::data(path, "no samples"));
    }
    Ok(samples)
}

pub fn write_dataset<W: Write>(writer: W, samples: &[Sample]) -> std::result::Result<(), csv::Error> {
    let dim = samples.first().map_or(0, |s| s.embedding.dim());
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header(dim))?;
    let mut row: Vec<String> = Vec::with_capacity(dim + 4);
    for s in samples {
        row.clear();
        row.push(s.id.clone());
        row.push(s.machine.clone());
        row.push(s.domain.as_str().to_string());
        row.push(s.label.code().to_string());
        row.extend(s.embedding.as_slice().iter().map(|v| v.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_dataset(path: impl AsRef<Path>, samples: &[Sample]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_dataset(std::io::BufWriter::new(file), samples).map_err(|e| CliError::data(path, e))
}
