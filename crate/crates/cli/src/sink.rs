//! Streaming persistence of diagnostic records: NDJSON with a CSV mirror.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use mixbound::{DiagnosticRecord, DiagnosticSink};

use crate::error::CliError;

/// Writes each record as one NDJSON line and one CSV row, flushing per
/// record so partial runs leave readable files.
pub struct RecordWriter<W: Write> {
    ndjson: W,
    csv: csv::Writer<W>,
    kept: Vec<DiagnosticRecord>,
}

impl RecordWriter<BufWriter<File>> {
    pub fn create(ndjson: &Path, csv_path: &Path) -> Result<Self, CliError> {
        let open = |p: &Path| {
            File::create(p).map(BufWriter::new).map_err(|e| CliError::Io {
                path: p.to_path_buf(),
                source: e,
            })
        };
        Ok(RecordWriter::new(open(ndjson)?, open(csv_path)?))
    }
}

impl<W: Write> RecordWriter<W> {
    pub fn new(ndjson: W, csv: W) -> Self {
        RecordWriter {
            ndjson,
            csv: csv::Writer::from_writer(csv),
            kept: Vec::new(),
        }
    }

    pub fn records(&self) -> &[DiagnosticRecord] {
        &self.kept
    }

    pub fn finish(mut self) -> io::Result<Vec<DiagnosticRecord>> {
        self.ndjson.flush()?;
        self.csv.flush()?;
        Ok(self.kept)
    }
}

impl<W: Write> DiagnosticSink for RecordWriter<W> {
    fn accept(&mut self, record: &DiagnosticRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.ndjson, record)?;
        self.ndjson.write_all(b"\n")?;
        self.ndjson.flush()?;
        self.csv.serialize(record).map_err(io::Error::other)?;
        self.csv.flush()?;
        self.kept.push(record.clone());
        Ok(())
    }
}

pub fn parse_ndjson(reader: impl BufRead) -> Result<Vec<DiagnosticRecord>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Records(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| CliError::Records(format!("line {}: {e}", lineno + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_ndjson(path: &Path) -> Result<Vec<DiagnosticRecord>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_ndjson(BufReader::new(f))
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticRecord>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Records(e.to_string()))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| CliError::Records(e.to_string())))
        .collect()
}
