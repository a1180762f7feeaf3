//! Result tables, JSON summaries and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Text form of a float with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Integer vector as `a;b;c`.
pub fn ints(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

/// Float vector as `a;b;c`.
pub fn nums(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

/// A float serialized to JSON with 17 significant digits; non-finite values
/// become the strings `inf`, `-inf`, `nan`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(num(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&num(self.0))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// RFC-4180 bytes with `config_hash` as the first column.
    pub fn to_csv(&self, config_hash: &str) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let mut header = vec!["config_hash"];
        header.extend(&self.header);
        w.write_record(&header)?;
        for row in &self.rows {
            w.write_record(std::iter::once(config_hash).chain(row.iter().map(String::as_str)))?;
        }
        w.into_inner()
            .map_err(|e| CliError::Numeric(format!("csv: {}", e.error())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobStatus {
    pub job: String,
    /// `ok`, `property-violation` or `failed`.
    pub status: String,
    pub detail: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub workers: usize,
    pub started_at: String,
    pub finished_at: String,
    pub jobs: Vec<JobStatus>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes files into one run directory and records them for the manifest.
pub struct ResultsWriter {
    dir: PathBuf,
    config_hash: String,
    inventory: Vec<OutputFile>,
}

impl ResultsWriter {
    pub fn create(dir: &Path, config_hash: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_hash: config_hash.to_string(),
            inventory: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.inventory.push(OutputFile {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn table(&mut self, table: &Table) -> Result<(), CliError> {
        let bytes = table.to_csv(&self.config_hash)?;
        self.write(&format!("{}.csv", table.name), &bytes)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(&format!("{name}.json"), &bytes)
    }

    pub fn finish(self, mut manifest: Manifest) -> Result<Manifest, CliError> {
        manifest.outputs = self.inventory;
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(self.dir.join("manifest.json"), bytes)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(-0.5), "-5.0000000000000000e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn json_floats_round_trip() {
        #[derive(Serialize)]
        struct S {
            a: F17,
            b: F17,
        }
        let text = serde_json::to_string(&S { a: F17(1.0 / 3.0), b: F17(f64::INFINITY) }).unwrap();
        assert_eq!(text, r#"{"a":3.3333333333333331e-1,"b":"inf"}"#);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["a"].as_f64().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn csv_quotes_and_prefixes_hash() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec!["x,y".into(), "say \"hi\"".into()]);
        let text = String::from_utf8(t.to_csv("h").unwrap()).unwrap();
        assert_eq!(text, "config_hash,a,b\r\nh,\"x,y\",\"say \"\"hi\"\"\"\r\n");
    }
}
