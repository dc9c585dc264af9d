use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{HResult, HarnessError};
use crate::manifest::ExperimentManifest;

/// Version stamped into every JSON envelope and every CSV row.
pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_tag(name: &str) -> String {
    format!("tickgate.{name}.v{SCHEMA_VERSION}")
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope<'a, R: Serialize> {
    pub schema: String,
    pub manifest_hash: String,
    pub provenance: Value,
    pub manifest: &'a ExperimentManifest,
    pub result: R,
}

/// A CSV table held in memory until the run commits its artifacts.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        let mut header = vec!["schema".to_string()];
        header.extend(columns.iter().map(|c| c.to_string()));
        Table { name: name.to_string(), header, rows: vec![] }
    }

    pub fn push(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len() + 1, self.header.len());
        let mut row = vec![schema_tag(&self.name)];
        row.extend(fields);
        self.rows.push(row);
    }
}

/// Shortest round-trip formatting, so rewritten CSVs are byte-identical.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Everything an experiment produces, written in one go once it finished.
pub struct ArtifactSet {
    pub json_name: String,
    pub json: Value,
    pub tables: Vec<Table>,
    pub log: Vec<String>,
}

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io { path: path.display().to_string(), source }
}

impl ArtifactSet {
    pub fn write(&self, dir: &Path) -> HResult<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut written = Vec::new();
        let jp = dir.join(format!("{}.json", self.json_name));
        let mut text = serde_json::to_string_pretty(&self.json).expect("json value serializes");
        text.push('\n');
        fs::write(&jp, text).map_err(|e| io_err(&jp, e))?;
        written.push(jp);
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&p).map_err(|e| io_err(&p, e.into()))?;
            w.write_record(&t.header).map_err(|e| io_err(&p, e.into()))?;
            for r in &t.rows {
                w.write_record(r).map_err(|e| io_err(&p, e.into()))?;
            }
            w.flush().map_err(|e| io_err(&p, e))?;
            written.push(p);
        }
        let lp = dir.join("run.log");
        let mut f = fs::File::create(&lp).map_err(|e| io_err(&lp, e))?;
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(f, "unix_time {stamp}").map_err(|e| io_err(&lp, e))?;
        for l in &self.log {
            writeln!(f, "{l}").map_err(|e| io_err(&lp, e))?;
        }
        written.push(lp);
        Ok(written)
    }
}

/// SHA-256 of a file, hex encoded.
pub fn file_hash(path: &Path) -> HResult<String> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
