//! Report envelope and serialization helpers.
//!
//! Every JSON report carries a `meta` block with the crate version, a SHA-256
//! hash of the raw config bytes, and the tolerances in effect, so a report can
//! always be traced back to the exact run that produced it. CSV numbers are
//! written with 17 significant digits so round-tripping through text is exact.

use crate::error::{Error, Result};
use crate::profile::Tolerances;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: String,
    pub config_hash: String,
    pub tolerances: Tolerances,
}

impl Meta {
    pub fn new(config_bytes: &[u8], tol: &Tolerances) -> Meta {
        Meta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: hex::encode(Sha256::digest(config_bytes)),
            tolerances: *tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub meta: Meta,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(meta: Meta, body: T) -> Report<T> {
        Report { meta, body }
    }

    /// Pretty JSON with a trailing newline, byte-deterministic for a given body.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let s = self.to_json()?;
        w.write_all(s.as_bytes())
            .map_err(|e| Error::Config(format!("write failed: {e}")))?;
        Ok(())
    }
}

/// Format a float with 17 significant digits (shortest exact representation
/// is not used so that columns line up and diffs stay stable).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A simple CSV writer: comment lines start with '#', then a header row,
/// then data rows with 17-significant-digit floats.
pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new() -> CsvWriter {
        CsvWriter { buf: String::new() }
    }

    pub fn comment(&mut self, line: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(line);
        self.buf.push('\n');
    }

    pub fn header(&mut self, cols: &[&str]) {
        self.buf.push_str(&cols.join(","));
        self.buf.push('\n');
    }

    pub fn row(&mut self, vals: &[f64]) {
        let cells: Vec<String> = vals.iter().map(|&v| fmt_f64(v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

impl Default for CsvWriter {
    fn default() -> Self {
        CsvWriter::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_hash_is_sha256_of_bytes() {
        let tol = Tolerances::default();
        let meta = Meta::new(b"", &tol);
        // SHA-256 of the empty string
        assert_eq!(
            meta.config_hash,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        let meta2 = Meta::new(b"abc", &tol);
        assert_eq!(
            meta2.config_hash,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn report_json_is_deterministic_and_flattened() {
        #[derive(Serialize, Clone)]
        struct Body {
            answer: u32,
        }
        let meta = Meta::new(b"cfg", &Tolerances::default());
        let r = Report::new(meta.clone(), Body { answer: 42 });
        let a = r.to_json().unwrap();
        let b = Report::new(meta, Body { answer: 42 }).to_json().unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"answer\": 42"));
        assert!(a.contains("\"config_hash\""));
    }

    #[test]
    fn csv_round_trips_floats_exactly() {
        let vals = [std::f64::consts::PI, 1.0 / 3.0, -2.5e-13, 0.1 + 0.2];
        for v in vals {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
        let mut w = CsvWriter::new();
        w.comment("context");
        w.header(&["a", "b"]);
        w.row(&[1.0, 2.0]);
        let out = w.finish();
        assert!(out.starts_with("# context\na,b\n1.0000000000000000e0,"));
    }
}
