//! Result documents: fixed-precision JSON, the run manifest and CSV tables.

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A numeric output with its error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Est {
    pub value: f64,
    pub error: f64,
}

pub fn est(value: f64, error: f64) -> Value {
    json!(Est { value, error })
}

/// A closed-form value, exact up to rounding.
pub fn exact(value: f64) -> Value {
    est(value, 4.0 * f64::EPSILON * value.abs())
}

/// Writes every float with 17 significant digits so identical values always
/// produce identical bytes.
struct FixedFloat<F>(F);

impl<F: Formatter> Formatter for FixedFloat<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn to_bytes<F: Formatter>(value: &Value, formatter: F) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat(formatter));
    value
        .serialize(&mut ser)
        .expect("serialising a JSON value into memory cannot fail");
    buf
}

/// Compact fixed-precision encoding, used for digests.
pub fn canonical(value: &Value) -> Vec<u8> {
    to_bytes(value, serde_json::ser::CompactFormatter)
}

pub fn pretty(value: &Value) -> Vec<u8> {
    to_bytes(value, PrettyFormatter::with_indent(b"  "))
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// How the numbers in a document should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// A certificate could not be established (exit code 3).
    Uncertified,
    /// An inequality or bound was violated (exit code 4).
    Violated,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Uncertified => 3,
            Status::Violated => 4,
        }
    }
}

/// A rectangular table for `--csv`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything a command produces.
pub struct Outcome {
    pub outputs: Value,
    pub table: Option<Table>,
    pub status: Status,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn new(outputs: Value) -> Self {
        Self {
            outputs,
            table: None,
            status: Status::Ok,
            seed: None,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }
}

/// The full result document, with the manifest built from the command,
/// its parameters and the digest of the outputs.
pub fn document(
    command: &str,
    inputs: Value,
    globals: Value,
    outcome: &Outcome,
    wall_clock: Option<f64>,
) -> Value {
    let digest = sha256_hex(&canonical(&outcome.outputs));
    let mut manifest = json!({
        "command": command,
        "parameters": { "command": inputs.clone(), "global": globals.clone() },
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": outcome.seed,
        "tolerances": {
            "quad": globals["tol_quad"],
            "root": globals["tol_root"],
            "grid": globals["grid"],
        },
        "result_digest": format!("sha256:{digest}"),
    });
    if let Some(seconds) = wall_clock {
        manifest["wall_clock_seconds"] = json!(seconds);
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "status": outcome.status,
        "inputs": inputs,
        "outputs": outcome.outputs,
        "manifest": manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_significant_digits() {
        let v = json!({"a": 0.0625, "b": [1.0 / 3.0, -2.5e-300]});
        let s = String::from_utf8(canonical(&v)).unwrap();
        assert_eq!(
            s,
            r#"{"a":6.2500000000000000e-2,"b":[3.3333333333333331e-1,-2.5000000000000000e-300]}"#
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][0].as_f64().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn integers_stay_integers() {
        let s = String::from_utf8(canonical(&json!({"n": 3}))).unwrap();
        assert_eq!(s, r#"{"n":3}"#);
    }

    #[test]
    fn digest_depends_only_on_outputs() {
        let out = Outcome::new(json!({"x": est(1.0, 0.1)}));
        let g = json!({"tol_quad": 1e-12, "tol_root": 1e-12, "grid": 200});
        let a = document("kernel", json!({"n": 1}), g.clone(), &out, None);
        let b = document("kernel", json!({"n": 1}), g, &out, Some(3.0));
        assert_eq!(a["manifest"]["result_digest"], b["manifest"]["result_digest"]);
        assert!(a["manifest"].get("wall_clock_seconds").is_none());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Ok.exit_code(), 0);
        assert_eq!(Status::Uncertified.exit_code(), 3);
        assert_eq!(Status::Violated.exit_code(), 4);
        assert!(Status::Violated > Status::Uncertified);
    }
}
