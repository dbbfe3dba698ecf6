//! Run manifests and JSON/CSV writers with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use expfunc_core::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::CliError;

/// Provenance embedded in every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub family: Option<String>,
    pub params: Value,
    pub policy: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub threads: usize,
    pub wall_time_s: f64,
}

/// Formats floats as `d.dddddddddddddddde±x`: 17 significant digits.
pub fn f17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A JSON number, or the strings "inf", "-inf", "nan" for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(f17(x))
    }
}

pub fn complex(z: Complex64) -> Value {
    json!({"re": num(z.re), "im": num(z.im)})
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(f17(v).as_bytes())
    }
}

pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    v.serialize(&mut ser).expect("serializing a Value cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => f17(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn csv(&self, manifest: &RunManifest) -> String {
        let mut out = format!("# manifest {}\n", manifest_json(manifest));
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> =
                        self.header.iter().zip(r).map(|(h, c)| (h.to_string(), c.json())).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

fn manifest_json(m: &RunManifest) -> String {
    to_json_string(&serde_json::to_value(m).expect("manifest serializes"))
}

/// What a subcommand produced: JSON fields, and optionally a table that can
/// be written as CSV.
pub struct Report {
    pub body: Map<String, Value>,
    pub table: Option<Table>,
}

impl Report {
    pub fn json(body: Value) -> Self {
        let Value::Object(body) = body else { panic!("report body must be an object") };
        Report { body, table: None }
    }

    pub fn with_table(body: Value, table: Table) -> Self {
        Report { table: Some(table), ..Report::json(body) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Where and how to write: `--out json|csv` picks the stdout format, any
/// other value is a file path whose `.csv` extension selects CSV.
#[derive(Clone, Debug)]
pub struct Sink {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Sink {
    pub fn parse(out: Option<&str>) -> Sink {
        match out {
            None | Some("json") => Sink { format: Format::Json, path: None },
            Some("csv") => Sink { format: Format::Csv, path: None },
            Some(p) => {
                let path = PathBuf::from(p);
                let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
                Sink { format: if csv { Format::Csv } else { Format::Json }, path: Some(path) }
            }
        }
    }

    pub fn render(&self, report: &Report, manifest: &RunManifest) -> Result<String, CliError> {
        match self.format {
            Format::Csv => match &report.table {
                Some(t) => Ok(t.csv(manifest)),
                None => Err(CliError::Usage("this subcommand has no CSV output".into())),
            },
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
                obj.extend(report.body.clone());
                if let Some(t) = &report.table {
                    obj.insert("rows".into(), t.json_rows());
                }
                Ok(to_json_string(&Value::Object(obj)) + "\n")
            }
        }
    }

    pub fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.path {
            Some(p) => write_file(p, text),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(CliError::Io)
            }
        }
    }
}

pub fn write_file(p: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::Io)?;
    }
    fs::write(p, text).map_err(CliError::Io)
}

pub fn table_csv(t: &Table, m: &RunManifest) -> String {
    t.csv(m)
}

pub fn report_json(r: &Report, m: &RunManifest) -> String {
    Sink { format: Format::Json, path: None }.render(r, m).expect("JSON rendering cannot fail")
}
