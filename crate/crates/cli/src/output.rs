//! CSV and JSON rendering of sweeps.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::request::{Format, SweepRequest};
use crate::scenarios::{Method, SweepResult};
use crate::CliError;

pub const CSV_HEADER: &str = "parameter,curve,value,method";

/// Rows in curve order, then parameter order.
pub fn write_csv<W: Write>(results: &[SweepResult], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in results {
        for p in &r.points {
            writeln!(w, "{},{},{},{}", p.parameter, r.curve, p.value, r.method.as_str())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Row<'a> {
    parameter: f64,
    curve: &'a str,
    value: f64,
    method: Method,
}

#[derive(Serialize)]
struct CurveInfo<'a> {
    curve: &'a str,
    method: Method,
    points: usize,
    metadata: &'a BTreeMap<String, String>,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    scenario: String,
    parameter: &'static str,
    request: &'a SweepRequest,
    curves: Vec<CurveInfo<'a>>,
    rows: Vec<Row<'a>>,
}

pub fn sweep_json(req: &SweepRequest, results: &[SweepResult]) -> serde_json::Value {
    let doc = SweepDocument {
        scenario: req.scenario.to_string(),
        parameter: req.scenario.parameter_name(),
        request: req,
        curves: results
            .iter()
            .map(|r| CurveInfo {
                curve: &r.curve,
                method: r.method,
                points: r.points.len(),
                metadata: &r.metadata,
            })
            .collect(),
        rows: results
            .iter()
            .flat_map(|r| {
                r.points.iter().map(move |p| Row {
                    parameter: p.parameter,
                    curve: &r.curve,
                    value: p.value,
                    method: r.method,
                })
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("finite values serialize")
}

pub fn render(req: &SweepRequest, results: &[SweepResult]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match req.format {
        Format::Csv => write_csv(results, &mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &sweep_json(req, results))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Write to the request's output path, or stdout.
pub fn emit(bytes: &[u8], path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
