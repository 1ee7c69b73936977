use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fkpp_core::graph::parse_graph_json;
use fkpp_core::{EdgeProfile, Error, FlowerSpec, MetricGraph};
use serde::{Deserialize, Serialize};

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 2,
            Error::OutsideRegion { .. } | Error::BelowThreshold { .. } => 3,
            Error::NotAFlower => 4,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(2, format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Parses `stem=<L> loops=<l1,l2,...>`; loop values are total loop lengths.
pub fn parse_flower(items: &[String]) -> CliResult<FlowerSpec<f64>> {
    let mut stem = None;
    let mut loops = Vec::new();
    for item in items.iter().flat_map(|s| s.split_whitespace()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::new(2, format!("expected key=value in --flower, got `{item}`")))?;
        let number =
            |s: &str| s.trim().parse::<f64>().map_err(|_| Failure::new(2, format!("bad number `{s}` in --flower")));
        match key {
            "stem" => stem = Some(number(value)?),
            "loops" => {
                for v in value.split(',').filter(|s| !s.trim().is_empty()) {
                    loops.push(number(v)? / 2.0);
                }
            }
            _ => return Err(Failure::new(2, format!("unknown --flower key `{key}`"))),
        }
    }
    let stem = stem.ok_or_else(|| Failure::new(2, "--flower needs stem=<length>"))?;
    Ok(FlowerSpec::new(stem, loops)?)
}

pub fn load_graph(path: Option<&Path>, flower: &[String]) -> CliResult<MetricGraph<f64>> {
    match (path, flower.is_empty()) {
        (Some(p), true) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::new(2, format!("{}: {e}", p.display())))?;
            Ok(parse_graph_json(&text)?)
        }
        (None, false) => Ok(parse_flower(flower)?.to_graph()),
        _ => Err(Failure::new(2, "give exactly one of --graph or --flower")),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProfileRow {
    pub edge_id: String,
    pub x: f64,
    pub u: f64,
}

#[derive(Debug, Serialize)]
pub struct TraceRow {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub sup_norm: f64,
}

pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profiles(path: &Path, profiles: &[EdgeProfile<f64>]) -> CliResult<()> {
    let rows =
        profiles.iter().flat_map(|p| p.x.iter().zip(&p.u).map(|(&x, &u)| ProfileRow { edge_id: p.edge.clone(), x, u }));
    write_csv(path, rows)
}

/// Groups `edge_id,x,u` rows by edge, keeping file order within an edge.
pub fn read_profiles(path: &Path) -> CliResult<Vec<EdgeProfile<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out: Vec<EdgeProfile<f64>> = Vec::new();
    for row in r.deserialize() {
        let row: ProfileRow = row?;
        match out.iter_mut().find(|p| p.edge == row.edge_id) {
            Some(p) => {
                p.x.push(row.x);
                p.u.push(row.u);
            }
            None => out.push(EdgeProfile { edge: row.edge_id, x: vec![row.x], u: vec![row.u] }),
        }
    }
    Ok(out)
}

/// Writes `value` as pretty JSON to `path`, or to stdout.
pub fn emit_json(path: Option<&PathBuf>, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => writeln!(std::io::stdout(), "{text}")?,
    }
    Ok(())
}
