//! File formats: network JSON, environment CSV, distribution syntax, and
//! the JSON mirrors of experiment outputs.

use std::fs;
use std::path::Path;

use ohmlab_core::graph::Network;
use ohmlab_core::{Distribution, Environment};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::experiments::{ExperimentConfig, ExperimentReport};

/// Wire schema: `{"vertices": N, "edges": [[u, v], ...], "coords": [...]}`.
#[derive(Serialize, Deserialize)]
struct NetworkJson {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Vec<i64>>>,
}

pub fn network_to_json(net: &Network) -> String {
    let doc = NetworkJson {
        vertices: net.vertex_count(),
        edges: net.edges().iter().map(|e| (e.u, e.v)).collect(),
        coords: net.coords().map(|c| c.to_vec()),
    };
    serde_json::to_string_pretty(&doc).expect("network serialization cannot fail")
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let doc: NetworkJson =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("network json: {e}")))?;
    let net = Network::from_edges(doc.vertices, &doc.edges)?;
    match doc.coords {
        Some(coords) => Ok(net.with_coords(coords)?),
        None => Ok(net),
    }
}

pub fn read_network(path: &Path) -> Result<Network> {
    network_from_json(&fs::read_to_string(path)?)
}

/// CSV schema: `edge_id,resistance`.
pub fn environment_to_csv(env: &Environment) -> String {
    let mut out = String::from("edge_id,resistance\n");
    for (id, r) in env.resistances().iter().enumerate() {
        out.push_str(&format!("{id},{r}\n"));
    }
    out
}

/// Flow CSV schema: `edge_id,theta`.
pub fn flow_to_csv(theta: &[f64]) -> String {
    let mut out = String::from("edge_id,theta\n");
    for (id, th) in theta.iter().enumerate() {
        out.push_str(&format!("{id},{th}\n"));
    }
    out
}

/// Distribution syntax: `bernoulli:a,b`, `uniform:lo,hi`, `const:c`.
pub fn parse_distribution(spec: &str) -> Result<Distribution> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Parse(format!("distribution `{spec}` needs `kind:params`")))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Parse(format!("`{s}`: {e}"))))
        .collect::<Result<_>>()?;
    let dist = match (kind, nums.as_slice()) {
        ("bernoulli", [a, b]) => Distribution::bernoulli(*a, *b)?,
        ("uniform", [lo, hi]) => Distribution::uniform(*lo, *hi)?,
        ("const", [c]) => Distribution::constant(*c)?,
        _ => {
            return Err(CliError::Parse(format!(
                "distribution `{spec}` (expected bernoulli:a,b | uniform:lo,hi | const:c)"
            )))
        }
    };
    Ok(dist)
}

pub fn distribution_to_string(dist: &Distribution) -> String {
    match dist {
        Distribution::Bernoulli { a, b } => format!("bernoulli:{a},{b}"),
        Distribution::Uniform { lo, hi } => format!("uniform:{lo},{hi}"),
        Distribution::Constant { c } => format!("const:{c}"),
    }
}

/// JSON mirror of an experiment output: the full resolved config plus the
/// rows, so a CSV can always be traced back to what produced it.
#[derive(Serialize)]
pub struct Mirror<'a> {
    pub config: &'a ExperimentConfig,
    #[serde(flatten)]
    pub report: &'a ExperimentReport,
}

pub fn report_to_json(config: &ExperimentConfig, report: &ExperimentReport) -> String {
    serde_json::to_string_pretty(&Mirror { config, report }).expect("report serialization cannot fail")
}

/// Write to the path, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
