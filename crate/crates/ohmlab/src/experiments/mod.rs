//! Seeded Monte Carlo campaigns.
//!
//! Every campaign follows the same contract: replica `k` of a run draws its
//! randomness from `SeedSpec::new(master_seed, k)` only, replicas are
//! evaluated independently (rayon fans them out across whatever pool is
//! installed), and aggregation folds the results in replica-index order.
//! Output is therefore byte-identical for any worker count.
//!
//! Lattice environments are keyed by global edge geometry rather than edge
//! id: the resistance of an edge depends on the replica seed and the edge's
//! absolute coordinates. Growing or shrinking the surrounding box then
//! leaves the shared edges untouched, which is what makes the
//! buffer-doubling sensitivity column measure truncation error and nothing
//! else.

mod averaged_influence;
mod box_energy;
mod left_right;
mod point_to_point;
mod p_scaling;
mod shape;
mod tail;

pub use averaged_influence::{run_averaged_influence, AveragedEdge, AveragedInfluenceRow};
pub use box_energy::{run_box_energy, BoxEnergyRow};
pub use left_right::run_left_right;
pub use p_scaling::run_p_scaling;
pub use point_to_point::run_point_to_point;
pub use shape::{run_shape, ShapeFrequency, ShapeReplica, ShapeReport};
pub use tail::{run_tail, TailRow};

use ohmlab_core::env::mix64;
use ohmlab_core::graph::Network;
use ohmlab_core::{Distribution, Environment, SeedSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Which campaign to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PointToPoint,
    LeftRight,
    Tail,
    Shape,
    PScaling,
    BoxEnergy,
    AveragedInfluence,
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "point-to-point" | "p2p" => Ok(Self::PointToPoint),
            "left-right" => Ok(Self::LeftRight),
            "tail" => Ok(Self::Tail),
            "shape" => Ok(Self::Shape),
            "p-scaling" => Ok(Self::PScaling),
            "box-energy" => Ok(Self::BoxEnergy),
            "averaged-influence" => Ok(Self::AveragedInfluence),
            other => Err(format!("unknown experiment kind `{other}`")),
        }
    }
}

/// Offset direction for point-to-point targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    Axis,
    Diagonal,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "axis" => Ok(Self::Axis),
            "diag" | "diagonal" => Ok(Self::Diagonal),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

/// Fully resolved campaign configuration; embedded verbatim in the JSON
/// mirror of every output for provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub dimension: usize,
    /// Scale parameters: target offsets `|v|`, grid sides, or averaging
    /// box sides, depending on the kind.
    pub scales: Vec<u64>,
    pub distribution: Distribution,
    pub replicas: u64,
    pub master_seed: u64,
    /// Finite-box truncation: the box around the terminals is enlarged by
    /// `buffer_factor * |v|` in every direction.
    pub buffer_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub tolerance: f64,
    pub direction: Direction,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, distribution: Distribution) -> Self {
        ExperimentConfig {
            kind,
            dimension: 2,
            scales: Vec::new(),
            distribution,
            replicas: 500,
            master_seed: 0,
            buffer_factor: 1.0,
            p: None,
            tolerance: 1e-8,
            direction: Direction::Axis,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas < 2 {
            return Err(CliError::Parse("replicas must be at least 2".into()));
        }
        if self.buffer_factor.is_nan() || self.buffer_factor < 0.5 {
            return Err(CliError::Parse("buffer factor must be at least 0.5".into()));
        }
        if self.scales.is_empty() {
            return Err(CliError::Parse("at least one scale is required".into()));
        }
        if !(1..=4).contains(&self.dimension) {
            return Err(CliError::Parse("dimension must be in 1..=4".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(CliError::Parse("tolerance must be in (0, 1e-4]".into()));
        }
        if let Some(p) = self.p {
            if !(p > 1.0 && p <= 8.0) {
                return Err(CliError::Parse("p must be in (1, 8]".into()));
            }
        }
        Ok(())
    }
}

/// One row of a scaling table. The `reference` column carries the mean
/// growth scale for the kind; further comparison values live in `extras`
/// (JSON mirror only, the CSV schema is fixed).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingRow {
    pub scale: u64,
    pub mean: f64,
    pub mean_lo: f64,
    pub mean_hi: f64,
    pub var: f64,
    pub var_lo: f64,
    pub var_hi: f64,
    pub replicas: u64,
    pub reference: f64,
    pub sensitivity: f64,
    pub sensitivity_flag: bool,
    pub failures: u64,
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty", default)]
    pub extras: std::collections::BTreeMap<String, f64>,
}

pub const SCALING_CSV_HEADER: &str =
    "scale,mean,mean_lo,mean_hi,var,var_lo,var_hi,replicas,reference,sensitivity_flag";

impl ScalingRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.scale,
            self.mean,
            self.mean_lo,
            self.mean_hi,
            self.var,
            self.var_lo,
            self.var_hi,
            self.replicas,
            self.reference,
            u8::from(self.sensitivity_flag)
        )
    }
}

/// Mean and variance with normal-approximation confidence intervals; the
/// variance interval uses the fourth-moment formula. Both are documented
/// approximations, not exact coverage.
pub(crate) struct RowStats {
    pub mean: f64,
    pub mean_lo: f64,
    pub mean_hi: f64,
    pub var: f64,
    pub var_lo: f64,
    pub var_hi: f64,
    pub n: u64,
}

const Z95: f64 = 1.959963984540054;

pub(crate) fn row_stats(values: &[f64]) -> RowStats {
    let n = values.len();
    assert!(n >= 2, "row statistics need at least two replicas");
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
    let m4: f64 = {
        let s: f64 = values.iter().map(|x| (x - mean).powi(4)).sum();
        s / nf
    };
    let var = m2 * nf / (nf - 1.0);
    let mean_se = (var / nf).sqrt();
    let var_se = (((m4 - m2 * m2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0)).sqrt();
    RowStats {
        mean,
        mean_lo: mean - Z95 * mean_se,
        mean_hi: mean + Z95 * mean_se,
        var,
        var_lo: (var - Z95 * var_se).max(0.0),
        var_hi: var + Z95 * var_se,
        n: n as u64,
    }
}

/// Wilson score interval for a proportion.
pub(crate) fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * ((p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt()) / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Evaluate replicas `0..replicas` in parallel and return the successful
/// values in replica-index order. Failures are recorded and skipped; the
/// row aborts once they exceed 1% of the replicas.
pub(crate) fn run_replicas<F>(replicas: u64, label: &str, f: F) -> Result<(Vec<f64>, u64)>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    let outcomes: Vec<Result<f64>> = (0..replicas).into_par_iter().map(&f).collect();
    let mut values = Vec::with_capacity(outcomes.len());
    let mut failures = 0u64;
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(v) => values.push(v),
            Err(e) => {
                failures += 1;
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    if failures * 100 > replicas {
        let detail = first_error.map(|e| e.to_string()).unwrap_or_default();
        return Err(CliError::RowAborted(format!(
            "{label}: {failures}/{replicas} replicas failed ({detail})"
        )));
    }
    Ok((values, failures))
}

fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

/// Per-replica environment sampler keyed by global edge geometry.
#[derive(Clone, Copy, Debug)]
pub struct LatticeSampler {
    replica_seed: u64,
    dist: Distribution,
}

impl LatticeSampler {
    pub fn new(master_seed: u64, replica: u64, dist: Distribution) -> Self {
        LatticeSampler { replica_seed: SeedSpec::new(master_seed, replica).stream_seed(), dist }
    }

    /// The resistance of the lattice edge whose lower endpoint sits at the
    /// given global coordinates, along `axis`.
    pub fn edge_value(&self, lower: &[i64], axis: usize) -> f64 {
        let mut key = self.replica_seed;
        for &c in lower {
            key = mix64(key ^ zigzag(c));
        }
        key = mix64(key ^ axis as u64);
        self.dist.draw(key)
    }

    /// Environment for a lattice-embedded network placed at `origin`.
    pub fn environment(&self, net: &Network, origin: &[i64]) -> Environment {
        let coords = net.coords().expect("lattice sampler needs coordinates");
        let mut lower = vec![0i64; origin.len()];
        let values: Vec<f64> = net
            .edges()
            .iter()
            .map(|e| {
                let (cu, cv) = (&coords[e.u], &coords[e.v]);
                let axis = cu.iter().zip(cv).position(|(a, b)| a != b).expect("no self-loops");
                for (l, ((a, b), o)) in lower.iter_mut().zip(cu.iter().zip(cv).zip(origin)) {
                    *l = (*a).min(*b) + o;
                }
                self.edge_value(&lower, axis)
            })
            .collect();
        Environment::new(values).expect("distribution draws are positive")
    }
}

/// A lattice box `[0, side]^d` placed at `origin` in global coordinates.
pub(crate) struct LatticeBox {
    pub net: Network,
    pub origin: Vec<i64>,
    pub side: usize,
    pub dimension: usize,
}

impl LatticeBox {
    pub fn build(dimension: usize, side: usize, origin: Vec<i64>) -> Result<Self> {
        let net = Network::box_lattice(dimension, side)?;
        Ok(LatticeBox { net, origin, side, dimension })
    }

    /// Vertex index at global coordinates, if inside the box.
    pub fn vertex_at(&self, global: &[i64]) -> Option<usize> {
        let n = self.side as i64 + 1;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (g, o) in global.iter().zip(&self.origin).take(self.dimension) {
            let c = g - o;
            if !(0..n).contains(&c) {
                return None;
            }
            idx += c as usize * stride;
            stride *= n as usize;
        }
        Some(idx)
    }
}

/// Geometry of a point-to-point run: a box around `{0, v}` with buffer.
pub(crate) struct PointToPointGeometry {
    pub boxed: LatticeBox,
    pub source: usize,
    pub sink: usize,
}

pub(crate) fn point_to_point_geometry(
    dimension: usize,
    offset: u64,
    direction: Direction,
    buffer_factor: f64,
) -> Result<PointToPointGeometry> {
    let mut v = vec![0i64; dimension];
    match direction {
        Direction::Axis => v[0] = offset as i64,
        Direction::Diagonal => {
            if !(offset as usize).is_multiple_of(dimension) {
                return Err(CliError::Parse(format!(
                    "diagonal offsets must be divisible by the dimension, got {offset}"
                )));
            }
            let step = offset as i64 / dimension as i64;
            v.iter_mut().for_each(|c| *c = step);
        }
    }
    let buffer = (buffer_factor * offset as f64).ceil() as i64;
    let span = v.iter().copied().max().unwrap_or(0);
    let side = (span + 2 * buffer) as usize;
    let origin = vec![-buffer; dimension];
    let boxed = LatticeBox::build(dimension, side, origin)?;
    let source = boxed
        .vertex_at(&vec![0i64; dimension])
        .ok_or_else(|| CliError::Parse("origin fell outside its own box".into()))?;
    let sink = boxed
        .vertex_at(&v)
        .ok_or_else(|| CliError::Parse("target fell outside the box".into()))?;
    Ok(PointToPointGeometry { boxed, source, sink })
}

/// Everything an `exp` invocation can produce, ready for CSV or JSON.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "report")]
pub enum ExperimentReport {
    Scaling { rows: Vec<ScalingRow> },
    Tail { rows: Vec<TailRow> },
    Shape(ShapeReport),
    BoxEnergy { rows: Vec<BoxEnergyRow> },
    AveragedInfluence { rows: Vec<AveragedInfluenceRow> },
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        match self {
            ExperimentReport::Scaling { rows } => {
                let mut out = String::from(SCALING_CSV_HEADER);
                out.push('\n');
                for row in rows {
                    out.push_str(&row.csv_line());
                    out.push('\n');
                }
                out
            }
            ExperimentReport::Tail { rows } => tail::to_csv(rows),
            ExperimentReport::Shape(report) => shape::to_csv(report),
            ExperimentReport::BoxEnergy { rows } => box_energy::to_csv(rows),
            ExperimentReport::AveragedInfluence { rows } => averaged_influence::to_csv(rows),
        }
    }
}
