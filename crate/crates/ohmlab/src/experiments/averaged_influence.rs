//! Influence of single edges on the box-averaged resistance observable
//! `f~(z, r) = R_r(z <-> z + v)` with `z` uniform on the averaging box:
//! averaging smears the terminals, so the worst single-edge influence
//! decays like `1/m` as the box grows.

use ohmlab_core::env::mix64;
use ohmlab_core::graph::TerminalPair;
use ohmlab_core::linear::effective_resistance;
use ohmlab_core::stats::ReplicaStats;
use ohmlab_core::{Distribution, SeedSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::box_energy::edge_index_map;
use super::{ExperimentConfig, LatticeBox, LatticeSampler};
use crate::error::{CliError, Result};

/// One sampled edge's estimated averaged influence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AveragedEdge {
    /// Global coordinates of the edge's lower endpoint.
    pub lower: Vec<i64>,
    pub axis: usize,
    /// Estimate of `E_{z,r} |delta_e f~|` with its standard error.
    pub l1: f64,
    pub se: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AveragedInfluenceRow {
    pub m: u64,
    pub edges: Vec<AveragedEdge>,
    pub max_l1: f64,
    /// The `(b-a) * 5b(m+1) / (a (m+1)^2)` decay envelope.
    pub envelope: f64,
    pub replicas: u64,
}

pub fn run_averaged_influence(
    cfg: &ExperimentConfig,
    offset: u64,
    ms: &[u64],
    edge_count: usize,
) -> Result<Vec<AveragedInfluenceRow>> {
    cfg.validate()?;
    if cfg.dimension != 2 {
        return Err(CliError::Parse("averaged influence runs on the 2-d lattice".into()));
    }
    let Distribution::Bernoulli { a, b } = cfg.distribution else {
        return Err(CliError::Parse("averaged influence needs a bernoulli distribution".into()));
    };
    if edge_count == 0 {
        return Err(CliError::Parse("need at least one sampled edge".into()));
    }

    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        if m < 2 {
            return Err(CliError::Parse("averaging side must be at least 2".into()));
        }
        let mi = m as i64;
        // box covering every terminal pair (z, z + v) for z in [0, m-1]^2
        let span = offset as i64 + mi - 1;
        let buffer = (cfg.buffer_factor * offset as f64).ceil() as i64;
        let side = (span + 2 * buffer) as usize;
        let boxed = LatticeBox::build(2, side, vec![-buffer, -buffer])?;
        let edge_of = edge_index_map(&boxed.net);

        // sampled edges: spread along the current path at mid-height, plus
        // one far corner edge that every translate's current avoids
        let mut picks: Vec<([i64; 2], usize)> = Vec::new();
        let line = edge_count.saturating_sub(1).max(1);
        for k in 0..line {
            let x = ((k as u64 + 1) * offset / (line as u64 + 1)) as i64;
            picks.push(([x, mi / 2], 0));
        }
        if edge_count > 1 {
            picks.push(([-buffer + 1, -buffer + 1], 0));
        }
        picks.dedup();

        let edge_ids: Vec<usize> = picks
            .iter()
            .map(|&(lower, axis)| {
                let mut other = lower;
                other[axis] += 1;
                let u = boxed.vertex_at(&lower).ok_or_else(|| {
                    CliError::Parse(format!("sampled edge at {lower:?} is outside the box"))
                })?;
                let v = boxed.vertex_at(&other).unwrap();
                edge_of
                    .get(&(u.min(v), u.max(v)))
                    .copied()
                    .ok_or_else(|| CliError::Parse("sampled edge not present".into()))
            })
            .collect::<Result<_>>()?;

        let outcomes: Vec<Result<Vec<f64>>> = (0..cfg.replicas)
            .into_par_iter()
            .map(|k| {
                let mut rng = SeedSpec::new(mix64(cfg.master_seed ^ 0xae), k).rng();
                let z = [(rng.next_u64() % m) as i64, (rng.next_u64() % m) as i64];
                let source = boxed.vertex_at(&z).expect("averaging box inside the domain");
                let sink = boxed
                    .vertex_at(&[z[0] + offset as i64, z[1]])
                    .expect("translated target inside the domain");
                let terminals = TerminalPair::singleton(source, sink)?;
                let sampler = LatticeSampler::new(cfg.master_seed, k, cfg.distribution);
                let env = sampler.environment(&boxed.net, &boxed.origin);
                let base = effective_resistance(&boxed.net, &env, &terminals, cfg.tolerance)?.value;
                let mut grads = Vec::with_capacity(edge_ids.len());
                for &e in &edge_ids {
                    let flipped = env.flip(e, a, b)?;
                    let other = effective_resistance(&boxed.net, &flipped, &terminals, cfg.tolerance)?.value;
                    grads.push(0.5 * (base - other));
                }
                Ok(grads)
            })
            .collect();

        let mut stats = vec![ReplicaStats::new(); edge_ids.len()];
        let mut replicas = 0u64;
        for outcome in outcomes {
            let grads = outcome?;
            for (s, g) in stats.iter_mut().zip(&grads) {
                s.push(g.abs());
            }
            replicas += 1;
        }

        let edges: Vec<AveragedEdge> = picks
            .iter()
            .zip(&stats)
            .map(|(&(lower, axis), s)| AveragedEdge {
                lower: lower.to_vec(),
                axis,
                l1: s.mean(),
                se: s.standard_error(),
            })
            .collect();
        let max_l1 = edges.iter().map(|e| e.l1).fold(0.0f64, f64::max);
        let mf = (m + 1) as f64;
        rows.push(AveragedInfluenceRow {
            m,
            edges,
            max_l1,
            envelope: (b - a) * 5.0 * b * mf / (a * mf * mf),
            replicas,
        });
    }
    Ok(rows)
}

pub(crate) fn to_csv(rows: &[AveragedInfluenceRow]) -> String {
    let mut out = String::from("m,x,y,axis,l1,se\n");
    for r in rows {
        for e in &r.edges {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.m, e.lower[0], e.lower[1], e.axis, e.l1, e.se
            ));
        }
    }
    out
}
