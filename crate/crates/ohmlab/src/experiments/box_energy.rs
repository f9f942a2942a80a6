//! Interior-box energy diagnostics for the unit current between two
//! terminals: the current's energy inside any box of side `m+1` avoiding
//! both terminals is at most `4b(m+1)` (the border can reroute everything),
//! and the box-averaged squared flow through translates of one edge is at
//! most `5b(m+1)/a` in expectation.

use std::collections::HashMap;

use ohmlab_core::env::mix64;
use ohmlab_core::graph::{Network, TerminalPair};
use ohmlab_core::influence::inequality_slack;
use ohmlab_core::linear::effective_resistance;
use ohmlab_core::stats::ReplicaStats;
use ohmlab_core::SeedSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{point_to_point_geometry, ExperimentConfig, LatticeSampler};
use crate::error::{CliError, Result};

/// One averaging-side `m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxEnergyRow {
    pub m: u64,
    /// Sampled (environment, box) pairs for the energy bound.
    pub trials: u64,
    pub violations: u64,
    pub max_energy: f64,
    /// The `4b(m+1)` energy bound.
    pub bound: f64,
    /// Monte Carlo mean of `sum_z theta(e - z)^2` over the averaging box.
    pub avg_sum: f64,
    pub avg_sum_se: f64,
    /// The `5b(m+1)/a` bound on that mean.
    pub avg_bound: f64,
    pub avg_holds: bool,
    pub replicas: u64,
}

pub(crate) fn edge_index_map(net: &Network) -> HashMap<(usize, usize), usize> {
    net.edges()
        .iter()
        .enumerate()
        .map(|(id, e)| ((e.u.min(e.v), e.u.max(e.v)), id))
        .collect()
}

pub fn run_box_energy(
    cfg: &ExperimentConfig,
    offset: u64,
    ms: &[u64],
    boxes_per_replica: u64,
) -> Result<Vec<BoxEnergyRow>> {
    cfg.validate()?;
    if cfg.dimension != 2 {
        return Err(CliError::Parse("box-energy diagnostics run on the 2-d lattice".into()));
    }
    if boxes_per_replica == 0 {
        return Err(CliError::Parse("need at least one box per replica".into()));
    }
    let g = point_to_point_geometry(2, offset, super::Direction::Axis, cfg.buffer_factor)?;
    let terminals = TerminalPair::singleton(g.source, g.sink)?;
    let edge_of = edge_index_map(&g.boxed.net);
    let (a, b) = (cfg.distribution.lower_bound(), cfg.distribution.upper_bound());
    let side = g.boxed.side as i64;
    let origin = g.boxed.origin.clone();

    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        let mi = m as i64;
        if mi + 1 >= side {
            return Err(CliError::Parse(format!("averaging side {m} does not fit in the box")));
        }
        // all translates of the reference edge must stay inside the domain
        let ref_lower = [offset as i64 / 2, 0i64];
        if ref_lower[0] - (mi - 1) < origin[0] || -(mi - 1) < origin[1] {
            return Err(CliError::Parse(format!(
                "averaging side {m} needs a larger buffer around the terminals"
            )));
        }
        let bound = 4.0 * b * (m + 1) as f64;
        let avg_bound = 5.0 * b * (m + 1) as f64 / a;

        struct ReplicaOutcome {
            trials: u64,
            violations: u64,
            max_energy: f64,
            avg_sum: f64,
        }

        let outcomes: Vec<Result<ReplicaOutcome>> = (0..cfg.replicas)
            .into_par_iter()
            .map(|k| {
                let sampler = LatticeSampler::new(cfg.master_seed, k, cfg.distribution);
                let env = sampler.environment(&g.boxed.net, &origin);
                let res = effective_resistance(&g.boxed.net, &env, &terminals, cfg.tolerance)?;
                let theta = &res.flow.theta;

                let edge_id = |lower: [i64; 2], axis: usize| -> Option<usize> {
                    let mut other = lower;
                    other[axis] += 1;
                    let u = g.boxed.vertex_at(&lower)?;
                    let v = g.boxed.vertex_at(&other)?;
                    edge_of.get(&(u.min(v), u.max(v))).copied()
                };

                // energy inside sampled interior boxes avoiding both terminals
                let mut rng = SeedSpec::new(mix64(cfg.master_seed ^ 0x0b0e), k).rng();
                let span = (side - (mi + 1)) as u64 + 1;
                let mut trials = 0u64;
                let mut violations = 0u64;
                let mut max_energy = 0.0f64;
                for _ in 0..boxes_per_replica {
                    let mut placed = None;
                    for _ in 0..200 {
                        let x0 = origin[0] + (rng.next_u64() % span) as i64;
                        let y0 = origin[1] + (rng.next_u64() % span) as i64;
                        let contains = |px: i64, py: i64| {
                            (x0..=x0 + mi + 1).contains(&px) && (y0..=y0 + mi + 1).contains(&py)
                        };
                        if !contains(0, 0) && !contains(offset as i64, 0) {
                            placed = Some((x0, y0));
                            break;
                        }
                    }
                    let Some((x0, y0)) = placed else { continue };
                    let mut energy = 0.0f64;
                    for gx in x0..=x0 + mi + 1 {
                        for gy in y0..=y0 + mi + 1 {
                            for (axis, limit) in [(0usize, x0 + mi + 1), (1usize, y0 + mi + 1)] {
                                let along = if axis == 0 { gx } else { gy };
                                if along < limit {
                                    if let Some(id) = edge_id([gx, gy], axis) {
                                        energy += env.resistance(id) * theta[id] * theta[id];
                                    }
                                }
                            }
                        }
                    }
                    trials += 1;
                    max_energy = max_energy.max(energy);
                    if energy > bound + inequality_slack(bound) {
                        violations += 1;
                    }
                }

                // averaged squared flow over translates of the reference edge
                let mut avg_sum = 0.0f64;
                for dx in 0..mi {
                    for dy in 0..mi {
                        let id = edge_id([ref_lower[0] - dx, ref_lower[1] - dy], 0)
                            .expect("translates validated against the domain");
                        avg_sum += theta[id] * theta[id];
                    }
                }

                Ok(ReplicaOutcome { trials, violations, max_energy, avg_sum })
            })
            .collect();

        let mut trials = 0u64;
        let mut violations = 0u64;
        let mut max_energy = 0.0f64;
        let mut avg_stats = ReplicaStats::new();
        for outcome in outcomes {
            let o = outcome?;
            trials += o.trials;
            violations += o.violations;
            max_energy = max_energy.max(o.max_energy);
            avg_stats.push(o.avg_sum);
        }

        let avg_sum = avg_stats.mean();
        let avg_sum_se = avg_stats.standard_error();
        rows.push(BoxEnergyRow {
            m,
            trials,
            violations,
            max_energy,
            bound,
            avg_sum,
            avg_sum_se,
            avg_bound,
            avg_holds: avg_sum <= avg_bound + 3.0 * avg_sum_se + inequality_slack(avg_bound),
            replicas: cfg.replicas,
        });
    }
    Ok(rows)
}

pub(crate) fn to_csv(rows: &[BoxEnergyRow]) -> String {
    let mut out =
        String::from("m,trials,violations,max_energy,bound_4b,avg_sum,avg_sum_se,avg_bound_5b,replicas\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.m, r.trials, r.violations, r.max_energy, r.bound, r.avg_sum, r.avg_sum_se, r.avg_bound, r.replicas
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;
    use ohmlab_core::Distribution;

    #[test]
    fn unit_environment_interior_boxes_respect_the_bound() {
        let mut cfg =
            ExperimentConfig::new(ExperimentKind::BoxEnergy, Distribution::constant(1.0).unwrap());
        cfg.scales = vec![8];
        cfg.replicas = 2;
        let rows = run_box_energy(&cfg, 8, &[2], 5).unwrap();
        let row = &rows[0];
        assert!(row.trials > 0);
        assert_eq!(row.violations, 0);
        assert!(row.max_energy <= row.bound);
        assert!(row.avg_holds);
    }

    #[test]
    fn bernoulli_trials_have_zero_violations() {
        let mut cfg = ExperimentConfig::new(
            ExperimentKind::BoxEnergy,
            Distribution::bernoulli(1.0, 2.0).unwrap(),
        );
        cfg.scales = vec![8];
        cfg.replicas = 6;
        cfg.master_seed = 3;
        let rows = run_box_energy(&cfg, 8, &[2, 4], 4).unwrap();
        for row in &rows {
            assert_eq!(row.violations, 0, "m = {}", row.m);
            assert!(row.avg_holds);
        }
    }
}
