//! Empirical deviation tails of the point-to-point resistance, on the
//! `(log |v|)^(1/3)` scale.

use ohmlab_core::graph::TerminalPair;
use ohmlab_core::influence::inequality_slack;
use ohmlab_core::linear::effective_resistance;
use ohmlab_core::Environment;
use serde::{Deserialize, Serialize};

use super::{point_to_point_geometry, run_replicas, wilson_interval, ExperimentConfig, LatticeSampler};
use crate::error::{CliError, Result};

/// Empirical `P(|R - mean| > t * (log|v|)^(1/3))` with a Wilson interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub probability: f64,
    pub lo: f64,
    pub hi: f64,
    pub exceedances: u64,
    pub replicas: u64,
}

pub fn run_tail(cfg: &ExperimentConfig, offset: u64, thresholds: &[f64]) -> Result<Vec<TailRow>> {
    cfg.validate()?;
    if cfg.replicas < 1000 {
        return Err(CliError::Parse("tail estimation needs at least 1000 replicas".into()));
    }
    if thresholds.is_empty() {
        return Err(CliError::Parse("at least one threshold is required".into()));
    }

    let g = point_to_point_geometry(cfg.dimension, offset, cfg.direction, cfg.buffer_factor)?;
    let terminals = TerminalPair::singleton(g.source, g.sink)?;
    let unit = Environment::constant(g.boxed.net.edge_count(), 1.0)?;
    let unit_value = effective_resistance(&g.boxed.net, &unit, &terminals, cfg.tolerance)?.value;
    let (lo, hi) = (cfg.distribution.lower_bound(), cfg.distribution.upper_bound());
    let (values, _failures) = run_replicas(cfg.replicas, &format!("tail |v|={offset}"), |k| {
        let sampler = LatticeSampler::new(cfg.master_seed, k, cfg.distribution);
        let env = sampler.environment(&g.boxed.net, &g.boxed.origin);
        let r = effective_resistance(&g.boxed.net, &env, &terminals, cfg.tolerance)?.value;
        let slack = inequality_slack(hi * unit_value);
        if r < lo * unit_value - slack || r > hi * unit_value + slack {
            return Err(CliError::RowAborted(format!(
                "comparison bound violated: {r} outside [{}, {}]",
                lo * unit_value,
                hi * unit_value
            )));
        }
        Ok(r)
    })?;

    let n = values.len() as u64;
    let mean = values.iter().sum::<f64>() / n as f64;
    let scale = (offset as f64).ln().powf(1.0 / 3.0);

    Ok(thresholds
        .iter()
        .map(|&t| {
            let exceedances = values.iter().filter(|&&v| (v - mean).abs() > t * scale).count() as u64;
            let probability = exceedances as f64 / n as f64;
            let (lo, hi) = wilson_interval(exceedances, n);
            TailRow { t, probability, lo, hi, exceedances, replicas: n }
        })
        .collect())
}

pub(crate) fn to_csv(rows: &[TailRow]) -> String {
    let mut out = String::from("t,probability,lo,hi,exceedances,replicas\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t, r.probability, r.lo, r.hi, r.exceedances, r.replicas
        ));
    }
    out
}
