//! Point-to-point resistance scaling: `R(0 <-> v)` on boxes around the
//! terminal pair, against the logarithmic growth reference.

use ohmlab_core::graph::TerminalPair;
use ohmlab_core::influence::inequality_slack;
use ohmlab_core::linear::effective_resistance;
use ohmlab_core::Environment;

use super::{
    point_to_point_geometry, row_stats, run_replicas, ExperimentConfig, LatticeSampler, ScalingRow,
};
use crate::error::{CliError, Result};

pub fn run_point_to_point(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    if cfg.dimension < 2 {
        return Err(CliError::Parse("point-to-point scaling needs dimension >= 2".into()));
    }
    let mut rows = Vec::with_capacity(cfg.scales.len());
    for &offset in &cfg.scales {
        rows.push(point_to_point_row(cfg, offset)?);
    }
    Ok(rows)
}

fn point_to_point_row(cfg: &ExperimentConfig, offset: u64) -> Result<ScalingRow> {
    let value_at = |buffer_factor: f64, replica: u64| -> Result<f64> {
        let g = point_to_point_geometry(cfg.dimension, offset, cfg.direction, buffer_factor)?;
        let t = TerminalPair::singleton(g.source, g.sink)?;
        let sampler = LatticeSampler::new(cfg.master_seed, replica, cfg.distribution);
        let env = sampler.environment(&g.boxed.net, &g.boxed.origin);
        Ok(effective_resistance(&g.boxed.net, &env, &t, cfg.tolerance)?.value)
    };

    let g = point_to_point_geometry(cfg.dimension, offset, cfg.direction, cfg.buffer_factor)?;
    let terminals = TerminalPair::singleton(g.source, g.sink)?;
    let unit = Environment::constant(g.boxed.net.edge_count(), 1.0)?;
    let unit_value = effective_resistance(&g.boxed.net, &unit, &terminals, cfg.tolerance)?.value;
    let (lo, hi) = (cfg.distribution.lower_bound(), cfg.distribution.upper_bound());

    let (values, failures) = run_replicas(cfg.replicas, &format!("point-to-point |v|={offset}"), |k| {
        let sampler = LatticeSampler::new(cfg.master_seed, k, cfg.distribution);
        let env = sampler.environment(&g.boxed.net, &g.boxed.origin);
        let r = effective_resistance(&g.boxed.net, &env, &terminals, cfg.tolerance)?.value;
        // comparison against the cached unit-environment solve
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
    let stats = row_stats(&values);

    // truncation sensitivity: rerun a few replicas with the buffer doubled;
    // the geometry-keyed sampler keeps shared edges identical
    let probes = cfg.replicas.min(4);
    let mut sensitivity = 0.0f64;
    for k in 0..probes {
        let small = value_at(cfg.buffer_factor, k)?;
        let big = value_at(cfg.buffer_factor * 2.0, k)?;
        sensitivity = sensitivity.max((big - small).abs() / small.abs().max(f64::MIN_POSITIVE));
    }

    let reference = (offset as f64).ln();
    let mut extras = std::collections::BTreeMap::new();
    extras.insert("var_reference".into(), reference.powf(2.0 / 3.0));
    extras.insert("unit_resistance".into(), unit_value);

    Ok(ScalingRow {
        scale: offset,
        mean: stats.mean,
        mean_lo: stats.mean_lo,
        mean_hi: stats.mean_hi,
        var: stats.var,
        var_lo: stats.var_lo,
        var_hi: stats.var_hi,
        replicas: stats.n,
        reference,
        sensitivity,
        sensitivity_flag: sensitivity > 0.01,
        failures,
        extras,
    })
}
