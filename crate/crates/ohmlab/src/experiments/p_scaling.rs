//! Mean p-resistance against its three-branch growth scale `a_d(|v|, p)`.

use ohmlab_core::graph::TerminalPair;
use ohmlab_core::influence::inequality_slack;
use ohmlab_core::pflow::{p_resistance_with, p_scaling_reference, PFlowOptions};
use ohmlab_core::Environment;

use super::{
    point_to_point_geometry, row_stats, run_replicas, ExperimentConfig, LatticeSampler, ScalingRow,
};
use crate::error::{CliError, Result};

pub fn run_p_scaling(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    if cfg.dimension < 2 {
        return Err(CliError::Parse("p-scaling needs dimension >= 2".into()));
    }
    let Some(p) = cfg.p else {
        return Err(CliError::Parse("p-scaling needs --p".into()));
    };
    let mut rows = Vec::with_capacity(cfg.scales.len());
    for &offset in &cfg.scales {
        rows.push(p_scaling_row(cfg, p, offset)?);
    }
    Ok(rows)
}

fn p_scaling_row(cfg: &ExperimentConfig, p: f64, offset: u64) -> Result<ScalingRow> {
    let opts = PFlowOptions { tol: cfg.tolerance.min(1e-8), ..PFlowOptions::default() };
    let solve_p = |buffer_factor: f64, replica: u64| -> Result<f64> {
        let g = point_to_point_geometry(cfg.dimension, offset, cfg.direction, buffer_factor)?;
        let t = TerminalPair::singleton(g.source, g.sink)?;
        let sampler = LatticeSampler::new(cfg.master_seed, replica, cfg.distribution);
        let env = sampler.environment(&g.boxed.net, &g.boxed.origin);
        Ok(p_resistance_with(&g.boxed.net, &env, &t, p, opts)?.value)
    };

    let g = point_to_point_geometry(cfg.dimension, offset, cfg.direction, cfg.buffer_factor)?;
    let terminals = TerminalPair::singleton(g.source, g.sink)?;
    let unit = Environment::constant(g.boxed.net.edge_count(), 1.0)?;
    let unit_value = p_resistance_with(&g.boxed.net, &unit, &terminals, p, opts)?.value;
    let (lo, hi) = (cfg.distribution.lower_bound(), cfg.distribution.upper_bound());

    let (values, failures) = run_replicas(cfg.replicas, &format!("p-scaling |v|={offset}"), |k| {
        let sampler = LatticeSampler::new(cfg.master_seed, k, cfg.distribution);
        let env = sampler.environment(&g.boxed.net, &g.boxed.origin);
        let r = p_resistance_with(&g.boxed.net, &env, &terminals, p, opts)?.value;
        // the p-energy scales linearly in the resistances, so the unit
        // solve brackets every sample
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

    let probes = cfg.replicas.min(4);
    let mut sensitivity = 0.0f64;
    for k in 0..probes {
        let small = solve_p(cfg.buffer_factor, k)?;
        let big = solve_p(cfg.buffer_factor * 2.0, k)?;
        sensitivity = sensitivity.max((big - small).abs() / small.abs().max(f64::MIN_POSITIVE));
    }

    let reference = p_scaling_reference(cfg.dimension, offset as usize, p);
    let mut extras = std::collections::BTreeMap::new();
    extras.insert("ratio".into(), stats.mean / reference);
    extras.insert("unit_p_resistance".into(), unit_value);

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
