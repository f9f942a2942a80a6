//! Left-right resistance of the n x n grid: means against the Hammersley
//! bracket, variances against the conjectured `1/n^2` decay (probe only).

use ohmlab_core::graph::Network;
use ohmlab_core::influence::inequality_slack;
use ohmlab_core::linear::effective_resistance;
use ohmlab_core::{Environment, SeedSpec};

use super::{row_stats, run_replicas, ExperimentConfig, ScalingRow};
use crate::error::{CliError, Result};

pub fn run_left_right(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    if cfg.dimension != 2 {
        return Err(CliError::Parse("left-right runs on the 2-d grid".into()));
    }
    let mut rows = Vec::with_capacity(cfg.scales.len());
    for &n in &cfg.scales {
        rows.push(left_right_row(cfg, n)?);
    }
    Ok(rows)
}

fn left_right_row(cfg: &ExperimentConfig, n: u64) -> Result<ScalingRow> {
    let net = Network::box_lattice(2, n as usize)?;
    let terminals = net.left_right_terminals()?;
    let unit = Environment::constant(net.edge_count(), 1.0)?;
    let unit_value = effective_resistance(&net, &unit, &terminals, cfg.tolerance)?.value;
    let (lo, hi) = (cfg.distribution.lower_bound(), cfg.distribution.upper_bound());

    let (values, failures) = run_replicas(cfg.replicas, &format!("left-right n={n}"), |k| {
        let env = Environment::sample(&net, cfg.distribution, SeedSpec::new(cfg.master_seed, k));
        let r = effective_resistance(&net, &env, &terminals, cfg.tolerance)?.value;
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

    let nf = n as f64;
    let mut extras = std::collections::BTreeMap::new();
    extras.insert("hammersley_lo".into(), 1.0 / cfg.distribution.mean_reciprocal());
    extras.insert("hammersley_hi".into(), cfg.distribution.mean());
    extras.insert("unit_resistance".into(), unit_value);
    extras.insert("var_times_n2".into(), stats.var * nf * nf);

    Ok(ScalingRow {
        scale: n,
        mean: stats.mean,
        mean_lo: stats.mean_lo,
        mean_hi: stats.mean_hi,
        var: stats.var,
        var_lo: stats.var_lo,
        var_hi: stats.var_hi,
        replicas: stats.n,
        reference: 1.0 / (nf * nf),
        sensitivity: 0.0,
        sensitivity_flag: false,
        failures,
        extras,
    })
}
