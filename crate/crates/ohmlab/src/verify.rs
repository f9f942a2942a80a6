//! The `verify` subcommand: the full invariant suite at reduced scale,
//! with one machine-readable pass/fail entry per check.

use ohmlab_core::closedform::{d1_moments, ps_exact_moments, ps_resistance};
use ohmlab_core::env::{Distribution, Environment, SeedSpec};
use ohmlab_core::graph::{Network, TerminalPair};
use ohmlab_core::influence::{
    check_efron_stein, check_energy_bound, check_fs_inequality, exhaustive_analysis, Observable,
};
use ohmlab_core::linear::effective_resistance;
use ohmlab_core::pflow::p_resistance;
use ohmlab_core::stats::ReplicaStats;
use serde::Serialize;

use crate::experiments::{run_box_energy, run_left_right, ExperimentConfig, ExperimentKind, ExperimentReport};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

type Check = (&'static str, fn(bool) -> Result<String, String>);

const CHECKS: &[Check] = &[
    ("graph-counts", check_graph_counts),
    ("d1-law", check_d1_law),
    ("two-parallel-oracle", check_two_parallel_oracle),
    ("inequality-suite", check_inequality_suite),
    ("left-right-exact", check_left_right_exact),
    ("flow-bound", check_flow_bound),
    ("metric-and-comparison", check_metric_and_comparison),
    ("p-engine", check_p_engine),
    ("ps-moments", check_ps_moments),
    ("box-energy", check_box_energy),
    ("scaling-trend", check_scaling_trend),
    ("adjacent-sanity", check_adjacent_sanity),
    ("determinism", check_determinism),
];

/// Run every check; `negative_control` corrupts the flow-bound tolerance to
/// prove the harness can fail.
pub fn run_verify(negative_control: bool) -> VerifyReport {
    let mut checks = Vec::with_capacity(CHECKS.len());
    for (name, f) in CHECKS {
        let (pass, detail) = match f(negative_control) {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        checks.push(CheckResult { name: (*name).into(), pass, detail });
    }
    VerifyReport { pass: checks.iter().all(|c| c.pass), checks }
}

fn check_graph_counts(_: bool) -> Result<String, String> {
    for d in 1..=3usize {
        for side in 1..=4usize {
            let net = Network::box_lattice(d, side).map_err(|e| e.to_string())?;
            let n = side + 1;
            if net.vertex_count() != n.pow(d as u32) || net.edge_count() != d * side * n.pow(d as u32 - 1) {
                return Err(format!("box d={d} side={side}: {}/{}", net.vertex_count(), net.edge_count()));
            }
        }
    }
    for n in 1..=6usize {
        let net = Network::parallel_series(n).map_err(|e| e.to_string())?;
        if net.edge_count() != n * n {
            return Err(format!("parallel-series n={n}: {} edges", net.edge_count()));
        }
    }
    Ok("box and parallel-series counts match the closed formulas".into())
}

fn check_d1_law(_: bool) -> Result<String, String> {
    let n = 6usize;
    let net = Network::box_lattice(1, n).map_err(|e| e.to_string())?;
    let obs = Observable::PointToPoint { source: 0, sink: n };
    let report = exhaustive_analysis(&net, &obs, 1.0, 2.0, 1e-10).map_err(|e| e.to_string())?;
    let exact = d1_moments(n, 1.0, 2.0).map_err(|e| e.to_string())?;
    if (report.mean - exact.mean).abs() > 1e-10 || (report.variance - exact.variance).abs() > 1e-10 {
        return Err(format!(
            "path n={n}: mean {} vs {}, var {} vs {}",
            report.mean, exact.mean, report.variance, exact.variance
        ));
    }
    Ok(format!("path n={n} exhaustive matches na+(b-a)B moments"))
}

fn check_two_parallel_oracle(_: bool) -> Result<String, String> {
    let net = Network::from_edges(2, &[(0, 1), (0, 1)]).map_err(|e| e.to_string())?;
    let obs = Observable::PointToPoint { source: 0, sink: 1 };
    let report = exhaustive_analysis(&net, &obs, 1.0, 2.0, 1e-10).map_err(|e| e.to_string())?;
    let checks = [
        (report.variance, 19.0 / 576.0, "variance"),
        (report.mean, 17.0 / 24.0, "mean"),
        (report.sum_l1_sq, 1.0 / 32.0, "sum_l1_sq"),
        (report.sum_l2sq, 5.0 / 144.0, "sum_l2sq"),
    ];
    for (got, want, what) in checks {
        if (got - want).abs() > 1e-12 {
            return Err(format!("{what}: {got} vs {want}"));
        }
    }
    Ok("two-parallel-edge influence table matches the hand enumeration".into())
}

fn check_inequality_suite(_: bool) -> Result<String, String> {
    let cases: Vec<(&str, Network, usize)> = vec![
        ("triangle", Network::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), 2),
        ("g2", Network::parallel_series(2).unwrap(), 2),
        ("two-parallel", Network::from_edges(2, &[(0, 1), (0, 1)]).unwrap(), 1),
    ];
    for (name, net, sink) in cases {
        let obs = Observable::PointToPoint { source: 0, sink };
        let report = exhaustive_analysis(&net, &obs, 1.0, 2.0, 1e-10).map_err(|e| e.to_string())?;
        let es = check_efron_stein(&report);
        let fs = check_fs_inequality(&report).map_err(|e| e.to_string())?;
        let eb = check_energy_bound(&report, 1.0, 2.0);
        if !(es.holds && fs.holds && eb.holds) {
            return Err(format!("{name}: es {} fs {} energy {}", es.holds, fs.holds, eb.holds));
        }
    }
    Ok("efron-stein, log-weighted, and energy bounds hold on all exhaustive cases".into())
}

fn check_left_right_exact(_: bool) -> Result<String, String> {
    for n in 1..=8usize {
        let net = Network::box_lattice(2, n).map_err(|e| e.to_string())?;
        let t = net.left_right_terminals().map_err(|e| e.to_string())?;
        let env = Environment::constant(net.edge_count(), 1.0).map_err(|e| e.to_string())?;
        let r = effective_resistance(&net, &env, &t, 1e-10).map_err(|e| e.to_string())?.value;
        let want = n as f64 / (n + 1) as f64;
        if (r - want).abs() > 1e-9 * want {
            return Err(format!("n={n}: {r} vs {want}"));
        }
    }
    Ok("unit left-right resistance equals n/(n+1) for n <= 8".into())
}

fn check_flow_bound(negative_control: bool) -> Result<String, String> {
    // the path instance saturates |theta| = 1 exactly, so a corrupted
    // bound must fail here
    let bound = if negative_control { 1.0 - 1e-3 } else { 1.0 + 1e-9 };
    let path = Network::box_lattice(1, 4).map_err(|e| e.to_string())?;
    let dist = Distribution::bernoulli(1.0, 2.0).unwrap();
    let grid = Network::box_lattice(2, 3).map_err(|e| e.to_string())?;
    for k in 0..50u64 {
        for (net, sink) in [(&path, 4usize), (&grid, 15usize)] {
            let env = Environment::sample(net, dist, SeedSpec::new(600, k));
            let t = TerminalPair::singleton(0, sink).unwrap();
            let res = effective_resistance(net, &env, &t, 1e-10).map_err(|e| e.to_string())?;
            let max_flow = res.flow.theta.iter().fold(0.0f64, |m, th| m.max(th.abs()));
            if max_flow > bound {
                return Err(format!("max edge flow {max_flow} exceeds {bound}"));
            }
        }
    }
    Ok("every unit-current minimizer kept |theta| within the bound".into())
}

fn check_metric_and_comparison(_: bool) -> Result<String, String> {
    let net = Network::box_lattice(2, 3).map_err(|e| e.to_string())?;
    let (a, b) = (1.0, 2.0);
    let dist = Distribution::bernoulli(a, b).unwrap();
    let unit = Environment::constant(net.edge_count(), 1.0).unwrap();
    let n = net.vertex_count();
    let mut rng = SeedSpec::new(601, 0).rng();
    for k in 0..60u64 {
        let env = Environment::sample(&net, dist, SeedSpec::new(601, k + 1));
        let x = (rng.next_u64() % n as u64) as usize;
        let mut y = (rng.next_u64() % n as u64) as usize;
        let mut z = (rng.next_u64() % n as u64) as usize;
        if y == x {
            y = (y + 1) % n;
        }
        while z == x || z == y {
            z = (z + 1) % n;
        }
        let solve = |s, t, e: &Environment| {
            effective_resistance(&net, e, &TerminalPair::singleton(s, t).unwrap(), 1e-10)
                .map(|r| r.value)
                .map_err(|e| e.to_string())
        };
        let (rxz, rxy, ryz) = (solve(x, z, &env)?, solve(x, y, &env)?, solve(y, z, &env)?);
        if rxz > rxy + ryz + 1e-9 {
            return Err(format!("triangle violated: {rxz} > {rxy} + {ryz}"));
        }
        let runit = solve(x, z, &unit)?;
        if rxz < a * runit - 1e-9 || rxz > b * runit + 1e-9 {
            return Err(format!("comparison violated: {rxz} vs [{}, {}]", a * runit, b * runit));
        }
    }
    Ok("triangle inequality and unit-environment comparison held on all trials".into())
}

fn check_p_engine(_: bool) -> Result<String, String> {
    let net = Network::box_lattice(2, 2).map_err(|e| e.to_string())?;
    let dist = Distribution::bernoulli(1.0, 2.0).unwrap();
    let t = TerminalPair::singleton(0, 8).unwrap();
    for k in 0..10u64 {
        let env = Environment::sample(&net, dist, SeedSpec::new(602, k));
        let lin = effective_resistance(&net, &env, &t, 1e-10).map_err(|e| e.to_string())?.value;
        let p2 = p_resistance(&net, &env, &t, 2.0, 1e-8, 500).map_err(|e| e.to_string())?.value;
        if (p2 - lin).abs() > 1e-6 * lin {
            return Err(format!("p=2 mismatch: {p2} vs {lin}"));
        }
    }
    let pair = Network::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
    let unit = Environment::constant(2, 1.0).unwrap();
    let tp = TerminalPair::singleton(0, 1).unwrap();
    let r3 = p_resistance(&pair, &unit, &tp, 3.0, 1e-10, 500).map_err(|e| e.to_string())?.value;
    if (r3 - 0.25).abs() > 1e-6 {
        return Err(format!("two parallel edges at p=3: {r3} vs 0.25"));
    }
    Ok("p=2 agrees with the linear engine; the p=3 parallel pair gives 1/4".into())
}

fn check_ps_moments(_: bool) -> Result<String, String> {
    let n = 3usize;
    let (a, b) = (1.0, 2.0);
    let net = Network::parallel_series(n).map_err(|e| e.to_string())?;
    let obs = Observable::PointToPoint { source: 0, sink: n };
    let report = exhaustive_analysis(&net, &obs, a, b, 1e-10).map_err(|e| e.to_string())?;
    let exact = ps_exact_moments(n, a, b).map_err(|e| e.to_string())?;
    if (report.mean - exact.mean).abs() > 1e-10 || (report.variance - exact.variance).abs() > 1e-10 {
        return Err(format!(
            "exhaustive vs exact: mean {} vs {}, var {} vs {}",
            report.mean, exact.mean, report.variance, exact.variance
        ));
    }
    // Monte Carlo through the closed form
    let dist = Distribution::bernoulli(a, b).unwrap();
    let mut stats = ReplicaStats::new();
    for k in 0..2000u64 {
        let env = Environment::sample(&net, dist, SeedSpec::new(603, k));
        stats.push(ps_resistance(&env).map_err(|e| e.to_string())?);
    }
    let se = stats.standard_error();
    if (stats.mean() - exact.mean).abs() > 3.0 * se {
        return Err(format!("mc mean {} vs exact {} (se {se})", stats.mean(), exact.mean));
    }
    Ok(format!("n={n} moments: exhaustive, closed form, and monte carlo agree"))
}

fn check_box_energy(_: bool) -> Result<String, String> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::BoxEnergy, Distribution::bernoulli(1.0, 2.0).unwrap());
    cfg.scales = vec![8];
    cfg.replicas = 5;
    cfg.master_seed = 604;
    let rows = run_box_energy(&cfg, 8, &[2], 4).map_err(|e| e.to_string())?;
    let row = &rows[0];
    if row.violations > 0 {
        return Err(format!("{} of {} boxes violated 4b(m+1)", row.violations, row.trials));
    }
    Ok(format!("{} interior boxes all within the 4b(m+1) energy bound", row.trials))
}

fn check_scaling_trend(_: bool) -> Result<String, String> {
    use crate::experiments::run_point_to_point;
    let mut cfg = ExperimentConfig::new(
        ExperimentKind::PointToPoint,
        Distribution::bernoulli(1.0, 2.0).unwrap(),
    );
    cfg.scales = vec![4, 8];
    cfg.replicas = 30;
    cfg.master_seed = 606;
    let rows = run_point_to_point(&cfg).map_err(|e| e.to_string())?;
    if rows[1].mean <= rows[0].mean {
        return Err(format!("mean did not grow: {} -> {}", rows[0].mean, rows[1].mean));
    }
    if rows.iter().any(|r| r.failures > 0) {
        return Err("comparison bound failures during the campaign".into());
    }
    Ok(format!("point-to-point means grow: {:.3} -> {:.3}", rows[0].mean, rows[1].mean))
}

fn check_adjacent_sanity(_: bool) -> Result<String, String> {
    // adjacent vertices at the center of a growing box: the value falls
    // toward the infinite-lattice 1/2
    let mut last = f64::INFINITY;
    for side in [8usize, 16] {
        let net = Network::box_lattice(2, side).map_err(|e| e.to_string())?;
        let env = Environment::constant(net.edge_count(), 1.0).unwrap();
        let c = net.find_vertex(&[side as i64 / 2, side as i64 / 2]).unwrap();
        let d = net.find_vertex(&[side as i64 / 2 + 1, side as i64 / 2]).unwrap();
        let t = TerminalPair::singleton(c, d).unwrap();
        let r = effective_resistance(&net, &env, &t, 1e-10).map_err(|e| e.to_string())?.value;
        if r >= last || r < 0.5 {
            return Err(format!("side {side}: {r} (previous {last})"));
        }
        last = r;
    }
    if (last - 0.5).abs() > 0.02 {
        return Err(format!("side 16 adjacent resistance {last} not within 0.02 of 0.5"));
    }
    Ok(format!("adjacent-vertex resistance decreases to {last:.4}, near 1/2"))
}

fn check_determinism(_: bool) -> Result<String, String> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::LeftRight, Distribution::bernoulli(1.0, 2.0).unwrap());
    cfg.scales = vec![4];
    cfg.replicas = 32;
    cfg.master_seed = 605;
    let a = run_left_right(&cfg).map_err(|e| e.to_string())?;
    let b = run_left_right(&cfg).map_err(|e| e.to_string())?;
    let csv_a = ExperimentReport::Scaling { rows: a }.to_csv();
    let csv_b = ExperimentReport::Scaling { rows: b }.to_csv();
    if csv_a != csv_b {
        return Err("identical configs produced different csv bytes".into());
    }
    Ok("repeated runs with one seed are byte-identical".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_everything() {
        let report = run_verify(false);
        for c in &report.checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        assert!(report.pass);
    }

    #[test]
    fn negative_control_fails_the_flow_bound() {
        let report = run_verify(true);
        assert!(!report.pass);
        let flow = report.checks.iter().find(|c| c.name == "flow-bound").unwrap();
        assert!(!flow.pass);
        // and only that check
        for c in &report.checks {
            if c.name != "flow-bound" {
                assert!(c.pass, "{} unexpectedly failed: {}", c.name, c.detail);
            }
        }
    }
}
