//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its elapsed time (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned here, in code; nothing is deferred to later
//! calibration.

use std::time::Instant;

use ohmlab::experiments::{
    run_box_energy, run_point_to_point, ExperimentConfig, ExperimentKind,
};
use ohmlab_core::closedform::{d1_moments, ps_exact_moments, ps_resistance};
use ohmlab_core::env::{Distribution, Environment, SeedSpec};
use ohmlab_core::graph::{Network, TerminalPair};
use ohmlab_core::influence::{
    check_efron_stein, check_energy_bound, check_fs_inequality, exhaustive_analysis, Observable,
};
use ohmlab_core::linear::{effective_resistance, effective_resistance_with};
use ohmlab_core::pflow::{p_resistance, p_triangle_diagnostic, PFlowOptions};
use ohmlab_core::solve::SolveOptions;

fn done(criterion: &str, started: Instant, detail: &str) {
    println!("PASS {criterion} ({:.1}s): {detail}", started.elapsed().as_secs_f64());
}

/// Criterion 1: unit left-right resistance is n/(n+1) for n in 1..=64,
/// within 1e-9 relative.
#[test]
fn criterion_01_exact_left_right_grid() {
    let started = Instant::now();
    let opts = SolveOptions { rel_residual: 1e-13, ..SolveOptions::default() };
    for n in 1..=64usize {
        let net = Network::box_lattice(2, n).unwrap();
        let terminals = net.left_right_terminals().unwrap();
        let env = Environment::constant(net.edge_count(), 1.0).unwrap();
        let r = effective_resistance_with(&net, &env, &terminals, 1e-10, opts).unwrap().value;
        let want = n as f64 / (n + 1) as f64;
        assert!(
            (r - want).abs() <= 1e-9 * want,
            "n = {n}: got {r}, want {want}, relative error {:.2e}",
            (r - want).abs() / want
        );
    }
    done("criterion 1 (exact left-right grid)", started, "R = n/(n+1) for n in 1..=64 at 1e-9 relative");
}

/// Criterion 2: exhaustive analysis of the n-edge path matches the exact
/// binomial law to 1e-10, for n up to 12.
#[test]
fn criterion_02_d1_law() {
    let started = Instant::now();
    for &(a, b) in &[(1.0, 2.0), (0.5, 1.0)] {
        for n in 1..=12usize {
            let net = Network::box_lattice(1, n).unwrap();
            let obs = Observable::PointToPoint { source: 0, sink: n };
            let report = exhaustive_analysis(&net, &obs, a, b, 1e-10).unwrap();
            let exact = d1_moments(n, a, b).unwrap();
            assert!(
                (report.mean - exact.mean).abs() <= 1e-10,
                "n={n} a={a} b={b}: mean {} vs {}",
                report.mean,
                exact.mean
            );
            assert!(
                (report.variance - exact.variance).abs() <= 1e-10,
                "n={n} a={a} b={b}: var {} vs {}",
                report.variance,
                exact.variance
            );
        }
    }
    done("criterion 2 (d=1 law)", started, "path moments match n(a+b)/2 and n(b-a)^2/4 to 1e-10");
}

/// Criterion 3: Efron-Stein, the log-weighted inequality, and the
/// gradient-energy bound hold exhaustively on all four benchmark graphs.
#[test]
fn criterion_03_inequality_suite() {
    let started = Instant::now();
    let (a, b) = (1.0, 2.0);
    let cases: Vec<(&str, Network, usize)> = vec![
        ("2x2-grid", Network::box_lattice(2, 2).unwrap(), 8),
        ("two-parallel", Network::from_edges(2, &[(0, 1), (0, 1)]).unwrap(), 1),
        ("g2", Network::parallel_series(2).unwrap(), 2),
        ("triangle", Network::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), 2),
    ];
    let mut environments = 0u64;
    for (name, net, sink) in cases {
        let obs = Observable::PointToPoint { source: 0, sink };
        let report = exhaustive_analysis(&net, &obs, a, b, 1e-10).unwrap();
        let es = check_efron_stein(&report);
        assert!(es.holds, "{name}: efron-stein {} > {}", es.lhs, es.rhs);
        let fs = check_fs_inequality(&report).unwrap();
        assert!(fs.holds, "{name}: log-weighted {} > {}", fs.lhs, fs.rhs);
        let eb = check_energy_bound(&report, a, b);
        assert!(eb.holds, "{name}: energy bound {} > {}", eb.lhs, eb.rhs);
        environments += 1u64 << net.edge_count();
    }
    done(
        "criterion 3 (inequality suite)",
        started,
        &format!("0 violations across {environments} exhaustive environments"),
    );
}

/// Criterion 4: parallel-series exact moments against exhaustive
/// enumeration, Monte Carlo, and the bounded-variance tail.
#[test]
fn criterion_04_parallel_series() {
    let started = Instant::now();
    let (a, b) = (1.0, 2.0);
    let n = 3usize;
    let net = Network::parallel_series(n).unwrap();
    let obs = Observable::PointToPoint { source: 0, sink: n };
    let report = exhaustive_analysis(&net, &obs, a, b, 1e-10).unwrap();
    let exact = ps_exact_moments(n, a, b).unwrap();
    assert!((report.mean - exact.mean).abs() <= 1e-10, "mean {} vs {}", report.mean, exact.mean);
    assert!(
        (report.variance - exact.variance).abs() <= 1e-10,
        "variance {} vs {}",
        report.variance,
        exact.variance
    );

    // Monte Carlo: 10^4 replicas through the closed form, within 3 SE
    let dist = Distribution::bernoulli(a, b).unwrap();
    let replicas = 10_000u64;
    let values: Vec<f64> = (0..replicas)
        .map(|k| {
            let env = Environment::sample(&net, dist, SeedSpec::new(0xACC4, k));
            ps_resistance(&env).unwrap()
        })
        .collect();
    let nf = replicas as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
    let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let var = m2 * nf / (nf - 1.0);
    let mean_se = (var / nf).sqrt();
    let var_se = (((m4 - m2 * m2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0)).sqrt();
    assert!(
        (mean - exact.mean).abs() <= 3.0 * mean_se,
        "mc mean {mean} vs exact {} (se {mean_se})",
        exact.mean
    );
    assert!(
        (var - exact.variance).abs() <= 3.0 * var_se,
        "mc variance {var} vs exact {} (se {var_se})",
        exact.variance
    );

    // the exact variance has a summable tail
    let v1000 = ps_exact_moments(1000, a, b).unwrap().variance;
    let v2000 = ps_exact_moments(2000, a, b).unwrap().variance;
    assert!(v2000 >= v1000);
    assert!(v2000 - v1000 <= 1e-5, "variance tail {}", v2000 - v1000);

    done(
        "criterion 4 (parallel-series)",
        started,
        &format!("exact = exhaustive = monte carlo; var(2000)-var(1000) = {:.2e}", v2000 - v1000),
    );
}

/// Criterion 5: flow bound, triangle inequality, and environment
/// comparison over 1000+ randomized trials, 0 violations.
#[test]
fn criterion_05_flow_and_metric() {
    let started = Instant::now();
    let distributions = [
        Distribution::bernoulli(1.0, 2.0).unwrap(),
        Distribution::bernoulli(0.5, 1.0).unwrap(),
        Distribution::uniform(0.5, 2.0).unwrap(),
    ];
    let nets: Vec<Network> = vec![
        Network::box_lattice(2, 2).unwrap(),
        Network::box_lattice(2, 3).unwrap(),
        Network::box_lattice(1, 6).unwrap(),
        Network::parallel_series(4).unwrap(),
    ];
    let units: Vec<Environment> =
        nets.iter().map(|n| Environment::constant(n.edge_count(), 1.0).unwrap()).collect();
    let tol = 1e-10;
    let mut rng = SeedSpec::new(0xACC5, 0).rng();
    let mut trials = 0u64;
    for k in 0..1050u64 {
        let which = (rng.next_u64() % nets.len() as u64) as usize;
        let net = &nets[which];
        let n = net.vertex_count();
        let dist = distributions[(rng.next_u64() % 3) as usize];
        let env = Environment::sample(net, dist, SeedSpec::new(0xACC5, k + 1));
        let x = (rng.next_u64() % n as u64) as usize;
        let mut z = (rng.next_u64() % n as u64) as usize;
        if z == x {
            z = (z + 1) % n;
        }
        let res =
            effective_resistance(net, &env, &TerminalPair::singleton(x, z).unwrap(), tol).unwrap();
        // unit-current flow bound
        let max_flow = res.flow.theta.iter().fold(0.0f64, |m, th| m.max(th.abs()));
        assert!(max_flow <= 1.0 + tol, "trial {k}: |theta| = {max_flow}");
        // comparison with the unit environment
        let unit =
            effective_resistance(net, &units[which], &TerminalPair::singleton(x, z).unwrap(), tol)
                .unwrap()
                .value;
        let (lo, hi) = (dist.lower_bound(), dist.upper_bound());
        assert!(
            res.value >= lo * unit - 1e-9 && res.value <= hi * unit + 1e-9,
            "trial {k}: {} outside [{}, {}]",
            res.value,
            lo * unit,
            hi * unit
        );
        // triangle inequality through a random third vertex
        let mut y = (rng.next_u64() % n as u64) as usize;
        while y == x || y == z {
            y = (y + 1) % n;
        }
        let rxy = effective_resistance(net, &env, &TerminalPair::singleton(x, y).unwrap(), tol)
            .unwrap()
            .value;
        let ryz = effective_resistance(net, &env, &TerminalPair::singleton(y, z).unwrap(), tol)
            .unwrap()
            .value;
        assert!(
            res.value <= rxy + ryz + 1e-9,
            "trial {k}: triangle {} > {} + {}",
            res.value,
            rxy,
            ryz
        );
        trials += 1;
    }
    done(
        "criterion 5 (flow and metric properties)",
        started,
        &format!("0 violations over {trials} randomized trials"),
    );
}

/// Criterion 6: the p-engine against the linear engine, the two-edge
/// closed form, and the relaxed p-triangle comparison.
#[test]
fn criterion_06_p_engine() {
    let started = Instant::now();
    // (a) p = 2 agreement on 100 random instances
    let net = Network::box_lattice(2, 2).unwrap();
    let dist = Distribution::bernoulli(1.0, 2.0).unwrap();
    let mut rng = SeedSpec::new(0xACC6, 0).rng();
    for k in 0..100u64 {
        let env = Environment::sample(&net, dist, SeedSpec::new(0xACC6, k + 1));
        let n = net.vertex_count();
        let s = (rng.next_u64() % n as u64) as usize;
        let mut t = (rng.next_u64() % n as u64) as usize;
        if t == s {
            t = (t + 1) % n;
        }
        let pair = TerminalPair::singleton(s, t).unwrap();
        let lin = effective_resistance(&net, &env, &pair, 1e-10).unwrap().value;
        let p2 = p_resistance(&net, &env, &pair, 2.0, 1e-8, 500).unwrap();
        assert!(p2.converged);
        assert!(
            (p2.value - lin).abs() <= 1e-6 * lin,
            "instance {k}: p=2 {} vs linear {}",
            p2.value,
            lin
        );
    }

    // (b) two parallel unit edges at p = 3
    let pair_net = Network::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
    let unit = Environment::constant(2, 1.0).unwrap();
    let t01 = TerminalPair::singleton(0, 1).unwrap();
    let r3 = p_resistance(&pair_net, &unit, &t01, 3.0, 1e-10, 500).unwrap().value;
    assert!((r3 - 0.25).abs() <= 1e-6, "p=3 parallel pair: {r3}");

    // (c) relaxed triangle comparison on 200 random grid instances per p
    let grid = Network::box_lattice(2, 3).unwrap();
    let nv = grid.vertex_count();
    for &p in &[1.5f64, 2.0, 3.0] {
        for k in 0..200u64 {
            let env = Environment::sample(&grid, dist, SeedSpec::new(0xACC7u64.wrapping_add(p.to_bits()), k));
            let x = (rng.next_u64() % nv as u64) as usize;
            let mut y = (rng.next_u64() % nv as u64) as usize;
            let mut z = (rng.next_u64() % nv as u64) as usize;
            if y == x {
                y = (y + 1) % nv;
            }
            while z == x {
                z = (z + 1) % nv;
            }
            let check =
                p_triangle_diagnostic(&grid, &env, x, y, z, p, 2.0, PFlowOptions::default())
                    .unwrap();
            assert!(check.holds, "p={p} trial {k}: {} > {}", check.lhs, check.rhs);
        }
    }
    done(
        "criterion 6 (p-engine)",
        started,
        "p=2 agreement, p=3 parallel pair = 1/4, 600 relaxed-triangle trials",
    );
}

/// Criterion 7: 0 violations of the 4b(m+1) interior-box energy bound over
/// 200 (environment, box) pairs per averaging side.
#[test]
fn criterion_07_box_energy() {
    let started = Instant::now();
    let mut cfg =
        ExperimentConfig::new(ExperimentKind::BoxEnergy, Distribution::bernoulli(1.0, 2.0).unwrap());
    cfg.scales = vec![2, 4, 8];
    cfg.replicas = 40;
    cfg.master_seed = 0xACC8;
    cfg.buffer_factor = 0.5; // |v| = 16 inside a 32-box
    let rows = run_box_energy(&cfg, 16, &[2, 4, 8], 5).unwrap();
    for row in &rows {
        assert_eq!(row.trials, 200, "m = {}", row.m);
        assert_eq!(row.violations, 0, "m = {}: {} violations", row.m, row.violations);
        assert!(row.max_energy <= row.bound, "m = {}", row.m);
        assert!(row.avg_holds, "m = {}: averaged bound {} vs {}", row.m, row.avg_sum, row.avg_bound);
    }
    done(
        "criterion 7 (box-energy diagnostic)",
        started,
        "0 violations across 600 (environment, box) pairs on the 32-box",
    );
}

/// Criterion 8: desk-scale asymptotics. The theorem's exponent is not
/// asserted; instead (a) log-consistent mean increments in d=2,
/// (b) a shrinking variance/mean ratio, (c) the bounded d=3 regime.
#[test]
fn criterion_08_asymptotic_trends() {
    let started = Instant::now();
    let dist = Distribution::bernoulli(1.0, 2.0).unwrap();

    // (a) + (b): d = 2, |v| in {8, 16, 32, 64}, 500 replicas
    let mut cfg = ExperimentConfig::new(ExperimentKind::PointToPoint, dist);
    cfg.scales = vec![8, 16, 32, 64];
    cfg.replicas = 500;
    cfg.master_seed = 0xACC9;
    cfg.tolerance = 1e-8;
    let rows = run_point_to_point(&cfg).unwrap();
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let increments: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).collect();
    for (i, w) in increments.windows(2).enumerate() {
        assert!(
            (w[1] - w[0]).abs() <= 0.25 * w[0],
            "increments {i}: {} then {} differ by more than 25%",
            w[0],
            w[1]
        );
    }
    let ratio_small = rows[0].var / rows[0].mean;
    let ratio_large = rows[3].var / rows[3].mean;
    assert!(
        ratio_large < ratio_small,
        "variance/mean did not shrink: {ratio_small} -> {ratio_large}"
    );

    // (c): d = 3, the bounded regime
    let mut cfg3 = ExperimentConfig::new(ExperimentKind::PointToPoint, dist);
    cfg3.dimension = 3;
    cfg3.scales = vec![8, 16];
    cfg3.replicas = 200;
    cfg3.master_seed = 0xACCA;
    cfg3.buffer_factor = 0.5;
    cfg3.tolerance = 1e-8;
    let rows3 = run_point_to_point(&cfg3).unwrap();
    assert!(
        rows3[1].mean <= 1.10 * rows3[0].mean,
        "d=3 mean grew: {} -> {}",
        rows3[0].mean,
        rows3[1].mean
    );

    done(
        "criterion 8 (asymptotic trends)",
        started,
        &format!(
            "d=2 increments {:?} within 25%; var/mean {:.3} -> {:.3}; d=3 means {:.3} -> {:.3}",
            increments.iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>(),
            ratio_small,
            ratio_large,
            rows3[0].mean,
            rows3[1].mean
        ),
    );
}

/// Criterion 9: adjacent vertices on the unit lattice: the boxed value
/// falls toward 1/2 and the buffer-doubling sensitivity is small.
#[test]
fn criterion_09_adjacent_vertex_sanity() {
    let started = Instant::now();
    let mut last = f64::INFINITY;
    let mut value64 = 0.0;
    for side in [8usize, 16, 32, 64] {
        let net = Network::box_lattice(2, side).unwrap();
        let env = Environment::constant(net.edge_count(), 1.0).unwrap();
        let half = side as i64 / 2;
        let c = net.find_vertex(&[half, half]).unwrap();
        let d = net.find_vertex(&[half + 1, half]).unwrap();
        let t = TerminalPair::singleton(c, d).unwrap();
        let r = effective_resistance(&net, &env, &t, 1e-10).unwrap().value;
        assert!(r < last, "side {side}: {r} did not decrease (prev {last})");
        assert!(r >= 0.5 - 1e-9, "side {side}: {r} fell below the lattice value");
        last = r;
        if side == 64 {
            value64 = r;
        }
    }
    assert!((value64 - 0.5).abs() <= 0.02, "side 64: {value64} not within 0.02 of 1/2");

    // buffer doubling: side 128 moves the value by far less than 1%
    let net = Network::box_lattice(2, 128).unwrap();
    let env = Environment::constant(net.edge_count(), 1.0).unwrap();
    let c = net.find_vertex(&[64, 64]).unwrap();
    let d = net.find_vertex(&[65, 64]).unwrap();
    let r128 = effective_resistance(&net, &env, &TerminalPair::singleton(c, d).unwrap(), 1e-10)
        .unwrap()
        .value;
    let sensitivity = (value64 - r128).abs() / r128;
    assert!(sensitivity < 0.01, "buffer doubling moved the value by {sensitivity:.4}");

    done(
        "criterion 9 (adjacent-vertex sanity)",
        started,
        &format!("value at side 64 is {value64:.4}, sensitivity {sensitivity:.2e}"),
    );
}

/// Criterion 10: `exp` runs are byte-identical across reruns and across
/// thread counts, through the real binary.
#[test]
fn criterion_10_determinism() {
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_ohmlab");
    let dir = std::env::temp_dir().join(format!("ohmlab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |threads: usize, name: &str| -> (Vec<u8>, Vec<u8>) {
        let csv = dir.join(format!("{name}.csv"));
        let status = std::process::Command::new(bin)
            .args([
                "exp",
                "left-right",
                "--scales",
                "4,6",
                "--dist",
                "bernoulli:1,2",
                "--replicas",
                "64",
                "--seed",
                "2718",
                "--threads",
                &threads.to_string(),
                "--out",
            ])
            .arg(&csv)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
        (std::fs::read(&csv).unwrap(), std::fs::read(csv.with_extension("json")).unwrap())
    };
    let (csv1, json1) = run(1, "t1");
    let (csv8, json8) = run(8, "t8");
    let (csv1b, json1b) = run(1, "t1-again");
    assert_eq!(csv1, csv8, "csv differs between --threads 1 and --threads 8");
    assert_eq!(json1, json8, "json mirror differs between thread counts");
    assert_eq!(csv1, csv1b, "csv differs between identical reruns");
    assert_eq!(json1, json1b, "json mirror differs between identical reruns");
    std::fs::remove_dir_all(&dir).ok();
    done(
        "criterion 10 (determinism)",
        started,
        "byte-identical csv and json across reruns and thread counts",
    );
}
