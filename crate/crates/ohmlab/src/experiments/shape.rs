//! Resistance balls `B_t = {v : R(0 <-> v) <= t}` around the center of a
//! box, per replica and as across-replica inclusion frequencies. No
//! convergence is asserted; this is a probe of the conjectured asymptotic
//! shape.

use ohmlab_core::influence::inequality_slack;
use ohmlab_core::linear::pairwise_resistances;
use ohmlab_core::Environment;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, LatticeBox, LatticeSampler};
use crate::error::{CliError, Result};

/// How often each vertex fell inside the ball, per level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeFrequency {
    /// Global lattice coordinates (the center is the origin).
    pub coords: Vec<i64>,
    pub freq: Vec<f64>,
}

/// One replica's point sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeReplica {
    pub replica: u64,
    /// Per level: did the ball touch the box boundary? If so the box was
    /// too small for that level and the set is unreliable.
    pub boundary_contact: Vec<bool>,
    /// Per level: the vertices of the ball, as global coordinates.
    pub sets: Vec<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeReport {
    pub side: u64,
    pub levels: Vec<f64>,
    pub replicas: u64,
    pub frequencies: Vec<ShapeFrequency>,
    pub per_replica: Vec<ShapeReplica>,
}

pub fn run_shape(cfg: &ExperimentConfig, levels: &[f64]) -> Result<ShapeReport> {
    cfg.validate()?;
    if levels.is_empty() {
        return Err(CliError::Parse("at least one level is required".into()));
    }
    let side = cfg.scales[0] as usize;
    if !side.is_multiple_of(2) {
        return Err(CliError::Parse("shape boxes need an even side so the center is a vertex".into()));
    }
    let half = (side / 2) as i64;
    let boxed = LatticeBox::build(cfg.dimension, side, vec![-half; cfg.dimension])?;
    let center = boxed
        .vertex_at(&vec![0; cfg.dimension])
        .expect("center of the box is a vertex");
    let net = &boxed.net;
    let coords = net.coords().expect("box lattices carry coordinates");
    let targets: Vec<usize> = (0..net.vertex_count()).filter(|&v| v != center).collect();
    let on_boundary = |v: usize| coords[v].iter().any(|&c| c == 0 || c == side as i64);

    // cached unit solve for the inline comparison bound
    let unit_env = Environment::constant(net.edge_count(), 1.0)?;
    let unit = pairwise_resistances(net, &unit_env, center, &targets, cfg.tolerance)?;
    let (lo, hi) = (cfg.distribution.lower_bound(), cfg.distribution.upper_bound());

    let mut counts = vec![vec![0u64; levels.len()]; net.vertex_count()];
    let mut per_replica = Vec::with_capacity(cfg.replicas as usize);
    for k in 0..cfg.replicas {
        let sampler = LatticeSampler::new(cfg.master_seed, k, cfg.distribution);
        let env = sampler.environment(net, &boxed.origin);
        let rs = pairwise_resistances(net, &env, center, &targets, cfg.tolerance)?;
        for (&r, &u) in rs.iter().zip(&unit) {
            let slack = inequality_slack(hi * u);
            if r < lo * u - slack || r > hi * u + slack {
                return Err(CliError::RowAborted(format!(
                    "replica {k}: comparison bound violated: {r} outside [{}, {}]",
                    lo * u,
                    hi * u
                )));
            }
        }
        let mut resistance = vec![0.0f64; net.vertex_count()];
        for (&t, &r) in targets.iter().zip(&rs) {
            resistance[t] = r;
        }
        let mut sets = Vec::with_capacity(levels.len());
        let mut boundary_contact = Vec::with_capacity(levels.len());
        for (li, &level) in levels.iter().enumerate() {
            let mut set = Vec::new();
            let mut contact = false;
            for v in 0..net.vertex_count() {
                if resistance[v] <= level {
                    counts[v][li] += 1;
                    contact |= on_boundary(v);
                    set.push(coords[v].iter().zip(&boxed.origin).map(|(c, o)| c + o).collect());
                }
            }
            sets.push(set);
            boundary_contact.push(contact);
        }
        per_replica.push(ShapeReplica { replica: k, boundary_contact, sets });
    }

    let frequencies = (0..net.vertex_count())
        .map(|v| ShapeFrequency {
            coords: coords[v].iter().zip(&boxed.origin).map(|(c, o)| c + o).collect(),
            freq: counts[v].iter().map(|&c| c as f64 / cfg.replicas as f64).collect(),
        })
        .collect();

    Ok(ShapeReport {
        side: side as u64,
        levels: levels.to_vec(),
        replicas: cfg.replicas,
        frequencies,
        per_replica,
    })
}

pub(crate) fn to_csv(report: &ShapeReport) -> String {
    let dim = report.frequencies.first().map(|f| f.coords.len()).unwrap_or(2);
    let mut out = String::from("t");
    for k in 0..dim {
        out.push_str(&format!(",c{k}"));
    }
    out.push_str(",freq\n");
    for (li, &level) in report.levels.iter().enumerate() {
        for f in &report.frequencies {
            if f.freq[li] > 0.0 {
                out.push_str(&level.to_string());
                for c in &f.coords {
                    out.push(',');
                    out.push_str(&c.to_string());
                }
                out.push_str(&format!(",{}\n", f.freq[li]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;
    use ohmlab_core::Distribution;

    fn config(dist: Distribution, side: u64, replicas: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Shape, dist);
        cfg.scales = vec![side];
        cfg.replicas = replicas;
        cfg
    }

    #[test]
    fn tiny_level_keeps_only_the_center_neighborhood() {
        let cfg = config(Distribution::constant(1.0).unwrap(), 6, 2);
        let report = run_shape(&cfg, &[0.1]).unwrap();
        // R to any neighbor is at least 1/4 on the unit grid; only the
        // center has R = 0 <= 0.1
        for r in &report.per_replica {
            assert_eq!(r.sets[0].len(), 1);
            assert_eq!(r.sets[0][0], vec![0, 0]);
        }
    }

    #[test]
    fn unit_environment_ball_is_symmetric_and_deterministic() {
        let cfg = config(Distribution::constant(1.0).unwrap(), 6, 2);
        let report = run_shape(&cfg, &[0.7]).unwrap();
        let set = &report.per_replica[0].sets[0];
        assert_eq!(set, &report.per_replica[1].sets[0]);
        // closed under the lattice symmetries (x,y) -> (±x, ±y), (y, x)
        let contains = |x: i64, y: i64| set.iter().any(|c| c[0] == x && c[1] == y);
        for c in set {
            let (x, y) = (c[0], c[1]);
            assert!(contains(-x, y) && contains(x, -y) && contains(y, x), "asymmetric at {x},{y}");
        }
    }

    #[test]
    fn bernoulli_ball_is_sandwiched_by_unit_balls() {
        let (a, b) = (1.0, 2.0);
        let t = 0.9;
        let unit = run_shape(&config(Distribution::constant(1.0).unwrap(), 6, 2), &[t / b, t / a]).unwrap();
        let inner = &unit.per_replica[0].sets[0]; // unit ball at t/b
        let outer = &unit.per_replica[0].sets[1]; // unit ball at t/a
        let random = run_shape(&config(Distribution::bernoulli(a, b).unwrap(), 6, 4), &[t]).unwrap();
        for rep in &random.per_replica {
            let set = &rep.sets[0];
            for c in inner {
                assert!(set.contains(c), "inner ball point {c:?} missing");
            }
            for c in set {
                assert!(outer.contains(c), "point {c:?} outside the outer ball");
            }
        }
    }
}
