//! Discrete gradients and influence analysis on the two-point cube of
//! environments.
//!
//! For an observable `f` of the environment, the discrete gradient at an
//! edge is `delta_e f(r) = (f(r) - f(flip_e r)) / 2`. Its L1 and squared-L2
//! norms under the uniform measure on `{a,b}^E` are the edge influences;
//! the variance of `f` is controlled by them through the Efron-Stein
//! inequality and a sharper modified Poincare (log-weighted) inequality.
//! Everything here is computed either exactly, by full enumeration of the
//! cube, or by seeded Monte Carlo.

use alloc::vec;
use alloc::vec::Vec;

use crate::env::{self, Distribution, Environment, SeedSpec};
use crate::error::{Error, Result};
use crate::graph::{Network, TerminalPair};
use crate::linear::{effective_resistance, UnitFlow};
use crate::math;
use crate::pflow::{p_resistance_with, PFlowOptions};
use crate::stats::ReplicaStats;

/// Default cap on exhaustive enumeration (2^20 evaluations).
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;

/// Additive slack for inequality checks: the inequalities are non-strict
/// and the sides carry solver noise.
pub fn inequality_slack(scale: f64) -> f64 {
    1e-9 + 1e-6 * math::abs(scale)
}

/// A real-valued functional of an environment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable {
    /// Effective resistance between two vertices.
    PointToPoint { source: usize, sink: usize },
    /// Left-right resistance of a 2-d box of the given side.
    LeftRight { side: usize },
    /// p-resistance between two vertices.
    PResistance { source: usize, sink: usize, p: f64 },
}

impl Observable {
    /// The terminal pair this observable induces on a concrete network.
    pub fn terminals(&self, net: &Network) -> Result<TerminalPair> {
        match *self {
            Observable::PointToPoint { source, sink } | Observable::PResistance { source, sink, .. } => {
                TerminalPair::singleton(source, sink)
            }
            Observable::LeftRight { side } => {
                let coords = net.coords().ok_or(Error::MissingCoordinates)?;
                let max = coords.iter().map(|c| c[0]).max().unwrap_or(0);
                if max != side as i64 {
                    return Err(Error::InvalidTerminals("network side does not match the observable"));
                }
                net.left_right_terminals()
            }
        }
    }

    /// Evaluate on an environment.
    pub fn evaluate(&self, net: &Network, env: &Environment, tol: f64) -> Result<f64> {
        Ok(self.evaluate_with_flow(net, env, tol)?.0)
    }

    /// Evaluate and also return the minimizing unit flow.
    pub fn evaluate_with_flow(&self, net: &Network, env: &Environment, tol: f64) -> Result<(f64, UnitFlow)> {
        let terminals = self.terminals(net)?;
        match *self {
            Observable::PointToPoint { .. } | Observable::LeftRight { .. } => {
                let res = effective_resistance(net, env, &terminals, tol)?;
                Ok((res.value, res.flow))
            }
            Observable::PResistance { p, .. } => {
                let res = p_resistance_with(
                    net,
                    env,
                    &terminals,
                    p,
                    PFlowOptions { tol: tol.min(1e-8), ..PFlowOptions::default() },
                )?;
                Ok((res.value, res.flow))
            }
        }
    }
}

/// The discrete gradient `(f(r) - f(flip_e r)) / 2`.
pub fn discrete_gradient(
    net: &Network,
    obs: &Observable,
    env: &Environment,
    edge: usize,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    let here = obs.evaluate(net, env, tol)?;
    let there = obs.evaluate(net, &env.flip(edge, a, b)?, tol)?;
    Ok(0.5 * (here - there))
}

/// Exact or Monte Carlo influence summary of an observable.
#[derive(Clone, Debug)]
pub struct InfluenceReport {
    /// Variance under the uniform measure on the cube (population variance
    /// when exact).
    pub variance: f64,
    pub mean: f64,
    /// `||delta_e f||_1` per edge.
    pub per_edge_l1: Vec<f64>,
    /// `||delta_e f||_2^2` per edge.
    pub per_edge_l2sq: Vec<f64>,
    /// `sum_e ||delta_e f||_1^2`.
    pub sum_l1_sq: f64,
    /// `sum_e ||delta_e f||_2^2`.
    pub sum_l2sq: f64,
    /// True for full enumeration, false for Monte Carlo estimates.
    pub exact: bool,
    /// Replica count when not exact.
    pub replicas: Option<u64>,
}

/// Full-enumeration influence analysis with the default edge cap.
pub fn exhaustive_analysis(
    net: &Network,
    obs: &Observable,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<InfluenceReport> {
    exhaustive_analysis_capped(net, obs, a, b, tol, DEFAULT_EXHAUSTIVE_CAP)
}

/// Full-enumeration influence analysis with an explicit edge cap.
pub fn exhaustive_analysis_capped(
    net: &Network,
    obs: &Observable,
    a: f64,
    b: f64,
    tol: f64,
    max_edges: usize,
) -> Result<InfluenceReport> {
    let m = net.edge_count();
    if m > max_edges {
        return Err(Error::EnumerationTooLarge { edges: m, limit: max_edges });
    }
    env::enumerate_edges(m, a, b)?; // validates a, b and the hard cap
    let total = 1u64 << m;

    let mut values = Vec::with_capacity(total as usize);
    for mask in 0..total {
        let environment = env::EnvironmentIter::environment_for(m, mask, a, b);
        values.push(obs.evaluate(net, &environment, tol)?);
    }

    let inv = 1.0 / total as f64;
    let mut acc = math::Kahan::default();
    for &v in &values {
        acc.add(v);
    }
    let mean = acc.value() * inv;
    let mut var_acc = math::Kahan::default();
    for &v in &values {
        var_acc.add((v - mean) * (v - mean));
    }
    let variance = var_acc.value() * inv;

    let mut per_edge_l1 = Vec::with_capacity(m);
    let mut per_edge_l2sq = Vec::with_capacity(m);
    for e in 0..m {
        let bit = 1u64 << e;
        let mut l1 = math::Kahan::default();
        let mut l2 = math::Kahan::default();
        for mask in 0..total {
            let d = 0.5 * (values[mask as usize] - values[(mask ^ bit) as usize]);
            l1.add(math::abs(d));
            l2.add(d * d);
        }
        per_edge_l1.push(l1.value() * inv);
        per_edge_l2sq.push(l2.value() * inv);
    }

    let sum_l1_sq = per_edge_l1.iter().map(|x| x * x).sum();
    let sum_l2sq = per_edge_l2sq.iter().sum();

    Ok(InfluenceReport {
        variance,
        mean,
        per_edge_l1,
        per_edge_l2sq,
        sum_l1_sq,
        sum_l2sq,
        exact: true,
        replicas: None,
    })
}

/// One inequality comparison.
#[derive(Clone, Copy, Debug)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// True when the inequality is trivially satisfied (non-positive
    /// left side), as in the log-weighted bound below its threshold.
    pub vacuous: bool,
}

/// Efron-Stein: `Var(f) <= sum_e ||delta_e f||_2^2`.
pub fn check_efron_stein(report: &InfluenceReport) -> InequalityCheck {
    let lhs = report.variance;
    let rhs = report.sum_l2sq;
    InequalityCheck { lhs, rhs, holds: lhs <= rhs + inequality_slack(rhs), vacuous: false }
}

/// The log-weighted (modified Poincare) inequality:
/// `Var(f) * log(Var(f) / sum ||delta_e f||_1^2) <= 2 sum ||delta_e f||_2^2`.
///
/// When `Var(f) <= sum ||delta||_1^2` the left side is non-positive and the
/// inequality is vacuous; that case is flagged, not failed.
pub fn check_fs_inequality(report: &InfluenceReport) -> Result<InequalityCheck> {
    let rhs = 2.0 * report.sum_l2sq;
    if report.sum_l1_sq <= 0.0 {
        if report.variance <= 0.0 {
            return Ok(InequalityCheck { lhs: 0.0, rhs, holds: true, vacuous: true });
        }
        return Err(Error::DegenerateInfluence);
    }
    let ratio = report.variance / report.sum_l1_sq;
    let lhs = if report.variance == 0.0 { 0.0 } else { report.variance * math::ln(ratio) };
    let vacuous = ratio <= 1.0;
    Ok(InequalityCheck { lhs, rhs, holds: lhs <= rhs + inequality_slack(rhs), vacuous })
}

/// The gradient-energy comparison `sum_e ||delta_e f||_2^2 <=
/// (b-a)^2/(2a) * E(f)` for resistance observables.
pub fn check_energy_bound(report: &InfluenceReport, a: f64, b: f64) -> InequalityCheck {
    let lhs = report.sum_l2sq;
    let rhs = (b - a) * (b - a) / (2.0 * a) * report.mean;
    InequalityCheck { lhs, rhs, holds: lhs <= rhs + inequality_slack(rhs), vacuous: false }
}

/// Certified majorants of the influence sums.
#[derive(Clone, Copy, Debug)]
pub struct FsBoundInputs {
    /// Majorant of `sum ||delta_e f||_1^2`.
    pub e1: f64,
    /// Majorant of `sum ||delta_e f||_2^2`.
    pub e2: f64,
}

/// The closed-form variance bound
/// `2 e2 / log( e2 / (e1 * log(e2/e1)) )`, valid when `e2/e1 >= e`.
pub fn fs_variance_bound(inputs: FsBoundInputs) -> Result<f64> {
    let FsBoundInputs { e1, e2 } = inputs;
    if !(e1 > 0.0 && e2 > 0.0 && e1.is_finite() && e2.is_finite()) {
        return Err(Error::HypothesisViolated("majorants must be positive and finite"));
    }
    let ratio = e2 / e1;
    if ratio < core::f64::consts::E {
        return Err(Error::HypothesisViolated("need e2/e1 >= e"));
    }
    let inner = e2 / (e1 * math::ln(ratio));
    if inner <= 1.0 {
        return Err(Error::HypothesisViolated("inner log argument must exceed 1"));
    }
    Ok(2.0 * e2 / math::ln(inner))
}

/// Monte Carlo evaluation of the localized variance-bound certificate.
#[derive(Clone, Copy, Debug)]
pub struct Prop22Report {
    /// `sup_{e far} E[r_e theta(e)^2]`, estimated.
    pub alpha_m: f64,
    /// `|near set| / E[f]`, estimated.
    pub beta_m: f64,
    /// `((b-a)/a)^2 alpha + (b-a)^2 beta`.
    pub epsilon_m: f64,
    /// The variance bound, when applicable (0 for a degenerate `a = b`).
    pub bound: Option<f64>,
    /// True iff `epsilon_m < 1`.
    pub applicable: bool,
    /// Estimated `E[f]`.
    pub mean: f64,
    pub replicas: u64,
}

/// Estimate the certificate of the localized variance bound: the far edge
/// set carries little current on average, the near set is small relative to
/// the expected resistance.
#[allow(clippy::too_many_arguments)]
pub fn prop22_bound(
    net: &Network,
    obs: &Observable,
    a: f64,
    b: f64,
    far_edges: &[usize],
    replicas: u64,
    seed: SeedSpec,
    tol: f64,
) -> Result<Prop22Report> {
    if far_edges.is_empty() {
        return Err(Error::EmptyEdgeSet);
    }
    if replicas < 2 {
        return Err(Error::TooFewReplicas { got: replicas });
    }
    let dist = Distribution::bernoulli(a, b)?;
    for &e in far_edges {
        if e >= net.edge_count() {
            return Err(Error::EdgeOutOfRange { edge: e, count: net.edge_count() });
        }
    }

    let mut mean_f = ReplicaStats::new();
    let mut edge_energy = vec![ReplicaStats::new(); far_edges.len()];
    for k in 0..replicas {
        let environment = Environment::sample(net, dist, SeedSpec::new(seed.master_seed, seed.stream_index.wrapping_add(k)));
        let (value, flow) = obs.evaluate_with_flow(net, &environment, tol)?;
        mean_f.push(value);
        for (slot, &e) in far_edges.iter().enumerate() {
            let th = flow.theta[e];
            edge_energy[slot].push(environment.resistance(e) * th * th);
        }
    }

    let alpha_m = edge_energy.iter().map(ReplicaStats::mean).fold(0.0f64, f64::max);
    let near_count = net.edge_count() - far_edges.len();
    let mean = mean_f.mean();
    let beta_m = near_count as f64 / mean;
    let ratio = (b - a) / a;
    let epsilon_m = ratio * ratio * alpha_m + (b - a) * (b - a) * beta_m;
    let applicable = epsilon_m < 1.0;
    let bound = if !applicable {
        None
    } else if epsilon_m == 0.0 {
        Some(0.0)
    } else {
        let k = ((b - a) * (b - a) / (2.0 * a)).max(core::f64::consts::E);
        Some(2.0 * k * mean / math::ln(k / (epsilon_m * math::ln(k / epsilon_m))))
    };

    Ok(Prop22Report { alpha_m, beta_m, epsilon_m, bound, applicable, mean, replicas })
}

/// Monte Carlo estimate of one edge's influence norms.
#[derive(Clone, Copy, Debug)]
pub struct EdgeInfluence {
    pub edge: usize,
    /// Sample mean of `|delta_e f|` and its standard error.
    pub l1: f64,
    pub l1_se: f64,
    /// Sample mean of `(delta_e f)^2` and its standard error.
    pub l2sq: f64,
    pub l2sq_se: f64,
}

/// Unbiased per-edge influence estimates over sampled environments.
pub fn mc_influence(
    net: &Network,
    obs: &Observable,
    dist: Distribution,
    edges: &[usize],
    replicas: u64,
    seed: SeedSpec,
    tol: f64,
) -> Result<Vec<EdgeInfluence>> {
    let Distribution::Bernoulli { a, b } = dist else {
        return Err(Error::NotBernoulli);
    };
    if replicas < 2 {
        return Err(Error::TooFewReplicas { got: replicas });
    }
    if edges.is_empty() {
        return Ok(Vec::new());
    }
    for &e in edges {
        if e >= net.edge_count() {
            return Err(Error::EdgeOutOfRange { edge: e, count: net.edge_count() });
        }
    }

    let mut abs_stats = vec![ReplicaStats::new(); edges.len()];
    let mut sq_stats = vec![ReplicaStats::new(); edges.len()];
    for k in 0..replicas {
        let environment = Environment::sample(net, dist, SeedSpec::new(seed.master_seed, seed.stream_index.wrapping_add(k)));
        let here = obs.evaluate(net, &environment, tol)?;
        for (slot, &e) in edges.iter().enumerate() {
            let there = obs.evaluate(net, &environment.flip(e, a, b)?, tol)?;
            let d = 0.5 * (here - there);
            abs_stats[slot].push(math::abs(d));
            sq_stats[slot].push(d * d);
        }
    }

    Ok(edges
        .iter()
        .zip(abs_stats.iter().zip(&sq_stats))
        .map(|(&edge, (l1s, l2s))| EdgeInfluence {
            edge,
            l1: l1s.mean(),
            l1_se: l1s.standard_error(),
            l2sq: l2s.mean(),
            l2sq_se: l2s.standard_error(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand enumeration of the two-parallel-edge network, f = r1 r2 / (r1 + r2),
    /// independent of every engine in this crate.
    fn two_parallel_oracle(a: f64, b: f64) -> InfluenceReport {
        let configs = [(a, a), (b, a), (a, b), (b, b)]; // mask order: bit0 = edge0
        let f = |r1: f64, r2: f64| r1 * r2 / (r1 + r2);
        let values: Vec<f64> = configs.iter().map(|&(r1, r2)| f(r1, r2)).collect();
        let mean = values.iter().sum::<f64>() / 4.0;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
        let mut per_edge_l1 = Vec::new();
        let mut per_edge_l2sq = Vec::new();
        for e in 0..2 {
            let mut l1 = 0.0;
            let mut l2 = 0.0;
            for mask in 0..4usize {
                let d = 0.5 * (values[mask] - values[mask ^ (1 << e)]);
                l1 += d.abs() / 4.0;
                l2 += d * d / 4.0;
            }
            per_edge_l1.push(l1);
            per_edge_l2sq.push(l2);
        }
        InfluenceReport {
            variance,
            mean,
            sum_l1_sq: per_edge_l1.iter().map(|x| x * x).sum(),
            sum_l2sq: per_edge_l2sq.iter().sum(),
            per_edge_l1,
            per_edge_l2sq,
            exact: true,
            replicas: None,
        }
    }

    fn two_parallel_net() -> Network {
        Network::from_edges(2, &[(0, 1), (0, 1)]).unwrap()
    }

    const P2P: Observable = Observable::PointToPoint { source: 0, sink: 1 };

    #[test]
    fn two_parallel_edges_match_hand_enumeration() {
        let (a, b) = (1.0, 2.0);
        let oracle = two_parallel_oracle(a, b);
        // frozen closed forms: Var = 19/576, mean = 17/24,
        // sum ||.||_1^2 = 1/32, sum ||.||_2^2 = 5/144
        assert!((oracle.variance - 19.0 / 576.0).abs() < 1e-15);
        assert!((oracle.mean - 17.0 / 24.0).abs() < 1e-15);
        assert!((oracle.sum_l1_sq - 1.0 / 32.0).abs() < 1e-15);
        assert!((oracle.sum_l2sq - 5.0 / 144.0).abs() < 1e-15);

        let report = exhaustive_analysis(&two_parallel_net(), &P2P, a, b, 1e-10).unwrap();
        assert!(report.exact);
        assert!((report.variance - oracle.variance).abs() < 1e-12);
        assert!((report.mean - oracle.mean).abs() < 1e-12);
        assert!((report.sum_l1_sq - oracle.sum_l1_sq).abs() < 1e-12);
        assert!((report.sum_l2sq - oracle.sum_l2sq).abs() < 1e-12);
    }

    #[test]
    fn single_edge_variance_is_quarter_gap_squared() {
        let net = Network::from_edges(2, &[(0, 1)]).unwrap();
        let (a, b) = (0.5, 2.5);
        let report = exhaustive_analysis(&net, &P2P, a, b, 1e-10).unwrap();
        assert!((report.variance - (b - a) * (b - a) / 4.0).abs() < 1e-14);
        // equality case of Efron-Stein
        let es = check_efron_stein(&report);
        assert!(es.holds);
        assert!((es.lhs - es.rhs).abs() < 1e-14);
        // Var = sum ||.||_1^2, so the log-weighted bound is vacuous with lhs 0
        let fs = check_fs_inequality(&report).unwrap();
        assert!(fs.holds && fs.vacuous);
        assert!(fs.lhs.abs() < 1e-14);
    }

    #[test]
    fn inequality_suite_on_two_parallel_edges() {
        let report = exhaustive_analysis(&two_parallel_net(), &P2P, 1.0, 2.0, 1e-10).unwrap();
        let es = check_efron_stein(&report);
        assert!(es.holds);
        assert!((es.lhs - 19.0 / 576.0).abs() < 1e-12);
        assert!((es.rhs - 5.0 / 144.0).abs() < 1e-12);

        let fs = check_fs_inequality(&report).unwrap();
        assert!(fs.holds && !fs.vacuous);
        // frozen from the oracle: lhs = Var * ln(Var / sum l1^2)
        let expected_lhs = (19.0 / 576.0) * ((19.0f64 / 576.0) / (1.0 / 32.0)).ln();
        assert!((fs.lhs - expected_lhs).abs() < 1e-12);
        assert!((expected_lhs - 0.0017836).abs() < 1e-6);
        assert!((fs.rhs - 5.0 / 72.0).abs() < 1e-12);

        let eb = check_energy_bound(&report, 1.0, 2.0);
        assert!(eb.holds);
    }

    #[test]
    fn constant_observable_is_vacuous() {
        let net = Network::from_edges(2, &[(0, 1)]).unwrap();
        let report = exhaustive_analysis(&net, &P2P, 1.0, 1.0, 1e-10).unwrap();
        assert!(report.variance.abs() < 1e-15);
        let fs = check_fs_inequality(&report).unwrap();
        assert!(fs.holds && fs.vacuous);
    }

    #[test]
    fn gradient_upper_bound_when_flipping_up() {
        // f(flip r) - f(r) <= (b-a) theta(e)^2 when r_e = a
        let net = Network::box_lattice(2, 2).unwrap();
        let (a, b) = (1.0, 2.0);
        let dist = Distribution::bernoulli(a, b).unwrap();
        let obs = Observable::PointToPoint { source: 0, sink: 8 };
        for k in 0..10 {
            let environment = Environment::sample(&net, dist, SeedSpec::new(500, k));
            let (value, flow) = obs.evaluate_with_flow(&net, &environment, 1e-10).unwrap();
            for e in 0..net.edge_count() {
                if environment.resistance(e) == a {
                    let flipped = obs.evaluate(&net, &environment.flip(e, a, b).unwrap(), 1e-10).unwrap();
                    let th = flow.theta[e];
                    assert!(
                        flipped - value <= (b - a) * th * th + 1e-9,
                        "edge {e}: jump {} vs bound {}",
                        flipped - value,
                        (b - a) * th * th
                    );
                }
            }
        }
    }

    #[test]
    fn discrete_gradient_trivial_cases() {
        let net = Network::from_edges(2, &[(0, 1)]).unwrap();
        // a = b: gradient vanishes
        let env1 = Environment::constant(1, 1.0).unwrap();
        let g = discrete_gradient(&net, &P2P, &env1, 0, 1.0, 1.0, 1e-10).unwrap();
        assert_eq!(g, 0.0);
        // single edge, f = r: gradient at value a is (a - b)/2
        let (a, b) = (1.0, 4.0);
        let env2 = Environment::new(vec![a]).unwrap();
        let g = discrete_gradient(&net, &P2P, &env2, 0, a, b, 1e-10).unwrap();
        assert!((g - (a - b) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn fs_variance_bound_closed_form() {
        // ratio exactly e: inner log is 1, bound = 2 e2
        let e2 = 3.0;
        let bound = fs_variance_bound(FsBoundInputs { e1: e2 / core::f64::consts::E, e2 }).unwrap();
        assert!((bound - 2.0 * e2).abs() < 1e-12);

        // ratio e^2: bound = 2 e2 / ln(e^2 / 2), frozen by direct arithmetic
        let e2 = 1.0;
        let bound = fs_variance_bound(FsBoundInputs { e1: (-2.0f64).exp(), e2 }).unwrap();
        let expected = 2.0 / (2.0 - core::f64::consts::LN_2);
        assert!((bound - expected).abs() < 1e-12, "bound {bound} expected {expected}");

        // ratio below e: hypothesis violated
        assert!(fs_variance_bound(FsBoundInputs { e1: 1.0, e2 : 2.0 }).is_err());
    }

    #[test]
    fn prop22_degenerate_and_typical() {
        let net = Network::box_lattice(2, 2).unwrap();
        let obs = Observable::PointToPoint { source: 0, sink: 8 };
        // a = b: epsilon is 0, trivially applicable
        let all: Vec<usize> = (0..net.edge_count()).collect();
        let rep = prop22_bound(&net, &obs, 1.0, 1.0, &all, 8, SeedSpec::new(1, 0), 1e-10).unwrap();
        assert!(rep.applicable);
        assert_eq!(rep.epsilon_m, 0.0);
        assert_eq!(rep.bound, Some(0.0));

        // near set = all edges: beta = |E| / E[R] makes epsilon >= 1
        let far = [0usize];
        let rep = prop22_bound(&net, &obs, 1.0, 2.0, &far, 16, SeedSpec::new(2, 0), 1e-10).unwrap();
        assert!(rep.beta_m > 1.0);
        assert!(!rep.applicable);
        assert_eq!(rep.bound, None);

        assert!(matches!(
            prop22_bound(&net, &obs, 1.0, 2.0, &[], 8, SeedSpec::new(3, 0), 1e-10),
            Err(Error::EmptyEdgeSet)
        ));
    }

    #[test]
    fn mc_influence_single_edge_matches_exact() {
        // |delta| = (b-a)/2 deterministically on one edge
        let net = Network::from_edges(2, &[(0, 1)]).unwrap();
        let (a, b) = (1.0, 2.0);
        let dist = Distribution::bernoulli(a, b).unwrap();
        let est = mc_influence(&net, &P2P, dist, &[0], 100, SeedSpec::new(7, 0), 1e-10).unwrap();
        assert_eq!(est.len(), 1);
        assert!((est[0].l1 - (b - a) / 2.0).abs() < 1e-12);
        assert!(est[0].l1_se < 1e-12);

        let empty = mc_influence(&net, &P2P, dist, &[], 10, SeedSpec::new(7, 0), 1e-10).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn mc_influence_two_parallel_within_three_se() {
        let (a, b) = (1.0, 2.0);
        let oracle = two_parallel_oracle(a, b);
        let dist = Distribution::bernoulli(a, b).unwrap();
        let est = mc_influence(&two_parallel_net(), &P2P, dist, &[0, 1], 4000, SeedSpec::new(9, 0), 1e-10).unwrap();
        for e in &est {
            assert!(
                (e.l1 - oracle.per_edge_l1[e.edge]).abs() <= 3.0 * e.l1_se,
                "edge {} l1 {} vs {} (se {})",
                e.edge,
                e.l1,
                oracle.per_edge_l1[e.edge],
                e.l1_se
            );
            assert!((e.l2sq - oracle.per_edge_l2sq[e.edge]).abs() <= 3.0 * e.l2sq_se);
        }
    }

    #[test]
    fn exhaustive_cap_enforced() {
        let net = Network::box_lattice(2, 3).unwrap(); // 24 edges
        assert!(matches!(
            exhaustive_analysis(&net, &P2P, 1.0, 2.0, 1e-10),
            Err(Error::EnumerationTooLarge { edges: 24, limit: 20 })
        ));
    }

    #[test]
    fn grid_2x2_inequalities_hold_exhaustively() {
        let net = Network::box_lattice(2, 1).unwrap();
        let obs = Observable::PointToPoint { source: 0, sink: 3 };
        let report = exhaustive_analysis(&net, &obs, 1.0, 2.0, 1e-10).unwrap();
        assert!(check_efron_stein(&report).holds);
        assert!(check_fs_inequality(&report).unwrap().holds);
        assert!(check_energy_bound(&report, 1.0, 2.0).holds);
    }
}
