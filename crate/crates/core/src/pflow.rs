//! Nonlinear p-resistance by iteratively reweighted least squares.
//!
//! For `p > 1` the p-energy `sum_e r_e |theta_e|^p` is strictly convex on
//! the affine space of unit flows, so the minimizer is unique. Each IRLS
//! step solves the weighted linear network with edge weights
//! `w_e = r_e * p * (|theta_e| + eps)^(p-2)` and moves toward that flow,
//! halving the step whenever the p-energy would increase. For `p = 2` the
//! weights are constant and the first iterate already is the linear
//! minimizer.

use alloc::vec;
use alloc::vec::Vec;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::graph::{Network, TerminalPair};
use crate::linear::{flow_diagnostics, UnitFlow};
use crate::math;
use crate::solve::{Prepared, SolveOptions};

/// Largest accepted exponent; beyond this the reweighting is numerically
/// violent and of no interest here.
pub const MAX_P: f64 = 8.0;

/// Knobs for the IRLS loop.
#[derive(Clone, Copy, Debug)]
pub struct PFlowOptions {
    /// Relative p-energy change that counts as converged.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Smoothing inside `(|theta| + eps)^(p-2)`, guarding the `p < 2`
    /// singularity at zero flow.
    pub epsilon: f64,
    /// Initial step toward the IRLS iterate, in (0, 1].
    pub step: f64,
    /// Step halvings allowed within one iteration.
    pub max_halvings: u32,
    /// Linear solver settings for the inner weighted solves.
    pub solve: SolveOptions,
}

impl Default for PFlowOptions {
    fn default() -> Self {
        PFlowOptions {
            tol: 1e-8,
            max_iter: 500,
            epsilon: 1e-12,
            step: 1.0,
            max_halvings: 30,
            solve: SolveOptions::default(),
        }
    }
}

/// One p-resistance minimization.
#[derive(Clone, Debug)]
pub struct PFlowResult {
    /// Minimal p-energy found.
    pub value: f64,
    /// The minimizing unit flow on the original edge set.
    pub flow: UnitFlow,
    pub p: f64,
    /// IRLS iterations performed.
    pub iterations: usize,
    /// True iff the relative energy change dropped below tolerance.
    pub converged: bool,
    /// p-energy after each accepted step, starting from the linear
    /// initializer; non-increasing by construction.
    pub energy_trace: Vec<f64>,
}

/// p-resistance with default options (`tol` and `max_iter` override them).
pub fn p_resistance(
    net: &Network,
    env: &Environment,
    terminals: &TerminalPair,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PFlowResult> {
    p_resistance_with(net, env, terminals, p, PFlowOptions { tol, max_iter, ..PFlowOptions::default() })
}

pub fn p_resistance_with(
    net: &Network,
    env: &Environment,
    terminals: &TerminalPair,
    p: f64,
    opts: PFlowOptions,
) -> Result<PFlowResult> {
    if !(p > 1.0 && p <= MAX_P) {
        return Err(Error::POutOfRange { p });
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::TolOutOfRange { tol: opts.tol });
    }
    env.validate(net)?;
    terminals.validate(net)?;
    if !net.connects(terminals) {
        return Err(Error::Disconnected);
    }

    let contraction = net.contract(terminals)?;
    let cnet = &contraction.network;
    let r: Vec<f64> = contraction.edge_map.iter().map(|&orig| env.resistance(orig)).collect();

    let p_energy = |theta: &[f64]| -> f64 {
        let mut acc = crate::math::Kahan::default();
        for (re, th) in r.iter().zip(theta) {
            acc.add(re * math::powf(math::abs(*th), p));
        }
        acc.value()
    };

    // Initialize with the linear (p = 2) minimizer.
    let mut theta = solve_weighted(cnet, &r, contraction.source, contraction.sink, opts.solve)?;
    let mut energy = p_energy(&theta);
    let mut trace = vec![energy];
    let mut iterations = 0usize;
    let mut converged = false;
    // A full step can overshoot and land with a coincidentally tiny drop
    // while the next swing still descends, so convergence needs the drop
    // below tolerance twice in a row.
    let mut small_drops = 0u32;

    for _ in 0..opts.max_iter {
        iterations += 1;
        let weights: Vec<f64> = r
            .iter()
            .zip(&theta)
            .map(|(re, th)| re * p * math::powf(math::abs(*th) + opts.epsilon, p - 2.0))
            .collect();
        let target = solve_weighted(cnet, &weights, contraction.source, contraction.sink, opts.solve)?;

        // Damped move toward the weighted current. Both endpoints are unit
        // flows, so every convex combination is one too.
        let mut alpha = opts.step;
        let mut candidate: Vec<f64> = theta
            .iter()
            .zip(&target)
            .map(|(t0, t1)| t0 + alpha * (t1 - t0))
            .collect();
        let mut cand_energy = p_energy(&candidate);
        let mut halvings = 0;
        while cand_energy > energy && halvings < opts.max_halvings {
            alpha *= 0.5;
            for ((c, t0), t1) in candidate.iter_mut().zip(&theta).zip(&target) {
                *c = t0 + alpha * (t1 - t0);
            }
            cand_energy = p_energy(&candidate);
            halvings += 1;
        }
        if cand_energy > energy {
            // no descent left at the smallest step: stationary
            converged = true;
            break;
        }
        let drop = energy - cand_energy;
        theta = candidate;
        energy = cand_energy;
        trace.push(energy);
        if drop <= opts.tol * energy.max(f64::MIN_POSITIVE) {
            small_drops += 1;
            if small_drops >= 2 {
                converged = true;
                break;
            }
        } else {
            small_drops = 0;
        }
    }

    // Map back to original edge ids.
    let mut full = vec![0.0; net.edge_count()];
    for (ce, &orig) in contraction.edge_map.iter().enumerate() {
        full[orig] = theta[ce];
    }
    let diag = flow_diagnostics(net, &full, terminals);
    Ok(PFlowResult {
        value: energy,
        flow: UnitFlow {
            theta: full,
            strength: diag.strength,
            node_law_residual: diag.node_law_residual,
        },
        p,
        iterations,
        converged,
        energy_trace: trace,
    })
}

/// Unit flow minimizing `sum_e w_e theta_e^2` on an already contracted
/// network, as an edge vector in contracted edge order.
fn solve_weighted(
    cnet: &Network,
    weights: &[f64],
    source: usize,
    sink: usize,
    opts: SolveOptions,
) -> Result<Vec<f64>> {
    let conduct: Vec<f64> = weights.iter().map(|&w| 1.0 / w).collect();
    let prep = Prepared::new(cnet.vertex_count(), cnet.edges(), &conduct, sink, opts)?;
    let sol = prep.solve_unit(source)?;
    Ok(cnet
        .edges()
        .iter()
        .zip(weights)
        .map(|(e, &w)| (sol.potentials[e.u] - sol.potentials[e.v]) / w)
        .collect())
}

/// The three-branch p-resistance growth scale `a_d(n, p)`: polynomial below
/// the critical exponent `d/(d-1)`, logarithmic at it, constant above.
pub fn p_scaling_reference(d: usize, n: usize, p: f64) -> f64 {
    assert!(d >= 1, "dimension must be at least 1");
    assert!(n >= 2, "scale must be at least 2");
    if d == 1 {
        // critical exponent is infinite: always the polynomial branch n^1
        return n as f64;
    }
    let critical = d as f64 / (d as f64 - 1.0);
    if p < critical {
        math::powf(n as f64, 1.0 - (d as f64 - 1.0) * (p - 1.0))
    } else if p == critical {
        math::ln(n as f64)
    } else {
        1.0
    }
}

/// Two-sided report for the relaxed p-triangle comparison
/// `R^p(x,z) <= R^p(x,y) + 2^p * b * |z - y|`.
#[derive(Clone, Copy, Debug)]
pub struct TriangleCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluate the relaxed p-triangle comparison on a lattice-embedded
/// network; `b` is the top of the resistance range and `|z - y|` the
/// l1 distance between the detour endpoints.
#[allow(clippy::too_many_arguments)]
pub fn p_triangle_diagnostic(
    net: &Network,
    env: &Environment,
    x: usize,
    y: usize,
    z: usize,
    p: f64,
    b: f64,
    opts: PFlowOptions,
) -> Result<TriangleCheck> {
    let coords = net.coords().ok_or(Error::MissingCoordinates)?;
    let dist_zy: i64 = coords[z].iter().zip(&coords[y]).map(|(a, c)| (a - c).abs()).sum();

    let lhs = p_resistance_with(net, env, &TerminalPair::singleton(x, z)?, p, opts)?.value;
    let rxy = if y == z {
        lhs
    } else {
        p_resistance_with(net, env, &TerminalPair::singleton(x, y)?, p, opts)?.value
    };
    let rhs = rxy + math::powf(2.0, p) * b * dist_zy as f64;
    let slack = 1e-9 + 1e-6 * math::abs(rhs);
    Ok(TriangleCheck { lhs, rhs, holds: lhs <= rhs + slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Distribution, SeedSpec};
    use crate::linear::effective_resistance;

    #[test]
    fn p2_matches_linear_engine() {
        let net = Network::box_lattice(2, 2).unwrap();
        let dist = Distribution::bernoulli(1.0, 2.0).unwrap();
        for k in 0..10 {
            let env = Environment::sample(&net, dist, SeedSpec::new(100, k));
            let t = TerminalPair::singleton(0, 8).unwrap();
            let lin = effective_resistance(&net, &env, &t, 1e-10).unwrap();
            let pfl = p_resistance(&net, &env, &t, 2.0, 1e-8, 500).unwrap();
            assert!(pfl.converged);
            assert!(
                (pfl.value - lin.value).abs() <= 1e-6 * lin.value,
                "p=2 mismatch: {} vs {}",
                pfl.value,
                lin.value
            );
        }
    }

    #[test]
    fn two_parallel_unit_edges_p3() {
        // minimize |t|^3 + |1-t|^3: t = 1/2, energy = 1/4
        let net = Network::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        let env = Environment::constant(2, 1.0).unwrap();
        let t = TerminalPair::singleton(0, 1).unwrap();
        let res = p_resistance(&net, &env, &t, 3.0, 1e-10, 500).unwrap();
        assert!(res.converged);
        assert!((res.value - 0.25).abs() < 1e-8, "value {}", res.value);
        assert!((res.flow.theta[0] - 0.5).abs() < 1e-6);
        assert!((res.flow.theta[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn series_path_forces_unit_flow() {
        // unique unit flow: R^p = sum r_e for any p
        let net = Network::box_lattice(1, 4).unwrap();
        let env = Environment::new(vec![0.5, 1.0, 2.0, 0.25]).unwrap();
        let t = TerminalPair::singleton(0, 4).unwrap();
        for &p in &[1.5, 2.0, 3.0, 5.0] {
            let res = p_resistance(&net, &env, &t, p, 1e-9, 500).unwrap();
            assert!((res.value - 3.75).abs() < 1e-7, "p {p}: {}", res.value);
            for th in &res.flow.theta {
                assert!((th.abs() - 1.0).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn energy_trace_is_non_increasing() {
        let net = Network::box_lattice(2, 2).unwrap();
        let dist = Distribution::bernoulli(0.5, 2.0).unwrap();
        let env = Environment::sample(&net, dist, SeedSpec::new(55, 3));
        let t = TerminalPair::singleton(0, 8).unwrap();
        let res = p_resistance(&net, &env, &t, 1.5, 1e-9, 500).unwrap();
        for w in res.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(res.converged);
    }

    #[test]
    fn minimizer_edge_flows_bounded_by_one() {
        let net = Network::box_lattice(2, 2).unwrap();
        let dist = Distribution::bernoulli(1.0, 2.0).unwrap();
        for (k, &p) in [1.5, 2.5, 4.0].iter().enumerate() {
            let env = Environment::sample(&net, dist, SeedSpec::new(200, k as u64));
            let t = TerminalPair::singleton(0, 8).unwrap();
            let res = p_resistance(&net, &env, &t, p, 1e-8, 500).unwrap();
            assert!(res.flow.theta.iter().all(|th| th.abs() <= 1.0 + 1e-8));
            assert!(res.flow.node_law_residual <= 1e-8);
            assert!((res.flow.strength - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn different_damping_schedules_agree() {
        // strict convexity: the minimizer is unique
        let net = Network::box_lattice(2, 2).unwrap();
        let dist = Distribution::bernoulli(1.0, 3.0).unwrap();
        let env = Environment::sample(&net, dist, SeedSpec::new(400, 0));
        let t = TerminalPair::singleton(0, 8).unwrap();
        let tol = 1e-10;
        let full = p_resistance_with(&net, &env, &t, 3.0, PFlowOptions { tol, ..Default::default() }).unwrap();
        let damped = p_resistance_with(
            &net,
            &env,
            &t,
            3.0,
            PFlowOptions { tol, step: 0.6, ..Default::default() },
        )
        .unwrap();
        assert!(full.converged && damped.converged);
        assert!((full.value - damped.value).abs() <= 10.0 * tol * full.value.max(1.0));
    }

    #[test]
    fn p_out_of_range_rejected() {
        let net = Network::from_edges(2, &[(0, 1)]).unwrap();
        let env = Environment::constant(1, 1.0).unwrap();
        let t = TerminalPair::singleton(0, 1).unwrap();
        assert!(matches!(p_resistance(&net, &env, &t, 1.0, 1e-8, 10), Err(Error::POutOfRange { .. })));
        assert!(matches!(p_resistance(&net, &env, &t, 9.0, 1e-8, 10), Err(Error::POutOfRange { .. })));
    }

    #[test]
    fn scaling_reference_branches() {
        assert!((p_scaling_reference(2, 100, 2.0) - (100f64).ln()).abs() < 1e-15);
        assert_eq!(p_scaling_reference(2, 37, 3.0), 1.0);
        assert!((p_scaling_reference(2, 16, 1.5) - 4.0).abs() < 1e-12);
        assert_eq!(p_scaling_reference(1, 50, 3.0), 50.0);
        assert!((p_scaling_reference(3, 8, 1.25) - (8f64).powf(0.5)).abs() < 1e-12);
    }

    #[test]
    fn triangle_diagnostic_degenerate_and_random() {
        let net = Network::box_lattice(2, 2).unwrap();
        let dist = Distribution::bernoulli(1.0, 2.0).unwrap();
        let env = Environment::sample(&net, dist, SeedSpec::new(41, 1));
        // y = z reduces to lhs = rhs term
        let c = p_triangle_diagnostic(&net, &env, 0, 8, 8, 2.0, 2.0, PFlowOptions::default()).unwrap();
        assert!(c.holds);
        assert!((c.lhs - c.rhs).abs() < 1e-12);
        for (k, &p) in [1.5, 2.0, 3.0].iter().enumerate() {
            let env = Environment::sample(&net, dist, SeedSpec::new(42, k as u64));
            let c = p_triangle_diagnostic(&net, &env, 0, 4, 8, p, 2.0, PFlowOptions::default()).unwrap();
            assert!(c.holds, "p {p}: lhs {} rhs {}", c.lhs, c.rhs);
        }
    }
}
