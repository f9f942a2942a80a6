//! Effective resistance and the unit current flow.
//!
//! The effective resistance between the terminal sets is the minimal energy
//! `sum_e r_e theta_e^2` over unit-strength flows; the minimizer is the unit
//! current, recovered here from the potentials of the grounded Laplacian
//! solve as `theta_e = (phi_u - phi_v) / r_e`. The dual (Dirichlet) form
//! works with potentials normalized to 1 on the sources and 0 on the sinks
//! and bounds `1/R` from above.

use alloc::vec;
use alloc::vec::Vec;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::graph::{Network, TerminalPair};
use crate::math;
use crate::solve::{Prepared, SolveOptions};

/// Largest accepted diagnostics tolerance.
pub const MAX_TOL: f64 = 1e-4;

/// An antisymmetric edge function; `theta[e] > 0` means flow along the
/// edge's stored `u -> v` orientation.
#[derive(Clone, Debug)]
pub struct UnitFlow {
    pub theta: Vec<f64>,
    pub strength: f64,
    pub node_law_residual: f64,
}

/// Vertex potentials, grounded so the sinks sit at 0.
#[derive(Clone, Debug)]
pub struct PotentialField {
    pub phi: Vec<f64>,
}

/// One effective-resistance solve.
#[derive(Clone, Debug)]
pub struct ResistanceResult {
    /// Effective resistance in ohms: the potential drop under unit current.
    pub value: f64,
    /// The unit current flow on the original edge set.
    pub flow: UnitFlow,
    /// Harmonic potentials on the original vertex set.
    pub potentials: PotentialField,
    /// Iterations spent by the iterative backend (0 for direct elimination).
    pub iterations: usize,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

/// Node-law diagnostics recomputed from scratch, independent of any solver.
#[derive(Clone, Copy, Debug)]
pub struct FlowDiagnostics {
    pub strength: f64,
    pub node_law_residual: f64,
    pub max_edge_flow: f64,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 && tol <= MAX_TOL {
        Ok(())
    } else {
        Err(Error::TolOutOfRange { tol })
    }
}

/// Effective resistance with default solver options.
pub fn effective_resistance(
    net: &Network,
    env: &Environment,
    terminals: &TerminalPair,
    tol: f64,
) -> Result<ResistanceResult> {
    effective_resistance_with(net, env, terminals, tol, SolveOptions::default())
}

/// Effective resistance with explicit solver options.
pub fn effective_resistance_with(
    net: &Network,
    env: &Environment,
    terminals: &TerminalPair,
    tol: f64,
    opts: SolveOptions,
) -> Result<ResistanceResult> {
    check_tol(tol)?;
    env.validate(net)?;
    terminals.validate(net)?;
    if !net.connects(terminals) {
        return Err(Error::Disconnected);
    }

    let contraction = net.contract(terminals)?;
    let cnet = &contraction.network;
    let conduct: Vec<f64> = contraction
        .edge_map
        .iter()
        .map(|&orig| 1.0 / env.resistance(orig))
        .collect();

    let prep = Prepared::new(cnet.vertex_count(), cnet.edges(), &conduct, contraction.sink, opts)?;
    let sol = prep.solve_unit(contraction.source)?;
    let value = sol.potentials[contraction.source];

    // Per-edge flow, mapped back through the edge ids; edges dropped by the
    // contraction carry no current.
    let mut theta = vec![0.0; net.edge_count()];
    for (ce, &orig) in contraction.edge_map.iter().enumerate() {
        let e = cnet.edge(ce);
        theta[orig] = (sol.potentials[e.u] - sol.potentials[e.v]) / env.resistance(orig);
    }

    let phi: Vec<f64> = contraction
        .vertex_map
        .iter()
        .map(|&cv| sol.potentials[cv])
        .collect();

    let diag = flow_diagnostics(net, &theta, terminals);
    Ok(ResistanceResult {
        value,
        flow: UnitFlow {
            theta,
            strength: diag.strength,
            node_law_residual: diag.node_law_residual,
        },
        potentials: PotentialField { phi },
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

/// Point-to-point resistances from one base vertex, reusing a single
/// factorization (or preconditioner) across all targets.
pub fn pairwise_resistances(
    net: &Network,
    env: &Environment,
    base: usize,
    targets: &[usize],
    tol: f64,
) -> Result<Vec<f64>> {
    pairwise_resistances_with(net, env, base, targets, tol, SolveOptions::default())
}

pub fn pairwise_resistances_with(
    net: &Network,
    env: &Environment,
    base: usize,
    targets: &[usize],
    tol: f64,
    opts: SolveOptions,
) -> Result<Vec<f64>> {
    check_tol(tol)?;
    env.validate(net)?;
    if base >= net.vertex_count() {
        return Err(Error::VertexOutOfRange { vertex: base, count: net.vertex_count() });
    }
    for &t in targets {
        if t >= net.vertex_count() {
            return Err(Error::VertexOutOfRange { vertex: t, count: net.vertex_count() });
        }
        if t == base {
            return Err(Error::InvalidTerminals("target coincides with the base vertex"));
        }
    }

    // Ground the base: R(base, t) is then the potential at t under unit
    // current injected there.
    let conduct: Vec<f64> = env.resistances().iter().map(|&r| 1.0 / r).collect();
    let prep = Prepared::new(net.vertex_count(), net.edges(), &conduct, base, opts)?;
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        if !prep.in_component(t) {
            return Err(Error::Disconnected);
        }
        let sol = prep.solve_unit(t)?;
        out.push(sol.potentials[t]);
    }
    Ok(out)
}

/// The flow energy `sum_e r_e theta_e^2`.
pub fn flow_energy(env: &Environment, flow: &UnitFlow) -> f64 {
    assert_eq!(env.len(), flow.theta.len(), "environment and flow must index the same edges");
    let mut acc = crate::math::Kahan::default();
    for (r, th) in env.resistances().iter().zip(&flow.theta) {
        acc.add(r * th * th);
    }
    acc.value()
}

/// Dirichlet energy `sum_e (phi_u - phi_v)^2 / r_e` of a potential field
/// normalized to 1 on the sources and 0 on the sinks. For the harmonic
/// minimizer this equals `1/R`.
pub fn dual_energy(
    net: &Network,
    env: &Environment,
    terminals: &TerminalPair,
    phi: &PotentialField,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    env.validate(net)?;
    terminals.validate(net)?;
    if phi.phi.len() != net.vertex_count() {
        return Err(Error::LengthMismatch { expected: net.vertex_count(), got: phi.phi.len() });
    }
    for &s in terminals.sources() {
        if math::abs(phi.phi[s] - 1.0) > tol {
            return Err(Error::BoundaryViolation { vertex: s });
        }
    }
    for &z in terminals.sinks() {
        if math::abs(phi.phi[z]) > tol {
            return Err(Error::BoundaryViolation { vertex: z });
        }
    }
    let mut acc = crate::math::Kahan::default();
    for (id, e) in net.edges().iter().enumerate() {
        let d = phi.phi[e.u] - phi.phi[e.v];
        acc.add(d * d / env.resistance(id));
    }
    Ok(acc.value())
}

/// Recompute strength, node-law residual, and the maximal edge flow from
/// scratch.
pub fn check_flow(net: &Network, flow: &UnitFlow, terminals: &TerminalPair) -> FlowDiagnostics {
    flow_diagnostics(net, &flow.theta, terminals)
}

pub(crate) fn flow_diagnostics(
    net: &Network,
    theta: &[f64],
    terminals: &TerminalPair,
) -> FlowDiagnostics {
    debug_assert_eq!(theta.len(), net.edge_count());
    let mut outflow = vec![0.0f64; net.vertex_count()];
    let mut max_edge_flow = 0.0f64;
    for (id, e) in net.edges().iter().enumerate() {
        let th = theta[id];
        outflow[e.u] += th;
        outflow[e.v] -= th;
        max_edge_flow = max_edge_flow.max(math::abs(th));
    }

    // Strength: net flow leaving the source set across its boundary. Edges
    // internal to the set cancel in the sum below, so summing per-vertex
    // outflow over the sources gives exactly the boundary flux.
    let strength: f64 = terminals.sources().iter().map(|&s| outflow[s]).sum();

    let mut node_law_residual = 0.0f64;
    for (v, &flow) in outflow.iter().enumerate() {
        if !terminals.is_terminal(v) {
            node_law_residual = node_law_residual.max(math::abs(flow));
        }
    }
    FlowDiagnostics { strength, node_law_residual, max_edge_flow }
}
