//! Electric networks with random edge resistances.
//!
//! This crate computes effective resistances of finite resistor networks —
//! the minimal energy of a unit-strength flow between two terminal sets —
//! together with the machinery needed to study how the resistance fluctuates
//! when the resistances are drawn i.i.d. from a two-point (or uniform)
//! distribution:
//!
//! * [`graph`] — multigraphs with parallel edges, lattice boxes of `Z^d`,
//!   the parallel-series staging graph, and terminal contraction.
//! * [`env`] — seeded sampling, single-edge flips, and exhaustive
//!   enumeration of `{a,b}^E` resistance environments.
//! * [`linear`] — the unit current flow, its energy, and the dual
//!   (potential) formulation, via a banded Cholesky / conjugate-gradient
//!   Laplacian solver.
//! * [`pflow`] — nonlinear `p`-resistance by iteratively reweighted least
//!   squares over unit flows.
//! * [`influence`] — discrete gradients on the hypercube of environments,
//!   exact variance/influence tables, and the Efron–Stein and modified
//!   Poincaré inequality checks.
//! * [`closedform`] — exact moments for the series path and the
//!   parallel-series network.
//! * [`stats`] — mergeable streaming moments for Monte Carlo campaigns.
//!
//! The crate is `no_std`-compatible (with `alloc`): disable the default
//! `std` feature and enable `libm` for the float math fallback.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ohmlab-core needs either the `std` or the `libm` feature for float math");

pub mod closedform;
pub mod env;
pub mod error;
pub mod graph;
pub mod influence;
pub mod linear;
mod math;
pub mod pflow;
pub mod solve;
pub mod stats;

pub use env::{Distribution, Environment, SeedSpec};
pub use error::{Error, Result};
pub use graph::{Network, TerminalPair};
pub use linear::{effective_resistance, PotentialField, ResistanceResult, UnitFlow};
pub use pflow::{p_resistance, PFlowResult};
pub use solve::SolveOptions;
