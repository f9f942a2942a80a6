//! Monte Carlo campaigns, file formats, and the command line for random
//! resistor networks.
//!
//! The numerical core lives in `ohmlab-core`; this crate adds what needs an
//! operating system: seeded experiment drivers that fan replicas out across
//! threads and fold them back deterministically, CSV/JSON emitters, network
//! file import/export, and the `ohmlab` binary.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fileio;
pub mod verify;

pub use error::CliError;
