//! Simulation laboratory for α-power WARM reinforcement processes on trees and
//! for nonlinear Pólya urns.
//!
//! The crate is layered bottom-up: [`params`] holds the parameter ledger,
//! [`urn`] the single-urn engines, [`graph`] the trees, [`warm`] the
//! continuous-time process on them, [`analysis`] the event checkers applied to
//! recorded trajectories and [`montecarlo`] the replica harness and the
//! estimators built on top.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod numeric;
pub mod params;
pub mod rng;
pub mod urn;
pub mod warm;

pub use error::{Error, Result};
pub use params::{ParamInputs, ParamSet};
pub use rng::{Substream, UniformSource};
