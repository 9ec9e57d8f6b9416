//! Simulation of the uniform spanning tree of Z^3.
//!
//! Trees are sampled with Wilson's algorithm ([`wilson`]) from loop-erased
//! random walks ([`lerw`], [`srw`]). On a sampled tree ([`ust`]) the crate
//! measures intrinsic balls, effective resistances ([`resistance`]) and the
//! quenched heat kernel of the tree walk ([`treewalk`]); [`probes`] runs the
//! scaling experiments. Every random quantity is a pure function of an
//! [`RngConfig`].

pub mod cli;
pub mod error;
pub mod geometry;
pub mod lerw;
pub mod probes;
pub mod resistance;
pub mod rng;
pub mod srw;
pub mod stats;
pub mod treewalk;
pub mod ust;
pub mod wilson;

pub use error::{Error, Result};
pub use geometry::{LatticeBox, LatticePath, LatticePoint, Metric};
pub use lerw::{loop_erase, SimplePath};
pub use rng::RngConfig;
pub use stats::ExponentFit;
pub use ust::SpanningTree;

/// Default growth exponent, used where a derived exponent needs a value
/// of beta and none was measured.
pub const DEFAULT_BETA: f64 = 1.624;
