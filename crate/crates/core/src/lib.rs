//! Forward simulation and likelihood-free inference for the Y-linked
//! two-sex branching process with mutations and blind choice of males.
//!
//! The crate is `no_std` and only needs `alloc`. Randomness is always passed
//! in explicitly as a [`RandomStream`]; there is no global state, so every
//! operation is a pure function of its inputs and the stream it consumes.
//!
//! Module map:
//!
//! - [`laws`]: offspring laws and closed-form aggregation of couple sums.
//! - [`model`]: parameters, reproduction, mating, path simulation, growth rates.
//! - [`observation`]: the partial observation schemes and their distances.
//! - [`abc`]: priors and the tolerance rejection ABC engine.
//! - [`stats`]: density estimates, HPD sets, RMSE, spike probabilities, Bayes factors.
//! - [`predictive`]: posterior predictive simulation of future generations.
#![no_std]

extern crate alloc;

pub mod abc;
pub mod error;
pub mod laws;
pub mod model;
pub mod observation;
pub mod predictive;
pub mod rng;
mod sampling;
pub mod stats;

pub use abc::{AbcConfig, AcceptedDraw, PosteriorSample, PriorSpec, Scheme};
pub use error::{Error, Result};
pub use laws::{LawFamily, OffspringLaw};
pub use model::{GenerationState, ParamVector, PathRecord};
pub use observation::{BasicSample, ExtendedSample, SchemeVariant};
pub use rng::RandomStream;
