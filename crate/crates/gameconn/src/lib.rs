//! Construction and classification of best-/better-response graphs of
//! finite ordinal games, with reproducible Monte Carlo experiments over
//! uniformly random games and simulation of adaptive dynamics.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`game_model`] — shapes, action profiles, lines, rankings, winner
//!   tables, and pure Nash equilibria;
//! * [`sampling`] — seeded uniform sampling, including rejection sampling
//!   conditioned on equilibrium events;
//! * [`response_graphs`] — explicit and implicit digraph forms;
//! * [`connectivity`] — acyclic / weakly acyclic / connected /
//!   super-connected classification and reachability statistics;
//! * [`dynamics`] — best-response dynamics with inertia and variants;
//! * [`experiments`] — deterministic parallel Monte Carlo sweeps;
//! * [`oracle`] — exhaustive enumeration and brute-force ground truth.

pub mod cli;
pub mod connectivity;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod game_model;
pub mod oracle;
pub mod response_graphs;
pub mod sampling;

pub use error::{Error, Result};
