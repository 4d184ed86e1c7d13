//! Scheduling of lecture-style activities and batteries against a
//! time-of-use tariff with a quadratic monthly peak charge, under one or
//! many net base-load scenarios.
//!
//! The crate builds the mixed-integer model ([`model`]), solves it with an
//! exhaustive oracle, a branch-and-bound over an LP relaxation or an
//! external solver ([`solve`]), offers two-phase matheuristics
//! ([`heuristics`]) and evaluates any schedule independently of the model
//! ([`evaluator`]).

pub mod evaluator;
pub mod heuristics;
pub mod instance;
pub mod model;
pub mod rooms;
pub mod scenarios;
pub mod schedule;
pub mod solve;
