//! Parametric timed pattern matching over timed words.
//!
//! Given a log (a [`model::TimedWord`]) and a pattern (a parametric timed
//! automaton, [`model::Pta`]), [`engine::match_set`] computes every start
//! time `t`, end time `t'` and parameter valuation for which the log
//! segment over `[t, t']` is accepted by the pattern. The answer is an exact
//! finite union of convex polyhedra with rational coefficients.

pub mod engine;
pub mod gen;
pub mod io;
pub mod model;
pub mod oracle;
pub mod patterns;
pub mod polyhedron;
pub mod rational;
pub mod transform;

pub use engine::{match_set, match_set_fixed, optimize, Direction, EngineOptions, MatchSet, OptResult};
pub use model::{Pta, TimedWord};
