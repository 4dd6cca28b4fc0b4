//! Combinatorial models of pointed stable curves in characteristic `p > 0`
//! and exact computation of generalized Hasse-Witt invariants of prime-to-p
//! cyclic admissible covers.
//!
//! The pieces:
//!
//! * [`semigraph`] — dual semi-graphs and curve models;
//! * [`padic`] — digit calculus on ramification divisors (`n = p^t - 1`);
//! * [`quasitree`] — minimal quasi-trees and their image graphs;
//! * [`graphcover`] — `Z/nZ`-covers of semi-graphs and the eigenspaces of
//!   their first cohomology;
//! * [`p1cover`] — Frobenius-semilinear operators of cyclic covers of the
//!   projective line and their stable ranks;
//! * [`assembler`] — the decomposition of the global invariant into
//!   component and graph contributions, divisor-family constructions,
//!   exhaustive search for maximizing characters;
//! * [`anabelian`] — the `b1`/`b2`/`gamma_max` invariants and the type
//!   recovery formulas;
//! * [`verify`] — the bundled verification suites behind the CLI and the
//!   acceptance tests.

pub mod anabelian;
pub mod assembler;
pub mod catalog;
pub mod field;
pub mod gen;
pub mod graphcover;
pub mod matrix;
pub mod p1cover;
pub mod padic;
pub mod quasitree;
pub mod report;
pub mod semigraph;
pub mod verify;

pub use padic::{Coeff, DigitContext, MarkedDivisor};
pub use semigraph::{CurveModel, EdgeId, SemiGraph, VertexId};
