//! Exact stable commutator length for rational chains in a free product of
//! two cyclic groups.
//!
//! A chain is encoded by the turns of its arcs in each factor. Admissible
//! surfaces become non-negative balanced turn vectors, disks become integer
//! vectors with connected support and winding divisible by the factor order,
//! and scl is the optimum of a linear program over the glued pair of cones.
//! Every value is an arbitrary-precision rational; nothing is rounded.
//!
//! Modules, bottom-up:
//!
//! - [`chain`]: parsing, normalization and homology of chains.
//! - [`arcs`]: arcs, turns, gluing partners and the linear maps on turn vectors.
//! - [`lp`]: exact simplex with dual, ray and Farkas certificates.
//! - [`disks`]: disk vectors, generator enumeration, pruning, integer hulls.
//! - [`engine`]: the gluing program, lazy disk pricing and [`engine::compute_scl`].
//! - [`formulas`]: closed-form reference values.
//! - [`heisenberg`]: brute-force check of the central-exponent sets `S_{u,v}`.
//! - [`family`]: order-grid scans and congruence-class rational fitting.

pub mod arcs;
pub mod chain;
pub mod disks;
pub mod engine;
pub mod family;
pub mod formulas;
pub mod heisenberg;
pub mod lp;
pub mod par;
pub mod rational;

pub use chain::{Chain, FactorSpec, Factors};
pub use engine::{compute_scl, SclResult, SclStatus};
pub use rational::Q;
