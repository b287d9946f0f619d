//! Search and verification of integer Chebyshev polynomials on `[0,1]`.
//!
//! An integer Chebyshev polynomial of degree `n` minimizes the supremum norm
//! `‖p‖^{1/n}` on the interval over all nonzero integer-coefficient `p` of
//! degree at most `n`. This crate implements the full pipeline for finding
//! and certifying them:
//!
//! * [`poly`]: exact integer polynomials, symmetrization under `x ↦ x(1−x)`
//!   and linear resultants.
//! * [`norm`]: certified supremum-norm enclosures.
//! * [`kb`]: the knowledge base of known factors and known polynomials, the
//!   product upper bound `c_n` and forced linear-factor deduction.
//! * [`simplex`] and [`lsip`]: an exact rational LP solver and the
//!   cutting-plane method for the continuous relaxation at a search node.
//! * [`bnb`]: best-first branch and bound over the coefficient vector.
//! * [`resultant`]: enumeration over resultant vectors filtered by
//!   congruences modulo `M`.
//! * [`search`]: the combined branch-then-enumerate pipeline.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod bnb;
mod error;
pub mod kb;
pub mod lsip;
pub mod norm;
pub mod poly;
pub mod problem;
pub mod rational;
pub mod resultant;
pub mod search;
pub mod simplex;

pub use error::{Error, Result};
pub use kb::{FactorId, FactorKB, FactorState, FactoredPoly, KnownIcp};
pub use norm::{Bracket, Interval, NormEnclosure, PolyProduct};
pub use poly::IntPoly;
pub use problem::{Embedding, SearchProblem};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
