//! Hidden Matching games.
//!
//! Alice holds `x ∈ {0,1}^n`, Bob a perfect matching `M` on `{0,…,n-1}`. In
//! the communication game Bob must output an edge `(i,j) ∈ M` together with
//! `x_i ⊕ x_j`; in the nonlocal game they answer without talking, with Alice
//! producing `a ∈ {0,1}^log n`, Bob an edge and `b ∈ {0,1}^log n`, and they win
//! when `(a ⊕ b)·(i ⊕ j) = x_i ⊕ x_j`.
//!
//! The crate provides
//! - [`model`]: bit arithmetic and matchings (enumeration, uniform sampling),
//! - [`games`]: instances, outcomes and win predicates,
//! - [`quantum`]: exact outcome distributions of the entanglement-based protocols,
//! - [`classical`]: the block-majority protocol, shared-randomness simulation,
//!   the nonlocal-to-communication reduction and Gaussian hyperplane rounding,
//! - [`analysis`]: exact and Monte Carlo evaluation, classical-value search and
//!   the Fourier diagnostics behind the classical upper bound.
//!
//! Indices are 0-based, so vertex `i` is its own `log n`-bit label and `i ⊕ j`
//! is a literal XOR.

pub mod analysis;
pub mod caps;
pub mod classical;
mod error;
pub mod games;
pub mod model;
pub mod quantum;
pub mod rational;
mod parallel;

pub use caps::Caps;
pub use error::{Error, Result};
pub use rational::Rational;
