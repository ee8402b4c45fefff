//! Simulator and exact-analysis toolkit for a token-based distributed
//! mutual-exclusion algorithm whose routing structure is path reversal in
//! rooted trees.
//!
//! The crate has three layers:
//!
//! * combinatorial substrate: [`tree`] (rooted trees and path reversal) and
//!   [`combinat`] (the bijections linking priority sequences, tournament
//!   trees, permutations and heap-shaped ordered trees);
//! * exact mathematics: [`analysis`] (the reversal-cost law, its generating
//!   function and moments, all in exact rational arithmetic) and [`queueing`]
//!   (the finite-source birth-death waiting-time model);
//! * execution: [`protocol`] (per-node state machine plus a deterministic
//!   discrete-event simulator, including the shortest-path-routed variant for
//!   arbitrary networks) and [`cli`] (the `tokentree` command-line front end).
//!
//! Numeric code in `analysis` and `queueing` is generic over [`scalar::Scalar`];
//! the two concrete instantiations used throughout are re-exported here as
//! [`Exact`] (arbitrary-precision rationals) and [`Approx`] (`f64`).

pub mod analysis;
pub mod cli;
pub mod combinat;
pub mod protocol;
pub mod queueing;
pub mod scalar;
pub mod tree;

/// Exact arithmetic carrier: reduced arbitrary-precision rationals.
pub type Exact = num::BigRational;

/// Floating-point carrier for asymptotics and Monte Carlo work.
pub type Approx = f64;
