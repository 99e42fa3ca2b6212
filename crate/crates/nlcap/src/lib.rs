//! Nonlocal capacity of finite nonsignaling boxes.
//!
//! A nonsignaling box is a bipartite device: Alice feeds it an input `a` and
//! reads an outcome `r`, Bob feeds it `b` and reads `s`, and the joint
//! statistics `P(r,s|a,b)` admit no signaling between the parties. The
//! asymptotic nonlocal capacity of such a box is the minimal one-way
//! classical communication rate at which the box can be simulated exactly,
//! and it equals the minimum over a polytope of hidden-variable models of
//! the capacity of an induced classical channel. This crate provides:
//!
//! - [`nsbox`] — the box data model: validation, marginals, canonical
//!   constructors, and the derived channel box (C-box);
//! - [`quantum`] — two-qubit states and projective measurements, including
//!   the Werner family and the 13-axis cube measurement set;
//! - [`hvspace`] — hidden-variable boxes over outcome sequences, their
//!   marginal constraints, iterative proportional fitting, and sampling;
//! - [`infotheory`] — entropy, divergence, mutual information, and channel
//!   capacity with certified convergence gaps;
//! - [`solver`] — the convex minimax solver for the nonlocal capacity,
//!   C-box communication complexity, bound calculators, and explicit
//!   protocol verification.

pub mod hvspace;
pub mod infotheory;
pub mod nsbox;
pub mod quantum;
pub mod solver;

pub use hvspace::{HvBox, SequenceSpace};
pub use infotheory::{CapacityResult, Channel};
pub use nsbox::{BoxShape, CBox, NsBox};
pub use solver::{SolverOptions, SolverReport};
