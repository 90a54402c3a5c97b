//! Structured adiabatic quantum search.
//!
//! An `n`-qubit search is split into clauses on contiguous blocks of qubits.
//! This crate builds the corresponding interpolating Hamiltonians, evaluates
//! their spectral gaps and schedule-optimal running times, reproduces the
//! running-time tables for equal splittings, and checks the adiabatic
//! guarantee by integrating the Schrödinger equation.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
mod interp;
pub mod problem;
pub mod quadrature;
pub mod runtime;
pub mod spectral;

pub use error::{Error, Result};
pub use problem::{MarkedState, Precision, ProblemDescriptor, Schedule, Splitting};
