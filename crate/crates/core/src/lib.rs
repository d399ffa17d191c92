//! Exact compilation and simulation of particle-conserving quantum circuits.
//!
//! The building block is the single-excitation (Givens) gate: a `U(2)`
//! rotation on the `|01>, |10>` pair of two wires, optionally controlled on
//! other wires. This crate
//!
//! * enumerates and ranks fixed-weight subspaces ([`subspace`]),
//! * defines the excitation gate family and its matrices ([`gates`]),
//! * simulates circuits exactly on subspaces or the full register
//!   ([`simulator`]),
//! * compiles arbitrary subspace unitaries down to controlled single
//!   excitations and Fredkin gates, and lowers excitations to CNOT and
//!   rotations ([`compiler`]),
//! * synthesizes state-preparation circuits ([`stateprep`]),
//! * evaluates expectation values and parameter-shift gradients
//!   ([`variational`]).

pub mod circuit;
pub mod compiler;
pub mod error;
pub mod gates;
pub mod io;
pub mod linalg;
pub mod simulator;
pub mod stateprep;
pub mod subspace;
pub mod variational;

pub use circuit::{Ancilla, Circuit};
pub use error::{Error, Result};
pub use gates::{ApplyGate, Control, Gate, GateKind, Spin, SpinLabeling, U2};
pub use linalg::SubspaceUnitary;
pub use simulator::FullState;
pub use subspace::{BasisState, SubspaceMap, SubspaceState};
