//! Compilation of subspace unitaries into controlled single excitations.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`two_level_decompose`] factors a `d × d` unitary into two-level
//!    rotations between pairs of basis states.
//! 2. [`lift_two_level`] turns one rotation into a multi-controlled
//!    excitation gate; [`compile_two_level`] instead routes it through a
//!    ladder of controlled SWAPs so only single excitations remain.
//! 3. [`expand_multicontrol`] reduces every multi-controlled gate to gates
//!    with at most one control by computing the control condition into
//!    dual-rail ancillas with Fredkin gates.
//! 4. [`lower_to_cnot_ry`] optionally rewrites the result in terms of CNOT
//!    and single-qubit rotations.
//!
//! [`compile_unitary`] chains stages 1 to 3.

mod ladder;
mod lower;
mod multicontrol;
mod two_level;

pub use ladder::{compile_two_level, gray_ladder, GraySequence};
pub use lower::{lower_gate, lower_to_cnot_ry, multi_controlled_ry, multi_controlled_x};
pub use multicontrol::{decompose_ccswap, expand_circuit, expand_multicontrol, AncillaPool};
pub use two_level::{lift_two_level, two_level_decompose, TwoLevelRotation};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::linalg::SubspaceUnitary;

/// Compiles `u` into controlled single excitations, Fredkin gates and
/// uncontrolled single excitations, with dual-rail and scratch ancillas.
pub fn compile_unitary(u: &SubspaceUnitary, n: usize, k: usize) -> Result<Circuit> {
    if u.map().n() != n || u.map().k() != k {
        return Err(Error::domain(format!(
            "unitary is defined on ({}, {}), not ({n}, {k})",
            u.map().n(),
            u.map().k()
        )));
    }
    let rotations = two_level_decompose(u)?;
    let mut ladder = Circuit::new(n);
    for t in &rotations {
        ladder.gates.extend(compile_two_level(t, n)?.gates);
    }
    expand_circuit(&ladder)
}
