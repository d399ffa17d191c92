use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{Control, Gate, GateKind, U2};
use crate::linalg::{SubspaceUnitary, UNITARY_TOL};
use crate::subspace::{excitation_order, BasisState};

/// Rotations closer than this to the identity block are dropped.
const PRUNE_TOL: f64 = 1e-12;

/// Entries below this magnitude need no elimination.
const ELIMINATION_TOL: f64 = 1e-15;

/// A `U(2)` block on `span{|x>, |y>}`: `|x> -> a|x> + b|y>`,
/// `|y> -> c|x> + d|y>`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelRotation {
    pub x: BasisState,
    pub y: BasisState,
    pub block: U2,
}

impl TwoLevelRotation {
    pub fn new(x: BasisState, y: BasisState, block: U2) -> Result<Self> {
        if x.n() != y.n() || x.weight() != y.weight() || x == y {
            return Err(Error::domain(format!(
                "{x} and {y} are not distinct states of equal weight"
            )));
        }
        let deviation = block.unitarity_deviation();
        if deviation > crate::gates::U2_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(TwoLevelRotation { x, y, block })
    }

    pub fn order(&self) -> usize {
        excitation_order(&self.x, &self.y).expect("equal weights checked on construction")
    }
}

fn embed(m: &mut DMatrix<Complex64>, i: usize, j: usize, u: &U2) {
    // Rows i, j of m replaced by u acting on them.
    for col in 0..m.ncols() {
        let (p, q) = (m[(i, col)], m[(j, col)]);
        m[(i, col)] = u.a * p + u.c * q;
        m[(j, col)] = u.b * p + u.d * q;
    }
}

/// Factors `u` into two-level rotations `T_1, ..., T_r` with
/// `u = T_r ⋯ T_1`, listed in application order.
///
/// Columns are cleared left to right in lexicographic order, eliminating
/// each sub-diagonal entry against the diagonal one; the last 2×2 block is
/// absorbed whole. At most `d(d-1)/2` rotations are returned.
pub fn two_level_decompose(u: &SubspaceUnitary) -> Result<Vec<TwoLevelRotation>> {
    let deviation = crate::linalg::unitarity_deviation(u.matrix());
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let d = u.dim();
    let states = u.map().states();
    let mut m = u.matrix().clone();
    // Elimination steps V with V_r ⋯ V_1 U = I, as (row i, row j, V).
    let mut steps: Vec<(usize, usize, U2)> = Vec::new();
    if d == 1 {
        let phase = m[(0, 0)];
        if (phase - Complex64::new(1.0, 0.0)).norm() > PRUNE_TOL {
            return Err(Error::Unsupported(format!(
                "a phase {phase} on a one-dimensional sector cannot be built from excitations"
            )));
        }
        return Ok(Vec::new());
    }
    for j in 0..d - 1 {
        if j == d - 2 {
            let w = U2::new_unchecked(m[(j, j)], m[(j + 1, j)], m[(j, j + 1)], m[(j + 1, j + 1)]);
            let v = w.adjoint();
            embed(&mut m, j, j + 1, &v);
            steps.push((j, j + 1, v));
            break;
        }
        let mut rotated = false;
        for i in j + 1..d {
            let q = m[(i, j)];
            if q.norm() <= ELIMINATION_TOL {
                continue;
            }
            let p = m[(j, j)];
            let r = (p.norm_sqr() + q.norm_sqr()).sqrt();
            let v = U2::new_unchecked(p.conj() / r, -q / r, q.conj() / r, p / r);
            embed(&mut m, j, i, &v);
            steps.push((j, i, v));
            rotated = true;
        }
        if !rotated {
            let p = m[(j, j)];
            let phase = p / p.norm();
            let v = U2::new_unchecked(
                phase.conj(),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            );
            embed(&mut m, j, j + 1, &v);
            steps.push((j, j + 1, v));
        }
    }
    Ok(steps
        .into_iter()
        .rev()
        .map(|(i, j, v)| (i, j, v.adjoint()))
        .filter(|(_, _, b)| b.distance_from_identity() >= PRUNE_TOL)
        .map(|(i, j, block)| TwoLevelRotation {
            x: states[i],
            y: states[j],
            block,
        })
        .collect())
}

/// The multi-controlled excitation gate realizing `t` on `n` wires.
///
/// Targets are the wires where `x` and `y` differ, in ascending order, and
/// every other wire becomes a control on the value the two states share.
/// Single excitations come out as `SingleExcitation` (or `GivensReal` when
/// the block is a real rotation); higher orders as `Excitation`.
pub fn lift_two_level(t: &TwoLevelRotation, n: usize) -> Result<Gate> {
    if t.x.n() != n {
        return Err(Error::domain(format!(
            "rotation is on {} wires, not {n}",
            t.x.n()
        )));
    }
    let targets = t.x.differing_wires(&t.y);
    let controls: Vec<Control> = (0..n)
        .filter(|w| !targets.contains(w))
        .map(|w| Control::new(w, t.x.bit(w)))
        .collect();
    let pick = |s: &BasisState| {
        let bits = targets
            .iter()
            .fold(0u64, |acc, &w| acc << 1 | s.bit(w) as u64);
        BasisState::from_packed(targets.len(), bits)
    };
    let (source, target) = (pick(&t.x)?, pick(&t.y)?);
    let kind = if targets.len() == 2 {
        // Single excitations rotate |01> into |10>.
        let block = if source.packed() == 0b01 {
            t.block
        } else {
            t.block.exchanged()
        };
        match block.as_real_rotation(1e-14) {
            Some(theta) => GateKind::GivensReal { theta },
            None => GateKind::SingleExcitation(block),
        }
    } else {
        GateKind::Excitation {
            block: t.block,
            source,
            target,
        }
    };
    Gate::new(kind, targets, controls)
}
