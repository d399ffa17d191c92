use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{Control, Gate, GateKind};
use crate::subspace::BasisState;

use super::two_level::{lift_two_level, TwoLevelRotation};

/// States `g_1, ..., g_{ℓ+1}` joining `x` to `y` by single excitations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraySequence {
    pub states: Vec<BasisState>,
}

impl GraySequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Connects `x` to `y` one excitation at a time. Step `i` moves the `i`-th
/// wire occupied only in `x` onto the `i`-th wire occupied only in `y`,
/// both counted in ascending order.
pub fn gray_ladder(x: &BasisState, y: &BasisState) -> Result<GraySequence> {
    if x.n() != y.n() || x.weight() != y.weight() {
        return Err(Error::domain(format!(
            "{x} and {y} do not have equal length and weight"
        )));
    }
    if x == y {
        return Err(Error::domain("ladder endpoints must differ"));
    }
    let diff = x.differing_wires(y);
    let from: Vec<usize> = diff.iter().copied().filter(|&w| x.bit(w)).collect();
    let to: Vec<usize> = diff.iter().copied().filter(|&w| y.bit(w)).collect();
    let mut states = vec![*x];
    let mut g = *x;
    for (&p, &q) in from.iter().zip(&to) {
        g = g.with_bit(p, false).with_bit(q, true);
        states.push(g);
    }
    Ok(GraySequence { states })
}

/// Swap of the two wires where `a` and `b` differ, controlled on every
/// other wire holding its shared value.
fn controlled_swap(a: &BasisState, b: &BasisState) -> Result<Gate> {
    let targets = a.differing_wires(b);
    let controls: Vec<Control> = (0..a.n())
        .filter(|w| !targets.contains(w))
        .map(|w| Control::new(w, a.bit(w)))
        .collect();
    let kind = if controls.len() == 1 {
        GateKind::Fredkin
    } else {
        GateKind::Swap
    };
    Gate::new(kind, targets, controls)
}

/// Realizes `t` with `ℓ - 1` controlled SWAPs carrying `x` down the ladder,
/// one controlled single excitation between `g_ℓ` and `y`, and the SWAPs
/// undone in reverse.
pub fn compile_two_level(t: &TwoLevelRotation, n: usize) -> Result<Circuit> {
    let ladder = gray_ladder(&t.x, &t.y)?;
    let l = ladder.len() - 1;
    let swaps = ladder.states[..l]
        .windows(2)
        .map(|w| controlled_swap(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let core = TwoLevelRotation::new(ladder.states[l - 1], t.y, t.block)?;
    let mut c = Circuit::new(n);
    c.gates.extend(swaps.iter().cloned());
    c.push(lift_two_level(&core, n)?);
    c.gates.extend(swaps.into_iter().rev());
    Ok(c)
}
