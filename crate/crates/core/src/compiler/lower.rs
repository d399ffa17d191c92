//! Rewriting excitation, SWAP and controlled-NOT gates with CNOT, `RY`,
//! `Phase`, Hadamard and `X`.
//!
//! A real excitation between complementary patterns `s` and `t` becomes a
//! controlled `RY` on its first target, conjugated by CNOTs from that target
//! onto the others: the CNOT frame maps `s` and `t` to two states that differ
//! only on the pivot. Multi-controlled rotations use the Gray-code sequence of
//! uniformly controlled `RY`s; multi-controlled NOTs use an exact phase
//! polynomial between Hadamards. Complex excitation blocks add multi-controlled
//! phases on the two rotated patterns.

use std::f64::consts::PI;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{Control, Gate, GateKind, U2};
use crate::subspace::BasisState;

const REAL_TOL: f64 = 1e-12;

fn gray(j: usize) -> usize {
    j ^ (j >> 1)
}

/// `RY(phi)` on `target` firing only when every control matches its
/// polarity, as `2^k` plain rotations interleaved with `2^k` CNOTs.
pub fn multi_controlled_ry(phi: f64, controls: &[Control], target: usize) -> Vec<Gate> {
    let k = controls.len();
    if k == 0 {
        return vec![Gate::ry(phi, target)];
    }
    let steps = 1usize << k;
    let polarity_mask = controls
        .iter()
        .enumerate()
        .filter(|(_, c)| c.polarity)
        .fold(0usize, |m, (i, _)| m | 1 << i);
    let scale = phi / steps as f64;
    let mut out = Vec::with_capacity(2 * steps);
    for j in 0..steps {
        let frame = gray(j);
        let sign = if (frame & polarity_mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        out.push(Gate::ry(sign * scale, target));
        let flipped = frame ^ gray((j + 1) % steps);
        out.push(Gate::cnot(
            controls[flipped.trailing_zeros() as usize].wire,
            target,
        ));
    }
    out
}

/// Phase `e^{iφ}` on the basis states where every wire in `pattern` matches
/// its polarity. Polarity-0 wires are wrapped in `X`; the product
/// `x_1⋯x_r` is expanded as a phase polynomial over parities:
/// `x_1⋯x_r = 2^{1-r} Σ_{S≠∅} (-1)^{|S|-1} ⊕_S x`.
pub fn multi_controlled_phase(phi: f64, pattern: &[Control]) -> Vec<Gate> {
    let wraps: Vec<Gate> = pattern
        .iter()
        .filter(|c| !c.polarity)
        .map(|c| Gate::x(c.wire))
        .collect();
    let wires: Vec<usize> = pattern.iter().map(|c| c.wire).collect();
    let r = wires.len();
    if r == 0 {
        return Vec::new();
    }
    let mut out = wraps.clone();
    let unit = phi / (1u64 << (r - 1)) as f64;
    for subset in 1usize..1 << r {
        let members: Vec<usize> = (0..r)
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| wires[i])
            .collect();
        let (&acc, rest) = members.split_last().expect("non-empty subset");
        let sign = if members.len() % 2 == 1 { 1.0 } else { -1.0 };
        let ladder: Vec<Gate> = rest.iter().map(|&w| Gate::cnot(w, acc)).collect();
        out.extend(ladder.iter().cloned());
        out.push(Gate::phase(sign * unit, acc));
        out.extend(ladder.into_iter().rev());
    }
    out.extend(wraps);
    out
}

/// `X` on `target` firing only when every control matches its polarity.
pub fn multi_controlled_x(controls: &[Control], target: usize) -> Vec<Gate> {
    match controls {
        [] => vec![Gate::x(target)],
        [c] if c.polarity => vec![Gate::cnot(c.wire, target)],
        [c] => vec![Gate::x(c.wire), Gate::cnot(c.wire, target), Gate::x(c.wire)],
        _ => {
            let pattern: Vec<Control> = controls
                .iter()
                .copied()
                .chain(std::iter::once(Control::on(target)))
                .collect();
            let mut out = vec![Gate::hadamard(target)];
            out.extend(multi_controlled_phase(PI, &pattern));
            out.push(Gate::hadamard(target));
            out
        }
    }
}

fn lower_excitation(
    theta: f64,
    targets: &[usize],
    source: &BasisState,
    controls: &[Control],
) -> Vec<Gate> {
    let pivot = targets[0];
    let pivot_bit = source.bit(0);
    let frame: Vec<Gate> = targets[1..].iter().map(|&w| Gate::cnot(pivot, w)).collect();
    let ry_controls: Vec<Control> = targets[1..]
        .iter()
        .enumerate()
        .map(|(j, &w)| Control::new(w, source.bit(j + 1) ^ pivot_bit))
        .chain(controls.iter().copied())
        .collect();
    let phi = if pivot_bit { -2.0 * theta } else { 2.0 * theta };
    let mut out = frame.clone();
    out.extend(multi_controlled_ry(phi, &ry_controls, pivot));
    out.extend(frame);
    out
}

/// Splits `u` as `diag(e^{iα₁}, e^{iα₂}) · givens(θ) · diag(e^{iβ}, 1)`,
/// returning `(θ, α₁, α₂, β)`.
fn split_block(u: &U2) -> (f64, f64, f64, f64) {
    let theta = u.b.norm().atan2(u.a.norm());
    if u.a.norm() >= u.b.norm() {
        let beta = u.b.arg() - u.d.arg();
        (theta, u.a.arg() - beta, u.d.arg(), beta)
    } else {
        let alpha1 = (-u.c).arg();
        let beta = u.a.arg() - alpha1;
        (theta, alpha1, u.b.arg() - beta, beta)
    }
}

/// Phase on the local `pattern` of `targets`, under `controls`.
fn pattern_phase(
    phi: f64,
    targets: &[usize],
    pattern: &BasisState,
    controls: &[Control],
) -> Vec<Gate> {
    if phi.abs() <= REAL_TOL {
        return Vec::new();
    }
    let full: Vec<Control> = targets
        .iter()
        .enumerate()
        .map(|(j, &w)| Control::new(w, pattern.bit(j)))
        .chain(controls.iter().copied())
        .collect();
    multi_controlled_phase(phi, &full)
}

/// Excitation with an arbitrary block: real rotations as they are, complex
/// blocks as a rotation between two diagonal phase layers.
fn lower_block(
    block: &U2,
    targets: &[usize],
    source: &BasisState,
    target: &BasisState,
    controls: &[Control],
) -> Vec<Gate> {
    if let Some(theta) = block.as_real_rotation(REAL_TOL) {
        return lower_excitation(theta, targets, source, controls);
    }
    let (theta, alpha1, alpha2, beta) = split_block(block);
    let mut out = pattern_phase(beta, targets, source, controls);
    out.extend(lower_excitation(theta, targets, source, controls));
    out.extend(pattern_phase(alpha1, targets, source, controls));
    out.extend(pattern_phase(alpha2, targets, target, controls));
    out
}

/// Appends the lowered form of `g` to `out`.
pub fn lower_gate(g: &Gate, out: &mut Vec<Gate>) -> Result<()> {
    g.validate()?;
    let single = BasisState::from_packed(2, 0b01).expect("2-bit pattern");
    match &g.kind {
        GateKind::GivensReal { theta } => {
            out.extend(lower_excitation(*theta, &g.targets, &single, &g.controls))
        }
        GateKind::SingleExcitation(u) => {
            let target = BasisState::from_packed(2, 0b10).expect("2-bit pattern");
            out.extend(lower_block(u, &g.targets, &single, &target, &g.controls))
        }
        GateKind::Excitation {
            block,
            source,
            target,
        } => out.extend(lower_block(block, &g.targets, source, target, &g.controls)),
        GateKind::Swap | GateKind::Fredkin => {
            let (a, b) = (g.targets[0], g.targets[1]);
            let mut inner = g.controls.clone();
            inner.push(Control::on(a));
            out.push(Gate::cnot(b, a));
            out.extend(multi_controlled_x(&inner, b));
            out.push(Gate::cnot(b, a));
        }
        GateKind::Cnot | GateKind::PauliX => {
            out.extend(multi_controlled_x(&g.controls, g.targets[0]))
        }
        GateKind::RY { theta } => {
            out.extend(multi_controlled_ry(*theta, &g.controls, g.targets[0]))
        }
        GateKind::Hadamard
        | GateKind::Phase { .. }
        | GateKind::RZ { .. }
        | GateKind::PauliY
        | GateKind::PauliZ
            if g.controls.is_empty() =>
        {
            out.push(g.clone())
        }
        other => {
            return Err(Error::Unsupported(format!(
                "no lowering for {} with {} controls",
                other.name(),
                g.controls.len()
            )))
        }
    }
    Ok(())
}

/// Lowers every gate of `c`, keeping its ancilla declarations.
pub fn lower_to_cnot_ry(c: &Circuit) -> Result<Circuit> {
    c.validate()?;
    let mut gates = Vec::with_capacity(c.gates.len() * 8);
    for g in &c.gates {
        lower_gate(g, &mut gates)?;
    }
    Ok(Circuit {
        n_primary: c.n_primary,
        ancillas: c.ancillas.clone(),
        gates,
    })
}
