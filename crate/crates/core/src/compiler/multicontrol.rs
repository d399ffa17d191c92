use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{Control, Gate, GateKind};
use crate::subspace::BasisState;

/// Ancilla wires shared by every expanded gate of one circuit.
///
/// Dual-rail ancillas start in `|01>` (logical 0) and hold logical 1 as
/// `|10>`, so their first wire reads the logical value. Scratch wires for
/// controlled-controlled SWAPs are single wires keyed by their initial value.
#[derive(Clone, Debug, Default)]
pub struct AncillaPool {
    dual_rails: Vec<[usize; 2]>,
    scratch: [Option<usize>; 2],
}

impl AncillaPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wires of the `j`-th dual-rail ancilla (0-based), allocating as needed.
    pub fn dual_rail(&mut self, c: &mut Circuit, j: usize) -> [usize; 2] {
        while self.dual_rails.len() <= j {
            let w = c.add_ancilla(BasisState::from_packed(2, 0b01).expect("2-bit pattern"));
            self.dual_rails.push([w[0], w[1]]);
        }
        self.dual_rails[j]
    }

    /// Scratch wire initialized (and restored) to `init`.
    pub fn scratch(&mut self, c: &mut Circuit, init: bool) -> usize {
        let slot = &mut self.scratch[init as usize];
        if let Some(w) = *slot {
            return w;
        }
        let w = c.add_ancilla(BasisState::from_packed(1, init as u64).expect("1-bit pattern"))[0];
        *slot = Some(w);
        w
    }

    pub fn dual_rail_count(&self) -> usize {
        self.dual_rails.len()
    }
}

/// Orders the two controls of a CC-SWAP so the second, which is parked on
/// the scratch wire, has polarity 1 when possible. Returns the controls and
/// the scratch wire's initial value.
fn ccswap_layout(controls: [Control; 2]) -> ([Control; 2], bool) {
    let [p, q] = controls;
    let (kept, parked) = if q.polarity || !p.polarity {
        (p, q)
    } else {
        (q, p)
    };
    ([kept, parked], !parked.polarity)
}

/// Three Fredkin gates acting as a SWAP of `targets` controlled on both
/// `controls`, given a scratch wire prepared in the value returned by
/// [`ccswap_layout`]:
///
/// ```text
/// F(c1; c2 <-> s)   F(s; t1 <-> t2)   F(c1; c2 <-> s)
/// ```
///
/// When `c1` fires, the scratch wire carries `c2` into the middle gate;
/// otherwise it still holds its initial value, which never fires it.
fn ccswap_gates(controls: [Control; 2], targets: [usize; 2], scratch: usize) -> [Gate; 3] {
    let [kept, parked] = controls;
    let park = Gate {
        kind: GateKind::Fredkin,
        targets: vec![parked.wire, scratch],
        controls: vec![kept],
    };
    let middle = Gate {
        kind: GateKind::Fredkin,
        targets: targets.to_vec(),
        controls: vec![Control::new(scratch, parked.polarity)],
    };
    [park.clone(), middle, park]
}

/// Controlled-controlled SWAP on `n` wires as three Fredkin gates and one
/// scratch ancilla. The ancilla starts in 0 unless both controls have
/// polarity 0, in which case it starts in 1; either way it is restored.
pub fn decompose_ccswap(controls: [Control; 2], targets: [usize; 2], n: usize) -> Result<Circuit> {
    let mut wires = [controls[0].wire, controls[1].wire, targets[0], targets[1]];
    wires.sort_unstable();
    if wires.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("CC-SWAP wires must be distinct"));
    }
    if wires[3] >= n {
        return Err(Error::domain(format!(
            "wire {} outside {n} wires",
            wires[3]
        )));
    }
    let (controls, init) = ccswap_layout(controls);
    let mut c = Circuit::new(n);
    let s = AncillaPool::new().scratch(&mut c, init);
    c.gates.extend(ccswap_gates(controls, targets, s));
    Ok(c)
}

fn check_base(g: &Gate) -> Result<()> {
    match &g.kind {
        GateKind::GivensReal { .. }
        | GateKind::SingleExcitation(_)
        | GateKind::Swap
        | GateKind::Fredkin => Ok(()),
        GateKind::Excitation { source, .. } if source.n() == 2 => Ok(()),
        other => Err(Error::Unsupported(format!(
            "control expansion needs a single excitation or SWAP, got {}",
            other.name()
        ))),
    }
}

/// Appends the expansion of `g` to `c`, drawing ancillas from `pool`.
fn expand_into(g: &Gate, c: &mut Circuit, pool: &mut AncillaPool) -> Result<()> {
    let m = g.controls.len();
    if m <= 1 {
        c.push(g.clone());
        return Ok(());
    }
    check_base(g)?;
    let mut controls = g.controls.clone();
    // Polarity-1 controls first, so the first Toffoli can park one of them.
    controls.sort_by_key(|ctl| !ctl.polarity);
    let rails: Vec<[usize; 2]> = (0..m - 1).map(|j| pool.dual_rail(c, j)).collect();
    let mut cascade = Vec::with_capacity(3 * (m - 1));
    for j in 0..m - 1 {
        let pair = if j == 0 {
            [controls[0], controls[1]]
        } else {
            [controls[j + 1], Control::on(rails[j - 1][0])]
        };
        let (pair, init) = ccswap_layout(pair);
        let s = pool.scratch(c, init);
        cascade.push(ccswap_gates(pair, rails[j], s));
    }
    for step in &cascade {
        c.gates.extend(step.iter().cloned());
    }
    let kind = match &g.kind {
        GateKind::Swap => GateKind::Fredkin,
        other => other.clone(),
    };
    c.push(Gate {
        kind,
        targets: g.targets.clone(),
        controls: vec![Control::on(rails[m - 2][0])],
    });
    for step in cascade.iter().rev() {
        c.gates.extend(step.iter().rev().cloned());
    }
    Ok(())
}

/// Reduces a gate with `m >= 2` controls to gates with at most one control.
///
/// The AND of all control conditions is accumulated into `m - 1` dual-rail
/// ancillas by a cascade of Toffolis, each realized as a CC-SWAP of the
/// ancilla's rails; the base gate is then controlled on the last ancilla and
/// the cascade is undone. Gates with fewer than two controls are returned
/// unchanged.
pub fn expand_multicontrol(g: &Gate, n: usize) -> Result<Circuit> {
    g.validate()?;
    if let Some(w) = g.max_wire() {
        if w >= n {
            return Err(Error::domain(format!(
                "gate touches wire {w} outside {n} wires"
            )));
        }
    }
    let mut c = Circuit::new(n);
    expand_into(g, &mut c, &mut AncillaPool::new())?;
    Ok(c)
}

/// Expands every gate of `c`, sharing one set of ancillas.
pub fn expand_circuit(c: &Circuit) -> Result<Circuit> {
    c.validate()?;
    let mut out = Circuit {
        n_primary: c.n_primary,
        ancillas: c.ancillas.clone(),
        gates: Vec::with_capacity(c.gates.len()),
    };
    let mut pool = AncillaPool::new();
    let max_m = c.gates.iter().map(|g| g.controls.len()).max().unwrap_or(0);
    for j in 0..max_m.saturating_sub(1) {
        pool.dual_rail(&mut out, j);
    }
    for g in &c.gates {
        expand_into(g, &mut out, &mut pool)?;
    }
    Ok(out)
}
