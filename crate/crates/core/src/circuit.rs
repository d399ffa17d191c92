use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gates::{Gate, GateKind};
use crate::subspace::BasisState;

/// Scratch wires appended after the primary register. `init` is the value
/// they start in and `final_pattern` the value they must be returned to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ancilla {
    pub wires: Vec<usize>,
    pub init: BasisState,
    pub final_pattern: BasisState,
}

impl Ancilla {
    /// An ancilla that must be restored to its initial value.
    pub fn restored(wires: Vec<usize>, init: BasisState) -> Result<Self> {
        if init.n() != wires.len() {
            return Err(Error::domain(format!(
                "ancilla pattern {init} does not cover wires {wires:?}"
            )));
        }
        Ok(Ancilla {
            wires,
            init,
            final_pattern: init,
        })
    }
}

/// Ordered gate list over `n_primary` logical wires plus declared ancillas.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub n_primary: usize,
    pub ancillas: Vec<Ancilla>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_primary: usize) -> Self {
        Circuit {
            n_primary,
            ancillas: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n_primary: usize, gates: Vec<Gate>) -> Self {
        Circuit {
            n_primary,
            ancillas: Vec::new(),
            gates,
        }
    }

    pub fn total_wires(&self) -> usize {
        self.n_primary + self.ancillas.iter().map(|a| a.wires.len()).sum::<usize>()
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a restored ancilla with the given initial pattern and returns
    /// its wires.
    pub fn add_ancilla(&mut self, init: BasisState) -> Vec<usize> {
        let start = self.total_wires();
        let wires: Vec<usize> = (start..start + init.n()).collect();
        self.ancillas.push(Ancilla {
            wires: wires.clone(),
            init,
            final_pattern: init,
        });
        wires
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.total_wires();
        let mut covered = vec![false; total];
        for a in &self.ancillas {
            if a.init.n() != a.wires.len() || a.final_pattern.n() != a.wires.len() {
                return Err(Error::domain(format!(
                    "ancilla on {:?} has patterns of the wrong length",
                    a.wires
                )));
            }
            for &w in &a.wires {
                if w < self.n_primary || w >= total || covered[w] {
                    return Err(Error::domain(format!(
                        "ancilla wire {w} is not a fresh wire in {}..{total}",
                        self.n_primary
                    )));
                }
                covered[w] = true;
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            g.validate()
                .map_err(|e| Error::domain(format!("gate {i}: {e}")))?;
            if let Some(w) = g.max_wire() {
                if w >= total {
                    return Err(Error::domain(format!(
                        "gate {i} touches wire {w} outside {total} wires"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Packed initial and final values of all ancilla wires as a
    /// `(mask, init, final)` triple over the full register.
    pub(crate) fn ancilla_masks(&self) -> (u64, u64, u64) {
        let total = self.total_wires();
        let mut mask = 0;
        let mut init = 0;
        let mut fin = 0;
        for a in &self.ancillas {
            for (j, &w) in a.wires.iter().enumerate() {
                let bit = 1u64 << (total - 1 - w);
                mask |= bit;
                if a.init.bit(j) {
                    init |= bit;
                }
                if a.final_pattern.bit(j) {
                    fin |= bit;
                }
            }
        }
        (mask, init, fin)
    }

    pub fn is_particle_conserving(&self) -> bool {
        self.gates.iter().all(Gate::is_particle_conserving)
    }

    /// Gate counts keyed by kind name, with the number of controls appended
    /// for controlled gates other than Fredkin and CNOT (e.g. `GivensReal/c2`).
    pub fn gate_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            let name = match (&g.kind, g.controls.len()) {
                (GateKind::Fredkin | GateKind::Cnot, _) | (_, 0) => g.kind.name().to_string(),
                (k, m) => format!("{}/c{m}", k.name()),
            };
            *counts.entry(name).or_insert(0) += 1;
        }
        counts
    }

    /// Concatenates `other` after `self`. Ancilla declarations on shared
    /// wires must agree.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_primary != self.n_primary {
            return Err(Error::domain("circuits have different primary registers"));
        }
        for a in &other.ancillas {
            match self.ancillas.iter().find(|b| b.wires == a.wires) {
                Some(b) if b == a => {}
                Some(_) => {
                    return Err(Error::domain(format!(
                        "conflicting ancilla declarations on {:?}",
                        a.wires
                    )))
                }
                None if a.wires.first() == Some(&self.total_wires()) => {
                    self.ancillas.push(a.clone())
                }
                None => {
                    return Err(Error::domain(format!(
                        "ancilla on {:?} does not follow existing wires",
                        a.wires
                    )))
                }
            }
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// The inverse circuit.
    pub fn inverse(&self) -> Circuit {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| {
                let kind = match &g.kind {
                    GateKind::GivensReal { theta } => GateKind::GivensReal { theta: -theta },
                    GateKind::SingleExcitation(u) => GateKind::SingleExcitation(u.adjoint()),
                    GateKind::Excitation {
                        block,
                        source,
                        target,
                    } => GateKind::Excitation {
                        block: block.adjoint(),
                        source: *source,
                        target: *target,
                    },
                    GateKind::RY { theta } => GateKind::RY { theta: -theta },
                    GateKind::RZ { theta } => GateKind::RZ { theta: -theta },
                    GateKind::Phase { theta } => GateKind::Phase { theta: -theta },
                    GateKind::GPlus { theta } => GateKind::GPlus { theta: -theta },
                    GateKind::GMinus { theta } => GateKind::GMinus { theta: -theta },
                    other => other.clone(),
                };
                Gate {
                    kind,
                    targets: g.targets.clone(),
                    controls: g.controls.clone(),
                }
            })
            .collect();
        Circuit {
            n_primary: self.n_primary,
            ancillas: self
                .ancillas
                .iter()
                .map(|a| Ancilla {
                    wires: a.wires.clone(),
                    init: a.final_pattern,
                    final_pattern: a.init,
                })
                .collect(),
            gates,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancilla_allocation_and_validation() {
        let mut c = Circuit::new(3);
        let w = c.add_ancilla("01".parse().unwrap());
        assert_eq!(w, vec![3, 4]);
        assert_eq!(c.total_wires(), 5);
        c.push(Gate::fredkin(3, 0, 1));
        assert!(c.validate().is_ok());
        c.push(Gate::swap(0, 5));
        assert!(c.validate().is_err());
    }

    #[test]
    fn gate_counts_by_kind() {
        let mut c = Circuit::new(4);
        c.push(Gate::givens(0.1, 0, 1));
        c.push(Gate::givens(0.1, 0, 1).with_control(2, true));
        c.push(Gate::fredkin(3, 0, 1));
        let counts = c.gate_counts();
        assert_eq!(counts["GivensReal"], 1);
        assert_eq!(counts["GivensReal/c1"], 1);
        assert_eq!(counts["Fredkin"], 1);
    }

    #[test]
    fn extend_merges_matching_ancillas() {
        let mut a = Circuit::new(2);
        a.add_ancilla("0".parse().unwrap());
        let b = a.clone();
        a.extend(&b).unwrap();
        assert_eq!(a.ancillas.len(), 1);
        let mut c = Circuit::new(2);
        c.add_ancilla("1".parse().unwrap());
        assert!(a.extend(&c).is_err());
    }
}
