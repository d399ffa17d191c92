//! Preparation of arbitrary fixed-weight states by two-level rotations.
//!
//! A plan is a sequence of rotations, each moving amplitude from an already
//! populated *reference* state onto a fresh state. With every reference set
//! to the initial state this is the usual sequential scheme: rotation `i`
//! maps `|x_1>` to `α_i |x_1> + c'_i |x_i>` with `α_i` real and positive,
//! and the last rotation on `|x_1>` carries the phase of `c_1`. Chains let
//! later rotations start from other populated states, which often shortens
//! the resulting controls.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::compiler::{compile_two_level, lift_two_level, TwoLevelRotation};
use crate::error::{Error, Result};
use crate::gates::{ApplyGate, Gate, GateKind, U2};
use crate::simulator::run;
use crate::subspace::{BasisState, SubspaceMap, SubspaceState};

/// Amplitudes and subtree weights below this are treated as zero.
const ZERO_TOL: f64 = 1e-14;

/// Tolerance for accepting a control removal.
pub const MINIMIZE_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Completes `|x> -> a|x> + c*|y>` with `a` real to the Hermitian unitary
/// `[[a, c], [c*, -a]]`. For `a = 0` this is the pure exchange block.
pub fn complete_u2_real_a(a: f64, c: Complex64) -> Result<U2> {
    if !(0.0..=1.0 + 1e-10).contains(&a) {
        return Err(Error::domain(format!("a = {a} is outside [0, 1]")));
    }
    if (a * a + c.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "|a|² + |c|² = {} is not 1",
            a * a + c.norm_sqr()
        )));
    }
    let a = Complex64::new(a, 0.0);
    Ok(U2::new_unchecked(a, c.conj(), c, -a))
}

/// One rotation of a plan: `|reference> -> alpha |reference> + b |state>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrepStep {
    pub reference: BasisState,
    pub state: BasisState,
    pub block: U2,
    /// Residual factor left on the reference, the block's `a` entry.
    pub alpha: Complex64,
}

#[derive(Clone, Debug)]
pub struct PrepPlan {
    map: Arc<SubspaceMap>,
    initial: BasisState,
    steps: Vec<PrepStep>,
}

impl PrepPlan {
    pub fn map(&self) -> &Arc<SubspaceMap> {
        &self.map
    }

    /// The basis state the plan starts from.
    pub fn initial(&self) -> BasisState {
        self.initial
    }

    pub fn steps(&self) -> &[PrepStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The plan applied exactly, one two-level rotation at a time.
    pub fn simulate(&self) -> SubspaceState {
        let map = &self.map;
        let mut amps = vec![Complex64::new(0.0, 0.0); map.dim()];
        amps[map.rank_unchecked(self.initial.packed())] = ONE;
        for s in &self.steps {
            let (i, j) = (
                map.rank_unchecked(s.reference.packed()),
                map.rank_unchecked(s.state.packed()),
            );
            let (p, q) = (amps[i], amps[j]);
            amps[i] = s.block.a * p + s.block.c * q;
            amps[j] = s.block.b * p + s.block.d * q;
        }
        SubspaceState::from_raw(map.clone(), amps)
    }
}

/// Which reference each state is excited from, and where preparation starts.
///
/// States not listed in `links` are appended in lexicographic order with
/// the initial state as reference.
#[derive(Clone, Debug, Default)]
pub struct Chain {
    /// Starting basis state; the lexicographically first state if unset.
    pub initial: Option<BasisState>,
    /// `(state, reference)` pairs in the order they are applied.
    pub links: Vec<(BasisState, BasisState)>,
}

impl Chain {
    pub fn from_initial(initial: BasisState) -> Self {
        Chain {
            initial: Some(initial),
            links: Vec::new(),
        }
    }

    pub fn link(mut self, state: BasisState, reference: BasisState) -> Self {
        self.links.push((state, reference));
        self
    }
}

/// Sequential plan with every rotation referenced to the first basis state.
pub fn plan_preparation(target: &SubspaceState) -> Result<PrepPlan> {
    plan_chain(target, &Chain::default())
}

/// Plan following the references in `route`.
///
/// Each state receives the norm of everything later excited from it (or its
/// own amplitude if nothing is), and the last rotation out of a state leaves
/// it with its exact target amplitude, phase included.
pub fn plan_chain(target: &SubspaceState, route: &Chain) -> Result<PrepPlan> {
    let map = target.map().clone();
    let norm = target.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "target is not normalized (norm² = {norm})"
        )));
    }
    let initial = route.initial.unwrap_or(map.states()[0]);
    let rank = |x: &BasisState| map.rank(x);
    let root = rank(&initial)?;
    let amp = |i: usize| target.amplitudes()[i];

    // Resolve the chain into (state, reference) ranks.
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    for (state, reference) in &route.links {
        let (s, r) = (rank(state)?, rank(reference)?);
        if s == root || parent.contains_key(&s) {
            return Err(Error::Plan(format!("{state} is populated more than once")));
        }
        if r != root && !parent.contains_key(&r) {
            return Err(Error::Plan(format!(
                "reference {reference} is not populated before {state}"
            )));
        }
        parent.insert(s, r);
        order.push(s);
    }
    for i in 0..map.dim() {
        if i != root && !parent.contains_key(&i) && amp(i).norm() > ZERO_TOL {
            parent.insert(i, root);
            order.push(i);
        }
    }

    // Squared subtree weights, accumulated leaves first.
    let mut weight: HashMap<usize, f64> = order.iter().map(|&s| (s, amp(s).norm_sqr())).collect();
    weight.insert(root, amp(root).norm_sqr());
    for &s in order.iter().rev() {
        let w = weight[&s];
        *weight.get_mut(&parent[&s]).expect("reference registered") += w;
    }
    let live: Vec<usize> = order
        .iter()
        .copied()
        .filter(|s| weight[s].sqrt() > ZERO_TOL)
        .collect();
    let mut last_child: HashMap<usize, usize> = HashMap::new();
    for &s in &live {
        last_child.insert(parent[&s], s);
    }

    let states = map.states();
    let mut current: HashMap<usize, Complex64> = HashMap::from([(root, ONE)]);
    let mut steps = Vec::with_capacity(live.len() + 1);
    for &s in &live {
        let r = parent[&s];
        let a_r = current[&r];
        let wanted = if last_child.contains_key(&s) {
            Complex64::new(weight[&s].sqrt(), 0.0)
        } else {
            amp(s)
        };
        if a_r.norm() < 1e-12 {
            return Err(Error::Plan(format!(
                "no amplitude left on {} to populate {}",
                states[r], states[s]
            )));
        }
        let mut b = wanted / a_r;
        let block = if last_child[&r] == s {
            let mut a = amp(r) / a_r;
            let scale = (a.norm_sqr() + b.norm_sqr()).sqrt();
            a /= scale;
            b /= scale;
            U2::from_first_column(a, b)
        } else {
            if b.norm() > 1.0 {
                b /= b.norm();
            }
            let a = (1.0 - b.norm_sqr()).max(0.0).sqrt();
            complete_u2_real_a(a, b.conj())?
        };
        current.insert(r, a_r * block.a);
        current.insert(s, a_r * block.b);
        steps.push(PrepStep {
            reference: states[r],
            state: states[s],
            block,
            alpha: block.a,
        });
    }

    // A lone initial state may still need its phase.
    let c_root = amp(root);
    if !last_child.contains_key(&root) && (c_root - ONE).norm() > ZERO_TOL {
        let Some(partner) = (0..map.dim()).find(|&i| i != root) else {
            return Err(Error::Unsupported(format!(
                "a phase {c_root} on a one-dimensional sector cannot be prepared"
            )));
        };
        let phase = c_root / c_root.norm();
        let block = U2::from_first_column(phase, Complex64::new(0.0, 0.0));
        steps.push(PrepStep {
            reference: initial,
            state: states[partner],
            block,
            alpha: phase,
        });
    }
    Ok(PrepPlan {
        map,
        initial,
        steps,
    })
}

/// How plan steps become gates.
#[derive(Clone, Copy, Debug, Default)]
pub struct CircuitOptions {
    /// Drop every control whose removal leaves the prepared state unchanged.
    pub minimize_controls: bool,
    /// Route higher-order excitations through controlled-SWAP ladders so
    /// only single excitations remain.
    pub ladder: bool,
}

fn without_control(g: &Gate, index: usize) -> Gate {
    let mut controls = g.controls.clone();
    controls.remove(index);
    let kind = match &g.kind {
        GateKind::Fredkin | GateKind::Swap if controls.len() == 1 => GateKind::Fredkin,
        GateKind::Fredkin | GateKind::Swap => GateKind::Swap,
        other => other.clone(),
    };
    Gate {
        kind,
        targets: g.targets.clone(),
        controls,
    }
}

/// Greedily removes controls, highest wire first, keeping a removal only if
/// the gate still maps `before` to the same state.
fn minimize(g: &Gate, before: &SubspaceState) -> Result<(Gate, SubspaceState)> {
    let intended = before.apply_gate(g)?;
    let mut best = g.clone();
    let mut wires: Vec<usize> = g.controls.iter().map(|c| c.wire).collect();
    wires.sort_unstable_by(|a, b| b.cmp(a));
    for w in wires {
        let index = best
            .controls
            .iter()
            .position(|c| c.wire == w)
            .expect("control still present");
        let candidate = without_control(&best, index);
        if before.apply_gate(&candidate)?.max_diff(&intended) <= MINIMIZE_TOL {
            best = candidate;
        }
    }
    Ok((best, intended))
}

/// Circuit realizing `plan` from its initial basis state.
pub fn plan_to_circuit(plan: &PrepPlan, options: CircuitOptions) -> Result<Circuit> {
    let n = plan.map.n();
    let mut gates = Vec::with_capacity(plan.len());
    for s in &plan.steps {
        let t = TwoLevelRotation::new(s.reference, s.state, s.block)?;
        if options.ladder {
            gates.extend(compile_two_level(&t, n)?.gates);
        } else {
            gates.push(lift_two_level(&t, n)?);
        }
    }
    if options.minimize_controls {
        let mut state = SubspaceState::basis(plan.map.clone(), &plan.initial)?;
        for g in &mut gates {
            let (reduced, next) = minimize(g, &state)?;
            *g = reduced;
            state = next;
        }
    }
    Ok(Circuit::from_gates(n, gates))
}

/// Plans along `route` and builds the circuit.
pub fn prepare_chain(
    target: &SubspaceState,
    route: &Chain,
    options: CircuitOptions,
) -> Result<Circuit> {
    plan_to_circuit(&plan_chain(target, route)?, options)
}

/// `<target| C |initial>`, equal to 1 for an exact preparation.
pub fn preparation_overlap(
    circuit: &Circuit,
    initial: &BasisState,
    target: &SubspaceState,
) -> Result<Complex64> {
    let start = SubspaceState::basis(target.map().clone(), initial)?;
    Ok(target.inner(&run(circuit, &start)?))
}
