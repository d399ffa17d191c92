//! Exact circuit execution.
//!
//! Two engines back the public operations: a dense state vector over the full
//! `2^n` register ([`FullState`]) and a sparse amplitude map used for
//! basis-state inputs, where the support of the evolving state stays small
//! even for circuits with thousands of ancilla-assisted gates. Circuits run
//! left to right; the matrix of `c1 ++ c2` is `M(c2) · M(c1)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{ApplyGate, BoundGate, Gate, MAX_DENSE_WIRES};
use crate::linalg::SubspaceUnitary;
use crate::subspace::{SubspaceMap, SubspaceState};

/// Norm tolerance for ancilla restoration and weight leakage after a run.
pub const RESTORE_TOL: f64 = 1e-10;

/// Sparse amplitudes below this magnitude are dropped.
const PRUNE: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense state over `n` wires.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    n: usize,
    amps: Vec<Complex64>,
}

impl FullState {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n > MAX_DENSE_WIRES {
            return Err(Error::TooLarge {
                wires: n,
                cap: MAX_DENSE_WIRES,
            });
        }
        if amps.len() != 1 << n {
            return Err(Error::domain(format!(
                "expected {} amplitudes, got {}",
                1usize << n,
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "state is not normalized (norm² = {norm})"
            )));
        }
        Ok(FullState { n, amps })
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n > MAX_DENSE_WIRES {
            return Err(Error::TooLarge {
                wires: n,
                cap: MAX_DENSE_WIRES,
            });
        }
        if index >> n != 0 {
            return Err(Error::domain(format!("index {index} outside {n} wires")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index as usize] = ONE;
        Ok(FullState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

impl ApplyGate for FullState {
    fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        gate.validate()?;
        let bound = gate.bind(self.n)?;
        let mut out = vec![ZERO; self.amps.len()];
        for (i, &amp) in self.amps.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            bound.for_each_image(i as u64, amp, |row, v| out[row as usize] += v);
        }
        Ok(FullState {
            n: self.n,
            amps: out,
        })
    }
}

fn bind_circuit(circuit: &Circuit) -> Result<Vec<BoundGate<'_>>> {
    let total = circuit.total_wires();
    circuit.gates.iter().map(|g| g.bind(total)).collect()
}

/// Sparse amplitudes as unordered `(packed index, amplitude)` pairs with
/// distinct indices.
#[derive(Clone, Debug, Default)]
pub(crate) struct SparseState {
    amps: Vec<(u64, Complex64)>,
}

impl SparseState {
    pub fn basis(index: u64) -> Self {
        SparseState {
            amps: vec![(index, ONE)],
        }
    }

    /// `pairs` must have distinct indices.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, Complex64)>) -> Self {
        SparseState {
            amps: pairs.into_iter().filter(|(_, a)| *a != ZERO).collect(),
        }
    }

    /// Images of fired entries land only on fired indices, so they are
    /// merged among themselves and appended to the untouched entries.
    fn apply_bound(&mut self, bound: &BoundGate<'_>, scratch: &mut Vec<(u64, Complex64)>) {
        scratch.clear();
        let mut kept = 0;
        for j in 0..self.amps.len() {
            let (i, a) = self.amps[j];
            if bound.fires(i) {
                bound.for_each_image(i, a, |row, v| scratch.push((row, v)));
            } else {
                self.amps[kept] = (i, a);
                kept += 1;
            }
        }
        self.amps.truncate(kept);
        scratch.sort_unstable_by_key(|&(i, _)| i);
        let mut iter = scratch.iter().copied().peekable();
        while let Some((i, mut v)) = iter.next() {
            while let Some((_, w)) = iter.next_if(|&(j, _)| j == i) {
                v += w;
            }
            if v.norm() > PRUNE {
                self.amps.push((i, v));
            }
        }
    }

    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        self.run_bound(&bind_circuit(circuit)?);
        Ok(())
    }

    pub fn run_bound(&mut self, gates: &[BoundGate<'_>]) {
        let mut scratch = Vec::new();
        for g in gates {
            self.apply_bound(g, &mut scratch);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amps.iter().copied()
    }
}

/// Outcome of running a circuit on one input.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunReport {
    /// Squared norm that left the input's Hamming-weight sector.
    pub leakage: f64,
    /// Squared norm with ancillas outside their final pattern.
    pub ancilla_residual: f64,
}

impl RunReport {
    fn merge(self, other: RunReport) -> RunReport {
        RunReport {
            leakage: self.leakage.max(other.leakage),
            ancilla_residual: self.ancilla_residual.max(other.ancilla_residual),
        }
    }

    fn check(&self) -> Result<()> {
        if self.ancilla_residual > RESTORE_TOL {
            return Err(Error::AncillaLeak {
                leaked: self.ancilla_residual,
            });
        }
        if self.leakage > RESTORE_TOL {
            return Err(Error::Leakage {
                leaked: self.leakage,
            });
        }
        Ok(())
    }
}

/// Splits packed indices of the full register into primary and ancilla parts.
struct Layout {
    ancilla_bits: u32,
    mask: u64,
    init: u64,
    fin: u64,
}

impl Layout {
    fn of(circuit: &Circuit) -> Self {
        let (mask, init, fin) = circuit.ancilla_masks();
        Layout {
            ancilla_bits: (circuit.total_wires() - circuit.n_primary) as u32,
            mask,
            init,
            fin,
        }
    }

    fn embed(&self, primary: u64) -> u64 {
        (primary << self.ancilla_bits) | self.init
    }

    fn primary(&self, index: u64) -> u64 {
        index >> self.ancilla_bits
    }

    fn restored(&self, index: u64) -> bool {
        index & self.mask == self.fin
    }
}

/// Runs `circuit` on a basis input of the primary register, returning the
/// primary-register output restricted to correctly restored ancillas.
fn run_primary_basis(
    gates: &[BoundGate<'_>],
    layout: &Layout,
    primary: u64,
) -> (Vec<(u64, Complex64)>, f64) {
    let mut state = SparseState::basis(layout.embed(primary));
    state.run_bound(gates);
    let mut residual = 0.0;
    let mut out = Vec::new();
    for (i, a) in state.iter() {
        if layout.restored(i) {
            out.push((layout.primary(i), a));
        } else {
            residual += a.norm_sqr();
        }
    }
    (out, residual)
}

/// Runs on a subspace state, returning the output and the leakage figures.
/// Ancillas are appended in their initial pattern and stripped afterwards.
pub fn run_with_report(
    circuit: &Circuit,
    input: &SubspaceState,
) -> Result<(SubspaceState, RunReport)> {
    circuit.validate()?;
    let map = input.map();
    if map.n() != circuit.n_primary {
        return Err(Error::domain(format!(
            "state has {} wires, circuit has {} primary wires",
            map.n(),
            circuit.n_primary
        )));
    }
    let layout = Layout::of(circuit);
    let mut state = SparseState::from_pairs(
        map.states()
            .iter()
            .zip(input.amplitudes())
            .map(|(s, &a)| (layout.embed(s.packed()), a)),
    );
    state.run(circuit)?;
    let mut report = RunReport::default();
    let mut out = vec![ZERO; map.dim()];
    for (i, a) in state.iter() {
        if !layout.restored(i) {
            report.ancilla_residual += a.norm_sqr();
            continue;
        }
        let p = layout.primary(i);
        if p.count_ones() as usize != map.k() {
            report.leakage += a.norm_sqr();
            continue;
        }
        out[map.rank_unchecked(p)] += a;
    }
    Ok((SubspaceState::from_raw(map.clone(), out), report))
}

/// Runs on a subspace state and fails if norm leaves the sector or the
/// ancillas are not restored.
pub fn run(circuit: &Circuit, input: &SubspaceState) -> Result<SubspaceState> {
    let (out, report) = run_with_report(circuit, input)?;
    report.check()?;
    Ok(out)
}

/// Runs on a dense state. A state over the primary register gets the
/// ancillas appended and checked; a state over the whole register is
/// evolved as is.
pub fn run_full(circuit: &Circuit, input: &FullState) -> Result<FullState> {
    circuit.validate()?;
    let total = circuit.total_wires();
    if input.n() == total {
        let mut state = input.clone();
        for g in &circuit.gates {
            state = state.apply_gate(g)?;
        }
        return Ok(state);
    }
    if input.n() != circuit.n_primary {
        return Err(Error::domain(format!(
            "state has {} wires, circuit has {} primary and {total} total",
            input.n(),
            circuit.n_primary
        )));
    }
    let layout = Layout::of(circuit);
    let mut state = SparseState::from_pairs(
        input
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, &a)| (layout.embed(i as u64), a)),
    );
    state.run(circuit)?;
    let mut residual = 0.0;
    let mut out = vec![ZERO; input.amplitudes().len()];
    for (i, a) in state.iter() {
        if layout.restored(i) {
            out[layout.primary(i) as usize] += a;
        } else {
            residual += a.norm_sqr();
        }
    }
    if residual > RESTORE_TOL {
        return Err(Error::AncillaLeak { leaked: residual });
    }
    Ok(FullState {
        n: input.n(),
        amps: out,
    })
}

/// Dense unitary of the whole register, ancillas included.
pub fn circuit_unitary_full(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    circuit.validate()?;
    let n = circuit.total_wires();
    if n > MAX_DENSE_WIRES {
        return Err(Error::TooLarge {
            wires: n,
            cap: MAX_DENSE_WIRES,
        });
    }
    let dim = 1usize << n;
    let gates = bind_circuit(circuit)?;
    let columns: Vec<Vec<(u64, Complex64)>> = (0..dim as u64)
        .into_par_iter()
        .map(|col| {
            let mut s = SparseState::basis(col);
            s.run_bound(&gates);
            s.iter().collect()
        })
        .collect();
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for (col, entries) in columns.into_iter().enumerate() {
        for (row, a) in entries {
            m[(row as usize, col)] = a;
        }
    }
    Ok(m)
}

/// Unitary on the primary register with ancillas started in their initial
/// pattern and required to end in their final pattern.
pub fn circuit_unitary_primary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    circuit.validate()?;
    let n = circuit.n_primary;
    if n > MAX_DENSE_WIRES {
        return Err(Error::TooLarge {
            wires: n,
            cap: MAX_DENSE_WIRES,
        });
    }
    let layout = Layout::of(circuit);
    let dim = 1usize << n;
    let gates = bind_circuit(circuit)?;
    let columns: Vec<(Vec<(u64, Complex64)>, f64)> = (0..dim as u64)
        .into_par_iter()
        .map(|col| run_primary_basis(&gates, &layout, col))
        .collect();
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for (col, (entries, residual)) in columns.into_iter().enumerate() {
        if residual > RESTORE_TOL {
            return Err(Error::AncillaLeak { leaked: residual });
        }
        for (row, a) in entries {
            m[(row as usize, col)] += a;
        }
    }
    Ok(m)
}

/// Sparse columns as `(row rank, amplitude)` lists.
type Columns = Vec<Vec<(usize, Complex64)>>;

/// Columns of the circuit on every weight-`k` basis input, plus the worst
/// leakage figures seen.
fn subspace_columns(circuit: &Circuit, map: &SubspaceMap) -> Result<(Columns, RunReport)> {
    circuit.validate()?;
    if map.n() != circuit.n_primary {
        return Err(Error::domain("subspace and circuit registers differ"));
    }
    let layout = Layout::of(circuit);
    let gates = bind_circuit(circuit)?;
    let results: Vec<(Vec<(usize, Complex64)>, RunReport)> = map
        .states()
        .par_iter()
        .map(|x| {
            let (entries, residual) = run_primary_basis(&gates, &layout, x.packed());
            let mut report = RunReport {
                leakage: 0.0,
                ancilla_residual: residual,
            };
            let mut col = Vec::with_capacity(entries.len());
            for (p, a) in entries {
                if p.count_ones() as usize == map.k() {
                    col.push((map.rank_unchecked(p), a));
                } else {
                    report.leakage += a.norm_sqr();
                }
            }
            (col, report)
        })
        .collect();
    let mut report = RunReport::default();
    let mut cols = Vec::with_capacity(results.len());
    for (col, r) in results {
        report = report.merge(r);
        cols.push(col);
    }
    Ok((cols, report))
}

/// The `d × d` block of the circuit on the weight-`k` sector of the primary
/// register: `M[rank(y), rank(x)] = <y|C|x>`.
pub fn restrict_to_subspace(circuit: &Circuit, k: usize) -> Result<SubspaceUnitary> {
    let map = Arc::new(SubspaceMap::enumerate(circuit.n_primary, k)?);
    let (cols, report) = subspace_columns(circuit, &map)?;
    report.check()?;
    let d = map.dim();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for (j, col) in cols.into_iter().enumerate() {
        for (i, a) in col {
            m[(i, j)] += a;
        }
    }
    Ok(SubspaceUnitary::from_raw(map, m))
}

/// Leakage and ancilla residual, maximized over weight-`k` basis inputs.
pub fn conservation_report(circuit: &Circuit, k: usize) -> Result<RunReport> {
    let map = SubspaceMap::enumerate(circuit.n_primary, k)?;
    Ok(subspace_columns(circuit, &map)?.1)
}

/// Max over weight-`k` basis inputs of the squared norm landing outside the
/// weight-`k` sector.
pub fn leakage(circuit: &Circuit, k: usize) -> Result<f64> {
    Ok(conservation_report(circuit, k)?.leakage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_entry_diff, unitarity_deviation};
    use crate::subspace::BasisState;
    use std::f64::consts::FRAC_PI_2;

    fn bs(s: &str) -> BasisState {
        s.parse().unwrap()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let map = Arc::new(SubspaceMap::enumerate(3, 1).unwrap());
        let s = SubspaceState::basis(map, &bs("010")).unwrap();
        let out = run(&Circuit::new(3), &s).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());
    }

    #[test]
    fn single_givens_on_10() {
        let map = Arc::new(SubspaceMap::enumerate(2, 1).unwrap());
        let s = SubspaceState::basis(map, &bs("10")).unwrap();
        let c = Circuit::from_gates(2, vec![Gate::givens(FRAC_PI_2, 0, 1)]);
        let out = run(&c, &s).unwrap();
        assert!((out.amplitudes()[0] + 1.0).norm() < 1e-15);
        assert!(out.amplitudes()[1].norm() < 1e-15);
    }

    #[test]
    fn restricted_givens_is_rotation() {
        let theta = 0.77;
        let c = Circuit::from_gates(2, vec![Gate::givens(theta, 0, 1)]);
        let u = restrict_to_subspace(&c, 1).unwrap();
        let (s, co) = theta.sin_cos();
        let m = u.matrix();
        assert!((m[(0, 0)].re - co).abs() < 1e-15);
        assert!((m[(0, 1)].re + s).abs() < 1e-15);
        assert!((m[(1, 0)].re - s).abs() < 1e-15);
        assert!((m[(1, 1)].re - co).abs() < 1e-15);
    }

    #[test]
    fn circuit_then_inverse_is_identity() {
        let mut c = Circuit::new(3);
        c.push(Gate::givens(0.3, 0, 1));
        c.push(Gate::hadamard(2));
        c.push(Gate::cnot(2, 0));
        c.push(Gate::ry(0.4, 1));
        c.push(Gate::g_plus(0.2, 1, 2).with_control(0, false));
        let mut both = c.clone();
        both.extend(&c.inverse()).unwrap();
        let m = circuit_unitary_full(&both).unwrap();
        assert!(max_entry_diff(&m, &DMatrix::identity(8, 8)) < 1e-10);
        assert!(unitarity_deviation(&circuit_unitary_full(&c).unwrap()) < 1e-12);
    }

    #[test]
    fn single_gate_unitary_is_gate_matrix() {
        let g = Gate::fredkin(2, 0, 3);
        let c = Circuit::from_gates(4, vec![g.clone()]);
        let m = circuit_unitary_full(&c).unwrap();
        assert!(max_entry_diff(&m, &g.matrix(4).unwrap()) < 1e-15);
    }

    #[test]
    fn leakage_detects_pauli_x() {
        let c = Circuit::from_gates(3, vec![Gate::givens(0.5, 0, 1)]);
        assert!(leakage(&c, 1).unwrap() < 1e-14);
        let c = Circuit::from_gates(3, vec![Gate::x(2)]);
        assert!((leakage(&c, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            restrict_to_subspace(&c, 1),
            Err(Error::Leakage { .. })
        ));
    }

    #[test]
    fn unrestored_ancilla_is_an_error() {
        let mut c = Circuit::new(2);
        let anc = c.add_ancilla(bs("0"));
        c.push(Gate::swap(0, anc[0]));
        let map = Arc::new(SubspaceMap::enumerate(2, 1).unwrap());
        let s = SubspaceState::basis(map, &bs("10")).unwrap();
        assert!(matches!(run(&c, &s), Err(Error::AncillaLeak { .. })));
        let (_, report) = run_with_report(&c, &s).unwrap();
        assert!((report.ancilla_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_state_cap() {
        assert!(matches!(
            FullState::basis(15, 0),
            Err(Error::TooLarge { .. })
        ));
    }
}
