//! Random parametrized excitation circuits on four wires with two
//! particles, paired with full-register matrices built from gate definitions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use givens_core::variational::{Binding, Observable, ParamCircuit};
use givens_core::{Circuit, Control, Gate, SubspaceMap, SubspaceState};

use super::*;

pub const N: usize = 4;
pub const K: usize = 2;

/// A parametrized gate described independently of the library.
#[derive(Clone, Debug)]
pub enum Term {
    Single {
        p: usize,
        q: usize,
        controls: Vec<(usize, bool)>,
    },
    Double {
        wires: [usize; 4],
    },
}

pub fn random_term(r: &mut impl Rng) -> Term {
    use rand::seq::SliceRandom;
    let mut wires: Vec<usize> = (0..N).collect();
    wires.shuffle(r);
    if r.random_bool(0.3) {
        Term::Double {
            wires: [wires[0], wires[1], wires[2], wires[3]],
        }
    } else {
        let controls = if r.random_bool(0.5) {
            vec![(wires[2], r.random())]
        } else {
            Vec::new()
        };
        Term::Single {
            p: wires[0],
            q: wires[1],
            controls,
        }
    }
}

pub fn term_gate(s: &Term) -> Gate {
    match s {
        Term::Single { p, q, controls } => Gate::givens(0.0, *p, *q)
            .with_controls(controls.iter().map(|&(w, b)| Control::new(w, b))),
        Term::Double { wires } => Gate::double_excitation(0.0, *wires),
    }
}

pub fn term_matrix(s: &Term, theta: f64) -> DMatrix<Complex64> {
    match s {
        Term::Single { p, q, controls } => {
            excitation_matrix(N, &[*p, *q], controls, "01", "10", givens_block(theta))
        }
        Term::Double { wires } => {
            excitation_matrix(N, wires, &[], "0011", "1100", givens_block(theta))
        }
    }
}

/// Random Hermitian matrix on the weight-`K` sector.
pub fn random_hermitian(d: usize, r: &mut impl Rng) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(d, d, |_, _| c(gauss(r), gauss(r)));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

pub fn entries_of(m: &DMatrix<Complex64>) -> Observable {
    let mut e = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            e.push((i, j, m[(i, j)]));
        }
    }
    Observable::Entries(e)
}

/// `<ψ|U†KU|ψ>` with every gate built from its definition on the full register.
pub fn oracle_cost(
    gate_terms: &[Term],
    thetas: &[f64],
    k: &DMatrix<Complex64>,
    psi: &DVector<Complex64>,
) -> f64 {
    let mut v = embed(psi.as_slice(), N, K);
    for (s, &t) in gate_terms.iter().zip(thetas) {
        v = term_matrix(s, t) * v;
    }
    let strings = weight_k_strings(N, K);
    let local = DVector::from_fn(strings.len(), |i, _| v[index_of(&strings[i])]);
    (local.adjoint() * k * &local)[(0, 0)].re
}

pub type Tuple = (
    Vec<Term>,
    Vec<f64>,
    ParamCircuit,
    Binding,
    DMatrix<Complex64>,
    SubspaceState,
);

pub fn setup(seed: u64, gates: usize) -> Tuple {
    let mut r = rng(seed);
    let gate_terms: Vec<Term> = (0..gates).map(|_| random_term(&mut r)).collect();
    let thetas: Vec<f64> = (0..gates).map(|_| r.random_range(-3.0..3.0)).collect();
    let mut pc = ParamCircuit::new(Circuit::new(N));
    let mut binding = Binding::new();
    for (i, (s, &t)) in gate_terms.iter().zip(&thetas).enumerate() {
        pc.push_parametrized(term_gate(s), format!("p{i}")).unwrap();
        binding.insert(format!("p{i}"), t);
    }
    let map = Arc::new(SubspaceMap::enumerate(N, K).unwrap());
    let k = random_hermitian(map.dim(), &mut r);
    let psi = random_vector(map.dim(), &mut r);
    let input = SubspaceState::new(map, psi.iter().copied().collect()).unwrap();
    (gate_terms, thetas, pc, binding, k, input)
}
