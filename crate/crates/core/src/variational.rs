//! Expectation values and analytic gradients of parametrized excitation
//! circuits.
//!
//! A real excitation `U(θ)` with generator `H = 0 ⊕ H̃` splits into commuting
//! factors `U(θ) = U₊(θ/2) U₋(θ/2)` with `U±(φ) = exp(iφH±)` and self-inverse
//! `H± = (±1) ⊕ H̃`, where `H̃ = [[0, i], [-i, 0]]` on the rotated pair.
//! Writing `U = U₊(θ₊/2) U₋(θ₋/2)`, each partial derivative obeys the
//! two-term shift rule in its own `θ±`, so
//!
//! ```text
//! dC/dθ = Σ_± [C(θ± + s) - C(θ± - s)] / (2 sin s)
//! ```
//!
//! costs four circuit evaluations per parameter.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{Gate, GateKind, SpinLabeling, U2};
use crate::simulator::run;
use crate::subspace::{BasisState, SubspaceMap, SubspaceState};

/// Default shift, where `2 sin s` is largest.
pub const DEFAULT_SHIFT: f64 = std::f64::consts::FRAC_PI_2;

/// Parameter values by name.
pub type Binding = BTreeMap<String, f64>;

/// A named angle attached to one gate.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub gate: usize,
}

/// Circuit whose real excitation gates may carry named angles. The angle
/// stored in each gate is its current value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamCircuit {
    pub circuit: Circuit,
    pub parameters: Vec<Parameter>,
}

/// Angle of a gate that can carry a parameter.
fn gate_angle(g: &Gate) -> Option<f64> {
    match &g.kind {
        GateKind::GivensReal { theta } => Some(*theta),
        GateKind::Excitation { block, .. } => block.as_real_rotation(1e-12),
        _ => None,
    }
}

fn set_angle(g: &mut Gate, theta: f64) {
    match &mut g.kind {
        GateKind::GivensReal { theta: t } => *t = theta,
        GateKind::Excitation { block, .. } => *block = U2::givens(theta),
        _ => unreachable!("checked when the parameter was attached"),
    }
}

impl ParamCircuit {
    pub fn new(circuit: Circuit) -> Self {
        ParamCircuit {
            circuit,
            parameters: Vec::new(),
        }
    }

    /// Appends `gate` and names its angle.
    pub fn push_parametrized(&mut self, gate: Gate, name: impl Into<String>) -> Result<()> {
        let name = name.into();
        self.circuit.push(gate);
        let index = self.circuit.len() - 1;
        if let Err(e) = self.attach(index, name) {
            self.circuit.gates.pop();
            return Err(e);
        }
        Ok(())
    }

    /// Names the angle of gate `index`.
    pub fn attach(&mut self, index: usize, name: String) -> Result<()> {
        let g = self
            .circuit
            .gates
            .get(index)
            .ok_or_else(|| Error::domain(format!("no gate {index}")))?;
        if gate_angle(g).is_none() {
            return Err(Error::Unsupported(format!(
                "{} cannot carry a parameter",
                g.kind.name()
            )));
        }
        if self
            .parameters
            .iter()
            .any(|p| p.name == name || p.gate == index)
        {
            return Err(Error::domain(format!(
                "parameter `{name}` or gate {index} is already used"
            )));
        }
        self.parameters.push(Parameter { name, gate: index });
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.parameters.iter().map(|p| p.name.as_str())
    }

    fn parameter(&self, name: &str) -> Result<&Parameter> {
        self.parameters
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::domain(format!("unknown parameter `{name}`")))
    }

    /// The angles currently stored in the gates.
    pub fn values(&self) -> Binding {
        self.parameters
            .iter()
            .map(|p| {
                let theta = gate_angle(&self.circuit.gates[p.gate]).expect("parametrized gate");
                (p.name.clone(), theta)
            })
            .collect()
    }

    /// The circuit with every parameter set from `binding`.
    pub fn bind(&self, binding: &Binding) -> Result<Circuit> {
        let mut c = self.circuit.clone();
        for p in &self.parameters {
            let theta = *binding
                .get(&p.name)
                .ok_or_else(|| Error::UnboundParameter(p.name.clone()))?;
            set_angle(&mut c.gates[p.gate], theta);
        }
        Ok(c)
    }

    /// Keeps `self` but stores `binding` as the current values.
    pub fn with_values(&self, binding: &Binding) -> Result<Self> {
        Ok(ParamCircuit {
            circuit: self.bind(binding)?,
            parameters: self.parameters.clone(),
        })
    }
}

/// Hermitian operator on a weight-`k` subspace.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// Weighted products of Pauli Z (`+1` on bit value 0).
    DiagonalPaulis(Vec<(Vec<usize>, f64)>),
    /// Matrix entries `(row, col, value)` in subspace order.
    Entries(Vec<(usize, usize, Complex64)>),
}

impl Observable {
    /// Diagonal value on a basis state, for Pauli-Z observables.
    fn diagonal(terms: &[(Vec<usize>, f64)], x: &BasisState) -> f64 {
        terms
            .iter()
            .map(|(wires, w)| {
                let ones = wires.iter().filter(|&&q| x.bit(q)).count();
                if ones % 2 == 0 {
                    *w
                } else {
                    -*w
                }
            })
            .sum()
    }

    fn check_wires(&self, map: &SubspaceMap) -> Result<()> {
        if let Observable::DiagonalPaulis(terms) = self {
            for (wires, _) in terms {
                if let Some(&w) = wires.iter().find(|&&w| w >= map.n()) {
                    return Err(Error::domain(format!(
                        "Pauli term on wire {w} outside {} wires",
                        map.n()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dense matrix on `map`, checked for Hermiticity.
    pub fn matrix(&self, map: &SubspaceMap) -> Result<DMatrix<Complex64>> {
        let d = map.dim();
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        match self {
            Observable::DiagonalPaulis(terms) => {
                self.check_wires(map)?;
                for (i, x) in map.states().iter().enumerate() {
                    m[(i, i)] = Complex64::new(Self::diagonal(terms, x), 0.0);
                }
            }
            Observable::Entries(entries) => {
                for &(i, j, v) in entries {
                    if i >= d || j >= d {
                        return Err(Error::domain(format!(
                            "entry ({i}, {j}) outside dimension {d}"
                        )));
                    }
                    m[(i, j)] += v;
                }
                let deviation = (&m - m.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                if deviation > 1e-12 {
                    return Err(Error::domain(format!(
                        "observable is not Hermitian (deviation {deviation:.3e})"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// `<ψ|K|ψ>`.
    pub fn expectation(&self, state: &SubspaceState) -> Result<f64> {
        let map = state.map();
        let amps = state.amplitudes();
        let value = match self {
            Observable::DiagonalPaulis(terms) => {
                self.check_wires(map)?;
                map.states()
                    .iter()
                    .zip(amps)
                    .map(|(x, a)| a.norm_sqr() * Self::diagonal(terms, x))
                    .sum::<f64>()
            }
            Observable::Entries(_) => {
                let m = self.matrix(map)?;
                let v = nalgebra::DVector::from_column_slice(amps);
                let z = (v.adjoint() * &m * &v)[(0, 0)];
                if z.im.abs() > 1e-10 {
                    return Err(Error::domain(format!(
                        "expectation has imaginary part {}",
                        z.im
                    )));
                }
                z.re
            }
        };
        Ok(value)
    }
}

/// `C(θ) = <ψ|U†(θ) K U(θ)|ψ>`.
pub fn expectation(
    c: &ParamCircuit,
    binding: &Binding,
    observable: &Observable,
    input: &SubspaceState,
) -> Result<f64> {
    let bound = c.bind(binding)?;
    observable.expectation(&run(&bound, input)?)
}

/// `G₊(θ)` and `G₋(θ)`: phase `e^{±iθ}` on `|00>` and `|11>`, rotation by
/// `θ` on `|01>, |10>`.
pub fn g_plus_minus(theta: f64) -> (Matrix4<Complex64>, Matrix4<Complex64>) {
    let (s, c) = theta.sin_cos();
    let build = |phase: Complex64| {
        let z = Complex64::new(0.0, 0.0);
        Matrix4::new(
            phase,
            z,
            z,
            z,
            z,
            c.into(),
            (-s).into(),
            z,
            z,
            s.into(),
            c.into(),
            z,
            z,
            z,
            z,
            phase,
        )
    };
    (
        build(Complex64::from_polar(1.0, theta)),
        build(Complex64::from_polar(1.0, -theta)),
    )
}

/// `H₊` and `H₋` for a two-qubit Givens rotation: `±1` off the rotated pair
/// and `H̃ = [[0, i], [-i, 0]]` on it.
pub fn generator_split() -> (Matrix4<Complex64>, Matrix4<Complex64>) {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let build = |sign: f64| {
        let e = Complex64::new(sign, 0.0);
        Matrix4::new(e, z, z, z, z, z, i, z, z, -i, z, z, z, z, z, e)
    };
    (build(1.0), build(-1.0))
}

/// Gate `g` with the `U₊` (`plus`) or `U₋` factor's angle advanced by
/// `delta`, up to a global phase: the pair block becomes
/// `e^{∓iδ} R(θ + δ)` and everything else is untouched.
/// Shifting `θ±` by `s` advances the factor's angle by `s/2`.
fn shifted_factor(g: &Gate, theta: f64, plus: bool, delta: f64) -> Gate {
    let phase = Complex64::from_polar(1.0, if plus { -delta } else { delta });
    let block = U2::givens(theta + delta).scaled(phase);
    let kind = match &g.kind {
        GateKind::GivensReal { .. } => GateKind::SingleExcitation(block),
        GateKind::Excitation { source, target, .. } => GateKind::Excitation {
            block,
            source: *source,
            target: *target,
        },
        _ => unreachable!("only parametrized gates are shifted"),
    };
    Gate {
        kind,
        targets: g.targets.clone(),
        controls: g.controls.clone(),
    }
}

/// Exact `∂C/∂θ` for parameter `name` from four shifted evaluations.
pub fn parameter_shift_grad(
    c: &ParamCircuit,
    binding: &Binding,
    observable: &Observable,
    input: &SubspaceState,
    name: &str,
    shift: f64,
) -> Result<f64> {
    let denom = 2.0 * shift.sin();
    if denom.abs() < 1e-12 {
        return Err(Error::domain(format!("sin(s) vanishes for shift {shift}")));
    }
    let p = c.parameter(name)?;
    let bound = c.bind(binding)?;
    let theta = binding[name];
    let original = bound.gates[p.gate].clone();
    let eval = |plus: bool, delta: f64| -> Result<f64> {
        let mut shifted = bound.clone();
        shifted.gates[p.gate] = shifted_factor(&original, theta, plus, delta);
        observable.expectation(&run(&shifted, input)?)
    };
    let mut total = 0.0;
    for plus in [true, false] {
        total += (eval(plus, shift / 2.0)? - eval(plus, -shift / 2.0)?) / denom;
    }
    Ok(total)
}

/// Central difference `(C(θ + h) - C(θ - h)) / 2h`.
pub fn finite_diff_grad(
    c: &ParamCircuit,
    binding: &Binding,
    observable: &Observable,
    input: &SubspaceState,
    name: &str,
    h: f64,
) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::domain(format!("step {h} must be positive")));
    }
    c.parameter(name)?;
    let theta = *binding
        .get(name)
        .ok_or_else(|| Error::UnboundParameter(name.to_string()))?;
    let at = |value: f64| {
        let mut b = binding.clone();
        b.insert(name.to_string(), value);
        expectation(c, &b, observable, input)
    };
    Ok((at(theta + h)? - at(theta - h)?) / (2.0 * h))
}

/// Gradients of every parameter, in circuit order.
pub fn gradients(
    c: &ParamCircuit,
    binding: &Binding,
    observable: &Observable,
    input: &SubspaceState,
    shift: f64,
) -> Result<Vec<(String, f64)>> {
    c.parameters
        .iter()
        .map(|p| {
            parameter_shift_grad(c, binding, observable, input, &p.name, shift)
                .map(|g| (p.name.clone(), g))
        })
        .collect()
}

/// Every single and double excitation out of the reference `1^k 0^(n-k)`,
/// singles first, each in ascending wire order. With `spin`, only
/// excitations that keep the spin labels of the moved particles survive.
pub fn template_singles_doubles(
    n: usize,
    k: usize,
    spin: Option<&SpinLabeling>,
) -> Result<ParamCircuit> {
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
    }
    if let Some(labels) = spin {
        if labels.len() != n {
            return Err(Error::domain(format!(
                "{} spin labels for {n} wires",
                labels.len()
            )));
        }
    }
    let same = |a: &[usize], b: &[usize]| match spin {
        None => true,
        Some(labels) => {
            let mut x: Vec<_> = a.iter().map(|&w| labels.0[w]).collect();
            let mut y: Vec<_> = b.iter().map(|&w| labels.0[w]).collect();
            x.sort();
            y.sort();
            x == y
        }
    };
    let mut pc = ParamCircuit::new(Circuit::new(n));
    for i in 0..k {
        for a in k..n {
            if same(&[i], &[a]) {
                pc.push_parametrized(Gate::givens(0.0, i, a), format!("s{i}_{a}"))?;
            }
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            for a in k..n {
                for b in a + 1..n {
                    if same(&[i, j], &[a, b]) {
                        pc.push_parametrized(
                            Gate::double_excitation(0.0, [i, j, a, b]),
                            format!("d{i}_{j}_{a}_{b}"),
                        )?;
                    }
                }
            }
        }
    }
    Ok(pc)
}

/// Outcome of gradient-threshold selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    /// Surviving gates, parameters reset to zero.
    pub circuit: ParamCircuit,
    /// The random starting point.
    pub initial: Binding,
    /// Gradient of every parameter at the starting point, in circuit order.
    pub gradients: Vec<(String, f64)>,
}

/// Draws every parameter uniformly from `[-π, π)` with a seeded generator,
/// then keeps the parametrized gates whose gradient magnitude exceeds
/// `threshold`. Gates without parameters are always kept.
pub fn adaptive_select(
    c: &ParamCircuit,
    observable: &Observable,
    input: &SubspaceState,
    threshold: f64,
    seed: u64,
) -> Result<Selection> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::domain(format!(
            "threshold {threshold} must be non-negative"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial: Binding = c
        .parameters
        .iter()
        .map(|p| (p.name.clone(), rng.random_range(-PI..PI)))
        .collect();
    let gradients = gradients(c, &initial, observable, input, DEFAULT_SHIFT)?;
    let keep: HashMap<usize, &str> = c
        .parameters
        .iter()
        .zip(&gradients)
        .filter(|(_, (_, g))| g.abs() > threshold)
        .map(|(p, _)| (p.gate, p.name.as_str()))
        .collect();
    let parametrized: HashMap<usize, ()> = c.parameters.iter().map(|p| (p.gate, ())).collect();
    let mut out = ParamCircuit::new(Circuit {
        n_primary: c.circuit.n_primary,
        ancillas: c.circuit.ancillas.clone(),
        gates: Vec::new(),
    });
    for (i, g) in c.circuit.gates.iter().enumerate() {
        match keep.get(&i) {
            Some(name) => {
                let mut g = g.clone();
                set_angle(&mut g, 0.0);
                out.push_parametrized(g, *name)?;
            }
            None if !parametrized.contains_key(&i) => out.circuit.push(g.clone()),
            None => {}
        }
    }
    Ok(Selection {
        circuit: out,
        initial,
        gradients,
    })
}
