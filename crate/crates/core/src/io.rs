//! JSON file formats for states, circuits, unitaries and observables.
//!
//! Every document carries `"format": 1`. Bit strings list wire 0 first.
//! Floats are written in shortest round-trip form, so reading a written
//! document gives back identical values.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::circuit::{Ancilla, Circuit};
use crate::error::{Error, Result};
use crate::gates::{Control, Gate, GateKind, U2};
use crate::linalg::SubspaceUnitary;
use crate::subspace::{BasisState, SubspaceMap, SubspaceState};
use crate::variational::{Observable, ParamCircuit};

pub const FORMAT_VERSION: u32 = 1;

fn default_format() -> u32 {
    FORMAT_VERSION
}

fn check_format(format: u32) -> Result<()> {
    if format != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {format}"
        )));
    }
    Ok(())
}

fn parse_bits(s: &str) -> Result<BasisState> {
    s.parse()
        .map_err(|e| Error::Format(format!("bad bit string `{s}`: {e}")))
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text)
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------- states

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplitudeDoc {
    bits: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    #[serde(default = "default_format")]
    format: u32,
    n: usize,
    k: usize,
    amplitudes: Vec<AmplitudeDoc>,
}

/// Amplitudes read from a state file, not yet checked for normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct StateFile {
    pub map: Arc<SubspaceMap>,
    pub amplitudes: Vec<Complex64>,
}

impl StateFile {
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// The state rescaled to unit norm, provided the norm is within `tol`
    /// of one.
    pub fn normalized(&self, tol: f64) -> Result<SubspaceState> {
        let norm = self.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::domain(format!(
                "state norm {norm} differs from 1 by more than {tol:e}"
            )));
        }
        SubspaceState::new(
            self.map.clone(),
            self.amplitudes.iter().map(|a| a / norm).collect(),
        )
    }
}

pub fn parse_state(text: &str) -> Result<StateFile> {
    let doc: StateDoc = from_json(text)?;
    check_format(doc.format)?;
    let map = Arc::new(SubspaceMap::enumerate(doc.n, doc.k)?);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); map.dim()];
    let mut seen = vec![false; map.dim()];
    for rec in &doc.amplitudes {
        let x = parse_bits(&rec.bits)?;
        if x.n() != doc.n || x.weight() != doc.k {
            return Err(Error::domain(format!(
                "{x} is not a weight-{} string of length {}",
                doc.k, doc.n
            )));
        }
        let i = map.rank(&x)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Format(format!("{x} listed twice")));
        }
        amplitudes[i] = Complex64::new(rec.re, rec.im);
    }
    Ok(StateFile { map, amplitudes })
}

/// Writes the nonzero amplitudes of `state` in subspace order.
pub fn state_to_json(state: &SubspaceState) -> String {
    let map = state.map();
    to_json(&StateDoc {
        format: FORMAT_VERSION,
        n: map.n(),
        k: map.k(),
        amplitudes: state
            .support()
            .map(|(x, a)| AmplitudeDoc {
                bits: x.to_string(),
                re: a.re,
                im: a.im,
            })
            .collect(),
    })
}

// -------------------------------------------------------------- circuits

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AncillaDoc {
    wires: Vec<usize>,
    init: String,
    #[serde(rename = "final")]
    final_pattern: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlDoc {
    wire: usize,
    polarity: u8,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    kind: String,
    targets: Vec<usize>,
    #[serde(default)]
    controls: Vec<ControlDoc>,
    #[serde(default)]
    params: ParamsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    #[serde(default = "default_format")]
    format: u32,
    n: usize,
    #[serde(default)]
    ancillas: Vec<AncillaDoc>,
    gates: Vec<GateDoc>,
}

fn pair(z: Complex64) -> Option<[f64; 2]> {
    Some([z.re, z.im])
}

fn params_of(kind: &GateKind) -> ParamsDoc {
    let block = |u: &U2| ParamsDoc {
        a: pair(u.a),
        b: pair(u.b),
        c: pair(u.c),
        d: pair(u.d),
        ..ParamsDoc::default()
    };
    match kind {
        GateKind::GivensReal { theta }
        | GateKind::RY { theta }
        | GateKind::RZ { theta }
        | GateKind::Phase { theta }
        | GateKind::GPlus { theta }
        | GateKind::GMinus { theta } => ParamsDoc {
            theta: Some(*theta),
            ..ParamsDoc::default()
        },
        GateKind::SingleExcitation(u) => block(u),
        GateKind::Excitation {
            block: u,
            source,
            target,
        } => ParamsDoc {
            source: Some(source.to_string()),
            target: Some(target.to_string()),
            ..block(u)
        },
        _ => ParamsDoc::default(),
    }
}

fn kind_from_doc(name: &str, p: &ParamsDoc) -> Result<GateKind> {
    let theta = || {
        p.theta
            .ok_or_else(|| Error::Format(format!("{name} needs params.theta")))
    };
    let block = || -> Result<U2> {
        let z = |v: Option<[f64; 2]>, field: &str| {
            v.map(|[re, im]| Complex64::new(re, im))
                .ok_or_else(|| Error::Format(format!("{name} needs params.{field}")))
        };
        U2::new(z(p.a, "a")?, z(p.b, "b")?, z(p.c, "c")?, z(p.d, "d")?)
    };
    let pattern = |v: &Option<String>, field: &str| {
        v.as_deref()
            .ok_or_else(|| Error::Format(format!("{name} needs params.{field}")))
            .and_then(parse_bits)
    };
    Ok(match name {
        "GivensReal" => GateKind::GivensReal { theta: theta()? },
        "SingleExcitation" => GateKind::SingleExcitation(block()?),
        "Excitation" => GateKind::Excitation {
            block: block()?,
            source: pattern(&p.source, "source")?,
            target: pattern(&p.target, "target")?,
        },
        "SWAP" => GateKind::Swap,
        "Fredkin" => GateKind::Fredkin,
        "CNOT" => GateKind::Cnot,
        "RY" => GateKind::RY { theta: theta()? },
        "RZ" => GateKind::RZ { theta: theta()? },
        "Phase" => GateKind::Phase { theta: theta()? },
        "Hadamard" => GateKind::Hadamard,
        "PauliX" => GateKind::PauliX,
        "PauliY" => GateKind::PauliY,
        "PauliZ" => GateKind::PauliZ,
        "GPlus" => GateKind::GPlus { theta: theta()? },
        "GMinus" => GateKind::GMinus { theta: theta()? },
        other => return Err(Error::Format(format!("unknown gate kind `{other}`"))),
    })
}

fn gate_from_doc(doc: &GateDoc) -> Result<Gate> {
    let controls = doc
        .controls
        .iter()
        .map(|c| match c.polarity {
            0 | 1 => Ok(Control::new(c.wire, c.polarity == 1)),
            p => Err(Error::Format(format!("polarity must be 0 or 1, got {p}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Gate::new(
        kind_from_doc(&doc.kind, &doc.params)?,
        doc.targets.clone(),
        controls,
    )
}

fn gate_to_doc(g: &Gate, param: Option<&str>) -> GateDoc {
    GateDoc {
        kind: g.kind.name().to_string(),
        targets: g.targets.clone(),
        controls: g
            .controls
            .iter()
            .map(|c| ControlDoc {
                wire: c.wire,
                polarity: c.polarity as u8,
            })
            .collect(),
        params: params_of(&g.kind),
        param: param.map(str::to_string),
    }
}

/// Parses a circuit document, attaching any named parameters.
pub fn parse_param_circuit(text: &str) -> Result<ParamCircuit> {
    let doc: CircuitDoc = from_json(text)?;
    check_format(doc.format)?;
    let mut c = Circuit::new(doc.n);
    for a in &doc.ancillas {
        let init = parse_bits(&a.init)?;
        let final_pattern = parse_bits(&a.final_pattern)?;
        if init.n() != a.wires.len() || final_pattern.n() != a.wires.len() {
            return Err(Error::domain(format!(
                "ancilla patterns do not cover wires {:?}",
                a.wires
            )));
        }
        c.ancillas.push(Ancilla {
            wires: a.wires.clone(),
            init,
            final_pattern,
        });
    }
    for g in &doc.gates {
        c.push(gate_from_doc(g)?);
    }
    c.validate()?;
    let mut pc = ParamCircuit::new(c);
    for (i, g) in doc.gates.iter().enumerate() {
        if let Some(name) = &g.param {
            pc.attach(i, name.clone())?;
        }
    }
    Ok(pc)
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    Ok(parse_param_circuit(text)?.circuit)
}

pub fn param_circuit_to_json(pc: &ParamCircuit) -> String {
    let c = &pc.circuit;
    let name_of = |i: usize| {
        pc.parameters
            .iter()
            .find(|p| p.gate == i)
            .map(|p| p.name.as_str())
    };
    to_json(&CircuitDoc {
        format: FORMAT_VERSION,
        n: c.n_primary,
        ancillas: c
            .ancillas
            .iter()
            .map(|a| AncillaDoc {
                wires: a.wires.clone(),
                init: a.init.to_string(),
                final_pattern: a.final_pattern.to_string(),
            })
            .collect(),
        gates: c
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| gate_to_doc(g, name_of(i)))
            .collect(),
    })
}

pub fn circuit_to_json(c: &Circuit) -> String {
    param_circuit_to_json(&ParamCircuit::new(c.clone()))
}

// ------------------------------------------------ unitaries, observables

type Entry = (usize, usize, f64, f64);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryDoc {
    #[serde(default = "default_format")]
    format: u32,
    n: usize,
    k: usize,
    entries: Vec<Entry>,
}

/// Parses a unitary document; unlisted entries are zero. Fails with
/// [`Error::NotUnitary`] when the matrix is not unitary.
pub fn parse_unitary(text: &str) -> Result<SubspaceUnitary> {
    let doc: UnitaryDoc = from_json(text)?;
    check_format(doc.format)?;
    let map = Arc::new(SubspaceMap::enumerate(doc.n, doc.k)?);
    let d = map.dim();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for &(i, j, re, im) in &doc.entries {
        if i >= d || j >= d {
            return Err(Error::domain(format!(
                "entry ({i}, {j}) outside dimension {d}"
            )));
        }
        m[(i, j)] = Complex64::new(re, im);
    }
    SubspaceUnitary::new(map, m)
}

/// Lists every nonzero entry, column by column.
pub fn unitary_to_json(u: &SubspaceUnitary) -> String {
    let m = u.matrix();
    let mut entries = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != Complex64::new(0.0, 0.0) {
                entries.push((i, j, z.re, z.im));
            }
        }
    }
    to_json(&UnitaryDoc {
        format: FORMAT_VERSION,
        n: u.map().n(),
        k: u.map().k(),
        entries,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PauliDoc {
    wires: Vec<usize>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableDoc {
    #[serde(default = "default_format")]
    format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diag_paulis: Option<Vec<PauliDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<Entry>>,
}

pub fn parse_observable(text: &str) -> Result<Observable> {
    let doc: ObservableDoc = from_json(text)?;
    check_format(doc.format)?;
    match (doc.diag_paulis, doc.entries) {
        (Some(terms), None) => Ok(Observable::DiagonalPaulis(
            terms.into_iter().map(|t| (t.wires, t.weight)).collect(),
        )),
        (None, Some(entries)) => Ok(Observable::Entries(
            entries
                .into_iter()
                .map(|(i, j, re, im)| (i, j, Complex64::new(re, im)))
                .collect(),
        )),
        _ => Err(Error::Format(
            "observable needs exactly one of `diag_paulis` and `entries`".into(),
        )),
    }
}

pub fn observable_to_json(o: &Observable) -> String {
    let mut doc = ObservableDoc {
        format: FORMAT_VERSION,
        diag_paulis: None,
        entries: None,
    };
    match o {
        Observable::DiagonalPaulis(terms) => {
            doc.diag_paulis = Some(
                terms
                    .iter()
                    .map(|(wires, weight)| PauliDoc {
                        wires: wires.clone(),
                        weight: *weight,
                    })
                    .collect(),
            )
        }
        Observable::Entries(entries) => {
            doc.entries = Some(
                entries
                    .iter()
                    .map(|&(i, j, z)| (i, j, z.re, z.im))
                    .collect(),
            )
        }
    }
    to_json(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_round_trip() {
        let map = Arc::new(SubspaceMap::enumerate(4, 2).unwrap());
        let mut amps = vec![Complex64::new(0.0, 0.0); 6];
        amps[1] = Complex64::new(0.1f64.sqrt(), -0.3);
        amps[4] = Complex64::new(0.0, (1.0 - 0.1 - 0.09f64).sqrt());
        let s = SubspaceState::new(map, amps).unwrap();
        let text = state_to_json(&s);
        assert!(text.contains("\"format\": 1"));
        let back = parse_state(&text).unwrap();
        assert_eq!(back.amplitudes, s.amplitudes());
    }

    #[test]
    fn state_errors() {
        let bad_weight = r#"{"n":3,"k":1,"amplitudes":[{"bits":"110","re":1,"im":0}]}"#;
        assert!(matches!(parse_state(bad_weight), Err(Error::Domain(_))));
        let twice = r#"{"n":2,"k":1,"amplitudes":[{"bits":"10","re":1,"im":0},{"bits":"10","re":0,"im":0}]}"#;
        assert!(matches!(parse_state(twice), Err(Error::Format(_))));
        let short = r#"{"n":2,"k":1,"amplitudes":[{"bits":"10","re":0.9,"im":0}]}"#;
        assert!(parse_state(short).unwrap().normalized(1e-6).is_err());
        assert!(matches!(parse_state("{"), Err(Error::Format(_))));
        let version = r#"{"format":2,"n":2,"k":1,"amplitudes":[]}"#;
        assert!(matches!(parse_state(version), Err(Error::Format(_))));
    }

    #[test]
    fn circuit_round_trip() {
        let u = U2::from_first_column(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let mut c = Circuit::new(4);
        c.add_ancilla("01".parse().unwrap());
        c.push(Gate::single_excitation(u, 0, 1).with_control(4, true));
        c.push(Gate::double_excitation(0.25, [0, 1, 2, 3]));
        c.push(Gate::fredkin(5, 0, 2));
        c.push(Gate::ry(-1.0 / 3.0, 3).with_control(1, false));
        let mut pc = ParamCircuit::new(c);
        pc.push_parametrized(Gate::givens(0.1, 2, 3), "t").unwrap();
        let text = param_circuit_to_json(&pc);
        assert_eq!(parse_param_circuit(&text).unwrap(), pc);
    }

    #[test]
    fn circuit_errors() {
        let unknown = r#"{"n":2,"gates":[{"kind":"Toffoli","targets":[0]}]}"#;
        assert!(matches!(parse_circuit(unknown), Err(Error::Format(_))));
        let polarity = r#"{"n":3,"gates":[{"kind":"CNOT","targets":[0],"controls":[{"wire":1,"polarity":2}]}]}"#;
        assert!(matches!(parse_circuit(polarity), Err(Error::Format(_))));
        let missing = r#"{"n":2,"gates":[{"kind":"GivensReal","targets":[0,1]}]}"#;
        assert!(matches!(parse_circuit(missing), Err(Error::Format(_))));
        let range =
            r#"{"n":2,"gates":[{"kind":"GivensReal","targets":[0,2],"params":{"theta":1}}]}"#;
        assert!(matches!(parse_circuit(range), Err(Error::Domain(_))));
        let not_angle = r#"{"n":2,"gates":[{"kind":"SWAP","targets":[0,1],"param":"x"}]}"#;
        assert!(matches!(
            parse_param_circuit(not_angle),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn unitary_round_trip_and_rejection() {
        let map = Arc::new(SubspaceMap::enumerate(3, 1).unwrap());
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let u = crate::linalg::random_subspace_unitary(map, &mut rng);
        let back = parse_unitary(&unitary_to_json(&u)).unwrap();
        assert_eq!(back.matrix(), u.matrix());
        let scaled = r#"{"n":2,"k":1,"entries":[[0,0,2,0],[1,1,1,0]]}"#;
        assert!(matches!(
            parse_unitary(scaled),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn observable_forms() {
        for o in [
            Observable::DiagonalPaulis(vec![(vec![0, 2], -0.5), (vec![1], 0.25)]),
            Observable::Entries(vec![
                (0, 1, Complex64::new(0.0, 1.0)),
                (1, 0, Complex64::new(0.0, -1.0)),
            ]),
        ] {
            assert_eq!(parse_observable(&observable_to_json(&o)).unwrap(), o);
        }
        assert!(parse_observable(r#"{"diag_paulis":[],"entries":[]}"#).is_err());
        assert!(parse_observable("{}").is_err());
    }
}
