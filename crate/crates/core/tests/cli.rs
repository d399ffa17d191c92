use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn givens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_givens"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, doc: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    p
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn givens_circuit(theta: f64) -> Value {
    json!({"format": 1, "n": 2, "gates": [
        {"kind": "GivensReal", "targets": [0, 1], "params": {"theta": theta}}
    ]})
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&givens(&[])), 1);
    assert_eq!(code(&givens(&["compile"])), 1);
    assert_eq!(code(&givens(&["frobnicate"])), 1);
    assert_eq!(code(&givens(&["--help"])), 0);
}

#[test]
fn missing_or_malformed_files_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&givens(&["verify", "/nonexistent/circuit.json"])), 2);
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{not json").unwrap();
    assert_eq!(code(&givens(&["verify", s(&p)])), 2);
    let wrong = write(&dir, "v2.json", &json!({"format": 2, "n": 2, "gates": []}));
    assert_eq!(code(&givens(&["verify", s(&wrong)])), 2);
}

#[test]
fn compile_identity_gives_empty_circuit() {
    let dir = TempDir::new().unwrap();
    let u = write(
        &dir,
        "id.json",
        &json!({"n": 3, "k": 1, "entries": [[0, 0, 1.0, 0.0], [1, 1, 1.0, 0.0], [2, 2, 1.0, 0.0]]}),
    );
    let out = dir.path().join("c.json");
    let o = givens(&["compile", s(&u), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("reconstruction error: 0.000e0"));
    assert_eq!(read(&out)["gates"].as_array().unwrap().len(), 0);
}

#[test]
fn compile_two_wire_unitary_gives_one_gate() {
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u = write(
        &dir,
        "u.json",
        &json!({"n": 2, "k": 1, "entries": [[0, 0, h, 0.0], [1, 0, 0.0, h], [0, 1, 0.0, h], [1, 1, h, 0.0]]}),
    );
    let out = dir.path().join("c.json");
    let o = givens(&["compile", s(&u), "--n", "2", "--k", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&out)["gates"].as_array().unwrap().len(), 1);
    assert_eq!(code(&givens(&["compile", s(&u), "--n", "3"])), 2);
}

#[test]
fn compile_rejects_non_unitary() {
    let dir = TempDir::new().unwrap();
    let u = write(
        &dir,
        "u.json",
        &json!({"n": 2, "k": 1, "entries": [[0, 0, 1.0, 0.0], [1, 0, 1.0, 0.0]]}),
    );
    let o = givens(&["compile", s(&u)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unitary"));
}

#[test]
fn simulate_single_rotation_at_right_angle() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", &givens_circuit(std::f64::consts::FRAC_PI_2));
    let st = write(
        &dir,
        "s.json",
        &json!({"n": 2, "k": 1, "amplitudes": [{"bits": "10", "re": 1.0, "im": 0.0}]}),
    );
    let out = dir.path().join("o.json");
    let o = givens(&["simulate", s(&c), s(&st), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let amps = read(&out)["amplitudes"].as_array().unwrap().clone();
    assert_eq!(amps.len(), 1);
    assert_eq!(amps[0]["bits"], "01");
    assert!((amps[0]["re"].as_f64().unwrap() + 1.0).abs() < 1e-15);
}

#[test]
fn simulate_empty_circuit_echoes_input() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", &json!({"n": 3, "gates": []}));
    let doc = json!({"format": 1, "n": 3, "k": 2, "amplitudes": [
        {"bits": "011", "re": 0.6, "im": 0.0},
        {"bits": "110", "re": 0.0, "im": -0.8}
    ]});
    let st = write(&dir, "s.json", &doc);
    let out = dir.path().join("o.json");
    assert_eq!(
        code(&givens(&["simulate", s(&c), s(&st), "--out", s(&out)])),
        0
    );
    assert_eq!(read(&out), doc);
}

#[test]
fn unnormalized_state_exits_2() {
    let dir = TempDir::new().unwrap();
    let st = write(
        &dir,
        "s.json",
        &json!({"n": 2, "k": 1, "amplitudes": [{"bits": "10", "re": 0.9, "im": 0.0}]}),
    );
    assert_eq!(code(&givens(&["prepare", s(&st)])), 2);
    let c = write(&dir, "c.json", &givens_circuit(0.3));
    assert_eq!(code(&givens(&["simulate", s(&c), s(&st)])), 2);
}

#[test]
fn prepare_reference_state_is_empty() {
    let dir = TempDir::new().unwrap();
    let st = write(
        &dir,
        "s.json",
        &json!({"n": 4, "k": 2, "amplitudes": [{"bits": "0011", "re": 1.0, "im": 0.0}]}),
    );
    let out = dir.path().join("c.json");
    let o = givens(&["prepare", s(&st), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("rotations: 0"));
    assert_eq!(read(&out)["gates"].as_array().unwrap().len(), 0);
}

#[test]
fn prepare_four_term_state_with_chain() {
    let dir = TempDir::new().unwrap();
    let st = write(
        &dir,
        "h3.json",
        &json!({"n": 6, "k": 2, "amplitudes": [
            {"bits": "110000", "re": 0.7, "im": 0.1},
            {"bits": "001100", "re": -0.5, "im": 0.0},
            {"bits": "000011", "re": 0.3, "im": 0.0},
            {"bits": "100100", "re": 0.0, "im": 0.4}
        ]}),
    );
    let out = dir.path().join("c.json");
    let o = givens(&[
        "prepare",
        s(&st),
        "--initial",
        "110000",
        "--chain",
        "001100:110000",
        "--chain",
        "000011:001100",
        "--chain",
        "100100:110000",
        "--minimize-controls",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let gates = read(&out)["gates"].as_array().unwrap().clone();
    assert_eq!(gates.len(), 3);
    let controls: Vec<usize> = gates
        .iter()
        .map(|g| g["controls"].as_array().unwrap().len())
        .collect();
    assert_eq!(controls, [0, 0, 1]);
    assert_eq!(code(&givens(&["prepare", s(&st), "--chain", "bogus"])), 2);
}

#[test]
fn grad_tables() {
    let dir = TempDir::new().unwrap();
    let st = write(
        &dir,
        "s.json",
        &json!({"n": 4, "k": 2, "amplitudes": [{"bits": "1100", "re": 1.0, "im": 0.0}]}),
    );
    let obs = write(
        &dir,
        "k.json",
        &json!({"diag_paulis": [{"wires": [0], "weight": 1.0}, {"wires": [1, 2], "weight": -0.5}]}),
    );
    let empty = write(&dir, "e.json", &json!({"n": 4, "gates": []}));
    let o = givens(&["grad", s(&empty), s(&obs), s(&st)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("parameters: 0"));

    let t = dir.path().join("t.json");
    assert_eq!(
        code(&givens(&[
            "template",
            "--n",
            "4",
            "--k",
            "2",
            "--out",
            s(&t)
        ])),
        0
    );
    let mut doc = read(&t);
    for (i, g) in doc["gates"].as_array_mut().unwrap().iter_mut().enumerate() {
        g["params"]["theta"] = json!(0.3 + 0.2 * i as f64);
    }
    let t = write(&dir, "t2.json", &doc);
    let o = givens(&["grad", s(&t), s(&obs), s(&st), "--fd-check"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("parameters: 5"));
    for name in ["s0_2", "s0_3", "s1_2", "s1_3", "d0_1_2_3"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    assert!(text.contains("max deviation"));
    let o = givens(&["grad", s(&t), s(&obs), s(&st), "--fd-check", "--h", "0.5"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn single_gate_gradient_matches_hand_slope() {
    let dir = TempDir::new().unwrap();
    let theta: f64 = 0.37;
    let c = write(
        &dir,
        "c.json",
        &json!({"n": 2, "gates": [{"kind": "GivensReal", "targets": [0, 1], "params": {"theta": theta}, "param": "t"}]}),
    );
    let st = write(
        &dir,
        "s.json",
        &json!({"n": 2, "k": 1, "amplitudes": [{"bits": "10", "re": 1.0, "im": 0.0}]}),
    );
    let obs = write(
        &dir,
        "k.json",
        &json!({"diag_paulis": [{"wires": [0], "weight": 1.0}]}),
    );
    let o = givens(&["grad", s(&c), s(&obs), s(&st)]);
    assert_eq!(code(&o), 0);
    // C(θ) = sin²θ - cos²θ.
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("t "))
        .unwrap()
        .to_string();
    let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((value - 2.0 * (2.0 * theta).sin()).abs() < 1e-12);
}

#[test]
fn verify_reports_leakage_and_spin() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "g.json", &givens_circuit(0.4));
    assert_eq!(code(&givens(&["verify", s(&good)])), 0);
    let bad = write(
        &dir,
        "b.json",
        &json!({"n": 2, "gates": [
            {"kind": "GivensReal", "targets": [0, 1], "params": {"theta": 0.4}},
            {"kind": "PauliX", "targets": [1]}
        ]}),
    );
    let o = givens(&["verify", s(&bad)]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("tolerances"));
    let flip = write(
        &dir,
        "f.json",
        &json!({"n": 4, "gates": [{"kind": "GivensReal", "targets": [0, 1], "params": {"theta": 0.4}}]}),
    );
    assert_eq!(
        code(&givens(&["verify", s(&flip), "--spin-labels", "uudd"])),
        0
    );
    assert_eq!(
        code(&givens(&["verify", s(&flip), "--spin-labels", "udud"])),
        3
    );
    assert_eq!(
        code(&givens(&["verify", s(&flip), "--spin-labels", "ud"])),
        2
    );
    assert_eq!(code(&givens(&["verify", s(&flip), "--k", "7"])), 2);
}

#[test]
fn lowered_rotation_has_no_leakage() {
    let dir = TempDir::new().unwrap();
    let (sn, co) = 0.9f64.sin_cos();
    let u = write(
        &dir,
        "u.json",
        &json!({"n": 2, "k": 1, "entries": [[0, 0, co, 0.0], [1, 0, sn, 0.0], [0, 1, -sn, 0.0], [1, 1, co, 0.0]]}),
    );
    let out = dir.path().join("c.json");
    assert_eq!(
        code(&givens(&["compile", s(&u), "--lower", "--out", s(&out)])),
        0
    );
    let kinds: Vec<String> = read(&out)["gates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["kind"].as_str().unwrap().to_string())
        .collect();
    assert!(kinds.iter().all(|k| k == "CNOT" || k == "RY"), "{kinds:?}");
    let o = givens(&["verify", s(&out)]);
    assert_eq!(code(&o), 0);
    for k in 0..=2 {
        assert!(stdout(&o).contains(&format!("k={k}: leakage 0.000e0")));
    }
}

#[test]
fn random_artifacts_are_seeded_and_reparse() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        assert_eq!(
            code(&givens(&[
                "random-unitary",
                "--n",
                "4",
                "--k",
                "2",
                "--seed",
                "9",
                "--out",
                s(p)
            ])),
            0
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    assert_eq!(code(&givens(&["compile", s(&a), "--out", s(&c)])), 0);
    let st = dir.path().join("s.json");
    assert_eq!(
        code(&givens(&[
            "random-state",
            "--n",
            "4",
            "--k",
            "2",
            "--seed",
            "3",
            "--out",
            s(&st)
        ])),
        0
    );
    let o = dir.path().join("o.json");
    assert_eq!(
        code(&givens(&["simulate", s(&c), s(&st), "--out", s(&o)])),
        0
    );
    assert_eq!(read(&o)["n"], 4);
}
