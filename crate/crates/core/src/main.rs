use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use givens_core::compiler::{compile_unitary, lower_to_cnot_ry};
use givens_core::gates::check_spin_conserving;
use givens_core::io;
use givens_core::linalg::{max_entry_diff, random_state, random_subspace_unitary};
use givens_core::simulator::{
    conservation_report, restrict_to_subspace, run_with_report, RESTORE_TOL,
};
use givens_core::stateprep::{
    plan_chain, plan_to_circuit, preparation_overlap, Chain, CircuitOptions,
};
use givens_core::variational::{
    finite_diff_grad, gradients, template_singles_doubles, DEFAULT_SHIFT,
};
use givens_core::{BasisState, Circuit, Error, SpinLabeling, SubspaceMap};

const RECONSTRUCTION_TOL: f64 = 1e-8;
const INPUT_NORM_TOL: f64 = 1e-6;
const FIDELITY_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-6;
const LEAKAGE_TOL: f64 = 1e-12;

/// Compile, prepare, simulate and check particle-conserving circuits.
#[derive(Parser)]
#[command(name = "givens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a unitary on a weight-k subspace into excitation gates.
    Compile {
        unitary: PathBuf,
        /// Expected register size; must match the file.
        #[arg(long)]
        n: Option<usize>,
        /// Expected Hamming weight; must match the file.
        #[arg(long)]
        k: Option<usize>,
        /// Rewrite the result with CNOT, RY and single-qubit gates.
        #[arg(long)]
        lower: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a circuit preparing a state from a basis state.
    Prepare {
        state: PathBuf,
        #[arg(long)]
        minimize_controls: bool,
        /// Starting basis state (default: first state in lexicographic order).
        #[arg(long)]
        initial: Option<String>,
        /// Excite STATE from REF, given as STATE:REF. Repeatable, applied in order.
        #[arg(long = "chain", value_name = "STATE:REF")]
        chain: Vec<String>,
        /// Use controlled-SWAP ladders so only single excitations remain.
        #[arg(long)]
        ladder: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a circuit on a state.
    Simulate {
        circuit: PathBuf,
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter-shift gradients of an expectation value.
    Grad {
        circuit: PathBuf,
        observable: PathBuf,
        state: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SHIFT, allow_negative_numbers = true)]
        shift: f64,
        /// Compare against central finite differences.
        #[arg(long)]
        fd_check: bool,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },
    /// Report particle-number leakage and spin violations.
    Verify {
        circuit: PathBuf,
        /// Check only this weight sector (default: every sector).
        #[arg(long)]
        k: Option<usize>,
        /// One label per primary wire, e.g. "udud".
        #[arg(long)]
        spin_labels: Option<String>,
    },
    /// Write a Haar-random unitary on a weight-k subspace.
    RandomUnitary {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a random normalized weight-k state.
    RandomState {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the parametrized singles-and-doubles template.
    Template {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        spin_labels: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Domain(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

fn check(ok: bool, message: impl FnOnce() -> String) -> CmdResult {
    if ok {
        Ok(())
    } else {
        Err(Failure::Numerical(message()))
    }
}

fn write_artifact(path: Option<&Path>, text: &str) -> CmdResult {
    if let Some(p) = path {
        io::write_text(p, text)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn print_counts(c: &Circuit) {
    println!("gates: {}", c.len());
    for (kind, count) in c.gate_counts() {
        println!("  {kind}: {count}");
    }
    let ancilla_wires = c.total_wires() - c.n_primary;
    println!("ancillas: {} ({} wires)", c.ancillas.len(), ancilla_wires);
}

fn parse_bits(s: &str) -> Result<BasisState, Failure> {
    Ok(s.parse::<BasisState>()?)
}

fn cmd_compile(
    path: &Path,
    n: Option<usize>,
    k: Option<usize>,
    lower: bool,
    out: Option<&Path>,
) -> CmdResult {
    let u = io::parse_unitary(&io::read_text(path)?)?;
    let (fn_, fk) = (u.map().n(), u.map().k());
    for (flag, given, actual) in [("--n", n, fn_), ("--k", k, fk)] {
        if given.is_some_and(|g| g != actual) {
            return Err(Failure::Domain(format!(
                "{flag} {} does not match the file ({actual})",
                given.unwrap()
            )));
        }
    }
    let mut circuit = compile_unitary(&u, fn_, fk)?;
    if lower {
        circuit = lower_to_cnot_ry(&circuit)?;
    }
    println!("compiled (n={fn_}, k={fk}, d={})", u.dim());
    print_counts(&circuit);
    let error = max_entry_diff(restrict_to_subspace(&circuit, fk)?.matrix(), u.matrix());
    println!("reconstruction error: {error:.3e} (tolerance {RECONSTRUCTION_TOL:e})");
    write_artifact(out, &io::circuit_to_json(&circuit))?;
    check(error <= RECONSTRUCTION_TOL, || {
        format!("reconstruction error {error:.3e} exceeds {RECONSTRUCTION_TOL:e}")
    })
}

fn cmd_prepare(
    path: &Path,
    minimize_controls: bool,
    initial: Option<&str>,
    chain: &[String],
    ladder: bool,
    out: Option<&Path>,
) -> CmdResult {
    let file = io::parse_state(&io::read_text(path)?)?;
    let target = file.normalized(INPUT_NORM_TOL)?;
    let mut route = Chain {
        initial: initial.map(parse_bits).transpose()?,
        links: Vec::new(),
    };
    for link in chain {
        let (state, reference) = link
            .split_once(':')
            .ok_or_else(|| Failure::Domain(format!("--chain expects STATE:REF, got `{link}`")))?;
        route = route.link(parse_bits(state)?, parse_bits(reference)?);
    }
    let plan = plan_chain(&target, &route)?;
    let options = CircuitOptions {
        minimize_controls,
        ladder,
    };
    let circuit = plan_to_circuit(&plan, options)?;
    println!("initial state: {}", plan.initial());
    println!("rotations: {}", plan.len());
    print_counts(&circuit);
    for g in &circuit.gates {
        println!(
            "  {} targets {:?} controls {}",
            g.kind.name(),
            g.targets,
            g.controls.len()
        );
    }
    let overlap: Complex64 = preparation_overlap(&circuit, &plan.initial(), &target)?;
    println!(
        "overlap <target|out>: re {:e}, im {:e} (tolerance {FIDELITY_TOL:e})",
        overlap.re, overlap.im
    );
    write_artifact(out, &io::circuit_to_json(&circuit))?;
    check((overlap - 1.0).norm() <= FIDELITY_TOL, || {
        format!("overlap {overlap} is not within {FIDELITY_TOL:e} of 1")
    })
}

fn cmd_simulate(circuit: &Path, state: &Path, out: Option<&Path>) -> CmdResult {
    let c = io::parse_circuit(&io::read_text(circuit)?)?;
    let input = io::parse_state(&io::read_text(state)?)?.normalized(INPUT_NORM_TOL)?;
    let (output, report) = run_with_report(&c, &input)?;
    println!(
        "leakage: {:.3e} (tolerance {RESTORE_TOL:e})",
        report.leakage
    );
    println!(
        "ancilla residual: {:.3e} (tolerance {RESTORE_TOL:e})",
        report.ancilla_residual
    );
    check(report.ancilla_residual <= RESTORE_TOL, || {
        format!(
            "ancillas not restored (residual {:.3e})",
            report.ancilla_residual
        )
    })?;
    check(report.leakage <= RESTORE_TOL, || {
        format!(
            "norm left the weight sector (leakage {:.3e})",
            report.leakage
        )
    })?;
    write_artifact(out, &io::state_to_json(&output))
}

fn cmd_grad(
    circuit: &Path,
    observable: &Path,
    state: &Path,
    shift: f64,
    fd_check: bool,
    h: f64,
) -> CmdResult {
    let pc = io::parse_param_circuit(&io::read_text(circuit)?)?;
    let obs = io::parse_observable(&io::read_text(observable)?)?;
    let input = io::parse_state(&io::read_text(state)?)?.normalized(INPUT_NORM_TOL)?;
    let binding = pc.values();
    let grads = gradients(&pc, &binding, &obs, &input, shift)?;
    println!("parameters: {} (shift {shift})", grads.len());
    let mut worst: f64 = 0.0;
    if fd_check {
        println!(
            "{:<16} {:>24} {:>24} {:>10}",
            "name", "shift", "finite-diff", "|diff|"
        );
    } else {
        println!("{:<16} {:>24}", "name", "shift");
    }
    for (name, g) in &grads {
        if fd_check {
            let fd = finite_diff_grad(&pc, &binding, &obs, &input, name, h)?;
            let diff = (g - fd).abs();
            worst = worst.max(diff);
            println!("{name:<16} {g:>24.17e} {fd:>24.17e} {diff:>10.3e}");
        } else {
            println!("{name:<16} {g:>24.17e}");
        }
    }
    if fd_check {
        println!("max deviation: {worst:.3e} (h {h:e}, tolerance {GRAD_TOL:e})");
    }
    check(worst <= GRAD_TOL, || {
        format!("parameter-shift and finite differences differ by {worst:.3e}")
    })
}

fn cmd_verify(path: &Path, k: Option<usize>, spin_labels: Option<&str>) -> CmdResult {
    let c = io::parse_circuit(&io::read_text(path)?)?;
    let n = c.n_primary;
    let sectors: Vec<usize> = match k {
        Some(k) if k > n => return Err(Failure::Domain(format!("k = {k} exceeds n = {n}"))),
        Some(k) => vec![k],
        None => (0..=n).collect(),
    };
    println!("wires: {n} primary, {} total", c.total_wires());
    let mut failures = Vec::new();
    for k in sectors {
        let report = conservation_report(&c, k)?;
        println!(
            "k={k}: leakage {:.3e}, ancilla residual {:.3e}",
            report.leakage, report.ancilla_residual
        );
        if report.leakage > LEAKAGE_TOL {
            failures.push(format!("leakage {:.3e} in sector k={k}", report.leakage));
        }
        if report.ancilla_residual > RESTORE_TOL {
            failures.push(format!(
                "ancilla residual {:.3e} in sector k={k}",
                report.ancilla_residual
            ));
        }
    }
    println!("tolerances: leakage {LEAKAGE_TOL:e}, ancilla {RESTORE_TOL:e}");
    if let Some(s) = spin_labels {
        let labels: SpinLabeling = s.parse()?;
        if labels.len() != n {
            return Err(Failure::Domain(format!(
                "{} spin labels for {n} primary wires",
                labels.len()
            )));
        }
        let report = check_spin_conserving(&c.gates, &labels);
        println!("spin violations: {}", report.violations.len());
        for v in &report.violations {
            println!("  gate {}: {}", v.gate_index, v.reason);
        }
        if !report.is_conserving() {
            failures.push(format!("{} spin violations", report.violations.len()));
        }
    }
    check(failures.is_empty(), || failures.join("; "))
}

fn subspace(n: usize, k: usize) -> Result<Arc<SubspaceMap>, Failure> {
    Ok(Arc::new(SubspaceMap::enumerate(n, k)?))
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Compile {
            unitary,
            n,
            k,
            lower,
            out,
        } => cmd_compile(&unitary, n, k, lower, out.as_deref()),
        Command::Prepare {
            state,
            minimize_controls,
            initial,
            chain,
            ladder,
            out,
        } => cmd_prepare(
            &state,
            minimize_controls,
            initial.as_deref(),
            &chain,
            ladder,
            out.as_deref(),
        ),
        Command::Simulate {
            circuit,
            state,
            out,
        } => cmd_simulate(&circuit, &state, out.as_deref()),
        Command::Grad {
            circuit,
            observable,
            state,
            shift,
            fd_check,
            h,
        } => cmd_grad(&circuit, &observable, &state, shift, fd_check, h),
        Command::Verify {
            circuit,
            k,
            spin_labels,
        } => cmd_verify(&circuit, k, spin_labels.as_deref()),
        Command::RandomUnitary { n, k, seed, out } => {
            let u = random_subspace_unitary(subspace(n, k)?, &mut ChaCha8Rng::seed_from_u64(seed));
            write_artifact(Some(&out), &io::unitary_to_json(&u))
        }
        Command::RandomState { n, k, seed, out } => {
            let s = random_state(subspace(n, k)?, &mut ChaCha8Rng::seed_from_u64(seed));
            write_artifact(Some(&out), &io::state_to_json(&s))
        }
        Command::Template {
            n,
            k,
            spin_labels,
            out,
        } => {
            let labels = spin_labels.map(|s| s.parse::<SpinLabeling>()).transpose()?;
            let pc = template_singles_doubles(n, k, labels.as_ref())?;
            println!("parametrized gates: {}", pc.parameters.len());
            write_artifact(Some(&out), &io::param_circuit_to_json(&pc))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
