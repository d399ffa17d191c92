//! Gate kinds and their exact matrix semantics.
//!
//! Every gate acts on an ordered list of target wires, optionally guarded by
//! controls that each carry their own polarity. The local state of the targets
//! is indexed with `targets[0]` as the most significant bit, matching the
//! register-wide convention that wire 0 is the leftmost character.
//!
//! Excitation-type gates rotate a single pair of local basis states, the
//! *source* and *target* patterns, by a [`U2`] block:
//!
//! ```text
//! G |source> = a |source> + b |target>
//! G |target> = c |source> + d |target>
//! ```
//!
//! For a single excitation the source is `|01>` and the target `|10>`, which
//! places `(a, b)` in the first column of the central block.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::subspace::{BasisState, SubspaceState};

/// Largest register for which dense matrices are built.
pub const MAX_DENSE_WIRES: usize = 14;

/// Unitarity tolerance for [`U2`] blocks.
pub const U2_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 unitary `[[a, c], [b, d]]`, columns `(a, b)` and `(c, d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct U2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl U2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let u = U2 { a, b, c, d };
        let deviation = u.unitarity_deviation();
        if deviation > U2_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub(crate) const fn new_unchecked(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Self {
        U2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        U2::new_unchecked(ONE, ZERO, ZERO, ONE)
    }

    /// Real rotation `(cos θ, sin θ, -sin θ, cos θ)`.
    pub fn givens(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        U2::new_unchecked(
            Complex64::new(c, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(c, 0.0),
        )
    }

    /// The swap block `[[0, 1], [1, 0]]`.
    pub const fn swap() -> Self {
        U2::new_unchecked(ZERO, ONE, ONE, ZERO)
    }

    /// Completes a unit first column `(a, b)` to the determinant-one unitary
    /// `[[a, -b*], [b, a*]]`.
    pub fn from_first_column(a: Complex64, b: Complex64) -> Self {
        U2::new_unchecked(a, b, -b.conj(), a.conj())
    }

    /// Max deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n1 = self.a.norm_sqr() + self.b.norm_sqr() - 1.0;
        let n2 = self.c.norm_sqr() + self.d.norm_sqr() - 1.0;
        let off = self.a.conj() * self.c + self.b.conj() * self.d;
        n1.abs().max(n2.abs()).max(off.norm())
    }

    /// Max entrywise distance from the identity block.
    pub fn distance_from_identity(&self) -> f64 {
        [
            (self.a - ONE).norm(),
            self.b.norm(),
            self.c.norm(),
            (self.d - ONE).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        U2::new_unchecked(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &U2) -> Self {
        U2::new_unchecked(
            self.a * other.a + self.c * other.b,
            self.b * other.a + self.d * other.b,
            self.a * other.c + self.c * other.d,
            self.b * other.c + self.d * other.d,
        )
    }

    /// The same operator written in the basis with source and target exchanged.
    pub fn exchanged(&self) -> Self {
        U2::new_unchecked(self.d, self.c, self.b, self.a)
    }

    pub fn scaled(&self, phase: Complex64) -> Self {
        U2::new_unchecked(
            self.a * phase,
            self.b * phase,
            self.c * phase,
            self.d * phase,
        )
    }

    /// Rotation angle when the block is `givens(θ)` within `tol`.
    pub fn as_real_rotation(&self, tol: f64) -> Option<f64> {
        let real = [self.a, self.b, self.c, self.d]
            .iter()
            .all(|z| z.im.abs() <= tol);
        if !real || (self.a.re - self.d.re).abs() > tol || (self.b.re + self.c.re).abs() > tol {
            return None;
        }
        Some(self.b.re.atan2(self.a.re))
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(2, 2, &[self.a, self.c, self.b, self.d])
    }
}

/// Control wire with the value it must hold for the gate to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub wire: usize,
    pub polarity: bool,
}

impl Control {
    pub fn new(wire: usize, polarity: bool) -> Self {
        Control { wire, polarity }
    }

    pub fn on(wire: usize) -> Self {
        Control::new(wire, true)
    }

    pub fn off(wire: usize) -> Self {
        Control::new(wire, false)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    /// Real single excitation with block `givens(θ)`.
    GivensReal {
        theta: f64,
    },
    SingleExcitation(U2),
    /// Order-ℓ excitation rotating two local patterns of length 2ℓ.
    Excitation {
        block: U2,
        source: BasisState,
        target: BasisState,
    },
    Swap,
    /// SWAP with exactly one control.
    Fredkin,
    /// NOT with exactly one control.
    Cnot,
    RY {
        theta: f64,
    },
    RZ {
        theta: f64,
    },
    /// `diag(1, e^{iθ})`.
    Phase {
        theta: f64,
    },
    Hadamard,
    PauliX,
    PauliY,
    PauliZ,
    /// `e^{iθ}` on `|00>` and `|11>`, rotation `givens(θ)` on `|01>, |10>`.
    GPlus {
        theta: f64,
    },
    /// `e^{-iθ}` on `|00>` and `|11>`, rotation `givens(θ)` on `|01>, |10>`.
    GMinus {
        theta: f64,
    },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::GivensReal { .. } => "GivensReal",
            GateKind::SingleExcitation(_) => "SingleExcitation",
            GateKind::Excitation { .. } => "Excitation",
            GateKind::Swap => "SWAP",
            GateKind::Fredkin => "Fredkin",
            GateKind::Cnot => "CNOT",
            GateKind::RY { .. } => "RY",
            GateKind::RZ { .. } => "RZ",
            GateKind::Phase { .. } => "Phase",
            GateKind::Hadamard => "Hadamard",
            GateKind::PauliX => "PauliX",
            GateKind::PauliY => "PauliY",
            GateKind::PauliZ => "PauliZ",
            GateKind::GPlus { .. } => "GPlus",
            GateKind::GMinus { .. } => "GMinus",
        }
    }

    pub fn target_count(&self) -> usize {
        match self {
            GateKind::Excitation { source, .. } => source.n(),
            GateKind::GivensReal { .. }
            | GateKind::SingleExcitation(_)
            | GateKind::Swap
            | GateKind::Fredkin
            | GateKind::GPlus { .. }
            | GateKind::GMinus { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_particle_conserving(&self) -> bool {
        !matches!(
            self,
            GateKind::Cnot
                | GateKind::RY { .. }
                | GateKind::Hadamard
                | GateKind::PauliX
                | GateKind::PauliY
        )
    }

    /// The rotated pair and its block, for kinds that act on exactly one pair
    /// of local states.
    pub fn two_level(&self) -> Option<(usize, usize, U2)> {
        match self {
            GateKind::GivensReal { theta } => Some((1, 2, U2::givens(*theta))),
            GateKind::SingleExcitation(u) => Some((1, 2, *u)),
            GateKind::Excitation {
                block,
                source,
                target,
            } => Some((source.packed() as usize, target.packed() as usize, *block)),
            GateKind::Swap | GateKind::Fredkin => Some((1, 2, U2::swap())),
            GateKind::Cnot | GateKind::PauliX => Some((0, 1, U2::swap())),
            _ => None,
        }
    }

    /// Column `local` of the gate's matrix on its targets, as at most two
    /// `(row, value)` entries.
    pub fn local_column(&self, local: usize) -> LocalColumn {
        if let Some((s, t, u)) = self.two_level() {
            return if local == s {
                LocalColumn::two((s, u.a), (t, u.b))
            } else if local == t {
                LocalColumn::two((s, u.c), (t, u.d))
            } else {
                LocalColumn::one(local, ONE)
            };
        }
        let (s, c) = match self {
            GateKind::RY { theta } => (theta / 2.0).sin_cos(),
            GateKind::GPlus { theta } | GateKind::GMinus { theta } => theta.sin_cos(),
            _ => (0.0, 1.0),
        };
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let i = Complex64::i();
        match (self, local) {
            (GateKind::RY { .. }, 0) => LocalColumn::two((0, c.into()), (1, s.into())),
            (GateKind::RY { .. }, _) => LocalColumn::two((0, (-s).into()), (1, c.into())),
            (GateKind::RZ { theta }, 0) => {
                LocalColumn::one(0, Complex64::from_polar(1.0, -theta / 2.0))
            }
            (GateKind::RZ { theta }, _) => {
                LocalColumn::one(1, Complex64::from_polar(1.0, theta / 2.0))
            }
            (GateKind::Phase { .. }, 0) => LocalColumn::one(0, ONE),
            (GateKind::Phase { theta }, _) => {
                LocalColumn::one(1, Complex64::from_polar(1.0, *theta))
            }
            (GateKind::Hadamard, 0) => LocalColumn::two((0, h), (1, h)),
            (GateKind::Hadamard, _) => LocalColumn::two((0, h), (1, -h)),
            (GateKind::PauliY, 0) => LocalColumn::one(1, i),
            (GateKind::PauliY, _) => LocalColumn::one(0, -i),
            (GateKind::PauliZ, 0) => LocalColumn::one(0, ONE),
            (GateKind::PauliZ, _) => LocalColumn::one(1, -ONE),
            (GateKind::GPlus { theta } | GateKind::GMinus { theta }, 0 | 3) => {
                let sign = if matches!(self, GateKind::GPlus { .. }) {
                    1.0
                } else {
                    -1.0
                };
                LocalColumn::one(local, Complex64::from_polar(1.0, sign * theta))
            }
            (GateKind::GPlus { .. } | GateKind::GMinus { .. }, 1) => {
                LocalColumn::two((1, c.into()), (2, s.into()))
            }
            (GateKind::GPlus { .. } | GateKind::GMinus { .. }, _) => {
                LocalColumn::two((1, (-s).into()), (2, c.into()))
            }
            _ => unreachable!("two-level kinds handled above"),
        }
    }
}

/// Sparse column of a local gate matrix.
#[derive(Clone, Copy, Debug)]
pub struct LocalColumn {
    entries: [(usize, Complex64); 2],
    len: usize,
}

impl LocalColumn {
    fn one(row: usize, value: Complex64) -> Self {
        LocalColumn {
            entries: [(row, value), (0, ZERO)],
            len: 1,
        }
    }

    fn two(first: (usize, Complex64), second: (usize, Complex64)) -> Self {
        LocalColumn {
            entries: [first, second],
            len: 2,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries[..self.len].iter().copied()
    }
}

/// A gate placed on wires.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<Control>) -> Result<Self> {
        let g = Gate {
            kind,
            targets,
            controls,
        };
        g.validate()?;
        Ok(g)
    }

    fn uncontrolled(kind: GateKind, targets: Vec<usize>) -> Self {
        Gate {
            kind,
            targets,
            controls: Vec::new(),
        }
    }

    pub fn givens(theta: f64, p: usize, q: usize) -> Self {
        Gate::uncontrolled(GateKind::GivensReal { theta }, vec![p, q])
    }

    pub fn single_excitation(block: U2, p: usize, q: usize) -> Self {
        Gate::uncontrolled(GateKind::SingleExcitation(block), vec![p, q])
    }

    /// Excitation with explicit patterns over `wires`.
    pub fn excitation(
        block: U2,
        wires: Vec<usize>,
        source: BasisState,
        target: BasisState,
    ) -> Result<Self> {
        Gate::new(
            GateKind::Excitation {
                block,
                source,
                target,
            },
            wires,
            Vec::new(),
        )
    }

    /// Real double excitation rotating `|0011>` into `|1100>` on four wires.
    pub fn double_excitation(theta: f64, wires: [usize; 4]) -> Self {
        Gate::uncontrolled(
            GateKind::Excitation {
                block: U2::givens(theta),
                source: BasisState::from_packed(4, 0b0011).expect("4-bit pattern"),
                target: BasisState::from_packed(4, 0b1100).expect("4-bit pattern"),
            },
            wires.to_vec(),
        )
    }

    pub fn swap(p: usize, q: usize) -> Self {
        Gate::uncontrolled(GateKind::Swap, vec![p, q])
    }

    pub fn fredkin(control: usize, p: usize, q: usize) -> Self {
        Gate {
            kind: GateKind::Fredkin,
            targets: vec![p, q],
            controls: vec![Control::on(control)],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            targets: vec![target],
            controls: vec![Control::on(control)],
        }
    }

    pub fn ry(theta: f64, wire: usize) -> Self {
        Gate::uncontrolled(GateKind::RY { theta }, vec![wire])
    }

    pub fn rz(theta: f64, wire: usize) -> Self {
        Gate::uncontrolled(GateKind::RZ { theta }, vec![wire])
    }

    pub fn phase(theta: f64, wire: usize) -> Self {
        Gate::uncontrolled(GateKind::Phase { theta }, vec![wire])
    }

    pub fn hadamard(wire: usize) -> Self {
        Gate::uncontrolled(GateKind::Hadamard, vec![wire])
    }

    pub fn x(wire: usize) -> Self {
        Gate::uncontrolled(GateKind::PauliX, vec![wire])
    }

    pub fn y(wire: usize) -> Self {
        Gate::uncontrolled(GateKind::PauliY, vec![wire])
    }

    pub fn z(wire: usize) -> Self {
        Gate::uncontrolled(GateKind::PauliZ, vec![wire])
    }

    pub fn g_plus(theta: f64, p: usize, q: usize) -> Self {
        Gate::uncontrolled(GateKind::GPlus { theta }, vec![p, q])
    }

    pub fn g_minus(theta: f64, p: usize, q: usize) -> Self {
        Gate::uncontrolled(GateKind::GMinus { theta }, vec![p, q])
    }

    pub fn with_controls(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn with_control(self, wire: usize, polarity: bool) -> Self {
        self.with_controls([Control::new(wire, polarity)])
    }

    /// All wires touched, targets first.
    pub fn wires(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.wire))
    }

    pub fn max_wire(&self) -> Option<usize> {
        self.wires().max()
    }

    pub fn is_particle_conserving(&self) -> bool {
        self.kind.is_particle_conserving()
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.kind.target_count();
        if self.targets.len() != expected {
            return Err(Error::domain(format!(
                "{} expects {expected} targets, got {}",
                self.kind.name(),
                self.targets.len()
            )));
        }
        let mut seen: Vec<usize> = self.wires().collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain(format!(
                "{} has overlapping wires {:?}",
                self.kind.name(),
                self.wires().collect::<Vec<_>>()
            )));
        }
        match &self.kind {
            GateKind::Fredkin | GateKind::Cnot if self.controls.len() != 1 => {
                return Err(Error::domain(format!(
                    "{} takes exactly one control",
                    self.kind.name()
                )));
            }
            GateKind::Excitation {
                source,
                target,
                block,
            } => {
                if source.n() != target.n() || source.n() % 2 != 0 || source.n() == 0 {
                    return Err(Error::domain(
                        "excitation patterns must have equal even length",
                    ));
                }
                if source.weight() != target.weight()
                    || source.hamming_distance(target) != source.n()
                {
                    return Err(Error::domain(format!(
                        "patterns {source} and {target} are not complementary with equal weight"
                    )));
                }
                let deviation = block.unitarity_deviation();
                if deviation > U2_TOL {
                    return Err(Error::NotUnitary { deviation });
                }
            }
            GateKind::SingleExcitation(block) => {
                let deviation = block.unitarity_deviation();
                if deviation > U2_TOL {
                    return Err(Error::NotUnitary { deviation });
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Precomputes bit masks for a register of `wire_count` wires.
    pub(crate) fn bind(&self, wire_count: usize) -> Result<BoundGate<'_>> {
        if let Some(w) = self.max_wire() {
            if w >= wire_count {
                return Err(Error::domain(format!(
                    "{} touches wire {w} outside register of {wire_count}",
                    self.kind.name()
                )));
            }
        }
        let shift = |w: usize| (wire_count - 1 - w) as u32;
        let mut control_mask = 0u64;
        let mut control_value = 0u64;
        for c in &self.controls {
            control_mask |= 1 << shift(c.wire);
            if c.polarity {
                control_value |= 1 << shift(c.wire);
            }
        }
        let target_shifts: Vec<u32> = self.targets.iter().map(|&w| shift(w)).collect();
        let target_mask = target_shifts.iter().fold(0u64, |m, &s| m | 1 << s);
        Ok(BoundGate {
            kind: &self.kind,
            control_mask,
            control_value,
            target_shifts,
            target_mask,
        })
    }

    /// Dense unitary on `wire_count` wires.
    pub fn matrix(&self, wire_count: usize) -> Result<DMatrix<Complex64>> {
        if wire_count > MAX_DENSE_WIRES {
            return Err(Error::TooLarge {
                wires: wire_count,
                cap: MAX_DENSE_WIRES,
            });
        }
        self.validate()?;
        let bound = self.bind(wire_count)?;
        let dim = 1usize << wire_count;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for col in 0..dim as u64 {
            bound.for_each_image(col, ONE, |row, v| m[(row as usize, col as usize)] += v);
        }
        Ok(m)
    }
}

/// Gate with precomputed masks for a fixed register size.
pub(crate) struct BoundGate<'a> {
    pub kind: &'a GateKind,
    control_mask: u64,
    control_value: u64,
    target_shifts: Vec<u32>,
    target_mask: u64,
}

impl BoundGate<'_> {
    #[inline]
    pub fn fires(&self, index: u64) -> bool {
        index & self.control_mask == self.control_value
    }

    #[inline]
    pub fn local(&self, index: u64) -> usize {
        let t = self.target_shifts.len();
        self.target_shifts
            .iter()
            .enumerate()
            .fold(0usize, |l, (j, &s)| {
                l | (((index >> s) & 1) as usize) << (t - 1 - j)
            })
    }

    #[inline]
    pub fn place(&self, index: u64, local: usize) -> u64 {
        let t = self.target_shifts.len();
        let mut out = index & !self.target_mask;
        for (j, &s) in self.target_shifts.iter().enumerate() {
            out |= (((local >> (t - 1 - j)) & 1) as u64) << s;
        }
        out
    }

    /// Calls `emit(row, amp * value)` for each nonzero entry of column `index`.
    #[inline]
    pub fn for_each_image(&self, index: u64, amp: Complex64, mut emit: impl FnMut(u64, Complex64)) {
        if !self.fires(index) {
            emit(index, amp);
            return;
        }
        let local = self.local(index);
        for (row, v) in self.kind.local_column(local).iter() {
            emit(self.place(index, row), amp * v);
        }
    }
}

/// States a gate can be applied to.
pub trait ApplyGate: Sized {
    fn apply_gate(&self, gate: &Gate) -> Result<Self>;
}

impl ApplyGate for SubspaceState {
    /// Updates amplitudes in place of the subspace basis; the full `2^n`
    /// matrix is never formed. Non-conserving gates are rejected.
    fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        if !gate.is_particle_conserving() {
            return Err(Error::domain(format!(
                "{} does not conserve particle number",
                gate.kind.name()
            )));
        }
        gate.validate()?;
        let map = self.map();
        let bound = gate.bind(map.n())?;
        let mut out = vec![ZERO; map.dim()];
        for (state, &amp) in map.states().iter().zip(self.amplitudes()) {
            if amp == ZERO {
                continue;
            }
            bound.for_each_image(state.packed(), amp, |row, v| {
                out[map.rank_unchecked(row)] += v;
            });
        }
        Ok(SubspaceState::from_raw(map.clone(), out))
    }
}

/// Spin projection of a spin-orbital.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

/// Per-wire spin labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinLabeling(pub Vec<Spin>);

impl SpinLabeling {
    /// Alternating up/down labels, the usual interleaved spin-orbital order.
    pub fn alternating(n: usize) -> Self {
        SpinLabeling(
            (0..n)
                .map(|w| if w % 2 == 0 { Spin::Up } else { Spin::Down })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, wire: usize) -> Option<Spin> {
        self.0.get(wire).copied()
    }
}

impl FromStr for SpinLabeling {
    type Err = Error;

    /// Parses strings such as `"udud"` (`a`/`b` are accepted as aliases).
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_lowercase() {
                'u' | 'a' => Ok(Spin::Up),
                'd' | 'b' => Ok(Spin::Down),
                other => Err(Error::Format(format!("invalid spin label {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SpinLabeling)
    }
}

impl fmt::Display for SpinLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Spin::Up => "u",
                Spin::Down => "d",
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinViolation {
    pub gate_index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpinReport {
    pub violations: Vec<SpinViolation>,
}

impl SpinReport {
    pub fn is_conserving(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every excitation moves particles only between wires of equal
/// spin. Gates that are not excitations are ignored.
pub fn check_spin_conserving(gates: &[Gate], labels: &SpinLabeling) -> SpinReport {
    let label = |w: usize| labels.get(w);
    let mut report = SpinReport::default();
    for (i, g) in gates.iter().enumerate() {
        let problem = match &g.kind {
            GateKind::GivensReal { .. }
            | GateKind::SingleExcitation(_)
            | GateKind::Swap
            | GateKind::Fredkin
            | GateKind::GPlus { .. }
            | GateKind::GMinus { .. } => {
                let (p, q) = (g.targets[0], g.targets[1]);
                match (label(p), label(q)) {
                    (Some(a), Some(b)) if a == b => None,
                    (Some(a), Some(b)) => Some(format!(
                        "{} couples wire {p} ({a:?}) with wire {q} ({b:?})",
                        g.kind.name()
                    )),
                    _ => Some(format!("wires {p}, {q} have no spin label")),
                }
            }
            GateKind::Excitation { source, target, .. } => {
                let spins = |pattern: &BasisState| -> Option<Vec<Spin>> {
                    let mut v = pattern
                        .occupied()
                        .into_iter()
                        .map(|j| label(g.targets[j]))
                        .collect::<Option<Vec<_>>>()?;
                    v.sort();
                    Some(v)
                };
                match (spins(source), spins(target)) {
                    (Some(a), Some(b)) if a == b => None,
                    (Some(a), Some(b)) => Some(format!(
                        "excitation on wires {:?} moves spins {a:?} to {b:?}",
                        g.targets
                    )),
                    _ => Some(format!("wires {:?} lack spin labels", g.targets)),
                }
            }
            _ => None,
        };
        if let Some(reason) = problem {
            report.violations.push(SpinViolation {
                gate_index: i,
                reason,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn givens_blocks() {
        assert_eq!(U2::givens(0.0), U2::identity());
        let g = U2::givens(FRAC_PI_2);
        assert_abs_diff_eq!(g.a.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.b.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.c.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.d.re, 0.0, epsilon = 1e-15);
        let q = U2::givens(FRAC_PI_4);
        for z in [q.a, q.b, q.c, q.d] {
            assert_abs_diff_eq!(z.norm(), FRAC_1_SQRT_2, epsilon = 1e-15);
        }
    }

    #[test]
    fn givens_matrix_matches_printed_form() {
        let theta = 0.37;
        let m = Gate::givens(theta, 0, 1).matrix(2).unwrap();
        let (s, co) = theta.sin_cos();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                c(1.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(co),
                c(-s),
                c(0.0),
                c(0.0),
                c(s),
                c(co),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(1.0),
            ],
        );
        assert!(max_abs(&(m - expected)) < 1e-15);
    }

    #[test]
    fn controlled_single_excitation_matrix() {
        let u = U2::new(
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.6, 0.0),
        )
        .unwrap();
        let m = Gate::single_excitation(u, 1, 2)
            .with_control(0, true)
            .matrix(3)
            .unwrap();
        let mut expected = DMatrix::identity(8, 8);
        expected[(5, 5)] = u.a;
        expected[(6, 5)] = u.b;
        expected[(5, 6)] = u.c;
        expected[(6, 6)] = u.d;
        assert!(max_abs(&(m - expected)) < 1e-15);
    }

    #[test]
    fn fredkin_matrix_swaps_101_and_110() {
        let m = Gate::fredkin(0, 1, 2).matrix(3).unwrap();
        let mut expected = DMatrix::<Complex64>::identity(8, 8);
        expected.swap_columns(5, 6);
        assert!(max_abs(&(m - expected)) < 1e-15);
    }

    #[test]
    fn polarity_zero_control_is_identity_when_wire_is_one() {
        let m = Gate::givens(0.9, 1, 2)
            .with_control(0, false)
            .matrix(3)
            .unwrap();
        for i in 4..8 {
            for j in 4..8 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(m[(i, j)].re, expected, epsilon = 1e-15);
                assert_abs_diff_eq!(m[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
        // Fires on the control-0 half.
        assert_abs_diff_eq!(m[(1, 1)].re, 0.9f64.cos(), epsilon = 1e-15);
    }

    #[test]
    fn overlapping_wires_rejected() {
        let g = Gate::givens(0.1, 0, 1).with_control(1, true);
        assert!(matches!(g.matrix(3), Err(Error::Domain(_))));
        assert!(Gate::swap(2, 2).validate().is_err());
        let mut f = Gate::fredkin(0, 1, 2);
        f.controls.clear();
        assert!(f.validate().is_err());
    }

    #[test]
    fn excitation_pattern_validation() {
        let p = |s: &str| s.parse::<BasisState>().unwrap();
        assert!(Gate::excitation(U2::identity(), vec![0, 1, 2, 3], p("0011"), p("1100")).is_ok());
        assert!(Gate::excitation(U2::identity(), vec![0, 1, 2, 3], p("1010"), p("0101")).is_ok());
        assert!(Gate::excitation(U2::identity(), vec![0, 1, 2, 3], p("0011"), p("0110")).is_err());
        assert!(Gate::excitation(U2::identity(), vec![0, 1, 2], p("001"), p("110")).is_err());
    }

    #[test]
    fn double_excitation_action() {
        let u = U2::new(
            Complex64::new(0.0, 0.6),
            c(0.8),
            c(-0.8),
            Complex64::new(0.0, -0.6),
        )
        .unwrap();
        let g = Gate::excitation(
            u,
            vec![0, 1, 2, 3],
            "0011".parse().unwrap(),
            "1100".parse().unwrap(),
        )
        .unwrap();
        let m = g.matrix(4).unwrap();
        assert_eq!(m[(0b0011, 0b0011)], u.a);
        assert_eq!(m[(0b1100, 0b0011)], u.b);
        assert_eq!(m[(0b0011, 0b1100)], u.c);
        assert_eq!(m[(0b1100, 0b1100)], u.d);
        for i in 0..16 {
            if i != 0b0011 && i != 0b1100 {
                assert_eq!(m[(i, i)], ONE);
            }
        }
    }

    #[test]
    fn single_qubit_conventions() {
        let x = Gate::x(0).matrix(1).unwrap();
        assert_eq!(x[(1, 0)], ONE);
        let z = Gate::z(0).matrix(1).unwrap();
        assert_eq!(z[(1, 1)], -ONE);
        let ry = Gate::ry(FRAC_PI_2, 0).matrix(1).unwrap();
        assert_abs_diff_eq!(ry[(1, 0)].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(ry[(0, 1)].re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        let cx = Gate::cnot(0, 1).matrix(2).unwrap();
        assert_eq!(cx[(3, 2)], ONE);
        assert_eq!(cx[(1, 1)], ONE);
    }

    #[test]
    fn subspace_application() {
        use crate::subspace::SubspaceMap;
        use std::sync::Arc;
        let map = Arc::new(SubspaceMap::enumerate(2, 1).unwrap());
        let ten = SubspaceState::basis(map.clone(), &"10".parse().unwrap()).unwrap();
        let out = ten.apply_gate(&Gate::givens(FRAC_PI_2, 0, 1)).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[1].norm(), 0.0, epsilon = 1e-15);
        assert!(matches!(ten.apply_gate(&Gate::x(0)), Err(Error::Domain(_))));
        assert!(ten.apply_gate(&Gate::hadamard(0)).is_err());
        assert!(ten.apply_gate(&Gate::ry(0.1, 0)).is_err());
    }

    #[test]
    fn spin_checks() {
        let labels: SpinLabeling = "uudd".parse().unwrap();
        let ok = check_spin_conserving(&[Gate::givens(0.3, 0, 1)], &labels);
        assert!(ok.is_conserving());
        let bad = check_spin_conserving(&[Gate::givens(0.3, 1, 2)], &labels);
        assert_eq!(bad.violations.len(), 1);
        let alt = SpinLabeling::alternating(4);
        assert_eq!(alt.to_string(), "udud");
        // 0011 -> 1100 on wires (0,1,2,3): spins {u,d} -> {u,d}.
        let dbl = Gate::double_excitation(0.2, [0, 1, 2, 3]);
        assert!(check_spin_conserving(std::slice::from_ref(&dbl), &alt).is_conserving());
        assert!(!check_spin_conserving(&[dbl], &labels).is_conserving());
    }
}
