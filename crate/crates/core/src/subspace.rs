//! Fixed-particle-number subspaces.
//!
//! A register of `n` wires holding `k` particles lives in the span of the
//! `C(n, k)` computational basis states of Hamming weight `k`. Wire 0 is the
//! leftmost character of a printed bit string and the most significant bit of
//! the packed integer, so numeric order of the packed bits coincides with
//! lexicographic order of the strings.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register accepted by subspace operations.
pub const MAX_SUBSPACE_WIRES: usize = 16;

/// Normalization tolerance for [`SubspaceState`].
pub const NORM_TOL: f64 = 1e-12;

/// An occupation string over `n` wires.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    n: u8,
    bits: u64,
}

impl BasisState {
    /// Builds a state from packed bits, wire 0 being bit `n - 1`.
    pub fn from_packed(n: usize, bits: u64) -> Result<Self> {
        if n > 63 {
            return Err(Error::domain(format!("register of {n} wires is too large")));
        }
        if n < 64 && bits >> n != 0 {
            return Err(Error::domain(format!(
                "packed bits {bits:#b} do not fit in {n} wires"
            )));
        }
        Ok(BasisState { n: n as u8, bits })
    }

    pub fn from_wires(n: usize, occupied: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &w in occupied {
            if w >= n {
                return Err(Error::domain(format!("wire {w} outside register of {n}")));
            }
            bits |= 1 << (n - 1 - w);
        }
        Self::from_packed(n, bits)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn packed(&self) -> u64 {
        self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn bit(&self, wire: usize) -> bool {
        debug_assert!(wire < self.n());
        (self.bits >> (self.n() - 1 - wire)) & 1 == 1
    }

    pub fn with_bit(&self, wire: usize, value: bool) -> Self {
        let mask = 1u64 << (self.n() - 1 - wire);
        let bits = if value {
            self.bits | mask
        } else {
            self.bits & !mask
        };
        BasisState { n: self.n, bits }
    }

    /// Wires holding a particle, ascending.
    pub fn occupied(&self) -> Vec<usize> {
        (0..self.n()).filter(|&w| self.bit(w)).collect()
    }

    pub fn hamming_distance(&self, other: &BasisState) -> usize {
        (self.bits ^ other.bits).count_ones() as usize
    }

    /// Wires where the two states differ, ascending.
    pub fn differing_wires(&self, other: &BasisState) -> Vec<usize> {
        (0..self.n())
            .filter(|&w| self.bit(w) != other.bit(w))
            .collect()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in 0..self.n() {
            f.write_str(if self.bit(w) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}>")
    }
}

impl FromStr for BasisState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix('|')
            .and_then(|t| t.strip_suffix('>'))
            .unwrap_or(s);
        let mut bits = 0u64;
        for ch in s.chars() {
            bits <<= 1;
            match ch {
                '0' => {}
                '1' => bits |= 1,
                other => {
                    return Err(Error::Format(format!(
                        "invalid character {other:?} in bit string {s:?}"
                    )))
                }
            }
        }
        BasisState::from_packed(s.len(), bits)
    }
}

/// Half the Hamming distance between two equal-weight states.
pub fn excitation_order(x: &BasisState, y: &BasisState) -> Result<usize> {
    if x.n() != y.n() {
        return Err(Error::domain(format!(
            "register sizes differ: {} vs {}",
            x.n(),
            y.n()
        )));
    }
    if x.weight() != y.weight() {
        return Err(Error::domain(format!("{x} and {y} have different weights")));
    }
    Ok(x.hamming_distance(y) / 2)
}

/// `1^k 0^(n-k)`: all particles in the first `k` wires.
pub fn reference_state(n: usize, k: usize) -> Result<BasisState> {
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
    }
    BasisState::from_wires(n, &(0..k).collect::<Vec<_>>())
}

/// Pascal triangle up to `n`.
fn binomial_table(n: usize) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0usize; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j < i { t[i - 1][j] } else { 0 };
        }
    }
    t
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Bijection between weight-`k` strings on `n` wires and `0..C(n, k)`.
#[derive(Clone, PartialEq, Eq)]
pub struct SubspaceMap {
    n: usize,
    k: usize,
    states: Vec<BasisState>,
    binom: Vec<Vec<usize>>,
}

impl fmt::Debug for SubspaceMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubspaceMap")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("dim", &self.states.len())
            .finish()
    }
}

impl SubspaceMap {
    /// Enumerates all weight-`k` strings in lexicographic order.
    pub fn enumerate(n: usize, k: usize) -> Result<Self> {
        if n == 0 || n > MAX_SUBSPACE_WIRES {
            return Err(Error::domain(format!(
                "register size {n} outside 1..={MAX_SUBSPACE_WIRES}"
            )));
        }
        if k > n {
            return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
        }
        let binom = binomial_table(n);
        let d = binom[n][k];
        let mut map = SubspaceMap {
            n,
            k,
            states: Vec::with_capacity(d),
            binom,
        };
        map.states = (0..d).map(|i| map.unrank_unchecked(i)).collect();
        Ok(map)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    /// Lexicographic position of `x`, by combinatorial counting.
    pub fn rank(&self, x: &BasisState) -> Result<usize> {
        if x.n() != self.n || x.weight() != self.k {
            return Err(Error::domain(format!(
                "{x} is not in the weight-{} subspace of {} wires",
                self.k, self.n
            )));
        }
        Ok(self.rank_unchecked(x.packed()))
    }

    /// Rank of packed bits already known to have weight `k`.
    pub(crate) fn rank_unchecked(&self, bits: u64) -> usize {
        let mut remaining = self.k;
        let mut index = 0;
        for w in 0..self.n {
            if remaining == 0 {
                break;
            }
            if (bits >> (self.n - 1 - w)) & 1 == 1 {
                index += self.binom[self.n - w - 1][remaining];
                remaining -= 1;
            }
        }
        index
    }

    pub fn unrank(&self, index: usize) -> Result<BasisState> {
        if index >= self.dim() {
            return Err(Error::domain(format!(
                "index {index} out of range for dimension {}",
                self.dim()
            )));
        }
        Ok(self.states[index])
    }

    fn unrank_unchecked(&self, mut index: usize) -> BasisState {
        let mut remaining = self.k;
        let mut bits = 0u64;
        for w in 0..self.n {
            let zeros_here = self.binom[self.n - w - 1][remaining];
            if index >= zeros_here {
                index -= zeros_here;
                remaining -= 1;
                bits |= 1 << (self.n - 1 - w);
            }
        }
        BasisState {
            n: self.n as u8,
            bits,
        }
    }
}

/// Amplitudes over a [`SubspaceMap`].
#[derive(Clone, Debug)]
pub struct SubspaceState {
    map: Arc<SubspaceMap>,
    amps: Vec<Complex64>,
}

impl SubspaceState {
    /// Wraps normalized amplitudes.
    pub fn new(map: Arc<SubspaceMap>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != map.dim() {
            return Err(Error::domain(format!(
                "expected {} amplitudes, got {}",
                map.dim(),
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!(
                "state is not normalized (norm² = {norm})"
            )));
        }
        Ok(SubspaceState { map, amps })
    }

    pub(crate) fn from_raw(map: Arc<SubspaceMap>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(map.dim(), amps.len());
        SubspaceState { map, amps }
    }

    pub fn basis(map: Arc<SubspaceMap>, x: &BasisState) -> Result<Self> {
        let i = map.rank(x)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); map.dim()];
        amps[i] = Complex64::new(1.0, 0.0);
        Ok(SubspaceState { map, amps })
    }

    pub fn map(&self) -> &Arc<SubspaceMap> {
        &self.map
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, x: &BasisState) -> Result<Complex64> {
        Ok(self.amps[self.map.rank(x)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SubspaceState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest absolute amplitude difference.
    pub fn max_diff(&self, other: &SubspaceState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Nonzero entries as `(state, amplitude)` pairs.
    pub fn support(&self) -> impl Iterator<Item = (BasisState, Complex64)> + '_ {
        self.map
            .states()
            .iter()
            .zip(&self.amps)
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(s, a)| (*s, *a))
    }
}
