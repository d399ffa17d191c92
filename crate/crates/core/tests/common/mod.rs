//! Independent reference constructions shared by the integration tests.
//! Nothing here calls into the library's matrix or enumeration code.

#![allow(dead_code)]

pub mod ansatz;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Index of a bit string with its first character as the most significant bit.
pub fn index_of(bits: &str) -> usize {
    bits.chars()
        .fold(0, |acc, ch| acc * 2 + (ch == '1') as usize)
}

pub fn string_of(index: usize, n: usize) -> String {
    (0..n)
        .map(|w| {
            if index >> (n - 1 - w) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Every weight-`k` string of length `n`, sorted as strings.
pub fn weight_k_strings(n: usize, k: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..1usize << n)
        .map(|i| string_of(i, n))
        .filter(|s| s.chars().filter(|&ch| ch == '1').count() == k)
        .collect();
    v.sort();
    v
}

/// `n choose k` by multiplicative formula in u128.
pub fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k as u128 {
        r = r * (n as u128 - i) / (i + 1);
    }
    r as usize
}

/// Full-register matrix of a controlled two-level rotation built from its
/// definition: on inputs whose controls match, the local pattern `source`
/// goes to `a|source> + b|target>` and `target` to `c|source> + d|target>`;
/// everything else is fixed.
pub fn excitation_matrix(
    n: usize,
    targets: &[usize],
    controls: &[(usize, bool)],
    source: &str,
    target: &str,
    block: [Complex64; 4],
) -> DMatrix<Complex64> {
    let [a, b, cc, d] = block;
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for col in 0..dim {
        let s: Vec<char> = string_of(col, n).chars().collect();
        let fires = controls.iter().all(|&(w, p)| (s[w] == '1') == p);
        let local: String = targets.iter().map(|&w| s[w]).collect();
        let with = |pattern: &str| {
            let mut t = s.clone();
            for (j, ch) in pattern.chars().enumerate() {
                t[targets[j]] = ch;
            }
            index_of(&t.iter().collect::<String>())
        };
        if fires && local == source {
            m[(with(source), col)] += a;
            m[(with(target), col)] += b;
        } else if fires && local == target {
            m[(with(source), col)] += cc;
            m[(with(target), col)] += d;
        } else {
            m[(col, col)] = ONE;
        }
    }
    m
}

/// Real Givens block `[[cos, -sin], [sin, cos]]` as `[a, b, c, d]`.
pub fn givens_block(theta: f64) -> [Complex64; 4] {
    let (s, co) = theta.sin_cos();
    [c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0)]
}

/// Controlled SWAP of `t1, t2` firing when every control matches.
pub fn controlled_swap_matrix(
    n: usize,
    controls: &[(usize, bool)],
    t1: usize,
    t2: usize,
) -> DMatrix<Complex64> {
    excitation_matrix(n, &[t1, t2], controls, "01", "10", [ZERO, ONE, ONE, ZERO])
}

/// Random unitary from the QR factorization of a complex Gaussian matrix,
/// with the phases of `R`'s diagonal divided out.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(d, d, |_, _| c(gauss(rng), gauss(rng)));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..d {
        let p = r[(j, j)] / r[(j, j)].norm();
        for i in 0..d {
            u[(i, j)] *= p;
        }
    }
    u
}

pub fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_vector(d: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    let v = DVector::from_fn(d, |_, _| c(gauss(rng), gauss(rng)));
    let norm = v.norm();
    v / c(norm, 0.0)
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_error(m: &DMatrix<Complex64>) -> f64 {
    let id = DMatrix::identity(m.nrows(), m.ncols());
    max_abs_diff(&(m.adjoint() * m), &id)
}

/// Number operator `Σ_i n_i` on `n` wires, diagonal in the computational basis.
pub fn number_operator(n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            c(i.count_ones() as f64, 0.0)
        } else {
            ZERO
        }
    })
}

/// Rows and columns of `m` (on `n` wires) restricted to weight-`k` strings
/// in lexicographic order.
pub fn project(m: &DMatrix<Complex64>, n: usize, k: usize) -> DMatrix<Complex64> {
    let idx: Vec<usize> = weight_k_strings(n, k).iter().map(|s| index_of(s)).collect();
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Dense `2^n` vector of a weight-`k` vector given in lexicographic order.
pub fn embed(v: &[Complex64], n: usize, k: usize) -> DVector<Complex64> {
    let mut out = DVector::from_element(1 << n, ZERO);
    for (s, &a) in weight_k_strings(n, k).iter().zip(v) {
        out[index_of(s)] = a;
    }
    out
}
