//! Dense subspace unitaries and seeded random sampling.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::subspace::{SubspaceMap, SubspaceState};

/// Unitarity tolerance for compiler inputs.
pub const UNITARY_TOL: f64 = 1e-10;

/// Max entry of `M†M - I`.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let id = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
    max_entry_diff(&prod, &id)
}

pub fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// A unitary on the weight-`k` subspace, rows and columns in lexicographic
/// order of the basis.
#[derive(Clone, Debug)]
pub struct SubspaceUnitary {
    map: Arc<SubspaceMap>,
    matrix: DMatrix<Complex64>,
}

impl SubspaceUnitary {
    pub fn new(map: Arc<SubspaceMap>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != map.dim() || matrix.ncols() != map.dim() {
            return Err(Error::domain(format!(
                "expected a {d}×{d} matrix, got {}×{}",
                matrix.nrows(),
                matrix.ncols(),
                d = map.dim()
            )));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(SubspaceUnitary { map, matrix })
    }

    pub(crate) fn from_raw(map: Arc<SubspaceMap>, matrix: DMatrix<Complex64>) -> Self {
        SubspaceUnitary { map, matrix }
    }

    pub fn identity(map: Arc<SubspaceMap>) -> Self {
        let d = map.dim();
        SubspaceUnitary {
            map,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn map(&self) -> &Arc<SubspaceMap> {
        &self.map
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn max_diff(&self, other: &SubspaceUnitary) -> f64 {
        max_entry_diff(&self.matrix, &other.matrix)
    }

    pub fn apply(&self, state: &SubspaceState) -> SubspaceState {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let out = &self.matrix * v;
        SubspaceState::from_raw(self.map.clone(), out.as_slice().to_vec())
    }
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed `d × d` unitary (QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal folded back into `Q`).
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_subspace_unitary(map: Arc<SubspaceMap>, rng: &mut impl Rng) -> SubspaceUnitary {
    let m = haar_unitary(map.dim(), rng);
    SubspaceUnitary::from_raw(map, m)
}

/// Uniformly random normalized state on the subspace.
pub fn random_state(map: Arc<SubspaceMap>, rng: &mut impl Rng) -> SubspaceState {
    let mut amps: Vec<Complex64> = (0..map.dim()).map(|_| gaussian(rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    SubspaceState::from_raw(map, amps)
}
