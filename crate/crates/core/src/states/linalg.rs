//! Hermitian eigendecompositions, trace norms and spectral data.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues at or above `-NEGATIVE_TOL` are treated as roundoff.
pub const NEGATIVE_TOL: f64 = 1e-10;
/// Eigenvalues below `RANK_TOL` times the largest one are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Eigenvalues and eigenvectors (as columns) of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    if a.nrows() == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    if a.nrows() == 1 {
        return (alloc::vec![a[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let eig = a.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    if a.nrows() == 1 {
        return a[(0, 0)].re.abs();
    }
    let eig = a.clone().symmetric_eigen();
    eig.eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Largest entry of `|A − A†|`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// The support of a positive semidefinite matrix: strictly positive
/// eigenvalues and their eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    /// Eigendecomposes `a`, clamping roundoff-level negative eigenvalues
    /// and discarding the numerical kernel.
    pub fn of_psd(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        let (values, vectors) = hermitian_eigen(a);
        let max = values.iter().fold(0.0f64, |m, &v| m.max(v));
        if let Some(&bad) = values.iter().find(|&&v| v < -NEGATIVE_TOL) {
            return Err(Error::InvariantViolation(format!(
                "eigenvalue {bad:.3e} below -{NEGATIVE_TOL:.0e}"
            )));
        }
        let keep: Vec<usize> = (0..values.len())
            .filter(|&i| values[i] > RANK_TOL * max && values[i] > 0.0)
            .collect();
        let mut kept = CMatrix::zeros(n, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            kept.set_column(c, &vectors.column(i));
        }
        Ok(Self {
            values: keep.iter().map(|&i| values[i]).collect(),
            vectors: kept,
        })
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Principal square root of a positive semidefinite matrix.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let n = a.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let r = v.max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= r;
        }
    }
    &scaled * vectors.adjoint()
}

/// Kronecker product of complex matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
