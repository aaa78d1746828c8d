//! Sampling oracle for `ρ₂`: the average of coherent-state projectors over
//! the circular Gaussian source amplitudes.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::CMatrix;
use crate::error::{Error, Result};
use crate::scenario::DerivedParams;

/// Sample mean of `|φ⟩⟨φ|` over coherent states with per-entry standard
/// errors of the real and imaginary parts.
#[derive(Debug, Clone)]
pub struct CoherentAverage {
    pub mean: CMatrix,
    pub se_re: DMatrix<f64>,
    pub se_im: DMatrix<f64>,
    pub draws: usize,
}

const CHUNK: usize = 2048;

/// Averages `|α₁,α₂,α₃⟩⟨α₁,α₂,α₃|`, truncated to photon numbers
/// `0..=cutoff` per mode, over `draws` samples of independent source
/// amplitudes `A₁, A₂ ~ CN(0, ε/2)`. The mode amplitudes are
/// `(μA₊, √(1−μ²)A₊, A₋)` with `A± = (A₁ ± A₂)√((1 ± δ(d))/2)`.
pub fn coherent_average_rho2(dp: &DerivedParams, cutoff: usize, draws: usize, seed: u64) -> Result<CoherentAverage> {
    if draws < 2 {
        return Err(Error::InvalidParameter("at least two draws are required".into()));
    }
    let side = cutoff + 1;
    let dim = side * side * side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = (0.25 * dp.epsilon).sqrt();
    let plus = (0.5 * (1.0 + dp.delta_d)).sqrt();
    let minus = (0.5 * (1.0 - dp.delta_d)).max(0.0).sqrt();
    let nu = (1.0 - dp.mu * dp.mu).max(0.0).sqrt();
    let inv_sqrt_fact: Vec<f64> = (0..side)
        .scan(1.0f64, |f, n| {
            if n > 0 {
                *f *= n as f64;
            }
            Some(1.0 / f.sqrt())
        })
        .collect();
    let coherent = |alpha: Complex64| -> Vec<Complex64> {
        let norm = (-0.5 * alpha.norm_sqr()).exp();
        let mut out = Vec::with_capacity(side);
        let mut pow = Complex64::new(1.0, 0.0);
        for &w in &inv_sqrt_fact {
            out.push(pow * (norm * w));
            pow *= alpha;
        }
        out
    };

    let zero = || DMatrix::<f64>::zeros(dim, dim);
    let (mut s_re, mut s_im, mut s_re2, mut s_im2) = (zero(), zero(), zero(), zero());
    let mut done = 0;
    while done < draws {
        let rows = CHUNK.min(draws - done);
        let mut x = vec![0.0; rows * dim];
        let mut y = vec![0.0; rows * dim];
        for r in 0..rows {
            let mut normal = || -> f64 { rng.sample::<f64, _>(StandardNormal) * sd };
            let a1 = Complex64::new(normal(), normal());
            let a2 = Complex64::new(normal(), normal());
            let ap = (a1 + a2) * plus;
            let am = (a1 - a2) * minus;
            let (c1, c2, c3) = (coherent(ap * dp.mu), coherent(ap * nu), coherent(am));
            let row = r * dim;
            for (i1, &v1) in c1.iter().enumerate() {
                for (i2, &v2) in c2.iter().enumerate() {
                    let v12 = v1 * v2;
                    for (i3, &v3) in c3.iter().enumerate() {
                        let v = v12 * v3;
                        let k = row + (i1 * side + i2) * side + i3;
                        x[k] = v.re;
                        y[k] = v.im;
                    }
                }
            }
        }
        let sq = |a: &[f64]| a.iter().map(|v| v * v).collect::<Vec<f64>>();
        let (x2, y2) = (sq(&x), sq(&y));
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
        // Re(vᵢv̄ⱼ) = xᵢxⱼ + yᵢyⱼ and Im(vᵢv̄ⱼ) = yᵢxⱼ − xᵢyⱼ.
        gemm_tn(&mut s_re, 1.0, &x, &x, rows, dim);
        gemm_tn(&mut s_re, 1.0, &y, &y, rows, dim);
        gemm_tn(&mut s_im, 1.0, &y, &x, rows, dim);
        gemm_tn(&mut s_im, -1.0, &x, &y, rows, dim);
        gemm_tn(&mut s_re2, 1.0, &x2, &x2, rows, dim);
        gemm_tn(&mut s_re2, 1.0, &y2, &y2, rows, dim);
        gemm_tn(&mut s_re2, 2.0, &xy, &xy, rows, dim);
        gemm_tn(&mut s_im2, 1.0, &y2, &x2, rows, dim);
        gemm_tn(&mut s_im2, 1.0, &x2, &y2, rows, dim);
        gemm_tn(&mut s_im2, -2.0, &xy, &xy, rows, dim);
        done += rows;
    }

    let n = draws as f64;
    let se = |s: &DMatrix<f64>, s2: &DMatrix<f64>| {
        DMatrix::from_fn(dim, dim, |i, j| {
            let m = s[(i, j)] / n;
            let var = ((s2[(i, j)] - n * m * m) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
    };
    Ok(CoherentAverage {
        mean: CMatrix::from_fn(dim, dim, |i, j| Complex64::new(s_re[(i, j)] / n, s_im[(i, j)] / n)),
        se_re: se(&s_re, &s_re2),
        se_im: se(&s_im, &s_im2),
        draws,
    })
}

/// `c += alpha · aᵀ b` for row-major `rows × dim` inputs and a
/// column-major `dim × dim` accumulator.
fn gemm_tn(c: &mut DMatrix<f64>, alpha: f64, a: &[f64], b: &[f64], rows: usize, dim: usize) {
    let cs = c.as_mut_slice();
    // SAFETY: `a` and `b` hold `rows * dim` elements, `cs` holds `dim * dim`,
    // and the strides describe those layouts exactly.
    unsafe {
        matrixmultiply::dgemm(
            dim,
            rows,
            dim,
            alpha,
            a.as_ptr(),
            1,
            dim as isize,
            b.as_ptr(),
            dim as isize,
            1,
            1.0,
            cs.as_mut_ptr(),
            1,
            dim as isize,
        );
    }
}
