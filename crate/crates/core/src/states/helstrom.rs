//! Helstrom minimum error probabilities for tensor powers of block-diagonal
//! states.
//!
//! `‖p₂B^{⊗M} − p₁A^{⊗M}‖₁` is evaluated without forming the tensor power.
//! After merging the block partitions of `A` and `B` into components, the
//! tensor power is block diagonal over component tuples and permuted
//! tuples contribute equally. Tuples touching a component where only one
//! state lives contribute a trace in closed form. For the remaining tuples
//! the operator lives in the span of the supports of `A^{⊗}` and `B^{⊗}`,
//! so its nonzero spectrum is that of `G^{1/2} W G^{1/2}` with `G` the Gram
//! matrix of the joint eigenbasis and `W = diag(p₂b, −p₁a)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::linalg::{hermitian_eigen, psd_sqrt, trace_norm, CMatrix, Spectrum};
use super::{merged_components, restrict, FockDensityMatrix};
use crate::error::{Error, Result};
use crate::scenario::Priors;

/// Limits on the tensor-power computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HelstromCaps {
    /// Largest admissible `dim^M` of the full tensor-power space.
    pub max_tensor_dim: u128,
    /// Largest reduced eigenproblem solved for a single component tuple.
    pub max_rank: usize,
    /// Largest dense matrix formed by [`helstrom_error_dense`].
    pub max_dense_dim: usize,
}

impl HelstromCaps {
    /// One-photon states: `3^L` up to `L = 12`.
    pub const CONDITIONAL: HelstromCaps = HelstromCaps {
        max_tensor_dim: 531_441,
        max_rank: 4096,
        max_dense_dim: 729,
    };
    /// Three-mode thermal states: `(c+1)^{3M}` up to cutoff 8 with `M = 2`
    /// or cutoff 6 with `M = 3`.
    pub const THERMAL: HelstromCaps = HelstromCaps {
        max_tensor_dim: 40_353_607,
        max_rank: 4096,
        max_dense_dim: 729,
    };
}

impl Default for HelstromCaps {
    fn default() -> Self {
        Self::THERMAL
    }
}

fn check_tensor_dim(dim: usize, m: u32, cap: u128) -> Result<()> {
    let dimension = (dim as u128).checked_pow(m).unwrap_or(u128::MAX);
    if dimension > cap {
        return Err(Error::DimensionCap { dimension, cap });
    }
    Ok(())
}

struct Component {
    a: Spectrum,
    b: Spectrum,
    /// `V†U`: overlaps between the supports of `B` and `A`.
    cross: CMatrix,
}

/// `½(1 − ‖p₂ρ₂^{⊗M} − p₁ρ₁^{⊗M}‖₁)`.
pub fn helstrom_error(
    rho1: &FockDensityMatrix,
    rho2: &FockDensityMatrix,
    priors: Priors,
    m: u32,
    caps: &HelstromCaps,
) -> Result<f64> {
    check_tensor_dim(rho1.dim(), m, caps.max_tensor_dim)?;
    let (p1, p2) = (priors.p1, priors.p2);
    if m == 0 {
        return Ok(0.5 * (1.0 - (p2 - p1).abs()));
    }
    let mut both = Vec::new();
    let (mut ta_both, mut tb_both, mut ta_only, mut tb_only) = (0.0, 0.0, 0.0, 0.0);
    for comp in merged_components(rho1, rho2)? {
        let a = Spectrum::of_psd(&restrict(rho1, &comp))?;
        let b = Spectrum::of_psd(&restrict(rho2, &comp))?;
        match (a.rank() > 0, b.rank() > 0) {
            (true, true) => {
                ta_both += a.trace();
                tb_both += b.trace();
                let cross = b.vectors.adjoint() * &a.vectors;
                both.push(Component { a, b, cross });
            }
            (true, false) => ta_only += a.trace(),
            (false, true) => tb_only += b.trace(),
            (false, false) => {}
        }
    }
    let mi = m as i32;
    let mut norm = p2 * ((tb_both + tb_only).powi(mi) - tb_both.powi(mi))
        + p1 * ((ta_both + ta_only).powi(mi) - ta_both.powi(mi));

    let mut counts = vec![0u32; both.len()];
    if !both.is_empty() {
        let ln_m_fact = ln_factorial(m);
        loop_multisets(&mut counts, m, 0, &mut |counts| -> Result<()> {
            let ln_w = ln_m_fact - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>();
            norm += ln_w.exp() * tuple_trace_norm(&both, counts, p1, p2, caps)?;
            Ok(())
        })?;
    }
    Ok((0.5 * (1.0 - norm)).clamp(0.0, 1.0))
}

/// Visits every composition of `total` into `counts.len()` parts.
fn loop_multisets<F>(counts: &mut [u32], total: u32, start: usize, visit: &mut F) -> Result<()>
where
    F: FnMut(&[u32]) -> Result<()>,
{
    if start + 1 == counts.len() {
        counts[start] = total;
        visit(counts)?;
        counts[start] = 0;
        return Ok(());
    }
    for c in (0..=total).rev() {
        counts[start] = c;
        loop_multisets(counts, total - c, start + 1, visit)?;
    }
    counts[start] = 0;
    Ok(())
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Trace norm of `p₂⊗B_{kᵢ} − p₁⊗A_{kᵢ}` for one tuple of components
/// with multiplicities `counts`.
fn tuple_trace_norm(both: &[Component], counts: &[u32], p1: f64, p2: f64, caps: &HelstromCaps) -> Result<f64> {
    let mut a_vals = vec![1.0];
    let mut b_vals = vec![1.0];
    let mut cross = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    let mut ra: u128 = 1;
    let mut rb: u128 = 1;
    for (comp, &c) in both.iter().zip(counts) {
        for _ in 0..c {
            ra *= comp.a.rank() as u128;
            rb *= comp.b.rank() as u128;
            if ra + rb > caps.max_rank as u128 {
                return Err(Error::DimensionCap {
                    dimension: ra + rb,
                    cap: caps.max_rank as u128,
                });
            }
            a_vals = kron_vec(&a_vals, &comp.a.values);
            b_vals = kron_vec(&b_vals, &comp.b.values);
            cross = cross.kronecker(&comp.cross);
        }
    }
    let (na, nb) = (a_vals.len(), b_vals.len());
    let n = na + nb;
    let mut gram = CMatrix::identity(n, n);
    for i in 0..nb {
        for j in 0..na {
            gram[(i, nb + j)] = cross[(i, j)];
            gram[(nb + j, i)] = cross[(i, j)].conj();
        }
    }
    let root = psd_sqrt(&gram);
    let mut weighted = root.clone();
    for (j, w) in b_vals.iter().map(|&b| p2 * b).chain(a_vals.iter().map(|&a| -p1 * a)).enumerate() {
        for i in 0..n {
            weighted[(i, j)] *= w;
        }
    }
    let core = &weighted * &root;
    let core = (&core + core.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(trace_norm(&core))
}

/// Helstrom error from explicitly formed dense tensor powers.
pub fn helstrom_error_dense(
    rho1: &FockDensityMatrix,
    rho2: &FockDensityMatrix,
    priors: Priors,
    m: u32,
    caps: &HelstromCaps,
) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: {} vs {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    check_tensor_dim(rho1.dim(), m, caps.max_dense_dim as u128)?;
    let (a, b) = (rho1.to_dense(), rho2.to_dense());
    let mut pa = CMatrix::identity(1, 1);
    let mut pb = CMatrix::identity(1, 1);
    for _ in 0..m {
        pa = pa.kronecker(&a);
        pb = pb.kronecker(&b);
    }
    let diff = pb * Complex64::new(priors.p2, 0.0) - pa * Complex64::new(priors.p1, 0.0);
    let (values, _) = hermitian_eigen(&diff);
    let norm: f64 = values.iter().map(|v| v.abs()).sum();
    Ok((0.5 * (1.0 - norm)).clamp(0.0, 1.0))
}

/// Minimum error probability conditioned on `L` detected photons.
pub fn conditional_helstrom(
    eta1: &FockDensityMatrix,
    eta2: &FockDensityMatrix,
    priors: Priors,
    l: u32,
    caps: &HelstromCaps,
) -> Result<f64> {
    helstrom_error(eta1, eta2, priors, l, caps)
}

/// Binomial mixture over photon counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialMixture {
    /// `Σ_{L ≤ L_exact} C(M,L)(1−ε)^{M−L}ε^L P_{e|L}`.
    pub value: f64,
    /// Upper bound on the omitted terms `L > L_exact`.
    pub tail_bound: f64,
    /// Largest photon count evaluated exactly.
    pub exact_up_to: u64,
}

/// `P_e = Σ_L C(M,L)(1−ε)^{M−L} ε^L P_{e|L}` with `P_{e|L}` from `cond`
/// for `L ≤ l_max`. Larger `L` are bounded by `max(p₁,p₂)e^{−Lξ_c}`.
pub fn unconditional_from_conditional<F>(
    epsilon: f64,
    m: u64,
    l_max: u64,
    xi_c: f64,
    priors: Priors,
    mut cond: F,
) -> Result<BinomialMixture>
where
    F: FnMut(u64) -> Result<f64>,
{
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let exact_up_to = l_max.min(m);
    let ln_pmf = |l: u64| -> f64 {
        let (lf, mf) = (l as f64, m as f64);
        let ln_binom = ln_gamma_int(m) - ln_gamma_int(l) - ln_gamma_int(m - l);
        let ln_eps = if l == 0 { 0.0 } else { lf * epsilon.ln() };
        let ln_rest = if m == l { 0.0 } else { (mf - lf) * (-epsilon).ln_1p() };
        ln_binom + ln_eps + ln_rest
    };
    let mut value = 0.0;
    for l in 0..=exact_up_to {
        let w = ln_pmf(l).exp();
        if w > 0.0 || l == 0 {
            value += w * cond(l)?;
        }
    }
    let mut tail_bound = 0.0;
    let pmax = priors.p1.max(priors.p2);
    for l in (exact_up_to + 1)..=m {
        let term = (ln_pmf(l) - l as f64 * xi_c).exp() * pmax;
        tail_bound += term;
        if term < 1e-300 && l as f64 > m as f64 * epsilon {
            break;
        }
    }
    Ok(BinomialMixture {
        value,
        tail_bound,
        exact_up_to,
    })
}

fn ln_gamma_int(n: u64) -> f64 {
    if n < 256 {
        return ln_factorial(n as u32);
    }
    // Stirling series for ln n!.
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * core::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
}
