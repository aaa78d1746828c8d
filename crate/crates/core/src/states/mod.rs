//! Truncated Fock-space density matrices for the one- and two-source
//! hypotheses, Helstrom error probabilities and matrix-level Chernoff
//! exponents.
//!
//! Three-mode states are expressed in the (φ₁, φ₂, φ₃) basis: φ₁ is the
//! PSF mode, φ₃ the antisymmetric combination of the two displaced PSFs,
//! and φ₂ completes the symmetric combination. Basis index of
//! `|n₁, n₂, n₃⟩` is `(n₁ (c+1) + n₂)(c+1) + n₃` for cutoff `c`.

mod helstrom;
pub mod linalg;
mod oracle;

pub use helstrom::{
    conditional_helstrom, helstrom_error, helstrom_error_dense, unconditional_from_conditional,
    BinomialMixture, HelstromCaps,
};
pub use linalg::{trace_norm, CMatrix};
pub use oracle::{coherent_average_rho2, CoherentAverage};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::chernoff::{minimize_log_qs, ExponentResult};
use crate::error::{Error, Result};
use crate::scenario::DerivedParams;
use linalg::{hermiticity_defect, Spectrum};

/// Tensor-factor layout of a [`FockDensityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeStructure {
    /// One mode with photon numbers `0..=cutoff`.
    SingleMode { cutoff: usize },
    /// Modes φ₁, φ₂, φ₃, each with photon numbers `0..=cutoff`.
    ThreeMode { cutoff: usize },
    /// The one-photon subspace spanned by φ₁, φ₂, φ₃.
    OnePhoton,
    /// Vacuum followed by the one-photon subspace.
    VacuumOnePhoton,
    /// Unstructured.
    Generic,
}

/// Fock truncation policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockTruncation {
    pub cutoff: usize,
    pub max_deficit: f64,
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self {
            cutoff: 15,
            max_deficit: 1e-10,
        }
    }
}

impl FockTruncation {
    pub fn new(cutoff: usize) -> Self {
        Self {
            cutoff,
            ..Self::default()
        }
    }
}

/// One diagonal block: the rows/columns `indices` of the full matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub indices: Vec<usize>,
    pub matrix: CMatrix,
}

/// A block-diagonal, Hermitian, positive semidefinite matrix of trace
/// `1 − deficit`. Indices outside every block are zero rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    dim: usize,
    blocks: Vec<Block>,
    mode_structure: ModeStructure,
    deficit: f64,
}

impl FockDensityMatrix {
    /// Assembles a state from disjoint blocks and validates it.
    pub fn from_blocks(
        dim: usize,
        blocks: Vec<Block>,
        mode_structure: ModeStructure,
        deficit: f64,
    ) -> Result<Self> {
        let mut seen = vec![false; dim];
        for b in &blocks {
            if b.matrix.nrows() != b.indices.len() || b.matrix.ncols() != b.indices.len() {
                return Err(Error::InvalidParameter("block shape does not match its indices".into()));
            }
            for &i in &b.indices {
                if i >= dim || seen[i] {
                    return Err(Error::InvalidParameter(format!("block index {i} repeated or out of range")));
                }
                seen[i] = true;
            }
        }
        let rho = Self {
            dim,
            blocks,
            mode_structure,
            deficit,
        };
        rho.validate()?;
        Ok(rho)
    }

    /// Splits a dense matrix into its connected diagonal blocks.
    pub fn from_dense(m: &CMatrix, mode_structure: ModeStructure, deficit: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidParameter("density matrix must be square".into()));
        }
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != Complex64::new(0.0, 0.0) || m[(j, i)] != Complex64::new(0.0, 0.0) {
                    uf.union(i, j);
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let occupied = m[(i, i)] != Complex64::new(0.0, 0.0) || (0..n).any(|j| m[(i, j)] != Complex64::new(0.0, 0.0));
            if occupied {
                groups[uf.find(i)].push(i);
            }
        }
        let blocks = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|indices| {
                let matrix = CMatrix::from_fn(indices.len(), indices.len(), |r, c| m[(indices[r], indices[c])]);
                Block { indices, matrix }
            })
            .collect();
        Self::from_blocks(n, blocks, mode_structure, deficit)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn mode_structure(&self) -> ModeStructure {
        self.mode_structure
    }

    /// Probability mass lost to the Fock truncation.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.matrix.trace().re).sum()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            for (r, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    m[(i, j)] = b.matrix[(r, c)];
                }
            }
        }
        m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        for b in &self.blocks {
            if let (Some(r), Some(c)) = (
                b.indices.iter().position(|&k| k == i),
                b.indices.iter().position(|&k| k == j),
            ) {
                return b.matrix[(r, c)];
            }
        }
        Complex64::new(0.0, 0.0)
    }

    /// Checks Hermiticity (1e−12), positivity (−1e−10) and the trace.
    pub fn validate(&self) -> Result<()> {
        for b in &self.blocks {
            let h = hermiticity_defect(&b.matrix);
            if h > 1e-12 {
                return Err(Error::InvariantViolation(format!("matrix not Hermitian: defect {h:.3e}")));
            }
            Spectrum::of_psd(&b.matrix)?;
        }
        let t = self.trace();
        if (t - (1.0 - self.deficit)).abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "trace {t} differs from 1 - deficit = {}",
                1.0 - self.deficit
            )));
        }
        Ok(())
    }

    /// Photon-number distribution of one mode (0, 1 or 2) of a three-mode
    /// state.
    pub fn photon_numbers(&self, mode: usize) -> Result<Vec<f64>> {
        let ModeStructure::ThreeMode { cutoff } = self.mode_structure else {
            return Err(Error::InvalidParameter("photon numbers need a three-mode state".into()));
        };
        if mode > 2 {
            return Err(Error::InvalidParameter(format!("mode {mode} out of range")));
        }
        let side = cutoff + 1;
        let mut p = vec![0.0; side];
        for b in &self.blocks {
            for (r, &i) in b.indices.iter().enumerate() {
                let n = [i / (side * side), (i / side) % side, i % side][mode];
                p[n] += b.matrix[(r, r)].re;
            }
        }
        Ok(p)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Thermal photon-number probabilities `εⁿ/(1+ε)ⁿ⁺¹`, `n = 0..=cutoff`,
/// and the truncation deficit `(ε/(1+ε))^{cutoff+1}`.
pub fn thermal_populations(epsilon: f64, cutoff: usize) -> (Vec<f64>, f64) {
    let ratio = epsilon / (1.0 + epsilon);
    let mut p = Vec::with_capacity(cutoff + 1);
    let mut v = 1.0 / (1.0 + epsilon);
    for _ in 0..=cutoff {
        p.push(v);
        v *= ratio;
    }
    (p, ratio.powi(cutoff as i32 + 1))
}

fn check_deficit(deficit: f64, trunc: &FockTruncation) -> Result<()> {
    if deficit > trunc.max_deficit {
        return Err(Error::CutoffTooSmall {
            cutoff: trunc.cutoff,
            deficit,
            max_deficit: trunc.max_deficit,
        });
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    Ok(())
}

/// Single-mode thermal state of mean photon number `epsilon`.
pub fn thermal_state(epsilon: f64, trunc: &FockTruncation) -> Result<FockDensityMatrix> {
    check_epsilon(epsilon)?;
    let (p, deficit) = thermal_populations(epsilon, trunc.cutoff);
    check_deficit(deficit, trunc)?;
    let blocks = p
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(n, &v)| Block {
            indices: vec![n],
            matrix: CMatrix::from_element(1, 1, Complex64::new(v, 0.0)),
        })
        .collect();
    FockDensityMatrix::from_blocks(
        trunc.cutoff + 1,
        blocks,
        ModeStructure::SingleMode { cutoff: trunc.cutoff },
        1.0 - p.iter().sum::<f64>(),
    )
}

/// Output amplitudes on `|k, n−k⟩`, `k = 0..=n`, of a beamsplitter with
/// amplitude transmissivity `mu` fed with `|n, 0⟩`.
pub fn beamsplitter_number_vacuum(n: usize, mu: f64) -> Result<Vec<f64>> {
    if mu.is_nan() || mu.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!("|mu| must be <= 1, got {mu}")));
    }
    let nu = (1.0 - mu * mu).max(0.0).sqrt();
    let mut binom = 1.0f64;
    let mut amps = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        amps.push(binom.sqrt() * mu.powi(k as i32) * nu.powi((n - k) as i32));
    }
    Ok(amps)
}

fn three_mode_index(cutoff: usize, n1: usize, n2: usize, n3: usize) -> usize {
    let side = cutoff + 1;
    (n1 * side + n2) * side + n3
}

/// `ρ₁ = ρ_th(ε) ⊗ |0⟩⟨0| ⊗ |0⟩⟨0|`.
pub fn build_rho1(dp: &DerivedParams, trunc: &FockTruncation) -> Result<FockDensityMatrix> {
    check_epsilon(dp.epsilon)?;
    let c = trunc.cutoff;
    let (p, deficit) = thermal_populations(dp.epsilon, c);
    check_deficit(deficit, trunc)?;
    let blocks = p
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(n, &v)| Block {
            indices: vec![three_mode_index(c, n, 0, 0)],
            matrix: CMatrix::from_element(1, 1, Complex64::new(v, 0.0)),
        })
        .collect();
    FockDensityMatrix::from_blocks(
        (c + 1).pow(3),
        blocks,
        ModeStructure::ThreeMode { cutoff: c },
        1.0 - p.iter().sum::<f64>(),
    )
}

/// `ρ₂ = U[ρ_th(ε₊) ⊗ |0⟩⟨0|]U† ⊗ ρ_th(ε₋)`, compressed to the truncated
/// space. Blocks are labelled by the total photon number `N` of the first
/// two modes and by `n₃`.
pub fn build_rho2(dp: &DerivedParams, trunc: &FockTruncation) -> Result<FockDensityMatrix> {
    check_epsilon(dp.epsilon)?;
    let c = trunc.cutoff;
    let (p_plus, _) = thermal_populations(dp.eps_plus, 2 * c);
    let (p_minus, _) = thermal_populations(dp.eps_minus, c);
    let mut blocks = Vec::new();
    let mut kept_plus = 0.0;
    for (big_n, &pn) in p_plus.iter().enumerate() {
        if pn == 0.0 {
            continue;
        }
        let amps = beamsplitter_number_vacuum(big_n, dp.mu)?;
        let ks: Vec<usize> = (big_n.saturating_sub(c)..=big_n.min(c)).collect();
        kept_plus += pn * ks.iter().map(|&k| amps[k] * amps[k]).sum::<f64>();
        for (n3, &pm) in p_minus.iter().enumerate() {
            if pm == 0.0 {
                continue;
            }
            let w = pn * pm;
            let indices: Vec<usize> = ks.iter().map(|&k| three_mode_index(c, k, big_n - k, n3)).collect();
            let matrix = CMatrix::from_fn(ks.len(), ks.len(), |r, s| {
                Complex64::new(w * amps[ks[r]] * amps[ks[s]], 0.0)
            });
            blocks.push(Block { indices, matrix });
        }
    }
    let deficit = 1.0 - kept_plus * p_minus.iter().sum::<f64>();
    check_deficit(deficit, trunc)?;
    FockDensityMatrix::from_blocks((c + 1).pow(3), blocks, ModeStructure::ThreeMode { cutoff: c }, deficit)
}

/// One-photon states `η₁ = |φ₁⟩⟨φ₁|` and `η₂ = λ₊|s⟩⟨s| + λ₋|φ₃⟩⟨φ₃|`
/// with `|s⟩ = μ|φ₁⟩ + √(1−μ²)|φ₂⟩`.
pub fn build_eta(dp: &DerivedParams) -> Result<(FockDensityMatrix, FockDensityMatrix)> {
    let eta1 = FockDensityMatrix::from_dense(&eta1_matrix(), ModeStructure::OnePhoton, 0.0)?;
    let eta2 = FockDensityMatrix::from_dense(&eta2_matrix(dp), ModeStructure::OnePhoton, 0.0)?;
    Ok((eta1, eta2))
}

fn eta1_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    m
}

fn eta2_matrix(dp: &DerivedParams) -> CMatrix {
    let s = [dp.mu, (1.0 - dp.mu * dp.mu).max(0.0).sqrt()];
    let mut m = CMatrix::zeros(3, 3);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = Complex64::new(dp.lambda_plus * s[i] * s[j], 0.0);
        }
    }
    m[(2, 2)] = Complex64::new(dp.lambda_minus, 0.0);
    m
}

/// Weak-source states `(1−ε)|vac⟩⟨vac| ⊕ ε ηᵢ` on vacuum plus one photon.
pub fn build_weak_states(dp: &DerivedParams) -> Result<(FockDensityMatrix, FockDensityMatrix)> {
    let eps = dp.epsilon;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    let lift = |eta: CMatrix| {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = Complex64::new(1.0 - eps, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                m[(i + 1, j + 1)] = eta[(i, j)] * eps;
            }
        }
        m
    };
    Ok((
        FockDensityMatrix::from_dense(&lift(eta1_matrix()), ModeStructure::VacuumOnePhoton, 0.0)?,
        FockDensityMatrix::from_dense(&lift(eta2_matrix(dp)), ModeStructure::VacuumOnePhoton, 0.0)?,
    ))
}

/// Connected components of the union of both block partitions; each entry
/// is a sorted index list.
pub(crate) fn merged_components(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<Vec<Vec<usize>>> {
    if a.dim != b.dim {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: {} vs {}",
            a.dim, b.dim
        )));
    }
    let mut uf = UnionFind::new(a.dim);
    let mut present = vec![false; a.dim];
    for blk in a.blocks.iter().chain(&b.blocks) {
        for &i in &blk.indices {
            present[i] = true;
            uf.union(blk.indices[0], i);
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); a.dim];
    for i in 0..a.dim {
        if present[i] {
            groups[uf.find(i)].push(i);
        }
    }
    Ok(groups.into_iter().filter(|g| !g.is_empty()).collect())
}

/// Restriction of `rho` to the index set `component`.
pub(crate) fn restrict(rho: &FockDensityMatrix, component: &[usize]) -> CMatrix {
    let n = component.len();
    let mut m = CMatrix::zeros(n, n);
    for blk in &rho.blocks {
        let pos: Vec<Option<usize>> = blk
            .indices
            .iter()
            .map(|i| component.binary_search(i).ok())
            .collect();
        for (r, pr) in pos.iter().enumerate() {
            let Some(pr) = pr else { continue };
            for (c, pc) in pos.iter().enumerate() {
                if let Some(pc) = pc {
                    m[(*pr, *pc)] = blk.matrix[(r, c)];
                }
            }
        }
    }
    m
}

/// Spectral data for evaluating `tr(A^s B^{1−s})` at many `s`.
struct ChernoffTerms {
    /// `(ln α, ln β, |⟨uᵢ|vⱼ⟩|²)` over supports of A and B.
    terms: Vec<(f64, f64, f64)>,
}

impl ChernoffTerms {
    fn new(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<Self> {
        let mut terms = Vec::new();
        for comp in merged_components(a, b)? {
            let sa = Spectrum::of_psd(&restrict(a, &comp))?;
            let sb = Spectrum::of_psd(&restrict(b, &comp))?;
            if sa.rank() == 0 || sb.rank() == 0 {
                continue;
            }
            let overlaps = sa.vectors.adjoint() * &sb.vectors;
            for (i, &alpha) in sa.values.iter().enumerate() {
                for (j, &beta) in sb.values.iter().enumerate() {
                    let w = overlaps[(i, j)].norm_sqr();
                    if w > 0.0 {
                        terms.push((alpha.ln(), beta.ln(), w));
                    }
                }
            }
        }
        Ok(Self { terms })
    }

    fn qs(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(la, lb, w)| w * (s * la + (1.0 - s) * lb).exp())
            .sum()
    }
}

/// `tr(A^s B^{1−s})`, with `X⁰` the projector onto the support of `X`.
pub fn qs_matrix(a: &FockDensityMatrix, b: &FockDensityMatrix, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s must lie in [0, 1], got {s}")));
    }
    Ok(ChernoffTerms::new(a, b)?.qs(s))
}

/// Quantum Chernoff exponent `−log min_s tr(A^s B^{1−s})`.
pub fn quantum_chernoff(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<ExponentResult> {
    let t = ChernoffTerms::new(a, b)?;
    Ok(minimize_log_qs(|s| t.qs(s).ln()))
}

/// Conditional (one-photon) quantum Chernoff exponent of the η pair.
pub fn conditional_quantum_chernoff(
    eta1: &FockDensityMatrix,
    eta2: &FockDensityMatrix,
) -> Result<ExponentResult> {
    quantum_chernoff(eta1, eta2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_populations_and_deficit() {
        let rho = thermal_state(0.1, &FockTruncation::new(15)).unwrap();
        assert_relative_eq!(rho.entry(0, 0).re, 1.0 / 1.1, max_relative = 1e-15);
        assert_relative_eq!(rho.entry(1, 1).re, 0.1 / 1.21, max_relative = 1e-15);
        assert!(rho.deficit() < 1e-16);
        let vac = thermal_state(0.0, &FockTruncation::new(3)).unwrap();
        assert_eq!(vac.entry(0, 0).re, 1.0);
        assert_eq!(vac.blocks().len(), 1);
        let err = thermal_state(0.5, &FockTruncation::new(3)).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { .. }));
    }

    #[test]
    fn beamsplitter_amplitudes() {
        assert_eq!(beamsplitter_number_vacuum(1, 1.0).unwrap(), vec![0.0, 1.0]);
        let a = beamsplitter_number_vacuum(2, 0.5f64.sqrt()).unwrap();
        let sq: Vec<f64> = a.iter().map(|x| x * x).collect();
        for (x, y) in sq.iter().zip([0.25, 0.5, 0.25]) {
            assert_relative_eq!(*x, y, max_relative = 1e-14);
        }
        assert!(beamsplitter_number_vacuum(2, 1.1).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let dp = DerivedParams::from_overlaps(0.1, 0.4, 0.7).unwrap();
        let rho = build_rho2(&dp, &FockTruncation::new(8)).unwrap();
        let back = FockDensityMatrix::from_dense(&rho.to_dense(), rho.mode_structure(), rho.deficit()).unwrap();
        assert!((back.to_dense() - rho.to_dense()).norm() < 1e-15);
    }

    #[test]
    fn eta_pair() {
        let dp = DerivedParams::from_overlaps(0.1, 0.4, 0.7).unwrap();
        let (e1, e2) = build_eta(&dp).unwrap();
        assert_relative_eq!(e2.entry(0, 0).re, 0.49, max_relative = 1e-14);
        assert_relative_eq!(e1.trace(), 1.0);
        assert_relative_eq!(e2.trace(), 1.0, max_relative = 1e-15);
    }
}
