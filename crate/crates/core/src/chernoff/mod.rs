//! Chernoff exponents: exact thermal closed forms, conditional weak-source
//! exponents, the classical Chernoff minimization and direct imaging.

mod direct;
pub(crate) use direct::ln_cosh;

pub use direct::{
    di_conditional_exact, di_conditional_smalld, di_total_probability, kappa_integral,
    upsilon, upsilon_second_derivative_fd,
};

use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::optimize::minimize_scalar;
use crate::psf::PsfModel;
use crate::scenario::DerivedParams;

/// Tolerance on the Chernoff parameter `s`.
pub const S_TOL: f64 = 1e-8;

/// A Chernoff exponent with the minimizing `s` and the minimal `Q_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentResult {
    /// Exponent in nats per sample (or per photon for conditional values).
    pub xi: f64,
    pub s_star: f64,
    pub q_min: f64,
}

impl ExponentResult {
    fn from_log_q(log_q: f64, s_star: f64) -> Self {
        Self {
            xi: (-log_q).max(0.0),
            s_star,
            q_min: log_q.exp(),
        }
    }
}

/// Minimizes `log Q_s` over `s ∈ [0, 1]`.
pub fn minimize_log_qs<F>(log_qs: F) -> ExponentResult
where
    F: FnMut(f64) -> f64,
{
    let m = minimize_scalar(log_qs, 0.0, 1.0, S_TOL);
    ExponentResult::from_log_q(m.min, m.argmin)
}

fn ln_a(dp: &DerivedParams) -> f64 {
    dp.eps_plus.ln_1p() + dp.eps_minus.ln_1p()
}

/// `Q_s = tr(ρ₁^s ρ₂^{1−s})` for the exact thermal states.
pub fn qs_thermal(s: f64, dp: &DerivedParams) -> f64 {
    let (eps, ep, mu2) = (dp.epsilon, dp.eps_plus, dp.mu * dp.mu);
    let ln_a = ln_a(dp);
    let ln_p = eps.ln_1p() - ln_a;
    let bq = if ep == 0.0 || mu2 == 0.0 {
        0.0
    } else {
        let ln_b = (ep * mu2).ln() - ep.ln_1p();
        let ln_q = eps.ln() + ep.ln_1p() - ep.ln() - eps.ln_1p();
        (ln_b + s * ln_q).exp()
    };
    (-(ln_a + s * ln_p) - (-bq).ln_1p()).exp()
}

/// Quantum Chernoff exponent of the thermal pair; the minimum sits at `s = 0`.
pub fn quantum_chernoff_exact(dp: &DerivedParams) -> ExponentResult {
    let xi = dp.eps_minus.ln_1p() + (dp.eps_plus * (1.0 - dp.mu * dp.mu)).ln_1p();
    ExponentResult {
        xi,
        s_star: 0.0,
        q_min: (-xi).exp(),
    }
}

/// Classical Chernoff exponent of the B-SPADE outcome statistics,
/// minimized numerically over `s`.
pub fn bspade_chernoff_exact(dp: &DerivedParams) -> ExponentResult {
    let (eps, ep, mu2) = (dp.epsilon, dp.eps_plus, dp.mu * dp.mu);
    let ln_a = ln_a(dp);
    let ln_p = eps.ln_1p() - ln_a;
    let rest = (ep * (1.0 - mu2)).ln_1p();
    minimize_log_qs(|s| {
        let bq = if ep == 0.0 || mu2 == 0.0 {
            0.0
        } else {
            // b̃ = μ²ε₊/(1+ε₊−μ²ε₊), q̃ = ε/b̃
            let ln_b = (mu2 * ep).ln() - rest;
            let ln_q = eps.ln() - ln_b;
            (ln_b + s * ln_q).exp()
        };
        bq.ln_1p() - ln_a - s * ln_p
    })
}

/// Chernoff exponent of the SLIVER outcome statistics, `log(1 + ε₋)`.
pub fn sliver_chernoff_exact(dp: &DerivedParams) -> ExponentResult {
    let xi = dp.eps_minus.ln_1p();
    ExponentResult {
        xi,
        s_star: 0.0,
        q_min: (-xi).exp(),
    }
}

/// Conditional (per detected photon) B-SPADE exponent `−2 log|δ(d/2)|`;
/// infinite when δ(d/2) = 0.
pub fn conditional_bspade(model: &PsfModel, d: f64) -> f64 {
    let half = model.overlap(0.5 * d);
    if half == 0.0 {
        return f64::INFINITY;
    }
    if half.abs() > 0.5 {
        // log δ = log1p(−(1 − δ)) for δ close to 1.
        let c = model.overlap_complement(0.5 * d);
        if half > 0.0 {
            return -2.0 * (-c).ln_1p();
        }
    }
    -2.0 * half.abs().ln()
}

/// Conditional SLIVER exponent `−log((1 + δ(d))/2)`.
pub fn conditional_sliver(model: &PsfModel, d: f64) -> f64 {
    -(-0.5 * model.overlap_complement(d)).ln_1p()
}

/// Unconditional exponent from a conditional one via
/// `e^{−ξ} = 1 − ε + ε e^{−ξ_c}`.
pub fn conditional_to_unconditional(epsilon: f64, xi_c: f64) -> f64 {
    -(epsilon * (-xi_c).exp_m1()).ln_1p()
}

/// Classical Chernoff exponent between two distributions on a common
/// finite outcome space, using `0^s = 0` for every `s`.
pub fn generic_chernoff(dist1: &[f64], dist2: &[f64]) -> Result<ExponentResult> {
    if dist1.len() != dist2.len() || dist1.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "distributions must share a non-empty support, got lengths {} and {}",
            dist1.len(),
            dist2.len()
        )));
    }
    for dist in [dist1, dist2] {
        let sum: f64 = dist.iter().sum();
        if dist.iter().any(|&p| p.is_nan() || p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("not a normalized distribution: {dist:?}")));
        }
    }
    Ok(minimize_log_qs(|s| {
        let q: f64 = dist1
            .iter()
            .zip(dist2)
            .filter(|(&a, &b)| a > 0.0 && b > 0.0)
            .map(|(&a, &b)| (s * a.ln() + (1.0 - s) * b.ln()).exp())
            .sum();
        q.ln()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponents_at_vanishing_overlap() {
        let dp = DerivedParams::from_overlaps(0.1, 0.0, 0.0).unwrap();
        assert_relative_eq!(quantum_chernoff_exact(&dp).xi, 0.097_580_328_338_864_4, max_relative = 1e-12);
        assert_relative_eq!(sliver_chernoff_exact(&dp).xi, 0.048_790_164_169_432_2, max_relative = 1e-12);
        assert_relative_eq!(qs_thermal(0.0, &dp), 1.0 / (1.05 * 1.05), max_relative = 1e-14);
    }

    #[test]
    fn zero_separation_gives_zero() {
        let dp = DerivedParams::new(0.1, &PsfModel::gaussian(1.0).unwrap(), 0.0).unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert_relative_eq!(qs_thermal(s, &dp), 1.0, max_relative = 1e-15);
        }
        assert_eq!(bspade_chernoff_exact(&dp).xi, 0.0);
        assert_eq!(quantum_chernoff_exact(&dp).xi, 0.0);
    }

    #[test]
    fn conditional_values() {
        let g = PsfModel::gaussian(1.0).unwrap();
        assert_relative_eq!(conditional_bspade(&g, 0.4), 0.01, max_relative = 1e-14);
        assert_relative_eq!(conditional_sliver(&g, 1.0), 0.060_548_145_242_776_33, max_relative = 1e-12);
        let c = PsfModel::circ(1.0).unwrap();
        assert_eq!(conditional_bspade(&c, 0.0), 0.0);
        assert!(conditional_bspade(&c, 2.0 * 3.831_705_970_207_512_4).is_infinite()
            || conditional_bspade(&c, 2.0 * 3.831_705_970_207_512_4) > 50.0);
    }

    #[test]
    fn relation_series() {
        assert_relative_eq!(conditional_to_unconditional(1e-3, 0.01), 9.950_216_e-6, max_relative = 1e-5);
        assert_eq!(conditional_to_unconditional(0.2, 0.0), 0.0);
    }

    #[test]
    fn generic_identical() {
        let p = [0.2, 0.3, 0.5, 0.0];
        assert!(generic_chernoff(&p, &p).unwrap().xi.abs() < 1e-15);
        assert!(generic_chernoff(&p, &[0.5, 0.5]).is_err());
    }
}
