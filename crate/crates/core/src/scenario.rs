//! Problem instances, derived parameters and single-sample outcome
//! distributions of the on-off receivers.

use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::psf::PsfModel;

/// Prior probabilities of the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    pub p1: f64,
    pub p2: f64,
}

impl Priors {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&p1) && (0.0..=1.0).contains(&p2) && (p1 + p2 - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "priors must lie in [0, 1] and sum to 1, got ({p1}, {p2})"
            )));
        }
        Ok(Self { p1, p2 })
    }

    pub fn equal() -> Self {
        Self { p1: 0.5, p2: 0.5 }
    }
}

impl Default for Priors {
    fn default() -> Self {
        Self::equal()
    }
}

/// A full problem instance: one source of brightness ε versus two sources
/// of brightness ε/2 separated by `d` along the x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionScenario {
    pub epsilon: f64,
    pub d: f64,
    pub priors: Priors,
    pub psf: PsfModel,
    pub samples_m: u64,
}

impl DetectionScenario {
    pub fn new(epsilon: f64, d: f64, priors: Priors, psf: PsfModel, samples_m: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("separation must be finite and >= 0, got {d}")));
        }
        if samples_m == 0 {
            return Err(Error::InvalidParameter("sample count M must be positive".into()));
        }
        Ok(Self {
            epsilon,
            d,
            priors,
            psf,
            samples_m,
        })
    }

    pub fn derived(&self) -> Result<DerivedParams> {
        DerivedParams::new(self.epsilon, &self.psf, self.d)
    }
}

/// Quantities derived from the overlap function that enter every exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub epsilon: f64,
    pub delta_d: f64,
    pub delta_half: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub mu: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl DerivedParams {
    /// Parameters for brightness `epsilon` and separation `d` under `psf`.
    pub fn new(epsilon: f64, psf: &PsfModel, d: f64) -> Result<Self> {
        Self::from_overlaps(epsilon, psf.overlap(d), psf.overlap(0.5 * d))
    }

    /// Parameters from the overlap values δ(d) and δ(d/2) directly.
    pub fn from_overlaps(epsilon: f64, delta_d: f64, delta_half: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !(delta_d.abs() <= 1.0 && delta_half.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "overlaps must lie in [-1, 1], got delta(d) = {delta_d}, delta(d/2) = {delta_half}"
            )));
        }
        if delta_d == -1.0 {
            return Err(Error::DegenerateOverlap);
        }
        let mut mu = delta_half * (2.0 / (1.0 + delta_d)).sqrt();
        if mu.abs() > 1.0 {
            if mu.abs() - 1.0 > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "overlaps ({delta_d}, {delta_half}) give |mu| = {} > 1",
                    mu.abs()
                )));
            }
            mu = mu.signum();
        }
        let lambda_plus = 0.5 * (1.0 + delta_d);
        let lambda_minus = 0.5 * (1.0 - delta_d);
        Ok(Self {
            epsilon,
            delta_d,
            delta_half,
            eps_plus: lambda_plus * epsilon,
            eps_minus: lambda_minus * epsilon,
            mu,
            lambda_plus,
            lambda_minus,
        })
    }
}

/// Receiver used on each temporal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementKind {
    Bspade,
    Sliver,
    DirectImaging,
}

impl MeasurementKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::Bspade => "bspade",
            MeasurementKind::Sliver => "sliver",
            MeasurementKind::DirectImaging => "di",
        }
    }
}

impl core::str::FromStr for MeasurementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bspade" => Ok(MeasurementKind::Bspade),
            "sliver" => Ok(MeasurementKind::Sliver),
            "di" | "direct_imaging" => Ok(MeasurementKind::DirectImaging),
            other => Err(Error::InvalidParameter(format!("unknown measurement `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// One source of brightness ε.
    H1,
    /// Two sources of brightness ε/2 each.
    H2,
}

/// Joint click pattern of the two on-off detectors. The first slot is the
/// PSF-mode (B-SPADE) or symmetric (SLIVER) port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    OffOff = 0,
    OnOff = 1,
    OffOn = 2,
    OnOn = 3,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::OffOff, Outcome::OnOff, Outcome::OffOn, Outcome::OnOn];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Whether the second (orthogonal / antisymmetric) port clicked.
    pub fn second_port_on(self) -> bool {
        matches!(self, Outcome::OffOn | Outcome::OnOn)
    }
}

/// Probabilities of the four click patterns for one temporal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    pub p_off_off: f64,
    pub p_on_off: f64,
    pub p_off_on: f64,
    pub p_on_on: f64,
}

impl OutcomeDistribution {
    pub fn probs(&self) -> [f64; 4] {
        [self.p_off_off, self.p_on_off, self.p_off_on, self.p_on_on]
    }

    pub fn prob(&self, outcome: Outcome) -> f64 {
        self.probs()[outcome.index()]
    }

    pub fn from_probs(p: [f64; 4]) -> Result<Self> {
        let d = Self {
            p_off_off: p[0],
            p_on_off: p[1],
            p_off_on: p[2],
            p_on_on: p[3],
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.probs();
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvariantViolation(format!("not a distribution: {p:?}")));
        }
        Ok(())
    }
}

/// The single-sample outcome distribution of the on-off receiver `kind`
/// under `hypothesis`.
pub fn outcome_distribution(
    kind: MeasurementKind,
    hypothesis: Hypothesis,
    dp: &DerivedParams,
) -> Result<OutcomeDistribution> {
    let eps = dp.epsilon;
    let (ep, em, mu2) = (dp.eps_plus, dp.eps_minus, dp.mu * dp.mu);
    let a = (1.0 + ep) * (1.0 + em);
    let p = match (kind, hypothesis) {
        (MeasurementKind::DirectImaging, _) => return Err(Error::UnsupportedMeasurement),
        (_, Hypothesis::H1) => [1.0 / (1.0 + eps), eps / (1.0 + eps), 0.0, 0.0],
        (MeasurementKind::Bspade, Hypothesis::H2) => {
            let off_off = 1.0 / a;
            let on_off = mu2 * ep / (a * (1.0 + ep - mu2 * ep));
            let off_on = (1.0 / (1.0 + mu2 * ep) - off_off).max(0.0);
            let on_on = (1.0 - off_off - on_off - off_on).max(0.0);
            [off_off, on_off, off_on, on_on]
        }
        (MeasurementKind::Sliver, Hypothesis::H2) => [1.0 / a, ep / a, em / a, ep * em / a],
    };
    Ok(OutcomeDistribution {
        p_off_off: p[0],
        p_on_off: p[1],
        p_off_on: p[2],
        p_on_on: p[3],
    })
}

/// Port probabilities of a single detected photon in the weak-source model.
pub fn weak_outcome_distribution(
    kind: MeasurementKind,
    hypothesis: Hypothesis,
    dp: &DerivedParams,
) -> Result<(f64, f64)> {
    match (kind, hypothesis) {
        (MeasurementKind::DirectImaging, _) => Err(Error::UnsupportedMeasurement),
        (_, Hypothesis::H1) => Ok((1.0, 0.0)),
        (MeasurementKind::Bspade, Hypothesis::H2) => {
            let q = dp.delta_half * dp.delta_half;
            Ok((q, 1.0 - q))
        }
        (MeasurementKind::Sliver, Hypothesis::H2) => Ok((dp.lambda_plus, dp.lambda_minus)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derived_params_from_half_overlap() {
        let dp = DerivedParams::from_overlaps(0.1, 0.5, 0.8).unwrap();
        assert_relative_eq!(dp.eps_plus, 0.075, max_relative = 1e-15);
        assert_relative_eq!(dp.eps_minus, 0.025, max_relative = 1e-15);
        assert_relative_eq!(dp.lambda_plus + dp.lambda_minus, 1.0);
    }

    #[test]
    fn zero_separation() {
        let dp = DerivedParams::new(0.1, &PsfModel::gaussian(1.0).unwrap(), 0.0).unwrap();
        assert_eq!(dp.mu, 1.0);
        assert_eq!(dp.lambda_plus, 1.0);
        assert_eq!(dp.eps_minus, 0.0);
    }

    #[test]
    fn degenerate_overlap_is_rejected() {
        assert_eq!(
            DerivedParams::from_overlaps(0.1, -1.0, 0.0).unwrap_err(),
            Error::DegenerateOverlap
        );
    }

    #[test]
    fn table_rows() {
        let dp = DerivedParams::from_overlaps(0.1, 0.0, 0.0).unwrap();
        let h1 = outcome_distribution(MeasurementKind::Bspade, Hypothesis::H1, &dp).unwrap();
        assert_relative_eq!(h1.p_off_off, 1.0 / 1.1);
        assert_relative_eq!(h1.p_on_off, 0.1 / 1.1);
        let h2 = outcome_distribution(MeasurementKind::Sliver, Hypothesis::H2, &dp).unwrap();
        assert_relative_eq!(h2.p_off_off, 0.907_029_478_458_049_9, max_relative = 1e-12);
        assert!(outcome_distribution(MeasurementKind::DirectImaging, Hypothesis::H1, &dp).is_err());
    }
}
