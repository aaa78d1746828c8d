//! Seeded Monte Carlo receivers: outcome and photon-position sampling,
//! decision rules, and empirical error rates with Wilson intervals.
//!
//! Every trial draws from its own ChaCha8 stream selected by the trial
//! index and hypothesis, so estimates do not depend on how trials are
//! partitioned across workers.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::chernoff::{bspade_chernoff_exact, ln_cosh, sliver_chernoff_exact, upsilon};
use crate::error::{Error, Result};
use crate::psf::{PsfFamily, PsfModel};
use crate::scenario::{
    outcome_distribution, DerivedParams, DetectionScenario, Hypothesis, MeasurementKind, Outcome,
    OutcomeDistribution, Priors,
};
use crate::special::{jinc, sinc};

/// Two-sided 95% standard-normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Largest number of proposals per rejection-sampled photon.
pub const MAX_PROPOSALS: usize = 1_000_000;

/// Upper bound on `jinc²(ρ)(1+ρ²)^{3/2}/2`, the ratio of the Airy
/// intensity to the radial envelope `(1+ρ²)^{−3/2}/(2π)`.
pub const CIRC_ENVELOPE_BOUND: f64 = 1.8616;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionRule {
    LikelihoodRatio,
    /// Accept H₁ only if the second port never clicks.
    Simplified,
}

impl core::str::FromStr for DecisionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lrt" | "likelihood_ratio" => Ok(DecisionRule::LikelihoodRatio),
            "simplified" => Ok(DecisionRule::Simplified),
            other => Err(Error::InvalidParameter(format!("unknown decision rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub trials: u64,
    pub seed: u64,
    pub samples_m: u64,
    pub rule: DecisionRule,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.samples_m == 0 {
            return Err(Error::InvalidParameter("sample count M must be >= 1".into()));
        }
        Ok(())
    }
}

/// Empirical error rates of a receiver and decision rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub trials: u64,
    pub false_alarms: u64,
    pub misses: u64,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub pe_hat: f64,
    pub ci_alpha: (f64, f64),
    pub ci_beta: (f64, f64),
    pub analytic_alpha: Option<f64>,
    pub analytic_beta: Option<f64>,
}

impl ErrorEstimate {
    pub fn from_counts(
        trials: u64,
        false_alarms: u64,
        misses: u64,
        priors: Priors,
        analytic_alpha: Option<f64>,
        analytic_beta: Option<f64>,
    ) -> Self {
        let n = trials as f64;
        let alpha_hat = false_alarms as f64 / n;
        let beta_hat = misses as f64 / n;
        Self {
            trials,
            false_alarms,
            misses,
            alpha_hat,
            beta_hat,
            pe_hat: priors.p1 * alpha_hat + priors.p2 * beta_hat,
            ci_alpha: wilson_interval(false_alarms, trials, Z_95),
            ci_beta: wilson_interval(misses, trials, Z_95),
            analytic_alpha,
            analytic_beta,
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Generator for trial `trial` under `hypothesis`.
pub fn trial_rng(seed: u64, trial: u64, hypothesis: Hypothesis) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = match hypothesis {
        Hypothesis::H1 => 0,
        Hypothesis::H2 => 1,
    };
    rng.set_stream(2 * trial + h);
    rng
}

/// Categorical draw from a four-outcome distribution.
pub fn sample_outcome<R: RngCore + ?Sized>(dist: &OutcomeDistribution, rng: &mut R) -> Outcome {
    let u: f64 = rng.random();
    let p = dist.probs();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return Outcome::ALL[i];
        }
    }
    // Rounding left `u` above the cumulative sum: take the last possible outcome.
    let last = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    Outcome::ALL[last]
}

/// Position of a photon from `|ψ|²`, centred at the origin.
fn sample_psf_position<R: RngCore + ?Sized>(model: &PsfModel, rng: &mut R) -> Result<(f64, f64)> {
    match model.family() {
        PsfFamily::Gaussian => {
            let s = model.sigma();
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Ok((s * x, s * y))
        }
        PsfFamily::Rect => {
            let u = sample_sinc2(rng)?;
            let v = sample_sinc2(rng)?;
            Ok((model.sigma() * u, model.sigma_y() * v))
        }
        PsfFamily::Circ => {
            for _ in 0..MAX_PROPOSALS {
                let w: f64 = rng.random();
                let rho = ((1.0 - w).powi(-2) - 1.0).max(0.0).sqrt();
                let j = jinc(rho);
                let ratio = j * j * (1.0 + rho * rho).powf(1.5) / 2.0;
                let accept: f64 = rng.random();
                if accept * CIRC_ENVELOPE_BOUND < ratio {
                    let theta = 2.0 * PI * rng.random::<f64>();
                    let r = rho * model.sigma();
                    return Ok((r * theta.cos(), r * theta.sin()));
                }
            }
            Err(Error::RejectionCap(MAX_PROPOSALS))
        }
    }
}

/// Draw from `sinc²(u)/π` with a Cauchy proposal; `sinc²(u)(1+u²) ≤ 2`.
fn sample_sinc2<R: RngCore + ?Sized>(rng: &mut R) -> Result<f64> {
    for _ in 0..MAX_PROPOSALS {
        let w: f64 = rng.random();
        let u = (PI * (w - 0.5)).tan();
        let s = sinc(u);
        let accept: f64 = rng.random();
        if accept * 2.0 < s * s * (1.0 + u * u) {
            return Ok(u);
        }
    }
    Err(Error::RejectionCap(MAX_PROPOSALS))
}

/// Photon position under the two-source hypothesis: either source with
/// probability ½, then a draw from its displaced PSF.
pub fn sample_di_photon<R: RngCore + ?Sized>(model: &PsfModel, d: f64, rng: &mut R) -> Result<(f64, f64)> {
    let left = rng.random::<bool>();
    let (x, y) = sample_psf_position(model, rng)?;
    let shift = if left { -0.5 * d } else { 0.5 * d };
    Ok((x + shift, y))
}

/// Likelihood-ratio test on a record of outcome indices: H₂ iff
/// `Σ log(Λ₂/Λ₁) > log(p₁/p₂)`. An outcome impossible under one hypothesis
/// forces the other; ties go to H₁.
pub fn likelihood_ratio_decide(outcomes: &[usize], dist1: &[f64], dist2: &[f64], priors: Priors) -> Result<Hypothesis> {
    let mut llr = 0.0;
    let (mut forced1, mut forced2) = (false, false);
    for &z in outcomes {
        let (l1, l2) = match (dist1.get(z), dist2.get(z)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::InvalidParameter(format!("outcome index {z} out of range"))),
        };
        match (l1 > 0.0, l2 > 0.0) {
            (true, true) => llr += l2.ln() - l1.ln(),
            (false, true) => forced2 = true,
            (true, false) => forced1 = true,
            (false, false) => return Err(Error::UndefinedLikelihood(z)),
        }
    }
    decide_from_llr(llr, forced1, forced2, priors)
}

fn decide_from_llr(llr: f64, forced1: bool, forced2: bool, priors: Priors) -> Result<Hypothesis> {
    match (forced1, forced2) {
        (true, true) => Err(Error::ContradictoryRecord),
        (true, false) => Ok(Hypothesis::H1),
        (false, true) => Ok(Hypothesis::H2),
        (false, false) => {
            let threshold = priors.p1.ln() - priors.p2.ln();
            Ok(if llr > threshold { Hypothesis::H2 } else { Hypothesis::H1 })
        }
    }
}

/// H₂ iff any outcome has the second port on.
pub fn simplified_decide(outcomes: &[Outcome]) -> Hypothesis {
    if outcomes.iter().any(|o| o.second_port_on()) {
        Hypothesis::H2
    } else {
        Hypothesis::H1
    }
}

/// Miss probability of the simplified rule, `[Λ₂(off,off) + Λ₂(on,off)]^M`.
pub fn analytic_beta(dp: &DerivedParams, kind: MeasurementKind, m: u64) -> Result<f64> {
    let d = outcome_distribution(kind, Hypothesis::H2, dp)?;
    let stay = d.p_off_off + d.p_on_off;
    Ok((m as f64 * stay.ln()).exp())
}

/// Chernoff exponent of an on-off receiver.
pub fn receiver_exponent(dp: &DerivedParams, kind: MeasurementKind) -> Result<f64> {
    match kind {
        MeasurementKind::Bspade => Ok(bspade_chernoff_exact(dp).xi),
        MeasurementKind::Sliver => Ok(sliver_chernoff_exact(dp).xi),
        MeasurementKind::DirectImaging => Err(Error::UnsupportedMeasurement),
    }
}

/// Everything a single trial needs.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    kind: MeasurementKind,
    rule: DecisionRule,
    samples_m: u64,
    seed: u64,
    priors: Priors,
    epsilon: f64,
    d: f64,
    psf: PsfModel,
    dists: Option<[OutcomeDistribution; 2]>,
}

/// Decision errors of one trial under each hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub false_alarm: bool,
    pub miss: bool,
}

impl TrialSetup {
    pub fn new(scenario: &DetectionScenario, kind: MeasurementKind, config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let dists = match kind {
            MeasurementKind::DirectImaging => {
                if config.rule == DecisionRule::Simplified {
                    return Err(Error::UnsupportedRule);
                }
                None
            }
            _ => {
                let dp = scenario.derived()?;
                Some([
                    outcome_distribution(kind, Hypothesis::H1, &dp)?,
                    outcome_distribution(kind, Hypothesis::H2, &dp)?,
                ])
            }
        };
        Ok(Self {
            kind,
            rule: config.rule,
            samples_m: config.samples_m,
            seed: config.seed,
            priors: scenario.priors,
            epsilon: scenario.epsilon,
            d: scenario.d,
            psf: scenario.psf,
            dists,
        })
    }

    /// Runs trial `t` under both hypotheses.
    pub fn run(&self, t: u64) -> Result<TrialOutcome> {
        let d1 = self.decide(t, Hypothesis::H1)?;
        let d2 = self.decide(t, Hypothesis::H2)?;
        Ok(TrialOutcome {
            false_alarm: d1 == Hypothesis::H2,
            miss: d2 == Hypothesis::H1,
        })
    }

    fn decide(&self, t: u64, truth: Hypothesis) -> Result<Hypothesis> {
        let mut rng = trial_rng(self.seed, t, truth);
        match self.dists {
            Some(dists) => {
                let dist = match truth {
                    Hypothesis::H1 => &dists[0],
                    Hypothesis::H2 => &dists[1],
                };
                match self.rule {
                    DecisionRule::Simplified => {
                        for _ in 0..self.samples_m {
                            if sample_outcome(dist, &mut rng).second_port_on() {
                                return Ok(Hypothesis::H2);
                            }
                        }
                        Ok(Hypothesis::H1)
                    }
                    DecisionRule::LikelihoodRatio => {
                        let mut counts = [0u64; 4];
                        for _ in 0..self.samples_m {
                            counts[sample_outcome(dist, &mut rng).index()] += 1;
                        }
                        let (p1, p2) = (dists[0].probs(), dists[1].probs());
                        let mut llr = 0.0;
                        let (mut f1, mut f2) = (false, false);
                        for k in 0..4 {
                            if counts[k] == 0 {
                                continue;
                            }
                            match (p1[k] > 0.0, p2[k] > 0.0) {
                                (true, true) => llr += counts[k] as f64 * (p2[k].ln() - p1[k].ln()),
                                (false, true) => f2 = true,
                                (true, false) => f1 = true,
                                (false, false) => return Err(Error::UndefinedLikelihood(k)),
                            }
                        }
                        decide_from_llr(llr, f1, f2, self.priors)
                    }
                }
            }
            None => {
                let mut llr = 0.0;
                for _ in 0..self.samples_m {
                    if rng.random::<f64>() >= self.epsilon {
                        continue;
                    }
                    let (x, y) = match truth {
                        Hypothesis::H1 => sample_di_photon(&self.psf, 0.0, &mut rng)?,
                        Hypothesis::H2 => sample_di_photon(&self.psf, self.d, &mut rng)?,
                    };
                    llr += di_log_ratio(&self.psf, self.d, x, y)?;
                }
                decide_from_llr(llr, false, false, self.priors)
            }
        }
    }

    pub fn analytic(&self) -> Result<(Option<f64>, Option<f64>)> {
        match (self.kind, self.rule) {
            (MeasurementKind::DirectImaging, _) | (_, DecisionRule::LikelihoodRatio) => Ok((None, None)),
            (kind, DecisionRule::Simplified) => {
                let dp = DerivedParams::new(self.epsilon, &self.psf, self.d)?;
                Ok((Some(0.0), Some(analytic_beta(&dp, kind, self.samples_m)?)))
            }
        }
    }

    pub fn priors(&self) -> Priors {
        self.priors
    }
}

/// `log Υ(x,y;d) − log Υ(x,y;0)` for one detected photon.
fn di_log_ratio(model: &PsfModel, d: f64, x: f64, y: f64) -> Result<f64> {
    if model.family() == PsfFamily::Gaussian {
        let s2 = model.sigma() * model.sigma();
        return Ok(ln_cosh(x * d / (2.0 * s2)) - d * d / (8.0 * s2));
    }
    let l1 = model.intensity(x, y);
    let l2 = upsilon(model, x, y, d);
    match (l1 > 0.0, l2 > 0.0) {
        (true, true) => Ok(l2.ln() - l1.ln()),
        (false, true) => Ok(f64::INFINITY),
        (true, false) => Ok(f64::NEG_INFINITY),
        (false, false) => Err(Error::UndefinedLikelihood(0)),
    }
}

/// Runs `config.trials` trials under both hypotheses sequentially.
pub fn estimate_error(scenario: &DetectionScenario, kind: MeasurementKind, config: &SimulationConfig) -> Result<ErrorEstimate> {
    let setup = TrialSetup::new(scenario, kind, config)?;
    let (mut fa, mut miss) = (0u64, 0u64);
    for t in 0..config.trials {
        let o = setup.run(t)?;
        fa += o.false_alarm as u64;
        miss += o.miss as u64;
    }
    let (aa, ab) = setup.analytic()?;
    Ok(ErrorEstimate::from_counts(config.trials, fa, miss, scenario.priors, aa, ab))
}

/// Empirical error of the position likelihood-ratio test given exactly
/// `l` detected photons, for each `l` in `photon_counts`.
pub fn di_conditional_error_curve(
    model: &PsfModel,
    d: f64,
    priors: Priors,
    photon_counts: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(photon_counts.len());
    for (idx, &l) in photon_counts.iter().enumerate() {
        let mut errors = 0.0;
        for t in 0..trials {
            for truth in [Hypothesis::H1, Hypothesis::H2] {
                let mut rng = trial_rng(seed ^ ((idx as u64 + 1) << 40), t, truth);
                let mut llr = 0.0;
                for _ in 0..l {
                    let shift = if truth == Hypothesis::H1 { 0.0 } else { d };
                    let (x, y) = sample_di_photon(model, shift, &mut rng)?;
                    llr += di_log_ratio(model, d, x, y)?;
                }
                let decided = decide_from_llr(llr, false, false, priors)?;
                if decided != truth {
                    errors += match truth {
                        Hypothesis::H1 => priors.p1,
                        Hypothesis::H2 => priors.p2,
                    };
                }
            }
        }
        out.push(errors / trials as f64);
    }
    Ok(out)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Exponent fitted to `P_L ≈ C L^{−1/2} e^{−Lξ}`.
pub fn fit_exponent_with_prefactor(l: &[f64], p: &[f64]) -> f64 {
    let y: Vec<f64> = l.iter().zip(p).map(|(&l, &p)| p.ln() + 0.5 * l.ln()).collect();
    -fit_slope(l, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(30, 1000, Z_95);
        assert!(lo < 0.03 && 0.03 < hi);
        let (lo, hi) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn degenerate_distribution() {
        let dist = OutcomeDistribution::from_probs([1.0, 0.0, 0.0, 0.0]).unwrap();
        let mut rng = trial_rng(1, 0, Hypothesis::H1);
        for _ in 0..1000 {
            assert_eq!(sample_outcome(&dist, &mut rng), Outcome::OffOff);
        }
    }

    #[test]
    fn decision_rules() {
        let d1 = [1.0 / 1.1, 0.1 / 1.1, 0.0, 0.0];
        let d2 = [0.85, 0.1, 0.04, 0.01];
        let all_off = [0usize; 5];
        assert_eq!(likelihood_ratio_decide(&all_off, &d1, &d2, Priors::equal()).unwrap(), Hypothesis::H1);
        assert_eq!(likelihood_ratio_decide(&[0, 2, 0], &d1, &d2, Priors::equal()).unwrap(), Hypothesis::H2);
        assert_eq!(likelihood_ratio_decide(&[1, 1], &d1, &d1, Priors::equal()).unwrap(), Hypothesis::H1);
        let zero = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(
            likelihood_ratio_decide(&[3], &zero, &d1, Priors::equal()).unwrap_err(),
            Error::UndefinedLikelihood(3)
        );
        assert_eq!(simplified_decide(&[Outcome::OffOff, Outcome::OffOn]), Hypothesis::H2);
        assert_eq!(simplified_decide(&[Outcome::OnOff, Outcome::OffOff]), Hypothesis::H1);
    }

    #[test]
    fn beta_at_vanishing_overlap() {
        let dp = DerivedParams::from_overlaps(0.1, 0.0, 0.0).unwrap();
        let b = analytic_beta(&dp, MeasurementKind::Bspade, 100).unwrap();
        assert_relative_eq!(b, 1.05f64.powi(-200), max_relative = 1e-12);
    }

    #[test]
    fn slope_fit() {
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 4.0, 6.0];
        assert_relative_eq!(fit_slope(&x, &y), 2.0);
    }
}
