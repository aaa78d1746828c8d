//! Run configuration: a JSON file mirroring the command-line flags, with
//! flags taking precedence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twosrc_core::montecarlo::DecisionRule;
use twosrc_core::{MeasurementKind, PsfFamily, PsfModel, Priors};

use crate::CliError;

pub const DEFAULT_D_MIN: f64 = 0.0;
pub const DEFAULT_D_MAX: f64 = 6.0;
pub const DEFAULT_D_STEPS: usize = 200;
pub const DEFAULT_SAMPLES: [u64; 3] = [10, 50, 200];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Exponents,
    Simulate,
    Helstrom,
    PsfCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Every setting is optional so that a file and the flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct Settings {
    pub command: Option<Command>,
    pub psf: Option<String>,
    pub sigma: Option<f64>,
    pub sigma_y: Option<f64>,
    pub epsilon: Option<f64>,
    pub d: Option<f64>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub d_steps: Option<usize>,
    pub priors: Option<[f64; 2]>,
    pub samples: Option<Vec<u64>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub rule: Option<String>,
    pub measurement: Option<String>,
    pub cutoff: Option<usize>,
    #[serde(rename = "L_max", alias = "l_max")]
    pub l_max: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub include_di_exact: Option<bool>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            command: self.command.or(base.command),
            psf: self.psf.or(base.psf),
            sigma: self.sigma.or(base.sigma),
            sigma_y: self.sigma_y.or(base.sigma_y),
            epsilon: self.epsilon.or(base.epsilon),
            d: self.d.or(base.d),
            d_min: self.d_min.or(base.d_min),
            d_max: self.d_max.or(base.d_max),
            d_steps: self.d_steps.or(base.d_steps),
            priors: self.priors.or(base.priors),
            samples: self.samples.or(base.samples),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            rule: self.rule.or(base.rule),
            measurement: self.measurement.or(base.measurement),
            cutoff: self.cutoff.or(base.cutoff),
            l_max: self.l_max.or(base.l_max),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            include_di_exact: self.include_di_exact.or(base.include_di_exact),
        }
    }
}

/// Separation grid: a single point or an inclusive linear sweep of
/// `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub d_min: f64,
    pub d_max: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn new(d_min: f64, d_max: f64, steps: usize) -> Result<Self, CliError> {
        if !(d_min.is_finite() && d_max.is_finite()) || d_min < 0.0 {
            return Err(CliError::Usage(format!("invalid separation range [{d_min}, {d_max}]")));
        }
        if d_min > d_max {
            return Err(CliError::Usage(format!("d-min {d_min} exceeds d-max {d_max}")));
        }
        if steps == 0 {
            return Err(CliError::Usage("d-steps must be at least 1".into()));
        }
        if steps == 1 && d_min != d_max {
            return Err(CliError::Usage("a one-point sweep needs d-min = d-max".into()));
        }
        Ok(Self { d_min, d_max, steps })
    }

    pub fn single(d: f64) -> Result<Self, CliError> {
        Self::new(d, d, 1)
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.d_min];
        }
        let h = (self.d_max - self.d_min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.d_max } else { self.d_min + h * i as f64 })
            .collect()
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub psf: PsfModel,
    pub epsilon: f64,
    pub sweep: Sweep,
    pub priors: Priors,
    pub samples: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub rule: DecisionRule,
    pub measurement: MeasurementKind,
    /// Fock cutoff for thermal Helstrom rows; `None` skips them.
    pub cutoff: Option<usize>,
    pub l_max: u32,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub include_di_exact: bool,
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self, CliError> {
        let command = s.command.ok_or_else(|| CliError::Usage("no command given".into()))?;
        let family: PsfFamily = s
            .psf
            .as_deref()
            .unwrap_or("gaussian")
            .parse()
            .map_err(|e| CliError::Usage(format!("{e}")))?;
        let psf = PsfModel::new(family, s.sigma.unwrap_or(1.0), s.sigma_y)
            .map_err(|e| CliError::Usage(format!("{e}")))?;
        let epsilon = s.epsilon.unwrap_or(0.1);
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(CliError::Usage(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let sweep = match (s.d, s.d_min, s.d_max, s.d_steps) {
            (Some(d), None, None, None) => Sweep::single(d)?,
            (Some(_), ..) => return Err(CliError::Usage("--d conflicts with the sweep flags".into())),
            (None, lo, hi, n) => match command {
                Command::Exponents | Command::PsfCheck => Sweep::new(
                    lo.unwrap_or(DEFAULT_D_MIN),
                    hi.unwrap_or(DEFAULT_D_MAX),
                    n.unwrap_or(DEFAULT_D_STEPS),
                )?,
                Command::Simulate | Command::Helstrom => {
                    if lo.is_some() || hi.is_some() || n.is_some() {
                        return Err(CliError::Usage("this command takes a single --d".into()));
                    }
                    Sweep::single(1.0)?
                }
            },
        };
        let priors = match s.priors {
            Some([p1, p2]) => Priors::new(p1, p2).map_err(|e| CliError::Usage(format!("{e}")))?,
            None => Priors::equal(),
        };
        let samples = s.samples.unwrap_or_else(|| DEFAULT_SAMPLES.to_vec());
        if samples.is_empty() || samples.contains(&0) {
            return Err(CliError::Usage("sample counts must be positive".into()));
        }
        let trials = s.trials.unwrap_or(100_000);
        if trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        let rule: DecisionRule = s
            .rule
            .as_deref()
            .unwrap_or("simplified")
            .parse()
            .map_err(|e| CliError::Usage(format!("{e}")))?;
        let measurement: MeasurementKind = s
            .measurement
            .as_deref()
            .unwrap_or("bspade")
            .parse()
            .map_err(|e| CliError::Usage(format!("{e}")))?;
        let cutoff = s.cutoff;
        if cutoff == Some(0) {
            return Err(CliError::Usage("cutoff must be at least 1".into()));
        }
        let default_format = match command {
            Command::Simulate | Command::PsfCheck => OutputFormat::Json,
            Command::Exponents | Command::Helstrom => OutputFormat::Csv,
        };
        Ok(Self {
            command,
            psf,
            epsilon,
            sweep,
            priors,
            samples,
            trials,
            seed: s.seed.unwrap_or(1),
            rule,
            measurement,
            cutoff,
            l_max: s.l_max.unwrap_or(12),
            out: s.out,
            format: s.format.unwrap_or(default_format),
            include_di_exact: s.include_di_exact.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_is_inclusive() {
        let s = Sweep::new(0.0, 1.0, 5).unwrap();
        assert_eq!(s.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Sweep::single(0.4).unwrap().points(), vec![0.4]);
        assert!(Sweep::new(1.0, 0.0, 3).is_err());
        assert!(Sweep::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = Settings {
            epsilon: Some(0.2),
            seed: Some(5),
            ..Default::default()
        };
        let flags = Settings {
            command: Some(Command::Exponents),
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.epsilon, 0.2);
        assert_eq!(cfg.sweep.steps, DEFAULT_D_STEPS);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<Settings>(r#"{"epsilon": 0.1, "bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let ok: Settings = serde_json::from_str(r#"{"L_max": 8, "priors": [0.3, 0.7]}"#).unwrap();
        assert_eq!(ok.l_max, Some(8));
    }
}
