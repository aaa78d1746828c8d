//! The four subcommands.

use std::io::Write;
use std::time::Instant;

use serde_json::{json, Value};
use twosrc_core::chernoff::{
    bspade_chernoff_exact, conditional_bspade, conditional_sliver, conditional_to_unconditional,
    di_conditional_exact, di_conditional_smalld, quantum_chernoff_exact, sliver_chernoff_exact,
};
use twosrc_core::montecarlo::{fit_slope, receiver_exponent, ErrorEstimate, SimulationConfig, TrialSetup};
use twosrc_core::states::{conditional_helstrom, helstrom_error, unconditional_from_conditional, HelstromCaps};
use twosrc_core::states::{build_eta, build_rho1, build_rho2, FockTruncation};
use twosrc_core::{DerivedParams, DetectionScenario, Error, MeasurementKind, PsfModel};

use crate::config::{Command, OutputFormat, RunConfig};
use crate::output::{format_number, json_number, round_json, Cell, Table};
use crate::parallel::{count_errors, ordered_map};
use crate::CliError;

/// Largest |closed form − quadrature| overlap residual accepted by `psf-check`.
pub const PSF_CHECK_TOLERANCE: f64 = 1e-8;

pub const EXPONENT_COLUMNS: [&str; 8] = [
    "d",
    "xi_quantum",
    "xi_bspade",
    "xi_sliver",
    "xi_c_bspade",
    "xi_c_sliver",
    "xi_c_di_smalld",
    "error",
];

pub const HELSTROM_COLUMNS: [&str; 8] = [
    "kind",
    "L",
    "M",
    "p_e",
    "rate",
    "successive_rate",
    "tail_bound",
    "error",
];

pub const SIMULATION_COLUMNS: [&str; 13] = [
    "M",
    "trials",
    "false_alarms",
    "misses",
    "alpha_hat",
    "beta_hat",
    "pe_hat",
    "ci_beta_lo",
    "ci_beta_hi",
    "analytic_alpha",
    "analytic_beta",
    "beta_outside_ci",
    "error",
];

pub enum Body {
    Table(Table),
    /// A report with its tabular part for CSV output.
    Report(Value, Table),
}

pub struct CommandOutput {
    pub body: Body,
    /// Set when a row failed or a check did not pass.
    pub failure: Option<String>,
}

impl CommandOutput {
    pub fn write(&self, format: OutputFormat, w: &mut dyn Write) -> Result<(), CliError> {
        match (&self.body, format) {
            (Body::Table(t), OutputFormat::Csv) | (Body::Report(_, t), OutputFormat::Csv) => t.write_csv(w),
            (Body::Table(t), OutputFormat::Json) => write_json(&t.to_json(), w),
            (Body::Report(v, _), OutputFormat::Json) => write_json(v, w),
        }
    }
}

fn write_json(v: &Value, w: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    match config.command {
        Command::Exponents => Ok(exponents(config)),
        Command::Simulate => simulate(config),
        Command::Helstrom => helstrom(config),
        Command::PsfCheck => psf_check(config),
    }
}

struct ExponentRow {
    d: f64,
    values: Result<[f64; 6], Error>,
    di_exact: Option<Result<f64, Error>>,
}

fn exponent_row(psf: &PsfModel, epsilon: f64, d: f64, di_exact: bool) -> ExponentRow {
    let values = DerivedParams::new(epsilon, psf, d).and_then(|dp| {
        Ok([
            quantum_chernoff_exact(&dp).xi,
            bspade_chernoff_exact(&dp).xi,
            sliver_chernoff_exact(&dp).xi,
            conditional_bspade(psf, d),
            conditional_sliver(psf, d),
            di_conditional_smalld(psf, d)?,
        ])
    });
    ExponentRow {
        d,
        values,
        di_exact: di_exact.then(|| di_conditional_exact(psf, d).map(|r| r.xi)),
    }
}

/// One row per grid point: exact thermal exponents, conditional
/// (per-photon) exponents and, optionally, the exact direct-imaging value.
pub fn exponents(config: &RunConfig) -> CommandOutput {
    let grid = config.sweep.points();
    let rows = ordered_map(&grid, |&d| exponent_row(&config.psf, config.epsilon, d, config.include_di_exact));
    let mut columns = EXPONENT_COLUMNS.to_vec();
    if config.include_di_exact {
        columns.push("xi_c_di_exact");
    }
    let mut table = Table::new(columns);
    let mut failures = 0;
    for row in rows {
        let mut messages = Vec::new();
        let mut cells = vec![Cell::Num(row.d)];
        match row.values {
            Ok(v) => cells.extend(v.iter().map(|&x| Cell::Num(x))),
            Err(e) => {
                cells.extend((0..6).map(|_| Cell::Num(f64::NAN)));
                messages.push(e.to_string());
            }
        }
        let di = match row.di_exact {
            Some(Ok(x)) => Some(x),
            Some(Err(e)) => {
                messages.push(format!("di exact: {e}"));
                Some(f64::NAN)
            }
            None => None,
        };
        if !messages.is_empty() {
            failures += 1;
        }
        cells.push(Cell::Text(messages.join("; ")));
        if let Some(x) = di {
            cells.push(Cell::Num(x));
        }
        table.push(cells);
    }
    CommandOutput {
        body: Body::Table(table),
        failure: (failures > 0).then(|| format!("{failures} row(s) failed")),
    }
}

fn estimate_json(m: u64, est: &ErrorEstimate, outside: Option<bool>) -> Value {
    let opt = |x: Option<f64>| x.map(json_number).unwrap_or(Value::Null);
    json!({
        "M": m,
        "trials": est.trials,
        "false_alarms": est.false_alarms,
        "misses": est.misses,
        "alpha_hat": est.alpha_hat,
        "beta_hat": est.beta_hat,
        "pe_hat": est.pe_hat,
        "ci_alpha": [est.ci_alpha.0, est.ci_alpha.1],
        "ci_beta": [est.ci_beta.0, est.ci_beta.1],
        "analytic_alpha": opt(est.analytic_alpha),
        "analytic_beta": opt(est.analytic_beta),
        "beta_outside_ci": outside,
    })
}

/// Exponent the simulated error rates should decay with.
fn module_exponent(config: &RunConfig, d: f64) -> Result<f64, Error> {
    let dp = DerivedParams::new(config.epsilon, &config.psf, d)?;
    match config.measurement {
        MeasurementKind::DirectImaging => {
            let xi_c = di_conditional_exact(&config.psf, d)?.xi;
            Ok(conditional_to_unconditional(config.epsilon, xi_c))
        }
        kind => receiver_exponent(&dp, kind),
    }
}

/// Monte Carlo error rates for every requested `M`.
pub fn simulate(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let start = Instant::now();
    let d = config.sweep.d_min;
    let mut table = Table::new(SIMULATION_COLUMNS);
    let mut results = Vec::new();
    let mut fit = (Vec::new(), Vec::new());
    let mut failures = Vec::new();
    for &m in &config.samples {
        let scenario = DetectionScenario::new(config.epsilon, d, config.priors, config.psf, m)?;
        let sim = SimulationConfig {
            trials: config.trials,
            seed: config.seed,
            samples_m: m,
            rule: config.rule,
        };
        let setup = TrialSetup::new(&scenario, config.measurement, &sim)?;
        let estimate = count_errors(&setup, config.trials).and_then(|(fa, miss)| {
            let (aa, ab) = setup.analytic()?;
            Ok(ErrorEstimate::from_counts(config.trials, fa, miss, config.priors, aa, ab))
        });
        match estimate {
            Ok(est) => {
                let outside = est.analytic_beta.map(|b| b < est.ci_beta.0 || b > est.ci_beta.1);
                if est.beta_hat > 0.0 {
                    fit.0.push(m as f64);
                    fit.1.push(est.beta_hat.ln());
                }
                results.push(estimate_json(m, &est, outside));
                let opt = |x: Option<f64>| Cell::Num(x.unwrap_or(f64::NAN));
                table.push(vec![
                    Cell::Int(m),
                    Cell::Int(est.trials),
                    Cell::Int(est.false_alarms),
                    Cell::Int(est.misses),
                    Cell::Num(est.alpha_hat),
                    Cell::Num(est.beta_hat),
                    Cell::Num(est.pe_hat),
                    Cell::Num(est.ci_beta.0),
                    Cell::Num(est.ci_beta.1),
                    opt(est.analytic_alpha),
                    opt(est.analytic_beta),
                    Cell::Text(outside.map(|o| o.to_string()).unwrap_or_default()),
                    Cell::Text(String::new()),
                ]);
            }
            Err(e) => {
                failures.push(format!("M={m}: {e}"));
                results.push(json!({"M": m, "error": e.to_string()}));
                let mut row = vec![Cell::Int(m), Cell::Int(config.trials)];
                row.extend(std::iter::repeat(Cell::Text(String::new())).take(10));
                row.push(Cell::Text(e.to_string()));
                table.push(row);
            }
        }
    }
    let fitted = (fit.0.len() >= 2).then(|| -fit_slope(&fit.0, &fit.1));
    let exponent = module_exponent(config, d);
    let mut report = json!({
        "command": "simulate",
        "psf": config.psf.family().name(),
        "sigma": config.psf.sigma(),
        "sigma_y": config.psf.sigma_y(),
        "epsilon": config.epsilon,
        "d": d,
        "priors": [config.priors.p1, config.priors.p2],
        "measurement": config.measurement.name(),
        "rule": match config.rule {
            twosrc_core::montecarlo::DecisionRule::LikelihoodRatio => "lrt",
            twosrc_core::montecarlo::DecisionRule::Simplified => "simplified",
        },
        "trials": config.trials,
        "seed": config.seed,
        "results": results,
        "fitted_exponent": fitted.map(json_number).unwrap_or(Value::Null),
        "module_exponent": exponent.as_ref().map(|&x| json_number(x)).unwrap_or(Value::Null),
        "wall_time_s": 0.0,
    });
    if let Err(e) = &exponent {
        report["module_exponent_error"] = Value::from(e.to_string());
    }
    round_json(&mut report);
    report["wall_time_s"] = Value::from(start.elapsed().as_secs_f64());
    Ok(CommandOutput {
        body: Body::Report(report, table),
        failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

fn empty() -> Cell {
    Cell::Text(String::new())
}

fn cap_message(e: Error, what: &str, caps: &HelstromCaps) -> CliError {
    match e {
        Error::DimensionCap { dimension, cap } => CliError::Compute(Error::InvalidParameter(format!(
            "{what}: tensor dimension {dimension} exceeds the {} cap max_tensor_dim = {cap}",
            if *caps == HelstromCaps::CONDITIONAL { "CONDITIONAL" } else { "THERMAL" }
        ))),
        other => CliError::Compute(other),
    }
}

/// Conditional Helstrom errors for `L = 0..=L_max`, the binomial aggregate
/// for each `M`, and thermal rows when a Fock cutoff is given.
pub fn helstrom(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let d = config.sweep.d_min;
    let dp = DerivedParams::new(config.epsilon, &config.psf, d)?;
    let (eta1, eta2) = build_eta(&dp)?;
    let caps = HelstromCaps::CONDITIONAL;
    let xi_c = conditional_bspade(&config.psf, d);
    let mut table = Table::new(HELSTROM_COLUMNS);
    let ls: Vec<u32> = (0..=config.l_max).collect();
    let conditional: Vec<f64> = ordered_map(&ls, |&l| conditional_helstrom(&eta1, &eta2, config.priors, l, &caps))
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| cap_message(e, &format!("L-max {}", config.l_max), &caps))?;
    for (l, &p) in conditional.iter().enumerate() {
        let rate = if l == 0 { empty() } else { Cell::Num(-p.ln() / l as f64) };
        let successive = if l == 0 { empty() } else { Cell::Num((conditional[l - 1] / p).ln()) };
        table.push(vec![
            Cell::Text("conditional".into()),
            Cell::Int(l as u64),
            empty(),
            Cell::Num(p),
            rate,
            successive,
            empty(),
            empty(),
        ]);
    }
    for &m in &config.samples {
        let mix = unconditional_from_conditional(config.epsilon, m, config.l_max as u64, xi_c, config.priors, |l| {
            Ok(conditional[l as usize])
        })?;
        table.push(vec![
            Cell::Text("unconditional".into()),
            Cell::Int(mix.exact_up_to),
            Cell::Int(m),
            Cell::Num(mix.value),
            Cell::Num(-mix.value.ln() / m as f64),
            empty(),
            Cell::Num(mix.tail_bound),
            empty(),
        ]);
    }
    let mut failures = Vec::new();
    if let Some(cutoff) = config.cutoff {
        let trunc = FockTruncation::new(cutoff);
        let states = build_rho1(&dp, &trunc).and_then(|r1| Ok((r1, build_rho2(&dp, &trunc)?)));
        let thermal_caps = HelstromCaps::THERMAL;
        for &m in &config.samples {
            let m32 = u32::try_from(m).unwrap_or(u32::MAX);
            let p = match &states {
                Ok((rho1, rho2)) => helstrom_error(rho1, rho2, config.priors, m32, &thermal_caps),
                Err(e) => Err(e.clone()),
            };
            match p {
                Ok(p) => table.push(vec![
                    Cell::Text("thermal".into()),
                    empty(),
                    Cell::Int(m),
                    Cell::Num(p),
                    Cell::Num(-(2.0 * p).ln() / m as f64),
                    empty(),
                    empty(),
                    empty(),
                ]),
                Err(e) => {
                    let msg = cap_message(e, &format!("thermal M={m} at cutoff {cutoff}"), &thermal_caps).to_string();
                    failures.push(msg.clone());
                    table.push(vec![
                        Cell::Text("thermal".into()),
                        empty(),
                        Cell::Int(m),
                        Cell::Num(f64::NAN),
                        Cell::Num(f64::NAN),
                        empty(),
                        empty(),
                        Cell::Text(msg),
                    ]);
                }
            }
        }
    }
    Ok(CommandOutput {
        body: Body::Table(table),
        failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

/// Normalization, `δ(0)`, and closed-form against quadrature overlaps.
pub fn psf_check(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let psf = config.psf;
    let norm = psf.normalization_by_quadrature()?;
    let delta0 = psf.overlap(0.0);
    let grid = config.sweep.points();
    let rows: Vec<Result<(f64, f64, f64), Error>> = ordered_map(&grid, |&d| {
        let q = psf.overlap_by_quadrature(d)?;
        Ok((d, psf.overlap(d), q))
    });
    let mut table = Table::new(["d", "closed_form", "quadrature", "residual"]);
    let mut points = Vec::new();
    let mut max_residual: f64 = 0.0;
    for row in rows {
        let (d, c, q) = row?;
        let r = (c - q).abs();
        max_residual = max_residual.max(r);
        table.push(vec![Cell::Num(d), Cell::Num(c), Cell::Num(q), Cell::Num(r)]);
        points.push(json!({"d": d, "closed_form": c, "quadrature": q, "residual": r}));
    }
    let norm_residual = (norm - 1.0).abs();
    let delta0_residual = (delta0 - 1.0).abs();
    let pass = max_residual < PSF_CHECK_TOLERANCE
        && norm_residual < PSF_CHECK_TOLERANCE
        && delta0_residual < PSF_CHECK_TOLERANCE;
    let mut report = json!({
        "command": "psf-check",
        "psf": psf.family().name(),
        "sigma": psf.sigma(),
        "sigma_y": psf.sigma_y(),
        "normalization": norm,
        "normalization_residual": norm_residual,
        "delta_zero": delta0,
        "delta_zero_residual": delta0_residual,
        "grid": points,
        "max_residual": max_residual,
        "tolerance": PSF_CHECK_TOLERANCE,
        "pass": pass,
    });
    round_json(&mut report);
    Ok(CommandOutput {
        body: Body::Report(report, table),
        failure: (!pass).then(|| {
            format!(
                "psf-check failed: max residual {}, normalization residual {}",
                format_number(max_residual),
                format_number(norm_residual)
            )
        }),
    })
}
