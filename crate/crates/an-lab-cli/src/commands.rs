//! The five data-producing subcommands. Each builds its full CSV in sweep
//! order and reports an exit code: 0 for success, 3 when some rows failed
//! (those rows carry `failed` in the region_label column).

use an_lab_core::design::{
    optimize_two_point_instantaneous, optimize_two_point_statistical, phase_threshold,
    region_classify, DesignReport, PhaseThreshold,
};
use an_lab_core::ser::{
    aser_mixture, non_informative_ser, ser_best_phase, ser_gaussian_an, ser_phase_amp,
    PowerMixture,
};
use an_lab_core::sim::{
    simulate_aser_rayleigh, simulate_instantaneous_design_over_fading,
    simulate_ser_fixed_channel, AnGenerator, RngSpec,
};

use crate::config::{DesignKind, Experiment, ThresholdPlan};
use crate::output::{fmt_sig, render_result_table, ResultRow};
use crate::CliError;

/// Rendered table plus the process exit code for this run.
pub struct CommandOutput {
    pub content: String,
    pub exit: i32,
}

fn ok(content: String) -> Result<CommandOutput, CliError> {
    Ok(CommandOutput { content, exit: 0 })
}

/// Distinct RNG stream per (sweep row, design slot) so curves are
/// uncorrelated yet reproducible from the single experiment seed.
fn stream_id(row: usize, slot: usize) -> u64 {
    (row as u64) * 16 + slot as u64
}

fn resolve_designs(
    exp: &Experiment,
    default: &[DesignKind],
    allowed: &[DesignKind],
    command: &str,
) -> Result<Vec<DesignKind>, CliError> {
    let kinds = match &exp.designs {
        Some(kinds) => kinds.clone(),
        None => default.to_vec(),
    };
    for kind in &kinds {
        if !allowed.contains(kind) {
            return Err(CliError::Config(format!(
                "design kind '{}' is not supported by the {command} command",
                kind.label()
            )));
        }
    }
    Ok(kinds)
}

/// Default a/sigma grid when no `[threshold]` section is given: the span
/// where the crossover moves from nonexistent to comfortably resolved.
fn default_threshold_plan() -> ThresholdPlan {
    let mut a_over_sigma = Vec::new();
    let mut k = 0usize;
    loop {
        let v = 0.5 + 0.1 * k as f64;
        if v > 10.0 + 1e-9 {
            break;
        }
        a_over_sigma.push(v);
        k += 1;
    }
    ThresholdPlan {
        modulations: vec![4, 16, 64],
        a_over_sigma,
    }
}

/// `threshold`: phase-crossover amplitude per modulation order over an
/// a/sigma grid. Runs with built-in defaults when no config is supplied.
pub fn cmd_threshold(exp: Option<&Experiment>) -> Result<CommandOutput, CliError> {
    let plan = match exp.and_then(|e| e.threshold.clone()) {
        Some(plan) => plan,
        None => default_threshold_plan(),
    };
    let mut content = String::from("modulation,a_over_sigma,threshold\n");
    for &order in &plan.modulations {
        for &ratio in &plan.a_over_sigma {
            let cell = match phase_threshold(ratio, order).map_err(to_runtime)? {
                PhaseThreshold::Crossover(t) => fmt_sig(t),
                PhaseThreshold::NoCrossover => String::new(),
            };
            content.push_str(&format!("{order},{},{cell}\n", fmt_sig(ratio)));
        }
    }
    ok(content)
}

/// `ser-curve`: fixed-channel SER versus AN amplitude (in noise-deviation
/// units) for single-phase designs, analytic plus simulation.
pub fn cmd_ser_curve(exp: &Experiment) -> Result<CommandOutput, CliError> {
    let ctx = exp.fixed_context()?;
    let z_grid = exp
        .z_sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("ser-curve needs a [zsweep] section".into()))?;
    let designs = resolve_designs(
        exp,
        &[
            DesignKind::DeterministicRotated,
            DesignKind::DeterministicQam,
            DesignKind::BestPhase,
        ],
        &[
            DesignKind::DeterministicRotated,
            DesignKind::DeterministicQam,
            DesignKind::BestPhase,
        ],
        "ser-curve",
    )?;

    let sigma = ctx.noise.sigma();
    let theta_align = ctx.channel.h.arg() - ctx.channel.g.arg();
    let mut rows = Vec::new();
    for (row_idx, &t) in z_grid.iter().enumerate() {
        let z_amp = t * sigma;
        let power = z_amp * z_amp;
        for (slot, &kind) in designs.iter().enumerate() {
            let mut row = ResultRow {
                coord: t,
                design: kind.label(),
                x1: Some(power),
                x2: Some(power),
                p: Some(1.0),
                ..ResultRow::default()
            };
            match kind {
                DesignKind::DeterministicRotated | DesignKind::DeterministicQam => {
                    let theta = if kind == DesignKind::DeterministicRotated {
                        0.0
                    } else {
                        std::f64::consts::FRAC_PI_4
                    };
                    let label = if kind == DesignKind::DeterministicRotated {
                        "rotated-qam"
                    } else {
                        "qam"
                    };
                    row.phase1 = Some(label);
                    row.phase2 = Some(label);
                    row.ser_analytic = Some(ser_phase_amp(&ctx, z_amp, theta));
                    let gen = AnGenerator::Deterministic {
                        power,
                        theta_z: theta_align + theta,
                    };
                    let est = simulate_ser_fixed_channel(
                        &ctx,
                        &gen,
                        exp.trials,
                        RngSpec::new(exp.seed, stream_id(row_idx, slot)),
                    )
                    .map_err(to_runtime)?;
                    row.ser_sim = Some(est.mean);
                    row.ci_half_width = Some(est.half_width_95);
                }
                DesignKind::BestPhase => {
                    let (value, choice) = ser_best_phase(&ctx, z_amp);
                    row.phase1 = Some(choice.label());
                    row.phase2 = Some(choice.label());
                    row.ser_analytic = Some(value);
                }
                _ => unreachable!("filtered by resolve_designs"),
            }
            rows.push(row);
        }
    }
    ok(render_result_table("z_over_sigma", &rows))
}

/// `power-opt`: optimal two-point design parameters across the AN budget
/// sweep, with region labels, alongside single-phase baselines. Analytic
/// only; no simulation columns are filled.
pub fn cmd_power_opt(exp: &Experiment) -> Result<CommandOutput, CliError> {
    let ctx = exp.fixed_context()?;
    let budgets = exp.ez_budgets()?;
    if budgets.len() < 3 {
        return Err(CliError::Config(
            "power-opt needs at least 3 sweep points to classify regions".into(),
        ));
    }
    let designs = resolve_designs(
        exp,
        &[
            DesignKind::Optimal,
            DesignKind::DeterministicRotated,
            DesignKind::DeterministicQam,
            DesignKind::NonInformative,
        ],
        &[
            DesignKind::Optimal,
            DesignKind::DeterministicRotated,
            DesignKind::DeterministicQam,
            DesignKind::NonInformative,
        ],
        "power-opt",
    )?;

    let mut failed = false;
    let mut reports: Vec<Option<DesignReport<f64>>> = Vec::with_capacity(budgets.len());
    for &(_, p_bar) in &budgets {
        match optimize_two_point_instantaneous(p_bar, &ctx) {
            Ok(report) => reports.push(Some(report)),
            Err(_) => {
                failed = true;
                reports.push(None);
            }
        }
    }
    let labels: Option<Vec<&'static str>> = if failed {
        None
    } else {
        let sweep: Vec<(f64, DesignReport<f64>)> = budgets
            .iter()
            .zip(&reports)
            .map(|(&(_, p_bar), r)| (p_bar, r.clone().expect("no failures here")))
            .collect();
        Some(
            region_classify(&sweep)
                .map_err(to_runtime)?
                .into_iter()
                .map(|l| l.label())
                .collect(),
        )
    };

    let guess_bound = non_informative_ser::<f64>(exp.order);
    let mut rows = Vec::new();
    for (row_idx, &(db, p_bar)) in budgets.iter().enumerate() {
        for &kind in &designs {
            let mut row = ResultRow {
                coord: db,
                design: kind.label(),
                ..ResultRow::default()
            };
            match kind {
                DesignKind::Optimal => match &reports[row_idx] {
                    Some(report) => {
                        row.x1 = Some(report.law.x1);
                        row.x2 = Some(report.law.x2);
                        row.p = Some(report.law.p);
                        row.phase1 = report.law.phase1.map(|c| c.label());
                        row.phase2 = report.law.phase2.map(|c| c.label());
                        row.ser_analytic = Some(report.achieved_ser);
                        row.region_label = labels.as_ref().map(|l| l[row_idx].to_string());
                    }
                    None => row.region_label = Some("failed".to_string()),
                },
                DesignKind::DeterministicRotated | DesignKind::DeterministicQam => {
                    let (theta, label) = if kind == DesignKind::DeterministicRotated {
                        (0.0, "rotated-qam")
                    } else {
                        (std::f64::consts::FRAC_PI_4, "qam")
                    };
                    row.x1 = Some(p_bar);
                    row.x2 = Some(p_bar);
                    row.p = Some(1.0);
                    row.phase1 = Some(label);
                    row.phase2 = Some(label);
                    row.ser_analytic = Some(ser_phase_amp(&ctx, p_bar.sqrt(), theta));
                }
                DesignKind::NonInformative => row.ser_analytic = Some(guess_bound),
                _ => unreachable!("filtered by resolve_designs"),
            }
            rows.push(row);
        }
    }
    Ok(CommandOutput {
        content: render_result_table("ez_over_n0_db", &rows),
        exit: if failed { 3 } else { 0 },
    })
}

/// `ser-vs-ez`: fixed-channel SER versus the AN budget for the optimal
/// two-point design and reference designs, analytic plus simulation.
pub fn cmd_ser_vs_ez(exp: &Experiment) -> Result<CommandOutput, CliError> {
    let ctx = exp.fixed_context()?;
    let budgets = exp.ez_budgets()?;
    let designs = resolve_designs(
        exp,
        &[
            DesignKind::Optimal,
            DesignKind::Gaussian,
            DesignKind::None,
            DesignKind::NonInformative,
        ],
        &[
            DesignKind::Optimal,
            DesignKind::Gaussian,
            DesignKind::None,
            DesignKind::NonInformative,
        ],
        "ser-vs-ez",
    )?;

    let theta_h = ctx.channel.h.arg();
    let theta_g = ctx.channel.g.arg();
    let no_an = ser_phase_amp(&ctx, 0.0, 0.0);
    let guess_bound = non_informative_ser::<f64>(exp.order);
    let mut failed = false;
    let mut rows = Vec::new();
    for (row_idx, &(db, p_bar)) in budgets.iter().enumerate() {
        for (slot, &kind) in designs.iter().enumerate() {
            let mut row = ResultRow {
                coord: db,
                design: kind.label(),
                ..ResultRow::default()
            };
            match kind {
                DesignKind::Optimal => match optimize_two_point_instantaneous(p_bar, &ctx) {
                    Ok(report) => {
                        row.x1 = Some(report.law.x1);
                        row.x2 = Some(report.law.x2);
                        row.p = Some(report.law.p);
                        row.phase1 = report.law.phase1.map(|c| c.label());
                        row.phase2 = report.law.phase2.map(|c| c.label());
                        row.ser_analytic = Some(report.achieved_ser);
                        let gen = AnGenerator::TwoPoint {
                            law: report.law,
                            theta_h,
                            theta_g,
                        };
                        let est = simulate_ser_fixed_channel(
                            &ctx,
                            &gen,
                            exp.trials,
                            RngSpec::new(exp.seed, stream_id(row_idx, slot)),
                        )
                        .map_err(to_runtime)?;
                        row.ser_sim = Some(est.mean);
                        row.ci_half_width = Some(est.half_width_95);
                    }
                    Err(_) => {
                        failed = true;
                        row.region_label = Some("failed".to_string());
                    }
                },
                DesignKind::Gaussian => {
                    row.ser_analytic = Some(ser_gaussian_an(&ctx, p_bar).map_err(to_runtime)?);
                    let gen = AnGenerator::Gaussian { mean_power: p_bar };
                    let est = simulate_ser_fixed_channel(
                        &ctx,
                        &gen,
                        exp.trials,
                        RngSpec::new(exp.seed, stream_id(row_idx, slot)),
                    )
                    .map_err(to_runtime)?;
                    row.ser_sim = Some(est.mean);
                    row.ci_half_width = Some(est.half_width_95);
                }
                DesignKind::None => row.ser_analytic = Some(no_an),
                DesignKind::NonInformative => row.ser_analytic = Some(guess_bound),
                _ => unreachable!("filtered by resolve_designs"),
            }
            rows.push(row);
        }
    }
    Ok(CommandOutput {
        content: render_result_table("ez_over_n0_db", &rows),
        exit: if failed { 3 } else { 0 },
    })
}

/// `aser`: Rayleigh-fading average SER versus the AN budget for statistical
/// designs, analytic (where a closed form exists) plus simulation. Rayleigh
/// runs redraw the channel every symbol so the binomial confidence interval
/// stays exact.
pub fn cmd_aser(exp: &Experiment, with_instantaneous: bool) -> Result<CommandOutput, CliError> {
    let sctx = exp.statistical_context()?;
    let budgets = exp.ez_budgets()?;
    let mut defaults = vec![
        DesignKind::StatisticalOptimal,
        DesignKind::UniformPower,
        DesignKind::ExponentialPower,
        DesignKind::Gaussian,
        DesignKind::NonInformative,
    ];
    if with_instantaneous {
        defaults.push(DesignKind::InstantaneousExpectation);
    }
    let designs = resolve_designs(
        exp,
        &defaults,
        &[
            DesignKind::StatisticalOptimal,
            DesignKind::UniformPower,
            DesignKind::ExponentialPower,
            DesignKind::Gaussian,
            DesignKind::NonInformative,
            DesignKind::InstantaneousExpectation,
        ],
        "aser",
    )?;

    let draws = (exp.trials / 2500).clamp(200, 2000);
    let guess_bound = non_informative_ser::<f64>(exp.order);
    let mut failed = false;
    let mut rows = Vec::new();
    for (row_idx, &(db, p_bar)) in budgets.iter().enumerate() {
        for (slot, &kind) in designs.iter().enumerate() {
            let rng = RngSpec::new(exp.seed, stream_id(row_idx, slot));
            let mut row = ResultRow {
                coord: db,
                design: kind.label(),
                ..ResultRow::default()
            };
            match kind {
                DesignKind::StatisticalOptimal => {
                    match optimize_two_point_statistical(p_bar, &sctx) {
                        Ok(report) => {
                            row.x1 = Some(report.law.x1);
                            row.x2 = Some(report.law.x2);
                            row.p = Some(report.law.p);
                            row.ser_analytic = Some(report.achieved_ser);
                            let gen = AnGenerator::TwoPoint {
                                law: report.law,
                                theta_h: 0.0,
                                theta_g: 0.0,
                            };
                            let est = simulate_aser_rayleigh(&sctx, &gen, exp.trials, 1, rng)
                                .map_err(to_runtime)?;
                            row.ser_sim = Some(est.mean);
                            row.ci_half_width = Some(est.half_width_95);
                        }
                        Err(_) => {
                            failed = true;
                            row.region_label = Some("failed".to_string());
                        }
                    }
                }
                DesignKind::UniformPower | DesignKind::ExponentialPower => {
                    let (mixture, gen) = if kind == DesignKind::UniformPower {
                        (
                            PowerMixture::Uniform,
                            AnGenerator::UniformPower { mean_power: p_bar },
                        )
                    } else {
                        (
                            PowerMixture::Exponential,
                            AnGenerator::ExponentialPower { mean_power: p_bar },
                        )
                    };
                    row.ser_analytic =
                        Some(aser_mixture(&sctx, mixture, p_bar).map_err(to_runtime)?);
                    let est = simulate_aser_rayleigh(&sctx, &gen, exp.trials, 1, rng)
                        .map_err(to_runtime)?;
                    row.ser_sim = Some(est.mean);
                    row.ci_half_width = Some(est.half_width_95);
                }
                DesignKind::Gaussian => {
                    let gen = AnGenerator::Gaussian { mean_power: p_bar };
                    let est = simulate_aser_rayleigh(&sctx, &gen, exp.trials, 1, rng)
                        .map_err(to_runtime)?;
                    row.ser_sim = Some(est.mean);
                    row.ci_half_width = Some(est.half_width_95);
                }
                DesignKind::InstantaneousExpectation => {
                    let est = simulate_instantaneous_design_over_fading(&sctx, p_bar, draws, rng)
                        .map_err(to_runtime)?;
                    row.ser_sim = Some(est.mean);
                    row.ci_half_width = Some(est.half_width_95);
                }
                DesignKind::NonInformative => row.ser_analytic = Some(guess_bound),
                _ => unreachable!("filtered by resolve_designs"),
            }
            rows.push(row);
        }
    }
    Ok(CommandOutput {
        content: render_result_table("ez_over_n0_db", &rows),
        exit: if failed { 3 } else { 0 },
    })
}

fn to_runtime(e: an_lab_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Unwraps the parsed config for commands that cannot run without one.
pub fn require_config<'a>(
    config: &'a Option<Experiment>,
    cmd: &str,
) -> Result<&'a Experiment, CliError> {
    config
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("the {cmd} command needs --config <file>")))
}
