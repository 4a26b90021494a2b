//! Experiment drivers: each produces a CSV table, a human summary and a
//! list of hard checks that gate the process exit code.

use crate::config::ExperimentConfig;
use splitsim::analysis::{
    error_vs_reference, leading_term_fit, observed_order, ErrorRecord, LeadingTermFit,
    LeadingTermScheme, Norm, OrderOutcome,
};
use splitsim::error::{Result, SplitError};
use splitsim::linalg::{expm, DenseMatrix, TimeGrid, Vector};
use splitsim::models::{
    gaussian_bump, reference_solution, run_transport_iterative, Example1Problem,
};
use splitsim::quadrature::{integrate, rule_coefficients};
use splitsim::rng::SplitMix64;
use splitsim::schemes::{run_scheme, IterativeConfig, IterativeMode, SchemeKind, Trajectory};

/// One hard acceptance check evaluated inside a command.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Output of a command: a table plus summary lines and checks.
#[derive(Debug, Clone)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            summary: Vec::new(),
            checks: Vec::new(),
        }
    }

    /// Render as CSV with a header row, '.' decimals and 6 significant
    /// digits in scientific notation for floating-point cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Render as whitespace-separated data blocks, one per leading label
    /// pair, for direct consumption by plotting tools.
    pub fn to_gnuplot(&self) -> String {
        let mut out = String::new();
        let mut current_key: Option<String> = None;
        for row in &self.rows {
            let key = row
                .iter()
                .take(2.min(row.len().saturating_sub(1)))
                .cloned()
                .collect::<Vec<_>>()
                .join(" ");
            if current_key.as_deref() != Some(key.as_str()) {
                if current_key.is_some() {
                    out.push('\n');
                }
                out.push_str(&format!("# {key}\n"));
                current_key = Some(key);
            }
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

/// Render an error record as a (scheme, mode, dt, iteration, error) row.
/// The record's norm label is implicit: every table in this driver measures
/// final-time errors in the same norm, stated in the command summary.
fn error_row(record: &ErrorRecord, mode: &str) -> Vec<String> {
    vec![
        record.scheme.clone(),
        mode.to_string(),
        sci(record.dt),
        record.iterations.to_string(),
        sci(record.error),
    ]
}

/// True when the error sequence decreases strictly until it enters the
/// floor band (a small factor of the final value) and stays there. Near the
/// floor the pointwise error can dip through a zero crossing as the iterate
/// converges to the quadrature-limited fixed point, so the band is anchored
/// at the final value rather than the minimum.
fn decreases_to_floor(errs: &[f64]) -> bool {
    let band = 5.0 * errs.last().copied().unwrap_or(0.0) + 1e-14;
    let first_in_band = match errs.iter().position(|&e| e <= band) {
        Some(i) => i,
        None => return false,
    };
    errs[..=first_in_band].windows(2).all(|w| w[1] < w[0])
        && errs[first_in_band..].iter().all(|&e| e <= band)
}

/// Floor-band value of the last iteration: the maximum of the final two
/// errors, which is stable against zero-crossing dips at the floor.
fn floor_band_value(errs: &[f64]) -> f64 {
    match errs.len() {
        0 => 0.0,
        1 => errs[0],
        n => errs[n - 1].max(errs[n - 2]),
    }
}

fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    let steps = (t_end / dt).round();
    if steps < 1.0 || ((steps * dt - t_end) / t_end).abs() > 1e-9 {
        return Err(SplitError::Domain(format!(
            "dt {dt} does not divide the final time {t_end}"
        )));
    }
    Ok(steps as usize)
}

/// Scalar integro-differential example: iterative modes against the closed
/// form, with the non-iterative schemes as baselines (they are exact here
/// because the scalar operators commute).
pub fn cmd_example1(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(vec!["scheme", "mode", "dt", "iteration", "error"]);
    let problem = Example1Problem::new(1.0, cfg.t_end)?;
    let exact = problem.exact(cfg.t_end);
    let schemes = cfg.scheme_kinds()?;
    let modes = cfg.iterative_modes()?;

    // per-mode, per-dt error columns for the hard checks
    let mut columns: Vec<(IterativeMode, f64, Vec<f64>)> = Vec::new();

    for &dt in &cfg.dts {
        let steps = steps_for(cfg.t_end, dt)?;
        for &scheme in &schemes {
            if scheme == SchemeKind::Iterative {
                continue;
            }
            let p = problem.split_problem(steps)?;
            let records = run_scheme(&p, scheme, None)?;
            let record = ErrorRecord {
                scheme: scheme.label().into(),
                dt,
                iterations: 0,
                error: (records.last().unwrap().state.get(0) - exact).abs(),
                norm: Norm::Inf.label(),
            };
            report.rows.push(error_row(&record, "-"));
        }
        if schemes.contains(&SchemeKind::Iterative) {
            for &mode in &modes {
                let mut errs = Vec::with_capacity(cfg.iters);
                for k in 1..=cfg.iters {
                    let p = problem.split_problem(steps)?;
                    let it_cfg = IterativeConfig {
                        eps: f64::MIN_POSITIVE,
                        ..IterativeConfig::new(k, 1.0, mode)
                    };
                    let records = run_scheme(&p, SchemeKind::Iterative, Some(&it_cfg))?;
                    let record = ErrorRecord {
                        scheme: "iterative".into(),
                        dt,
                        iterations: k,
                        error: (records.last().unwrap().state.get(0) - exact).abs(),
                        norm: Norm::Inf.label(),
                    };
                    report.rows.push(error_row(&record, mode.label()));
                    errs.push(record.error);
                }
                columns.push((mode, dt, errs));
            }
        }
    }

    // hard checks (evaluated on whatever cells the configuration produced)
    for (mode, dt, errs) in &columns {
        report.checks.push(Check::new(
            format!("monotone-to-floor {} dt={}", mode.label(), dt),
            decreases_to_floor(errs),
            format!("errors {errs:?}"),
        ));
    }
    if cfg.iters >= 8 {
        if let Some(best) = columns
            .iter()
            .filter(|(_, dt, _)| (dt - 0.0625).abs() < 1e-12)
            .map(|(_, _, errs)| errs[7])
            .min_by(|a, b| a.partial_cmp(b).unwrap())
        {
            report.checks.push(Check::new(
                "final accuracy at dt=2^-4, iteration 8",
                best <= 1e-5,
                format!("best mode error {best:.3e} (required <= 1e-5)"),
            ));
        }
        // each dt halving reduces the final-iteration error at least
        // fourfold, measured on the floor-band value
        for &mode in &modes {
            let mut chain: Vec<(f64, f64)> = columns
                .iter()
                .filter(|(m, _, _)| *m == mode)
                .map(|(_, dt, errs)| (*dt, floor_band_value(errs)))
                .collect();
            chain.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let mut gains = Vec::new();
            for w in chain.windows(2) {
                if (w[0].0 / w[1].0 - 2.0).abs() < 1e-9 && w[1].1 > 1e-13 {
                    gains.push(w[0].1 / w[1].1);
                }
            }
            if !gains.is_empty() {
                let min_gain = gains.iter().cloned().fold(f64::INFINITY, f64::min);
                report.checks.push(Check::new(
                    format!("halving gain {}", mode.label()),
                    min_gain >= 4.0,
                    format!("smallest per-halving error reduction {min_gain:.2}x"),
                ));
            }
        }
    }

    report.summary.push(format!(
        "example1: t_end={} config_hash={:016x}",
        cfg.t_end,
        cfg.hash()
    ));
    Ok(report)
}

/// Transport experiment: iterative modes against the fine-scale unsplit
/// reference, reported per iteration count.
pub fn cmd_transport(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(vec!["scheme", "mode", "dt", "iteration", "error"]);
    let section = &cfg.transport;
    let tc = section.to_transport_config();
    let closure = section.closure_kind()?;
    let steps = steps_for(section.t_end, section.dt)?;
    let grid = TimeGrid::new(0.0, section.t_end, steps)?;
    let c0 = gaussian_bump(&tc)?;
    let reference =
        reference_solution(&tc, &closure, &c0, &grid, section.refinement).map_err(|e| {
            SplitError::Domain(format!(
                "reference solution failed ({e}); reduce transport.dt or increase refinement"
            ))
        })?;

    let modes = cfg.iterative_modes()?;
    let mut columns: Vec<(IterativeMode, Vec<f64>)> = Vec::new();
    for &mode in &modes {
        let mut errs = Vec::with_capacity(section.iterations);
        for k in 1..=section.iterations {
            let records = run_transport_iterative(&tc, &closure, mode, k, &c0, &grid)?;
            let traj = Trajectory::from_records(&records)?;
            let record = ErrorRecord {
                scheme: "iterative".into(),
                dt: section.dt,
                iterations: k,
                error: error_vs_reference(&traj, &reference, &Norm::Inf)?,
                norm: Norm::Inf.label(),
            };
            report.rows.push(error_row(&record, mode.label()));
            errs.push(record.error);
        }
        columns.push((mode, errs));
    }

    // Errors must fall with the iteration count until they reach their
    // floor: the inner-quadrature/reference floor for the moment closure,
    // or the closure-discrepancy gap for the history closure (its memory
    // integral restarts each macro step while the reference carries the
    // global one, which is a property of the closure, not a defect).
    for (mode, errs) in &columns {
        report.checks.push(Check::new(
            format!("errors decrease to their floor, {}", mode.label()),
            decreases_to_floor(errs),
            format!("errors {errs:?}"),
        ));
    }
    let find = |mode: IterativeMode| columns.iter().find(|(m, _)| *m == mode).map(|(_, e)| e);
    if let (Some(ea), Some(eb)) = (
        find(IterativeMode::OneSidedA),
        find(IterativeMode::OneSidedB),
    ) {
        if section.iterations >= 4 {
            // 2% slack covers jitter when both modes sit on a common floor
            let pass = (3..section.iterations).all(|i| eb[i] <= ea[i] * 1.02 + 1e-13);
            let detail = (3..section.iterations)
                .map(|i| format!("k={}: b={:.3e} a={:.3e}", i + 1, eb[i], ea[i]))
                .collect::<Vec<_>>()
                .join("; ");
            report.checks.push(Check::new(
                "one-sided-b at least as accurate as one-sided-a for k >= 4",
                pass,
                detail,
            ));
        }
    }

    report.summary.push(format!(
        "transport: closure={} n_points={} dt={} t_end={} refinement={} config_hash={:016x}",
        section.closure,
        section.n_points,
        section.dt,
        section.t_end,
        section.refinement,
        cfg.hash()
    ));
    Ok(report)
}

fn final_error_linear(
    scheme: SchemeKind,
    a: &DenseMatrix,
    b: &DenseMatrix,
    c0: &Vector,
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    let steps = steps_for(t_end, dt)?;
    let grid = TimeGrid::new(0.0, t_end, steps)?;
    let p = splitsim::schemes::SplitProblem::new(
        a.clone(),
        splitsim::schemes::OperatorB::constant(b.clone()),
        c0.clone(),
        grid,
    )?;
    let records = run_scheme(&p, scheme, None)?;
    let exact = expm(&a.add(b).scale(t_end))?.matvec(c0);
    Ok(records.last().unwrap().state.sub(&exact).norm_inf())
}

/// Observed orders and leading-term fits on the standard noncommuting pair,
/// plus an exactness report for a commuting pair and fit constants for
/// seeded random pairs.
pub fn cmd_orders(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(vec!["case", "scheme", "metric", "value"]);
    let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?;
    let b = DenseMatrix::from_rows(&[&[0.0, 0.0], &[1.0, 0.0]])?;
    let c0 = Vector::from(vec![1.0, 1.0]);
    let dts: Vec<f64> = (0..7).map(|k| 0.1 / 2f64.powi(k)).collect();

    for (scheme, nominal) in [
        (SchemeKind::Lie, 1.0),
        (SchemeKind::Swss, 2.0),
        (SchemeKind::Strang, 2.0),
    ] {
        let samples: Vec<(f64, f64)> = dts
            .iter()
            .map(|&dt| Ok((dt, final_error_linear(scheme, &a, &b, &c0, 1.0, dt)?)))
            .collect::<Result<_>>()?;
        match observed_order(scheme.label(), &samples)? {
            OrderOutcome::Estimate(est) => {
                report.rows.push(vec![
                    "noncommuting".into(),
                    scheme.label().into(),
                    "observed_order".into(),
                    sci(est.observed_order),
                ]);
                report.checks.push(Check::new(
                    format!("order {}", scheme.label()),
                    (est.observed_order - nominal).abs() <= 0.15,
                    format!("observed {:.3} nominal {nominal}", est.observed_order),
                ));
            }
            OrderOutcome::Exact => {
                report.rows.push(vec![
                    "noncommuting".into(),
                    scheme.label().into(),
                    "observed_order_floor".into(),
                    sci(0.0),
                ]);
                report.checks.push(Check::new(
                    format!("order {}", scheme.label()),
                    false,
                    "unexpectedly exact on a noncommuting pair",
                ));
            }
        }
    }

    // leading-term fits on the standard pair
    let fit_dts = [1e-2, 5e-3, 2.5e-3];
    for (scheme, label, min_residual_order) in [
        (LeadingTermScheme::Lie, "lie", 2.0),
        (LeadingTermScheme::Strang, "strang", 3.0),
    ] {
        match leading_term_fit(scheme, &a, &b, &c0, &fit_dts)? {
            LeadingTermFit::Fit {
                constant,
                residual_order,
            } => {
                report.rows.push(vec![
                    "noncommuting".into(),
                    label.into(),
                    "fit_constant".into(),
                    sci(constant),
                ]);
                report.rows.push(vec![
                    "noncommuting".into(),
                    label.into(),
                    "residual_order".into(),
                    sci(residual_order),
                ]);
                report.checks.push(Check::new(
                    format!("leading-term constant {label}"),
                    (constant - 1.0).abs() <= 0.1,
                    format!("constant {constant:.4}"),
                ));
                report.checks.push(Check::new(
                    format!("residual order {label}"),
                    residual_order >= min_residual_order,
                    format!("residual order {residual_order:.2} (>= {min_residual_order})"),
                ));
            }
            LeadingTermFit::Exact => {
                report.checks.push(Check::new(
                    format!("leading-term constant {label}"),
                    false,
                    "unexpectedly exact",
                ));
            }
        }
    }

    // commuting pair: every scheme is exact to rounding
    let d1 = DenseMatrix::from_diagonal(&[0.6, -0.3]);
    let d2 = DenseMatrix::from_diagonal(&[-0.2, 0.4]);
    for scheme in [SchemeKind::Lie, SchemeKind::Swss, SchemeKind::Strang] {
        let mut max_err = 0f64;
        for &dt in &[0.1, 0.05] {
            max_err = max_err.max(final_error_linear(scheme, &d1, &d2, &c0, 1.0, dt)?);
        }
        report.rows.push(vec![
            "commuting".into(),
            scheme.label().into(),
            "max_error".into(),
            sci(max_err),
        ]);
        report.checks.push(Check::new(
            format!("commuting exactness {}", scheme.label()),
            max_err < 1e-12,
            format!("max error {max_err:.3e}"),
        ));
    }

    // random noncommuting pairs: the lie fit constant stays near 1
    let mut rng = SplitMix64::new(cfg.seed);
    let mut worst: f64 = 1.0;
    for _ in 0..5 {
        let data_a: Vec<f64> = (0..4).map(|_| rng.range(-1.0, 1.0)).collect();
        let data_b: Vec<f64> = (0..4).map(|_| rng.range(-1.0, 1.0)).collect();
        let ra = DenseMatrix::new(2, 2, data_a)?;
        let rb = DenseMatrix::new(2, 2, data_b)?;
        if let LeadingTermFit::Fit { constant, .. } =
            leading_term_fit(LeadingTermScheme::Lie, &ra, &rb, &c0, &fit_dts)?
        {
            if (constant - 1.0).abs() > (worst - 1.0).abs() {
                worst = constant;
            }
        }
    }
    report.rows.push(vec![
        "random".into(),
        "lie".into(),
        "worst_fit_constant".into(),
        sci(worst),
    ]);
    report.checks.push(Check::new(
        "random-pair lie fit constants",
        (0.8..=1.2).contains(&worst),
        format!("worst constant {worst:.4}"),
    ));

    report.summary.push(format!(
        "orders: seed={} config_hash={:016x}",
        cfg.seed,
        cfg.hash()
    ));
    Ok(report)
}

/// Degree-of-exactness and composite-order verification for the four
/// closed Newton-Cotes rules.
pub fn cmd_quadcheck(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(vec!["rule", "metric", "value"]);
    let mut rng = SplitMix64::new(cfg.seed);

    for degree in 1..=4usize {
        let rule = rule_coefficients(degree)?;
        let dexact = rule.degree_of_exactness();

        // exactness on random polynomials with positive coefficients (the
        // lower bound keeps the relative error well defined)
        let mut worst_rel = 0f64;
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..=dexact).map(|_| rng.range(0.2, 1.2)).collect();
            let (lo, hi) = (0.0f64, 1.5f64);
            let exact: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    c * (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k as f64 + 1.0)
                })
                .sum();
            let panels = 1 + (rng.next_u64() % 3) as usize;
            let got = integrate(
                |x| {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * x.powi(k as i32))
                        .sum()
                },
                lo,
                hi,
                &rule,
                panels,
            )?;
            worst_rel = worst_rel.max((got - exact).abs() / exact.abs());
        }
        report.rows.push(vec![
            rule.name().into(),
            format!("exactness_residual_deg{dexact}"),
            sci(worst_rel),
        ]);
        report.checks.push(Check::new(
            format!("degree-of-exactness {}", rule.name()),
            worst_rel < 1e-12,
            format!("worst relative residual {worst_rel:.3e}"),
        ));

        // composite order on exp over [0, 1]
        let nominal = match degree {
            1 => 2.0,
            2 | 3 => 4.0,
            _ => 6.0,
        };
        let panel_chain: Vec<usize> = match degree {
            1 => vec![8, 16, 32, 64],
            2 | 3 => vec![2, 4, 8, 16],
            _ => vec![1, 2, 4, 8],
        };
        let exact = 1f64.exp() - 1.0;
        let errs: Vec<f64> = panel_chain
            .iter()
            .map(|&p| Ok((integrate(f64::exp, 0.0, 1.0, &rule, p)? - exact).abs()))
            .collect::<Result<_>>()?;
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let mean = orders.iter().sum::<f64>() / orders.len() as f64;
        report.rows.push(vec![
            rule.name().into(),
            "composite_order".into(),
            sci(mean),
        ]);
        report.checks.push(Check::new(
            format!("composite order {}", rule.name()),
            (mean - nominal).abs() <= 0.2,
            format!("observed {mean:.3} nominal {nominal}"),
        ));
    }

    report.summary.push(format!(
        "quadcheck: seed={} config_hash={:016x}",
        cfg.seed,
        cfg.hash()
    ));
    Ok(report)
}
