use crate::args::{Epsilon, Format, IdentifyArgs, LambdaArgs};
use crate::commands::simulate::{forward_traces, Truth};
use crate::error::{CliError, CliResult};
use crate::io::{self, fmt_f64, SCHEMA_VERSION};
use pointsource_core::forward::FreeSpaceMedium;
use pointsource_core::identify1d::{choose_branch, identify_1d, Branch, Recovery1D};
use pointsource_core::identifynd::{
    alpha_ladder, build_a0, locate_nd, recover_intensity_all, A0Matrix, ConditionD, DistanceEstimates, Multilateration,
};
use pointsource_core::laplace::{lambda_grid_advisor, Regularization};
use pointsource_core::model::{
    BoundaryCondition, CoefficientField1D, Coefficients, DriftFieldND, Scenario, SensorRecord, SpatialDomain,
};
use pointsource_core::{Point, TimeGrid};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct LambdaWindow {
    source: &'static str,
    lambda_min: f64,
    lambda_max: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct RegularizationReport {
    mode: &'static str,
    epsilon: Option<f64>,
}

#[derive(Serialize)]
struct PerLambda {
    lambda: f64,
    travel: f64,
    x: f64,
    weight: f64,
    bracketed: bool,
}

#[derive(Serialize)]
struct PairAttempt {
    sensors: [usize; 2],
    x_hat: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct LineReport {
    sensors: [usize; 2],
    branch: Branch,
    a_hat: f64,
    a_std_error: f64,
    admissible: bool,
    consistency_gap: f64,
    closed_form: bool,
    spread: f64,
    per_lambda: Vec<PerLambda>,
    attempts: Vec<PairAttempt>,
}

#[derive(Serialize)]
struct PairFitReport {
    i: usize,
    j: usize,
    d: f64,
    d_std_error: f64,
    log_rho: f64,
    log_rho_std_error: f64,
    rms_residual: f64,
    ladder_d: Option<f64>,
}

#[derive(Serialize)]
struct SpaceReport {
    alpha_ladder: Vec<f64>,
    distances: DistanceEstimates,
    pair_fits: Vec<PairFitReport>,
    reference_pair: Option<(usize, usize)>,
    multilateration: Option<Multilateration>,
    condition_d: ConditionD,
    a0: Option<A0Matrix>,
}

#[derive(Serialize)]
struct IntensityReport {
    sensor: usize,
    epsilon: Option<f64>,
    residual: Option<f64>,
    spread: Option<f64>,
    consistent: Option<bool>,
}

#[derive(Serialize)]
struct Evaluation {
    true_source: usize,
    true_location: Point,
    location_error: f64,
    intensity_window: [f64; 2],
    intensity_relative_l2: f64,
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    command: &'static str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    dimension: usize,
    data: String,
    background_subtracted: bool,
    regularization: RegularizationReport,
    lambda: Option<LambdaWindow>,
    x1_hat: Option<Point>,
    line: Option<LineReport>,
    space: Option<SpaceReport>,
    intensity: Option<IntensityReport>,
    evaluation: Option<Evaluation>,
    diagnostics: Vec<String>,
}

/// Pipeline output before evaluation.
struct Outcome {
    x1_hat: Point,
    q_hat: Vec<f64>,
    per_sensor: Vec<Vec<f64>>,
    line: Option<LineReport>,
    space: Option<SpaceReport>,
    intensity: IntensityReport,
    diagnostics: Vec<String>,
}

pub fn run(args: &IdentifyArgs) -> CliResult<()> {
    let scenario = io::load_scenario(&args.scenario)?;
    let data_path = io::resolve_data_path(args.data.as_deref(), &args.out)?;
    let mut data = io::read_sensor_data(&data_path, &scenario)?;
    let truth = load_truth(args.truth.as_deref(), &args.out)?;
    check_lambda_args(&args.lambda)?;

    let background = background(&scenario)?;
    if let Some(bg) = &background {
        for (d, b) in data.iter_mut().zip(bg) {
            for (v, w) in d.iter_mut().zip(b) {
                *v -= w;
            }
        }
    }
    let regularization = match args.epsilon {
        Epsilon::Auto => Regularization::Discrepancy { sigma: None },
        Epsilon::Fixed(e) => Regularization::Fixed(e),
    };
    let records = scenario
        .sensors
        .iter()
        .zip(&data)
        .map(|(b, s)| SensorRecord::new(*b, s.clone(), scenario.grid))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::validation("sensor data", e))?;

    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        command: "identify",
        status: "ok",
        stage: None,
        error: None,
        dimension: scenario.domain.dim(),
        data: data_path.display().to_string(),
        background_subtracted: background.is_some(),
        regularization: match args.epsilon {
            Epsilon::Auto => RegularizationReport { mode: "auto", epsilon: None },
            Epsilon::Fixed(e) => RegularizationReport { mode: "fixed", epsilon: Some(e) },
        },
        lambda: None,
        x1_hat: None,
        line: None,
        space: None,
        intensity: None,
        evaluation: None,
        diagnostics: Vec::new(),
    };

    io::ensure_dir(&args.out)?;
    let format = args.format.unwrap_or(Format::Json);
    let outcome = if scenario.domain.dim() == 1 {
        identify_line(&scenario, &records, &args.lambda, regularization, &mut report.lambda)
    } else {
        identify_space(&scenario, &records, &args.lambda, regularization, &mut report.lambda)
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            report.status = "failed";
            report.stage = Some(e.stage.clone());
            report.error = Some(e.message.clone());
            write_report(&args.out, format, &report)?;
            return Err(e);
        }
    };

    if let Some(t) = &truth {
        report.evaluation = evaluate(t, &scenario.grid, &outcome.x1_hat, &outcome.q_hat);
    }
    let mut columns = vec![outcome.q_hat.clone()];
    columns.extend(outcome.per_sensor.iter().cloned());
    write_intensity(&args.out.join("intensity.csv"), &scenario.grid, &columns)?;

    report.x1_hat = Some(outcome.x1_hat);
    report.line = outcome.line;
    report.space = outcome.space;
    report.intensity = Some(outcome.intensity);
    report.diagnostics = outcome.diagnostics;
    write_report(&args.out, format, &report)?;

    let coords: Vec<String> = outcome.x1_hat.coords().iter().map(|c| format!("{c:.6}")).collect();
    print!("x1_hat = ({})", coords.join(", "));
    if let Some(ev) = &report.evaluation {
        print!("; location error {:.3e}; intensity relative L2 {:.3e}", ev.location_error, ev.intensity_relative_l2);
    }
    println!();
    Ok(())
}

fn check_lambda_args(la: &LambdaArgs) -> CliResult<()> {
    for (name, v) in [("--lambda-min", la.lambda_min), ("--lambda-max", la.lambda_max)] {
        if let Some(v) = v {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::validation("arguments", format!("{name} must be positive, got {v}")));
            }
        }
    }
    if let (Some(lo), Some(hi)) = (la.lambda_min, la.lambda_max) {
        if !(lo < hi) {
            return Err(CliError::validation("arguments", "--lambda-min must be below --lambda-max"));
        }
    }
    if la.lambda_points.is_some_and(|p| p < 3) {
        return Err(CliError::validation("arguments", "--lambda-points must be at least 3"));
    }
    Ok(())
}

fn load_truth(explicit: Option<&Path>, out: &Path) -> CliResult<Option<Truth>> {
    match explicit {
        Some(p) => io::read_json(p, "ground truth").map(Some),
        None => {
            let p = out.join("truth.json");
            if p.exists() {
                io::read_json(&p, "ground truth").map(Some)
            } else {
                Ok(None)
            }
        }
    }
}

/// Sensor traces of the scenario with its sources removed, or `None` when
/// they vanish identically (zero initial field, forcing and boundary data).
fn background(scenario: &Scenario) -> CliResult<Option<Vec<Vec<f64>>>> {
    let SpatialDomain::Interval { left, right, .. } = &scenario.domain else {
        return Ok(None);
    };
    let nonzero = |v: &Option<Vec<f64>>| v.as_ref().is_some_and(|v| v.iter().any(|x| *x != 0.0));
    let bc_nonzero = |bc: &BoundaryCondition| bc.data().iter().any(|x| *x != 0.0);
    if !nonzero(&scenario.initial) && !nonzero(&scenario.forcing) && !bc_nonzero(left) && !bc_nonzero(right) {
        return Ok(None);
    }
    let mut bare = scenario.clone();
    bare.sources.clear();
    let (traces, _) =
        forward_traces(&bare, None).map_err(|e| CliError::new(e.kind, "background subtraction", e.message))?;
    Ok(Some(traces))
}

fn identification(stage: &str) -> impl Fn(pointsource_core::Error) -> CliError + '_ {
    move |e| CliError::identification(stage, e)
}

/// λ window from the overrides, falling back to the advisor for missing ends.
fn lambda_window(grid: &TimeGrid, delta: f64, la: &LambdaArgs) -> CliResult<(f64, f64, &'static str)> {
    match (la.lambda_min, la.lambda_max) {
        (Some(lo), Some(hi)) => Ok((lo, hi, "override")),
        (lo, hi) => {
            let adv = lambda_grid_advisor(grid, delta).map_err(identification("lambda window"))?;
            let (lo, hi) = (lo.unwrap_or(adv.lambda_min), hi.unwrap_or(adv.lambda_max));
            if !(lo < hi) {
                return Err(CliError::identification(
                    "lambda window",
                    format!("lambda window empty: lambda_min = {lo} >= lambda_max = {hi}"),
                ));
            }
            let source =
                if la.lambda_min.is_some() || la.lambda_max.is_some() { "override+advisor" } else { "advisor" };
            Ok((lo, hi, source))
        }
    }
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|k| lo * (ratio * k as f64).exp()).collect()
}

/// Coefficients on the line: the scenario field, or a constant field
/// covering the sensors for free space.
fn line_coefficients(scenario: &Scenario) -> CliResult<CoefficientField1D> {
    match (&scenario.domain, &scenario.coefficients) {
        (_, Coefficients::Field1D(c)) => Ok(c.clone()),
        (SpatialDomain::FreeSpace { reaction, diffusivity, .. }, _) => {
            let xs: Vec<f64> = scenario.sensors.iter().map(|p| p.x()).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = (hi - lo).max(1.0);
            CoefficientField1D::constant(lo - pad, hi + pad, 65, *diffusivity, 0.0, *reaction)
                .map_err(|e| CliError::validation("coefficients", e))
        }
        _ => Err(CliError::validation("coefficients", "no coefficient field for the line")),
    }
}

fn identify_line(
    scenario: &Scenario,
    records: &[SensorRecord],
    la: &LambdaArgs,
    regularization: Regularization,
    window: &mut Option<LambdaWindow>,
) -> CliResult<Outcome> {
    if records.len() < 2 {
        return Err(CliError::identification("sensor pairs", "need at least two sensors on the line"));
    }
    let coeffs = line_coefficients(scenario)?;
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].location.x().total_cmp(&records[b].location.x()));

    let points = la.lambda_points.unwrap_or(12);
    let mut attempts = Vec::new();
    let mut best: Option<Candidate> = None;
    let mut last_err = None;
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (b1, b2) = (records[i].location.x(), records[j].location.x());
        let attempt = lambda_window(&scenario.grid, 0.5 * (b2 - b1), la).and_then(|(lo, hi, source)| {
            let lambdas = geometric(lo, hi, points);
            let (branch, warning) = choose_branch(&scenario.domain, b1, b2);
            identify_1d(&records[i], &records[j], &coeffs, branch, &lambdas, regularization)
                .map(|rec| (rec, LambdaWindow { source, lambda_min: lo, lambda_max: hi, values: lambdas }, warning))
                .map_err(identification("one-dimensional identification"))
        });
        match attempt {
            Ok((rec, lw, warning)) => {
                attempts.push(PairAttempt { sensors: [i, j], x_hat: Some(rec.x1_hat), error: None });
                let s = score(&rec, b1, b2);
                if best.as_ref().is_none_or(|b| s < b.0) {
                    best = Some((s, [i, j], rec, lw, warning));
                }
            }
            Err(e) => {
                attempts.push(PairAttempt { sensors: [i, j], x_hat: None, error: Some(e.to_string()) });
                last_err = Some(e);
            }
        }
    }
    let Some((_, pair, rec, lw, warning)) = best else {
        return Err(last_err.unwrap_or_else(|| CliError::identification("sensor pairs", "no usable sensor pair")));
    };
    *window = Some(lw);

    let mut diagnostics = rec.diagnostics.clone();
    diagnostics.extend(warning);
    let (b1, b2) = (records[pair[0]].location.x(), records[pair[1]].location.x());
    if !(rec.x1_hat > b1 && rec.x1_hat < b2) {
        diagnostics.push(format!("recovered location {:.6} lies outside the sensor pair [{b1}, {b2}]", rec.x1_hat));
    }
    let sensor = pair[rec.intensity_sensor];
    let deconv = &rec.intensity.deconvolution;
    Ok(Outcome {
        x1_hat: Point::on_line(rec.x1_hat),
        q_hat: rec.q_hat.clone(),
        per_sensor: Vec::new(),
        intensity: IntensityReport {
            sensor,
            epsilon: Some(deconv.epsilon),
            residual: Some(deconv.residual),
            spread: None,
            consistent: None,
        },
        line: Some(LineReport {
            sensors: pair,
            branch: rec.location.branch,
            a_hat: rec.a_hat,
            a_std_error: rec.a_fit.std_error,
            admissible: rec.admissible,
            consistency_gap: rec.consistency_gap,
            closed_form: rec.location.closed_form,
            spread: rec.location.spread,
            per_lambda: rec
                .location
                .per_lambda
                .iter()
                .map(|e| PerLambda { lambda: e.lambda, travel: e.m, x: e.x, weight: e.weight, bracketed: e.bracketed })
                .collect(),
            attempts,
        }),
        space: None,
        diagnostics,
    })
}

type Score = (bool, bool, f64);
type Candidate = (Score, [usize; 2], Recovery1D, LambdaWindow, Option<String>);

/// Ranking of a pair result (lower is better): bracketed and admissible
/// first, then the smallest spread over the λ window.
fn score(rec: &Recovery1D, b1: f64, b2: f64) -> Score {
    let inside = rec.x1_hat > b1 && rec.x1_hat < b2;
    (!inside, !rec.admissible, rec.location.spread)
}

fn identify_space(
    scenario: &Scenario,
    records: &[SensorRecord],
    la: &LambdaArgs,
    regularization: Regularization,
    window: &mut Option<LambdaWindow>,
) -> CliResult<Outcome> {
    let SpatialDomain::FreeSpace { dim, reaction, diffusivity } = scenario.domain else {
        return Err(CliError::validation("domain", "multidimensional identification needs free space"));
    };
    let medium = FreeSpaceMedium { dim, reaction, diffusivity };
    let mut min_sep = f64::INFINITY;
    for (k, a) in scenario.sensors.iter().enumerate() {
        for b in &scenario.sensors[k + 1..] {
            min_sep = min_sep.min(a.distance(b));
        }
    }
    let delta = if min_sep.is_finite() { 0.5 * min_sep } else { 1.0 };
    let (lo, hi, source) = lambda_window(&scenario.grid, delta, la)?;
    let ladder = alpha_ladder(lo.sqrt(), hi.sqrt()).map_err(identification("lambda window"))?;
    *window =
        Some(LambdaWindow { source, lambda_min: lo, lambda_max: hi, values: ladder.iter().map(|a| a * a).collect() });

    let rec = locate_nd(records, &medium, &ladder).map_err(identification("multidimensional location"))?;
    let intensity = recover_intensity_all(records, &rec.distances.alpha, &medium, regularization)
        .map_err(identification("intensity recovery"))?;
    let mut diagnostics = rec.diagnostics.clone();
    if !intensity.consistent {
        diagnostics.push(format!("intensity spread across sensors {:.3e} exceeds tolerance", intensity.spread));
    }
    let drift = match &scenario.coefficients {
        Coefficients::Drift(d) => d.clone(),
        _ => DriftFieldND::Zero { dim },
    };
    let a0 = build_a0(&[rec.x1_hat], &scenario.sensors, &drift).ok();
    Ok(Outcome {
        x1_hat: rec.x1_hat,
        q_hat: intensity.q_hat.clone(),
        per_sensor: intensity.per_sensor.clone(),
        line: None,
        intensity: IntensityReport {
            sensor: intensity.nearest,
            epsilon: None,
            residual: None,
            spread: Some(intensity.spread),
            consistent: Some(intensity.consistent),
        },
        space: Some(SpaceReport {
            alpha_ladder: ladder,
            pair_fits: rec
                .pair_fits
                .iter()
                .map(|p| PairFitReport {
                    i: p.i,
                    j: p.j,
                    d: p.fit.d,
                    d_std_error: p.fit.d_std_error,
                    log_rho: p.fit.log_rho,
                    log_rho_std_error: p.fit.log_rho_std_error,
                    rms_residual: p.fit.rms_residual,
                    ladder_d: p.ladder.as_ref().map(|l| l.d),
                })
                .collect(),
            distances: rec.distances,
            reference_pair: rec.reference_pair,
            multilateration: rec.multilateration,
            condition_d: rec.condition_d,
            a0,
        }),
        diagnostics,
    })
}

/// Error metrics against the sidecar: nearest true source, and the
/// intensity relative L2 error over `[0.1T, T]`.
fn evaluate(truth: &Truth, grid: &TimeGrid, x_hat: &Point, q_hat: &[f64]) -> Option<Evaluation> {
    let (idx, src) = truth
        .sources
        .iter()
        .enumerate()
        .filter(|(_, s)| s.location.dim() == x_hat.dim())
        .min_by(|a, b| a.1.location.distance(x_hat).total_cmp(&b.1.location.distance(x_hat)))?;
    let q_true = src.intensity.sample(grid);
    let t0 = 0.1 * grid.horizon();
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..grid.len().min(q_hat.len()) {
        if grid.time(k) >= t0 {
            num += (q_hat[k] - q_true[k]).powi(2);
            den += q_true[k].powi(2);
        }
    }
    let rel = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Some(Evaluation {
        true_source: idx,
        true_location: src.location,
        location_error: src.location.distance(x_hat),
        intensity_window: [t0, grid.horizon()],
        intensity_relative_l2: rel,
    })
}

fn write_intensity(path: &Path, grid: &TimeGrid, columns: &[Vec<f64>]) -> CliResult<()> {
    let mut header = vec!["t".to_string(), "q_hat".to_string()];
    header.extend((1..columns.len()).map(|j| format!("q_sensor_{j}")));
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|k| {
            let mut row = vec![fmt_f64(grid.time(k))];
            row.extend(columns.iter().map(|c| fmt_f64(c[k])));
            row
        })
        .collect();
    io::write_rows(path, &header, &rows)
}

fn write_report(out: &Path, format: Format, report: &Report) -> CliResult<()> {
    match format {
        Format::Json => io::write_json(&out.join("report.json"), report),
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = vec![
                vec!["schema_version".into(), report.schema_version.to_string()],
                vec!["status".into(), report.status.into()],
                vec!["dimension".into(), report.dimension.to_string()],
            ];
            if let (Some(stage), Some(err)) = (&report.stage, &report.error) {
                rows.push(vec!["stage".into(), stage.clone()]);
                rows.push(vec!["error".into(), err.clone()]);
            }
            if let Some(x) = &report.x1_hat {
                for (k, c) in x.coords().iter().enumerate() {
                    rows.push(vec![format!("x1_hat_{}", k + 1), fmt_f64(*c)]);
                }
            }
            if let Some(ev) = &report.evaluation {
                rows.push(vec!["location_error".into(), fmt_f64(ev.location_error)]);
                rows.push(vec!["intensity_relative_l2".into(), fmt_f64(ev.intensity_relative_l2)]);
            }
            io::write_rows(&out.join("report.csv"), &["key".to_string(), "value".to_string()], &rows)
        }
    }
}
